"""Command-line interface.

Exit codes: 0 success, 1 validation/usage errors, 2 identifiability errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import csvio
from .analytics import EffortInputs, Segment, effort, q_from_proportions
from .configio import builtin_config_path, load_scenario
from .domain import classify_complete, mask as mask_records, scope_report
from .errors import IdentifiabilityError, SilentQError, ValidationError
from .estimators import (
    EmConfig,
    M1Policy,
    M2Policy,
    em_fit,
    loglik_complete,
    method1_fit,
    method2_fit,
    resolve_m0,
)
from .runners import (
    CHAT_TRUTH,
    ExperimentSpec,
    run_accuracy,
    run_queuefit,
    run_robustness,
    run_scenario,
    run_sensitivity,
)
from .simulator import BACKEND, erlang_a_oracle, sample_iid, simulate
from .domain import ClassWeights


def _scenario_path(args) -> Path:
    if args.config is not None:
        return Path(args.config)
    return builtin_config_path(f"{args.scenario}.cfg")


def _print_params(name: str, theta: float, q: float, gamma: float) -> None:
    print(f"{name}: theta={theta:.6g} per hour, q={q:.6g}, gamma={gamma:.6g} per hour")
    print(f"  mean patience = {60.0 / theta:.4g} minutes")


# ---------------------------------------------------------------------------
# subcommand handlers

def _cmd_sample(args) -> int:
    records = sample_iid(args.theta, args.gamma, args.q, args.n, args.seed)
    observations = [obs for obs, _ in records]
    out = Path(args.out or "sample.csv")
    csvio.write_observations(out, observations)
    print(f"wrote {len(observations)} observations to {out}")
    return 0


def _cmd_simulate(args) -> int:
    config, _ = load_scenario(_scenario_path(args), seed=args.seed)
    records, measures = simulate(config)
    out_dir = Path(args.out or "sim-out")
    out_dir.mkdir(parents=True, exist_ok=True)
    csvio.write_customer_records(out_dir / "records.csv", records)
    csvio.write_perf_measures(out_dir / "perf.csv", [measures])
    print(f"simulated {len(records)} customers (backend: {BACKEND})")
    print(
        f"p_wait={measures.p_wait:.4f} p_ab={measures.p_ab:.4f} "
        f"e_queue={measures.e_queue:.4f} e_wait={measures.e_wait:.6f}"
    )
    print(f"wrote records.csv and perf.csv to {out_dir}")
    return 0


def _cmd_mask(args) -> int:
    observations = csvio.ingest_observations(args.input, units=args.units)
    labeled = []
    for obs in observations:
        if obs.delta is None:
            raise ValidationError("mask requires complete records (delta on every row)")
        labeled.append((obs, classify_complete(obs.delta, obs.y)))
    masked = mask_records(labeled, p_ss=args.p_ss, seed=args.seed)
    out = Path(args.out or "masked.csv")
    csvio.write_observations(out, masked)
    n_m0 = sum(obs.delta is None for obs in masked)
    print(f"wrote {len(masked)} observations ({n_m0} uncertain) to {out}")
    return 0


def _cmd_estimate(args) -> int:
    data = csvio.ingest_observations(args.input, units=args.units)
    rows = []
    if args.method == "em":
        config = EmConfig(
            epsilon=args.epsilon,
            max_iters=args.max_iters,
            init=args.init,
            init_seed=args.seed,
        )
        trace = em_fit(data, config)
        params = trace.final
        rows.append(
            {
                "method": "em",
                "theta": repr(params.theta),
                "q": repr(params.q),
                "gamma": repr(params.gamma),
                "iterations": trace.n_iterations,
                "converged": trace.converged,
                "loglik": repr(trace.iterations[-1][1]),
            }
        )
        _print_params("em", params.theta, params.q, params.gamma)
        print(f"  {trace.n_iterations} iterations, converged={trace.converged}")
    elif args.method == "m1":
        policy = M1Policy(args.m0_policy or "as_service")
        params = method1_fit(data, policy)
        rows.append(
            {
                "method": f"m1_{policy.value}",
                "theta": repr(params.theta),
                "q": repr(params.q),
                "gamma": repr(params.gamma),
            }
        )
        _print_params(f"m1 ({policy.value})", params.theta, params.q, params.gamma)
    else:  # m2
        policy = M2Policy(args.m0_policy or "as_sab")
        labeled = resolve_m0(data, policy, threshold=args.threshold)
        params = method2_fit(labeled)
        ll = loglik_complete(
            [
                (
                    obs,
                    ClassWeights(
                        c1=float(cls.value == 1),
                        c2=float(cls.value == 2),
                        c3=float(cls.value == 3),
                    ),
                )
                for obs, cls in labeled
            ],
            params,
        )
        rows.append(
            {
                "method": f"m2_{policy.value}",
                "theta": repr(params.theta),
                "q": repr(params.q),
                "gamma": repr(params.gamma),
                "loglik": repr(ll),
            }
        )
        _print_params(f"m2 ({policy.value})", params.theta, params.q, params.gamma)
    if args.out:
        csvio.write_estimates(Path(args.out), rows)
        print(f"wrote estimates to {args.out}")
    return 0


def _parse_segment(text: str) -> Segment:
    parts = text.split(",")
    if len(parts) != 4:
        raise ValidationError(
            f"segment must be 'share,los_minutes,work_fraction,is_sab', got {text!r}"
        )
    try:
        share, los, wf = (float(p) for p in parts[:3])
    except ValueError:
        raise ValidationError(f"segment has non-numeric fields: {text!r}") from None
    flag = parts[3].strip().lower()
    if flag not in ("0", "1", "true", "false", "sab", "sr"):
        raise ValidationError(f"segment is_sab flag must be 0/1/true/false, got {parts[3]!r}")
    return Segment(share=share, los=los, work_fraction=wf, is_sab=flag in ("1", "true", "sab"))


def _cmd_effort(args) -> int:
    segments = tuple(_parse_segment(s) for s in args.segment)
    value = effort(EffortInputs(segments=segments))
    print(f"wasted-effort fraction: {value:.6g} ({100 * value:.2f}% of agent work time)")
    return 0


def _cmd_scope(args) -> int:
    p_ab_total, sab_share = scope_report(args.p_kab, args.p_m0, args.pi_bar)
    print(f"total abandonment probability: {p_ab_total:.6g}")
    print(f"silent share of abandonment:   {sab_share:.6g}")
    return 0


def _cmd_qdecomp(args) -> int:
    q = q_from_proportions(args.p_c2, args.p_m0, args.p_c3_given_m0)
    print(f"indication probability q = {q:.6g}")
    return 0


def _cmd_erlang_a(args) -> int:
    measures = erlang_a_oracle(args.lam, args.mu, args.theta, args.n_slots)
    print(f"P{{Wait > 0}}     = {measures.p_wait:.6g}")
    print(f"P{{Abandon}}      = {measures.p_ab:.6g}")
    print(f"E[Queue]        = {measures.e_queue:.6g}")
    print(f"E[Wait]         = {measures.e_wait:.6g} hours")
    return 0


def _cmd_experiment(args) -> int:
    spec = ExperimentSpec(
        replications=args.replications,
        sample_size=args.sample_size,
        seed=args.seed,
        output_dir=Path(args.out or f"experiment-{args.kind}"),
        p_ss=args.p_ss,
        em_restarts=args.em_restarts,
        partitions=args.partitions,
        sim_horizon=args.sim_horizon,
    )
    if args.kind == "accuracy":
        out = run_accuracy(spec)
    elif args.kind == "sensitivity":
        out = run_sensitivity(spec)
    elif args.kind == "robustness":
        if not args.data:
            raise ValidationError("experiment robustness requires --data OBSERVATIONS.csv")
        out = run_robustness(spec, args.data)
    elif args.kind == "queuefit":
        out = run_queuefit(spec, CHAT_TRUTH)
    else:  # scenario
        out = run_scenario(spec, _scenario_path(args))
    print(f"experiment '{args.kind}' complete; artifacts in {out}")
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="silentq",
        description="Patience estimation and queueing analysis under silent abandonment.",
    )
    parser.add_argument("--seed", type=int, default=0, help="master random seed")
    parser.add_argument("--out", default=None, help="output file or directory")
    parser.add_argument(
        "--units",
        choices=("hours", "minutes", "seconds"),
        default="hours",
        help="time units of ingested CSV durations",
    )
    # The same globals are accepted after the subcommand; SUPPRESS keeps the
    # subparser from clobbering values parsed before it.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    common.add_argument(
        "--units",
        choices=("hours", "minutes", "seconds"),
        default=argparse.SUPPRESS,
        help=argparse.SUPPRESS,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw i.i.d. complete-data observations", parents=[common])
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("simulate", help="run the queueing simulator on a scenario", parents=[common])
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--config", help="path to a scenario .cfg file")
    group.add_argument(
        "--scenario", choices=("messaging", "yefenof"), help="built-in scenario name"
    )
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("mask", help="degrade complete labels into the observable view", parents=[common])
    p.add_argument("input", help="complete-data observation CSV")
    p.add_argument("--p-ss", type=float, default=0.15, dest="p_ss")
    p.set_defaults(func=_cmd_mask)

    p = sub.add_parser("estimate", help="fit patience parameters to an observation CSV", parents=[common])
    p.add_argument("input", help="observation CSV")
    p.add_argument("--method", choices=("em", "m1", "m2"), required=True)
    p.add_argument(
        "--m0-policy",
        dest="m0_policy",
        choices=("as_service", "as_kab", "as_sab", "from_pi"),
        default=None,
        help="how to resolve uncertain records (m1: as_service/as_kab; m2: as_service/as_sab/from_pi)",
    )
    p.add_argument(
        "--init",
        choices=("all_sab", "all_sr", "fifty_fifty", "from_pi", "random"),
        default="random",
        help="EM initial weights",
    )
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=10_000, dest="max_iters")
    p.add_argument("--threshold", type=float, default=0.5, help="pi cutoff for from_pi")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("effort", help="wasted-effort fraction from workload segments", parents=[common])
    p.add_argument(
        "--segment",
        action="append",
        required=True,
        metavar="SHARE,LOS_MIN,WORK_FRACTION,IS_SAB",
        help="repeatable workload segment",
    )
    p.set_defaults(func=_cmd_effort)

    p = sub.add_parser("scope", help="total abandonment and its silent share", parents=[common])
    p.add_argument("--p-kab", type=float, required=True, dest="p_kab")
    p.add_argument("--p-m0", type=float, required=True, dest="p_m0")
    p.add_argument("--pi-bar", type=float, required=True, dest="pi_bar")
    p.set_defaults(func=_cmd_scope)

    p = sub.add_parser("qdecomp", help="indication probability from class proportions", parents=[common])
    p.add_argument("--p-c2", type=float, required=True, dest="p_c2")
    p.add_argument("--p-m0", type=float, required=True, dest="p_m0")
    p.add_argument("--p-c3-given-m0", type=float, required=True, dest="p_c3_given_m0")
    p.set_defaults(func=_cmd_qdecomp)

    p = sub.add_parser("erlang-a", help="analytic Erlang-A performance measures", parents=[common])
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--n-slots", type=int, required=True, dest="n_slots")
    p.set_defaults(func=_cmd_erlang_a)

    p = sub.add_parser("experiment", help="run a scripted experiment", parents=[common])
    p.add_argument(
        "kind", choices=("accuracy", "sensitivity", "robustness", "queuefit", "scenario")
    )
    p.add_argument("--replications", type=int, default=50)
    p.add_argument("--sample-size", type=int, default=2000, dest="sample_size")
    p.add_argument(
        "--p-ss",
        type=float,
        default=None,
        dest="p_ss",
        help="served-masking probability (default: 1 - q of each grid point)",
    )
    p.add_argument("--em-restarts", type=int, default=1, dest="em_restarts")
    p.add_argument("--partitions", type=int, default=10, help="robustness subsample count")
    p.add_argument("--data", default=None, help="observation CSV (robustness)")
    p.add_argument("--sim-horizon", type=float, default=200.0, dest="sim_horizon")
    p.add_argument("--config", default=None, help="scenario .cfg path (scenario)")
    p.add_argument(
        "--scenario",
        choices=("messaging", "yefenof"),
        default="messaging",
        help="built-in scenario name (scenario)",
    )
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IdentifiabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SilentQError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
