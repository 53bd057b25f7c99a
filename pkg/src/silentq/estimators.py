"""Patience estimators.

Three routes to the patience rate theta:

* Method 1 -- right-censored exponential MLE; uncertain records must first be
  relabelled as served or as known abandonments.
* Method 2 -- the complete-data left/right-censored MLE, i.e. one maximization
  of the complete-data log-likelihood with hard class labels.
* The EM algorithm -- iterates expected class weights and closed-form /
  root-solved parameter updates until the parameter change drops below a
  tolerance, handling the uncertain (M=0) records properly.

All three share the transcendental theta equation solved by `solve_theta`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .domain import ClassWeights, CompleteClass, Observation, ParamSet, classify_complete
from .errors import IdentifiabilityError, NumericsError, ValidationError

_THETA_RESIDUAL_TOL = 1e-10


class M1Policy(enum.Enum):
    """How Method 1 relabels uncertain (M=0) records."""

    AS_SERVICE = "as_service"
    AS_KAB = "as_kab"


class M2Policy(enum.Enum):
    """How Method 2 resolves uncertain (M=0) records into hard labels."""

    AS_SERVICE = "as_service"
    AS_SAB = "as_sab"
    FROM_PI = "from_pi"


_INIT_CHOICES = ("all_sab", "all_sr", "fifty_fifty", "from_pi", "random")


@dataclass(frozen=True)
class EmConfig:
    """EM tuning knobs: tolerance, iteration cap, and initial weights."""

    epsilon: float = 1e-6
    max_iters: int = 10_000
    init: str = "random"
    init_seed: int = 0

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValidationError(f"epsilon must be > 0, got {self.epsilon}")
        if self.max_iters < 1:
            raise ValidationError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.init not in _INIT_CHOICES:
            raise ValidationError(f"init must be one of {_INIT_CHOICES}, got {self.init!r}")


@dataclass
class EmTrace:
    """Parameter path of one EM run, with the observed-data log-likelihood."""

    iterations: list[tuple[ParamSet, float]] = field(default_factory=list)
    converged: bool = False

    @property
    def final(self) -> ParamSet:
        return self.iterations[-1][0]

    @property
    def n_iterations(self) -> int:
        return len(self.iterations)


# ---------------------------------------------------------------------------
# array plumbing

# Internal per-record codes.  The first three mirror the MissingClass values;
# KNOWN_SAB covers complete-data records (delta=1, y=0) whose silent
# abandonment is certain and therefore keeps a hard c3 = 1 weight.
_UNCERTAIN = 0
_SERVICE = 1
_KAB = 2
_KNOWN_SAB = 3


def _classify(obs: Observation) -> int:
    if obs.delta is None:
        return _UNCERTAIN
    if obs.delta == 0:
        return _SERVICE
    return _KAB if obs.y == 1 else _KNOWN_SAB


def _to_arrays(data: Sequence[Observation]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(u, m, pi) arrays; m uses the internal codes, pi is nan if absent."""
    n = len(data)
    u = np.empty(n)
    m = np.empty(n, dtype=np.int64)
    pi = np.full(n, np.nan)
    for i, obs in enumerate(data):
        u[i] = obs.u
        m[i] = _classify(obs)
        if obs.pi is not None:
            pi[i] = obs.pi
    return u, m, pi


def _one_minus_exp(x: np.ndarray | float) -> np.ndarray | float:
    """1 - exp(-x), stable for small x."""
    return -np.expm1(-x)


# ---------------------------------------------------------------------------
# likelihoods

def loglik_complete(
    data: Sequence[tuple[Observation, ClassWeights]], params: ParamSet
) -> float:
    """Weighted complete-data log-likelihood.

    With indicator weights this is the plain complete-data log-likelihood;
    with fractional weights it is the EM surrogate.  Degenerate q or gamma
    against a class with positive mass yields -inf (an explicit sentinel,
    never an exception).
    """
    if not data:
        return 0.0
    u = np.array([obs.u for obs, _ in data])
    c1 = np.array([w.c1 for _, w in data])
    c2 = np.array([w.c2 for _, w in data])
    c3 = np.array([w.c3 for _, w in data])
    return _loglik_complete_arrays(u, c1, c2, c3, params.theta, params.q, params.gamma)


def _loglik_complete_arrays(
    u: np.ndarray,
    c1: np.ndarray,
    c2: np.ndarray,
    c3: np.ndarray,
    theta: float,
    q: float,
    gamma: float,
) -> float:
    log_gamma = math.log(gamma) if gamma > 0 else -math.inf
    log_q = math.log(q) if q > 0 else -math.inf
    log_1mq = math.log1p(-q) if q < 1 else -math.inf

    if not math.isfinite(log_gamma) and np.any((c1 > 0) | (c3 > 0)):
        return -math.inf
    if not math.isfinite(log_q) and np.any(c2 > 0):
        return -math.inf
    if not math.isfinite(log_1mq) and np.any(c3 > 0):
        return -math.inf

    total = 0.0
    total += float(np.sum(c1 * (-gamma * u - theta * u))) + log_gamma * float(np.sum(c1))
    total += float(np.sum(c2 * (-theta * u - gamma * u)))
    if np.any(c2 > 0):
        total += (math.log(theta) + log_q) * float(np.sum(c2))
    if np.any(c3 > 0):
        with np.errstate(divide="ignore"):
            log_cdf = np.log(_one_minus_exp(theta * u))
        total += float(np.sum(np.where(c3 > 0, c3 * log_cdf, 0.0)))
        total += float(np.sum(c3 * (-gamma * u))) + (log_1mq + log_gamma) * float(np.sum(c3))
    return total


def _observed_loglik(
    u: np.ndarray, m: np.ndarray, theta: float, q: float, gamma: float
) -> float:
    """Log-likelihood of the observable data, missing labels marginalised out."""
    log_gamma = math.log(gamma) if gamma > 0 else -math.inf
    m1 = m == _SERVICE
    m2 = m == _KAB
    m0 = m == _UNCERTAIN
    m3 = m == _KNOWN_SAB

    if not math.isfinite(log_gamma) and np.any(m1 | m0 | m3):
        return -math.inf
    total = 0.0
    if np.any(m1):
        total += float(np.sum(-(gamma + theta) * u[m1])) + log_gamma * int(np.sum(m1))
    if np.any(m2):
        if q == 0.0:
            return -math.inf
        total += float(np.sum(-(theta + gamma) * u[m2]))
        total += (math.log(q) + math.log(theta)) * int(np.sum(m2))
    if np.any(m0):
        u0 = u[m0]
        mix = np.exp(-theta * u0) + (1.0 - q) * _one_minus_exp(theta * u0)
        with np.errstate(divide="ignore"):
            total += float(np.sum(np.log(mix) - gamma * u0)) + log_gamma * int(np.sum(m0))
    if np.any(m3):
        if q == 1.0:
            return -math.inf
        u3 = u[m3]
        with np.errstate(divide="ignore"):
            total += float(np.sum(np.log(_one_minus_exp(theta * u3)) - gamma * u3))
        total += (log_gamma + math.log1p(-q)) * int(np.sum(m3))
    return total


# ---------------------------------------------------------------------------
# E-step and M-step

def e_step(data: Sequence[Observation], params: ParamSet) -> list[ClassWeights]:
    """Expected class weights given current parameters.

    Complete records keep their indicator weights; uncertain records get
    c3 = P{patience <= wait} = 1 - exp(-theta * u).
    """
    u, m, _ = _to_arrays(data)
    c1, c2, c3 = _e_step_arrays(u, m, params.theta)
    return [ClassWeights(c1=a, c2=b, c3=c) for a, b, c in zip(c1, c2, c3)]


def _e_step_arrays(
    u: np.ndarray, m: np.ndarray, theta: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m0 = m == _UNCERTAIN
    c2 = (m == _KAB).astype(float)
    c3 = np.where(m0, _one_minus_exp(theta * u), (m == _KNOWN_SAB).astype(float))
    c1 = np.where(m0, 1.0 - c3, (m == _SERVICE).astype(float))
    return c1, c2, c3


def m_step(data: Sequence[Observation], weights: Sequence[ClassWeights]) -> ParamSet:
    """Closed-form q and gamma updates plus the root-solved theta update."""
    if len(data) != len(weights):
        raise ValidationError("data and weights must have equal length")
    u = np.array([obs.u for obs in data])
    c1 = np.array([w.c1 for w in weights])
    c2 = np.array([w.c2 for w in weights])
    c3 = np.array([w.c3 for w in weights])
    return _m_step_arrays(u, c1, c2, c3)


def _m_step_arrays(
    u: np.ndarray, c1: np.ndarray, c2: np.ndarray, c3: np.ndarray
) -> ParamSet:
    sum_u = float(np.sum(u))
    if sum_u <= 0:
        raise ValidationError("total observed time must be positive")
    ab_mass = float(np.sum(1.0 - c1))
    if ab_mass <= 0.0:
        raise IdentifiabilityError("q is unidentifiable: no abandonment mass in the weights")
    q = float(np.sum(c2)) / ab_mass
    gamma = float(np.sum(1.0 - c2)) / sum_u
    theta = _solve_theta_arrays(u, c2, c3)
    return ParamSet(theta=theta, q=min(max(q, 0.0), 1.0), gamma=gamma)


def solve_theta(coeffs: Sequence[tuple[float, float, float]]) -> float:
    """Solve the theta stationarity equation for per-record (u, c2, c3).

    Brackets the unique positive root by doubling an upper bound until the
    sign flips, then bisects until the residual is below 1e-10.
    """
    u = np.array([c[0] for c in coeffs])
    c2 = np.array([c[1] for c in coeffs])
    c3 = np.array([c[2] for c in coeffs])
    return _solve_theta_arrays(u, c2, c3)


def _theta_score(theta: float, u: np.ndarray, c2: np.ndarray, c3: np.ndarray) -> float:
    """theta * sum((c3-1)u) + sum(c2) + theta * sum(c3 * u e^{-theta u}/(1-e^{-theta u}))."""
    x = theta * u
    frac = u * np.exp(-x) / _one_minus_exp(x)
    return (
        theta * float(np.sum((c3 - 1.0) * u))
        + float(np.sum(c2))
        + theta * float(np.sum(c3 * frac))
    )


def _solve_theta_arrays(u: np.ndarray, c2: np.ndarray, c3: np.ndarray) -> float:
    if not np.any((c2 > 0) | (c3 > 0)):
        raise IdentifiabilityError(
            "theta is unidentifiable: no abandonment mass (all weights on service)"
        )
    lo = 1e-12
    f_lo = _theta_score(lo, u, c2, c3)
    if f_lo <= 0.0:
        # The score is positive at 0+ whenever abandonment mass exists.
        raise IdentifiabilityError("theta score has no positive bracket at the lower bound")
    hi = 1.0
    f_hi = _theta_score(hi, u, c2, c3)
    doublings = 0
    while f_hi > 0.0:
        doublings += 1
        if doublings > 200:
            raise IdentifiabilityError("theta is unidentifiable: score never changes sign")
        hi *= 2.0
        f_hi = _theta_score(hi, u, c2, c3)
    best = hi
    for _ in range(500):
        mid = 0.5 * (lo + hi)
        f_mid = _theta_score(mid, u, c2, c3)
        best = mid
        if abs(f_mid) < _THETA_RESIDUAL_TOL:
            return mid
        if f_mid > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4.0 * np.finfo(float).eps * mid:
            break
    # The 1e-10 absolute target is unreachable once the score terms sum
    # hundreds of thousands of records: rounding alone exceeds it.  Accept
    # the bisection limit when the residual is at the float noise floor of
    # the score's own magnitude, and fail loudly otherwise.
    scale = (
        best * float(np.sum(np.abs(c3 - 1.0) * u))
        + float(np.sum(c2))
        + best * float(np.sum(c3 * u * np.exp(-best * u) / _one_minus_exp(best * u)))
    )
    noise_floor = 64.0 * np.finfo(float).eps * max(1.0, scale)
    if abs(_theta_score(best, u, c2, c3)) >= max(_THETA_RESIDUAL_TOL, noise_floor):
        raise NumericsError(
            "theta solver could not reach the 1e-10 residual target at this data scale"
        )
    return best


# ---------------------------------------------------------------------------
# fitters

def em_fit(data: Sequence[Observation], config: EmConfig = EmConfig()) -> EmTrace:
    """Run the EM algorithm and return the full parameter trace.

    Initial c3 weights over the uncertain records follow `config.init`;
    starting parameters come from one M-step on those weights, and the loop
    alternates E- and M-steps until the summed absolute parameter change
    drops below `config.epsilon`.
    """
    if not data:
        raise ValidationError("em_fit requires a nonempty dataset")
    u, m, pi = _to_arrays(data)
    m0 = m == _UNCERTAIN
    m2 = m == _KAB
    m3 = m == _KNOWN_SAB
    if not np.any(m0 | m2 | m3):
        raise IdentifiabilityError("em_fit requires at least one abandoning or uncertain record")

    n_m0 = int(np.sum(m0))
    if config.init == "all_sab":
        c3_init = np.ones(n_m0)
    elif config.init == "all_sr":
        c3_init = np.zeros(n_m0)
    elif config.init == "fifty_fifty":
        c3_init = np.where(np.arange(n_m0) % 2 == 0, 1.0, 0.0)
    elif config.init == "from_pi":
        c3_init = pi[m0]
        if np.any(np.isnan(c3_init)):
            raise ValidationError("from_pi initialization requires pi on every uncertain record")
    else:  # random
        c3_init = np.random.default_rng(config.init_seed).random(n_m0)

    c2 = m2.astype(float)
    c3 = m3.astype(float)
    c3[m0] = c3_init
    c1 = np.where(m0, 1.0 - c3, (m == _SERVICE).astype(float))

    trace = EmTrace()
    params = _m_step_arrays(u, c1, c2, c3)
    trace.iterations.append((params, _observed_loglik(u, m, params.theta, params.q, params.gamma)))
    for _ in range(config.max_iters):
        c1, c2, c3 = _e_step_arrays(u, m, params.theta)
        new_params = _m_step_arrays(u, c1, c2, c3)
        trace.iterations.append(
            (new_params, _observed_loglik(u, m, new_params.theta, new_params.q, new_params.gamma))
        )
        delta = (
            abs(new_params.theta - params.theta)
            + abs(new_params.q - params.q)
            + abs(new_params.gamma - params.gamma)
        )
        params = new_params
        if delta <= config.epsilon:
            trace.converged = True
            break
    return trace


def method1_fit(data: Sequence[Observation], m0_policy: M1Policy) -> ParamSet:
    """Right-censored exponential MLE (patience from abandonment counts only).

    Uncertain records are relabelled per the policy; silent abandonment is
    not modelled, so q is reported as 1.
    """
    if not data:
        raise ValidationError("method1_fit requires a nonempty dataset")
    u, m, _ = _to_arrays(data)
    unresolved = (m == _UNCERTAIN) | (m == _KNOWN_SAB)
    abandoned = m == _KAB
    if m0_policy is M1Policy.AS_KAB:
        abandoned = abandoned | unresolved
    n_ab = int(np.sum(abandoned))
    if n_ab == 0:
        raise IdentifiabilityError("theta is unidentifiable: no abandonments after relabelling")
    sum_u = float(np.sum(u))
    return ParamSet(theta=n_ab / sum_u, q=1.0, gamma=(len(data) - n_ab) / sum_u)


def resolve_m0(
    data: Sequence[Observation], policy: M2Policy, threshold: float = 0.5
) -> list[tuple[Observation, CompleteClass]]:
    """Attach hard class labels, resolving uncertain records per the policy."""
    labeled: list[tuple[Observation, CompleteClass]] = []
    for obs in data:
        if obs.delta is not None:
            labeled.append((obs, classify_complete(obs.delta, obs.y)))
            continue
        if policy is M2Policy.AS_SERVICE:
            cls = CompleteClass.C1_SERVICE
        elif policy is M2Policy.AS_SAB:
            cls = CompleteClass.C3_SILENT_ABANDONMENT
        else:
            if obs.pi is None:
                raise ValidationError("from_pi resolution requires pi on every uncertain record")
            cls = (
                CompleteClass.C3_SILENT_ABANDONMENT
                if obs.pi >= threshold
                else CompleteClass.C1_SERVICE
            )
        labeled.append((obs, cls))
    return labeled


def method2_fit(labeled: Sequence[tuple[Observation, CompleteClass]]) -> ParamSet:
    """Complete-data left/right-censored MLE: one M-step on indicator weights."""
    if not labeled:
        raise ValidationError("method2_fit requires a nonempty dataset")
    u = np.array([obs.u for obs, _ in labeled])
    c1 = np.array([1.0 if cls is CompleteClass.C1_SERVICE else 0.0 for _, cls in labeled])
    c2 = np.array(
        [1.0 if cls is CompleteClass.C2_KNOWN_ABANDONMENT else 0.0 for _, cls in labeled]
    )
    c3 = np.array(
        [1.0 if cls is CompleteClass.C3_SILENT_ABANDONMENT else 0.0 for _, cls in labeled]
    )
    return _m_step_arrays(u, c1, c2, c3)
