"""CSV round-trips, unit conversion, and scenario config parsing."""

from __future__ import annotations

import math
from pathlib import Path

import pytest

from silentq import Observation, ValidationError
from silentq.configio import builtin_config_path, load_scenario, parse_kv_file
from silentq.csvio import (
    ingest_observations,
    write_estimates,
    write_observations,
    write_rmse_table,
)

SAMPLE = [
    Observation(u=0.25, y=0, delta=0),
    Observation(u=0.03125, y=1, delta=1),
    Observation(u=0.1, y=0, delta=None, pi=0.75),
    Observation(u=1.0 / 3.0, y=0, delta=1),
]


class TestObservationsCsv:
    def test_round_trip_exact(self, tmp_path: Path) -> None:
        path = tmp_path / "obs.csv"
        write_observations(path, SAMPLE)
        back = ingest_observations(path)
        assert back == SAMPLE

    def test_unit_conversion(self, tmp_path: Path) -> None:
        path = tmp_path / "obs.csv"
        path.write_text("u_hours,y,delta,pi\n30,0,0,\n", encoding="utf-8")
        [obs] = ingest_observations(path, units="minutes")
        assert obs.u == pytest.approx(0.5)
        [obs] = ingest_observations(path, units="seconds")
        assert obs.u == pytest.approx(30.0 / 3600.0)

    def test_unknown_units(self, tmp_path: Path) -> None:
        with pytest.raises(ValidationError):
            ingest_observations(tmp_path / "x.csv", units="days")

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(ValidationError):
            ingest_observations(tmp_path / "nope.csv")

    def test_wrong_header(self, tmp_path: Path) -> None:
        path = tmp_path / "obs.csv"
        path.write_text("time,y,delta,pi\n1,0,0,\n", encoding="utf-8")
        with pytest.raises(ValidationError):
            ingest_observations(path)

    def test_bad_row_reports_line_number(self, tmp_path: Path) -> None:
        path = tmp_path / "obs.csv"
        path.write_text("u_hours,y,delta,pi\n1,0,0,\n-2,0,0,\n", encoding="utf-8")
        with pytest.raises(ValidationError, match="row 3"):
            ingest_observations(path)

    def test_blank_lines_skipped(self, tmp_path: Path) -> None:
        path = tmp_path / "obs.csv"
        path.write_text("u_hours,y,delta,pi\n1,0,0,\n\n", encoding="utf-8")
        assert len(ingest_observations(path)) == 1

    def test_lf_line_endings(self, tmp_path: Path) -> None:
        path = tmp_path / "obs.csv"
        write_observations(path, SAMPLE)
        raw = path.read_bytes()
        assert b"\r" not in raw


class TestOtherWriters:
    def test_estimates_header(self, tmp_path: Path) -> None:
        path = tmp_path / "est.csv"
        write_estimates(path, [{"method": "em", "theta": "4.0"}])
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "method,theta,q,gamma,iterations,converged,loglik"
        assert lines[1].startswith("em,4.0")

    def test_rmse_table(self, tmp_path: Path) -> None:
        path = tmp_path / "rmse.csv"
        write_rmse_table(path, [("model5", "e_wait", 0.125)])
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines == ["model,measure,rmse", "model5,e_wait,0.125"]


class TestConfigio:
    def test_builtin_configs_load(self) -> None:
        for name in ("messaging.cfg", "yefenof.cfg"):
            config, p_ss = load_scenario(builtin_config_path(name), seed=3)
            assert config.seed == 3
            assert 0.0 <= p_ss <= 1.0

    def test_messaging_values(self) -> None:
        config, p_ss = load_scenario(builtin_config_path("messaging.cfg"))
        assert config.lam == 753.0
        assert config.theta == 0.739
        assert config.q == 0.332
        assert config.n_slots == 452
        assert config.mu_sr == 1.22
        assert config.warmup == 2.0
        assert p_ss == pytest.approx(1.0 - 0.332)

    def test_unknown_builtin(self) -> None:
        with pytest.raises(ValidationError):
            builtin_config_path("nope.cfg")

    def _write(self, tmp_path: Path, body: str) -> Path:
        path = tmp_path / "scenario.cfg"
        path.write_text(body, encoding="utf-8")
        return path

    BASE = (
        "lambda_per_hour = 10\ntheta_per_hour = 2\nq = 0.5\nn_slots = 3\n"
        "mu_sr_per_hour = 4\nmu_sab_per_hour = {mu_sab}\n"
        "horizon_hours = 10\nwarmup_hours = 1\n"
    )

    def test_mu_sab_inf(self, tmp_path: Path) -> None:
        config, _ = load_scenario(self._write(tmp_path, self.BASE.format(mu_sab="inf")))
        assert math.isinf(config.mu_sab)

    def test_unknown_key(self, tmp_path: Path) -> None:
        body = self.BASE.format(mu_sab=4) + "typo_key = 1\n"
        with pytest.raises(ValidationError, match="unknown"):
            load_scenario(self._write(tmp_path, body))

    def test_missing_key(self, tmp_path: Path) -> None:
        body = "lambda_per_hour = 10\n"
        with pytest.raises(ValidationError, match="missing"):
            load_scenario(self._write(tmp_path, body))

    def test_duplicate_key(self, tmp_path: Path) -> None:
        body = self.BASE.format(mu_sab=4) + "q = 0.6\n"
        with pytest.raises(ValidationError, match="duplicate"):
            load_scenario(self._write(tmp_path, body))

    def test_comments_and_blanks_ignored(self, tmp_path: Path) -> None:
        body = "# comment\n\n" + self.BASE.format(mu_sab=4)
        config, _ = load_scenario(self._write(tmp_path, body))
        assert config.lam == 10.0

    def test_parse_kv_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(ValidationError):
            parse_kv_file(tmp_path / "nope.cfg")
