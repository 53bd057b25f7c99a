"""Data-model validation, class taxonomy, masking, and scope arithmetic."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from silentq import (
    ClassWeights,
    CompleteClass,
    MissingClass,
    Observation,
    ParamSet,
    ValidationError,
    classify_complete,
    mask,
    scope_report,
)


class TestObservation:
    def test_valid_served(self) -> None:
        obs = Observation(u=0.5, y=0, delta=0)
        assert obs.missing_class is MissingClass.M1_SERVICE

    def test_valid_known_abandonment(self) -> None:
        obs = Observation(u=0.1, y=1, delta=1)
        assert obs.missing_class is MissingClass.M2_KNOWN_ABANDONMENT

    def test_valid_uncertain(self) -> None:
        obs = Observation(u=0.1, y=0, delta=None, pi=0.3)
        assert obs.missing_class is MissingClass.M0_UNCERTAIN

    def test_complete_silent_abandonment_files_as_uncertain(self) -> None:
        # delta=1, y=0 leaves no indication: the missing-data view is M0
        obs = Observation(u=0.1, y=0, delta=1)
        assert obs.missing_class is MissingClass.M0_UNCERTAIN

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(u=0.0, y=0, delta=0),
            dict(u=-1.0, y=0, delta=0),
            dict(u=float("nan"), y=0, delta=0),
            dict(u=float("inf"), y=0, delta=0),
            dict(u=1.0, y=2, delta=1),
            dict(u=1.0, y=1, delta=0),
            dict(u=1.0, y=1, delta=None),
            dict(u=1.0, y=0, delta=3),
            dict(u=1.0, y=0, delta=0, pi=0.5),
            dict(u=1.0, y=0, delta=None, pi=1.5),
            dict(u=1.0, y=0, delta=None, pi=-0.1),
        ],
    )
    def test_invalid(self, kwargs: dict) -> None:
        with pytest.raises(ValidationError):
            Observation(**kwargs)


class TestParamSet:
    def test_gamma_zero_boundary_allowed(self) -> None:
        ParamSet(theta=1.0, q=0.5, gamma=0.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(theta=0.0, q=0.5, gamma=1.0),
            dict(theta=-1.0, q=0.5, gamma=1.0),
            dict(theta=float("inf"), q=0.5, gamma=1.0),
            dict(theta=1.0, q=1.5, gamma=1.0),
            dict(theta=1.0, q=-0.1, gamma=1.0),
            dict(theta=1.0, q=0.5, gamma=-1.0),
        ],
    )
    def test_invalid(self, kwargs: dict) -> None:
        with pytest.raises(ValidationError):
            ParamSet(**kwargs)


class TestClassWeights:
    def test_sum_enforced(self) -> None:
        with pytest.raises(ValidationError):
            ClassWeights(c1=0.5, c2=0.5, c3=0.5)

    def test_range_enforced(self) -> None:
        with pytest.raises(ValidationError):
            ClassWeights(c1=1.2, c2=-0.2, c3=0.0)


class TestClassifyComplete:
    @pytest.mark.parametrize(
        "delta,y,expected",
        [
            (0, 0, CompleteClass.C1_SERVICE),
            (1, 1, CompleteClass.C2_KNOWN_ABANDONMENT),
            (1, 0, CompleteClass.C3_SILENT_ABANDONMENT),
        ],
    )
    def test_mapping(self, delta: int, y: int, expected: CompleteClass) -> None:
        assert classify_complete(delta, y) is expected

    def test_impossible_combination(self) -> None:
        with pytest.raises(ValidationError):
            classify_complete(0, 1)

    def test_non_binary(self) -> None:
        with pytest.raises(ValidationError):
            classify_complete(2, 0)


class TestMask:
    @staticmethod
    def _labeled() -> list[tuple[Observation, CompleteClass]]:
        return [
            (Observation(u=1.0, y=0, delta=0), CompleteClass.C1_SERVICE),
            (Observation(u=0.2, y=1, delta=1), CompleteClass.C2_KNOWN_ABANDONMENT),
            (Observation(u=0.3, y=0, delta=1), CompleteClass.C3_SILENT_ABANDONMENT),
        ]

    def test_c3_always_masked_kab_never(self) -> None:
        masked = mask(self._labeled(), p_ss=0.0, seed=1)
        assert masked[0].delta == 0  # served kept at p_ss = 0
        assert masked[1].delta == 1 and masked[1].y == 1
        assert masked[2].delta is None

    def test_p_ss_one_masks_all_served(self) -> None:
        masked = mask(self._labeled(), p_ss=1.0, seed=1)
        assert masked[0].delta is None

    def test_deterministic_under_seed(self) -> None:
        labeled = [
            (Observation(u=float(i + 1), y=0, delta=0), CompleteClass.C1_SERVICE)
            for i in range(200)
        ]
        a = mask(labeled, p_ss=0.5, seed=42)
        b = mask(labeled, p_ss=0.5, seed=42)
        assert [obs.delta for obs in a] == [obs.delta for obs in b]
        c = mask(labeled, p_ss=0.5, seed=43)
        assert [obs.delta for obs in a] != [obs.delta for obs in c]

    def test_rejects_incomplete_input(self) -> None:
        with pytest.raises(ValidationError):
            mask([(Observation(u=1.0, y=0, delta=None), CompleteClass.C1_SERVICE)], 0.5, 0)

    def test_rejects_bad_p_ss(self) -> None:
        with pytest.raises(ValidationError):
            mask(self._labeled(), p_ss=1.5, seed=0)


class TestScopeReport:
    def test_published_examples(self) -> None:
        total, share = scope_report(0.072, 0.262, 0.55)
        assert round(total, 3) == 0.216
        assert round(share, 2) == 0.67
        total, share = scope_report(0.14, 0.06, 1.0)
        assert total == pytest.approx(0.20)
        assert share == pytest.approx(0.30)

    def test_no_abandonment_undefined(self) -> None:
        with pytest.raises(ValidationError):
            scope_report(0.0, 0.5, 0.0)

    def test_fractions_exceeding_one(self) -> None:
        with pytest.raises(ValidationError):
            scope_report(0.8, 0.4, 0.5)

    @given(
        p_kab=st.floats(0.001, 0.5),
        p_m0=st.floats(0.0, 0.5),
        pi_bar=st.floats(0.0, 1.0),
    )
    def test_bounds(self, p_kab: float, p_m0: float, pi_bar: float) -> None:
        total, share = scope_report(p_kab, p_m0, pi_bar)
        assert p_kab <= total <= p_kab + p_m0 + 1e-12
        assert 0.0 <= share <= 1.0
