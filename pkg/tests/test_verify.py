import numpy as np
import pytest

from condrisk.verify import (
    brier_identity_check,
    realizability_exactness,
    run_all_checks,
    separable_comparison,
    separable_consensus,
)


def test_brier_identity_holds():
    res = brier_identity_check(n=20_000, seed=0)
    assert res.passed
    assert res.tolerance == pytest.approx(4.0 / np.sqrt(20_000))


def test_brier_negative_control_fails():
    res = brier_identity_check(n=20_000, seed=0, negative_control=True)
    assert not res.passed


def test_brier_tolerance_shrinks_with_n():
    small = brier_identity_check(n=2_000, seed=1)
    large = brier_identity_check(n=50_000, seed=1)
    assert large.tolerance < small.tolerance
    assert small.passed and large.passed


def test_brier_check_requires_reasonable_n():
    with pytest.raises(ValueError):
        brier_identity_check(n=10)


@pytest.mark.parametrize("loss_kind", ["zero-one", "cross-entropy"])
def test_realizability_exactness(loss_kind):
    res = realizability_exactness(seed=0, loss_kind=loss_kind)
    assert res.passed
    assert res.statistic < 1e-9


def test_realizability_negative_control():
    res = realizability_exactness(seed=0, loss_kind="zero-one", corrupt=0.05)
    assert not res.passed
    assert res.statistic > 1e-6


def test_separable_comparison_prefers_plug_in():
    cmp = separable_comparison(n=3000, seed=0)
    assert cmp.calibration_risk <= cmp.regression_risk


def test_separable_comparison_perfect_predictor_variant():
    cmp = separable_comparison(n=2000, seed=1, use_perfect_fhat=True)
    assert np.isfinite(cmp.calibration_risk) and np.isfinite(cmp.regression_risk)
    assert 0.0 <= cmp.calibration_risk <= 1.0


def test_separable_consensus_smaller_run():
    res = separable_consensus(seeds=range(3), n=1500)
    # allowed losses scale as len(seeds) - 8, floored at zero
    assert res.tolerance == 0.0
    assert res.statistic <= 1.0  # overwhelmingly 0; one loss would fail


def test_run_all_checks_structure():
    checks = run_all_checks(seed=0, brier_n=5_000)
    names = [c.name for c in checks]
    assert len(names) == len(set(names)) == 4
    for c in checks:
        assert np.isfinite(c.statistic)
        assert c.passed == (c.statistic <= c.tolerance)
