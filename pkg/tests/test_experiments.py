import numpy as np
import pytest

from dyadic_sharp.core import build_uniform
from dyadic_sharp.experiments import (CALIBRATED_CONSTANTS, CALIBRATIONS, OPERATORS, PreconditionError,
                                      apply_operator, buckley_family, default_pair, exponent_fit,
                                      extremal_function, extremal_sd, lemma_constant_calibration,
                                      log_bump_pair, point_rng, random_step_function, sharpness_sweep,
                                      theorem_exponent, truncated_power, two_weight_singular_check,
                                      weak_type_ratio)
from dyadic_sharp.weights import YoungFunction, ap_constant

EPS = [0.4, 0.3, 0.2, 0.12, 0.08, 0.05]


def test_point_rng_is_reproducible_and_independent():
    a = point_rng(3, 7).random(5)
    assert np.array_equal(a, point_rng(3, 7).random(5))
    assert not np.array_equal(a, point_rng(3, 8).random(5))
    f = random_step_function(point_rng(1, 2), 6)
    assert f.allclose(random_step_function(point_rng(1, 2), 6), atol=0)


def test_exponent_fit():
    s, c, r2 = exponent_fit([(0, 1), (1, 3), (2, 5)])
    assert (s, c, r2) == pytest.approx((2.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        exponent_fit([(1, 2)])
    with pytest.raises(ValueError):
        exponent_fit([(1, 2), (1, 3)])
    with pytest.raises(ValueError):
        exponent_fit([(0, np.nan), (1, 3)])


def test_buckley_family_and_truncation():
    w, f = buckley_family(0.2, 2.0, depth=20)
    assert ap_constant(w, 2.0) > 1.0
    g = truncated_power(-0.5, 20)
    assert g.values[0] == 0.0 and np.all(g.values[1:] > 0)


def test_sweep_is_deterministic_and_sorted():
    a = sharpness_sweep("maximal", 3.0, EPS, depth=30, n_random=5, seed=4)
    b = sharpness_sweep("maximal", 3.0, EPS, depth=30, n_random=5, seed=4, threads=3)
    assert a.ratios == b.ratios and a.slope == b.slope
    assert a.ap_constants == sorted(a.ap_constants)
    assert a.to_csv().splitlines()[0] == "epsilon,ap_constant,ratio,log_ap,log_ratio"
    assert len(a.to_csv().splitlines()) == len(EPS) + 1
    assert a.summary()["points"] == len(EPS)


def test_sweep_rejects_bad_input():
    with pytest.raises(ValueError):
        sharpness_sweep("maximal", 2.0, [0.1])
    with pytest.raises(ValueError):
        sharpness_sweep("nope", 2.0, EPS)
    with pytest.raises(ValueError):
        sharpness_sweep("maximal", 1.0, EPS)
    with pytest.raises(ValueError, match="degenerate"):
        sharpness_sweep("maximal", 2.0, [0.2, 0.2, 0.2, 0.2], n_random=1)


def test_short_sweep_has_no_fit():
    res = sharpness_sweep("square", 2.0, [0.3, 0.1], depth=20, n_random=2)
    assert res.slope is None and len(res.ratios) == 2


def test_sweep_slopes_respect_the_exponents():
    eps = [2.0 ** -k for k in range(2, 8)]
    for op in ("hilbert_d", "square", "vmaximal"):
        res = sharpness_sweep(op, 2.0, eps, depth=40, n_random=5)
        assert res.slope <= theorem_exponent(op, 2.0) + 0.1


def test_theorem_exponents():
    assert theorem_exponent("maximal", 3.0) == 0.5
    assert theorem_exponent("hilbert_d", 3.0) == 1.0
    assert theorem_exponent("square", 3.0) == 0.5
    assert theorem_exponent("vmaximal", 1.5, q=4.0) == 2.0
    with pytest.raises(ValueError):
        theorem_exponent("other", 2.0)


def test_apply_operator_dispatch():
    f = random_step_function(point_rng(9, 0), 5)
    for op in OPERATORS:
        out = apply_operator(op, f, 2.0)
        assert out.dim == 1
    with pytest.raises(ValueError):
        apply_operator("nope", f, 2.0)


def test_extremal_function_averages():
    f = extremal_function(8)
    rep = extremal_sd(8)
    for i in range(1, 8):
        # half of a geometric series with ratio 1/4, cut after J - i + 1 terms
        assert rep.averages[2 * i] == pytest.approx(2 / 3 * (1 - 4.0 ** (i - 9)), rel=1e-12)
    assert rep.min_excess >= 0
    assert f.values.max() == 1.0
    with pytest.raises(ValueError):
        extremal_function(1)


def test_weak_type_ratio():
    g = build_uniform(1, 2, [4.0, 0.0, 0.0, 1.0])
    f = build_uniform(1, 0, [1.0])
    # max of 4 * 1/4 and 1 * 1/2
    assert weak_type_ratio(g, f) == pytest.approx(1.0)


def test_calibration_stays_below_frozen_constants():
    for tag in CALIBRATIONS:
        cal = lemma_constant_calibration(tag, trials=200, seed=1)
        assert cal.used > 0
        assert cal.constant <= CALIBRATED_CONSTANTS[tag]
    with pytest.raises(ValueError):
        lemma_constant_calibration("hilbert_weak11", trials=10)
    with pytest.raises(ValueError):
        lemma_constant_calibration("hilbert_weak11", depth=12)
    with pytest.raises(ValueError):
        lemma_constant_calibration("other")


def test_default_pair_is_positive():
    u, v = default_pair(6)
    assert np.all(u.values > 0) and np.all(v.values >= u.values)
    assert u.integral() == pytest.approx(((2 / 3) ** 1.5 + (1 / 3) ** 1.5) / 1.5)


def test_two_weight_check_runs_and_refuses():
    A, B = log_bump_pair("maximal", 3.0)
    rep = two_weight_singular_check(None, 3.0, A, B, "maximal", depths=range(5, 9), n_random=5)
    assert not rep.blow_up and len(rep.ratios) == 4
    assert all(np.isfinite(rep.bump_constants))
    plain = YoungFunction.power(1.5)
    with pytest.raises(PreconditionError):
        two_weight_singular_check(None, 3.0, A, plain, "maximal", depths=[5])
    with pytest.raises(PreconditionError):
        two_weight_singular_check(None, 3.0, YoungFunction.power(3.0), B, "hilbert_d", depths=[5])
