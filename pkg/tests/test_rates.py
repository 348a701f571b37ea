import math

import numpy as np
import pytest

from lpseq.errors import InvalidParameterError
from lpseq.rates import (
    C_LOWER,
    C_UPPER,
    RateQuery,
    RegimeLabel,
    classify_regime,
    control_function,
    example_scalings,
    p_threshold,
    rate_bounds,
)


def test_control_examples():
    # p >= 2: min of the two envelopes
    assert control_function(RateQuery(p=3.0, d=100, sigma=0.1)) == pytest.approx(1.0)
    # third branch: sigma below d**(-1/p)
    assert control_function(RateQuery(p=1.5, d=10**4, sigma=1e-4)) == pytest.approx(1e-4)
    # first branch: saturated at the squared radius
    q = RateQuery(p=1.5, d=50, sigma=1.0)
    assert control_function(q) == pytest.approx(1.0)
    # p = 0 at full sparsity: log(e d / d) = 1
    assert control_function(RateQuery(p=0.0, d=30, sigma=0.2, sparsity=30)) == \
        pytest.approx(0.04 * 30)


def test_control_middle_branch_formula():
    p, d, sigma = 1.5, 10**4, 0.02
    expected = (sigma**2 * math.log(math.e * d * sigma**p)) ** (1 - p / 2)
    assert control_function(RateQuery(p=p, d=d, sigma=sigma)) == pytest.approx(expected)


def test_rate_bounds_constants():
    lower, upper, certified = rate_bounds(RateQuery(p=1.5, d=50, sigma=1.0))
    assert lower == pytest.approx(1.0 / 868.0)
    assert upper == pytest.approx(6.0)
    assert certified
    assert C_LOWER == pytest.approx(1 / 868) and C_UPPER == 6.0


def test_rate_bounds_positive_and_scaling():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = float(rng.uniform(0.2, 4.0))
        d = int(rng.integers(1, 10**5))
        sigma = float(10.0 ** rng.uniform(-5, 1))
        q = RateQuery(p=p, d=d, sigma=sigma)
        m = control_function(q)
        assert m > 0
        lo, hi, _ = rate_bounds(q)
        assert 0 < lo <= hi
    # radius scaling is exact: bounds scale by r**2
    base = RateQuery(p=1.5, d=100, sigma=0.05)
    scaled = RateQuery(p=1.5, d=100, sigma=0.05 * 3.0, radius=3.0)
    assert control_function(scaled) == pytest.approx(9.0 * control_function(base))


def test_rate_bounds_one_sided_below_p1():
    _, _, certified = rate_bounds(RateQuery(p=0.5, d=100, sigma=0.1))
    assert not certified
    _, _, certified = rate_bounds(RateQuery(p=0.0, d=100, sigma=0.1, sparsity=5))
    assert not certified


def test_rescaling_identity_exact():
    rng = np.random.default_rng(1)
    for _ in range(40):
        p = float(rng.uniform(0.2, 4.0))
        d = int(rng.integers(2, 10**4))
        sigma = float(10.0 ** rng.uniform(-4, 0.5))
        r = float(10.0 ** rng.uniform(-1, 1))
        big = control_function(RateQuery(p=p, d=d, sigma=sigma, radius=r))
        unit = control_function(RateQuery(p=p, d=d, sigma=sigma / r, radius=1.0))
        assert big == r * r * unit  # exact float identity by construction


def test_n_sample_identity_exact():
    for n in (2, 5, 17):
        tau = 0.8
        a = control_function(RateQuery(p=1.5, d=200, n=n, tau=tau))
        b = control_function(RateQuery(p=1.5, d=200, sigma=tau / math.sqrt(n)))
        assert a == b


def test_monotone_in_sigma():
    sigmas = np.geomspace(1e-5, 10.0, 400)
    for p in (0.5, 1.5, 3.0):
        vals = [control_function(RateQuery(p=p, d=500, sigma=float(s))) for s in sigmas]
        assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))


def test_branch_continuity_within_factor_four():
    # straddle both interior branch boundaries of the p < 2 control function
    rng = np.random.default_rng(5)
    for _ in range(1000):
        p = float(rng.uniform(0.3, 1.9))
        d = int(rng.integers(10, 10**5))
        for s2 in (1.0 / (1.0 + math.log(d)), d ** (-2.0 / p)):
            lo = control_function(RateQuery(p=p, d=d, sigma=math.sqrt(s2) * 0.999))
            hi = control_function(RateQuery(p=p, d=d, sigma=math.sqrt(s2) * 1.001))
            ratio = hi / lo
            assert 1.0 / 4.0 <= ratio <= 4.0


def test_query_validation():
    with pytest.raises(InvalidParameterError):
        RateQuery(p=1.5, d=0, sigma=0.1)
    with pytest.raises(InvalidParameterError):
        RateQuery(p=1.5, d=10)  # no sigma
    with pytest.raises(InvalidParameterError):
        RateQuery(p=1.5, d=10, n=3)  # n > 1 needs tau
    with pytest.raises(InvalidParameterError):
        RateQuery(p=0.0, d=10, sigma=0.1)  # p = 0 needs sparsity
    with pytest.raises(InvalidParameterError):
        RateQuery(p=1.5, d=10, sigma=0.1, radius=0.0)


def test_classifier_examples():
    assert classify_regime(RateQuery(p=3.0, d=100, sigma=0.1)).label == \
        RegimeLabel.OPTIMAL_HIGH_P
    assert classify_regime(RateQuery(p=0.5, d=10**4, sigma=0.05)).label == \
        RegimeLabel.OPTIMAL_NEAR_ONE
    rep = classify_regime(RateQuery(p=1.5, d=10**4, sigma=0.02))
    assert rep.label == RegimeLabel.SUBOPTIMAL
    # 0.02 lies in (d**(-2/3), d**(-1/3)) but below 1/(sqrt(3) d**(1/3))
    assert rep.subinterval == "sigma2"
    assert rep.label.value == "suboptimal_thm2.2"


def test_classifier_subinterval_one():
    # noise just below the upper endpoint lands in the spike band
    d = 10**4
    rep = classify_regime(RateQuery(p=1.5, d=d, sigma=0.2))
    assert rep.label == RegimeLabel.SUBOPTIMAL
    assert rep.subinterval == "sigma1"


def test_classifier_extreme_noise_and_sparse():
    d = 10**4
    assert classify_regime(RateQuery(p=1.5, d=d, sigma=1e-4)).label == \
        RegimeLabel.OPTIMAL_EXTREME_NOISE
    assert classify_regime(RateQuery(p=1.5, d=d, sigma=5.0)).label == \
        RegimeLabel.OPTIMAL_EXTREME_NOISE
    assert classify_regime(RateQuery(p=0.0, d=d, sigma=0.1, sparsity=7)).label == \
        RegimeLabel.OPTIMAL_SPARSE


def test_classifier_boundary_points():
    d = 1000
    assert classify_regime(RateQuery(p=2.0, d=d, sigma=0.3)).label == \
        RegimeLabel.BOUNDARY
    assert classify_regime(RateQuery(p=p_threshold(d), d=d, sigma=0.3)).label == \
        RegimeLabel.BOUNDARY
    sig_lo = d ** (-1.0 / 1.5)
    assert classify_regime(RateQuery(p=1.5, d=d, sigma=sig_lo)).label == \
        RegimeLabel.BOUNDARY


def test_classifier_bounds_ordering():
    rep = classify_regime(RateQuery(p=1.5, d=100, sigma=0.1))
    assert rep.lower_bound <= rep.upper_bound
    assert rep.p_threshold == pytest.approx(1.0 + 1.0 / (1.0 + math.log(100)))


def test_example_scalings_formulas():
    ex = example_scalings("log_subopt", 1000)
    assert ex.p == 1.5
    assert ex.d == pytest.approx(1000 ** 0.75 * math.log(1000))
    assert ex.predicted_minimax == pytest.approx(
        math.sqrt((math.log(math.log(1000)) / 1000) ** 0.5))

    ex = example_scalings("poly_subopt", 400)
    assert ex.d == pytest.approx(math.exp(20.0))
    assert ex.predicted_mle_risk == 1.0
    # the optimality gap grows like n**((1-delta)/4)
    assert ex.predicted_ratio == pytest.approx(400 ** 0.125)

    with pytest.raises(InvalidParameterError):
        example_scalings("other", 100)
    with pytest.raises(InvalidParameterError):
        example_scalings("log_subopt", 100, delta=1.5)
