import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddbound.bounds import eta_dd_bound
from ddbound.errors import ConfigError, NotScalableError
from ddbound.thresholds import (
    DEFAULT_OVERHEAD_EXPONENT,
    edd_dominance_width,
    edd_no_dd_threshold,
    edd_region,
    noise_ratio,
    overhead_ratio,
    suppression_threshold,
)


def test_thresholds_zero_width():
    u = suppression_threshold("universal")
    t = suppression_threshold("time_symmetric")
    assert u.crossing_eps_tau0 == pytest.approx(0.0711, abs=5e-4)
    assert t.crossing_eps_tau0 == pytest.approx(0.0403, abs=5e-4)
    assert u.crossing_delta_ratio == pytest.approx(0.25, abs=1e-14)
    assert t.crossing_delta_ratio == pytest.approx(0.125, abs=1e-14)


def test_crossing_is_root():
    for kind in ("universal", "time_symmetric", "eulerian"):
        r = suppression_threshold(kind)
        assert noise_ratio(kind, r.crossing_eps_tau0) == pytest.approx(1.0, abs=1e-6)


def test_ratio_matches_bound():
    # J cancels: the ratio is eta_DD / (J tau0)
    x, J = 0.02, 0.004
    ratio = noise_ratio("universal", x, 0.1)
    rep = eta_dd_bound(J, x, 4.0, "general", 0.1, 4)
    assert ratio == pytest.approx(rep.eta_bound / J)


def test_width_threshold_with_noise():
    # finite eps tau0 lowers the tolerable width
    assert suppression_threshold("universal", 0.1).crossing_eps_tau0 < 0.0711


def test_eulerian_constants():
    assert edd_no_dd_threshold() == pytest.approx(0.0239, abs=5e-4)
    assert edd_dominance_width() == pytest.approx(0.1983, abs=5e-4)


def test_edd_dominates_above_width():
    x_star = edd_no_dd_threshold()
    for d in (0.2, 0.25, 0.3):
        for i in range(1, 40):
            x = x_star * i / 40
            assert noise_ratio("eulerian", x, d) <= noise_ratio("universal", x, d)


def test_overhead_examples():
    assert overhead_ratio(4, 1.0, 0.5, 0.5) == pytest.approx(4.0)
    assert DEFAULT_OVERHEAD_EXPONENT == pytest.approx(8.18, abs=5e-3)
    x = 1e-2
    eta0, eta = 1.0, 0.5
    eta_dd = eta * 8 * ((2 / 9) * (8 * x) ** 2 + 9.43 * (8 * x) ** 4)
    val = overhead_ratio(8, eta0, eta, eta_dd)
    assert val < 1
    assert val == pytest.approx(8 * (math.log(2) / math.log(eta0 / eta_dd)) ** math.log2(291))
    with pytest.raises(NotScalableError) as exc:
        overhead_ratio(4, 1.0, 1.5, 0.5)
    assert exc.value.side == "unprotected"
    with pytest.raises(NotScalableError) as exc:
        overhead_ratio(4, 1.0, 0.5, 1.0)
    assert exc.value.side == "protected"
    with pytest.raises(ConfigError):
        overhead_ratio(0, 1.0, 0.5, 0.1)


def test_overhead_separation_below_one_percent():
    for x in (1e-3, 3e-3, 9e-3):
        u = overhead_ratio(4, 1.0, 0.5, 0.5 * noise_ratio("universal", x))
        t = overhead_ratio(8, 1.0, 0.5, 0.5 * noise_ratio("time_symmetric", x))
        assert u / t > 10


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-4, 0.4), st.floats(1.01, 3.0))
def test_overhead_decreasing(eta_dd, bump):
    a = overhead_ratio(4, 1.0, 0.5, eta_dd)
    b = overhead_ratio(4, 1.0, 0.5, min(eta_dd * bump, 0.99))
    assert b > a


def test_regions():
    r = edd_region(1e-3, 0.3)
    assert r.region == 1 and r.eta_edd < r.eta_none < r.eta_dd
    r = edd_region(0.03, 0.0)
    assert r.eta_edd > 1.0
    r = edd_region(1e-3, 0.0)
    assert r.region == 3  # universal best for ideal pulses
    for x in (1e-4, 5e-3, 0.015, 0.0239):
        r = edd_region(x, 0.20)
        assert r.eta_edd <= r.eta_dd


def test_region_tie_flag():
    # no noise and ideal pulses: both DD strategies give exactly zero
    r = edd_region(0.0, 0.0)
    assert r.on_boundary
    assert r.region == 2
    assert not edd_region(1e-3, 0.3).on_boundary
