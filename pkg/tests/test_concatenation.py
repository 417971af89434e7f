import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddbound.bounds import eta_dd_bound, g_constants
from ddbound.concatenation import (
    CBAR_DEFAULTS,
    cbar_general,
    cbar_time_symmetric,
    cdd_closed_form,
    cdd_iterate,
    level_coefficients,
    optimal_level,
    pulse_error_recursion,
)
from ddbound.errors import ConfigError


def test_c2_examples():
    assert level_coefficients(0.1, "general")[0] == pytest.approx(0.588, abs=5e-4)
    assert level_coefficients(0.01, "general")[0] == pytest.approx(0.505, abs=5e-4)
    c2q, _ = level_coefficients(0.1, "general", qubit=True)
    c2, _ = level_coefficients(0.1, "general")
    assert c2 - 0.5 == pytest.approx(2 * (c2q - 0.5))
    c2, c3 = level_coefficients(0.1, "time_symmetric")
    assert c2 == pytest.approx(2 * c3)
    assert c3 == pytest.approx(2 / 9 + g_constants()["c5"] * 0.01)


def test_zero_coupling():
    tr = cdd_iterate(0.0, 0.01, 4, 1.0, 3)
    assert all(lv.J_k == 0 and lv.eta_k == 0 for lv in tr.levels)


def test_level_one_matches_bound():
    J, beta = 1e-4, 1e-3
    tr = cdd_iterate(J, beta, 4, 1.0, 1, qubit=True)
    ref = eta_dd_bound(J, J + beta, 4.0, "general").eta_bound
    assert tr.levels[1].eta_k == pytest.approx(ref, rel=1e-12)
    full = cdd_iterate(J, beta, 4, 1.0, 1)
    assert full.levels[1].eta_k > tr.levels[1].eta_k


def test_level_structure():
    tr = cdd_iterate(1e-5, 1e-4, 4, 0.5, 3)
    for lv in tr.levels:
        assert lv.T_k == pytest.approx(0.5 * 4 ** lv.k)
        assert lv.eta_k == pytest.approx(lv.J_k * lv.T_k)
        assert lv.eps_k == pytest.approx(lv.beta_k + lv.J_k)
    assert all(lv.x_k <= 0.54 for lv in tr.levels[1:])


def test_small_coupling_keeps_eps():
    J, beta = 1e-7, 1e-4
    tr = cdd_iterate(J, beta, 4, 1.0, 3)
    for lv in tr.levels:
        assert lv.eps_k == pytest.approx(J + beta, rel=0.01)


def test_truncation():
    tr = cdd_iterate(1e-3, 1e-2, 4, 1.0, 5)
    assert tr.truncated
    assert len(tr.levels) < 6


def test_closed_form():
    assert cdd_closed_form(1e-3, 4, 1.0, 3) == pytest.approx(2.6e-4, rel=0.05)
    assert cdd_closed_form(1e-3, 8, 1.0, 2, "time_symmetric") == pytest.approx(1.7e-5, rel=0.05)
    assert cdd_closed_form(1e-3, 4, 0.02, 0) == 0.02
    with pytest.raises(ConfigError):
        cdd_closed_form(1e-3, 4, 1.0, -1)


def test_optimal_level():
    g = optimal_level(1e-3, 4)
    assert g["k_max"] == 3 and g["cbar_default"] == 1.027
    assert g["improvement"] == pytest.approx(60, rel=0.05)
    t = optimal_level(1e-3, 8, "time_symmetric")
    assert t["k_max"] == 2 and t["cbar_default"] == 1.332
    assert t["improvement"] == pytest.approx(30, rel=0.05)
    assert optimal_level(0.3, 4)["k_max"] == 0
    assert g["eta_at_k_max"] <= g["eta_opt_bound"] * (1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-7, 0.2), st.sampled_from([(4, "general"), (8, "time_symmetric")]))
def test_kmax_is_best_level(c, case):
    R, regime = case
    res = optimal_level(c, R, regime)
    k = res["k_max"]
    etas = [cdd_closed_form(c, R, 1.0, j, regime) for j in range(k + 3)]
    assert etas[k] == pytest.approx(min(etas), rel=1e-12)


def test_cbar_defaults():
    c5 = g_constants()["c5"]
    assert cbar_general(4) == pytest.approx(CBAR_DEFAULTS[("magnus_general", 4)], abs=0.002)
    assert cbar_time_symmetric(8) == pytest.approx(CBAR_DEFAULTS[("magnus_time_symmetric", 8)], abs=0.002)
    c = 1.027
    u = 1 / (c * 4)
    assert 0.5 + 2 * (2 / 9 * u + 11 / 9 * u * u + c5 * u ** 3) <= c
    c = 1.332
    assert 2 * (2 / 9 + c5 / (c * c * 8)) <= c * c


def test_pulse_errors():
    a = cdd_iterate(1e-5, 1e-4, 4, 1.0, 3)
    b = pulse_error_recursion(1e-5, 1e-4, 4, 1.0, 3, delta=0.0)
    assert a.etas == b.etas
    tr = pulse_error_recursion(1e-5, 1e-4, 4, 1.0, 4, delta=1e-4)
    assert tr.floor == pytest.approx(4 * 4 * 1e-4 * 1e-5)
    for lv in tr.levels[1:]:
        assert lv.eta_k >= tr.floor
        assert lv.d_k >= 1.0
    assert tr.plateau_level is not None
    etas = tr.etas
    k = tr.plateau_level
    assert all(x > y for x, y in zip(etas[:k - 1], etas[1:k]))
    assert etas[k] >= 0.99 * etas[k - 1]


def test_cbar_violation_reported():
    tr = cdd_iterate(1e-4, 1e-3, 4, 1.0, 2, cbar=0.3)
    assert tr.cbar_violations == [1, 2]


def test_bad_inputs():
    with pytest.raises(ConfigError):
        cdd_iterate(-1.0, 0.0, 4, 1.0, 1)
    with pytest.raises(ConfigError):
        cdd_iterate(1.0, 0.0, 1, 1.0, 1)
    with pytest.raises(ConfigError):
        level_coefficients(0.1, "dyson")


def test_qubit_flag_halving():
    # only the doubled bracket is dropped for a qubit, so the halving is
    # exact in the time-symmetric regime and partial in the general one
    ts = cdd_iterate(1e-5, 1e-4, 8, 1.0, 2, "magnus_time_symmetric")
    tsq = cdd_iterate(1e-5, 1e-4, 8, 1.0, 2, "magnus_time_symmetric", qubit=True)
    assert tsq.levels[1].eta_k == pytest.approx(ts.levels[1].eta_k / 2, rel=1e-12)
    g = cdd_iterate(1e-5, 1e-4, 4, 1.0, 1)
    gq = cdd_iterate(1e-5, 1e-4, 4, 1.0, 1, qubit=True)
    assert gq.levels[1].eta_k < g.levels[1].eta_k
    assert gq.levels[1].c2_k - 0.5 == pytest.approx((g.levels[1].c2_k - 0.5) / 2, rel=1e-12)


def test_exact_simulation_dominance():
    from ddbound.noise import random_model
    from ddbound.schedule import build_sequence, concatenate_schedule
    from ddbound.simulate import eta_exact

    rng = np.random.default_rng(7)
    base = build_sequence("universal", 1.0)
    seqs = {1: base, 2: concatenate_schedule(base, 2)}
    worst, count = 0.0, 0
    for _ in range(60):
        level = int(rng.integers(1, 3))
        dim_b = int(rng.choice([2, 4]))
        T = 4.0 ** level
        eps_t = rng.uniform(0.01, 0.3)
        frac = rng.uniform(0.05, 0.95)
        eps = eps_t / T
        model = random_model(rng, 2, dim_b, (1 - frac) * eps, frac * eps)
        tr = cdd_iterate(model.j_strength, model.beta, 4, 1.0, level)
        assert not tr.truncated
        ratio = eta_exact(seqs[level], model) / tr.levels[level].eta_k
        worst = max(worst, ratio)
        count += 1
    assert count >= 50
    assert worst <= 1.0


@pytest.mark.parametrize("level", [1, 2, 3])
def test_kth_order_decoupling(level):
    from ddbound.magnus import omega_low_order
    from ddbound.noise import build_heisenberg_spin_bath
    from ddbound.operators import spectral_norm, traceless_part
    from ddbound.schedule import build_sequence, concatenate_schedule, toggling_segments

    model = build_heisenberg_spin_bath(1, 0.02, 0.01)
    seq = concatenate_schedule(build_sequence("universal", 1.0), level)
    segs = toggling_segments(seq, model)
    T = seq.t_total
    for n in range(1, level + 1):
        scale = model.j_strength * T * (model.epsilon * T) ** (n - 1)
        om = omega_low_order(segs, n)
        assert spectral_norm(traceless_part(om, 2)) <= 1e-8 * scale
