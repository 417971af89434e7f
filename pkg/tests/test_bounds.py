import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from ddbound.bounds import (
    G,
    G_inverse,
    coefficients_json,
    dyson_c5,
    eta_dd_bound,
    even_term_bound,
    fn_coefficients,
    fnj_table,
    g_constants,
    g_function,
    log_distance_factor,
    quasilocal_omega2_bound,
    table_one_coeffs,
)
from ddbound.errors import ConfigError, ValidityError
from ddbound.magnus import omega_low_order
from ddbound.noise import build_custom
from ddbound.operators import PAULI_X, PAULI_Y, PAULI_Z, random_hermitian, spectral_norm
from ddbound.schedule import build_sequence, toggling_segments


def test_fnj_examples():
    f = fnj_table(6)
    assert f[(2, 1)] == 2
    assert all(f[(n, 0)] == 0 for n in range(2, 7))
    assert f[(4, 3)] == 2 * f[(3, 2)] == 8
    for n in range(2, 7):
        assert f[(n, n - 1)] == 2 ** (n - 1)
    with pytest.raises(ConfigError):
        fnj_table(21)


def test_fn_values():
    f = fn_coefficients(5)
    assert f[:4] == [Fraction(1), Fraction(1, 4), Fraction(5, 72), Fraction(11, 576)]
    assert 4 ** 3 * f[3] == Fraction(11, 9)
    assert all(isinstance(x, Fraction) for x in fn_coefficients(20))


def test_power_series_inverts_G():
    y = G(0.5)
    f = fn_coefficients(20)
    assert float(sum(fn * Fraction(y) ** (n + 1) for n, fn in enumerate(f))) == pytest.approx(0.5, abs=1e-8)
    assert G_inverse(y) == pytest.approx(0.5, abs=1e-10)


def test_g_series_matches_closed_form():
    for x in (0.02, 0.0999, 0.1001, 1.0):
        closed = 2.0 + 0.5 * x * (1.0 - 1.0 / math.tan(0.5 * x))
        assert g_function(x) == pytest.approx(closed, rel=1e-12)


def test_constants():
    c = g_constants()
    assert c["zeta"] == pytest.approx(2.17374, abs=1e-4)
    assert c["c_prime"] == pytest.approx(0.03685, abs=5e-5)
    assert c["c5"] == pytest.approx(9.43, abs=0.01)
    assert c["c5"] == pytest.approx(256 * c["c_prime"])


def test_table_one():
    c = table_one_coeffs("general", 4, 0.1, 4.0, True, 0, 0.3)
    assert c[0] == pytest.approx(0.1)
    assert c[1:4] == (0.5, 2 / 9, 11 / 9)
    assert c[4] == pytest.approx(9.43, abs=0.01)
    assert table_one_coeffs("general", 4, 0.1, 4.0, False)[0] == pytest.approx(0.2)
    d = table_one_coeffs("dyson", 0, 0.0, 1.0, True, 0, 0.54)
    assert d[1:4] == (1.0, 0.5, 1 / 6)
    assert d[4] == pytest.approx(0.0466, abs=1e-4)
    ts = table_one_coeffs("time_symmetric", 8, 0.0, 8.0, True, 0.0, 0.1)
    assert ts[1] == 0 and ts[3] == 0
    ts = table_one_coeffs("time_symmetric", 8, 0.1, 8.1, True, 0.2, 0.1)
    r = 0.2 / 8.1
    assert ts[1] == pytest.approx(2 * r * (1 - r / 2))
    assert ts[3] == pytest.approx(56 * r * (1 - r / 2))
    with pytest.raises(ValidityError) as exc:
        table_one_coeffs("general", 4, 0, 4.0, True, 0, 0.6)
    assert exc.value.margin == pytest.approx(math.pi - 0.6)
    assert table_one_coeffs("dyson", 0, 0, 1.0, True, 0, 2.0)[4] == pytest.approx(dyson_c5(2.0))
    with pytest.raises(ConfigError):
        table_one_coeffs("other", 4, 0, 4.0)


def test_dyson_c5_series_branch():
    mpmath.mp.dps = 50
    for x in (1e-3, 9.9e-3, 1.01e-2, 0.3, 0.54):
        xm = mpmath.mpf(x)
        ref = (mpmath.exp(xm) - 1 - xm - xm ** 2 / 2 - xm ** 3 / 6) / xm ** 4
        assert dyson_c5(x) == pytest.approx(float(ref), rel=1e-10)


def test_eta_examples():
    J, e = 0.003, 0.01
    rep = eta_dd_bound(J, e, 4.0, "general")
    x = 4 * e
    c5 = g_constants()["c5"]
    assert rep.eta_bound == pytest.approx(4 * J * (0.5 * x + 2 / 9 * x ** 2 + 11 / 9 * x ** 3 + c5 * x ** 4))
    rep = eta_dd_bound(J, e, 8.0, "time_symmetric")
    x = 8 * e
    assert rep.eta_bound == pytest.approx(8 * J * (2 / 9 * x ** 2 + c5 * x ** 4))
    assert eta_dd_bound(0.0, e, 4.0).eta_bound == 0
    assert sum(rep.per_order) == pytest.approx(rep.eta_bound)
    assert rep.inputs_echo["T"] == 8.0
    assert eta_dd_bound(J, e, 8.0, "time_symmetric", delta=0.1).inputs_echo["T"] == pytest.approx(8.1)
    with pytest.raises(ConfigError):
        eta_dd_bound(0.02, 0.01, 4.0)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(0.0, 0.01), st.floats(0.0, 0.05), st.floats(0.0, 0.2), st.floats(1.0, 6.0),
    st.sampled_from(["general", "time_symmetric", "dyson"]),
)
def test_bound_monotone(J, beta, delta, T, case):
    eps = J + beta

    def val(J=J, eps=eps, delta=delta, T=T):
        return eta_dd_bound(J, eps, T, case, delta, 8, True, 2 * delta).eta_bound

    base = val()
    assert val(J=J * 1.1, eps=eps + 0.1 * J) >= base
    assert val(eps=eps * 1.1 + 1e-6) >= base
    assert val(T=T * 1.05) >= base * (1 - 1e-12)
    if case != "time_symmetric":
        assert val(delta=delta + 0.01) >= base


def test_even_term_bound():
    g, tight = even_term_bound(2, 0.1, 0.2, 4.0, 0.0)
    assert g == 0 and tight == 0
    with pytest.raises(ConfigError):
        even_term_bound(3, 0.1, 0.2, 4.0, 0.1)
    J, e, T = 0.1, 0.2, 4.0
    for D in (0.05, 0.2, 1.0):
        exact = even_term_bound(4, J, e, T, D)
        r = D / T
        simple = 56 * r * (1 - r / 2) * (J * T) * (e * T) ** 3
        assert simple >= exact
    g, tight = even_term_bound(2, J, e, T, 1e-7)
    assert g / tight == pytest.approx(2.0, rel=1e-6)


def test_quasilocal():
    assert quasilocal_omega2_bound(0.2, 0.0, 0.1, 3.0) == pytest.approx(0.3 * 0.3 * 3.0)
    assert quasilocal_omega2_bound(0.0, 0.0, 0.1, 3.0) == pytest.approx(0.09)
    with pytest.raises(ConfigError):
        quasilocal_omega2_bound(-1, 0, 0, 1)


def test_quasilocal_two_spin_bath():
    """Non-interacting bath: H_B = b1 Z_1 + b2 Z_2, each bath spin coupled to
    the system."""
    b1, b2, j1, j2 = 0.03, 0.05, 0.02, 0.01
    I2 = np.eye(2)
    terms = [
        (I2, b1 * np.kron(PAULI_Z, I2) + b2 * np.kron(I2, PAULI_Z)),
    ]
    for p in (PAULI_X, PAULI_Y, PAULI_Z):
        terms.append((p, j1 / 3 * np.kron(p, I2) + j2 / 3 * np.kron(I2, p)))
    m = build_custom(2, 4, terms)
    T = 4.0
    o2 = omega_low_order(toggling_segments(build_sequence("universal", 1.0), m), 2)
    b = max(b1, b2)
    assert spectral_norm(o2) <= quasilocal_omega2_bound(b, 0.0, m.j_strength, T)


def test_log_distance_examples(rng):
    assert log_distance_factor(0.3, 0.3) == pytest.approx(1.20, abs=0.005)
    assert log_distance_factor(0.0, 0.0) == pytest.approx(1.0)
    with pytest.raises(ValidityError):
        log_distance_factor(2.0, 2.0)
    n_checked = 0
    for _ in range(100):
        a = -1j * random_hermitian(4, rng, rng.uniform(0.01, 0.15))
        b = a - 1j * random_hermitian(4, rng, rng.uniform(0.001, 0.15))
        ep, em = spectral_norm(a + b), spectral_norm(a - b)
        c = log_distance_factor(ep, em)
        assert spectral_norm(a - b) <= c * spectral_norm(expm(a) - expm(b)) * (1 + 1e-12)
        n_checked += 1
    assert n_checked == 100


def test_coefficients_json():
    import json

    d = json.loads(coefficients_json())
    assert set(d) >= {"general", "time_symmetric", "dyson", "constants", "f_n"}
    assert d["f_n"][:4] == ["1", "1/4", "5/72", "11/576"]
