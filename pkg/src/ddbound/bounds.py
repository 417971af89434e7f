"""Closed-form upper bounds on Magnus terms and the effective noise strength.

The bound has the form ``eta <= (JT) sum_{n=1}^5 C_n (eps T)^{n-1}`` with
coefficient sets for general sequences, nearly time-symmetric sequences and
a Dyson-series variant.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache

from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import ConfigError, ValidityError

__all__ = [
    "BERNOULLI",
    "EPS_T_MAX",
    "BoundReport",
    "fnj_table",
    "fn_coefficients",
    "g_function",
    "G",
    "G_inverse",
    "g_constants",
    "dyson_c5",
    "table_one_coeffs",
    "eta_dd_bound",
    "even_term_bound",
    "quasilocal_omega2_bound",
    "log_distance_factor",
    "coefficients_json",
]

# B_0 .. B_20 with the B_1 = -1/2 convention.
BERNOULLI = (
    Fraction(1), Fraction(-1, 2), Fraction(1, 6), Fraction(0), Fraction(-1, 30),
    Fraction(0), Fraction(1, 42), Fraction(0), Fraction(-1, 30), Fraction(0),
    Fraction(5, 66), Fraction(0), Fraction(-691, 2730), Fraction(0), Fraction(7, 6),
    Fraction(0), Fraction(-3617, 510), Fraction(0), Fraction(43867, 798), Fraction(0),
    Fraction(-174611, 330),
)
N_TABLE_MAX = 20

#: Largest ``eps T`` for which the fixed fifth-order coefficient is valid.
EPS_T_MAX = 0.54

CASES = ("general", "time_symmetric", "dyson")


def _check_n(n_max: int) -> None:
    if not 1 <= n_max <= N_TABLE_MAX:
        raise ConfigError(f"n_max must be in [1, {N_TABLE_MAX}], got {n_max}")


@lru_cache(maxsize=None)
def _fnj(n_max: int) -> dict:
    absb = [abs(b) / math.factorial(p) for p, b in enumerate(BERNOULLI)]
    f: dict = {(1, 0): Fraction(1)}
    for n in range(2, n_max + 1):
        f[(n, 0)] = Fraction(0)
        for j in range(1, n):
            acc = Fraction(0)
            for m in range(1, n - j + 1):
                inner = sum((absb[p] * f[(m, p)] for p in range(m)), Fraction(0)) / m
                acc += inner * f[(n - m, j - 1)]
            f[(n, j)] = 2 * acc
    return f


def fnj_table(n_max: int) -> dict:
    """Exact coefficients ``f_n^(j)`` bounding the commutator terms.

    Keys are ``(n, j)`` with ``0 <= j <= n-1``.
    """
    _check_n(n_max)
    return dict(_fnj(n_max))


def fn_coefficients(n_max: int) -> list[Fraction]:
    """``f_1 .. f_{n_max}``; ``||Omega_n|| <= f_n (JT)(4 eps T)^{n-1}``."""
    _check_n(n_max)
    f = _fnj(n_max)
    out = [Fraction(1)]
    for n in range(2, n_max + 1):
        s = sum((abs(BERNOULLI[j]) / math.factorial(j) * f[(n, j)] for j in range(1, n)), Fraction(0))
        out.append(s / (n * 2 ** (n - 1)))
    return out


def g_function(x: float) -> float:
    """``2 + (x/2)(1 - cot(x/2))``, by its power series when ``|x| < 0.1``."""
    if abs(x) < 0.1:
        return float(sum(abs(BERNOULLI[j]) / math.factorial(j) * x ** j for j in range(11)))
    return 2.0 + 0.5 * x * (1.0 - 1.0 / math.tan(0.5 * x))


def G(s: float) -> float:
    """``int_0^s dx / g(x)`` for ``|s| <= 2 pi``."""
    if abs(s) > 2 * math.pi + 1e-12:
        raise ValidityError("G is defined on [-2pi, 2pi]", 2 * math.pi - abs(s))
    if s == 0:
        return 0.0
    if abs(s) >= 2 * math.pi - 1e-12:
        s = math.copysign(2 * math.pi, s)
    val, _ = quad(lambda x: 1.0 / g_function(x) if abs(x) < 2 * math.pi else 0.0,
                  0.0, s, epsabs=1e-12, epsrel=1e-12, limit=200)
    return val


def G_inverse(y: float) -> float:
    """Inverse of :func:`G` by root bracketing."""
    zeta = g_constants()["zeta"]
    if abs(y) > zeta:
        raise ValidityError("G inverse defined for |y| <= zeta", zeta - abs(y))
    if y == 0:
        return 0.0
    return brentq(lambda s: G(s) - y, -2 * math.pi, 2 * math.pi, xtol=1e-14)


@lru_cache(maxsize=1)
def _constants() -> tuple[float, float, float]:
    zeta = G(2 * math.pi)
    f = fn_coefficients(4)
    partial = sum(float(fn) * zeta ** (n + 1) for n, fn in enumerate(f))
    c_prime = (2 * math.pi - partial) / zeta ** 5
    return zeta, c_prime, 256.0 * c_prime


def g_constants() -> dict:
    """``zeta = G(2 pi)``, the tail constant ``c_prime`` and ``c5 = 4^4 c_prime``."""
    zeta, c_prime, c5 = _constants()
    return {"zeta": zeta, "c_prime": c_prime, "c5": c5}


def dyson_c5(eps_t: float) -> float:
    """``(e^x - 1 - x - x^2/2 - x^3/6) / x^4`` at ``x = eps T``."""
    x = float(eps_t)
    if abs(x) < 1.0:
        # Taylor tail sum_{k>=4} x^(k-4)/k!, avoids the cancellation
        return math.fsum(x ** (k - 4) / math.factorial(k) for k in range(4, 24))
    return (math.expm1(x) - x - x ** 2 / 2 - x ** 3 / 6) / x ** 4


def table_one_coeffs(
    case: str,
    n_pulses: int,
    delta: float,
    T: float,
    regular_spacing: bool = True,
    symmetry_break: float = 0.0,
    eps_t: float = 0.0,
) -> tuple[float, float, float, float, float]:
    """Coefficients ``(C_1, ..., C_5)`` for one of ``general``,
    ``time_symmetric`` or ``dyson``."""
    if case not in CASES:
        raise ConfigError(f"unknown bound case {case!r}")
    if T <= 0:
        raise ConfigError("T must be positive")
    c1 = (1 if regular_spacing else 2) * n_pulses * delta / T
    if case == "dyson":
        return (c1, 1.0, 0.5, 1 / 6, dyson_c5(eps_t))
    if eps_t > EPS_T_MAX:
        raise ValidityError(
            f"eps*T = {eps_t:.4g} exceeds {EPS_T_MAX}; fifth-order coefficient not valid "
            f"(convergence margin pi - eps*T = {math.pi - eps_t:.4g})",
            math.pi - eps_t,
        )
    c5 = g_constants()["c5"]
    if case == "general":
        return (c1, 0.5, 2 / 9, 11 / 9, c5)
    r = symmetry_break / T
    shape = r * (1 - r / 2)
    return (c1, 2 * shape, 2 / 9, 56 * shape, c5)


@dataclass
class BoundReport:
    """Assembled bound ``eta <= sum per_order``."""

    case: str
    coeffs: tuple
    per_order: list
    eta_bound: float
    inputs_echo: dict = field(default_factory=dict)

    @property
    def c1(self) -> float:
        return self.coeffs[0]

    @property
    def c5(self) -> float:
        return self.coeffs[4]

    def to_dict(self) -> dict:
        return asdict(self)


def eta_dd_bound(
    J: float,
    epsilon: float,
    t0: float,
    case: str = "general",
    delta: float = 0.0,
    n_pulses: int = 0,
    regular_spacing: bool = True,
    symmetry_break: float = 0.0,
) -> BoundReport:
    """Effective noise strength bound for a DD-protected gate of duration ``t0``.

    ``T = t0`` except in the time-symmetric case where ``T = t0 + delta``.
    """
    for name, v in (("J", J), ("epsilon", epsilon), ("t0", t0), ("delta", delta)):
        if not math.isfinite(v) or v < 0:
            raise ConfigError(f"{name} must be finite and nonnegative")
    if J > epsilon * (1 + 1e-12):
        raise ConfigError("J cannot exceed epsilon = beta + J")
    T = t0 + delta if case == "time_symmetric" else t0
    eps_t = epsilon * T
    coeffs = table_one_coeffs(case, n_pulses, delta, T, regular_spacing, symmetry_break, eps_t)
    jt = J * T
    per_order = [c * jt * eps_t ** n for n, c in enumerate(coeffs)]
    return BoundReport(
        case=case,
        coeffs=tuple(float(c) for c in coeffs),
        per_order=per_order,
        eta_bound=float(sum(per_order)),
        inputs_echo={
            "J": J,
            "epsilon": epsilon,
            "T": T,
            "delta": delta,
            "n_pulses": n_pulses,
            "regular_spacing": regular_spacing,
            "symmetry_break": symmetry_break,
        },
    )


def even_term_bound(n: int, J: float, epsilon: float, T: float, delta_region: float) -> float | tuple[float, float]:
    """Bound on an even Magnus term of a sequence symmetric outside ``delta_region``.

    Returns ``(2^{n+1} J eps^{n-1}/n^2)(2^{n-1}-1)[T^n - (T-D)^n]``. For
    ``n = 2`` a tuple ``(that value, 2 J eps (D T - D^2/2))`` is returned, the
    second entry coming from an exact count of the integration volume.
    """
    if n < 2 or n % 2:
        raise ConfigError("even_term_bound needs an even order n >= 2")
    d = float(delta_region)
    if not 0 <= d <= T:
        raise ConfigError("delta_region must lie in [0, T]")
    # T^n - (T-d)^n written without cancellation
    diff = sum(math.comb(n, k) * T ** (n - k) * (-1) ** (k + 1) * d ** k for k in range(1, n + 1))
    general = 2 ** (n + 1) * J * epsilon ** (n - 1) / n ** 2 * (2 ** (n - 1) - 1) * diff
    if n == 2:
        return general, 2 * J * epsilon * (d * T - d * d / 2)
    return general


def quasilocal_omega2_bound(b: float, c: float, J: float, T: float) -> float:
    """``||Omega_2|| <= (JT)((b + c + J) T)`` for a quasi-local bath.

    ``b`` bounds single-site bath terms, ``c`` the pair interactions between
    bath sites and ``J`` is the summed system-bath coupling.
    """
    if min(b, c, J, T) < 0:
        raise ConfigError("quasi-local bound inputs must be nonnegative")
    return (J * T) * ((b + c + J) * T)


def log_distance_factor(eps_plus: float, eps_minus: float) -> float:
    """``c`` with ``||A - B|| <= c ||e^A - e^B||`` for anti-Hermitian ``A, B``.

    Requires ``||A + B|| <= eps_plus`` and ``||A - B|| <= eps_minus``.
    """
    h = 0.5 * eps_minus
    sinhc = 1 + h * h / 6 + h ** 4 / 120 if abs(h) < 1e-4 else math.sinh(h) / h
    denom = 2.0 - math.exp(0.5 * eps_plus) * sinhc
    if denom <= 0:
        raise ValidityError("log-distance factor undefined: denominator <= 0", denom)
    return 1.0 / denom


def coefficients_json(T: float = 1.0, delta: float = 0.0, n_pulses: int = 0, symmetry_break: float = 0.0,
                      eps_t: float = EPS_T_MAX) -> str:
    """Coefficient table for all cases as JSON."""
    out = {}
    for case in CASES:
        out[case] = list(table_one_coeffs(case, n_pulses, delta, T, True, symmetry_break, eps_t))
    out["constants"] = g_constants()
    out["f_n"] = [str(f) for f in fn_coefficients(8)]
    return json.dumps(out, indent=2, sort_keys=True)

