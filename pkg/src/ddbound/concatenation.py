"""Level recursions for concatenated dynamical decoupling.

Level ``k`` is the base ``R``-pulse sequence with every free interval
replaced by a level ``k-1`` sequence, so ``T_k = R^k tau0``. The effective
Hamiltonian of level ``k-1`` plays the role of the noise Hamiltonian at
level ``k``, which gives recursions for ``beta_k``, ``J_k`` and
``eps_k = beta_k + J_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.optimize import brentq

from .bounds import EPS_T_MAX, g_constants, log_distance_factor
from .errors import ConfigError, ValidityError

__all__ = [
    "REGIMES",
    "CBAR_DEFAULTS",
    "CddLevel",
    "CddTrace",
    "level_coefficients",
    "cdd_iterate",
    "pulse_error_recursion",
    "cdd_closed_form",
    "optimal_level",
    "cbar_general",
    "cbar_time_symmetric",
]

REGIMES = ("magnus_general", "magnus_time_symmetric")
_ALIASES = {"general": "magnus_general", "time_symmetric": "magnus_time_symmetric"}

#: Rounded self-consistent ``cbar`` for the universal (R=4) and
#: time-symmetric (R=8) bases.
CBAR_DEFAULTS = {("magnus_general", 4): 1.027, ("magnus_time_symmetric", 8): 1.332}

#: Fallback for the log-distance factor when its series leaves the regime.
D_FALLBACK = 1.25
PLATEAU_RATIO = 0.99


def _regime(regime: str) -> str:
    regime = _ALIASES.get(regime, regime)
    if regime not in REGIMES:
        raise ConfigError(f"unknown concatenation regime {regime!r}")
    return regime


@dataclass(frozen=True)
class CddLevel:
    k: int
    J_k: float
    beta_k: float
    K_k: float
    eps_k: float
    c2_k: float
    c3_k: float
    eta_k: float
    T_k: float
    x_k: float = 0.0  # eps_{k-1} T_k
    d_k: float = 1.0


@dataclass
class CddTrace:
    levels: list
    regime: str
    cbar: float
    floor: float = 0.0
    truncated: str = ""
    plateau_level: int | None = None
    cbar_violations: list = field(default_factory=list)

    @property
    def etas(self) -> list:
        return [lv.eta_k for lv in self.levels]


def level_coefficients(x: float, regime: str, qubit: bool = False) -> tuple[float, float]:
    """``(c2, c3)`` at ``x = eps_{k-1} T_k``.

    In the time-symmetric regime ``c2`` is the factor in
    ``J_k = c2 J_{k-1} x^2`` (that is ``2 c3``, or ``c3`` for a qubit).
    """
    regime = _regime(regime)
    c5 = g_constants()["c5"]
    mult = 1.0 if qubit else 2.0
    if regime == "magnus_general":
        c3 = 2 / 9 + 11 / 9 * x + c5 * x * x
        c2 = 0.5 + mult * (2 / 9 * x + 11 / 9 * x * x + c5 * x ** 3)
    else:
        c3 = 2 / 9 + c5 * x * x
        c2 = mult * c3
    return c2, c3


def pulse_error_recursion(
    J0: float,
    beta0: float,
    R: int,
    tau0: float,
    k_max: int,
    regime: str = "magnus_general",
    delta: float = 0.0,
    qubit: bool = False,
    cbar: float | None = None,
) -> CddTrace:
    """Iterate the level recursions including top-level pulse errors.

    ``J_k = c2 J_{k-1} x + 4 d_k R delta J0 / T_k`` in the general regime
    (``x^2`` for time-symmetric bases) with ``d_k`` the log-distance factor
    at ``eps_+ = eps_- = 2x``. Iteration stops, flagging ``truncated``, when
    ``x`` exceeds the validity cap of the coefficients.
    """
    regime = _regime(regime)
    if min(J0, beta0, tau0, delta) < 0 or tau0 == 0:
        raise ConfigError("noise parameters must be nonnegative and tau0 positive")
    if R < 2 or k_max < 0:
        raise ConfigError("need R >= 2 and k_max >= 0")
    eps0 = beta0 + J0
    if cbar is None:
        cbar = CBAR_DEFAULTS.get((regime, R))
        if cbar is None:
            cbar = cbar_general(R) if regime == "magnus_general" else cbar_time_symmetric(R)
    levels = [CddLevel(0, J0, beta0, 0.0, eps0, 0.0, 0.0, J0 * tau0, tau0)]
    trace = CddTrace(levels=levels, regime=regime, cbar=cbar, floor=4 * R * delta * J0)
    for k in range(1, k_max + 1):
        prev = levels[-1]
        T = R ** k * tau0
        x = prev.eps_k * T
        if x > EPS_T_MAX:
            trace.truncated = f"level {k}: eps_(k-1) T_k = {x:.4g} exceeds {EPS_T_MAX}"
            break
        c2, c3 = level_coefficients(x, regime, qubit)
        if regime == "magnus_general":
            J = c2 * prev.J_k * x
            if c2 * prev.eps_k > cbar * eps0 * (1 + 1e-12):
                trace.cbar_violations.append(k)
        else:
            J = c2 * prev.J_k * x * x
            if c2 * prev.eps_k ** 2 > (cbar * eps0) ** 2 * (1 + 1e-12):
                trace.cbar_violations.append(k)
        d = 1.0
        if delta > 0:
            try:
                d = log_distance_factor(2 * x, 2 * x)
            except ValidityError:
                d = D_FALLBACK
            J += 4 * d * R * delta * J0 / T
        K = c3 * prev.J_k * x * x
        beta = prev.beta_k + K
        levels.append(CddLevel(k, J, beta, K, beta + J, c2, c3, J * T, T, x, d))
    for lv_prev, lv in zip(levels, levels[1:]):
        if lv.eta_k >= PLATEAU_RATIO * lv_prev.eta_k:
            trace.plateau_level = lv.k
            break
    return trace


def cdd_iterate(J0: float, beta0: float, R: int, tau0: float, k_max: int,
                regime: str = "magnus_general", qubit: bool = False, cbar: float | None = None) -> CddTrace:
    """Level recursions with ideal pulses."""
    return pulse_error_recursion(J0, beta0, R, tau0, k_max, regime, 0.0, qubit, cbar)


def cdd_closed_form(cbar_eps_tau0: float, R: int, J_tau0: float, k: int, regime: str = "magnus_general") -> float:
    """``eta_k`` assuming ``c2_k eps_{k-1} <= cbar eps`` at every level."""
    regime = _regime(regime)
    if k < 0:
        raise ConfigError("level must be nonnegative")
    if regime == "magnus_general":
        return R ** (k * (k + 3) / 2) * cbar_eps_tau0 ** k * J_tau0
    return R ** (k * (k + 2)) * cbar_eps_tau0 ** (2 * k) * J_tau0


def optimal_level(cbar_eps_tau0: float, R: int, regime: str = "magnus_general") -> dict:
    """Best concatenation level and the bound on ``eta_opt / (J tau0)``."""
    regime = _regime(regime)
    if not 0 < cbar_eps_tau0:
        raise ConfigError("cbar*eps*tau0 must be positive")
    L = math.log(1 / cbar_eps_tau0) / math.log(R)
    if regime == "magnus_general":
        k = max(0, math.floor(L - 1))
        bound = R ** -1.0 * cbar_eps_tau0 ** (0.5 * L - 1.5)
    else:
        # largest k with k + 1/2 < L
        k = max(0, math.ceil(L - 0.5) - 1)
        bound = R ** -0.75 * cbar_eps_tau0 ** (L - 2)
    default = CBAR_DEFAULTS.get((regime, R))
    eta_k = cdd_closed_form(cbar_eps_tau0, R, 1.0, k, regime)
    return {
        "k_max": k,
        "eta_opt_bound": bound,
        "eta_at_k_max": eta_k,
        # gain over the level-1 sequence
        "improvement": cdd_closed_form(cbar_eps_tau0, R, 1.0, 1, regime) / eta_k,
        "cbar_default": default,
    }


def cbar_general(R: int) -> float:
    """Smallest ``cbar`` with ``1/2 + 2[2/9 u + 11/9 u^2 + C5 u^3] <= cbar``,
    ``u = 1/(cbar R)``."""
    c5 = g_constants()["c5"]

    def f(c):
        u = 1 / (c * R)
        return 0.5 + 2 * (2 / 9 * u + 11 / 9 * u * u + c5 * u ** 3) - c

    return brentq(f, 0.5, 100.0, xtol=1e-12)


def cbar_time_symmetric(R: int) -> float:
    """``cbar`` with ``2[2/9 + C5/(cbar^2 R)] = cbar^2``."""
    c5 = g_constants()["c5"]
    a = 4 / 9
    x = 0.5 * (a + math.sqrt(a * a + 8 * c5 / R))
    return math.sqrt(x)
