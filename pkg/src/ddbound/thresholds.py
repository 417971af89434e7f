"""Noise-suppression thresholds, overhead ratios and strategy regions.

All strengths here are ratios ``eta / (J tau0)``: every bound is linear in
``J``, so the ratios depend only on ``eps*tau0`` and ``delta/tau0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect, brentq

from .bounds import EPS_T_MAX, table_one_coeffs
from .errors import ConfigError, NotScalableError, NumericFailure

__all__ = [
    "DEFAULT_OVERHEAD_EXPONENT",
    "ThresholdResult",
    "RegionResult",
    "SEQUENCE_BOUND_SETUP",
    "noise_ratio",
    "suppression_threshold",
    "overhead_ratio",
    "edd_region",
    "edd_no_dd_threshold",
    "edd_dominance_width",
]

#: Exponent of the level-count overhead for a 291-location gadget.
DEFAULT_OVERHEAD_EXPONENT = math.log2(291)

BISECT_XTOL = 1e-8
BRACKET_LOW = 1e-6


@dataclass(frozen=True)
class _Setup:
    bound_case: str
    intervals: int  # gate duration in units of tau0
    n_pulses: int
    width_counts: bool  # whether finite pulse width enters the first-order term


#: How each protected-gate construction maps onto the bound coefficients.
SEQUENCE_BOUND_SETUP = {
    "universal": _Setup("general", 4, 4, True),
    "time_symmetric": _Setup("time_symmetric", 8, 8, True),
    # first-order decoupling is exact for any pulse shape
    "eulerian": _Setup("general", 8, 8, False),
}


def _setup(kind: str) -> _Setup:
    try:
        return SEQUENCE_BOUND_SETUP[kind]
    except KeyError:
        raise ConfigError(f"no threshold setup for sequence kind {kind!r}") from None


def noise_ratio(kind: str, eps_tau0: float, delta_ratio: float = 0.0, bound_case: str | None = None) -> float:
    """``eta_DD / (J tau0)`` for a protected gate built from ``kind``.

    ``tau0 = 1`` units: the gate lasts ``intervals`` and, for the
    time-symmetric gate, ``T = t0 + delta`` with a symmetry-breaking region
    of size ``2 delta``.
    """
    s = _setup(kind)
    case = bound_case or s.bound_case
    d = float(delta_ratio)
    if not 0 <= d < 1:
        raise ConfigError("delta_ratio must lie in [0, 1)")
    t0 = float(s.intervals)
    T = t0 + d if case == "time_symmetric" else t0
    width = d if s.width_counts else 0.0
    brk = 2 * d if case == "time_symmetric" else 0.0
    eps_t = eps_tau0 * T
    c = table_one_coeffs(case, s.n_pulses, width, T, True, brk, eps_t)
    return T * sum(cn * eps_t ** n for n, cn in enumerate(c))


@dataclass(frozen=True)
class ThresholdResult:
    """``crossing_eps_tau0``: largest ``eps*tau0`` with ``eta_DD < J tau0``.
    ``crossing_delta_ratio``: the same crossing in ``delta/tau0`` as
    ``eps*tau0 -> 0``."""

    crossing_eps_tau0: float
    crossing_delta_ratio: float
    sequence_kind: str
    bound_case: str


def _check_monotone(f, lo: float, hi: float, n: int = 64) -> None:
    vals = np.array([f(x) for x in np.linspace(lo, hi, n)])
    if np.any(np.diff(vals) < -1e-12 * np.max(np.abs(vals))):
        raise NumericFailure("noise ratio is not monotone on the bracket")


def suppression_threshold(kind: str, delta_ratio: float = 0.0, bound_case: str | None = None) -> ThresholdResult:
    """Solve ``eta_DD = J tau0`` for ``eps*tau0`` by bisection.

    The upper end of the bracket is where ``eps*T`` reaches the validity cap
    of the fifth-order coefficient.
    """
    s = _setup(kind)
    case = bound_case or s.bound_case
    T_units = s.intervals + (delta_ratio if case == "time_symmetric" else 0.0)
    hi = EPS_T_MAX / T_units

    def f(x):
        return noise_ratio(kind, x, delta_ratio, case) - 1.0

    flo, fhi = f(BRACKET_LOW), f(hi)
    if flo * fhi > 0:
        raise NumericFailure(
            f"no threshold crossing for {kind} in eps*tau0 in [{BRACKET_LOW}, {hi:.4g}] "
            f"(ratio {flo + 1:.4g} .. {fhi + 1:.4g})"
        )
    _check_monotone(f, BRACKET_LOW, hi)
    eps_star = bisect(f, BRACKET_LOW, hi, xtol=BISECT_XTOL)

    def g(d):
        return noise_ratio(kind, 0.0, d, case) - 1.0

    if s.width_counts:
        # g is linear in d at zero noise, so a full-precision root is cheap
        delta_star = brentq(g, 0.0, 1.0 - 1e-12, xtol=1e-15, rtol=1e-15) if g(1.0 - 1e-12) > 0 else math.inf
    else:
        delta_star = math.inf
    return ThresholdResult(float(eps_star), float(delta_star), kind, case)


def overhead_ratio(n_pulses: int, eta0: float, eta: float, eta_dd: float,
                   a: float = DEFAULT_OVERHEAD_EXPONENT) -> float:
    """``N (log(eta0/eta) / log(eta0/eta_dd))^a``: gate-count ratio of
    fault-tolerant circuits with and without DD-protected gates."""
    if min(eta0, eta, eta_dd) <= 0 or n_pulses < 1:
        raise ConfigError("noise strengths must be positive and n_pulses >= 1")
    if eta_dd >= eta0:
        raise NotScalableError("DD-protected gates are at or above the accuracy threshold", "protected")
    if eta >= eta0:
        raise NotScalableError(
            "unprotected gates are at or above the accuracy threshold; only DD-protected circuits scale",
            "unprotected",
        )
    return n_pulses * (math.log(eta0 / eta) / math.log(eta0 / eta_dd)) ** a


# (EDD, noDD, DD) orderings, lowest index first
_REGION_ORDER = {
    1: ("edd", "none", "dd"),
    2: ("edd", "dd", "none"),
    3: ("dd", "edd", "none"),
    4: ("dd", "none", "edd"),
    5: ("none", "dd", "edd"),
    6: ("none", "edd", "dd"),
}


@dataclass(frozen=True)
class RegionResult:
    region: int
    on_boundary: bool
    eta_dd: float
    eta_edd: float
    eta_none: float


def edd_region(eps_tau0: float, delta_ratio: float) -> RegionResult:
    """Classify which of no decoupling, universal DD and Eulerian DD is best.

    Strengths are in units of ``J tau0``; ties go to the lowest region index
    and set ``on_boundary``.
    """
    eta = {
        "dd": noise_ratio("universal", eps_tau0, delta_ratio),
        "edd": noise_ratio("eulerian", eps_tau0, delta_ratio),
        "none": 1.0,
    }
    tol = 1e-12
    vals = sorted(eta.values())
    boundary = any(abs(a - b) <= tol * max(abs(a), abs(b), 1.0) for a, b in zip(vals, vals[1:]))
    for idx, order in _REGION_ORDER.items():
        a, b, c = (eta[k] for k in order)
        if a <= b * (1 + tol) and b <= c * (1 + tol):
            return RegionResult(idx, boundary, eta["dd"], eta["edd"], 1.0)
    raise NumericFailure("region classification failed")  # pragma: no cover


def edd_no_dd_threshold() -> float:
    """``eps*tau0`` above which Eulerian DD is worse than no decoupling."""
    return suppression_threshold("eulerian").crossing_eps_tau0


def edd_dominance_width() -> float:
    """Smallest ``delta/tau0`` for which Eulerian DD beats universal DD at
    every ``eps*tau0`` where it also beats no decoupling.

    The two curves are compared up to the Eulerian no-DD crossing, where
    ``eta_EDD = J tau0``; the width solves ``eta_DD = J tau0`` there.
    """
    x_star = edd_no_dd_threshold()
    return bisect(lambda d: noise_ratio("universal", x_star, d) - 1.0, 0.0, 0.99, xtol=BISECT_XTOL)
