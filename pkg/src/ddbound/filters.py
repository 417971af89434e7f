"""Filter-function analysis of Pauli pulse sequences on a single qubit.

With ideal Pauli pulses the interaction-picture system operators are
``sigma_a(t) = F_a(t) sigma_a`` with ``F_a = +-1``. Everything here works
with the Fourier transforms ``F~_a(w) = int_0^T e^{-iwt} F_a(t) dt`` and the
bath spectral lines they are evaluated at.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from .errors import ConfigError, NotRepresentableError
from .operators import PAULI_X, PAULI_Y, PAULI_Z, spectral_norm
from .schedule import PulseSchedule, build_sequence, control_unitary, evolve, free_intervals

__all__ = [
    "AXES",
    "SwitchingSet",
    "SpectralLine",
    "SpectralModel",
    "switching_functions",
    "filter_fourier",
    "DecouplingMoments",
    "decoupling_order_moments",
    "eta_correlator",
    "dyson_remainder",
    "gaussian_remainder",
    "gaussian_K",
    "FilterLeading",
    "cdd_filter_leading",
    "cdd_filter_value",
    "PulseWidthFilter",
    "pulse_width_filter",
]

AXES = ("x", "y", "z")
_SIGMA = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}
CDD_LEVEL_CAP = 8


@dataclass(frozen=True)
class SwitchingSet:
    """Sign of each Pauli axis on a list of intervals.

    ``intervals`` has shape ``(m, 2)``; with zero-width pulses the intervals
    tile ``[0, T]``.
    """

    intervals: np.ndarray
    signs: dict
    t_total: float

    def pattern(self, axis: str) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs[axis])

    @classmethod
    def from_patterns(cls, patterns: dict, tau0: float = 1.0) -> "SwitchingSet":
        """Build from strings like ``"++--"`` on equal intervals of ``tau0``."""
        lengths = {len(p) for p in patterns.values()}
        if len(lengths) != 1:
            raise ConfigError("all patterns must have the same length")
        m = lengths.pop()
        edges = np.arange(m + 1) * tau0
        signs = {a: np.array([1 if c == "+" else -1 for c in patterns.get(a, "+" * m)]) for a in AXES}
        return cls(np.column_stack([edges[:-1], edges[1:]]), signs, m * tau0)


def switching_functions(seq: PulseSchedule, allow_width: bool = False) -> SwitchingSet:
    """Signs of ``U_c(t)^H sigma_a U_c(t)`` on the free intervals of ``seq``."""
    if seq.dim_s != 2:
        raise NotRepresentableError("switching functions need a single-qubit system")
    if seq.delta > 0 and not allow_width:
        raise NotRepresentableError("switching functions need zero-width pulses")
    ivs = free_intervals(seq)
    signs = {a: [] for a in AXES}
    for a, b in ivs:
        u = control_unitary(seq, 0.5 * (a + b))
        for ax in AXES:
            s = _SIGMA[ax]
            c = np.trace(u.conj().T @ s @ u @ s).real / 2
            if abs(abs(c) - 1) > 1e-9:
                raise NotRepresentableError(f"pulse neither commutes nor anticommutes with sigma_{ax}")
            signs[ax].append(1 if c > 0 else -1)
    return SwitchingSet(
        np.asarray(ivs, dtype=float).reshape(-1, 2),
        {ax: np.asarray(v, dtype=int) for ax, v in signs.items()},
        seq.t_total,
    )


def filter_fourier(sw: SwitchingSet, omega: float) -> dict:
    """``F~_a(omega)`` per axis, exact.

    Each interval contributes ``L e^{-i w (a+b)/2} sinc(w L / 2)``, which
    is regular at ``w = 0``.
    """
    a = sw.intervals[:, 0]
    b = sw.intervals[:, 1]
    length = b - a
    piece = length * np.exp(-0.5j * omega * (a + b)) * np.sinc(omega * length / (2 * np.pi))
    return {ax: complex(np.dot(sw.signs[ax], piece)) for ax in AXES}


@dataclass(frozen=True)
class DecouplingMoments:
    moments: dict
    order: dict

    @property
    def overall(self) -> int:
        return min(self.order.values())


def decoupling_order_moments(sw: SwitchingSet, n: int) -> DecouplingMoments:
    """``int_0^T t^m F_a(t) dt`` for ``m < n`` and the resulting order.

    The order is the count of leading moments below ``1e-10 T^{m+1}``.
    """
    a = sw.intervals[:, 0]
    b = sw.intervals[:, 1]
    T = sw.t_total
    moments, order = {}, {}
    for ax in AXES:
        s = sw.signs[ax]
        ms = [float(np.dot(s, (b ** (m + 1) - a ** (m + 1)) / (m + 1))) for m in range(n)]
        k = 0
        while k < n and abs(ms[k]) <= 1e-10 * T ** (k + 1):
            k += 1
        moments[ax] = ms
        order[ax] = k
    return DecouplingMoments(moments, order)


# -- bath spectra --------------------------------------------------------------

@dataclass(frozen=True)
class SpectralLine:
    omega: float
    j2: np.ndarray


@dataclass(frozen=True)
class SpectralModel:
    """Stationary bath correlations as discrete lines.

    ``K_ab(w) = 2 pi sum_i J2_{ab,i} delta(w - w_i)``. The bath is taken to
    be refreshed at every circuit location.
    """

    lines: tuple
    refreshed_bath: bool = True

    def __post_init__(self):
        if not self.refreshed_bath:
            raise ConfigError("bath memory across locations is not modeled")
        for ln in self.lines:
            j2 = np.asarray(ln.j2, dtype=float)
            if j2.shape != (3, 3) or not np.all(np.isfinite(j2)):
                raise ConfigError("each j2 must be a finite 3x3 matrix")
            if not np.allclose(j2, j2.T, atol=1e-12 * max(1.0, np.abs(j2).max())):
                raise ConfigError("j2 must be symmetric")
            if np.linalg.eigvalsh(j2).min() < -1e-12 * max(1.0, np.abs(j2).max()):
                raise ConfigError("j2 must be positive semidefinite")

    @classmethod
    def from_dict(cls, data: dict) -> "SpectralModel":
        try:
            lines = tuple(SpectralLine(float(ln["omega"]), np.asarray(ln["j2"], dtype=float))
                          for ln in data["lines"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed spectral model: {exc}", "/spectrum") from exc
        return cls(lines, bool(data.get("refreshed_bath", True)))

    @classmethod
    def single_line(cls, omega: float, axis: str = "z", strength2: float = 1.0) -> "SpectralModel":
        j2 = np.zeros((3, 3))
        i = AXES.index(axis)
        j2[i, i] = strength2
        return cls((SpectralLine(float(omega), j2),))

    def correlator(self, u: float) -> np.ndarray:
        """Symmetrized correlation ``C_ab(u) = sum_i J2_{ab,i} cos(w_i u)``."""
        out = np.zeros((3, 3))
        for ln in self.lines:
            out += ln.j2 * math.cos(ln.omega * u)
        return out


def dyson_remainder(jt: float) -> float:
    """``2(e^{JT} - 1 - JT - (JT)^2/2)``: bound on Dyson terms beyond second order."""
    x = float(jt)
    if x < 0:
        raise ConfigError("JT must be nonnegative")
    if x < 1e-3:
        return 2 * (x ** 3 / 6 + x ** 4 / 24 + x ** 5 / 120)
    return 2 * (math.expm1(x) - x - 0.5 * x * x)


def eta_correlator(sw: SwitchingSet, spec: SpectralModel, J: float, T: float) -> dict:
    """Second-order noise strength from a filter and a line spectrum.

    ``eta^2 <= max_psi <psi| Q |psi> + remainder`` with
    ``Q = sum_i sum_ab J2_{ab,i} F~_a(w_i) conj(F~_b(w_i)) sigma_a sigma_b``,
    a 2x2 Hermitian matrix whose largest eigenvalue is the maximum over
    system states.
    """
    q = np.zeros((2, 2), dtype=complex)
    for ln in spec.lines:
        f = filter_fourier(sw, ln.omega)
        for i, a in enumerate(AXES):
            for j, b in enumerate(AXES):
                w = ln.j2[i, j]
                if w:
                    q += w * f[a] * np.conj(f[b]) * (_SIGMA[a] @ _SIGMA[b])
    q = 0.5 * (q + q.conj().T)
    lead = float(max(np.linalg.eigvalsh(q).max(), 0.0))
    return {"eta_sq_leading": lead, "dyson_remainder": dyson_remainder(J * T)}


def gaussian_remainder(K: float) -> float:
    """``e^K - 1 - K``: all Dyson terms beyond second order for Gaussian noise."""
    if K < 0:
        raise ConfigError("K must be nonnegative")
    if K < 1e-4:
        return K * K / 2 + K ** 3 / 6
    return math.expm1(K) - K


def gaussian_K(correlator: SpectralModel | Callable[[float], np.ndarray], T: float,
               breakpoints: Sequence[float] | None = None) -> float:
    """``K = 1/2 int_0^T int_0^T sum_ab |C_ab(t - s)| dt ds``.

    For a stationary correlator with ``|C(u)| = |C(-u)|`` this reduces to
    ``sum_ab int_0^T (T - u) |C_ab(u)| du``.
    """
    if T < 0:
        raise ConfigError("T must be nonnegative")
    if T == 0:
        return 0.0
    corr = correlator.correlator if isinstance(correlator, SpectralModel) else correlator
    pts = list(breakpoints or [])
    if isinstance(correlator, SpectralModel) and not pts:
        # kinks of |cos| for every line
        for ln in correlator.lines:
            w = abs(ln.omega)
            if w > 0:
                k = np.arange(0, int(w * T / np.pi) + 2)
                pts.extend(((k + 0.5) * np.pi / w)[((k + 0.5) * np.pi / w) < T])
    pts = sorted(p for p in set(pts) if 0 < p < T)[:400]

    def integrand(u):
        return (T - u) * float(np.abs(corr(u)).sum())

    val, _ = quad(integrand, 0.0, T, points=pts or None, limit=max(200, 4 * len(pts) + 50),
                  epsabs=1e-13, epsrel=1e-11)
    return val


# -- concatenated filters ------------------------------------------------------

_CDD_BASES = {"xixi": "xixi", "universal": "universal"}


@dataclass(frozen=True)
class FilterLeading:
    """``F~_a(w) = tau0 * coefficient * (w tau0)^order + ...``"""

    coefficient: complex
    magnitude: int
    order: int


def _base_signs(base: str) -> dict:
    if base not in _CDD_BASES:
        raise ConfigError(f"unknown concatenation base {base!r}")
    sw = switching_functions(build_sequence(base, 1.0))
    return {ax: [int(s) for s in sw.signs[ax]] for ax in AXES}


def _leading_in_u(coeffs: dict) -> tuple[int, int]:
    """Multiplicity ``m`` of the root ``x = 1`` of ``sum c_p x^p`` and the
    coefficient of ``(x - 1)^m``, exactly."""
    m = 0
    while True:
        a = sum(c * math.comb(p, m) for p, c in coeffs.items())
        if a != 0:
            return m, a
        m += 1


def cdd_filter_leading(base: str, level: int) -> dict:
    """Leading small-``w`` term of the level-``level`` concatenated filter.

    ``(-iw) F~ = (x - 1) S_1(x) prod_{k=2}^{n} S_1(x^{R^{k-1}})`` with
    ``x = e^{-i w tau0}`` and ``S_1`` the base sign polynomial for that axis.
    Each factor's root multiplicity at ``x = 1`` and leading coefficient are
    computed in exact integer arithmetic.
    """
    if not 1 <= level <= CDD_LEVEL_CAP:
        raise ConfigError(f"level must be in [1, {CDD_LEVEL_CAP}]")
    signs = _base_signs(base)
    R = len(signs["x"])
    out = {}
    for ax in AXES:
        s = signs[ax]
        m_total, a_total = 1, 1  # the (x - 1) factor
        for k in range(1, level + 1):
            stride = R ** (k - 1)
            m, a = _leading_in_u({j * stride: c for j, c in enumerate(s)})
            m_total += m
            a_total *= a
        # (x - 1)^m ~ (-i theta)^m, and dividing by (-i w) leaves tau0 (-i theta)^{m-1}
        order = m_total - 1
        coef = a_total * (-1j) ** order
        out[ax] = FilterLeading(complex(coef), abs(a_total), order)
    return out


def cdd_filter_value(base: str, level: int, omega: float, tau0: float = 1.0) -> dict:
    """Level-``level`` concatenated ``F~_a(omega)`` from the product formula."""
    if not 1 <= level <= CDD_LEVEL_CAP:
        raise ConfigError(f"level must be in [1, {CDD_LEVEL_CAP}]")
    signs = _base_signs(base)
    R = len(signs["x"])
    theta = omega * tau0
    # (x - 1)/(-i w) for one interval, regular at w = 0
    unit = tau0 * np.exp(-0.5j * theta) * np.sinc(theta / (2 * np.pi))
    out = {}
    for ax in AXES:
        val = unit
        for k in range(1, level + 1):
            y = np.exp(-1j * theta * R ** (k - 1))
            val *= sum(c * y ** j for j, c in enumerate(signs[ax]))
        out[ax] = complex(val)
    return out


# -- finite-width pulses ------------------------------------------------------

@dataclass(frozen=True)
class PulseWidthFilter:
    """Filter contributions from inside finite-width pulses.

    ``pw_norm`` is ``||S~_{a,PW}(w)||``, ``ideal`` the free-evolution filter
    and ``total_norm`` the norm of their operator sum. ``n_delta = N delta``
    is the small-``w`` scale of ``pw_norm``.
    """

    pw_norm: dict
    ideal: dict
    total_norm: dict
    n_delta: float
    extra: dict = field(default_factory=dict)


def pulse_width_filter(seq: PulseSchedule, omega: float, nodes: int = 24) -> PulseWidthFilter:
    """``S~_{a,PW}(w) = int_(pulses) e^{-iwt} U_c^H sigma_a U_c dt`` by
    Gauss-Legendre quadrature inside each rectangular pulse."""
    if seq.dim_s != 2:
        raise NotRepresentableError("pulse-width filter needs a single-qubit system")
    if seq.delta == 0:
        zero = {ax: 0.0 for ax in AXES}
        sw = switching_functions(seq)
        ideal = filter_fourier(sw, omega)
        return PulseWidthFilter(zero, ideal, {ax: abs(v) for ax, v in ideal.items()}, 0.0)
    sw = switching_functions(seq, allow_width=True)
    ideal = filter_fourier(sw, omega)
    x, w = np.polynomial.legendre.leggauss(nodes)
    pw = {ax: np.zeros((2, 2), dtype=complex) for ax in AXES}
    u_before = np.eye(2, dtype=complex)
    n_wide = 0
    for p in seq.pulses:
        if p.width > 0 and p.generator is not None:
            n_wide += 1
            for xi, wi in zip(x, w):
                tau = 0.5 * p.width * (xi + 1)
                t = p.start + tau
                u = evolve(p.generator, tau) @ u_before
                phase = np.exp(-1j * omega * t) * 0.5 * p.width * wi
                for ax in AXES:
                    pw[ax] += phase * (u.conj().T @ _SIGMA[ax] @ u)
        u_before = p.unitary @ u_before
    pw_norm = {ax: spectral_norm(pw[ax]) for ax in AXES}
    total = {ax: spectral_norm(pw[ax] + ideal[ax] * _SIGMA[ax]) for ax in AXES}
    return PulseWidthFilter(pw_norm, ideal, total, n_wide * seq.delta)
