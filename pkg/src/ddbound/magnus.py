"""Magnus expansion for piecewise-constant Hamiltonians.

Three independent routes are provided:

* closed-form nested sums for the first three terms (:func:`omega_low_order`);
* the exact Bernoulli recursion carried as matrix polynomials within each
  segment (:func:`magnus_recursion`), which also yields the intermediate
  commutator terms ``S_n^(j)(t)``;
* a fit of ``log U(lambda H)`` in the coupling scale ``lambda``
  (:func:`omega_n_series`).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import ConfigError, ValidityError
from .operators import evolve, matrix_log_principal, spectral_norm
from .schedule import TogglingSegment

__all__ = [
    "MagnusSeries",
    "ordered_product",
    "magnus_total",
    "omega_low_order",
    "omega1_prime",
    "magnus_recursion",
    "RecursionResult",
    "omega_n_series",
    "integrated_norm",
]

# Bernoulli numbers B_0..B_8 with B_1 = -1/2 (enough for n_max <= 8).
_BERNOULLI = [Fraction(1), Fraction(-1, 2), Fraction(1, 6), Fraction(0), Fraction(-1, 30),
              Fraction(0), Fraction(1, 42), Fraction(0), Fraction(-1, 30)]
_FACT = [1, 1, 2, 6, 24, 120, 720, 5040, 40320]
N_MAX = 8


def integrated_norm(segments: Sequence[TogglingSegment]) -> float:
    """``int ||H(t)|| dt`` over the partition."""
    return float(sum(s.length * spectral_norm(s.hamiltonian, hermitian=True) for s in segments))


def ordered_product(segments: Sequence[TogglingSegment], scale: float = 1.0) -> np.ndarray:
    """Time-ordered product of ``exp(-i scale H_k h_k)``, latest leftmost."""
    dim = segments[0].hamiltonian.shape[0]
    u = np.eye(dim, dtype=complex)
    for s in segments:
        u = evolve(s.hamiltonian, scale * s.length) @ u
    return u


def magnus_total(segments: Sequence[TogglingSegment]) -> tuple[np.ndarray, float]:
    """Principal log of the ordered product and the margin ``pi - int||H||``."""
    margin = np.pi - integrated_norm(segments)
    return matrix_log_principal(ordered_product(segments)), float(margin)


def _comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def omega_low_order(segments: Sequence[TogglingSegment], n: int) -> np.ndarray:
    """Closed-form ``Omega_n`` for ``n`` in {1, 2, 3}.

    With ``A_k = -i H_k`` and lengths ``h_k``:
    ``Omega_2 = 1/2 sum_{k>l} h_k h_l [A_k, A_l]`` and ``Omega_3`` sums the
    symmetric double-commutator kernel over ordered triples, with the
    half-volume weights of the simplex when two times share a segment.
    Prefix/suffix running sums keep the cost linear in the segment count.
    """
    a = [-1j * s.hamiltonian for s in segments]
    h = [s.length for s in segments]
    zero = np.zeros_like(a[0])
    if n == 1:
        return sum((hk * ak for hk, ak in zip(h, a)), zero.copy())
    if n == 2:
        out = zero.copy()
        prefix = zero.copy()
        for hk, ak in zip(h, a):
            out += hk * _comm(ak, prefix)
            prefix = prefix + hk * ak
        return 0.5 * out
    if n != 3:
        raise ConfigError("closed form available for n = 1, 2, 3 only")
    m = len(a)
    # prefix[k] = sum_{c<k} h_c A_c, suffix[k] = sum_{c>k} h_c A_c
    prefix = [zero]
    for k in range(m - 1):
        prefix.append(prefix[-1] + h[k] * a[k])
    suffix = [zero] * m
    for k in range(m - 2, -1, -1):
        suffix[k] = suffix[k + 1] + h[k + 1] * a[k + 1]
    # distinct a > b > c: [A_a,[A_b,A_c]] + [A_c,[A_b,A_a]]
    first = zero.copy()
    inner = zero.copy()  # sum_{b<a} h_b [A_b, prefix_b]
    for k in range(m):
        first += h[k] * _comm(a[k], inner)
        inner = inner + h[k] * _comm(a[k], prefix[k])
    second = zero.copy()
    inner = zero.copy()  # sum_{b>c} h_b [A_b, suffix_b]
    for k in range(m - 1, -1, -1):
        second += h[k] * _comm(a[k], inner)
        inner = inner + h[k] * _comm(a[k], suffix[k])
    # two times in one segment: weights h^2/2
    pair = zero.copy()
    for k in range(m):
        pair += 0.5 * h[k] ** 2 * _comm(a[k], _comm(a[k], prefix[k]))
        pair += 0.5 * h[k] ** 2 * _comm(a[k], _comm(a[k], suffix[k]))
    return (first + second + pair) / 6.0


def omega1_prime(omega1: np.ndarray, h_bath: np.ndarray, t_span: float, gamma: float = 0.0) -> np.ndarray:
    """``Omega_1 + i (T - 2 Gamma) H_B``: the part of ``Omega_1`` that is noise."""
    return omega1 + 1j * (t_span - 2 * gamma) * h_bath


# -- exact recursion with matrix polynomials ---------------------------------

def _pmul_comm(p: list, q: list) -> list:
    out = [None] * (len(p) + len(q) - 1)
    for i, pi in enumerate(p):
        for j, qj in enumerate(q):
            c = pi @ qj - qj @ pi
            out[i + j] = c if out[i + j] is None else out[i + j] + c
    return out


def _padd(p: list, q: list, coef: float = 1.0) -> list:
    n = max(len(p), len(q))
    out = []
    for i in range(n):
        a = p[i] if i < len(p) else None
        b = q[i] if i < len(q) else None
        if b is not None:
            b = coef * b
        out.append(b if a is None else (a if b is None else a + b))
    return out


def _pint(p: list, const: np.ndarray) -> list:
    return [const] + [c / (i + 1) for i, c in enumerate(p)]


def _peval(p: list, tau: float) -> np.ndarray:
    acc = np.zeros_like(p[0])
    for c in reversed(p):
        acc = acc * tau + c
    return acc


@dataclass
class RecursionResult:
    """Magnus terms from the exact recursion.

    ``omegas[n-1]`` is ``Omega_n(T)``. ``s_samples`` maps ``(n, j)`` to
    ``(times, norms)`` of ``||S_n^(j)(t)||`` when sampling was requested.
    """

    omegas: list
    s_samples: dict = field(default_factory=dict)


def magnus_recursion(
    segments: Sequence[TogglingSegment],
    n_max: int,
    samples_per_segment: int = 0,
) -> RecursionResult:
    """``Omega_1 .. Omega_{n_max}`` from ``dOmega_n/dt = sum_j B_j/j! S_n^(j)``.

    Within each constant segment every ``Omega_n`` is a polynomial of degree
    ``n`` in the local time, so the recursion is integrated exactly.
    ``S_n^(1) = [Omega_{n-1}, A]`` and
    ``S_n^(j) = sum_{m=1}^{n-j} [Omega_m, S_{n-m}^(j-1)]`` with ``A = -i H``.
    """
    if not 1 <= n_max <= N_MAX:
        raise ConfigError(f"n_max must be in [1, {N_MAX}]")
    dim = segments[0].hamiltonian.shape[0]
    zero = np.zeros((dim, dim), dtype=complex)
    values = [zero.copy() for _ in range(n_max)]
    samples: dict = {}
    coef = [float(_BERNOULLI[j] / _FACT[j]) for j in range(N_MAX + 1)]
    for seg in segments:
        a = -1j * seg.hamiltonian
        omega_poly: list[list] = []
        s_poly: dict = {(1, 0): [a]}
        for n in range(1, n_max + 1):
            if n == 1:
                deriv = [a]
            else:
                deriv = [zero]
                for j in range(1, n):
                    acc: list = [zero]
                    for m in range(1, n - j + 1):
                        prev = s_poly.get((n - m, j - 1))
                        if prev is None:
                            continue
                        acc = _padd(acc, _pmul_comm(omega_poly[m - 1], prev))
                    s_poly[(n, j)] = acc
                    if coef[j] != 0.0:
                        deriv = _padd(deriv, acc, coef[j])
            omega_poly.append(_pint(deriv, values[n - 1]))
        if samples_per_segment:
            taus = (np.arange(samples_per_segment) + 0.5) / samples_per_segment * seg.length
            for key, poly in s_poly.items():
                if key[1] == 0:
                    continue
                norms = [spectral_norm(_peval(poly, tau)) for tau in taus]
                ts, ns = samples.setdefault(key, ([], []))
                ts.extend(seg.t_start + taus)
                ns.extend(norms)
        values = [_peval(p, seg.length) for p in omega_poly]
    samples = {k: (np.asarray(t), np.asarray(v)) for k, (t, v) in samples.items()}
    return RecursionResult(omegas=values, s_samples=samples)


# -- coupling-scale fit ---------------------------------------------------------

@dataclass
class MagnusSeries:
    """Per-order Magnus terms with diagnostics."""

    terms: list
    total_log: np.ndarray
    t_span: float
    convergence_margin: float
    residual: float
    condition: float
    omega1_prime: np.ndarray | None = None

    def partial_sum(self, n: int | None = None) -> np.ndarray:
        n = len(self.terms) if n is None else n
        return sum(self.terms[:n], np.zeros_like(self.total_log))


def omega_n_series(
    segments: Sequence[TogglingSegment],
    n_max: int,
    n_lambda: int | None = None,
    h_bath: np.ndarray | None = None,
    gamma: float = 0.0,
) -> MagnusSeries:
    """Magnus terms from ``Omega(lambda) = log U(lambda H)``.

    ``Omega(lambda) = sum_n lambda^n Omega_n``. Evaluating at symmetric
    Chebyshev nodes ``+-lambda_i`` separates even and odd orders, each fitted
    as a polynomial in ``lambda^2`` by least squares.
    """
    if not 1 <= n_max <= N_MAX:
        raise ConfigError(f"n_max must be in [1, {N_MAX}]")
    n_lambda = n_max + 4 if n_lambda is None else n_lambda
    if n_lambda <= n_max:
        raise ConfigError("n_lambda must exceed n_max")
    margin = np.pi - integrated_norm(segments)
    if margin <= 0:
        raise ValidityError("Magnus expansion may diverge: int ||H|| dt >= pi", margin)
    degree = n_lambda
    odd_orders = list(range(1, degree + 1, 2))
    even_orders = list(range(2, degree + 1, 2))
    m = max(len(odd_orders), len(even_orders)) + 2
    lam = np.cos((2 * np.arange(1, m + 1) - 1) * np.pi / (4 * m))
    plus = np.array([matrix_log_principal(ordered_product(segments, x)) for x in lam])
    minus = np.array([matrix_log_principal(ordered_product(segments, -x)) for x in lam])
    odd = 0.5 * (plus - minus) / lam[:, None, None]
    even = 0.5 * (plus + minus) / lam[:, None, None] ** 2
    mu = lam ** 2
    v_odd = np.vander(mu, len(odd_orders), increasing=True)
    v_even = np.vander(mu, len(even_orders), increasing=True)
    cond = max(np.linalg.cond(v_odd), np.linalg.cond(v_even))
    if cond > 1e10:
        warnings.warn(f"coupling-scale fit is ill-conditioned (cond={cond:.2e})", RuntimeWarning)
    dim = odd.shape[1]
    c_odd = np.linalg.lstsq(v_odd, odd.reshape(m, -1), rcond=None)[0].reshape(-1, dim, dim)
    c_even = np.linalg.lstsq(v_even, even.reshape(m, -1), rcond=None)[0].reshape(-1, dim, dim)
    coeffs = {}
    for i, n in enumerate(odd_orders):
        coeffs[n] = c_odd[i]
    for i, n in enumerate(even_orders):
        coeffs[n] = c_even[i]
    # exact terms are anti-Hermitian; drop the fit noise in the Hermitian part
    terms = [0.5 * (coeffs[n] - coeffs[n].conj().T) for n in range(1, n_max + 1)]
    total = matrix_log_principal(ordered_product(segments))
    residual = spectral_norm(total - sum(terms, np.zeros_like(total)))
    t_span = segments[-1].t_end - segments[0].t_start
    o1p = omega1_prime(terms[0], h_bath, t_span, gamma) if h_bath is not None else None
    return MagnusSeries(
        terms=terms,
        total_log=total,
        t_span=t_span,
        convergence_margin=float(margin),
        residual=float(residual),
        condition=float(cond),
        omega1_prime=o1p,
    )
