"""Dense complex linear algebra for small system-bath Hilbert spaces.

Operators are plain ``numpy.ndarray`` objects of shape ``(d, d)`` and dtype
``complex128``. Dimensions are tiny (at most a few hundred), so every routine
uses full dense factorizations rather than iterative methods.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import BranchCutError, DimensionError, NumericInputError

__all__ = [
    "PAULI_I",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "PAULIS",
    "SplitOperator",
    "as_operator",
    "is_hermitian",
    "spectral_norm",
    "matrix_exp",
    "evolve",
    "matrix_log_principal",
    "commutator",
    "tensor_product",
    "partial_trace_system",
    "partial_trace_bath",
    "bath_traceless_split",
    "traceless_part",
    "random_hermitian",
    "random_unitary",
]

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": PAULI_I, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}

#: Eigenvalues closer than this to -1 make the principal log ambiguous.
BRANCH_CUT_TOL = 1e-6


def as_operator(a, name: str = "operator") -> np.ndarray:
    """Validate and convert ``a`` to a square complex matrix."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericInputError(f"{name} has non-finite entries")
    return arr


def _maxnorm(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_hermitian(a, rtol: float = 1e-12) -> bool:
    """True when ``max|A - A^H| <= rtol * maxnorm(A)``."""
    a = as_operator(a)
    scale = max(_maxnorm(a), 1e-300)
    return _maxnorm(a - a.conj().T) <= rtol * scale


def spectral_norm(a, hermitian: bool = False) -> float:
    """Largest singular value of ``a``.

    With ``hermitian=True`` the largest absolute eigenvalue is returned
    instead, which is the same number but cheaper to compute.
    """
    a = as_operator(a)
    if hermitian:
        return float(np.max(np.abs(np.linalg.eigvalsh(a))))
    return float(np.linalg.svd(a, compute_uv=False)[0])


def evolve(h, t: float) -> np.ndarray:
    """``exp(-i h t)`` for Hermitian ``h`` via its eigendecomposition."""
    h = as_operator(h, "generator")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def matrix_exp(a, t: float = 1.0, hermitian: bool = True) -> np.ndarray:
    """Matrix exponential.

    ``hermitian=True`` treats ``a`` as a Hamiltonian and returns
    ``exp(-i a t)``. Otherwise returns ``exp(a t)`` for a general exponent.
    """
    if not np.isfinite(t):
        raise NumericInputError("time must be finite")
    if hermitian:
        return evolve(a, t)
    a = as_operator(a, "exponent")
    return sla.expm(a * t)


def matrix_log_principal(u, allow_branch: bool = False) -> np.ndarray:
    """Principal logarithm of a unitary; result is anti-Hermitian.

    Eigenphases are mapped into ``(-pi, pi]``. A unitary with an eigenvalue
    within ``BRANCH_CUT_TOL`` of -1 raises :class:`BranchCutError` unless
    ``allow_branch`` is set, in which case the phase ``+pi`` is used.
    """
    u = as_operator(u, "unitary")
    # Complex Schur form of a normal matrix is diagonal with unitary Z.
    t, z = sla.schur(u, output="complex")
    lam = np.diag(t)
    if not allow_branch and np.any(np.abs(lam + 1.0) < BRANCH_CUT_TOL):
        raise BranchCutError("unitary has an eigenvalue at the branch cut (-1)")
    phase = np.angle(lam)
    phase = np.where(phase <= -np.pi, phase + 2 * np.pi, phase)
    logabs = np.log(np.abs(lam))
    return (z * (logabs + 1j * phase)) @ z.conj().T


def commutator(a, b) -> np.ndarray:
    """``[A, B] = AB - BA``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"commutator of shapes {a.shape} and {b.shape}")
    return a @ b - b @ a


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product with the first (system) factor leftmost."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def _check_split(dim: int, dim_s: int) -> int:
    if dim_s < 1 or dim % dim_s:
        raise DimensionError(f"dimension {dim} not divisible by system dimension {dim_s}")
    return dim // dim_s


def partial_trace_system(o, dim_s: int) -> np.ndarray:
    """Trace out the leading (system) factor; returns a bath operator."""
    o = np.asarray(o)
    dim_b = _check_split(o.shape[0], dim_s)
    return np.einsum("ajak->jk", o.reshape(dim_s, dim_b, dim_s, dim_b))


def partial_trace_bath(o, dim_s: int) -> np.ndarray:
    """Trace out the trailing (bath) factor; returns a system operator."""
    o = np.asarray(o)
    dim_b = _check_split(o.shape[0], dim_s)
    return np.einsum("ajbj->ab", o.reshape(dim_s, dim_b, dim_s, dim_b))


@dataclass(frozen=True)
class SplitOperator:
    """``O = I (x) B0 + sum_a S_a (x) B_a`` with traceless ``S_a``."""

    bath_part: np.ndarray
    traceless_part: np.ndarray
    dim_s: int

    @property
    def bath_operator(self) -> np.ndarray:
        """``B0`` itself, acting on the bath alone."""
        dim_b = self.bath_part.shape[0] // self.dim_s
        return self.bath_part.reshape(self.dim_s, dim_b, self.dim_s, dim_b)[0, :, 0, :].copy()


def bath_traceless_split(o, dim_s: int, check: bool = True) -> SplitOperator:
    """Split ``o`` into its pure-bath and system-traceless components.

    With ``check=True`` the norm inequalities ``||I(x)B0|| <= ||O||`` and
    ``||traceless|| <= 2||O||`` are asserted. For a qubit system whose Pauli
    components ``B_0, B_x, B_y, B_z`` are all real, ``||traceless|| <= ||O||``
    is asserted too; without that time-reversal symmetry it can fail.
    """
    o = as_operator(o)
    _check_split(o.shape[0], dim_s)
    b0 = partial_trace_system(o, dim_s) / dim_s
    bath = np.kron(np.eye(dim_s), b0)
    rest = o - bath
    if check:
        n = spectral_norm(o)
        tol = 1e-10 * max(n, 1.0)
        nb = spectral_norm(bath)
        nt = spectral_norm(rest)
        ok = nb <= n + tol and nt <= 2 * n + tol
        if dim_s == 2 and is_hermitian(o, 1e-10) and _real_pauli_components(o):
            ok = ok and nt <= n + tol
        if not ok:
            raise ArithmeticError("traceless split violates the norm inequalities")
    return SplitOperator(bath_part=bath, traceless_part=rest, dim_s=dim_s)


def _real_pauli_components(o: np.ndarray, tol: float = 1e-12) -> bool:
    scale = max(_maxnorm(o), 1e-300)
    for p in (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z):
        b = partial_trace_system(np.kron(p, np.eye(o.shape[0] // 2)) @ o, 2) / 2
        if np.abs(b.imag).max() > tol * scale:
            return False
    return True


def traceless_part(o, dim_s: int) -> np.ndarray:
    """Component of ``o`` whose partial trace over the system vanishes."""
    return bath_traceless_split(o, dim_s, check=False).traceless_part


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Gaussian Hermitian matrix normalized to spectral norm ``scale``."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (g + g.conj().T) / 2
    n = spectral_norm(h, hermitian=True)
    return h * (scale / n) if n > 0 else h


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    return q * (d / np.abs(d))
