"""System-bath noise Hamiltonians and their norm parameters."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import ConfigError, DimensionError
from .operators import (
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    as_operator,
    bath_traceless_split,
    is_hermitian,
    partial_trace_bath,
    random_hermitian,
    spectral_norm,
)

__all__ = [
    "NoiseModel",
    "model_from_hamiltonian",
    "build_heisenberg_spin_bath",
    "build_custom",
    "random_model",
    "unprotected_noise_strength",
]


@dataclass(frozen=True)
class NoiseModel:
    """``H = h_bath + h_err`` on ``C^dim_s (x) C^dim_b``.

    ``h_bath = I (x) B0`` and ``h_err`` has vanishing partial trace over the
    system. ``beta``, ``j_strength`` and ``epsilon = beta + j_strength`` are
    the spectral norms used by every bound.
    """

    dim_s: int
    dim_b: int
    h_bath: np.ndarray
    h_err: np.ndarray
    beta: float
    j_strength: float
    epsilon: float
    absorbed_trace: float = 0.0
    label: str = field(default="", compare=False)

    @property
    def dim(self) -> int:
        return self.dim_s * self.dim_b

    @property
    def hamiltonian(self) -> np.ndarray:
        return self.h_bath + self.h_err

    @property
    def h_system(self) -> np.ndarray:
        """System-only part ``H_S^0 (x) I`` of ``h_err``."""
        hs = partial_trace_bath(self.h_err, self.dim_s) / self.dim_b
        return np.kron(hs, np.eye(self.dim_b))

    @property
    def h_coupling(self) -> np.ndarray:
        """Genuine system-bath coupling ``H_SB = h_err - H_S^0``."""
        return self.h_err - self.h_system

    def lift_system(self, op) -> np.ndarray:
        """Embed a system operator as ``op (x) I_B``."""
        return np.kron(np.asarray(op, dtype=complex), np.eye(self.dim_b))


def model_from_hamiltonian(h, dim_s: int, label: str = "") -> NoiseModel:
    """Split a Hermitian joint Hamiltonian into a :class:`NoiseModel`."""
    h = as_operator(h, "hamiltonian")
    if not is_hermitian(h, 1e-10):
        raise ConfigError("noise Hamiltonian is not Hermitian")
    h = (h + h.conj().T) / 2
    split = bath_traceless_split(h, dim_s, check=False)
    hb = (split.bath_part + split.bath_part.conj().T) / 2
    he = (split.traceless_part + split.traceless_part.conj().T) / 2
    beta = spectral_norm(hb, hermitian=True)
    j = spectral_norm(he, hermitian=True)
    return NoiseModel(
        dim_s=dim_s,
        dim_b=h.shape[0] // dim_s,
        h_bath=hb,
        h_err=he,
        beta=beta,
        j_strength=j,
        epsilon=beta + j,
        label=label,
    )


def _site_op(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    mats = [PAULI_I] * n_sites
    mats[site] = op
    return reduce(np.kron, mats)


def build_heisenberg_spin_bath(n_spins: int, beta: float, j: float) -> NoiseModel:
    """One system qubit coupled isotropically to ``n_spins`` bath spins.

    ``H_B = (beta/2) sum_i Z_i`` and ``H_SB = (j/4) sum_a S^a (x) sum_i s^a_i``;
    there is no system-only term.
    """
    if not 1 <= int(n_spins) <= 6:
        raise ConfigError(f"n_spins must be in [1, 6], got {n_spins}")
    n = int(n_spins)
    hb = 0.5 * beta * sum(_site_op(PAULI_Z, i, n) for i in range(n))
    h = np.kron(PAULI_I, hb)
    for p in (PAULI_X, PAULI_Y, PAULI_Z):
        bath = sum(_site_op(p, i, n) for i in range(n))
        h = h + 0.25 * j * np.kron(p, bath)
    return model_from_hamiltonian(h, 2, label=f"heisenberg-{n}")


def build_custom(dim_s: int, dim_b: int, terms) -> NoiseModel:
    """Model from ``sum_k S_k (x) B_k``.

    System factors need not be traceless: their trace is moved into the
    bath operator and the moved amount is reported in ``absorbed_trace``.
    """
    h = np.zeros((dim_s * dim_b, dim_s * dim_b), dtype=complex)
    absorbed = 0.0
    for s_op, b_op in terms:
        s_op = np.asarray(s_op, dtype=complex)
        b_op = np.asarray(b_op, dtype=complex)
        if s_op.shape != (dim_s, dim_s) or b_op.shape != (dim_b, dim_b):
            raise DimensionError("term dimensions do not match (dim_s, dim_b)")
        tr = np.trace(s_op) / dim_s
        if abs(tr) > 1e-15:
            absorbed += float(abs(tr) * spectral_norm(b_op))
        h = h + np.kron(s_op, b_op)
    model = model_from_hamiltonian(h, dim_s)
    return NoiseModel(**{**model.__dict__, "absorbed_trace": absorbed})


def random_model(
    rng: np.random.Generator,
    dim_s: int,
    dim_b: int,
    beta: float,
    j: float,
    system_term: bool = True,
) -> NoiseModel:
    """Gaussian random model rescaled to exact norms ``beta`` and ``j``.

    With ``system_term=False`` the error part has no system-only component.
    """
    b0 = random_hermitian(dim_b, rng, 1.0) if dim_b > 1 else np.ones((1, 1), complex)
    hb = np.kron(np.eye(dim_s), b0)
    g = random_hermitian(dim_s * dim_b, rng, 1.0)
    he = bath_traceless_split(g, dim_s, check=False).traceless_part
    if not system_term:
        hs = partial_trace_bath(he, dim_s) / dim_b
        he = he - np.kron(hs, np.eye(dim_b))
    he = (he + he.conj().T) / 2
    nb = spectral_norm(hb, hermitian=True)
    ne = spectral_norm(he, hermitian=True)
    hb = hb * (beta / nb) if nb > 0 else hb * 0
    he = he * (j / ne) if ne > 0 else he * 0
    return model_from_hamiltonian(hb + he, dim_s, label="random")


def unprotected_noise_strength(model: NoiseModel, tau0: float) -> float:
    """Noise strength ``||H_SB|| tau0`` of a bare gate of duration ``tau0``."""
    if tau0 <= 0:
        raise ConfigError("tau0 must be positive")
    return spectral_norm(model.h_coupling, hermitian=True) * tau0
