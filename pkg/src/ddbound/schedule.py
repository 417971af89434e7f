"""Pulse sequences, concatenation and the toggling-frame Hamiltonian.

A schedule is a list of rectangular pulses laid out on ``[0, t_total]``;
the gaps between pulses are free evolution. Every pulse carries its ideal
unitary and, when its width is nonzero, a constant generator ``H_P`` with
``exp(-i width H_P) = unitary``. Pulses act on the system only.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, ValidityError
from .noise import NoiseModel
from .operators import PAULIS, evolve, matrix_log_principal, spectral_norm

__all__ = [
    "SEQUENCE_KINDS",
    "Pulse",
    "PulseSchedule",
    "TogglingSegment",
    "build_sequence",
    "append_gate",
    "concatenate_schedule",
    "control_unitary",
    "free_intervals",
    "toggling_segments",
    "toggling_integral",
    "pulse_interior_integral",
    "lab_propagator",
    "toggling_propagator",
    "measure_symmetry_break",
    "schedule_to_dict",
    "schedule_from_dict",
]

SEQUENCE_KINDS = ("universal", "time_symmetric", "eulerian", "eulerian_time_symmetric", "xixi")
TIME_SYMMETRIC_KINDS = ("time_symmetric", "eulerian_time_symmetric")
DEFAULT_LEVEL_CAP = 4


@dataclass(frozen=True)
class Pulse:
    start: float
    width: float
    unitary: np.ndarray
    generator: np.ndarray | None
    label: str

    @property
    def end(self) -> float:
        return self.start + self.width


@dataclass(frozen=True)
class PulseSchedule:
    """Timed pulses plus the bookkeeping used by the bounds.

    ``symmetry_break`` is the measure of the region where time symmetry is
    violated and ``gamma_prefix`` the length of the ``-H_B`` prefix used when
    analysing nearly time-symmetric gates.
    """

    pulses: tuple[Pulse, ...]
    tau0: float
    t_total: float
    delta: float
    kind: str = "custom"
    level: int = 1
    symmetry_break: float = 0.0
    gamma_prefix: float = 0.0
    has_gate: bool = False
    time_symmetric: bool = False

    @property
    def n_pulses(self) -> int:
        return len(self.pulses)

    @property
    def dim_s(self) -> int:
        return self.pulses[0].unitary.shape[0] if self.pulses else 2

    @property
    def t_span(self) -> float:
        """Length of the interval analysed by the bounds, ``t_total + Gamma``."""
        return self.t_total + self.gamma_prefix

    @property
    def n_intervals(self) -> int:
        """Number of unit free intervals (``R`` for concatenation)."""
        return sum(int(round(b - a)) for a, b in _unit_gaps(self))

    def total_unitary(self) -> np.ndarray:
        u = np.eye(self.dim_s, dtype=complex)
        for p in self.pulses:
            u = p.unitary @ u
        return u


@dataclass(frozen=True)
class TogglingSegment:
    t_start: float
    t_end: float
    hamiltonian: np.ndarray

    @property
    def length(self) -> float:
        return self.t_end - self.t_start


def _pauli_pulse(letter: str, delta: float, sign: int = 1) -> tuple[np.ndarray, np.ndarray | None, str]:
    """Rotation by pi about a Pauli axis; ``sign=-1`` reverses the generator."""
    if letter == "I":
        u = np.eye(2, dtype=complex)
        gen = np.zeros((2, 2), dtype=complex) if delta > 0 else None
        return u, gen, "I"
    sigma = PAULIS[letter]
    u = -1j * sign * sigma
    gen = sign * (np.pi / (2 * delta)) * sigma if delta > 0 else None
    suffix = "" if sign > 0 else "-"
    return u, gen, letter + suffix


def _layout(tokens: list[str], tau0: float, delta: float) -> tuple[tuple[Pulse, ...], float]:
    """Place tokens on the time axis.

    ``F`` is a free period of ``tau0 - delta``; ``X+``/``Z-``/``I`` are pulses
    of width ``delta`` with the given generator sign.
    """
    t = 0.0
    pulses = []
    for tok in tokens:
        if tok == "F":
            t += tau0 - delta
            continue
        sign = -1 if tok.endswith("-") else 1
        u, gen, label = _pauli_pulse(tok[0], delta, sign)
        pulses.append(Pulse(start=t, width=delta, unitary=u, generator=gen, label=label))
        t += delta
    return tuple(pulses), t


_EULER = ["X", "Z", "X", "Z", "Z", "X", "Z", "X"]


def _tokens(kind: str) -> list[str]:
    if kind == "universal":
        return ["F", "X", "F", "Z", "F", "X", "F", "Z"]
    if kind == "xixi":
        return ["F", "X", "F", "X"]
    if kind == "time_symmetric":
        first = ["F", "X+", "F", "Z+", "F", "X+", "F"]
        second = ["F", "X-", "F", "Z-", "F", "X-", "F"]
        return first + ["I"] + second
    if kind == "eulerian":
        out = []
        for letter in _EULER:
            out += ["F", letter]
        return out
    if kind == "eulerian_time_symmetric":
        backward = []
        for letter in reversed(_EULER):
            backward += [letter + "+", "F"]
        forward = []
        for letter in _EULER:
            forward += ["F", letter + "-"]
        return backward + forward
    raise ConfigError(f"unknown sequence kind {kind!r}")


def build_sequence(kind: str, tau0: float, delta: float = 0.0) -> PulseSchedule:
    """Named memory sequence with pulse interval ``tau0`` and pulse width ``delta``.

    Each interval of length ``tau0`` is a free period followed by a pulse.
    The time-symmetric sequence places an identity pulse of width ``delta``
    at its midpoint and reverses the generators in its second half, so its
    duration is ``8 tau0 - delta``.
    """
    if tau0 <= 0:
        raise ConfigError("tau0 must be positive")
    if not 0 <= delta < tau0:
        raise ConfigError(f"pulse width must satisfy 0 <= delta < tau0, got {delta}")
    pulses, t_total = _layout(_tokens(kind), tau0, delta)
    return PulseSchedule(
        pulses=pulses,
        tau0=tau0,
        t_total=t_total,
        delta=delta,
        kind=kind,
        time_symmetric=kind in TIME_SYMMETRIC_KINDS,
    )


def _is_cyclic(seq: PulseSchedule, tol: float = 1e-10) -> bool:
    u = seq.total_unitary()
    phase = u[0, 0]
    if abs(abs(phase) - 1) > tol:
        return False
    return bool(np.max(np.abs(u - phase * np.eye(u.shape[0]))) <= tol)


def _generator_for(u: np.ndarray, width: float) -> np.ndarray | None:
    if width <= 0:
        return None
    log = matrix_log_principal(u, allow_branch=True)
    gen = 1j * log / width
    return (gen + gen.conj().T) / 2


def append_gate(seq: PulseSchedule, gate) -> PulseSchedule:
    """Attach the gate ``G`` to a cyclic memory sequence.

    A sequence that ends with a pulse ``P`` has that pulse replaced by one
    implementing ``G P``. Otherwise a gate pulse of width ``delta`` is
    appended; for time-symmetric parents the ``-H_B`` prefix of length
    ``delta`` is recorded and the symmetry-break measure set to ``2 delta``.
    """
    if seq.has_gate:
        raise ConfigError("schedule already carries a gate")
    if not _is_cyclic(seq):
        raise ConfigError("gate can only be appended to a cyclic memory sequence")
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (seq.dim_s, seq.dim_s):
        raise ConfigError("gate dimension does not match the system")
    pulses = list(seq.pulses)
    last = pulses[-1] if pulses else None
    if last is not None and abs(last.end - seq.t_total) < 1e-12 * max(seq.t_total, 1.0):
        u = gate @ last.unitary
        pulses[-1] = Pulse(last.start, last.width, u, _generator_for(u, last.width), "G" + last.label)
        return replace(seq, pulses=tuple(pulses), has_gate=True, time_symmetric=False)
    pulses.append(Pulse(seq.t_total, seq.delta, gate, _generator_for(gate, seq.delta), "G"))
    out = replace(seq, pulses=tuple(pulses), t_total=seq.t_total + seq.delta, has_gate=True)
    if seq.time_symmetric:
        out = replace(out, gamma_prefix=seq.delta, symmetry_break=2 * seq.delta)
    else:
        out = replace(out, time_symmetric=False)
    return out


def _unit_gaps(seq: PulseSchedule) -> list[tuple[float, float]]:
    """Free gaps measured in units of ``tau0 - delta``."""
    unit = seq.tau0 - seq.delta
    return [(a / unit, b / unit) for a, b in free_intervals(seq)]


def free_intervals(seq: PulseSchedule) -> list[tuple[float, float]]:
    """Maximal gaps of positive length between pulses."""
    out = []
    t = 0.0
    for p in seq.pulses:
        if p.start - t > 1e-12 * seq.tau0:
            out.append((t, p.start))
        t = max(t, p.end)
    if seq.t_total - t > 1e-12 * seq.tau0:
        out.append((t, seq.t_total))
    return out


def concatenate_schedule(base: PulseSchedule, level: int, level_cap: int = DEFAULT_LEVEL_CAP) -> PulseSchedule:
    """Replace every free interval of ``base`` by the level ``level-1`` sequence.

    Requires zero-width pulses beyond level 1. The duration of level ``k`` is
    ``R**k tau0`` where ``R`` is the number of intervals in ``base``.
    """
    if level < 1:
        raise ConfigError("concatenation level must be >= 1")
    if level > level_cap:
        raise ValidityError(f"level {level} exceeds the cap {level_cap}")
    if level == 1:
        return base
    if base.delta != 0:
        raise ConfigError("concatenation beyond level 1 requires zero-width pulses")
    if base.has_gate or not _is_cyclic(base):
        raise ConfigError("concatenation needs a cyclic memory sequence")
    inner = concatenate_schedule(base, level - 1, level_cap)
    d_inner = inner.t_total
    pulses: list[Pulse] = []
    t_new = 0.0
    t_old = 0.0

    def fill(n_units: int) -> None:
        nonlocal t_new
        for _ in range(n_units):
            for p in inner.pulses:
                pulses.append(replace(p, start=t_new + p.start))
            t_new += d_inner

    for p in base.pulses:
        gap = p.start - t_old
        fill(int(round(gap / base.tau0)))
        pulses.append(replace(p, start=t_new))
        t_old = p.end
    fill(int(round((base.t_total - t_old) / base.tau0)))
    return replace(base, pulses=tuple(pulses), t_total=t_new, level=level)


def control_unitary(seq: PulseSchedule, t: float) -> np.ndarray:
    """Ideal control unitary ``U_c(t)`` acting on the system.

    A zero-width pulse at time ``t`` counts as already applied.
    """
    u = np.eye(seq.dim_s, dtype=complex)
    for p in seq.pulses:
        if p.end <= t:
            u = p.unitary @ u
        elif p.start < t and p.generator is not None:
            u = evolve(p.generator, t - p.start) @ u
            break
        else:
            break
    return u


def _conj(h: np.ndarray, u: np.ndarray) -> np.ndarray:
    return u.conj().T @ h @ u


def toggling_segments(
    seq: PulseSchedule,
    model: NoiseModel,
    pulse_subdivisions: int = 8,
    include_prefix: bool = True,
) -> list[TogglingSegment]:
    """Piecewise-constant toggling-frame Hamiltonian ``U_c^H H U_c``.

    Free gaps give one segment each. A finite-width pulse is split into
    ``pulse_subdivisions`` pieces sampled at their midpoints. When the schedule
    carries a ``-H_B`` prefix and ``include_prefix`` is set, a segment of that
    length is placed first and all times shift by ``gamma_prefix``.
    """
    if pulse_subdivisions < 1:
        raise ConfigError("pulse_subdivisions must be >= 1")
    h = model.hamiltonian
    segs: list[TogglingSegment] = []
    t0 = 0.0
    if include_prefix and seq.gamma_prefix > 0:
        segs.append(TogglingSegment(0.0, seq.gamma_prefix, -model.h_bath))
        t0 = seq.gamma_prefix
    u = np.eye(model.dim, dtype=complex)
    t = 0.0
    for p in seq.pulses:
        if p.start > t:
            segs.append(TogglingSegment(t0 + t, t0 + p.start, _conj(h, u)))
        if p.width > 0:
            gen = model.lift_system(p.generator)
            w, v = np.linalg.eigh(gen)
            step = p.width / pulse_subdivisions
            for m in range(pulse_subdivisions):
                d = (m + 0.5) * step
                um = (v * np.exp(-1j * w * d)) @ v.conj().T
                segs.append(
                    TogglingSegment(t0 + p.start + m * step, t0 + p.start + (m + 1) * step, _conj(h, um @ u))
                )
        u = model.lift_system(p.unitary) @ u
        t = p.end
    if seq.t_total > t:
        segs.append(TogglingSegment(t0 + t, t0 + seq.t_total, _conj(h, u)))
    return segs


def pulse_interior_integral(h: np.ndarray, gen: np.ndarray, width: float) -> np.ndarray:
    """Exact ``int_0^width exp(i s G) h exp(-i s G) ds``."""
    w, v = np.linalg.eigh(gen)
    hp = v.conj().T @ h @ v
    theta = width * (w[:, None] - w[None, :])
    # int_0^width exp(i s d) ds = width * exp(i theta/2) * sinc(theta/2)
    kern = width * np.exp(0.5j * theta) * np.sinc(theta / (2 * np.pi))
    return v @ (hp * kern) @ v.conj().T


def toggling_integral(seq: PulseSchedule, model: NoiseModel, include_prefix: bool = True) -> np.ndarray:
    """Exact ``int H_M(t) dt`` over the schedule, pulse interiors included."""
    h = model.hamiltonian
    acc = np.zeros_like(h)
    if include_prefix and seq.gamma_prefix > 0:
        acc = acc - seq.gamma_prefix * model.h_bath
    u = np.eye(model.dim, dtype=complex)
    t = 0.0
    for p in seq.pulses:
        if p.start > t:
            acc = acc + (p.start - t) * _conj(h, u)
        if p.width > 0:
            inner = pulse_interior_integral(h, model.lift_system(p.generator), p.width)
            acc = acc + _conj(inner, u)
        u = model.lift_system(p.unitary) @ u
        t = p.end
    if seq.t_total > t:
        acc = acc + (seq.t_total - t) * _conj(h, u)
    return acc


def lab_propagator(seq: PulseSchedule, model: NoiseModel) -> np.ndarray:
    """Exact lab-frame evolution with the noise on during pulses."""
    h = model.hamiltonian
    u = np.eye(model.dim, dtype=complex)
    t = 0.0
    for p in seq.pulses:
        if p.start > t:
            u = evolve(h, p.start - t) @ u
        if p.width > 0:
            u = evolve(h + model.lift_system(p.generator), p.width) @ u
        else:
            u = model.lift_system(p.unitary) @ u
        t = p.end
    if seq.t_total > t:
        u = evolve(h, seq.t_total - t) @ u
    return u


def toggling_propagator(seq: PulseSchedule, model: NoiseModel, include_prefix: bool = False) -> np.ndarray:
    """Exact ``U_c(t_total)^H U(t_total)``, optionally times ``exp(+i Gamma H_B)``."""
    u = model.lift_system(seq.total_unitary()).conj().T @ lab_propagator(seq, model)
    if include_prefix and seq.gamma_prefix > 0:
        u = u @ evolve(-model.h_bath, seq.gamma_prefix)
    return u


def measure_symmetry_break(segments: list[TogglingSegment], scale: float, rtol: float = 1e-10) -> float:
    """Measure of ``{t : ||H(T - t) - H(t)|| > rtol * scale}`` on the partition."""
    t_end = segments[-1].t_end
    starts = [s.t_start for s in segments]
    cuts = sorted({s.t_start for s in segments} | {t_end - s.t_start for s in segments} | {0.0, t_end})
    cuts = [c for c in cuts if 0.0 <= c <= t_end]
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a <= 1e-14 * t_end:
            continue
        mid = 0.5 * (a + b)
        i = max(bisect.bisect_right(starts, mid) - 1, 0)
        j = max(bisect.bisect_right(starts, t_end - mid) - 1, 0)
        diff = segments[i].hamiltonian - segments[j].hamiltonian
        if spectral_norm(diff) > rtol * scale:
            total += b - a
    return total


def schedule_to_dict(seq: PulseSchedule) -> dict:
    """JSON-friendly description of a named schedule."""
    return {
        "kind": seq.kind,
        "tau0": seq.tau0,
        "delta": seq.delta,
        "level": seq.level,
        "gate": seq.has_gate,
    }


def schedule_from_dict(spec: dict, pointer: str = "/schedule") -> PulseSchedule:
    """Build a schedule from ``{kind, tau0, delta, level, gate}``.

    ``gate`` may be ``false``/absent, ``true`` (identity gate), a Pauli letter,
    or a nested list ``[[re, im], ...]`` rows for a general unitary.
    """
    try:
        kind = spec["kind"]
        tau0 = float(spec.get("tau0", 1.0))
        delta = float(spec.get("delta", 0.0))
        level = int(spec.get("level", 1))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad schedule spec: {exc}", pointer) from exc
    seq = build_sequence(kind, tau0, delta)
    if level > 1:
        seq = concatenate_schedule(seq, level)
    gate = spec.get("gate", False)
    if gate is False or gate is None:
        return seq
    if gate is True:
        g = np.eye(seq.dim_s, dtype=complex)
    elif isinstance(gate, str) and gate in PAULIS:
        g = PAULIS[gate]
    else:
        try:
            arr = np.asarray(gate, dtype=float)
            g = arr[..., 0] + 1j * arr[..., 1]
        except (TypeError, ValueError, IndexError) as exc:
            raise ConfigError("gate must be a Pauli letter or complex matrix", pointer + "/gate") from exc
    return append_gate(seq, g)
