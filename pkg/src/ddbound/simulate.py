"""Exact desk-scale simulation of DD-protected gates and the figure experiments."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .bounds import EPS_T_MAX, eta_dd_bound
from .concatenation import CBAR_DEFAULTS, optimal_level
from .errors import ConfigError, NotScalableError, ValidityError
from .filters import AXES, cdd_filter_value, filter_fourier, switching_functions
from .magnus import magnus_recursion, omega1_prime, omega_low_order
from .noise import NoiseModel, build_custom, build_heisenberg_spin_bath, random_model
from .operators import evolve, spectral_norm
from .schedule import (
    PulseSchedule,
    build_sequence,
    schedule_from_dict,
    toggling_propagator,
    toggling_segments,
)
from .thresholds import DEFAULT_OVERHEAD_EXPONENT, edd_region, noise_ratio, overhead_ratio, suppression_threshold

__all__ = [
    "EXPERIMENTS",
    "SimResult",
    "ExperimentConfig",
    "eta_exact",
    "bound_case_for",
    "simulate",
    "omega3_ratio_grid",
    "run_experiment",
    "format_float",
    "write_csv",
]

EXPERIMENTS = ("eta_curves", "overhead", "omega3_ratio", "edd_map", "cdd_optimal", "filter_curves", "custom_sim")


def eta_exact(seq: PulseSchedule, model: NoiseModel) -> float:
    """Distance of the toggling-frame gate from pure-bath evolution.

    ``||U~(t0) - exp(-i t0 H_B)||``. A schedule carrying a ``-H_B`` prefix
    of length ``Gamma`` is compared as ``||U~(t0) U_B^H(Gamma) - U_B(t0 - Gamma)||``.
    """
    u = toggling_propagator(seq, model)
    t0 = seq.t_total
    g = seq.gamma_prefix
    if g > 0:
        return spectral_norm(u @ evolve(model.h_bath, -g) - evolve(model.h_bath, t0 - g))
    return spectral_norm(u - evolve(model.h_bath, t0))


def bound_case_for(seq: PulseSchedule) -> str:
    return "time_symmetric" if (seq.time_symmetric or seq.gamma_prefix > 0) else "general"


@dataclass
class SimResult:
    """Exact noise strength next to the analytic bound.

    ``per_order_norms[0]`` is ``||Omega_1'||``; later entries are
    ``||Omega_n||``. ``eta_bound`` is NaN when the bound is out of regime.
    """

    eta_exact: float
    eta_bound: float
    per_order_norms: list
    per_order_bounds: list
    bound_valid: bool
    metadata: dict = field(default_factory=dict)


def simulate(seq: PulseSchedule, model: NoiseModel, n_max: int = 4, case: str | None = None) -> SimResult:
    case = case or bound_case_for(seq)
    segs = toggling_segments(seq, model)
    rec = magnus_recursion(segs, n_max)
    norms = [spectral_norm(omega1_prime(rec.omegas[0], model.h_bath, seq.t_span, seq.gamma_prefix))]
    norms += [spectral_norm(o) for o in rec.omegas[1:]]
    try:
        rep = eta_dd_bound(
            model.j_strength, model.epsilon, seq.t_total, case,
            delta=seq.delta, n_pulses=seq.n_pulses, symmetry_break=seq.symmetry_break,
        )
        bound, per_order, valid = rep.eta_bound, rep.per_order[: n_max], True
    except ValidityError:
        bound, per_order, valid = math.nan, [math.nan] * n_max, False
    return SimResult(
        eta_exact=eta_exact(seq, model),
        eta_bound=bound,
        per_order_norms=norms,
        per_order_bounds=per_order,
        bound_valid=valid,
        metadata={
            "kind": seq.kind,
            "level": seq.level,
            "tau0": seq.tau0,
            "delta": seq.delta,
            "T": seq.t_span,
            "case": case,
            "beta": model.beta,
            "J": model.j_strength,
            "epsilon": model.epsilon,
            "model": model.label,
        },
    )


def omega3_ratio_grid(beta_tau0: Iterable[float], j_tau0: Iterable[float], n_spins: Iterable[int],
                      tau0: float = 1.0) -> list[dict]:
    """``||Omega_3||`` bound over exact value for the time-symmetric
    sequence on the isotropic Heisenberg spin bath.

    The bound ``(2/9)(JT)(eps T)^2`` uses the operator norms of the model
    and ``T = 8 tau0``.
    """
    seq = build_sequence("time_symmetric", tau0)
    T = seq.t_total
    rows = []
    for n in n_spins:
        for j in j_tau0:
            for b in beta_tau0:
                m = build_heisenberg_spin_bath(int(n), b / tau0, j / tau0)
                exact = spectral_norm(omega_low_order(toggling_segments(seq, m), 3))
                bound = 2 / 9 * (m.j_strength * T) * (m.epsilon * T) ** 2
                rows.append({
                    "n_spins": int(n),
                    "j_tau0": float(j),
                    "beta_tau0": float(b),
                    "omega3_exact": exact,
                    "omega3_bound": bound,
                    "ratio": bound / exact if exact > 0 else math.inf,
                })
    return rows


# -- configuration ---------------------------------------------------------------

def _grid(spec, pointer: str) -> list:
    if isinstance(spec, dict):
        try:
            start, stop, num = float(spec["start"]), float(spec["stop"]), int(spec["num"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"grid needs start, stop, num ({exc})", pointer) from exc
        if num < 1:
            raise ConfigError("grid is empty", pointer)
        scale = spec.get("scale", "linear")
        if scale == "log":
            if start <= 0 or stop <= 0:
                raise ConfigError("log grid needs positive bounds", pointer)
            return list(np.geomspace(start, stop, num))
        if scale != "linear":
            raise ConfigError(f"unknown grid scale {scale!r}", pointer)
        return list(np.linspace(start, stop, num))
    if isinstance(spec, (list, tuple)):
        if not spec:
            raise ConfigError("grid is empty", pointer)
        return list(spec)
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return [spec]
    raise ConfigError("grid must be a list, a number or {start, stop, num}", pointer)


_DEFAULT_GRIDS = {
    "eta_curves": {"eps_tau0": {"start": 1e-4, "stop": 0.1, "num": 200}},
    "overhead": {"eps_tau0": {"start": 1e-4, "stop": 0.03, "num": 100, "scale": "log"}},
    "omega3_ratio": {"beta_tau0": {"start": 0.01, "stop": 0.2, "num": 39},
                     "j_tau0": [0.01, 0.05], "n_spins": [1, 2, 3]},
    "edd_map": {"eps_tau0": {"start": 1e-4, "stop": 0.0675, "num": 60},
                "delta_ratio": {"start": 0.0, "stop": 0.35, "num": 36}},
    "cdd_optimal": {"cbar_eps_tau0": {"start": 1e-6, "stop": 0.2, "num": 120, "scale": "log"}},
    "filter_curves": {"omega_tau0": {"start": 1e-3, "stop": 3.0, "num": 200, "scale": "log"}},
    "custom_sim": {"tau0": [1.0]},
}


@dataclass
class ExperimentConfig:
    experiment: str
    grids: dict
    params: dict = field(default_factory=dict)
    model: dict = field(default_factory=dict)
    schedule: dict = field(default_factory=dict)
    output: str | None = None
    seed: int = 0

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object", "")
        exp = data.get("experiment")
        if exp not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {', '.join(EXPERIMENTS)}", "/experiment")
        raw = data.get("grid", _DEFAULT_GRIDS[exp])
        if not isinstance(raw, dict):
            raise ConfigError("grid must be an object", "/grid")
        merged = {**_DEFAULT_GRIDS[exp], **raw}
        grids = {k: _grid(v, f"/grid/{k}") for k, v in merged.items()}
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer", "/seed")
        for key in ("params", "model", "schedule"):
            if not isinstance(data.get(key, {}), dict):
                raise ConfigError(f"{key} must be an object", f"/{key}")
        return cls(
            experiment=exp,
            grids=grids,
            params=dict(data.get("params", {})),
            model=dict(data.get("model", {})),
            schedule=dict(data.get("schedule", {})),
            output=data.get("output"),
            seed=seed,
        )


# -- output ---------------------------------------------------------------------

def format_float(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def write_csv(rows: list[dict], columns: list[str] | None = None) -> str:
    columns = columns or (list(rows[0]) if rows else [])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([format_float(r.get(c, "")) for c in columns])
    return buf.getvalue()


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(type(o).__name__)


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return format_float(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, default=_json_default) + "\n"


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("DDLAB_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(fn: Callable, items: list) -> list:
    """Ordered map, optionally threaded; results keep grid order."""
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# -- experiments ------------------------------------------------------------------

def _ratio_or_nan(kind, eps, delta):
    try:
        return noise_ratio(kind, eps, delta)
    except ValidityError:
        return math.nan


def _crossing(xs, ys) -> float:
    for (x0, y0), (x1, y1) in zip(zip(xs, ys), zip(xs[1:], ys[1:])):
        if y0 < 1 <= y1:
            return x0 + (1 - y0) * (x1 - x0) / (y1 - y0)
    return math.nan


def _exp_eta_curves(cfg: ExperimentConfig):
    d = float(cfg.params.get("delta_ratio", 0.0))
    xs = [float(x) for x in cfg.grids["eps_tau0"]]

    def row(x):
        return {"eps_tau0": x, "delta_ratio": d,
                "ratio_universal": _ratio_or_nan("universal", x, d),
                "ratio_time_symmetric": _ratio_or_nan("time_symmetric", x, d)}

    rows = _pmap(row, xs)
    summary = {
        "grid_crossing_universal": _crossing(xs, [r["ratio_universal"] for r in rows]),
        "grid_crossing_time_symmetric": _crossing(xs, [r["ratio_time_symmetric"] for r in rows]),
        "threshold_universal": suppression_threshold("universal", d).crossing_eps_tau0,
        "threshold_time_symmetric": suppression_threshold("time_symmetric", d).crossing_eps_tau0,
    }
    return rows, summary


def _exp_overhead(cfg: ExperimentConfig):
    ratio0 = float(cfg.params.get("eta0_over_eta", 2.0))
    a = float(cfg.params.get("a", DEFAULT_OVERHEAD_EXPONENT))
    eta0, eta = 1.0, 1.0 / ratio0

    def one(kind, n, x):
        r = _ratio_or_nan(kind, x, 0.0)
        if math.isnan(r):
            return math.nan
        try:
            return overhead_ratio(n, eta0, eta, eta * r, a)
        except NotScalableError:
            return math.inf

    def row(x):
        return {"eps_tau0": float(x),
                "overhead_universal": one("universal", 4, x),
                "overhead_time_symmetric": one("time_symmetric", 8, x)}

    rows = _pmap(row, cfg.grids["eps_tau0"])
    return rows, {"eta0_over_eta": ratio0, "a": a}


def _exp_omega3_ratio(cfg: ExperimentConfig):
    tau0 = float(cfg.params.get("tau0", 1.0))
    rows = omega3_ratio_grid(cfg.grids["beta_tau0"], cfg.grids["j_tau0"], cfg.grids["n_spins"], tau0)
    worst = min(rows, key=lambda r: r["ratio"])
    return rows, {"min_ratio": worst["ratio"], "argmin": {k: worst[k] for k in ("n_spins", "j_tau0", "beta_tau0")}}


def _exp_edd_map(cfg: ExperimentConfig):
    pts = [(float(x), float(d)) for d in cfg.grids["delta_ratio"] for x in cfg.grids["eps_tau0"]]

    def row(p):
        x, d = p
        try:
            r = edd_region(x, d)
            return {"eps_tau0": x, "delta_ratio": d, "eta_dd": r.eta_dd, "eta_edd": r.eta_edd,
                    "eta_none": r.eta_none, "region": r.region, "on_boundary": r.on_boundary}
        except ValidityError:
            return {"eps_tau0": x, "delta_ratio": d, "eta_dd": math.nan, "eta_edd": math.nan,
                    "eta_none": 1.0, "region": 0, "on_boundary": False}

    return _pmap(row, pts), {}


def _exp_cdd_optimal(cfg: ExperimentConfig):
    R_g = int(cfg.params.get("R_general", 4))
    R_t = int(cfg.params.get("R_time_symmetric", 8))

    def row(c):
        g = optimal_level(float(c), R_g, "magnus_general")
        t = optimal_level(float(c), R_t, "magnus_time_symmetric")
        return {"cbar_eps_tau0": float(c),
                "k_max_general": g["k_max"], "eta_opt_general": g["eta_opt_bound"],
                "eta_kmax_general": g["eta_at_k_max"],
                "k_max_time_symmetric": t["k_max"], "eta_opt_time_symmetric": t["eta_opt_bound"],
                "eta_kmax_time_symmetric": t["eta_at_k_max"]}

    rows = _pmap(row, cfg.grids["cbar_eps_tau0"])
    return rows, {"cbar_defaults": {f"{k[0]}_R{k[1]}": v for k, v in CBAR_DEFAULTS.items()}}


def _exp_filter_curves(cfg: ExperimentConfig):
    kind = cfg.params.get("sequence", "universal")
    level = int(cfg.params.get("level", 1))
    tau0 = float(cfg.params.get("tau0", 1.0))
    if level > 1:
        def values(w):
            return cdd_filter_value(kind, level, w / tau0, tau0)
    else:
        sw = switching_functions(build_sequence(kind, tau0))

        def values(w):
            return filter_fourier(sw, w / tau0)

    def row(w):
        f = values(float(w))
        out = {"omega_tau0": float(w)}
        for ax in AXES:
            out[f"{ax}_re"] = f[ax].real
            out[f"{ax}_im"] = f[ax].imag
        return out

    return _pmap(row, cfg.grids["omega_tau0"]), {"sequence": kind, "level": level, "tau0": tau0}


def _model_from_spec(spec: dict, rng: np.random.Generator, scale: float = 1.0) -> NoiseModel:
    kind = spec.get("type", "heisenberg")
    try:
        if kind == "heisenberg":
            return build_heisenberg_spin_bath(int(spec.get("n_spins", 1)), float(spec.get("beta", 0.01)) * scale,
                                              float(spec.get("J", 0.01)) * scale)
        if kind == "random":
            return random_model(rng, int(spec.get("dim_s", 2)), int(spec.get("dim_b", 2)),
                                float(spec.get("beta", 0.01)) * scale, float(spec.get("J", 0.01)) * scale,
                                bool(spec.get("system_term", True)))
        if kind == "custom":
            terms = [(_matrix(t["system"]), _matrix(t["bath"]) * scale) for t in spec["terms"]]
            return build_custom(int(spec["dim_s"]), int(spec["dim_b"]), terms)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed model: {exc}", "/model") from exc
    raise ConfigError(f"unknown model type {kind!r}", "/model/type")


def _matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    return arr.astype(complex)


def _schedule_from_spec(spec: dict, tau0: float) -> PulseSchedule:
    return schedule_from_dict({"kind": "universal", **spec, "tau0": tau0})


def _exp_custom_sim(cfg: ExperimentConfig):
    n_inst = int(cfg.params.get("n_instances", 1))
    taus = [float(t) for t in cfg.grids["tau0"]]
    pts = [(i * n_inst + r, t) for i, t in enumerate(taus) for r in range(n_inst)]

    def row(p):
        idx, tau0 = p
        rng = np.random.default_rng([cfg.seed, idx])
        model = _model_from_spec(cfg.model, rng)
        seq = _schedule_from_spec(cfg.schedule, tau0)
        res = simulate(seq, model)
        out = {"index": idx, "tau0": tau0, "eps_T": model.epsilon * seq.t_span,
               "eta_exact": res.eta_exact, "eta_bound": res.eta_bound, "bound_valid": res.bound_valid}
        for n, (v, b) in enumerate(zip(res.per_order_norms, res.per_order_bounds), start=1):
            out[f"omega{n}_norm"] = v
            out[f"omega{n}_bound"] = b
        return out

    rows = _pmap(row, pts)
    valid = [r for r in rows if r["bound_valid"]]
    summary = {"n_rows": len(rows), "n_valid": len(valid),
               "violations": sum(r["eta_exact"] > r["eta_bound"] for r in valid)}
    return rows, summary


_RUNNERS = {
    "eta_curves": _exp_eta_curves,
    "overhead": _exp_overhead,
    "omega3_ratio": _exp_omega3_ratio,
    "edd_map": _exp_edd_map,
    "cdd_optimal": _exp_cdd_optimal,
    "filter_curves": _exp_filter_curves,
    "custom_sim": _exp_custom_sim,
}


def run_experiment(cfg: ExperimentConfig | dict, out_dir: str | Path | None = None, fmt: str = "csv") -> dict:
    """Run one experiment; write ``<name>.csv`` (or ``.json``) and
    ``<name>_summary.json`` when an output directory is given.

    Returns ``{"rows", "summary", "files"}``.
    """
    if isinstance(cfg, dict):
        cfg = ExperimentConfig.from_dict(cfg)
    if fmt not in ("csv", "json"):
        raise ConfigError("format must be csv or json", "/format")
    rows, summary = _RUNNERS[cfg.experiment](cfg)
    summary = {"experiment": cfg.experiment, "seed": cfg.seed, "eps_t_cap": EPS_T_MAX, **summary}
    files = []
    out_dir = out_dir or cfg.output
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        data_path = out / f"{cfg.experiment}.{fmt}"
        text = write_csv(rows) if fmt == "csv" else dump_json(rows)
        data_path.write_bytes(text.encode())
        sum_path = out / f"{cfg.experiment}_summary.json"
        sum_path.write_bytes(dump_json(summary).encode())
        files = [str(data_path), str(sum_path)]
    return {"rows": rows, "summary": summary, "files": files}
