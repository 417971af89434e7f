"""Command-line interface: ``ddbound <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 validity-regime error,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import CASES, coefficients_json, eta_dd_bound, fn_coefficients, fnj_table, g_constants, table_one_coeffs
from .concatenation import REGIMES, cdd_iterate, optimal_level
from .errors import ConfigError, DDBoundError, DimensionError, NotScalableError, NumericInputError, ValidityError
from .filters import AXES, cdd_filter_value, filter_fourier, switching_functions
from .noise import build_heisenberg_spin_bath
from .schedule import SEQUENCE_KINDS, schedule_from_dict
from .simulate import ExperimentConfig, dump_json, run_experiment, simulate, write_csv
from .thresholds import SEQUENCE_BOUND_SETUP, edd_dominance_width, edd_no_dd_threshold, suppression_threshold

EXIT_OK, EXIT_CONFIG, EXIT_VALIDITY, EXIT_NUMERIC = 0, 2, 3, 4


def _emit(args, name: str, rows: list[dict] | None = None, doc: dict | None = None) -> None:
    """Write tabular ``rows`` or a JSON ``doc`` to ``--out`` or stdout."""
    if rows is not None and args.format == "csv":
        text, ext = write_csv(rows), "csv"
    else:
        text, ext = dump_json(doc if doc is not None else rows), "json"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.{ext}").write_bytes(text.encode())
    else:
        sys.stdout.write(text)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", "") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}", "") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object", "")
    return data


def cmd_bounds(args) -> None:
    rep = eta_dd_bound(args.J, args.epsilon, args.t0, args.case, args.delta, args.n_pulses,
                       not args.irregular, args.symmetry_break)
    rows = [{"order": n + 1, "coefficient": c, "term": t} for n, (c, t) in enumerate(zip(rep.coeffs, rep.per_order))]
    _emit(args, "bounds", rows, rep.to_dict())


def cmd_threshold(args) -> None:
    rows = []
    kinds = [args.kind] if args.kind else list(SEQUENCE_BOUND_SETUP)
    for kind in kinds:
        r = suppression_threshold(kind, args.delta_ratio)
        rows.append({"kind": kind, "bound_case": r.bound_case, "delta_ratio": args.delta_ratio,
                     "crossing_eps_tau0": r.crossing_eps_tau0, "crossing_delta_ratio": r.crossing_delta_ratio})
    doc = {"thresholds": rows}
    if not args.kind:
        doc["edd_no_dd_eps_tau0"] = edd_no_dd_threshold()
        doc["edd_dominance_delta_ratio"] = edd_dominance_width()
    _emit(args, "threshold", rows, doc)


def cmd_sweep(args) -> None:
    data = _load_config(args.config)
    if not data:
        raise ConfigError("sweep needs --config", "")
    if args.seed is not None:
        data["seed"] = args.seed
    cfg = ExperimentConfig.from_dict(data)
    res = run_experiment(cfg, args.out, args.format)
    if not res["files"]:
        sys.stdout.write(write_csv(res["rows"]) if args.format == "csv" else dump_json(res["rows"]))
    sys.stderr.write(dump_json(res["summary"]))


def cmd_cdd(args) -> None:
    doc = optimal_level(args.cbar_eps_tau0, args.R, args.regime)
    doc.update({"R": args.R, "regime": args.regime, "cbar_eps_tau0": args.cbar_eps_tau0})
    rows = None
    if args.J0 is not None:
        trace = cdd_iterate(args.J0, args.beta0, args.R, args.tau0, args.k_max, args.regime, args.qubit)
        rows = [{"k": lv.k, "J_k": lv.J_k, "beta_k": lv.beta_k, "eps_k": lv.eps_k, "eta_k": lv.eta_k,
                 "T_k": lv.T_k} for lv in trace.levels]
        doc["levels"] = rows
        doc["truncated"] = trace.truncated
        doc["plateau_level"] = trace.plateau_level
    if rows is None:
        rows = [{k: v for k, v in doc.items() if not isinstance(v, (list, dict))}]
    _emit(args, "cdd", rows, doc)


def cmd_filter(args) -> None:
    rows = []
    if args.level == 1:
        sw = switching_functions(schedule_from_dict({"kind": args.sequence, "tau0": args.tau0}))
    for w in args.omega_tau0:
        omega = w / args.tau0
        f = filter_fourier(sw, omega) if args.level == 1 else cdd_filter_value(args.sequence, args.level, omega, args.tau0)
        row = {"omega_tau0": w}
        for ax in AXES:
            row[f"{ax}_re"], row[f"{ax}_im"] = f[ax].real, f[ax].imag
        rows.append(row)
    _emit(args, "filter", rows)


def cmd_sim(args) -> None:
    data = _load_config(args.config)
    if data:
        data.setdefault("experiment", "custom_sim")
        if args.seed is not None:
            data["seed"] = args.seed
        res = run_experiment(ExperimentConfig.from_dict(data), args.out, args.format)
        if not res["files"]:
            sys.stdout.write(write_csv(res["rows"]) if args.format == "csv" else dump_json(res["rows"]))
        return
    seq = schedule_from_dict({"kind": args.kind, "tau0": args.tau0, "delta": args.delta,
                              "level": args.level, "gate": args.gate or False})
    model = build_heisenberg_spin_bath(args.n_spins, args.beta, args.J)
    r = simulate(seq, model)
    row = {"eta_exact": r.eta_exact, "eta_bound": r.eta_bound, "bound_valid": r.bound_valid}
    for n, (v, b) in enumerate(zip(r.per_order_norms, r.per_order_bounds), start=1):
        row[f"omega{n}_norm"], row[f"omega{n}_bound"] = v, b
    _emit(args, "sim", [row], {**row, "metadata": r.metadata})


def cmd_tables(args) -> None:
    eps_t = args.eps_t
    coeffs = {case: table_one_coeffs(case, 0, 0.0, 1.0, True, 0.0, eps_t) for case in CASES}
    fn = fn_coefficients(args.n_max)
    doc = json.loads(coefficients_json(eps_t=eps_t))
    doc.update({
        "eps_T": eps_t,
        "f_n": [{"n": n + 1, "exact": str(f), "value": float(f)} for n, f in enumerate(fn)],
        "f_nj": {f"{n},{j}": str(v) for (n, j), v in sorted(fnj_table(args.n_max).items())},
    })
    # one row per quantity; C1 is omitted because it depends on the pulse layout
    rows = [{"name": f"{case}.C{n + 1}", "exact": "", "value": c}
            for case, cs in coeffs.items() for n, c in enumerate(cs) if n > 0]
    rows += [{"name": f"f_{n}", "exact": str(f), "value": float(f)} for n, f in enumerate(fn, start=1)]
    rows += [{"name": k, "exact": "", "value": v} for k, v in g_constants().items()]
    _emit(args, "tables", rows, doc)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--out", help="output directory (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=_u64, default=None)

    p = argparse.ArgumentParser(prog="ddbound", description="Effective-noise bounds for dynamical decoupling.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="{bounds,threshold,sweep,cdd,filter,sim,tables}")

    b = sub.add_parser("bounds", parents=[common], help="bound on the effective noise strength")
    b.add_argument("--J", type=float, required=True)
    b.add_argument("--epsilon", type=float, required=True)
    b.add_argument("--t0", type=float, required=True)
    b.add_argument("--case", choices=CASES, default="general")
    b.add_argument("--delta", type=float, default=0.0)
    b.add_argument("--n-pulses", type=int, default=0)
    b.add_argument("--symmetry-break", type=float, default=0.0)
    b.add_argument("--irregular", action="store_true", help="pulses not regularly spaced")
    b.set_defaults(func=cmd_bounds)

    t = sub.add_parser("threshold", parents=[common], help="noise-suppression thresholds")
    t.add_argument("--kind", choices=tuple(SEQUENCE_BOUND_SETUP))
    t.add_argument("--delta-ratio", type=float, default=0.0)
    t.set_defaults(func=cmd_threshold)

    s = sub.add_parser("sweep", parents=[common], help="run an experiment from --config")
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("cdd", parents=[common], help="concatenated DD levels")
    c.add_argument("--R", type=int, default=4)
    c.add_argument("--cbar-eps-tau0", type=float, required=True)
    c.add_argument("--regime", choices=REGIMES + ("general", "time_symmetric"), default="magnus_general")
    c.add_argument("--J0", type=float)
    c.add_argument("--beta0", type=float, default=0.0)
    c.add_argument("--tau0", type=float, default=1.0)
    c.add_argument("--k-max", type=int, default=4)
    c.add_argument("--qubit", action="store_true")
    c.set_defaults(func=cmd_cdd)

    f = sub.add_parser("filter", parents=[common], help="filter functions")
    f.add_argument("--sequence", choices=SEQUENCE_KINDS, default="universal")
    f.add_argument("--level", type=int, default=1)
    f.add_argument("--tau0", type=float, default=1.0)
    f.add_argument("--omega-tau0", type=float, nargs="+", default=[1e-3, 1e-2, 1e-1, 1.0])
    f.set_defaults(func=cmd_filter)

    m = sub.add_parser("sim", parents=[common], help="exact simulation against the bound")
    m.add_argument("--kind", choices=SEQUENCE_KINDS, default="universal")
    m.add_argument("--tau0", type=float, default=1.0)
    m.add_argument("--delta", type=float, default=0.0)
    m.add_argument("--level", type=int, default=1)
    m.add_argument("--gate", help="Pauli letter of the protected gate")
    m.add_argument("--n-spins", type=int, default=1)
    m.add_argument("--beta", type=float, default=0.01)
    m.add_argument("--J", type=float, default=0.01)
    m.set_defaults(func=cmd_sim)

    tb = sub.add_parser("tables", parents=[common], help="bound coefficients and constants")
    tb.add_argument("--eps-t", type=float, default=0.54)
    tb.add_argument("--n-max", type=int, default=8)
    tb.set_defaults(func=cmd_tables)
    return p


def _u64(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("seed must be an integer") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)  # exits 2 with usage on bad input
    try:
        with np.errstate(all="ignore"):
            args.func(args)
    except (ConfigError, NumericInputError, DimensionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValidityError, NotScalableError) as exc:
        print(f"validity error: {exc}", file=sys.stderr)
        return EXIT_VALIDITY
    except DDBoundError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
