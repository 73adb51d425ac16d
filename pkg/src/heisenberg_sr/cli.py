"""Command-line interface: ``heisenberg-sr {simulate,audit,bracket,plotdata,batch}``.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
"""

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .dynamics import (
    IntegrationError,
    conservation_report,
    helix_from_state,
    helix_params,
    helix_state,
    horizontality_residual,
    integrate,
    trajectory_csv,
)
from .group import MetricSpec, MetricSpecError
from .hamiltonians import KINDS, SystemId, hamiltonian
from .hyperspherical import SingularChartPoint
from .integrals import integral_family
from .poisson import audit, bracket

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

DEFAULTS = {
    "system": None,
    "n": None,
    "sigma": None,
    "tau": 1.0,
    "c": None,
    "init": "random",
    "t_end": 10.0,
    "method": "dopri",
    "rtol": 1e-10,
    "atol": 1e-12,
    "step": None,
    "max_step": None,
    "seed": 0,
    "out": None,
    "summary": None,
    "figure": None,
}


class ConfigError(ValueError):
    pass


# -- configuration -------------------------------------------------------------


def _float_list(text):
    try:
        return [float(v) for v in str(text).replace(" ", "").split(",") if v != ""]
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from None


def resolve_config(args, keys):
    """Merge defaults, the optional ``--config`` JSON file and explicit flags (in that order)."""
    cfg = {k: DEFAULTS.get(k) for k in keys}
    path = getattr(args, "config", None)
    if path:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - set(keys)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(data)
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return finish_config(cfg)


def finish_config(cfg):
    if cfg.get("system") is None:
        raise ConfigError("missing --system")
    if cfg["system"] not in KINDS:
        raise ConfigError(f"unknown system {cfg['system']!r}; choose from {', '.join(KINDS)}")
    if cfg.get("n") is None:
        raise ConfigError("missing --n")
    try:
        cfg["n"] = int(cfg["n"])
    except (TypeError, ValueError):
        raise ConfigError(f"--n must be an integer, got {cfg['n']!r}") from None
    if cfg["n"] < 1:
        raise ConfigError("--n must be positive")
    sigma = cfg.get("sigma")
    if sigma is None:
        sigma = [1.0] * cfg["n"]
    elif not isinstance(sigma, list):
        sigma = _float_list(sigma)
    cfg["sigma"] = [float(s) for s in sigma]
    cfg["tau"] = float(cfg["tau"])
    if cfg.get("c") is None and not cfg["system"].endswith("full"):
        cfg["c"] = 1.0
    if cfg.get("c") is not None:
        cfg["c"] = float(cfg["c"])
    seed = cfg.get("seed")
    if seed is not None:
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        cfg["seed"] = seed
    for key in ("t_end", "rtol", "atol", "step", "max_step"):
        if cfg.get(key) is not None:
            cfg[key] = float(cfg[key])
    return cfg


def make_system(cfg):
    try:
        spec = MetricSpec(tuple(cfg["sigma"]), cfg["tau"])
        c = cfg.get("c") if not cfg["system"].endswith("full") else 0.0
        return SystemId(cfg["system"], cfg["n"], spec, c or 0.0)
    except (MetricSpecError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def initial_state(cfg, sys):
    init = str(cfg.get("init") or "random")
    if init == "random":
        rng = np.random.default_rng(cfg.get("seed") or 0)
        return sys.sample(rng, 1)[0], None
    kind, _, body = init.partition(":")
    if kind == "state":
        x0 = np.array(_float_list(body))
        if x0.size != sys.dim:
            raise ConfigError(f"state has {x0.size} components, {sys.kind} with n={sys.n} needs {sys.dim}")
        return x0, None
    if kind == "helix":
        if sys.kind != "ll-full":
            raise ConfigError("helix initial data applies to --system ll-full")
        vals = _float_list(body)
        n = sys.n
        if len(vals) != 4 * n + 1:
            raise ConfigError(f"helix init needs 4n+1 = {4 * n + 1} numbers (a,b,c,d per plane, then c0)")
        coef = np.array(vals[:-1]).reshape(n, 4)
        lam_z = cfg.get("c") or 1.0
        p = helix_params(coef[:, 0], coef[:, 1], coef[:, 2], coef[:, 3], vals[-1], lam_z, sys.spec.sigma)
        return helix_state(p, 0.0), p
    raise ConfigError(f"unknown --init {init!r}; use random, state:v1,... or helix:a,b,c,d,...,c0")


# -- commands ------------------------------------------------------------------


SIM_KEYS = list(DEFAULTS)


def run_simulation(cfg):
    """Run one simulation config; returns ``(summary, csv_text, trajectory, family)``."""
    sys_id = make_system(cfg)
    x0, helix = initial_state(cfg, sys_id)
    if cfg["method"] != "dopri" and cfg.get("step") is None:
        raise ConfigError(f"--method {cfg['method']} needs --step")
    try:
        traj = integrate(
            sys_id,
            x0,
            cfg["t_end"],
            cfg["method"],
            cfg["rtol"],
            cfg["atol"],
            cfg.get("step"),
            max_step=cfg.get("max_step"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    fam = integral_family(sys_id)
    drifts = conservation_report(traj, fam)
    summary = {
        "config": cfg,
        "system": sys_id.label,
        "labels": sys_id.labels,
        "steps": len(traj) - 1,
        "t_final": float(traj.times[-1]),
        "energy_drift": traj.energy_drift(),
        "integral_drifts": drifts,
        "max_integral_drift": max(drifts.values()) if drifts else 0.0,
        "stats": traj.stats,
    }
    if sys_id.kind == "ll-full" and x0[-1] != 0:
        p = helix if helix is not None else helix_from_state(sys_id, x0)
        summary["helix_sup_deviation"] = float(np.max(np.abs(traj.states - helix_state(p, traj.times))))
        grid = np.linspace(0.0, traj.times[-1], 2001)
        summary["horizontality_residual"] = horizontality_residual(p, grid)
    return summary, trajectory_csv(traj, fam), traj, fam


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def cmd_simulate(args):
    cfg = resolve_config(args, SIM_KEYS)
    summary, text, traj, fam = run_simulation(cfg)
    if cfg.get("out"):
        _write(cfg["out"], text)
    if cfg.get("figure"):
        from .plotting import trajectory_figure

        trajectory_figure(traj, cfg["figure"], fam)
    _write(cfg.get("summary"), _dump(summary))
    return EXIT_OK


AUDIT_KEYS = ["system", "n", "sigma", "tau", "c", "seed"]


def cmd_audit(args):
    cfg = resolve_config(args, AUDIT_KEYS)
    sys_id = make_system(cfg)
    if args.family and args.family != sys_id.kind:
        raise ConfigError(f"family {args.family!r} does not live on the chart of system {sys_id.kind!r}")
    if args.points < 30:
        raise ConfigError("--points must be at least 30")
    fam = integral_family(sys_id)
    rep = audit(fam.tensor, fam, args.points, cfg["seed"])
    doc = rep.to_dict()
    doc["config"] = cfg
    if args.out:
        _write(args.out, _dump(doc))
    if args.json:
        _write(None, _dump(doc))
    else:
        print(f"{'system':<56} {'ddim':>4} {'dind':>4} {'dim':>4} {'complete':>8} {'max|B|':>10}")
        print(f"{rep.system:<56} {rep.ddim:>4} {rep.dind:>4} {rep.dim:>4} {str(rep.complete):>8} {rep.gram_max_abs:>10.3g}")
    return EXIT_OK


def _normalize_name(name):
    s = name.strip().replace("_", "").replace("{", "").replace("}", "")
    return s.replace("Ĩ", "It").replace("J̃", "Jt").replace("~", "t")


def cmd_bracket(args):
    cfg = resolve_config(args, AUDIT_KEYS)
    sys_id = make_system(cfg)
    fam = integral_family(sys_id)
    fields = {f.name: f for f in fam.members}
    fields.setdefault("H", hamiltonian(sys_id))
    names = []
    for raw in (args.f, args.g):
        key = _normalize_name(raw)
        if key not in fields:
            raise ConfigError(f"unknown field {raw!r}; available: {', '.join(fields)}")
        names.append(key)
    f, g = fields[names[0]], fields[names[1]]
    rng = np.random.default_rng(cfg["seed"])
    pts = sys_id.sample(rng, args.points)
    vals = np.abs(bracket(fam.tensor, f, g, pts))
    doc = {
        "config": cfg,
        "system": sys_id.label,
        "f": names[0],
        "g": names[1],
        "points": int(args.points),
        "min": float(np.min(vals)),
        "max": float(np.max(vals)),
        "mean": float(np.mean(vals)),
    }
    _write(args.out, _dump(doc))
    return EXIT_OK


def _projection_columns(header, rows, projection):
    index = {name: i for i, name in enumerate(header)}
    if projection == "angles":
        th = [name for name in header if name.startswith("th")]
        if th:
            return th, np.array([[float(r[index[c]]) for c in th] for r in rows])
        planes = [name[1:] for name in header if name.startswith("x") and name[1:].isdigit()]
        if not planes or any(f"y{k}" not in index for k in planes):
            raise ConfigError("angles projection needs x_k/y_k or th columns")
        names = [f"phi{k}" for k in planes]
        data = np.array(
            [[np.arctan2(float(r[index[f"y{k}"]]), float(r[index[f"x{k}"]])) for k in planes] for r in rows]
        )
        return names, data
    names = projection.split(":")
    missing = [c for c in names if c not in index]
    if missing:
        raise ConfigError(f"unknown column(s) {', '.join(missing)}; available: {', '.join(header)}")
    return names, np.array([[float(r[index[c]]) for c in names] for r in rows])


def cmd_plotdata(args):
    try:
        with open(args.csv, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read {args.csv}: {exc}") from None
    rows = [r for r in rows if r]
    if len(rows) <= 1:
        _write(args.out, "")
        return EXIT_OK
    header, body = rows[0], rows[1:]
    names, data = _projection_columns(header, body, args.projection)
    lines = ["# " + " ".join(names)]
    lines += [" ".join("%.17g" % v for v in row) for row in data]
    _write(args.out, "\n".join(lines) + "\n")
    if args.figure:
        from .plotting import columns_figure

        columns_figure(names, data, args.figure)
    return EXIT_OK


def _batch_job(job):
    idx, cfg, outdir = job
    base = os.path.join(outdir, f"run{idx:03d}")
    try:
        cfg = finish_config({**{k: DEFAULTS[k] for k in SIM_KEYS}, **cfg})
        summary, text, traj, fam = run_simulation(cfg)
    except ConfigError as exc:
        return idx, EXIT_CONFIG, str(exc)
    except IntegrationError as exc:
        return idx, EXIT_NUMERIC, str(exc)
    with open(base + ".csv", "w", newline="") as fh:
        fh.write(text)
    with open(base + ".json", "w") as fh:
        fh.write(_dump(summary))
    if cfg.get("figure"):
        from .plotting import trajectory_figure

        trajectory_figure(traj, base + ".png", fam)
    return idx, EXIT_OK, base + ".json"


def cmd_batch(args):
    try:
        with open(args.runs_file) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read batch file {args.runs_file}: {exc}") from None
    runs = data.get("runs") if isinstance(data, dict) else data
    if not isinstance(runs, list) or not all(isinstance(r, dict) for r in runs):
        raise ConfigError("batch file must hold a list of config objects (or {\"runs\": [...]})")
    os.makedirs(args.outdir, exist_ok=True)
    jobs = [(i, r, args.outdir) for i, r in enumerate(runs)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_batch_job, jobs))
    else:
        results = [_batch_job(j) for j in jobs]
    results.sort()
    index = [{"run": i, "exit": code, "detail": detail} for i, code, detail in results]
    _write(None, _dump(index))
    return max([code for _, code, _ in results] + [EXIT_OK])


# -- parser -------------------------------------------------------------------


def _system_args(p, with_init=False):
    p.add_argument("--config", help="JSON file with config keys; flags override it")
    p.add_argument("--system", choices=KINDS)
    p.add_argument("--n", type=int, help="half the dimension of the horizontal distribution")
    p.add_argument("--sigma", help="comma-separated sigma_1 >= ... >= sigma_n = 1")
    p.add_argument("--tau", type=float)
    p.add_argument("--c", type=float, help="level C of lam_{2n+1} (reduced systems; helix lam_z for ll-full)")
    p.add_argument("--seed", type=int)


def build_parser():
    parser = argparse.ArgumentParser(prog="heisenberg-sr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate a system and export the trajectory")
    _system_args(p)
    p.add_argument("--init", help="random | state:v1,v2,... | helix:a1,b1,c1,d1,...,c0")
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--method", choices=("dopri", "rk4", "midpoint"))
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.add_argument("--step", type=float, help="fixed step for rk4 and midpoint")
    p.add_argument("--max-step", dest="max_step", type=float)
    p.add_argument("--out", help="trajectory CSV path")
    p.add_argument("--summary", help="summary JSON path (default: stdout)")
    p.add_argument("--figure", help="PNG path for a trajectory figure")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("audit", help="estimate ddim/dind of a system's integral family")
    _system_args(p)
    p.add_argument("--family", choices=KINDS, help="integral family (defaults to the system's own)")
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--out", help="write the AuditReport JSON here")
    p.add_argument("--json", action="store_true", help="print the JSON report instead of the table")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("bracket", help="statistics of |{f, g}| over random points")
    _system_args(p)
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bracket)

    p = sub.add_parser("plotdata", help="select trajectory CSV columns for external plotting")
    p.add_argument("csv")
    p.add_argument("--projection", required=True, help="col:col[:col] or angles")
    p.add_argument("--out")
    p.add_argument("--figure", help="also render the selection to a PNG")
    p.set_defaults(func=cmd_plotdata)

    p = sub.add_parser("batch", help="run a JSON list of simulate configs")
    p.add_argument("runs_file", help="JSON list of simulate configs, or an object with a \"runs\" list")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--outdir", default="batch_out")
    p.set_defaults(func=cmd_batch)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.print_usage(sys.stderr)
        print(f"heisenberg-sr {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, SingularChartPoint) as exc:
        print(f"heisenberg-sr {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
