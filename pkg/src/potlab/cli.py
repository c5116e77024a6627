"""Command-line front end: ``potlab {gen,op,verify,info}``.

Exit status: 0 on success, 1 on a computation error or a failed criterion,
2 on a usage or configuration error.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources

import numpy as np

from . import __version__
from . import io as fio
from .czdecomp import cz_decompose
from .extension import build_psi, extend_half_space
from .measure import (RadiiGrid, cantor_measure, growth_constant, lebesgue_on_box, point_mass,
                      riesz_energy, surface_measure)
from .operators import (GridFunction, fractional_maximal_field, riesz_potential_field,
                        sharp_maximal_centered_values)
from .spaces import default_radii, morrey_lorentz_norm, morrey_norm
from .suites import ConfigError, run_suite

MEASURE_KINDS = ("lebesgue", "cantor", "sphere", "hyperplane", "pointmass")
FUNCTION_KINDS = ("bump", "indicator")
OPERATORS = ("riesz", "maximal", "sharp", "norm", "growth", "energy", "cz", "extend")


class UsageError(Exception):
    pass


def _floats(text: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _exponent(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity"):
        return math.inf
    try:
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="potlab", description="Riesz potentials and trace inequalities "
                                 "over discrete measures.")
    ap.add_argument("--output", default=".", help="directory for generated files and reports")
    ap.add_argument("--jobs", type=int, default=None, help="worker processes for suites (default: CPU count)")
    ap.add_argument("--seed", type=int, default=None, help="seed for randomized suites")
    ap.add_argument("--strict", action="store_true", help="treat inadmissible exponents as errors")
    ap.add_argument("--version", action="version", version=f"potlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a measure (.msr) or grid function (.gf)")
    g.add_argument("kind", choices=MEASURE_KINDS + FUNCTION_KINDS)
    g.add_argument("--dim", type=int, default=None)
    g.add_argument("--box", type=_floats, help="lo1,hi1[,lo2,hi2,...]")
    g.add_argument("--res", type=int, default=None, help="cells per axis / atom count parameter")
    g.add_argument("--generation", type=int, default=8)
    g.add_argument("--extent", type=float, default=1.0)
    g.add_argument("--at", type=_floats, help="point-mass location")
    g.add_argument("--mass", type=float, default=1.0)
    g.add_argument("--radius", type=float, default=1.0)
    g.add_argument("--center", type=_floats)
    g.add_argument("-o", "--out", help="output file (default: <output>/<kind>.msr|.gf)")

    o = sub.add_parser("op", help="apply an operator or compute a norm")
    o.add_argument("operator", choices=OPERATORS)
    o.add_argument("--f", dest="f", help="input function (.gf or .sf)")
    o.add_argument("--mu", help="measure file (.msr)")
    o.add_argument("--targets", help="target measure (.msr) for fields")
    o.add_argument("--alpha", type=float)
    o.add_argument("--beta", type=float)
    o.add_argument("--p", type=float)
    o.add_argument("--ell", type=_exponent, default=math.inf)
    o.add_argument("--lambda", dest="lam", type=float)
    o.add_argument("--morrey", action="store_true", help="plain Morrey norm (ell = p)")
    o.add_argument("--r-min", type=float)
    o.add_argument("--r-max", type=float)
    o.add_argument("--per-octave", type=int, default=8)
    o.add_argument("-o", "--out", help="output file")

    v = sub.add_parser("verify", help="run verification suites from a config file")
    v.add_argument("config", help="config path, or the name of a bundled config such as suite-all.cfg")

    i = sub.add_parser("info", help="describe a file, or list bundled configs")
    i.add_argument("path", nargs="?")
    return ap


# --------------------------------------------------------------------------
# gen
# --------------------------------------------------------------------------

def cmd_gen(args) -> int:
    kind = args.kind
    if kind in MEASURE_KINDS:
        mu = _gen_measure(args)
        path = args.out or os.path.join(args.output, f"{kind}.msr")
        fio.save_measure(path, mu)
        print(f"{path}: {len(mu)} atoms, dim {mu.dim}, total mass {mu.total_mass!r}")
        return 0
    f = _gen_function(args)
    path = args.out or os.path.join(args.output, f"{kind}.gf")
    fio.save_grid(path, f)
    print(f"{path}: grid {list(f.shape)}, dim {f.dim}, integral {float(f.values.sum() * f.cell_volume)!r}")
    return 0


def _gen_measure(args):
    kind = args.kind
    if kind == "lebesgue":
        if not args.box or len(args.box) % 2:
            raise UsageError("lebesgue needs --box lo1,hi1[,lo2,hi2,...]")
        lo, hi = args.box[0::2], args.box[1::2]
        return lebesgue_on_box((lo, hi), args.res or 100)
    if kind == "cantor":
        return cantor_measure(args.generation)
    if kind in ("sphere", "hyperplane"):
        return surface_measure(kind, args.dim or 2, args.res or 100, extent=args.extent, seed=args.seed or 0)
    at = args.at or [0.0] * (args.dim or 1)
    return point_mass(at, args.mass)


def _gen_function(args) -> GridFunction:
    n = args.dim or (len(args.center) if args.center else 1)
    c = np.zeros(n) if args.center is None else np.asarray(args.center, dtype=float)
    if c.size != n:
        raise UsageError("--center must have --dim entries")
    R = args.radius
    cells = args.res or 64
    if args.kind == "bump":
        func = lambda x: np.clip(1 - np.sum((x - c) ** 2, axis=1) / R**2, 0, None) ** 2  # noqa: E731
    else:
        func = lambda x: (np.linalg.norm(x - c, axis=1) < R).astype(float)  # noqa: E731
    return GridFunction.sample(func, c - R, c + R, cells)


# --------------------------------------------------------------------------
# op
# --------------------------------------------------------------------------

def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = {"lam": "--lambda", "f": "--f"}
        raise UsageError(f"op {args.operator} needs " + ", ".join(flags.get(m, "--" + m.replace("_", "-"))
                                                                  for m in missing))


def _radii(args, mu):
    if args.r_min is None and args.r_max is None:
        return default_radii(mu)
    top = args.r_max if args.r_max is not None else mu.diameter
    low = args.r_min if args.r_min is not None else 0.5 * mu.spacing
    return RadiiGrid(low, top, args.per_octave).radii


def _out(args, default_name):
    return args.out or os.path.join(args.output, default_name)


def _load_function(path):
    kind = fio.file_kind(path)
    if kind == "grid":
        return fio.load_grid(path)
    if kind == "sampled":
        return fio.load_sampled(path)
    raise UsageError(f"{path}: expected a function file (.gf or .sf)")


def cmd_op(args) -> int:
    op = args.operator
    if op in ("riesz", "maximal"):
        _need(args, "f", "targets", "alpha")
        f = fio.load_grid(args.f)
        mu = fio.load_measure(args.targets)
        field_ = (riesz_potential_field(f, args.alpha, mu) if op == "riesz"
                  else fractional_maximal_field(f, args.alpha, mu, per_octave=args.per_octave))
        path = _out(args, f"{op}.sf")
        fio.save_sampled(path, field_, args.targets)
        print(f"{path}: max {float(np.max(field_.values))!r}")
        return 0
    if op == "sharp":
        _need(args, "f", "beta")
        g = fio.load_sampled(args.f)
        vals = sharp_maximal_centered_values(g, args.beta, g.measure, _radii(args, g.measure))
        path = _out(args, "sharp.sf")
        fio.write_json(path, {"measure_ref": fio.read_json(args.f)["measure_ref"], "values": vals.tolist()})
        print(f"{path}: max {float(vals.max())!r}")
        return 0
    if op == "norm":
        _need(args, "f", "p", "lam", "beta")
        f = _load_function(args.f)
        if isinstance(f, GridFunction):
            f = f.as_sampled()
        radii = _radii(args, f.measure)
        rep = (morrey_norm(f, args.p, args.lam, args.beta, radii) if args.morrey
               else morrey_lorentz_norm(f, args.p, args.ell, args.lam, args.beta, radii))
        base = _out(args, "norm.csv")
        stem = os.path.splitext(base)[0]
        _write_text(stem + ".csv", rep.to_csv())
        fio.write_json(stem + ".json", {**rep.to_dict(), "p": args.p, "ell": _num(args.ell),
                                        "lambda": args.lam, "beta": args.beta})
        print(f"norm {rep.value!r} at center {rep.witness_center.tolist()} radius {rep.witness_radius!r}")
        return 0
    if op == "growth":
        _need(args, "mu", "beta")
        mu = fio.load_measure(args.mu)
        rep = growth_constant(mu, args.beta, _radii(args, mu))
        doc = {"beta": rep.beta, "constant": rep.constant, "witness_center": rep.witness[0].tolist(),
               "witness_radius": rep.witness[1],
               "per_radius_sup": [[r, v] for r, v in rep.per_radius_sup.items()]}
        fio.write_json(_out(args, "growth.json"), doc)
        print(f"growth constant {rep.constant!r} (beta {rep.beta!r})")
        return 0
    if op == "energy":
        _need(args, "mu", "beta")
        e = riesz_energy(fio.load_measure(args.mu), args.beta)
        fio.write_json(_out(args, "energy.json"), {"beta": args.beta, "energy": _num(e)})
        print(f"energy {e!r}")
        return 0
    if op == "cz":
        _need(args, "f", "lam")
        g = fio.load_sampled(args.f)
        res = cz_decompose(g, args.lam)
        rows = res.to_rows()
        lines = ["level,index,center,side,average,family"]
        for r in rows:
            idx = "" if r["index"] is None else " ".join(str(i) for i in r["index"])
            lvl = "" if r["level"] is None else str(r["level"])
            ctr = " ".join(format(x, ".17g") for x in r["center"])
            lines.append(f"{lvl},{idx},{ctr},{r['side']:.17g},{r['average']:.17g},{r['family']}")
        _write_text(_out(args, "cz.csv"), "\n".join(lines) + "\n")
        print(f"{len(rows)} cubes in {res.family_count} families; coverage {'ok' if res.exceptional_ok else 'FAILED'}")
        return 0 if res.exceptional_ok else 1
    if op == "extend":
        _need(args, "f")
        E = extend_half_space(fio.load_grid(args.f), build_psi())
        path = _out(args, "extended.gf")
        fio.save_grid(path, E)
        print(f"{path}: grid {list(E.shape)}")
        return 0
    raise UsageError(f"unknown operator {op}")


def _num(x):
    return x if math.isfinite(x) else str(x)


def _write_text(path, text):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# --------------------------------------------------------------------------
# verify
# --------------------------------------------------------------------------

def resolve_config(name: str) -> str:
    if os.path.exists(name):
        return name
    bundled = resources.files("potlab").joinpath("configs", os.path.basename(name))
    if bundled.is_file():
        return str(bundled)
    raise UsageError(f"config not found: {name}")


def load_config(path: str):
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    run = cp["run"] if cp.has_section("run") else {}
    listed = run.get("suites")
    sections = [s for s in cp.sections() if s.startswith("suite:")]
    if listed is None:
        names = [s.split(":", 1)[1] for s in sections]
    else:
        names = [t.strip() for t in listed.replace("\n", ",").split(",") if t.strip()]
    for n in names:
        if not cp.has_section(f"suite:{n}"):
            from .suites import SUITES
            if n not in SUITES:
                raise ConfigError(f"{path}: [run] suites lists {n!r} without a [suite:{n}] section")
    extra = set(run) - {"suites", "seed", "strict"} if run else set()
    if extra:
        raise ConfigError(f"{path}: [run] unknown keys: {', '.join(sorted(extra))}")
    try:
        seed = int(run.get("seed", 0))
        strict = cp.getboolean("run", "strict", fallback=False) if run else False
    except ValueError as exc:
        raise ConfigError(f"{path}: [run] {exc}") from None
    suites = [(n, dict(cp[f"suite:{n}"]) if cp.has_section(f"suite:{n}") else {}) for n in names]
    return suites, seed, strict


def _run_one(job):
    name, data, seed, strict = job
    try:
        res, resolved = run_suite(name, data, seed, strict)
        return name, res, resolved, None
    except ConfigError:
        raise
    except Exception as exc:  # reported as a failed suite
        return name, None, {"kind": data.get("kind", name)}, f"{type(exc).__name__}: {exc}"


def cmd_verify(args) -> int:
    path = resolve_config(args.config)
    suites, seed, strict = load_config(path)
    seed = args.seed if args.seed is not None else seed
    strict = strict or args.strict
    jobs = args.jobs or os.cpu_count() or 1
    work = [(n, d, seed, strict) for n, d in suites]
    if jobs > 1 and len(work) > 1:
        # results come back in submission order, so reports do not depend on scheduling
        with ProcessPoolExecutor(max_workers=min(jobs, len(work))) as pool:
            results = list(pool.map(_run_one, work))
    else:
        results = [_run_one(w) for w in work]
    os.makedirs(args.output, exist_ok=True)
    summary = {"config": os.path.basename(path), "seed": seed, "strict": strict, "suites": []}
    all_ok = True
    for name, res, resolved, err in results:
        entry = {"name": name, "config": resolved}
        if err is not None:
            entry.update(passed=False, error=err)
            print(f"ERROR {name}: {err}")
            all_ok = False
        else:
            _write_text(os.path.join(args.output, f"{name}.csv"), res.to_csv())
            entry.update(passed=bool(res.passed), metrics=_plain(res.metrics))
            print(f"{'PASS' if res.passed else 'FAIL'} {name}")
            all_ok &= bool(res.passed)
        summary["suites"].append(entry)
    summary["passed"] = all_ok
    fio.write_json(os.path.join(args.output, "summary.json"), summary)
    return 0 if all_ok else 1


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


# --------------------------------------------------------------------------
# info
# --------------------------------------------------------------------------

def cmd_info(args) -> int:
    if args.path is None:
        print(f"potlab {__version__}")
        folder = resources.files("potlab").joinpath("configs")
        for item in sorted(p.name for p in folder.iterdir() if p.name.endswith(".cfg")):
            print(f"bundled config: {item}")
        return 0
    kind = fio.file_kind(args.path)
    if kind == "measure":
        mu = fio.load_measure(args.path)
        print(json.dumps({"kind": "measure", "dim": mu.dim, "atoms": len(mu), "total_mass": mu.total_mass,
                          "diameter": mu.diameter, "spacing": mu.spacing}))
    elif kind == "grid":
        f = fio.load_grid(args.path)
        print(json.dumps({"kind": "grid", "dim": f.dim, "shape": list(f.shape),
                          "origin": f.origin.tolist(), "spacing": f.spacing.tolist(),
                          "max_abs": float(np.max(np.abs(f.values)))}))
    else:
        s = fio.load_sampled(args.path)
        print(json.dumps({"kind": "sampled", "atoms": len(s.measure),
                          "max_abs": float(np.max(np.abs(s.values)))}))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"gen": cmd_gen, "op": cmd_op, "verify": cmd_verify, "info": cmd_info}
    try:
        return handlers[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"potlab: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError, KeyError) as exc:
        print(f"potlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
