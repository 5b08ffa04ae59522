"""Command-line front end.

Exit codes: 0 success, 1 usage or parse problems, 2 numeric precondition
failures, 3 convergence failures (including a solve that fails its own
verification). Data goes to stdout (or ``--out``); diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import calculus, kernels, moebius, polyharmonic, series
from .errors import (
    CliffharmError,
    ConvergenceError,
    DimensionError,
    ParseError,
    PreconditionError,
)
from .exprs import evaluate, parse
from .multivector import QUATERNION_UNITS, Multivector, Quaternion
from .quadrature import DEFAULT_SEED, sphere_rule, weighted_mean

EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_CONVERGENCE = 0, 1, 2, 3
CHECKS = ("harmonic", "weak-harmonic", "subharmonic", "holomorphic", "clifford-left", "clifford-right")


class UsageError(CliffharmError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt(x) -> str:
    return format(float(x), ".17g")


def fmt_complex(z) -> str:
    z = complex(z)
    re_, im = z.real + 0.0, z.imag + 0.0
    if im == 0:
        return fmt(re_)
    sign = "-" if im < 0 else "+"
    return f"{fmt(re_)} {sign} {fmt(abs(im))}i"


# configuration

@dataclass
class JobConfig:
    command: str
    n: int = 2
    grid_h: float | None = None
    nodes: int | None = None
    truncation: float | None = None
    seed: int = DEFAULT_SEED
    tol: float | None = None
    out: str | None = None
    extra: dict = field(default_factory=dict)

    def check(self):
        for name in ("n", "grid_h", "nodes", "truncation", "tol"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")


CONFIG_KEYS = {"n": int, "grid-h": float, "nodes": int, "truncation": float, "seed": lambda s: int(s, 0), "tol": float, "out": str}


def read_config(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def build_config(args) -> JobConfig:
    file_values = read_config(args.config) if args.config else {}
    cfg = JobConfig(args.command)
    extra = {}
    for key, value in file_values.items():
        attr = key.replace("-", "_")
        if key in CONFIG_KEYS:
            try:
                setattr(cfg, attr, CONFIG_KEYS[key](value))
            except ValueError:
                raise UsageError(f"bad value for {key}: {value!r}") from None
        else:
            extra[attr] = value
    for key in CONFIG_KEYS:
        attr = key.replace("-", "_")
        v = getattr(args, attr, None)
        if v is not None:
            setattr(cfg, attr, v)
    for attr, v in vars(args).items():
        if attr in ("command", "config", "func") or attr in {k.replace("-", "_") for k in CONFIG_KEYS}:
            continue
        if v is not None:
            extra[attr] = v
    cfg.extra = extra
    cfg.check()
    return cfg


# shared helpers

def _boundary(cfg: JobConfig, domain: str):
    bound = cfg.extra.get("bound")
    bound = float(bound) if bound is not None else None
    if cfg.extra.get("boundary_csv"):
        text = Path(cfg.extra["boundary_csv"]).read_text()
        return kernels.BoundaryFunction.read_csv(text, cfg.n, domain)
    expr = cfg.extra.get("boundary")
    if expr is None:
        raise UsageError("give --boundary EXPR or --boundary-csv FILE")
    return kernels.BoundaryFunction.from_expression(str(expr), cfg.n, domain, bound)


def _parse_points(text, dim):
    pts = []
    for chunk in str(text).split(";"):
        if not chunk.strip():
            continue
        try:
            p = [float(v) for v in chunk.split(",")]
        except ValueError:
            raise ParseError(f"bad point {chunk!r}") from None
        if len(p) != dim:
            raise DimensionError(f"point {chunk!r} needs {dim} coordinates")
        pts.append(p)
    if not pts:
        raise ParseError("no points given")
    return np.array(pts)


def _grid_points(n, h, extent=1.0):
    k = int(math.floor(extent / h + 1e-9))
    axis = h * np.arange(-k, k + 1)
    return np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)


def _csv(header, rows, comments=()):
    lines = [",".join(header)]
    lines += [",".join(r) for r in rows]
    lines += [f"# {c}" for c in comments]
    return "\n".join(lines) + "\n"


def _emit(cfg: JobConfig, text: str):
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


# solve-ball

def cmd_solve_ball(cfg: JobConfig) -> int:
    n = cfg.n
    if n not in (2, 3):
        print(f"warning: n = {n} uses Monte Carlo sphere quadrature", file=sys.stderr)
    f = _boundary(cfg, "sphere")
    tol = cfg.tol or 1e-6
    if cfg.extra.get("points"):
        pts = _parse_points(cfg.extra["points"], n)
    else:
        pts = _grid_points(n, cfg.grid_h or 0.25)
        pts = pts[np.linalg.norm(pts, axis=1) < 1.0]
    nodes = cfg.nodes

    def h_at(p):
        return kernels.harmonic_extension_ball(f, p, nodes, return_info=True)

    rows, values = [], []
    for p in pts:
        v, info = h_at(p)
        values.append(v)
        rows.append([fmt(c) for c in p] + [fmt(v), str(int(info["near_boundary"]))])

    # self-verification: mean value property of the solution and the maximum principle
    rng = np.random.default_rng(cfg.seed)
    field = calculus.ScalarField(lambda q: np.array([kernels.harmonic_extension_ball(f, x, nodes) for x in q]), n)
    sphere_nodes = {2: 64, 3: 8}.get(n, 200)
    comments = ["verification: mean value at 5 interior points, radius 0.3"]
    bpts, _ = sphere_rule(n, {2: 1024, 3: 64}.get(n))
    fb = f(bpts)
    scale = max(1.0, float(np.max(np.abs(fb))))
    worst = 0.0
    for _ in range(5):
        d = rng.standard_normal(n)
        p = d / np.linalg.norm(d) * 0.5 * rng.uniform() ** (1.0 / n)
        f0 = field.at(p)
        spts, sw = sphere_rule(n, sphere_nodes)
        avg = float(weighted_mean(field(p + 0.3 * spts), sw))
        dev = avg - f0
        worst = max(worst, abs(dev))
        comments.append(f"point={' '.join(fmt(c) for c in p)} deviation={fmt(dev)}")
    hi, lo = float(np.max(fb)), float(np.min(fb))
    vmax = max(values) if values else hi
    vmin = min(values) if values else lo
    maxp = vmax <= hi + 1e-8 * scale and vmin >= lo - 1e-8 * scale
    ok = worst <= tol * scale and maxp
    comments.append(f"max_deviation={fmt(worst)} tolerance={fmt(tol * scale)}")
    comments.append(f"maximum_principle={'pass' if maxp else 'fail'} interior=[{fmt(vmin)},{fmt(vmax)}] boundary=[{fmt(lo)},{fmt(hi)}]")
    comments.append(f"verdict={'pass' if ok else 'fail'}")
    header = [f"x{j}" for j in range(1, n + 1)] + ["value", "near_boundary"]
    _emit(cfg, _csv(header, rows, comments))
    if not ok:
        print("error: solution failed its self-verification", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


# solve-halfspace

def cmd_solve_halfspace(cfg: JobConfig) -> int:
    n = cfg.n
    f = _boundary(cfg, "plane")
    tol = cfg.tol or 1e-6
    if cfg.extra.get("points"):
        pts = _parse_points(cfg.extra["points"], n + 1)
    else:
        ts = [float(v) for v in str(cfg.extra.get("t", "0.25,0.5,1")).split(",")]
        xs = _grid_points(n, cfg.grid_h or 0.5)
        pts = np.array([[*x, t] for t in ts for x in xs])
    if np.any(pts[:, -1] <= 0):
        raise kernels.DomainError("half-space points need t > 0")

    def h_at(q, info=False):
        return kernels.harmonic_extension_halfspace(f, q[:-1], q[-1], truncation=cfg.truncation, return_info=info)

    rows, values, bound, tail = [], [], 0.0, 0.0
    for q in pts:
        v, meta = h_at(q, True)
        values.append(v)
        bound = max(bound, meta["bound"])
        tail = max(tail, meta["tail_bound"])
        rows.append([fmt(c) for c in q] + [fmt(v)])

    rng = np.random.default_rng(cfg.seed)
    dim = n + 1
    sphere_nodes = {2: 32, 3: 6}.get(dim, 200)
    spts, sw = sphere_rule(dim, sphere_nodes)
    comments = [f"verification: |h| <= bound, mean value at 3 points; bound={fmt(bound)} tail_bound={fmt(tail)}"]
    worst = 0.0
    for _ in range(3):
        t0 = rng.uniform(0.5, 1.5)
        c = np.concatenate([rng.uniform(-1, 1, n), [t0]])
        r = 0.5 * t0
        f0 = h_at(c)
        avg = float(weighted_mean(np.array([h_at(q) for q in c + r * spts]), sw))
        worst = max(worst, abs(avg - f0))
        comments.append(f"point={' '.join(fmt(v) for v in c)} radius={fmt(r)} deviation={fmt(avg - f0)}")
    scale = max(1.0, bound)
    bounded = all(abs(v) <= bound + 1e-6 for v in values)
    ok = bounded and worst <= tol * scale and tail <= max(tol, 1e-6) * scale
    comments.append(f"bounded={'pass' if bounded else 'fail'} max_deviation={fmt(worst)} tolerance={fmt(tol * scale)}")
    comments.append(f"verdict={'pass' if ok else 'fail'}")
    header = [f"x{j}" for j in range(1, n + 1)] + ["t", "value"]
    _emit(cfg, _csv(header, rows, comments))
    if not ok:
        print("error: solution failed its self-verification", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


# verify

def _load_grid_field(path, sidecar):
    text = Path(path).read_text()
    meta = Path(sidecar).read_text()
    header = [h.strip() for h in text.splitlines()[0].split(",")]
    n = len(json.loads(meta)["shape"])
    value_cols = header[n:]
    if value_cols == ["value"]:
        g = calculus.GridField.from_csv(text, meta)
        return "real", g, n
    parts = {}
    for j, name in enumerate(value_cols):
        sub = "\n".join(",".join(row.split(",")[:n] + [row.split(",")[n + j]]) for row in text.splitlines()[1:] if row.strip())
        hdr = ",".join(header[:n] + ["value"])
        parts[name] = calculus.GridField.from_csv(hdr + "\n" + sub, meta)
    if set(value_cols) == {"re", "im"}:
        re_, im = parts["re"], parts["im"]
        return "complex", calculus.ScalarField(lambda p: re_(p) + 1j * im(p), n, re_.domain, re_.h), n
    masks = {}
    for name in value_cols:
        masks[name] = 0 if name in ("e", "1") else _blade_mask(name, n)
    any_grid = next(iter(parts.values()))

    def fn(p):
        out = np.zeros((len(p), 1 << n))
        for name, g in parts.items():
            out[:, masks[name]] = g(p)
        return out

    return "clifford", calculus.CliffordField(fn, n, any_grid.domain, any_grid.h), n


def _blade_mask(name, n):
    from .multivector import _parse_blade_name

    try:
        return _parse_blade_name(name, n)
    except (ParseError, ValueError):
        raise ParseError(f"unknown value column {name!r}") from None


def _sample_balls(domain, n, k, rng):
    lo, hi = np.asarray(domain.lo), np.asarray(domain.hi)
    extent = float(np.min(hi - lo))
    r = 0.2 * extent
    out = []
    for _ in range(k):
        c = lo + r + 0.05 * extent + rng.uniform(size=n) * (hi - lo - 2 * r - 0.1 * extent)
        out.append((c, r))
    return out


def cmd_verify(cfg: JobConfig) -> int:
    checks = [c.strip() for c in str(cfg.extra.get("checks", "harmonic")).split(",") if c.strip()]
    unknown = [c for c in checks if c not in CHECKS]
    if unknown:
        raise UsageError(f"unknown check(s): {', '.join(unknown)}; choose from {', '.join(CHECKS)}")
    path = cfg.extra.get("field")
    if not path:
        raise UsageError("verify needs --field GRID.csv")
    sidecar = cfg.extra.get("sidecar") or str(Path(path).with_suffix(".json"))
    if not Path(sidecar).exists():
        raise UsageError(f"grid sidecar {sidecar} not found")
    kind, fld, n = _load_grid_field(path, sidecar)
    tol = cfg.tol or 1e-6
    samples = int(cfg.extra.get("samples", 5))
    rng = np.random.default_rng(cfg.seed)
    balls = _sample_balls(fld.domain, n, samples, rng)
    report = {"n": n, "field": Path(path).name, "kind": kind, "checks": {}}
    for check in checks:
        report["checks"][check] = _run_check(check, kind, fld, n, balls, tol)
    _emit(cfg, json.dumps(report, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def _real_part(fld):
    return calculus.ScalarField(lambda p: np.real(fld(p)), fld.n, fld.domain, fld.h)


def _run_check(check, kind, fld, n, balls, tol):
    records = []
    if check in ("harmonic", "subharmonic"):
        if kind == "clifford":
            raise UsageError(f"{check} needs a scalar field")
        g = _real_part(fld)
        for p, r in balls:
            if check == "harmonic":
                rep = calculus.mean_value_check(g, p, r)
                dev = rep.ball_deviation if abs(rep.ball_deviation) >= abs(rep.sphere_deviation) else rep.sphere_deviation
                records.append({"point": [float(v) for v in p], "radius": r, "deviation": dev, "verdict": "pass" if abs(dev) <= tol else "fail"})
            else:
                records.append(calculus.sub_mean_value_check(g, p, r).record(tol))
        worst = max((r["deviation"] for r in records), key=abs) if check == "harmonic" else min(r["deviation"] for r in records)
    elif check == "weak-harmonic":
        if kind == "clifford":
            raise UsageError("weak-harmonic needs a scalar field")
        g = _real_part(fld)
        for p, r in balls:
            bump = calculus.standard_bump(n, eps=0.05 * r * r, r=r * r)
            val = calculus.weak_harmonic_test(g, [bump], [p], eta=0.0).pairings[0]
            absg = calculus.ScalarField(lambda q: np.abs(g(q)), n, g.domain, g.h)
            scale = abs(calculus.weak_harmonic_test(absg, [_abs_sigma_bump(bump)], [p], eta=0.0).pairings[0]) or 1.0
            rel = val / scale
            records.append({"point": [float(v) for v in p], "radius": r, "deviation": rel, "verdict": "pass" if abs(rel) <= tol else "fail"})
        worst = max((r["deviation"] for r in records), key=abs)
    elif check == "holomorphic":
        if n != 2 or kind == "clifford":
            raise UsageError("holomorphic needs a scalar or complex field on R^2")
        for p, _ in balls:
            d = calculus.wirtinger(fld, p, "dzbar")
            records.append({"point": [float(v) for v in p], "deviation": abs(d), "dzbar": [d.real, d.imag], "verdict": "pass" if abs(d) <= tol else "fail"})
        worst = max(r["deviation"] for r in records)
    else:
        F = fld if kind == "clifford" else calculus.as_clifford(_real_part(fld))
        op = calculus.dirac_left if check == "clifford-left" else calculus.dirac_right
        for p, _ in balls:
            d = op(F, p)
            records.append({"point": [float(v) for v in p], "deviation": float(d.norm()), "value": d.to_text(), "verdict": "pass" if d.norm() <= tol else "fail"})
        worst = max(r["deviation"] for r in records)
    verdict = "pass" if all(r["verdict"] == "pass" for r in records) else "fail"
    return {"verdict": verdict, "worst_deviation": worst, "records": records}


def _abs_sigma_bump(bump):
    """A stand-in carrying |sigma| for the scale of a weak pairing."""
    return calculus.BumpFamily(lambda u: np.abs(bump.sigma(u)), bump.eps, bump.r, bump.n, bump._rho, bump._cum)


# decompose

def cmd_decompose(cfg: JobConfig) -> int:
    text = cfg.extra.get("polynomial")
    if text is None:
        raise UsageError("decompose needs a polynomial")
    p = polyharmonic.parse_polynomial(str(text), cfg.n)
    terms = polyharmonic.harmonic_decomposition(p)
    _emit(cfg, polyharmonic.decomposition_to_json(p, terms) + "\n")
    return EXIT_OK


# eval

def _eval_clifford(body, n):
    return Multivector.from_text(body, n).to_text()


def _eval_quaternion(body):
    units = QUATERNION_UNITS

    def resolve(name):
        return units[name]

    value = evaluate(parse(body), resolve)
    if not isinstance(value, Quaternion):
        value = Quaternion(float(value), 0.0, 0.0, 0.0)
    return str(value)


def _series_number(lit):
    return complex(lit) if lit.endswith("j") else float(lit)


SERIES_FUNCTIONS = {
    "exp": series.exp_complex,
    "log": lambda z, k=0: series.log_branch(z, int(round(complex(k).real))),
    "geom": lambda z: series.evaluate(series.geometric(), z),
    "abel": lambda z: _abel(z),
    "abs": abs,
}


def _abel(z):
    rep = series.abel_sum(series.geometric(), z)
    if not rep.summable:
        raise ConvergenceError(f"geometric series is not Abel summable at {z}: {rep.note}")
    return rep.value


def _eval_series(body):
    value = evaluate(parse(body), {"i": 1j, "pi": math.pi}, SERIES_FUNCTIONS, _series_number)
    return fmt_complex(value)


class _MapValue:
    """Evaluation wrapper: tuples become maps, @ composes or applies."""

    def __init__(self, m):
        self.m = m

    def __matmul__(self, other):
        if isinstance(other, _MapValue):
            return _MapValue(moebius.compose(self.m, other.m))
        return moebius.apply(self.m, _point(other))


def _point(v):
    if moebius.is_inf(v):
        return v
    if isinstance(v, (int, float, complex)):
        return complex(v)
    raise ParseError("maps act on extended complex numbers")


def _eval_moebius(body):
    tree = _tuples_to_maps(parse(body))

    def resolve(name):
        return {"inf": moebius.INF, "i": 1j, "pi": math.pi}[name]

    value = evaluate(tree, resolve, {"map": _make_map, "inv": lambda m: _MapValue(moebius.inverse(m.m))}, _series_number)
    if isinstance(value, _MapValue):
        m = value.m
        return "{" + ",".join(fmt_complex(c) for c in (m.a, m.b, m.c, m.d)) + "}"
    if moebius.is_inf(value):
        return "inf"
    return fmt_complex(value)


def _make_map(a, b, c, d):
    return _MapValue(moebius.MoebiusMap.from_coefficients(a, b, c, d))


def _tuples_to_maps(node):
    tag = node[0]
    if tag == "tuple":
        if len(node[1]) != 4:
            raise ParseError("a map literal needs four entries {a,b,c,d}")
        return ("call", "map", [_tuples_to_maps(a) for a in node[1]])
    if tag == "neg":
        return ("neg", _tuples_to_maps(node[1]))
    if tag == "bin":
        return ("bin", node[1], _tuples_to_maps(node[2]), _tuples_to_maps(node[3]))
    if tag == "call":
        return ("call", node[1], [_tuples_to_maps(a) for a in node[2]])
    return node


SUBLANGUAGES = {"clifford": "clifford", "quat": "quaternion", "quaternion": "quaternion", "series": "series", "moebius": "moebius"}


def cmd_eval(cfg: JobConfig) -> int:
    text = str(cfg.extra.get("expression", ""))
    m = re.match(r"\s*([A-Za-z]+)\s*:(.*)$", text, re.S)
    if not m or m.group(1).lower() not in SUBLANGUAGES:
        raise ParseError("expression must start with clifford:, quat:, series: or moebius:")
    lang, body = SUBLANGUAGES[m.group(1).lower()], m.group(2).strip()
    if lang == "clifford":
        out = _eval_clifford(body, cfg.n)
    elif lang == "quaternion":
        out = _eval_quaternion(body)
    elif lang == "series":
        out = _eval_series(body)
    else:
        out = _eval_moebius(body)
    _emit(cfg, out + "\n")
    return EXIT_OK


# constants

def cmd_constants(cfg: JobConfig) -> int:
    dims = [cfg.n] if cfg.extra.get("all") is not True else [1, 2, 3, 4]
    data = [kernels.kernel_constants(d).to_dict() for d in dims]
    _emit(cfg, json.dumps(data if len(data) > 1 else data[0], sort_keys=True, indent=2) + "\n")
    return EXIT_OK


# entry point

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--n", type=int, help="dimension (default 2)")
    common.add_argument("--grid-h", type=float, help="sample grid spacing")
    common.add_argument("--nodes", type=int, help="quadrature node count override")
    common.add_argument("--truncation", type=float, help="half-space truncation radius")
    common.add_argument("--seed", type=lambda s: int(s, 0), help="random seed (default 0x5EED)")
    common.add_argument("--tol", type=float, help="verification tolerance")
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--out", help="write output here instead of stdout")

    parser = _Parser(prog="cliffharm", description="Harmonic analysis and Clifford algebra toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve-ball", parents=[common], help="Dirichlet problem on the unit ball")
    p.add_argument("--boundary", help="boundary expression in x1..xn")
    p.add_argument("--boundary-csv", help="boundary table (theta[,phi],value)")
    p.add_argument("--points", help="evaluation points 'a,b;c,d' instead of a grid")

    p = sub.add_parser("solve-halfspace", parents=[common], help="Dirichlet problem on the upper half-space")
    p.add_argument("--boundary", help="boundary expression in x1..xn (x for n = 1)")
    p.add_argument("--boundary-csv", help="boundary table (x1..xn,value)")
    p.add_argument("--bound", type=float, help="declared sup |f|")
    p.add_argument("--t", help="comma-separated heights for the sample grid")
    p.add_argument("--points", help="evaluation points 'x1,..,xn,t;...'")

    p = sub.add_parser("verify", parents=[common], help="run field checks on a sampled grid")
    p.add_argument("--field", help="grid CSV (index columns + value columns)")
    p.add_argument("--sidecar", help="grid JSON sidecar (default: FIELD with .json)")
    p.add_argument("--checks", help=f"comma-separated subset of {', '.join(CHECKS)}")
    p.add_argument("--samples", type=int, help="number of sampled balls (default 5)")

    p = sub.add_parser("decompose", parents=[common], help="harmonic decomposition of a polynomial")
    p.add_argument("polynomial", nargs="?")

    p = sub.add_parser("eval", parents=[common], help="evaluate a clifford/quat/series/moebius expression")
    p.add_argument("expression", nargs="?")

    p = sub.add_parser("constants", parents=[common], help="kernel constants with provenance")
    p.add_argument("--all", action="store_true", default=None, help="dimensions 1 to 4")

    return parser


COMMANDS = {
    "solve-ball": cmd_solve_ball,
    "solve-halfspace": cmd_solve_halfspace,
    "verify": cmd_verify,
    "decompose": cmd_decompose,
    "eval": cmd_eval,
    "constants": cmd_constants,
}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ConvergenceError):
        return EXIT_CONVERGENCE
    if isinstance(exc, (UsageError, ParseError, DimensionError, OSError)):
        return EXIT_USAGE
    if isinstance(exc, PreconditionError):
        return EXIT_PRECONDITION
    if isinstance(exc, (ValueError, KeyError, IndexError, TypeError, json.JSONDecodeError)):
        return EXIT_USAGE
    if isinstance(exc, ZeroDivisionError):
        return EXIT_PRECONDITION
    return EXIT_USAGE


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = build_config(args)
        return COMMANDS[cfg.command](cfg)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001 - mapped onto the exit-code contract
        code = exit_code_for(exc)
        print(f"error: {exc}", file=sys.stderr)
        return code


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
