"""Command-line front end.

Exit codes: 0 = every verdict passed, 1 = a verdict failed, 2 = config,
input or I/O error.  Reports are JSON with sorted keys; everything except
the ``wall_clock`` field is a deterministic function of (inputs, seed).

Norm and metric spec strings look like ``NAME[@DIM][:KEY=VALUE;KEY=VALUE]``,
for example ``randers@2:b=0.5,0`` or ``linear-image@2:matrix=2,0/0,1``.
Values with ``,`` become vectors, ``/`` separates matrix rows.  ``expr@N:TEXT``
builds a norm (or metric) from gauge text.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from . import expr as _expr
from . import finsler as fs
from . import indicatrix as ind
from . import minkowski as mk
from . import suites as su
from . import transport as tr

SCHEMA_VERSION = 1
OUTPUT_ENV = "FINSLERKIT_OUTPUT_DIR"

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class ConfigError(Exception):
    """Anything the user supplied that cannot be used; maps to exit code 2."""


# ---------------------------------------------------------------------------
# spec strings


def _parse_value(text):
    text = text.strip()
    if "/" in text:
        return [_parse_value(row) for row in text.split("/")]
    if "," in text:
        return [float(v) for v in text.split(",")]
    try:
        return float(text)
    except ValueError:
        return text


def _split_spec(spec: str, default_dim: int):
    if not isinstance(spec, str) or not spec.strip():
        raise ConfigError("empty spec")
    head, _, rest = spec.partition(":")
    name, _, dim = head.partition("@")
    name = name.strip()
    try:
        n = int(dim) if dim else default_dim
    except ValueError:
        raise ConfigError(f"bad dimension {dim!r} in spec {spec!r}") from None
    if n < 1 or n > 16:
        raise ConfigError(f"dimension {n} out of range in spec {spec!r}")
    return name, n, rest


def _parse_params(rest: str, spec: str):
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(";"))):
        key, eq, value = item.partition("=")
        if not eq or not key.strip():
            raise ConfigError(f"expected KEY=VALUE, got {item!r} in spec {spec!r}")
        try:
            params[key.strip()] = _parse_value(value)
        except ValueError:
            raise ConfigError(f"bad number in {item!r} of spec {spec!r}") from None
    return params


def parse_norm_spec(spec: str, default_dim: int = 2) -> mk.MinkowskiNorm:
    name, n, rest = _split_spec(spec, default_dim)
    try:
        if name == "expr":
            return mk.from_expr(rest, n)
        return mk.catalog(name, n, _parse_params(rest, spec))
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError, OverflowError) as exc:
        raise ConfigError(f"norm spec {spec!r}: {exc}") from None


def parse_metric_spec(spec: str, default_dim: int = 2) -> fs.FinslerMetric:
    name, n, rest = _split_spec(spec, default_dim)
    try:
        if name == "expr":
            return fs.from_expr(rest, n)
        params = _parse_params(rest, spec)
        if name == "minkowski":
            own = {k: params.pop(k) for k in ("norm", "lower", "upper") if k in params}
            if params:
                own["norm_params"] = params
            params = own
        return fs.catalog(name, n, params)
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError, OverflowError) as exc:
        raise ConfigError(f"metric spec {spec!r}: {exc}") from None


def parse_vector(text: str, n: int | None = None, what: str = "vector") -> np.ndarray:
    try:
        v = np.array([float(s) for s in text.split(",")], dtype=float)
    except ValueError:
        raise ConfigError(f"{what}: cannot parse {text!r}") from None
    if n is not None and v.size != n:
        raise ConfigError(f"{what}: expected {n} components, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ConfigError(f"{what}: components must be finite")
    return v


def parse_curve_spec(text: str, n: int) -> tr.Curve:
    """``segment:X0/X1``, ``poly:C0/C1/...`` (coefficients of t^k) or ``chain:P0/P1/...``."""
    kind, _, body = text.partition(":")
    pts = [parse_vector(p, n, "curve point") for p in body.split("/") if p.strip()]
    if kind == "segment":
        if len(pts) != 2:
            raise ConfigError("segment needs exactly two points")
        return tr.Segment(*pts)
    if kind == "poly":
        if not pts:
            raise ConfigError("poly needs coefficients")
        return tr.PolynomialCurve(pts)
    if kind == "chain":
        if len(pts) < 2:
            raise ConfigError("chain needs at least two points")
        return tr.PiecewiseLinear(pts)
    raise ConfigError(f"unknown curve kind {kind!r}; use segment, poly or chain")


# ---------------------------------------------------------------------------
# config


def load_schema():
    text = resources.files("finslerkit").joinpath("schema/config.schema.json").read_text()
    return json.loads(text)


def _error_path(err):
    parts = []
    for p in err.absolute_path:
        parts.append(f"[{p}]" if isinstance(p, int) else (f".{p}" if parts else str(p)))
    return "".join(parts) or "<root>"


def validate_config(cfg):
    validator = jsonschema.Draft202012Validator(load_schema())
    err = jsonschema.exceptions.best_match(validator.iter_errors(cfg))
    if err is not None:
        raise ConfigError(f"config error at {_error_path(err)}: {err.message}")


def load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc.msg} at line {exc.lineno}, column {exc.colno}") from None
    validate_config(cfg)
    return cfg


def metric_from_config(entry, default_dim=2):
    try:
        if "expr" in entry:
            n = entry["dimension"]
            volume = entry.get("volume", "coordinate")
            if volume == "custom" and "sigma" not in entry:
                raise ConfigError("volume 'custom' needs a sigma expression")
            return fs.from_expr(entry["expr"], n, entry.get("lower"), entry.get("upper"),
                                volume, entry.get("sigma"), entry.get("label"))
        return fs.catalog(entry["name"], entry.get("dimension", default_dim), entry.get("params"))
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"metric {entry}: {exc}") from None


def norm_from_config(entry):
    try:
        if "expr" in entry:
            return mk.from_expr(entry["expr"], entry["dimension"])
        return mk.catalog(entry["name"], entry["dimension"], entry.get("params"))
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"norm {entry}: {exc}") from None


# ---------------------------------------------------------------------------
# output


def jsonable(obj):
    """Plain JSON types; non-finite floats become strings so output stays strict JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(doc) -> str:
    return json.dumps(jsonable(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def output_path(path) -> Path:
    """Apply the output-directory override (it replaces the directory part only)."""
    p = Path(path)
    override = os.environ.get(OUTPUT_ENV)
    if override:
        p = Path(override) / p.name
    return p


def write_atomic(path, text: str) -> Path:
    p = output_path(path)
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{p.name}.", dir=p.parent)
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, p)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise ConfigError(f"cannot write {p}: {exc.strerror or exc}") from None
    return p


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def make_report(command, inputs, body, passed, started):
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": "finslerkit",
        "version": __version__,
        "command": command,
        "inputs": inputs,
        "passed": bool(passed),
        **body,
        "wall_clock": {"seconds": round(time.perf_counter() - started, 3)},
    }


def emit(args, report):
    text = dumps(report)
    if getattr(args, "out", None):
        path = write_atomic(args.out, text)
        print(f"report written to {path}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report["passed"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# commands


def cmd_catalog(args):
    started = time.perf_counter()
    body = {"result": {"norms": list(mk.CATALOG), "metrics": list(fs.CATALOG), "suites": list(su.SUITES)}}
    return emit(args, make_report("catalog", {}, body, True, started))


def cmd_invariants(args):
    started = time.perf_counter()
    if bool(args.metric) == bool(args.norm):
        raise ConfigError("give exactly one of --metric or --norm")
    if args.metric:
        M = parse_metric_spec(args.metric, args.dimension)
        if args.x is None:
            raise ConfigError("--metric needs --x")
        x = parse_vector(args.x, M.dimension, "--x")
        y = parse_vector(args.y, M.dimension, "--y")
        if not M.contains(x, 0.0):
            raise ConfigError(f"--x {x.tolist()} lies outside the chart")
        if not np.any(y):
            raise ConfigError("--y must be nonzero")
        result = fs.curvature_bundle(M, x, y).as_dict()
        inputs = {"metric": args.metric, "x": x, "y": y}
    else:
        F = parse_norm_spec(args.norm, args.dimension)
        y = parse_vector(args.y, F.dimension, "--y")
        if not np.any(y):
            raise ConfigError("--y must be nonzero")
        t = mk.norm_tensors(F, y)
        result = {k: getattr(t, k) for k in ("F", "g", "A", "eta", "h")}
        if F.dimension >= 2:
            p = ind.indicatrix_point(F, y)
            c, tn, m = ind.matched_scalar_invariants(F, p)
            result.update({"cubic_norm": c, "tchebychev_norm": tn, "semi_c_norm_q2": m})
        inputs = {"norm": args.norm, "y": y}
    return emit(args, make_report("invariants", inputs, {"result": result}, True, started))


def cmd_classify(args):
    started = time.perf_counter()
    M = parse_metric_spec(args.metric, args.dimension)
    rep = fs.classify(M, points_per_axis=args.points_per_axis, directions=args.samples or 8,
                      rtol=args.tol or 1e-7, seed=args.seed)
    inputs = {"metric": args.metric, "points_per_axis": args.points_per_axis,
              "directions": args.samples or 8, "rtol": args.tol or 1e-7, "seed": args.seed}
    return emit(args, make_report("classify", inputs, {"result": rep.as_dict()},
                                  rep.theorem11_consistent, started))


def cmd_transport(args):
    started = time.perf_counter()
    M = parse_metric_spec(args.metric, args.dimension)
    curve = parse_curve_spec(args.curve, M.dimension)
    y0 = parse_vector(args.y0, M.dimension, "--y0")
    if not np.any(y0):
        raise ConfigError("--y0 must be nonzero")
    if not 0 <= args.t <= 1:
        raise ConfigError("--t must lie in [0, 1]")
    tol = args.tol or 1e-10
    try:
        res = tr.transport(M, curve, y0, args.t, method=args.method, rtol=tol, atol=tol)
    except tr.TransportError as exc:
        raise ConfigError(str(exc)) from None
    n = M.dimension
    header = ["t"] + [f"y{i + 1}" for i in range(n)] + ["F", "drift"]
    path = write_atomic(args.csv, _csv_text(header, res.csv_rows()))
    drift = res.max_relative_drift()
    result = {"y_final": res.y, "max_relative_drift": drift, "stats": res.stats.as_dict(),
              "trajectory_csv": str(path), "samples": len(res.ts)}
    inputs = {"metric": args.metric, "curve": args.curve, "y0": y0, "t": args.t, "method": args.method, "tol": tol}
    return emit(args, make_report("transport", inputs, {"result": result}, drift <= 1e-8, started))


def cmd_equiv(args):
    started = time.perf_counter()
    F1 = parse_norm_spec(args.norm1, args.dimension)
    F2 = parse_norm_spec(args.norm2, args.dimension)
    if F1.dimension != F2.dimension:
        raise ConfigError("norms have different dimensions")
    n = F1.dimension
    samples = None
    if args.samples:
        samples = mk.default_directions(n, args.samples, args.seed)
    res = ind.equivalence_solve(F1, F2, restarts=args.restarts, seed=args.seed,
                                tol=args.tol or 1e-6, samples=samples)
    print(f"residual {res.residual:.3e}", file=sys.stderr)
    inputs = {"norm1": args.norm1, "norm2": args.norm2, "restarts": args.restarts, "seed": args.seed,
              "tol": args.tol or 1e-6, "samples": args.samples}
    return emit(args, make_report("equiv", inputs, {"result": res.as_dict()}, res.success, started))


def _run_suites(names, ctx):
    out, timings = {}, {}
    for name in names:
        t0 = time.perf_counter()
        try:
            r = su.run_suite(name, ctx)
        except (fs.MetricError, mk.NormError, tr.TransportError) as exc:
            raise ConfigError(f"suite {name}: {exc}") from None
        timings[name] = round(time.perf_counter() - t0, 3)
        out[name] = r.as_dict()
    return out, timings


def cmd_verify(args):
    started = time.perf_counter()
    metrics = [parse_metric_spec(s, args.dimension or 2) for s in args.metric] or None
    norms = [parse_norm_spec(s, args.dimension or 3) for s in args.norm] or None
    ctx = su.SuiteContext(seed=args.seed, tol=args.tol, samples=args.samples,
                          metrics=metrics, norms=norms, dimension=args.dimension)
    suites, timings = _run_suites(args.suite, ctx)
    passed = all(s["passed"] for s in suites.values())
    inputs = {"suites": args.suite, "metrics": args.metric, "norms": args.norm, "seed": args.seed,
              "tol": args.tol, "samples": args.samples, "dimension": args.dimension}
    report = make_report("verify", inputs, {"suites": suites}, passed, started)
    report["wall_clock"]["suites"] = timings
    _summarise(suites)
    return emit(args, report)


def _summarise(suites):
    for name, s in suites.items():
        status = "PASS" if s["passed"] else "FAIL"
        print(f"[{status}] {name}", file=sys.stderr)
        for c in s["checks"]:
            if not c["passed"]:
                print(f"    {c['name']}: {c['value']:.3e} (needs {c['op']} {c['tol']:.1e})", file=sys.stderr)
        for f in s["findings"]:
            print(f"    finding: {f.get('kind')} in {f.get('metric')}", file=sys.stderr)


def run_report(config_path, seed=None, tol=None, samples=None):
    """Run the suites of a config file; returns (exit code, report path or None)."""
    started = time.perf_counter()
    cfg = load_config(config_path)
    seed = cfg.get("seed", 0) if seed is None else seed
    tol = cfg.get("tol") if tol is None else tol
    samples = cfg.get("samples") if samples is None else samples
    dim = cfg.get("dimension")
    metrics = [metric_from_config(m, dim or 2) for m in cfg.get("metrics", [])] or None
    norms = [norm_from_config(m) for m in cfg.get("norms", [])] or None
    ctx = su.SuiteContext(seed=seed, tol=tol, samples=samples, metrics=metrics, norms=norms, dimension=dim)
    suites, timings = _run_suites(cfg["suites"], ctx)
    passed = all(s["passed"] for s in suites.values())
    report = make_report("run", {"config": cfg, "seed": seed, "tol": tol, "samples": samples},
                         {"suites": suites}, passed, started)
    report["wall_clock"]["suites"] = timings
    _summarise(suites)
    path = write_atomic(cfg.get("output", {}).get("report", "report.json"), dumps(report))
    print(f"report written to {path}", file=sys.stderr)
    return (EXIT_OK if passed else EXIT_FAIL), path


def cmd_run(args):
    code, _ = run_report(args.config, args.seed_given, args.tol, args.samples)
    return code


def icosphere(resolution: int):
    """Unit vertices and faces of an icosahedron subdivided ``resolution`` times."""
    t = (1 + 5**0.5) / 2
    V = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
         (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    V = [np.array(v, dtype=float) / np.linalg.norm(v) for v in V]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
             (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
             (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    for _ in range(resolution):
        cache = {}

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = V[a] + V[b]
                V.append(m / np.linalg.norm(m))
                cache[key] = len(V) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return np.array(V), np.array(faces)


def indicatrix_table(F: mk.MinkowskiNorm, U):
    """Rows (v, |C_hat|_h, |T_hat|_h, best-fit q, |M^q|_h) for directions U.

    q is reported as nan where both forms vanish (q is then unidentifiable).
    """
    rows = []
    for u in U:
        v = u / F(u)
        p = ind.indicatrix_point(F, u)
        c, tn, _ = ind.matched_scalar_invariants(F, p)
        q, m = ind.best_fit_q(F, p)
        if max(c, tn) < 1e-10:
            q = float("nan")
        rows.append([*v, c, tn, q, m])
    return rows


def cmd_export(args):
    started = time.perf_counter()
    F = parse_norm_spec(args.norm, args.dimension)
    n = F.dimension
    out = Path(args.output)
    companion = out.with_name(out.stem + "_invariants.csv")
    if args.format == "mesh" and n not in (2, 3):
        raise ConfigError(f"geometry export unsupported for n={n}; use --format csv for the invariant table")
    if args.resolution < 0 or args.resolution > 6:
        raise ConfigError("--resolution must be between 0 and 6")
    header = [f"v{i + 1}" for i in range(n)] + ["cubic_norm", "tchebychev_norm", "best_q", "semi_c_norm"]
    files = {}
    if args.format == "csv":
        U = mk.default_directions(n, args.samples or 50, args.seed)
        files["invariants"] = write_atomic(out, _csv_text(header, indicatrix_table(F, U)))
    elif n == 3:
        U, faces = icosphere(args.resolution)
        V = U / np.asarray(F(U))[:, None]
        lines = [f"# indicatrix of {F.label}, {len(V)} vertices"]
        lines += [f"v {a!r} {b!r} {c!r}" for a, b, c in V.tolist()]
        lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in faces.tolist()]
        files["mesh"] = write_atomic(out, "\n".join(lines) + "\n")
        files["invariants"] = write_atomic(companion, _csv_text(header, indicatrix_table(F, U)))
    else:
        m = 16 * 2**args.resolution
        th = 2 * np.pi * np.arange(m) / m
        U = np.stack([np.cos(th), np.sin(th)], axis=1)
        V = U / np.asarray(F(U))[:, None]
        files["polyline"] = write_atomic(out, _csv_text(["v1", "v2"], V.tolist() + [V[0].tolist()]))
        files["invariants"] = write_atomic(companion, _csv_text(header, indicatrix_table(F, U)))
    result = {"files": {k: str(v) for k, v in files.items()}, "vertices": len(U)}
    inputs = {"norm": args.norm, "resolution": args.resolution, "format": args.format}
    return emit(args, make_report("export", inputs, {"result": result}, True, started))


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="global seed (default 0)")
    common.add_argument("--tol", type=float, default=None, help="override the primary tolerance")
    common.add_argument("--samples", type=int, default=None, help="override sample counts")
    common.add_argument("--dimension", type=int, default=None, help="default dimension for specs")
    common.add_argument("--out", default=None, help="write the JSON report here instead of stdout")

    p = argparse.ArgumentParser(prog="finslerkit", description="Minkowski norm and Finsler metric workbench")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("catalog", parents=[common], help="list built-in norms, metrics and suites")

    s = sub.add_parser("invariants", parents=[common], help="tensors at one point")
    s.add_argument("--metric")
    s.add_argument("--norm")
    s.add_argument("--x", default=None)
    s.add_argument("--y", required=True)

    s = sub.add_parser("classify", parents=[common], help="curvature sup-norms and verdicts")
    s.add_argument("--metric", required=True)
    s.add_argument("--points-per-axis", type=int, default=3)

    s = sub.add_parser("transport", parents=[common], help="parallel transport, trajectory CSV")
    s.add_argument("--metric", required=True)
    s.add_argument("--curve", required=True, help="segment:X0/X1, poly:C0/C1/..., chain:P0/P1/...")
    s.add_argument("--y0", required=True)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--method", choices=("rk45", "rk4"), default="rk45")
    s.add_argument("--csv", default="trajectory.csv")

    s = sub.add_parser("equiv", parents=[common], help="search for a linear equivalence")
    s.add_argument("--norm1", required=True)
    s.add_argument("--norm2", required=True)
    s.add_argument("--restarts", type=int, default=20)

    s = sub.add_parser("verify", parents=[common], help="run named invariant suites")
    s.add_argument("--suite", action="append", required=True, choices=list(su.SUITES))
    s.add_argument("--metric", action="append", default=[])
    s.add_argument("--norm", action="append", default=[])

    s = sub.add_parser("run", parents=[common], help="run the suites of a JSON config")
    s.add_argument("config")

    s = sub.add_parser("export", parents=[common], help="indicatrix mesh/polyline and invariant table")
    s.add_argument("--norm", required=True)
    s.add_argument("--resolution", type=int, default=2)
    s.add_argument("--format", choices=("mesh", "csv"), default="mesh")
    s.add_argument("--output", required=True, help="mesh (.obj), polyline or table path")
    return p


COMMANDS = {
    "catalog": cmd_catalog, "invariants": cmd_invariants, "classify": cmd_classify,
    "transport": cmd_transport, "equiv": cmd_equiv, "verify": cmd_verify, "run": cmd_run,
    "export": cmd_export,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.seed_given = args.seed
    if args.seed is None:
        args.seed = 0
    if args.dimension is None and args.command in ("invariants", "classify", "transport", "equiv", "export"):
        args.dimension = 2
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (_expr.ExprError, mk.NormError, fs.MetricError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
