"""Command-line entry point: ``laplace-limits <command> ...``.

Exit codes: 0 success, 2 usage or validation error, 3 data error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import jsonschema

from . import manifold as mf
from .functions import get_function, registered_functions
from .graph_core import IsolatedVertexError
from .harness import ExperimentConfig, run_convergence
from .io import (DataFileError, fmt, read_points, read_vertex_function, write_edge_list,
                 write_vertex_function)
from .kernel import get_kernel, moments, registered_kernels
from .neighborhood import KINDS, EmptyNeighborhoodError, apply_laplacian, build_graph
from .oracle import LimitSpec, limit_at

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 2, 3

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["model", "function", "n", "bandwidth", "output_dir"],
    "properties": {
        "model": {"type": "string"},
        "kernel": {"type": "string"},
        "function": {"type": "string"},
        "lambda": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "kinds": {"type": "array", "items": {"enum": list(KINDS)}, "minItems": 1},
        "n": {"type": "array", "items": {"type": "integer", "minimum": 10}, "minItems": 1},
        "bandwidth": {
            "oneOf": [
                {"type": "object", "additionalProperties": False, "required": ["h"],
                 "properties": {"h": {"type": "array", "minItems": 1,
                                      "items": {"type": "number", "exclusiveMinimum": 0}}}},
                {"type": "object", "additionalProperties": False, "required": ["schedule_c"],
                 "properties": {"schedule_c": {"type": "number", "exclusiveMinimum": 0}}},
            ]
        },
        "seeds": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "boundary_margin_factor": {"type": "number", "minimum": 0},
        "eval_points": {
            "type": "object", "additionalProperties": False,
            "properties": {"rule": {"enum": ["grid", "sample"]},
                           "count": {"type": "integer", "minimum": 1}},
        },
        "output_dir": {"type": "string"},
    },
}

# n=2500 setups with the bandwidths used for the three illustrations
PRESETS = {
    "figure-uniform": {
        "model": "box2_uniform", "function": "paper_sine", "n": [2500],
        "bandwidth": {"h": [1.4]}, "lambda": [0.0], "kinds": list(KINDS),
        # the 5x5 grid sits 1.5 from the box edge, so a support of 1.4 stays inside
        "boundary_margin_factor": 1.0,
    },
    "figure-gaussian": {
        "model": "gauss2", "function": "paper_affine", "n": [2500],
        "bandwidth": {"h": [1.2]}, "lambda": [0.0], "kinds": list(KINDS),
    },
    "figure-sphere": {
        "model": "sphere_cluster", "function": "sphere_costheta", "n": [2500],
        "bandwidth": {"h": [0.6]}, "lambda": [0.0, 1.0, 2.0], "kinds": ["rw"],
    },
}


class UsageError(Exception):
    pass


def config_from_dict(doc: dict) -> ExperimentConfig:
    """Validate a config document and turn it into an :class:`ExperimentConfig`."""
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise UsageError(f"invalid config at {where}: {exc.message}") from None
    bw = doc["bandwidth"]
    ev = doc.get("eval_points", {})
    try:
        return ExperimentConfig(
            model=doc["model"],
            kernel=doc.get("kernel", "cubic_taper"),
            function=doc["function"],
            ns=list(doc["n"]),
            lambdas=[float(v) for v in doc.get("lambda", [0.0])],
            kinds=list(doc.get("kinds", ["rw"])),
            h_list=[float(v) for v in bw["h"]] if "h" in bw else None,
            schedule_c=float(bw["schedule_c"]) if "schedule_c" in bw else None,
            eval_rule=ev.get("rule", "grid"),
            eval_count=ev.get("count", 25),
            boundary_margin_factor=float(doc.get("boundary_margin_factor", 2.0)),
            seeds=list(doc.get("seeds", [0])),
        )
    except (ValueError, KeyError) as exc:
        raise UsageError(str(exc).strip('"')) from None


def load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON in {path} at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _kernel(name):
    try:
        return get_kernel(name)
    except KeyError as exc:
        raise UsageError(str(exc).strip('"')) from None


def _positive_dim(value: str) -> int:
    m = int(value)
    if m < 1:
        raise argparse.ArgumentTypeError("dimension must be >= 1")
    return m


def _positive_float(value: str) -> float:
    v = float(value)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _run_experiment(cfg: ExperimentConfig, out_dir, workers) -> int:
    report = run_convergence(cfg, workers=workers)
    paths = report.write(out_dir)
    failed = len(report.failures)
    print(f"wrote {len(report.rows)} rows to {paths['rows']}" + (f" ({failed} cells failed)" if failed else ""))
    return EXIT_OK


def cmd_moments(args) -> int:
    mom = moments(_kernel(args.kernel), args.dim)
    print(f"C1={mom.c1:.6f} C2={mom.c2:.6f}")
    return EXIT_OK


def cmd_build(args) -> int:
    pts = read_points(args.points)
    g = build_graph(pts, _kernel(args.kernel), args.h, args.lam, args.dim)
    W = g.base_weights if args.base else g.reweighted_weights
    rows = write_edge_list(args.out, W)
    print(f"wrote {rows} edges to {args.out}")
    return EXIT_OK


def cmd_apply(args) -> int:
    pts = read_points(args.points)
    f = read_vertex_function(args.values, n=pts.shape[0])
    g = build_graph(pts, _kernel(args.kernel), args.h, args.lam, args.dim)
    if args.at is None:
        targets, f_at = pts, f
    else:
        targets = read_points(args.at)
        if targets.shape[1] != pts.shape[1]:
            raise UsageError("evaluation points and samples differ in dimension")
        if args.at_values is None:
            raise UsageError("--at requires --at-values")
        f_at = read_vertex_function(args.at_values, n=targets.shape[0])
    vals = [apply_laplacian(g, args.kind, x, f, fx) for x, fx in zip(targets, f_at)]
    write_vertex_function(args.out, vals)
    print(f"wrote {len(vals)} values to {args.out}")
    return EXIT_OK


def cmd_limits(args) -> int:
    try:
        model = mf.get_model(args.model)
        fn = get_function(args.function)
    except KeyError as exc:
        raise UsageError(str(exc).strip('"')) from None
    spec = LimitSpec.for_kernel(args.lam, _kernel(args.kernel), model)
    pts = read_points(args.points)
    if pts.shape[1] != model.ambient_dim:
        raise UsageError(f"model {model.name} needs {model.ambient_dim}-dimensional points")
    vals = [limit_at(spec, args.kind, fn, x) for x in pts]
    if args.out:
        write_vertex_function(args.out, vals)
    else:
        for i, v in enumerate(vals):
            print(f"{i},{fmt(v)}")
    return EXIT_OK


def cmd_converge(args) -> int:
    doc = load_config(args.config)
    cfg = config_from_dict(doc)
    return _run_experiment(cfg, doc["output_dir"], args.workers)


def cmd_preset(args) -> int:
    doc = dict(PRESETS[args.name])
    doc["seeds"] = args.seeds
    doc["output_dir"] = args.output_dir or args.name
    cfg = config_from_dict(doc)
    return _run_experiment(cfg, doc["output_dir"], args.workers)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="laplace-limits",
                                description="Reweighted neighborhood graph Laplacians and their continuum limits.")
    sub = p.add_subparsers(dest="command", required=True)

    def graph_opts(sp):
        sp.add_argument("--points", required=True, help="sample CSV with header x0,x1,...")
        sp.add_argument("--kernel", default="cubic_taper")
        sp.add_argument("--h", type=_positive_float, required=True, help="bandwidth")
        sp.add_argument("--lam", type=float, default=0.0, help="reweighting exponent")
        sp.add_argument("--dim", type=_positive_dim, required=True, help="intrinsic dimension m")

    sp = sub.add_parser("moments", help="kernel moments C1, C2")
    sp.add_argument("--kernel", default="cubic_taper", help=f"one of {', '.join(registered_kernels())}")
    sp.add_argument("--dim", type=_positive_dim, required=True)
    sp.set_defaults(func=cmd_moments)

    sp = sub.add_parser("build", help="build a neighborhood graph and export its edge list")
    graph_opts(sp)
    sp.add_argument("--base", action="store_true", help="export base weights instead of reweighted ones")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("apply", help="apply a graph Laplacian to sampled function values")
    graph_opts(sp)
    sp.add_argument("--values", required=True, help="vertex function CSV (i,value) on the samples")
    sp.add_argument("--kind", choices=KINDS, default="rw")
    sp.add_argument("--at", help="evaluate at these points instead of the samples")
    sp.add_argument("--at-values", help="function values at the --at points")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_apply)

    sp = sub.add_parser("limits", help="evaluate analytic limits at points of a model")
    sp.add_argument("--model", required=True, help=f"one of {', '.join(mf.registered_models())}")
    sp.add_argument("--function", required=True, help=f"one of {', '.join(registered_functions())}")
    sp.add_argument("--kernel", default="cubic_taper")
    sp.add_argument("--lam", type=float, default=0.0)
    sp.add_argument("--kind", choices=KINDS, default="rw")
    sp.add_argument("--points", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_limits)

    sp = sub.add_parser("converge", help="run a convergence experiment from a JSON config")
    sp.add_argument("config")
    sp.add_argument("--workers", type=int, default=None, help="worker threads (default: env or auto)")
    sp.set_defaults(func=cmd_converge)

    sp = sub.add_parser("preset", help="run one of the built-in n=2500 setups")
    sp.add_argument("name", choices=sorted(PRESETS))
    sp.add_argument("--output-dir")
    sp.add_argument("--seeds", type=int, nargs="+", default=[0])
    sp.add_argument("--workers", type=int, default=None)
    sp.set_defaults(func=cmd_preset)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, DataFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IsolatedVertexError, EmptyNeighborhoodError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, KeyError) as exc:
        print(f"error: {str(exc).strip(chr(34))}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
