"""``affdim`` command line entry point.

Exit status: 0 on success, 2 when the input is refused (parse or hypothesis
failure), 1 on internal errors. Errors are written to stderr as JSON.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .attractor import emit_attractor
from .cone_validate import (check_irreducible, check_omega, estimate_jsr_upper,
                            find_invariant_cone)
from .ifs_model import InvalidSystemError, Mat2, parse_system
from .pressure import (ValidationError, affinity_dimension, brute_force_pressure,
                       derivative, spectral_pressure, sweep)
from .transfer import OmegaViolation

SWEEP_HEADER = ["param_index", "param_value", "s0", "residual", "order_used", "status"]


@dataclass
class RunConfig:
    subcommand: str
    input: str
    s: Optional[float] = None
    tol: float = 1e-12
    max_order: int = 256
    word_len: int = 12
    method: Optional[str] = None
    wrt: str = "s"
    sweep_param: Optional[int] = None
    sweep_from: Optional[float] = None
    sweep_to: Optional[float] = None
    sweep_steps: Optional[int] = None
    output_format: str = "json"
    out: Optional[str] = None
    seed: int = 0
    points: int = 1000
    threads: int = 1

    def validate(self) -> None:
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        n = self.max_order
        if not (8 <= n <= 4096 and n & (n - 1) == 0):
            raise ValueError("max order must be a power of 2 between 8 and 4096")


def _jsonable(obj):
    if isinstance(obj, Mat2):
        return [[_jsonable(obj.a), _jsonable(obj.b)], [_jsonable(obj.c), _jsonable(obj.d)]]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        obj = complex(obj)
        return _jsonable(obj.real) if obj.imag == 0 else [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def _emit(doc, stream=None) -> None:
    # json renders floats with the shortest repr that round-trips exactly
    (stream or sys.stdout).write(json.dumps(_jsonable(doc), indent=2) + "\n")


def _fmt(x) -> str:
    if isinstance(x, float):
        return "nan" if math.isnan(x) else format(x, ".17g")
    return str(x)


def _write_csv(rows, header, out: Optional[str]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    if out:
        Path(out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _parse_index(text: str, prefix: str = "t:") -> int:
    if not text.startswith(prefix):
        raise ValueError(f"expected {prefix}<k>, got {text!r}")
    return int(text[len(prefix):])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="affdim", description="Affinity dimension of planar "
                                "affine IFSs with cone-preserving linear parts.")
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap for sweeps (falls back to AFFDIM_THREADS)")
    sub = p.add_subparsers(dest="subcommand", required=True)

    v = sub.add_parser("validate", help="check the standing hypotheses")
    v.add_argument("file")

    pr = sub.add_parser("pressure", help="sub-additive pressure at one s")
    pr.add_argument("file")
    pr.add_argument("--s", type=float, required=True)
    pr.add_argument("--method", choices=["spectral", "brute"], default="spectral")
    pr.add_argument("--order", type=int, default=256, help="largest truncation order")
    pr.add_argument("--word-len", type=int, default=12)
    pr.add_argument("--tol", type=float, default=1e-12)

    d = sub.add_parser("dimension", help="affinity dimension")
    d.add_argument("file")
    d.add_argument("--tol", type=float, default=1e-12)
    d.add_argument("--max-order", type=int, default=256)

    dv = sub.add_parser("derivative", help="derivative of the pressure")
    dv.add_argument("file")
    dv.add_argument("--s", type=float, required=True)
    dv.add_argument("--wrt", default="s", help="s or t:<k>")
    dv.add_argument("--method", choices=["perturbation", "complex-step", "central"],
                    default=None)

    sw = sub.add_parser("sweep", help="affinity dimension along one matrix entry")
    sw.add_argument("file")
    sw.add_argument("--param", required=True, help="t:<k>")
    sw.add_argument("--from", dest="lo", type=float, required=True)
    sw.add_argument("--to", dest="hi", type=float, required=True)
    sw.add_argument("--steps", type=int, required=True)
    sw.add_argument("--out")
    sw.add_argument("--tol", type=float, default=1e-12)

    at = sub.add_parser("attractor", help="chaos-game point cloud")
    at.add_argument("file")
    at.add_argument("--points", type=int, required=True)
    at.add_argument("--seed", type=int, required=True)
    at.add_argument("--out")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    threads = args.threads or int(os.environ.get("AFFDIM_THREADS", "1") or 1)
    cfg = RunConfig(subcommand=args.subcommand, input=args.file, threads=max(1, threads))
    sc = args.subcommand
    if sc == "pressure":
        cfg.s, cfg.method, cfg.max_order = args.s, args.method, args.order
        cfg.word_len, cfg.tol = args.word_len, args.tol
    elif sc == "dimension":
        cfg.tol, cfg.max_order = args.tol, args.max_order
    elif sc == "derivative":
        cfg.s, cfg.wrt = args.s, args.wrt
        cfg.method = args.method or ("complex-step" if args.wrt.startswith("t:")
                                     else "perturbation")
    elif sc == "sweep":
        cfg.sweep_param = _parse_index(args.param)
        cfg.sweep_from, cfg.sweep_to, cfg.sweep_steps = args.lo, args.hi, args.steps
        cfg.out, cfg.tol, cfg.output_format = args.out, args.tol, "csv"
    elif sc == "attractor":
        cfg.points, cfg.seed, cfg.out, cfg.output_format = args.points, args.seed, args.out, "csv"
    cfg.validate()
    return cfg


def run(cfg: RunConfig) -> int:
    system = parse_system(Path(cfg.input).read_text(encoding="utf-8"))
    sc = cfg.subcommand
    if sc == "validate":
        cone = find_invariant_cone(system)
        _emit({
            "omega": check_omega(system),
            "irreducible": check_irreducible(system),
            "cone": cone,
            "contraction": estimate_jsr_upper(system),
        })
    elif sc == "pressure":
        if cfg.method == "brute":
            res = brute_force_pressure(system, cfg.s, cfg.word_len)
        else:
            res = spectral_pressure(system, cfg.s, tol=cfg.tol, max_order=cfg.max_order)
        _emit(res)
    elif sc == "dimension":
        _emit(affinity_dimension(system, tol=cfg.tol, max_order=cfg.max_order))
    elif sc == "derivative":
        val = derivative(system, cfg.s, wrt=cfg.wrt, method=cfg.method, tol=cfg.tol,
                         max_order=cfg.max_order)
        _emit({"s": cfg.s, "wrt": cfg.wrt, "method": cfg.method, "value": val})
    elif sc == "sweep":
        rows = sweep(system, cfg.sweep_param, cfg.sweep_from, cfg.sweep_to, cfg.sweep_steps,
                     tol=cfg.tol, max_order=cfg.max_order, threads=cfg.threads)
        _write_csv([dataclasses.astuple(r) for r in rows], SWEEP_HEADER, cfg.out)
    elif sc == "attractor":
        cloud = emit_attractor(system, cfg.points, cfg.seed)
        _write_csv([tuple(p) for p in cloud.points.tolist()], ["x", "y"], cfg.out)
    return 0


def _error(kind: str, exc: Exception, **extra) -> None:
    doc = {"error": kind, "message": str(exc)}
    doc.update({k: v for k, v in extra.items() if v is not None})
    _emit(doc, sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        _error("usage", exc)
        return 2
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return run(cfg)
    except (InvalidSystemError, ValidationError, OmegaViolation) as exc:
        _error("validation", exc, condition=getattr(exc, "condition", None))
        return 2
    except OSError as exc:
        _error("io", exc)
        return 2
    except (ValueError, IndexError) as exc:
        _error("invalid_request", exc)
        return 2
    except Exception as exc:  # noqa: BLE001
        _error("internal", exc, type=type(exc).__name__)
        return 1


if __name__ == "__main__":
    sys.exit(main())
