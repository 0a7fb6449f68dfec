"""Command-line front end.

Commands: find-kernel, classify, solve, render, sweep.  Artifacts are JSON
(machine-readable records) and CSV (surface profiles).  The log level is
taken from the TRIMODAL_LOG environment variable.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io, solver
from .errors import (AdmissibilityViolation, DegenerateTriple, NewtonDivergence,
                     NoThirdMode, TrimodalError)
from .grid import MAX_MODES, MAX_NS, MIN_NS, Grid
from .kernel_finder import attach_third_mode, transversality
from .modal_classes import classify, region_contains

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_THIRD_MODE = 2
EXIT_NOT_TRANSVERSAL = 3
EXIT_DIVERGED = 4
EXIT_USAGE = 64
EXIT_DEGENERATE = 65

log = logging.getLogger("trimodal")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    tol: float = solver.DEFAULT_TOL
    grid_modes: int = 64
    grid_s: int = 48
    delta: float = solver.DEFAULT_DELTA
    out_dir: Path | None = None
    seed: int = 0

    def validate(self):
        if not self.tol > 0:
            raise UsageError("--tol must be positive")
        if not 1 <= self.grid_modes <= MAX_MODES:
            raise UsageError(f"--grid-modes must lie in [1, {MAX_MODES}]")
        if not MIN_NS <= self.grid_s <= MAX_NS:
            raise UsageError(f"--grid-s must lie in [{MIN_NS}, {MAX_NS}]")
        if not 0 < self.delta < 1:
            raise UsageError("--delta must lie in (0, 1)")

    def grid(self) -> Grid:
        return Grid(self.grid_modes, self.grid_s)

    def as_dict(self) -> dict:
        return {"command": self.command, "tol": self.tol, "grid_modes": self.grid_modes,
                "grid_s": self.grid_s, "delta": self.delta, "seed": self.seed}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _global_flags(p: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--tol", type=float, default=d(solver.DEFAULT_TOL),
                   help="Newton residual tolerance")
    p.add_argument("--grid-modes", type=int, default=d(64), help="cosine modes in q")
    p.add_argument("--grid-s", type=int, default=d(48), help="intervals in s")
    p.add_argument("--delta", type=float, default=d(solver.DEFAULT_DELTA),
                   help="cone parameter for admissibility reports")
    p.add_argument("--out-dir", type=Path, default=d(None), help="directory for artifacts")
    p.add_argument("--seed", type=int, default=d(0), help="recorded in run metadata")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trimodal", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    common = _Parser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("find-kernel", parents=[common], help="locate a 3D kernel")
    p.add_argument("k", type=int, nargs=3)
    p.add_argument("--lam", type=float, default=math.pi / 2, help="laminar phase lambda")
    p.add_argument("--route", choices=("auto", "closed-form", "traced"), default="auto")

    p = sub.add_parser("classify", parents=[common], help="case of a wavenumber triple")
    p.add_argument("k", type=int, nargs=3)

    p = sub.add_parser("solve", parents=[common], help="solve for one amplitude triple")
    p.add_argument("spec", type=Path)
    p.add_argument("--t", type=float, nargs=3, required=True)
    p.add_argument("--samples", type=int, default=2048)

    p = sub.add_parser("render", parents=[common], help="surface profiles from branch points")
    p.add_argument("points", type=Path, nargs="+")
    p.add_argument("--samples", type=int, default=2048)

    p = sub.add_parser("sweep", parents=[common], help="branch points along a ray in t")
    p.add_argument("spec", type=Path)
    p.add_argument("--direction", type=float, nargs=3, required=True)
    p.add_argument("--h-max", type=float, required=True)
    p.add_argument("--steps", type=int, default=10)
    return parser


def _emit(cfg: RunConfig, name: str, text: str, stdout: bool = False):
    if cfg.out_dir is not None:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        path = cfg.out_dir / name
        path.write_text(text)
        log.info("wrote %s", path)
    if stdout or cfg.out_dir is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _read_spec(path: Path):
    try:
        return io.spec_from(json.loads(path.read_text()))
    except (OSError, KeyError, ValueError) as exc:
        raise UsageError(f"cannot read kernel spec {path}: {exc}") from exc


def _branch_record(bp: solver.BranchPoint, spec, cfg: RunConfig) -> dict:
    return {
        "wavenumbers": list(spec.wavenumbers),
        "t": list(bp.t),
        "params": io.params_dict(bp.params),
        "residual": bp.residual_norm,
        "iterations": bp.newton_iters,
        "admissible": bp.admissible,
        "config": cfg.as_dict(),
        "field": io.field_dict(bp.field),
    }


def cmd_find_kernel(args, cfg: RunConfig) -> int:
    k1, k2, k3 = sorted(args.k)
    spec = attach_third_mode(k1, k2, k3, lam=args.lam, route=args.route)
    report = transversality(spec)
    doc = io.spec_dict(spec, report)
    _emit(cfg, f"spec_{k1}_{k2}_{k3}.json", io.dumps(doc), stdout=True)
    if not report.certified:
        log.error("transversality not certified for %s", spec.wavenumbers)
        return EXIT_NOT_TRANSVERSAL
    return EXIT_OK


def cmd_classify(args, cfg: RunConfig) -> int:
    mc = classify(args.k)
    k = " ".join(str(x) for x in args.k)
    red = " ".join(str(x) for x in mc.reduced)
    print(f"{'triple':<14}{'case':<7}{'gcd':<5}{'relabeled':<14}region (d = delta)")
    print(f"{k:<14}{mc.case.value:<7}{mc.divisor:<5}{red:<14}{mc.region_text}")
    return EXIT_OK


def cmd_solve(args, cfg: RunConfig) -> int:
    spec = _read_spec(args.spec)
    grid = cfg.grid()
    opts = solver.SolverOptions(tol=cfg.tol, delta=cfg.delta)
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", AdmissibilityViolation)
        bp = solver.solve_branch_point(spec, args.t, grid, opts)
    for w in caught:
        log.warning("%s", w.message)
    log.info("solved in %.2fs", time.perf_counter() - start)
    rec = _branch_record(bp, spec, cfg)
    stem = "branch_" + "_".join("%.6g" % x for x in bp.t)
    summary = {k: v for k, v in rec.items() if k != "field"}
    if cfg.out_dir is not None:
        _emit(cfg, stem + ".json", io.dumps(rec))
        q, height = solver.surface_profile(bp, args.samples)
        _emit(cfg, stem + ".csv", io.profile_csv(q, height))
    sys.stdout.write(io.dumps(summary) + "\n")
    return EXIT_OK


def cmd_render(args, cfg: RunConfig) -> int:
    for path in args.points:
        try:
            rec = json.loads(path.read_text())
            w = io.field_from(rec["field"])
        except (OSError, KeyError, ValueError) as exc:
            raise UsageError(f"cannot read branch point {path}: {exc}") from exc
        bp = solver.BranchPoint(tuple(rec["t"]), w, io.params_from(rec["params"]),
                                rec["residual"], rec["iterations"])
        q, height = solver.surface_profile(bp, args.samples)
        out = cfg.out_dir or path.parent
        cfg_out = RunConfig("render", out_dir=out)
        _emit(cfg_out, path.stem + "_profile.csv", io.profile_csv(q, height))
    return EXIT_OK


def cmd_sweep(args, cfg: RunConfig) -> int:
    spec = _read_spec(args.spec)
    d = np.asarray(args.direction, dtype=float)
    if not np.linalg.norm(d) > 0:
        raise UsageError("--direction must be nonzero")
    d = d / np.linalg.norm(d)
    opts = solver.SolverOptions(tol=cfg.tol, delta=cfg.delta)
    points, truncated = solver.continue_in_amplitude(spec, d, args.h_max, args.steps,
                                                     cfg.grid(), opts)
    rows = [{"t": list(bp.t), "params": io.params_dict(bp.params),
             "residual": bp.residual_norm, "iterations": bp.newton_iters,
             "admissible": region_contains(spec.wavenumbers, bp.t, cfg.delta)}
            for bp in points]
    doc = {"wavenumbers": list(spec.wavenumbers), "direction": d, "h_max": args.h_max,
           "steps": args.steps, "truncated": truncated,
           "largest_amplitude": float(np.linalg.norm(points[-1].t)) if points else 0.0,
           "points": rows, "config": cfg.as_dict()}
    _emit(cfg, "sweep.json", io.dumps(doc), stdout=True)
    return EXIT_DIVERGED if not points else EXIT_OK


COMMANDS = {"find-kernel": cmd_find_kernel, "classify": cmd_classify, "solve": cmd_solve,
            "render": cmd_render, "sweep": cmd_sweep}


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("TRIMODAL_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        cfg = RunConfig(args.command, args.tol, args.grid_modes, args.grid_s, args.delta,
                        args.out_dir, args.seed)
        cfg.validate()
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"trimodal: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateTriple as exc:
        print(f"trimodal: degenerate triple: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except NoThirdMode as exc:
        print(f"trimodal: no third mode: {exc}", file=sys.stderr)
        return EXIT_NO_THIRD_MODE
    except NewtonDivergence as exc:
        print(f"trimodal: Newton diverged after {exc.iterations} iterations: {exc}",
              file=sys.stderr)
        return EXIT_DIVERGED
    except (TrimodalError, ValueError) as exc:
        print(f"trimodal: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
