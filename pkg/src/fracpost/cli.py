"""Experiment driver: manufactured examples, N sweeps, convergence orders, CSV/JSON output."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (ConfigError, ProblemSpec, RunConfig, auto_grading, check, load_run_config,
                   make_graded_time_mesh, make_uniform_space_mesh)
from .estimators import compute_report
from .l1_stepper import march

log = logging.getLogger(__name__)

COLUMNS = ("alpha", "N", "M", "r", "Eu", "order_Eu", "Eta", "order_Eta", "EU", "order_EU",
           "Ef", "order_Ef", "EUhat", "order_EUhat", "EW", "order_EW",
           "thm1", "thm3", "thm5", "thm7", "walltime_ms")
ORDERED = ("Eu", "Eta", "EU", "Ef", "EUhat", "EW")
EXAMPLES = {1: ("smooth", "uniform"), 2: ("nonsmooth", "uniform"), 3: ("nonsmooth", "auto")}


def _one(x):
    return np.ones_like(np.asarray(x, dtype=float))


def example_problem(example_id: str, alpha: float, T: float = 1.0,
                    theta: float = math.pi / 4) -> ProblemSpec:
    """Built-in manufactured problems with A = 1 and u0 = x(1-x)."""
    g = math.gamma
    if example_id == "smooth":
        c = g(3) / g(3 - alpha)
        src = lambda x, t: c * t ** (2 - alpha) * x * (1 - x) + 2 * (1 + t ** 2)
        ex = lambda x, t: (1 + t ** 2) * x * (1 - x)
    elif example_id == "nonsmooth":
        c = g(alpha + 1)
        src = lambda x, t: c * x * (1 - x) + 2 * (1 + t ** alpha)
        ex = lambda x, t: (1 + t ** alpha) * x * (1 - x)
    else:
        raise ConfigError(f"no built-in problem for example_id={example_id!r}",
                          [("example_id", example_id, "needs a user-supplied ProblemSpec")])
    return ProblemSpec(alpha=alpha, T=T, diffusion=_one, source=src,
                       initial=lambda x: x * (1 - x), exact=ex, theta=theta,
                       diffusion_prime=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                       name=example_id)


def grading_exponent(mode, alpha: float) -> float:
    if mode == "uniform":
        return 1.0
    if mode == "auto":
        return auto_grading(alpha)
    return float(mode)


@dataclass
class TableRow:
    alpha: float
    N: int
    M: int
    r: float
    values: dict
    orders: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    walltime_ms: Optional[float] = None
    warning: str = ""
    extra: dict = field(default_factory=dict)


def run_example(example_id, alpha: float, N: int, M: int = 512, grading_mode="uniform",
                T: float = 1.0, theta: float = math.pi / 4, spec: ProblemSpec = None) -> TableRow:
    if isinstance(example_id, int):
        example_id = EXAMPLES[example_id][0]
    t0 = time.perf_counter()
    stage = "setup"
    try:
        spec = spec or example_problem(example_id, alpha, T, theta)
        check(spec)
        r = grading_exponent(grading_mode, spec.alpha)
        tmesh = make_graded_time_mesh(spec.T, N, r)
        smesh = make_uniform_space_mesh(M)
        stage = "march"
        traj = march(spec, tmesh, smesh)
        stage = "estimators"
        rep = compute_report(spec, traj)
    except Exception as exc:
        raise RuntimeError(f"[{stage}] alpha={alpha} N={N}: {exc}") from exc
    ms = (time.perf_counter() - t0) * 1e3
    values = {k: getattr(rep, k) for k in ORDERED}
    bounds = {k: getattr(rep, k) for k in ("thm1", "thm3", "thm5", "thm7")}
    extra = {"EW_full": rep.EW_full, "cor1": rep.cor1, "cor2": rep.cor2,
             "thm2_T": rep.thm2_T, "thm4_T": rep.thm4_T, "thm6_T": rep.thm6_T,
             "thm8_T": rep.thm8_T, "effectivity": rep.effectivity()}
    return TableRow(alpha=spec.alpha, N=N, M=M, r=r, values=values, bounds=bounds,
                    walltime_ms=ms, extra=extra)


def attach_orders(rows: list) -> list:
    """log2(e_N / e_2N) between consecutive rows sharing (alpha, M, r)."""
    groups: dict = {}
    for row in rows:
        groups.setdefault((row.alpha, row.M, row.r), []).append(row)
    for grp in groups.values():
        for prev, cur in zip(grp, grp[1:]):
            if cur.N != 2 * prev.N:
                cur.warning = f"N={cur.N} is not double N={prev.N}; orders omitted"
                log.warning(cur.warning)
                continue
            for key in ORDERED:
                a, b = prev.values.get(key), cur.values.get(key)
                if a and b and a > 0 and b > 0:
                    cur.orders[key] = math.log2(a / b)
    return rows


def _cell(args):
    return run_example(*args)


def sweep(cfg: RunConfig, jobs: int = 1) -> list:
    if cfg.example_id == "custom":
        raise ConfigError("custom problems are supported through run_example(spec=...) only",
                          [("example_id", "custom", "no built-in data")])
    cells = [(cfg.example_id, a, N, cfg.M, cfg.grading_mode, cfg.T, cfg.theta)
             for a in cfg.alpha for N in cfg.N_list]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_cell, cells))
    else:
        rows = [_cell(c) for c in cells]
    return attach_orders(rows)


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return ""
    return f"{v:.4E}"


def _fmt_plain(v) -> str:
    return f"{v:.5g}"


def row_record(row: TableRow, timing: bool = False) -> dict:
    rec = {"alpha": _fmt_plain(row.alpha), "N": str(row.N), "M": str(row.M), "r": _fmt_plain(row.r)}
    for key in ORDERED:
        rec[key] = _fmt(row.values.get(key))
        rec["order_" + key] = _fmt(row.orders.get(key))
    for key in ("thm1", "thm3", "thm5", "thm7"):
        rec[key] = _fmt(row.bounds.get(key))
    rec["walltime_ms"] = _fmt(row.walltime_ms) if timing else ""
    return {c: rec[c] for c in COLUMNS}


def emit(rows: list, fmt: str = "csv", path: Optional[str] = None, timing: bool = False) -> str:
    """Serialize rows; wall time is left blank unless ``timing`` so output is reproducible."""
    if not rows:
        raise ValueError("emit needs at least one row")
    recs = [row_record(r, timing) for r in rows]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(recs)
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps(recs, indent=1) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def _grading_arg(s: str):
    if s in ("uniform", "auto"):
        return s
    try:
        r = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError("grading must be uniform, auto or a number >= 1")
    if r < 1:
        raise argparse.ArgumentTypeError("grading exponent must be >= 1")
    return r


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracpost", description=__doc__)
    p.add_argument("--example", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--alpha", type=float, action="append")
    p.add_argument("--N", type=int, action="append")
    p.add_argument("--M", type=int, default=512)
    p.add_argument("--grading", type=_grading_arg, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None)
    p.add_argument("--theta", type=float, default=math.pi / 4)
    p.add_argument("--config", default=None, help="JSON RunConfig (overrides the flags above)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="fill the walltime_ms column")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.config:
            cfg = load_run_config(args.config)
        else:
            ex, grading = EXAMPLES[args.example]
            cfg = RunConfig(example_id=ex, N_list=tuple(args.N or (16, 32, 64, 128)), M=args.M,
                            grading_mode=args.grading if args.grading is not None else grading,
                            output={"format": args.format, "path": args.out},
                            alpha=tuple(args.alpha or (0.25, 0.5, 0.75)), theta=args.theta)
        rows = sweep(cfg, jobs=args.jobs)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    out = cfg.output or {}
    text = emit(rows, out.get("format", "csv"), out.get("path"), timing=args.timing)
    if not out.get("path"):
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
