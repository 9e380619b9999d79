"""Convergence experiments written as CSV rows.

``b1``  criterion B_u of CBC rules versus m;
``f1``  integration error of the f1 test function;
``f2``, ``f3``  integration error of f2 / f3 for CBC rules built with r = 1,
compared against the unscrambled Sobol' sequence.

One CBC rule is built per (r, m) for the largest requested s; rules for
smaller s are its prefixes, which CBC produces unchanged.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable

from .cbc import CbcResult, cbc_construct, choose_interlacing
from .criterion import WeightProfile, wce_bound
from .lattice import MAX_EXACT_BITS, generate_point_set
from .quadrature import abs_error, make_integrand, sobol_capacity, sobol_points, SOBOL_BITS

__all__ = [
    "EXPERIMENTS",
    "COLUMNS",
    "DEFAULT_R",
    "DEFAULT_S",
    "DEFAULT_W",
    "DEFAULT_M",
    "Grid",
    "run_experiment",
    "rows_to_csv",
    "worker_count",
]

EXPERIMENTS = ("b1", "f1", "f2", "f3")
COLUMNS = ("experiment", "b", "r", "w", "s", "m", "d", "N", "B_u", "wce_bound", "abs_error", "baseline")
DEFAULT_R = (0.5, 1.0, 2.0)
DEFAULT_S = (1, 2, 4, 8, 16)
DEFAULT_W = (0.5, 0.1)
DEFAULT_M = tuple(range(1, 16))
BASELINE_R = 1.0  # construction weights used for f2 / f3


def worker_count() -> int:
    """Workers allowed by QMC_IPL_THREADS (default 1)."""
    raw = os.environ.get("QMC_IPL_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"QMC_IPL_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"QMC_IPL_THREADS must be a positive integer, got {raw!r}")
    return min(n, os.cpu_count() or 1)


@dataclass(frozen=True)
class Grid:
    b: int = 2
    r: tuple[float, ...] = DEFAULT_R
    s: tuple[int, ...] = DEFAULT_S
    m: tuple[int, ...] = DEFAULT_M
    w: tuple[float, ...] = DEFAULT_W
    d: int | None = None
    mode: str = "fast"
    allow_extended: bool = False

    def interlacing(self, m: int, r: float) -> int:
        return self.d if self.d is not None else choose_interlacing(m, r)

    def admissible(self, m: int, r: float) -> bool:
        """dm digits must fit binary64 unless extended output is allowed."""
        return self.allow_extended or self.interlacing(m, r) * m * math.log2(self.b) <= MAX_EXACT_BITS


def _build(args) -> CbcResult:
    b, m, s, d, r, mode = args
    return cbc_construct(b, m, s, d, WeightProfile(b, r=r), mode=mode)


def _build_all(tasks: list[tuple], workers: int) -> list[CbcResult]:
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_build, tasks))
    return [_build(t) for t in tasks]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def run_experiment(name: str, grid: Grid = Grid(), workers: int = 1) -> list[dict]:
    if name not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {name!r}; expected one of {', '.join(EXPERIMENTS)}")
    if not grid.s or not grid.m or any(s < 1 for s in grid.s) or any(m < 1 for m in grid.m):
        raise ValueError("invalid grid: s and m values must be positive and non-empty")
    r_values = grid.r if name in ("b1", "f1") else (BASELINE_R,)
    if name in ("f2", "f3") and (not grid.w or any(not w > 0 for w in grid.w)):
        raise ValueError("invalid grid: w values must be positive")
    s_max = max(grid.s)
    s_values = sorted(set(grid.s))

    keys = [(r, m) for r in r_values for m in sorted(set(grid.m)) if grid.admissible(m, r)]
    if not keys:
        raise ValueError("invalid grid: no (r, m) pair satisfies d*m <= 52; pass --allow-extended")
    tasks = [(grid.b, m, s_max, grid.interlacing(m, r), r, grid.mode) for r, m in keys]
    rules = dict(zip(keys, _build_all(tasks, workers)))

    rows = []
    for (r, m), res in rules.items():
        spec = res.spec
        x = None
        if name != "b1":
            x = generate_point_set(spec).to_float(allow_extended=grid.allow_extended)
        for s in s_values:
            sub = spec.prefix(s)
            B = res.trace[spec.d * s - 1].B_u
            wce = wce_bound(sub, B=B).wce_bound
            base = {"experiment": name, "b": grid.b, "r": r, "w": None, "s": s, "m": m,
                    "d": spec.d, "N": spec.n_points, "B_u": B, "wce_bound": wce,
                    "abs_error": None, "baseline": "ipl"}
            if name == "b1":
                rows.append(base)
            elif name == "f1":
                rows.append({**base, "abs_error": abs_error(make_integrand("f1", s, r=r), x[:, :s])})
            else:
                for w in grid.w:
                    err = abs_error(make_integrand(name, s, w=w), x[:, :s])
                    rows.append({**base, "w": w, "abs_error": err})

    if name in ("f2", "f3"):
        for m in sorted(set(grid.m)):
            if m > SOBOL_BITS or s_max > sobol_capacity():
                continue
            pts = sobol_points(s_max, m)
            for s in s_values:
                for w in grid.w:
                    err = abs_error(make_integrand(name, s, w=w), pts[:, :s])
                    rows.append({"experiment": name, "b": 2, "r": None, "w": w, "s": s, "m": m,
                                 "d": None, "N": 2 ** m, "B_u": None, "wce_bound": None,
                                 "abs_error": err, "baseline": "sobol"})
    return rows


def rows_to_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in COLUMNS])
    return buf.getvalue()
