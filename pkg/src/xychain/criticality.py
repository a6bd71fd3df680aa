"""Critical fields, critical temperatures and T-h phase boundaries.

All root finding runs on the signed witness ``W = 2(|Z| - sqrt(X+ X-))``
rather than on ``C = max(0, W)``, which is flat on the unentangled side.
A point counts as entangled when ``W > ENTANGLED``.  Roots are bracketed on
a coarse scan and refined by bisection on that predicate, so narrow
re-entrant slivers thinner than the scan spacing are not resolved.
"""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, NamedTuple

import numpy as np

from .errors import NoOnsetError, ParameterError, XYChainError
from .pair_state import concurrence_closed, density_matrix_elements
from .spectrum import ChainParams, correlator_table

log = logging.getLogger(__name__)

ENTANGLED = 1e-12
FIELD_STEP = 1e-3
T_SCAN_MIN = 1e-4
T_SCAN_POINTS = 400
XTOL = 1e-10
KINDS = ("entangled_field", "tc_single", "tc_lower", "tc_upper")


@dataclass(frozen=True)
class Tolerances:
    """Numerical knobs of the root finders; all must be positive."""

    threshold: float = ENTANGLED
    xtol: float = XTOL
    field_step: float = FIELD_STEP
    T_points: int = T_SCAN_POINTS

    def __post_init__(self):
        for name in ("threshold", "xtol", "field_step"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"tolerance {name} must be positive, got {value!r}")
        if int(self.T_points) != self.T_points or self.T_points < 2:
            raise ParameterError(f"T_points must be an integer >= 2, got {self.T_points!r}")


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class CriticalPoint:
    kind: str
    location: float
    bracket: tuple
    residual_witness: float

    @property
    def width(self) -> float:
        return self.bracket[1] - self.bracket[0]


class BoundaryPoint(NamedTuple):
    h: float
    T_c: float
    branch: str
    residual_witness: float


@dataclass
class PhaseBoundary:
    m: int
    points: list = field(default_factory=list)
    root_counts: dict = field(default_factory=dict)

    def branch(self, label: str) -> list:
        return [p for p in self.points if p.branch == label]


class SweepRow(NamedTuple):
    h: float
    T: float
    m: int
    C: float
    W: float
    error: str = ""


class TcPeak(NamedTuple):
    h_star: float
    tc_star: float


def witness(m: int, h: float, T: float, J: float = 1.0) -> float:
    table = correlator_table(m, ChainParams(J=J, h=h, T=T))
    return float(concurrence_closed(density_matrix_elements(m, table)).witness)


def concurrence(m: int, h: float, T: float, J: float = 1.0) -> float:
    return max(0.0, witness(m, h, T, J))


def is_entangled(w: float, threshold: float = ENTANGLED) -> bool:
    return w > threshold


def _refine(pred: Callable[[float], bool], lo: float, hi: float, xtol: float = XTOL):
    """Shrink ``[lo, hi]`` keeping ``pred(lo) != pred(hi)``."""
    lo, hi = float(lo), float(hi)
    p_lo = pred(lo)
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pred(mid) == p_lo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _check_m(m):
    if int(m) != m or m < 1:
        raise ParameterError(f"distance m must be a positive integer, got {m!r}")
    return int(m)


def onset_fields(m: int, J: float = 1.0, tol: Tolerances = DEFAULT_TOL) -> list[CriticalPoint]:
    """Every unentangled -> entangled crossing of ``W(h)`` at ``T = 0`` on ``(0, J)``."""
    m = _check_m(m)
    step = tol.field_step * J
    grid = np.arange(0.0, J + 0.5 * step, step)
    w = np.array([witness(m, h, 0.0, J) for h in grid])
    flags = w > tol.threshold
    found = []
    pred = lambda h: is_entangled(witness(m, h, 0.0, J), tol.threshold)  # noqa: E731
    for i in np.flatnonzero(~flags[:-1] & flags[1:]):
        lo, hi = _refine(pred, grid[i], grid[i + 1], tol.xtol)
        loc = 0.5 * (lo + hi)
        found.append(CriticalPoint("entangled_field", loc, (lo, hi), witness(m, loc, 0.0, J)))
    if not found:
        scan_log = list(zip(grid.tolist(), w.tolist()))
        raise NoOnsetError(f"no entanglement onset for m = {m} on [0, {J}]", scan_log)
    if len(found) > 1:
        log.warning("m=%d: %d separate onsets at %s", m, len(found),
                    [round(p.location, 6) for p in found])
    return found


def entangled_field(m: int, J: float = 1.0, tol: Tolerances = DEFAULT_TOL) -> CriticalPoint:
    """Smallest zero-temperature field at which the pair at distance ``m`` entangles."""
    m = _check_m(m)
    if m == 1:
        w0 = witness(1, 0.0, 0.0, J)
        if is_entangled(w0, tol.threshold):
            return CriticalPoint("entangled_field", 0.0, (0.0, 0.0), w0)
    return onset_fields(m, J, tol)[0]


def temperature_grid(J: float = 1.0, points: int = T_SCAN_POINTS) -> np.ndarray:
    return np.geomspace(T_SCAN_MIN * J, 4.0 * J, points)


def critical_temperatures(m: int, h: float, J: float = 1.0,
                          tol: Tolerances = DEFAULT_TOL) -> list[CriticalPoint]:
    """All temperatures in ``[1e-4 J, 4 J]`` where the pair changes entanglement.

    A falling crossing (entangled below, not above) that is the only root and
    starts from an entangled low-T end is ``tc_single``; otherwise rising
    crossings are ``tc_lower`` and falling ones ``tc_upper``.
    """
    m = _check_m(m)
    if h < 0:
        raise ParameterError(f"h must be non-negative, got {h}")
    grid = temperature_grid(J, tol.T_points)
    pred = lambda T: is_entangled(witness(m, h, T, J), tol.threshold)  # noqa: E731
    flags = np.array([pred(T) for T in grid])
    roots = []
    for i in np.flatnonzero(flags[:-1] != flags[1:]):
        lo, hi = _refine(pred, grid[i], grid[i + 1], tol.xtol)
        loc = 0.5 * (lo + hi)
        kind = "tc_lower" if not flags[i] else "tc_upper"
        roots.append(CriticalPoint(kind, loc, (lo, hi), witness(m, h, loc, J)))
    if len(roots) == 1 and flags[0]:
        r = roots[0]
        roots[0] = CriticalPoint("tc_single", r.location, r.bracket, r.residual_witness)
    return roots


def single_branch_tc(m: int, h: float, J: float = 1.0, tol: Tolerances = DEFAULT_TOL) -> float:
    """``T_c`` when the pair is entangled from ``T -> 0`` up to a single root, else 0."""
    roots = critical_temperatures(m, h, J, tol)
    if len(roots) == 1 and roots[0].kind == "tc_single":
        return roots[0].location
    return 0.0


def tc_max(m: int, J: float = 1.0, h_hi: float | None = None, htol: float = 1e-3,
           tol: Tolerances = DEFAULT_TOL) -> TcPeak:
    """Golden-section maximum of the single-branch ``T_c(h)`` on ``[h_c^E, 1.2 J]``."""
    m = _check_m(m)
    a = entangled_field(m, J, tol).location
    b = 1.2 * J if h_hi is None else h_hi
    g = partial(single_branch_tc, m, J=J, tol=tol)
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    x1, x2 = b - inv * (b - a), a + inv * (b - a)
    g1, g2 = g(x1), g(x2)
    while b - a > htol:
        # ties move left: both points sit past the end of the single branch
        if g1 >= g2:
            b, x2, g2 = x2, x1, g1
            x1 = b - inv * (b - a)
            g1 = g(x1)
        else:
            a, x1, g1 = x1, x2, g2
            x2 = a + inv * (b - a)
            g2 = g(x2)
    h_star = 0.5 * (a + b)
    candidates = [(g1, x1), (g2, x2), (g(h_star), h_star)]
    tc_star, h_best = max(candidates)
    return TcPeak(h_best, tc_star)


def default_workers() -> int:
    env = os.environ.get("XYCHAIN_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _ordered_map(func, items, workers: int):
    if workers is None or workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items, chunksize=max(1, len(items) // (4 * workers))))


def _check_grid(name, grid, lo, hi):
    grid = [float(x) for x in grid]
    if not grid:
        raise ParameterError(f"{name} grid is empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ParameterError(f"{name} grid must be sorted")
    if grid[0] < lo or grid[-1] > hi:
        raise ParameterError(f"{name} grid must lie within [{lo}, {hi}]")
    return grid


def _sweep_point(args) -> SweepRow:
    m, h, T, J = args
    try:
        w = witness(m, h, T, J)
    except XYChainError as exc:
        return SweepRow(h, T, m, math.nan, math.nan, f"{exc.category}: {exc}")
    return SweepRow(h, T, m, max(0.0, w), w)


def sweep(m: int, h_grid, T_grid, J: float = 1.0, workers: int = 1) -> list[SweepRow]:
    """Concurrence and witness on the ``h x T`` grid, rows in h-major order."""
    m = _check_m(m)
    h_grid = _check_grid("h", h_grid, 0.0, 4.0 * J)
    T_grid = _check_grid("T", T_grid, 0.0, 4.0 * J)
    items = [(m, h, T, J) for h in h_grid for T in T_grid]
    return _ordered_map(_sweep_point, items, workers)


def _roots_at(args):
    m, h, J, tol = args
    return critical_temperatures(m, h, J, tol)


def phase_boundary(m: int, h_grid, J: float = 1.0, workers: int = 1,
                   tol: Tolerances = DEFAULT_TOL) -> PhaseBoundary:
    """Critical temperatures along ``h_grid``, labelled single/lower/upper."""
    m = _check_m(m)
    h_grid = _check_grid("h", h_grid, 0.0, 1.3 * J)
    per_field = _ordered_map(_roots_at, [(m, h, J, tol) for h in h_grid], workers)
    boundary = PhaseBoundary(m=m)
    labels = {"tc_single": "single", "tc_lower": "lower", "tc_upper": "upper"}
    for h, roots in zip(h_grid, per_field):
        boundary.root_counts[h] = len(roots)
        for r in roots:
            boundary.points.append(BoundaryPoint(h, r.location, labels[r.kind], r.residual_witness))
    counts = [boundary.root_counts[h] for h in h_grid]
    changes = [h for h, a, b in zip(h_grid[1:], counts, counts[1:]) if a != b]
    if changes:
        log.info("m=%d: root count changes near h = %s (scan resolution limited)", m, changes)
    return boundary
