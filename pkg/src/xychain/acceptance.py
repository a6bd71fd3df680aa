"""Exit checks for the engine, shared by ``xychain verify`` and the test suite.

Each check returns a :class:`CheckResult`; nothing here raises on a failed
criterion, so a report always covers every check.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from . import criticality as crit
from .ed.free_fermion import central_pair, free_fermion_finite
from .ed.states import ground_energy_gap, ground_state, reduced_pair_rho, thermal_state
from .pair_state import (assemble_rho, concurrence_closed, concurrence_wootters,
                         density_matrix_elements, z_general)
from .spectrum import ChainParams, correlator_table, table_from_values

ELEMENT_NAMES = ("x_plus", "x_minus", "y_plus", "y_minus", "z")


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


@lru_cache(maxsize=None)
def _tc_peak(m: int):
    return crit.tc_max(m)


def check_onset_fields() -> CheckResult:
    windows = {2: (0.499, 0.501), 3: (0.78, 0.82), 4: (0.88, 0.92)}
    found = {m: crit.entangled_field(m).location for m in windows}
    ok = all(lo <= found[m] <= hi for m, (lo, hi) in windows.items())
    detail = ", ".join(f"m={m}: {found[m]:.6f} in [{lo}, {hi}]" for m, (lo, hi) in windows.items())
    return CheckResult(1, "onset fields h_c^E", ok, detail)


def check_disentangled() -> CheckResult:
    worst = max(crit.witness(m, h, 0.0) for m in (2, 3, 4) for h in (0.0, 1.5))
    values = [crit.concurrence(m, h, 0.0) for m in (2, 3, 4) for h in (0.0, 1.5)]
    ok = worst < crit.ENTANGLED and all(v == 0.0 for v in values)
    return CheckResult(2, "no entanglement at h=0 and h=1.5J (T=0)", ok,
                       f"max witness {worst:.3e} (< 1e-12 required)")


def check_tc_peak_location() -> CheckResult:
    peak = _tc_peak(2)
    ok = abs(peak.h_star - 1.0) <= 0.01
    return CheckResult(3, "T_c peak at h_c (m=2)", ok,
                       f"h* = {peak.h_star:.4f}, T_c* = {peak.tc_star:.6f}")


def check_tc_peak_ratios() -> CheckResult:
    t2, t3, t4 = (_tc_peak(m).tc_star for m in (2, 3, 4))
    r23, r34 = t2 / t3, t3 / t4
    ok = 2.55 <= r23 <= 3.45 and 2.55 <= r34 <= 3.45
    return CheckResult(4, "T_c peak ratios ~3", ok,
                       f"T_c*(2)/T_c*(3) = {r23:.3f}, T_c*(3)/T_c*(4) = {r34:.3f} (need [2.55, 3.45])")


def check_double_tc() -> CheckResult:
    two = crit.critical_temperatures(2, 1.05)
    ok2 = len(two) == 2 and 0 < two[0].location < two[1].location
    far = {m: crit.critical_temperatures(m, 1.15) for m in (3, 4)}
    ok34 = all(len(r) == 0 for r in far.values())
    detail = (f"m=2 h=1.05: {[round(r.location, 6) for r in two]}; "
              + "; ".join(f"m={m} h=1.15: {[round(r.location, 6) for r in roots]}"
                          for m, roots in far.items())
              + " (expected none)")
    return CheckResult(5, "double T_c above h_c", ok2 and ok34, detail)


def _upper_tc(roots):
    falling = [r.location for r in roots if r.kind in ("tc_single", "tc_upper")]
    return max(falling) if falling else 0.0


def check_phase_topology(workers: int = 1) -> CheckResult:
    below = np.round(np.arange(0.5, 1.0 + 1e-9, 0.02), 10)
    above = np.round(np.arange(1.0, 1.1 + 1e-9, 0.02), 10)
    roots = dict(zip(below, crit._ordered_map(crit._roots_at, [(2, h, 1.0, crit.DEFAULT_TOL) for h in below], workers)))
    for h, r in zip(above, crit._ordered_map(crit._roots_at, [(2, h, 1.0, crit.DEFAULT_TOL) for h in above], workers)):
        roots.setdefault(h, r)
    single = [_upper_tc(roots[h]) for h in below]
    mono = all(b >= a for a, b in zip(single, single[1:]))
    lower = [(h, roots[h][0].location) for h in above if len(roots[h]) == 2]
    rising = len(lower) >= 2 and all(b[1] > a[1] for a, b in zip(lower, lower[1:]))
    upper = [_upper_tc(roots[h]) for h in above]
    variation = (max(upper) - min(upper)) / max(upper)
    ok = mono and rising and variation <= 0.10
    detail = (f"T_c non-decreasing on [0.5,1.0]: {mono}; T_c1 rising on (1.0,1.1] "
              f"({len(lower)} pts): {rising}; T_c2 variation {variation:.2%} (<= 10%)")
    return CheckResult(6, "phase boundary topology (m=2)", ok, detail)


def random_tables(count: int, seed: int = 7):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        f0 = rng.uniform(0.0, 1.0)
        yield table_from_values(np.concatenate(([f0], rng.uniform(-f0, f0, 4))))


def check_wick_identity(count: int = 10_000) -> CheckResult:
    worst = 0.0
    for table in random_tables(count):
        for m in (2, 3, 4):
            diff = abs(z_general(m, table) - density_matrix_elements(m, table).z)
            worst = max(worst, diff)
    return CheckResult(7, "Pfaffian Wick vs explicit Z polynomials", worst <= 1e-12,
                       f"max |diff| = {worst:.2e} over {count} tables (<= 1e-12)")


def jw_max_difference(N: int, h: float, T: float) -> float:
    params = ChainParams(h=h, T=T)
    ens = thermal_state(N, "open", params)
    ff = free_fermion_finite(N, params)
    worst = 0.0
    for m, el in ff.items():
        ed = reduced_pair_rho(ens, *central_pair(N, m)).elements(m)
        worst = max(worst, max(abs(getattr(ed, k) - getattr(el, k)) for k in ELEMENT_NAMES))
    return worst


def check_jw_exactness() -> CheckResult:
    worst = max(jw_max_difference(N, h, T)
                for N in (8, 10, 12) for h in (0.0, 0.5, 1.0, 1.5) for T in (0.1, 0.5, 1.0))
    return CheckResult(8, "spin ED vs open-chain free fermions", worst <= 1e-8,
                       f"max element difference {worst:.2e} (<= 1e-8)")


INSET_GRID = np.round(np.arange(0.3, 1.0 - 1e-9, 0.02), 10)
CROSSING_WINDOW = 1e-3


def inset_curve(N: int, bc: str = "periodic", m: int = 2, grid=INSET_GRID):
    """Zero-T concurrence of a distance-``m`` pair and a keep-mask that drops
    fields within ``CROSSING_WINDOW`` of a ground-state level crossing."""
    i = 0 if bc == "periodic" else N // 2 - 1
    values, keep = [], []
    for h in grid:
        params = ChainParams(h=float(h))
        state = ground_state(N, bc, params)
        values.append(concurrence_wootters(reduced_pair_rho(state, i, i + m)).value)
        keep.append(ground_energy_gap(N, bc, params) > CROSSING_WINDOW and not state.degenerate)
    return np.array(values), np.array(keep)


def check_lanczos_inset(bc: str = "periodic") -> CheckResult:
    exact = np.array([crit.concurrence(2, h, 0.0) for h in INSET_GRID])
    curves = {N: inset_curve(N, bc) for N in (16, 20)}
    keep = curves[16][1] & curves[20][1]
    dist = {N: math.sqrt(np.mean((c - exact)[keep] ** 2)) for N, (c, _) in curves.items()}
    window = {}
    steps = {}
    for N, (c, _) in curves.items():
        window[N] = bool(c[0] == 0.0 and np.any(c > 0))
        # a plateau shows up as repeated values between crossings
        steps[N] = len(set(np.round(c[c > 0], 10))) < np.count_nonzero(c > 0)
    ok = all(window.values()) and all(steps.values()) and dist[20] < dist[16]
    detail = (f"{bc}: L2 distance N=16 {dist[16]:.4f}, N=20 {dist[20]:.4f}; "
              f"window {window}; plateaus {steps}; {int(keep.sum())} fields kept")
    return CheckResult(9, "Lanczos inset (N=16 vs 20)", ok, detail)


def random_physical_draws(count: int, seed: int = 11):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield int(rng.integers(1, 5)), rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)


def check_closed_vs_wootters(count: int = 10_000) -> CheckResult:
    worst = 0.0
    for m, h, T in random_physical_draws(count):
        el = density_matrix_elements(m, correlator_table(m, ChainParams(h=h, T=T)))
        diff = abs(concurrence_closed(el).value - concurrence_wootters(assemble_rho(el)).value)
        worst = max(worst, diff)
    return CheckResult(10, "closed-form vs Wootters concurrence", worst <= 1e-9,
                       f"max |diff| = {worst:.2e} over {count} draws (<= 1e-9)")


CHECKS: dict[int, Callable[[], CheckResult]] = {
    1: check_onset_fields,
    2: check_disentangled,
    3: check_tc_peak_location,
    4: check_tc_peak_ratios,
    5: check_double_tc,
    6: check_phase_topology,
    7: check_wick_identity,
    8: check_jw_exactness,
    9: check_lanczos_inset,
    10: check_closed_vs_wootters,
}


def run_check(number: int, **kwargs) -> CheckResult:
    start = time.perf_counter()
    result = CHECKS[number](**kwargs)
    result.seconds = time.perf_counter() - start
    return result


def run_all(numbers=None, workers: int = 1, report=print) -> list[CheckResult]:
    results = []
    for n in numbers or sorted(CHECKS):
        kwargs = {"workers": workers} if n == 6 else {}
        res = run_check(n, **kwargs)
        if report:
            report(res.line())
        results.append(res)
    return results
