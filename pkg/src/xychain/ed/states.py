"""Finite-chain ground states, thermal ensembles and pair reduced density matrices."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..errors import ParameterError
from ..pair_state import PairDensityMatrix
from ..spectrum import ChainParams
from .basis import MAX_SITES, SpinBasis, XYHamiltonian, bonds, spin_basis
from .lanczos import lanczos_ground

log = logging.getLogger(__name__)

MAX_THERMAL_SITES = 12
DEGENERACY_GAP = 1e-8


@dataclass(frozen=True, eq=False)
class SpinState:
    """A normalized pure state on one sector (or the full space) of ``N`` spins."""

    N: int
    bc: str
    basis: SpinBasis = field(repr=False)
    vector: np.ndarray = field(repr=False)
    energy: float
    degenerate: bool = False
    residual: float = 0.0

    def __post_init__(self):
        norm = np.linalg.norm(self.vector)
        if abs(norm - 1.0) > 1e-10:
            raise ParameterError(f"state norm {norm} differs from 1")
        if len(self.vector) != self.basis.dim:
            raise ParameterError("vector length does not match the basis")

    @property
    def sector(self):
        return self.basis.n_up


@dataclass(frozen=True, eq=False)
class SectorSpectrum:
    basis: SpinBasis
    energies: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True, eq=False)
class ThermalEnsemble:
    """Full spectrum of a small chain with Boltzmann populations at ``T``."""

    N: int
    bc: str
    params: ChainParams
    sectors: list = field(repr=False)
    populations: list = field(repr=False)
    log_partition: float = 0.0

    @property
    def partition_function(self) -> float:
        """``Z`` itself; ``inf`` when it overflows a double (use ``log_partition``)."""
        return math.exp(self.log_partition) if self.log_partition < 700 else math.inf

    def all_energies(self) -> np.ndarray:
        return np.sort(np.concatenate([s.energies for s in self.sectors]))

    def all_populations(self) -> np.ndarray:
        return np.concatenate(self.populations)


def _check_chain(N, bc, cap):
    if int(N) != N or not 2 <= N <= cap:
        raise ParameterError(f"N must be an integer in 2..{cap}, got {N!r}")
    bonds(int(N), bc)
    return int(N)


@lru_cache(maxsize=32)
def _sector_ground(N: int, n_up: int, bc: str, J: float):
    """Lowest state of the exchange term alone in one sector.

    The field term is constant on a sector, so the sector ground state does not
    depend on ``h``.
    """
    basis = spin_basis(N, n_up)
    ham = XYHamiltonian(basis, ChainParams(J=J, h=0.0), bc)
    result = lanczos_ground(ham.matvec, basis.dim)
    return basis, result


def sector_ground_states(N: int, bc: str = "periodic", J: float = 1.0) -> dict:
    """Exchange-only ground state for every sector with ``n_up >= N/2``."""
    N = _check_chain(N, bc, MAX_SITES)
    return {n: _sector_ground(N, n, bc, float(J)) for n in range(N // 2, N + 1)}


def ground_state(N: int, bc: str, params: ChainParams) -> SpinState:
    """Global ground state at field ``h >= 0``; near-degeneracies are flagged."""
    N = _check_chain(N, bc, MAX_SITES)
    sectors = sector_ground_states(N, bc, params.J)
    energies = {n: res.energy - params.h * (n - N / 2.0) for n, (_, res) in sectors.items()}
    order = sorted(energies, key=energies.get)
    best = order[0]
    basis, res = sectors[best]
    gap = min([res.gap] + [energies[n] - energies[best] for n in order[1:2]])
    degenerate = gap < DEGENERACY_GAP
    if degenerate:
        log.info("N=%d %s h=%g: ground state near-degenerate (gap %.2e)", N, bc, params.h, gap)
    return SpinState(N, bc, basis, res.vector, energies[best], degenerate, res.residual)


def ground_energy_gap(N: int, bc: str, params: ChainParams) -> float:
    """Gap between the two lowest sector ground energies at field ``h``."""
    sectors = sector_ground_states(N, bc, params.J)
    e = sorted(res.energy - params.h * (n - N / 2.0) for n, (_, res) in sectors.items())
    return e[1] - e[0]


def thermal_state(N: int, bc: str, params: ChainParams) -> ThermalEnsemble:
    """Full diagonalization, sector by sector; ``T = 0`` averages the ground manifold."""
    N = _check_chain(N, bc, MAX_THERMAL_SITES)
    sectors = []
    for n_up in range(N + 1):
        basis = spin_basis(N, n_up)
        ham = XYHamiltonian(basis, params, bc)
        e, v = np.linalg.eigh(ham.dense())
        sectors.append(SectorSpectrum(basis, e, v))
    e_min = min(s.energies[0] for s in sectors)
    if params.T == 0:
        weights = [(np.abs(s.energies - e_min) < DEGENERACY_GAP).astype(float) for s in sectors]
    else:
        weights = [np.exp(-(s.energies - e_min) / params.T) for s in sectors]
    z = math.fsum(math.fsum(w) for w in weights)
    populations = [w / z for w in weights]
    log_z = math.log(z) - e_min / params.T if params.T > 0 else math.log(z)
    return ThermalEnsemble(N, bc, params, sectors, populations, log_z)


def _local_index(up_i, up_j):
    return 2 * (1 - up_i) + (1 - up_j)


def _pair_terms(basis: SpinBasis, i: int, j: int):
    """For each (a, b) local configuration pair: rows ``s`` with config a and
    the index of ``s`` rewritten to config b (or -1 outside the basis)."""
    s = basis.states
    up_i = (s >> i) & 1
    up_j = (s >> j) & 1
    cfg = _local_index(up_i, up_j)
    cleared = s & ~((1 << i) | (1 << j))
    terms = []
    for b_i in (1, 0):
        for b_j in (1, 0):
            b = _local_index(b_i, b_j)
            target = basis.index(cleared | (b_i << i) | (b_j << j))
            terms.append((b, target))
    return cfg, terms


def reduced_pair_rho(source, i: int, j: int) -> PairDensityMatrix:
    """Two-site density matrix in the (uu, ud, du, dd) basis.

    ``rho[a, b] = sum_rest psi(a, rest) psi*(b, rest)``, averaged over the
    ensemble populations for a :class:`ThermalEnsemble`.
    """
    N = source.N
    if not (0 <= i < N and 0 <= j < N and i != j):
        raise ParameterError(f"invalid site pair ({i}, {j}) for N = {N}")
    rho = np.zeros((4, 4))
    if isinstance(source, SpinState):
        blocks = [(source.basis, source.vector[:, None], np.ones(1))]
    elif isinstance(source, ThermalEnsemble):
        blocks = [(s.basis, s.vectors, p) for s, p in zip(source.sectors, source.populations)]
    else:
        raise ParameterError(f"unsupported source {type(source).__name__}")
    for basis, vecs, pops in blocks:
        keep = pops > 0
        if not np.any(keep):
            continue
        vecs = vecs[:, keep]
        pops = pops[keep]
        cfg, terms = _pair_terms(basis, i, j)
        for b, target in terms:
            ok = target >= 0
            if not np.any(ok):
                continue
            rows = np.flatnonzero(ok)
            contrib = np.einsum("sn,n,sn->s", vecs[rows], pops, vecs[target[rows]].conj())
            rho[:, b] += np.bincount(cfg[rows], weights=contrib.real, minlength=4)
    return PairDensityMatrix(rho)


def spin_correlators(source, i: int, j: int):
    """``(<SxSx>, <SySy>, <SzSz>)`` for sites ``i`` and ``j``."""
    r = reduced_pair_rho(source, i, j).matrix
    flip = r[1, 2] + r[2, 1]
    double = r[0, 3] + r[3, 0]
    return ((flip + double) / 4.0, (flip - double) / 4.0,
            (r[0, 0] - r[1, 1] - r[2, 2] + r[3, 3]) / 4.0)


def magnetizations(source, i: int, j: int):
    """``(<Sz_i>, <Sz_j>)`` read off the pair density matrix."""
    r = reduced_pair_rho(source, i, j).matrix
    return ((r[0, 0] + r[1, 1] - r[2, 2] - r[3, 3]) / 2.0,
            (r[0, 0] - r[1, 1] + r[2, 2] - r[3, 3]) / 2.0)
