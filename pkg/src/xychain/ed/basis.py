"""Bit-pattern bases and the matrix-free XY Hamiltonian.

Site ``i`` is bit ``i`` of the state integer; a set bit is spin up.  Sector
bases are stored sorted, and the index of a pattern is recovered without a
search from two small tables over the low and high halves of the word.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from ..errors import InvariantError, ParameterError
from ..spectrum import ChainParams

MAX_SITES = 24
BOUNDARIES = ("open", "periodic")


def popcount(states: np.ndarray) -> np.ndarray:
    states = np.asarray(states, dtype=np.int64)
    count = np.zeros(states.shape, dtype=np.int64)
    s = states.copy()
    while np.any(s):
        count += s & 1
        s >>= 1
    return count


@dataclass(frozen=True, eq=False)
class SpinBasis:
    """Basis of ``N`` spins; ``n_up=None`` means the full ``2^N`` space."""

    N: int
    n_up: int | None
    states: np.ndarray = field(repr=False)
    _lo_rank: np.ndarray = field(repr=False)
    _hi_offset: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def sz(self) -> float | None:
        return None if self.n_up is None else self.n_up - self.N / 2

    def index(self, states) -> np.ndarray:
        """Positions of ``states`` in this basis; ``-1`` where absent."""
        states = np.asarray(states, dtype=np.int64)
        if self.n_up is None:
            return states.copy()
        half = self.N // 2
        idx = self._hi_offset[states >> half] + self._lo_rank[states & ((1 << half) - 1)]
        inside = (idx >= 0) & (idx < self.dim)
        idx = np.where(inside, idx, 0)
        hit = inside & (self.states[idx] == states)
        return np.where(hit, idx, -1)


@lru_cache(maxsize=64)
def spin_basis(N: int, n_up: int | None = None) -> SpinBasis:
    if not 1 <= N <= MAX_SITES:
        raise ParameterError(f"N must lie in 1..{MAX_SITES}, got {N}")
    if n_up is None:
        states = np.arange(1 << N, dtype=np.int64)
        empty = np.zeros(0, dtype=np.int64)
        return SpinBasis(N, None, states, empty, empty)
    if not 0 <= n_up <= N:
        raise ParameterError(f"n_up must lie in 0..{N}, got {n_up}")
    half = N // 2
    n_hi = N - half
    lo_patterns = np.arange(1 << half, dtype=np.int64)
    lo_pop = popcount(lo_patterns)
    lo_rank = np.zeros(1 << half, dtype=np.int64)
    for p in range(half + 1):
        sel = lo_pop == p
        lo_rank[sel] = np.arange(np.count_nonzero(sel))
    hi_patterns = np.arange(1 << n_hi, dtype=np.int64)
    need = n_up - popcount(hi_patterns)
    valid = (need >= 0) & (need <= half)
    sizes = np.where(valid, [comb(half, int(k)) if 0 <= k <= half else 0 for k in need], 0)
    hi_offset = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    chunks = [(hi << half) | lo_patterns[lo_pop == need[hi]]
              for hi in hi_patterns if valid[hi]]
    states = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
    if len(states) != comb(N, n_up):
        raise InvariantError("sector enumeration size mismatch")
    for arr in (states, lo_rank, hi_offset):
        arr.setflags(write=False)
    return SpinBasis(N, n_up, states, lo_rank, np.asarray(hi_offset, dtype=np.int64))


def bonds(N: int, bc: str) -> list[tuple[int, int]]:
    if bc not in BOUNDARIES:
        raise ParameterError(f"boundary condition must be one of {BOUNDARIES}, got {bc!r}")
    pairs = [(i, i + 1) for i in range(N - 1)]
    if bc == "periodic" and N > 2:
        pairs.append((N - 1, 0))
    return pairs


def field_diagonal(basis: SpinBasis, h: float) -> np.ndarray:
    """``-h * S^z_total`` on every basis state."""
    return -h * (popcount(basis.states) - basis.N / 2.0)


class XYHamiltonian:
    """``J sum (SxSx + SySy) - h sum Sz`` acting on one basis, matrix-free.

    The exchange is ``(J/2)(S+S- + S-S+)``: each bond with antiparallel spins
    swaps them with amplitude ``J/2``.
    """

    def __init__(self, basis: SpinBasis, params: ChainParams, bc: str = "periodic"):
        self.basis = basis
        self.params = params
        self.bc = bc
        self.bonds = bonds(basis.N, bc)
        self.diagonal = field_diagonal(basis, params.h)
        self._hops = None
        if basis.dim <= 1 << 20:
            self._hops = [self._bond_hops(b) for b in self.bonds]

    @property
    def shape(self):
        return (self.basis.dim, self.basis.dim)

    def _bond_hops(self, bond):
        i, j = bond
        s = self.basis.states
        src = np.flatnonzero(((s >> i) ^ (s >> j)) & 1)
        dst = self.basis.index(s[src] ^ ((1 << i) | (1 << j)))
        if np.any(dst < 0):
            raise InvariantError(f"bond {bond} leaves the S^z sector")
        return src, dst

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        if v.shape[0] != self.basis.dim:
            raise ParameterError(f"vector of length {v.shape[0]} on a basis of dimension {self.basis.dim}")
        out = self.diagonal * v if v.ndim == 1 else self.diagonal[:, None] * v
        amp = 0.5 * self.params.J
        hops = self._hops if self._hops is not None else (self._bond_hops(b) for b in self.bonds)
        for src, dst in hops:
            # the swap is a bijection on its support, so dst has no repeats
            out[dst] += amp * v[src]
        return out

    __matmul__ = matvec

    def dense(self) -> np.ndarray:
        return self.matvec(np.eye(self.basis.dim))


def apply_hamiltonian(vector: np.ndarray, basis: SpinBasis, params: ChainParams,
                      bc: str = "periodic") -> np.ndarray:
    return XYHamiltonian(basis, params, bc).matvec(vector)
