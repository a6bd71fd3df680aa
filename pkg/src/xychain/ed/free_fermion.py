"""Exact pair elements of a finite open chain from its single-particle spectrum.

On an open chain the Jordan-Wigner map has no boundary term, so the spin
chain is exactly a tridiagonal hopping problem (amplitude ``J/2``, on-site
``-h``).  Pair elements come from the same Wick/Pfaffian routines used for
the infinite chain.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import expit

from .. import wick
from ..errors import ParameterError
from ..pair_state import PairElements
from ..spectrum import ChainParams


def single_particle_energies(N: int, params: ChainParams):
    diag = np.full(N, -params.h)
    off = np.full(N - 1, 0.5 * params.J)
    return eigh_tridiagonal(diag, off)


def hopping_matrix(N: int, params: ChainParams) -> np.ndarray:
    """``G[p, q] = <a_p^dag a_q>`` of the open chain at temperature ``T``."""
    if N < 2:
        raise ParameterError(f"need at least two sites, got N = {N}")
    eps, u = single_particle_energies(N, params)
    if params.T == 0:
        # zero modes are half filled, the T -> 0 limit of the grand-canonical state
        tol = 1e-12 * params.J
        occ = np.where(eps < -tol, 1.0, np.where(eps > tol, 0.0, 0.5))
    else:
        occ = expit(-eps / params.T)
    return (u * occ) @ u.T


def central_pair(N: int, m: int) -> tuple[int, int]:
    if not 1 <= m < N:
        raise ParameterError(f"distance {m} does not fit in N = {N}")
    i = (N - 1 - m) // 2
    return i, i + m


def pair_elements_from_hopping(g: np.ndarray, i: int, j: int) -> PairElements:
    n_i, n_j = g[i, i], g[j, j]
    x_plus = wick.density_density(g, i, j)
    return PairElements(m=j - i, x_plus=x_plus, x_minus=1.0 - n_i - n_j + x_plus,
                        y_plus=n_i - x_plus, y_minus=n_j - x_plus,
                        z=wick.string_correlator(g, i, j))


def free_fermion_finite(N: int, params: ChainParams, bc: str = "open",
                        distances=(1, 2, 3, 4)) -> dict:
    """Pair elements of the central pair at each distance, keyed by distance."""
    if bc != "open":
        raise ParameterError("the free-fermion evaluator only covers open chains")
    g = hopping_matrix(N, params)
    return {m: pair_elements_from_hopping(g, *central_pair(N, m)) for m in distances}


def central_coefficients(N: int, params: ChainParams, n_max: int = 4) -> np.ndarray:
    """Finite-chain analogue of ``f_n``: ``<a_i^dag a_{i+n}>`` around the middle."""
    g = hopping_matrix(N, params)
    i = N // 2 - n_max // 2
    return np.array([g[i, i + n] for n in range(n_max + 1)])
