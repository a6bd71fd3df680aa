"""Wick contractions for number-conserving Gaussian fermion states.

An operator string ``c_1 c_2 ... c_2K``, each ``c = u a_s^dag + v a_s``, has
expectation ``Pf(M)`` with ``M[p, q] = <c_p c_q>`` for ``p < q``.  The state
enters only through the hopping matrix ``G[p, q] = <a_p^dag a_q>``; anomalous
contractions vanish identically.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np


class FermionOp(NamedTuple):
    """``u * a_site^dag + v * a_site``."""

    site: int
    u: float
    v: float


def creation(site):
    return FermionOp(site, 1.0, 0.0)


def annihilation(site):
    return FermionOp(site, 0.0, 1.0)


def pfaffian(a: np.ndarray) -> float:
    """Pfaffian of a real antisymmetric matrix by pivoted Parlett-Reid reduction."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("pfaffian needs a square matrix")
    if n % 2:
        return 0.0
    result = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k, k + 1:])))
        if kp != k + 1:
            a[[k + 1, kp]] = a[[kp, k + 1]]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            result = -result
        pivot = a[k, k + 1]
        if pivot == 0.0:
            return 0.0
        result *= pivot
        if k + 2 < n:
            tau = a[k, k + 2:] / pivot
            col = a[k + 2:, k + 1]
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return float(result)


def contraction(p: FermionOp, q: FermionOp, hopping: np.ndarray) -> float:
    """``<p q>`` for two linear fermion operators."""
    delta = 1.0 if p.site == q.site else 0.0
    return (p.u * q.v * hopping[p.site, q.site]
            + p.v * q.u * (delta - hopping[q.site, p.site]))


def expectation(ops: Sequence[FermionOp], hopping: np.ndarray) -> float:
    """Expectation of the ordered product ``ops[0] ops[1] ...``."""
    k = len(ops)
    if k % 2:
        return 0.0
    m = np.zeros((k, k))
    for p in range(k):
        for q in range(p + 1, k):
            m[p, q] = contraction(ops[p], ops[q], hopping)
            m[q, p] = -m[p, q]
    return pfaffian(m)


def string_operator(i: int, j: int) -> list[FermionOp]:
    """``a_i^dag (1-2n_{i+1}) ... (1-2n_{j-1}) a_j`` as a product of linear operators.

    Uses ``1 - 2n = (a^dag + a)(a^dag - a)``.
    """
    if j <= i:
        raise ValueError("string needs i < j")
    ops = [creation(i)]
    for l in range(i + 1, j):
        ops.append(FermionOp(l, 1.0, 1.0))
        ops.append(FermionOp(l, 1.0, -1.0))
    ops.append(annihilation(j))
    return ops


def string_correlator(hopping: np.ndarray, i: int, j: int) -> float:
    """``<S_i^+ S_j^->`` of the spin chain, i.e. the Jordan-Wigner string expectation."""
    return expectation(string_operator(i, j), hopping)


def density_density(hopping: np.ndarray, i: int, j: int) -> float:
    """``<n_i n_j>`` for ``i != j``."""
    return float(hopping[i, i] * hopping[j, j] - hopping[i, j] * hopping[j, i])
