"""Lowest eigenpair by explicitly restarted Lanczos with full reorthogonalization."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ..errors import ConvergenceError

SEED = 20140607
KRYLOV_BYTES = 400 * 2**20


class LanczosResult(NamedTuple):
    energy: float
    vector: np.ndarray
    residual: float
    gap: float
    iterations: int
    history: list


def _krylov_size(dim: int, requested: int | None) -> int:
    if requested is not None:
        return max(2, min(requested, dim))
    budget = KRYLOV_BYTES // (8 * max(dim, 1))
    return int(max(2, min(80, budget, dim)))


def lanczos_ground(op, dim: int, tol: float = 1e-8, krylov: int | None = None,
                   max_restarts: int = 200, seed: int = SEED) -> LanczosResult:
    """Ground state of the symmetric operator ``op`` (callable on vectors).

    The start vector comes from a fixed-seed generator so runs repeat exactly.
    ``gap`` is the distance to the second Ritz value of the last cycle; it is
    only an upper bound on the true gap.
    """
    if dim == 1:
        v = np.ones(1)
        e = float(op(v)[0])
        return LanczosResult(e, v, 0.0, np.inf, 0, [e])
    k = _krylov_size(dim, krylov)
    v = np.random.default_rng(seed).standard_normal(dim)
    v /= np.linalg.norm(v)
    history = []
    total = 0
    for _ in range(max_restarts):
        basis = np.empty((k, dim))
        alpha = np.zeros(k)
        beta = np.zeros(k)
        basis[0] = v
        used = k
        for j in range(k):
            w = op(basis[j])
            alpha[j] = basis[j] @ w
            # two passes of classical Gram-Schmidt against the whole Krylov basis
            for _ in range(2):
                w -= basis[:j + 1].T @ (basis[:j + 1] @ w)
            total += 1
            if j + 1 == k:
                break
            beta[j] = np.linalg.norm(w)
            if beta[j] < 1e-14:
                used = j + 1
                break
            basis[j + 1] = w / beta[j]
        evals, evecs = eigh_tridiagonal(alpha[:used], beta[:used - 1])
        energy = float(evals[0])
        gap = float(evals[1] - evals[0]) if used > 1 else np.inf
        history.append(energy)
        v = evecs[:, 0] @ basis[:used]
        v /= np.linalg.norm(v)
        residual = float(np.linalg.norm(op(v) - energy * v))
        if residual <= tol:
            return LanczosResult(energy, v, residual, gap, total, history)
    raise ConvergenceError(
        f"Lanczos did not reach residual {tol} after {max_restarts} restarts "
        f"(last residual {residual:.3e})", history)
