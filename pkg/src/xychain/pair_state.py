"""Two-site reduced density matrix and concurrence.

For the isotropic chain the pair state at distance ``m`` is an X-state in the
basis (uu, ud, du, dd): diagonal ``(X+, Y+, Y-, X-)`` plus one real coherence
``Z = <S_i^+ S_{i+m}^->`` between ud and du.  ``Z`` for ``m = 1..4`` is the
explicit Wick polynomial in ``f_0 .. f_m``; larger distances go through the
Pfaffian string evaluator in :mod:`xychain.wick`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import wick
from .errors import InvariantError, ParameterError
from .spectrum import CorrelatorTable

ASSEMBLE_TOL = 1e-8
PSD_TOL = 1e-10
CLAMP = 1e-10

_SIGMA_YY = np.array([[0, 0, 0, -1],
                      [0, 0, 1, 0],
                      [0, 1, 0, 0],
                      [-1, 0, 0, 0]], dtype=float)


@dataclass(frozen=True)
class PairElements:
    m: int
    x_plus: float
    x_minus: float
    y_plus: float
    y_minus: float
    z: float

    @property
    def trace(self) -> float:
        return self.x_plus + self.y_plus + self.y_minus + self.x_minus

    def violations(self, tol: float = ASSEMBLE_TOL) -> list[str]:
        problems = []
        if abs(self.trace - 1.0) > tol:
            problems.append(f"trace {self.trace!r} != 1")
        for name in ("x_plus", "x_minus", "y_plus", "y_minus"):
            if getattr(self, name) < -tol:
                problems.append(f"{name} = {getattr(self, name)!r} < 0")
        if self.z * self.z > self.y_plus * self.y_minus + tol:
            problems.append("|z| exceeds sqrt(y_plus * y_minus); matrix not PSD")
        return problems


@dataclass(frozen=True)
class PairDensityMatrix:
    """Immutable 4x4 density matrix in the (uu, ud, du, dd) basis."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = np.array(self.matrix, dtype=float)
        if rho.shape != (4, 4):
            raise InvariantError(f"pair density matrix must be 4x4, got {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    def violations(self, tol: float = PSD_TOL) -> list[str]:
        rho = self.matrix
        problems = []
        if abs(np.trace(rho) - 1.0) > tol:
            problems.append(f"trace {np.trace(rho)!r} != 1")
        if np.max(np.abs(rho - rho.T)) > tol:
            problems.append("matrix not symmetric")
        low = np.linalg.eigvalsh(0.5 * (rho + rho.T)).min()
        if low < -tol:
            problems.append(f"eigenvalue {low!r} < 0")
        return problems

    def validate(self, tol: float = PSD_TOL) -> "PairDensityMatrix":
        problems = self.violations(tol)
        if problems:
            raise InvariantError("invalid pair density matrix: " + "; ".join(problems))
        return self

    def elements(self, m: int = 0) -> PairElements:
        r = self.matrix
        return PairElements(m=m, x_plus=r[0, 0], y_plus=r[1, 1], y_minus=r[2, 2],
                            x_minus=r[3, 3], z=r[2, 1])


@dataclass(frozen=True)
class ConcurrenceResult:
    value: float
    lambdas: tuple
    witness: float


def _z_polynomial(m: int, f) -> float:
    f0 = f[0]
    f1 = f[1]
    if m == 1:
        return f1
    f2 = f[2]
    if m == 2:
        return f2 - 2 * f0 * f2 + 2 * f1 ** 2
    f3 = f[3]
    if m == 3:
        return 4 * (f1 ** 3 - 2 * f0 * f1 * f2 + f2 ** 2 * f1 + f0 ** 2 * f3
                    - f1 ** 2 * f3 + f1 * f2 - f0 * f3) + f3
    f4 = f[4]
    quartic = (f1 ** 4 - 3 * f0 * f1 ** 2 * f2 + 2 * f1 ** 2 * f2 ** 2
               + 2 * f0 ** 2 * f1 * f3 + f0 ** 2 * f2 ** 2 - f2 ** 4
               - 2 * f0 * f1 * f2 * f3 + 2 * f1 * f2 ** 2 * f3 - 2 * f1 ** 3 * f3
               + f1 ** 2 * f3 ** 2 - f0 * f2 * f3 ** 2 - f0 ** 3 * f4
               + 2 * f0 * f1 ** 2 * f4 - 2 * f1 ** 2 * f2 * f4 + f0 * f2 ** 2 * f4)
    cubic = (3 * f1 ** 2 * f2 - 2 * f0 * f2 ** 2 - 4 * f0 * f1 * f3
             + 2 * f1 * f2 * f3 + 3 * f0 ** 2 * f4 - 2 * f1 ** 2 * f4
             + f2 * f3 ** 2 - f2 ** 2 * f4)
    quadratic = 2 * f1 * f3 - 3 * f0 * f4 + f2 ** 2
    return 8 * quartic + 4 * cubic + 2 * quadratic + f4


def _check_distance(m, table: CorrelatorTable):
    if int(m) != m or m < 1:
        raise ParameterError(f"distance m must be a positive integer, got {m!r}")
    if table.n_max < m:
        raise ParameterError(f"table has n_max = {table.n_max}, distance {m} needs n_max >= {m}")


def z_general(m: int, table: CorrelatorTable) -> float:
    """String expectation ``Z`` at any distance via the Pfaffian of all contractions."""
    _check_distance(m, table)
    return wick.string_correlator(table.hopping_matrix(m + 1), 0, m)


def density_matrix_elements(m: int, table: CorrelatorTable) -> PairElements:
    """Pair elements at distance ``m``.

    ``m = 1..4`` use the closed Wick polynomials; ``m > 4`` falls back to
    :func:`z_general` with ``X+ = f_0^2 - f_m^2``.
    """
    _check_distance(m, table)
    f = table.f
    z = _z_polynomial(m, f) if m <= 4 else z_general(m, table)
    x_plus = f[0] ** 2 - f[m] ** 2
    y = f[0] - x_plus
    return PairElements(m=int(m), x_plus=float(x_plus), x_minus=float(1.0 - 2.0 * f[0] + x_plus),
                        y_plus=float(y), y_minus=float(y), z=float(z))


def assemble_rho(elements: PairElements) -> PairDensityMatrix:
    problems = elements.violations(ASSEMBLE_TOL)
    if problems:
        raise InvariantError(f"pair elements (m={elements.m}) rejected: " + "; ".join(problems))
    rho = np.diag([elements.x_plus, elements.y_plus, elements.y_minus, elements.x_minus])
    rho[1, 2] = rho[2, 1] = elements.z
    return PairDensityMatrix(rho)


def _clamped_sqrt(x: float, tol: float, what: str) -> float:
    if x < 0:
        if x < -tol:
            raise InvariantError(f"{what} = {x!r} is negative beyond tolerance")
        return 0.0
    return math.sqrt(x)


def concurrence_closed(elements: PairElements) -> ConcurrenceResult:
    """``max(0, 2(|Z| - sqrt(X+ X-)))``; the witness is the signed argument."""
    sx = _clamped_sqrt(elements.x_plus * elements.x_minus, 1e-12, "X+ X-")
    sy = _clamped_sqrt(elements.y_plus * elements.y_minus, 1e-12, "Y+ Y-")
    az = abs(elements.z)
    witness = 2.0 * (az - sx)
    lambdas = tuple(sorted((sy + az, abs(sy - az), sx, sx), reverse=True))
    return ConcurrenceResult(value=max(0.0, witness), lambdas=lambdas, witness=witness)


def spin_flip(rho: np.ndarray) -> np.ndarray:
    return _SIGMA_YY @ np.conj(rho) @ _SIGMA_YY


def concurrence_wootters(rho: PairDensityMatrix) -> ConcurrenceResult:
    """Wootters concurrence from the spectrum of ``rho rho~``.

    The eigenvalues are taken from the Hermitian similar form
    ``sqrt(rho) rho~ sqrt(rho)``.
    """
    rho.validate()
    mat = 0.5 * (rho.matrix + rho.matrix.T)
    evals, evecs = np.linalg.eigh(mat)
    evals = np.where((evals < 0) & (evals > -CLAMP), 0.0, evals)
    root = (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.T
    herm = root @ spin_flip(mat) @ root
    squares = np.linalg.eigvalsh(0.5 * (herm + herm.T))
    lambdas = sorted((_clamped_sqrt(s, CLAMP, "eigenvalue of rho rho~") for s in squares),
                     reverse=True)
    witness = lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]
    return ConcurrenceResult(value=max(0.0, witness), lambdas=tuple(lambdas), witness=witness)


def pair_concurrence(m: int, table: CorrelatorTable) -> ConcurrenceResult:
    return concurrence_closed(density_matrix_elements(m, table))
