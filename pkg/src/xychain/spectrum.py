"""Free-fermion description of the isotropic XY chain in a field.

After the Jordan-Wigner map the chain is a band of spinless fermions with
dispersion ``eps(k) = J cos k - h``.  Every pair observable is built from the
real-space two-point function ``f_n = <a_i^dag a_{i+n}>``, the Fourier
coefficient of the Fermi occupation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import ParameterError

# largest periodic grid used for the finite-temperature integrals
MAX_POINTS = 1 << 24
MIN_POINTS = 4096


@dataclass(frozen=True)
class ChainParams:
    """Coupling ``J``, field ``h`` and temperature ``T`` (``k_B = 1``)."""

    J: float = 1.0
    h: float = 0.0
    T: float = 0.0

    def __post_init__(self):
        for name in ("J", "h", "T"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if self.J <= 0:
            raise ParameterError(f"J must be positive, got {self.J}")
        if self.h < 0:
            raise ParameterError(f"h must be non-negative, got {self.h}")
        if self.T < 0:
            raise ParameterError(f"T must be non-negative, got {self.T}")

    @property
    def h_c(self) -> float:
        """Saturation (quantum critical) field."""
        return self.J

    @property
    def beta(self) -> float:
        return math.inf if self.T == 0 else 1.0 / self.T

    def with_(self, **changes) -> "ChainParams":
        values = {"J": self.J, "h": self.h, "T": self.T}
        values.update(changes)
        return ChainParams(**values)


def dispersion(k, params: ChainParams):
    """Single-fermion energy ``J cos k - h``; accepts scalars or arrays."""
    return params.J * np.cos(k) - params.h


def fermi_occupation(k, params: ChainParams):
    """Fermi function of mode ``k``; a step with value 1/2 on the edge at T = 0."""
    eps = dispersion(k, params)
    if params.T == 0:
        occ = np.where(eps < 0, 1.0, np.where(eps > 0, 0.0, 0.5))
    else:
        occ = expit(-eps / params.T)
    return occ if np.ndim(occ) else float(occ)


def quadrature_points(params: ChainParams) -> int:
    """Nodes of the periodic trapezoid grid over one Brillouin zone (even)."""
    if params.T == 0:
        return 0
    n = max(MIN_POINTS, math.ceil(64.0 * params.J / params.T))
    n = min(n, MAX_POINTS)
    return n + (n % 2)


def _fermi_wavevector(params: ChainParams) -> float:
    return math.acos(min(params.h / params.J, 1.0))


def _zero_temperature_coefficients(n_max: int, params: ChainParams) -> np.ndarray:
    k_f = _fermi_wavevector(params)
    f = np.empty(n_max + 1)
    f[0] = 1.0 - k_f / math.pi
    for n in range(1, n_max + 1):
        f[n] = -math.sin(n * k_f) / (n * math.pi)
    return f


def _thermal_coefficients(n_max: int, params: ChainParams, points: int) -> np.ndarray:
    # trapezoid on [0, pi] with halved end weights == full periodic trapezoid
    half = points // 2
    k = np.linspace(0.0, math.pi, half + 1)
    w = fermi_occupation(k, params) * (2.0 / points)
    w[0] *= 0.5
    w[-1] *= 0.5
    f = np.empty(n_max + 1)
    f[0] = w.sum()
    if n_max >= 1:
        # Chebyshev recurrence cos((n+1)k) = 2 cos k cos(nk) - cos((n-1)k)
        c = np.cos(k)
        prev, cur = np.ones_like(k), c
        f[1] = np.dot(cur, w)
        for n in range(2, n_max + 1):
            prev, cur = cur, 2.0 * c * cur - prev
            f[n] = np.dot(cur, w)
    return f


def fourier_coefficient(n: int, params: ChainParams, points: int | None = None) -> float:
    """``f_n = (1/pi) int_0^pi cos(nk) f(k) dk``.

    ``points`` overrides the size of the full-zone grid at finite temperature.
    """
    if int(n) != n or n < 0:
        raise ParameterError(f"n must be a non-negative integer, got {n!r}")
    return float(_coefficients(int(n), params, points)[int(n)])


def _coefficients(n_max: int, params: ChainParams, points: int | None) -> np.ndarray:
    if params.T == 0:
        return _zero_temperature_coefficients(n_max, params)
    if points is None:
        points = quadrature_points(params)
    elif points < 2 or points % 2:
        raise ParameterError(f"points must be even and >= 2, got {points}")
    return _thermal_coefficients(n_max, params, points)


@dataclass(frozen=True)
class CorrelatorTable:
    """The coefficients ``f_0 .. f_{n_max}`` for one parameter point."""

    params: ChainParams
    n_max: int
    f: np.ndarray = field(repr=False)
    quadrature_points: int = 0

    def hop(self, n: int) -> float:
        """``<a_i^dag a_{i+n}>``; even in ``n``."""
        return float(self.f[abs(n)])

    def antihop(self, n: int) -> float:
        """``<a_i a_{i+n}^dag> = delta_{n0} - f_n``."""
        return (1.0 if n == 0 else 0.0) - float(self.f[abs(n)])

    def anomalous(self, n: int) -> float:
        # no pairing terms in the isotropic chain
        return 0.0

    def hopping_matrix(self, size: int) -> np.ndarray:
        """Toeplitz matrix ``G[p, q] = <a_p^dag a_q>`` on ``size`` consecutive sites."""
        if size - 1 > self.n_max:
            raise ParameterError(f"table holds n <= {self.n_max}, need {size - 1}")
        idx = np.arange(size)
        return self.f[np.abs(idx[:, None] - idx[None, :])]


def correlator_table(n_max: int, params: ChainParams, points: int | None = None) -> CorrelatorTable:
    if int(n_max) != n_max or n_max < 0:
        raise ParameterError(f"n_max must be a non-negative integer, got {n_max!r}")
    n_max = int(n_max)
    f = _coefficients(n_max, params, points)
    f.setflags(write=False)
    used = 0 if params.T == 0 else (points or quadrature_points(params))
    return CorrelatorTable(params=params, n_max=n_max, f=f, quadrature_points=used)


def table_from_values(values, params: ChainParams | None = None) -> CorrelatorTable:
    """Wrap hand-chosen coefficients, e.g. for algebraic identity checks."""
    f = np.array(values, dtype=float)
    f.setflags(write=False)
    return CorrelatorTable(params=params or ChainParams(), n_max=len(f) - 1, f=f)
