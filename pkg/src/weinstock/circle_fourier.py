"""Fourier analysis on the unit circle.

All functions share one grid convention: ``m`` samples at ``t_j = 2*pi*j/m`` for
``j = 0..m-1``. A :class:`FourierSeries` stores the two-sided coefficients
``c_n, |n| <= n_max`` of ``f(e^{it}) = sum_n c_n e^{int}`` together with the size of the
grid it was analyzed on (or is meant to be synthesized on).
"""

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from weinstock.errors import AliasingError, InvalidInputError

_GRID_TOLERANCE = 1e-12


def grid(m: int) -> NDArray[np.float64]:
    """Uniform angles ``2*pi*j/m``."""
    if m < 1:
        raise InvalidInputError(f'Grid size must be positive, got {m}')
    return 2 * np.pi * np.arange(m) / m


@dataclass(frozen=True, eq=False)
class FourierSeries:
    """Finitely supported two-sided coefficient sequence.

    Parameters
    ----------
    coeffs : NDArray[np.complex128]
        Coefficients ordered from ``-n_max`` to ``n_max``; the length is ``2*n_max + 1``.
    grid_size : int
        Number of uniform samples used for transforms of this series.
    """

    coeffs: NDArray[np.complex128]
    grid_size: int

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=np.complex128, copy=True)
        if coeffs.ndim != 1 or coeffs.size % 2 == 0:
            raise InvalidInputError('Coefficient array must be one-dimensional with odd length')
        coeffs.setflags(write=False)
        object.__setattr__(self, 'coeffs', coeffs)
        if self.grid_size < 1:
            raise InvalidInputError(f'Grid size must be positive, got {self.grid_size}')

    @classmethod
    def from_mapping(cls, coeffs: Mapping[int, complex], grid_size: int) -> 'FourierSeries':
        n_max = max((abs(n) for n in coeffs), default=0)
        array = np.zeros(2 * n_max + 1, dtype=np.complex128)
        for n, value in coeffs.items():
            array[n + n_max] = value
        return cls(array, grid_size)

    @classmethod
    def constant(cls, value: complex, grid_size: int) -> 'FourierSeries':
        return cls(np.array([value], dtype=np.complex128), grid_size)

    @property
    def n_max(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def indices(self) -> NDArray[np.int64]:
        return np.arange(-self.n_max, self.n_max + 1)

    @property
    def mean(self) -> complex:
        return complex(self.coeffs[self.n_max])

    def coefficient(self, n: int) -> complex:
        """Coefficient of ``e^{int}``; zero outside the stored support."""
        if abs(n) > self.n_max:
            return 0j
        return complex(self.coeffs[n + self.n_max])

    def coefficients(self, indices: ArrayLike) -> NDArray[np.complex128]:
        idx = np.asarray(indices, dtype=np.int64)
        out = np.zeros(idx.shape, dtype=np.complex128)
        inside = np.abs(idx) <= self.n_max
        out[inside] = self.coeffs[idx[inside] + self.n_max]
        return out

    def is_real(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.coeffs))))
        return bool(np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1]))) <= tol * scale)

    def bandwidth(self, tol: float = 1e-13) -> int:
        """Largest ``|n|`` whose coefficient exceeds ``tol`` relative to the largest one."""
        magnitudes = np.abs(self.coeffs)
        peak = float(magnitudes.max())
        if peak == 0.0:
            return 0
        significant = np.flatnonzero(magnitudes > tol * peak)
        return int(np.max(np.abs(self.indices[significant])))

    def truncated(self, n_max: int) -> 'FourierSeries':
        if n_max >= self.n_max:
            return self
        kept = self.coeffs[self.n_max - n_max : self.n_max + n_max + 1]
        return FourierSeries(kept, self.grid_size)

    def scaled(self, factor: complex) -> 'FourierSeries':
        return FourierSeries(self.coeffs * factor, self.grid_size)

    def shifted(self, constant: complex) -> 'FourierSeries':
        """The series of ``f + constant``."""
        coeffs = self.coeffs.copy()
        coeffs[self.n_max] += constant
        return FourierSeries(coeffs, self.grid_size)


def analyze(samples: ArrayLike, angles: ArrayLike | None = None) -> FourierSeries:
    """Discrete Fourier coefficients of uniform samples.

    Returns the trapezoid-rule coefficients for ``|n| <= (m - 1) // 2``. When ``angles``
    is given it must be the uniform grid ``2*pi*j/m``.
    """
    values = np.asarray(samples)
    if values.ndim != 1 or values.size == 0:
        raise InvalidInputError('Samples must be a non-empty one-dimensional sequence')
    m = values.size
    if m < 2:
        raise InvalidInputError(f'At least 2 samples are required, got {m}')
    if angles is not None:
        angles = np.asarray(angles, dtype=np.float64)
        if angles.shape != values.shape or np.max(np.abs(angles - grid(m))) > _GRID_TOLERANCE * m:
            raise InvalidInputError('Samples must lie on the uniform grid 2*pi*j/m')

    n_max = (m - 1) // 2
    if np.isrealobj(values):
        positive = np.fft.rfft(values.astype(np.float64))[: n_max + 1] / m
        coeffs = np.concatenate([np.conj(positive[:0:-1]), positive])
    else:
        full = np.fft.fft(values.astype(np.complex128)) / m
        coeffs = np.concatenate([full[m - n_max :], full[: n_max + 1]])
    return FourierSeries(coeffs, m)


def synthesize(series: FourierSeries, m: int | None = None) -> NDArray[np.complex128]:
    """Evaluate ``sum_n c_n e^{int_j}`` on the uniform grid of size ``m``."""
    m = series.grid_size if m is None else m
    if m < 2 * series.n_max + 1:
        raise AliasingError(
            f'Grid of {m} points cannot carry a series of bandwidth {series.n_max}'
        )
    full = np.zeros(m, dtype=np.complex128)
    full[series.indices % m] = series.coeffs
    return np.fft.ifft(full) * m


def evaluate(series: FourierSeries, angles: ArrayLike) -> NDArray[np.complex128]:
    """Evaluate the series at arbitrary angles (band-limited interpolation)."""
    theta = np.asarray(angles, dtype=np.float64)
    phases = np.exp(1j * np.multiply.outer(theta, series.indices))
    return phases @ series.coeffs


def sobolev_norm(series: FourierSeries, s: float) -> float:
    """``(sum_{n != 0} |n|^{2s} |c_n|^2)^{1/2}``; the mean never contributes."""
    n = series.indices
    nonzero = n != 0
    weights = np.abs(n[nonzero]).astype(np.float64) ** (2 * s)
    return float(np.sqrt(np.sum(weights * np.abs(series.coeffs[nonzero]) ** 2)))


def dirichlet_energy(series: FourierSeries) -> float:
    """Dirichlet energy of the harmonic extension, ``2*pi*||f||_{H^{1/2}}^2``."""
    return 2 * np.pi * sobolev_norm(series, 0.5) ** 2


def harmonic_extend(
    series: FourierSeries, r: ArrayLike, t: ArrayLike
) -> complex | NDArray[np.complex128]:
    """Value of the harmonic extension ``sum_n c_n r^{|n|} e^{int}`` inside the disk."""
    radius = np.asarray(r, dtype=np.float64)
    theta = np.asarray(t, dtype=np.float64)
    if np.any(radius >= 1.0) or np.any(radius < 0.0):
        raise InvalidInputError('Harmonic extension is only evaluated for 0 <= r < 1')
    radius, theta = np.broadcast_arrays(radius, theta)
    n = series.indices
    terms = np.power.outer(radius, np.abs(n)) * np.exp(1j * np.multiply.outer(theta, n))
    values = terms @ series.coeffs
    if values.ndim == 0:
        return complex(values)
    return values


def conjugate(series: FourierSeries) -> FourierSeries:
    """Boundary values of the harmonic conjugate normalized by ``v(0) = 0``."""
    multiplier = -1j * np.sign(series.indices)
    return FourierSeries(series.coeffs * multiplier, series.grid_size)


def holder_seminorm(samples: Sequence[float] | ArrayLike, alpha: float) -> float:
    """Grid estimate of the ``C^{0,alpha}`` seminorm on the unit circle.

    Distances are arc lengths between grid points; the result is a lower bound of the true
    seminorm that converges under grid refinement.
    """
    if not 0.0 < alpha <= 1.0:
        raise InvalidInputError(f'Hoelder exponent must lie in (0, 1], got {alpha}')
    values = np.asarray(samples)
    m = values.size
    if m < 2:
        raise InvalidInputError('At least 2 samples are required')

    best = 0.0
    for shift in range(1, m // 2 + 1):
        jumps = np.abs(values - np.roll(values, -shift))
        distance = 2 * np.pi * shift / m
        best = max(best, float(jumps.max()) / distance**alpha)
    return best
