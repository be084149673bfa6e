"""Weighted Steklov eigenvalues of the unit disk.

The Rayleigh quotient ``int_D |grad u|^2 / int_{dD} Theta u^2`` is restricted to harmonic
extensions of trigonometric polynomials of degree ``n_modes``. In that basis the energy
form is diagonal (``2*pi*|n|``) and the boundary form is the Toeplitz matrix
``2*pi*Theta_hat(l - k)``; the eigenvalues of the pencil are min-max upper bounds of the
true ``sigma_k(D, Theta)``.
"""

import warnings
from dataclasses import dataclass
from logging import getLogger
from typing import Callable

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq

from weinstock.circle_fourier import (
    FourierSeries,
    analyze,
    evaluate,
    grid,
    sobolev_norm,
    synthesize,
)
from weinstock.errors import (
    ConvergenceError,
    FactorizationError,
    InvalidInputError,
    InvalidWeightError,
)

logger = getLogger(__name__)

DEFAULT_GRID_SIZE = 1024
MIN_MODES = 64
MAX_MODES = 512
# Newton iterates for the Moebius center stay inside this disk.
_CENTER_CAP = 0.95


@dataclass(frozen=True, eq=False)
class BoundaryWeight:
    """Strictly positive density on the unit circle, kept as samples and as a series."""

    series: FourierSeries
    samples: NDArray[np.float64]
    min_value: float
    max_value: float

    def __post_init__(self) -> None:
        if not self.min_value > 0.0:
            raise InvalidWeightError(
                f'Boundary weight must be strictly positive, attained minimum {self.min_value:.6g}',
                minimum=self.min_value,
            )
        samples = np.array(self.samples, dtype=np.float64, copy=True)
        samples.setflags(write=False)
        object.__setattr__(self, 'samples', samples)

    @classmethod
    def from_samples(cls, samples: ArrayLike) -> 'BoundaryWeight':
        values = np.asarray(samples, dtype=np.float64)
        if values.ndim != 1 or values.size < 2:
            raise InvalidInputError('Weight samples must be a one-dimensional grid of size >= 2')
        if not np.all(np.isfinite(values)):
            raise InvalidWeightError('Boundary weight contains non-finite samples')
        return cls(analyze(values), values, float(values.min()), float(values.max()))

    @classmethod
    def from_series(cls, series: FourierSeries, m: int | None = None) -> 'BoundaryWeight':
        if not series.is_real(1e-10):
            raise InvalidInputError('Weight series must be real-symmetric')
        m = series.grid_size if m is None else m
        values = synthesize(series, m).real
        resampled = FourierSeries(series.coeffs, m)
        return cls(resampled, values, float(values.min()), float(values.max()))

    @classmethod
    def from_function(
        cls, fn: Callable[[NDArray[np.float64]], ArrayLike], m: int = DEFAULT_GRID_SIZE
    ) -> 'BoundaryWeight':
        return cls.from_samples(np.broadcast_to(np.asarray(fn(grid(m)), dtype=np.float64), (m,)))

    @classmethod
    def constant(cls, value: float, m: int = DEFAULT_GRID_SIZE) -> 'BoundaryWeight':
        return cls.from_samples(np.full(m, float(value)))

    @property
    def grid_size(self) -> int:
        return self.samples.size

    @property
    def mean(self) -> float:
        return self.series.mean.real

    def bandwidth(self, tol: float = 1e-13) -> int:
        return self.series.bandwidth(tol)


@dataclass(frozen=True, eq=False)
class GalerkinSystem:
    n_modes: int
    energy: NDArray[np.float64]
    mass: NDArray[np.complex128]

    @property
    def indices(self) -> NDArray[np.int64]:
        return np.arange(-self.n_modes, self.n_modes + 1)


@dataclass(frozen=True, eq=False)
class WeightedSpectrum:
    """Eigenvalues ``sigma_0 <= ... <= sigma_kmax`` and mass-orthonormal coefficient columns."""

    eigenvalues: NDArray[np.float64]
    eigenvectors: NDArray[np.complex128]
    n_modes: int

    @property
    def k_max(self) -> int:
        return self.eigenvalues.size - 1


def assemble(weight: BoundaryWeight, n_modes: int) -> GalerkinSystem:
    if n_modes < 2:
        raise InvalidInputError(f'Galerkin truncation needs n_modes >= 2, got {n_modes}')
    if weight.min_value <= 0.0:
        raise InvalidWeightError('Boundary weight must be strictly positive', weight.min_value)

    offsets = np.arange(2 * n_modes + 1)
    # mass[k, l] = 2*pi*Theta_hat(l - k)
    first_column = weight.series.coefficients(-offsets)
    first_row = weight.series.coefficients(offsets)
    mass = 2 * np.pi * scipy.linalg.toeplitz(first_column, first_row)
    energy = np.diag(2 * np.pi * np.abs(np.arange(-n_modes, n_modes + 1)).astype(np.float64))
    return GalerkinSystem(n_modes, energy, mass)


def solve_spectrum(system: GalerkinSystem, k_max: int) -> WeightedSpectrum:
    size = 2 * system.n_modes + 1
    if not 0 <= k_max <= 2 * system.n_modes:
        raise InvalidInputError(f'k_max must lie in [0, {size - 1}], got {k_max}')
    try:
        eigenvalues, eigenvectors = scipy.linalg.eigh(
            system.energy, system.mass, subset_by_index=[0, k_max]
        )
    except np.linalg.LinAlgError as ex:
        raise FactorizationError(
            'Boundary mass matrix is not positive definite; the weight is not positive'
        ) from ex
    return WeightedSpectrum(np.asarray(eigenvalues), np.asarray(eigenvectors), system.n_modes)


def default_n_modes(weight: BoundaryWeight) -> int:
    return int(np.clip(4 * weight.bandwidth(), MIN_MODES, MAX_MODES))


def spectrum(weight: BoundaryWeight, k_max: int, n_modes: int | None = None) -> WeightedSpectrum:
    n_modes = default_n_modes(weight) if n_modes is None else n_modes
    return solve_spectrum(assemble(weight, n_modes), k_max)


def spectrum_ladder(
    weight: BoundaryWeight,
    k_max: int = 1,
    tol: float = 1e-10,
    n_modes: int | None = None,
) -> list[WeightedSpectrum]:
    """Spectra for a doubling sequence of truncations.

    The ladder stops once ``sigma_1..sigma_kmax`` change by less than ``tol`` relative to
    their previous values, or when the next truncation would exceed ``MAX_MODES``.
    """
    k_max = max(k_max, 1)
    n = min(default_n_modes(weight), MAX_MODES // 2) if n_modes is None else n_modes
    n = max(n, (k_max + 1) // 2 + 1)
    ladder = [spectrum(weight, k_max, n)]
    while True:
        if 2 * n > MAX_MODES:
            if len(ladder) > 1:
                change = _relative_change(ladder[-2], ladder[-1])
            else:
                change = float('inf')
            warnings.warn(
                f'Galerkin ladder reached {n} modes without certifying tolerance {tol:g} '
                f'(last relative change {change:.3e})',
                RuntimeWarning,
                stacklevel=2,
            )
            return ladder
        n *= 2
        ladder.append(spectrum(weight, k_max, n))
        change = _relative_change(ladder[-2], ladder[-1])
        logger.debug('Galerkin ladder: n_modes=%d, relative change %.3e', n, change)
        if change < tol:
            return ladder


def converged_spectrum(
    weight: BoundaryWeight, k_max: int = 1, tol: float = 1e-10
) -> WeightedSpectrum:
    return spectrum_ladder(weight, k_max, tol)[-1]


def deficit(weight: BoundaryWeight, tol: float = 1e-10) -> float:
    """``1 / sigma_1(D, Theta) - 1`` for a weight with unit mean."""
    if abs(weight.mean - 1.0) > 1e-8:
        raise InvalidInputError(
            f'Deficit is defined for weights with unit mean, got mean {weight.mean:.12g}'
        )
    sigma_1 = converged_spectrum(weight, 1, tol).eigenvalues[1]
    return float(1.0 / sigma_1 - 1.0)


def normalize_mean(weight: BoundaryWeight) -> BoundaryWeight:
    mean = weight.mean
    return BoundaryWeight(
        weight.series.scaled(1.0 / mean),
        weight.samples / mean,
        weight.min_value / mean,
        weight.max_value / mean,
    )


def mobius_kernel(zeta: complex, angles: ArrayLike) -> NDArray[np.float64]:
    """``|phi_{-zeta}'(e^{it})| = (1 - |zeta|^2) / |1 - conj(zeta) e^{it}|^2``."""
    z = np.exp(1j * np.asarray(angles, dtype=np.float64))
    return (1.0 - abs(zeta) ** 2) / np.abs(1.0 - np.conj(zeta) * z) ** 2


def mobius_pullback(weight: BoundaryWeight, zeta: complex) -> BoundaryWeight:
    """Pull the weight back through ``phi_{-zeta}(z) = (z - zeta) / (1 - conj(zeta) z)``.

    The result is ``Theta(phi_{-zeta}(z)) |phi_{-zeta}'(z)|`` on the same grid; the total
    mass of the weight is preserved.
    """
    zeta = complex(zeta)
    if abs(zeta) >= 1.0:
        raise InvalidInputError(f'Moebius parameter must lie in the open disk, got {zeta}')
    if zeta == 0:
        return weight
    angles = grid(weight.grid_size)
    z = np.exp(1j * angles)
    image = (z - zeta) / (1.0 - np.conj(zeta) * z)
    values = evaluate(weight.series, np.angle(image)).real * mobius_kernel(zeta, angles)
    return BoundaryWeight.from_samples(values)


def first_moment(weight: BoundaryWeight) -> complex:
    return weight.series.coefficient(1)


def normalize_center(
    weight: BoundaryWeight, tol: float = 1e-12, max_iter: int = 50
) -> tuple[BoundaryWeight, complex]:
    """Find the Moebius center of mass of a weight.

    Returns ``(normalized, zeta_g)`` where ``normalized`` has vanishing first Fourier
    coefficients and ``mobius_pullback(normalized, zeta_g)`` reproduces ``weight``.
    """

    def residual(zeta: complex, target: BoundaryWeight) -> complex:
        return first_moment(mobius_pullback(target, -zeta))

    start = np.conj(first_moment(weight))
    if abs(start) > _CENTER_CAP:
        start *= _CENTER_CAP / abs(start)

    try:
        zeta = _newton_center(weight, complex(start), residual, tol, max_iter)
    except ConvergenceError:
        logger.debug('Newton failed for the Moebius center, continuing in homotopy parameter')
        zeta = 0j
        for s in np.linspace(0.1, 1.0, 10):
            blended = BoundaryWeight.from_samples(1.0 + s * (weight.samples - 1.0))
            zeta = _newton_center(blended, zeta, residual, tol, max_iter)

    return mobius_pullback(weight, -zeta), zeta


def _newton_center(
    weight: BoundaryWeight,
    start: complex,
    residual: Callable[[complex, BoundaryWeight], complex],
    tol: float,
    max_iter: int,
) -> complex:
    step = 1e-7
    zeta = start
    value = residual(zeta, weight)
    for iteration in range(max_iter):
        if abs(value) <= tol:
            return zeta
        d_re = (residual(zeta + step, weight) - value) / step
        d_im = (residual(zeta + 1j * step, weight) - value) / step
        jacobian = np.array([[d_re.real, d_im.real], [d_re.imag, d_im.imag]])
        try:
            delta = np.linalg.solve(jacobian, [-value.real, -value.imag])
        except np.linalg.LinAlgError as ex:
            raise ConvergenceError('Singular Jacobian in Moebius normalization', abs(value)) from ex
        direction = complex(delta[0], delta[1])

        damping = 1.0
        while True:
            candidate = zeta + damping * direction
            if abs(candidate) > _CENTER_CAP:
                candidate *= _CENTER_CAP / abs(candidate)
            candidate_value = residual(candidate, weight)
            if abs(candidate_value) < abs(value) or damping < 1.0 / 64:
                break
            damping /= 2
        zeta, value = candidate, candidate_value
        logger.debug('Moebius center iteration %d: |F| = %.3e', iteration, abs(value))

    if abs(value) <= tol:
        return zeta
    raise ConvergenceError('Moebius normalization did not converge', abs(value))


def _half_circle_poisson_moment(r: float) -> float:
    """``int_{|t|<pi/2} cos t / (1 - 2 r cos t + r^2) dt`` in closed form."""
    if r < 1e-8:
        return 2.0
    return float(
        2.0 * (1.0 + r * r) / (r * (1.0 - r * r)) * (np.pi / 4 + np.arctan(r)) - np.pi / (2 * r)
    )


def center_radius_bound(log_sup: float) -> float:
    """Radius ``r(K) < 1`` with ``|zeta_g| <= r`` whenever ``||log Theta||_inf <= K``.

    ``r`` is the smallest radius at which the lower bound
    ``e^{-K} int_{|t|<pi/2} cos t / |1 - r e^{it}|^2 dt - 2 e^{K}`` of the radial component
    of the first moment becomes positive. The integral grows like ``pi / (1 - r)``.
    """
    if log_sup < 0:
        raise InvalidInputError('The sup norm of log(Theta) is non-negative')
    if log_sup == 0:
        return 0.0

    def lower_bound(r: float) -> float:
        return np.exp(-log_sup) * _half_circle_poisson_moment(r) - 2.0 * np.exp(log_sup)

    gap = 0.5
    while lower_bound(1.0 - gap) <= 0:
        gap /= 2
        if gap < 1e-15:
            raise ConvergenceError(
                f'No radius below 1 bounds the center for log sup {log_sup:.6g}',
                lower_bound(1.0 - 2 * gap),
            )
    return float(brentq(lower_bound, 0.0, 1.0 - gap, xtol=1e-14))


def hminus_half_distance(weight: BoundaryWeight) -> float:
    """``||Theta - 1||_{H^{-1/2}}``; the mean is excluded by the seminorm."""
    return sobolev_norm(weight.series, -0.5)


def linf_distance(weight: BoundaryWeight) -> float:
    return float(np.max(np.abs(weight.samples - 1.0)))


def sobolev_stability_ratio(weight: BoundaryWeight, deficit_value: float | None = None) -> float:
    """``||Theta-1||_{H^{-1/2}} / sqrt(deff * (2 + ||Theta-1||^2_{H^{-1/2}}))``.

    Bounded by ``1 + sqrt(2)`` for normalized weights with ``deff <= 1``.
    """
    distance = hminus_half_distance(weight)
    value = deficit(weight) if deficit_value is None else deficit_value
    denominator = np.sqrt(max(value, 0.0) * (2.0 + distance**2))
    if denominator == 0.0:
        return 0.0 if distance == 0.0 else float('inf')
    return float(distance / denominator)


def linf_stability_ratio(weight: BoundaryWeight, alpha: float = 1.0) -> float:
    """``||Theta-1||_inf / ||Theta-1||_{H^{-1/2}}^{1/(1+1/alpha)}``."""
    if not 0.0 < alpha <= 1.0:
        raise InvalidInputError(f'Hoelder exponent must lie in (0, 1], got {alpha}')
    distance = hminus_half_distance(weight)
    sup = linf_distance(weight)
    if distance == 0.0:
        return 0.0 if sup == 0.0 else float('inf')
    return float(sup / distance ** (1.0 / (1.0 + 1.0 / alpha)))


def random_normalized_weight(
    rng: np.random.Generator,
    bandwidth: int,
    sup_distance: float,
    m: int = DEFAULT_GRID_SIZE,
    decay: float = 1.0,
) -> BoundaryWeight:
    """Random weight with unit mean, no first harmonics and ``||Theta-1||_inf = sup_distance``.

    Modes ``2..bandwidth`` receive complex Gaussian amplitudes damped by ``n^{-decay}``.
    """
    if bandwidth < 2:
        raise InvalidInputError('Normalized random weights need bandwidth >= 2')
    if not 0.0 < sup_distance < 1.0:
        raise InvalidInputError('sup_distance must lie in (0, 1) to keep the weight positive')
    n = np.arange(2, bandwidth + 1)
    amplitudes = (rng.standard_normal(n.size) + 1j * rng.standard_normal(n.size)) / n**decay
    coeffs = np.zeros(2 * bandwidth + 1, dtype=np.complex128)
    coeffs[bandwidth + n] = amplitudes
    coeffs[bandwidth - n] = np.conj(amplitudes)
    deviation = synthesize(FourierSeries(coeffs, m), m).real
    coeffs *= sup_distance / np.max(np.abs(deviation))
    coeffs[bandwidth] = 1.0
    return BoundaryWeight.from_series(FourierSeries(coeffs, m), m)


def _relative_change(previous: WeightedSpectrum, current: WeightedSpectrum) -> float:
    old = previous.eigenvalues[1:]
    new = current.eigenvalues[1:]
    return float(np.max(np.abs(new - old) / np.maximum(np.abs(old), 1e-300)))
