"""Holomorphic maps of the unit disk reconstructed from boundary weights.

A weight ``Theta`` determines, up to a rotation and a translation, the map ``g`` with
``|g'| = Theta`` on the unit circle: ``log g'`` is the analytic function whose real part on
the boundary is ``log Theta``. Maps are stored as truncated power series with the gauges
``g(0) = 0`` and ``g'(0) > 0``.
"""

import warnings
from dataclasses import dataclass, field
from logging import getLogger
from typing import Mapping

import numpy as np
import shapely
from numpy.polynomial import polynomial
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import minimize

from weinstock.circle_fourier import FourierSeries, analyze, grid, holder_seminorm
from weinstock.errors import AliasingError, GeometryError, InvalidInputError
from weinstock.steklov_disk import BoundaryWeight

logger = getLogger(__name__)

# Outermost sampled radius is 1 - 2**-INTERIOR_LEVELS.
INTERIOR_LEVELS = 12
TRUNCATION_TOLERANCE = 1e-8
BLOCH_CONSTANT = 0.5


@dataclass(frozen=True, eq=False)
class ConformalMap:
    """Power series of ``g`` and of ``log g'``.

    Parameters
    ----------
    deriv_log_coeffs : NDArray[np.complex128]
        Coefficients ``h_0..h_n`` of ``log g'``.
    map_coeffs : NDArray[np.complex128]
        Coefficients ``a_0..a_{n+1}`` of ``g``, with ``a_0 = 0``.
    n_terms : int
        Truncation order of ``log g'``.
    tail_energy : float
        l2 norm of the Fourier coefficients of ``log Theta`` dropped by the truncation.
    truncation_warning : str | None
        Set when ``tail_energy`` exceeds the reconstruction tolerance.
    metadata : Mapping[str, float]
        Construction parameters (for example the constant chosen by ``instability_map``).
    """

    deriv_log_coeffs: NDArray[np.complex128]
    map_coeffs: NDArray[np.complex128]
    n_terms: int
    tail_energy: float = 0.0
    truncation_warning: str | None = None
    metadata: Mapping[str, float] = field(default_factory=dict[str, float])

    @classmethod
    def from_map_coeffs(
        cls, map_coeffs: ArrayLike, metadata: Mapping[str, float] | None = None
    ) -> 'ConformalMap':
        """Build a map from the coefficients of ``g``; ``g'(0)`` must not vanish."""
        coeffs = _trim(np.asarray(map_coeffs, dtype=np.complex128))
        if coeffs.size < 2:
            raise InvalidInputError('A conformal map needs a linear coefficient')
        coeffs = coeffs.copy()
        coeffs[0] = 0.0
        deriv = polynomial.polyder(coeffs)
        return cls(series_log(deriv), coeffs, deriv.size - 1, metadata=dict(metadata or {}))

    @classmethod
    def identity(cls) -> 'ConformalMap':
        return cls.from_map_coeffs([0.0, 1.0])

    @property
    def degree(self) -> int:
        """Index of the last coefficient above roundoff."""
        return _trim(self.map_coeffs).size - 1

    @property
    def deriv_coeffs(self) -> NDArray[np.complex128]:
        return polynomial.polyder(self.map_coeffs)


def series_exp(coeffs: ArrayLike) -> NDArray[np.complex128]:
    """Power-series coefficients of ``exp(sum_k a_k z^k)`` up to the input length.

    Uses ``k e_k = sum_{j=1..k} j a_j e_{k-j}``.
    """
    a = np.asarray(coeffs, dtype=np.complex128)
    weighted = np.arange(a.size) * a
    e = np.zeros_like(a)
    e[0] = np.exp(a[0])
    for k in range(1, a.size):
        e[k] = np.dot(weighted[1 : k + 1], e[k - 1 :: -1][:k]) / k
    return e


def series_log(coeffs: ArrayLike) -> NDArray[np.complex128]:
    """Power-series coefficients of ``log(sum_k e_k z^k)`` for ``e_0 != 0``."""
    e = np.asarray(coeffs, dtype=np.complex128)
    if e.size == 0 or e[0] == 0:
        raise InvalidInputError('The logarithm needs a non-vanishing constant term')
    h = np.zeros_like(e)
    h[0] = np.log(e[0])
    for k in range(1, e.size):
        j = np.arange(1, k)
        h[k] = (k * e[k] - np.dot(j * h[1:k], e[k - 1 : 0 : -1])) / (k * e[0])
    return h


def analytic_completion(log_modulus: FourierSeries, n_terms: int) -> NDArray[np.complex128]:
    """Power series ``h_0..h_n`` of the analytic function whose real part on the circle has
    the Fourier series ``log_modulus``, with ``Im h_0 = 0``."""
    coeffs = log_modulus.coefficients(np.arange(n_terms + 1))
    completed = 2 * coeffs
    completed[0] = coeffs[0].real
    return completed


def outer_function(log_modulus: FourierSeries, n_terms: int) -> NDArray[np.complex128]:
    """Coefficients of the zero-free ``f`` with ``log|f| = log_modulus`` and ``f(0) > 0``."""
    return series_exp(analytic_completion(log_modulus, n_terms))


def reconstruct(weight: BoundaryWeight, n_terms: int | None = None) -> ConformalMap:
    """Map ``g`` with ``|g'| = Theta`` on the circle, ``g(0) = 0`` and ``g'(0) > 0``."""
    log_series = analyze(np.log(weight.samples))
    n_terms = log_series.n_max if n_terms is None else n_terms
    if n_terms < 1:
        raise InvalidInputError(f'Truncation order must be positive, got {n_terms}')
    if n_terms > log_series.n_max:
        raise AliasingError(
            f'Grid of {weight.grid_size} points cannot resolve {n_terms} terms of log(Theta)'
        )

    deriv_log = analytic_completion(log_series, n_terms)
    outside = np.abs(log_series.indices) > n_terms
    tail_energy = float(np.sqrt(np.sum(np.abs(log_series.coeffs[outside]) ** 2)))

    truncation_warning = None
    if tail_energy > TRUNCATION_TOLERANCE:
        truncation_warning = (
            f'log(Theta) has tail energy {tail_energy:.3e} beyond {n_terms} terms; '
            f'boundary |g\'| is accurate to about {10 * tail_energy:.1e}'
        )
        warnings.warn(truncation_warning, RuntimeWarning, stacklevel=2)

    deriv = outer_function(log_series, n_terms)
    map_coeffs = np.concatenate([[0.0], deriv / np.arange(1, deriv.size + 1)])
    logger.debug('Reconstructed map with %d terms, tail energy %.3e', n_terms, tail_energy)
    return ConformalMap(deriv_log, map_coeffs, n_terms, tail_energy, truncation_warning)


def evaluate(conformal_map: ConformalMap, z: ArrayLike) -> NDArray[np.complex128]:
    return polynomial.polyval(np.asarray(z, dtype=np.complex128), conformal_map.map_coeffs)


def derivative(conformal_map: ConformalMap, z: ArrayLike) -> NDArray[np.complex128]:
    return polynomial.polyval(np.asarray(z, dtype=np.complex128), conformal_map.deriv_coeffs)


def second_derivative(conformal_map: ConformalMap, z: ArrayLike) -> NDArray[np.complex128]:
    return polynomial.polyval(
        np.asarray(z, dtype=np.complex128), polynomial.polyder(conformal_map.map_coeffs, 2)
    )


def boundary_grid_size(conformal_map: ConformalMap) -> int:
    """Power of two resolving ``|g'|`` on the circle: at least 1024 and 64 per degree."""
    target = max(1024, 64 * conformal_map.degree)
    return 1 << (target - 1).bit_length()


def boundary_weight(conformal_map: ConformalMap, m: int | None = None) -> BoundaryWeight:
    """The weight ``|g'|`` induced on the unit circle."""
    m = boundary_grid_size(conformal_map) if m is None else m
    return BoundaryWeight.from_samples(np.abs(derivative(conformal_map, np.exp(1j * grid(m)))))


def boundary_curve(conformal_map: ConformalMap, m: int) -> NDArray[np.float64]:
    """Points ``g(e^{it_j})`` as an ``(m, 2)`` array; the polyline closes implicitly."""
    if m < 3:
        raise InvalidInputError(f'A closed curve needs at least 3 samples, got {m}')
    values = evaluate(conformal_map, np.exp(1j * grid(m)))
    return np.column_stack([values.real, values.imag])


def perimeter(conformal_map: ConformalMap, m: int | None = None) -> float:
    """``int_{dD} |g'| dsigma`` by the trapezoid rule."""
    m = boundary_grid_size(conformal_map) if m is None else m
    speed = np.abs(derivative(conformal_map, np.exp(1j * grid(m))))
    return float(2 * np.pi * np.mean(speed))


def disk_grid(n_angles: int) -> NDArray[np.complex128]:
    """Tensor grid on radii ``0`` and ``1 - 2^{-j}``, ``j = 1..INTERIOR_LEVELS``."""
    radii = np.concatenate([[0.0], 1.0 - 2.0 ** -np.arange(1, INTERIOR_LEVELS + 1)])
    return np.multiply.outer(radii, np.exp(1j * grid(n_angles)))


def univalence_margin(conformal_map: ConformalMap, n_angles: int | None = None) -> float:
    """Upper estimate of ``sup_D (1 - |z|^2) |z g''(z) / g'(z)|``.

    The supremum is sampled on :func:`disk_grid`. Beyond the outermost radius ``r`` the
    series tail gives ``(1 - r^2) sum_k k(k-1)|a_k| / min_{dD}|g'|``, using that ``|g'|``
    attains its minimum on the boundary. A value ``<= 1`` certifies that ``g`` is injective.
    """
    n_angles = max(256, 8 * conformal_map.degree) if n_angles is None else n_angles
    points = disk_grid(n_angles)
    first = derivative(conformal_map, points)
    second = second_derivative(conformal_map, points)
    sampled = float(np.max((1 - np.abs(points) ** 2) * np.abs(points * second / first)))

    outer_radius = 1.0 - 2.0**-INTERIOR_LEVELS
    k = np.arange(conformal_map.map_coeffs.size)
    curvature = float(np.sum(k * (k - 1) * np.abs(conformal_map.map_coeffs)))
    min_speed = float(np.min(np.abs(derivative(conformal_map, np.exp(1j * grid(n_angles))))))
    if min_speed == 0.0:
        return float('inf')
    tail = (1 - outer_radius**2) * curvature / min_speed
    return max(sampled, tail)


def log_speed(conformal_map: ConformalMap, m: int | None = None) -> NDArray[np.float64]:
    m = boundary_grid_size(conformal_map) if m is None else m
    return np.log(np.abs(derivative(conformal_map, np.exp(1j * grid(m)))))


def apriori_norm(conformal_map: ConformalMap, alpha: float, m: int | None = None) -> float:
    """Grid estimate of ``||log|g'|||_{C^{0,alpha}(dD)}``, the sup plus the Hoelder seminorm."""
    if not 0.0 < alpha <= 1.0:
        raise InvalidInputError(f'Hoelder exponent must lie in (0, 1], got {alpha}')
    values = log_speed(conformal_map, m)
    return float(np.max(np.abs(values))) + holder_seminorm(values, alpha)


def in_apriori_class(
    conformal_map: ConformalMap, bound: float, alpha: float, rtol: float = 1e-6
) -> bool:
    """Membership of ``g(D)`` in the class of perimeter-``2*pi`` domains with norm ``<= bound``."""
    length = perimeter(conformal_map)
    return abs(length - 2 * np.pi) <= rtol * 2 * np.pi and apriori_norm(
        conformal_map, alpha
    ) <= bound


def enclosure_radii(conformal_map: ConformalMap, m: int | None = None) -> tuple[float, float]:
    """Smallest and largest ``|g|`` on the boundary."""
    m = boundary_grid_size(conformal_map) if m is None else m
    radii = np.abs(evaluate(conformal_map, np.exp(1j * grid(m))))
    return float(radii.min()), float(radii.max())


def translated_hausdorff(
    polygon: shapely.Polygon,
    vertices: NDArray[np.float64],
    center: ArrayLike,
    n_samples: int = 1024,
) -> float:
    """Hausdorff distance between the region and the closed unit disk around ``center``.

    The region-to-disk part is exact on the vertices. The disk-to-region part is sampled on
    the circle plus the disk center.
    """
    c = np.asarray(center, dtype=np.float64)
    outside = max(0.0, float(np.max(np.hypot(*(vertices - c).T))) - 1.0)
    theta = grid(n_samples)
    targets = np.vstack([c, c + np.column_stack([np.cos(theta), np.sin(theta)])])
    uncovered = float(np.max(shapely.distance(polygon, shapely.points(targets))))
    return max(outside, uncovered)


def hausdorff_to_disk(curve: ArrayLike, n_samples: int = 1024) -> float:
    """``inf_z d_H(region, unit disk + z)`` by a downhill simplex from the centroid."""
    vertices = np.asarray(curve, dtype=np.float64)
    if vertices.ndim != 2 or vertices.shape[1] != 2 or vertices.shape[0] < 3:
        raise GeometryError('A closed polyline needs at least 3 plane points')
    polygon = shapely.Polygon(vertices)
    if polygon.area <= 1e-12 * max(1.0, float(np.max(np.abs(vertices))) ** 2):
        raise GeometryError(f'Polyline encloses no area ({polygon.area:.3e})')
    shapely.prepare(polygon)

    def objective(center: NDArray[np.float64]) -> float:
        return translated_hausdorff(polygon, vertices, center, n_samples)

    start = np.array([polygon.centroid.x, polygon.centroid.y])
    result = minimize(
        objective,
        start,
        method='Nelder-Mead',
        options={'xatol': 1e-7, 'fatol': 1e-10, 'initial_simplex': _simplex(start, 0.01)},
    )
    logger.debug('Hausdorff search: %d evaluations, center %s', result.nfev, result.x)
    return min(float(result.fun), objective(start))


def _simplex(start: NDArray[np.float64], size: float) -> NDArray[np.float64]:
    return np.array([start, start + [size, 0.0], start + [0.0, size]])


def _trim(coeffs: NDArray[np.complex128], tol: float = 1e-15) -> NDArray[np.complex128]:
    magnitudes = np.abs(coeffs)
    if magnitudes.max() == 0.0:
        return coeffs[:1]
    significant = np.flatnonzero(magnitudes > tol * magnitudes.max())
    return coeffs[: significant[-1] + 1]
