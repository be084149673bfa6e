"""Explicit families of domains and weights.

* Sawtooth homogenization: boundaries whose arc length converges weakly to ``Theta dH^1``.
* The instability sequence ``g_n(z) = g(z) + z^{n+1} f(z) / (n+1)``.
* The sharpness weights ``Theta_n = 1 + a_n cos(n t)``.
"""

from dataclasses import dataclass
from logging import getLogger
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import cumulative_trapezoid
from scipy.special import ellipe

from weinstock.circle_fourier import FourierSeries, analyze, evaluate, grid
from weinstock.conformal import (
    ConformalMap,
    boundary_grid_size,
    derivative,
    outer_function,
)
from weinstock.errors import (
    GeometryError,
    InvalidInputError,
    InvalidWeightError,
    PreconditionError,
)
from weinstock.steklov_disk import BoundaryWeight

logger = getLogger(__name__)

P_MAX = 4 / np.pi
DEFAULT_CORNER_WIDTH = 0.1

type PlaneFunction = Callable[[NDArray[np.float64], NDArray[np.float64]], ArrayLike]


@dataclass(frozen=True, eq=False)
class StarBoundary:
    """Closed counter-clockwise polyline, star-shaped with respect to the origin.

    ``radius`` holds the Fourier series of ``r(theta)`` for radial graphs and is ``None``
    for parametric curves. ``perimeter`` is the length of the polyline.
    """

    points: NDArray[np.float64]
    radius: FourierSeries | None
    perimeter: float

    @classmethod
    def from_radius(cls, samples: ArrayLike) -> 'StarBoundary':
        r = np.asarray(samples, dtype=np.float64)
        if r.ndim != 1 or r.size < 3:
            raise InvalidInputError('Radius samples must be a one-dimensional grid of size >= 3')
        if np.min(r) <= 0.0:
            raise GeometryError(f'Radial graph must be positive, attained minimum {np.min(r):.6g}')
        theta = grid(r.size)
        points = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
        return cls(points, analyze(r), _polyline_length(points))

    @classmethod
    def circle(cls, radius: float = 1.0, m: int = 1024) -> 'StarBoundary':
        return cls.from_radius(np.full(m, float(radius)))

    @classmethod
    def from_points(cls, points: ArrayLike) -> 'StarBoundary':
        """Parametric boundary; every ray from the origin must cross it exactly once."""
        vertices = np.asarray(points, dtype=np.float64)
        if vertices.ndim != 2 or vertices.shape[1] != 2 or vertices.shape[0] < 3:
            raise GeometryError('A closed polyline needs at least 3 plane points')
        following = np.roll(vertices, -1, axis=0)
        turns = vertices[:, 0] * following[:, 1] - vertices[:, 1] * following[:, 0]
        angles = np.arctan2(turns, np.sum(vertices * following, axis=1))
        if np.any(np.hypot(*vertices.T) == 0.0) or np.any(turns <= 0.0):
            raise GeometryError('Polyline is not star-shaped with respect to the origin')
        if abs(np.sum(angles) - 2 * np.pi) > 1e-8:
            raise GeometryError('Polyline winds around the origin more than once')
        return cls(vertices, None, _polyline_length(vertices))

    @property
    def is_radial(self) -> bool:
        return self.radius is not None

    def radius_at(self, theta: ArrayLike) -> NDArray[np.float64]:
        """Distance from the origin to the boundary along the rays ``theta``."""
        angles = np.asarray(theta, dtype=np.float64)
        if self.radius is not None:
            return evaluate(self.radius, angles).real

        vertex_angles = np.unwrap(np.arctan2(self.points[:, 1], self.points[:, 0]))
        start = vertex_angles[0]
        wrapped = start + np.mod(angles - start, 2 * np.pi)
        index = np.searchsorted(vertex_angles, wrapped, side='right') - 1
        p = self.points[index]
        q = self.points[(index + 1) % len(self.points)]
        edge = q - p
        u = np.stack([np.cos(wrapped), np.sin(wrapped)], axis=-1)
        denominator = u[..., 0] * edge[..., 1] - u[..., 1] * edge[..., 0]
        if np.any(np.abs(denominator) < 1e-300):
            raise GeometryError('Ray runs parallel to a boundary edge')
        return (p[..., 0] * edge[..., 1] - p[..., 1] * edge[..., 0]) / denominator

    def points_at(self, theta: ArrayLike) -> NDArray[np.float64]:
        angles = np.asarray(theta, dtype=np.float64)
        r = self.radius_at(angles)
        return np.stack([r * np.cos(angles), r * np.sin(angles)], axis=-1)


def sawtooth(x: ArrayLike) -> NDArray[np.float64]:
    """2-periodic triangle wave with ``d(0) = 0`` and ``d(1) = 1``."""
    return 1.0 - np.abs(np.mod(np.asarray(x, dtype=np.float64), 2.0) - 1.0)


def smoothed_sawtooth(x: ArrayLike, width: float = DEFAULT_CORNER_WIDTH) -> NDArray[np.float64]:
    """Sawtooth with parabolic corners over ``width`` around every integer.

    The blend matches value and slope of the ramps where it ends.
    """
    if not 0.0 < width < 1.0:
        raise InvalidInputError(f'Corner width must lie in (0, 1), got {width}')
    x = np.asarray(x, dtype=np.float64)
    half = width / 2
    values = sawtooth(x)
    corner = np.round(x)
    offset = x - corner
    near = np.abs(offset) < half
    rounding = half / 2 + offset**2 / (2 * half)
    is_top = np.mod(corner, 2.0) == 1.0
    values = np.where(near & is_top, 1.0 - rounding, values)
    values = np.where(near & ~is_top, rounding, values)
    return values


def oscillating_domain(
    base: StarBoundary,
    weight: BoundaryWeight,
    k: int,
    samples_per_tooth: int = 16,
    corner_width: float | None = None,
) -> StarBoundary:
    """Boundary ``x + lambda(x) eps (d(s / eps) - 1/2) nu(x)`` with ``lambda = sqrt(Theta^2 - 1)``.

    ``k`` counts the ramps of the teeth and ``eps = |dOmega| / k``; the weight is read at the
    polar angle of the base point. The teeth are centered on the base curve, so their
    peak-to-trough height is ``eps * lambda``. With ``corner_width`` the smoothed sawtooth is used.
    """
    if base.radius is None:
        raise InvalidInputError('Oscillations are built on radial-graph boundaries')
    if k < 2 or k % 2:
        raise InvalidInputError(f'Tooth count must be even and >= 2, got {k}')
    if samples_per_tooth < 2:
        raise InvalidInputError('At least 2 samples per tooth are required')
    if weight.min_value <= 1.0:
        raise InvalidWeightError(
            f'Oscillating boundaries need Theta > 1, attained minimum {weight.min_value:.6g}',
            minimum=weight.min_value,
        )

    fine = grid(max(4096, 4 * k * samples_per_tooth))
    fine_closed = np.append(fine, 2 * np.pi)
    _, tangent = _radial_curve(base.radius, fine_closed)
    arc = cumulative_trapezoid(np.hypot(*tangent.T), fine_closed, initial=0.0)
    length = float(arc[-1])
    eps = length / k

    s = eps * np.arange(k * samples_per_tooth) / samples_per_tooth
    theta = np.interp(s, arc, fine_closed)
    position, tangent = _radial_curve(base.radius, theta)
    normal = np.column_stack([tangent[:, 1], -tangent[:, 0]]) / np.hypot(*tangent.T)[:, None]

    if corner_width is None:
        profile = sawtooth(s / eps)
    else:
        profile = smoothed_sawtooth(s / eps, corner_width)
    profile = profile - 0.5
    slope = np.sqrt(evaluate(weight.series, theta).real ** 2 - 1.0)
    points = position + (slope * eps * profile)[:, None] * normal
    logger.debug('Oscillating boundary: k=%d, eps=%.4g, %d vertices', k, eps, len(points))
    return StarBoundary.from_points(points)


def measure_pairing(boundary: StarBoundary, test_fn: PlaneFunction) -> float:
    """``int phi dH^1`` over the polyline, Simpson's rule on every edge."""
    start = boundary.points
    end = np.roll(start, -1, axis=0)
    middle = (start + end) / 2

    def phi(p: NDArray[np.float64]) -> NDArray[np.float64]:
        return np.broadcast_to(np.asarray(test_fn(p[:, 0], p[:, 1]), dtype=np.float64), len(p))

    lengths = np.hypot(*(end - start).T)
    return float(np.sum(lengths * (phi(start) + 4 * phi(middle) + phi(end))) / 6)


def p_function(a: ArrayLike) -> NDArray[np.float64] | float:
    """Circular mean of ``|1 + a e^{it}|``, i.e. ``(2/pi)(1 + a) E(4a / (1 + a)^2)``."""
    values = np.asarray(a, dtype=np.float64)
    if np.any(values < 0.0):
        raise InvalidInputError('P is defined for a >= 0')
    result = 2 / np.pi * (1 + values) * ellipe(4 * values / (1 + values) ** 2)
    if result.ndim == 0:
        return float(result)
    return result


def p_inverse(y: ArrayLike) -> NDArray[np.float64] | float:
    """Inverse of :func:`p_function` on ``[1, 4/pi)``, by vectorized bisection on ``[0, 1]``."""
    target = np.asarray(y, dtype=np.float64)
    if np.any(target < 1.0) or np.any(target >= P_MAX):
        raise InvalidInputError(
            f'P^-1 is defined on [1, 4/pi), got values in [{target.min()}, {target.max()}]'
        )
    low = np.zeros_like(target)
    high = np.ones_like(target)
    for _ in range(64):
        middle = (low + high) / 2
        above = np.asarray(p_function(middle)) > target
        high = np.where(above, middle, high)
        low = np.where(above, low, middle)
    result = np.where(target == 1.0, 0.0, (low + high) / 2)
    if result.ndim == 0:
        return float(result)
    return result


def instability_map(base: ConformalMap, n: int, m: int | None = None) -> ConformalMap:
    """``g_n = g + z^{n+1} f / (n+1)`` with ``|f| = |g'| P^-1(Lambda / |g'|)`` on the circle.

    ``Lambda`` is the midpoint of ``(max|g'|, (4/pi) min|g'|)``; ``f`` is the outer function
    of its modulus with zero argument at the origin.
    """
    if n < 1:
        raise InvalidInputError(f'Oscillation order must be positive, got {n}')
    m = boundary_grid_size(base) if m is None else m
    speed = np.abs(derivative(base, np.exp(1j * grid(m))))
    ratio = float(speed.max() / speed.min())
    if ratio >= P_MAX:
        raise PreconditionError(
            f'max|g\'| / min|g\'| = {ratio:.6g} must be below 4/pi', measured=ratio
        )
    low, high = float(speed.max()), float(P_MAX * speed.min())
    level = (low + high) / 2

    modulus = speed * np.asarray(p_inverse(level / speed))
    log_series = analyze(np.log(modulus))
    n_terms = min(log_series.n_max, max(base.degree, 16))
    f_coeffs = outer_function(log_series, n_terms)

    coeffs = np.zeros(max(base.map_coeffs.size, n + 1 + f_coeffs.size), dtype=np.complex128)
    coeffs[: base.map_coeffs.size] += base.map_coeffs
    coeffs[n + 1 : n + 1 + f_coeffs.size] += f_coeffs / (n + 1)
    metadata = {
        'order': float(n),
        'lambda': level,
        'lambda_low': low,
        'lambda_high': high,
        'speed_ratio': ratio,
        'max_modulus_ratio': float(np.max(modulus / speed)),
    }
    logger.debug('Instability map n=%d with Lambda=%.6g', n, level)
    return ConformalMap.from_map_coeffs(coeffs, metadata)


@dataclass(frozen=True, eq=False)
class SharpnessWeight:
    """``Theta_n = 1 + a_n cos(n t)`` with ``a_n = n^{-(1-eps)/eps}`` and its predicted markers."""

    weight: BoundaryWeight
    order: int
    eps: float
    amplitude: float
    deficit_bound: float
    hausdorff_proxy: float

    @property
    def endpoint_bound(self) -> float:
        """Bound on ``|g_n(1) - 1 - a_n / n|`` for the reconstructed map.

        ``g_n(1) = 1 + a_n / (n + 1) - a_n^2 / 4 + O(a_n^2 / n)``; the ``a_n^2 / 4`` shift does not
        decay in ``n`` and is covered by the tail ``sum_{k>=2} a_n^k / k``.
        """
        a, n = self.amplitude, self.order
        return float(-np.log1p(-a) - a + a / (n * (n + 1)))


def sharpness_weight(n: int, eps: float, m: int | None = None) -> SharpnessWeight:
    if n < 4:
        raise InvalidInputError(f'Sharpness weights need n >= 4, got {n}')
    if not 0.0 < eps < 1.0:
        raise InvalidInputError(f'eps must lie in (0, 1), got {eps}')
    amplitude = float(n ** (-(1 - eps) / eps))
    if amplitude >= 1.0:
        raise InvalidWeightError(
            f'Amplitude a_n = {amplitude:.6g} must stay below 1', minimum=1.0 - amplitude
        )
    m = max(1024, 8 * n) if m is None else m
    series = FourierSeries.from_mapping({0: 1.0, n: amplitude / 2, -n: amplitude / 2}, m)
    return SharpnessWeight(
        BoundaryWeight.from_series(series, m),
        n,
        eps,
        amplitude,
        amplitude**2 / (n - 3),
        amplitude / n,
    )


def apriori_seminorm_bound(amplitude: float, n: int, alpha: float) -> float:
    """Bound ``2^{1-alpha} a n^alpha`` on the ``C^{0,alpha}`` seminorm of ``a cos(n t)``."""
    if not 0.0 < alpha <= 1.0:
        raise InvalidInputError(f'Hoelder exponent must lie in (0, 1], got {alpha}')
    return 2 ** (1 - alpha) * amplitude * n**alpha


def _radial_curve(
    radius: FourierSeries, theta: NDArray[np.float64]
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Points ``r(theta) e^{i theta}`` and their theta-derivatives."""
    r = evaluate(radius, theta).real
    dr = evaluate(FourierSeries(radius.coeffs * 1j * radius.indices, radius.grid_size), theta).real
    cos, sin = np.cos(theta), np.sin(theta)
    position = np.column_stack([r * cos, r * sin])
    tangent = np.column_stack([dr * cos - r * sin, dr * sin + r * cos])
    return position, tangent


def _polyline_length(points: NDArray[np.float64]) -> float:
    return float(np.sum(np.hypot(*(np.roll(points, -1, axis=0) - points).T)))
