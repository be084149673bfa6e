import numpy as np
import pytest

from weinstock.circle_fourier import grid
from weinstock.conformal import ConformalMap, derivative, evaluate, perimeter, reconstruct
from weinstock.constructions import (
    P_MAX,
    StarBoundary,
    apriori_seminorm_bound,
    instability_map,
    measure_pairing,
    oscillating_domain,
    p_function,
    p_inverse,
    sawtooth,
    sharpness_weight,
    smoothed_sawtooth,
)
from weinstock.errors import (
    GeometryError,
    InvalidInputError,
    InvalidWeightError,
    PreconditionError,
)
from weinstock.steklov_disk import BoundaryWeight


def test_circle_boundary():
    circle = StarBoundary.circle(2.0, 512)
    assert circle.is_radial
    assert circle.perimeter == pytest.approx(4 * np.pi, rel=1e-4)
    assert np.allclose(circle.radius_at([0.0, 1.0, 4.0]), 2.0)


def test_from_points_radius_at():
    square = StarBoundary.from_points([[1, -1], [1, 1], [-1, 1], [-1, -1]])
    assert not square.is_radial
    assert square.perimeter == pytest.approx(8.0)
    assert square.radius_at(0.0) == pytest.approx(1.0)
    assert square.radius_at(np.pi / 4) == pytest.approx(np.sqrt(2))
    assert square.radius_at(np.pi) == pytest.approx(1.0)
    assert np.allclose(square.points_at(np.pi / 2), [0.0, 1.0], atol=1e-12)


def test_from_points_rejects_clockwise():
    with pytest.raises(GeometryError):
        StarBoundary.from_points([[1, 1], [1, -1], [-1, -1], [-1, 1]])


def test_from_points_rejects_origin_outside():
    with pytest.raises(GeometryError):
        StarBoundary.from_points([[2, 0], [3, 0], [3, 1], [2, 1]])


def test_sawtooth():
    assert np.allclose(sawtooth([0.0, 0.5, 1.0, 1.5, 2.0]), [0.0, 0.5, 1.0, 0.5, 0.0])


def test_smoothed_sawtooth():
    x = np.array([0.5, 0.0, 1.0, 0.05, 0.95])
    values = smoothed_sawtooth(x, 0.1)
    assert values[0] == pytest.approx(0.5)
    assert values[1] == pytest.approx(0.025)
    assert values[2] == pytest.approx(0.975)
    assert np.allclose(values[3:], sawtooth(x[3:]))
    with pytest.raises(InvalidInputError):
        smoothed_sawtooth(x, 1.5)


def test_oscillating_domain_tooth_height():
    weight = BoundaryWeight.constant(np.sqrt(2), 256)
    boundary = oscillating_domain(StarBoundary.circle(1.0, 256), weight, 64)
    radii = np.hypot(*boundary.points.T)
    eps = 2 * np.pi / 64
    assert radii.max() - radii.min() == pytest.approx(eps, rel=1e-3)
    assert len(boundary.points) == 64 * 16


def test_oscillating_domain_perimeter():
    weight = BoundaryWeight.constant(np.sqrt(2), 256)
    boundary = oscillating_domain(StarBoundary.circle(1.0, 256), weight, 64)
    assert boundary.perimeter == pytest.approx(2 * np.pi * np.sqrt(2), rel=0.02)


def test_oscillating_domain_variable_weight():
    weight = BoundaryWeight.from_function(lambda t: 1.2 + 0.1 * np.cos(2 * t), 256)
    boundary = oscillating_domain(StarBoundary.circle(1.0, 256), weight, 128)
    assert boundary.perimeter == pytest.approx(2 * np.pi * 1.2, rel=0.02)


def test_oscillating_domain_preconditions():
    circle = StarBoundary.circle(1.0, 64)
    with pytest.raises(InvalidWeightError):
        oscillating_domain(circle, BoundaryWeight.constant(1.0, 64), 8)
    with pytest.raises(InvalidInputError):
        oscillating_domain(circle, BoundaryWeight.constant(1.5, 64), 7)


def test_measure_pairing_on_circle():
    circle = StarBoundary.circle(1.0, 2048)
    assert measure_pairing(circle, lambda x, y: 1.0) == pytest.approx(circle.perimeter)
    assert measure_pairing(circle, lambda x, y: x**2) == pytest.approx(np.pi, rel=1e-5)


def test_measure_pairing_converges_under_homogenization():
    weight = BoundaryWeight.from_function(lambda t: 1.2 + 0.1 * np.cos(2 * t), 256)
    t = grid(256)
    target = 2 * np.pi * np.mean((1.2 + 0.1 * np.cos(2 * t)) * np.cos(t) ** 2)
    circle = StarBoundary.circle(1.0, 256)
    errors = [
        abs(measure_pairing(oscillating_domain(circle, weight, k), lambda x, y: x**2) - target)
        for k in (16, 64)
    ]
    assert errors[1] < errors[0]
    assert errors[1] < 0.01 * target


def test_p_function():
    assert p_function(0.0) == pytest.approx(1.0)
    assert p_function(1.0) == pytest.approx(P_MAX)
    t = grid(4096)
    assert p_function(0.5) == pytest.approx(np.mean(np.abs(1 + 0.5 * np.exp(1j * t))), abs=1e-12)
    values = np.asarray(p_function(np.linspace(0, 1, 11)))
    assert np.all(np.diff(values) > 0)


def test_p_inverse():
    assert p_inverse(1.0) == 0.0
    assert p_inverse(p_function(0.5)) == pytest.approx(0.5, abs=1e-10)
    with pytest.raises(InvalidInputError):
        p_inverse(P_MAX)
    with pytest.raises(InvalidInputError):
        p_inverse(0.9)


@pytest.mark.parametrize('n', [4, 16])
def test_instability_map_on_identity(n: int):
    mapped = instability_map(ConformalMap.identity(), n)
    level = mapped.metadata['lambda']
    assert 1.0 < level < P_MAX
    amplitude = float(p_inverse(level))
    assert mapped.map_coeffs[1] == pytest.approx(1.0)
    assert mapped.map_coeffs[n + 1] == pytest.approx(amplitude / (n + 1), abs=1e-10)
    assert perimeter(mapped) == pytest.approx(2 * np.pi * level, rel=1e-10)
    speed = np.abs(derivative(mapped, np.exp(1j * grid(256))))
    assert speed.min() == pytest.approx(1 - amplitude, abs=1e-10)


def test_instability_perimeter_on_curved_base():
    base = ConformalMap.from_map_coeffs([0.0, 1.0, 0.0, 0.02])
    errors: list[float] = []
    log_sups: list[float] = []
    for n in (8, 16, 32):
        mapped = instability_map(base, n)
        errors.append(abs(perimeter(mapped) / (2 * np.pi * mapped.metadata['lambda']) - 1))
        speed = np.abs(derivative(mapped, np.exp(1j * grid(4096))))
        log_sups.append(float(np.max(np.abs(np.log(speed)))))
    assert errors[0] > errors[1] > errors[2]
    assert errors[-1] < 1e-3
    assert max(log_sups) <= 2 * min(log_sups)


def test_instability_map_precondition():
    with pytest.raises(PreconditionError) as info:
        instability_map(ConformalMap.from_map_coeffs([0.0, 1.0, 0.2]), 4)
    assert info.value.measured == pytest.approx(1.4 / 0.6, rel=1e-6)


def test_sharpness_weight():
    marked = sharpness_weight(16, 0.5)
    assert marked.amplitude == pytest.approx(1 / 16)
    assert marked.weight.mean == pytest.approx(1.0)
    assert marked.deficit_bound == pytest.approx((1 / 16) ** 2 / 13)
    assert marked.hausdorff_proxy == pytest.approx(1 / 256)
    with pytest.raises(InvalidInputError):
        sharpness_weight(2, 0.5)


@pytest.mark.parametrize('eps', [0.25, 0.5, 0.75])
@pytest.mark.parametrize('n', [8, 32])
def test_sharpness_endpoint_series(eps: float, n: int):
    marked = sharpness_weight(n, eps)
    at_one = complex(evaluate(reconstruct(marked.weight), 1.0))
    a = marked.amplitude
    assert abs(at_one - 1 - a / n) <= marked.endpoint_bound


def test_apriori_seminorm_bound():
    assert apriori_seminorm_bound(0.1, 8, 1.0) == pytest.approx(0.8)
    assert apriori_seminorm_bound(0.1, 4, 0.5) == pytest.approx(2**0.5 * 0.1 * 2)
