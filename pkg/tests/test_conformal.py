import numpy as np
import pytest

from weinstock.circle_fourier import grid
from weinstock.conformal import (
    BLOCH_CONSTANT,
    ConformalMap,
    apriori_norm,
    boundary_curve,
    boundary_grid_size,
    boundary_weight,
    derivative,
    disk_grid,
    enclosure_radii,
    evaluate,
    hausdorff_to_disk,
    in_apriori_class,
    perimeter,
    reconstruct,
    second_derivative,
    series_exp,
    series_log,
    univalence_margin,
)
from weinstock.errors import AliasingError, GeometryError, InvalidWeightError
from weinstock.steklov_disk import BoundaryWeight, linf_distance, random_normalized_weight


def speed_weight(a: float, n: int, m: int = 1024) -> BoundaryWeight:
    return BoundaryWeight.from_samples(np.abs(1 + a * np.exp(1j * n * grid(m))))


def test_series_exp_and_log_are_inverse():
    coeffs = np.array([0.2, 0.5 - 0.1j, 0.0, 0.3j, -0.25])
    assert np.allclose(series_log(series_exp(coeffs)), coeffs)
    assert np.allclose(series_exp([0.0, 1.0, 0.0, 0.0]), [1.0, 1.0, 0.5, 1 / 6])


def test_reconstruct_constant_weight():
    identity = reconstruct(BoundaryWeight.constant(1.0, 64))
    assert np.allclose(identity.map_coeffs[:2], [0.0, 1.0])
    assert np.max(np.abs(identity.map_coeffs[2:])) < 1e-14
    assert identity.degree == 1

    doubled = reconstruct(BoundaryWeight.constant(2.0, 64))
    assert doubled.map_coeffs[1] == pytest.approx(2.0)
    assert doubled.degree == 1


@pytest.mark.parametrize('a', [0.1, 0.3])
@pytest.mark.parametrize('n', [2, 4, 8])
def test_reconstruct_polynomial_map(a: float, n: int):
    conformal_map = reconstruct(speed_weight(a, n))
    expected = np.zeros(conformal_map.map_coeffs.size, dtype=np.complex128)
    expected[1] = 1.0
    expected[n + 1] = a / (n + 1)
    assert np.max(np.abs(conformal_map.map_coeffs - expected)) < 1e-8
    assert conformal_map.tail_energy == 0.0
    assert conformal_map.truncation_warning is None


def test_reconstruct_roundtrip_on_boundary():
    weight = BoundaryWeight.from_function(lambda t: np.exp(0.2 * np.cos(3 * t)), 512)
    conformal_map = reconstruct(weight)
    speed = np.abs(derivative(conformal_map, np.exp(1j * grid(512))))
    assert np.max(np.abs(speed - weight.samples)) < 1e-9
    assert derivative(conformal_map, 0.0).imag == pytest.approx(0.0)
    assert derivative(conformal_map, 0.0).real > 0


def test_reconstruct_warns_on_truncation():
    weight = BoundaryWeight.from_function(lambda t: np.exp(0.3 * np.cos(5 * t)), 256)
    with pytest.warns(RuntimeWarning):
        conformal_map = reconstruct(weight, 2)
    assert conformal_map.tail_energy == pytest.approx(0.15 * np.sqrt(2))
    assert conformal_map.truncation_warning is not None


def test_reconstruct_rejects_oversized_truncation():
    with pytest.raises(AliasingError):
        reconstruct(BoundaryWeight.constant(1.0, 16), 8)


def test_reconstruct_requires_positive_weight():
    with pytest.raises(InvalidWeightError):
        reconstruct(BoundaryWeight.from_samples(np.cos(grid(16))))


def test_from_map_coeffs():
    conformal_map = ConformalMap.from_map_coeffs([0.5, 1.0, 0.0, 0.0, 0.0, 0.06, 0.0])
    assert conformal_map.map_coeffs[0] == 0.0
    assert conformal_map.degree == 5
    assert conformal_map.n_terms == 4
    assert derivative(conformal_map, 1.0) == pytest.approx(1.3)
    assert second_derivative(conformal_map, 1.0) == pytest.approx(1.2)
    assert evaluate(conformal_map, 1.0) == pytest.approx(1.06)
    assert np.allclose(series_exp(conformal_map.deriv_log_coeffs), conformal_map.deriv_coeffs)


def test_boundary_curve():
    curve = boundary_curve(ConformalMap.identity(), 4)
    assert np.allclose(curve, [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-15)
    doubled = boundary_curve(ConformalMap.from_map_coeffs([0.0, 2.0]), 64)
    assert np.allclose(np.hypot(*doubled.T), 2.0)


def test_perimeter_and_radii():
    doubled = ConformalMap.from_map_coeffs([0.0, 2.0])
    assert perimeter(ConformalMap.identity()) == pytest.approx(2 * np.pi)
    assert perimeter(doubled) == pytest.approx(4 * np.pi)
    assert enclosure_radii(doubled) == pytest.approx((2.0, 2.0))


def test_boundary_grid_size():
    assert boundary_grid_size(ConformalMap.identity()) == 1024
    assert boundary_grid_size(ConformalMap.from_map_coeffs(np.ones(40))) == 4096


def test_boundary_weight_of_polynomial_map():
    conformal_map = ConformalMap.from_map_coeffs([0.0, 1.0, 0.0, 0.0, 0.0, 0.06])
    weight = boundary_weight(conformal_map, 256)
    expected = np.abs(1 + 0.3 * np.exp(4j * grid(256)))
    assert np.allclose(weight.samples, expected)
    assert weight.mean == pytest.approx(perimeter(conformal_map) / (2 * np.pi))


def test_univalence_margin():
    assert univalence_margin(ConformalMap.identity()) == 0.0
    margin = univalence_margin(ConformalMap.from_map_coeffs([0.0, 1.0, 0.0, 0.0, 0.0, 0.06]))
    assert 0.0 < margin < 1.0
    # z + z^2 / 2 has g'(-1) = 0 and is not locally univalent on the closed disk
    assert univalence_margin(ConformalMap.from_map_coeffs([0.0, 1.0, 0.5])) > 1.0


def test_apriori_norm():
    assert apriori_norm(ConformalMap.identity(), 1.0) == 0.0
    assert in_apriori_class(ConformalMap.identity(), 0.1, 1.0)
    doubled = ConformalMap.from_map_coeffs([0.0, 2.0])
    assert apriori_norm(doubled, 0.5) == pytest.approx(np.log(2))
    assert not in_apriori_class(doubled, 10.0, 1.0)


def test_hausdorff_to_disk():
    curve = boundary_curve(ConformalMap.identity(), 1024)
    assert hausdorff_to_disk(curve) < 1e-4
    assert hausdorff_to_disk(curve + [0.3, -0.2]) < 1e-4
    assert hausdorff_to_disk(2 * curve) == pytest.approx(1.0, abs=1e-4)


def test_hausdorff_rejects_degenerate_polyline():
    with pytest.raises(GeometryError):
        hausdorff_to_disk([[0, 0], [1, 1], [2, 2]])
    with pytest.raises(GeometryError):
        hausdorff_to_disk([[0, 0], [1, 1]])


@pytest.mark.parametrize('seed', range(3))
def test_hausdorff_lemma(seed: int):
    rng = np.random.default_rng(seed)
    weight = random_normalized_weight(rng, 4, 0.05, 512)
    conformal_map = reconstruct(weight)
    eps = linf_distance(boundary_weight(conformal_map, 512))
    assert hausdorff_to_disk(boundary_curve(conformal_map, 512), 512) <= 3 * eps


@pytest.mark.parametrize('seed', range(3))
def test_univalence_criterion(seed: int):
    rng = np.random.default_rng(100 + seed)
    weight = random_normalized_weight(rng, 8, 0.2, 512)
    assert univalence_margin(reconstruct(weight)) <= 1.0


@pytest.mark.parametrize('seed', range(3))
def test_maximum_principle(seed: int):
    rng = np.random.default_rng(200 + seed)
    conformal_map = reconstruct(random_normalized_weight(rng, 12, 0.3, 512))
    boundary = boundary_weight(conformal_map, 2048)
    interior = np.abs(derivative(conformal_map, disk_grid(512)))
    assert interior.min() >= boundary.min_value - 1e-9
    assert interior.max() <= boundary.max_value + 1e-9


@pytest.mark.parametrize('seed', range(3))
def test_enclosure_radii(seed: int):
    rng = np.random.default_rng(300 + seed)
    conformal_map = reconstruct(random_normalized_weight(rng, 6, 0.05, 512))
    eps = linf_distance(boundary_weight(conformal_map, 2048))
    inner, outer = enclosure_radii(conformal_map, 2048)
    factor = 1 + 1 / BLOCH_CONSTANT
    assert 1 - factor * eps <= inner <= outer <= 1 + factor * eps


@pytest.mark.parametrize('seed', range(3))
def test_second_derivative_bloch_bound(seed: int):
    rng = np.random.default_rng(400 + seed)
    conformal_map = reconstruct(random_normalized_weight(rng, 8, 0.1, 512))
    eps = linf_distance(boundary_weight(conformal_map, 2048))
    points = disk_grid(512)
    bound = eps / (BLOCH_CONSTANT * (1 - np.abs(points)))
    assert np.all(np.abs(second_derivative(conformal_map, points)) <= bound * (1 + 1e-9))
