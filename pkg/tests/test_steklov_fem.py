import numpy as np
import pytest

from weinstock.conformal import ConformalMap, boundary_curve, boundary_weight
from weinstock.constructions import StarBoundary
from weinstock.errors import InvalidInputError, MeshQualityError
from weinstock.steklov_disk import converged_spectrum
from weinstock.steklov_fem import (
    Mesh,
    assemble,
    build_mesh,
    mesh_ladder,
    richardson_extrapolate,
    solve_steklov,
    steklov_spectrum,
)


def test_build_mesh_on_circle():
    mesh = build_mesh(StarBoundary.circle(1.0, 256), 4, 32)
    assert mesh.n_nodes == 1 + 4 * 32
    assert len(mesh.triangles) == 32 + 2 * 3 * 32
    assert len(mesh.boundary_edges) == 32
    assert np.all(mesh.areas > 0)
    assert mesh.perimeter == pytest.approx(64 * np.sin(np.pi / 32))
    assert np.sum(mesh.areas) == pytest.approx(16 * np.sin(2 * np.pi / 32))
    assert np.allclose(np.hypot(*mesh.nodes[mesh.boundary_nodes].T), 1.0)


def test_build_mesh_rejects_coarse_parameters():
    circle = StarBoundary.circle(1.0, 64)
    with pytest.raises(InvalidInputError):
        build_mesh(circle, 1, 32)
    with pytest.raises(InvalidInputError):
        build_mesh(circle, 4, 4)


def test_assemble():
    mesh = build_mesh(StarBoundary.circle(1.0, 256), 4, 32)
    stiffness, boundary_mass = assemble(mesh)
    assert np.allclose(stiffness @ np.ones(mesh.n_nodes), 0.0, atol=1e-12)
    assert abs(stiffness - stiffness.T).max() < 1e-12
    assert boundary_mass.sum() == pytest.approx(mesh.perimeter)
    x = mesh.nodes[:, 0]
    # the energy of u = x is exact for P1 elements
    assert x @ (stiffness @ x) == pytest.approx(np.sum(mesh.areas))


def test_assemble_rejects_degenerate_triangles():
    nodes = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0, 0.0]])
    triangles = np.array([[0, 1, 2], [0, 1, 3]])
    edges = np.array([[1, 2], [2, 0], [0, 1]])
    mesh = Mesh(nodes, triangles, edges, np.hypot(*(nodes[edges[:, 1]] - nodes[edges[:, 0]]).T))
    with pytest.raises(MeshQualityError):
        assemble(mesh)


def test_translated_mesh_has_same_spectrum():
    mesh = build_mesh(StarBoundary.circle(1.0, 256), 4, 32)
    shifted = mesh.translated([0.5, -0.25])
    original = solve_steklov(*assemble(mesh), 3)
    moved = solve_steklov(*assemble(shifted), 3)
    assert np.allclose(original, moved)


def test_solve_steklov_rejects_large_k_max():
    mesh = build_mesh(StarBoundary.circle(1.0, 64), 2, 8)
    with pytest.raises(InvalidInputError):
        solve_steklov(*assemble(mesh), 8)


def test_disk_spectrum_converges():
    circle = StarBoundary.circle(1.0, 1024)
    spectra = mesh_ladder(circle, [(4, 32), (8, 64), (16, 128)], 4)
    for eigenvalues in spectra:
        assert abs(eigenvalues[0]) < 1e-8
    errors = [abs(eigenvalues[1] - 1.0) for eigenvalues in spectra]
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 0.01
    assert spectra[2][2] == pytest.approx(spectra[2][1], rel=1e-6)
    assert spectra[2][3] == pytest.approx(2.0, rel=0.05)


def test_cross_solver_agreement():
    conformal_map = ConformalMap.from_map_coeffs([0.0, 1.0, 0.0, 0.0, 0.0, 0.06])
    boundary = StarBoundary.from_points(boundary_curve(conformal_map, 1024))
    fem = [steklov_spectrum(boundary, r, s, 1)[1] for r, s in [(8, 64), (16, 128), (32, 256)]]
    limit, _ = richardson_extrapolate(fem)
    reference = converged_spectrum(boundary_weight(conformal_map)).eigenvalues[1]
    assert limit == pytest.approx(reference, rel=0.01)


def test_richardson_extrapolate():
    limit, order = richardson_extrapolate([1.1, 1.025, 1.00625])
    assert limit == pytest.approx(1.0)
    assert order == pytest.approx(2.0)


def test_richardson_without_geometric_decay():
    limit, order = richardson_extrapolate([1.0, 1.1, 1.05])
    assert limit == 1.05
    assert np.isnan(order)
    with pytest.raises(InvalidInputError):
        richardson_extrapolate([1.0, 2.0])
