"""Piecewise-linear finite elements for the Steklov problem on star-shaped domains.

The pencil ``K u = sigma M u`` couples the P1 stiffness matrix ``K`` with the P1 mass matrix
``M`` of the boundary loop. Interior unknowns are eliminated first, leaving the discrete
Dirichlet-to-Neumann operator on the boundary nodes.
"""

from dataclasses import dataclass
from logging import getLogger
from typing import Iterable

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray
from scipy import sparse
from scipy.sparse.linalg import splu

from weinstock.circle_fourier import grid
from weinstock.constructions import StarBoundary
from weinstock.errors import (
    FactorizationError,
    GeometryError,
    InvalidInputError,
    MeshQualityError,
)

logger = getLogger(__name__)

GRADING = 1.2
# Ring count at which consecutive ring widths shrink by exactly GRADING.
GRADING_REFERENCE_RINGS = 8


@dataclass(frozen=True, eq=False)
class Mesh:
    """Triangulation with a single counter-clockwise boundary loop."""

    nodes: NDArray[np.float64]
    triangles: NDArray[np.int64]
    boundary_edges: NDArray[np.int64]
    boundary_lengths: NDArray[np.float64]

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def boundary_nodes(self) -> NDArray[np.int64]:
        return self.boundary_edges[:, 0]

    @property
    def perimeter(self) -> float:
        return float(self.boundary_lengths.sum())

    @property
    def areas(self) -> NDArray[np.float64]:
        """Signed triangle areas."""
        p, q, r = (self.nodes[self.triangles[:, i]] for i in range(3))
        return 0.5 * _cross(q - p, r - p)

    def translated(self, offset: ArrayLike) -> 'Mesh':
        return Mesh(
            self.nodes + np.asarray(offset, dtype=np.float64),
            self.triangles,
            self.boundary_edges,
            self.boundary_lengths,
        )


def build_mesh(
    boundary: StarBoundary, n_radial: int, n_angular: int, grading: float = GRADING
) -> Mesh:
    """Radial-blend mesh ``x(rho_i, theta_j) = rho_i p(theta_j)``.

    ``p(theta)`` is the boundary point on the ray ``theta``. With 8 rings consecutive ring
    widths shrink by the factor ``grading`` towards the boundary; other ring counts refine
    the same distribution uniformly, so the ratio becomes ``grading ** (8 / n_radial)``.
    """
    if n_radial < 2:
        raise InvalidInputError(f'n_radial must be >= 2, got {n_radial}')
    if n_angular < 8:
        raise InvalidInputError(f'n_angular must be >= 8, got {n_angular}')

    ratio = grading ** (GRADING_REFERENCE_RINGS / n_radial)
    widths = ratio ** -np.arange(n_radial, dtype=np.float64)
    rho = np.cumsum(widths) / widths.sum()
    rho[-1] = 1.0
    outer = boundary.points_at(grid(n_angular))
    if not np.all(np.isfinite(outer)) or np.any(np.hypot(*outer.T) <= 0.0):
        raise GeometryError('Boundary is not star-shaped with respect to the origin')

    nodes = np.vstack([np.zeros((1, 2)), np.concatenate([r * outer for r in rho])])

    def node(ring: NDArray[np.int64] | int, sector: NDArray[np.int64]) -> NDArray[np.int64]:
        return 1 + (np.asarray(ring) - 1) * n_angular + sector % n_angular

    j = np.arange(n_angular)
    fan = np.column_stack([np.zeros(n_angular, dtype=np.int64), node(1, j), node(1, j + 1)])
    blocks = [fan]
    for ring in range(1, n_radial):
        a, b = node(ring, j), node(ring, j + 1)
        c, d = node(ring + 1, j + 1), node(ring + 1, j)
        blocks.append(np.column_stack([a, d, c]))
        blocks.append(np.column_stack([a, c, b]))
    triangles = np.vstack(blocks).astype(np.int64)

    edges = np.column_stack([node(n_radial, j), node(n_radial, j + 1)]).astype(np.int64)
    lengths = np.hypot(*(nodes[edges[:, 1]] - nodes[edges[:, 0]]).T)
    mesh = Mesh(nodes, triangles, edges, lengths)
    if np.any(mesh.areas <= 0.0):
        raise GeometryError('Ray construction produced inverted triangles')
    logger.debug(
        'Mesh: %d nodes, %d triangles, %d boundary edges', mesh.n_nodes, len(triangles), len(edges)
    )
    return mesh


def assemble(mesh: Mesh) -> tuple[sparse.csc_matrix, sparse.csc_matrix]:
    """P1 stiffness matrix and P1 mass matrix of the boundary loop."""
    areas = mesh.areas
    total = float(np.sum(np.abs(areas)))
    if np.any(areas < 1e-14 * total):
        raise MeshQualityError(
            f'Degenerate triangle: area {areas.min():.3e} against domain area {total:.3e}'
        )

    t1, t2, t3 = mesh.triangles.T
    v1, v2, v3 = mesh.nodes[t1], mesh.nodes[t2], mesh.nodes[t3]
    v2mv1, v3mv2, v1mv3 = v2 - v1, v3 - v2, v1 - v3
    vol = 4 * areas
    # off-diagonal entries are -cot/2 of the opposite angle
    a12 = np.sum(v3mv2 * v1mv3, axis=1) / vol
    a23 = np.sum(v1mv3 * v2mv1, axis=1) / vol
    a31 = np.sum(v2mv1 * v3mv2, axis=1) / vol
    a11 = -a12 - a31
    a22 = -a12 - a23
    a33 = -a31 - a23
    local = np.column_stack((a12, a12, a23, a23, a31, a31, a11, a22, a33)).reshape(-1)
    i = np.column_stack((t1, t2, t2, t3, t3, t1, t1, t2, t3)).reshape(-1)
    j = np.column_stack((t2, t1, t3, t2, t1, t3, t1, t2, t3)).reshape(-1)
    shape = (mesh.n_nodes, mesh.n_nodes)
    stiffness = sparse.csc_matrix((local, (i, j)), shape=shape)

    e1, e2 = mesh.boundary_edges.T
    diagonal = mesh.boundary_lengths / 3
    off = mesh.boundary_lengths / 6
    local_b = np.column_stack((off, off, diagonal, diagonal)).reshape(-1)
    i_b = np.column_stack((e1, e2, e1, e2)).reshape(-1)
    j_b = np.column_stack((e2, e1, e1, e2)).reshape(-1)
    boundary_mass = sparse.csc_matrix((local_b, (i_b, j_b)), shape=shape)
    return stiffness, boundary_mass


def solve_steklov(
    stiffness: sparse.spmatrix, boundary_mass: sparse.spmatrix, k_max: int
) -> NDArray[np.float64]:
    """Eigenvalues ``sigma_0..sigma_kmax`` of the pencil by static condensation."""
    if k_max < 0:
        raise InvalidInputError(f'k_max must be non-negative, got {k_max}')
    stiffness = sparse.csc_matrix(stiffness)
    boundary_mass = sparse.csc_matrix(boundary_mass)
    on_boundary = boundary_mass.diagonal() > 0.0
    boundary = np.flatnonzero(on_boundary)
    interior = np.flatnonzero(~on_boundary)
    if k_max >= boundary.size:
        raise InvalidInputError(f'k_max={k_max} exceeds the {boundary.size} boundary nodes')

    a_bb = stiffness[boundary][:, boundary].toarray()
    if interior.size:
        a_ii = stiffness[interior][:, interior].tocsc()
        a_ib = stiffness[interior][:, boundary].toarray()
        try:
            lu = splu(a_ii)
        except RuntimeError as ex:
            raise FactorizationError(
                'Interior stiffness block is singular; the mesh is disconnected'
            ) from ex
        schur = a_bb - a_ib.T @ lu.solve(a_ib)
    else:
        schur = a_bb
    schur = (schur + schur.T) / 2
    mass = boundary_mass[boundary][:, boundary].toarray()

    try:
        eigenvalues = scipy.linalg.eigh(schur, mass, eigvals_only=True, subset_by_index=[0, k_max])
    except np.linalg.LinAlgError as ex:
        raise FactorizationError('Boundary mass matrix is not positive definite') from ex
    return np.asarray(eigenvalues)


def steklov_spectrum(
    boundary: StarBoundary, n_radial: int, n_angular: int, k_max: int
) -> NDArray[np.float64]:
    return solve_steklov(*assemble(build_mesh(boundary, n_radial, n_angular)), k_max)


def mesh_ladder(
    boundary: StarBoundary, levels: Iterable[tuple[int, int]], k_max: int
) -> list[NDArray[np.float64]]:
    """Spectra on a sequence of ``(n_radial, n_angular)`` refinements."""
    spectra: list[NDArray[np.float64]] = []
    for n_radial, n_angular in levels:
        spectra.append(steklov_spectrum(boundary, n_radial, n_angular, k_max))
        logger.debug('Mesh %dx%d: sigma_1 = %.10g', n_radial, n_angular, spectra[-1][1])
    return spectra


def richardson_extrapolate(values: ArrayLike) -> tuple[float, float]:
    """Extrapolate three values from meshes refined by a factor 2.

    Returns ``(limit, observed_order)``. When the differences do not decay geometrically
    the finest value is returned with an order of ``nan``.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.shape != (3,):
        raise InvalidInputError('Richardson extrapolation takes exactly three values')
    coarse, middle, fine = v
    if middle == fine or coarse == middle:
        return float(fine), float('nan')
    ratio = (coarse - middle) / (middle - fine)
    if not ratio > 1.0:
        return float(fine), float('nan')
    order = float(np.log2(ratio))
    return float(fine + (fine - middle) / (ratio - 1.0)), order


def _cross(u: NDArray[np.float64], v: NDArray[np.float64]) -> NDArray[np.float64]:
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
