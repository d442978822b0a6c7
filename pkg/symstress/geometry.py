"""
Simplices, barycentric geometry and simplicial meshes of the unit hypercube.

A mesh stores its cells with vertex ids sorted ascending. Every
subsimplex is identified by its sorted tuple of global vertex ids, which
is also the only input to its frame: two cells sharing a face see the
same tangents and normals, and therefore the same degrees of freedom.
"""
import itertools
import logging
from dataclasses import dataclass
from math import factorial, sqrt
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from symstress.combinat import binomial
from symstress.errors import ConfigurationError, DegenerateSimplexError, ResourceLimitError

logger = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-12
NORMAL_SKIP_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Simplex:
    """An n-simplex with its affine map and barycentric covectors."""

    vertices: np.ndarray  # (n+1, n)
    jacobian: np.ndarray  # (n, n), columns x_i - x_0
    det: float
    measure: float
    grad_lambda: np.ndarray  # (n+1, n), rows grad(lambda_i)

    @property
    def n(self) -> int:
        return self.vertices.shape[1]

    @property
    def orientation(self) -> int:
        return 1 if self.det > 0 else -1

    def barycentric(self, x) -> np.ndarray:
        """Barycentric coordinates of one point (n,) or many points (npts, n)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        rest = (pts - self.vertices[0]) @ self.grad_lambda[1:].T
        lam = np.hstack([1.0 - rest.sum(axis=1, keepdims=True), rest])
        return lam[0] if single else lam

    def point(self, lam) -> np.ndarray:
        """Cartesian point(s) for barycentric coordinates."""
        return np.asarray(lam, dtype=float) @ self.vertices

    def diameter(self) -> float:
        diffs = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.sqrt((diffs ** 2).sum(axis=2)).max())

    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)


def simplex_from_vertices(vertices: Sequence[Sequence[float]]) -> Simplex:
    """
    Build a simplex from n+1 points in R^n.

    The rows of the inverse of (x_1 - x_0, ..., x_n - x_0) are grad(lambda_i), i >= 1,
    and grad(lambda_0) = -sum_{i>=1} grad(lambda_i).

    Raises:
        DegenerateSimplexError: if the vertices are affinely dependent.
    """
    verts = np.array(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[0] != verts.shape[1] + 1:
        raise DegenerateSimplexError(f"expected n+1 points in R^n, got array of shape {verts.shape}")
    n = verts.shape[1]
    jac = (verts[1:] - verts[0]).T
    det = float(np.linalg.det(jac))
    scale = max(float(np.abs(verts[:, None, :] - verts[None, :, :]).max()), 1e-300)
    if abs(det) <= DEGENERACY_TOL * scale ** n:
        raise DegenerateSimplexError(f"degenerate simplex (det={det:.3e}) with vertices {verts.tolist()}")
    inv = np.linalg.inv(jac)
    grads = np.vstack([-inv.sum(axis=0), inv])
    return Simplex(
        vertices=verts,
        jacobian=jac,
        det=det,
        measure=abs(det) / factorial(n),
        grad_lambda=grads,
    )


def edge_tangents(s: Simplex) -> Dict[Tuple[int, int], np.ndarray]:
    """Unnormalised tangents t_{i,j} = x_j - x_i for 0 <= i < j <= n."""
    verts = s.vertices
    return {
        (i, j): verts[j] - verts[i]
        for i, j in itertools.combinations(range(verts.shape[0]), 2)
    }


@dataclass(frozen=True, eq=False)
class SubsimplexFrame:
    vertex_ids: Tuple[int, ...]
    tangents: np.ndarray  # (ell, n)
    normals: np.ndarray  # (n - ell, n), orthonormal

    @property
    def ell(self) -> int:
        return len(self.vertex_ids) - 1


def frame_from_points(points: np.ndarray, vertex_ids: Tuple[int, ...] = ()) -> SubsimplexFrame:
    """
    Frame of the subsimplex spanned by `points` (ell+1 rows, ordered by global id).

    Tangents are x_{v_r} - x_{v_0}. Normals come from Gram-Schmidt applied to the
    Cartesian axes in index order against the tangent space, skipping axes that
    are nearly dependent on what has been accepted already.
    """
    points = np.asarray(points, dtype=float)
    n = points.shape[1]
    ell = points.shape[0] - 1
    tangents = points[1:] - points[0]

    accepted: List[np.ndarray] = []
    for t in tangents:
        w = t.copy()
        for q in accepted:
            w -= (q @ w) * q
        norm = np.linalg.norm(w)
        if norm <= DEGENERACY_TOL * max(np.linalg.norm(t), 1e-300):
            raise DegenerateSimplexError(f"degenerate subsimplex {vertex_ids or points.tolist()}")
        accepted.append(w / norm)

    normals: List[np.ndarray] = []
    for axis in np.eye(n):
        if len(normals) == n - ell:
            break
        w = axis.copy()
        for q in accepted:
            w -= (q @ w) * q
        for q in normals:
            w -= (q @ w) * q
        norm = np.linalg.norm(w)
        if norm < NORMAL_SKIP_TOL:
            continue
        w = w / norm
        normals.append(w)
        accepted.append(w)

    return SubsimplexFrame(
        vertex_ids=tuple(vertex_ids),
        tangents=tangents.reshape(ell, n),
        normals=np.array(normals, dtype=float).reshape(n - ell, n),
    )


class Mesh:
    """
    Simplicial mesh with a global face lattice.

    Attributes:
        points: (nverts, n) coordinates
        cells: (ncells, n+1) vertex ids, each row sorted ascending
        orientation: (ncells,) sign of det(x_1 - x_0, ..., x_n - x_0)
        subsimplices[ell]: sorted vertex-id tuples of all ell-subsimplices, by id
        face_lattice[ell]: tuple -> global id
        cell_to_subsimplex[ell]: (ncells, C(n+1, ell+1)) ids in local combination order
        subsimplex_to_cells[ell]: id -> list of cell indices
        mesh_size_h: max cell diameter
    """

    def __init__(self, points, cells, mesh_size_h: Optional[float] = None):
        self.points = np.array(points, dtype=float)
        if self.points.ndim != 2:
            raise ConfigurationError("points must be a 2D array")
        self.n = self.points.shape[1]
        cells = np.array(cells, dtype=np.int64).reshape(-1, self.n + 1)
        self.cells = np.sort(cells, axis=1)
        if self.cells.size and (self.cells.min() < 0 or self.cells.max() >= self.points.shape[0]):
            raise ConfigurationError("cell references a missing vertex")
        self.face_lattice: List[Dict[Tuple[int, ...], int]] = []
        self.subsimplices: List[List[Tuple[int, ...]]] = []
        self.cell_to_subsimplex: List[np.ndarray] = []
        self.subsimplex_to_cells: List[List[List[int]]] = []
        self._simplices: Dict[int, Simplex] = {}
        self._frames: Dict[Tuple[int, int], SubsimplexFrame] = {}
        self.orientation = np.array([self.simplex(c).orientation for c in range(self.num_cells)], dtype=int)
        if mesh_size_h is None:
            mesh_size_h = max((self.simplex(c).diameter() for c in range(self.num_cells)), default=0.0)
        self.mesh_size_h = float(mesh_size_h)

    @property
    def num_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def num_vertices(self) -> int:
        return self.points.shape[0]

    def counts(self) -> List[int]:
        """Number of ell-subsimplices for ell = 0 .. n-1."""
        return [len(subs) for subs in self.subsimplices]

    def simplex(self, cell: int) -> Simplex:
        """Geometry of a cell with its vertices in sorted global order."""
        if cell not in self._simplices:
            self._simplices[cell] = simplex_from_vertices(self.points[self.cells[cell]])
        return self._simplices[cell]

    def subsimplex_frame(self, ell: int, sub_id: int) -> SubsimplexFrame:
        return subsimplex_frame(self, ell, sub_id)

    def __repr__(self):
        return f"<Mesh n={self.n} cells={self.num_cells} vertices={self.num_vertices} h={self.mesh_size_h:.4g}>"


def build_face_lattice(mesh: Mesh) -> Mesh:
    """
    Register every ell-subsimplex (0 <= ell <= n-1) of every cell exactly once.

    Raises:
        ConfigurationError: on duplicate cells or out-of-range vertex ids.
    """
    n = mesh.n
    seen = set()
    for row in mesh.cells:
        key = tuple(int(v) for v in row)
        if key in seen:
            raise ConfigurationError(f"duplicate cell {key}")
        if len(set(key)) != n + 1:
            raise ConfigurationError(f"cell {key} repeats a vertex")
        if key[0] < 0 or key[-1] >= mesh.num_vertices:
            raise ConfigurationError(f"cell {key} references a missing vertex")
        seen.add(key)

    mesh.face_lattice, mesh.subsimplices, mesh.cell_to_subsimplex, mesh.subsimplex_to_cells = [], [], [], []
    for ell in range(n):
        lattice: Dict[Tuple[int, ...], int] = {}
        ordered: List[Tuple[int, ...]] = []
        incidence = np.empty((mesh.num_cells, binomial(n + 1, ell + 1)), dtype=np.int64)
        for c, row in enumerate(mesh.cells):
            for local, sub in enumerate(itertools.combinations(row.tolist(), ell + 1)):
                sub_id = lattice.get(sub)
                if sub_id is None:
                    sub_id = len(ordered)
                    lattice[sub] = sub_id
                    ordered.append(sub)
                incidence[c, local] = sub_id
        inverse: List[List[int]] = [[] for _ in ordered]
        for c in range(mesh.num_cells):
            for sub_id in incidence[c]:
                inverse[sub_id].append(c)
        mesh.face_lattice.append(lattice)
        mesh.subsimplices.append(ordered)
        mesh.cell_to_subsimplex.append(incidence)
        mesh.subsimplex_to_cells.append(inverse)
    logger.debug(f"Face lattice built: {mesh.counts()} subsimplices for {mesh.num_cells} cells")
    return mesh


def mesh_from_cells(points, cells, mesh_size_h: Optional[float] = None) -> Mesh:
    return build_face_lattice(Mesh(points, cells, mesh_size_h=mesh_size_h))


def single_cell_mesh(vertices) -> Mesh:
    """A one-cell mesh; local verification runs on the same objects as assembly."""
    verts = np.array(vertices, dtype=float)
    return mesh_from_cells(verts, [list(range(verts.shape[0]))])


def kuhn_mesh(n: int, m: int, cell_budget: Optional[int] = None) -> Mesh:
    """
    Kuhn triangulation of [0,1]^n: m^n subcubes, each split into n! path simplices
    x_0 = c, x_j = x_{j-1} + e_{pi(j-1)} for every permutation pi.

    Raises:
        ConfigurationError: if n < 1 or m < 1.
        ResourceLimitError: if n! * m^n exceeds `cell_budget`.
    """
    if n < 1 or m < 1:
        raise ConfigurationError(f"kuhn_mesh needs n >= 1 and m >= 1, got n={n}, m={m}")
    total = factorial(n) * m ** n
    if cell_budget is not None and total > cell_budget:
        raise ResourceLimitError(f"{total} cells requested for n={n}, m={m}; budget is {cell_budget}")

    strides = [(m + 1) ** d for d in range(n)]
    grid = np.array(list(itertools.product(range(m + 1), repeat=n)), dtype=float)[:, ::-1]
    # grid rows enumerate multi-indices with axis 0 fastest, matching `strides`
    points = grid / m

    def vertex_id(index):
        return sum(i * s for i, s in zip(index, strides))

    cells = []
    for corner in itertools.product(range(m), repeat=n):
        for perm in itertools.permutations(range(n)):
            current = list(corner)
            path = [vertex_id(current)]
            for axis in perm:
                current[axis] += 1
                path.append(vertex_id(current))
            cells.append(sorted(path))

    mesh = mesh_from_cells(points, cells, mesh_size_h=sqrt(n) / m)
    logger.debug(f"Kuhn mesh n={n}, m={m}: {mesh.num_cells} cells, {mesh.num_vertices} vertices")
    return mesh


def subsimplex_frame(mesh: Mesh, ell: int, sub_id: int) -> SubsimplexFrame:
    """
    Deterministic frame of an ell-subsimplex from its sorted global vertex tuple.

    Raises:
        ConfigurationError: if the subsimplex does not exist.
        DegenerateSimplexError: if its tangents are dependent.
    """
    key = (ell, sub_id)
    if key not in mesh._frames:
        if ell < 0 or ell >= mesh.n or sub_id < 0 or sub_id >= len(mesh.subsimplices[ell]):
            raise ConfigurationError(f"no {ell}-subsimplex with id {sub_id}")
        vertex_ids = mesh.subsimplices[ell][sub_id]
        mesh._frames[key] = frame_from_points(mesh.points[list(vertex_ids)], vertex_ids)
    return mesh._frames[key]


def facet_neighbours(mesh: Mesh) -> List[List[int]]:
    """Adjacent cells of every (n-1)-subsimplex: one on the boundary, two inside."""
    return mesh.subsimplex_to_cells[mesh.n - 1]


def local_subsimplex_index(mesh: Mesh, cell: int, ell: int, sub_id: int) -> Tuple[int, ...]:
    """Local vertex positions (0..n) of a subsimplex inside a cell."""
    row = mesh.cells[cell].tolist()
    return tuple(row.index(v) for v in mesh.subsimplices[ell][sub_id])


def mesh_to_json(mesh: Mesh) -> Dict:
    return {"points": mesh.points.tolist(), "cells": mesh.cells.tolist()}


def mesh_from_json(data: Dict) -> Mesh:
    """
    Rebuild a mesh from {"points": [[...]], "cells": [[ids]]}.

    Raises:
        ConfigurationError: on missing keys, wrong arity or duplicate cells.
        DegenerateSimplexError: on degenerate cells.
    """
    try:
        points = np.array(data["points"], dtype=float)
        cells = data["cells"]
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigurationError(f"malformed mesh JSON: {e}") from e
    if points.ndim != 2 or points.shape[0] == 0:
        raise ConfigurationError("mesh JSON needs a non-empty list of points")
    n = points.shape[1]
    if any(len(cell) != n + 1 for cell in cells):
        raise ConfigurationError(f"every cell needs {n + 1} vertex ids")
    return mesh_from_cells(points, cells)
