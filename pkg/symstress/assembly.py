"""
Global numbering and assembly of the mixed system

    [ A  B^T ] [sigma]   [0]
    [ B  0   ] [  u  ] = [F]

Face-moment DOFs are shared through the face lattice; bubbles and
displacements are private to their cell.
"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import scipy.io
import scipy.sparse as sp

from symstress.combinat import dim_report
from symstress.elements import (
    StressElement,
    divergence_matrix,
    displacement_element,
    local_stress_basis,
)
from symstress.errors import ConfigurationError
from symstress.geometry import Mesh, Simplex
from symstress.polynomial import BarycentricPoly, gm_quadrature, monomial_space
from symstress.symtensor import IsotropicCompliance, frobenius_weights, pack, unpack

logger = logging.getLogger(__name__)

LoadFunction = Callable[[int, Simplex], Sequence[BarycentricPoly]]


@dataclass
class DofMap:
    n: int
    k: int
    stress_global_count: int
    displacement_global_count: int
    subsimplex_offsets: List[int]  # first global index of each ell block
    bubble_offset: int
    cell_stress_dofs: np.ndarray  # (ncells, dim_Pk_S)
    cell_displacement_dofs: np.ndarray  # (ncells, dim_V_local)
    low_degree: bool = False
    warnings: List[str] = field(default_factory=list)

    def summary(self) -> Dict:
        return {
            "n": self.n,
            "k": self.k,
            "stress_dofs": self.stress_global_count,
            "displacement_dofs": self.displacement_global_count,
            "low_degree": self.low_degree,
            "warnings": list(self.warnings),
        }


def number_dofs(mesh: Mesh, k: int, allow_low_degree: bool = False, logger=logger) -> DofMap:
    """
    Raises:
        ConfigurationError: if k < 2, or k <= n without `allow_low_degree`.
    """
    n = mesh.n
    report = dim_report(n, k)
    warnings = []
    if k < n + 1:
        if not allow_low_degree:
            raise ConfigurationError(f"the mixed method needs k >= n+1 = {n + 1}, got k={k}")
        message = f"degree k={k} <= n={n}: stability of the global method is not guaranteed"
        logger.warning(message)
        warnings.append(message)

    counts = mesh.counts()
    offsets = []
    total = 0
    for ell in range(n):
        offsets.append(total)
        total += counts[ell] * report.dof_per_subsimplex[ell]
    bubble_offset = total
    stress_count = total + mesh.num_cells * report.dim_bubble

    cell_dofs = np.empty((mesh.num_cells, report.dim_Pk_S), dtype=np.int64)
    for cell in range(mesh.num_cells):
        local = 0
        for ell in range(n):
            per_sub = report.dof_per_subsimplex[ell]
            for sub_id in mesh.cell_to_subsimplex[ell][cell]:
                base = offsets[ell] + int(sub_id) * per_sub
                cell_dofs[cell, local : local + per_sub] = np.arange(base, base + per_sub)
                local += per_sub
        base = bubble_offset + cell * report.dim_bubble
        cell_dofs[cell, local:] = np.arange(base, base + report.dim_bubble)

    disp = np.arange(mesh.num_cells * report.dim_V_local, dtype=np.int64).reshape(mesh.num_cells, report.dim_V_local)
    dofmap = DofMap(
        n=n,
        k=k,
        stress_global_count=stress_count,
        displacement_global_count=mesh.num_cells * report.dim_V_local,
        subsimplex_offsets=offsets,
        bubble_offset=bubble_offset,
        cell_stress_dofs=cell_dofs,
        cell_displacement_dofs=disp,
        low_degree=k < n + 1,
        warnings=warnings,
    )
    logger.debug(f"DOF map: {dofmap.summary()}")
    return dofmap


@dataclass(eq=False)
class LocalMatrices:
    cell: int
    element: StressElement
    A: np.ndarray
    B: np.ndarray
    L2: np.ndarray
    S: np.ndarray
    Mu: np.ndarray
    F: np.ndarray


@dataclass(eq=False)
class SaddleSystem:
    mesh: Mesh
    dofmap: DofMap
    mu: float
    lam: float
    A: sp.csr_matrix
    B: sp.csr_matrix
    L2: sp.csr_matrix
    S: sp.csr_matrix
    Mu: sp.csr_matrix
    rhs_f: np.ndarray
    elements: List[StressElement]

    @property
    def k(self) -> int:
        return self.dofmap.k

    @property
    def shape(self):
        return self.dofmap.stress_global_count, self.dofmap.displacement_global_count

    def block_matrix(self) -> sp.csr_matrix:
        return sp.bmat([[self.A, self.B.T], [self.B, None]], format="csr")

    def rhs(self) -> np.ndarray:
        return np.concatenate([np.zeros(self.dofmap.stress_global_count), self.rhs_f])

    def local_stress(self, cell: int, sigma: np.ndarray) -> np.ndarray:
        """Spanning-set coefficients of sigma_h on one cell."""
        return self.elements[cell].coefficients @ sigma[self.dofmap.cell_stress_dofs[cell]]

    def __repr__(self):
        return f"<SaddleSystem stress={self.shape[0]} displacement={self.shape[1]} k={self.k}>"


def load_vector(s: Simplex, k: int, f: Sequence[BarycentricPoly]) -> np.ndarray:
    """(f, v) for every displacement basis function v of degree k-1 on s."""
    n = s.n
    lower = monomial_space(n, k - 1)
    if f is None or all(comp.is_zero() for comp in f):
        return np.zeros(n * lower.dim)
    if len(f) != n:
        raise ConfigurationError(f"load needs {n} components, got {len(f)}")
    degree = max(comp.degree for comp in f)
    cross = s.measure * lower.reference_gram(degree)
    target = monomial_space(n, degree)
    return np.concatenate([cross @ comp.to_vector(target) for comp in f])


def _symmetric(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def local_matrices(
    mesh: Mesh,
    cell: int,
    k: int,
    compliance: IsotropicCompliance,
    load: Optional[LoadFunction] = None,
    frame_override: Optional[Dict] = None,
) -> LocalMatrices:
    s = mesh.simplex(cell)
    element = local_stress_basis(mesh, cell, k, frame_override=frame_override)
    gram_k = monomial_space(mesh.n, k).gram(s)
    C = element.coefficients

    span_A = np.kron(compliance.frobenius_matrix(), gram_k)
    span_L2 = np.kron(np.diag(frobenius_weights(mesh.n)), gram_k)
    div = divergence_matrix(s, k)
    mass = displacement_element(s, k).mass_matrix()

    div_shape = div @ C
    L2 = _symmetric(C.T @ span_L2 @ C)
    return LocalMatrices(
        cell=cell,
        element=element,
        A=_symmetric(C.T @ span_A @ C),
        B=mass @ div_shape,
        L2=L2,
        S=_symmetric(L2 + div_shape.T @ mass @ div_shape),
        Mu=mass,
        F=load_vector(s, k, load(cell, s) if load else None),
    )


class _Triplets:
    def __init__(self):
        self.rows, self.cols, self.vals = [], [], []

    def add(self, rows, cols, block):
        r, c = np.meshgrid(rows, cols, indexing="ij")
        self.rows.append(r.ravel())
        self.cols.append(c.ravel())
        self.vals.append(block.ravel())

    def matrix(self, shape) -> sp.csr_matrix:
        if not self.rows:
            return sp.csr_matrix(shape)
        return sp.coo_matrix(
            (np.concatenate(self.vals), (np.concatenate(self.rows), np.concatenate(self.cols))), shape=shape
        ).tocsr()


def assemble_system(
    mesh: Mesh,
    k: int,
    mu: float,
    lam: float,
    load: Optional[LoadFunction] = None,
    threads: int = 1,
    deterministic: bool = True,
    cell_order: Optional[Sequence[int]] = None,
    allow_low_degree: bool = False,
    frame_override: Optional[Dict] = None,
    logger=logger,
) -> SaddleSystem:
    """
    Assemble A, B, the H(div) Gram S, the displacement mass Mu and the load.

    Local matrices are computed on `threads` workers. With `deterministic`
    the reduction runs in `cell_order` (default ascending); otherwise in
    completion order.

    Raises:
        ConfigurationError: for invalid material parameters or degree.
        UnisolvenceError: if a cell's DOF matrix is singular.
    """
    compliance = IsotropicCompliance(mesh.n, mu, lam)
    dofmap = number_dofs(mesh, k, allow_low_degree=allow_low_degree, logger=logger)
    order = list(range(mesh.num_cells)) if cell_order is None else [int(c) for c in cell_order]
    if sorted(order) != list(range(mesh.num_cells)):
        raise ConfigurationError("cell_order must be a permutation of the cells")

    def build(cell):
        return local_matrices(mesh, cell, k, compliance, load, frame_override)

    A, B, L2, S, Mu = _Triplets(), _Triplets(), _Triplets(), _Triplets(), _Triplets()
    rhs = np.zeros(dofmap.displacement_global_count)
    elements: List[Optional[StressElement]] = [None] * mesh.num_cells

    def reduce(local: LocalMatrices):
        sdofs = dofmap.cell_stress_dofs[local.cell]
        udofs = dofmap.cell_displacement_dofs[local.cell]
        A.add(sdofs, sdofs, local.A)
        B.add(udofs, sdofs, local.B)
        L2.add(sdofs, sdofs, local.L2)
        S.add(sdofs, sdofs, local.S)
        Mu.add(udofs, udofs, local.Mu)
        rhs[udofs] += local.F
        elements[local.cell] = local.element

    if threads <= 1:
        for cell in order:
            reduce(build(cell))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {pool.submit(build, cell): cell for cell in order}
            if deterministic:
                done = {}
                for future in as_completed(futures):
                    done[futures[future]] = future.result()
                for cell in order:
                    reduce(done[cell])
            else:
                for future in as_completed(futures):
                    reduce(future.result())

    ns, nu = dofmap.stress_global_count, dofmap.displacement_global_count
    system = SaddleSystem(
        mesh=mesh,
        dofmap=dofmap,
        mu=float(mu),
        lam=float(lam),
        A=A.matrix((ns, ns)),
        B=B.matrix((nu, ns)),
        L2=L2.matrix((ns, ns)),
        S=S.matrix((ns, ns)),
        Mu=Mu.matrix((nu, nu)),
        rhs_f=rhs,
        elements=elements,
    )
    logger.info(f"Assembled {system} on {mesh}")
    return system


def interelement_jump_check(
    mesh: Mesh,
    k: int,
    coeffs: np.ndarray,
    dofmap: Optional[DofMap] = None,
    elements: Optional[List[StressElement]] = None,
    frame_override: Optional[Dict] = None,
) -> float:
    """
    Max |sigma_h nu|_+ - sigma_h nu|_-| over quadrature points of every
    interior facet. Zero for a single cell.
    """
    n = mesh.n
    dofmap = dofmap or number_dofs(mesh, k, allow_low_degree=True)
    if elements is None:
        elements = [local_stress_basis(mesh, cell, k, frame_override) for cell in range(mesh.num_cells)]
    coeffs = np.asarray(coeffs, dtype=float)
    face_points, _ = gm_quadrature(n - 1, 2 * k)

    worst = 0.0
    for facet_id, cells in enumerate(mesh.subsimplex_to_cells[n - 1]):
        if len(cells) != 2:
            continue
        vertex_ids = list(mesh.subsimplices[n - 1][facet_id])
        points = face_points @ mesh.points[vertex_ids]
        normal = mesh.subsimplex_frame(n - 1, facet_id).normals[0]
        traces = []
        for cell in cells:
            lam = mesh.simplex(cell).barycentric(points)
            values = elements[cell].evaluate(lam, coeffs[dofmap.cell_stress_dofs[cell]])
            traces.append(np.array([unpack(n, v) @ normal for v in values]))
        worst = max(worst, float(np.abs(traces[0] - traces[1]).max()))
    return worst


def export_matrices(system: SaddleSystem, directory: str, logger=logger) -> Dict[str, str]:
    """Write A, B, S, Mu (and the load) in MatrixMarket coordinate format."""
    os.makedirs(directory, exist_ok=True)
    written = {}
    for name in ("A", "B", "S", "Mu"):
        path = os.path.join(directory, f"{name}.mtx")
        scipy.io.mmwrite(path, getattr(system, name), comment=f"symstress {name} n={system.mesh.n} k={system.k}")
        written[name] = path
    path = os.path.join(directory, "F.mtx")
    scipy.io.mmwrite(path, sp.coo_matrix(system.rhs_f.reshape(-1, 1)))
    written["F"] = path
    logger.info(f"Exported matrices to {directory}")
    return written


def global_interpolant(mesh: Mesh, k: int, tau_on_cell, dofmap: DofMap, elements: List[StressElement]) -> np.ndarray:
    """
    Global DOF vector of a field given per cell by `tau_on_cell(cell, simplex)`;
    shared DOFs take the value seen from the last cell, which agrees for
    fields that are continuous across faces.
    """
    out = np.zeros(dofmap.stress_global_count)
    for cell in range(mesh.num_cells):
        values = elements[cell].interpolate(tau_on_cell(cell, mesh.simplex(cell)))
        out[dofmap.cell_stress_dofs[cell]] = values
    return out


def constant_field(n: int, matrix) -> List[BarycentricPoly]:
    """Packed constant field."""
    matrix = np.asarray(matrix, dtype=float)
    return [BarycentricPoly.constant(n, v) for v in pack(matrix)]
