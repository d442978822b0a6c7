"""
Local finite elements of the symmetric stress method.

Stress fields of degree k are stored as coefficient vectors over the spanning
set {U_c lambda^alpha}: U_c is the symmetric unit matrix of packed position c
and lambda^alpha runs over `monomial_space(n, k)`. Column c * N_k + a of every
matrix in this module refers to that pair, so packed(tau)_c is the scalar
polynomial held in block c.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from symstress.combinat import binomial, dim_report, sym_dim
from symstress.errors import ConfigurationError, UnisolvenceError
from symstress.geometry import (
    Mesh,
    Simplex,
    SubsimplexFrame,
    simplex_from_vertices,
    single_cell_mesh,
)
from symstress.polynomial import BarycentricPoly, from_cartesian, monomial_space, multi_indices
from symstress.symtensor import (
    component_functional,
    frobenius_weights,
    rank_one_tangent_tensors,
    sym_pairs,
)

logger = logging.getLogger(__name__)

UNISOLVENCE_TOL = 1e-12
RANK_TOL = 1e-10

FACE = "face-moment"
BUBBLE = "interior-bubble"

FrameLookup = Callable[[int, int], SubsimplexFrame]
TensorField = List[BarycentricPoly]  # packed components
VectorField = List[BarycentricPoly]


@dataclass(frozen=True, eq=False)
class DofDescriptor:
    """
    One stress degree of freedom.

    Face moments carry the global subsimplex, its local vertex positions in
    the cell, the frame pair (a, b) with tag ("t", l, "n", i) or ("n", i, "n", j)
    and the moment multi-index over the subsimplex coordinates. Interior
    DOFs carry (i, j, gamma) of the weight lambda_i lambda_j lambda^gamma T_{i,j}.
    """

    kind: str
    ell: int = -1
    sub_id: int = -1
    local_sub: Tuple[int, ...] = ()
    component: Tuple = ()
    vectors: Tuple[np.ndarray, np.ndarray] = (None, None)
    moment_index: Tuple[int, ...] = ()
    bubble_index: Tuple = ()

    @property
    def global_key(self) -> Tuple:
        """Identical for the same functional seen from any adjacent cell."""
        if self.kind == FACE:
            return (FACE, self.ell, self.sub_id, self.component, self.moment_index)
        return (BUBBLE, self.bubble_index)


def frame_components(frame: SubsimplexFrame) -> List[Tuple[Tuple, np.ndarray, np.ndarray]]:
    """(tag, a, b) pairs: (t_l, nu_i) for every l and i, then (nu_i, nu_j) with i <= j."""
    out = []
    for l, t in enumerate(frame.tangents):
        for i, nu in enumerate(frame.normals):
            out.append((("t", l, "n", i), t, nu))
    for i, j in itertools.combinations_with_replacement(range(frame.normals.shape[0]), 2):
        out.append((("n", i, "n", j), frame.normals[i], frame.normals[j]))
    return out


def _check_degree(k: int):
    if k < 2:
        raise ConfigurationError(f"stress degree must be >= 2, got {k}")


def mesh_frame_lookup(mesh: Mesh, cell: int, frame_override: Optional[Dict] = None) -> FrameLookup:
    """Frames of the mesh, optionally replaced per (cell, ell, sub_id)."""
    override = frame_override or {}

    def lookup(ell: int, sub_id: int) -> SubsimplexFrame:
        return override.get((cell, ell, sub_id)) or mesh.subsimplex_frame(ell, sub_id)

    return lookup


def stress_dofs(mesh: Mesh, cell: int, k: int, frames: Optional[FrameLookup] = None) -> List[DofDescriptor]:
    """
    Ordered DOFs of one cell: for ell = 0..n-1 and every local ell-subsimplex
    (combination order), component-major then moment; then the interior DOFs.

    Raises:
        ConfigurationError: if k < 2.
    """
    _check_degree(k)
    frames = frames or mesh_frame_lookup(mesh, cell)
    n = mesh.n
    dofs: List[DofDescriptor] = []
    for ell in range(n):
        moments = multi_indices(ell + 1, k - ell - 1)
        for local, sub in enumerate(itertools.combinations(range(n + 1), ell + 1)):
            sub_id = int(mesh.cell_to_subsimplex[ell][cell, local])
            for tag, a, b in frame_components(frames(ell, sub_id)):
                for beta in moments:
                    dofs.append(
                        DofDescriptor(
                            kind=FACE,
                            ell=ell,
                            sub_id=sub_id,
                            local_sub=sub,
                            component=tag,
                            vectors=(a, b),
                            moment_index=beta,
                        )
                    )
    for pair in itertools.combinations(range(n + 1), 2):
        for gamma in multi_indices(n + 1, k - 2):
            dofs.append(DofDescriptor(kind=BUBBLE, bubble_index=(pair, gamma)))
    return dofs


def bubble_weight_index(n: int, pair: Tuple[int, int], gamma: Sequence[int]) -> Tuple[int, ...]:
    """Multi-index of lambda_i lambda_j lambda^gamma."""
    delta = list(gamma)
    delta[pair[0]] += 1
    delta[pair[1]] += 1
    return tuple(delta)


def dof_row(d: DofDescriptor, s: Simplex, k: int, tangent_tensors: Optional[Dict] = None) -> np.ndarray:
    """The functional `d` as a row acting on spanning-set coefficients of degree k."""
    space = monomial_space(s.n, k)
    if d.kind == FACE:
        comp = component_functional(*d.vectors)
        moments = space.restricted_moments(d.local_sub, k - d.ell - 1)
        row = moments[multi_indices(d.ell + 1, k - d.ell - 1).index(d.moment_index)]
        return np.kron(comp, row)
    pair, gamma = d.bubble_index
    T = (tangent_tensors or rank_one_tangent_tensors(s).T)[pair]
    delta = bubble_weight_index(s.n, pair, gamma)
    gram_row = s.measure * space.reference_gram()[space.index[delta]]
    return np.kron(frobenius_weights(s.n) * T.packed, gram_row)


def field_to_vector(tau: TensorField, k: int) -> np.ndarray:
    """Spanning-set coefficients of a packed tensor field of degree <= k."""
    n = tau[0].n
    if len(tau) != sym_dim(n):
        raise ConfigurationError(f"expected {sym_dim(n)} packed components, got {len(tau)}")
    space = monomial_space(n, k)
    for comp in tau:
        if comp.degree > k:
            raise ConfigurationError(f"field of degree {comp.degree} exceeds element degree {k}")
    return np.concatenate([comp.to_vector(space) for comp in tau])


def vector_to_field(n: int, k: int, coefficients) -> TensorField:
    space = monomial_space(n, k)
    coefficients = np.asarray(coefficients, dtype=float).reshape(sym_dim(n), space.dim)
    return [BarycentricPoly.from_vector(space, row) for row in coefficients]


def apply_dof(d: DofDescriptor, tau: TensorField, s: Simplex, k: int) -> float:
    """
    Value of one functional on a polynomial field.

    Raises:
        ConfigurationError: if tau has degree above k.
    """
    return float(dof_row(d, s, k) @ field_to_vector(tau, k))


@dataclass(eq=False)
class StressElement:
    simplex: Simplex
    degree: int
    dofs: List[DofDescriptor]
    dof_matrix: np.ndarray
    coefficients: np.ndarray  # columns are shape functions in the spanning set
    vandermonde_condition: float

    @property
    def n(self) -> int:
        return self.simplex.n

    @property
    def dim(self) -> int:
        return len(self.dofs)

    def shape_function(self, i: int) -> TensorField:
        return vector_to_field(self.n, self.degree, self.coefficients[:, i])

    def unisolvence_residual(self) -> float:
        """max |dof_j(shape_i) - delta_ij|."""
        product = self.dof_matrix @ self.coefficients
        return float(np.abs(product - np.eye(self.dim)).max())

    def evaluate(self, lam, local_coefficients=None) -> np.ndarray:
        """
        Packed values at barycentric points (npts, n+1): (npts, ncomp, ndof)
        for the shape functions, or (npts, ncomp) for a combination of them.
        """
        space = monomial_space(self.n, self.degree)
        mono = space.evaluate(lam)
        blocks = self.coefficients.reshape(sym_dim(self.n), space.dim, self.dim)
        values = np.einsum("pa,cad->pcd", mono, blocks)
        if local_coefficients is None:
            return values
        return values @ np.asarray(local_coefficients, dtype=float)

    def interpolate(self, tau: TensorField) -> np.ndarray:
        return stress_interpolate(self, tau)

    def __repr__(self):
        return f"<StressElement n={self.n} k={self.degree} dofs={self.dim} cond={self.vandermonde_condition:.3e}>"


def local_stress_basis(
    mesh: Mesh,
    cell: int,
    k: int,
    frame_override: Optional[Dict] = None,
) -> StressElement:
    """
    Invert the DOF matrix of a cell against the spanning set of P_k(K;S).

    Raises:
        ConfigurationError: if k < 2.
        UnisolvenceError: if the DOF matrix is numerically singular.
    """
    s = mesh.simplex(cell)
    dofs = stress_dofs(mesh, cell, k, mesh_frame_lookup(mesh, cell, frame_override))
    tangent_tensors = rank_one_tangent_tensors(s).T
    D = np.array([dof_row(d, s, k, tangent_tensors) for d in dofs])
    if D.shape[0] != D.shape[1]:
        raise UnisolvenceError(f"{D.shape[0]} functionals for a space of dimension {D.shape[1]}")

    scaled = D / np.abs(D).max(axis=1, keepdims=True)
    svals = scipy.linalg.svdvals(scaled)
    if svals.min() < UNISOLVENCE_TOL * svals.max():
        raise UnisolvenceError(
            f"DOF matrix of cell {cell} is singular (sigma_min/sigma_max = {svals.min() / svals.max():.3e})"
        )
    coefficients = scipy.linalg.solve(D, np.eye(D.shape[0]))
    element = StressElement(
        simplex=s,
        degree=k,
        dofs=dofs,
        dof_matrix=D,
        coefficients=coefficients,
        vandermonde_condition=float(svals.max() / svals.min()),
    )
    logger.debug(f"cell {cell}: {element}")
    return element


def local_element(s: Simplex, k: int) -> StressElement:
    """Element on a standalone simplex (one-cell mesh)."""
    return local_stress_basis(single_cell_mesh(s.vertices), 0, k)


def stress_interpolate(element: StressElement, tau: TensorField) -> np.ndarray:
    """DOF values of tau; these are its coefficients in the shape basis."""
    return element.dof_matrix @ field_to_vector(tau, element.degree)


# bubbles -----------------------------------------------------------------


def bubble_coefficients(s: Simplex, k: int) -> np.ndarray:
    """Spanning-set coefficients (columns) of lambda_i lambda_j lambda^gamma T_{i,j}, |gamma| = k-2."""
    _check_degree(k)
    space = monomial_space(s.n, k)
    tensors = rank_one_tangent_tensors(s).T
    columns = []
    for pair in itertools.combinations(range(s.n + 1), 2):
        for gamma in multi_indices(s.n + 1, k - 2):
            mono = np.zeros(space.dim)
            mono[space.index[bubble_weight_index(s.n, pair, gamma)]] = 1.0
            columns.append(np.kron(tensors[pair].packed, mono))
    return np.array(columns).T


def bubble_basis(s: Simplex, k: int) -> List[TensorField]:
    coefficients = bubble_coefficients(s, k)
    return [vector_to_field(s.n, k, coefficients[:, col]) for col in range(coefficients.shape[1])]


def normal_trace_matrix(s: Simplex, k: int) -> np.ndarray:
    """
    Rows: moments of (tau nu_F)_p against every lambda_F^beta, |beta| = k, on
    every facet F. Its kernel is the set of fields with zero normal trace.
    """
    n = s.n
    space = monomial_space(n, k)
    rows = []
    for opposite in range(n + 1):
        sub = tuple(v for v in range(n + 1) if v != opposite)
        nu = s.grad_lambda[opposite] / np.linalg.norm(s.grad_lambda[opposite])
        moments = space.restricted_moments(sub, k)
        for p in range(n):
            rows.append(np.kron(component_functional(np.eye(n)[p], nu), moments))
    return np.vstack(rows)


def numerical_rank(matrix: np.ndarray, tol: float = RANK_TOL) -> int:
    if matrix.size == 0:
        return 0
    svals = scipy.linalg.svdvals(matrix)
    return int((svals > tol * max(svals.max(), 1e-300)).sum())


def check_bubble_equivalence(s: Simplex, k: int) -> Dict:
    """Kernel of the normal-trace map on P_k(K;S) against the bubble span."""
    report = dim_report(s.n, k)
    trace = normal_trace_matrix(s, k)
    bubbles = bubble_coefficients(s, k)
    kernel_dim = trace.shape[1] - numerical_rank(trace)
    residual = float(np.abs(trace @ bubbles).max() / max(np.abs(trace).max() * np.abs(bubbles).max(), 1e-300))
    bubble_rank = numerical_rank(bubbles)
    return {
        "n": s.n,
        "k": k,
        "kernel_dim": kernel_dim,
        "dim_bubble": report.dim_bubble,
        "bubble_rank": bubble_rank,
        "inclusion_residual": residual,
        "passed": kernel_dim == report.dim_bubble == bubble_rank and residual < 1e-10,
    }


# divergence and displacements --------------------------------------------


def divergence_matrix(s: Simplex, k: int) -> np.ndarray:
    """
    Map from stress coefficients of degree k to vector coefficients of degree
    k-1, block p * N_{k-1}: (div tau)_p = sum_q d/dx_q tau_pq.
    """
    n = s.n
    upper = monomial_space(n, k)
    lower = monomial_space(n, k - 1)
    out = np.zeros((n * lower.dim, sym_dim(n) * upper.dim))
    derivatives = [upper.derivative(s, axis) for axis in range(n)]
    for c, (p, q) in enumerate(sym_pairs(n)):
        cols = slice(c * upper.dim, (c + 1) * upper.dim)
        out[p * lower.dim : (p + 1) * lower.dim, cols] += derivatives[q]
        if p != q:
            out[q * lower.dim : (q + 1) * lower.dim, cols] += derivatives[p]
    return out


def local_divergence(tau: TensorField, s: Simplex) -> VectorField:
    """Row-wise divergence of a packed symmetric field."""
    n = s.n
    grads = [comp.gradient(s) for comp in tau]
    div = [BarycentricPoly(n) for _ in range(n)]
    for c, (p, q) in enumerate(sym_pairs(n)):
        div[p] = div[p] + grads[c][q]
        if p != q:
            div[q] = div[q] + grads[c][p]
    return div


@dataclass(eq=False)
class DisplacementElement:
    simplex: Simplex
    degree: int

    @property
    def space(self):
        return monomial_space(self.simplex.n, self.degree)

    @property
    def dim(self) -> int:
        return self.simplex.n * self.space.dim

    def basis(self) -> List[VectorField]:
        n = self.simplex.n
        out = []
        for p in range(n):
            for alpha in self.space.alphas:
                field_ = [BarycentricPoly(n) for _ in range(n)]
                field_[p] = BarycentricPoly.monomial(alpha)
                out.append(field_)
        return out

    def mass_matrix(self) -> np.ndarray:
        return np.kron(np.eye(self.simplex.n), self.space.gram(self.simplex))


def displacement_element(s: Simplex, k: int) -> DisplacementElement:
    return DisplacementElement(simplex=s, degree=k - 1)


def vector_field_to_vector(v: VectorField, degree: int) -> np.ndarray:
    space = monomial_space(v[0].n, degree)
    return np.concatenate([comp.to_vector(space) for comp in v])


@dataclass(eq=False)
class RigidMotionBasis:
    """Translations e_i, then rotations x_i e_j - x_j e_i for i < j."""

    simplex: Simplex
    fields: List[VectorField] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.fields)

    def coefficients(self, degree: int) -> np.ndarray:
        """Columns are the fields in the vector monomial basis of `degree` >= 1."""
        return np.array([vector_field_to_vector(f, degree) for f in self.fields]).T

    def symmetric_gradient_norm(self) -> float:
        """max coefficient of (grad v + grad v^T)/2 over all members."""
        worst = 0.0
        for f in self.fields:
            grads = [comp.gradient(self.simplex) for comp in f]
            for i, j in itertools.product(range(self.simplex.n), repeat=2):
                eps = grads[i][j] + grads[j][i]
                worst = max(worst, max((abs(c) for c in eps.terms.values()), default=0.0))
        return worst


def rigid_motion_basis(s: Simplex) -> RigidMotionBasis:
    n = s.n
    zero = BarycentricPoly(n)
    one = BarycentricPoly.constant(n, 1.0)
    coords = [from_cartesian({tuple(int(a == d) for a in range(n)): 1.0}, s) for d in range(n)]
    fields: List[VectorField] = []
    for i in range(n):
        fields.append([one if p == i else zero for p in range(n)])
    for i, j in itertools.combinations(range(n), 2):
        rotation = [zero] * n
        rotation[j] = coords[i]
        rotation[i] = -coords[j]
        fields.append(rotation)
    return RigidMotionBasis(simplex=s, fields=fields)


def rperp_projector(s: Simplex, k: int) -> np.ndarray:
    """L^2(K)-orthogonal projector of P_{k-1}(K;R^n) onto the complement of R(K)."""
    mass = displacement_element(s, k).mass_matrix()
    R = rigid_motion_basis(s).coefficients(k - 1)
    gram = R.T @ mass @ R
    return np.eye(mass.shape[0]) - R @ scipy.linalg.solve(gram, R.T @ mass, assume_a="pos")


def check_div_bubble_range(s: Simplex, k: int) -> Dict:
    """div of the bubbles: orthogonal to R(K) and of rank dim P_{k-1}(K;R^n) - dim R(K)."""
    _check_degree(k)
    report = dim_report(s.n, k)
    images = divergence_matrix(s, k) @ bubble_coefficients(s, k)
    mass = displacement_element(s, k).mass_matrix()
    R = rigid_motion_basis(s).coefficients(k - 1)
    inner = R.T @ mass @ images
    rigid_norms = np.sqrt(np.einsum("ij,ik,kj->j", R, mass, R))
    image_norms = np.sqrt(np.maximum(np.einsum("ij,ik,kj->j", images, mass, images), 0.0))
    scale = np.outer(rigid_norms, np.maximum(image_norms, 1e-300))
    residual = float((np.abs(inner) / scale).max())
    rank = numerical_rank(images)
    expected = report.dim_V_local - report.dim_rigid
    return {
        "n": s.n,
        "k": k,
        "rank": rank,
        "dim_rperp": expected,
        "dim_bubble": report.dim_bubble,
        "orthogonality_residual": residual,
        "passed": rank == expected and residual < 1e-9,
    }


# continuous subspace -------------------------------------------------------


def h1_subspace_dofs(s: Simplex, k: int) -> np.ndarray:
    """
    Componentwise Lagrange-type functionals: on every ell-subsimplex,
    0 <= ell <= n, the mean moments of degree k-ell-1 of each packed component.
    """
    _check_degree(k)
    n = s.n
    space = monomial_space(n, k)
    ncomp = sym_dim(n)
    rows = []
    for ell in range(n + 1):
        if k - ell - 1 < 0:
            continue
        for sub in itertools.combinations(range(n + 1), ell + 1):
            moments = space.restricted_moments(sub, k - ell - 1)
            for c in range(ncomp):
                rows.append(np.kron(np.eye(ncomp)[c], moments))
    return np.vstack(rows)


def check_h1_subspace(s: Simplex, k: int) -> Dict:
    D = h1_subspace_dofs(s, k)
    count = sum(binomial(s.n + 1, ell + 1) * binomial(k - 1, ell) for ell in range(s.n + 1))
    square = D.shape[0] == D.shape[1]
    rank = numerical_rank(D / np.abs(D).max(axis=1, keepdims=True), tol=UNISOLVENCE_TOL)
    return {
        "n": s.n,
        "k": k,
        "dof_count": D.shape[0],
        "scalar_count": count,
        "dim_Pk_S": D.shape[1],
        "rank": rank,
        "passed": square and rank == D.shape[1] and count * sym_dim(s.n) == D.shape[0],
    }


def random_field(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Random spanning-set coefficients of a member of P_k(K;S)."""
    return rng.uniform(-1.0, 1.0, sym_dim(n) * monomial_space(n, k).dim)


def reference_simplex(n: int) -> Simplex:
    return simplex_from_vertices(np.vstack([np.zeros(n), np.eye(n)]))
