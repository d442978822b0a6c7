"""
Symmetric n x n tensors in packed storage.

The packed layout is the upper triangle in row-major order,
(tau_11, tau_12, ..., tau_1n, tau_22, ..., tau_nn), shared by every module.
Frobenius products double the off-diagonal entries.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np

from symstress.combinat import sym_dim
from symstress.errors import ConfigurationError, DegenerateSimplexError
from symstress.geometry import Simplex, edge_tangents

RANK_TOL = 1e-8


@lru_cache(maxsize=None)
def sym_pairs(n: int) -> Tuple[Tuple[int, int], ...]:
    """Packed position -> (p, q) with p <= q."""
    return tuple((p, q) for p in range(n) for q in range(p, n))


@lru_cache(maxsize=None)
def frobenius_weights(n: int) -> np.ndarray:
    return np.array([1.0 if p == q else 2.0 for p, q in sym_pairs(n)])


@lru_cache(maxsize=None)
def trace_vector(n: int) -> np.ndarray:
    return np.array([1.0 if p == q else 0.0 for p, q in sym_pairs(n)])


def pack(matrix) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    return np.array([0.5 * (matrix[p, q] + matrix[q, p]) for p, q in sym_pairs(matrix.shape[0])])


def unpack(n: int, packed) -> np.ndarray:
    out = np.zeros((n, n))
    for value, (p, q) in zip(packed, sym_pairs(n)):
        out[p, q] = out[q, p] = value
    return out


def component_functional(a, b) -> np.ndarray:
    """Packed vector c with a^T tau b = c . packed(tau) for every symmetric tau."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.array([a[p] * b[p] if p == q else a[p] * b[q] + a[q] * b[p] for p, q in sym_pairs(a.shape[0])])


@dataclass(frozen=True, eq=False)
class SymTensor:
    n: int
    packed: np.ndarray

    @classmethod
    def from_matrix(cls, matrix) -> "SymTensor":
        matrix = np.asarray(matrix, dtype=float)
        return cls(matrix.shape[0], pack(matrix))

    @classmethod
    def identity(cls, n: int) -> "SymTensor":
        return cls(n, trace_vector(n).copy())

    @classmethod
    def outer(cls, t) -> "SymTensor":
        t = np.asarray(t, dtype=float)
        return cls.from_matrix(np.outer(t, t))

    def to_matrix(self) -> np.ndarray:
        return unpack(self.n, self.packed)

    def trace(self) -> float:
        return float(trace_vector(self.n) @ self.packed)

    def frobenius(self, other: "SymTensor") -> float:
        return float(self.packed @ (frobenius_weights(self.n) * other.packed))

    def apply(self, v) -> np.ndarray:
        return self.to_matrix() @ np.asarray(v, dtype=float)

    def __add__(self, other: "SymTensor") -> "SymTensor":
        return SymTensor(self.n, self.packed + other.packed)

    def __sub__(self, other: "SymTensor") -> "SymTensor":
        return SymTensor(self.n, self.packed - other.packed)

    def __mul__(self, scalar: float) -> "SymTensor":
        return SymTensor(self.n, self.packed * float(scalar))

    __rmul__ = __mul__

    def __repr__(self):
        return f"SymTensor({self.to_matrix().tolist()})"


@dataclass
class TensorBasis:
    n: int
    T: Dict[Tuple[int, int], SymTensor] = field(default_factory=dict)
    M: Dict[Tuple[int, int], SymTensor] = field(default_factory=dict)
    gram_condition: float = float("nan")

    @property
    def pairs(self) -> List[Tuple[int, int]]:
        return sorted(self.T)

    def coordinate_matrix(self) -> np.ndarray:
        """Rows are packed T_{i,j} in pair order."""
        return np.array([self.T[pair].packed for pair in self.pairs])

    def duality_residual(self) -> float:
        """max |T_{i,j} : M_{k,l} - delta| over all pairs."""
        pairs = self.pairs
        table = np.array([[self.T[a].frobenius(self.M[b]) for b in pairs] for a in pairs])
        return float(np.abs(table - np.eye(len(pairs))).max())


def normalized_coordinate_svals(s: Simplex) -> np.ndarray:
    """Singular values of the Frobenius-isometric coordinate matrix of T_{i,j} built from unit tangents."""
    n = s.n
    root_w = np.sqrt(frobenius_weights(n))
    rows = []
    for t in edge_tangents(s).values():
        u = t / np.linalg.norm(t)
        rows.append(pack(np.outer(u, u)) * root_w)
    return np.linalg.svd(np.array(rows), compute_uv=False)


def rank_one_tangent_tensors(s: Simplex) -> TensorBasis:
    """
    T_{i,j} = t_{i,j} t_{i,j}^T for 0 <= i < j <= n.

    Raises:
        DegenerateSimplexError: if the n(n+1)/2 tensors are not linearly independent.
    """
    basis = TensorBasis(n=s.n)
    for pair, t in edge_tangents(s).items():
        basis.T[pair] = SymTensor.outer(t)
    svals = normalized_coordinate_svals(s)
    if svals.size != sym_dim(s.n) or svals.min() <= RANK_TOL * svals.max():
        raise DegenerateSimplexError(
            f"rank-one tangent tensors are dependent on simplex {s.vertices.tolist()} "
            f"(smallest normalized singular value {svals.min():.3e})"
        )
    basis.gram_condition = float(svals.max() / svals.min())
    return basis


def dual_basis(basis: TensorBasis) -> TensorBasis:
    """
    Fill M with T_{i,j} : M_{k,l} = delta_{ik} delta_{jl}.

    Raises:
        DegenerateSimplexError: if the T part is singular.
    """
    pairs = basis.pairs
    coords = basis.coordinate_matrix() * frobenius_weights(basis.n)
    try:
        inverse = np.linalg.solve(coords, np.eye(len(pairs)))
    except np.linalg.LinAlgError as e:
        raise DegenerateSimplexError(f"dual basis system is singular: {e}") from e
    basis.M = {pair: SymTensor(basis.n, inverse[:, col].copy()) for col, pair in enumerate(pairs)}
    return basis


class IsotropicCompliance:
    """
    A tau = (1 / 2mu) (tau - lambda / (2mu + n lambda) tr(tau) delta).

    Raises:
        ConfigurationError: for mu <= 0 or lambda < 0.
    """

    def __init__(self, n: int, mu: float, lam: float):
        if not mu > 0:
            raise ConfigurationError(f"shear modulus mu must be positive, got {mu}")
        if lam < 0:
            raise ConfigurationError(f"Lame parameter lambda must be nonnegative, got {lam}")
        self.n = n
        self.mu = float(mu)
        self.lam = float(lam)

    @property
    def kappa(self) -> float:
        return self.lam / (2.0 * self.mu + self.n * self.lam)

    def matrix(self) -> np.ndarray:
        """Packed-space matrix C with packed(A tau) = C packed(tau)."""
        d = trace_vector(self.n)
        return (np.eye(d.size) - self.kappa * np.outer(d, np.ones(d.size) * d)) / (2.0 * self.mu)

    def frobenius_matrix(self) -> np.ndarray:
        """Symmetric matrix F with (A tau) : rho = packed(rho)^T F packed(tau)."""
        d = trace_vector(self.n)
        return (np.diag(frobenius_weights(self.n)) - self.kappa * np.outer(d, d)) / (2.0 * self.mu)

    def apply(self, tau: SymTensor) -> SymTensor:
        return SymTensor(tau.n, self.matrix() @ tau.packed)

    def inverse_apply(self, eps: SymTensor) -> SymTensor:
        """A^{-1} eps = 2 mu eps + lambda tr(eps) delta."""
        return SymTensor(eps.n, 2.0 * self.mu * eps.packed + self.lam * eps.trace() * trace_vector(eps.n))

    def __repr__(self):
        return f"<IsotropicCompliance n={self.n} mu={self.mu} lambda={self.lam}>"


def compliance_apply(tau: SymTensor, mu: float, lam: float) -> SymTensor:
    return IsotropicCompliance(tau.n, mu, lam).apply(tau)
