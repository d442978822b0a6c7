"""
Polynomials in barycentric coordinates.

`BarycentricPoly` is the sparse value type (multi-index -> coefficient) used
for algebra, restriction and exact integration. `MonomialSpace` is its dense
companion: the homogeneous monomials lambda^alpha, |alpha| = d, form a basis of
P_d on a simplex, and the element and assembly code works with coefficient
vectors over that basis.
"""
from functools import lru_cache
from fractions import Fraction
from math import factorial, prod
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from symstress.errors import ConfigurationError, ResourceLimitError
from symstress.geometry import Simplex

MultiIndex = Tuple[int, ...]

DEFAULT_MAX_TERMS = 200000
MAX_QUADRATURE_DEGREE = 40


@lru_cache(maxsize=None)
def multi_indices(nvars: int, degree: int) -> Tuple[MultiIndex, ...]:
    """All alpha with len(alpha) = nvars and |alpha| = degree, in descending lexicographic order."""
    if degree < 0:
        return ()
    if nvars == 1:
        return ((degree,),)
    out = []
    for first in range(degree, -1, -1):
        for rest in multi_indices(nvars - 1, degree - first):
            out.append((first,) + rest)
    return tuple(out)


def _graded_key(alpha: MultiIndex):
    return (sum(alpha), tuple(-a for a in alpha))


def monomial_factor(alpha: Sequence[int]) -> float:
    """d! * prod(alpha_i!) / (|alpha| + d)! for a simplex of dimension d = len(alpha) - 1."""
    dim = len(alpha) - 1
    return factorial(dim) * prod(factorial(a) for a in alpha) / factorial(sum(alpha) + dim)


def integrate_monomial(s: Simplex, alpha: Sequence[int]) -> float:
    """Exact integral of prod lambda_i^alpha_i over the simplex."""
    if any(a < 0 for a in alpha):
        raise ConfigurationError(f"negative exponent in {tuple(alpha)}")
    return s.measure * monomial_factor(alpha)


class BarycentricPoly:
    """
    Sparse polynomial sum_alpha c_alpha lambda_0^alpha_0 ... lambda_n^alpha_n.

    Terms with an exact zero coefficient are dropped; iteration follows
    graded lexicographic order.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Optional[Dict[MultiIndex, float]] = None):
        self.n = n
        clean = {}
        for alpha, c in (terms or {}).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n + 1:
                raise ValueError(f"multi-index {alpha} does not have {n + 1} entries")
            if c != 0:
                clean[alpha] = float(c)
        self.terms = dict(sorted(clean.items(), key=lambda item: _graded_key(item[0])))

    # constructors -------------------------------------------------------

    @classmethod
    def constant(cls, n: int, value: float) -> "BarycentricPoly":
        return cls(n, {(0,) * (n + 1): value})

    @classmethod
    def coordinate(cls, n: int, i: int) -> "BarycentricPoly":
        alpha = [0] * (n + 1)
        alpha[i] = 1
        return cls(n, {tuple(alpha): 1.0})

    @classmethod
    def monomial(cls, alpha: Sequence[int], coefficient: float = 1.0) -> "BarycentricPoly":
        return cls(len(alpha) - 1, {tuple(alpha): coefficient})

    @classmethod
    def from_vector(cls, space: "MonomialSpace", coefficients) -> "BarycentricPoly":
        return cls(space.n, {alpha: c for alpha, c in zip(space.alphas, np.asarray(coefficients, dtype=float))})

    # algebra -------------------------------------------------------------

    @property
    def degree(self) -> int:
        return max((sum(alpha) for alpha in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def _coerce(self, other) -> "BarycentricPoly":
        if isinstance(other, BarycentricPoly):
            if other.n != self.n:
                raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
            return other
        return BarycentricPoly.constant(self.n, float(other))

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for alpha, c in other.terms.items():
            terms[alpha] = terms.get(alpha, 0.0) + c
        return BarycentricPoly(self.n, terms)

    __radd__ = __add__

    def __neg__(self):
        return BarycentricPoly(self.n, {alpha: -c for alpha, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, BarycentricPoly):
            return BarycentricPoly(self.n, {alpha: c * float(other) for alpha, c in self.terms.items()})
        other = self._coerce(other)
        terms: Dict[MultiIndex, float] = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                key = tuple(x + y for x, y in zip(a, b))
                terms[key] = terms.get(key, 0.0) + ca * cb
        return BarycentricPoly(self.n, terms)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        result = BarycentricPoly.constant(self.n, 1.0)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other):
        return isinstance(other, BarycentricPoly) and self.n == other.n and self.terms == other.terms

    def __repr__(self):
        body = " + ".join(f"{c:g}*l^{alpha}" for alpha, c in self.terms.items()) or "0"
        return f"BarycentricPoly(n={self.n}: {body})"

    # calculus ------------------------------------------------------------

    def partial_lambda(self, i: int) -> "BarycentricPoly":
        terms: Dict[MultiIndex, float] = {}
        for alpha, c in self.terms.items():
            if alpha[i] == 0:
                continue
            lowered = list(alpha)
            lowered[i] -= 1
            key = tuple(lowered)
            terms[key] = terms.get(key, 0.0) + c * alpha[i]
        return BarycentricPoly(self.n, terms)

    def gradient(self, s: Simplex) -> List["BarycentricPoly"]:
        """Cartesian gradient: sum_i (dp/dlambda_i) grad(lambda_i), one polynomial per axis."""
        partials = [self.partial_lambda(i) for i in range(self.n + 1)]
        out = []
        for d in range(self.n):
            comp = BarycentricPoly(self.n)
            for i, part in enumerate(partials):
                if s.grad_lambda[i, d] != 0 and not part.is_zero():
                    comp = comp + part * s.grad_lambda[i, d]
            out.append(comp)
        return out

    def to_vector(self, space: "MonomialSpace") -> np.ndarray:
        """Coefficients over `space`, lifting lower-degree terms with degree-elevation matrices."""
        if self.degree > space.degree:
            raise ValueError(f"cannot write a degree-{self.degree} polynomial in degree {space.degree}")
        by_degree: Dict[int, Dict[MultiIndex, float]] = {}
        for alpha, c in self.terms.items():
            by_degree.setdefault(sum(alpha), {})[alpha] = c
        vec = np.zeros(space.dim)
        for degree, terms in by_degree.items():
            lower = monomial_space(self.n, degree)
            part = np.zeros(lower.dim)
            for alpha, c in terms.items():
                part[lower.index[alpha]] = c
            vec += part if degree == space.degree else lower.elevation(space.degree) @ part
        return vec

    # evaluation and integration -----------------------------------------

    def eval_barycentric(self, lam) -> np.ndarray:
        lam = np.atleast_2d(np.asarray(lam, dtype=float))
        out = np.zeros(lam.shape[0])
        for alpha, c in self.terms.items():
            out += c * np.prod(lam ** np.array(alpha), axis=1)
        return out

    def eval(self, s: Simplex, x) -> float:
        """Value at a Cartesian point x (lambda computed from the simplex)."""
        return float(self.eval_barycentric(s.barycentric(np.asarray(x, dtype=float)))[0])

    def integrate(self, s: Simplex) -> float:
        return sum(c * integrate_monomial(s, alpha) for alpha, c in self.terms.items())

    def restrict(self, sub: Sequence[int]) -> "BarycentricPoly":
        """Set lambda_i = 0 off `sub` and re-index to the subsimplex's own coordinates."""
        sub = tuple(sub)
        terms: Dict[MultiIndex, float] = {}
        for alpha, c in self.terms.items():
            if any(alpha[i] for i in range(self.n + 1) if i not in sub):
                continue
            key = tuple(alpha[i] for i in sub)
            terms[key] = terms.get(key, 0.0) + c
        return BarycentricPoly(len(sub) - 1, terms)


def gradient(p: BarycentricPoly, s: Simplex) -> List[BarycentricPoly]:
    return p.gradient(s)


def integrate_product(s: Simplex, ps: Iterable[BarycentricPoly], max_terms: int = DEFAULT_MAX_TERMS) -> float:
    """
    Exact integral of a product of polynomials over the simplex.

    Raises:
        ResourceLimitError: if the expanded product exceeds `max_terms` terms.
    """
    product = None
    for p in ps:
        product = p if product is None else product * p
        if len(product.terms) > max_terms:
            raise ResourceLimitError(f"product expansion exceeds {max_terms} terms")
    if product is None:
        return s.measure
    return product.integrate(s)


def restrict_to_subsimplex(p: BarycentricPoly, cell: Simplex, sub: Sequence[int]) -> BarycentricPoly:
    if p.n != cell.n or any(i < 0 or i > cell.n for i in sub):
        raise ValueError(f"subsimplex {tuple(sub)} is not part of a {cell.n}-simplex")
    return p.restrict(sorted(sub))


def subsimplex_measure(points: np.ndarray) -> float:
    """ell-dimensional volume of the subsimplex spanned by ell+1 points in R^n."""
    points = np.asarray(points, dtype=float)
    ell = points.shape[0] - 1
    if ell == 0:
        return 1.0
    t = points[1:] - points[0]
    return float(np.sqrt(max(np.linalg.det(t @ t.T), 0.0))) / factorial(ell)


def integrate_on_subsimplex(p: BarycentricPoly, points: np.ndarray) -> float:
    """Integral of a restricted polynomial (ell+1 coordinates) over the subsimplex `points`."""
    measure = subsimplex_measure(points)
    return measure * sum(c * monomial_factor(alpha) for alpha, c in p.terms.items())


def from_cartesian(terms: Dict[MultiIndex, float], s: Simplex) -> BarycentricPoly:
    """
    Rewrite sum c_beta x^beta in barycentric coordinates of `s` via x = sum lambda_i x_i.
    """
    n = s.n
    linear = [
        BarycentricPoly(n, {tuple(1 if j == i else 0 for j in range(n + 1)): s.vertices[i, d] for i in range(n + 1)})
        for d in range(n)
    ]
    powers: Dict[Tuple[int, int], BarycentricPoly] = {}

    def power(d, e):
        if (d, e) not in powers:
            powers[(d, e)] = BarycentricPoly.constant(n, 1.0) if e == 0 else power(d, e - 1) * linear[d]
        return powers[(d, e)]

    total = BarycentricPoly(n)
    for beta, c in terms.items():
        term = BarycentricPoly.constant(n, c)
        for d, e in enumerate(beta):
            if e:
                term = term * power(d, e)
        total = total + term
    return total


class MonomialSpace:
    """
    Dense basis {lambda^alpha : |alpha| = degree} of P_degree on an n-simplex.

    Geometry enters only through the measure (Gram) and grad(lambda) (derivatives),
    so everything here is shared by all cells.
    """

    def __init__(self, n: int, degree: int):
        self.n = n
        self.degree = degree
        self.alphas = multi_indices(n + 1, degree)
        self.exponents = np.array(self.alphas, dtype=np.int64).reshape(len(self.alphas), n + 1)
        self.index = {alpha: row for row, alpha in enumerate(self.alphas)}

    @property
    def dim(self) -> int:
        return len(self.alphas)

    def evaluate(self, lam) -> np.ndarray:
        """(npts, dim) values of every monomial at barycentric points (npts, n+1)."""
        lam = np.atleast_2d(np.asarray(lam, dtype=float))
        return np.prod(lam[:, None, :] ** self.exponents[None, :, :], axis=2)

    @lru_cache(maxsize=None)
    def reference_gram(self, other_degree: Optional[int] = None) -> np.ndarray:
        """Integrals of lambda^alpha lambda^beta divided by the simplex measure."""
        other = self if other_degree is None else monomial_space(self.n, other_degree)
        gram = np.empty((self.dim, other.dim))
        for r, a in enumerate(self.alphas):
            for c, b in enumerate(other.alphas):
                gram[r, c] = monomial_factor([x + y for x, y in zip(a, b)])
        return gram

    def gram(self, s: Simplex) -> np.ndarray:
        return s.measure * self.reference_gram()

    @lru_cache(maxsize=None)
    def lambda_derivative(self, i: int) -> np.ndarray:
        """Matrix of d/dlambda_i from degree d to degree d-1 coefficients."""
        lower = monomial_space(self.n, self.degree - 1)
        mat = np.zeros((lower.dim, self.dim))
        for col, alpha in enumerate(self.alphas):
            if alpha[i]:
                lowered = list(alpha)
                lowered[i] -= 1
                mat[lower.index[tuple(lowered)], col] = alpha[i]
        return mat

    def derivative(self, s: Simplex, axis: int) -> np.ndarray:
        """Matrix of d/dx_axis from degree d to degree d-1 coefficients on `s`."""
        return sum(s.grad_lambda[i, axis] * self.lambda_derivative(i) for i in range(self.n + 1))

    @lru_cache(maxsize=None)
    def elevation(self, degree: int) -> np.ndarray:
        """Matrix rewriting degree-d coefficients in degree `degree` >= d (multiplying by (sum lambda)^m)."""
        lift = degree - self.degree
        if lift < 0:
            raise ValueError(f"cannot lower degree {self.degree} to {degree}")
        target = monomial_space(self.n, degree)
        mat = np.zeros((target.dim, self.dim))
        for gamma in multi_indices(self.n + 1, lift):
            weight = factorial(lift) / prod(factorial(g) for g in gamma)
            for col, alpha in enumerate(self.alphas):
                mat[target.index[tuple(a + g for a, g in zip(alpha, gamma))], col] += weight
        return mat

    def restricted_moments(self, sub: Tuple[int, ...], moment_degree: int) -> np.ndarray:
        """
        Mean moments over a subsimplex: row beta, column alpha holds
        (1/|F|) * integral_F lambda^alpha|_F * lambda_F^beta, with |beta| = moment_degree.
        """
        return _restricted_moments(self.n, self.degree, tuple(sub), moment_degree)

    def __repr__(self):
        return f"<MonomialSpace n={self.n} degree={self.degree} dim={self.dim}>"


@lru_cache(maxsize=None)
def monomial_space(n: int, degree: int) -> MonomialSpace:
    return MonomialSpace(n, degree)


@lru_cache(maxsize=None)
def _restricted_moments(n: int, degree: int, sub: Tuple[int, ...], moment_degree: int) -> np.ndarray:
    space = monomial_space(n, degree)
    betas = multi_indices(len(sub), moment_degree)
    off = [i for i in range(n + 1) if i not in sub]
    mat = np.zeros((len(betas), space.dim))
    for col, alpha in enumerate(space.alphas):
        if any(alpha[i] for i in off):
            continue
        restricted = [alpha[i] for i in sub]
        for row, beta in enumerate(betas):
            mat[row, col] = monomial_factor([a + b for a, b in zip(restricted, beta)])
    return mat


@lru_cache(maxsize=None)
def gm_quadrature(n: int, degree: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Grundmann-Moeller rule on the n-simplex, exact for total degree <= `degree`.

    Returns barycentric points (npts, n+1) and weights (npts,) summing to 1, so
    integral_K f = measure(K) * sum_q w_q f(x_q).

    Raises:
        ConfigurationError: for negative or unsupported degrees.
    """
    if degree < 0 or degree > MAX_QUADRATURE_DEGREE:
        raise ConfigurationError(f"quadrature degree must be in [0, {MAX_QUADRATURE_DEGREE}], got {degree}")
    if n == 0:
        return np.ones((1, 1)), np.ones(1)
    s = degree // 2  # smallest s with 2s+1 >= degree
    d = 2 * s + 1

    points_to_weights: Dict[Tuple[Fraction, ...], Fraction] = {}
    for i in range(s + 1):
        weight = Fraction((-1) ** i * (d + n - 2 * i) ** d, 2 ** (2 * s) * factorial(i) * factorial(d + n - i))
        denominator = d + n - 2 * i
        for beta in multi_indices(n + 1, s - i):
            point = tuple(Fraction(2 * b + 1, denominator) for b in beta)
            points_to_weights[point] = points_to_weights.get(point, Fraction(0)) + weight

    items = [(p, w) for p, w in points_to_weights.items() if w != 0]
    points = np.array([[float(c) for c in p] for p, _ in items])
    weights = np.array([float(w * factorial(n)) for _, w in items])
    return points, weights
