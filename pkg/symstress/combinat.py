"""
Integer combinatorics behind the stress element: binomial coefficients,
dimension formulas and the two Chu-Vandermonde identities used to count
degrees of freedom. All arithmetic is exact (Python integers).
"""
from dataclasses import dataclass, field, asdict
from math import comb
from typing import Dict, List

from symstress.errors import ConfigurationError


def binomial(n: int, m: int) -> int:
    """C(n, m) with the convention C(n, m) = 0 for m < 0 or m > n."""
    if m < 0 or m > n:
        return 0
    return comb(n, m)


def sym_dim(n: int) -> int:
    """Dimension of the symmetric n x n matrices."""
    return n * (n + 1) // 2


def dofs_per_subsimplex(n: int, k: int, ell: int) -> int:
    """Face-moment DOFs carried by one ell-dimensional subsimplex, 0 <= ell <= n-1."""
    return (n - ell) * (n + ell + 1) // 2 * binomial(k - 1, ell)


@dataclass(frozen=True)
class DimReport:
    n: int
    k: int
    dim_Pk_scalar: int
    dim_S: int
    dim_Pk_S: int
    dim_bubble: int
    dof_per_subsimplex: List[int] = field(default_factory=list)
    dim_V_local: int = 0
    dim_rigid: int = 0

    def subsimplex_total(self) -> int:
        """Face-moment DOFs of one simplex: sum over ell of C(n+1, ell+1) * dof_per_subsimplex[ell]."""
        return sum(
            binomial(self.n + 1, ell + 1) * count
            for ell, count in enumerate(self.dof_per_subsimplex)
        )

    def is_consistent(self) -> bool:
        return self.subsimplex_total() + self.dim_bubble == self.dim_Pk_S

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["consistent"] = self.is_consistent()
        return data


def dim_report(n: int, k: int) -> DimReport:
    """
    Closed-form dimensions of the local spaces for dimension n and degree k.

    Raises:
        ConfigurationError: if n < 1 or k < 2 (the bubble space needs P_{k-2}).
    """
    if n < 1:
        raise ConfigurationError(f"dimension must be >= 1, got {n}")
    if k < 2:
        raise ConfigurationError(f"degree must be >= 2 for the bubble space, got {k}")

    dim_scalar = binomial(n + k, n)
    dim_s = sym_dim(n)
    return DimReport(
        n=n,
        k=k,
        dim_Pk_scalar=dim_scalar,
        dim_S=dim_s,
        dim_Pk_S=dim_s * dim_scalar,
        dim_bubble=dim_s * binomial(n + k - 2, n),
        dof_per_subsimplex=[dofs_per_subsimplex(n, k, ell) for ell in range(n)],
        dim_V_local=n * binomial(n + k - 1, n),
        dim_rigid=dim_s,
    )


def verify_chu_vandermonde(n: int, k: int) -> Dict:
    """
    Evaluate both sides of

        sum_l C(n+1, l+1) C(k-1, l)            = C(n+k, n)
        sum_l C(n+1, l+1) C(k-1, l) C(l+1, 2)  = n(n+1)/2 * C(n+k-2, n)

    by direct summation over 0 <= l <= n.
    """
    first_lhs = sum(binomial(n + 1, ell + 1) * binomial(k - 1, ell) for ell in range(n + 1))
    first_rhs = binomial(n + k, n)
    second_lhs = sum(
        binomial(n + 1, ell + 1) * binomial(k - 1, ell) * binomial(ell + 1, 2)
        for ell in range(n + 1)
    )
    second_rhs = sym_dim(n) * binomial(n + k - 2, n)
    return {
        "n": n,
        "k": k,
        "identity": {"lhs": first_lhs, "rhs": first_rhs, "holds": first_lhs == first_rhs},
        "variant": {"lhs": second_lhs, "rhs": second_rhs, "holds": second_lhs == second_rhs},
    }
