"""
The local property suite behind `verify`.

Each claim returns a result dict {"claim", "passed", "measured", "error"};
a failing or crashing claim is logged and recorded, the suite carries on.
"""
import logging
from math import factorial
from typing import Callable, Dict, Iterable, List, Optional

import numpy as np

from symstress.analysis import h1_reduction_check
from symstress.assembly import interelement_jump_check, number_dofs
from symstress.combinat import dim_report, verify_chu_vandermonde
from symstress.elements import (
    check_bubble_equivalence,
    check_div_bubble_range,
    check_h1_subspace,
    local_element,
    random_field,
    reference_simplex,
)
from symstress.errors import ConfigurationError, DegenerateSimplexError
from symstress.geometry import Simplex, SubsimplexFrame, kuhn_mesh, simplex_from_vertices
from symstress.symtensor import dual_basis, normalized_coordinate_svals, rank_one_tangent_tensors

logger = logging.getLogger(__name__)

MIN_QUALITY = 0.05
TANGENT_SVAL_TOL = 1e-8
DUALITY_TOL = 1e-10
INTERPOLATION_TOL = 1e-7
UNISOLVENCE_RESIDUAL_TOL = 1e-7
JUMP_TOL = 1e-9
CORRUPTED_JUMP_MIN = 1e-2


def simplex_quality(s: Simplex) -> float:
    """n! |K| / diam(K)^n; about 0.87 for the equilateral triangle."""
    return factorial(s.n) * s.measure / s.diameter() ** s.n


def random_simplex(rng: np.random.Generator, n: int, min_quality: float = MIN_QUALITY) -> Simplex:
    """Gaussian vertices, redrawn until the simplex is reasonably shaped."""
    while True:
        try:
            s = simplex_from_vertices(rng.standard_normal((n + 1, n)))
        except DegenerateSimplexError:
            continue
        if simplex_quality(s) >= min_quality:
            return s


def sample_simplices(rng: np.random.Generator, n: int, samples: int, include_reference: bool = True) -> List[Simplex]:
    simplices = [reference_simplex(n)] if include_reference else []
    simplices.extend(random_simplex(rng, n) for _ in range(samples))
    return simplices


def _claim(name: str, check: Callable[[], Dict], logger=logger) -> Dict:
    try:
        measured = check()
        passed = bool(measured.pop("passed"))
        result = {"claim": name, "passed": passed, "measured": measured, "error": None}
    except Exception as e:
        logger.exception(f"claim {name} raised")
        result = {"claim": name, "passed": False, "measured": {}, "error": str(e)}
    level = logging.INFO if result["passed"] else logging.ERROR
    logger.log(level, f"{name}: {'pass' if result['passed'] else 'FAIL'}")
    return result


def check_tangent_basis(dims: Iterable[int], samples: int, rng: np.random.Generator) -> Dict:
    """Smallest normalized singular value of the T_{i,j} coordinates over random simplices."""
    worst = {}
    for n in dims:
        smallest = min(normalized_coordinate_svals(s).min() for s in sample_simplices(rng, n, samples))
        worst[str(n)] = float(smallest)
    return {"min_singular_value": worst, "passed": all(v > TANGENT_SVAL_TOL for v in worst.values())}


def check_dual_basis(n: int, samples: int, rng: np.random.Generator) -> Dict:
    residual = 0.0
    for s in sample_simplices(rng, n, samples):
        residual = max(residual, dual_basis(rank_one_tangent_tensors(s)).duality_residual())
    return {"max_duality_residual": residual, "passed": residual < DUALITY_TOL}


def check_combinatorics(max_n: int = 8, max_k: int = 12) -> Dict:
    failures = []
    for n in range(1, max_n + 1):
        for k in range(2, max_k + 1):
            identities = verify_chu_vandermonde(n, k)
            if not (identities["identity"]["holds"] and identities["variant"]["holds"]):
                failures.append({"n": n, "k": k, "kind": "chu-vandermonde"})
            if not dim_report(n, k).is_consistent():
                failures.append({"n": n, "k": k, "kind": "dof-partition"})
    return {"range": {"n": [1, max_n], "k": [2, max_k]}, "failures": failures, "passed": not failures}


def check_unisolvence(n: int, k: int, samples: int, rng: np.random.Generator) -> Dict:
    """DOF matrices invertible, dof_j(shape_i) = delta_ij and the interpolation identity."""
    worst_condition, worst_residual, worst_interpolation = 0.0, 0.0, 0.0
    for s in sample_simplices(rng, n, samples):
        element = local_element(s, k)
        worst_condition = max(worst_condition, element.vandermonde_condition)
        worst_residual = max(worst_residual, element.unisolvence_residual())
        tau = random_field(n, k, rng)
        rebuilt = element.coefficients @ (element.dof_matrix @ tau)
        worst_interpolation = max(worst_interpolation, float(np.abs(rebuilt - tau).max()))
    return {
        "dim_Pk_S": dim_report(n, k).dim_Pk_S,
        "max_condition": worst_condition,
        "max_duality_residual": worst_residual,
        "max_interpolation_error": worst_interpolation,
        "passed": worst_residual < UNISOLVENCE_RESIDUAL_TOL and worst_interpolation < INTERPOLATION_TOL,
    }


def _all_pass(check: Callable[[Simplex, int], Dict], n: int, k: int, samples: int, rng, keys) -> Dict:
    reports = [check(s, k) for s in sample_simplices(rng, n, samples)]
    summary = {key: reports[0][key] for key in keys}
    summary["samples"] = len(reports)
    summary["passed"] = all(r["passed"] for r in reports)
    return summary


def check_bubbles(n: int, k: int, samples: int, rng: np.random.Generator) -> Dict:
    return _all_pass(
        check_bubble_equivalence, n, k, samples, rng, ("kernel_dim", "dim_bubble", "inclusion_residual")
    )


def check_divergence_range(n: int, k: int, samples: int, rng: np.random.Generator) -> Dict:
    return _all_pass(check_div_bubble_range, n, k, samples, rng, ("rank", "dim_rperp", "orthogonality_residual"))


def check_continuous_subspace(n: int, k: int, samples: int, rng: np.random.Generator) -> Dict:
    return _all_pass(check_h1_subspace, n, k, samples, rng, ("dof_count", "rank", "dim_Pk_S"))


def corrupted_frame_override(mesh) -> Dict:
    """Flip the normal of the first interior facet as seen from one of its cells."""
    n = mesh.n
    for facet_id, cells in enumerate(mesh.subsimplex_to_cells[n - 1]):
        if len(cells) == 2:
            frame = mesh.subsimplex_frame(n - 1, facet_id)
            flipped = SubsimplexFrame(frame.vertex_ids, frame.tangents, -frame.normals)
            return {(int(cells[0]), n - 1, facet_id): flipped}
    raise ConfigurationError("mesh has no interior facet")


def check_conformity(n: int, k: int, rng: np.random.Generator, resolutions=(1, 2)) -> Dict:
    """
    Normal-trace jumps of random global stresses on Kuhn meshes, plus a
    negative control whose jump must be visible.
    """
    if n < 2:
        return {"skipped": "no facet normals for n = 1", "passed": True}
    jumps, corrupted = {}, {}
    for m in resolutions:
        mesh = kuhn_mesh(n, m)
        dofmap = number_dofs(mesh, k, allow_low_degree=True)
        coeffs = rng.standard_normal(dofmap.stress_global_count)
        jumps[str(m)] = interelement_jump_check(mesh, k, coeffs, dofmap=dofmap)
        corrupted[str(m)] = interelement_jump_check(
            mesh, k, coeffs, dofmap=dofmap, frame_override=corrupted_frame_override(mesh)
        )
    return {
        "max_jump": jumps,
        "corrupted_jump": corrupted,
        "passed": all(v < JUMP_TOL for v in jumps.values())
        and all(v > CORRUPTED_JUMP_MIN for v in corrupted.values()),
    }


def check_h1_reduction(k: int, resolutions=(1, 2, 4)) -> Dict:
    reports = [h1_reduction_check(m, k) for m in resolutions]
    return {
        "max_relative_difference": max(r["max_relative_difference"] for r in reports),
        "dimensions": {str(r["m"]): [r["stress_dim"], r["lagrange_dim"]] for r in reports},
        "passed": all(r["passed"] for r in reports),
    }


def run_verification(
    n: int, k: int, samples: int = 10, seed: Optional[int] = 0, cross_checks: bool = False, logger=logger
) -> Dict:
    """
    Run every local claim for dimension n and degree k. `cross_checks` adds
    the mesh-level conformity check and, for n = 1, the comparison with the
    continuous Lagrange space.

    Raises:
        ConfigurationError: if n < 1, k < 2 or samples < 1.
    """
    if samples < 1:
        raise ConfigurationError(f"samples must be >= 1, got {samples}")
    report = dim_report(n, k)
    rng = np.random.default_rng(seed)
    logger.info(f"Verifying n={n} k={k} on {samples} random simplices (seed {seed})")

    claims = [
        _claim("tangent_basis", lambda: check_tangent_basis([n], samples, rng), logger),
        _claim("chu_vandermonde", check_combinatorics, logger),
        _claim("unisolvence", lambda: check_unisolvence(n, k, samples, rng), logger),
        _claim("bubble_equivalence", lambda: check_bubbles(n, k, samples, rng), logger),
        _claim("divergence_range", lambda: check_divergence_range(n, k, samples, rng), logger),
        _claim("dual_basis", lambda: check_dual_basis(n, samples, rng), logger),
        _claim("h1_subspace", lambda: check_continuous_subspace(n, k, samples, rng), logger),
    ]
    if cross_checks:
        claims.append(_claim("conformity", lambda: check_conformity(n, k, rng), logger))
        if n == 1:
            claims.append(_claim("h1_reduction", lambda: check_h1_reduction(k), logger))
    return {
        "n": n,
        "k": k,
        "samples": samples,
        "seed": seed,
        "dimensions": report.to_dict(),
        "identities": verify_chu_vandermonde(n, k),
        "claims": claims,
        "passed": all(c["passed"] for c in claims),
    }
