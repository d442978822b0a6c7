"""
Problem files for the `solve` command.

    {
        "dim": 2, "degree": 3, "resolution": 2,
        "mu": 1.0, "lambda": 1.0,
        "load": ["x0*x1", "0"]      or   "load": "mms", "seed": 7
    }

Every validation error names the offending JSON path.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import sympy

from symstress.analysis import (
    DEFAULT_DENSE_LIMIT,
    MmsProblem,
    equilibrium_residual,
    error_norms,
    expression_load,
    manufactured_solution,
    solve_saddle,
)
from symstress.assembly import assemble_system, export_matrices
from symstress.errors import ConfigurationError, ProblemFileError
from symstress.geometry import kuhn_mesh
from symstress.symtensor import unpack

logger = logging.getLogger(__name__)

REQUIRED = ("dim", "degree", "resolution", "mu", "lambda", "load")
OPTIONAL = ("seed",)


@dataclass
class ProblemSpec:
    dim: int
    degree: int
    resolution: int
    mu: float
    lam: float
    load: object  # list of expressions or "mms"
    seed: Optional[int] = None
    expressions: List[sympy.Expr] = field(default_factory=list)

    @property
    def is_mms(self) -> bool:
        return self.load == "mms"


def _integer(data: Dict, key: str, minimum: int) -> int:
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ProblemFileError(f"expected an integer, got {value!r}", f"$.{key}")
    if value < minimum:
        raise ProblemFileError(f"must be >= {minimum}, got {value}", f"$.{key}")
    return value


def _number(data: Dict, key: str) -> float:
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProblemFileError(f"expected a number, got {value!r}", f"$.{key}")
    return float(value)


def parse_problem(data) -> ProblemSpec:
    """
    Raises:
        ProblemFileError: with the JSON path of the first problem found.
    """
    if not isinstance(data, dict):
        raise ProblemFileError("problem file must contain a JSON object")
    for key in REQUIRED:
        if key not in data:
            raise ProblemFileError(f"missing required key {key!r}")
    unknown = sorted(set(data) - set(REQUIRED) - set(OPTIONAL))
    if unknown:
        raise ProblemFileError(f"unknown key {unknown[0]!r}", f"$.{unknown[0]}")

    spec = ProblemSpec(
        dim=_integer(data, "dim", 1),
        degree=_integer(data, "degree", 2),
        resolution=_integer(data, "resolution", 1),
        mu=_number(data, "mu"),
        lam=_number(data, "lambda"),
        load=data["load"],
    )
    if spec.mu <= 0:
        raise ProblemFileError(f"must be positive, got {spec.mu}", "$.mu")
    if spec.lam < 0:
        raise ProblemFileError(f"must be nonnegative, got {spec.lam}", "$.lambda")

    if spec.load == "mms":
        if "seed" in data:
            spec.seed = _integer(data, "seed", 0)
        return spec
    if "seed" in data:
        raise ProblemFileError("only meaningful with \"load\": \"mms\"", "$.seed")
    if not isinstance(spec.load, list):
        raise ProblemFileError('expected a list of expressions or "mms"', "$.load")
    if len(spec.load) != spec.dim:
        raise ProblemFileError(f"expected {spec.dim} components, got {len(spec.load)}", "$.load")
    for i, text in enumerate(spec.load):
        if not isinstance(text, (str, int, float)) or isinstance(text, bool):
            raise ProblemFileError(f"expected an expression string, got {text!r}", f"$.load[{i}]")
        try:
            expressions, _ = expression_load([str(text)], spec.dim)
        except (sympy.SympifyError, ValueError, TypeError, SyntaxError) as e:
            raise ProblemFileError(f"invalid polynomial {text!r}: {e}", f"$.load[{i}]") from e
        spec.expressions.extend(expressions)
    return spec


def read_problem(path: str) -> ProblemSpec:
    try:
        with open(path) as handle:
            data = json.load(handle)
    except OSError as e:
        raise ConfigurationError(f"cannot read problem file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ProblemFileError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    return parse_problem(data)


def run_problem(
    spec: ProblemSpec,
    cell_budget: Optional[int] = None,
    threads: int = 1,
    deterministic: bool = True,
    dense_limit: int = DEFAULT_DENSE_LIMIT,
    allow_low_degree: bool = False,
    matrices_dir: Optional[str] = None,
    logger=logger,
) -> Dict:
    """Assemble and solve; the result holds coefficients, residuals and one sigma_h sample per cell."""
    mesh = kuhn_mesh(spec.dim, spec.resolution, cell_budget=cell_budget)
    problem: Optional[MmsProblem] = None
    if spec.is_mms:
        problem = manufactured_solution(spec.dim, spec.degree, spec.mu, spec.lam, spec.seed or 0)
        load = problem.load
    else:
        _, load = expression_load([str(text) for text in spec.load], spec.dim)

    system = assemble_system(
        mesh,
        spec.degree,
        spec.mu,
        spec.lam,
        load=load,
        threads=threads,
        deterministic=deterministic,
        allow_low_degree=allow_low_degree,
        logger=logger,
    )
    if matrices_dir:
        export_matrices(system, matrices_dir, logger=logger)
    solution = solve_saddle(system, dense_limit=dense_limit, logger=logger)

    samples = []
    for cell in range(mesh.num_cells):
        s = mesh.simplex(cell)
        centroid_lam = np.full((1, spec.dim + 1), 1.0 / (spec.dim + 1))
        sigma_dofs = solution.sigma[system.dofmap.cell_stress_dofs[cell]]
        packed = system.elements[cell].evaluate(centroid_lam, sigma_dofs)[0]
        samples.append({"cell": cell, "point": s.centroid().tolist(), "sigma": unpack(spec.dim, packed).tolist()})

    result = {
        "problem": {
            "dim": spec.dim,
            "degree": spec.degree,
            "resolution": spec.resolution,
            "mu": spec.mu,
            "lambda": spec.lam,
            "load": spec.load if spec.is_mms else [str(e) for e in spec.expressions],
            "seed": spec.seed,
        },
        "mesh": {"cells": mesh.num_cells, "vertices": mesh.num_vertices, "h": mesh.mesh_size_h},
        "dofmap": system.dofmap.summary(),
        "residual": solution.residual,
        "equilibrium_residual": equilibrium_residual(system, solution),
        "sigma": solution.sigma,
        "u": solution.u,
        "sigma_samples": samples,
    }
    if problem is not None:
        row = error_norms(problem, system, solution, m=spec.resolution)
        result["errors"] = {
            "e_sigma_l2": row.e_sigma_l2,
            "e_sigma_div": row.e_sigma_div,
            "e_sigma_hdiv": row.e_sigma_hdiv,
            "e_u_l2": row.e_u_l2,
        }
    return result
