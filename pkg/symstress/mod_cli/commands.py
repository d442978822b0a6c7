"""
Command-line surface: verify, convergence, infsup, solve and export-mesh.

Exit codes are a stable contract: 0 pass, 1 numerical failure, 2 configuration error.
"""
import functools
import json
import math
from dataclasses import asdict, dataclass, fields
from typing import Dict, List, Optional

import click
from flask import Blueprint, current_app as app

from symstress.analysis import (
    convergence_study,
    inf_sup_constant,
    kernel_coercivity,
    lambda_robustness,
    manufactured_solution,
    rate_policy,
)
from symstress.assembly import assemble_system
from symstress.errors import ConfigurationError, SymStressError
from symstress.geometry import kuhn_mesh, mesh_to_json
from symstress.problem import read_problem, run_problem
from symstress.reports import dumps, infsup_table, save, write_csv, write_dat, write_json
from symstress.util import output_path, parse_float_list, sibling_path
from symstress.verification import run_verification

bp = Blueprint("cli", __name__, cli_group=None)

# keys of the --config file that differ from the dataclass field names
FILE_ALIASES = {"lambda": "lam", "n": "dim", "k": "degree"}


@dataclass
class RunConfig:
    dim: int = 2
    degree: int = 3
    levels: int = 3
    resolution: int = 1
    mu: float = 1.0
    lam: float = 1.0
    seed: Optional[int] = 0
    samples: int = 10
    out: Optional[str] = None
    report: Optional[str] = None
    allow_low_degree: bool = False
    exact_cross_checks: bool = False
    deterministic_reduction: bool = True
    threads: int = 1
    dense_limit: int = 4000
    cell_budget: Optional[int] = 20000
    infsup_floor: float = 1e-4
    infsup_ratio: float = 2.0
    rate_slack: float = 0.3
    output_dir: Optional[str] = None

    @classmethod
    def from_sources(cls, app_config, config_file: Optional[str] = None, **overrides) -> "RunConfig":
        """Defaults, then the application config, then a JSON file, then command-line options."""
        config = cls(
            threads=app_config.get("THREADS", 1),
            dense_limit=app_config.get("DENSE_LIMIT", 4000),
            cell_budget=app_config.get("CELL_BUDGET", 20000),
            deterministic_reduction=app_config.get("DETERMINISTIC_REDUCTION", True),
            infsup_floor=app_config.get("INFSUP_FLOOR", 1e-4),
            infsup_ratio=app_config.get("INFSUP_RATIO", 2.0),
            rate_slack=app_config.get("RATE_SLACK", 0.3),
            output_dir=app_config.get("OUTPUT_DIR"),
        )
        if config_file:
            config.update(load_config_file(config_file))
        config.update({key: value for key, value in overrides.items() if value is not None})
        return config

    def update(self, values: Dict):
        known = {f.name for f in fields(self)}
        for key, value in values.items():
            name = FILE_ALIASES.get(key, key).replace("-", "_")
            if name not in known:
                raise ConfigurationError(f"unknown configuration key {key!r}")
            setattr(self, name, value)

    def validate(self, stable_degree: bool = True):
        """
        Raises:
            ConfigurationError: on the first violated constraint.
        """
        for name in ("dim", "degree", "levels", "resolution", "samples", "threads", "dense_limit"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigurationError(f"{name} must be an integer, got {value!r}")
        if self.dim < 1:
            raise ConfigurationError(f"dimension must be >= 1, got {self.dim}")
        if self.degree < 2:
            raise ConfigurationError(f"degree must be >= 2, got {self.degree}")
        if stable_degree and self.degree < self.dim + 1 and not self.allow_low_degree:
            raise ConfigurationError(
                f"degree must be >= dim+1 = {self.dim + 1} (got {self.degree}); pass --allow-low-degree to override"
            )
        if not self.mu > 0:
            raise ConfigurationError(f"mu must be positive, got {self.mu}")
        if not self.lam >= 0:
            raise ConfigurationError(f"lambda must be nonnegative, got {self.lam}")
        for name in ("levels", "resolution", "samples", "threads"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {getattr(self, name)}")
        return self

    @property
    def low_degree(self) -> bool:
        return self.degree < self.dim + 1

    def path(self, value: Optional[str]) -> Optional[str]:
        return output_path(value, self.output_dir)

    def level_options(self) -> Dict:
        return {
            "threads": self.threads,
            "dense_limit": self.dense_limit,
            "cell_budget": self.cell_budget,
            "deterministic": self.deterministic_reduction,
            "allow_low_degree": self.allow_low_degree,
        }

    def to_dict(self) -> Dict:
        return asdict(self)


def load_config_file(path: str) -> Dict:
    try:
        with open(path) as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"cannot read config file {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {path} must contain a JSON object")
    return data


def exit_codes(command):
    """Map library errors onto the exit-code contract."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            code = command(*args, **kwargs)
        except SymStressError as e:
            if e.exit_code == 2:
                app.logger.error(f"configuration error: {e}")
            else:
                app.logger.exception(f"numerical failure: {e}")
            click.echo(f"Error: {e}", err=True)
            ctx.exit(e.exit_code)
        except Exception as e:
            app.logger.exception(f"unexpected failure: {e}")
            click.echo(f"Error: {e}", err=True)
            ctx.exit(1)
        ctx.exit(code or 0)

    return wrapper


def common_options(command):
    options = [
        click.option("--config", "config_file", type=click.Path(dir_okay=False), help="JSON file of run options."),
        click.option("--dim", type=int, help="Spatial dimension n."),
        click.option("--degree", type=int, help="Stress polynomial degree k."),
        click.option("--seed", type=int, help="Random seed."),
        click.option("--threads", type=int, help="Worker threads for element construction."),
        click.option("--allow-low-degree", is_flag=True, default=None, help="Permit k < n+1."),
        click.option(
            "--deterministic/--no-deterministic",
            "deterministic_reduction",
            default=None,
            help="Reduce cell contributions in a fixed order.",
        ),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def material_options(command):
    command = click.option("--lambda", "lam", type=float, help="Lame parameter lambda.")(command)
    return click.option("--mu", type=float, help="Shear modulus mu.")(command)


def _emit_report(report: Dict, path: Optional[str]):
    if path:
        save(path, write_json, report)
    else:
        click.echo(dumps(report))


@bp.cli.command("verify")
@common_options
@click.option("--samples", type=int, help="Random simplices per claim.")
@click.option("--exact-cross-checks", is_flag=True, default=None, help="Add mesh-level conformity checks.")
@click.option("--report", help="JSON report path (default: standard output).")
@exit_codes
def verify(config_file, report, **options):
    """Check the local element properties for one (dim, degree)."""
    config = RunConfig.from_sources(app.config, config_file, report=report, **options).validate(stable_degree=False)
    app.logger.info(f"verify n={config.dim} k={config.degree}")
    result = run_verification(
        config.dim,
        config.degree,
        samples=config.samples,
        seed=config.seed,
        cross_checks=config.exact_cross_checks,
        logger=app.logger,
    )
    _emit_report(result, config.path(config.report))
    failed = [c["claim"] for c in result["claims"] if not c["passed"]]
    if failed:
        app.logger.error(f"failed claims: {', '.join(failed)}")
        return 1
    return 0


@bp.cli.command("convergence")
@common_options
@material_options
@click.option("--levels", type=int, help="Number of refinements m = 1, 2, 4, ...")
@click.option("--out", help="CSV path (default: standard output). JSON and .dat files are written alongside.")
@click.option("--report", help="JSON report path.")
@click.option("--beta", is_flag=True, default=False, help="Also compute the inf-sup constant per level.")
@click.option("--lambda-sweep", help="Comma separated lambdas for the robustness experiment.")
@exit_codes
def convergence(config_file, out, report, beta, lambda_sweep, **options):
    """Manufactured-solution convergence study on Kuhn meshes."""
    try:
        lambdas = parse_float_list(lambda_sweep)
    except ValueError as e:
        raise ConfigurationError(str(e)) from e
    config = RunConfig.from_sources(app.config, config_file, out=out, report=report, **options).validate()
    if config.levels < 2:
        raise ConfigurationError(f"a convergence study needs at least 2 levels, got {config.levels}")

    problem = manufactured_solution(config.dim, config.degree, config.mu, config.lam, config.seed)
    rows = convergence_study(
        config.dim,
        config.degree,
        config.mu,
        config.lam,
        config.levels,
        seed=config.seed,
        with_beta=beta,
        problem=problem,
        logger=app.logger,
        **config.level_options(),
    )
    policy = rate_policy(rows, config.degree, slack=config.rate_slack)
    result = {
        "config": config.to_dict(),
        "manufactured": problem.describe(),
        "load_consistency": problem.rigid_motion_residual(),
        "rows": [row.to_dict() for row in rows],
        "policy": policy,
        "passed": policy["passed"],
    }
    if lambdas:
        result["lambda_robustness"] = lambda_robustness(
            config.dim,
            config.degree,
            config.mu,
            lambdas,
            m=2 ** (config.levels - 1),
            seed=config.seed,
            logger=app.logger,
            **config.level_options(),
        )

    csv_path = config.path(config.out)
    report_path = config.path(config.report)
    if csv_path and csv_path != "-":
        save(csv_path, write_csv, rows)
        save(sibling_path(csv_path, ".dat"), write_dat, rows)
        report_path = report_path or sibling_path(csv_path, ".json")
    else:
        save("-", write_csv, rows)
    if report_path:
        save(report_path, write_json, result)

    for name, check in policy["checks"].items():
        app.logger.info(f"{name}: observed {check['observed']} threshold {check['threshold']}")
    return 0 if policy["passed"] else 1


@bp.cli.command("infsup")
@common_options
@material_options
@click.option("--levels", type=int, help="Number of refinements m = 1, 2, 4, ...")
@click.option("--report", help="JSON report path.")
@exit_codes
def infsup(config_file, report, **options):
    """Discrete inf-sup constant per refinement level."""
    config = RunConfig.from_sources(app.config, config_file, report=report, **options).validate()
    advisory = config.allow_low_degree and config.low_degree
    rows: List[Dict] = []
    for level in range(config.levels):
        m = 2 ** level
        mesh = kuhn_mesh(config.dim, m, cell_budget=config.cell_budget)
        row = {"m": m, "h": mesh.mesh_size_h, "beta": None, "error": None}
        try:
            system = assemble_system(
                mesh,
                config.degree,
                config.mu,
                config.lam,
                threads=config.threads,
                deterministic=config.deterministic_reduction,
                allow_low_degree=config.allow_low_degree,
                logger=app.logger,
            )
            row["beta"] = inf_sup_constant(system, dense_limit=config.dense_limit, logger=app.logger)
            if config.exact_cross_checks:
                row["coercivity"] = kernel_coercivity(system, seed=config.seed)
        except ConfigurationError:
            raise
        except SymStressError as e:
            app.logger.exception(f"inf-sup at m={m} failed")
            row["error"] = str(e)
        rows.append(row)

    betas = [row["beta"] for row in rows if row["beta"] is not None]
    ratio = max(betas) / min(betas) if betas and min(betas) > 0 else math.inf
    passed = (
        len(betas) == len(rows)
        and all(beta > config.infsup_floor for beta in betas)
        and ratio < config.infsup_ratio
    )
    result = {
        "config": config.to_dict(),
        "rows": rows,
        "ratio": ratio,
        "floor": config.infsup_floor,
        "ratio_bound": config.infsup_ratio,
        "advisory": advisory,
        "passed": passed,
    }
    click.echo(infsup_table(rows))
    if config.report:
        save(config.path(config.report), write_json, result)
    if advisory:
        app.logger.warning(f"k={config.degree} < n+1: inf-sup results are advisory only")
        return 0
    return 0 if passed else 1


@bp.cli.command("solve")
@click.option("--problem", "problem_file", required=True, type=click.Path(dir_okay=False), help="Problem JSON file.")
@click.option("--out", help="Solution JSON path (default: standard output).")
@click.option("--export-matrices", "matrices_dir", help="Directory for MatrixMarket files.")
@click.option("--config", "config_file", type=click.Path(dir_okay=False), help="JSON file of run options.")
@click.option("--threads", type=int, help="Worker threads for element construction.")
@click.option("--allow-low-degree", is_flag=True, default=None, help="Permit k < n+1.")
@exit_codes
def solve(problem_file, out, matrices_dir, config_file, **options):
    """Assemble and solve the problem described by a JSON file."""
    spec = read_problem(problem_file)
    config = RunConfig.from_sources(
        app.config,
        config_file,
        dim=spec.dim,
        degree=spec.degree,
        resolution=spec.resolution,
        mu=spec.mu,
        lam=spec.lam,
        out=out,
        **options,
    ).validate()
    result = run_problem(
        spec,
        cell_budget=config.cell_budget,
        threads=config.threads,
        deterministic=config.deterministic_reduction,
        dense_limit=config.dense_limit,
        allow_low_degree=config.allow_low_degree,
        matrices_dir=config.path(matrices_dir),
        logger=app.logger,
    )
    save(config.path(config.out) or "-", write_json, result)
    return 0


@bp.cli.command("export-mesh")
@click.option("--dim", type=int, required=True, help="Spatial dimension n.")
@click.option("--resolution", type=int, required=True, help="Subdivisions per axis.")
@click.option("--out", default="-", help="Mesh JSON path (default: standard output).")
@exit_codes
def export_mesh(dim, resolution, out):
    """Write the Kuhn mesh of the unit cube as JSON."""
    mesh = kuhn_mesh(dim, resolution, cell_budget=app.config.get("CELL_BUDGET"))
    save(output_path(out, app.config.get("OUTPUT_DIR")), write_json, mesh_to_json(mesh))
    app.logger.info(f"wrote {mesh} to {out}")
    return 0
