"""
Tests for problem files
"""
import json

import numpy as np
import pytest

from symstress.errors import ConfigurationError, ProblemFileError, ResourceLimitError
from symstress.problem import parse_problem, read_problem, run_problem


def problem_data(**overrides):
    data = {"dim": 2, "degree": 3, "resolution": 1, "mu": 1.0, "lambda": 1.0, "load": ["0", "0"]}
    data.update(overrides)
    return data


class TestParseProblem:
    """Tests for parse_problem"""

    def test_valid(self):
        """Test a well-formed expression load"""
        spec = parse_problem(problem_data(load=["x0*x1", "1"]))

        assert spec.dim == 2
        assert spec.lam == 1.0
        assert not spec.is_mms
        assert [str(e) for e in spec.expressions] == ["x0*x1", "1"]

    def test_mms_with_seed(self):
        """Test the manufactured load accepts a seed"""
        spec = parse_problem(problem_data(load="mms", seed=7))

        assert spec.is_mms
        assert spec.seed == 7

    @pytest.mark.parametrize(
        "overrides,location",
        [
            ({"load": ["0", "x0 +"]}, "$.load[1]"),
            ({"load": ["0", "sin(x0)"]}, "$.load[1]"),
            ({"load": ["0"]}, "$.load"),
            ({"load": 3}, "$.load"),
            ({"dim": "two"}, "$.dim"),
            ({"dim": 0}, "$.dim"),
            ({"degree": 1}, "$.degree"),
            ({"resolution": 2.5}, "$.resolution"),
            ({"mu": 0.0}, "$.mu"),
            ({"lambda": -1.0}, "$.lambda"),
            ({"seed": 3}, "$.seed"),
            ({"colour": "red"}, "$.colour"),
        ],
    )
    def test_rejects_with_location(self, overrides, location):
        """Test each malformed field is reported with its JSON path"""
        with pytest.raises(ProblemFileError) as e:
            parse_problem(problem_data(**overrides))

        assert e.value.location == location
        assert e.value.exit_code == 2

    def test_missing_key(self):
        """Test a missing required key"""
        data = problem_data()
        del data["mu"]

        with pytest.raises(ProblemFileError, match="mu"):
            parse_problem(data)

    def test_not_an_object(self):
        """Test a top-level list is rejected"""
        with pytest.raises(ProblemFileError):
            parse_problem([1, 2])


class TestReadProblem:
    """Tests for read_problem"""

    def test_reads_file(self, tmp_path):
        """Test a problem is read from disk"""
        path = tmp_path / "problem.json"
        path.write_text(json.dumps(problem_data()))

        assert read_problem(str(path)).degree == 3

    def test_invalid_json(self, tmp_path):
        """Test malformed JSON"""
        path = tmp_path / "problem.json"
        path.write_text("{\"dim\": 2,")

        with pytest.raises(ProblemFileError):
            read_problem(str(path))

    def test_missing_file(self, tmp_path):
        """Test an unreadable path is a configuration error"""
        with pytest.raises(ConfigurationError):
            read_problem(str(tmp_path / "absent.json"))


class TestRunProblem:
    """Tests for run_problem"""

    def test_zero_load(self):
        """Test f = 0 gives zero coefficients and samples"""
        result = run_problem(parse_problem(problem_data()))

        assert not np.any(result["sigma"])
        assert not np.any(result["u"])
        assert len(result["sigma_samples"]) == result["mesh"]["cells"] == 2
        assert result["sigma_samples"][0]["sigma"] == [[0.0, 0.0], [0.0, 0.0]]
        assert "errors" not in result

    def test_manufactured_load(self):
        """Test the manufactured load reports error norms"""
        result = run_problem(parse_problem(problem_data(load="mms", seed=7, resolution=2)))

        assert result["residual"] < 1e-9
        assert result["equilibrium_residual"] < 1e-9
        assert set(result["errors"]) == {"e_sigma_l2", "e_sigma_div", "e_sigma_hdiv", "e_u_l2"}
        assert result["problem"]["load"] == "mms"

    def test_exports_matrices(self, tmp_path):
        """Test the system matrices are written on request"""
        run_problem(parse_problem(problem_data(load=["1", "0"])), matrices_dir=str(tmp_path))

        assert (tmp_path / "A.mtx").exists()
        assert (tmp_path / "B.mtx").exists()

    def test_cell_budget(self):
        """Test the mesh budget is enforced"""
        with pytest.raises(ResourceLimitError):
            run_problem(parse_problem(problem_data(resolution=8)), cell_budget=10)
