"""
Tests for barycentric polynomials, exact integration and quadrature
"""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from symstress.errors import ConfigurationError, ResourceLimitError
from symstress.geometry import simplex_from_vertices
from symstress.polynomial import (
    BarycentricPoly,
    from_cartesian,
    gm_quadrature,
    integrate_monomial,
    integrate_on_subsimplex,
    integrate_product,
    monomial_space,
    multi_indices,
    restrict_to_subsimplex,
)

L = BarycentricPoly.coordinate


class TestEvaluation:
    """Tests for eval and eval_barycentric"""

    def test_barycenter(self, triangle):
        """Test lambda_0 at the barycenter"""
        assert L(2, 0).eval(triangle, [1 / 3, 1 / 3]) == pytest.approx(1 / 3)

    def test_bubble_vanishes_at_vertex(self, triangle):
        """Test lambda_1 lambda_2 at x_1"""
        assert (L(2, 1) * L(2, 2)).eval(triangle, [1.0, 0.0]) == pytest.approx(0.0)

    def test_partition_of_unity(self, triangle, rng):
        """Test (lambda_0 + lambda_1 + lambda_2)^2 == 1"""
        p = (L(2, 0) + L(2, 1) + L(2, 2)) ** 2
        for x in rng.uniform(-2, 2, (5, 2)):
            assert p.eval(triangle, x) == pytest.approx(1.0)


class TestGradient:
    """Tests for gradient"""

    def test_coordinate(self, triangle):
        """Test grad lambda_1 = (1, 0) on the reference triangle"""
        gx, gy = L(2, 1).gradient(triangle)

        assert gx == BarycentricPoly.constant(2, 1.0)
        assert gy.is_zero()

    def test_constant(self, triangle):
        """Test that constants have zero gradient"""
        assert all(g.is_zero() for g in BarycentricPoly.constant(2, 3.0).gradient(triangle))

    def test_matches_finite_difference(self, rng):
        """Test the gradient of a cubic against central differences"""
        s = simplex_from_vertices(rng.standard_normal((3, 2)))
        p = L(2, 0) ** 2 * L(2, 1) + 3.0 * L(2, 2)
        x = s.centroid()
        eps = 1e-6
        for axis, g in enumerate(p.gradient(s)):
            step = np.zeros(2)
            step[axis] = eps
            fd = (p.eval(s, x + step) - p.eval(s, x - step)) / (2 * eps)
            assert g.eval(s, x) == pytest.approx(fd, rel=1e-6, abs=1e-8)


class TestIntegration:
    """Tests for integrate_monomial and integrate_product"""

    def test_constant_is_measure(self, triangle):
        """Test alpha = 0 gives the measure"""
        assert integrate_monomial(triangle, (0, 0, 0)) == pytest.approx(0.5)

    def test_mixed_monomial(self, triangle):
        """Test lambda_0 lambda_1 integrates to 1/24"""
        assert integrate_monomial(triangle, (1, 1, 0)) == pytest.approx(1 / 24)

    def test_interval(self):
        """Test lambda_0 on [0, 1]"""
        interval = simplex_from_vertices([[0.0], [1.0]])

        assert integrate_monomial(interval, (1, 0)) == pytest.approx(0.5)

    def test_negative_exponent(self, triangle):
        """Test that negative exponents are rejected"""
        with pytest.raises(ConfigurationError):
            integrate_monomial(triangle, (1, -1, 0))

    def test_products(self, triangle, tetrahedron):
        """Test products of barycentric coordinates"""
        assert integrate_product(triangle, [L(2, 0), L(2, 1), BarycentricPoly.constant(2, 1.0)]) == pytest.approx(1 / 24)
        assert integrate_product(triangle, [L(2, 0) - L(2, 1)]) == pytest.approx(0.0, abs=1e-15)
        assert integrate_product(tetrahedron, [L(3, 0), L(3, 0)]) == pytest.approx(1 / 60)

    def test_empty_product(self, triangle):
        """Test that the empty product integrates to the measure"""
        assert integrate_product(triangle, []) == pytest.approx(0.5)

    def test_term_budget(self, triangle):
        """Test the guard on expanded products"""
        p = L(2, 0) + L(2, 1) + L(2, 2)

        with pytest.raises(ResourceLimitError):
            integrate_product(triangle, [p] * 6, max_terms=10)

    @given(st.integers(min_value=0, max_value=6), st.integers(min_value=0, max_value=6))
    def test_against_quadrature(self, a, b):
        """Test exact integration of lambda_1^a lambda_2^b against quadrature"""
        s = simplex_from_vertices([[0.0, 0.0], [2.0, 0.5], [0.3, 1.7]])
        points, weights = gm_quadrature(2, a + b)
        values = points[:, 1] ** a * points[:, 2] ** b

        assert integrate_monomial(s, (0, a, b)) == pytest.approx(s.measure * weights @ values, rel=1e-10)


class TestRestriction:
    """Tests for restrict_to_subsimplex and integrate_on_subsimplex"""

    def test_opposite_coordinate_vanishes(self, triangle):
        """Test lambda_0 restricted to edge x_1 x_2"""
        assert restrict_to_subsimplex(L(2, 0), triangle, (1, 2)).is_zero()

    def test_coordinate_becomes_edge_coordinate(self, triangle):
        """Test lambda_1 restricted to edge x_1 x_2 is the first edge coordinate"""
        assert restrict_to_subsimplex(L(2, 1), triangle, (1, 2)) == BarycentricPoly.coordinate(1, 0)

    def test_edge_integral(self, triangle):
        """Test lambda_1 lambda_2 over edge x_1 x_2 is |e|/6"""
        restricted = restrict_to_subsimplex(L(2, 1) * L(2, 2), triangle, (1, 2))
        value = integrate_on_subsimplex(restricted, triangle.vertices[[1, 2]])

        assert value == pytest.approx(np.sqrt(2) / 6)

    def test_bad_subsimplex(self, triangle):
        """Test that vertices outside the cell are rejected"""
        with pytest.raises(ValueError):
            restrict_to_subsimplex(L(2, 0), triangle, (1, 3))


class TestQuadrature:
    """Tests for gm_quadrature"""

    def test_cubic_on_interval(self):
        """Test x^3 on [0, 1]"""
        points, weights = gm_quadrature(1, 3)

        assert weights @ points[:, 1] ** 3 == pytest.approx(0.25)

    def test_weights_sum_to_one(self):
        """Test normalization in several dimensions"""
        for n in range(1, 5):
            _, weights = gm_quadrature(n, 5)
            assert weights.sum() == pytest.approx(1.0)

    def test_out_of_range(self):
        """Test unsupported degrees"""
        with pytest.raises(ConfigurationError):
            gm_quadrature(2, -1)


class TestMonomialSpace:
    """Tests for MonomialSpace"""

    def test_dimension(self):
        """Test dim P_k = C(n+k, n)"""
        assert monomial_space(2, 3).dim == 10
        assert monomial_space(3, 4).dim == 35

    def test_descending_order(self):
        """Test the first and last multi-indices"""
        assert multi_indices(3, 2)[0] == (2, 0, 0)
        assert multi_indices(3, 2)[-1] == (0, 0, 2)

    def test_lower_degree_terms_are_lifted(self, rng):
        """Test that to_vector keeps the function when lifting lower-degree terms"""
        p = BarycentricPoly.constant(2, 2.0) + 3.0 * L(2, 1)
        space = monomial_space(2, 3)
        lam = rng.dirichlet(np.ones(3), size=6)

        np.testing.assert_allclose(space.evaluate(lam) @ p.to_vector(space), p.eval_barycentric(lam))

    def test_too_high_degree(self):
        """Test that a cubic cannot be written in P_2"""
        with pytest.raises(ValueError):
            (L(2, 0) ** 3).to_vector(monomial_space(2, 2))

    def test_derivative_matches_gradient(self, rng):
        """Test the derivative matrix against BarycentricPoly.gradient"""
        s = simplex_from_vertices(rng.standard_normal((4, 3)))
        space = monomial_space(3, 3)
        coefficients = rng.standard_normal(space.dim)
        p = BarycentricPoly.from_vector(space, coefficients)
        lower = monomial_space(3, 2)
        for axis, g in enumerate(p.gradient(s)):
            np.testing.assert_allclose(space.derivative(s, axis) @ coefficients, g.to_vector(lower), atol=1e-10)

    def test_gram_matches_integration(self, triangle):
        """Test the Gram matrix entries"""
        space = monomial_space(2, 2)
        gram = space.gram(triangle)
        a, b = space.alphas[1], space.alphas[4]

        assert gram[1, 4] == pytest.approx(integrate_monomial(triangle, [x + y for x, y in zip(a, b)]))


class TestFromCartesian:
    """Tests for from_cartesian"""

    def test_quadratic(self, rng):
        """Test x0 * x1^2 rewritten on a random triangle"""
        s = simplex_from_vertices(rng.standard_normal((3, 2)))
        p = from_cartesian({(1, 2): 1.0}, s)
        for x in rng.standard_normal((4, 2)):
            assert p.eval(s, x) == pytest.approx(x[0] * x[1] ** 2)
