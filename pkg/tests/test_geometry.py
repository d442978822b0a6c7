"""
Tests for simplices, frames and Kuhn meshes
"""
import numpy as np
import pytest

from symstress.errors import ConfigurationError, DegenerateSimplexError, ResourceLimitError
from symstress.geometry import (
    edge_tangents,
    facet_neighbours,
    frame_from_points,
    kuhn_mesh,
    local_subsimplex_index,
    mesh_from_json,
    mesh_to_json,
    simplex_from_vertices,
    single_cell_mesh,
)


class TestSimplex:
    """Tests for simplex_from_vertices"""

    def test_reference_triangle(self, triangle):
        """Test barycentric gradients and measure of the reference triangle"""
        np.testing.assert_allclose(triangle.grad_lambda, [[-1, -1], [1, 0], [0, 1]])
        assert triangle.measure == pytest.approx(0.5)

    def test_reference_tetrahedron(self, tetrahedron):
        """Test the measure of the reference tetrahedron"""
        assert tetrahedron.measure == pytest.approx(1 / 6)

    def test_scaling(self, triangle):
        """Test that doubling the triangle halves gradients and quadruples the measure"""
        scaled = simplex_from_vertices(2 * triangle.vertices)

        np.testing.assert_allclose(scaled.grad_lambda, triangle.grad_lambda / 2)
        assert scaled.measure == pytest.approx(4 * triangle.measure)

    def test_degenerate(self):
        """Test that collinear points raise"""
        with pytest.raises(DegenerateSimplexError):
            simplex_from_vertices([[0, 0], [1, 1], [2, 2]])

    def test_wrong_shape(self):
        """Test that n+1 points in R^n are required"""
        with pytest.raises(DegenerateSimplexError):
            simplex_from_vertices([[0, 0], [1, 0]])

    def test_barycentric_roundtrip(self, rng):
        """Test point(barycentric(x)) == x and partition of unity"""
        s = simplex_from_vertices(rng.standard_normal((4, 3)))
        x = rng.standard_normal((5, 3))
        lam = s.barycentric(x)

        np.testing.assert_allclose(lam.sum(axis=1), 1.0)
        np.testing.assert_allclose(s.point(lam), x, atol=1e-10)


class TestEdgeTangents:
    """Tests for edge_tangents"""

    def test_triangle(self, triangle):
        """Test tangents of the reference triangle"""
        t = edge_tangents(triangle)

        np.testing.assert_allclose(t[(0, 1)], [1, 0])
        np.testing.assert_allclose(t[(0, 2)], [0, 1])
        np.testing.assert_allclose(t[(1, 2)], [-1, 1])

    def test_tetrahedron(self, tetrahedron):
        """Test t_{1,2} on the reference tetrahedron"""
        np.testing.assert_allclose(edge_tangents(tetrahedron)[(1, 2)], [-1, 1, 0])


class TestFrames:
    """Tests for frame_from_points"""

    def test_edge_in_plane(self):
        """Test the horizontal edge gets tangent (1,0) and normal (0,1)"""
        frame = frame_from_points(np.array([[0.0, 0.0], [1.0, 0.0]]))

        np.testing.assert_allclose(frame.tangents, [[1, 0]])
        np.testing.assert_allclose(frame.normals, [[0, 1]])

    def test_vertex_uses_axes(self):
        """Test that a vertex frame is the Cartesian basis"""
        frame = frame_from_points(np.array([[0.3, 0.2, 0.1]]))

        assert frame.ell == 0
        np.testing.assert_allclose(frame.normals, np.eye(3))

    def test_diagonal_edge_in_space(self):
        """Test normals of the edge (0,0,0)-(1,1,0)"""
        frame = frame_from_points(np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 0.0]]))

        np.testing.assert_allclose(frame.tangents, [[1, 1, 0]])
        np.testing.assert_allclose(frame.normals[0], np.array([1, -1, 0]) / np.sqrt(2))
        np.testing.assert_allclose(frame.normals[1], [0, 0, 1])
        np.testing.assert_allclose(frame.normals @ frame.tangents.T, 0, atol=1e-14)

    def test_degenerate_face(self):
        """Test that a face with dependent tangents raises"""
        with pytest.raises(DegenerateSimplexError):
            frame_from_points(np.array([[0.0, 0, 0], [1, 0, 0], [2, 0, 0]]))


class TestKuhnMesh:
    """Tests for kuhn_mesh and the face lattice"""

    def test_one_square(self):
        """Test the split of one square"""
        mesh = kuhn_mesh(2, 1)

        assert mesh.num_cells == 2
        assert mesh.counts() == [4, 5]

    def test_one_cube(self):
        """Test the split of one cube into 3! tetrahedra"""
        mesh = kuhn_mesh(3, 1)

        assert mesh.num_cells == 6
        assert mesh.counts() == [8, 19, 18]

    def test_two_by_two(self):
        """Test the m=2 planar mesh and Euler's formula"""
        mesh = kuhn_mesh(2, 2)

        assert mesh.num_cells == 8
        assert mesh.counts() == [9, 16]
        assert mesh.counts()[0] - mesh.counts()[1] + mesh.num_cells == 1

    def test_cells_sorted_and_cover_cube(self):
        """Test sorted vertex rows and total volume 1"""
        mesh = kuhn_mesh(3, 2)

        assert np.all(np.diff(mesh.cells, axis=1) > 0)
        assert sum(mesh.simplex(c).measure for c in range(mesh.num_cells)) == pytest.approx(1.0)

    def test_refinement_halves_h(self):
        """Test m -> 2m halves mesh_size_h exactly"""
        assert kuhn_mesh(2, 4).mesh_size_h == kuhn_mesh(2, 2).mesh_size_h / 2

    def test_cell_budget(self):
        """Test that exceeding the budget is a resource error"""
        with pytest.raises(ResourceLimitError):
            kuhn_mesh(3, 4, cell_budget=100)

    def test_invalid(self):
        """Test that m < 1 is rejected"""
        with pytest.raises(ConfigurationError):
            kuhn_mesh(2, 0)

    def test_facet_neighbours(self):
        """Test boundary facets have one cell and interior facets two"""
        mesh = kuhn_mesh(2, 2)
        sizes = sorted(len(cells) for cells in facet_neighbours(mesh))

        assert sizes.count(1) == 8
        assert sizes.count(2) == 8

    def test_local_index(self):
        """Test that local positions point back at the subsimplex vertices"""
        mesh = kuhn_mesh(3, 1)
        for local, sub_id in enumerate(mesh.cell_to_subsimplex[1][0]):
            positions = local_subsimplex_index(mesh, 0, 1, int(sub_id))
            assert tuple(mesh.cells[0][list(positions)]) == mesh.subsimplices[1][sub_id]


class TestSingleCell:
    """Tests for single_cell_mesh"""

    def test_tetrahedron_lattice(self, tetrahedron):
        """Test subsimplex counts C(4, ell+1)"""
        mesh = single_cell_mesh(tetrahedron.vertices)

        assert mesh.counts() == [4, 6, 4]


class TestMeshJson:
    """Tests for mesh_to_json and mesh_from_json"""

    def test_roundtrip(self):
        """Test that exported meshes rebuild the same lattice"""
        mesh = kuhn_mesh(2, 2)
        rebuilt = mesh_from_json(mesh_to_json(mesh))

        assert rebuilt.counts() == mesh.counts()
        np.testing.assert_array_equal(rebuilt.cells, mesh.cells)

    def test_duplicate_cell(self):
        """Test that duplicate cells are rejected"""
        data = {"points": [[0, 0], [1, 0], [0, 1]], "cells": [[0, 1, 2], [2, 1, 0]]}

        with pytest.raises(ConfigurationError):
            mesh_from_json(data)

    def test_degenerate_cell(self):
        """Test that a flat cell is rejected"""
        data = {"points": [[0, 0], [1, 0], [2, 0]], "cells": [[0, 1, 2]]}

        with pytest.raises(DegenerateSimplexError):
            mesh_from_json(data)

    def test_missing_key(self):
        """Test that malformed JSON is a configuration error"""
        with pytest.raises(ConfigurationError):
            mesh_from_json({"points": [[0, 0]]})
