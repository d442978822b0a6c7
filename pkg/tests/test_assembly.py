"""
Tests for global DOF numbering, assembly and conformity
"""
import os

import numpy as np
import pytest

from symstress.assembly import (
    assemble_system,
    constant_field,
    export_matrices,
    global_interpolant,
    interelement_jump_check,
    load_vector,
    number_dofs,
)
from symstress.elements import (
    displacement_element,
    local_divergence,
    reference_simplex,
    vector_field_to_vector,
    vector_to_field,
)
from symstress.errors import ConfigurationError
from symstress.geometry import kuhn_mesh, single_cell_mesh
from symstress.polynomial import BarycentricPoly
from symstress.verification import corrupted_frame_override


def unit_load(cell, s):
    return [BarycentricPoly.constant(s.n, 1.0)] + [BarycentricPoly(s.n)] * (s.n - 1)


class TestNumberDofs:
    """Tests for number_dofs"""

    def test_one_square(self):
        """Test 4*3 + 5*4 + 2*9 stress and 2*12 displacement DOFs"""
        dofmap = number_dofs(kuhn_mesh(2, 1), 3)

        assert dofmap.stress_global_count == 50
        assert dofmap.displacement_global_count == 24

    def test_two_by_two(self):
        """Test 9*3 + 16*4 + 8*9 stress DOFs"""
        assert number_dofs(kuhn_mesh(2, 2), 3).stress_global_count == 163

    def test_single_tetrahedron(self):
        """Test that one cell owns every DOF"""
        mesh = single_cell_mesh(reference_simplex(3).vertices)

        assert number_dofs(mesh, 4).stress_global_count == 210

    def test_every_index_used(self):
        """Test the cell maps cover 0 .. count-1"""
        dofmap = number_dofs(kuhn_mesh(3, 1), 4)

        assert set(np.unique(dofmap.cell_stress_dofs)) == set(range(dofmap.stress_global_count))
        assert np.unique(dofmap.cell_displacement_dofs).size == dofmap.displacement_global_count

    def test_low_degree_rejected(self):
        """Test k <= n needs the override"""
        with pytest.raises(ConfigurationError):
            number_dofs(kuhn_mesh(2, 1), 2)

    def test_low_degree_override(self):
        """Test the override records a warning"""
        dofmap = number_dofs(kuhn_mesh(2, 1), 2, allow_low_degree=True)

        assert dofmap.low_degree
        assert dofmap.warnings
        assert dofmap.summary()["low_degree"] is True

    def test_shared_functionals_share_indices(self):
        """Test that the same face functional gets the same global index in every cell"""
        mesh = kuhn_mesh(2, 2)
        system = assemble_system(mesh, 3, 1.0, 1.0)
        seen = {}
        for cell, element in enumerate(system.elements):
            for local, dof in enumerate(element.dofs):
                index = int(system.dofmap.cell_stress_dofs[cell, local])
                assert seen.setdefault(dof.global_key, index) == index


class TestAssembleSystem:
    """Tests for assemble_system"""

    @pytest.fixture
    def system(self):
        return assemble_system(kuhn_mesh(2, 1), 3, 1.0, 1.0, load=unit_load)

    def test_shapes(self, system):
        """Test block shapes"""
        assert system.A.shape == (50, 50)
        assert system.B.shape == (24, 50)
        assert system.block_matrix().shape == (74, 74)
        assert system.rhs().shape == (74,)

    def test_symmetric_positive(self, system):
        """Test A and S are symmetric positive definite"""
        for matrix in (system.A, system.S, system.L2):
            dense = matrix.toarray()
            np.testing.assert_allclose(dense, dense.T, atol=1e-12)
            assert np.linalg.eigvalsh(dense).min() > 0

    def test_constant_stress(self, system):
        """Test the interpolant of delta: L2 norm, compliance energy and zero divergence"""
        mesh = system.mesh
        coefficients = global_interpolant(
            mesh, 3, lambda cell, s: constant_field(2, np.eye(2)), system.dofmap, system.elements
        )

        assert coefficients @ system.L2 @ coefficients == pytest.approx(2.0)
        # A delta = delta / 4 for mu = lambda = 1
        assert coefficients @ system.A @ coefficients == pytest.approx(0.5)
        np.testing.assert_allclose(system.B @ coefficients, 0.0, atol=1e-12)

    def test_load(self, system):
        """Test (f, f) = |Omega| for f = e_1"""
        total = 0.0
        for cell in range(system.mesh.num_cells):
            coefficients = vector_field_to_vector(unit_load(cell, system.mesh.simplex(cell)), 2)
            total += coefficients @ system.rhs_f[system.dofmap.cell_displacement_dofs[cell]]

        assert total == pytest.approx(1.0)

    def test_divergence_block(self, system, rng):
        """Test B tau is the L2 pairing of div tau with every displacement basis function"""
        tau = rng.standard_normal(system.dofmap.stress_global_count)
        B = system.B.toarray()
        for cell in range(system.mesh.num_cells):
            s = system.mesh.simplex(cell)
            div = local_divergence(vector_to_field(2, 3, system.local_stress(cell, tau)), s)
            expected = displacement_element(s, 3).mass_matrix() @ vector_field_to_vector(div, 2)
            udofs = system.dofmap.cell_displacement_dofs[cell]

            np.testing.assert_allclose(B[udofs] @ tau, expected, atol=1e-10)

    def test_threads_and_order(self):
        """Test that threading and cell order leave the matrices unchanged"""
        mesh = kuhn_mesh(2, 2)
        serial = assemble_system(mesh, 3, 1.0, 2.0, load=unit_load)
        threaded = assemble_system(mesh, 3, 1.0, 2.0, load=unit_load, threads=3, deterministic=True)
        permuted = assemble_system(mesh, 3, 1.0, 2.0, load=unit_load, cell_order=list(range(mesh.num_cells))[::-1])

        assert (serial.A != threaded.A).nnz == 0
        assert np.array_equal(serial.rhs_f, threaded.rhs_f)
        np.testing.assert_allclose(serial.A.toarray(), permuted.A.toarray(), atol=1e-13)
        np.testing.assert_allclose(serial.B.toarray(), permuted.B.toarray(), atol=1e-13)

    def test_bad_cell_order(self):
        """Test that the order must be a permutation"""
        with pytest.raises(ConfigurationError):
            assemble_system(kuhn_mesh(2, 1), 3, 1.0, 1.0, cell_order=[0, 0])

    def test_bad_material(self):
        """Test mu <= 0 is rejected"""
        with pytest.raises(ConfigurationError):
            assemble_system(kuhn_mesh(2, 1), 3, 0.0, 1.0)

    def test_wrong_load_arity(self, triangle):
        """Test a load with too few components"""
        with pytest.raises(ConfigurationError):
            load_vector(triangle, 3, [BarycentricPoly.constant(2, 1.0)])


class TestConformity:
    """Tests for interelement_jump_check"""

    @pytest.mark.parametrize("m", [1, 2])
    def test_random_global_stress(self, m, rng):
        """Test normal traces agree across interior edges"""
        mesh = kuhn_mesh(2, m)
        dofmap = number_dofs(mesh, 3)
        coefficients = rng.standard_normal(dofmap.stress_global_count)

        assert interelement_jump_check(mesh, 3, coefficients, dofmap=dofmap) < 1e-9

    def test_tetrahedra(self, rng):
        """Test conformity across faces in three dimensions"""
        mesh = kuhn_mesh(3, 1)
        dofmap = number_dofs(mesh, 4)

        assert interelement_jump_check(mesh, 4, rng.standard_normal(dofmap.stress_global_count)) < 1e-9

    def test_single_cell(self, rng):
        """Test a single cell has nothing to compare"""
        mesh = single_cell_mesh(reference_simplex(2).vertices)

        assert interelement_jump_check(mesh, 3, rng.standard_normal(30)) == 0.0

    def test_corrupted_frame(self, rng):
        """Test that a flipped facet normal in one cell breaks conformity"""
        mesh = kuhn_mesh(2, 2)
        dofmap = number_dofs(mesh, 3)
        coefficients = rng.standard_normal(dofmap.stress_global_count)
        jump = interelement_jump_check(
            mesh, 3, coefficients, dofmap=dofmap, frame_override=corrupted_frame_override(mesh)
        )

        assert jump > 1e-2


class TestExport:
    """Tests for export_matrices"""

    def test_writes_matrix_market(self, tmp_path):
        """Test one .mtx file per block plus the load"""
        system = assemble_system(kuhn_mesh(2, 1), 3, 1.0, 1.0, load=unit_load)
        written = export_matrices(system, str(tmp_path / "matrices"))

        assert set(written) == {"A", "B", "S", "Mu", "F"}
        assert all(os.path.exists(path) for path in written.values())
        with open(written["B"]) as handle:
            assert handle.readline().startswith("%%MatrixMarket")
