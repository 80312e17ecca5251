# This file is part of ts_isofem.
#
# Developed for Vera C. Rubin Observatory Telescope and Site Systems.
# This product includes software developed by the LSST Project
# (https://www.lsst.org).
# See the COPYRIGHT file at the top-level directory of this distribution
# for details of code ownership.
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.

import unittest

import numpy as np
import pytest
from lsst.ts import isofem


def count_edges(mesh):
    pairs = mesh.cells[:, [[0, 1], [0, 2], [1, 2]]].reshape(-1, 2)
    if mesh.dimension == 3:
        pairs = mesh.cells[
            :, [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]
        ].reshape(-1, 2)
    return len(np.unique(np.sort(pairs, axis=1), axis=0))


class FeSpaceTestCase(unittest.TestCase):
    def setUp(self):
        self.disk = isofem.make_domain("unit-disk")
        self.ball = isofem.make_domain("unit-ball")

    def test_single_triangle(self):
        mesh = isofem.Mesh(vertices=[[0, 0], [1, 0], [0, 1]], cells=[[0, 1, 2]])
        for degree, num_dofs in ((1, 3), (2, 6), (3, 10)):
            with self.subTest(degree=degree):
                space = isofem.build_space(mesh, None, degree)
                assert space.num_dofs == num_dofs
                # Every node of a lone triangle is on its boundary
                # except the centroid at degree 3.
                assert space.num_boundary_dofs == 3 * degree
                np.testing.assert_allclose(
                    np.sort(space.node_coordinates[space.cell_dofs[0]], axis=0),
                    np.sort(space.reference.nodes, axis=0),
                )

    def test_degree_one_matches_vertices(self):
        mesh = isofem.generate_linear_mesh(self.disk, 0.3)
        space = isofem.build_space(mesh, self.disk, 1)
        assert space.num_dofs == mesh.num_vertices
        assert space.num_boundary_dofs == mesh.num_boundary_vertices
        np.testing.assert_array_equal(space.cell_dofs, mesh.cells)
        np.testing.assert_allclose(space.node_coordinates, mesh.vertices)

    def test_dof_counts(self):
        mesh = isofem.generate_linear_mesh(self.disk, 0.3)
        num_edges = count_edges(mesh)
        num_boundary_edges = len(mesh.boundary_faces)
        for degree, expected, expected_boundary in (
            (2, mesh.num_vertices + num_edges, 2 * num_boundary_edges),
            (
                3,
                mesh.num_vertices + 2 * num_edges + mesh.num_cells,
                3 * num_boundary_edges,
            ),
        ):
            with self.subTest(degree=degree):
                space = isofem.build_space(mesh, self.disk, degree)
                assert space.num_dofs == expected
                assert space.num_boundary_dofs == expected_boundary

        mesh = isofem.generate_linear_mesh(self.ball, 10)
        space = isofem.build_space(mesh, self.ball, 2)
        assert space.num_dofs == mesh.num_vertices + count_edges(mesh)
        # 6 vertices and 12 edges on the octahedron surface
        assert space.num_boundary_dofs == 18

    def test_boundary_nodes_on_boundary(self):
        for domain, target_h in ((self.disk, 0.3), (self.ball, 10)):
            mesh = isofem.generate_linear_mesh(domain, target_h)
            for degree in (1, 2, 3):
                with self.subTest(domain=domain, degree=degree):
                    space = isofem.build_space(mesh, domain, degree)
                    boundary = space.node_coordinates[: space.num_boundary_dofs]
                    interior = space.node_coordinates[space.num_boundary_dofs :]
                    np.testing.assert_allclose(
                        domain.signed_distance(boundary), 0, atol=1e-12
                    )
                    assert np.all(domain.signed_distance(interior) < -1e-3)
                    assert np.all(space.face_dofs < space.num_boundary_dofs)
                    assert space.face_dofs.shape == (
                        len(mesh.boundary_faces),
                        len(space.reference.face_node_indices[0]),
                    )

    def test_patterns(self):
        mesh = isofem.generate_linear_mesh(self.disk, 0.5)
        space = isofem.build_space(mesh, self.disk, 2)
        other = isofem.build_space(mesh, self.disk, 2)
        np.testing.assert_array_equal(space.cell_dofs, other.cell_dofs)
        np.testing.assert_array_equal(
            space.bulk_pattern.indices, other.bulk_pattern.indices
        )
        np.testing.assert_array_equal(
            space.bulk_pattern.indptr, other.bulk_pattern.indptr
        )
        assert space.bulk_pattern is space.bulk_pattern
        assert space.face_pattern.size == space.num_boundary_dofs

        # Column indices are sorted within each row.
        indptr = space.bulk_pattern.indptr
        indices = space.bulk_pattern.indices
        for row in range(space.num_dofs):
            assert np.all(np.diff(indices[indptr[row] : indptr[row + 1]]) > 0)

    def test_sparsity_pattern(self):
        pattern = isofem.SparsityPattern([[0, 1], [1, 2]], 3)
        assert pattern.nnz == 7
        matrix = pattern.assemble(np.ones((2, 2, 2)))
        np.testing.assert_array_equal(
            matrix.toarray(), [[1, 1, 0], [1, 2, 1], [0, 1, 1]]
        )
        with pytest.raises(ValueError):
            pattern.assemble(np.ones((2, 3, 3)))

    def test_fe_function(self):
        mesh = isofem.generate_linear_mesh(self.disk, 0.5)
        space = isofem.build_space(mesh, self.disk, 2)
        u = space.interpolate_function(lambda x: x[:, 0] + 2 * x[:, 1])
        assert u.boundary_coefficients.shape == (space.num_boundary_dofs,)
        assert u.cell_coefficients().shape == space.cell_dofs.shape
        np.testing.assert_allclose((-u).coefficients, -u.coefficients)
        np.testing.assert_allclose((u - u).coefficients, 0)
        other_space = isofem.build_space(mesh, self.disk, 2)
        other = isofem.FeFunction(other_space, u.coefficients)
        with pytest.raises(ValueError, match="different spaces"):
            u - other
        with pytest.raises(ValueError):
            isofem.FeFunction(space, np.zeros(space.num_dofs + 1))

    def test_invalid_degree(self):
        mesh = isofem.generate_linear_mesh(self.disk, 10)
        with pytest.raises(ValueError):
            isofem.build_space(mesh, self.disk, 0)
