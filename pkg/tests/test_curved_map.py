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

import math
import unittest

import numpy as np
import pytest
from lsst.ts import isofem

rng = np.random.default_rng(seed=47)


def random_reference_points(dimension, num_points):
    """Random points strictly inside the reference simplex."""
    lambdas = rng.dirichlet(np.ones(dimension + 1), size=num_points)
    return lambdas[:, 1:]


class CurvedElementMapTestCase(unittest.TestCase):
    def setUp(self):
        self.disk = isofem.make_domain("unit-disk")
        self.ball = isofem.make_domain("unit-ball")
        # Reference triangle whose edge opposite the origin is on Γ.
        self.triangle = isofem.Mesh(
            vertices=[[0, 0], [1, 0], [0, 1]],
            cells=[[0, 1, 2]],
            boundary_faces=[[0, 0]],
        )

    def test_affine_map(self):
        mesh = isofem.Mesh(vertices=[[1, 1], [3, 1], [1, 4]], cells=[[0, 1, 2]])
        B, b = isofem.affine_map(mesh, 0)
        np.testing.assert_allclose(B, [[2, 0], [0, 3]])
        np.testing.assert_allclose(b, [1, 1])

        B, b = isofem.affine_map(mesh)
        assert B.shape == (1, 2, 2)
        assert b.shape == (1, 2)

        inverted = isofem.Mesh(vertices=[[0, 0], [0, 1], [1, 0]], cells=[[0, 1, 2]])
        with pytest.raises(isofem.JacobianError) as excinfo:
            isofem.affine_map(inverted)
        assert excinfo.value.cell_index == 0

    def test_lambda_star(self):
        value = isofem.lambda_star([0.25, 0.25], [True, True, False])
        assert float(value) == pytest.approx(0.75)

        xhat = np.array([[0, 0], [1, 0], [0, 1], [1 / 3, 1 / 3]])
        values = isofem.lambda_star(xhat, [[False, True, True], [True, False, False]])
        np.testing.assert_allclose(
            values, [[0, 1, 1, 2 / 3], [1, 0, 0, 1 / 3]], atol=1e-15
        )

    def test_single_triangle(self):
        reference = isofem.ReferenceElement(2, 1)
        element_map = isofem.CurvedElementMap(self.triangle, self.disk, reference)
        np.testing.assert_array_equal(element_map.boundary_mask, [[False, True, True]])
        assert element_map.num_boundary_nodes[0] == 2
        assert element_map.is_curved[0]

        y = element_map.face_projection_y([[0.3, 0.1]])
        np.testing.assert_allclose(y[0, 0], [0.75, 0.25])

        rho = element_map.rho([[0.5, 0.5]])
        np.testing.assert_allclose(rho[0, 0], (1 / math.sqrt(2) - 0.5) * np.ones(2))

        # ρ vanishes on the face opposite the boundary face.
        np.testing.assert_allclose(element_map.rho([[0, 0]]), 0, atol=1e-15)
        with pytest.raises(isofem.GeometryError):
            element_map.face_projection_y([[0, 0]])

    def test_straight_cells(self):
        reference = isofem.ReferenceElement(2, 2)
        for domain in (None, self.disk):
            with self.subTest(domain=domain):
                # No correction without a domain or without boundary vertices.
                mesh = isofem.Mesh(
                    vertices=[[0, 0], [1, 0], [0, 0.5]],
                    cells=[[0, 1, 2]],
                    boundary_faces=[[0, 2], [0, 1]] if domain is None else [],
                )
                element_map = isofem.CurvedElementMap(mesh, domain, reference)
                assert not element_map.is_curved[0]
                xhat = random_reference_points(2, 10)
                np.testing.assert_allclose(
                    element_map.exact_map(xhat), element_map.affine(xhat)
                )
                np.testing.assert_allclose(
                    element_map.isoparametric_jacobian(xhat)[0],
                    np.broadcast_to(element_map.B[0], (10, 2, 2)),
                    atol=1e-13,
                )

        mesh = isofem.generate_linear_mesh(self.disk, 0.5)
        element_map = isofem.CurvedElementMap(mesh, None, reference)
        assert not np.any(element_map.is_curved)

    def test_interpolates_at_nodes(self):
        mesh = isofem.generate_linear_mesh(self.disk, 0.3)
        for degree in (1, 2, 3):
            with self.subTest(degree=degree):
                reference = isofem.ReferenceElement(2, degree)
                element_map = isofem.CurvedElementMap(mesh, self.disk, reference)
                np.testing.assert_allclose(
                    element_map.isoparametric_map(reference.nodes),
                    element_map.exact_map(reference.nodes),
                    atol=1e-12,
                )

    def test_boundary_faces_map_onto_boundary(self):
        for domain, target_h in ((self.disk, 0.3), (self.ball, 10)):
            mesh = isofem.generate_linear_mesh(domain, target_h)
            n = domain.dimension
            reference = isofem.ReferenceElement(n, 2)
            face_xhat = random_reference_points(n - 1, 5)
            for cell, face in mesh.boundary_faces:
                element_map = isofem.CurvedElementMap(
                    mesh, domain, reference, cells=[cell]
                )
                xhat = reference.face_points(face, face_xhat)
                radii = np.linalg.norm(element_map.exact_map(xhat), axis=-1)
                np.testing.assert_allclose(radii, 1, atol=1e-12)

                # Face midpoints are Lagrange nodes for k = 2 in 2D.
                if n == 2:
                    midpoint = reference.face_points(face, [[0.5]])
                    radius = np.linalg.norm(element_map.isoparametric_map(midpoint))
                    assert radius == pytest.approx(1, abs=1e-12)

    def test_face_jacobian(self):
        reference = isofem.ReferenceElement(2, 1)
        mesh = isofem.Mesh(vertices=[[0, 0], [2, 0], [0, 2]], cells=[[0, 1, 2]])
        element_map = isofem.CurvedElementMap(mesh, None, reference)
        tangent, measure, normal = element_map.face_jacobian([[0.25], [0.5]], 0)
        assert tangent.shape == (1, 2, 2, 1)
        np.testing.assert_allclose(measure, 2 * math.sqrt(2))
        np.testing.assert_allclose(normal[0], [[1 / math.sqrt(2)] * 2] * 2)
        _, measure, normal = element_map.face_jacobian([[0.5]], 1)
        assert measure[0, 0] == pytest.approx(2)
        np.testing.assert_allclose(normal[0, 0], [-1, 0], atol=1e-15)

        reference = isofem.ReferenceElement(3, 1)
        mesh = isofem.Mesh(
            vertices=np.vstack([np.zeros(3), np.eye(3)]), cells=[[0, 1, 2, 3]]
        )
        element_map = isofem.CurvedElementMap(mesh, None, reference)
        _, measure, normal = element_map.face_jacobian([[0.25, 0.25]], 0)
        assert measure[0, 0] == pytest.approx(math.sqrt(3))
        np.testing.assert_allclose(normal[0, 0], np.ones(3) / math.sqrt(3))
        for face in (1, 2, 3):
            _, measure, normal = element_map.face_jacobian([[0.25, 0.25]], face)
            assert measure[0, 0] == pytest.approx(1)
            np.testing.assert_allclose(normal[0, 0], -np.eye(3)[face - 1], atol=1e-15)

    def test_face_normals_point_outward(self):
        mesh = isofem.generate_linear_mesh(self.disk, 0.3)
        reference = isofem.ReferenceElement(2, 2)
        element_map = isofem.CurvedElementMap(
            mesh, self.disk, reference, cells=mesh.boundary_faces[:, 0]
        )
        for position, (_, face) in enumerate(mesh.boundary_faces):
            single = element_map.take([position])
            _, _, normal = single.face_jacobian([[0.3]], face)
            point = single.isoparametric_map(reference.face_points(face, [[0.3]]))
            # On the disk the outward normal is close to the position.
            assert np.dot(normal[0, 0], point[0, 0]) > 0.9

    def test_take(self):
        mesh = isofem.generate_linear_mesh(self.disk, 0.5)
        reference = isofem.ReferenceElement(2, 2)
        element_map = isofem.CurvedElementMap(mesh, self.disk, reference)
        subset = element_map.take(slice(2, 5))
        assert subset.num_cells == 3
        np.testing.assert_array_equal(subset.cell_indices, [2, 3, 4])
        xhat = random_reference_points(2, 4)
        np.testing.assert_allclose(
            subset.exact_map(xhat), element_map.exact_map(xhat)[2:5]
        )
        assert element_map.num_cells == mesh.num_cells

    def test_rho_jacobian(self):
        step = 1e-6
        for domain, target_h in ((self.disk, 0.5), (self.ball, 10)):
            mesh = isofem.generate_linear_mesh(domain, target_h)
            n = domain.dimension
            reference = isofem.ReferenceElement(n, 2)
            element_map = isofem.CurvedElementMap(mesh, domain, reference)
            xhat = random_reference_points(n, 6)
            jacobian = element_map.rho_jacobian(xhat)
            for m in range(n):
                shift = np.zeros(n)
                shift[m] = step
                difference = (
                    element_map.rho(xhat + shift) - element_map.rho(xhat - shift)
                ) / (2 * step)
                np.testing.assert_allclose(
                    jacobian[..., m], difference, rtol=1e-5, atol=1e-8
                )

    def test_geometry_bounds(self):
        mesh = isofem.generate_linear_mesh(self.disk, 0.3)
        rule = isofem.make_quadrature(2, 6)
        for degree in (1, 2, 3):
            with self.subTest(degree=degree):
                reference = isofem.ReferenceElement(2, degree)
                element_map = isofem.CurvedElementMap(mesh, self.disk, reference)
                assert np.max(element_map.rho_derivative_bound()) < 1
                _, determinant = element_map.bulk_jacobian(rule.points)
                affine_determinant = np.linalg.det(element_map.B)
                ratio = determinant / affine_determinant[:, None]
                assert np.all(ratio > 0.5)
                assert np.all(ratio < 2)

    def test_isoparametric_convergence(self):
        coarse = isofem.generate_linear_mesh(self.disk, 0.3)
        fine = isofem.refine(coarse, self.disk)
        samples = isofem.ReferenceElement(2, 7).nodes
        for degree in (1, 2):
            with self.subTest(degree=degree):
                reference = isofem.ReferenceElement(2, degree)
                errors = []
                for mesh in (coarse, fine):
                    element_map = isofem.CurvedElementMap(mesh, self.disk, reference)
                    difference = element_map.isoparametric_map(
                        samples
                    ) - element_map.exact_map(samples)
                    errors.append(np.max(np.linalg.norm(difference, axis=-1)))
                ratio = errors[0] / errors[1]
                assert 2 ** (degree + 0.5) <= ratio <= 2 ** (degree + 1.5)

    def test_boundary_proximity(self):
        mesh = isofem.generate_linear_mesh(self.disk, 0.3)
        reference = isofem.ReferenceElement(2, 1)
        face_xhat = isofem.make_quadrature(1, 4).points
        constants = []
        for _ in range(3):
            distances = []
            for cell, face in mesh.boundary_faces:
                element_map = isofem.CurvedElementMap(
                    mesh, self.disk, reference, cells=[cell]
                )
                points = element_map.isoparametric_map(
                    reference.face_points(face, face_xhat)
                )
                distances.append(np.max(np.abs(self.disk.signed_distance(points))))
            constants.append(max(distances) / mesh.h**2)
            mesh = isofem.refine(mesh, self.disk)
        assert max(constants) / min(constants) < 1.5
