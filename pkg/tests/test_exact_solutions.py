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

rng = np.random.default_rng(seed=2718)


def sphere_points(dimension, num_points):
    points = rng.normal(size=(num_points, dimension))
    return points / np.linalg.norm(points, axis=1, keepdims=True)


class ExactSolutionsTestCase(unittest.TestCase):
    def setUp(self):
        self.domains = {
            2: isofem.make_domain("unit-disk"),
            3: isofem.make_domain("unit-ball"),
        }

    def test_derivatives(self):
        for dimension in (2, 3):
            for name in isofem.SOLUTION_NAMES:
                if name in ("grp2d", "grp3d") and name != f"grp{dimension}d":
                    continue
                with self.subTest(name=name, dimension=dimension):
                    exact = isofem.get_exact_solution(name, dimension)
                    assert exact.dimension == dimension
                    exact.check_derivatives(rng)

    def test_check_derivatives_detects_errors(self):
        good = isofem.get_exact_solution("quadratic", 2)
        bad = isofem.ExactSolution(
            name="bad",
            dimension=2,
            value=good._value,
            gradient=lambda p: 2 * good._gradient(p),
            hessian=good._hessian,
        )
        with pytest.raises(ValueError):
            bad.check_derivatives(rng)

    def test_grp_alias(self):
        assert isofem.get_exact_solution("grp", 2).name == "grp2d"
        assert isofem.get_exact_solution("grp", 3).name == "grp3d"

    def test_invalid_names(self):
        for name, dimension in (
            ("grp3d", 2),
            ("grp2d", 3),
            ("no_such", 2),
            ("linear", 4),
        ):
            with self.subTest(name=name, dimension=dimension):
                with pytest.raises(ValueError):
                    isofem.get_exact_solution(name, dimension)

    def test_shapes(self):
        exact = isofem.get_exact_solution("grp", 3)
        points = rng.uniform(-0.5, 0.5, size=(4, 5, 3))
        assert exact.value(points).shape == (4, 5)
        assert exact.gradient(points).shape == (4, 5, 3)
        assert exact.hessian(points).shape == (4, 5, 3, 3)
        with pytest.raises(ValueError):
            exact.value(np.zeros((2, 2)))

    def test_grp2d_data(self):
        exact = isofem.get_exact_solution("grp", 2)
        f, g = isofem.manufactured_rhs(exact, 1, 1, 1, self.domains[2])

        assert f(np.array([[0.5, 0.5]]))[0] == pytest.approx(-3.9375)
        x = rng.uniform(-1, 1, size=(20, 2))
        xy = x[:, 0] * x[:, 1]
        s = np.sum(x**2, axis=1)
        np.testing.assert_allclose(f(x), -32 * xy * s + xy * s**2, atol=1e-12)

        boundary = sphere_points(2, 20)
        np.testing.assert_allclose(
            g(boundary), 11 * boundary[:, 0] * boundary[:, 1], atol=1e-12
        )
        # g projects its points onto Γ first.
        np.testing.assert_allclose(g(0.9 * boundary), g(boundary), atol=1e-12)

    def test_grp3d_data(self):
        exact = isofem.get_exact_solution("grp", 3)
        f, g = isofem.manufactured_rhs(exact, 1, 1, 1, self.domains[3])

        x = rng.uniform(-1, 1, size=(20, 3))
        u = exact.value(x)
        expected_f = -4 + 2 * x[:, 0] ** 2 + 2 * x[:, 2] ** 2 + u
        np.testing.assert_allclose(f(x), expected_f, atol=1e-12)

        s = sphere_points(3, 20)
        sx, sy, sz = s.T
        expected_g = 11 * sx**2 + 9 * sy**2 + 2 * sz**2 - 25 * sx**2 * sz**2 - 4
        np.testing.assert_allclose(g(s), expected_g, atol=1e-12)
        assert g(np.array([[1.0, 0, 0]]))[0] == pytest.approx(7)
        assert g(np.array([[0, 0, 1.0]]))[0] == pytest.approx(-2)

    def test_constant_data(self):
        for dimension, domain in self.domains.items():
            exact = isofem.get_exact_solution("constant", dimension)
            f, g = isofem.manufactured_rhs(exact, 2.5, 0.5, 3, domain)
            x = rng.uniform(-0.5, 0.5, size=(10, dimension))
            np.testing.assert_allclose(f(x), 3)
            np.testing.assert_allclose(g(sphere_points(dimension, 10)), 2.5)

    def test_linear_data(self):
        alpha, beta = 2.0, 0.5
        for dimension, domain in self.domains.items():
            exact = isofem.get_exact_solution("linear", dimension)
            f, g = isofem.manufactured_rhs(exact, alpha, beta, 0, domain)
            x = rng.uniform(-0.5, 0.5, size=(10, dimension))
            np.testing.assert_allclose(f(x), 0, atol=1e-14)
            s = sphere_points(dimension, 10)
            radial = exact.value(s) - 0.5
            expected = (
                radial + alpha * exact.value(s) + beta * (dimension - 1) * radial
            )
            np.testing.assert_allclose(g(s), expected, atol=1e-12)

    def test_dimension_mismatch(self):
        exact = isofem.get_exact_solution("grp", 2)
        with pytest.raises(ValueError):
            isofem.manufactured_rhs(exact, 1, 1, 1, self.domains[3])
