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

__all__ = ["QuadratureRule", "make_quadrature", "MAX_QUADRATURE_DEGREE"]

import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

# Highest exactness degree make_quadrature supports.
MAX_QUADRATURE_DEGREE = 40

# Symmetric 4-point rule of degree 2 on the reference tetrahedron.
_TET_DEGREE2_A = (5 - math.sqrt(5)) / 20
_TET_DEGREE2_B = (5 + 3 * math.sqrt(5)) / 20


class QuadratureRule:
    """Quadrature rule on the reference simplex of a given dimension.

    The reference simplex is the convex hull of the origin and the unit
    vectors, so its measure is 1 / dimension!.

    Parameters
    ----------
    points : `numpy.ndarray`
        Reference coordinates, shape (num_points, dimension).
    weights : `numpy.ndarray`
        Positive weights, shape (num_points,).
    degree : `int`
        Exactness degree: all polynomials of total degree <= ``degree``
        are integrated exactly.
    """

    def __init__(self, points, weights, degree):
        self.points = np.ascontiguousarray(points, dtype=float)
        self.weights = np.ascontiguousarray(weights, dtype=float)
        self.degree = degree
        if self.points.ndim != 2 or len(self.points) != len(self.weights):
            raise ValueError(
                f"points shape {self.points.shape} does not match "
                f"weights shape {self.weights.shape}"
            )

    @property
    def dimension(self):
        return self.points.shape[1]

    @property
    def num_points(self):
        return len(self.weights)

    def __repr__(self):
        return (
            f"QuadratureRule(dimension={self.dimension}, degree={self.degree}, "
            f"num_points={self.num_points})"
        )


def _gauss_legendre(num_points):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = leggauss(num_points)
    return (x + 1) / 2, w / 2


def _gauss_jacobi(num_points, alpha):
    """Gauss-Jacobi nodes and weights on [0, 1] for the weight (1-u)^alpha."""
    x, w = roots_jacobi(num_points, alpha, 0)
    return (x + 1) / 2, w / 2 ** (alpha + 1)


def _collapsed_triangle(degree):
    num_points = degree // 2 + 1
    u, wu = _gauss_jacobi(num_points, 1)
    v, wv = _gauss_legendre(num_points)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    points = np.stack([uu.ravel(), ((1 - uu) * vv).ravel()], axis=-1)
    weights = np.outer(wu, wv).ravel()
    return points, weights


def _collapsed_tetrahedron(degree):
    num_points = degree // 2 + 1
    u, wu = _gauss_jacobi(num_points, 2)
    v, wv = _gauss_jacobi(num_points, 1)
    w, ww = _gauss_legendre(num_points)
    uu, vv, ww_ = np.meshgrid(u, v, w, indexing="ij")
    points = np.stack(
        [
            uu.ravel(),
            ((1 - uu) * vv).ravel(),
            ((1 - uu) * (1 - vv) * ww_).ravel(),
        ],
        axis=-1,
    )
    weights = np.einsum("i,j,k->ijk", wu, wv, ww).ravel()
    return points, weights


def make_quadrature(dimension, degree):
    """Make a quadrature rule on the reference simplex.

    Low degrees use the classic symmetric rules (centroid, 3-point
    triangle, 4-point tetrahedron); higher degrees use collapsed
    Gauss-Jacobi product rules, which have positive weights
    and arbitrary exactness.

    Parameters
    ----------
    dimension : `int`
        1 (unit interval), 2 (triangle) or 3 (tetrahedron).
    degree : `int`
        Required exactness degree, 0 <= degree <= `MAX_QUADRATURE_DEGREE`.

    Returns
    -------
    rule : `QuadratureRule`
        The quadrature rule.

    Raises
    ------
    ValueError
        If ``dimension`` or ``degree`` is not supported.
    """
    if not 0 <= degree <= MAX_QUADRATURE_DEGREE:
        raise ValueError(
            f"degree={degree} not supported; must be in [0, {MAX_QUADRATURE_DEGREE}]"
        )
    if dimension == 1:
        x, w = _gauss_legendre(degree // 2 + 1)
        return QuadratureRule(points=x[:, None], weights=w, degree=degree)
    elif dimension == 2:
        if degree <= 1:
            return QuadratureRule(
                points=[[1 / 3, 1 / 3]], weights=[1 / 2], degree=degree
            )
        elif degree == 2:
            return QuadratureRule(
                points=[[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]],
                weights=[1 / 6, 1 / 6, 1 / 6],
                degree=degree,
            )
        points, weights = _collapsed_triangle(degree)
        return QuadratureRule(points=points, weights=weights, degree=degree)
    elif dimension == 3:
        if degree <= 1:
            return QuadratureRule(
                points=[[1 / 4, 1 / 4, 1 / 4]], weights=[1 / 6], degree=degree
            )
        elif degree == 2:
            a, b = _TET_DEGREE2_A, _TET_DEGREE2_B
            return QuadratureRule(
                points=[[a, a, a], [b, a, a], [a, b, a], [a, a, b]],
                weights=[1 / 24] * 4,
                degree=degree,
            )
        points, weights = _collapsed_tetrahedron(degree)
        return QuadratureRule(points=points, weights=weights, degree=degree)
    raise ValueError(f"dimension={dimension} not supported; must be 1, 2 or 3")
