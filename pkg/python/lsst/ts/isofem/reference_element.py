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

__all__ = [
    "ReferenceElement",
    "barycentric_coordinates",
    "lattice_multi_indices",
    "num_lattice_nodes",
]

import itertools
import math

import numpy as np


def num_lattice_nodes(dimension, degree):
    """Number n_k of Lagrange nodes of the given degree on a simplex."""
    return math.comb(dimension + degree, degree)


def lattice_multi_indices(dimension, degree):
    """Multi-indices α with |α| = degree over the n+1 barycentric
    coordinates, vertices first.

    Parameters
    ----------
    dimension : `int`
        Simplex dimension n.
    degree : `int`
        Lattice degree k >= 1.

    Returns
    -------
    multi_indices : `numpy.ndarray`
        Integer array of shape (n_k, n+1). Row i < n+1 is ``degree``
        times the i-th unit vector, i.e. the node at local vertex i.
    """
    if degree < 1:
        raise ValueError(f"degree={degree} must be >= 1")
    vertices = [
        tuple(degree if j == i else 0 for j in range(dimension + 1))
        for i in range(dimension + 1)
    ]
    others = [
        alpha
        for alpha in itertools.product(range(degree + 1), repeat=dimension + 1)
        if sum(alpha) == degree and alpha not in vertices
    ]
    others.sort(reverse=True)
    return np.array(vertices + others, dtype=int)


def barycentric_coordinates(xhat):
    """Barycentric coordinates of reference point(s).

    The reference simplex has vertex 0 at the origin and vertex m
    at the m-th unit vector, so λ_0 = 1 - Σ x̂ and λ_m = x̂_m.

    Parameters
    ----------
    xhat : `numpy.ndarray`
        Reference point(s), shape (..., n).

    Returns
    -------
    lambdas : `numpy.ndarray`
        Shape (..., n+1).
    """
    xhat = np.asarray(xhat, dtype=float)
    lambda0 = 1.0 - np.sum(xhat, axis=-1, keepdims=True)
    return np.concatenate([lambda0, xhat], axis=-1)


class ReferenceElement:
    """Lagrange element of degree k on the reference n-simplex.

    Nodes form the equispaced barycentric lattice; the basis is evaluated
    with the product formula over barycentric coordinates, which makes
    the Lagrange property exact at lattice points.

    Parameters
    ----------
    dimension : `int`
        Simplex dimension n (2 or 3; 1 is allowed for boundary edges).
    degree : `int`
        Polynomial degree k >= 1.

    Attributes
    ----------
    multi_indices : `numpy.ndarray`
        Shape (n_k, n+1); see `lattice_multi_indices`.
    nodes : `numpy.ndarray`
        Reference coordinates of the Lagrange nodes, shape (n_k, n).
    vertices : `numpy.ndarray`
        Reference vertices, shape (n+1, n).
    face_node_indices : `list` [`numpy.ndarray`]
        For each local face f (the face opposite local vertex f),
        the indices of the nodes lying on it.
    """

    def __init__(self, dimension, degree):
        if dimension not in (1, 2, 3):
            raise ValueError(f"dimension={dimension} must be 1, 2 or 3")
        self.dimension = dimension
        self.degree = degree
        self.multi_indices = lattice_multi_indices(dimension, degree)
        self.nodes = self.multi_indices[:, 1:] / degree
        self.vertices = np.vstack([np.zeros(dimension), np.eye(dimension)])
        self.face_node_indices = [
            np.flatnonzero(self.multi_indices[:, face] == 0)
            for face in range(dimension + 1)
        ]

    @property
    def num_nodes(self):
        return len(self.nodes)

    def face_vertices(self, face):
        """Local vertex indices of a local face, in increasing order."""
        return [i for i in range(self.dimension + 1) if i != face]

    def face_edge_matrix(self, face):
        """Matrix E_f of shape (n, n-1) whose columns are the edge vectors
        of the reference face f, starting at its first vertex.
        """
        vertex_indices = self.face_vertices(face)
        origin = self.vertices[vertex_indices[0]]
        return np.stack(
            [self.vertices[i] - origin for i in vertex_indices[1:]], axis=-1
        )

    def face_points(self, face, face_xhat):
        """Map points of the reference (n-1)-simplex onto local face f.

        Parameters
        ----------
        face : `int`
            Local face index.
        face_xhat : `numpy.ndarray`
            Points on the reference face simplex, shape (num_points, n-1).

        Returns
        -------
        xhat : `numpy.ndarray`
            Points on the reference element, shape (num_points, n).
        """
        origin = self.vertices[self.face_vertices(face)[0]]
        return origin + np.asarray(face_xhat, dtype=float) @ self.face_edge_matrix(
            face
        ).T

    def _barycentric_factors(self, xhat):
        """Per-coordinate factors of the product formula and their
        derivatives, each of shape (num_points, n_k, n+1).
        """
        lambdas = barycentric_coordinates(np.atleast_2d(xhat))
        k = self.degree
        shape = (len(lambdas), self.num_nodes, self.dimension + 1)
        factors = np.ones(shape)
        derivatives = np.zeros(shape)
        for j in range(k):
            active = self.multi_indices > j
            term = ((k * lambdas - j) / (j + 1))[:, None, :]
            new_derivatives = derivatives * term + factors * (k / (j + 1))
            derivatives = np.where(active, new_derivatives, derivatives)
            factors = np.where(active, factors * term, factors)
        return factors, derivatives

    def basis(self, xhat):
        """Values of all basis functions.

        Parameters
        ----------
        xhat : `numpy.ndarray`
            Reference points, shape (num_points, n).

        Returns
        -------
        values : `numpy.ndarray`
            Shape (num_points, n_k).
        """
        factors, _ = self._barycentric_factors(xhat)
        return np.prod(factors, axis=-1)

    def basis_gradients(self, xhat):
        """Reference gradients of all basis functions.

        Parameters
        ----------
        xhat : `numpy.ndarray`
            Reference points, shape (num_points, n).

        Returns
        -------
        gradients : `numpy.ndarray`
            Shape (num_points, n_k, n).
        """
        factors, derivatives = self._barycentric_factors(xhat)
        num_coords = self.dimension + 1
        # Derivatives with respect to each barycentric coordinate.
        by_lambda = np.empty_like(factors)
        for i in range(num_coords):
            others = [m for m in range(num_coords) if m != i]
            by_lambda[..., i] = derivatives[..., i] * np.prod(
                factors[..., others], axis=-1
            )
        # Chain rule: λ_0 = 1 - Σ x̂, λ_m = x̂_m.
        return by_lambda[..., 1:] - by_lambda[..., :1]

    def __repr__(self):
        return f"ReferenceElement(dimension={self.dimension}, degree={self.degree})"
