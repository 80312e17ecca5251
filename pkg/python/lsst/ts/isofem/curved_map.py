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

__all__ = ["CurvedElementMap", "affine_map", "lambda_star"]

import copy

import numpy as np

from .errors import GeometryError, JacobianError
from .reference_element import ReferenceElement, barycentric_coordinates


def affine_map(mesh, cells=None):
    """Affine maps Φ_T(x̂) = B_T x̂ + b_T of mesh cells.

    Parameters
    ----------
    mesh : `Mesh`
        The mesh.
    cells : `int` | `numpy.ndarray`, optional
        Cell index or indices; all cells if None.

    Returns
    -------
    B : `numpy.ndarray`
        Shape (num_cells, n, n), or (n, n) for a single cell index;
        column m is x_m - x_0.
    b : `numpy.ndarray`
        Shape (num_cells, n), or (n,); the first cell vertex.

    Raises
    ------
    JacobianError
        If any B_T is singular or negatively oriented.
    """
    single = np.ndim(cells) == 0 and cells is not None
    cell_indices = np.arange(mesh.num_cells) if cells is None else np.atleast_1d(cells)
    corners = mesh.vertices[mesh.cells[cell_indices]]
    b = corners[:, 0, :]
    B = np.swapaxes(corners[:, 1:, :] - b[:, None, :], 1, 2)
    determinants = np.linalg.det(B)
    if np.any(determinants <= 0):
        bad = int(np.argmin(determinants))
        raise JacobianError(
            int(cell_indices[bad]), f"det B_T={determinants[bad]:0.4g} is not positive"
        )
    if single:
        return B[0], b[0]
    return B, b


def lambda_star(xhat, boundary_mask):
    """Sum λ* of the barycentric coordinates of the boundary vertices.

    Parameters
    ----------
    xhat : `numpy.ndarray`
        Reference point(s), shape (num_points, n) or (n,).
    boundary_mask : `numpy.ndarray`
        Which local vertices lie on Γ; shape (n+1,) for one cell
        or (num_cells, n+1).

    Returns
    -------
    values : `numpy.ndarray`
        Shape (num_points,) or (num_cells, num_points) following
        ``boundary_mask``; a scalar for a single point and cell.
    """
    lambdas = barycentric_coordinates(xhat)
    mask = np.asarray(boundary_mask, dtype=float)
    return np.einsum("...j,cj->c...", lambdas, np.atleast_2d(mask)).reshape(
        mask.shape[:-1] + lambdas.shape[:-1]
    )


class CurvedElementMap:
    """Curved element maps of a batch of mesh cells.

    For each cell T the exact map is Φ_T^c = Φ_T + ρ_T, where

        ρ_T(x̂) = λ*(x̂)^(k+2) (p(y(x̂)) - y(x̂))

    for λ* > 0 and zero otherwise; y is the projection of Φ_T(x̂) onto
    the boundary face τ_T along the barycentric coordinates of the
    interior vertices. The isoparametric map Φ_T^(k) is the degree-k
    Lagrange interpolant of Φ_T^c.

    Cells with fewer than two vertices on Γ are left straight.

    All evaluation methods take reference points of shape (num_points, n)
    shared by every cell and return arrays with leading shape
    (num_cells, num_points).

    Parameters
    ----------
    mesh : `Mesh`
        The linear mesh.
    domain : `Domain` | None
        The domain, supplying p. If None every cell is left straight.
    reference : `ReferenceElement`
        Reference element of degree k.
    cells : `numpy.ndarray`, optional
        Indices of the cells to map; all cells if None.

    Attributes
    ----------
    cell_indices : `numpy.ndarray`
        Mesh cell index of each mapped cell.
    B : `numpy.ndarray`
        Shape (num_cells, n, n).
    b : `numpy.ndarray`
        Shape (num_cells, n).
    corners : `numpy.ndarray`
        Cell vertex coordinates, shape (num_cells, n+1, n).
    num_boundary_nodes : `numpy.ndarray`
        Number l of vertices on Γ for each cell.
    boundary_mask : `numpy.ndarray`
        Shape (num_cells, n+1); which local vertices take part in
        the boundary correction. All False for straight cells.
    control_points : `numpy.ndarray`
        Φ_T^c at the Lagrange nodes, shape (num_cells, n_k, n).
    """

    def __init__(self, mesh, domain, reference, cells=None):
        if reference.dimension != mesh.dimension:
            raise ValueError(
                f"reference dimension {reference.dimension} != "
                f"mesh dimension {mesh.dimension}"
            )
        self.domain = domain
        self.reference = reference
        self.degree = reference.degree
        self.dimension = mesh.dimension
        self.cell_indices = (
            np.arange(mesh.num_cells) if cells is None else np.asarray(cells)
        )
        cell_vertices = mesh.cells[self.cell_indices]
        self.corners = mesh.vertices[cell_vertices]
        self.B, self.b = affine_map(mesh, self.cell_indices)
        mask = mesh.boundary_vertex_mask[cell_vertices]
        self.num_boundary_nodes = np.count_nonzero(mask, axis=1)
        mask[self.num_boundary_nodes < 2] = False
        if domain is None:
            mask[:] = False
        self.boundary_mask = mask
        self.control_points = self.exact_map(reference.nodes)

    @property
    def num_cells(self):
        return len(self.cell_indices)

    @property
    def is_curved(self):
        """True for each cell with a boundary correction."""
        return np.any(self.boundary_mask, axis=1)

    def take(self, indices):
        """Return a map restricted to a subset of its cells.

        Parameters
        ----------
        indices : `numpy.ndarray` | `slice`
            Positions (not mesh cell indices) of the cells to keep.
        """
        subset = copy.copy(self)
        for name in (
            "cell_indices",
            "corners",
            "B",
            "b",
            "num_boundary_nodes",
            "boundary_mask",
            "control_points",
        ):
            setattr(subset, name, getattr(self, name)[indices])
        return subset

    def lambda_star(self, xhat):
        """λ*(x̂) for every cell, shape (num_cells, num_points)."""
        return lambda_star(np.atleast_2d(xhat), self.boundary_mask)

    def affine(self, xhat):
        """Φ_T(x̂), shape (num_cells, num_points, n)."""
        return self.b[:, None, :] + np.einsum(
            "cdm,qm->cqd", self.B, np.atleast_2d(xhat)
        )

    def _projection(self, xhat):
        """λ*, y and a mask of points with λ* > 0.

        y is only meaningful where the mask is set.
        """
        lambdas = barycentric_coordinates(np.atleast_2d(xhat))
        weights = lambdas[None, :, :] * self.boundary_mask[:, None, :]
        lstar = weights.sum(axis=-1)
        active = lstar > 0
        safe = np.where(active, lstar, 1.0)
        y = np.einsum("cqj,cjd->cqd", weights, self.corners) / safe[..., None]
        return lstar, y, active

    def face_projection_y(self, xhat):
        """Projection y(x̂) of Φ_T(x̂) onto the boundary face τ_T.

        Returns
        -------
        y : `numpy.ndarray`
            Shape (num_cells, num_points, n).

        Raises
        ------
        GeometryError
            If λ*(x̂) = 0 for any cell and point, including every point of
            a straight cell.
        """
        _, y, active = self._projection(xhat)
        if not np.all(active):
            raise GeometryError("y(x̂) is undefined where λ*(x̂) = 0")
        return y

    def rho(self, xhat):
        """Boundary correction ρ_T(x̂), shape (num_cells, num_points, n)."""
        lstar, y, active = self._projection(xhat)
        result = np.zeros_like(y)
        if np.any(active):
            y_active = y[active]
            gap = self.domain.closest_point(y_active) - y_active
            result[active] = lstar[active][:, None] ** (self.degree + 2) * gap
        return result

    def rho_jacobian(self, xhat):
        """Derivative Dρ_T(x̂) with respect to x̂,
        shape (num_cells, num_points, n, n).
        """
        n = self.dimension
        k = self.degree
        lstar, y, active = self._projection(xhat)
        result = np.zeros(y.shape + (n,))
        if not np.any(active):
            return result
        # ∇λ_0 = -1, ∇λ_m = e_m
        lambda_gradients = np.vstack([-np.ones(n), np.eye(n)])
        masked_gradients = self.boundary_mask[:, :, None] * lambda_gradients
        lstar_gradient = masked_gradients.sum(axis=1)

        cell_of_point = np.broadcast_to(
            np.arange(self.num_cells)[:, None], active.shape
        )[active]
        lstar_active = lstar[active]
        y_active = y[active]
        projected = self.domain.closest_point(y_active)
        # Dy = Σ_{j on Γ} (x_j - y) ⊗ ∇λ_j / λ*
        offsets = self.corners[cell_of_point] - y_active[:, None, :]
        dy = (
            np.einsum("pjd,pjm->pdm", offsets, masked_gradients[cell_of_point])
            / lstar_active[:, None, None]
        )
        dp = self.domain.closest_point_jacobian(y_active)
        result[active] = (k + 2) * lstar_active[:, None, None] ** (k + 1) * (
            (projected - y_active)[:, :, None]
            * lstar_gradient[cell_of_point][:, None, :]
        ) + lstar_active[:, None, None] ** (k + 2) * ((dp - np.eye(n)) @ dy)
        return result

    def exact_map(self, xhat):
        """Φ_T^c(x̂) = Φ_T(x̂) + ρ_T(x̂), shape (num_cells, num_points, n)."""
        return self.affine(xhat) + self.rho(xhat)

    def exact_jacobian(self, xhat):
        """DΦ_T^c(x̂), shape (num_cells, num_points, n, n)."""
        return self.B[:, None, :, :] + self.rho_jacobian(xhat)

    def isoparametric_map(self, xhat):
        """Φ_T^(k)(x̂), shape (num_cells, num_points, n)."""
        values = self.reference.basis(np.atleast_2d(xhat))
        return np.einsum("qj,cjd->cqd", values, self.control_points)

    def isoparametric_jacobian(self, xhat):
        """DΦ_T^(k)(x̂), shape (num_cells, num_points, n, n)."""
        gradients = self.reference.basis_gradients(np.atleast_2d(xhat))
        return np.einsum("cjd,qjm->cqdm", self.control_points, gradients)

    def bulk_jacobian(self, xhat):
        """DΦ_T^(k) and its determinant at bulk points.

        Returns
        -------
        jacobian : `numpy.ndarray`
            Shape (num_cells, num_points, n, n).
        determinant : `numpy.ndarray`
            Shape (num_cells, num_points).

        Raises
        ------
        JacobianError
            If any determinant is not positive.
        """
        jacobian = self.isoparametric_jacobian(xhat)
        determinant = np.linalg.det(jacobian)
        if np.any(determinant <= 0):
            cell, point = np.unravel_index(np.argmin(determinant), determinant.shape)
            raise JacobianError(
                int(self.cell_indices[cell]),
                f"det DΦ={determinant[cell, point]:0.4g} at reference point "
                f"{np.atleast_2d(xhat)[point]}",
            )
        return jacobian, determinant

    def face_jacobian(self, face_xhat, local_face):
        """Tangent matrix, surface measure and outward normal on a face.

        Every mapped cell is evaluated on the same local face.

        Parameters
        ----------
        face_xhat : `numpy.ndarray`
            Points of the reference (n-1)-simplex, shape (num_points, n-1).
        local_face : `int`
            Local face index (the face opposite that local vertex).

        Returns
        -------
        tangent : `numpy.ndarray`
            G = DΦ_T^(k) E_f, shape (num_cells, num_points, n, n-1).
        measure : `numpy.ndarray`
            sqrt(det GᵀG), shape (num_cells, num_points).
        normal : `numpy.ndarray`
            Unit normal pointing away from the cell,
            shape (num_cells, num_points, n).

        Raises
        ------
        JacobianError
            If the face is degenerate at any point.
        """
        xhat = self.reference.face_points(local_face, face_xhat)
        tangent = (
            self.isoparametric_jacobian(xhat)
            @ self.reference.face_edge_matrix(local_face)
        )
        metric = np.swapaxes(tangent, -1, -2) @ tangent
        measure = np.sqrt(np.clip(np.linalg.det(metric), 0, None))
        if np.any(measure <= 0):
            cell, _ = np.unravel_index(np.argmin(measure), measure.shape)
            raise JacobianError(
                int(self.cell_indices[cell]), f"face {local_face} is degenerate"
            )
        if self.dimension == 2:
            edge = tangent[..., 0]
            normal = np.stack([edge[..., 1], -edge[..., 0]], axis=-1)
        else:
            normal = np.cross(tangent[..., 0], tangent[..., 1])
        normal /= np.linalg.norm(normal, axis=-1, keepdims=True)
        # The node of the opposite vertex is inside the cell.
        inward = (
            self.control_points[:, local_face, None, :] - self.isoparametric_map(xhat)
        )
        flip = np.sum(normal * inward, axis=-1) > 0
        normal[flip] *= -1
        return tangent, measure, normal

    def rho_derivative_bound(self, sample_degree=8):
        """Sampled bound C_T = sup |Dρ_T(x̂) B_T⁻¹| for each cell.

        Parameters
        ----------
        sample_degree : `int`, optional
            Degree of the barycentric lattice used as sample points.

        Returns
        -------
        bound : `numpy.ndarray`
            Spectral-norm bound for each cell, shape (num_cells,).
        """
        samples = ReferenceElement(self.dimension, sample_degree).nodes
        scaled = self.rho_jacobian(samples) @ np.linalg.inv(self.B)[:, None, :, :]
        return np.linalg.norm(scaled, ord=2, axis=(-2, -1)).max(axis=1)

    def __repr__(self):
        return (
            f"CurvedElementMap(num_cells={self.num_cells}, degree={self.degree}, "
            f"num_curved={int(np.count_nonzero(self.is_curved))})"
        )
