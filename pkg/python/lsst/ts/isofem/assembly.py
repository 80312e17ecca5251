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
    "SystemMatrices",
    "assemble_bulk_mass",
    "assemble_bulk_stiffness",
    "assemble_surface_mass",
    "assemble_surface_stiffness",
    "assemble_matrices",
    "check_parameters",
    "export_matrix",
    "is_symmetric",
    "load_vector",
    "system_matrix",
    "trace_matrix",
]

import numpy as np
import scipy.io
from scipy import sparse

from .fe_space import FeFunction
from .quadrature import make_quadrature

# Number of cells whose Jacobians are evaluated at once.
CHUNK_SIZE = 2048


def _quadrature_degree(space):
    return 2 * space.degree + 2


def _chunks(num_cells):
    for start in range(0, num_cells, CHUNK_SIZE):
        yield slice(start, min(start + CHUNK_SIZE, num_cells))


def _bulk_element_matrices(space, kernel):
    """Evaluate ``kernel(element_map, rule)`` chunk by chunk and
    collect the (num_cells, n_k, n_k) element matrices.
    """
    rule = make_quadrature(space.dimension, _quadrature_degree(space))
    num_nodes = space.reference.num_nodes
    local = np.empty((space.mesh.num_cells, num_nodes, num_nodes))
    for chunk in _chunks(space.mesh.num_cells):
        local[chunk] = kernel(space.element_map.take(chunk), rule)
    return local


def assemble_bulk_mass(space):
    """Bulk mass matrix M_Ω, (M_Ω)_jk = ∫_{Ω_h} φ_j φ_k.

    Parameters
    ----------
    space : `FeSpace`
        The finite element space.

    Returns
    -------
    mass : `scipy.sparse.csr_matrix`
        N x N symmetric matrix.
    """
    values = space.reference.basis(
        make_quadrature(space.dimension, _quadrature_degree(space)).points
    )

    def kernel(element_map, rule):
        _, determinant = element_map.bulk_jacobian(rule.points)
        weights = determinant * rule.weights
        return np.einsum("cq,qi,qj->cij", weights, values, values)

    return space.bulk_pattern.assemble(_bulk_element_matrices(space, kernel))


def assemble_bulk_stiffness(space):
    """Bulk stiffness matrix A_Ω, (A_Ω)_jk = ∫_{Ω_h} ∇φ_j · ∇φ_k.

    Physical gradients are J⁻ᵀ ∇̂φ with J = DΦ_T^(k).
    """
    reference_gradients = space.reference.basis_gradients(
        make_quadrature(space.dimension, _quadrature_degree(space)).points
    )

    def kernel(element_map, rule):
        jacobian, determinant = element_map.bulk_jacobian(rule.points)
        inverse = np.linalg.inv(jacobian)
        gradients = np.einsum("cqmd,qim->cqid", inverse, reference_gradients)
        weights = determinant * rule.weights
        return np.einsum("cq,cqid,cqjd->cij", weights, gradients, gradients)

    return space.bulk_pattern.assemble(_bulk_element_matrices(space, kernel))


def _surface_element_matrices(space, kernel):
    """Evaluate ``kernel(element_map, rule, xhat, face_nodes, local_face)``
    for the boundary faces grouped by local face index.
    """
    rule = make_quadrature(space.dimension - 1, _quadrature_degree(space))
    faces = space.boundary_faces
    num_face_nodes = space.face_dofs.shape[1]
    local = np.empty((len(faces), num_face_nodes, num_face_nodes))
    for local_face in range(space.dimension + 1):
        rows = np.flatnonzero(faces[:, 1] == local_face)
        if len(rows) == 0:
            continue
        xhat = space.reference.face_points(local_face, rule.points)
        face_nodes = space.reference.face_node_indices[local_face]
        for chunk in _chunks(len(rows)):
            chunk_rows = rows[chunk]
            element_map = space.element_map.take(faces[chunk_rows, 0])
            local[chunk_rows] = kernel(
                element_map, rule, xhat, face_nodes, local_face
            )
    return local


def assemble_surface_mass(space):
    """Surface mass matrix M_Γ, (M_Γ)_jk = ∫_{Γ_h} φ_j φ_k.

    Returns
    -------
    mass : `scipy.sparse.csr_matrix`
        N_Γ x N_Γ symmetric matrix over the boundary nodes.
    """

    def kernel(element_map, rule, xhat, face_nodes, local_face):
        values = space.reference.basis(xhat)[:, face_nodes]
        _, measure, _ = element_map.face_jacobian(rule.points, local_face)
        weights = measure * rule.weights
        return np.einsum("cq,qi,qj->cij", weights, values, values)

    return space.face_pattern.assemble(_surface_element_matrices(space, kernel))


def assemble_surface_stiffness(space):
    """Surface stiffness matrix A_Γ,
    (A_Γ)_jk = ∫_{Γ_h} ∇_{Γ_h} φ_j · ∇_{Γ_h} φ_k.

    With G the face tangent matrix and t = E_fᵀ ∇̂φ the derivatives along
    the face parameters, ∇_{Γ_h} φ = G (GᵀG)⁻¹ t, so the integrand is
    t_jᵀ (GᵀG)⁻¹ t_k.
    """

    def kernel(element_map, rule, xhat, face_nodes, local_face):
        edge_matrix = space.reference.face_edge_matrix(local_face)
        gradients = space.reference.basis_gradients(xhat)[:, face_nodes, :]
        tangential = gradients @ edge_matrix
        tangent, measure, _ = element_map.face_jacobian(rule.points, local_face)
        inverse_metric = np.linalg.inv(np.swapaxes(tangent, -1, -2) @ tangent)
        weights = measure * rule.weights
        return np.einsum(
            "cq,qia,cqab,qjb->cij", weights, tangential, inverse_metric, tangential
        )

    return space.face_pattern.assemble(_surface_element_matrices(space, kernel))


def trace_matrix(space):
    """Trace selection γ = (I_{N_Γ}, 0) as an N_Γ x N sparse matrix."""
    size = space.num_boundary_dofs
    return sparse.csr_matrix(
        (np.ones(size), np.arange(size), np.arange(size + 1)),
        shape=(size, space.num_dofs),
    )


class SystemMatrices:
    """The four assembled matrices of a space and its trace operator.

    Parameters
    ----------
    space : `FeSpace`
        The finite element space.

    Attributes
    ----------
    mass : `scipy.sparse.csr_matrix`
        M_Ω.
    stiffness : `scipy.sparse.csr_matrix`
        A_Ω.
    surface_mass : `scipy.sparse.csr_matrix`
        M_Γ.
    surface_stiffness : `scipy.sparse.csr_matrix`
        A_Γ.
    trace : `scipy.sparse.csr_matrix`
        γ.
    """

    def __init__(self, space):
        self.space = space
        self.mass = assemble_bulk_mass(space)
        self.stiffness = assemble_bulk_stiffness(space)
        self.surface_mass = assemble_surface_mass(space)
        self.surface_stiffness = assemble_surface_stiffness(space)
        self.trace = trace_matrix(space)

    @property
    def volume(self):
        """|Ω_h^(k)|: the sum of the entries of M_Ω."""
        return float(self.mass.sum())

    @property
    def surface_area(self):
        """|Γ_h^(k)|: the sum of the entries of M_Γ."""
        return float(self.surface_mass.sum())


def assemble_matrices(space):
    """Assemble M_Ω, A_Ω, M_Γ, A_Γ and γ for a space."""
    return SystemMatrices(space)


def check_parameters(alpha, beta, kappa):
    """Check that (α, β, κ) gives a positive definite system.

    Raises
    ------
    ValueError
        If any parameter is negative, or α = κ = 0 (the system is then
        singular: constants are in its kernel).
    """
    for name, value in (("alpha", alpha), ("beta", beta), ("kappa", kappa)):
        if not value >= 0:
            raise ValueError(f"{name}={value} must be >= 0")
    if alpha == 0 and kappa == 0:
        raise ValueError(
            f"alpha={alpha}, kappa={kappa}: at least one must be positive "
            "or constants are in the kernel of the system matrix"
        )


def system_matrix(space, alpha, beta, kappa, matrices=None):
    """System matrix K = A_Ω + κ M_Ω + γᵀ (α M_Γ + β A_Γ) γ.

    Parameters
    ----------
    space : `FeSpace`
        The finite element space.
    alpha, beta, kappa : `float`
        Problem parameters; see `check_parameters`.
    matrices : `SystemMatrices`, optional
        Previously assembled matrices of ``space``.

    Returns
    -------
    K : `scipy.sparse.csr_matrix`
        N x N symmetric positive definite matrix.
    """
    check_parameters(alpha, beta, kappa)
    if matrices is None:
        matrices = assemble_matrices(space)
    trace = matrices.trace
    boundary_part = alpha * matrices.surface_mass + beta * matrices.surface_stiffness
    system = (
        matrices.stiffness
        + kappa * matrices.mass
        + trace.T @ boundary_part @ trace
    ).tocsr()
    system.sum_duplicates()
    system.sort_indices()
    return system


def load_vector(space, f_h, g_h, matrices=None):
    """Load vector b = M_Ω f + γᵀ M_Γ g.

    Parameters
    ----------
    space : `FeSpace`
        The finite element space.
    f_h : `FeFunction` | `numpy.ndarray`
        Bulk data: N nodal values.
    g_h : `FeFunction` | `numpy.ndarray`
        Boundary data: a function on ``space`` (its trace is used)
        or N_Γ boundary nodal values.
    matrices : `SystemMatrices`, optional
        Previously assembled matrices of ``space``.

    Raises
    ------
    ValueError
        If ``f_h`` or ``g_h`` has the wrong length.
    """
    bulk = f_h.coefficients if isinstance(f_h, FeFunction) else np.asarray(f_h)
    boundary = (
        g_h.boundary_coefficients
        if isinstance(g_h, FeFunction)
        else np.asarray(g_h, dtype=float)
    )
    if bulk.shape != (space.num_dofs,):
        raise ValueError(f"f_h has shape {bulk.shape}; expected ({space.num_dofs},)")
    if boundary.shape != (space.num_boundary_dofs,):
        raise ValueError(
            f"g_h has shape {boundary.shape}; "
            f"expected ({space.num_boundary_dofs},)"
        )
    if matrices is None:
        matrices = assemble_matrices(space)
    return matrices.mass @ bulk + matrices.trace.T @ (matrices.surface_mass @ boundary)


def is_symmetric(matrix, rtol=1e-12):
    """Is ‖K - Kᵀ‖_max <= rtol ‖K‖_max?"""
    scale = abs(matrix).max()
    if scale == 0:
        return True
    return abs(matrix - matrix.T).max() <= rtol * scale


def export_matrix(matrix, path, comment=""):
    """Write a sparse matrix in Matrix Market coordinate format
    (real, general).
    """
    scipy.io.mmwrite(
        str(path),
        sparse.coo_matrix(matrix),
        comment=comment,
        field="real",
        symmetry="general",
    )
