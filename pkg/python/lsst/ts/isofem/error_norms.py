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
    "ErrorComponents",
    "ErrorReport",
    "LevelRecord",
    "discrete_norms",
    "eoc",
    "error_components",
    "error_norms",
    "interpolate",
    "lift_pair",
    "STUDY_CSV_HEADER",
]

import csv
import math
import pathlib

import numpy as np

from .assembly import CHUNK_SIZE, assemble_matrices
from .fe_space import FeFunction
from .geometry import tangential_gradient
from .quadrature import make_quadrature
from .solver import ah_norm

STUDY_CSV_HEADER = ("level", "h", "N", "errL2", "errH1", "eocL2", "eocH1")


def lift_pair(xhat, element_map):
    """The same reference points on the exact and the discrete element.

    Parameters
    ----------
    xhat : `numpy.ndarray`
        Reference points, shape (num_points, n).
    element_map : `CurvedElementMap`
        Maps of the cells of interest.

    Returns
    -------
    exact_points : `numpy.ndarray`
        Φ_T^c(x̂), shape (num_cells, num_points, n).
    discrete_points : `numpy.ndarray`
        Φ_T^(k)(x̂), shape (num_cells, num_points, n).

    Notes
    -----
    The lift of a discrete function w_h satisfies w_h^l(Φ_T^c(x̂)) = ŵ_h(x̂),
    so u(exact_points) - ŵ_h(x̂) is the error u - w_h^l at exact_points.
    """
    return element_map.exact_map(xhat), element_map.isoparametric_map(xhat)


class ErrorComponents:
    """The four contributions to the L²(Ω;Γ) and H¹(Ω;Γ) norms.

    Parameters
    ----------
    bulk_l2 : `float`
        ‖·‖_{L²(Ω)}.
    bulk_h1_semi : `float`
        ‖∇·‖_{L²(Ω)}.
    surface_l2 : `float`
        ‖γ·‖_{L²(Γ)}.
    surface_h1_semi : `float`
        ‖∇_Γ γ·‖_{L²(Γ)}.
    """

    def __init__(self, bulk_l2, bulk_h1_semi, surface_l2, surface_h1_semi):
        self.bulk_l2 = float(bulk_l2)
        self.bulk_h1_semi = float(bulk_h1_semi)
        self.surface_l2 = float(surface_l2)
        self.surface_h1_semi = float(surface_h1_semi)

    @property
    def l2(self):
        """Combined norm (‖·‖²_{L²(Ω)} + ‖γ·‖²_{L²(Γ)})^(1/2)."""
        return math.hypot(self.bulk_l2, self.surface_l2)

    @property
    def h1(self):
        """Combined norm (‖·‖²_{H¹(Ω)} + ‖γ·‖²_{H¹(Γ)})^(1/2)."""
        return math.sqrt(
            self.bulk_l2**2
            + self.bulk_h1_semi**2
            + self.surface_l2**2
            + self.surface_h1_semi**2
        )

    def as_tuple(self):
        return (self.bulk_l2, self.bulk_h1_semi, self.surface_l2, self.surface_h1_semi)

    def __repr__(self):
        return (
            f"ErrorComponents(bulk_l2={self.bulk_l2:0.6g}, "
            f"bulk_h1_semi={self.bulk_h1_semi:0.6g}, "
            f"surface_l2={self.surface_l2:0.6g}, "
            f"surface_h1_semi={self.surface_h1_semi:0.6g})"
        )


def _error_quadrature_degree(space):
    return 2 * space.degree + 4


def error_components(space, u_h, exact):
    """Error u - u_h^l measured on the exact domain.

    Integrals are pulled back to the reference element through the exact
    maps Φ_T^c, so the lift is never inverted: u is evaluated at Φ_T^c(x̂)
    and u_h through its reference basis expansion at x̂. The gradient of
    the lift is (DΦ_T^c)⁻ᵀ ∇̂û_h. On boundary faces, tangential gradients
    use the first fundamental form of the exact face map.

    Parameters
    ----------
    space : `FeSpace`
        Space of ``u_h``; must have a domain.
    u_h : `FeFunction`
        Discrete solution.
    exact : `ExactSolution`
        Exact solution.

    Returns
    -------
    components : `ErrorComponents`
        The four error contributions.
    """
    reference = space.reference
    domain = space.domain
    degree = _error_quadrature_degree(space)

    rule = make_quadrature(space.dimension, degree)
    values = reference.basis(rule.points)
    gradients = reference.basis_gradients(rule.points)
    bulk_l2 = 0.0
    bulk_h1 = 0.0
    for start in range(0, space.mesh.num_cells, CHUNK_SIZE):
        chunk = slice(start, min(start + CHUNK_SIZE, space.mesh.num_cells))
        element_map = space.element_map.take(chunk)
        points = element_map.exact_map(rule.points)
        jacobian = element_map.exact_jacobian(rule.points)
        weights = np.abs(np.linalg.det(jacobian)) * rule.weights
        coefficients = u_h.cell_coefficients(chunk)
        value_error = exact.value(points) - coefficients @ values.T
        reference_gradient = np.einsum("cj,qjm->cqm", coefficients, gradients)
        lifted_gradient = np.einsum(
            "cqmd,cqm->cqd", np.linalg.inv(jacobian), reference_gradient
        )
        gradient_error = exact.gradient(points) - lifted_gradient
        bulk_l2 += np.sum(weights * value_error**2)
        bulk_h1 += np.sum(weights * np.sum(gradient_error**2, axis=-1))

    face_rule = make_quadrature(space.dimension - 1, degree)
    faces = space.boundary_faces
    surface_l2 = 0.0
    surface_h1 = 0.0
    for local_face in range(space.dimension + 1):
        rows = np.flatnonzero(faces[:, 1] == local_face)
        if len(rows) == 0:
            continue
        xhat = reference.face_points(local_face, face_rule.points)
        edge_matrix = reference.face_edge_matrix(local_face)
        values = reference.basis(xhat)
        tangential = reference.basis_gradients(xhat) @ edge_matrix
        for start in range(0, len(rows), CHUNK_SIZE):
            cells = faces[rows[start : start + CHUNK_SIZE], 0]
            element_map = space.element_map.take(cells)
            points = element_map.exact_map(xhat)
            tangent = element_map.exact_jacobian(xhat) @ edge_matrix
            metric = np.swapaxes(tangent, -1, -2) @ tangent
            weights = np.sqrt(np.linalg.det(metric)) * face_rule.weights
            coefficients = u_h.cell_coefficients(cells)
            value_error = exact.value(points) - coefficients @ values.T
            # ∇_Γ u_h^l = G (GᵀG)⁻¹ t with t the derivatives along the face.
            face_derivatives = np.einsum("cj,qja->cqa", coefficients, tangential)
            lifted_gradient = np.einsum(
                "cqda,cqab,cqb->cqd",
                tangent,
                np.linalg.inv(metric),
                face_derivatives,
            )
            exact_gradient = tangential_gradient(
                exact.gradient(points), domain.outward_normal(points)
            )
            gradient_error = exact_gradient - lifted_gradient
            surface_l2 += np.sum(weights * value_error**2)
            surface_h1 += np.sum(weights * np.sum(gradient_error**2, axis=-1))

    return ErrorComponents(
        bulk_l2=math.sqrt(bulk_l2),
        bulk_h1_semi=math.sqrt(bulk_h1),
        surface_l2=math.sqrt(surface_l2),
        surface_h1_semi=math.sqrt(surface_h1),
    )


def error_norms(space, u_h, exact):
    """Combined errors (‖u - u_h^l‖_{L²(Ω;Γ)}, ‖u - u_h^l‖_{H¹(Ω;Γ)})."""
    components = error_components(space, u_h, exact)
    return components.l2, components.h1


def discrete_norms(space, w, matrices=None):
    """Norms of a discrete function measured on Ω_h^(k) and Γ_h^(k).

    Parameters
    ----------
    space : `FeSpace`
        The finite element space.
    w : `FeFunction` | `numpy.ndarray`
        The function or its N coefficients.
    matrices : `SystemMatrices`, optional
        Previously assembled matrices of ``space``.

    Returns
    -------
    components : `ErrorComponents`
        Norms from the quadratic forms of M_Ω, A_Ω, M_Γ and A_Γ.
    """
    if matrices is None:
        matrices = assemble_matrices(space)
    coefficients = w.coefficients if isinstance(w, FeFunction) else np.asarray(w)
    boundary = matrices.trace @ coefficients
    return ErrorComponents(
        bulk_l2=ah_norm(matrices.mass, coefficients),
        bulk_h1_semi=ah_norm(matrices.stiffness, coefficients),
        surface_l2=ah_norm(matrices.surface_mass, boundary),
        surface_h1_semi=ah_norm(matrices.surface_stiffness, boundary),
    )


def interpolate(space, exact):
    """Nodal interpolant Ĩ_h u = Σ u(x_j) φ_j.

    Nodes of Ω_h^(k) outside Ω use the analytic extension of u.
    """
    return FeFunction(space, exact.value(space.node_coordinates))


def eoc(errors, hs):
    """Empirical orders of convergence between consecutive levels.

    Parameters
    ----------
    errors : `list` [`float`]
        Errors e_0, e_1, ...
    hs : `list` [`float`]
        Mesh sizes h_0, h_1, ...

    Returns
    -------
    orders : `list` [`float`]
        log(e_{i-1} / e_i) / log(h_{i-1} / h_i) for i >= 1.

    Raises
    ------
    ValueError
        If the lengths differ or are < 2, or any entry is not positive.
    """
    errors = [float(value) for value in errors]
    hs = [float(value) for value in hs]
    if len(errors) != len(hs):
        raise ValueError(f"len(errors)={len(errors)} != len(hs)={len(hs)}")
    if len(errors) < 2:
        raise ValueError(f"need at least 2 levels; got {len(errors)}")
    for name, values in (("errors", errors), ("hs", hs)):
        if min(values) <= 0:
            raise ValueError(f"{name}={values} must all be positive")
    return [
        math.log(errors[i - 1] / errors[i]) / math.log(hs[i - 1] / hs[i])
        for i in range(1, len(errors))
    ]


def _format_float(value):
    return "" if value is None else f"{value:.17g}"


class LevelRecord:
    """Results of one refinement level.

    Attributes
    ----------
    level : `int`
        Level index, from 0.
    h : `float`
        Mesh size.
    num_dofs : `int`
        Number of unknowns N.
    err_l2 : `float`
        Combined L²(Ω;Γ) error.
    err_h1 : `float`
        Combined H¹(Ω;Γ) error.
    components : `ErrorComponents` | None
        The separate error contributions.
    solve_report : `SolveReport` | None
        Linear solver statistics; None for interpolation studies.
    """

    def __init__(
        self, level, h, num_dofs, err_l2, err_h1, components=None, solve_report=None
    ):
        self.level = level
        self.h = h
        self.num_dofs = num_dofs
        self.err_l2 = err_l2
        self.err_h1 = err_h1
        self.components = components
        self.solve_report = solve_report

    def __repr__(self):
        return (
            f"LevelRecord(level={self.level}, h={self.h:0.6g}, N={self.num_dofs}, "
            f"err_l2={self.err_l2:0.6g}, err_h1={self.err_h1:0.6g})"
        )


class ErrorReport:
    """Per-level errors of a refinement study and their orders.

    Parameters
    ----------
    alpha, beta, kappa : `float`
        Problem parameters.
    degree : `int`
        Polynomial degree k.

    Attributes
    ----------
    records : `list` [`LevelRecord`]
        One record per level, coarsest first.
    """

    def __init__(self, alpha, beta, kappa, degree):
        self.alpha = alpha
        self.beta = beta
        self.kappa = kappa
        self.degree = degree
        self.records = []

    def add(self, record):
        """Append the record of the next level."""
        if record.level != len(self.records):
            raise ValueError(
                f"record.level={record.level}; expected {len(self.records)}"
            )
        self.records.append(record)

    def _orders(self, attribute):
        orders = [None]
        for previous, current in zip(self.records[:-1], self.records[1:]):
            try:
                (order,) = eoc(
                    [getattr(previous, attribute), getattr(current, attribute)],
                    [previous.h, current.h],
                )
            except (ValueError, ZeroDivisionError):
                order = math.nan
            orders.append(order)
        return orders[: len(self.records)]

    @property
    def eoc_l2(self):
        """Order of the L² error per level; None at level 0."""
        return self._orders("err_l2")

    @property
    def eoc_h1(self):
        """Order of the H¹ error per level; None at level 0."""
        return self._orders("err_h1")

    def rows(self):
        """CSV rows (as strings), header excluded."""
        return [
            [
                str(record.level),
                _format_float(record.h),
                str(record.num_dofs),
                _format_float(record.err_l2),
                _format_float(record.err_h1),
                _format_float(order_l2),
                _format_float(order_h1),
            ]
            for record, order_l2, order_h1 in zip(
                self.records, self.eoc_l2, self.eoc_h1
            )
        ]

    def write_csv(self, path):
        """Write the table "level,h,N,errL2,errH1,eocL2,eocH1"."""
        with pathlib.Path(path).open("w", newline="") as file:
            writer = csv.writer(file, lineterminator="\n")
            writer.writerow(STUDY_CSV_HEADER)
            writer.writerows(self.rows())
