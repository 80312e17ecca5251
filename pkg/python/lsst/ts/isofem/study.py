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
    "ConvergenceStudy",
    "GeometryRecord",
    "measure_geometry",
    "run_study",
    "run_geometry_diagnostics",
    "DIAGNOSTICS_CSV_HEADER",
]

import csv
import logging
import pathlib
import types

import numpy as np

from .assembly import (
    CHUNK_SIZE,
    assemble_bulk_mass,
    assemble_matrices,
    assemble_surface_mass,
    export_matrix,
    load_vector,
    system_matrix,
)
from .error_norms import ErrorReport, LevelRecord, error_components, interpolate
from .exact_solutions import get_exact_solution, manufactured_rhs
from .fe_space import FeFunction, build_space
from .geometry import make_domain
from .mesh import generate_linear_mesh, refine
from .quadrature import make_quadrature
from .solver import solve_spd

DIAGNOSTICS_CSV_HEADER = (
    "level",
    "h",
    "volume",
    "surface",
    "maxBoundaryDist",
    "minJacobian",
    "maxCT",
)


class GeometryRecord:
    """Geometry measurements of one level.

    Attributes
    ----------
    level : `int`
        Level index.
    h : `float`
        Mesh size.
    volume : `float`
        |Ω_h^(k)|.
    surface : `float`
        |Γ_h^(k)|.
    max_boundary_distance : `float`
        max |d(x)| over the face quadrature points x of Γ_h^(k).
    min_jacobian : `float`
        min det DΦ_T^(k) over the bulk quadrature points.
    max_ct : `float`
        max over curved cells of the sampled bound C_T; 0 if none.
    """

    def __init__(
        self, level, h, volume, surface, max_boundary_distance, min_jacobian, max_ct
    ):
        self.level = level
        self.h = h
        self.volume = volume
        self.surface = surface
        self.max_boundary_distance = max_boundary_distance
        self.min_jacobian = min_jacobian
        self.max_ct = max_ct

    def as_row(self):
        return [str(self.level)] + [
            f"{value:.17g}"
            for value in (
                self.h,
                self.volume,
                self.surface,
                self.max_boundary_distance,
                self.min_jacobian,
                self.max_ct,
            )
        ]


def measure_geometry(space, level=0):
    """Measure the geometry of the isoparametric mesh of a space.

    Parameters
    ----------
    space : `FeSpace`
        The finite element space.
    level : `int`, optional
        Level index to record.

    Returns
    -------
    record : `GeometryRecord`
    """
    degree = 2 * space.degree + 2
    element_map = space.element_map
    num_cells = space.mesh.num_cells

    rule = make_quadrature(space.dimension, degree)
    min_jacobian = np.inf
    for start in range(0, num_cells, CHUNK_SIZE):
        chunk = element_map.take(slice(start, start + CHUNK_SIZE))
        _, determinant = chunk.bulk_jacobian(rule.points)
        min_jacobian = min(min_jacobian, float(determinant.min()))

    face_rule = make_quadrature(space.dimension - 1, degree)
    max_distance = 0.0
    faces = space.boundary_faces
    for local_face in range(space.dimension + 1):
        cells = faces[faces[:, 1] == local_face, 0]
        if len(cells) == 0:
            continue
        xhat = space.reference.face_points(local_face, face_rule.points)
        points = element_map.take(cells).isoparametric_map(xhat)
        max_distance = max(
            max_distance, float(np.abs(space.domain.signed_distance(points)).max())
        )

    curved = np.flatnonzero(element_map.is_curved)
    max_ct = 0.0
    for start in range(0, len(curved), CHUNK_SIZE):
        chunk = element_map.take(curved[start : start + CHUNK_SIZE])
        max_ct = max(max_ct, float(chunk.rho_derivative_bound().max()))

    return GeometryRecord(
        level=level,
        h=space.mesh.h,
        volume=float(assemble_bulk_mass(space).sum()),
        surface=float(assemble_surface_mass(space).sum()),
        max_boundary_distance=max_distance,
        min_jacobian=min_jacobian,
        max_ct=max_ct,
    )


class ConvergenceStudy:
    """Refinement study of the generalized Robin problem

        -Δu + κu = f in Ω,   ∂_ν u + αu - βΔ_Γ u = g on Γ

    with data manufactured from a built-in exact solution.

    Parameters
    ----------
    config : `types.SimpleNamespace`
        Configuration from `make_config`.
    log : `logging.Logger`, optional
        Parent logger.

    Attributes
    ----------
    domain : `Domain`
        The domain.
    exact : `ExactSolution`
        The manufactured solution.
    f, g : `callable`
        Bulk and boundary data.
    """

    def __init__(self, config: types.SimpleNamespace, log=None):
        self.log = (
            logging.getLogger(type(self).__name__)
            if log is None
            else log.getChild(type(self).__name__)
        )
        self.config = config
        self.domain = make_domain(config.domain)
        self.exact = get_exact_solution(config.solution, self.domain.dimension)
        self.exact.check_derivatives()
        self.f, self.g = manufactured_rhs(
            self.exact,
            alpha=config.alpha,
            beta=config.beta,
            kappa=config.kappa,
            domain=self.domain,
        )

    def meshes(self):
        """Generate the mesh of each level, coarsest first."""
        mesh = generate_linear_mesh(self.domain, self.config.h0)
        for level in range(self.config.levels):
            if level > 0:
                mesh = refine(mesh, self.domain)
            self.log.debug(f"Level {level}: {mesh}")
            yield mesh

    def spaces(self):
        """Build the finite element space of each level."""
        for mesh in self.meshes():
            yield build_space(mesh, self.domain, self.config.degree, log=self.log)

    def solve(self, space, level=0):
        """Solve the discrete problem on one space.

        Returns
        -------
        u_h : `FeFunction`
            The discrete solution.
        report : `SolveReport`
            Solver statistics.
        """
        config = self.config
        matrices = assemble_matrices(space)
        system = system_matrix(
            space, config.alpha, config.beta, config.kappa, matrices=matrices
        )
        if config.matrix_dir:
            matrix_dir = pathlib.Path(config.matrix_dir)
            matrix_dir.mkdir(parents=True, exist_ok=True)
            export_matrix(
                system,
                matrix_dir / f"K_level{level}.mtx",
                comment=f"level {level}, degree {space.degree}",
            )
        boundary_nodes = space.node_coordinates[: space.num_boundary_dofs]
        rhs = load_vector(
            space,
            space.interpolate_function(self.f),
            self.g(boundary_nodes),
            matrices=matrices,
        )
        preconditioner = None if config.preconditioner == "none" else "jacobi"
        coefficients, report = solve_spd(
            system, rhs, tol=config.tol, preconditioner=preconditioner
        )
        return FeFunction(space, coefficients), report

    def run(self):
        """Run the study.

        Returns
        -------
        report : `ErrorReport`
            Errors and orders of convergence per level.
        """
        config = self.config
        report = ErrorReport(
            alpha=config.alpha,
            beta=config.beta,
            kappa=config.kappa,
            degree=config.degree,
        )
        for level, space in enumerate(self.spaces()):
            solve_report = None
            if config.study == "solve":
                u_h, solve_report = self.solve(space, level=level)
                self.log.debug(f"Level {level}: {solve_report}")
            else:
                u_h = interpolate(space, self.exact)
            components = error_components(space, u_h, self.exact)
            record = LevelRecord(
                level=level,
                h=space.mesh.h,
                num_dofs=space.num_dofs,
                err_l2=components.l2,
                err_h1=components.h1,
                components=components,
                solve_report=solve_report,
            )
            report.add(record)
            self.log.info(
                f"Level {level}: h={record.h:0.4g}, N={record.num_dofs}, "
                f"errL2={record.err_l2:0.4e}, errH1={record.err_h1:0.4e}"
            )
        return report

    def run_geometry_diagnostics(self):
        """Measure the geometry of each level.

        Returns
        -------
        records : `list` [`GeometryRecord`]
        """
        records = []
        for level, space in enumerate(self.spaces()):
            record = measure_geometry(space, level=level)
            self.log.info(
                f"Level {level}: volume={record.volume:0.10g}, "
                f"surface={record.surface:0.10g}, "
                f"maxBoundaryDist={record.max_boundary_distance:0.3e}"
            )
            records.append(record)
        return records


def run_study(config: types.SimpleNamespace, log=None) -> ErrorReport:
    """Run a convergence study and write its CSV table to ``config.out``."""
    report = ConvergenceStudy(config, log=log).run()
    report.write_csv(config.out)
    return report


def run_geometry_diagnostics(config: types.SimpleNamespace, log=None):
    """Measure the geometry of each level and write the CSV table
    to ``config.diagnostics``.
    """
    records = ConvergenceStudy(config, log=log).run_geometry_diagnostics()
    with pathlib.Path(config.diagnostics).open("w", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(DIAGNOSTICS_CSV_HEADER)
        writer.writerows(record.as_row() for record in records)
    return records
