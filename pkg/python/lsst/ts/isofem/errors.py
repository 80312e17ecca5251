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
    "IsofemError",
    "ConfigError",
    "NumericalError",
    "GeometryError",
    "MeshError",
    "JacobianError",
    "SolverError",
]


class IsofemError(Exception):
    """Base class for errors raised by this package."""

    pass


class ConfigError(IsofemError, ValueError):
    """Raised if a study configuration is not admissible.

    Parameters
    ----------
    field : `str`
        Name of the offending configuration field.
    message : `str`
        Description of the problem.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class NumericalError(IsofemError, RuntimeError):
    """Base class for failures of the numerical pipeline."""

    pass


class GeometryError(NumericalError, ValueError):
    """Raised if a point is outside the region where the closest-point
    projection is unique, or is not on the boundary when it must be.
    """

    pass


class MeshError(NumericalError):
    """Raised if a mesh violates one of its invariants."""

    pass


class JacobianError(NumericalError):
    """Raised if an element map has a nonpositive Jacobian determinant.

    Parameters
    ----------
    cell_index : `int`
        Index of the offending cell in the linear mesh.
    message : `str`
        Description of the problem.
    """

    def __init__(self, cell_index, message):
        self.cell_index = cell_index
        super().__init__(f"cell {cell_index}: {message}")


class SolverError(NumericalError):
    """Raised if the linear solver fails.

    Parameters
    ----------
    message : `str`
        Description of the problem.
    report : `SolveReport` | `None`
        State of the iteration when it was aborted.
    """

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)
