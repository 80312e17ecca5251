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
    "DomainKind",
    "Domain",
    "make_domain",
    "tangential_gradient",
    "BOUNDARY_TOLERANCE",
]

import enum

import numpy as np

from .errors import GeometryError

# Maximum |d(s)| for a point s to be accepted as lying on the boundary.
BOUNDARY_TOLERANCE = 1e-10

# Width δ of the strip 𝒰_δ that must contain the polyhedral boundary.
# Any value below the reach works for the unit disk and ball.
UNIT_SPHERE_STRIP_WIDTH = 0.5

# Reach of the unit sphere: p(x) is unique wherever d(x) > -1,
# i.e. everywhere except at the origin.
UNIT_SPHERE_REACH = 1.0


class DomainKind(enum.Enum):
    UNIT_DISK = "unit-disk"
    UNIT_BALL = "unit-ball"


class Domain:
    """Smooth domain Ω described implicitly by its signed distance function.

    Supports the unit disk (2D) and the unit ball (3D), for which
    ``d(x) = |x| - 1`` and ``p(x) = x / |x|``.

    All methods accept a single point of shape (n,) or an array of points
    of shape (..., n) and broadcast over the leading dimensions.

    Parameters
    ----------
    kind : `DomainKind`
        Which domain.

    Attributes
    ----------
    kind : `DomainKind`
        Which domain.
    dimension : `int`
        Spatial dimension n (2 or 3).
    strip_width : `float`
        Width δ of the strip 𝒰_δ = {|d(x)| < δ} that must contain
        the boundary of the polyhedral approximation.
    reach : `float`
        The closest-point projection is unique for all x with
        ``-reach < d(x) < reach``.
    volume : `float`
        Exact measure of Ω.
    surface_area : `float`
        Exact measure of Γ.
    """

    def __init__(self, kind):
        self.kind = DomainKind(kind)
        if self.kind is DomainKind.UNIT_DISK:
            self.dimension = 2
            self.volume = np.pi
            self.surface_area = 2 * np.pi
        else:
            self.dimension = 3
            self.volume = 4 * np.pi / 3
            self.surface_area = 4 * np.pi
        self.strip_width = UNIT_SPHERE_STRIP_WIDTH
        self.reach = UNIT_SPHERE_REACH

    def _as_points(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise ValueError(
                f"points have {x.shape[-1]} coordinates; "
                f"{self.kind.value} needs {self.dimension}"
            )
        return x

    def signed_distance(self, x):
        """Signed distance d(x): negative in Ω, zero on Γ, positive outside.

        Parameters
        ----------
        x : `numpy.ndarray`
            Point(s), shape (..., n).

        Returns
        -------
        distance : `float` | `numpy.ndarray`
            Signed distance, shape (...).
        """
        x = self._as_points(x)
        return np.linalg.norm(x, axis=-1) - 1.0

    def closest_point(self, x):
        """Closest-point projection p(x) onto Γ.

        Parameters
        ----------
        x : `numpy.ndarray`
            Point(s), shape (..., n), with ``d(x) > -reach``
            (for the unit disk and ball: any point but the origin).

        Returns
        -------
        projected : `numpy.ndarray`
            Point(s) on Γ, shape (..., n).

        Raises
        ------
        GeometryError
            If the projection of any point is not unique.
        """
        x = self._as_points(x)
        radius = np.linalg.norm(x, axis=-1, keepdims=True)
        distance = radius[..., 0] - 1.0
        if np.any(distance <= -self.reach * (1 - 1e-14)):
            raise GeometryError(
                f"closest-point projection is not unique: d(x)={np.min(distance)} "
                f"<= -reach={-self.reach}"
            )
        return x / radius

    def closest_point_jacobian(self, x):
        """Derivative Dp(x) of the closest-point projection.

        Parameters
        ----------
        x : `numpy.ndarray`
            Point(s), shape (..., n), with ``d(x) > -reach``.

        Returns
        -------
        jacobian : `numpy.ndarray`
            Shape (..., n, n); equals (I - p pᵀ) / |x| for the unit sphere.
        """
        projected = self.closest_point(x)
        radius = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
        identity = np.eye(self.dimension)
        outer = projected[..., :, None] * projected[..., None, :]
        return (identity - outer) / radius[..., None, None]

    def outward_normal(self, s):
        """Outer unit normal ν(s) = ∇d(s) at boundary point(s) s.

        Parameters
        ----------
        s : `numpy.ndarray`
            Point(s) on Γ, shape (..., n).

        Returns
        -------
        normal : `numpy.ndarray`
            Unit vector(s), shape (..., n).

        Raises
        ------
        GeometryError
            If any point is further than `BOUNDARY_TOLERANCE` from Γ.
        """
        s = self._as_points(s)
        distance = self.signed_distance(s)
        if np.any(np.abs(distance) > BOUNDARY_TOLERANCE):
            worst = np.max(np.abs(distance))
            raise GeometryError(
                f"point is not on the boundary: |d(s)|={worst:0.3g} "
                f"> {BOUNDARY_TOLERANCE}"
            )
        return s / np.linalg.norm(s, axis=-1, keepdims=True)

    def __repr__(self):
        return f"Domain(kind={self.kind.value})"


def make_domain(kind):
    """Make a `Domain` from its name, e.g. "unit-disk"."""
    try:
        return Domain(DomainKind(kind))
    except ValueError:
        choices = ", ".join(item.value for item in DomainKind)
        raise ValueError(f"unknown domain {kind!r}; expected one of {choices}")


def tangential_gradient(gradient, normal):
    """Tangential part ∇w - (∇w · ν) ν of a gradient.

    Parameters
    ----------
    gradient : `numpy.ndarray`
        Gradient(s), shape (..., n).
    normal : `numpy.ndarray`
        Unit normal(s), shape (..., n).

    Returns
    -------
    tangential : `numpy.ndarray`
        Shape (..., n), orthogonal to ``normal``.
    """
    gradient = np.asarray(gradient, dtype=float)
    normal = np.asarray(normal, dtype=float)
    normal_part = np.sum(gradient * normal, axis=-1, keepdims=True)
    return gradient - normal_part * normal
