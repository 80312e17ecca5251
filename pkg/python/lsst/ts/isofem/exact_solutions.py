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
    "ExactSolution",
    "get_exact_solution",
    "manufactured_rhs",
    "SOLUTION_NAMES",
]

import numpy as np


class ExactSolution:
    """Smooth function with closed-form derivatives, used as a
    manufactured solution.

    All callables take points of shape (num_points, n).

    Parameters
    ----------
    name : `str`
        Registry name.
    dimension : `int`
        Spatial dimension n.
    value : `callable`
        u(x), returns shape (num_points,).
    gradient : `callable`
        ∇u(x), returns shape (num_points, n).
    hessian : `callable`
        D²u(x), returns shape (num_points, n, n).
    """

    def __init__(self, name, dimension, value, gradient, hessian):
        self.name = name
        self.dimension = dimension
        self._value = value
        self._gradient = gradient
        self._hessian = hessian

    def _points(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise ValueError(
                f"{self.name}: points have {x.shape[-1]} coordinates; "
                f"expected {self.dimension}"
            )
        return x.reshape(-1, self.dimension), x.shape[:-1]

    def value(self, x):
        """u(x), shape (...)."""
        points, shape = self._points(x)
        return self._value(points).reshape(shape)

    def gradient(self, x):
        """∇u(x), shape (..., n)."""
        points, shape = self._points(x)
        return self._gradient(points).reshape(shape + (self.dimension,))

    def hessian(self, x):
        """D²u(x), shape (..., n, n)."""
        points, shape = self._points(x)
        return self._hessian(points).reshape(shape + (self.dimension,) * 2)

    def laplacian(self, x):
        """Δu(x), shape (...)."""
        return np.trace(self.hessian(x), axis1=-2, axis2=-1)

    def check_derivatives(self, rng=None, num_points=100, step=1e-5, rtol=1e-6):
        """Compare the closed-form derivatives with centered differences.

        Parameters
        ----------
        rng : `numpy.random.Generator`, optional
            Source of the sample points in [-1, 1]^n.
        num_points : `int`, optional
            Number of sample points.
        step : `float`, optional
            Finite difference step.
        rtol : `float`, optional
            Allowed discrepancy relative to max(1, max |derivative|).

        Raises
        ------
        ValueError
            If the gradient or Hessian does not match.
        """
        if rng is None:
            rng = np.random.default_rng(0)
        points = rng.uniform(-1, 1, size=(num_points, self.dimension))
        offsets = step * np.eye(self.dimension)
        for label, func, derivative in (
            ("gradient", self.value, self.gradient),
            ("hessian", self.gradient, self.hessian),
        ):
            expected = derivative(points)
            # Column m of the difference quotient is the derivative along x_m.
            estimated = np.stack(
                [
                    (func(points + offset) - func(points - offset)) / (2 * step)
                    for offset in offsets
                ],
                axis=-1,
            )
            scale = max(1.0, np.max(np.abs(expected)))
            discrepancy = np.max(np.abs(estimated - expected))
            if discrepancy > rtol * scale:
                raise ValueError(
                    f"{self.name}: {label} differs from centered differences "
                    f"by {discrepancy:0.3g} > {rtol * scale:0.3g}"
                )

    def __repr__(self):
        return f"ExactSolution(name={self.name!r}, dimension={self.dimension})"


def _grp2d():
    # u = x y s², s = x² + y²
    def value(p):
        x, y = p.T
        s = x**2 + y**2
        return x * y * s**2

    def gradient(p):
        x, y = p.T
        s = x**2 + y**2
        return np.stack(
            [y * s**2 + 4 * x**2 * y * s, x * s**2 + 4 * x * y**2 * s], axis=-1
        )

    def hessian(p):
        x, y = p.T
        s = x**2 + y**2
        uxx = 12 * x * y * s + 8 * x**3 * y
        uyy = 12 * x * y * s + 8 * x * y**3
        uxy = 5 * s**2 + 8 * x**2 * y**2
        return np.stack([np.stack([uxx, uxy], -1), np.stack([uxy, uyy], -1)], -2)

    return ExactSolution("grp2d", 2, value, gradient, hessian)


def _grp3d():
    # u = x² + y² - x² z²
    def value(p):
        x, y, z = p.T
        return x**2 + y**2 - x**2 * z**2

    def gradient(p):
        x, y, z = p.T
        return np.stack([2 * x - 2 * x * z**2, 2 * y, -2 * x**2 * z], axis=-1)

    def hessian(p):
        x, y, z = p.T
        result = np.zeros((len(p), 3, 3))
        result[:, 0, 0] = 2 - 2 * z**2
        result[:, 1, 1] = 2
        result[:, 2, 2] = -2 * x**2
        result[:, 0, 2] = result[:, 2, 0] = -4 * x * z
        return result

    return ExactSolution("grp3d", 3, value, gradient, hessian)


def _quadratic(name, dimension, hessian_matrix, linear, constant):
    """u = ½ xᵀ H x + c·x + b."""
    hessian_matrix = np.asarray(hessian_matrix, dtype=float)
    linear = np.asarray(linear, dtype=float)

    def value(p):
        quadratic_part = 0.5 * np.einsum("pi,ij,pj->p", p, hessian_matrix, p)
        return quadratic_part + p @ linear + constant

    def gradient(p):
        return p @ hessian_matrix + linear

    def hessian(p):
        return np.broadcast_to(hessian_matrix, (len(p), dimension, dimension)).copy()

    return ExactSolution(name, dimension, value, gradient, hessian)


_QUADRATIC_COEFFICIENTS = {
    2: ([[2.0, 1.0], [1.0, -1.0]], [0.5, -0.25], 0.75),
    3: (
        [[2.0, 1.0, 0.0], [1.0, -1.0, 0.5], [0.0, 0.5, 1.0]],
        [0.5, -0.25, 1.0],
        0.75,
    ),
}
_LINEAR_COEFFICIENTS = {2: ([1.0, 2.0], 0.5), 3: ([1.0, 2.0, 3.0], 0.5)}


def _make_solution(name, dimension):
    zeros = np.zeros((dimension, dimension))
    if name == "grp2d" and dimension == 2:
        return _grp2d()
    if name == "grp3d" and dimension == 3:
        return _grp3d()
    if name == "constant":
        return _quadratic(name, dimension, zeros, np.zeros(dimension), 1.0)
    if name == "zero":
        return _quadratic(name, dimension, zeros, np.zeros(dimension), 0.0)
    if name == "linear":
        linear, constant = _LINEAR_COEFFICIENTS[dimension]
        return _quadratic(name, dimension, zeros, linear, constant)
    if name == "quadratic":
        return _quadratic(name, dimension, *_QUADRATIC_COEFFICIENTS[dimension])
    return None


SOLUTION_NAMES = ("grp", "grp2d", "grp3d", "constant", "linear", "quadratic", "zero")


def get_exact_solution(name, dimension):
    """Get a built-in exact solution.

    Parameters
    ----------
    name : `str`
        One of `SOLUTION_NAMES`. "grp" means "grp2d" in 2D and "grp3d"
        in 3D.
    dimension : `int`
        Spatial dimension (2 or 3).

    Raises
    ------
    ValueError
        If the name is unknown or not defined in this dimension.
    """
    if dimension not in (2, 3):
        raise ValueError(f"dimension={dimension} must be 2 or 3")
    if name == "grp":
        name = f"grp{dimension}d"
    solution = _make_solution(name, dimension)
    if solution is None:
        raise ValueError(
            f"unknown solution {name!r} in dimension {dimension}; "
            f"expected one of {', '.join(SOLUTION_NAMES)}"
        )
    return solution


def manufactured_rhs(exact, alpha, beta, kappa, domain):
    """Data f, g for which ``exact`` solves the generalized Robin problem

        -Δu + κu = f in Ω,   ∂_ν u + αu - βΔ_Γ u = g on Γ.

    On the unit circle or sphere the Laplace-Beltrami operator of the
    Cartesian extension is Δ_Γ u = Δu - (n-1) ∂_r u - ∂_rr u at r = 1.

    Parameters
    ----------
    exact : `ExactSolution`
        Manufactured solution.
    alpha, beta, kappa : `float`
        Problem parameters.
    domain : `Domain`
        The unit disk or ball.

    Returns
    -------
    f : `callable`
        Bulk data; points (num_points, n) -> (num_points,).
    g : `callable`
        Boundary data; points are first projected onto Γ.
    """
    if exact.dimension != domain.dimension:
        raise ValueError(
            f"{exact.name} has dimension {exact.dimension}; "
            f"{domain} has dimension {domain.dimension}"
        )

    def f(x):
        return -exact.laplacian(x) + kappa * exact.value(x)

    def g(s):
        s = domain.closest_point(s)
        normal = domain.outward_normal(s)
        gradient = exact.gradient(s)
        hessian = exact.hessian(s)
        radial = np.sum(gradient * normal, axis=-1)
        radial2 = np.einsum("...i,...ij,...j->...", normal, hessian, normal)
        laplace_beltrami = (
            exact.laplacian(s) - (domain.dimension - 1) * radial - radial2
        )
        return radial + alpha * exact.value(s) - beta * laplace_beltrami

    return f, g
