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

__all__ = ["SolveReport", "solve_spd", "ah_norm", "MAX_TOLERANCE"]

import logging

import numpy as np

from .errors import SolverError

# Largest relative residual tolerance accepted by solve_spd.
MAX_TOLERANCE = 1e-4

# solve_spd default: maximum iterations per unknown.
ITERATIONS_PER_UNKNOWN = 20

_log = logging.getLogger(__name__)


class SolveReport:
    """Outcome of `solve_spd`.

    Attributes
    ----------
    iterations : `int`
        Number of conjugate gradient iterations.
    relative_residual : `float`
        ‖K u - b‖₂ / ‖b‖₂ of the returned u (0 if b = 0).
    ah_norm : `float`
        Energy norm (uᵀ K u)^(1/2) of the returned u.
    restarts : `int`
        Number of times the recursive residual was replaced by the
        true residual.
    """

    def __init__(self, iterations, relative_residual, ah_norm, restarts=0):
        self.iterations = iterations
        self.relative_residual = relative_residual
        self.ah_norm = ah_norm
        self.restarts = restarts

    def __repr__(self):
        return (
            f"SolveReport(iterations={self.iterations}, "
            f"relative_residual={self.relative_residual:0.3e}, "
            f"ah_norm={self.ah_norm:0.6g})"
        )


def _dot(a, b):
    # Fixed summation order for reproducible iterates.
    return float(np.sum(a * b))


def ah_norm(K, w):
    """Energy norm (wᵀ K w)^(1/2).

    Parameters
    ----------
    K : `scipy.sparse.spmatrix` | `numpy.ndarray`
        Symmetric positive definite matrix.
    w : `numpy.ndarray`
        Vector.

    Raises
    ------
    SolverError
        If wᵀ K w is negative beyond rounding, i.e. K is not positive
        semidefinite.
    """
    w = np.asarray(w, dtype=float)
    value = _dot(w, K @ w)
    if value < 0:
        scale = abs(K).max() * _dot(w, w)
        if value < -1e-12 * scale:
            raise SolverError(
                f"wᵀKw={value:0.3g} < 0: the matrix is not positive semidefinite"
            )
        value = 0.0
    return float(np.sqrt(value))


def solve_spd(K, b, tol=1e-12, max_iterations=None, preconditioner="jacobi"):
    """Solve K u = b by preconditioned conjugate gradients.

    Parameters
    ----------
    K : `scipy.sparse.spmatrix`
        Symmetric positive definite N x N matrix.
    b : `numpy.ndarray`
        Right-hand side.
    tol : `float`, optional
        Relative residual tolerance, in (0, 1e-4].
    max_iterations : `int`, optional
        Iteration limit; 20 N if None.
    preconditioner : `str` | None, optional
        "jacobi" for diagonal scaling or None.

    Returns
    -------
    u : `numpy.ndarray`
        Solution with ‖K u - b‖₂ <= tol ‖b‖₂.
    report : `SolveReport`
        Iteration count and residual.

    Raises
    ------
    ValueError
        If ``tol`` or ``preconditioner`` is invalid or the sizes of
        ``K`` and ``b`` do not match.
    SolverError
        If a direction of nonpositive curvature is found (K is not
        positive definite) or the iteration limit is reached; in the
        latter case the error carries the last report.
    """
    if not 0 < tol <= MAX_TOLERANCE:
        raise ValueError(f"tol={tol} must be in (0, {MAX_TOLERANCE}]")
    b = np.asarray(b, dtype=float)
    size = len(b)
    if K.shape != (size, size):
        raise ValueError(f"K has shape {K.shape}; b has length {size}")
    if max_iterations is None:
        max_iterations = ITERATIONS_PER_UNKNOWN * size

    if preconditioner == "jacobi":
        diagonal = np.asarray(K.diagonal(), dtype=float)
        if np.any(diagonal <= 0):
            raise SolverError(
                f"diagonal entry {int(np.argmin(diagonal))} is not positive; "
                "the matrix is not positive definite"
            )
        inverse_diagonal = 1 / diagonal

        def apply_preconditioner(r):
            return inverse_diagonal * r

    elif preconditioner is None:

        def apply_preconditioner(r):
            return r.copy()

    else:
        raise ValueError(
            f"preconditioner={preconditioner!r} must be 'jacobi' or None"
        )

    u = np.zeros(size)
    b_norm = np.sqrt(_dot(b, b))
    if b_norm == 0:
        return u, SolveReport(iterations=0, relative_residual=0.0, ah_norm=0.0)
    threshold = tol * b_norm

    residual = b.copy()
    z = apply_preconditioner(residual)
    direction = z.copy()
    rz = _dot(residual, z)
    iterations = 0
    restarts = 0
    while True:
        if np.sqrt(_dot(residual, residual)) <= threshold:
            # Guard against drift of the recursive residual.
            residual = b - K @ u
            if np.sqrt(_dot(residual, residual)) <= threshold:
                break
            restarts += 1
            z = apply_preconditioner(residual)
            direction = z.copy()
            rz = _dot(residual, z)
        if iterations >= max_iterations:
            true_residual = np.sqrt(_dot(b - K @ u, b - K @ u)) / b_norm
            report = SolveReport(
                iterations=iterations,
                relative_residual=true_residual,
                ah_norm=ah_norm(K, u),
                restarts=restarts,
            )
            raise SolverError(
                f"no convergence after {iterations} iterations: "
                f"relative residual {true_residual:0.3e} > tol={tol}",
                report=report,
            )
        K_direction = K @ direction
        curvature = _dot(direction, K_direction)
        if curvature <= 0:
            raise SolverError(
                f"pᵀKp={curvature:0.3g} <= 0 at iteration {iterations}: "
                "the matrix is indefinite"
            )
        step = rz / curvature
        u += step * direction
        residual -= step * K_direction
        z = apply_preconditioner(residual)
        rz_next = _dot(residual, z)
        direction = z + (rz_next / rz) * direction
        rz = rz_next
        iterations += 1

    report = SolveReport(
        iterations=iterations,
        relative_residual=np.sqrt(_dot(residual, residual)) / b_norm,
        ah_norm=ah_norm(K, u),
        restarts=restarts,
    )
    _log.debug(f"solve_spd: N={size}, {report}")
    return u, report
