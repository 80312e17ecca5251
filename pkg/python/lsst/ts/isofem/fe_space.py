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

__all__ = ["FeSpace", "FeFunction", "SparsityPattern", "build_space"]

import logging

import numpy as np
from scipy import sparse

from .curved_map import CurvedElementMap
from .errors import MeshError
from .reference_element import ReferenceElement

# Allowed disagreement between the coordinates of a shared node
# computed from the different cells containing it.
NODE_MATCH_TOLERANCE = 1e-10


class SparsityPattern:
    """Compressed sparse row pattern of a matrix assembled from
    dense element blocks.

    Values are accumulated onto the pattern in a fixed order,
    so repeated assemblies are bit-identical.

    Parameters
    ----------
    element_dofs : `numpy.ndarray`
        Global indices of the degrees of freedom of each element,
        shape (num_elements, dofs_per_element).
    size : `int`
        Number of rows (and columns).
    """

    def __init__(self, element_dofs, size):
        element_dofs = np.asarray(element_dofs, dtype=np.int64)
        self.size = size
        self.shape = element_dofs.shape
        rows = np.repeat(element_dofs, self.shape[1], axis=1).ravel()
        cols = np.tile(element_dofs, (1, self.shape[1])).ravel()
        keys = rows * size + cols
        unique_keys, self.positions = np.unique(keys, return_inverse=True)
        self.positions = self.positions.ravel()
        unique_rows = unique_keys // size
        self.indices = unique_keys % size
        self.indptr = np.concatenate(
            [[0], np.cumsum(np.bincount(unique_rows, minlength=size))]
        )

    @property
    def nnz(self):
        return len(self.indices)

    def assemble(self, element_matrices):
        """Sum element matrices into a CSR matrix.

        Parameters
        ----------
        element_matrices : `numpy.ndarray`
            Shape (num_elements, dofs_per_element, dofs_per_element).

        Returns
        -------
        matrix : `scipy.sparse.csr_matrix`
            Matrix with sorted column indices.
        """
        element_matrices = np.asarray(element_matrices, dtype=float)
        if element_matrices.shape != self.shape + (self.shape[1],):
            raise ValueError(
                f"element_matrices has shape {element_matrices.shape}; "
                f"expected {self.shape + (self.shape[1],)}"
            )
        data = np.bincount(
            self.positions, weights=element_matrices.ravel(), minlength=self.nnz
        )
        return sparse.csr_matrix(
            (data, self.indices.copy(), self.indptr.copy()),
            shape=(self.size, self.size),
        )


class FeSpace:
    """Continuous Lagrange space of degree k on the isoparametric mesh.

    Global nodes are numbered boundary first: exactly the nodes with
    index < N_Γ lie on boundary faces. Within each group nodes are ordered
    by their key, the sorted multiset of the k vertex indices obtained by
    repeating each cell vertex as often as its lattice multi-index says;
    so at degree 1 the node numbering is the vertex numbering of a
    boundary-first mesh.

    Parameters
    ----------
    mesh : `Mesh`
        The linear mesh.
    domain : `Domain` | None
        The domain, for the curved element maps; None for a space
        on the straight polyhedral mesh.
    degree : `int`
        Polynomial degree k >= 1.
    log : `logging.Logger`, optional
        Parent logger.

    Attributes
    ----------
    reference : `ReferenceElement`
        Reference element of degree k.
    element_map : `CurvedElementMap`
        Curved maps of all cells.
    cell_dofs : `numpy.ndarray`
        Global node index of each local node, shape (num_cells, n_k).
    num_dofs : `int`
        Number N of global nodes.
    num_boundary_dofs : `int`
        Number N_Γ of boundary nodes.
    node_coordinates : `numpy.ndarray`
        x_j = Φ_T^c(x̂^j), shape (N, n).
    boundary_faces : `numpy.ndarray`
        (cell index, local face) of each boundary face.
    face_dofs : `numpy.ndarray`
        Global indices of the nodes of each boundary face,
        shape (num_boundary_faces, nodes_per_face); all are < N_Γ.
    """

    def __init__(self, mesh, domain, degree, log=None):
        self.log = (
            logging.getLogger(type(self).__name__)
            if log is None
            else log.getChild(type(self).__name__)
        )
        if degree < 1:
            raise ValueError(f"degree={degree} must be >= 1")
        self.mesh = mesh
        self.domain = domain
        self.degree = degree
        self.dimension = mesh.dimension
        self.reference = ReferenceElement(mesh.dimension, degree)
        self.element_map = CurvedElementMap(mesh, domain, self.reference)

        self._number_nodes()
        self._gather_coordinates()
        self._bulk_pattern = None
        self._face_pattern = None
        self.log.debug(
            f"Built degree {degree} space: N={self.num_dofs}, "
            f"N_Γ={self.num_boundary_dofs}, cells={mesh.num_cells}"
        )

    def _number_nodes(self):
        mesh = self.mesh
        repeats = [
            np.repeat(np.arange(self.dimension + 1), alpha)
            for alpha in self.reference.multi_indices
        ]
        keys = np.sort(mesh.cells[:, np.array(repeats)], axis=-1)
        unique_keys, inverse = np.unique(
            keys.reshape(-1, self.degree), axis=0, return_inverse=True
        )
        provisional = inverse.reshape(mesh.num_cells, self.reference.num_nodes)

        self.boundary_faces = mesh.boundary_faces
        face_cells = self.boundary_faces[:, 0]
        face_local_nodes = np.array(
            [self.reference.face_node_indices[f] for f in self.boundary_faces[:, 1]]
        ).reshape(len(face_cells), -1)
        provisional_face_dofs = np.take_along_axis(
            provisional[face_cells], face_local_nodes, axis=1
        )
        on_boundary = np.zeros(len(unique_keys), dtype=bool)
        on_boundary[provisional_face_dofs] = True

        order = np.concatenate(
            [np.flatnonzero(on_boundary), np.flatnonzero(~on_boundary)]
        )
        new_index = np.empty_like(order)
        new_index[order] = np.arange(len(order))

        self.num_dofs = len(unique_keys)
        self.num_boundary_dofs = int(np.count_nonzero(on_boundary))
        self.cell_dofs = new_index[provisional]
        self.face_dofs = new_index[provisional_face_dofs]

    def _gather_coordinates(self):
        control_points = self.element_map.control_points
        dofs = self.cell_dofs.ravel()
        points = control_points.reshape(-1, self.dimension)
        self.node_coordinates = np.empty((self.num_dofs, self.dimension))
        self.node_coordinates[dofs] = points
        mismatch = np.max(np.abs(self.node_coordinates[dofs] - points))
        if mismatch > NODE_MATCH_TOLERANCE:
            raise MeshError(
                f"curved element maps disagree on shared nodes by {mismatch:0.3g}"
            )

    @property
    def bulk_pattern(self):
        """Sparsity pattern of the N x N bulk matrices."""
        if self._bulk_pattern is None:
            self._bulk_pattern = SparsityPattern(self.cell_dofs, self.num_dofs)
        return self._bulk_pattern

    @property
    def face_pattern(self):
        """Sparsity pattern of the N_Γ x N_Γ surface matrices."""
        if self._face_pattern is None:
            self._face_pattern = SparsityPattern(
                self.face_dofs, self.num_boundary_dofs
            )
        return self._face_pattern

    def interpolate_function(self, func):
        """Nodal interpolant of a function of position.

        Parameters
        ----------
        func : `callable`
            Takes points of shape (num_points, n) and returns values of
            shape (num_points,).

        Returns
        -------
        interpolant : `FeFunction`
        """
        return FeFunction(self, func(self.node_coordinates))

    def __repr__(self):
        return (
            f"FeSpace(degree={self.degree}, num_dofs={self.num_dofs}, "
            f"num_boundary_dofs={self.num_boundary_dofs})"
        )


def build_space(mesh, domain, degree, log=None):
    """Build the degree-k isoparametric finite element space."""
    return FeSpace(mesh=mesh, domain=domain, degree=degree, log=log)


class FeFunction:
    """Finite element function u_h = Σ u_j φ_j.

    Parameters
    ----------
    space : `FeSpace`
        The space.
    coefficients : `numpy.ndarray`
        N nodal values.

    Raises
    ------
    ValueError
        If the number of coefficients is not N.
    """

    def __init__(self, space, coefficients):
        coefficients = np.asarray(coefficients, dtype=float)
        if coefficients.shape != (space.num_dofs,):
            raise ValueError(
                f"coefficients has shape {coefficients.shape}; "
                f"expected ({space.num_dofs},)"
            )
        self.space = space
        self.coefficients = coefficients

    @property
    def boundary_coefficients(self):
        """γ u: the first N_Γ coefficients."""
        return self.coefficients[: self.space.num_boundary_dofs]

    def cell_coefficients(self, cells=slice(None)):
        """Local coefficients, shape (num_cells, n_k)."""
        return self.coefficients[self.space.cell_dofs[cells]]

    def __neg__(self):
        return FeFunction(self.space, -self.coefficients)

    def __sub__(self, other):
        if other.space is not self.space:
            raise ValueError("cannot subtract functions from different spaces")
        return FeFunction(self.space, self.coefficients - other.coefficients)
