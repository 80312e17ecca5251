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
    "Mesh",
    "generate_linear_mesh",
    "refine",
    "order_nodes_boundary_first",
    "mesh_size",
    "read_mesh",
]

import itertools
import logging
import math
import pathlib

import numpy as np

from .errors import MeshError
from .geometry import BOUNDARY_TOLERANCE

# generate_linear_mesh may return a mesh whose size exceeds the target
# by at most this factor.
TARGET_SIZE_SLACK = 1.5

# Child cells of red refinement, as indices into the extended local vertex
# list: the cell vertices followed by the edge midpoints in the order of
# `_local_edges`.
_RED_CHILDREN_2D = np.array([[0, 3, 4], [3, 1, 5], [4, 5, 2], [3, 5, 4]])
_RED_CORNERS_3D = np.array([[0, 4, 5, 6], [4, 1, 7, 8], [5, 7, 2, 9], [6, 8, 9, 3]])
# For each candidate interior diagonal of the inner octahedron:
# (diagonal endpoints, cycle of the other four midpoints around it).
_RED_DIAGONALS_3D = (
    ((4, 9), (5, 6, 8, 7)),
    ((5, 8), (4, 7, 9, 6)),
    ((6, 7), (4, 5, 9, 8)),
)

_log = logging.getLogger(__name__)


def _local_edges(dimension):
    """Local vertex pairs (a, b), a < b, of the edges of an n-simplex."""
    return list(itertools.combinations(range(dimension + 1), 2))


def _local_faces(dimension):
    """Local vertex indices of each face; face f is opposite vertex f."""
    return [
        [i for i in range(dimension + 1) if i != face] for face in range(dimension + 1)
    ]


def _determinants(vertices, cells):
    """det B_T for each cell."""
    corners = vertices[cells]
    edges = corners[:, 1:, :] - corners[:, :1, :]
    # B_T has the edge vectors as columns; det(B) = det(Bᵀ).
    return np.linalg.det(edges)


def _orient(vertices, cells):
    """Swap the last two vertices of negatively oriented cells."""
    cells = cells.copy()
    negative = _determinants(vertices, cells) < 0
    cells[negative, -2:] = cells[negative, -2:][:, ::-1]
    return cells


class Mesh:
    """Conforming simplicial mesh of a polyhedral domain approximation.

    Parameters
    ----------
    vertices : `numpy.ndarray`
        Vertex coordinates, shape (num_vertices, n).
    cells : `numpy.ndarray`
        Vertex indices of each cell, shape (num_cells, n+1).
    boundary_faces : `numpy.ndarray`, optional
        (cell index, local face index) of each boundary face,
        shape (num_boundary_faces, 2). Local face f is the face
        opposite local vertex f. Computed from the cell connectivity
        if omitted.

    Attributes
    ----------
    dimension : `int`
        Spatial dimension n.
    vertices : `numpy.ndarray`
        Vertex coordinates.
    cells : `numpy.ndarray`
        Cell connectivity.
    boundary_faces : `numpy.ndarray`
        Boundary faces.
    boundary_vertex_mask : `numpy.ndarray`
        True for each vertex of a boundary face.
    num_boundary_vertices : `int`
        Number N_Γ of boundary vertices.
    h : `float`
        Mesh size: maximum cell diameter.

    Notes
    -----
    Meshes built by `generate_linear_mesh` and `refine` use boundary-first
    vertex numbering: exactly the vertices with index < N_Γ lie on the
    boundary. See `order_nodes_boundary_first`.
    """

    def __init__(self, vertices, cells, boundary_faces=None):
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        self.cells = np.ascontiguousarray(cells, dtype=np.int64)
        self.dimension = self.vertices.shape[1]
        if self.dimension not in (2, 3):
            raise MeshError(f"dimension={self.dimension} must be 2 or 3")
        if self.cells.ndim != 2 or self.cells.shape[1] != self.dimension + 1:
            raise MeshError(
                f"cells have shape {self.cells.shape}; "
                f"expected (num_cells, {self.dimension + 1})"
            )
        if self.cells.size and (
            self.cells.min() < 0 or self.cells.max() >= len(self.vertices)
        ):
            raise MeshError("cells reference vertices that do not exist")

        if boundary_faces is None:
            boundary_faces = self._find_boundary_faces()
        self.boundary_faces = np.ascontiguousarray(
            boundary_faces, dtype=np.int64
        ).reshape(-1, 2)

        self.boundary_vertex_mask = np.zeros(len(self.vertices), dtype=bool)
        self.boundary_vertex_mask[self.boundary_face_vertices()] = True
        self.num_boundary_vertices = int(np.count_nonzero(self.boundary_vertex_mask))
        self.h = mesh_size(self)

    @property
    def num_vertices(self):
        return len(self.vertices)

    @property
    def num_cells(self):
        return len(self.cells)

    @property
    def is_boundary_first(self):
        """True if exactly the first N_Γ vertices are boundary vertices."""
        return bool(np.all(self.boundary_vertex_mask[: self.num_boundary_vertices]))

    def _face_keys(self):
        """Sorted global vertex indices of every local face,
        shape (num_cells * (n+1), n).
        """
        faces = self.cells[:, _local_faces(self.dimension)]
        return np.sort(faces.reshape(-1, self.dimension), axis=1)

    def face_counts(self):
        """Number of cells sharing each local face,
        shape (num_cells, n+1).
        """
        _, inverse, counts = np.unique(
            self._face_keys(), axis=0, return_inverse=True, return_counts=True
        )
        return counts[inverse.ravel()].reshape(self.num_cells, self.dimension + 1)

    def _find_boundary_faces(self):
        cell_indices, local_faces = np.nonzero(self.face_counts() == 1)
        return np.stack([cell_indices, local_faces], axis=-1)

    def boundary_face_vertices(self):
        """Global vertex indices of each boundary face,
        shape (num_boundary_faces, n).
        """
        local_faces = np.array(_local_faces(self.dimension))
        cells = self.cells[self.boundary_faces[:, 0]]
        local = local_faces[self.boundary_faces[:, 1]]
        return np.take_along_axis(cells, local, axis=1)

    def cell_determinants(self):
        """det B_T for each cell, shape (num_cells,)."""
        return _determinants(self.vertices, self.cells)

    def cell_diameters(self):
        """Maximum pairwise vertex distance of each cell."""
        corners = self.vertices[self.cells]
        pairs = np.array(_local_edges(self.dimension))
        lengths = np.linalg.norm(
            corners[:, pairs[:, 0]] - corners[:, pairs[:, 1]], axis=-1
        )
        return lengths.max(axis=1)

    def inscribed_diameters(self):
        """Diameter of the inscribed ball of each cell."""
        corners = self.vertices[self.cells]
        volumes = np.abs(self.cell_determinants()) / math.factorial(self.dimension)
        face_measure_sum = np.zeros(self.num_cells)
        for face in _local_faces(self.dimension):
            face_corners = corners[:, face]
            edges = face_corners[:, 1:] - face_corners[:, :1]
            if self.dimension == 2:
                face_measure_sum += np.linalg.norm(edges[:, 0], axis=-1)
            else:
                face_measure_sum += 0.5 * np.linalg.norm(
                    np.cross(edges[:, 0], edges[:, 1]), axis=-1
                )
        return 2 * self.dimension * volumes / face_measure_sum

    def quality_constant(self):
        """Quasi-uniformity constant: max cell diameter divided by
        min inscribed-ball diameter.
        """
        return float(self.h / self.inscribed_diameters().min())

    def renumbered(self, new_index_of_old):
        """Return a copy with renumbered vertices.

        Parameters
        ----------
        new_index_of_old : `numpy.ndarray`
            Permutation: entry i is the new index of old vertex i.
        """
        new_index_of_old = np.asarray(new_index_of_old, dtype=np.int64)
        if not np.array_equal(
            np.sort(new_index_of_old), np.arange(self.num_vertices)
        ):
            raise ValueError("new_index_of_old is not a permutation")
        vertices = np.empty_like(self.vertices)
        vertices[new_index_of_old] = self.vertices
        return Mesh(
            vertices=vertices,
            cells=new_index_of_old[self.cells],
            boundary_faces=self.boundary_faces,
        )

    def check_boundary_strip(self, domain):
        """Check that the polyhedral boundary lies in the strip 𝒰_δ.

        The vertices and centroid of every boundary face are tested;
        for the convex domains supported, the centroid is the face point
        furthest from Γ.

        Raises
        ------
        MeshError
            If any tested point is outside the strip.
        """
        face_corners = self.vertices[self.boundary_face_vertices()]
        points = np.concatenate(
            [face_corners.reshape(-1, self.dimension), face_corners.mean(axis=1)]
        )
        worst = np.max(np.abs(domain.signed_distance(points)))
        if worst >= domain.strip_width:
            raise MeshError(
                f"boundary faces leave the strip of width {domain.strip_width}: "
                f"max |d|={worst:0.4g}; target mesh size is too coarse"
            )

    def validate(self, domain, require_boundary_first=True):
        """Audit the mesh invariants.

        Parameters
        ----------
        domain : `Domain`
            The domain being approximated.
        require_boundary_first : `bool`, optional
            Also require boundary-first vertex numbering?

        Raises
        ------
        MeshError
            If any invariant is violated.
        """
        if domain.dimension != self.dimension:
            raise MeshError(
                f"mesh dimension {self.dimension} != domain dimension "
                f"{domain.dimension}"
            )
        determinants = self.cell_determinants()
        if np.any(determinants <= 0):
            cell_index = int(np.argmin(determinants))
            raise MeshError(
                f"cell {cell_index} is not positively oriented: "
                f"det={determinants[cell_index]:0.4g}"
            )
        counts = self.face_counts()
        if np.any(counts > 2):
            raise MeshError("mesh is not conforming: a face is shared by > 2 cells")
        boundary_distance = np.abs(
            domain.signed_distance(self.vertices[self.boundary_vertex_mask])
        )
        if boundary_distance.size and boundary_distance.max() > BOUNDARY_TOLERANCE:
            raise MeshError(
                f"boundary vertex is {boundary_distance.max():0.3g} from the boundary"
            )
        if np.any(np.all(self.boundary_vertex_mask[self.cells], axis=1)):
            raise MeshError("a cell has all of its vertices on the boundary")
        if require_boundary_first and not self.is_boundary_first:
            raise MeshError("vertices are not numbered boundary-first")
        self.check_boundary_strip(domain)

    def write(self, path):
        """Write the mesh in the ASCII mesh format.

        The format is: a line "n nv nc nbf"; nv lines of coordinates;
        nc lines of zero-based vertex indices; nbf lines
        "cell-index local-face-index".
        """
        lines = [
            f"{self.dimension} {self.num_vertices} {self.num_cells} "
            f"{len(self.boundary_faces)}"
        ]
        lines += [" ".join(f"{x:.17g}" for x in vertex) for vertex in self.vertices]
        lines += [" ".join(str(i) for i in cell) for cell in self.cells]
        lines += [f"{cell} {face}" for cell, face in self.boundary_faces]
        pathlib.Path(path).write_text("\n".join(lines) + "\n")

    def __repr__(self):
        return (
            f"Mesh(dimension={self.dimension}, num_vertices={self.num_vertices}, "
            f"num_cells={self.num_cells}, h={self.h:0.6g})"
        )


def read_mesh(path):
    """Read a mesh written by `Mesh.write`.

    Raises
    ------
    ValueError
        If the file does not match the format.
    """
    lines = [
        line.split() for line in pathlib.Path(path).read_text().splitlines() if line
    ]
    try:
        dimension, num_vertices, num_cells, num_faces = (int(v) for v in lines[0])
    except (IndexError, ValueError):
        raise ValueError(f"{path}: header must be 'n nv nc nbf'")
    expected = 1 + num_vertices + num_cells + num_faces
    if len(lines) != expected:
        raise ValueError(f"{path}: found {len(lines)} lines; expected {expected}")
    vertex_lines = lines[1 : 1 + num_vertices]
    cell_lines = lines[1 + num_vertices : 1 + num_vertices + num_cells]
    face_lines = lines[1 + num_vertices + num_cells :]
    vertices = np.array(vertex_lines, dtype=float).reshape(num_vertices, dimension)
    cells = np.array(cell_lines, dtype=np.int64).reshape(num_cells, dimension + 1)
    faces = np.array(face_lines, dtype=np.int64).reshape(num_faces, 2)
    return Mesh(vertices=vertices, cells=cells, boundary_faces=faces)


def mesh_size(mesh):
    """Mesh size h: maximum over cells of the largest vertex distance."""
    if mesh.num_cells == 0:
        return 0.0
    return float(mesh.cell_diameters().max())


def order_nodes_boundary_first(mesh):
    """Renumber vertices so the boundary vertices come first.

    Boundary vertices keep their relative order, as do interior vertices,
    so an already ordered mesh is returned unchanged.

    Parameters
    ----------
    mesh : `Mesh`
        Mesh to renumber.

    Returns
    -------
    ordered : `Mesh`
        The renumbered mesh (``mesh`` itself if already ordered).
    """
    if mesh.is_boundary_first:
        return mesh
    old_index_of_new = np.concatenate(
        [
            np.flatnonzero(mesh.boundary_vertex_mask),
            np.flatnonzero(~mesh.boundary_vertex_mask),
        ]
    )
    new_index_of_old = np.empty_like(old_index_of_new)
    new_index_of_old[old_index_of_new] = np.arange(len(old_index_of_new))
    return mesh.renumbered(new_index_of_old)


def _disk_lattice_mesh(domain, num_layers):
    """Hexagonal lattice mesh of the unit disk with ``num_layers`` rings.

    Ring i has 6 i vertices placed on the hexagon of radius i / m and then
    pushed radially onto the circle of the same radius; ring m lies on Γ.
    With one ring this is a fan of six triangles around the origin.
    """
    m = num_layers
    corners = np.array(
        [[math.cos(s * math.pi / 3), math.sin(s * math.pi / 3)] for s in range(7)]
    )

    def index(ring, sector, j):
        if ring == 0:
            return 0
        return 1 + 3 * ring * (ring - 1) + (sector * ring + j) % (6 * ring)

    vertices = [np.zeros(2)]
    for ring in range(1, m + 1):
        radius = ring / m
        for sector in range(6):
            for j in range(ring):
                t = j / ring
                point = radius * ((1 - t) * corners[sector] + t * corners[sector + 1])
                vertices.append(point * radius / np.linalg.norm(point))
    vertices = np.array(vertices)
    outer = slice(1 + 3 * m * (m - 1), None)
    vertices[outer] = domain.closest_point(vertices[outer])

    cells = []
    for ring in range(1, m + 1):
        for sector in range(6):
            outer_ids = [index(ring, sector, j) for j in range(ring + 1)]
            inner_ids = [index(ring - 1, sector, j) for j in range(ring)]
            for j in range(ring):
                cells.append((outer_ids[j], outer_ids[j + 1], inner_ids[j]))
            for j in range(ring - 1):
                cells.append((inner_ids[j], outer_ids[j + 1], inner_ids[j + 1]))
    cells = _orient(vertices, np.array(cells))
    return order_nodes_boundary_first(Mesh(vertices=vertices, cells=cells))


def _ball_octahedron_mesh(domain):
    """Eight tetrahedra joining the origin to the faces of the octahedron
    inscribed in the unit sphere.
    """
    vertices = np.vstack([np.zeros(3), np.eye(3), -np.eye(3)])
    cells = []
    for signs in itertools.product((0, 1), repeat=3):
        cells.append([0] + [1 + axis + 3 * sign for axis, sign in enumerate(signs)])
    cells = _orient(vertices, np.array(cells))
    return order_nodes_boundary_first(Mesh(vertices=vertices, cells=cells))


def generate_linear_mesh(domain, target_h):
    """Generate a quasi-uniform linear mesh of ``domain``.

    The 2D family is the hexagonal ring lattice of the disk, parameterized
    by its number of rings; the 3D family is the octahedral ball refined
    uniformly. The member whose size is closest to ``target_h``
    (without exceeding 1.5 ``target_h``) is returned.

    Parameters
    ----------
    domain : `Domain`
        Domain to mesh.
    target_h : `float`
        Desired mesh size; must be positive.

    Returns
    -------
    mesh : `Mesh`
        A valid mesh with boundary-first numbering.

    Raises
    ------
    ValueError
        If ``target_h`` is not positive.
    MeshError
        If the mesh violates an invariant, e.g. its boundary faces are
        not contained in the strip 𝒰_δ.
    """
    if not target_h > 0:
        raise ValueError(f"target_h={target_h} must be positive")

    previous = None
    if domain.dimension == 2:
        num_layers = max(1, math.floor(1 / target_h))
        mesh = _disk_lattice_mesh(domain, num_layers)
        while mesh.h > target_h:
            previous = mesh
            num_layers += 1
            mesh = _disk_lattice_mesh(domain, num_layers)
    else:
        mesh = _ball_octahedron_mesh(domain)
        while mesh.h > target_h:
            previous = mesh
            mesh = refine(mesh, domain)

    if (
        previous is not None
        and previous.h <= TARGET_SIZE_SLACK * target_h
        and previous.h - target_h < target_h - mesh.h
    ):
        mesh = previous

    mesh.validate(domain)
    _log.debug(f"Generated {mesh} for target_h={target_h}")
    return mesh


def refine(mesh, domain):
    """Uniform red refinement with boundary projection.

    Each triangle is split into 4 and each tetrahedron into 8;
    tetrahedra use the shortest interior diagonal of the inner octahedron.
    Midpoints of boundary edges are projected onto Γ.

    Parameters
    ----------
    mesh : `Mesh`
        Mesh to refine.
    domain : `Domain`
        The domain, used to project new boundary vertices.

    Returns
    -------
    refined : `Mesh`
        The refined mesh, numbered boundary-first.

    Raises
    ------
    MeshError
        If a cell is inverted after projection.
    """
    dimension = mesh.dimension
    num_vertices = mesh.num_vertices
    pairs = np.array(_local_edges(dimension))
    cell_edges = np.sort(mesh.cells[:, pairs], axis=-1)
    edges, inverse = np.unique(
        cell_edges.reshape(-1, 2), axis=0, return_inverse=True
    )
    inverse = inverse.reshape(mesh.num_cells, len(pairs))

    # Edges of boundary faces get projected midpoints.
    face_vertices = mesh.boundary_face_vertices()
    face_pairs = np.array(_local_edges(dimension - 1))
    boundary_edges = np.sort(face_vertices[:, face_pairs].reshape(-1, 2), axis=-1)
    edge_keys = edges[:, 0] * num_vertices + edges[:, 1]
    boundary_keys = boundary_edges[:, 0] * num_vertices + boundary_edges[:, 1]
    on_boundary = np.isin(edge_keys, boundary_keys)

    midpoints = mesh.vertices[edges].mean(axis=1)
    projected = midpoints.copy()
    projected[on_boundary] = domain.closest_point(midpoints[on_boundary])
    affine_vertices = np.vstack([mesh.vertices, midpoints])
    vertices = np.vstack([mesh.vertices, projected])

    extended = np.hstack([mesh.cells, num_vertices + inverse])
    if dimension == 2:
        children = extended[:, _RED_CHILDREN_2D]
    else:
        corners = extended[:, _RED_CORNERS_3D]
        diagonal_lengths = np.stack(
            [
                np.linalg.norm(
                    vertices[extended[:, a]] - vertices[extended[:, b]], axis=-1
                )
                for (a, b), _ in _RED_DIAGONALS_3D
            ],
            axis=-1,
        )
        choice = np.argmin(diagonal_lengths, axis=-1)
        templates = np.array(
            [
                [[a, b, cycle[i], cycle[(i + 1) % 4]] for i in range(4)]
                for (a, b), cycle in _RED_DIAGONALS_3D
            ]
        )
        inner_local = templates[choice].reshape(mesh.num_cells, 16)
        inner = np.take_along_axis(extended, inner_local, axis=1).reshape(
            mesh.num_cells, 4, 4
        )
        children = np.concatenate([corners, inner], axis=1)

    cells = _orient(affine_vertices, children.reshape(-1, dimension + 1))
    determinants = _determinants(vertices, cells)
    if np.any(determinants <= 0):
        bad = int(np.argmin(determinants))
        raise MeshError(
            f"refined cell {bad} (child of cell {bad // children.shape[1]}) "
            f"is inverted after boundary projection: det={determinants[bad]:0.4g}"
        )
    refined = order_nodes_boundary_first(Mesh(vertices=vertices, cells=cells))
    _log.debug(f"Refined {mesh} to {refined}")
    return refined
