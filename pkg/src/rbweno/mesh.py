"""Uniform structured meshes in 1D (intervals) and 2D (axis-aligned quads).

Elements are numbered row-major (x fastest). Faces carry a left element, a
right element (or -1 on the boundary), and a unit normal that points from
the left element toward the right one; boundary normals point outward.
Meshes are immutable after construction (arrays are frozen).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BOUNDARY_TAGS = ("inflow", "outflow", "wall", "dirichlet_timed", "periodic")

# local side ids: 1D {0: left, 1: right}; 2D {0: west, 1: east, 2: south, 3: north}
SIDE_NORMALS_1D = np.array([[-1.0], [1.0]])
SIDE_NORMALS_2D = np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]])


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class Mesh:
    """Uniform tensor-product mesh with adjacency and patch tables."""

    dim: int
    shape: tuple[int, ...]          # elements per axis
    origin: np.ndarray              # lower-left corner
    spacing: np.ndarray             # cell size per axis
    periodic: tuple[bool, ...]
    vertices: np.ndarray            # (n_vertices, dim)
    elem_vertices: np.ndarray       # (E, 2**dim) corner ids, tensor order
    elem_centers: np.ndarray        # (E, dim)
    elem_grid: np.ndarray           # (E, dim) integer lattice coordinates
    h_e: np.ndarray                 # (E,) max side length per element
    face_left: np.ndarray           # (nF,)
    face_right: np.ndarray          # (nF,), -1 for boundary faces
    face_side_left: np.ndarray      # (nF,) local side id in the left element
    face_side_right: np.ndarray     # (nF,) local side id in the right element
    face_normal: np.ndarray         # (nF, dim)
    face_center: np.ndarray         # (nF, dim)
    face_measure: np.ndarray        # (nF,) edge length (1.0 in 1D)
    face_tag: tuple[str | None, ...]  # None on interior faces
    neighbors: tuple[np.ndarray, ...]  # S^e (face neighbors, includes e)
    patches: tuple[np.ndarray, ...]    # vertex patch of e, includes e
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def num_elements(self) -> int:
        return self.elem_centers.shape[0]

    @property
    def num_faces(self) -> int:
        return self.face_left.shape[0]

    @property
    def interior_faces(self) -> np.ndarray:
        return np.flatnonzero(self.face_right >= 0)

    @property
    def boundary_faces(self) -> np.ndarray:
        return np.flatnonzero(self.face_right < 0)

    @property
    def element_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def domain_volume(self) -> float:
        return float(np.prod(self.spacing * np.asarray(self.shape)))

    def element_bounds(self, e: int) -> np.ndarray:
        lo = self.origin + self.elem_grid[e] * self.spacing
        return np.stack([lo, lo + self.spacing])

    def to_reference(self, e: int, x: np.ndarray) -> np.ndarray:
        """Map physical points into the element's [-1, 1]^d frame."""
        return (np.asarray(x) - self.elem_centers[e]) * (2.0 / self.spacing)

    def to_physical(self, e: int, xi: np.ndarray) -> np.ndarray:
        return self.elem_centers[e] + 0.5 * self.spacing * np.asarray(xi)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


def _wrap_offset(delta: np.ndarray, extent: np.ndarray, periodic: np.ndarray) -> np.ndarray:
    """Wrap lattice offsets into the shortest periodic image."""
    delta = delta.copy()
    for ax in range(delta.shape[-1]):
        if periodic[ax]:
            n = extent[ax]
            delta[..., ax] = (delta[..., ax] + n // 2) % n - n // 2
    return delta


def build_uniform_line(
    x0: float,
    x1: float,
    E: int,
    periodic: bool = False,
    tagger=None,
) -> Mesh:
    """Uniform interval mesh with E cells on (x0, x1).

    `tagger(midpoint, outward_normal) -> str` assigns boundary tags;
    defaults to "outflow" everywhere.
    """
    if E < 2:
        raise MeshError(f"need at least 2 elements, got {E}")
    if not x1 > x0:
        raise MeshError(f"degenerate interval [{x0}, {x1}]")
    return _build((float(x0),), (float(x1),), (int(E),), (bool(periodic),), tagger)


def build_uniform_quad(
    x0: float,
    y0: float,
    x1: float,
    y1: float,
    Ex: int,
    Ey: int,
    periodic: bool | tuple[bool, bool] = False,
    tagger=None,
) -> Mesh:
    """Uniform quadrilateral mesh with Ex*Ey congruent cells, row-major ids."""
    if Ex < 1 or Ey < 1:
        raise MeshError(f"nonpositive element counts ({Ex}, {Ey})")
    if not (x1 > x0 and y1 > y0):
        raise MeshError("degenerate box")
    if isinstance(periodic, bool):
        periodic = (periodic, periodic)
    return _build(
        (float(x0), float(y0)),
        (float(x1), float(y1)),
        (int(Ex), int(Ey)),
        (bool(periodic[0]), bool(periodic[1])),
        tagger,
    )


def _build(lo, hi, shape, periodic, tagger) -> Mesh:
    dim = len(shape)
    origin = np.array(lo)
    spacing = (np.array(hi) - origin) / np.array(shape)
    exts = np.array(shape)

    # vertex lattice (full, even when periodic: coordinates are still distinct)
    axes = [np.linspace(lo[a], hi[a], shape[a] + 1) for a in range(dim)]
    if dim == 1:
        vertices = axes[0][:, None]
        grid = np.arange(shape[0])[:, None]
        elem_vertices = np.stack([grid[:, 0], grid[:, 0] + 1], axis=1)
    else:
        X, Y = np.meshgrid(axes[0], axes[1], indexing="xy")
        vertices = np.stack([X.ravel(), Y.ravel()], axis=1)
        ix, iy = np.meshgrid(np.arange(shape[0]), np.arange(shape[1]), indexing="xy")
        grid = np.stack([ix.ravel(), iy.ravel()], axis=1)
        nvx = shape[0] + 1
        v00 = grid[:, 1] * nvx + grid[:, 0]
        elem_vertices = np.stack([v00, v00 + 1, v00 + nvx, v00 + nvx + 1], axis=1)

    centers = origin + (grid + 0.5) * spacing
    E = centers.shape[0]
    h_e = np.full(E, float(spacing.max()))

    def eid(g):
        g = np.asarray(g)
        if dim == 1:
            return int(g[0])
        return int(g[1]) * shape[0] + int(g[0])

    # faces, axis by axis
    f_left, f_right, f_sl, f_sr = [], [], [], []
    f_normal, f_center, f_tag, f_meas = [], [], [], []

    for ax in range(dim):
        n_planes = shape[ax] if periodic[ax] else shape[ax] + 1
        lateral = range(shape[1 - ax]) if dim == 2 else [0]
        side_minus, side_plus = (2 * ax, 2 * ax + 1) if dim == 2 else (0, 1)
        for plane in range(n_planes):
            for lat in lateral:
                gm = [0] * dim
                gm[ax] = plane - 1
                if dim == 2:
                    gm[1 - ax] = lat
                gp = list(gm)
                gp[ax] = plane
                center = origin.copy().astype(float)
                center[ax] += plane * spacing[ax]
                if dim == 2:
                    center[1 - ax] += (lat + 0.5) * spacing[1 - ax]
                normal = np.zeros(dim)
                normal[ax] = 1.0
                measure = spacing[1 - ax] if dim == 2 else 1.0

                if periodic[ax]:
                    gm[ax] %= shape[ax]
                    left, right = eid(gm), eid(gp)
                    tag = None
                elif plane == 0:
                    left, right = eid(gp), -1
                    normal = -normal
                    tag = "boundary"
                elif plane == shape[ax]:
                    left, right = eid(gm), -1
                    tag = "boundary"
                else:
                    left, right = eid(gm), eid(gp)
                    tag = None

                if right == -1:
                    sl = side_minus if normal[ax] < 0 else side_plus
                    sr = sl
                    tag = tagger(center, normal) if tagger else "outflow"
                else:
                    sl, sr = side_plus, side_minus
                f_left.append(left)
                f_right.append(right)
                f_sl.append(sl)
                f_sr.append(sr)
                f_normal.append(normal)
                f_center.append(center)
                f_tag.append(tag)
                f_meas.append(measure)

    face_left = np.array(f_left, dtype=np.int64)
    face_right = np.array(f_right, dtype=np.int64)

    # von Neumann neighbors (face-sharing) and vertex patches via lattice offsets
    neighbors, patches = [], []
    offs_face = [d for d in np.eye(dim, dtype=int)] + [-d for d in np.eye(dim, dtype=int)]
    offs_patch = (
        [np.array([dx]) for dx in (-1, 0, 1)]
        if dim == 1
        else [np.array([dx, dy]) for dy in (-1, 0, 1) for dx in (-1, 0, 1)]
    )

    def lattice_lookup(g):
        g = np.asarray(g).copy()
        for a in range(dim):
            if periodic[a]:
                g[a] %= shape[a]
            elif g[a] < 0 or g[a] >= shape[a]:
                return None
        return eid(g)

    for e in range(E):
        own = grid[e]
        nb = {e}
        for off in offs_face:
            j = lattice_lookup(own + off)
            if j is not None:
                nb.add(j)
        pt = set()
        for off in offs_patch:
            j = lattice_lookup(own + off)
            if j is not None:
                pt.add(j)
        neighbors.append(np.array(sorted(nb), dtype=np.int64))
        patches.append(np.array(sorted(pt), dtype=np.int64))

    return Mesh(
        dim=dim,
        shape=tuple(shape),
        origin=_freeze(origin.astype(float)),
        spacing=_freeze(spacing.astype(float)),
        periodic=tuple(periodic),
        vertices=_freeze(vertices.astype(float)),
        elem_vertices=_freeze(elem_vertices.astype(np.int64)),
        elem_centers=_freeze(centers),
        elem_grid=_freeze(grid.astype(np.int64)),
        h_e=_freeze(h_e),
        face_left=_freeze(face_left),
        face_right=_freeze(face_right),
        face_side_left=_freeze(np.array(f_sl, dtype=np.int64)),
        face_side_right=_freeze(np.array(f_sr, dtype=np.int64)),
        face_normal=_freeze(np.array(f_normal)),
        face_center=_freeze(np.array(f_center)),
        face_measure=_freeze(np.array(f_meas)),
        face_tag=tuple(f_tag),
        neighbors=tuple(neighbors),
        patches=tuple(patches),
    )


def von_neumann_neighbors(mesh: Mesh, e: int) -> np.ndarray:
    """Indices of e and all face-sharing elements."""
    if not 0 <= e < mesh.num_elements:
        raise MeshError(f"element index {e} out of range")
    return mesh.neighbors[e]


def element_patch(mesh: Mesh, e: int) -> np.ndarray:
    """Indices of all elements sharing at least one vertex with e (incl. e)."""
    if not 0 <= e < mesh.num_elements:
        raise MeshError(f"element index {e} out of range")
    return mesh.patches[e]


def neighbor_offset(mesh: Mesh, e: int, e_nbr: int) -> np.ndarray:
    """Lattice offset from neighbor to e in units of one cell (periodic-aware)."""
    delta = mesh.elem_grid[e] - mesh.elem_grid[e_nbr]
    return _wrap_offset(
        delta.astype(np.int64),
        np.asarray(mesh.shape),
        np.asarray(mesh.periodic),
    )
