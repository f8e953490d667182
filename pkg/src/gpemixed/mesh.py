"""Conforming triangulations of the square (-L, L)^2 with facet topology.

Meshes are built once (Friedrichs-Keller pattern, optionally point-symmetric
about the origin) and refined uniformly by midpoint subdivision ("red"
refinement).  All arrays are frozen after construction; a TriMesh is safe to
share read-only across threads.

Orientation conventions
-----------------------
Triangles are stored counter-clockwise.  A facet is the sorted vertex pair
(a, b) with a < b; its global unit normal is the 90-degree counter-clockwise
rotation of (v_b - v_a).  facet_sign[t, i] is +1 when that global normal
points out of triangle t across its i-th facet (the one opposite local
vertex i), -1 otherwise.
"""

import numpy as np

from .errors import ConfigurationError

__all__ = ["TriMesh", "RefinementInfo", "friedrichs_keller", "red_refine", "mesh_size"]


class RefinementInfo:
    """Link from a refined mesh back to its parent.

    child_to_parent maps each fine triangle to its coarse triangle;
    facet_midpoint maps each coarse facet to the fine vertex at its midpoint.
    """

    def __init__(self, parent, child_to_parent, facet_midpoint):
        self.parent = parent
        self.child_to_parent = child_to_parent
        self.facet_midpoint = facet_midpoint


class TriMesh:
    """Triangulation with full facet topology and geometric quantities.

    Attributes
    ----------
    vertices : (nv, 2) float array
    triangles : (nt, 3) int array, counter-clockwise
    facets : (nf, 2) int array, lower vertex index first
    facet_of_triangle : (nt, 3) int array, facet opposite local vertex 0/1/2
    facet_triangles : (nf, 2) int array, incident triangles (-1 if boundary)
    facet_sign : (nt, 3) float array, +1/-1 per orientation convention
    level : refinement depth from the initial mesh
    parent : RefinementInfo or None
    """

    def __init__(self, vertices, triangles, level=0, parent=None):
        vertices = np.ascontiguousarray(vertices, dtype=float)
        triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        self.vertices = vertices
        self.triangles = triangles
        self.level = level
        self.parent = parent
        self._build_topology()
        self._build_geometry()
        for arr in (self.vertices, self.triangles, self.facets,
                    self.facet_of_triangle, self.facet_triangles, self.facet_sign,
                    self.areas, self.facet_lengths, self.centroids):
            arr.setflags(write=False)

    # -- construction helpers -------------------------------------------------

    def _build_topology(self):
        tri = self.triangles
        nt = len(tri)
        nv = len(self.vertices)
        # local facet i is the edge opposite local vertex i, traversed in
        # counter-clockwise order: (v1,v2), (v2,v0), (v0,v1)
        edges = tri[:, [[1, 2], [2, 0], [0, 1]]]
        lo = edges.min(axis=2)
        hi = edges.max(axis=2)
        keys = lo.astype(np.int64) * nv + hi
        unique_keys, inverse = np.unique(keys.ravel(), return_inverse=True)
        self.facets = np.column_stack([unique_keys // nv, unique_keys % nv])
        self.facet_of_triangle = inverse.reshape(nt, 3).astype(np.int64)
        # +1 when the CCW traversal runs from the higher to the lower vertex
        # index, i.e. against the facet's canonical (a, b) direction.
        self.facet_sign = np.where(edges[:, :, 0] > edges[:, :, 1], 1.0, -1.0)

        nf = len(self.facets)
        order = np.argsort(inverse.ravel(), kind="stable")
        tri_of_slot = order // 3
        counts = np.bincount(inverse.ravel(), minlength=nf)
        if counts.max() > 2:
            raise ConfigurationError("facet shared by more than two triangles")
        facet_triangles = np.full((nf, 2), -1, dtype=np.int64)
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        facet_triangles[:, 0] = tri_of_slot[starts]
        two = counts == 2
        facet_triangles[two, 1] = tri_of_slot[starts[two] + 1]
        self.facet_triangles = facet_triangles

    def _build_geometry(self):
        coords = self.vertices[self.triangles]
        d1 = coords[:, 1] - coords[:, 0]
        d2 = coords[:, 2] - coords[:, 0]
        self.areas = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        fv = self.vertices[self.facets]
        self.facet_lengths = np.linalg.norm(fv[:, 1] - fv[:, 0], axis=1)
        self.centroids = coords.mean(axis=1)

    # -- queries ---------------------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def n_facets(self):
        return len(self.facets)

    def corner_coords(self):
        """Corner coordinates per triangle, shape (nt, 3, 2)."""
        return self.vertices[self.triangles]

    def tri_facet_lengths(self):
        """Lengths of the three facets of every triangle, shape (nt, 3)."""
        return self.facet_lengths[self.facet_of_triangle]

    def boundary_facets(self):
        """Indices of facets with a single incident triangle."""
        return np.flatnonzero(self.facet_triangles[:, 1] < 0)

    def boundary_vertices(self):
        """Indices of vertices lying on a boundary facet."""
        return np.unique(self.facets[self.boundary_facets()])

    def interior_vertices(self):
        """Indices of vertices not on the boundary."""
        mask = np.ones(self.n_vertices, dtype=bool)
        mask[self.boundary_vertices()] = False
        return np.flatnonzero(mask)

    def export_text(self, stream):
        """Write a plain-text dump: vertex table, then triangle table."""
        stream.write(f"vertices {self.n_vertices}\n")
        for x, y in self.vertices:
            stream.write(f"{float(x)!r} {float(y)!r}\n")
        stream.write(f"triangles {self.n_triangles}\n")
        for a, b, c in self.triangles:
            stream.write(f"{a} {b} {c}\n")


def friedrichs_keller(L, n, symmetric=False):
    """Triangulate (-L, L)^2 into n x n squares split by one diagonal each.

    With ``symmetric`` set (n must be even), the diagonals in the lower-right
    and upper-left quadrants are flipped so the mesh is point-symmetric about
    the origin.
    """
    if L <= 0:
        raise ConfigurationError(f"domain half-width must be positive, got {L}")
    if n < 1:
        raise ConfigurationError(f"cells per axis must be >= 1, got {n}")
    if symmetric and n % 2 != 0:
        raise ConfigurationError("point-symmetric layout requires an even cell count")

    coords_1d = np.linspace(-L, L, n + 1)
    X, Y = np.meshgrid(coords_1d, coords_1d, indexing="xy")
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    ii = ii.ravel()
    jj = jj.ravel()
    ll = jj * (n + 1) + ii
    lr = ll + 1
    ul = ll + (n + 1)
    ur = ul + 1

    if symmetric:
        anti = (ii >= n // 2) != (jj >= n // 2)
    else:
        anti = np.zeros(ii.shape, dtype=bool)

    tris = np.empty((len(ii), 2, 3), dtype=np.int64)
    # diagonal lower-left -> upper-right
    tris[~anti, 0] = np.column_stack([ll, lr, ur])[~anti]
    tris[~anti, 1] = np.column_stack([ll, ur, ul])[~anti]
    # diagonal lower-right -> upper-left
    tris[anti, 0] = np.column_stack([ll, lr, ul])[anti]
    tris[anti, 1] = np.column_stack([lr, ur, ul])[anti]

    return TriMesh(vertices, tris.reshape(-1, 3), level=0, parent=None)


def red_refine(m):
    """Split every triangle into 4 congruent children via edge midpoints.

    Midpoint vertices are indexed by facet, so the refined mesh is conforming
    by construction (no floating-point coordinate matching involved).
    """
    nv = m.n_vertices
    midpoints = m.vertices[m.facets].mean(axis=1)
    vertices = np.vstack([m.vertices, midpoints])
    facet_midpoint = nv + np.arange(m.n_facets, dtype=np.int64)

    tri = m.triangles
    mids = facet_midpoint[m.facet_of_triangle]  # m0, m1, m2 opposite v0, v1, v2
    v0, v1, v2 = tri[:, 0], tri[:, 1], tri[:, 2]
    m0, m1, m2 = mids[:, 0], mids[:, 1], mids[:, 2]

    children = np.empty((m.n_triangles, 4, 3), dtype=np.int64)
    children[:, 0] = np.column_stack([v0, m2, m1])
    children[:, 1] = np.column_stack([v1, m0, m2])
    children[:, 2] = np.column_stack([v2, m1, m0])
    children[:, 3] = np.column_stack([m0, m1, m2])

    child_to_parent = np.repeat(np.arange(m.n_triangles, dtype=np.int64), 4)
    info = RefinementInfo(m, child_to_parent, facet_midpoint)
    return TriMesh(vertices, children.reshape(-1, 3), level=m.level + 1, parent=info)


def mesh_size(m):
    """Maximum triangle diameter; for triangles this is the longest edge."""
    return float(m.facet_lengths.max())
