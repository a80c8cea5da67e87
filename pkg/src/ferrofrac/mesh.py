"""Unstructured triangular meshes with subdomain and boundary tags.

Subdomain names follow the convention "vacuum", "solid", "wire_<k>",
"notch_<k>" (1-based k).  Boundary edge tags are "outer_dirichlet",
"solid_dirichlet" and "solid_neumann".  Coordinates are millimetres.
A mesh is immutable after construction; derived meshes (P2 uplift) are
new objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, TagError

BOUNDARY_TAGS = ("outer_dirichlet", "solid_dirichlet", "solid_neumann")
REGION_KINDS = ("vacuum", "solid", "wire", "notch")

_MIN_AREA = 1e-14  # mm^2, zero-area rejection threshold


def region_kind(name):
    """'wire_3' -> 'wire'; unknown prefixes raise TagError."""
    kind = name.split("_")[0]
    if kind not in REGION_KINDS:
        raise TagError(f"unknown region name {name!r}")
    return kind


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray          # (n, 2) float
    triangles: np.ndarray      # (m, 3) or (m, 6) int
    cell_regions: np.ndarray   # (m,) int, index into region_names
    region_names: tuple        # e.g. ("vacuum", "solid", "wire_1")
    boundary_edges: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=int))
    edge_tags: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    edge_tag_names: tuple = BOUNDARY_TAGS

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.ascontiguousarray(self.nodes, dtype=float))
        object.__setattr__(self, "triangles", np.ascontiguousarray(self.triangles, dtype=int))
        object.__setattr__(self, "cell_regions", np.asarray(self.cell_regions, dtype=int))
        object.__setattr__(self, "boundary_edges", np.asarray(self.boundary_edges, dtype=int).reshape(-1, 2))
        object.__setattr__(self, "edge_tags", np.asarray(self.edge_tags, dtype=int))
        self.validate()

    # -- invariants --------------------------------------------------------

    def validate(self):
        n = self.nodes.shape[0]
        tris = self.triangles
        if tris.size and (tris.min() < 0 or tris.max() >= n):
            raise GeometryError("triangle references node index out of range")
        if self.boundary_edges.size and (
            self.boundary_edges.min() < 0 or self.boundary_edges.max() >= n
        ):
            raise GeometryError("boundary edge references node index out of range")
        if self.cell_regions.shape[0] != tris.shape[0]:
            raise GeometryError("one subdomain tag per cell required")
        if self.cell_regions.size and (
            self.cell_regions.min() < 0 or self.cell_regions.max() >= len(self.region_names)
        ):
            raise TagError("cell region index outside region table")
        for name in self.region_names:
            region_kind(name)
        a = self.signed_areas()
        if np.any(a <= _MIN_AREA):
            bad = int(np.argmin(a))
            raise GeometryError(f"degenerate triangle {bad} (signed area {a[bad]:.3e})")
        if self.edge_tags.shape[0] != self.boundary_edges.shape[0]:
            raise GeometryError("edge tag count mismatch")

    @property
    def element_order(self):
        return 1 if self.triangles.shape[1] == 3 else 2

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_cells(self):
        return self.triangles.shape[0]

    def signed_areas(self):
        p = self.nodes[self.triangles[:, :3]]
        return 0.5 * (
            (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
            - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
        )

    # -- region helpers ----------------------------------------------------

    def region_id(self, name):
        try:
            return self.region_names.index(name)
        except ValueError:
            raise TagError(f"region {name!r} not in mesh") from None

    def cells_of(self, name):
        """Cell indices of one named region."""
        return np.flatnonzero(self.cell_regions == self.region_id(name))

    def cells_of_kind(self, kind):
        """Cell indices of all regions of a kind ('solid', 'wire', ...)."""
        ids = [i for i, nm in enumerate(self.region_names) if region_kind(nm) == kind]
        return np.flatnonzero(np.isin(self.cell_regions, ids))

    def region_area(self, name):
        return float(self.signed_areas()[self.cells_of(name)].sum())

    def cell_kinds(self):
        kinds = np.array([region_kind(nm) for nm in self.region_names])
        return kinds[self.cell_regions]

    # -- boundary helpers ----------------------------------------------------

    def edges_of_tag(self, tag):
        try:
            t = self.edge_tag_names.index(tag)
        except ValueError:
            raise TagError(f"boundary tag {tag!r} unknown") from None
        return self.boundary_edges[self.edge_tags == t]

    def boundary_nodes(self, tag):
        """Unique node ids on edges with the given tag (plus P2 midnodes)."""
        edges = self.edges_of_tag(tag)
        nodes = set(edges.ravel().tolist())
        if self.element_order == 2 and edges.size:
            mids = self._edge_midnode_table()
            for a, b in edges:
                key = (min(a, b), max(a, b))
                if key in mids:
                    nodes.add(mids[key])
        return np.array(sorted(nodes), dtype=int)

    def _edge_midnode_table(self):
        table = {}
        t = self.triangles
        local = ((0, 1, 3), (1, 2, 4), (2, 0, 5))
        for c in range(t.shape[0]):
            for i, j, m in local:
                a, b = t[c, i], t[c, j]
                table[(min(a, b), max(a, b))] = t[c, m]
        return table

    def outer_loops_closed(self):
        """Every node of the outer boundary has edge degree 2."""
        edges = self.edges_of_tag("outer_dirichlet")
        if edges.size == 0:
            return True
        _, counts = np.unique(edges.ravel(), return_counts=True)
        return bool(np.all(counts == 2))

    # -- derived meshes ------------------------------------------------------

    def to_p2(self):
        """Insert edge midnodes; straight-sided quadratic cells."""
        if self.element_order == 2:
            return self
        tris = self.triangles
        edge_nodes = {}
        coords = [self.nodes]
        nn = self.n_nodes

        def midnode(a, b):
            nonlocal nn
            key = (min(a, b), max(a, b))
            if key not in edge_nodes:
                edge_nodes[key] = nn
                coords.append(0.5 * (self.nodes[a] + self.nodes[b])[None, :])
                nn += 1
            return edge_nodes[key]

        t6 = np.empty((tris.shape[0], 6), dtype=int)
        t6[:, :3] = tris
        for c in range(tris.shape[0]):
            a, b, d = tris[c]
            t6[c, 3] = midnode(a, b)
            t6[c, 4] = midnode(b, d)
            t6[c, 5] = midnode(d, a)
        return Mesh(
            np.vstack(coords),
            t6,
            self.cell_regions,
            self.region_names,
            self.boundary_edges,
            self.edge_tags,
            self.edge_tag_names,
        )


def orient_ccw(nodes, tris):
    """Reorder triangle nodes so all signed areas are positive."""
    p = nodes[tris[:, :3]]
    a = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (
        p[:, 2, 0] - p[:, 0, 0]
    ) * (p[:, 1, 1] - p[:, 0, 1])
    flip = a < 0
    tris = tris.copy()
    tris[flip, 1], tris[flip, 2] = tris[flip, 2].copy(), tris[flip, 1].copy()
    return tris


def hull_edges(tris):
    """Undirected edges appearing in exactly one triangle, as (k, 2) array."""
    e = np.vstack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    e = np.sort(e, axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    return uniq[counts == 1]
