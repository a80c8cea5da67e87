"""Built-in mesh generators for the shipped boundary-value problems.

Three families:

* structured rectangles (tests, manufactured-solution studies),
* a vacuum disk with an iron annulus and winding wires (coil problem),
* a vacuum disk with a notched beam and two wires, and a notched/wired
  square plate.

The circular generators sample every material interface with explicit
points and triangulate with Delaunay, so subdomain boundaries are resolved
polygons and subdomain areas converge to the analytic ones.  The coil
generator builds the upper half plane and mirrors it, which makes the node
set and the triangulation exactly symmetric under y -> -y; discrete fields
then inherit the symmetry class of the sources to solver precision.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import Delaunay

from .errors import GeometryError
from .mesh import BOUNDARY_TAGS, Mesh, hull_edges, orient_ccw

_AXIS_EPS = 1e-12


# ---------------------------------------------------------------------------
# structured rectangles

def structured_rectangle(nx, ny, x0=0.0, y0=0.0, lx=1.0, ly=1.0,
                         region="solid", boundary_tag="solid_dirichlet"):
    """Regular triangulation of [x0, x0+lx] x [y0, y0+ly], alternating diagonals."""
    xs = np.linspace(x0, x0 + lx, nx + 1)
    ys = np.linspace(y0, y0 + ly, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.stack([X.ravel(), Y.ravel()], axis=1)

    def nid(i, j):
        return i * (ny + 1) + j

    tris = []
    for i in range(nx):
        for j in range(ny):
            a, b = nid(i, j), nid(i + 1, j)
            c, d = nid(i + 1, j + 1), nid(i, j + 1)
            if (i + j) % 2 == 0:
                tris += [[a, b, c], [a, c, d]]
            else:
                tris += [[a, b, d], [b, c, d]]
    tris = np.array(tris, dtype=int)

    edges, tags = [], []
    t = BOUNDARY_TAGS.index(boundary_tag)
    for i in range(nx):
        edges += [[nid(i, 0), nid(i + 1, 0)], [nid(i, ny), nid(i + 1, ny)]]
        tags += [t, t]
    for j in range(ny):
        edges += [[nid(0, j), nid(0, j + 1)], [nid(nx, j), nid(nx, j + 1)]]
        tags += [t, t]
    return Mesh(nodes, tris, np.zeros(len(tris), dtype=int), (region,),
                np.array(edges), np.array(tags))


def unit_square(n, boundary_tag="solid_dirichlet"):
    return structured_rectangle(n, n, boundary_tag=boundary_tag)


# ---------------------------------------------------------------------------
# point-cloud helpers

def _even(n):
    n = int(np.ceil(n))
    return n + (n % 2)


def _ring(cx, cy, r, n, offset=0.0):
    th = offset + 2 * np.pi * np.arange(n) / n
    return np.stack([cx + r * np.cos(th), cy + r * np.sin(th)], axis=1)


def _wire_patch(cx, cy, r, h_bg):
    """Point cloud resolving one circular wire; returns (points, keepout_r)."""
    n = max(24, _even(2 * np.pi * r / min(h_bg, r / 2.5)))
    pts = [
        _ring(cx, cy, r, n),
        _ring(cx, cy, 2 * r / 3, max(12, _even(2 * n / 3)), np.pi / n),
        _ring(cx, cy, r / 3, max(8, _even(n / 3))),
        np.array([[cx, cy]]),
        _ring(cx, cy, 1.38 * r, n, np.pi / n),
    ]
    return np.vstack(pts), 1.72 * r


def _rect_points(x0, y0, x1, y1, h):
    """Boundary + sparse interior sampling of an axis-aligned rectangle."""
    w, ht = x1 - x0, y1 - y0
    hx = w / max(1, round(w / h))
    hy = ht / max(1, round(ht / h))
    xs = np.arange(x0, x1 + hx / 2, hx)
    ys = np.arange(y0, y1 + hy / 2, hy)
    pts = [np.stack([xs, np.full_like(xs, y0)], axis=1),
           np.stack([xs, np.full_like(xs, y1)], axis=1)]
    if len(ys) > 2:
        pts += [np.stack([np.full(len(ys) - 2, x0), ys[1:-1]], axis=1),
                np.stack([np.full(len(ys) - 2, x1), ys[1:-1]], axis=1)]
    if len(xs) > 2 and len(ys) > 2:
        Xi, Yi = np.meshgrid(xs[1:-1], ys[1:-1], indexing="ij")
        pts.append(np.stack([Xi.ravel(), Yi.ravel()], axis=1))
    return np.vstack(pts)


def _dedup(points, tol):
    key = np.round(points / tol).astype(np.int64)
    _, idx = np.unique(key, axis=0, return_index=True)
    return points[np.sort(idx)]


def _delaunay_cover(points, extent):
    """Delaunay triangulation covering the convex hull of `points`.

    A phantom ring far outside keeps collinear hull points (square sides,
    symmetry axis) inside the triangulated region; phantom triangles are
    dropped afterwards.
    """
    nph = 24
    phantom = _ring(0.0, 0.0, 2.5 * extent, nph, np.pi / nph)
    allpts = np.vstack([points, phantom])
    tri = Delaunay(allpts)
    keep = np.all(tri.simplices < len(points), axis=1)
    tris = tri.simplices[keep]
    used = np.unique(tris)
    missing = np.setdiff1d(np.arange(len(points)), used)
    if missing.size:
        raise GeometryError(f"{missing.size} generator points not triangulated")
    return orient_ccw(allpts, tris)


def _mirror_mesh(points_upper, tris_upper):
    """Mirror an upper-half triangulation across y = 0."""
    y = points_upper[:, 1]
    is_axis = np.abs(y) <= _AXIS_EPS
    points_upper = points_upper.copy()
    points_upper[is_axis, 1] = 0.0
    n_up = len(points_upper)
    upper_only = np.flatnonzero(~is_axis)
    mirror_index = np.full(n_up, -1, dtype=int)
    mirror_index[is_axis] = np.flatnonzero(is_axis)
    mirror_index[upper_only] = n_up + np.arange(len(upper_only))
    lower = points_upper[upper_only] * np.array([1.0, -1.0])
    nodes = np.vstack([points_upper, lower])
    tris_lower = mirror_index[tris_upper][:, ::-1]
    return nodes, np.vstack([tris_upper, tris_lower])


# ---------------------------------------------------------------------------
# the coil problem: vacuum disk, iron annulus, winding wires

def wire_positions(r_1, thickness, n_wires, r_w, placement="interleaved"):
    """Wire centres for the coil generators.

    interleaved: one wire per angular station, alternating between a circle
    just inside the annulus bore (even stations) and one just outside (odd
    stations), stations at angles 2*pi*k/n.

    paired: n_wires/2 angular stations, each holding an inside and an
    outside wire (a go/return turn); stations at half-step offsets so no
    wire sits on the mirror axis.

    Returns a list of (cx, cy, side) with side "in" or "out".
    """
    r_in = r_1 - 1.8 * r_w
    r_out = r_1 + thickness + 1.8 * r_w
    out = []
    if n_wires == 0:
        return out, r_in, r_out
    if placement == "interleaved":
        for k in range(n_wires):
            th = 2 * np.pi * k / n_wires
            rad, side = (r_in, "in") if k % 2 == 0 else (r_out, "out")
            out.append((rad * np.cos(th), rad * np.sin(th), side))
    elif placement == "paired":
        if n_wires % 2:
            raise GeometryError("paired placement needs an even wire count")
        p = n_wires // 2
        for k in range(p):
            th = 2 * np.pi * (k + 0.5) / p
            out.append((r_in * np.cos(th), r_in * np.sin(th), "in"))
            out.append((r_out * np.cos(th), r_out * np.sin(th), "out"))
    else:
        raise GeometryError(f"unknown wire placement {placement!r}")
    return out, r_in, r_out


def generate_wire_cylinder(r_v, r_1, thickness, n_wires, r_w, h,
                           placement="interleaved"):
    """Disk of vacuum with an iron annulus and winding wires.

    The mesh is exactly mirror symmetric about the x axis.  Subdomains:
    "vacuum", "solid" (annulus), "wire_1".."wire_n" numbered in generator
    order; the outer circle is tagged outer_dirichlet.
    """
    if not (0 < r_w < r_1 < r_1 + thickness < r_v):
        raise GeometryError("need 0 < r_w < r_1 < r_1+thickness < r_v")
    if h <= 0:
        raise GeometryError("target size h must be positive")
    if n_wires and r_w >= thickness:
        raise GeometryError("wire radius must be smaller than the annulus thickness")

    wires, r_in, r_out = wire_positions(r_1, thickness, n_wires, r_w, placement)
    if n_wires:
        if r_in - r_w <= 0.05 * r_1:
            raise GeometryError("interior wires overlap the bore centre")
        if r_out + r_w >= r_v - 2 * h:
            raise GeometryError("exterior wires too close to the outer boundary")
        centres = np.array([(w[0], w[1]) for w in wires])
        for i in range(len(wires)):
            d = np.hypot(*(centres[i] - centres[i + 1:]).T) if i + 1 < len(wires) else np.array([])
            if d.size and d.min() < 2.4 * r_w:
                raise GeometryError("wires overlap each other")

    h_ann = min(h, thickness / 2)

    # interface points of the annulus (one ring per layer boundary)
    nlay = max(1, round(thickness / h_ann))
    ann_pts = np.vstack([
        _ring(0, 0, rr, _even(2 * np.pi * rr / h_ann))
        for rr in np.linspace(r_1, r_1 + thickness, nlay + 1)
    ])
    band = (r_1 - 0.7 * h_ann, r_1 + thickness + 0.7 * h_ann)

    keepouts = []
    wire_pts = np.zeros((0, 2))
    if wires:
        patches = []
        for cx, cy, _ in wires:
            pp, ko = _wire_patch(cx, cy, r_w, h)
            patches.append(pp)
            keepouts.append((cx, cy, ko))
        wire_pts = np.vstack(patches)
        # annulus interfaces take precedence over wire guard points
        rad = np.hypot(wire_pts[:, 0], wire_pts[:, 1])
        clear = np.minimum(np.abs(rad - r_1), np.abs(rad - (r_1 + thickness)))
        wire_pts = wire_pts[clear > 0.55 * h_ann]

    outer_pts = _ring(0, 0, r_v, _even(2 * np.pi * r_v / h))

    # graded background ladder, skipping the annulus band and wire patches
    feats = [r_1, r_1 + thickness]
    if wires:
        feats += [r_in, r_out]

    def local_h(r):
        d = min(abs(r - f) for f in feats)
        return float(np.clip(0.35 * h + 0.55 * d, 0.35 * h, h))

    ladder = [np.array([[0.0, 0.0]])]
    r, k = 0.0, 0
    while True:
        r = r + local_h(r)
        if r > r_v - 0.55 * h:
            break
        if band[0] - 0.3 * h_ann < r < band[1] + 0.3 * h_ann:
            continue
        n = max(6, _even(2 * np.pi * r / local_h(r)))
        ladder.append(_ring(0, 0, r, n, (k % 2) * np.pi / n))
        k += 1
    ladder = np.vstack(ladder)
    for cx, cy, ko in keepouts:
        ladder = ladder[np.hypot(ladder[:, 0] - cx, ladder[:, 1] - cy) >= ko]

    cloud = _dedup(np.vstack([ann_pts, wire_pts, outer_pts, ladder]), 1e-9 * r_v)
    y = cloud[:, 1]
    cloud[np.abs(y) <= _AXIS_EPS * r_v, 1] = 0.0
    upper = cloud[cloud[:, 1] >= 0.0]
    tris_up = _delaunay_cover(upper, r_v)
    nodes, tris = _mirror_mesh(upper, tris_up)
    tris = orient_ccw(nodes, tris)

    region_names = ["vacuum", "solid"] + [f"wire_{i+1}" for i in range(len(wires))]
    cen = nodes[tris].mean(axis=1)
    rad = np.hypot(cen[:, 0], cen[:, 1])
    regions = np.zeros(len(tris), dtype=int)
    regions[(rad >= r_1) & (rad <= r_1 + thickness)] = 1
    for i, (cx, cy, _) in enumerate(wires):
        inside = np.hypot(cen[:, 0] - cx, cen[:, 1] - cy) < r_w
        regions[inside] = 2 + i

    edges = hull_edges(tris)
    tags = np.full(len(edges), BOUNDARY_TAGS.index("outer_dirichlet"), dtype=int)
    return Mesh(nodes, tris, regions, tuple(region_names), edges, tags)


# ---------------------------------------------------------------------------
# notched beam inside a vacuum disk

def generate_beam_cylinder(r_v, beam_w, beam_h, notch=None, wires=(), h_solid=0.05,
                           h_far=None, support_span=None):
    """Vacuum disk with a centred rectangular beam, optional edge notch, wires.

    The beam occupies [-beam_w/2, beam_w/2] x [-beam_h/2, beam_h/2].  `notch`
    is (x_offset_from_left, length_up_from_bottom, width); `wires` is a list
    of (cx, cy, r).  Bottom-edge segments within `support_span` (x interval,
    default the full width) are tagged solid_dirichlet, the rest of the
    beam outline solid_neumann, the outer circle outer_dirichlet.
    """
    if h_far is None:
        h_far = min(r_v / 12, 10 * h_solid)
    x0, x1 = -beam_w / 2, beam_w / 2
    y0, y1 = -beam_h / 2, beam_h / 2
    if np.hypot(max(abs(x0), x1), max(abs(y0), y1)) >= r_v:
        raise GeometryError("beam does not fit inside the vacuum disk")

    pts = [_rect_points(x0, y0, x1, y1, h_solid)]
    notch_rect = None
    if notch is not None:
        xoff, length, width = notch
        nx0, nx1 = x0 + xoff - width / 2, x0 + xoff + width / 2
        ny0, ny1 = y0, y0 + length
        if not (x0 < nx0 and nx1 < x1 and ny1 < y1):
            raise GeometryError("notch not strictly inside the beam")
        notch_rect = (nx0, ny0, nx1, ny1)
        pts.append(_rect_points(nx0, ny0, nx1, ny1, min(h_solid, width)))

    keepouts = []
    for cx, cy, r in wires:
        if np.hypot(cx, cy) + r >= r_v - 2 * h_far:
            raise GeometryError("wire too close to the outer boundary")
        pp, ko = _wire_patch(cx, cy, r, h_far)
        pts.append(pp)
        keepouts.append((cx, cy, ko))

    pts.append(_ring(0, 0, r_v, _even(2 * np.pi * r_v / h_far)))

    # vacuum fill: graded rings around the beam
    r_beam = np.hypot(beam_w / 2, beam_h / 2)

    def local_h(r):
        return float(np.clip(1.5 * h_solid + 0.5 * max(r - r_beam, 0.0),
                             1.5 * h_solid, h_far))

    r = r_beam + 1.2 * h_solid
    k = 0
    while r < r_v - 0.55 * h_far:
        n = max(8, _even(2 * np.pi * r / local_h(r)))
        pts.append(_ring(0, 0, r, n, (k % 2) * np.pi / n))
        r += local_h(r)
        k += 1

    cloud = np.vstack(pts)

    bg = np.ones(len(cloud), dtype=bool)
    for cx, cy, ko in keepouts:
        bg &= np.hypot(cloud[:, 0] - cx, cloud[:, 1] - cy) >= ko
    wire_pts = [_wire_patch(cx, cy, r, h_far)[0] for cx, cy, r in wires]
    # beam interior must not receive vacuum ring points
    in_beam = ((cloud[:, 0] > x0 - 0.4 * h_solid) & (cloud[:, 0] < x1 + 0.4 * h_solid)
               & (cloud[:, 1] > y0 - 0.4 * h_solid) & (cloud[:, 1] < y1 + 0.4 * h_solid))
    n_beam_pts = len(pts[0]) + (len(pts[1]) if notch_rect else 0)
    own = np.zeros(len(cloud), dtype=bool)
    own[:n_beam_pts] = True
    bg &= ~(in_beam & ~own)
    cloud = np.vstack([cloud[bg]] + wire_pts) if wire_pts else cloud[bg]
    cloud = _dedup(cloud, 1e-9 * r_v)

    tris = _delaunay_cover(cloud, r_v)
    nodes = cloud
    tris = orient_ccw(nodes, tris)

    region_names = ["vacuum", "solid"]
    if notch_rect:
        region_names.append("notch_1")
    region_names += [f"wire_{i+1}" for i in range(len(wires))]
    cen = nodes[tris].mean(axis=1)
    regions = np.zeros(len(tris), dtype=int)
    in_beam_c = ((cen[:, 0] > x0) & (cen[:, 0] < x1) & (cen[:, 1] > y0) & (cen[:, 1] < y1))
    regions[in_beam_c] = 1
    rid = 2
    if notch_rect:
        nx0, ny0, nx1, ny1 = notch_rect
        in_notch = ((cen[:, 0] > nx0) & (cen[:, 0] < nx1)
                    & (cen[:, 1] > ny0) & (cen[:, 1] < ny1))
        regions[in_notch] = rid
        rid += 1
    for cx, cy, r in wires:
        regions[np.hypot(cen[:, 0] - cx, cen[:, 1] - cy) < r] = rid
        rid += 1

    edges = hull_edges(tris).tolist()
    tags = [BOUNDARY_TAGS.index("outer_dirichlet")] * len(edges)
    lo, hi = (x0, x1) if support_span is None else support_span
    solid_edges, solid_tags = _solid_boundary_edges(
        nodes, tris, regions, solid_id=1,
        dirichlet_line=("y", y0, lo, hi))
    return Mesh(nodes, tris, regions, tuple(region_names),
                np.array(edges + solid_edges), np.array(tags + solid_tags))


def _solid_boundary_edges(nodes, tris, regions, solid_id, dirichlet_line=None):
    """Edges between solid and non-solid cells, split dirichlet/neumann."""
    from collections import defaultdict

    owner = defaultdict(list)
    for c, t in enumerate(tris):
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            owner[(min(a, b), max(a, b))].append(c)
    edges, tags = [], []
    t_dir = BOUNDARY_TAGS.index("solid_dirichlet")
    t_neu = BOUNDARY_TAGS.index("solid_neumann")
    for (a, b), cells in owner.items():
        kinds = {regions[c] == solid_id for c in cells}
        if kinds != {True, False} and not (kinds == {True} and len(cells) == 1):
            continue
        tag = t_neu
        if dirichlet_line is not None:
            axis, level, lo, hi = dirichlet_line
            i = 1 if axis == "y" else 0
            j = 1 - i
            on = (abs(nodes[a, i] - level) < 1e-9 and abs(nodes[b, i] - level) < 1e-9
                  and lo - 1e-9 <= nodes[a, j] <= hi + 1e-9
                  and lo - 1e-9 <= nodes[b, j] <= hi + 1e-9)
            if on:
                tag = t_dir
        edges.append([a, b])
        tags.append(tag)
    return edges, tags


# ---------------------------------------------------------------------------
# notched / wired square plate

def generate_notched_plate(side, notches=(), wires=(), h=1.0, notch_width=None):
    """Ferromagnetic square plate [0, side]^2 with notch and wire subdomains.

    `notches` is a list of (cx, cy, length, orientation) with orientation
    "h" or "v"; `wires` a list of (cx, cy, r).  Plate edges are tagged
    solid_dirichlet (displacements fixed, vector potential zero).
    """
    if notch_width is None:
        notch_width = 2 * h

    rects = []
    for cx, cy, length, orient in notches:
        if orient == "h":
            r = (cx - length / 2, cy - notch_width / 2, cx + length / 2, cy + notch_width / 2)
        elif orient == "v":
            r = (cx - notch_width / 2, cy - length / 2, cx + notch_width / 2, cy + length / 2)
        else:
            raise GeometryError(f"notch orientation {orient!r} not 'h'/'v'")
        if not (0 < r[0] and r[2] < side and 0 < r[1] and r[3] < side):
            raise GeometryError("notch not strictly inside the plate")
        rects.append(r)
    for cx, cy, r in wires:
        if not (r < cx < side - r and r < cy < side - r):
            raise GeometryError("wire not strictly inside the plate")
    _check_disjoint(rects, wires)

    pts = [_rect_points(0, 0, side, side, h)]
    n_border = len(pts[0])
    for r in rects:
        pts.append(_rect_points(*_reorder_rect(r), min(h, notch_width)))
    keepouts = []
    for cx, cy, r in wires:
        pp, ko = _wire_patch(cx, cy, r, h)
        pts.append(pp)
        keepouts.append((cx, cy, ko))

    cloud = np.vstack(pts)
    bg = np.ones(len(cloud), dtype=bool)
    own = np.zeros(len(cloud), dtype=bool)
    own[n_border:] = True  # feature points are exempt from their own keepouts
    for x0, y0, x1, y1 in rects:
        inside = ((cloud[:, 0] > x0 - 0.45 * h) & (cloud[:, 0] < x1 + 0.45 * h)
                  & (cloud[:, 1] > y0 - 0.45 * h) & (cloud[:, 1] < y1 + 0.45 * h))
        bg &= ~(inside & ~own)
    for cx, cy, ko in keepouts:
        inside = np.hypot(cloud[:, 0] - cx, cloud[:, 1] - cy) < ko
        bg &= ~(inside & ~own)
    cloud = cloud[bg]
    cloud = _dedup(cloud, 1e-9 * side)

    tris = _delaunay_cover(cloud, side)
    nodes = cloud
    tris = orient_ccw(nodes, tris)

    region_names = ["solid"] + [f"notch_{i+1}" for i in range(len(rects))] \
        + [f"wire_{i+1}" for i in range(len(wires))]
    cen = nodes[tris].mean(axis=1)
    regions = np.zeros(len(tris), dtype=int)
    rid = 1
    for x0, y0, x1, y1 in rects:
        inside = ((cen[:, 0] > x0) & (cen[:, 0] < x1)
                  & (cen[:, 1] > y0) & (cen[:, 1] < y1))
        regions[inside] = rid
        rid += 1
    for cx, cy, r in wires:
        regions[np.hypot(cen[:, 0] - cx, cen[:, 1] - cy) < r] = rid
        rid += 1

    edges = hull_edges(tris)
    tags = np.full(len(edges), BOUNDARY_TAGS.index("solid_dirichlet"), dtype=int)
    return Mesh(nodes, tris, regions, tuple(region_names), edges, tags)


def _reorder_rect(r):
    x0, y0, x1, y1 = r
    return min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1)


def _check_disjoint(rects, wires):
    for i, a in enumerate(rects):
        for b in rects[i + 1:]:
            if not (a[2] < b[0] or b[2] < a[0] or a[3] < b[1] or b[3] < a[1]):
                raise GeometryError("notches overlap")
    for i, (cx, cy, r) in enumerate(wires):
        for (dx, dy, s) in wires[i + 1:]:
            if np.hypot(cx - dx, cy - dy) <= r + s:
                raise GeometryError("wires overlap")
        for (x0, y0, x1, y1) in rects:
            px = min(max(cx, x0), x1)
            py = min(max(cy, y0), y1)
            if np.hypot(cx - px, cy - py) <= r:
                raise GeometryError("wire overlaps a notch")
