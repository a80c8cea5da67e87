"""Gmsh MSH 2.2 ASCII reader and writer.

Physical surface groups name the subdomains ("vacuum", "solid", "wire_1", ...)
and physical line groups name the boundary tags ("outer_dirichlet",
"solid_dirichlet", "solid_neumann").  Element types 2 (3-node triangle),
9 (6-node triangle) and 1/8 (2/3-node line) are supported; line elements
carry the boundary tags.
"""

from __future__ import annotations

import numpy as np

from .errors import ParseError, TagError
from .mesh import BOUNDARY_TAGS, Mesh, region_kind


def load_mesh(path, fmt="msh2_ascii"):
    """Read a tagged triangular mesh from a Gmsh 2.2 ASCII file."""
    if fmt not in ("msh2_ascii", "MSH2_ASCII"):
        raise ParseError(f"unsupported mesh format {fmt!r}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh]
    return parse_msh(lines)


def parse_msh(lines):
    sections = _split_sections(lines)
    if "MeshFormat" not in sections:
        raise ParseError("missing $MeshFormat section")
    fmt = sections["MeshFormat"][0].split()
    if not fmt or not fmt[0].startswith("2.2"):
        raise ParseError(f"expected MSH version 2.2, got {fmt[:1]}")

    phys_by_tag = {}
    if "PhysicalNames" in sections:
        body = sections["PhysicalNames"]
        try:
            count = int(body[0])
        except (IndexError, ValueError) as exc:
            raise ParseError("bad $PhysicalNames header") from exc
        for ln in body[1 : 1 + count]:
            parts = ln.split(maxsplit=2)
            if len(parts) != 3:
                raise ParseError(f"bad physical name line {ln!r}")
            dim, tag = int(parts[0]), int(parts[1])
            name = parts[2].strip().strip('"')
            phys_by_tag[(dim, tag)] = name

    if "Nodes" not in sections:
        raise ParseError("missing $Nodes section")
    body = sections["Nodes"]
    try:
        n_nodes = int(body[0])
    except (IndexError, ValueError) as exc:
        raise ParseError("bad $Nodes header") from exc
    nodes = np.zeros((n_nodes, 2))
    id_map = {}
    for k, ln in enumerate(body[1 : 1 + n_nodes]):
        parts = ln.split()
        if len(parts) < 4:
            raise ParseError(f"bad node line {ln!r}")
        id_map[int(parts[0])] = k
        nodes[k] = [float(parts[1]), float(parts[2])]
    if len(id_map) != n_nodes:
        raise ParseError("node count mismatch")

    if "Elements" not in sections:
        raise ParseError("missing $Elements section")
    body = sections["Elements"]
    try:
        n_elem = int(body[0])
    except (IndexError, ValueError) as exc:
        raise ParseError("bad $Elements header") from exc

    tris, tri_regions = [], []
    edges, edge_tag_list = [], []
    region_names = []
    region_index = {}
    for ln in body[1 : 1 + n_elem]:
        parts = ln.split()
        if len(parts) < 4:
            raise ParseError(f"bad element line {ln!r}")
        etype = int(parts[1])
        ntags = int(parts[2])
        tags = [int(x) for x in parts[3 : 3 + ntags]]
        conn = parts[3 + ntags :]
        phys = tags[0] if tags else 0
        if etype in (2, 9):
            want = 3 if etype == 2 else 6
            if len(conn) != want:
                raise ParseError(f"triangle with {len(conn)} nodes in {ln!r}")
            try:
                cn = [id_map[int(x)] for x in conn]
            except KeyError as exc:
                raise ParseError(f"element references unknown node {exc}") from exc
            name = phys_by_tag.get((2, phys))
            if name is None:
                raise TagError(f"surface element with unmapped physical tag {phys}")
            region_kind(name)
            if name not in region_index:
                region_index[name] = len(region_names)
                region_names.append(name)
            tris.append(cn)
            tri_regions.append(region_index[name])
        elif etype in (1, 8):
            try:
                cn = [id_map[int(x)] for x in conn[:2]]
            except KeyError as exc:
                raise ParseError(f"element references unknown node {exc}") from exc
            name = phys_by_tag.get((1, phys))
            if name is None:
                raise TagError(f"line element with unmapped physical tag {phys}")
            if name not in BOUNDARY_TAGS:
                raise TagError(f"unknown boundary tag {name!r}")
            edges.append(cn)
            edge_tag_list.append(BOUNDARY_TAGS.index(name))
        elif etype == 15:
            continue  # point elements carry no data we use
        else:
            raise ParseError(f"unsupported element type {etype}")

    if not tris:
        raise ParseError("no triangles in file")
    width = max(len(t) for t in tris)
    if any(len(t) != width for t in tris):
        raise ParseError("mixed element orders in file")
    return Mesh(
        nodes,
        np.array(tris, dtype=int),
        np.array(tri_regions, dtype=int),
        tuple(region_names),
        np.array(edges, dtype=int).reshape(-1, 2),
        np.array(edge_tag_list, dtype=int),
    )


def _split_sections(lines):
    sections = {}
    name, body = None, []
    for ln in lines:
        if not ln:
            continue
        if ln.startswith("$End"):
            if name is None or ln[4:] != name:
                raise ParseError(f"unbalanced section terminator {ln!r}")
            sections[name] = body
            name, body = None, []
        elif ln.startswith("$"):
            if name is not None:
                raise ParseError(f"nested section {ln!r}")
            name = ln[1:]
            body = []
        elif name is not None:
            body.append(ln)
    if name is not None:
        raise ParseError(f"unterminated section ${name}")
    return sections


def write_mesh(mesh, path):
    """Write a mesh as Gmsh MSH 2.2 ASCII (inverse of load_mesh)."""
    lines = ["$MeshFormat", "2.2 0 8", "$EndMeshFormat"]
    n_surf = len(mesh.region_names)
    used_edge_tags = sorted(set(mesh.edge_tags.tolist()))
    lines.append("$PhysicalNames")
    lines.append(str(n_surf + len(used_edge_tags)))
    for t in used_edge_tags:
        lines.append(f'1 {t + 1 + n_surf} "{mesh.edge_tag_names[t]}"')
    for i, name in enumerate(mesh.region_names):
        lines.append(f'2 {i + 1} "{name}"')
    lines.append("$EndPhysicalNames")
    lines.append("$Nodes")
    lines.append(str(mesh.n_nodes))
    for i, (x, y) in enumerate(mesh.nodes):
        lines.append(f"{i + 1} {x!r} {y!r} 0")
    lines.append("$EndNodes")
    lines.append("$Elements")
    lines.append(str(mesh.n_cells + mesh.boundary_edges.shape[0]))
    eid = 1
    for (a, b), t in zip(mesh.boundary_edges, mesh.edge_tags):
        phys = int(t) + 1 + n_surf
        lines.append(f"{eid} 1 2 {phys} {phys} {a + 1} {b + 1}")
        eid += 1
    etype = 2 if mesh.element_order == 1 else 9
    for c in range(mesh.n_cells):
        phys = int(mesh.cell_regions[c]) + 1
        conn = " ".join(str(v + 1) for v in mesh.triangles[c])
        lines.append(f"{eid} {etype} 2 {phys} {phys} {conn}")
        eid += 1
    lines.append("$EndElements")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
