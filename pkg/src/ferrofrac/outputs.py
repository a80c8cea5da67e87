"""File outputs: VTK legacy snapshots, CSV time series, convergence studies.

All writers are atomic (write to a temp file in the target directory, then
rename) and byte-deterministic: floats are rendered with repr, which is the
shortest round-trip representation.
"""

from __future__ import annotations

import os
import tempfile

import numpy as np

from . import constitutive, fem, generators
from .errors import DomainError, IoError

TIMESERIES_HEADER = "t,A_ave,max_d,elastic_energy,stagger_iters,u_residual,A_residual"


def atomic_write_text(path, text):
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    try:
        fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp_", text=True)
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _fmt(x):
    return repr(float(x))


# ---------------------------------------------------------------------------
# VTK legacy ASCII 3.0 unstructured grid

def write_vtk(mesh, path, point_data=None, cell_data=None, title="ferrofrac snapshot"):
    """Write a snapshot; point_data values are (n,) scalars or (n,2) vectors."""
    point_data = point_data or {}
    cell_data = cell_data or {}
    nloc = mesh.triangles.shape[1]
    vtk_type = 5 if nloc == 3 else 22
    lines = ["# vtk DataFile Version 3.0", title, "ASCII",
             "DATASET UNSTRUCTURED_GRID",
             f"POINTS {mesh.n_nodes} double"]
    for x, y in mesh.nodes:
        lines.append(f"{_fmt(x)} {_fmt(y)} 0.0")
    lines.append(f"CELLS {mesh.n_cells} {mesh.n_cells * (nloc + 1)}")
    for cell in mesh.triangles:
        lines.append(str(nloc) + " " + " ".join(str(v) for v in cell))
    lines.append(f"CELL_TYPES {mesh.n_cells}")
    lines.extend([str(vtk_type)] * mesh.n_cells)

    if point_data:
        lines.append(f"POINT_DATA {mesh.n_nodes}")
        for name, arr in point_data.items():
            arr = np.asarray(arr, dtype=float)
            if arr.ndim == 1:
                lines.append(f"SCALARS {name} double 1")
                lines.append("LOOKUP_TABLE default")
                lines.extend(_fmt(v) for v in arr)
            else:
                lines.append(f"VECTORS {name} double")
                lines.extend(f"{_fmt(v[0])} {_fmt(v[1])} 0.0" for v in arr)
    if cell_data:
        lines.append(f"CELL_DATA {mesh.n_cells}")
        for name, arr in cell_data.items():
            arr = np.asarray(arr, dtype=float)
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(_fmt(v) for v in arr)
    atomic_write_text(path, "\n".join(lines) + "\n")


def snapshot_vtk(sim, state, path):
    """Standard snapshot: u, d, A_z point data; |B|, von Mises, region cell data."""
    mesh = sim.mesh
    u = state.u.reshape(-1, 2)
    Bq = sim.magnetic.recover_B(state.A)
    bmag = np.sqrt(np.einsum("cqi,cqi->cq", Bq, Bq)).mean(axis=1)
    vm = np.zeros(mesh.n_cells)
    if sim.elastic is not None:
        d_qp = sim.phase.d_at_qp(state.d) if sim.phase is not None \
            else np.zeros(Bq[sim.solid_cells].shape[:2])
        eps = sim.elastic.strain_qp(state.u)
        tau, tau_zz = constitutive.total_stress(eps, Bq[sim.solid_cells], d_qp, sim.mat)
        vm[sim.solid_cells] = constitutive.von_mises(tau, tau_zz).mean(axis=1)
    write_vtk(
        mesh, path,
        point_data={"u": u, "d": state.d, "A_z": state.A},
        cell_data={"B_mag": bmag, "von_mises": vm,
                   "subdomain": mesh.cell_regions.astype(float)},
    )


# ---------------------------------------------------------------------------
# CSV time series

def timeseries_rows(diags):
    rows = [TIMESERIES_HEADER]
    for d in diags:
        rows.append(",".join([
            _fmt(d.t), _fmt(d.a_ave), _fmt(d.max_d), _fmt(d.elastic_energy),
            str(d.stagger_iters), _fmt(d.res_u), _fmt(d.res_A),
        ]))
    return rows


def write_timeseries(diags, path):
    atomic_write_text(path, "\n".join(timeseries_rows(diags)) + "\n")


# ---------------------------------------------------------------------------
# manufactured-solution convergence study for the potential operator

def mms_study(order, levels, n0=8):
    """L2 errors and observed rates for -div(grad A) = f on the unit square.

    Returns a list of (h, error, rate) with rate = log2(e_i / e_{i+1});
    the first row carries rate nan.
    """
    if order not in (1, 2):
        raise DomainError("element order must be 1 or 2")
    if levels < 3:
        raise DomainError("need at least 3 refinement levels")

    def exact(x, y):
        return np.sin(np.pi * x) * np.sin(np.pi * y)

    rows = []
    errs = []
    for lvl in range(levels):
        n = n0 * 2 ** lvl
        mesh = generators.unit_square(n)
        if order == 2:
            mesh = mesh.to_p2()
        bnodes = mesh.boundary_nodes("solid_dirichlet")
        dofs, vals = fem.dirichlet_from_nodes(bnodes, 0.0)
        dofmap = fem.DofMap("scalar", order, mesh.n_nodes, dofs, vals)
        basis = fem.CellBasis(mesh.nodes, mesh.triangles, order, 2 * order)
        trip = fem.scalar_stiffness_triplets(basis, np.ones(basis.w.shape))
        xq = basis.xq
        f = 2 * np.pi ** 2 * exact(xq[..., 0], xq[..., 1])
        rhs = fem.scalar_load(basis, f, dofmap.ndof)
        system = fem.build_system(dofmap.ndof, trip, rhs, dofmap)
        A = fem.solve_linear(system)
        err = fem.l2_error(mesh, dofmap, A, exact, quad_order=4)
        errs.append(err)
        rows.append((np.sqrt(2.0) / n, err,
                     float("nan") if lvl == 0 else np.log2(errs[-2] / errs[-1])))
    return rows


def write_mms_csv(rows, path):
    lines = ["h,l2_error,rate"]
    for h, e, r in rows:
        lines.append(f"{_fmt(h)},{_fmt(e)},{_fmt(r)}")
    atomic_write_text(path, "\n".join(lines) + "\n")
