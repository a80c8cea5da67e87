"""P1/P2 Lagrange elements on triangles: quadrature, assembly, solves, norms.

All fields are nodal.  Scalar fields store one dof per node, 2-vector fields
store two interleaved dofs per node (ux0, uy0, ux1, uy1, ...).  Dirichlet
conditions are eliminated symmetrically: constrained rows/columns are zeroed,
a unit diagonal is inserted and the prescribed values are moved to the
right-hand side, so SPD forms stay SPD.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import KernelError, NoConvergence, SingularMatrix, UnsupportedOrder

# ---------------------------------------------------------------------------
# quadrature on the reference triangle (barycentric points, weights sum 1/2)

_QUADRATURE = {
    1: (
        np.array([[1 / 3, 1 / 3, 1 / 3]]),
        np.array([0.5]),
    ),
    2: (
        np.array(
            [
                [2 / 3, 1 / 6, 1 / 6],
                [1 / 6, 2 / 3, 1 / 6],
                [1 / 6, 1 / 6, 2 / 3],
            ]
        ),
        np.array([1 / 6, 1 / 6, 1 / 6]),
    ),
    3: (
        np.array(
            [
                [1 / 3, 1 / 3, 1 / 3],
                [0.6, 0.2, 0.2],
                [0.2, 0.6, 0.2],
                [0.2, 0.2, 0.6],
            ]
        ),
        np.array([-27 / 96, 25 / 96, 25 / 96, 25 / 96]),
    ),
    4: (
        np.array(
            [
                [0.108103018168070, 0.445948490915965, 0.445948490915965],
                [0.445948490915965, 0.108103018168070, 0.445948490915965],
                [0.445948490915965, 0.445948490915965, 0.108103018168070],
                [0.816847572980459, 0.091576213509771, 0.091576213509771],
                [0.091576213509771, 0.816847572980459, 0.091576213509771],
                [0.091576213509771, 0.091576213509771, 0.816847572980459],
            ]
        ),
        np.array(
            [
                0.223381589678011 / 2,
                0.223381589678011 / 2,
                0.223381589678011 / 2,
                0.109951743655322 / 2,
                0.109951743655322 / 2,
                0.109951743655322 / 2,
            ]
        ),
    ),
}


def quadrature(order):
    """Return (barycentric points, weights) exact for polynomials of `order`.

    Weights sum to the reference-triangle area 1/2.
    """
    if order not in _QUADRATURE:
        raise UnsupportedOrder(f"quadrature order {order} not in {{1,2,3,4}}")
    pts, w = _QUADRATURE[order]
    return pts.copy(), w.copy()


# ---------------------------------------------------------------------------
# shape functions

def shape_values(order, bary):
    """Shape functions at barycentric points; shape (nq, nloc)."""
    l1, l2, l3 = bary[:, 0], bary[:, 1], bary[:, 2]
    if order == 1:
        return np.stack([l1, l2, l3], axis=1)
    if order == 2:
        return np.stack(
            [
                l1 * (2 * l1 - 1),
                l2 * (2 * l2 - 1),
                l3 * (2 * l3 - 1),
                4 * l1 * l2,
                4 * l2 * l3,
                4 * l3 * l1,
            ],
            axis=1,
        )
    raise UnsupportedOrder(f"element order {order}")


def shape_bary_grads(order, bary):
    """Derivatives of shape functions w.r.t. (l1, l2, l3); shape (nq, nloc, 3)."""
    nq = bary.shape[0]
    l1, l2, l3 = bary[:, 0], bary[:, 1], bary[:, 2]
    z = np.zeros(nq)
    if order == 1:
        g = np.zeros((nq, 3, 3))
        g[:, 0, 0] = 1.0
        g[:, 1, 1] = 1.0
        g[:, 2, 2] = 1.0
        return g
    if order == 2:
        rows = [
            [4 * l1 - 1, z, z],
            [z, 4 * l2 - 1, z],
            [z, z, 4 * l3 - 1],
            [4 * l2, 4 * l1, z],
            [z, 4 * l3, 4 * l2],
            [4 * l3, z, 4 * l1],
        ]
        return np.stack([np.stack(r, axis=1) for r in rows], axis=1)
    raise UnsupportedOrder(f"element order {order}")


# ---------------------------------------------------------------------------
# dof maps

@dataclass
class DofMap:
    """Node-based dof numbering for a scalar or 2-vector field.

    Dirichlet dofs carry prescribed values; the list may be empty.
    """

    kind: str  # "scalar" | "vector2"
    order: int
    n_nodes: int
    dirichlet_dofs: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    dirichlet_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if self.kind not in ("scalar", "vector2"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        self.dirichlet_dofs = np.asarray(self.dirichlet_dofs, dtype=int)
        self.dirichlet_values = np.asarray(self.dirichlet_values, dtype=float)
        order = np.argsort(self.dirichlet_dofs, kind="stable")
        self.dirichlet_dofs = self.dirichlet_dofs[order]
        self.dirichlet_values = self.dirichlet_values[order]
        if self.dirichlet_dofs.size:
            if self.dirichlet_dofs.min() < 0 or self.dirichlet_dofs.max() >= self.ndof:
                raise ValueError("Dirichlet dof outside dof range")
            if np.unique(self.dirichlet_dofs).size != self.dirichlet_dofs.size:
                raise ValueError("duplicate Dirichlet dof")

    @property
    def ncomp(self):
        return 1 if self.kind == "scalar" else 2

    @property
    def ndof(self):
        return self.n_nodes * self.ncomp

    def cell_dofs(self, cells):
        """Dof indices per cell, shape (ncell, nloc*ncomp), components interleaved."""
        cells = np.asarray(cells)
        if self.ncomp == 1:
            return cells
        out = np.empty((cells.shape[0], cells.shape[1] * 2), dtype=int)
        out[:, 0::2] = 2 * cells
        out[:, 1::2] = 2 * cells + 1
        return out

    def free_mask(self):
        mask = np.ones(self.ndof, dtype=bool)
        mask[self.dirichlet_dofs] = False
        return mask


def dirichlet_from_nodes(nodes, values, ncomp=1, comps=None):
    """Build (dofs, values) arrays for the given nodes.

    `values` is a scalar, a per-component sequence, or an (n, ncomp) array.
    `comps` restricts which components are constrained (default: all).
    """
    nodes = np.asarray(nodes, dtype=int)
    if comps is None:
        comps = list(range(ncomp))
    vals = np.asarray(values, dtype=float)
    dofs, out = [], []
    for c in comps:
        dofs.append(nodes * ncomp + c)
        if vals.ndim == 0:
            out.append(np.full(nodes.size, float(vals)))
        elif vals.ndim == 1:
            out.append(np.full(nodes.size, vals[c]))
        else:
            out.append(vals[:, c])
    return np.concatenate(dofs), np.concatenate(out)


# ---------------------------------------------------------------------------
# per-cell geometry and basis caches

class CellBasis:
    """Precomputed basis data for one mesh / element order / quadrature order.

    Attributes
    ----------
    cells : (ncell, nloc) node indices
    w : (ncell, nq) quadrature weights scaled by |det J|
    N : (nq, nloc) shape values
    dN : (ncell, nq, nloc, 2) physical gradients
    xq : (ncell, nq, 2) quadrature point coordinates
    """

    def __init__(self, nodes, cells, order, quad_order):
        bary, wq = quadrature(quad_order)
        self.order = order
        self.cells = np.asarray(cells, dtype=int)
        self.nloc = self.cells.shape[1]
        self.N = shape_values(order, bary)
        dNdl = shape_bary_grads(order, bary)  # (nq, nloc, 3)

        p1 = nodes[self.cells[:, 0]]
        p2 = nodes[self.cells[:, 1]]
        p3 = nodes[self.cells[:, 2]]
        # affine map x = p1 + J [l2, l3]; straight-sided P2 cells share it
        J = np.stack([p2 - p1, p3 - p1], axis=2)  # (ncell, 2, 2) columns
        detJ = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
        invJT = np.empty_like(J)
        invJT[:, 0, 0] = J[:, 1, 1]
        invJT[:, 0, 1] = -J[:, 1, 0]
        invJT[:, 1, 0] = -J[:, 0, 1]
        invJT[:, 1, 1] = J[:, 0, 0]
        invJT /= detJ[:, None, None]

        # d/d(l2,l3) with l1 = 1 - l2 - l3 eliminated
        dref = np.stack([dNdl[:, :, 1] - dNdl[:, :, 0], dNdl[:, :, 2] - dNdl[:, :, 0]], axis=2)
        self.dN = np.einsum("cxr,qlr->cqlx", invJT, dref)
        self.w = np.abs(detJ)[:, None] * wq[None, :]
        vx = nodes[self.cells[:, :3]]  # (ncell, 3, 2)
        self.xq = np.einsum("qv,cvx->cqx", bary, vx)

    def interpolate(self, nodal, comp=None):
        """Nodal scalar field -> values at quadrature points, (ncell, nq)."""
        vals = nodal[self.cells]  # (ncell, nloc)
        return np.einsum("ql,cl->cq", self.N, vals)

    def gradient(self, nodal):
        """Nodal scalar field -> gradients at quadrature points, (ncell, nq, 2)."""
        vals = nodal[self.cells]
        return np.einsum("cqlx,cl->cqx", self.dN, vals)


# ---------------------------------------------------------------------------
# sparse systems

@dataclass
class SparseSystem:
    """Square sparse system with Dirichlet data already eliminated."""

    A: sp.csr_matrix
    b: np.ndarray
    dirichlet_dofs: np.ndarray
    dirichlet_values: np.ndarray

    @property
    def ndof(self):
        return self.b.size

    @property
    def n_free(self):
        return self.ndof - self.dirichlet_dofs.size

    def symmetry_error(self):
        d = self.A - self.A.T
        denom = max(abs(self.A).max(), 1e-300)
        return abs(d).max() / denom


def _apply_dirichlet(A, b, dofs, values):
    """Symmetric elimination: move columns to the RHS, unit diagonal rows."""
    if dofs.size == 0:
        return A.tocsr(), b
    A = A.tocsc()
    x0 = np.zeros(b.size)
    x0[dofs] = values
    b = b - A @ x0
    keep = np.ones(b.size, dtype=bool)
    keep[dofs] = False
    D = sp.diags(keep.astype(float))
    A = D @ A @ D
    A = A.tolil()
    A[dofs, dofs] = 1.0
    b[dofs] = values
    return A.tocsr(), b


def build_system(ndof, triplets, rhs, dofmap):
    """Assemble COO triplets + rhs vector into a Dirichlet-eliminated system."""
    rows, cols, vals = triplets
    A = sp.coo_matrix((vals, (rows, cols)), shape=(ndof, ndof)).tocsr()
    A, b = _apply_dirichlet(A, rhs, dofmap.dirichlet_dofs, dofmap.dirichlet_values)
    return SparseSystem(A, b, dofmap.dirichlet_dofs, dofmap.dirichlet_values)


def assemble(mesh, dofmap, element_kernel, quad_order=None):
    """Assemble a global system from a per-cell kernel.

    The kernel is called as kernel(cell_index, coords, region_name) and must
    return (local_matrix, local_vector) sized for the cell's dofs.  Exceptions
    are re-raised as KernelError carrying the cell id.
    """
    cells = mesh.triangles
    ndof = dofmap.ndof
    rows, cols, vals = [], [], []
    rhs = np.zeros(ndof)
    celldofs = dofmap.cell_dofs(cells)
    for c in range(cells.shape[0]):
        coords = mesh.nodes[cells[c, :3]]
        region = mesh.region_names[mesh.cell_regions[c]]
        try:
            ke, fe = element_kernel(c, coords, region)
        except Exception as exc:  # noqa: BLE001 - contract: wrap with cell id
            raise KernelError(c, str(exc)) from exc
        dofs = celldofs[c]
        ke = np.asarray(ke, dtype=float)
        fe = np.asarray(fe, dtype=float)
        if ke.shape != (dofs.size, dofs.size) or fe.shape != (dofs.size,):
            raise KernelError(c, f"kernel returned wrong shapes {ke.shape}, {fe.shape}")
        rows.append(np.repeat(dofs, dofs.size))
        cols.append(np.tile(dofs, dofs.size))
        vals.append(ke.ravel())
        np.add.at(rhs, dofs, fe)
    if rows:
        trip = (np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))
    else:
        trip = (np.zeros(0, int), np.zeros(0, int), np.zeros(0))
    return build_system(ndof, trip, rhs, dofmap)


# -- vectorized operator assembly (used by the physics modules) -------------

def scalar_stiffness_triplets(basis, coeff):
    """Triplets of the weighted stiffness form  sum_q w c grad(Ni).grad(Nj)."""
    ke = np.einsum("cq,cqix,cqjx->cij", basis.w * coeff, basis.dN, basis.dN)
    return _cell_triplets(basis.cells, ke)


def scalar_mass_triplets(basis, coeff):
    """Triplets of the weighted mass form  sum_q w c Ni Nj."""
    ke = np.einsum("cq,qi,qj->cij", basis.w * coeff, basis.N, basis.N)
    return _cell_triplets(basis.cells, ke)


def scalar_load(basis, fq, ndof):
    """Load vector of  sum_q w f Ni  for quadrature-point values fq."""
    fe = np.einsum("cq,qi->ci", basis.w * fq, basis.N)
    out = np.zeros(ndof)
    np.add.at(out, basis.cells, fe)
    return out


def _cell_triplets(celldofs, ke):
    n = celldofs.shape[1]
    rows = np.repeat(celldofs, n, axis=1).ravel()
    cols = np.tile(celldofs, (1, n)).ravel()
    return rows, cols, ke.ravel()


def vector_cell_dofs(cells):
    out = np.empty((cells.shape[0], cells.shape[1] * 2), dtype=int)
    out[:, 0::2] = 2 * cells
    out[:, 1::2] = 2 * cells + 1
    return out


def strain_displacement(basis):
    """Voigt B-matrices, (ncell, nq, 3, 2*nloc); rows (exx, eyy, gxy)."""
    nc, nq, nl, _ = basis.dN.shape
    B = np.zeros((nc, nq, 3, 2 * nl))
    B[:, :, 0, 0::2] = basis.dN[:, :, :, 0]
    B[:, :, 1, 1::2] = basis.dN[:, :, :, 1]
    B[:, :, 2, 0::2] = basis.dN[:, :, :, 1]
    B[:, :, 2, 1::2] = basis.dN[:, :, :, 0]
    return B


def vector_internal_force(basis, B, stress_voigt, ndof):
    """Assembled internal force  sum_q w B^T s  for Voigt stresses (nc, nq, 3)."""
    fe = np.einsum("cq,cqsi,cqs->ci", basis.w, B, stress_voigt)
    dofs = vector_cell_dofs(basis.cells)
    out = np.zeros(ndof)
    np.add.at(out, dofs, fe)
    return out


def vector_stiffness_triplets(basis, B, C):
    """Triplets of  sum_q w B^T C B  for moduli C (nc, nq, 3, 3)."""
    ke = np.einsum("cq,cqsi,cqst,cqtj->cij", basis.w, B, C, B)
    return _cell_triplets(vector_cell_dofs(basis.cells), ke)


# ---------------------------------------------------------------------------
# linear solvers

def _inf_norm(A):
    return np.max(np.abs(A).sum(axis=1)) if A.nnz else 0.0


def solve_linear(system, method="direct"):
    """Solve a SparseSystem.

    method is "direct" or ("cg", tol, maxit).  The direct path performs one
    step of iterative refinement and enforces a 1e-10 relative residual; CG
    requires an SPD matrix and uses Jacobi preconditioning.
    """
    A, b = system.A.tocsr(), system.b
    if not np.all(np.isfinite(A.data)) or not np.all(np.isfinite(b)):
        raise SingularMatrix("non-finite entries in assembled system")
    bnorm = np.linalg.norm(b)
    if method == "direct":
        # symmetric Jacobi scaling plus iterative refinement: coefficient
        # contrasts of ~1e9 (vacuum vs iron permeability) otherwise leave
        # the factorization residual far above the contract
        diag = A.diagonal()
        s = np.where(np.abs(diag) > 0, 1.0 / np.sqrt(np.abs(diag)), 1.0)
        S = sp.diags(s)
        try:
            with np.errstate(all="ignore"):
                lu = spla.splu((S @ A @ S).tocsc())
                x = s * lu.solve(s * b)
                prev = np.inf
                for _ in range(4):
                    r = b - A @ x
                    rn = np.linalg.norm(r)
                    if rn <= 1e-13 * max(bnorm, 1e-300) or rn >= 0.5 * prev:
                        break
                    prev = rn
                    x = x + s * lu.solve(s * r)
        except RuntimeError as exc:
            raise SingularMatrix(str(exc)) from exc
        if not np.all(np.isfinite(x)):
            raise SingularMatrix("direct solve produced non-finite values")
        # normwise backward error: residual at the float64 floor ||A|| ||x|| eps
        # still passes, residuals from a bad factorization do not
        res = np.linalg.norm(A @ x - b)
        scale = bnorm + _inf_norm(A) * np.linalg.norm(x)
        if res > 1e-10 * max(scale, 1e-300):
            raise SingularMatrix(f"direct solve backward error {res / scale:.3e}")
        return x
    if isinstance(method, tuple) and method[0] == "cg":
        _, tol, maxit = method
        diag = A.diagonal()
        if np.any(diag <= 0):
            raise SingularMatrix("CG requires positive diagonal")
        M = sp.diags(1.0 / diag)
        it = [0]

        def cb(_):
            it[0] += 1

        x, info = spla.cg(A, b, rtol=tol, atol=tol * max(bnorm, 1e-300),
                          maxiter=maxit, M=M, callback=cb)
        if info != 0:
            raise NoConvergence(it[0])
        return x
    raise ValueError(f"unknown solver method {method!r}")


# ---------------------------------------------------------------------------
# norms and integrals

def l2_error(mesh, dofmap, fld, exact, quad_order=None):
    """sqrt(int (field_h - exact)^2 dx); exact(x, y) -> scalar or (n,2)."""
    if quad_order is None:
        quad_order = min(4, 2 * dofmap.order)
    basis = CellBasis(mesh.nodes, mesh.triangles, dofmap.order, quad_order)
    xq = basis.xq
    if dofmap.kind == "scalar":
        fh = basis.interpolate(fld)
        fe = exact(xq[:, :, 0], xq[:, :, 1])
        return float(np.sqrt(np.sum(basis.w * (fh - fe) ** 2)))
    ux = basis.interpolate(fld[0::2])
    uy = basis.interpolate(fld[1::2])
    ex, ey = exact(xq[:, :, 0], xq[:, :, 1])
    return float(np.sqrt(np.sum(basis.w * ((ux - ex) ** 2 + (uy - ey) ** 2))))


def integrate(basis, fq):
    """Integral of quadrature-point values over the basis' cells."""
    return float(np.sum(basis.w * fq))
