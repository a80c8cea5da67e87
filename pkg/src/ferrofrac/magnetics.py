"""Transient magnetostatic solve for the out-of-plane vector potential A_z.

Backward-Euler weak form on the whole domain:

    dt (1/mu0(d)) grad A . grad dA  +  sigma0(d) [(A - A_prev) + dt gradPhi] dA
        - dt J_s dA  =  0

The permittivity term is absent (magnetostatics).  Coefficients are
evaluated per quadrature point: region constants for vacuum/wire cells,
crack-interpolated solid/fracture constants on solid cells, fracture
constants on notch cells.  Sources J_s live on wire and notch subdomains;
the prescribed electric-potential gradient acts wherever sigma0 > 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fem
from .errors import TagError
from .materials import g_fracture, g_solid


def grad_phi(t, a, b, c):
    """Prescribed out-of-plane electric potential gradient a + b e^{-c t}."""
    return a + b * np.exp(-c * np.asarray(t, dtype=float))


@dataclass
class SourceLaw:
    """Specific current density J_s(t) on one subdomain (A/mm^2)."""

    law: str = "constant"  # "constant" | "linear"
    value: float = 0.0     # constant value, or slope for "linear"

    def __call__(self, t):
        if self.law == "constant":
            return self.value
        if self.law == "linear":
            return self.value * t
        raise ValueError(f"unknown source law {self.law!r}")


@dataclass
class MagneticProblem:
    """Whole-domain scalar potential problem with d-degraded coefficients."""

    mesh: object
    mat: object
    sources: dict = field(default_factory=dict)       # region name -> SourceLaw
    phi_params: tuple = (-1e-3, -1e-3, 1e-2)          # (a, b, c)
    dirichlet_tags: tuple = ("outer_dirichlet",)
    dirichlet_value: float = 0.0
    solver: object = "direct"
    quad_order: int = 2

    def __post_init__(self):
        mesh = self.mesh
        for name in self.sources:
            mesh.region_id(name)  # raises TagError for unknown regions
        self.basis = fem.CellBasis(mesh.nodes, mesh.triangles,
                                   mesh.element_order, self.quad_order)
        nodes = [mesh.boundary_nodes(t) for t in self.dirichlet_tags]
        nodes = np.unique(np.concatenate(nodes)) if nodes else np.zeros(0, int)
        dofs, vals = fem.dirichlet_from_nodes(nodes, self.dirichlet_value)
        self.dofmap = fem.DofMap("scalar", mesh.element_order, mesh.n_nodes,
                                 dofs, vals)
        kinds = mesh.cell_kinds()
        self._kind = kinds
        self._region = np.asarray(mesh.cell_regions)
        self._is_solid = kinds == "solid"

    # -- coefficient fields --------------------------------------------------

    def coefficients(self, d_nodal):
        """(mu0, sigma0) at quadrature points given the nodal phase-field."""
        nq = self.basis.w.shape[1]
        nc = self.basis.cells.shape[0]
        mu = np.empty((nc, nq))
        sg = np.empty((nc, nq))
        mat = self.mat
        for kind, mu_v, sg_v in (
            ("vacuum", mat.mu0.vacuum, mat.sigma0.vacuum),
            ("wire", mat.mu0.wire, mat.sigma0.wire),
            ("notch", mat.mu0.fracture, mat.sigma0.fracture),
        ):
            sel = self._kind == kind
            mu[sel] = mu_v
            sg[sel] = sg_v
        sel = self._is_solid
        if np.any(sel):
            dq = np.clip(self.basis.interpolate(d_nodal)[sel], 0.0, 1.0)
            rule = mat.transition
            gs = g_solid(dq, rule)
            gf = g_fracture(dq, rule)
            mu[sel] = gs * mat.mu0.solid + gf * mat.mu0.fracture
            sg[sel] = gs * mat.sigma0.solid + gf * mat.sigma0.fracture
        return mu, sg

    def source_at(self, t):
        """J_s at quadrature points (piecewise constant per subdomain)."""
        nc, nq = self.basis.w.shape
        J = np.zeros((nc, nq))
        for name, law in self.sources.items():
            J[self._region == self.mesh.region_id(name)] = law(t)
        return J

    # -- assembly and solves ---------------------------------------------------

    def assemble(self, d_nodal, A_prev, t, dt):
        mu, sg = self.coefficients(d_nodal)
        basis = self.basis
        ndof = self.dofmap.ndof
        trip_k = fem.scalar_stiffness_triplets(basis, dt / mu)
        trip_m = fem.scalar_mass_triplets(basis, sg)
        trip = tuple(np.concatenate(p) for p in zip(trip_k, trip_m))
        phi = grad_phi(t, *self.phi_params)
        aprev_q = basis.interpolate(A_prev)
        rhs = fem.scalar_load(
            basis,
            sg * aprev_q - dt * sg * phi + dt * self.source_at(t),
            ndof,
        )
        return fem.build_system(ndof, trip, rhs, self.dofmap)

    def step_A(self, d_nodal, A_prev, t, dt):
        """Advance the potential one backward-Euler step (solve at time t)."""
        system = self.assemble(d_nodal, A_prev, t, dt)
        return fem.solve_linear(system, self.solver)

    def residual(self, A, d_nodal, A_prev, t, dt):
        """Assembled weak-form residual at the given state (free dofs).

        Returns (residual, scale); scale is the backward-error denominator
        ||b|| + ||K|| ||A||, the natural size against which residual noise
        is judged.
        """
        system = self.assemble(d_nodal, A_prev, t, dt)
        r = system.A @ A - system.b
        r[self.dofmap.dirichlet_dofs] = 0.0
        scale = np.linalg.norm(system.b) + fem._inf_norm(system.A) * np.linalg.norm(A)
        return r, scale

    # -- derived fields ---------------------------------------------------------

    def recover_B(self, A):
        """B = (dA/dy, -dA/dx) at quadrature points, (ncell, nq, 2)."""
        g = self.basis.gradient(A)
        return np.stack([g[..., 1], -g[..., 0]], axis=-1)

    def average_A(self, A, region):
        """Area average of A over one subdomain or a region kind."""
        mesh = self.mesh
        if region in mesh.region_names:
            cells = mesh.cells_of(region)
        else:
            cells = mesh.cells_of_kind(region)
        if cells.size == 0:
            raise TagError(f"region {region!r} empty or unknown")
        w = self.basis.w[cells]
        aq = self.basis.interpolate(A)[cells]
        return float(np.sum(w * aq) / np.sum(w))

    def magnetic_energy(self, A, d_nodal):
        """int |B|^2 / (2 mu0(d)) dx over the whole domain."""
        mu, _ = self.coefficients(d_nodal)
        B = self.recover_B(A)
        b2 = np.einsum("cqi,cqi->cq", B, B)
        return float(np.sum(self.basis.w * b2 / (2.0 * mu)))
