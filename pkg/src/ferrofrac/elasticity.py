"""Quasi-static equilibrium for the displacement on the solid subdomain.

The residual assembles the total stress (mechanical + electromagnetic) at
every quadrature point; the magnetic flux density enters as frozen
quadrature-point data recovered from the potential solve.  The Newton
tangent is built from central finite differences of the stress with respect
to strain, which keeps the exponential magneto-mechanical coupling terms
out of hand-derived moduli.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import constitutive, fem
from .errors import EnergyOverflow, NewtonDiverged


@dataclass
class ElasticProblem:
    mesh: object
    mat: object
    dirichlet: dict = field(default_factory=lambda: {"solid_dirichlet": (0.0, 0.0)})
    solver: object = "direct"
    quad_order: int = 2
    newton_rtol: float = 1e-8
    newton_atol: float = 1e-12
    newton_maxit: int = 25
    fd_step: float = 1e-7

    def __post_init__(self):
        mesh = self.mesh
        self.solid_cells = mesh.cells_of_kind("solid")
        cells = mesh.triangles[self.solid_cells]
        self.basis = fem.CellBasis(mesh.nodes, cells, mesh.element_order,
                                   self.quad_order)
        self.Bmat = fem.strain_displacement(self.basis)
        active = np.zeros(mesh.n_nodes, dtype=bool)
        active[np.unique(cells)] = True

        dofs, vals = [], []
        for tag, value in self.dirichlet.items():
            nodes = mesh.boundary_nodes(tag)
            nodes = nodes[active[nodes]]
            if callable(value):
                value = np.asarray([value(x, y) for x, y in mesh.nodes[nodes]])
            dd, vv = fem.dirichlet_from_nodes(nodes, np.asarray(value, float), ncomp=2)
            dofs.append(dd)
            vals.append(vv)
        inactive = np.flatnonzero(~active)
        dd, vv = fem.dirichlet_from_nodes(inactive, 0.0, ncomp=2)
        dofs.append(dd)
        vals.append(vv)
        dofs = np.concatenate(dofs)
        vals = np.concatenate(vals)
        dofs, idx = np.unique(dofs, return_index=True)
        self.dofmap = fem.DofMap("vector2", mesh.element_order, mesh.n_nodes,
                                 dofs, vals[idx])
        if self.dofmap.dirichlet_dofs.size == inactive.size * 2 and active.any():
            raise ValueError("no Dirichlet data on the solid: rigid modes present")

    @property
    def n_qp(self):
        return self.basis.w.shape[1]

    # -- kinematics -----------------------------------------------------------

    def strain_qp(self, u):
        """Strain tensors at solid quadrature points, (nc, nq, 2, 2)."""
        ucell = u[fem.vector_cell_dofs(self.basis.cells)]
        ev = np.einsum("cqsi,ci->cqs", self.Bmat, ucell)  # (exx, eyy, gxy)
        eps = np.empty(ev.shape[:2] + (2, 2))
        eps[..., 0, 0] = ev[..., 0]
        eps[..., 1, 1] = ev[..., 1]
        eps[..., 0, 1] = eps[..., 1, 0] = 0.5 * ev[..., 2]
        return eps

    def _stress_voigt(self, eps, B_qp, d_qp):
        tau, _ = constitutive.total_stress(eps, B_qp, d_qp, self.mat)
        out = np.empty(eps.shape[:2] + (3,))
        out[..., 0] = tau[..., 0, 0]
        out[..., 1] = tau[..., 1, 1]
        out[..., 2] = 0.5 * (tau[..., 0, 1] + tau[..., 1, 0])
        return out

    # -- residual and tangent ----------------------------------------------------

    def residual(self, u, B_qp, d_qp):
        """Internal-force residual; Dirichlet rows zeroed."""
        eps = self.strain_qp(u)
        sv = self._stress_voigt(eps, B_qp, d_qp)
        r = fem.vector_internal_force(self.basis, self.Bmat, sv, self.dofmap.ndof)
        r[self.dofmap.dirichlet_dofs] = 0.0
        return r

    def residual_scale(self, u, B_qp, d_qp):
        """Gross internal-force magnitude (sums of absolute contributions)."""
        eps = self.strain_qp(u)
        sv = self._stress_voigt(eps, B_qp, d_qp)
        fe = np.einsum("cq,cqsi,cqs->ci", self.basis.w, self.Bmat, np.abs(sv))
        gross = np.zeros(self.dofmap.ndof)
        np.add.at(gross, fem.vector_cell_dofs(self.basis.cells), np.abs(fe))
        return float(np.linalg.norm(gross))

    def tangent(self, u, B_qp, d_qp):
        eps = self.strain_qp(u)
        h = self.fd_step * max(1.0, float(np.max(np.abs(eps), initial=0.0)))
        C = np.empty(eps.shape[:2] + (3, 3))
        for j, (ii, jj, s) in enumerate(((0, 0, 1.0), (1, 1, 1.0), (0, 1, 0.5))):
            dp = eps.copy()
            dm = eps.copy()
            dp[..., ii, jj] += s * h
            dm[..., ii, jj] -= s * h
            if ii != jj:
                dp[..., jj, ii] += s * h
                dm[..., jj, ii] -= s * h
            C[..., j] = (self._stress_voigt(dp, B_qp, d_qp)
                         - self._stress_voigt(dm, B_qp, d_qp)) / (2 * h)
        trip = fem.vector_stiffness_triplets(self.basis, self.Bmat, C)
        return trip

    def solve(self, B_qp, d_qp, u0=None):
        """Newton iteration; returns (u, iterations, residual_norms)."""
        ndof = self.dofmap.ndof
        u = np.zeros(ndof) if u0 is None else u0.copy()
        u[self.dofmap.dirichlet_dofs] = self.dofmap.dirichlet_values
        # corrections are solved with homogeneous Dirichlet data
        delta_map = fem.DofMap("vector2", self.dofmap.order, self.dofmap.n_nodes,
                               self.dofmap.dirichlet_dofs,
                               np.zeros(self.dofmap.dirichlet_dofs.size))
        norms = []
        r = self.residual(u, B_qp, d_qp)
        r0 = np.linalg.norm(r)
        norms.append(r0)
        if r0 <= self.newton_atol:
            return u, 0, norms
        for it in range(1, self.newton_maxit + 1):
            trip = self.tangent(u, B_qp, d_qp)
            system = fem.build_system(ndof, trip, -r, delta_map)
            du = fem.solve_linear(system, self.solver)
            # backtracking guards against overshoot through the exponential
            # coupling terms; an overflow counts as a rejected trial step
            step, trial_r, trial_n = 1.0, None, np.inf
            for _ in range(8):
                try:
                    trial_r = self.residual(u + step * du, B_qp, d_qp)
                    trial_n = np.linalg.norm(trial_r)
                except EnergyOverflow:
                    trial_n = np.inf
                if trial_n <= (1.0 - 0.1 * step) * norms[-1] or trial_n <= self.newton_atol:
                    break
                step *= 0.5
            if not np.isfinite(trial_n):
                raise NewtonDiverged(it, norms + [trial_n])
            u = u + step * du
            r = trial_r
            norms.append(trial_n)
            if trial_n <= max(self.newton_rtol * r0, self.newton_atol):
                return u, it, norms
        raise NewtonDiverged(self.newton_maxit, norms)

    # -- diagnostics ---------------------------------------------------------------

    def elastic_energy(self, u, B_qp, d_qp):
        """int W_elas dx over the solid."""
        eps = self.strain_qp(u)
        e = constitutive.energy_total(eps, B_qp, d_qp, self.mat)
        return float(np.sum(self.basis.w * e.W_elas))

    def reaction_force(self, u, B_qp, d_qp):
        """Net force transmitted through the Dirichlet dofs."""
        eps = self.strain_qp(u)
        sv = self._stress_voigt(eps, B_qp, d_qp)
        r = fem.vector_internal_force(self.basis, self.Bmat, sv, self.dofmap.ndof)
        dd = self.dofmap.dirichlet_dofs
        fx = r[dd[dd % 2 == 0]].sum()
        fy = r[dd[dd % 2 == 1]].sum()
        return np.array([fx, fy])
