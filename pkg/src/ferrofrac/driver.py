"""Time stepping and the staggered fixed-point coupling of the three solves.

Per staggered iteration, given the previous phase-field iterate: the
potential A is advanced (its equation does not depend on u), the flux
density is recovered, the displacement is solved with that flux, the
crack driving history is refreshed from the tensile energy, and the
phase-field is solved.  Convergence is declared when the sum of the u- and
A-residual norms, assembled at the current iterate and scaled by their
first-iteration values, drops below the staggered tolerance.  Residuals
that are already at solver-noise level (relative to the load vector)
count as converged, which lets uncoupled or unloaded steps finish in one
iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import constitutive, fracture
from .errors import EnergyOverflow, NewtonDiverged, StaggerDiverged


@dataclass(frozen=True)
class StaggeredConfig:
    dt: float = 0.01
    t_end: float = 0.1
    tol: float = 1e-4
    max_iters: int = 50
    newton_rtol: float = 1e-8
    newton_atol: float = 1e-12
    newton_maxit: int = 25
    linear_solver: object = "direct"
    include_d_residual: bool = False  # optional stricter check
    noise_floor: float = 1e-11
    output_every: int = 1
    max_dt_halvings: int = 1

    def __post_init__(self):
        if self.dt <= 0 or self.t_end <= 0:
            raise ValueError("time step and horizon must be positive")
        if self.tol <= 0:
            raise ValueError("staggered tolerance must be positive")


@dataclass(frozen=True)
class RunState:
    """Committed solution of one time step (immutable snapshot)."""

    n: int
    t: float
    u: np.ndarray
    A: np.ndarray
    d: np.ndarray
    H: np.ndarray


@dataclass
class StepDiagnostics:
    n: int
    t: float
    stagger_iters: int
    res_u: float
    res_A: float
    a_ave: float
    max_d: float
    elastic_energy: float
    overshoot: float
    d_decrease: float
    res_history: list = field(default_factory=list)
    monotone_violation: bool = False


class Simulation:
    """Bundles the three field problems and runs the staggered time loop."""

    def __init__(self, mesh, mat, magnetic, elastic=None, phase=None,
                 config=None, a_ave_region="solid"):
        self.mesh = mesh
        self.mat = mat
        self.magnetic = magnetic
        self.elastic = elastic
        self.phase = phase
        self.config = config or StaggeredConfig()
        self.a_ave_region = a_ave_region
        self.solid_cells = mesh.cells_of_kind("solid")
        if elastic is not None and phase is not None:
            if elastic.basis.cells.shape != phase.basis.cells.shape:
                raise ValueError("elastic and phase-field problems disagree on solid cells")

    def initial_state(self):
        nn = self.mesh.n_nodes
        nqp = self.magnetic.basis.w.shape[1]
        H = np.zeros((self.solid_cells.size, nqp))
        return RunState(0, 0.0, np.zeros(2 * nn), np.zeros(nn), np.zeros(nn), H)

    # -- one committed time step ----------------------------------------------

    def step(self, state, dt=None, _halvings=None):
        cfg = self.config
        dt = cfg.dt if dt is None else dt
        halvings = cfg.max_dt_halvings if _halvings is None else _halvings
        try:
            return self._step_fixed_dt(state, dt)
        except (StaggerDiverged, NewtonDiverged, EnergyOverflow):
            if halvings <= 0:
                raise
            return self.step(state, dt / 2, halvings - 1)

    def _step_fixed_dt(self, state, dt):
        cfg = self.config
        t_next = state.t + dt
        d_k = state.d
        u_k = state.u
        H_k = state.H
        scale_u = scale_A = None
        history = []
        overshoot = 0.0

        for k in range(1, cfg.max_iters + 1):
            A_k = self.magnetic.step_A(d_k, state.A, t_next, dt)
            B_all = self.magnetic.recover_B(A_k)
            B_solid = B_all[self.solid_cells]

            if self.elastic is not None:
                d_qp = self.phase.d_at_qp(d_k) if self.phase is not None \
                    else np.zeros(B_solid.shape[:2])
                u_k, _, _ = self.elastic.solve(B_solid, d_qp, u0=u_k)
                if self.phase is not None:
                    eps = self.elastic.strain_qp(u_k)
                    psi_p, _ = constitutive.psi_elastic(eps, self.mat)
                    D = fracture.driving_state(psi_p, self.mat.G_c, self.mat.l_d)
                    # running max across staggered iterates keeps d monotone
                    # within the loop (all iterates approximate time t_next)
                    H_k = fracture.update_history(H_k, D)
                    d_k, overshoot = self.phase.solve_d(H_k, state.d, dt)

            # residuals of the (u, A) equations at the refreshed iterate
            r_A, noise_A = self.magnetic.residual(A_k, d_k, state.A, t_next, dt)
            rn_A = np.linalg.norm(r_A)
            rn_u, noise_u = 0.0, 0.0
            if self.elastic is not None:
                d_qp = self.phase.d_at_qp(d_k) if self.phase is not None \
                    else np.zeros(B_solid.shape[:2])
                rn_u = np.linalg.norm(self.elastic.residual(u_k, B_solid, d_qp))
                noise_u = self.elastic.residual_scale(u_k, B_solid, d_qp)

            if scale_A is None:
                scale_A, scale_u = max(rn_A, 1e-300), max(rn_u, 1e-300)
            comp_A = 0.0 if rn_A <= cfg.noise_floor * max(noise_A, 1.0) else rn_A / scale_A
            comp_u = 0.0 if rn_u <= cfg.noise_floor * max(noise_u, 1.0) else rn_u / scale_u
            res = comp_A + comp_u
            if cfg.include_d_residual and self.phase is not None:
                res += self._d_residual(d_k, state.d, H_k, dt)
            history.append(res)

            if res <= cfg.tol:
                diag = self._diagnostics(state, t_next, u_k, A_k, d_k, k,
                                         comp_u, comp_A, overshoot, history)
                new = RunState(state.n + 1, t_next, u_k, A_k, d_k, H_k)
                return new, diag

        raise StaggerDiverged(cfg.max_iters, history)

    def _d_residual(self, d, d_prev, H_qp, dt):
        # scaled norm of the phase-field equation at the current iterate
        ph = self.phase
        mat = self.mat
        react = (1.0 - mat.kappa) * dt * H_qp + dt + mat.eta_d
        from . import fem

        trip_m = fem.scalar_mass_triplets(ph.basis, react)
        trip_k = fem.scalar_stiffness_triplets(
            ph.basis, np.full_like(H_qp, mat.l_d ** 2 * dt))
        rhs = fem.scalar_load(ph.basis, (1.0 - mat.kappa) * dt * H_qp
                              + mat.eta_d * ph.basis.interpolate(d_prev),
                              ph.dofmap.ndof)
        trip = tuple(np.concatenate(p) for p in zip(trip_m, trip_k))
        import scipy.sparse as sp

        A = sp.coo_matrix((trip[2], (trip[0], trip[1])),
                          shape=(ph.dofmap.ndof, ph.dofmap.ndof)).tocsr()
        r = A @ d - rhs
        r[np.flatnonzero(~ph._restrict)] = 0.0
        rn = np.linalg.norm(r)
        bn = np.linalg.norm(rhs)
        return 0.0 if rn <= self.config.noise_floor * max(bn, 1.0) else rn / max(bn, 1e-300)

    def _diagnostics(self, state, t, u, A, d, iters, res_u, res_A, overshoot, history):
        a_ave = self.magnetic.average_A(A, self.a_ave_region)
        energy = 0.0
        if self.elastic is not None:
            d_qp = self.phase.d_at_qp(d) if self.phase is not None \
                else np.zeros((self.solid_cells.size, self.elastic.n_qp))
            B_solid = self.magnetic.recover_B(A)[self.solid_cells]
            energy = self.elastic.elastic_energy(u, B_solid, d_qp)
        viol = False
        tail = history[-3:]
        if len(tail) == 3:
            viol = not (tail[0] >= tail[1] - 1e-14 and tail[1] >= tail[2] - 1e-14)
        return StepDiagnostics(
            n=state.n + 1,
            t=t,
            stagger_iters=iters,
            res_u=res_u,
            res_A=res_A,
            a_ave=a_ave,
            max_d=float(d.max(initial=0.0)),
            elastic_energy=energy,
            overshoot=overshoot,
            d_decrease=float(np.min(d - state.d, initial=0.0)),
            res_history=history,
            monotone_violation=viol,
        )

    # -- full runs -----------------------------------------------------------------

    def run(self, on_step=None):
        """Execute steps to t_end; returns (final_state, [StepDiagnostics])."""
        cfg = self.config
        state = self.initial_state()
        diags = []
        while state.t < cfg.t_end - 1e-12:
            state, diag = self.step(state)
            diags.append(diag)
            if on_step is not None:
                on_step(state, diag)
        return state, diags
