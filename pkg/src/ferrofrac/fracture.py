"""Crack phase-field: surface density, driving state, history and the d-solve.

Two standard variants of the local fracture energy are supported: "AT1"
(f(d) = d, with an elastic stage) and "AT2" (f(d) = d^2, default).  The
normalization constant makes the integral of the surface density equal to
one over the optimal 1D profile, which for AT2 is exp(-|x|/l_d).

The evolution solve is linear in d: reaction terms from the crack driving
history plus viscosity, a gradient term l_d^2 dt, natural (Neumann)
boundary conditions everywhere, followed by a projection onto [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fem
from .errors import DomainError


def _cd(variant):
    if variant == "AT1":
        return 8.0 / 3.0
    if variant == "AT2":
        return 2.0
    raise DomainError(f"unknown phase-field variant {variant!r}")


def local_fracture_energy(d, variant="AT2"):
    d = np.asarray(d, dtype=float)
    return d if variant == "AT1" else d * d


def surface_density(d, grad_d, l_d, variant="AT2"):
    """Regularized crack surface density gamma(d, grad d) >= 0."""
    d = np.asarray(d, dtype=float)
    grad_d = np.asarray(grad_d, dtype=float)
    gg = np.einsum("...i,...i->...", grad_d, grad_d)
    return (local_fracture_energy(d, variant) / l_d + l_d * gg) / _cd(variant)


def driving_state(psi_plus, G_c, l_d):
    """Crack driving state D = 2 l_d psi_plus / G_c (dimensionless)."""
    psi_plus = np.asarray(psi_plus, dtype=float)
    if np.any(psi_plus < 0):
        raise DomainError("tensile energy density must be non-negative")
    return 2.0 * l_d / G_c * psi_plus


def update_history(H_old, D_new):
    """Running maximum enforcing irreversibility."""
    return np.maximum(H_old, D_new)


@dataclass
class FractureState:
    """Phase-field unknowns on the solid subdomain.

    d / d_prev are nodal (full-mesh length, zero off the solid), H lives at
    the quadrature points of the solid cells and never decreases.
    """

    d: np.ndarray
    d_prev: np.ndarray
    H: np.ndarray
    l_d: float
    eta_d: float
    kappa: float
    variant: str = "AT2"


class PhaseFieldProblem:
    """Assembles and solves the linear phase-field evolution on solid cells."""

    def __init__(self, mesh, mat, variant="AT2", quad_order=2, solver="direct"):
        self.mesh = mesh
        self.mat = mat
        self.variant = variant
        self.solver = solver
        self.solid_cells = mesh.cells_of_kind("solid")
        cells = mesh.triangles[self.solid_cells]
        self.active_nodes = np.unique(cells)
        self.basis = fem.CellBasis(mesh.nodes, cells, mesh.element_order, quad_order)
        self.dofmap = fem.DofMap("scalar", mesh.element_order, mesh.n_nodes)
        self._restrict = np.zeros(mesh.n_nodes, dtype=bool)
        self._restrict[self.active_nodes] = True

    @property
    def n_qp(self):
        return self.basis.w.shape[1]

    def zero_history(self):
        return np.zeros(self.basis.w.shape)

    def d_at_qp(self, d_nodal):
        return self.basis.interpolate(d_nodal)

    def solve_d(self, H_qp, d_prev, dt):
        """One implicit evolution solve; returns (d, overshoot) with d in [0,1].

        overshoot is the largest violation of the bounds before projection.
        """
        if np.any(H_qp < 0):
            raise DomainError("history field must be non-negative")
        mat = self.mat
        basis = self.basis
        ndof = self.dofmap.ndof
        react = (1.0 - mat.kappa) * dt * H_qp + dt + mat.eta_d
        trip_m = fem.scalar_mass_triplets(basis, react)
        trip_k = fem.scalar_stiffness_triplets(basis, np.full_like(H_qp, mat.l_d ** 2 * dt))
        dprev_qp = basis.interpolate(d_prev)
        rhs = fem.scalar_load(basis, (1.0 - mat.kappa) * dt * H_qp
                              + mat.eta_d * dprev_qp, ndof)
        trip = tuple(np.concatenate(p) for p in zip(trip_m, trip_k))

        # nodes outside the solid have no equation; pin them at d_prev
        inactive = np.flatnonzero(~self._restrict)
        dofmap = fem.DofMap("scalar", self.dofmap.order, self.dofmap.n_nodes,
                            inactive, d_prev[inactive])
        system = fem.build_system(ndof, trip, rhs, dofmap)
        d = fem.solve_linear(system, self.solver)
        overshoot = max(float(np.max(-d, initial=0.0)),
                        float(np.max(d - 1.0, initial=0.0)))
        return np.clip(d, 0.0, 1.0), overshoot
