"""Material data, solid/fracture indicator functions and constant interpolation.

Electromagnetic constants carry one value per region class (vacuum, wire,
solid, fracture).  In damaged solid material the constants morph from the
solid values to the fracture values, which the shipped parameter sets take
equal to the vacuum ones (quasi-impermeable crack faces).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, UnitError

MU0_VACUUM = 4e-7 * np.pi

# round-off from the linear solves may push d marginally outside [0, 1]
_CLAMP_SLACK = 1e-12


@dataclass(frozen=True)
class TransitionRule:
    """Indicator-function pair of order m with thresholds 0 <= c1 < c2 <= 1."""

    m: float = 2.0
    c1: float = 0.1
    c2: float = 0.9
    kappa: float = 1e-8

    def __post_init__(self):
        if not (0.0 <= self.c1 < self.c2 <= 1.0):
            raise UnitError(f"need 0 <= c1 < c2 <= 1, got ({self.c1}, {self.c2})")
        if self.m < 1:
            raise UnitError(f"transition exponent m must be >= 1, got {self.m}")
        if not (0.0 < self.kappa < 1.0):
            raise UnitError(f"residual stiffness must be in (0, 1), got {self.kappa}")


@dataclass(frozen=True)
class RegionConstants:
    """One electromagnetic constant per region class."""

    vacuum: float
    wire: float
    solid: float
    fracture: float

    def of(self, kind):
        return getattr(self, kind)


@dataclass(frozen=True)
class MaterialSet:
    """All constitutive parameters of one simulation case.

    Units: lengths mm, moduli GPa, magnetic flux density T; the remaining
    electromagnetic constants are used exactly as tabulated for the shipped
    examples.  alpha[0:5] weight the magnetization series, alpha[5:7] the
    two magnetostrictive invariants.
    """

    E: float = 160.0
    nu: float = 0.33
    G_c: float = 0.0027
    l_d: float = 2.196
    eta_d: float = 1e-6
    kappa: float = 1e-8
    B_ref: float = 2e6
    E_M: float = 1e-9
    zeta: float = 50.0  # tabulated transition exponent; no governing equation uses it
    alpha: tuple = (2e-6, 2e-6, 2e-6, 2e-6, 2e-6, 2.5, 7.75)
    mu0: RegionConstants = field(
        default_factory=lambda: RegionConstants(MU0_VACUUM, 1.26e2, 1000.0, MU0_VACUUM)
    )
    sigma0: RegionConstants = field(
        default_factory=lambda: RegionConstants(0.0, 1.0, 1.0, 0.0)
    )
    eps0: RegionConstants = field(
        default_factory=lambda: RegionConstants(0.0, 0.0, 0.0, 0.0)
    )
    rho0: RegionConstants = field(
        default_factory=lambda: RegionConstants(0.0, 0.0, 0.0, 0.0)
    )
    m: float = 2.0
    c1: float = 0.1
    c2: float = 0.9

    def __post_init__(self):
        if self.E <= 0:
            raise UnitError(f"Young's modulus must be positive, got {self.E}")
        if not (-1.0 < self.nu < 0.5):
            raise UnitError(f"Poisson ratio {self.nu} outside (-1, 0.5)")
        for name in ("G_c", "l_d", "B_ref"):
            if getattr(self, name) <= 0:
                raise UnitError(f"{name} must be positive")
        if self.eta_d < 0:
            raise UnitError("damage viscosity must be non-negative")
        if len(self.alpha) != 7:
            raise UnitError("alpha must hold 7 entries (alpha0..alpha6)")
        for region in ("vacuum", "wire", "solid", "fracture"):
            if self.mu0.of(region) <= 0:
                raise UnitError(f"permeability of {region} must be positive")
            if self.sigma0.of(region) < 0:
                raise UnitError(f"conductivity of {region} must be non-negative")
        if self.K_n <= 0:
            raise UnitError("bulk modulus K_n must be positive")

    # -- derived elastic constants ------------------------------------------

    @property
    def lam(self):
        return self.E * self.nu / ((1 + self.nu) * (1 - 2 * self.nu))

    @property
    def mu_shear(self):
        return self.E / (2 * (1 + self.nu))

    @property
    def K_n(self):
        return self.lam + 2 * self.mu_shear / 3

    @property
    def transition(self):
        return TransitionRule(self.m, self.c1, self.c2, self.kappa)

    def with_overrides(self, **kw):
        return replace(self, **kw)


# Table defaults for the shipped example families.
def example12_materials(**overrides):
    return MaterialSet(**overrides)


def example3_materials(**overrides):
    base = dict(
        E=16.0,
        nu=0.2,
        mu0=RegionConstants(MU0_VACUUM, 1.26e3, 1e7, MU0_VACUUM),
    )
    base.update(overrides)
    return MaterialSet(**base)


# ---------------------------------------------------------------------------
# indicator / degradation functions

def _check_d(d):
    d = np.asarray(d, dtype=float)
    if np.any(d < -_CLAMP_SLACK) or np.any(d > 1 + _CLAMP_SLACK):
        raise DomainError("crack phase-field outside [0, 1]")
    return np.clip(d, 0.0, 1.0)


def g_solid(d, rule):
    """Descending indicator: 1 below c1, 0 above c2, power-law ramp between."""
    d = _check_d(d)
    ramp = ((rule.c2 - d) / (rule.c2 - rule.c1)) ** rule.m
    out = np.where(d < rule.c1, 1.0, np.where(d > rule.c2, 0.0, ramp))
    return out if out.ndim else float(out)


def g_fracture(d, rule):
    """Ascending indicator, mirror of g_solid."""
    d = _check_d(d)
    ramp = ((d - rule.c1) / (rule.c2 - rule.c1)) ** rule.m
    out = np.where(d < rule.c1, 0.0, np.where(d > rule.c2, 1.0, ramp))
    return out if out.ndim else float(out)


def g_elastic(d, kappa):
    """Quadratic stiffness degradation (1-k)(1-d)^2 + k."""
    d = _check_d(d)
    out = (1.0 - kappa) * (1.0 - d) ** 2 + kappa
    return out if out.ndim else float(out)


def interp_constants(d, mat, rule=None):
    """Crack-interpolated electromagnetic constants at phase-field value d.

    Returns a dict with 'mu0', 'eps0', 'sigma0', 'rho0'; each entry is
    G_s(d) * solid + G_f(d) * fracture values.
    """
    rule = rule or mat.transition
    gs = g_solid(d, rule)
    gf = g_fracture(d, rule)
    out = {}
    for name in ("mu0", "eps0", "sigma0", "rho0"):
        rc = getattr(mat, name)
        out[name] = gs * rc.solid + gf * rc.fracture
    return out
