"""Energy densities and derived stress/magnetization quantities.

Plane strain throughout: strains are in-plane 2x2 tensors with eps_zz = 0,
traces and norms are taken in the 3D sense, and out-of-plane stress
components are tracked for equivalent-stress output.  The magnetic flux
density B is the in-plane 2-vector obtained from the out-of-plane vector
potential.

All functions broadcast over leading batch axes: eps (..., 2, 2),
B (..., 2), d (...).  The Cauchy stress is the exact strain derivative of
the energy density and the magnetization its exact (negated) flux-density
derivative; the test-suite pins both by central finite differences, which
fixes every sign convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EnergyOverflow
from .fracture import surface_density
from .materials import g_elastic, interp_constants

_EXP_GUARD = 200.0


# ---------------------------------------------------------------------------
# kinematic state

def invariants_strain(eps):
    """(I1, I2) = (tr eps, tr eps^2) in the 3D sense with eps_zz = 0."""
    eps = np.asarray(eps, dtype=float)
    i1 = eps[..., 0, 0] + eps[..., 1, 1]
    i2 = (eps[..., 0, 0] ** 2 + eps[..., 1, 1] ** 2
          + 2.0 * eps[..., 0, 1] * eps[..., 1, 0])
    return i1, i2


def invariants_magnetic(B, eps):
    """(I4, I5, I6) = (B.B, B.eps.B, B.eps^2.B)."""
    B = np.asarray(B, dtype=float)
    eps = np.asarray(eps, dtype=float)
    i4 = np.einsum("...i,...i->...", B, B)
    eB = np.einsum("...ij,...j->...i", eps, B)
    i5 = np.einsum("...i,...i->...", B, eB)
    i6 = np.einsum("...i,...i->...", eB, eB)
    return i4, i5, i6


def split_strain(eps):
    """Volumetric/deviatoric split with the 3D projector.

    Returns the in-plane blocks (eps_vol, eps_dev); both carry an
    out-of-plane component tr(eps)/3 resp. -tr(eps)/3, available from
    `split_strain_zz`.
    """
    eps = np.asarray(eps, dtype=float)
    i1, _ = invariants_strain(eps)
    eye = np.eye(2)
    vol = (i1 / 3.0)[..., None, None] * eye
    return vol, eps - vol


def split_strain_zz(eps):
    """(vol_zz, dev_zz) companions of split_strain."""
    i1, _ = invariants_strain(eps)
    return i1 / 3.0, -i1 / 3.0


@dataclass(frozen=True)
class StrainState:
    eps: np.ndarray
    I1: float
    I2: float

    @classmethod
    def from_tensor(cls, eps):
        i1, i2 = invariants_strain(eps)
        return cls(np.asarray(eps, dtype=float), i1, i2)


@dataclass(frozen=True)
class MagneticState:
    B: np.ndarray
    I4: float
    I5: float
    I6: float

    @classmethod
    def from_fields(cls, B, eps):
        i4, i5, i6 = invariants_magnetic(B, eps)
        return cls(np.asarray(B, dtype=float), i4, i5, i6)


@dataclass(frozen=True)
class EnergyBreakdown:
    W_elas: np.ndarray
    W_mag: np.ndarray
    W_mos: np.ndarray
    W_frac: np.ndarray
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    H_plus: np.ndarray

    @property
    def total(self):
        return self.W_elas + self.W_mag + self.W_mos + self.W_frac


# ---------------------------------------------------------------------------
# elastic split

def heaviside_plus(i1):
    return np.where(np.asarray(i1) > 0.0, 1.0, 0.0)


def psi_elastic(eps, mat):
    """Tension/compression split (psi_plus, psi_minus) of the strain energy.

    psi_vol = K_n/2 I1^2, psi_dev = mu (I2 - I1^2/3) = mu |dev eps|^2; the
    deviatoric part carries the sign that makes it non-negative and makes
    2 mu dev(eps) its exact derivative.
    """
    i1, i2 = invariants_strain(eps)
    psi_vol = 0.5 * mat.K_n * i1 ** 2
    psi_dev = mat.mu_shear * (i2 - i1 ** 2 / 3.0)
    hp = heaviside_plus(i1)
    return hp * psi_vol + psi_dev, (1.0 - hp) * psi_vol


def elastic_stress_split(eps, mat):
    """Plane-strain tensile/compressive stress parts (2x2 blocks + zz)."""
    i1, _ = invariants_strain(eps)
    hp = heaviside_plus(i1)
    _, dev = split_strain(eps)
    eye = np.eye(2)
    sp = (mat.K_n * hp * i1)[..., None, None] * eye + 2.0 * mat.mu_shear * dev
    sm = (mat.K_n * (1.0 - hp) * i1)[..., None, None] * eye
    sp_zz = mat.K_n * hp * i1 - 2.0 * mat.mu_shear * i1 / 3.0
    sm_zz = mat.K_n * (1.0 - hp) * i1
    return sp, sm, sp_zz, sm_zz


# ---------------------------------------------------------------------------
# magnetization series coefficients

def g_coefficients(i1, mat):
    """Coefficients g_0..g_4 of the magnetization series and their
    I1-derivatives, as arrays stacked on the last axis.

    g_0 couples to the undamaged solid permeability; the exponentials are
    guarded against blow-up (strains of admissible magnitude keep the
    arguments far below the guard).
    """
    i1 = np.asarray(i1, dtype=float)
    if np.any((16.0 / 3.0) * i1 > _EXP_GUARD):
        raise EnergyOverflow("magnetization coefficient exponent out of range")
    a = mat.alpha
    mu_s = mat.mu0.solid
    e0 = np.exp(0.75 * i1)
    g = [0.75 * a[0] * e0 - (1.0 / 3.0) * (1.0 / mu_s - a[5])]
    dg = [0.5625 * a[0] * e0]
    for i in range(1, 5):
        ei = np.exp((4.0 * (i + 1) / 3.0) * i1)
        g.append((3.0 * (i + 1) / 4.0) * a[i] * ei)
        dg.append((i + 1) ** 2 * a[i] * ei)
    return np.stack(g, axis=-1), np.stack(dg, axis=-1)


def _mag_sums(i1, i4, mat):
    """(S, S_sigma, W_mag) with
    S       = sum g_i (I4/B_ref^2)^i            (magnetization weight)
    S_sigma = 1/2 sum dg_i/(i+1) I4^(i+1)/B_ref^(2i)   (isotropic stress)
    W_mag   = 1/2 sum g_i/(i+1)  I4^(i+1)/B_ref^(2i)
    """
    g, dg = g_coefficients(i1, mat)
    x = np.asarray(i4, dtype=float)[..., None] / mat.B_ref ** 2
    powers = x ** np.arange(5)
    t = powers * np.asarray(i4, dtype=float)[..., None]
    denom = np.arange(1, 6, dtype=float)
    S = np.sum(g * powers, axis=-1)
    S_sigma = 0.5 * np.sum(dg / denom * t, axis=-1)
    W_mag = 0.5 * np.sum(g / denom * t, axis=-1)
    return S, S_sigma, W_mag


# ---------------------------------------------------------------------------
# energy and its derivatives

def energy_total(eps, B, d, mat, grad_d=None, variant="AT2"):
    """Pseudo-energy density split into its four contributions.

    The magnetostrictive coupling carries the same degradation function as
    the tensile elastic energy, so fully broken material stops exchanging
    magneto-mechanical work (its constants having morphed to vacuum ones).
    The fracture part uses the local surface density (plus the gradient
    term when grad_d is given) scaled by G_c.
    """
    eps = np.asarray(eps, dtype=float)
    B = np.asarray(B, dtype=float)
    d = np.asarray(d, dtype=float)
    i1, _ = invariants_strain(eps)
    i4, i5, i6 = invariants_magnetic(B, eps)
    psi_p, psi_m = psi_elastic(eps, mat)
    ge = g_elastic(d, mat.kappa)
    w_elas = ge * psi_p + psi_m
    _, _, w_mag = _mag_sums(i1, i4, mat)
    w_mos = ge * 0.5 * (mat.alpha[5] * i5 + mat.alpha[6] * i6)
    if grad_d is None:
        grad_d = np.zeros(B.shape)
    w_frac = mat.G_c * surface_density(d, grad_d, mat.l_d, variant)
    return EnergyBreakdown(w_elas, w_mag, w_mos, w_frac,
                           psi_p, psi_m, heaviside_plus(i1))


def cauchy_stress(eps, B, d, mat):
    """Strain derivative of the energy density; returns (sigma 2x2, sigma_zz)."""
    eps = np.asarray(eps, dtype=float)
    B = np.asarray(B, dtype=float)
    d = np.asarray(d, dtype=float)
    i1, _ = invariants_strain(eps)
    i4, _, _ = invariants_magnetic(B, eps)
    sp, sm, sp_zz, sm_zz = elastic_stress_split(eps, mat)
    ge = np.asarray(g_elastic(d, mat.kappa))
    _, s_sigma, _ = _mag_sums(i1, i4, mat)

    eye = np.eye(2)
    BB = np.einsum("...i,...j->...ij", B, B)
    BBe = np.einsum("...ik,...kj->...ij", BB, eps)
    mos = (0.5 * mat.alpha[5] * BB
           + 0.5 * mat.alpha[6] * (BBe + np.swapaxes(BBe, -1, -2)))
    sig = (ge[..., None, None] * (sp + mos) + sm
           + s_sigma[..., None, None] * eye)
    sig_zz = ge * sp_zz + sm_zz + s_sigma
    return sig, sig_zz


def magnetization(eps, B, d, mat):
    """M = -dW/dB: series part collinear with B plus the degraded
    magnetostrictive part."""
    eps = np.asarray(eps, dtype=float)
    B = np.asarray(B, dtype=float)
    i1, _ = invariants_strain(eps)
    i4, _, _ = invariants_magnetic(B, eps)
    S, _, _ = _mag_sums(i1, i4, mat)
    ge = np.asarray(g_elastic(np.asarray(d, dtype=float), mat.kappa))
    eB = np.einsum("...ij,...j->...i", eps, B)
    eeB = np.einsum("...ij,...j->...i", eps, eB)
    return -S[..., None] * B - ge[..., None] * (mat.alpha[5] * eB
                                                + mat.alpha[6] * eeB)


def em_stress(B, M, d, mat, region="solid"):
    """Electromagnetic stress (2x2, zz).

    solid: Maxwell term with the crack-interpolated permeability plus the
    magnetization exchange terms; vacuum: Maxwell term with the vacuum
    permeability and M = 0.
    """
    B = np.asarray(B, dtype=float)
    i4 = np.einsum("...i,...i->...", B, B)
    BB = np.einsum("...i,...j->...ij", B, B)
    eye = np.eye(2)
    if region == "vacuum":
        mu = mat.mu0.vacuum
        tau = (mat.E_M / mu) * (BB - 0.5 * i4[..., None, None] * eye)
        return tau, -(mat.E_M / mu) * 0.5 * i4
    if region != "solid":
        raise ValueError(f"em_stress region must be 'solid' or 'vacuum', got {region!r}")
    M = np.asarray(M, dtype=float)
    mu = np.asarray(interp_constants(d, mat)["mu0"])
    MB = np.einsum("...i,...i->...", M, B)
    BM = np.einsum("...i,...j->...ij", B, M)
    tau = ((mat.E_M / mu)[..., None, None] * (BB - 0.5 * i4[..., None, None] * eye)
           + MB[..., None, None] * eye - BM)
    tau_zz = -(mat.E_M / mu) * 0.5 * i4 + MB
    return tau, tau_zz


def total_stress(eps, B, d, mat):
    """tau = cauchy_stress + em_stress (solid branch); returns (2x2, zz)."""
    sig, sig_zz = cauchy_stress(eps, B, d, mat)
    M = magnetization(eps, B, d, mat)
    tau_m, tau_m_zz = em_stress(B, M, d, mat, region="solid")
    return sig + tau_m, sig_zz + tau_m_zz


def h_field(eps, B, d, mat):
    """Magnetic field strength H derived from the constitutive model.

    With the magnetostrictive weights zeroed this satisfies
    B = mu0(d) (H + M) identically.
    """
    eps = np.asarray(eps, dtype=float)
    B = np.asarray(B, dtype=float)
    i1, _ = invariants_strain(eps)
    i4, _, _ = invariants_magnetic(B, eps)
    S, _, _ = _mag_sums(i1, i4, mat)
    mu = np.asarray(interp_constants(d, mat)["mu0"])
    ge = np.asarray(g_elastic(np.asarray(d, dtype=float), mat.kappa))
    eB = np.einsum("...ij,...j->...i", eps, B)
    eeB = np.einsum("...ij,...j->...i", eps, eB)
    return (1.0 / mu)[..., None] * B + S[..., None] * B \
        - 0.5 * ge[..., None] * (mat.alpha[5] * eB + mat.alpha[6] * eeB)


def von_mises(tau, tau_zz):
    """Equivalent stress from the symmetrized 3D deviator (plane strain)."""
    tau = np.asarray(tau, dtype=float)
    sxx, syy = tau[..., 0, 0], tau[..., 1, 1]
    sxy = 0.5 * (tau[..., 0, 1] + tau[..., 1, 0])
    szz = np.asarray(tau_zz, dtype=float)
    p = (sxx + syy + szz) / 3.0
    return np.sqrt(1.5 * ((sxx - p) ** 2 + (syy - p) ** 2 + (szz - p) ** 2
                          + 2.0 * sxy ** 2))
