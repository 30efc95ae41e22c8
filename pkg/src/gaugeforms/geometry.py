"""Geometric invariants extracted from a symbol.

The determinant of the principal part is a momentum quadratic form
det(E^a p_a) = -g^{ab} p_a p_b, which yields a weight-2 metric density
g^{ab} (Lorentzian in 4D, Riemannian in 3D), a scalar density rho, and the
metric proper.  The zeroth-order part, corrected by a generalized Poisson
bracket of the principal part with itself, is the covariant subprincipal
symbol; solving the linear system that equates it to the principal part
evaluated on a covector recovers the electromagnetic covector potential
(split into magnetic and electric parts in 3D).  Two sign invariants, the
topological and temporal charges, complete the picture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import (
    DegenerateMetric,
    NonConstantCharge,
    NotTimelike,
    ResidualTooLarge,
    SignatureViolation,
)
from .symbol import FullSymbol

CHARGE_TOL = 1e-9
TIMELIKE_MARGIN = 1e-10
POTENTIAL_RESIDUAL_TOL = 1e-8
IMAG_RESIDUE_TOL = 1e-10


def adjugate2(m: np.ndarray) -> np.ndarray:
    """Adjugate of stacked 2x2 matrices: [[a,b],[c,d]] -> [[d,-b],[-c,a]]."""
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    out[..., 1, 1] = m[..., 0, 0]
    return out


@dataclass
class MetricData:
    """Metric density, scalar density and metric of a symbol on the grid.

    gd      -- g^{ab} metric density values, (K, m, m) real
    gd_inv  -- its pointwise inverse (the lowered-index density)
    rho     -- (-det gd)^(1/6) in 4D, (det gd)^(1/4) in 3D, (K,)
    g_up    -- contravariant metric rho^-2 * gd
    g_down  -- covariant metric, pointwise inverse of g_up
    signature -- "lorentzian" or "riemannian"
    """

    gd: np.ndarray
    gd_inv: np.ndarray
    rho: np.ndarray
    g_up: np.ndarray
    g_down: np.ndarray
    signature: str


def metric_density(Ev: np.ndarray) -> np.ndarray:
    """g^{ab} from stacked coefficients Ev (m, K, 2, 2), via the 2x2
    determinant polarization det X = ((tr X)^2 - tr X^2) / 2."""
    tr = np.einsum("akii->ak", Ev)
    trEE = np.einsum("akij,bkji->abk", Ev, Ev)
    gd = 0.5 * (trEE - np.einsum("ak,bk->abk", tr, tr))
    return np.ascontiguousarray(np.moveaxis(gd.real, -1, 0))


def metric_data(symbol: FullSymbol) -> MetricData:
    m = symbol.dim
    gd = metric_density(symbol.E_values())
    eig = np.linalg.eigvalsh(gd)
    scale = float(np.abs(eig).max())
    if scale == 0.0 or np.abs(eig).min() <= 1e-12 * scale:
        raise DegenerateMetric("metric density is singular somewhere on the grid")

    if m == 3:
        if eig.min() <= 0:
            raise SignatureViolation("3D metric density is not positive definite everywhere")
        det = np.linalg.det(gd)
        rho = det ** 0.25
        signature = "riemannian"
    else:
        n_neg = (eig < 0).sum(axis=1)
        if not np.all(n_neg == 1):
            raise SignatureViolation(
                "4D metric density does not have Lorentzian signature (3, 1) everywhere")
        det = np.linalg.det(gd)
        if not np.all(det < 0):
            raise SignatureViolation("det g^{ab} must be negative everywhere in 4D")
        rho = (-det) ** (1.0 / 6.0)
        signature = "lorentzian"

    g_up = gd / rho[:, None, None] ** 2
    return MetricData(
        gd=gd,
        gd_inv=np.linalg.inv(gd),
        rho=rho,
        g_up=g_up,
        g_down=np.linalg.inv(g_up),
        signature=signature,
    )


def covariant_subprincipal(symbol: FullSymbol, md: MetricData) -> np.ndarray:
    """The zeroth-order part corrected to transform covariantly.

    For symbols linear in momentum the second momentum derivative of the
    generalized Poisson bracket {P, adj P, P} has the closed form

        B^{ab} = dE^a_g (adj E^b) E^g + dE^b_g (adj E^a) E^g
               - E^g (adj E^b) dE^a_g - E^g (adj E^a) dE^b_g

    (sum over g), and the correction is (i/16) g_{ab} B^{ab} with the
    lowered-index metric density.  Returns (K, 2, 2), Hermitian.
    """
    Ev = symbol.E_values()
    dE = symbol.E_derivs()
    Fv = symbol.F_values()
    adjE = adjugate2(Ev)

    # M1[a,b] = sum_g dE[a,g] adjE[b] E[g];  M2[a,b] = sum_g E[g] adjE[b] dE[a,g]
    Q = np.einsum("bkim,gkmj->bgkij", adjE, Ev, optimize=True)
    M1 = np.einsum("agkim,bgkmj->abkij", dE, Q, optimize=True)
    P = np.einsum("gkim,bkmj->gbkij", Ev, adjE, optimize=True)
    M2 = np.einsum("gbkim,agkmj->abkij", P, dE, optimize=True)

    # symmetrized in (a, b) against the symmetric g_{ab}: contract twice M1 - M2
    corr = (1j / 8.0) * np.einsum("kab,abkij->kij", md.gd_inv, M1 - M2, optimize=True)
    return Fv + corr


@dataclass
class CovectorPotential:
    """Electromagnetic covector potential; A4 is the 3D electric part."""

    A: np.ndarray              # (m, K) real
    A4: np.ndarray | None      # (K,) real, 3D only
    residual: float            # defining-relation residual, sup norm
    imag_residue: float

    def periods(self, chart) -> np.ndarray:
        """Per-axis loop integrals of A (grid average times the period)."""
        from .chart import PERIOD
        return self.A.mean(axis=1) * PERIOD


def potentials(symbol: FullSymbol, md: MetricData) -> CovectorPotential:
    """Solve csub = E^a A_a (+ A4 Id in 3D) for the real covector A.

    Uses the closed form A_a = -1/2 g_{ab} tr(csub adj E^b) and verifies
    the defining relation to POTENTIAL_RESIDUAL_TOL.
    """
    csub = covariant_subprincipal(symbol, md)
    Ev = symbol.E_values()
    adjE = adjugate2(Ev)
    tr_csub_adj = np.einsum("kim,bkmi->bk", csub, adjE, optimize=True)
    A_c = -0.5 * np.einsum("kab,bk->ak", md.gd_inv, tr_csub_adj, optimize=True)
    imag = float(np.abs(A_c.imag).max())
    A = A_c.real

    A4 = None
    recon = np.einsum("ak,akij->kij", A, Ev, optimize=True)
    if symbol.dim == 3:
        tr_csub = 0.5 * np.einsum("kii->k", csub)
        imag = max(imag, float(np.abs(tr_csub.imag).max()))
        A4 = tr_csub.real
        recon = recon + A4[:, None, None] * np.eye(2)

    if imag > IMAG_RESIDUE_TOL:
        raise ResidualTooLarge(f"potential has imaginary residue {imag:.3e}")
    residual = float(np.abs(csub - recon).max())
    if residual > POTENTIAL_RESIDUAL_TOL:
        raise ResidualTooLarge(
            f"defining relation for the potential fails: residual {residual:.3e}")
    return CovectorPotential(A, A4, residual, imag)


@dataclass
class Charges:
    """Sign invariants of a symbol.

    c_top -- orientation of the principal part against the coordinate
             orientation; +1 or -1
    c_tem -- 4D only: orientation against the reference covector q_ref
    t     -- 4D only: the timelike vector field tr(E^a)/rho, (m, K)
    c_top_dev -- max pointwise deviation of the charge from its sign
    """

    c_top: int
    c_tem: int | None
    t: np.ndarray | None
    c_top_dev: float
    timelike_max: float | None = None


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length, j = 0, start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _constant_sign(values: np.ndarray, what: str) -> tuple[int, float]:
    s = int(np.sign(values.flat[0]))
    dev = float(np.abs(values - s).max())
    if s == 0 or dev > CHARGE_TOL:
        raise NonConstantCharge(
            f"{what} is not constantly +1 or -1: max deviation {dev:.3e}")
    return s, dev


def charges(symbol: FullSymbol, md: MetricData) -> Charges:
    """Topological charge (and, in 4D, timelike field and temporal charge).

    c_top = -(i/2) rho^(1-m) tr(E^[1 ... E^m]) with the product
    antisymmetrized over the coordinate slots; the prefactor is
    sqrt(-det g_{ab}) = rho^-3 in 4D and sqrt(det g_{ab}) = rho^-2 in 3D
    for the lowered-index metric density.  The antisymmetrization is what
    makes the trace expression equal sgn(det e_j^a) for every valid
    symbol; the plain product agrees with it on frame-diagonal symbols
    but is not gauge invariant on its own.
    """
    Ev = symbol.E_values()
    m = symbol.dim
    tr = np.zeros(Ev.shape[1], dtype=complex)
    for perm in permutations(range(m)):
        sign = _perm_sign(perm)
        prod = Ev[perm[0]]
        for a in perm[1:]:
            prod = prod @ Ev[a]
        tr += sign * np.einsum("kii->k", prod)
    tr /= math.factorial(m)
    vals = (-0.5j * md.rho ** (1 - m) * tr)
    if np.abs(vals.imag).max() > CHARGE_TOL:
        raise NonConstantCharge(
            f"topological charge has imaginary residue {np.abs(vals.imag).max():.3e}")
    c_top, dev = _constant_sign(vals.real, "topological charge")

    if m == 3:
        return Charges(c_top, None, None, dev)

    t = np.einsum("akii->ak", Ev).real / md.rho
    tt = np.einsum("kab,ak,bk->k", md.g_down, t, t, optimize=True)
    timelike_max = float(tt.max())
    if timelike_max >= -TIMELIKE_MARGIN:
        raise NotTimelike(f"tr E^a / rho fails the timelike test: max g(t,t) = {timelike_max:.3e}")
    q = np.asarray(symbol.chart.q_ref)
    tq = np.einsum("ak,a->k", t, q)
    s = int(np.sign(tq.flat[0]))
    if s == 0 or np.sign(tq).min() != np.sign(tq).max():
        raise NonConstantCharge("temporal charge changes sign over the grid")
    return Charges(c_top, s, t, dev, timelike_max)
