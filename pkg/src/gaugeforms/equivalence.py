"""Gauge action on symbols and the pairwise equivalence decision.

A gauge map R acts on a symbol by conjugating the momentum coefficients
and adding a derivative commutator to the zeroth-order part:

    E~^a = R* E^a R
    F~   = R* F R + (i/2) (R*_{x^a} E^a R - R* E^a R_{x^a})

The decision procedure compares two symbols stage by stage: charges,
metric (equal, or conformally related for the full general-linear group),
frame transition, monodromy of its spin lift around the torus generators,
explicit reconstruction of a gauge from the global lift, and finally the
potential comparison that pins the remaining abelian phase freedom.  The
report keeps the full evidence trail for every stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .chart import PERIOD, Chart, spectral_derivative
from .errors import (
    InvalidComparison,
    InvalidSymbol,
    NoSingleValuedPhase,
    NotClosed,
    NotInGroup,
    SingularGauge,
    VanishingVolumeForm,
)
from .framing import frame_from_symbol, global_lift_torus, monodromy_signs, transition
from .geometry import charges, metric_data, potentials
from .symbol import FullSymbol, GridMatrixField, validate

GROUPS_4D = ("gl", "sl")
GROUPS_3D = ("u", "su")
GROUP_MEMBERSHIP_TOL = 1e-10


@dataclass
class Tolerances:
    """Comparison tolerances; defaults are the contract values."""

    metric_equal: float = 1e-9
    conformal_spread: float = 1e-8
    electric: float = 1e-9
    potential_match: float = 1e-8
    period: float = 1e-8
    closed_form: float = 1e-8
    residual_principal: float = 1e-8
    residual_full: float = 1e-7


def _conj_t(values: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(values, -1, -2))


class GaugeMap:
    """A matrix field R(x) tagged with its group (gl, sl, u, su)."""

    def __init__(self, field_obj, group: str, chart: Chart | None = None):
        group = group.lower()
        if group not in GROUPS_4D + GROUPS_3D:
            raise InvalidComparison(f"unknown gauge group {group!r}")
        if isinstance(field_obj, GridMatrixField):
            chart = field_obj.chart
        elif chart is None:
            raise InvalidComparison("expression-backed gauge maps need a chart")
        self.field = field_obj
        self.group = group
        self.chart = chart
        self._grid = None

    def grid_eval(self):
        """(values, derivs) on the chart grid."""
        if self._grid is None:
            if isinstance(self.field, ex.MatrixField):
                self._grid = self.field.eval(self.chart.grid_points())
            else:
                self._grid = (self.field.values, self.field.derivs())
        return self._grid

    def membership_deviation(self) -> float:
        """How far the samples are from the tagged group."""
        Rv, _ = self.grid_eval()
        det = np.linalg.det(Rv)
        if self.group == "gl":
            return 0.0 if np.abs(det).min() > GROUP_MEMBERSHIP_TOL else float("inf")
        if self.group == "sl":
            return float(np.abs(det - 1.0).max())
        unitary_dev = float(np.abs(_conj_t(Rv) @ Rv - np.eye(2)).max())
        if self.group == "u":
            return unitary_dev
        return max(unitary_dev, float(np.abs(det - 1.0).max()))

    def verify(self) -> None:
        dev = self.membership_deviation()
        if dev > GROUP_MEMBERSHIP_TOL:
            raise NotInGroup(f"gauge map leaves {self.group.upper()}: deviation {dev:.3e}")

    def inverse(self) -> "GaugeMap":
        if isinstance(self.field, ex.MatrixField):
            det = self.field.det()
            inv_entries = self.field.adjugate()
            inv = ex.MatrixField([[ex.Div(e, det) for e in row] for row in inv_entries.entries])
            return GaugeMap(inv, self.group, self.chart)
        Rv, dRv = self.grid_eval()
        Rinv = np.linalg.inv(Rv)
        dRinv = np.stack([-Rinv @ dRv[g] @ Rinv for g in range(self.chart.dim)])
        return GaugeMap(GridMatrixField(self.chart, Rinv, dRinv), self.group)


def apply_gauge(symbol: FullSymbol, gauge: GaugeMap) -> FullSymbol:
    """The transformed symbol S(Ru, Rv); exact derivative propagation."""
    chart = symbol.chart
    if gauge.chart != chart:
        raise InvalidComparison("gauge map and symbol live on different charts")
    Rv, dRv = gauge.grid_eval()
    if np.abs(np.linalg.det(Rv)).min() <= 1e-12:
        raise SingularGauge("gauge map is singular somewhere on the grid")
    Rh = _conj_t(Rv)
    dRh = _conj_t(dRv)
    Ev, dEv, Fv = symbol.E_values(), symbol.E_derivs(), symbol.F_values()
    m = chart.dim

    Et = np.stack([Rh @ Ev[a] @ Rv for a in range(m)])
    dEt = np.empty_like(dEv)
    for a in range(m):
        for g in range(m):
            dEt[a, g] = dRh[g] @ Ev[a] @ Rv + Rh @ dEv[a, g] @ Rv + Rh @ Ev[a] @ dRv[g]
    Ft = Rh @ Fv @ Rv
    for a in range(m):
        Ft = Ft + 0.5j * (dRh[a] @ Ev[a] @ Rv - Rh @ Ev[a] @ dRv[a])

    fields = [GridMatrixField(chart, Et[a], dEt[a]) for a in range(m)]
    return FullSymbol(fields, GridMatrixField(chart, Ft), chart)


def apply_gauge_symbolic(symbol: FullSymbol, gauge: GaugeMap) -> FullSymbol:
    """Gauge action staying inside the expression language.

    Requires expression-backed fields on both sides; used where the result
    must be re-emitted as source text.
    """
    R = gauge.field
    if not isinstance(R, ex.MatrixField) or not all(
            isinstance(f, ex.MatrixField) for f in (*symbol.E, symbol.F)):
        raise InvalidComparison("symbolic gauge action needs expression-backed fields")
    Rh = R.conj_transpose()
    m = symbol.dim
    Et = [Rh @ symbol.E[a] @ R for a in range(m)]
    Ft = Rh @ symbol.F @ R
    half_i = ex.Mul(ex.Num(0.5), ex.Imag())
    for a in range(m):
        dRh = Rh.d(a + 1)
        dR = R.d(a + 1)
        comm = (dRh @ symbol.E[a] @ R) - (Rh @ symbol.E[a] @ dR)
        Ft = Ft + comm.scale(half_i)
    return FullSymbol(Et, Ft, symbol.chart)


def volume_form_reduction(symbol_a: FullSymbol, c, symbol_b: FullSymbol, c_t):
    """Align two complex volume forms so the special-group comparison applies.

    Applies Q = diag(c/c~, 1) to the second symbol, after which the pair
    carries the same volume form and only determinant-one gauges remain.
    Returns (symbol_a, reduced symbol_b, Q).
    """
    chart = symbol_a.chart
    for f in (c, c_t):
        vals, _ = ex.eval_batch(f, chart.grid_points())
        if np.abs(vals).min() <= 1e-12:
            raise VanishingVolumeForm("volume form vanishes somewhere on the grid")
    q_field = ex.MatrixField([[ex.Div(c, c_t), ex.ZERO], [ex.ZERO, ex.ONE]])
    q_gauge = GaugeMap(q_field, "gl", chart)
    return symbol_a, apply_gauge(symbol_b, q_gauge), q_gauge


# -- de Rham comparison of potentials -----------------------------------------

def _closedness_deviation(omega: np.ndarray, chart: Chart) -> float:
    m = chart.dim
    w = omega.reshape((m,) + chart.grid_shape)
    dev = 0.0
    for a in range(m):
        for b in range(a + 1, m):
            curl = spectral_derivative(w[b], axis=a) - spectral_derivative(w[a], axis=b)
            dev = max(dev, float(np.abs(curl).max()))
    return dev


def axis_periods(omega: np.ndarray, chart: Chart) -> np.ndarray:
    """Loop integrals of a closed 1-form along the torus generators.

    For closed forms the integral along any parallel circle agrees, so the
    grid average times the period is used.
    """
    return omega.reshape(chart.dim, -1).mean(axis=1).real * PERIOD


@dataclass
class CohomologyReport:
    closed_dev: float
    periods: np.ndarray
    same_class: bool
    lattice_mode: str


def cohomology_compare(A: np.ndarray, A_t: np.ndarray, chart: Chart,
                       lattice_mode: str = "strict",
                       tol: Tolerances | None = None) -> CohomologyReport:
    """Decide whether two potentials differ by an admissible closed form.

    strict      -- all periods of (A~ - A) vanish (same de Rham class)
    half_period -- periods lie in pi * Z (admits gauge determinants that
                   wind around the torus, which shift periods by pi)
    """
    tol = tol or Tolerances()
    if lattice_mode not in ("strict", "half_period"):
        raise InvalidComparison(f"unknown lattice mode {lattice_mode!r}")
    omega = np.asarray(A_t) - np.asarray(A)
    dev = _closedness_deviation(omega, chart)
    if dev > tol.closed_form:
        raise NotClosed(f"potential difference is not closed: max curl {dev:.3e}")
    periods = axis_periods(omega, chart)
    if lattice_mode == "strict":
        same = bool(np.abs(periods).max() <= tol.period)
    else:
        same = bool(np.abs(periods - np.pi * np.round(periods / np.pi)).max() <= tol.period)
    return CohomologyReport(dev, periods, same, lattice_mode)


def construct_phase(omega: np.ndarray, chart: Chart,
                    tol: Tolerances | None = None) -> tuple[np.ndarray, np.ndarray]:
    """A scalar phase phi with grad(phi) = omega, by spectral antidifferentiation.

    Returns (phi on the grid (K,), integer winding per axis).  The winding
    is zero when all periods vanish; periods in 2 pi Z give a circle-valued
    phase (exp(i phi) single-valued); anything else raises.
    """
    tol = tol or Tolerances()
    m = chart.dim
    omega = np.asarray(omega, dtype=float)
    dev = _closedness_deviation(omega, chart)
    if dev > tol.closed_form:
        raise NotClosed(f"target 1-form is not closed: max curl {dev:.3e}")
    periods = axis_periods(omega, chart)
    winding = np.round(periods / PERIOD).astype(int)
    if np.abs(periods - PERIOD * winding).max() > tol.period:
        raise NoSingleValuedPhase(
            f"periods {periods} are not integer multiples of 2*pi")

    w = omega.reshape((m,) + chart.grid_shape)
    means = w.reshape(m, -1).mean(axis=1)
    n = chart.resolution
    k1 = np.fft.fftfreq(n, d=1.0 / n)
    kgrids = np.meshgrid(*(k1,) * m, indexing="ij")
    k2 = sum(kg ** 2 for kg in kgrids)
    k2[(0,) * m] = 1.0
    psi_hat = np.zeros(chart.grid_shape, dtype=complex)
    for a in range(m):
        psi_hat += -1j * kgrids[a] * np.fft.fftn(w[a] - means[a]) / k2
    psi = np.fft.ifftn(psi_hat).real
    xs = chart.grid_points()
    phi = psi.reshape(-1) + np.einsum("a,ak->k", means, xs)
    return phi - phi[0], winding


# -- the decision procedure ----------------------------------------------------

@dataclass
class EquivalenceReport:
    """Verdict plus the per-stage evidence trail of a comparison."""

    group: str
    mode: str
    lattice_mode: str
    verdict: bool
    failed_stage: str | None
    stages: dict = field(default_factory=dict)
    monodromy: tuple[int, ...] | None = None
    residual_principal: float | None = None
    residual_full: float | None = None
    gauge: GaugeMap | None = None

    def to_dict(self, sample_stride: int | None = None) -> dict:
        out = {
            "group": self.group,
            "mode": self.mode,
            "lattice_mode": self.lattice_mode,
            "verdict": "equivalent" if self.verdict else "not_equivalent",
            "failed_stage": self.failed_stage,
            "stages": self.stages,
            "monodromy": list(self.monodromy) if self.monodromy is not None else None,
            "residual_principal": self.residual_principal,
            "residual_full": self.residual_full,
        }
        if self.gauge is not None:
            out["gauge_sample"] = _sample_gauge(self.gauge, sample_stride)
        else:
            out["gauge_sample"] = None
        return out


def _sample_gauge(gauge: GaugeMap, stride: int | None) -> dict:
    chart = gauge.chart
    Rv, _ = gauge.grid_eval()
    n = chart.resolution
    stride = stride or max(1, n // 4)
    grid = Rv.reshape(chart.grid_shape + (2, 2))
    index = tuple(slice(0, n, stride) for _ in range(chart.dim))
    sampled = grid[index]
    return {
        "stride": stride,
        "shape": list(sampled.shape),
        "real": np.round(sampled.real, 12).tolist(),
        "imag": np.round(sampled.imag, 12).tolist(),
    }


def _group_dim(group: str) -> int:
    return 4 if group in GROUPS_4D else 3


def decide_equivalence(symbol_a: FullSymbol, symbol_b: FullSymbol, group: str,
                       mode: str = "full", lattice_mode: str | None = None,
                       n_monodromy: int | None = None,
                       tol: Tolerances | None = None) -> EquivalenceReport:
    """Decide gauge equivalence of two symbols over the requested group.

    mode 'principal' compares the momentum-linear parts only (structure
    comparison); mode 'full' additionally matches the potentials and
    reports the residual of the reconstructed gauge on the whole symbol.
    """
    tol = tol or Tolerances()
    group = group.lower()
    if group not in GROUPS_4D + GROUPS_3D:
        raise InvalidComparison(f"unknown gauge group {group!r}")
    if mode not in ("principal", "full"):
        raise InvalidComparison(f"unknown mode {mode!r}")
    if symbol_a.chart != symbol_b.chart:
        raise InvalidComparison("symbols live on different charts")
    if symbol_a.dim != _group_dim(group):
        raise InvalidComparison(
            f"group {group.upper()} applies to {_group_dim(group)}D symbols, "
            f"these are {symbol_a.dim}D")
    if lattice_mode is None:
        lattice_mode = "half_period" if group in ("gl", "u") else "strict"

    for name, s in (("first", symbol_a), ("second", symbol_b)):
        rep = validate(s)
        if not rep.ok:
            raise InvalidSymbol(f"{name} symbol is invalid: {'; '.join(rep.issues)}")

    report = EquivalenceReport(group, mode, lattice_mode, False, None)
    md_a, md_b = metric_data(symbol_a), metric_data(symbol_b)

    # (1) charges
    ch_a, ch_b = charges(symbol_a, md_a), charges(symbol_b, md_b)
    stage = {"c_top": [ch_a.c_top, ch_b.c_top], "ok": ch_a.c_top == ch_b.c_top}
    if symbol_a.dim == 4:
        stage["c_tem"] = [ch_a.c_tem, ch_b.c_tem]
        stage["ok"] = stage["ok"] and ch_a.c_tem == ch_b.c_tem
    report.stages["charges"] = stage
    if not stage["ok"]:
        report.failed_stage = "charges"
        return report

    # (2) metric
    if group == "gl":
        stage = _conformal_stage(md_a, md_b, tol)
    else:
        dev = float(np.abs(md_a.g_up - md_b.g_up).max())
        stage = {"max_deviation": dev, "ok": dev <= tol.metric_equal}
    report.stages["metric"] = stage
    if not stage["ok"]:
        report.failed_stage = "metric"
        return report

    # (3) frame transition
    fr_a = frame_from_symbol(symbol_a, md_a)
    fr_b = frame_from_symbol(symbol_b, md_b)
    try:
        tr = transition(fr_a, fr_b)
    except NotInGroup as err:
        report.stages["transition"] = {"ok": False, "error": str(err)}
        report.failed_stage = "transition"
        return report
    report.stages["transition"] = {
        "ok": True,
        "group_deviation": tr.group_dev,
        "lambda_range": [float(tr.lam.min()), float(tr.lam.max())],
    }

    # (4) monodromy of the spin lift
    signs = monodromy_signs(symbol_a, symbol_b, n_monodromy)
    report.monodromy = signs
    liftable = group in ("gl", "u") or all(s == 1 for s in signs)
    report.stages["monodromy"] = {"signs": list(signs), "ok": liftable}
    if not liftable:
        report.failed_stage = "monodromy"
        return report

    # (5) reconstruct a gauge from the global lift
    L = global_lift_torus(tr.O_normalized, signs, group, symbol_a.chart)
    mu = np.sqrt(md_b.rho * tr.lam / md_a.rho)
    Rv = mu[:, None, None] * _conj_t(L)
    gauge = GaugeMap(GridMatrixField(symbol_a.chart, Rv), group)
    transformed = apply_gauge(symbol_a, gauge)
    res_prin = float(np.abs(transformed.E_values() - symbol_b.E_values()).max())
    report.residual_principal = res_prin
    report.gauge = gauge
    report.stages["reconstruction"] = {
        "ok": res_prin <= tol.residual_principal,
        "principal_residual": res_prin,
    }
    if not report.stages["reconstruction"]["ok"]:
        report.failed_stage = "reconstruction"
        return report
    if mode == "principal":
        report.verdict = True
        return report

    # (6) potentials: class comparison, electric part, and the phase fix
    pot_b = potentials(symbol_b, md_b)
    md_hat = metric_data(transformed)
    pot_hat = potentials(transformed, md_hat)

    if symbol_a.dim == 3:
        pot_a = potentials(symbol_a, md_a)
        dev = float(np.abs(pot_a.A4 - pot_b.A4).max())
        report.stages["electric"] = {"max_deviation": dev, "ok": dev <= tol.electric}
        if dev > tol.electric:
            report.failed_stage = "electric"
            return report

    omega = pot_b.A - pot_hat.A
    if group in ("sl", "su"):
        dev = float(np.abs(omega).max())
        report.stages["potential"] = {"max_deviation": dev, "ok": dev <= tol.potential_match}
        if dev > tol.potential_match:
            report.failed_stage = "potential"
            return report
        final_gauge = gauge
    else:
        try:
            coh = cohomology_compare(pot_hat.A, pot_b.A, symbol_a.chart, lattice_mode, tol)
        except NotClosed as err:
            report.stages["potential"] = {"ok": False, "error": str(err)}
            report.failed_stage = "potential"
            return report
        report.stages["potential"] = {
            "ok": coh.same_class,
            "periods": coh.periods.tolist(),
            "closed_dev": coh.closed_dev,
            "lattice_mode": lattice_mode,
        }
        if not coh.same_class:
            report.failed_stage = "potential"
            return report
        try:
            phi, winding = construct_phase(omega, symbol_a.chart, tol)
        except NoSingleValuedPhase as err:
            report.stages["potential"]["ok"] = False
            report.stages["potential"]["error"] = str(err)
            report.failed_stage = "potential"
            return report
        report.stages["potential"]["winding"] = winding.tolist()
        phase = np.exp(1j * phi)
        Rv2 = Rv * phase[:, None, None]
        dRv = gauge.grid_eval()[1]
        dRv2 = np.stack([
            (dRv[g] + 1j * omega[g][:, None, None] * Rv) * phase[:, None, None]
            for g in range(symbol_a.dim)
        ])
        final_gauge = GaugeMap(GridMatrixField(symbol_a.chart, Rv2, dRv2), group)
        transformed = apply_gauge(symbol_a, final_gauge)

    res_full = max(
        float(np.abs(transformed.E_values() - symbol_b.E_values()).max()),
        float(np.abs(transformed.F_values() - symbol_b.F_values()).max()),
    )
    report.residual_full = res_full
    report.gauge = final_gauge
    report.stages["full_residual"] = {"value": res_full, "ok": res_full <= tol.residual_full}
    if res_full > tol.residual_full:
        report.failed_stage = "full_residual"
        return report
    report.verdict = True
    return report


def _conformal_stage(md_a, md_b, tol: Tolerances) -> dict:
    """Extract the conformal factor between two metrics component-wise."""
    ga, gb = md_a.g_up, md_b.g_up
    scale = np.abs(ga).max()
    mask = np.abs(ga) > 1e-6 * scale
    ratio = np.where(mask, gb / np.where(mask, ga, 1.0), np.nan)
    flat = ratio.reshape(ratio.shape[0], -1)
    hi = np.nanmax(flat, axis=1)
    lo = np.nanmin(flat, axis=1)
    if np.any(~np.isfinite(hi)) or np.any(lo <= 0):
        return {"ok": False, "error": "conformal factor is not positive"}
    spread = float((hi / lo - 1.0).max())
    lam_hat = np.nanmean(flat, axis=1)
    # off-pattern components of gb must vanish where ga does
    resid = float(np.abs(np.where(mask, 0.0, gb)).max())
    ok = spread <= tol.conformal_spread and resid <= tol.conformal_spread * scale
    return {
        "ok": bool(ok),
        "spread": spread,
        "factor_range": [float(lam_hat.min()), float(lam_hat.max())],
        "masked_residual": resid,
    }
