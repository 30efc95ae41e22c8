"""First-order 2x2 Hermitian field symbols on tori.

A full symbol is the pair (E^1..E^m, F) of 2x2 Hermitian matrix fields in
the canonical representation of a first-order Hermitian sesquilinear form:
the momentum-linear principal part E^a(x) p_a plus the zeroth-order part
F(x).  Coefficient fields are either expression-backed (exact derivatives
via the DSL) or grid-backed (samples plus analytically propagated or
spectral derivatives).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .chart import Chart, fourier_interpolate, spectral_derivative, trig_resample
from .errors import ArityMismatch, DegenerateFrame, DegenerateMetric, SignatureViolation

HERMITICITY_TOL = 1e-12
TRACE_FREE_TOL = 1e-10
FRAME_DET_TOL = 1e-8


class GridMatrixField:
    """A 2x2 matrix field given by samples at the chart grid points.

    values: (K, 2, 2) complex, K = chart.npoints, row-major point order.
    derivs: optional (dim, K, 2, 2) exact first derivatives; computed
    spectrally when absent.
    """

    __slots__ = ("chart", "values", "_derivs")

    def __init__(self, chart: Chart, values: np.ndarray, derivs: np.ndarray | None = None):
        values = np.asarray(values, dtype=complex)
        if values.shape != (chart.npoints, 2, 2):
            raise ArityMismatch(f"expected ({chart.npoints}, 2, 2) samples, got {values.shape}")
        self.chart = chart
        self.values = values
        self._derivs = None if derivs is None else np.asarray(derivs, dtype=complex)

    def derivs(self) -> np.ndarray:
        if self._derivs is None:
            m, shape = self.chart.dim, self.chart.grid_shape
            grid = self.values.reshape(shape + (2, 2))
            out = np.empty((m,) + self.values.shape, dtype=complex)
            for a in range(m):
                out[a] = spectral_derivative(grid, axis=a).reshape(self.values.shape)
            self._derivs = out
        return self._derivs

    def eval(self, xs: np.ndarray):
        v = self.values_at(xs)
        g = np.stack([
            fourier_interpolate(self.derivs()[a].reshape(self.chart.grid_shape + (2, 2)),
                                self.chart, xs)
            for a in range(self.chart.dim)
        ])
        return v, g

    def values_at(self, xs: np.ndarray) -> np.ndarray:
        return fourier_interpolate(self.values.reshape(self.chart.grid_shape + (2, 2)),
                                   self.chart, xs)

    def loop_values(self, axis: int, n: int) -> np.ndarray:
        """Samples along the coordinate circle through the origin (1-based axis)."""
        grid = self.values.reshape(self.chart.grid_shape + (2, 2))
        index = tuple(slice(None) if a == axis - 1 else 0 for a in range(self.chart.dim))
        line = grid[index]
        return trig_resample(line, n)


def _field_grid_eval(field_obj, chart: Chart):
    """(values (K,2,2), derivs (m,K,2,2)) of either field kind on the grid."""
    if isinstance(field_obj, ex.MatrixField):
        return field_obj.eval(chart.grid_points())
    return field_obj.values, field_obj.derivs()


def _field_values_at(field_obj, chart: Chart, xs: np.ndarray) -> np.ndarray:
    if isinstance(field_obj, ex.MatrixField):
        return field_obj.values_at(xs)
    return field_obj.values_at(xs)


def _field_loop_values(field_obj, chart: Chart, axis: int, n: int) -> np.ndarray:
    if isinstance(field_obj, ex.MatrixField):
        from .chart import loop_samples
        return field_obj.values_at(loop_samples(chart, axis, n).T)
    return field_obj.loop_values(axis, n)


class FullSymbol:
    """Coefficient data (E^1..E^m, F) of a first-order 2x2 Hermitian form."""

    def __init__(self, E, F, chart: Chart):
        E = tuple(E)
        if len(E) != chart.dim:
            raise ArityMismatch(f"need {chart.dim} momentum coefficients, got {len(E)}")
        for f in (*E, F):
            if isinstance(f, ex.MatrixField):
                check_dim_matrix(f, chart.dim)
        self.E = E
        self.F = F
        self.chart = chart
        self._cache: dict[str, np.ndarray] = {}

    @property
    def dim(self) -> int:
        return self.chart.dim

    @property
    def expression_backed(self) -> bool:
        """True when every coefficient field can be evaluated exactly at
        arbitrary points (off-grid sampling loses no accuracy)."""
        return all(isinstance(f, ex.MatrixField) for f in (*self.E, self.F))

    # -- grid caches --

    def E_values(self) -> np.ndarray:
        """(m, K, 2, 2) samples of the momentum coefficients on the grid."""
        if "Ev" not in self._cache:
            self._populate_E()
        return self._cache["Ev"]

    def E_derivs(self) -> np.ndarray:
        """(m, m, K, 2, 2); entry [a, g] is the x^g-derivative of E^a."""
        if "dEv" not in self._cache:
            self._populate_E()
        return self._cache["dEv"]

    def F_values(self) -> np.ndarray:
        if "Fv" not in self._cache:
            v, _ = _field_grid_eval(self.F, self.chart)
            self._cache["Fv"] = v
        return self._cache["Fv"]

    def _populate_E(self):
        m, K = self.dim, self.chart.npoints
        Ev = np.empty((m, K, 2, 2), dtype=complex)
        dEv = np.empty((m, m, K, 2, 2), dtype=complex)
        for a in range(m):
            v, g = _field_grid_eval(self.E[a], self.chart)
            Ev[a] = v
            dEv[a] = g
        self._cache["Ev"] = Ev
        self._cache["dEv"] = dEv

    # -- pointwise access --

    def E_values_at(self, xs: np.ndarray) -> np.ndarray:
        """(m, K, 2, 2) at arbitrary points xs of shape (dim, K)."""
        return np.stack([_field_values_at(f, self.chart, xs) for f in self.E])

    def E_loop_values(self, axis: int, n: int) -> np.ndarray:
        return np.stack([_field_loop_values(f, self.chart, axis, n) for f in self.E])

    def F_values_at(self, xs: np.ndarray) -> np.ndarray:
        return _field_values_at(self.F, self.chart, xs)


def check_dim_matrix(mf: ex.MatrixField, dim: int) -> None:
    for row in mf.entries:
        for e in row:
            ex.check_dim(e, dim)


def from_canonical(E, F, chart: Chart) -> FullSymbol:
    """Build a symbol directly from canonical-representation coefficients."""
    return FullSymbol(E, F, chart)


@dataclass(frozen=True)
class RawForm:
    """Integral-representation coefficients (A^a, B^a, C) of a first-order form."""

    A: tuple[ex.MatrixField, ...]
    B: tuple[ex.MatrixField, ...]
    C: ex.MatrixField


def from_raw(raw: RawForm, chart: Chart) -> FullSymbol:
    """Convert the integral representation to the canonical one.

    E^a = i (A^a - B^a);  F = C - (1/2) d(A^a + B^a)/dx^a.
    """
    m = chart.dim
    if len(raw.A) != m or len(raw.B) != m:
        raise ArityMismatch(f"need {m} A and B coefficients, got {len(raw.A)}, {len(raw.B)}")
    i = ex.Imag()
    E = [(raw.A[a] - raw.B[a]).scale(i) for a in range(m)]
    F = raw.C
    for a in range(m):
        F = F - (raw.A[a] + raw.B[a]).d(a + 1).scale(0.5)
    return FullSymbol(E, F, chart)


def principal_at(symbol: FullSymbol, x, p) -> np.ndarray:
    """The principal part E^a(x) p_a at one point and momentum."""
    x = np.asarray(x, dtype=float).reshape(symbol.dim, 1)
    p = np.asarray(p, dtype=float).reshape(symbol.dim)
    Ex = symbol.E_values_at(x)[:, 0]
    return np.einsum("a,aij->ij", p, Ex)


@dataclass
class ValidationReport:
    """Everything checked about a symbol, reported in one place."""

    hermiticity_max_dev: float
    trace_free_max_dev: float | None
    frame_det_min_abs: float | None
    signature_ok: bool
    issues: list[str] = field(default_factory=list)

    @property
    def hermitian(self) -> bool:
        return self.hermiticity_max_dev <= HERMITICITY_TOL

    @property
    def trace_free(self) -> bool:
        return self.trace_free_max_dev is None or self.trace_free_max_dev <= TRACE_FREE_TOL

    @property
    def non_degenerate(self) -> bool:
        return (self.signature_ok and self.frame_det_min_abs is not None
                and self.frame_det_min_abs > FRAME_DET_TOL)

    @property
    def ok(self) -> bool:
        return self.hermitian and self.trace_free and self.non_degenerate

    def to_dict(self) -> dict:
        return {
            "hermiticity_max_dev": self.hermiticity_max_dev,
            "trace_free_max_dev": self.trace_free_max_dev,
            "frame_det_min_abs": self.frame_det_min_abs,
            "signature_ok": self.signature_ok,
            "hermitian": self.hermitian,
            "trace_free": self.trace_free,
            "non_degenerate": self.non_degenerate,
            "ok": self.ok,
            "issues": list(self.issues),
        }


def validate(symbol: FullSymbol) -> ValidationReport:
    """Check Hermiticity, non-degeneracy and (3D) trace-freeness on the grid.

    Report-valued: all violations are collected rather than raised, so a
    caller can show everything that is wrong at once.
    """
    from .framing import frame_from_symbol
    from .geometry import metric_data

    Ev, Fv = symbol.E_values(), symbol.F_values()
    herm = max(
        float(np.abs(Ev - np.conj(np.swapaxes(Ev, -1, -2))).max()),
        float(np.abs(Fv - np.conj(np.swapaxes(Fv, -1, -2))).max()),
    )
    issues = []
    if herm > HERMITICITY_TOL:
        issues.append(f"Hermiticity violated: max deviation {herm:.3e}")

    trace_dev = None
    if symbol.dim == 3:
        trace_dev = float(np.abs(np.trace(Ev, axis1=-2, axis2=-1)).max())
        if trace_dev > TRACE_FREE_TOL:
            issues.append(f"principal part not trace-free: max |tr| {trace_dev:.3e}")

    det_min = None
    signature_ok = True
    try:
        md = metric_data(symbol)
        frame = frame_from_symbol(symbol, md, check=False)
        det_min = float(np.abs(np.linalg.det(frame.e)).min())
        if det_min <= FRAME_DET_TOL:
            issues.append(f"degenerate: min |det frame| {det_min:.3e}")
    except (SignatureViolation, DegenerateMetric, DegenerateFrame) as err:
        signature_ok = False
        issues.append(f"metric extraction failed: {err}")

    return ValidationReport(herm, trace_dev, det_min, signature_ok, issues)
