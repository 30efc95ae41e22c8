"""Correspondence between form symbols and differential operators.

Fixing a positive density mu turns a symbol (E, F) into the operator

    L = (1/mu) (-i E^a d/dx^a + F - (i/2) dE^a/dx^a)

acting on C^2-valued fields, with <u, L v> under the mu-weighted inner
product reproducing the sesquilinear form S(u, v).  In 3D with trace-free
momentum coefficients and mu = rho this operator is formally self-adjoint
and the inner product is invariant under unitary gauges.
"""

from __future__ import annotations

import numpy as np

from . import expr as ex
from .chart import Chart, integrate_periodic
from .errors import GridMismatch
from .geometry import metric_data
from .symbol import FullSymbol


class SectionField:
    """A C^2-valued field: a pair of expressions, or grid samples (K, 2).

    Expression-backed sections differentiate exactly; raw grid sections
    fall back to 4th-order central differences.
    """

    def __init__(self, chart: Chart, components=None, samples=None):
        self.chart = chart
        if (components is None) == (samples is None):
            raise GridMismatch("provide exactly one of components/samples")
        if components is not None:
            comps = tuple(ex._as_node(c) for c in components)
            if len(comps) != 2:
                raise GridMismatch("a section has exactly 2 components")
            for c in comps:
                ex.check_dim(c, chart.dim)
            self.components = comps
            self.samples = None
        else:
            samples = np.asarray(samples, dtype=complex)
            if samples.shape != (chart.npoints, 2):
                raise GridMismatch(
                    f"expected ({chart.npoints}, 2) samples, got {samples.shape}")
            self.components = None
            self.samples = samples

    @classmethod
    def from_expressions(cls, chart: Chart, texts) -> "SectionField":
        return cls(chart, components=[ex.parse_expression(t) for t in texts])

    def values(self) -> np.ndarray:
        if self.samples is not None:
            return self.samples
        xs = self.chart.grid_points()
        return np.stack([ex.eval_batch(c, xs)[0] for c in self.components], axis=-1)

    def derivs(self) -> np.ndarray:
        """(m, K, 2): exact for expression-backed, 4th-order FD otherwise."""
        if self.components is not None:
            xs = self.chart.grid_points()
            out = np.empty((self.chart.dim, self.chart.npoints, 2), dtype=complex)
            for c_idx, comp in enumerate(self.components):
                _, g = ex.eval_batch(comp, xs)
                out[:, :, c_idx] = g
            return out
        m, n = self.chart.dim, self.chart.resolution
        h = 2.0 * np.pi / n
        grid = self.samples.reshape(self.chart.grid_shape + (2,))
        out = np.empty((m, self.chart.npoints, 2), dtype=complex)
        for a in range(m):
            d = (8.0 * (np.roll(grid, -1, axis=a) - np.roll(grid, 1, axis=a))
                 - (np.roll(grid, -2, axis=a) - np.roll(grid, 2, axis=a))) / (12.0 * h)
            out[a] = d.reshape(self.chart.npoints, 2)
        return out


def _density_values(mu, symbol: FullSymbol) -> np.ndarray:
    """Resolve a density argument: None means the rho of the symbol."""
    if mu is None:
        return metric_data(symbol).rho
    if isinstance(mu, ex.Node):
        vals = ex.eval_batch(mu, symbol.chart.grid_points())[0].real
    else:
        vals = np.asarray(mu, dtype=float)
        if vals.ndim == 0:
            vals = np.full(symbol.chart.npoints, float(vals))
    if vals.shape != (symbol.chart.npoints,):
        raise GridMismatch(f"density must have {symbol.chart.npoints} samples")
    if vals.min() <= 0:
        raise GridMismatch("density must be positive")
    return vals


def _check_chart(symbol: FullSymbol, *sections: SectionField) -> None:
    for s in sections:
        if s.chart != symbol.chart:
            raise GridMismatch("sections and symbol live on different charts")


def form_value(symbol: FullSymbol, u: SectionField, v: SectionField) -> complex:
    """S(u, v) by quadrature of the canonical-representation integrand."""
    _check_chart(symbol, u, v)
    Ev, Fv = symbol.E_values(), symbol.F_values()
    uv, vv = u.values(), v.values()
    du, dv = u.derivs(), v.derivs()
    t1 = -0.5j * np.einsum("ki,akij,akj->k", np.conj(uv), Ev, dv, optimize=True)
    t2 = 0.5j * np.einsum("aki,akij,kj->k", np.conj(du), Ev, vv, optimize=True)
    t3 = np.einsum("ki,kij,kj->k", np.conj(uv), Fv, vv, optimize=True)
    return complex(integrate_periodic(symbol.chart, t1 + t2 + t3))


def inner_product(u: SectionField, v: SectionField, mu, chart: Chart) -> complex:
    """<u, v> = integral of u* v mu."""
    if u.chart != chart or v.chart != chart:
        raise GridMismatch("sections live on a different chart")
    if isinstance(mu, ex.Node):
        muv = ex.eval_batch(mu, chart.grid_points())[0].real
    else:
        muv = np.asarray(mu, dtype=float)
        if muv.ndim == 0:
            muv = np.full(chart.npoints, float(muv))
    vals = np.einsum("ki,ki->k", np.conj(u.values()), v.values()) * muv
    return complex(integrate_periodic(chart, vals))


def apply_operator(symbol: FullSymbol, mu, v: SectionField) -> SectionField:
    """L v = (1/mu) (-i E^a dv/dx^a + (F - (i/2) dE^a/dx^a) v)."""
    _check_chart(symbol, v)
    muv = _density_values(mu, symbol)
    Ev, Fv = symbol.E_values(), symbol.F_values()
    divE = symbol.E_derivs().diagonal(axis1=0, axis2=1).sum(axis=-1)
    vv, dv = v.values(), v.derivs()
    out = -1j * np.einsum("akij,akj->ki", Ev, dv, optimize=True)
    out += np.einsum("kij,kj->ki", Fv - 0.5j * divE, vv, optimize=True)
    return SectionField(symbol.chart, samples=out / muv[:, None])


def subprincipal_of_operator(symbol: FullSymbol) -> np.ndarray:
    """The coordinate-invariant zeroth-order part F + (i/2) dE^a/dx^a of the
    operator with coefficients (E, F); (K, 2, 2) on the grid."""
    divE = symbol.E_derivs().diagonal(axis1=0, axis2=1).sum(axis=-1)
    return symbol.F_values() + 0.5j * divE
