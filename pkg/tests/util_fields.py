"""Random smooth expression-backed fields for the property suites.

Gauge maps are built inside each group by construction:

    SU(2): [[cos(t) e^{ia}, sin(t) e^{ib}], [-sin(t) e^{-ib}, cos(t) e^{-ia}]]
    U(2):  e^{i phi} * SU(2), optionally with an integer winding in phi
    SL(2,C): SU(2) @ diag(e^chi, e^-chi) @ SU(2)   (Cartan form)
    GL(2,C): e^{w + i phi} * SL(2,C)

with t, a, b, chi, w, phi random low-degree trigonometric polynomials, so
determinants and unitarity hold exactly and all derivatives are exact.
"""

import numpy as np

from gaugeforms import GaugeMap, MatrixField, apply_gauge, builtin_symbol
from gaugeforms import expr as ex


def trig_poly(rng, dim, amplitude=0.3, offset=0.0):
    """A random real trigonometric polynomial of degree one per axis."""
    node = ex.constant(offset + amplitude * rng.uniform(-1, 1))
    for a in range(1, dim + 1):
        fn = ex.Fn("cos", ex.Var(a) + ex.constant(rng.uniform(0, 2 * np.pi)))
        node = node + ex.constant(amplitude * rng.uniform(-1, 1)) * fn
    # one cross-axis term keeps the fields honestly multivariate
    a, b = rng.choice(dim, size=2, replace=False) + 1
    cross = ex.Fn("sin", ex.Var(int(a)) + ex.Var(int(b)) + ex.constant(rng.uniform(0, 2 * np.pi)))
    return node + ex.constant(amplitude * rng.uniform(-1, 1)) * cross


def _phase(node):
    return ex.Fn("exp", ex.Imag() * node)


def random_su2_field(rng, dim, amplitude=0.3) -> MatrixField:
    t = trig_poly(rng, dim, amplitude)
    a = trig_poly(rng, dim, amplitude)
    b = trig_poly(rng, dim, amplitude)
    ct, st = ex.Fn("cos", t), ex.Fn("sin", t)
    return MatrixField([
        [ct * _phase(a), st * _phase(b)],
        [-(st * _phase(-b)), ct * _phase(-a)],
    ])


def random_u2_field(rng, dim, amplitude=0.3, winding=(0, 0, 0)) -> MatrixField:
    phi = trig_poly(rng, dim, amplitude)
    for axis, w in enumerate(winding, start=1):
        if w:
            phi = phi + ex.constant(w) * ex.Var(axis)
    return random_su2_field(rng, dim, amplitude).scale(_phase(phi))


def random_sl2c_field(rng, dim, amplitude=0.25) -> MatrixField:
    chi = trig_poly(rng, dim, amplitude)
    boost = MatrixField([[ex.Fn("exp", chi), ex.ZERO],
                         [ex.ZERO, ex.Fn("exp", -chi)]])
    return random_su2_field(rng, dim, amplitude) @ boost @ random_su2_field(rng, dim, amplitude)


def random_gl2c_field(rng, dim, amplitude=0.25, winding=(0, 0, 0, 0)) -> MatrixField:
    w = trig_poly(rng, dim, amplitude)
    phi = trig_poly(rng, dim, amplitude)
    for axis, k in enumerate(winding, start=1):
        if k:
            phi = phi + ex.constant(k) * ex.Var(axis)
    scalar = ex.Fn("exp", w + ex.Imag() * phi)
    return random_sl2c_field(rng, dim, amplitude).scale(scalar)


def random_gauge(rng, group, dim, amplitude=0.3, winding=None) -> MatrixField:
    group = group.lower()
    if group == "su":
        return random_su2_field(rng, dim, amplitude)
    if group == "u":
        winding = winding if winding is not None else tuple(rng.integers(-1, 2, size=dim))
        return random_u2_field(rng, dim, amplitude, winding)
    if group == "sl":
        return random_sl2c_field(rng, dim, amplitude)
    if group == "gl":
        winding = winding if winding is not None else tuple(rng.integers(-1, 2, size=dim))
        return random_gl2c_field(rng, dim, amplitude, winding)
    raise ValueError(group)


def random_symbol(rng, chart, amplitude=0.25, with_potential=True):
    """A random valid symbol: a gauged built-in plus an optional zeroth-order
    part E^a A0_a (+ A4 Id in 3D) with prescribed random potentials."""
    if chart.dim == 3:
        base = builtin_symbol("dirac3", chart)
        scramble = random_u2_field(rng, 3, amplitude)
        group = "u"
    else:
        base = builtin_symbol("weyl4", chart)
        scramble = random_gl2c_field(rng, 4, amplitude)
        group = "gl"
    symbol = apply_gauge(base, GaugeMap(scramble, group, chart))
    if not with_potential:
        return symbol
    E_sym = [scramble.conj_transpose() @ ea @ scramble
             for ea in _pauli_fields(chart.dim)]
    F = MatrixField.zero()
    for a in range(chart.dim):
        F = F + E_sym[a].scale(trig_poly(rng, chart.dim, amplitude))
    if chart.dim == 3:
        F = F + MatrixField.identity().scale(trig_poly(rng, chart.dim, amplitude))
    Fv = F.eval(chart.grid_points())[0]
    from gaugeforms import FullSymbol, GridMatrixField
    return FullSymbol(
        [GridMatrixField(chart, symbol.E_values()[a], symbol.E_derivs()[a])
         for a in range(chart.dim)],
        GridMatrixField(chart, symbol.F_values() + Fv),
        chart,
    )


def _pauli_fields(dim):
    texts = [
        [["0", "1"], ["1", "0"]],
        [["0", "-i"], ["i", "0"]],
        [["1", "0"], ["0", "-1"]],
        [["1", "0"], ["0", "1"]],
    ]
    return [MatrixField.parse(t) for t in texts[:dim]]
