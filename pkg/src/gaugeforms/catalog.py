"""Built-in symbols.

dirac3         -- the flat massless Dirac symbol on T^3: E^a = s^a, F = 0
twisted3       -- its x3-twisted companion (exp(i x3) phase on the
                  off-diagonal momentum entries), F = 0; same Euclidean
                  metric and charge but a different spin structure
twisted3_XYZ   -- the twist family indexed by a 0/1 vector, e.g.
                  twisted3_101 twists along x1 and x3; twisted3 == twisted3_001
weyl4          -- the flat 4D symbol (s^1, s^2, s^3, Id), Minkowski metric
weyl4_twisted  -- weyl4 with the same x3 twist (4D monodromy example)
"""

from __future__ import annotations

import re

from .chart import Chart
from .errors import BadDimension, ConfigError
from .expr import MatrixField
from .symbol import FullSymbol, from_canonical

_S1 = [["0", "1"], ["1", "0"]]
_S2 = [["0", "-i"], ["i", "0"]]
_S3 = [["1", "0"], ["0", "-1"]]
_ID = [["1", "0"], ["0", "1"]]
_Z = [["0", "0"], ["0", "0"]]

BUILTIN_NAMES = ("dirac3", "twisted3", "weyl4", "weyl4_twisted")


def _twist_exprs(kappa) -> tuple[list, list]:
    """E^1, E^2 entry texts of the kappa-twisted Pauli pair."""
    terms = [f"{k}*x{a + 1}" for a, k in enumerate(kappa) if k]
    t = "+".join(terms) if terms else "0"
    e1 = [["0", f"exp(i*({t}))"], [f"exp(-i*({t}))", "0"]]
    e2 = [["0", f"-i*exp(i*({t}))"], [f"i*exp(-i*({t}))", "0"]]
    return e1, e2


def twisted3_symbol(chart: Chart, kappa=(0, 0, 1)) -> FullSymbol:
    """The twist family member for a 0/1 vector kappa."""
    if chart.dim != 3:
        raise BadDimension("twisted3 symbols live on 3D charts")
    kappa = tuple(int(k) for k in kappa)
    if len(kappa) != 3 or any(k not in (0, 1) for k in kappa):
        raise ConfigError(f"twist index must be three 0/1 digits, got {kappa}")
    e1, e2 = _twist_exprs(kappa)
    fields = [MatrixField.parse(e1), MatrixField.parse(e2), MatrixField.parse(_S3)]
    return from_canonical(fields, MatrixField.parse(_Z), chart)


def builtin_symbol(name: str, chart: Chart) -> FullSymbol:
    """Construct a built-in by name; see the module docstring for the list."""
    name = name.lower()
    m = re.fullmatch(r"twisted3_([01]{3})", name)
    if m:
        return twisted3_symbol(chart, tuple(int(d) for d in m.group(1)))
    if name == "dirac3":
        if chart.dim != 3:
            raise BadDimension("dirac3 lives on a 3D chart")
        fields = [MatrixField.parse(t) for t in (_S1, _S2, _S3)]
        return from_canonical(fields, MatrixField.parse(_Z), chart)
    if name == "twisted3":
        return twisted3_symbol(chart, (0, 0, 1))
    if name == "weyl4":
        if chart.dim != 4:
            raise BadDimension("weyl4 lives on a 4D chart")
        fields = [MatrixField.parse(t) for t in (_S1, _S2, _S3, _ID)]
        return from_canonical(fields, MatrixField.parse(_Z), chart)
    if name == "weyl4_twisted":
        if chart.dim != 4:
            raise BadDimension("weyl4_twisted lives on a 4D chart")
        e1, e2 = _twist_exprs((0, 0, 1))
        fields = [MatrixField.parse(e1), MatrixField.parse(e2),
                  MatrixField.parse(_S3), MatrixField.parse(_ID)]
        return from_canonical(fields, MatrixField.parse(_Z), chart)
    raise ConfigError(f"unknown built-in symbol {name!r}")


def builtin_dim(name: str) -> int:
    name = name.lower()
    if name.startswith("twisted3") or name == "dirac3":
        return 3
    if name.startswith("weyl4"):
        return 4
    raise ConfigError(f"unknown built-in symbol {name!r}")


def kappa_family(chart: Chart):
    """All eight twist-family members on one chart, keyed by their index."""
    out = {}
    for k1 in (0, 1):
        for k2 in (0, 1):
            for k3 in (0, 1):
                out[(k1, k2, k3)] = twisted3_symbol(chart, (k1, k2, k3))
    return out
