"""Configuration documents: the file format consumed by the CLI.

A document is a flat, sectioned text format.  Sections open with
`[kind name]` headers; bodies are `key = value` lines.  Matrix values are
2x2 arrays of quoted expressions with `,` between entries and `;` between
rows.  `#` starts a comment (outside quotes).  Example:

    [manifold]
    dim = 3
    resolution = 32

    [symbol dirac]
    E1 = ["0", "1" ; "1", "0"]
    E2 = ["0", "-i" ; "i", "0"]
    E3 = ["1", "0" ; "0", "-1"]
    F  = ["0", "0" ; "0", "0"]

    [gauge twist]
    group = u
    R = ["exp(-i*x3)", "0" ; "0", "1"]

    [volume v]
    c = "exp(i*x1)"

The expression grammar inside the quotes is the library's field language.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .chart import Chart, make_chart
from .equivalence import GaugeMap
from .errors import ConfigError
from .expr import MatrixField, parse_expression
from .symbol import FullSymbol, from_canonical

_HEADER = re.compile(r"\[\s*(\w+)(?:\s+([\w.-]+))?\s*\]$")


@dataclass
class SymbolSpec:
    E: list  # list of 2x2 text arrays
    F: list | None
    line: int


@dataclass
class GaugeSpec:
    R: list
    group: str
    line: int


@dataclass
class ConfigDocument:
    manifold: dict | None = None
    symbols: dict[str, SymbolSpec] = field(default_factory=dict)
    gauges: dict[str, GaugeSpec] = field(default_factory=dict)
    volumes: dict[str, str] = field(default_factory=dict)

    def chart(self, grid_override: int | None = None) -> Chart:
        if self.manifold is None:
            raise ConfigError("document has no [manifold] section")
        dim = int(self.manifold["dim"])
        res = grid_override or int(self.manifold["resolution"])
        q_ref = self.manifold.get("q_ref")
        return make_chart(dim, res, q_ref)

    def symbol(self, name: str, chart: Chart) -> FullSymbol:
        if name not in self.symbols:
            raise ConfigError(f"no symbol named {name!r} in the document")
        spec = self.symbols[name]
        if len(spec.E) != chart.dim:
            raise ConfigError(
                f"symbol {name!r} has {len(spec.E)} momentum coefficients "
                f"but the manifold is {chart.dim}D", spec.line)
        E = [MatrixField.parse(t) for t in spec.E]
        F = MatrixField.parse(spec.F) if spec.F is not None else MatrixField.zero()
        return from_canonical(E, F, chart)

    def gauge(self, name: str, chart: Chart) -> GaugeMap:
        if name not in self.gauges:
            raise ConfigError(f"no gauge named {name!r} in the document")
        spec = self.gauges[name]
        return GaugeMap(MatrixField.parse(spec.R), spec.group, chart)


def _strip_comment(line: str) -> str:
    out = []
    in_quote = False
    for ch in line:
        if ch == '"':
            in_quote = not in_quote
        if ch == "#" and not in_quote:
            break
        out.append(ch)
    return "".join(out)


def _parse_matrix(value: str, line_no: int) -> list:
    value = value.strip()
    if not (value.startswith("[") and value.endswith("]")):
        raise ConfigError("matrix values are bracketed: [\"a\", \"b\" ; \"c\", \"d\"]", line_no)
    body = value[1:-1]
    rows = body.split(";")
    if len(rows) != 2:
        raise ConfigError(f"expected 2 matrix rows separated by ';', got {len(rows)}", line_no)
    out = []
    for row in rows:
        entries = re.findall(r'"([^"]*)"', row)
        if len(entries) != 2:
            raise ConfigError(f"expected 2 quoted entries per row, got {len(entries)}", line_no)
        out.append(entries)
    return out


def _parse_scalar_expr(value: str, line_no: int) -> str:
    m = re.fullmatch(r'\s*"([^"]*)"\s*', value)
    if not m:
        raise ConfigError("expected one quoted expression", line_no)
    return m.group(1)


def parse_config(text: str) -> ConfigDocument:
    doc = ConfigDocument()
    section = None          # (kind, name, payload)
    pending: dict = {}

    def close_section(line_no: int):
        nonlocal section, pending
        if section is None:
            return
        kind, name, start = section
        if kind == "manifold":
            if "dim" not in pending or "resolution" not in pending:
                raise ConfigError("[manifold] needs dim and resolution", start)
            manifold = {"dim": int(pending["dim"]), "resolution": int(pending["resolution"])}
            if "q_ref" in pending:
                manifold["q_ref"] = tuple(float(t) for t in pending["q_ref"].split())
            doc.manifold = manifold
        elif kind == "symbol":
            E = []
            for a in range(1, 5):
                key = f"E{a}"
                if key in pending:
                    E.append(_parse_matrix(pending[key], start))
            if not E:
                raise ConfigError(f"symbol {name!r} defines no momentum coefficients", start)
            F = _parse_matrix(pending["F"], start) if "F" in pending else None
            doc.symbols[name] = SymbolSpec(E, F, start)
        elif kind == "gauge":
            if "R" not in pending:
                raise ConfigError(f"gauge {name!r} has no R matrix", start)
            group = pending.get("group", "gl").strip().lower()
            doc.gauges[name] = GaugeSpec(_parse_matrix(pending["R"], start), group, start)
        elif kind == "volume":
            if "c" not in pending:
                raise ConfigError(f"volume form {name!r} has no c expression", start)
            doc.volumes[name] = _parse_scalar_expr(pending["c"], start)
        else:
            raise ConfigError(f"unknown section kind {kind!r}", start)
        section, pending = None, {}

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        m = _HEADER.match(line)
        if m:
            close_section(line_no)
            kind, name = m.group(1).lower(), m.group(2)
            if kind != "manifold" and name is None:
                raise ConfigError(f"[{kind}] sections need a name", line_no)
            if kind == "symbol" and name in doc.symbols:
                raise ConfigError(f"duplicate symbol name {name!r}", line_no)
            if kind == "gauge" and name in doc.gauges:
                raise ConfigError(f"duplicate gauge name {name!r}", line_no)
            section = (kind, name, line_no)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line_no)
        if section is None:
            raise ConfigError("key/value line outside any section", line_no)
        key, _, value = line.partition("=")
        pending[key.strip()] = value.strip()
    close_section(len(text.splitlines()) + 1)

    # validate expressions early so errors carry positions
    for name, spec in doc.symbols.items():
        for arr in ([*spec.E, spec.F] if spec.F else spec.E):
            for row in arr:
                for entry in row:
                    try:
                        parse_expression(entry)
                    except Exception as err:
                        raise ConfigError(
                            f"symbol {name!r}: bad expression {entry!r}: {err}", spec.line)
    for name, spec in doc.gauges.items():
        for row in spec.R:
            for entry in row:
                try:
                    parse_expression(entry)
                except Exception as err:
                    raise ConfigError(
                        f"gauge {name!r}: bad expression {entry!r}: {err}", spec.line)
    return doc


def emit_symbol_config(chart: Chart, name: str, E_texts, F_texts) -> str:
    """Render a symbol (expression texts) as a config document."""
    lines = ["[manifold]",
             f"dim = {chart.dim}",
             f"resolution = {chart.resolution}"]
    if chart.dim == 4 and chart.q_ref is not None:
        lines.append("q_ref = " + " ".join(repr(c) for c in chart.q_ref))
    lines.append("")
    lines.append(f"[symbol {name}]")

    def row_text(arr):
        return "[" + " ; ".join(", ".join(f'"{e}"' for e in row) for row in arr) + "]"

    for a, arr in enumerate(E_texts, start=1):
        lines.append(f"E{a} = {row_text(arr)}")
    lines.append(f"F = {row_text(F_texts)}")
    lines.append("")
    return "\n".join(lines)
