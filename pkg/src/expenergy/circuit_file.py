"""YAML circuit files.

Example::

    version: "1"
    modes: 2
    layers:
      - kerr: {kind: self, x: {p: 1, q: 2}, modes: [0]}
        gaussian:
          U:
            - {gate: beamsplitter, modes: [0, 1], theta: 0.7854, phi: 0}
            - {gate: phase_shifter, mode: 1, theta: 0.3}
          r: [0.1, 0]
          alpha: ["0.5+0.1i", "0"]
          V: identity

Complex entries are strings ``"a+bi"`` or plain numbers; matrices are
row-major lists of rows. ``U`` and ``V`` may instead be ``identity`` or a list
of named passive gates applied in order. Missing Gaussian fields default to
the identity. A layer without ``kerr`` has no non-Gaussian gate.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np
import yaml

from .circuit import CircuitIR, Layer
from .errors import CircuitParseError, ExpEnergyError
from .gaussian import Beamsplitter, GaussianUnitary, PhaseShifter, compose_passive
from .kerr import IrrationalKerr, RationalKerr

FORMAT_VERSION = "1"
_LINE = "__line__"


class _LineLoader(yaml.SafeLoader):
    """Safe loader that records the source line of every mapping."""

    def construct_mapping(self, node, deep=False):
        mapping = super().construct_mapping(node, deep=deep)
        mapping[_LINE] = node.start_mark.line + 1
        return mapping


def _fail(where: str, line, msg: str):
    loc = f" (line {line})" if line else ""
    raise CircuitParseError(f"{where}{loc}: {msg}")


def format_real(x: float) -> str:
    return format(float(x), ".17g")


def format_complex(z: complex) -> str:
    z = complex(z)
    im = format_real(z.imag)
    sign = "" if im.startswith("-") else "+"
    return f"{format_real(z.real)}{sign}{im}i"


def parse_complex(v) -> complex:
    """Accept numbers or strings like ``"1.5-2e-3i"``, ``"-i"`` or ``"0.5"``."""
    if isinstance(v, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(v, (int, float)):
        return complex(v)
    if not isinstance(v, str):
        raise ValueError(f"expected a number, got {v!r}")
    s = v.strip().replace(" ", "")
    if s.endswith("i") or s.endswith("j"):
        s = s[:-1] + "j"
        head = s[:-1]
        if head in ("", "+", "-") or head[-1] in "+-":
            s = head + "1j"
    return complex(s)


def _real(v, where, line) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(where, line, f"expected a real number, got {v!r}")
    return float(v)


def _vector(v, m, where, line, conv):
    if v is None:
        return np.zeros(m)
    if not isinstance(v, list) or len(v) != m:
        _fail(where, line, f"expected a list of {m} entries")
    try:
        return np.array([conv(x) for x in v])
    except (ValueError, TypeError) as e:
        _fail(where, line, str(e))


def _passive_gate(entry, m, where):
    line = entry.get(_LINE) if isinstance(entry, dict) else None
    if not isinstance(entry, dict) or "gate" not in entry:
        _fail(where, line, "passive gate entries need a 'gate' field")
    kind = entry["gate"]
    if kind == "beamsplitter":
        modes = entry.get("modes")
        if not (isinstance(modes, list) and len(modes) == 2 and all(isinstance(i, int) and 0 <= i < m for i in modes)
                and modes[0] != modes[1]):
            _fail(where, line, f"beamsplitter needs two distinct modes in [0, {m})")
        return Beamsplitter(modes[0], modes[1], _real(entry.get("theta"), where, line),
                            _real(entry.get("phi", 0.0), where, line))
    if kind == "phase_shifter":
        mode = entry.get("mode")
        if not (isinstance(mode, int) and 0 <= mode < m):
            _fail(where, line, f"phase_shifter needs a mode in [0, {m})")
        return PhaseShifter(mode, _real(entry.get("theta"), where, line))
    _fail(where, line, f"unknown passive gate {kind!r}")


def _passive(v, m, where, line) -> np.ndarray:
    if v is None or v == "identity":
        return np.eye(m, dtype=np.complex128)
    if not isinstance(v, list):
        _fail(where, line, "expected 'identity', a matrix or a list of passive gates")
    if all(isinstance(e, dict) for e in v):
        return compose_passive([_passive_gate(e, m, where) for e in v], m)
    if len(v) != m or not all(isinstance(row, list) and len(row) == m for row in v):
        _fail(where, line, f"expected an {m}x{m} matrix")
    try:
        return np.array([[parse_complex(x) for x in row] for row in v], dtype=np.complex128)
    except (ValueError, TypeError) as e:
        _fail(where, line, str(e))


def _kerr(rec, m, where):
    line = rec.get(_LINE) if isinstance(rec, dict) else None
    if not isinstance(rec, dict):
        _fail(where, line, "expected a mapping")
    kind = rec.get("kind", "self")
    modes = rec.get("modes", [0] if kind == "self" else [0, 1])
    if not (isinstance(modes, list) and all(isinstance(i, int) and 0 <= i < m for i in modes)):
        _fail(f"{where}.modes", line, f"expected mode indices in [0, {m})")
    x = rec.get("x")
    try:
        if isinstance(x, dict):
            p, q = x.get("p"), x.get("q")
            if not (isinstance(p, int) and isinstance(q, int)) or isinstance(p, bool):
                _fail(f"{where}.x", line, "rational parameter needs integer p and q")
            return RationalKerr(p, q, kind, tuple(modes))
        if isinstance(x, int) and not isinstance(x, bool):
            return RationalKerr(x, 1, kind, tuple(modes))
        if isinstance(x, str) and "/" in x:
            f = Fraction(x)
            return RationalKerr(f.numerator, f.denominator, kind, tuple(modes))
        return IrrationalKerr(_real(x, f"{where}.x", line), kind, tuple(modes))
    except CircuitParseError:
        raise
    except (ExpEnergyError, ValueError, ZeroDivisionError) as e:
        _fail(where, line, str(e))


def _gaussian(rec, m, where):
    if rec is None:
        return GaussianUnitary.identity(m)
    line = rec.get(_LINE) if isinstance(rec, dict) else None
    if not isinstance(rec, dict):
        _fail(where, line, "expected a mapping")
    unknown = set(rec) - {"V", "alpha", "r", "U", _LINE}
    if unknown:
        _fail(where, line, f"unknown fields {sorted(unknown)}")
    U = _passive(rec.get("U"), m, f"{where}.U", line)
    V = _passive(rec.get("V"), m, f"{where}.V", line)
    alpha = _vector(rec.get("alpha"), m, f"{where}.alpha", line, parse_complex)
    r = _vector(rec.get("r"), m, f"{where}.r", line, lambda x: _real(x, f"{where}.r", line))
    for name, val in (("U", U), ("V", V)):
        err = np.max(np.abs(val.conj().T @ val - np.eye(m)))
        if not err <= 1e-10:
            _fail(f"{where}.{name}", line, f"matrix is not unitary (max |U^dag U - I| = {err:.3e})")
    try:
        return GaussianUnitary(V, alpha, r, U)
    except ExpEnergyError as e:
        _fail(where, line, str(e))


def loads(text: str) -> CircuitIR:
    """Parse circuit text; errors name the layer, the field and the line."""
    try:
        doc = yaml.load(text, Loader=_LineLoader)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        _fail("circuit file", mark.line + 1 if mark else None, f"invalid YAML: {getattr(e, 'problem', e)}")
    if not isinstance(doc, dict):
        _fail("circuit file", None, "top level must be a mapping")
    m = doc.get("modes")
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        _fail("modes", doc.get(_LINE), "expected a positive integer")
    layers = doc.get("layers")
    if not isinstance(layers, list) or not layers:
        _fail("layers", doc.get(_LINE), "expected a non-empty list")
    out = []
    for i, rec in enumerate(layers):
        where = f"layer {i}"
        if not isinstance(rec, dict):
            _fail(where, None, "expected a mapping")
        unknown = set(rec) - {"kerr", "gaussian", _LINE}
        if unknown:
            _fail(where, rec.get(_LINE), f"unknown fields {sorted(unknown)}")
        kerr = _kerr(rec["kerr"], m, f"{where}.kerr") if rec.get("kerr") is not None else None
        out.append(Layer(kerr, _gaussian(rec.get("gaussian"), m, f"{where}.gaussian")))
    try:
        return CircuitIR(m, tuple(out))
    except ExpEnergyError as e:
        _fail("circuit", None, str(e))


def load(path) -> CircuitIR:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise CircuitParseError(f"{path}: {e.strerror}") from e
    return loads(text)


def _matrix(M) -> list:
    return [[format_complex(z) for z in row] for row in np.asarray(M)]


def to_dict(circuit: CircuitIR) -> dict:
    layers = []
    for layer in circuit.layers:
        rec: dict = {}
        g = layer.non_gaussian
        if isinstance(g, RationalKerr):
            rec["kerr"] = {"kind": g.kind, "x": {"p": g.p, "q": g.q}, "modes": list(g.modes)}
        elif isinstance(g, IrrationalKerr):
            rec["kerr"] = {"kind": g.kind, "x": float(format_real(g.x)), "modes": list(g.modes)}
        elif g is not None:
            raise CircuitParseError(f"{type(g).__name__} cannot be written to a circuit file")
        G = layer.gaussian
        rec["gaussian"] = {
            "U": _matrix(G.U),
            "r": [float(format_real(x)) for x in G.r],
            "alpha": [format_complex(z) for z in G.alpha],
            "V": _matrix(G.V),
        }
        layers.append(rec)
    return {"version": FORMAT_VERSION, "modes": circuit.m, "layers": layers}


def dumps(circuit: CircuitIR) -> str:
    return yaml.safe_dump(to_dict(circuit), sort_keys=False, default_flow_style=None, width=1000)


def dump(circuit: CircuitIR, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(circuit))

