import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expenergy import circuit_file
from expenergy.errors import CircuitParseError
from expenergy.gaussian import Beamsplitter, PhaseShifter, compose_passive
from expenergy.kerr import IrrationalKerr, RationalKerr

from helpers import random_circuit

EXAMPLE = """\
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
  - kerr: {kind: cross, x: 0.7071067811865476, modes: [1, 0]}
  - gaussian: {alpha: ["-i", 2]}
"""


def same_ir(a, b):
    assert a.m == b.m and a.L == b.L
    for la, lb in zip(a.layers, b.layers):
        assert la.non_gaussian == lb.non_gaussian
        for f in ("V", "alpha", "r", "U"):
            assert np.array_equal(getattr(la.gaussian, f), getattr(lb.gaussian, f))


def test_parse_example():
    c = circuit_file.loads(EXAMPLE)
    assert c.m == 2 and c.L == 3
    assert c.layers[0].non_gaussian == RationalKerr(1, 2, "self", (0,))
    assert c.layers[1].non_gaussian == IrrationalKerr(0.7071067811865476, "cross", (1, 0))
    assert c.layers[2].non_gaussian is None
    U = compose_passive([Beamsplitter(0, 1, 0.7854, 0), PhaseShifter(1, 0.3)], 2)
    assert np.allclose(c.layers[0].gaussian.U, U, atol=1e-15)
    assert np.array_equal(c.layers[0].gaussian.alpha, [0.5 + 0.1j, 0])
    assert np.array_equal(c.layers[2].gaussian.alpha, [-1j, 2])
    assert np.array_equal(c.layers[1].gaussian.V, np.eye(2))


@pytest.mark.parametrize("text,value", [("1.5-2e-3i", 1.5 - 2e-3j), ("-i", -1j), ("i", 1j), ("0.5", 0.5),
                                        ("2+i", 2 + 1j), ("-3.25e2+1e-17i", -325 + 1e-17j)])
def test_parse_complex(text, value):
    assert circuit_file.parse_complex(text) == value


def test_format_round_trip_exact():
    rng = np.random.default_rng(0)
    for z in rng.normal(size=50) * 10.0 ** rng.integers(-20, 20, size=50) + 1j * rng.normal(size=50):
        assert circuit_file.parse_complex(circuit_file.format_complex(z)) == z
    assert circuit_file.format_complex(1 - 2j) == "1-2i"


def test_round_trip_example():
    c = circuit_file.loads(EXAMPLE)
    same_ir(c, circuit_file.loads(circuit_file.dumps(c)))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_round_trip_random(m, L, seed):
    c = random_circuit(np.random.default_rng(seed), m, L)
    if m >= 2 and seed % 3 == 0:
        c = c.with_gate(0, IrrationalKerr(math.pi / (seed % 7 + 1), "cross", (0, m - 1)))
    back = circuit_file.loads(circuit_file.dumps(c))
    same_ir(c, back)
    same_ir(back, circuit_file.loads(circuit_file.dumps(back)))


def test_file_io(tmp_path):
    c = circuit_file.loads(EXAMPLE)
    path = tmp_path / "c.yaml"
    circuit_file.dump(c, path)
    same_ir(c, circuit_file.load(path))
    with pytest.raises(CircuitParseError, match="No such file"):
        circuit_file.load(tmp_path / "missing.yaml")


@pytest.mark.parametrize("text,pattern", [
    ("modes: 1\nlayers:\n  - gaussian:\n      U: [[\"2\"]]\n", r"layer 0\.gaussian\.U \(line 4\): matrix is not unitary"),
    ("modes: 2\nlayers:\n  - gaussian:\n      V: [[1, 0], [0, 1], [0, 0]]\n", r"layer 0\.gaussian\.V.*2x2 matrix"),
    ("modes: 1\nlayers:\n  - gaussian: {}\n  - gaussian: {r: [-0.1]}\n", r"layer 1\.gaussian"),
    ("modes: 1\nlayers:\n  - gaussian: {alpha: [\"1+zi\"]}\n", r"layer 0\.gaussian\.alpha"),
    ("modes: 1\nlayers:\n  - kerr: {kind: cross, x: 0.5, modes: [0, 1]}\n", r"layer 0\.kerr\.modes"),
    ("modes: 2\nlayers:\n  - kerr: {kind: self, x: {p: 1, q: 0}}\n", r"layer 0\.kerr"),
    ("modes: 2\nlayers:\n  - kerr: {kind: self, x: {p: 1.5, q: 2}}\n", r"layer 0\.kerr\.x"),
    ("modes: 1\nlayers:\n  - kerr: {kind: self, x: true}\n", r"layer 0\.kerr\.x"),
    ("modes: 1\nlayers:\n  - gaussian: {W: 1}\n", r"unknown fields \['W'\]"),
    ("modes: 1\nlayers:\n  - colour: red\n", r"layer 0 \(line 3\): unknown fields"),
    ("modes: 0\nlayers: []\n", r"modes"),
    ("modes: 1\nlayers: []\n", r"layers"),
    ("modes: 1\nlayers:\n  - gaussian: {U: [{gate: beamsplitter, modes: [0, 0], theta: 1}]}\n", r"beamsplitter"),
    ("modes: 1\nlayers:\n  - gaussian: {U: [{gate: mirror}]}\n", r"unknown passive gate 'mirror'"),
    ("modes: 1\nlayers: [\n", r"invalid YAML"),
    ("- 1\n- 2\n", r"top level"),
])
def test_parse_errors_name_location(text, pattern):
    with pytest.raises(CircuitParseError, match=pattern):
        circuit_file.loads(text)


def test_fraction_string_and_integer_parameters():
    c = circuit_file.loads("modes: 1\nlayers:\n  - kerr: {x: \"-3/6\"}\n  - kerr: {x: 2}\n")
    assert c.layers[0].non_gaussian == RationalKerr(-1, 2)
    assert c.layers[1].non_gaussian == RationalKerr(2, 1)
