from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings

from gklab import ParseError, parse_circuit, serialize, truth_table
from gklab.circuit_io import bits_to_hex, hex_to_bits, load_circuit

from helpers import circuits, random_circuit

CIRCUITS = Path(__file__).resolve().parent.parent / "circuits"


def test_single_gate_line():
    c = parse_circuit("circuit t n=2\ngate g1 = AND x1 x2\noutputs g1\n")
    assert c.nodes[0].kind.name == "AND"
    assert c.nodes[0].inputs == (0, 1)


@given(circuits())
@settings(max_examples=80, deadline=None)
def test_round_trip(c):
    text = serialize(c)
    back = parse_circuit(text)
    assert back == c
    assert serialize(back) == text


@pytest.mark.parametrize("seed", range(5))
def test_round_trip_twenty_gates_exhaustive(seed):
    c = random_circuit(np.random.default_rng(seed), 12, 20)
    assert truth_table(parse_circuit(serialize(c))) == truth_table(c)


@pytest.mark.parametrize("text,line", [
    ("circuit t n=2\ngate g1 = XOR x1 x2\noutputs g1\n", 2),
    ("circuit t n=2\ngate g1 = AND x1 x9\noutputs g1\n", 2),
    ("circuit t n=2\ngate g1 = GK k=1 default=0 table=hex:ff x1 x2\noutputs g1\n", 2),
    ("circuit t n=2\ngate g1 = AND x1 x2\n", 0),
    ("gate g1 = AND x1 x2\noutputs g1\n", 1),
])
def test_parse_errors(text, line):
    with pytest.raises(ParseError) as err:
        parse_circuit(text)
    if line:
        assert err.value.line == line


def test_hex_tables():
    assert bits_to_hex([0, 1, 0, 1]) == "5"
    assert hex_to_bits("5", 4) == (0, 1, 0, 1)
    assert hex_to_bits("a", 3) == (1, 0, 1)
    with pytest.raises(ValueError):
        hex_to_bits("b", 3)


@pytest.mark.parametrize("name", sorted(p.name for p in CIRCUITS.glob("*.gkl")))
def test_bundled_circuits_load(name):
    c = load_circuit(str(CIRCUITS / name))
    assert c.ninputs <= 12
    assert parse_circuit(serialize(c)) == c
