"""gklab: circuits with Hamming-ball gates, probabilistic polynomials and friends."""
from .algebra import FieldElem, FieldPoly, format_poly, interpolate_ball, parse_poly, poly_eval, poly_mul, poly_pow_fermat
from .circuit import Circuit, CircuitBuilder, GateKind, TruthTable, evaluate, truth_table
from .circuit_io import parse_circuit, serialize
from .errors import GklabError, InputError, InvariantViolation, ParseError, ResourceError
from .restriction import Restriction

__version__ = "0.1.0"
