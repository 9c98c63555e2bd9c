"""Line-based circuit text format.

    # comment
    circuit toy n=3
    gate g1 = AND x1 x2
    gate g2 = GK k=1 default=0 table=hex:5 g1 x3 1
    gate g3 = MOD m=3 g2 x1
    outputs g3

Tables (GK ball values, SYM count values) are packed four bits per hex digit,
first bit most significant, zero padded at the end.
"""
from __future__ import annotations

import re

from .ball import ball_size
from .circuit import CONST0, CONST1, KINDS, Circuit, GateKind, Node, validate
from .errors import ParseError

_ID = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")


def bits_to_hex(bits) -> str:
    bits = list(bits)
    bits += [0] * (-len(bits) % 4)
    return "".join("%x" % int("".join(map(str, bits[i:i + 4])), 2) for i in range(0, len(bits), 4))


def hex_to_bits(h: str, length: int) -> tuple[int, ...]:
    if len(h) != (length + 3) // 4:
        raise ValueError(f"expected {(length + 3) // 4} hex digits for {length} bits, got {len(h)}")
    bits = []
    for ch in h:
        v = int(ch, 16)
        bits.extend((v >> s) & 1 for s in (3, 2, 1, 0))
    if any(bits[length:]):
        raise ValueError("nonzero padding bits")
    return tuple(bits[:length])


def serialize(c: Circuit) -> str:
    n = c.ninputs
    lines = [f"circuit {c.name} n={n}"]

    def name(r):
        if r == CONST0:
            return "0"
        if r == CONST1:
            return "1"
        return f"x{r + 1}" if r < n else f"g{r - n + 1}"

    for j, nd in enumerate(c.nodes):
        kd = nd.kind
        parts = [f"gate g{j + 1} =", kd.name]
        if kd.m is not None:
            parts.append(f"m={kd.m}")
        if kd.k is not None:
            parts.append(f"k={kd.k}")
        if kd.default is not None:
            parts.append(f"default={kd.default}")
        if kd.table is not None:
            parts.append(f"table=hex:{bits_to_hex(kd.table)}")
        parts.extend(name(r) for r in nd.inputs)
        lines.append(" ".join(parts))
    lines.append("outputs " + " ".join(name(r) for r in c.outputs))
    return "\n".join(lines) + "\n"


def _table_length(kind: str, fanin: int, k: int | None) -> int:
    return ball_size(fanin, k or 0) if kind == "GK" else fanin + 1


def parse_circuit(text: str) -> Circuit:
    """Parse the text format; raises :class:`ParseError` with line and column."""
    name, n = None, None
    ids: dict[str, int] = {}
    nodes: list[Node] = []
    outputs = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        toks = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]
        head, col = toks[0]

        def err(msg, c=col):
            raise ParseError(msg, lineno, c)

        if head == "circuit":
            if name is not None:
                err("duplicate circuit header")
            if len(toks) != 3 or not toks[2][0].startswith("n="):
                err("expected 'circuit <name> n=<ninputs>'")
            name = toks[1][0]
            try:
                n = int(toks[2][0][2:])
            except ValueError:
                err("bad input count", toks[2][1])
            if n < 0:
                err("negative input count", toks[2][1])
            continue
        if n is None:
            err("missing 'circuit <name> n=<n>' header")

        def operand(tok, c):
            if tok == "0":
                return CONST0
            if tok == "1":
                return CONST1
            if re.fullmatch(r"x\d+", tok):
                i = int(tok[1:])
                if not 1 <= i <= n:
                    err(f"input {tok} out of range 1..{n}", c)
                return i - 1
            if tok in ids:
                return ids[tok]
            err(f"undefined operand {tok!r}", c)

        if head == "gate":
            if len(toks) < 4 or toks[2][0] != "=":
                err("expected 'gate <id> = <KIND> ...'")
            gid, gcol = toks[1]
            if not _ID.match(gid) or re.fullmatch(r"x\d+", gid):
                err(f"bad gate id {gid!r}", gcol)
            if gid in ids:
                err(f"gate id {gid!r} defined twice", gcol)
            kind, kcol = toks[3]
            if kind not in KINDS:
                err(f"unknown gate kind {kind!r}", kcol)
            params: dict[str, tuple[str, int]] = {}
            ops = []
            for tok, c in toks[4:]:
                if "=" in tok:
                    key, val = tok.split("=", 1)
                    if key not in ("m", "k", "default", "table") or ops:
                        err(f"unexpected parameter {tok!r}", c)
                    params[key] = (val, c)
                else:
                    ops.append(operand(tok, c))
            kw = {}
            for key in ("m", "k", "default"):
                if key in params:
                    val, c = params[key]
                    try:
                        kw[key] = int(val)
                    except ValueError:
                        err(f"parameter {key} must be an integer", c)
            if "table" in params:
                val, c = params["table"]
                if not val.startswith("hex:"):
                    err("table must be written as hex:<digits>", c)
                try:
                    kw["table"] = hex_to_bits(val[4:], _table_length(kind, len(ops), kw.get("k")))
                except ValueError as e:
                    err(f"bad table: {e}", c)
            required = {"MOD": ("m",), "THR": ("k",), "GK": ("k", "default", "table"), "SYM": ("table",)}
            for key in required.get(kind, ()):
                if key not in kw:
                    err(f"{kind} needs parameter {key}", kcol)
            for key in kw:
                if key not in required.get(kind, ()):
                    err(f"{kind} does not take parameter {key}", params[key][1])
            ids[gid] = n + len(nodes)
            nodes.append(Node(GateKind(kind, **kw), tuple(ops)))
            continue
        if head == "outputs":
            if outputs is not None:
                err("duplicate outputs line")
            outputs = tuple(operand(tok, c) for tok, c in toks[1:])
            continue
        err(f"unknown directive {head!r}")
    if n is None:
        raise ParseError("empty input: missing circuit header")
    if outputs is None:
        raise ParseError("missing outputs line")
    c = Circuit(n, tuple(nodes), outputs, name)
    diags = validate(c)
    if diags:
        raise ParseError("; ".join(map(str, diags)))
    return c


def load_circuit(path: str) -> Circuit:
    with open(path) as fh:
        return parse_circuit(fh.read())
