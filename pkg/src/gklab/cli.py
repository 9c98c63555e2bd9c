"""Command-line front end: ``gklab <subcommand> ...``.

Every subcommand prints one JSON record per line. The record holds the
resolved config (seed included), the result, and wall-clock numbers under a
separate "timing" key so that reruns can be compared byte for byte once that
key is dropped.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

import numpy as np

from . import __version__
from ._util import rng
from .algebra import format_poly, interpolate_ball, poly_eval
from .ball import ball_points
from .circuit import single_gate, truth_table, truth_tables
from .circuit_io import load_circuit, serialize
from .errors import GklabError, InputError, InvariantViolation, ParseError, ResourceError
from .generators import random_gk
from .transforms import popcounts

EXIT_USER, EXIT_RESOURCE, EXIT_INVARIANT = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USER, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


# subcommands ---------------------------------------------------------------------

def cmd_interp(a):
    gen = rng(a.seed)
    pts = ball_points(a.n, a.k)
    truth = {p: int(v) for p, v in zip(pts, gen.integers(0, a.q, size=len(pts)))}
    poly = interpolate_ball(truth, a.n, a.k, a.q)
    ok = all(int(poly_eval(poly, p)) == v for p, v in truth.items())
    return {"polynomial": format_poly(poly), "degree": poly.degree, "ball_points": len(pts),
            "terms": len(poly.terms), "matches_ball": ok}


def _sampler_for(a):
    from .probpoly import circuit_poly_sampler, gk_poly_sampler, or_poly_sampler
    if a.gate == "or":
        return or_poly_sampler(a.n, a.q, a.eps)
    if a.gate == "gk":
        kind = random_gk(rng(a.seed, 1), a.n, a.k, a.default)
        return gk_poly_sampler(kind, a.n, a.q, a.eps, a.thr)
    if not a.circuit:
        raise InputError("--gate circuit needs --circuit")
    return circuit_poly_sampler(load_circuit(a.circuit), a.q, a.eps, a.thr)


def cmd_probpoly(a):
    from .probpoly import estimate_pointwise_error
    s = _sampler_for(a)
    rep = estimate_pointwise_error(s, trials=a.trials, points=a.points, seed=a.seed)
    out = rep.to_json()
    out["degree_bound"] = s.degree_bound
    return out


def cmd_depthred(a):
    from .depthred import gk_depth2, layer_profile, vv_gk_circuit
    kind = random_gk(rng(a.seed, 1), a.n, a.k, a.default)
    if a.mode == "vv":
        s = vv_gk_circuit(kind, a.n, a.q, a.eps)
        seeds = [int(v) for v in rng(a.seed, 2).integers(0, 1 << 63, size=a.trials)]
        tabs = s.fast_tables(seeds)
        ref = truth_table(single_gate(kind, a.n)).bits
        err = (tabs != ref).mean(axis=0)
        if a.emit:
            with open(a.emit, "w") as fh:
                fh.write(serialize(s.circuit))
        return {"gate": str(kind), "random_bits": s.nrandom, "copies": s.copies, "hash_width": s.m,
                "size": s.circuit.size, "depth": s.circuit.depth, "profile": list(s.profile),
                "measured_profile": [sorted(x) for x in layer_profile(s.circuit)],
                "trials": a.trials, "max_point_error": float(err.max())}
    d2 = gk_depth2(kind, a.n, a.q, a.eps)
    res = d2.collapse(a.seed)
    c = res.circuit
    if a.emit:
        with open(a.emit, "w") as fh:
            fh.write(serialize(c))
    same = bool(np.array_equal(truth_table(c).bits, truth_table(d2.base.instantiate(a.seed)).bits))
    return {"gate": str(kind), "and_gates": res.and_count, "max_fanin": res.max_fanin,
            "size_bound": res.size_bound, "fanin_bound": res.fanin_bound,
            "equals_depth5_instance": same, "profile": [sorted(x) for x in layer_profile(c)]}


def cmd_sat(a):
    from .symsat import brute_force_sat, gc_sat
    c = load_circuit(a.circuit)
    rep = brute_force_sat(c) if a.brute else gc_sat(c, a.ell, a.repeats, a.seed, a.q, a.point_error,
                                                    a.residual_target)
    return rep.to_json()


def cmd_switch(a):
    from .switchlab import switching_experiment
    c = load_circuit(a.circuit)
    rep = switching_experiment(c, a.p, a.t, a.r, a.trials, a.seed, keep_trials=a.csv is not None)
    if a.csv is not None:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["p", "trial", "free", "max_depth", "deep", "common_fail"],
                           lineterminator="\n")
        w.writeheader()
        w.writerows(rep.per_trial)
        if a.csv == "-":
            sys.stdout.write(buf.getvalue())
        else:
            with open(a.csv, "w") as fh:
                fh.write(buf.getvalue())
    return rep.to_json()


def cmd_fourier(a):
    from .switchlab import fourier_coefficients, growth_bound_shape
    c = load_circuit(a.circuit)
    out = []
    for j, f in enumerate(truth_tables(c, a.workers)):
        co = fourier_coefficients(f)
        w = popcounts(f.nvars)
        masses = [float(np.abs(co[w == lv]).sum()) for lv in a.levels]
        k = max((nd.kind.k for nd in c.nodes if nd.kind.name == "GK"), default=0)
        out.append({"output": j, "parseval": float((co ** 2).sum()),
                    "levels": a.levels, "masses": masses,
                    "bound_shape": [growth_bound_shape(k, c.size, c.depth, lv) for lv in a.levels]})
    return {"outputs": out, "note": "bound shape has its universal constants set to 1"}


def cmd_hlf(a):
    from .problems import HlfInstance, linearity_set, random_hlf, solve_2dhlf_bruteforce, verify_2dhlf
    if a.instance:
        with open(a.instance) as fh:
            inst = HlfInstance.from_json(json.load(fh))
    else:
        if a.grid is None:
            raise InputError("give --grid or --instance")
        inst = random_hlf(a.grid, a.seed)
    out = {"instance": inst.to_json(), "linearity_set_size": int(len(linearity_set(inst)))}
    if a.verify:
        with open(a.verify) as fh:
            z = [int(ch) for ch in fh.read().strip()]
        out["z"] = "".join(map(str, z))
        out["valid"] = verify_2dhlf(inst, z)
    else:
        z = solve_2dhlf_bruteforce(inst)
        out["z"] = "".join(str(int(v)) for v in z)
        out["valid"] = verify_2dhlf(inst, z)
    return out


def cmd_relation(a):
    from .problems import RelationInstance, verify_relation
    with open(a.instance) as fh:
        d = json.load(fh)
    with open(a.output) as fh:
        ys = json.load(fh)
    inst = RelationInstance(d["tag"], tuple(d["inputs"]), d.get("q"))
    return verify_relation(inst, ys).to_json()


def cmd_correlate(a):
    from .problems import best_linear_agreement, exact_correlation
    if a.linear:
        val, coeffs = best_linear_agreement(a.n, a.q, a.target)
        return {"target": a.target, "n": a.n, "q": a.q, "best_linear_agreement": val,
                "argmax_coefficients": list(coeffs)}
    if not a.circuit:
        raise InputError("give --circuit or --linear")
    c = load_circuit(a.circuit)
    return {"target": a.target, "agreement": exact_correlation(truth_table(c, workers=a.workers), a.target)}


def cmd_count(a):
    from .problems import counting_bounds
    return counting_bounds(a.n, a.k)


# plumbing ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gklab", description="G(k)-gate circuit laboratory")
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--text", action="store_true", help="human readable output")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("interp", parents=[common], help="interpolate random values on a Hamming ball")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--q", type=int, default=3)
    s.set_defaults(func=cmd_interp)

    s = sub.add_parser("probpoly", parents=[common], help="pointwise error of a probabilistic polynomial")
    s.add_argument("--gate", choices=["or", "gk", "circuit"], default="gk")
    s.add_argument("--circuit")
    s.add_argument("--n", type=int, default=8)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--default", type=int, choices=[0, 1])
    s.add_argument("--q", type=int, default=3)
    s.add_argument("--eps", type=float, default=0.05)
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--points", choices=["exhaustive", "sampled"], default="exhaustive")
    s.add_argument("--thr", choices=["detector", "exact"], default="detector")
    s.set_defaults(func=cmd_probpoly)

    s = sub.add_parser("depthred", parents=[common], help="depth-5 and depth-2 constructions for a random GK gate")
    s.add_argument("--mode", choices=["vv", "depth2"], default="vv")
    s.add_argument("--n", type=int, default=8)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--default", type=int, choices=[0, 1])
    s.add_argument("--q", type=int, default=3)
    s.add_argument("--eps", type=float, default=0.1)
    s.add_argument("--trials", type=int, default=500)
    s.add_argument("--emit", help="write the constructed circuit here")
    s.set_defaults(func=cmd_depthred)

    s = sub.add_parser("sat", parents=[common], help="satisfiability via SYM+ evaluation")
    s.add_argument("--circuit", required=True)
    s.add_argument("--ell", type=int)
    s.add_argument("--repeats", type=int, default=15)
    s.add_argument("--q", type=int)
    s.add_argument("--point-error", type=float, default=0.05)
    s.add_argument("--residual-target", type=float, default=1e-3)
    s.add_argument("--brute", action="store_true", help="exhaustive search instead")
    s.add_argument("--json", action="store_true", help="JSON output (the default)")
    s.set_defaults(func=cmd_sat)

    s = sub.add_parser("switch", parents=[common], help="random restriction experiment")
    s.add_argument("--circuit", required=True)
    s.add_argument("--p", type=_floats, default=[0.05, 0.1])
    s.add_argument("--t", type=int, default=2)
    s.add_argument("--r", type=int, default=1)
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--csv", nargs="?", const="-", help="per-trial CSV to PATH (stdout if no PATH)")
    s.set_defaults(func=cmd_switch)

    s = sub.add_parser("fourier", parents=[common], help="Fourier level masses")
    s.add_argument("--circuit", required=True)
    s.add_argument("--levels", type=lambda t: [int(v) for v in t.split(",")], default=[1, 2])
    s.set_defaults(func=cmd_fourier)

    s = sub.add_parser("hlf", parents=[common], help="2D hidden linear function")
    s.add_argument("--grid", type=int)
    s.add_argument("--instance", help="instance JSON {grid, A, b}")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--solve", action="store_true", default=True)
    g.add_argument("--verify", metavar="ZFILE")
    s.set_defaults(func=cmd_hlf)

    s = sub.add_parser("relation", parents=[common], help="verify a relation-problem output")
    s.add_argument("--instance", required=True)
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_relation)

    s = sub.add_parser("correlate", parents=[common], help="exact agreement with MAJ or MOD_r")
    s.add_argument("--circuit")
    s.add_argument("--target", default="MAJ")
    s.add_argument("--linear", action="store_true", help="best degree-1 polynomial instead of a circuit")
    s.add_argument("--n", type=int, default=7)
    s.add_argument("--q", type=int, default=3)
    s.set_defaults(func=cmd_correlate)

    s = sub.add_parser("count", parents=[common], help="G(k) gate count versus threshold circuit count")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.set_defaults(func=cmd_count)
    return p


def _split_timing(obj, sink: dict, path: str = ""):
    if isinstance(obj, dict):
        out = {}
        for key, v in obj.items():
            if key == "timing":
                sink[path + key if not path else f"{path}.{key}"] = v
            else:
                out[key] = _split_timing(v, sink, f"{path}.{key}" if path else key)
        return out
    if isinstance(obj, list):
        return [_split_timing(v, sink, path) for v in obj]
    return obj


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not serialisable: {type(v).__name__}")


def _render_text(rec: dict) -> str:
    lines = [f"# gklab {rec['command']}"]

    def walk(obj, indent):
        if isinstance(obj, dict):
            for key, v in obj.items():
                if isinstance(v, (dict, list)) and v and not all(isinstance(x, (int, float, str)) for x in v):
                    lines.append(" " * indent + f"{key}:")
                    walk(v, indent + 2)
                else:
                    lines.append(" " * indent + f"{key:<24} {v}")
        elif isinstance(obj, list):
            for i, v in enumerate(obj):
                lines.append(" " * indent + f"- [{i}]")
                walk(v, indent + 2)
        else:
            lines.append(" " * indent + str(obj))

    walk({"config": rec["config"], "result": rec["result"]}, 0)
    return "\n".join(lines)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    config = {k: v for k, v in sorted(vars(a).items()) if k not in ("func", "text")}
    t0 = time.perf_counter()
    try:
        result = a.func(a)
    except (ParseError, InputError, ValueError, FileNotFoundError, IsADirectoryError) as e:
        print(f"gklab {a.command}: error: {e}", file=sys.stderr)
        return EXIT_USER
    except ResourceError as e:
        print(f"gklab {a.command}: resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InvariantViolation, AssertionError) as e:
        print(f"gklab {a.command}: internal invariant violated: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except GklabError as e:
        print(f"gklab {a.command}: error: {e}", file=sys.stderr)
        return EXIT_USER
    timing = {}
    result = _split_timing(result, timing)
    timing["total_seconds"] = time.perf_counter() - t0
    rec = {"command": a.command, "config": config, "result": result, "timing": timing}
    if a.text:
        print(_render_text(rec))
    else:
        print(json.dumps(rec, sort_keys=True, default=_jsonable))
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
