"""Command-line interface: ``spflow check|solve|sufficiency|generate|gap``.

Exit codes: 0 success, 1 semantic negative (violated, refused, not
cut-sufficient), 2 input error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction

from . import generate as gen
from .core import GraphError, Instance, Pair, mask_vertices
from .cutcheck import check_cut_condition, is_eulerian
from .io import DocumentError, format_fraction, read_instance, write_instance, write_solution
from .lp.general import general_solution, verify_complementary_slackness
from .lp.multiflow import min_congestion
from .routing import RoutingRefused, solve_half_integral, solve_integral
from .spgraph import NotSeriesParallelError
from .sufficiency import SEARCH_MAX_VERTICES, decide_cut_sufficiency

OK, NEGATIVE, INPUT_ERROR = 0, 1, 2
SCOPE_NOTE = "series-parallel theorem does not apply: supply graph is not series-parallel"


def _fmt_side(side) -> str:
    return "{" + ", ".join(map(str, sorted(side))) + "}"


def _load(path: str) -> Instance:
    try:
        with open(path, encoding="utf-8") as fh:
            return read_instance(fh.read())
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc.strerror}") from None


def _jsonable(x):
    if isinstance(x, Fraction):
        return format_fraction(x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(y) for y in x]
    if isinstance(x, (set, frozenset)):
        return sorted(_jsonable(y) for y in x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return x


def _emit(args, payload: dict) -> None:
    if args.emit_certificates:
        with open(args.emit_certificates, "w", encoding="utf-8") as fh:
            json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _witness_lines(witness) -> list[str]:
    lines = [f"witness: odd {witness.p}-spindle", f"hubs: {witness.hubs[0]} {witness.hubs[1]}"]
    lines.append("rim: " + " ".join(map(str, witness.rim)))
    lines.append(f"steps: {len(witness.steps)}")
    lines += [f"step {s.kind} {s.edge}" for s in witness.steps]
    return lines


def _witness_payload(witness) -> dict:
    return {
        "p": witness.p,
        "hubs": list(witness.hubs),
        "rim": list(witness.rim),
        "steps": [[s.kind, s.edge] for s in witness.steps],
    }


def cmd_check(args) -> int:
    inst = _load(args.file)
    report = check_cut_condition(inst)
    euler = is_eulerian(inst)
    print(f"cut condition: {'ok' if report.satisfied else 'violated'}")
    print(f"min surplus: {format_fraction(report.min_surplus)}")
    if report.worst_cut is not None:
        print(f"worst cut: {_fmt_side(report.worst_cut.side)}")
    print(f"tight cuts: {len(report.tight_cuts)}")
    print(f"eulerian: {'yes' if euler else 'no'}")
    _emit(
        args,
        {
            "satisfied": report.satisfied,
            "min_surplus": report.min_surplus,
            "worst_cut": sorted(report.worst_cut.side) if report.worst_cut else None,
            "tight_cuts": [sorted(c.side) for c in report.tight_cuts],
            "eulerian": euler,
            "engine": report.engine,
        },
    )
    return OK if report.satisfied else NEGATIVE


def cmd_solve(args) -> int:
    inst = _load(args.file)
    if args.mode == "fractional":
        sol = min_congestion(inst)
        sys.stdout.write(write_solution(inst, sol.paths, sol.congestion, "fractional"))
        _emit(
            args,
            {
                "congestion": sol.congestion,
                "lengths": list(sol.metric.lengths),
                "distances": list(sol.metric.distances),
                "primal_objective": sol.primal_objective,
                "dual_objective": sol.dual_objective,
            },
        )
        return OK
    try:
        if args.mode == "integral":
            result = solve_integral(inst)
        else:
            result = solve_half_integral(inst)
    except RoutingRefused as exc:
        print(f"refused: {exc.kind}: {exc}")
        payload = {"refused": exc.kind}
        if exc.kind == "violated-cut":
            print(f"violated cut: {_fmt_side(exc.certificate.side)} surplus {format_fraction(exc.certificate.surplus)}")
            payload["cut"] = sorted(exc.certificate.side)
            payload["surplus"] = exc.certificate.surplus
        elif exc.kind == "odd-parity":
            print("odd vertices: " + " ".join(map(str, exc.certificate)))
            payload["odd_vertices"] = list(exc.certificate)
        elif exc.kind == "spindle":
            verts, witness = exc.certificate
            print("component: " + " ".join(map(str, verts)))
            for line in _witness_lines(witness):
                print(line)
            payload["component"] = list(verts)
            payload["witness"] = _witness_payload(witness)
        _emit(args, payload)
        return NEGATIVE
    sys.stdout.write(write_solution(inst, result.paths, Fraction(1), args.mode))
    _emit(args, {"floor_units": result.floor_units, "unit_steps": result.unit_steps, "log": result.log})
    return OK


def cmd_sufficiency(args) -> int:
    inst = _load(args.file)
    try:
        verdict = decide_cut_sufficiency(inst.pair, max_vertices=args.max_vertices)
    except NotSeriesParallelError as exc:
        print(SCOPE_NOTE)
        if exc.k4_branch_sets:
            print("k4 branch sets: " + " ".join(_fmt_side(s) for s in exc.k4_branch_sets))
        _emit(args, {"series_parallel": False, "k4_branch_sets": [sorted(s) for s in exc.k4_branch_sets or ()]})
        return NEGATIVE
    if verdict.cut_sufficient:
        print("cut-sufficient: yes")
        _emit(args, {"cut_sufficient": True, "attestation": verdict.attestation})
        return OK
    print("cut-sufficient: no")
    for line in _witness_lines(verdict.witness):
        print(line)
    _emit(args, {"cut_sufficient": False, "witness": _witness_payload(verdict.witness)})
    return NEGATIVE


def cmd_generate(args) -> int:
    kind, params = args.kind, args.params
    if kind == "spindle":
        if len(params) != 1:
            raise DocumentError("usage: generate spindle P")
        p = int(params[0])
        if p < 3:
            raise GraphError("spindle needs p >= 3")
        inst = gen.spindle(p)
    elif kind == "even-spindle":
        inst = gen.even_spindle()
    elif kind == "badk4":
        inst = gen.bad_k4()
    elif kind == "random-sp":
        if len(params) != 2:
            raise DocumentError("usage: generate random-sp SEED N")
        seed, n = int(params[0]), int(params[1])
        if n < 2:
            raise GraphError("random-sp needs n >= 2")
        rng = random.Random(seed)
        g = gen.random_sp_graph(rng, n)
        h = gen.random_demand_graph(rng, n, rng.randint(1, max(1, n // 2)))
        base = Instance(
            g,
            h,
            tuple(rng.randint(1, 3) for _ in g.edges),
            tuple(rng.randint(1, 3) for _ in h.edges),
        )
        inst = gen.make_eulerian(base)
    else:
        raise DocumentError(f"unknown fixture {kind!r}")
    sys.stdout.write(write_instance(inst))
    return OK


def cmd_gap(args) -> int:
    inst = _load(args.file)
    gs = general_solution(Pair(inst.supply, inst.demand), rounds=args.rounds, seed=args.seed, start=None if args.seed is not None else inst)
    cs = verify_complementary_slackness(gs)
    print(f"gap: {format_fraction(gs.gap)}")
    print("history: " + " ".join(format_fraction(x) for x in gs.history))
    print(f"fixed point: {'yes' if gs.fixed_point else 'no'}")
    print(f"complementary slackness: {'ok' if cs.passed else 'failed'}")
    _emit(
        args,
        {
            "gap": gs.gap,
            "history": list(gs.history),
            "capacities": list(gs.instance.capacities),
            "demands": list(gs.instance.demands),
            "lengths": list(gs.metric.lengths),
            "distances": list(gs.metric.distances),
            "cut_weights": {",".join(map(str, mask_vertices(m))): x for m, x in gs.cut.weights.items()},
            "complementary_slackness": cs.passed,
        },
    )
    return OK if cs.passed else NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spflow", description="Multicommodity flow on series-parallel networks.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--emit-certificates", metavar="PATH", help="write certificates as JSON")
    common.add_argument(
        "--max-vertices", type=int, default=SEARCH_MAX_VERTICES, help="size guard for exhaustive searches"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="cut condition and Eulerian test")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", parents=[common], help="route the demands")
    p.add_argument("file")
    p.add_argument("--mode", choices=("fractional", "integral", "half"), default="fractional")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sufficiency", parents=[common], help="decide cut-sufficiency of the pair")
    p.add_argument("file")
    p.set_defaults(func=cmd_sufficiency)

    p = sub.add_parser("generate", parents=[common], help="print a fixture instance")
    p.add_argument("kind", choices=("spindle", "even-spindle", "badk4", "random-sp"))
    p.add_argument("params", nargs="*")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("gap", parents=[common], help="search for a large flow-cut gap on the pair")
    p.add_argument("file")
    p.add_argument("--rounds", type=int, default=50)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_gap)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
