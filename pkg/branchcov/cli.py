"""
Command-line entry point.

Every subcommand prints a human-readable rendering by default and a
{"schema": 1, ...} JSON document with --json. Exit status is 0 on success,
1 when a computation fails or a worked example does not match, and 2 on
usage errors.
"""

import argparse
import asyncio
import json
import logging
import sys
from typing import Any, Callable, Dict, List, Optional, Tuple

from pydantic import ValidationError

from .config import AppConfig, load_config, with_overrides
from .errors import BranchcovError
from .fgab import IntMatrix, smith_normal_form
from .finmodel import (
    FiniteDynSys, bratteli, essential_freeness_check, groupoid_enumerate, load_model, minimality_report,
    rn_classes,
)
from .ktheory import (
    EXAMPLE_SEQUENCES, SequenceSolution, SixTermSequence, k_groups, parse_space, solve_six_term,
)
from .models import SCHEMA_VERSION
from .plcover import (
    NAMED_MAPS, PLMap, as_rational, constraint_profile, essential_freeness, generic_class_size,
    groupoid_orbit, load_pl_map, named_map,
)
from .ratmap import (
    backward_density_check, expansion_check, forward_orbit, parse_rational_map, postcritical_set,
    preimages, puncture_count,
)
from .server import ComputeServer
from .sphere import parse_point
from .worked_examples import EXAMPLE_IDS, run_example

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


def setup_logging(level: str = "WARNING"):
    """Setup logging configuration."""
    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )


logger = logging.getLogger(__name__)


def _emit(args: argparse.Namespace, payload: Dict[str, Any], text: str) -> None:
    if args.json:
        print(json.dumps({"schema": SCHEMA_VERSION, **payload}, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        print(text)


def _read_json(path: str) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _pl_map(spec: str) -> PLMap:
    return named_map(spec) if spec in NAMED_MAPS else load_pl_map(_read_json(spec))


def _model(path: str) -> FiniteDynSys:
    return load_model(_read_json(path))


# snf

def _cmd_snf(args: argparse.Namespace, config: AppConfig) -> int:
    try:
        rows = json.loads(args.matrix)
    except json.JSONDecodeError as e:
        raise BranchcovError(f"--matrix is not a JSON array of rows: {e}") from None
    form = smith_normal_form(IntMatrix.from_rows(rows))
    diagonal = form.d.diagonal()
    text = "\n".join([
        f"d = diag({', '.join(str(x) for x in diagonal)})",
        f"u = {form.u.to_rows()}",
        f"v = {form.v.to_rows()}",
    ])
    payload = {"u": form.u.to_rows(), "d": form.d.to_rows(), "v": form.v.to_rows(), "diagonal": diagonal}
    _emit(args, payload, text)
    return 0


# ktheory

def _solution_text(seq: SixTermSequence, solution: SequenceSolution) -> str:
    lines = []
    for node in solution.nodes:
        group = str(node.group) if node.group is not None else "?"
        line = f"{node.label}: {group} [{node.status.value}]"
        if node.group is None and (node.subgroup is not None or node.quotient is not None):
            sub = str(node.subgroup) if node.subgroup is not None else "?"
            quot = str(node.quotient) if node.quotient is not None else "?"
            line += f"  0 -> {sub} -> {node.label} -> {quot} -> 0"
        if node.note:
            line += f"  ({node.note})"
        lines.append(line)
    if solution.forced_zero:
        lines.append(f"maps forced to zero: {', '.join(str(i) for i in solution.forced_zero)}")
    if solution.inexact_at:
        lines.append(f"not exact at: {', '.join(str(i) for i in solution.inexact_at)}")
    return "\n".join(lines)


def _solve_and_emit(args: argparse.Namespace, seq: SixTermSequence) -> int:
    solution = solve_six_term(seq, assume_split=getattr(args, "assume_split", False))
    payload = {"sequence": seq.to_json_dict(), "solution": solution.model_dump(mode="json")}
    _emit(args, payload, _solution_text(seq, solution))
    return 0


def _cmd_ktheory_solve(args: argparse.Namespace, config: AppConfig) -> int:
    return _solve_and_emit(args, SixTermSequence.model_validate(_read_json(args.file)))


def _cmd_ktheory_example(args: argparse.Namespace, config: AppConfig) -> int:
    return _solve_and_emit(args, EXAMPLE_SEQUENCES[args.example]())


def _cmd_ktheory_kspace(args: argparse.Namespace, config: AppConfig) -> int:
    space = parse_space(args.descriptor)
    pair = k_groups(space)
    payload = {"space": str(space), "k0": str(pair.k0), "k1": str(pair.k1), "groups": pair.model_dump(mode="json")}
    _emit(args, payload, f"{space}: {pair}")
    return 0


# ratmap

def _cmd_ratmap_analyze(args: argparse.Namespace, config: AppConfig) -> int:
    tolerances = config.tolerances
    q = parse_rational_map(args.expression, tolerances)
    branch = postcritical_set(q, args.max_steps, tolerances=tolerances, seed=config.seed)
    punctures = puncture_count(branch, tolerances)

    lines = [f"q(z) = {q}", f"degree {branch.degree}", f"critical points ({len(branch.critical_points)}):"]
    lines += [f"  {c.point}  (local degree {c.multiplicity})" for c in branch.critical_points]
    lines.append(f"critical values: {', '.join(str(p) for p in branch.critical_values)}")
    lines.append(f"postcritical set: {', '.join(str(p) for p in branch.postcritical_set)}")
    lines.append(f"postcritically finite: {'yes' if branch.postcritically_finite else 'no'}")
    lines.append(f"punctures of U and q(U): {punctures}")
    _emit(args, {"map": str(q), **branch.to_dict(), "punctures": punctures}, "\n".join(lines))
    return 0


def _cmd_ratmap_orbit(args: argparse.Namespace, config: AppConfig) -> int:
    q = parse_rational_map(args.expression, config.tolerances)
    record = forward_orbit(q, parse_point(args.start), args.steps, tolerances=config.tolerances)
    lines = [" -> ".join(str(p) for p in record.points)]
    if record.finite:
        lines.append(f"cycle of length {record.cycle_length} entered at step {record.cycle_start}")
    elif record.attracted:
        lines.append("converges to an attracting cycle without landing on it")
    else:
        lines.append(f"no return within {args.steps} steps")
    _emit(args, {"map": str(q), **record.to_dict()}, "\n".join(lines))
    return 0


def _cmd_ratmap_density(args: argparse.Namespace, config: AppConfig) -> int:
    q = parse_rational_map(args.expression, config.tolerances)
    report = backward_density_check(q, parse_point(args.start), args.depth, args.eps, config.tolerances, config.seed)
    verdict = "dense" if report.passed else "not dense"
    text = (
        f"backward tree of depth {report.depth}: {report.point_count} points, "
        f"covering radius {report.achieved_epsilon:.6g} (target {report.epsilon:g}): {verdict} [heuristic]"
    )
    _emit(args, {"map": str(q), **report.to_dict()}, text)
    return 0


def _cmd_ratmap_fiber(args: argparse.Namespace, config: AppConfig) -> int:
    q = parse_rational_map(args.expression, config.tolerances)
    w = parse_point(args.at)
    fiber = preimages(q, w, config.tolerances, config.seed)
    lines = [f"fiber over {w}:"] + [f"  {p}  (multiplicity {m})" for p, m in fiber]
    payload = {"map": str(q), "point": w.to_dict(), "fiber": [{"point": p.to_dict(), "multiplicity": m} for p, m in fiber]}
    _emit(args, payload, "\n".join(lines))
    return 0


def _cmd_ratmap_expand(args: argparse.Namespace, config: AppConfig) -> int:
    q = parse_rational_map(args.expression, config.tolerances)
    report = expansion_check(q, parse_point(args.center), args.radius, args.max_n, config.tolerances)
    if report.covered:
        text = f"q^{report.n_found} of the cap is {report.epsilon:g}-dense [heuristic]"
    else:
        text = f"cap not {report.epsilon:g}-dense after {report.max_n} iterations [heuristic]"
    _emit(args, {"map": str(q), **report.to_dict()}, text)
    return 0


# plmap

def _cmd_plmap_profile(args: argparse.Namespace, config: AppConfig) -> int:
    m = _pl_map(args.map)
    profiles = constraint_profile(m, args.level)
    generic = generic_class_size(m, args.level)
    lines = [f"R_{args.level}: generic class size {generic}"]
    lines += [f"  {p.describe()}  class {{{', '.join(str(x) for x in p.class_members)}}}" for p in profiles]
    payload = {"map": m.to_dict(), "level": args.level, "generic_size": generic, "profiles": [p.to_dict() for p in profiles]}
    _emit(args, payload, "\n".join(lines))
    return 0


def _cmd_plmap_orbit(args: argparse.Namespace, config: AppConfig) -> int:
    m = _pl_map(args.map)
    x = as_rational(args.start)
    points = groupoid_orbit(m, x, args.depth)
    payload = {"map": m.to_dict(), "from": str(x), "depth": args.depth, "orbit": [str(p) for p in points]}
    _emit(args, payload, f"orbit of {x} (depth {args.depth}): {', '.join(str(p) for p in points)}")
    return 0


def _cmd_plmap_free(args: argparse.Namespace, config: AppConfig) -> int:
    m = _pl_map(args.map)
    max_n = args.max - 1 if args.max_n is None else args.max_n
    result = essential_freeness(m, args.max, max_n)
    if result.free:
        text = f"essentially free for T^a, T^b with b < a <= {args.max}"
    else:
        a, b = result.exponents
        text = f"not essentially free: T^{a} and T^{b} agree on ({result.witness[0]}, {result.witness[1]})"
    _emit(args, {"map": m.to_dict(), "max_m": args.max, "max_n": max_n, **result.to_dict()}, text)
    return 0


# finmodel

def _cmd_finmodel_classes(args: argparse.Namespace, config: AppConfig) -> int:
    partition = rn_classes(_model(args.file), args.level)
    text = f"R_{args.level}: " + " ".join("{" + ", ".join(c) + "}" for c in partition.classes)
    _emit(args, partition.model_dump(), text)
    return 0


def _cmd_finmodel_bratteli(args: argparse.Namespace, config: AppConfig) -> int:
    diagram = bratteli(_model(args.file), args.levels)
    payload = diagram.to_json_dict()
    if args.dot:
        payload["dot"] = diagram.to_dot()
        text = diagram.to_dot().rstrip("\n")
    else:
        lines = []
        for n, level in enumerate(diagram.levels):
            blocks = " ".join(f"{v.size}{{{','.join(v.members)}}}" for v in level)
            lines.append(f"level {n} (dim {diagram.total_dimensions[n]}): {blocks}")
        text = "\n".join(lines)
    _emit(args, payload, text)
    return 0


def _cmd_finmodel_orbits(args: argparse.Namespace, config: AppConfig) -> int:
    report = minimality_report(_model(args.file), args.max)
    lines = [f"{x}: orbit of size {size}" for x, size in report.orbit_sizes.items()]
    lines.append(f"minimal: {'yes' if report.minimal else 'no'} ({report.caveat})")
    _emit(args, report.model_dump(), "\n".join(lines))
    return 0


def _cmd_finmodel_groupoid(args: argparse.Namespace, config: AppConfig) -> int:
    elements = groupoid_enumerate(_model(args.file), args.max)
    lines = [f"({g.x}, {g.k}, {g.y}) via (m, n) = {g.witness}" for g in elements]
    _emit(args, {"max_exponent": args.max, "elements": [g.model_dump() for g in elements]}, "\n".join(lines))
    return 0


def _cmd_finmodel_freeness(args: argparse.Namespace, config: AppConfig) -> int:
    report = essential_freeness_check(_model(args.file), args.max)
    if report.violations:
        lines = [f"T^{v.m} {v.x} = T^{v.n} {v.x}" for v in report.violations]
    else:
        lines = [f"no returns up to exponent {args.max}"]
    lines.append(f"({report.caveat})")
    _emit(args, report.model_dump(), "\n".join(lines))
    return 0


# example / serve

def _cmd_example(args: argparse.Namespace, config: AppConfig) -> int:
    report = run_example(args.example, config.tolerances, config.seed)
    _emit(args, report.to_json_dict(), report.to_text())
    return 0 if report.passed else 1


def _cmd_serve(args: argparse.Namespace, config: AppConfig) -> int:
    server = ComputeServer(config)
    asyncio.run(server.start(host=args.host, port=args.port))
    return 0


Handler = Callable[[argparse.Namespace, AppConfig], int]

_COMMANDS: Dict[Tuple[str, Optional[str]], Handler] = {
    ("snf", None): _cmd_snf,
    ("ktheory", "solve"): _cmd_ktheory_solve,
    ("ktheory", "example"): _cmd_ktheory_example,
    ("ktheory", "kspace"): _cmd_ktheory_kspace,
    ("ratmap", "analyze"): _cmd_ratmap_analyze,
    ("ratmap", "orbit"): _cmd_ratmap_orbit,
    ("ratmap", "density"): _cmd_ratmap_density,
    ("ratmap", "fiber"): _cmd_ratmap_fiber,
    ("ratmap", "expand"): _cmd_ratmap_expand,
    ("plmap", "profile"): _cmd_plmap_profile,
    ("plmap", "orbit"): _cmd_plmap_orbit,
    ("plmap", "free"): _cmd_plmap_free,
    ("finmodel", "classes"): _cmd_finmodel_classes,
    ("finmodel", "bratteli"): _cmd_finmodel_bratteli,
    ("finmodel", "orbits"): _cmd_finmodel_orbits,
    ("finmodel", "groupoid"): _cmd_finmodel_groupoid,
    ("finmodel", "freeness"): _cmd_finmodel_freeness,
    ("example", None): _cmd_example,
    ("serve", None): _cmd_serve,
}


def _global_options() -> argparse.ArgumentParser:
    # SUPPRESS keeps a flag given before the subcommand from being reset by the subparser.
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="Emit JSON")
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="Orbit and cycle tolerance")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="Seed for root finding and sampling")
    common.add_argument("--log-level", dest="log_level", choices=LOG_LEVELS, default=argparse.SUPPRESS)
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="branchcov",
        description="K-theory and dynamics of branched coverings",
        parents=[_global_options()],
    )
    # set_defaults rewrites matching parent actions, so the top level keeps its own copy.
    common = _global_options()
    parser.set_defaults(json=False, tol=None, seed=None, log_level=None, action=None)
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    snf = subparsers.add_parser("snf", parents=[common], help="Smith normal form of an integer matrix")
    snf.add_argument("--matrix", required=True, help='Row-major JSON matrix, e.g. "[[6,4],[4,6]]"')

    ktheory = subparsers.add_parser("ktheory", help="Six-term sequences and K-groups")
    ksub = ktheory.add_subparsers(dest="action", required=True)
    solve = ksub.add_parser("solve", parents=[common], help="Solve a six-term sequence from JSON")
    solve.add_argument("file")
    solve.add_argument("--assume-split", dest="assume_split", action="store_true",
                       help="Report split extensions when the data does not force them")
    kexample = ksub.add_parser("example", parents=[common], help="Solve a built-in sequence")
    kexample.add_argument("example", choices=sorted(EXAMPLE_SEQUENCES))
    kexample.add_argument("--assume-split", dest="assume_split", action="store_true")
    kspace = ksub.add_parser("kspace", parents=[common], help="K-groups of a catalog space")
    kspace.add_argument("descriptor", help="e.g. sphere-minus-9 or circle+point")

    ratmap = subparsers.add_parser("ratmap", help="Rational maps of the sphere")
    rsub = ratmap.add_subparsers(dest="action", required=True)
    analyze = rsub.add_parser("analyze", parents=[common], help="Branch data and postcritical set")
    analyze.add_argument("expression")
    analyze.add_argument("--max-steps", dest="max_steps", type=int, default=20)
    orbit = rsub.add_parser("orbit", parents=[common], help="Forward orbit of a point")
    orbit.add_argument("expression")
    orbit.add_argument("--from", dest="start", required=True, help="Point such as 0.3+0.2i or inf")
    orbit.add_argument("--steps", type=int, default=20)
    density = rsub.add_parser("density", parents=[common], help="Backward-orbit density check")
    density.add_argument("expression")
    density.add_argument("--depth", type=int, required=True)
    density.add_argument("--eps", type=float, required=True)
    density.add_argument("--from", dest="start", default="2")
    fiber = rsub.add_parser("fiber", parents=[common], help="Preimages of a point")
    fiber.add_argument("expression")
    fiber.add_argument("--at", required=True)
    expand = rsub.add_parser("expand", parents=[common], help="Expansion check for a chordal cap")
    expand.add_argument("expression")
    expand.add_argument("--center", default="0.3+0.2i")
    expand.add_argument("--radius", type=float, default=0.1)
    expand.add_argument("--max-n", dest="max_n", type=int, default=12)

    plmap = subparsers.add_parser("plmap", help="Piecewise-linear interval maps")
    psub = plmap.add_subparsers(dest="action", required=True)
    profile = psub.add_parser("profile", parents=[common], help="Constraint profile of R_N")
    profile.add_argument("--map", default="fold", help="Named map or JSON file")
    profile.add_argument("--level", type=int, required=True)
    porbit = psub.add_parser("orbit", parents=[common], help="Groupoid orbit of a rational point")
    porbit.add_argument("--map", default="fold")
    porbit.add_argument("--from", dest="start", required=True, help="Rational point p/q")
    porbit.add_argument("--depth", type=int, default=3)
    free = psub.add_parser("free", parents=[common], help="Essential freeness check")
    free.add_argument("--map", default="fold")
    free.add_argument("--max", type=int, default=4)
    free.add_argument("--max-n", dest="max_n", type=int, default=None)

    finmodel = subparsers.add_parser("finmodel", help="Finite dynamical models")
    fsub = finmodel.add_subparsers(dest="action", required=True)
    classes = fsub.add_parser("classes", parents=[common], help="Classes of R_N")
    classes.add_argument("file")
    classes.add_argument("--level", type=int, required=True)
    diagram = fsub.add_parser("bratteli", parents=[common], help="Bratteli diagram of the R_N tower")
    diagram.add_argument("file")
    diagram.add_argument("--levels", type=int, required=True)
    diagram.add_argument("--dot", action="store_true", help="Print DOT graph text")
    for name, help_text in (
        ("orbits", "Orbit sizes and minimality"),
        ("groupoid", "Groupoid elements up to an exponent"),
        ("freeness", "Essential-freeness violations"),
    ):
        sub = fsub.add_parser(name, parents=[common], help=help_text)
        sub.add_argument("file")
        sub.add_argument("--max", type=int, required=True)

    example = subparsers.add_parser("example", parents=[common], help="Reproduce a worked example")
    example.add_argument("example", choices=EXAMPLE_IDS)

    serve = subparsers.add_parser("serve", parents=[common], help="Run the JSON-RPC compute service")
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    if not args.command:
        parser.print_help(sys.stderr)
        return 2

    config = with_overrides(load_config(), log_level=args.log_level, seed=args.seed, orbit_tol=args.tol)
    setup_logging(config.log_level)

    handler = _COMMANDS[(args.command, args.action)]
    try:
        return handler(args, config)
    except (BranchcovError, ValidationError, ValueError, OSError) as e:
        logger.debug(f"{args.command} {args.action or ''} failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
