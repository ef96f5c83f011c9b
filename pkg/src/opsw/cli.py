"""Command-line front end.

One binary with subcommands `solve`, `simulate`, `table`, `verify`,
`export-lp`, and `import-solution`.  Exit codes: 0 on success, 1 on runtime or
data errors, 2 on usage errors.  All randomness flows from `--seed`.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path as FilePath

from .experiments import (CONCURRENT, SEQUENTIAL, SolverConfig, THETA_GRID,
                          emit_csv, emit_csv_long, run_table, simulate,
                          verify_equivalences)
from .instance import (Instance, InstanceFormatError, WeightModel,
                       apply_deviation, euclidean_weights, load_instance,
                       parse_tsiligirides)
from .lp_io import export_lp
from .milp import (ModelKind, build_dop, build_one_stage_ro,
                   build_static_concurrent, build_static_sequential)
from .solver import FeasibilityError, branch_and_bound, evaluate_objective
from .uncertainty import BoxUncertainty


class CliError(Exception):
    """Runtime error carrying a message for standard error (exit 1)."""


def _track(parser, sub_parser):
    parser.opsw_subparsers.append(sub_parser)
    return sub_parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opsw",
        description="Orienteering with stochastic weights: robust models, "
                    "recourse simulation, result tables.")
    parser.add_argument("--config", metavar="PATH",
                        help="JSON file with defaults for any flag (flags win)")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.opsw_subparsers = []

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--instance", required=True, metavar="PATH",
                       help="instance file (benchmark text or JSON)")
        p.add_argument("--L", type=float, default=None,
                       help="length budget in distance units "
                            "(required for benchmark text files)")
        p.add_argument("--alpha", type=float, default=None,
                       help="deviation fraction of expected weight, in [0, 1]")
        p.add_argument("--seed", type=int, default=42,
                       help="base seed for all scenario sampling")
        p.add_argument("--limit-nodes", type=int, default=10_000_000,
                       help="search node budget for the built-in solver")

    p = _track(parser, sub.add_parser("solve", help="solve one model with the built-in search"))
    common(p)
    p.add_argument("--model", default=None,
                   choices=["dop", "one-stage", "static-seq", "static-conc"])
    p.add_argument("--theta", type=float, default=0.0,
                   help="protection level in [0, 1]")

    p = _track(parser, sub.add_parser("simulate", help="replay a path against sampled scenarios"))
    common(p)
    p.add_argument("--model", default="one-stage",
                   choices=["dop", "one-stage", "static-seq", "static-conc"])
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--path", default=None, metavar="SEQ",
                   help="fixed path like 0-3-5-0 (solved from --model if omitted)")
    p.add_argument("--scenarios", type=int, default=1000,
                   help="number of sampled scenarios")

    p = _track(parser, sub.add_parser("table", help="theta sweep with Monte-Carlo statistics"))
    common(p)
    p.add_argument("--theta-grid", default=None, metavar="T1,T2,...",
                   help="comma-separated protection levels (default 0,0.1,...,1)")
    p.add_argument("--scenarios", type=int, default=1000)
    p.add_argument("--out", required=True, metavar="DIR",
                   help="output directory for table.csv and table_long.csv")

    p = _track(parser, sub.add_parser("verify", help="check the model equivalences exhaustively"))
    common(p)
    p.add_argument("--theta-grid", default="0,0.25,0.5,0.75,1")
    p.add_argument("--cap", type=int, default=8,
                   help="maximum instance size for exhaustive checking")

    p = _track(parser, sub.add_parser("export-lp", help="write LP files for external solvers"))
    common(p)
    p.add_argument("--model", default=None,
                   choices=["dop", "one-stage", "static-seq", "static-conc"])
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--relax", action="store_true",
                   help="relax the integrality that provably does not bind")
    p.add_argument("--out", required=True, metavar="DIR")

    p = _track(parser, sub.add_parser("import-solution",
                       help="register an externally solved path for `table`"))
    common(p)
    p.add_argument("--model", default=None,
                   choices=["one-stage", "static-conc"])
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--solution", required=True, metavar="PATH",
                   help="file listing the chosen arcs, one 'i j' pair per line")
    p.add_argument("--out", required=True, metavar="DIR",
                   help="directory holding solutions.json")
    return parser


def _load_problem(args) -> tuple[Instance, WeightModel]:
    path = FilePath(args.instance)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CliError(f"cannot read instance file: {exc}") from None
    if text.lstrip().startswith("{"):
        inst, model = load_instance(text)
        if args.L is not None:
            inst = Instance(inst.nodes, args.L)
    else:
        if args.L is None:
            raise CliError("benchmark text instances need --L")
        inst = parse_tsiligirides(text, args.L)
        model = None
    if model is None:
        model = euclidean_weights(inst)
    if args.alpha is not None:
        model = apply_deviation(model, args.alpha)
    return inst, model


def _parse_grid(text: str | None):
    if text is None:
        return THETA_GRID
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise CliError(f"bad theta grid {text!r}") from None


def _parse_path_arg(text: str, n_nodes: int) -> tuple[int, ...]:
    try:
        seq = [int(v) for v in text.split("-")]
    except ValueError:
        raise CliError(f"bad path {text!r}") from None
    if seq and seq[0] == 0:
        seq = seq[1:]
    if seq and seq[-1] == 0:
        seq = seq[:-1]
    if not seq:
        raise CliError("path visits no scoring node")
    for v in seq:
        if not 1 <= v < n_nodes:
            raise CliError(f"path node {v} out of range")
    if len(set(seq)) != len(seq):
        raise CliError("path repeats a node")
    return tuple(seq)


def _solutions_file(out: str) -> FilePath:
    return FilePath(out) / "solutions.json"


def _load_solutions(out: str) -> dict:
    f = _solutions_file(out)
    if not f.exists():
        return {}
    entries = json.loads(f.read_text())
    return {(e["model"], round(e["theta"], 2)): tuple(e["path"]) for e in entries}


def cmd_solve(args) -> int:
    inst, w = _load_problem(args)
    kind = ModelKind.from_label(args.model)
    sol = branch_and_bound(inst, BoxUncertainty(w, args.theta), kind,
                           args.limit_nodes)
    print(f"seed={args.seed}")
    print(sol.to_record())
    return 0


def cmd_simulate(args) -> int:
    inst, w = _load_problem(args)
    kind = ModelKind.from_label(args.model)
    u = BoxUncertainty(w, args.theta)
    if args.path is not None:
        path = _parse_path_arg(args.path, inst.n_nodes)
        objective = evaluate_objective(path, kind, inst, u)
    else:
        sol = branch_and_bound(inst, u, kind, args.limit_nodes)
        path, objective = sol.path, sol.objective
    print(f"seed={args.seed}")
    print(f"path={'-'.join(['0', *map(str, path), '0'])} objective={objective!r}")
    for policy in (SEQUENTIAL, CONCURRENT):
        s = simulate(path, inst, w, args.scenarios, args.seed, policy)
        print(f"policy={policy} n={s.n_scenarios} mean={s.mean:.2f} std={s.std:.2f}")
    return 0


def cmd_table(args) -> int:
    inst, w = _load_problem(args)
    out = FilePath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = SolverConfig(limit_nodes=args.limit_nodes,
                          imported=_load_solutions(args.out))
    rows = run_table(inst, w, _parse_grid(args.theta_grid),
                     args.scenarios, args.seed, config)
    (out / "table.csv").write_text(emit_csv(rows))
    (out / "table_long.csv").write_text(emit_csv_long(rows))
    print(f"seed={args.seed}")
    print(f"wrote {out / 'table.csv'} and {out / 'table_long.csv'}")
    return 0


def cmd_verify(args) -> int:
    inst, w = _load_problem(args)
    if inst.n_nodes > args.cap:
        raise CliError(f"instance has {inst.n_nodes} nodes, cap is {args.cap}")
    report = verify_equivalences(inst, w, _parse_grid(args.theta_grid), args.cap)
    print(f"seed={args.seed}")
    print(report.to_text(), end="")
    return 0 if report.ok else 1


_BUILDERS = {
    "dop": lambda inst, w, a: build_dop(inst, w),
    "one-stage": lambda inst, w, a: build_one_stage_ro(inst, w, a.theta),
    "static-seq": lambda inst, w, a: build_static_sequential(inst, w, a.theta, a.relax),
    "static-conc": lambda inst, w, a: build_static_concurrent(inst, w, a.theta),
}


def cmd_export_lp(args) -> int:
    inst, w = _load_problem(args)
    out = FilePath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model = _BUILDERS[args.model](inst, w, args)
    alpha = args.alpha if args.alpha is not None else 0.0
    name = (f"{args.model}_theta{args.theta:.2f}"
            f"_alpha{alpha:.2f}_L{inst.length_limit:g}.lp")
    target = out / name
    try:
        target.write_text(export_lp(model))
    except OSError as exc:
        raise CliError(f"cannot write {target}: {exc}") from None
    print(f"wrote {target}")
    return 0


def _read_arcs(text: str) -> list[tuple[int, int]]:
    arcs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        # Accept both "i j" pairs and LP variable names "x_i_j".
        if line.startswith("x_"):
            parts = line.split("_")[1:]
        else:
            parts = line.split()
        if len(parts) != 2:
            raise CliError(f"solution line {lineno}: expected an arc, got {line!r}")
        try:
            arcs.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise CliError(f"solution line {lineno}: non-integer arc {line!r}") from None
    if not arcs:
        raise CliError("solution file lists no arcs")
    return arcs


def _path_from_arcs(arcs: list[tuple[int, int]]) -> tuple[int, ...]:
    succ: dict[int, int] = {}
    for i, j in arcs:
        if i in succ:
            raise CliError(f"node {i} has two outgoing arcs")
        succ[i] = j
    if 0 not in succ:
        raise CliError("no arc leaves the depot")
    path = []
    v = succ[0]
    while v != 0:
        if v in path:
            raise CliError(f"arcs revisit node {v}")
        path.append(v)
        if v not in succ:
            raise CliError(f"path breaks at node {v} (no outgoing arc)")
        v = succ[v]
    if len(path) + 1 != len(arcs):
        raise CliError("arcs do not form a single depot-rooted cycle")
    return tuple(path)


def cmd_import_solution(args) -> int:
    inst, w = _load_problem(args)
    try:
        text = FilePath(args.solution).read_text()
    except OSError as exc:
        raise CliError(f"cannot read solution file: {exc}") from None
    path = _path_from_arcs(_read_arcs(text))
    for v in path:
        if v >= inst.n_nodes:
            raise CliError(f"solution node {v} not in the instance")
    kind = ModelKind.from_label(args.model)
    u = BoxUncertainty(w, args.theta)
    objective = evaluate_objective(path, kind, inst, u)

    out = FilePath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    f = _solutions_file(args.out)
    entries = json.loads(f.read_text()) if f.exists() else []
    entries = [e for e in entries
               if not (e["model"] == args.model and round(e["theta"], 2) == round(args.theta, 2))]
    entries.append({"model": args.model, "theta": round(args.theta, 2),
                    "path": list(path), "objective": objective})
    f.write_text(json.dumps(entries, indent=1, sort_keys=True) + "\n")
    print(f"stored {args.model} theta={args.theta:.2f} "
          f"path={'-'.join(['0', *map(str, path), '0'])} objective={objective!r}")
    return 0


_COMMANDS = {
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "table": cmd_table,
    "verify": cmd_verify,
    "export-lp": cmd_export_lp,
    "import-solution": cmd_import_solution,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            defaults = json.loads(FilePath(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: bad config file: {exc}", file=sys.stderr)
            return 1
        if not isinstance(defaults, dict):
            print("error: config file must hold a JSON object", file=sys.stderr)
            return 1
        keyed = {k.replace("-", "_"): v for k, v in defaults.items()}
        parser.set_defaults(**keyed)
        for sub_parser in parser.opsw_subparsers:
            sub_parser.set_defaults(**keyed)
        args = parser.parse_args(argv)
    if args.command in ("solve", "export-lp", "import-solution") and args.model is None:
        parser.error(f"{args.command} needs --model")
    try:
        return _COMMANDS[args.command](args)
    except (CliError, InstanceFormatError, FeasibilityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
