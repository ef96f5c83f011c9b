"""Monte-Carlo simulation tables and model-equivalence verification.

The table protocol sweeps the protection level over a grid, solves the
one-stage robust model and the static-concurrent model (the two-stage
surrogate) at each level, then replays both solutions under both recourse
policies against a shared pool of sampled scenarios.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .instance import Instance, WeightModel
from .milp import (Constraint, MilpModel, ModelKind,
                   build_recourse_concurrent, build_recourse_sequential,
                   build_static_sequential, relax_integrality)
from .recourse import (Path, brute_force_cut, concurrent_recourse,
                       sequential_recourse)
from .solver import (RobustSolution, branch_and_bound, enumerate_milp,
                     evaluate_objective)
from .uncertainty import BoxUncertainty, sample_scenario, worst_case_weights

SEQUENTIAL = "sequential"
CONCURRENT = "concurrent"

THETA_GRID = tuple(round(0.1 * k, 1) for k in range(11))


@dataclass(frozen=True)
class SimulationSummary:
    n_scenarios: int
    mean: float
    std: float
    per_scenario_objectives: tuple[float, ...] | None = None


def _policy_fn(policy: str):
    if policy == SEQUENTIAL:
        return sequential_recourse
    if policy == CONCURRENT:
        return concurrent_recourse
    raise ValueError(f"unknown policy {policy!r}")


def simulate(path: Path, inst: Instance, w: WeightModel, n: int, base_seed: int,
             policy: str, sample_std: bool = False,
             keep_objectives: bool = False,
             pool: list | None = None) -> SimulationSummary:
    """Replay a fixed path against ``n`` sampled scenarios under one policy.

    The per-scenario objective is the path score minus the recourse loss.
    ``pool`` lets several calls share pre-drawn scenarios; ``sample_std``
    switches the n-1 denominator on (population formula by default).
    """
    if n < 1:
        raise ValueError(f"need at least one scenario, got {n}")
    fn = _policy_fn(policy)
    scores = inst.scores()
    total = float(sum(scores[v] for v in path))
    L = inst.length_limit
    values = np.empty(n)
    for i in range(n):
        s = pool[i] if pool is not None else sample_scenario(w, base_seed, i)
        values[i] = total + fn(path, s.d, w.dbar, scores, L).objective
    return SimulationSummary(
        n_scenarios=n,
        mean=float(values.mean()),
        std=float(values.std(ddof=1 if sample_std else 0)),
        per_scenario_objectives=tuple(values) if keep_objectives else None)


@dataclass(frozen=True)
class TableRow:
    theta: float
    one_stage: tuple[float, float, float, float, float]
    two_stage: tuple[float, float, float, float, float]
    one_stage_optimal: bool = True
    two_stage_optimal: bool = True


@dataclass(frozen=True)
class SolverConfig:
    """How run_table obtains first-stage solutions.

    ``imported`` maps (model label, theta rounded to 2 decimals) to a path;
    matching entries bypass the built-in search.
    """

    limit_nodes: int = 10_000_000
    imported: dict = field(default_factory=dict)
    sample_std: bool = False


_TWO_STAGE_LABELS = ("static-conc", "two-stage-conc")


def _solve_cell(inst: Instance, w: WeightModel, theta: float, kind: ModelKind,
                labels: tuple[str, ...], config: SolverConfig) -> RobustSolution:
    u = BoxUncertainty(w, theta)
    for label in labels:
        path = config.imported.get((label, round(theta, 2)))
        if path is not None:
            obj = evaluate_objective(path, kind, inst, u)
            return RobustSolution(tuple(path), kind, theta, obj, True, 0)
    return branch_and_bound(inst, u, kind, config.limit_nodes)


def run_table(inst: Instance, w: WeightModel, theta_grid=THETA_GRID,
              n_scenarios: int = 1000, base_seed: int = 42,
              config: SolverConfig | None = None) -> list[TableRow]:
    """One row per theta: robust objectives plus simulated mean/std of each
    solution under both policies, all against one shared scenario pool."""
    config = config or SolverConfig()
    pool = [sample_scenario(w, base_seed, i) for i in range(n_scenarios)]

    def stats(sol: RobustSolution) -> tuple[float, float, float, float, float]:
        cells = [sol.objective]
        for policy in (SEQUENTIAL, CONCURRENT):
            summary = simulate(sol.path, inst, w, n_scenarios, base_seed,
                               policy, config.sample_std, pool=pool)
            cells += [summary.mean, summary.std]
        return tuple(cells)

    rows = []
    for theta in theta_grid:
        one = _solve_cell(inst, w, theta, ModelKind.ONE_STAGE_RO,
                          ("one-stage",), config)
        two = _solve_cell(inst, w, theta, ModelKind.TWO_STAGE_CONCURRENT,
                          _TWO_STAGE_LABELS, config)
        rows.append(TableRow(theta, stats(one), stats(two),
                             one.optimal, two.optimal))
    return rows


_WIDE_COLUMNS = ("theta",
                 "one_stage_obj", "one_stage_seq_mean", "one_stage_seq_std",
                 "one_stage_conc_mean", "one_stage_conc_std",
                 "two_stage_obj", "two_stage_seq_mean", "two_stage_seq_std",
                 "two_stage_conc_mean", "two_stage_conc_std",
                 "one_stage_optimal", "two_stage_optimal")


def emit_csv(rows: list[TableRow]) -> str:
    """Wide table, one line per theta, 2-decimal cells as in the result tables."""
    lines = [",".join(_WIDE_COLUMNS)]
    for r in rows:
        cells = [f"{r.theta:.2f}"]
        cells += [f"{v:.2f}" for v in (*r.one_stage, *r.two_stage)]
        cells += [str(r.one_stage_optimal).lower(), str(r.two_stage_optimal).lower()]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def emit_csv_long(rows: list[TableRow]) -> str:
    """Long form at full precision: theta,model,policy,stat,value."""
    lines = ["theta,model,policy,stat,value"]
    for r in rows:
        for model, cells in (("one-stage", r.one_stage), ("two-stage", r.two_stage)):
            lines.append(f"{r.theta!r},{model},,obj,{cells[0]!r}")
            for k, policy in enumerate((SEQUENTIAL, CONCURRENT)):
                lines.append(f"{r.theta!r},{model},{policy},mean,{cells[1 + 2 * k]!r}")
                lines.append(f"{r.theta!r},{model},{policy},std,{cells[2 + 2 * k]!r}")
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> list[TableRow]:
    """Inverse of :func:`emit_csv` (values carry the emitted 2-decimal rounding)."""
    lines = text.strip().splitlines()
    if not lines or lines[0] != ",".join(_WIDE_COLUMNS):
        raise ValueError("unrecognized table header")
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        if len(cells) != len(_WIDE_COLUMNS):
            raise ValueError(f"bad row: {line!r}")
        values = [float(c) for c in cells[:11]]
        rows.append(TableRow(values[0], tuple(values[1:6]), tuple(values[6:11]),
                             cells[11] == "true", cells[12] == "true"))
    return rows


# --- equivalence verification ----------------------------------------------

LP_TOL = 1e-6


@dataclass(frozen=True)
class CheckResult:
    name: str
    theta: float
    ok: bool
    discrepancy: float
    witness: str = ""


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def max_discrepancy(self) -> float:
        return max((c.discrepancy for c in self.checks), default=0.0)

    def to_text(self) -> str:
        lines = []
        for c in self.checks:
            status = "pass" if c.ok else "FAIL"
            line = f"{status} theta={c.theta:.2f} {c.name} discrepancy={c.discrepancy!r}"
            if c.witness:
                line += f" witness={c.witness}"
            lines.append(line)
        verdict = "all checks passed" if self.ok else "DISCREPANCIES FOUND"
        lines.append(f"{verdict} (max discrepancy {self.max_discrepancy!r})")
        return "\n".join(lines) + "\n"


def _feasible_paths(inst: Instance, weights: np.ndarray):
    """All simple depot-rooted paths whose cycle fits the budget under the
    given weights (valid pruning under the triangle inequality)."""
    n = inst.n_nodes
    L = inst.length_limit
    out: list[tuple[int, ...]] = []

    def extend(path: list[int], length: float) -> None:
        last = path[-1] if path else 0
        for v in range(1, n):
            if v in path:
                continue
            walk = length + weights[last, v]
            if walk + weights[v, 0] > L:
                continue
            path.append(v)
            out.append(tuple(path))
            extend(path, walk)
            path.pop()

    extend([], 0.0)
    return out


def _static_sequential_value(path: Path, d_u: np.ndarray, dbar: np.ndarray,
                             scores: np.ndarray, L: float) -> float:
    """Fixed-path optimum of the static sequential model by direct scan: keep
    the longest abort-free prefix whose every position fits the budget."""
    total = float(sum(scores[v] for v in path))
    abort = len(path)
    length = 0.0
    prev = 0
    for k, v in enumerate(path, start=1):
        length += d_u[prev, v]
        if length + dbar[v, 0] > L:
            abort = k - 1
            break
        prev = v
    lost = float(sum(scores[v] for v in path[abort:]))
    return total - lost


def _fix_path_arcs(m: MilpModel, inst: Instance, path: Path) -> MilpModel:
    """Pin every routing variable to the given path via equality constraints."""
    n = inst.n_nodes
    cycle = {(0, path[0])}
    cycle.update((path[k - 1], path[k]) for k in range(1, len(path)))
    cycle.add((path[-1], 0))
    extra = tuple(
        Constraint(f"fix_{i}_{j}", ((f"x_{i}_{j}", 1.0),), "=",
                   1.0 if (i, j) in cycle else 0.0)
        for i in range(n) for j in range(n) if i != j)
    return MilpModel(m.variables, m.constraints + extra, m.objective, m.metadata)


def verify_equivalences(inst: Instance, w: WeightModel, theta_grid=(0.0, 0.25, 0.5, 0.75, 1.0),
                        size_cap: int = 8, milp_paths: int = 2,
                        relaxation_paths: int = 1) -> VerificationReport:
    """Check the model equivalences by exhaustive path enumeration.

    Per theta: the optima of both two-stage evaluations and both static models
    (each computed by an independent fixed-path oracle) must coincide exactly;
    at theta 0 they must also match the deterministic optimum.  A few sampled
    paths additionally cross-check the recourse MILPs against the algorithms
    and the relaxed static sequential model against the integral value.
    """
    if inst.n_nodes > size_cap:
        raise ValueError(f"instance has {inst.n_nodes} nodes, cap is {size_cap}")
    scores = inst.scores()
    L = inst.length_limit
    checks: list[CheckResult] = []
    paths = _feasible_paths(inst, w.dbar - w.dhat)
    dop_paths = _feasible_paths(inst, w.dbar)
    dop_opt = max((float(sum(scores[v] for v in p)) for p in dop_paths), default=0.0)

    for theta in theta_grid:
        u = BoxUncertainty(w, theta)
        d_u = worst_case_weights(u).d
        best = {"two-stage-seq": 0.0, "two-stage-conc": 0.0,
                "static-seq": 0.0, "static-conc": 0.0}
        arg = {k: () for k in best}
        for p in paths:
            total = float(sum(scores[v] for v in p))
            values = {
                "two-stage-seq": total + float(sequential_recourse(p, d_u, w.dbar, scores, L).objective),
                "two-stage-conc": total + float(concurrent_recourse(p, d_u, w.dbar, scores, L).objective),
                "static-seq": _static_sequential_value(p, d_u, w.dbar, scores, L),
                "static-conc": total + float(brute_force_cut(p, d_u, w.dbar, scores, L).objective),
            }
            for key, value in values.items():
                if value > best[key]:
                    best[key], arg[key] = value, p

        spread = max(best.values()) - min(best.values())
        witness = "" if spread == 0 else " vs ".join(
            f"{k}={best[k]!r}@{arg[k]}" for k in best)
        checks.append(CheckResult("four-model equivalence", theta, spread == 0.0,
                                  spread, witness))
        if theta == 0.0:
            gap = float(abs(best["two-stage-seq"] - dop_opt))
            checks.append(CheckResult("deterministic anchor", theta, gap == 0.0, gap))

        sample = [p for p in paths if len(p) <= 4][:milp_paths]
        for p in sample:
            seq = float(sequential_recourse(p, d_u, w.dbar, scores, L).objective)
            conc = float(concurrent_recourse(p, d_u, w.dbar, scores, L).objective)
            m_seq, _ = enumerate_milp(build_recourse_sequential(
                inst, p, worst_case_weights(u), w.dbar))
            m_conc, _ = enumerate_milp(build_recourse_concurrent(
                inst, p, worst_case_weights(u), w.dbar))
            gap = abs(m_seq - seq)
            checks.append(CheckResult("recourse MILP sequential", theta,
                                      gap == 0.0, gap, f"path={p}"))
            gap = abs(m_conc - conc)
            checks.append(CheckResult("recourse MILP concurrent", theta,
                                      gap == 0.0, gap, f"path={p}"))

        for p in itertools.islice(paths, relaxation_paths):
            model = build_static_sequential(inst, w, theta)
            relaxed = _fix_path_arcs(relax_integrality(model), inst, p)
            value, _ = enumerate_milp(relaxed, max_binaries=len(p) + inst.n_nodes)
            integral = _static_sequential_value(p, d_u, w.dbar, scores, L)
            gap = abs(value - integral)
            checks.append(CheckResult("relaxation equivalence", theta,
                                      gap <= LP_TOL, gap, f"path={p}"))
    return VerificationReport(tuple(checks))
