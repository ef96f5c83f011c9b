"""Linear model builders for the deterministic, robust, and recourse problems.

All builders emit a generic :class:`MilpModel` (named variables, linear
constraints, maximize objective) suitable for LP-file export and for the tiny
exact enumerator in :mod:`opsw.solver`.

Robust length constraints quantified over the box set are reduced at build time
to a single constraint at the elementwise maximum ``dbar + theta * dhat``.
This is sound because every uncertain coefficient multiplies a nonnegative
expression: plain ``x`` terms in the one-stage model, ``x - y`` (with
``y <= x`` enforced) in the concurrent model, and the nonnegative ``x_ijk``
terms in the sequential model, so the inner maximum over the box is attained at
the upper corner.

Arcs *into* the depot are costed at their expected weight in every realized or
worst-case length expression: the safety-stock convention places return-leg
deviations outside the budget, which keeps model optima identical to the
forward/backward checking algorithms.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .instance import Instance, WeightModel, instance_digest
from .recourse import Path
from .uncertainty import Scenario

BINARY = "binary"
CONTINUOUS = "continuous"


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str
    lb: float = 0.0
    ub: float = 1.0


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[str, float], ...]
    sense: str  # "<=", "=", ">="
    rhs: float


@dataclass(frozen=True)
class MilpModel:
    """Immutable linear model; objective sense is always maximize."""

    variables: tuple[Variable, ...]
    constraints: tuple[Constraint, ...]
    objective: tuple[tuple[str, float], ...]
    metadata: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        names = [v.name for v in self.variables]
        declared = set(names)
        if len(declared) != len(names):
            raise ValueError("duplicate variable names")
        for v in self.variables:
            if v.kind not in (BINARY, CONTINUOUS):
                raise ValueError(f"unknown variable kind {v.kind!r}")
            if v.kind == BINARY and (v.lb, v.ub) != (0.0, 1.0):
                raise ValueError(f"binary variable {v.name} must have bounds [0, 1]")
        for c in self.constraints:
            if c.sense not in ("<=", "=", ">="):
                raise ValueError(f"constraint {c.name}: bad sense {c.sense!r}")
            for name, _ in c.terms:
                if name not in declared:
                    raise ValueError(f"constraint {c.name} references undeclared {name}")
        for name, _ in self.objective:
            if name not in declared:
                raise ValueError(f"objective references undeclared {name}")

    def n_binaries(self) -> int:
        return sum(1 for v in self.variables if v.kind == BINARY)

    def meta(self, key: str) -> str | None:
        for k, v in self.metadata:
            if k == key:
                return v
        return None


class ModelKind(enum.Enum):
    DOP = "dop"
    ONE_STAGE_RO = "one-stage"
    STATIC_SEQUENTIAL = "static-seq"
    STATIC_CONCURRENT = "static-conc"
    TWO_STAGE_SEQUENTIAL = "two-stage-seq"
    TWO_STAGE_CONCURRENT = "two-stage-conc"
    RECOURSE_SEQUENTIAL = "recourse-seq"
    RECOURSE_CONCURRENT = "recourse-conc"

    @classmethod
    def from_label(cls, label: str) -> "ModelKind":
        for kind in cls:
            if kind.value == label:
                return kind
        raise ValueError(f"unknown model kind {label!r}")


ROBUST_KINDS = {
    ModelKind.ONE_STAGE_RO,
    ModelKind.STATIC_SEQUENTIAL,
    ModelKind.STATIC_CONCURRENT,
    ModelKind.TWO_STAGE_SEQUENTIAL,
    ModelKind.TWO_STAGE_CONCURRENT,
}


def _weights_of(w: WeightModel | Scenario) -> np.ndarray:
    return w.d if isinstance(w, Scenario) else w.dbar


def _arcs(n: int):
    return [(i, j) for i in range(n) for j in range(n) if i != j]


def _meta(inst: Instance, kind: ModelKind, **extra) -> tuple[tuple[str, str], ...]:
    items = [("kind", kind.value), ("L", repr(inst.length_limit)),
             ("nodes", str(inst.n_nodes)), ("instance", instance_digest(inst))]
    items.extend((k, str(v)) for k, v in extra.items())
    return tuple(items)


def _degenerate(inst: Instance, kind: ModelKind, **extra) -> MilpModel:
    # Depot-only instance: nothing to decide, objective 0.
    return MilpModel((), (), (), _meta(inst, kind, **extra))


def _path_structure(inst: Instance) -> tuple[list[Variable], list[Constraint]]:
    """Routing skeleton shared by every first-stage model: degree constraints at
    the depot, flow conservation with at-most-one visits, and node-position
    ordering that rules out subtours."""
    n = inst.n_nodes
    n_score = n - 1
    variables = [Variable(f"x_{i}_{j}", BINARY) for i, j in _arcs(n)]
    variables += [Variable(f"u_{i}", CONTINUOUS, 1.0, float(n_score)) for i in range(1, n)]

    constraints = [
        Constraint("depot_out", tuple((f"x_0_{j}", 1.0) for j in range(1, n)), "=", 1.0),
        Constraint("depot_in", tuple((f"x_{i}_0", 1.0) for i in range(1, n)), "=", 1.0),
    ]
    for j in range(1, n):
        inflow = tuple((f"x_{i}_{j}", 1.0) for i in range(n) if i != j)
        outflow = tuple((f"x_{j}_{i}", -1.0) for i in range(n) if i != j)
        constraints.append(Constraint(f"flow_{j}", inflow + outflow, "=", 0.0))
        constraints.append(Constraint(f"visit_{j}", inflow, "<=", 1.0))
    for i in range(1, n):
        for j in range(1, n):
            if i != j:
                constraints.append(Constraint(
                    f"mtz_{i}_{j}",
                    ((f"u_{i}", 1.0), (f"u_{j}", -1.0), (f"x_{i}_{j}", float(n_score))),
                    "<=", float(n_score - 1)))
    return variables, constraints


def _score_objective(inst: Instance) -> list[tuple[str, float]]:
    n = inst.n_nodes
    scores = inst.scores()
    terms = []
    for i in range(1, n):
        if scores[i] != 0:
            for j in range(n):
                if j != i:
                    terms.append((f"x_{i}_{j}", float(scores[i])))
    return terms


def _length_terms(weights: np.ndarray) -> tuple[tuple[str, float], ...]:
    n = weights.shape[0]
    return tuple((f"x_{i}_{j}", float(weights[i, j])) for i, j in _arcs(n))


def build_dop(inst: Instance, w: WeightModel | Scenario) -> MilpModel:
    """Deterministic model: maximize collected score subject to a single cycle
    of length at most the budget."""
    if inst.n_nodes == 1:
        return _degenerate(inst, ModelKind.DOP)
    weights = _weights_of(w)
    variables, constraints = _path_structure(inst)
    constraints.insert(0, Constraint("length", _length_terms(weights), "<=", inst.length_limit))
    return MilpModel(tuple(variables), tuple(constraints),
                     tuple(_score_objective(inst)), _meta(inst, ModelKind.DOP))


def build_one_stage_ro(inst: Instance, w: WeightModel, theta: float) -> MilpModel:
    """Deterministic model with the length constraint hardened to the box
    maximum ``dbar + theta * dhat``."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must be in [0, 1], got {theta}")
    if inst.n_nodes == 1:
        return _degenerate(inst, ModelKind.ONE_STAGE_RO, theta=theta)
    robust = w.dbar + theta * w.dhat
    variables, constraints = _path_structure(inst)
    constraints.insert(0, Constraint("length", _length_terms(robust), "<=", inst.length_limit))
    return MilpModel(tuple(variables), tuple(constraints),
                     tuple(_score_objective(inst)), _meta(inst, ModelKind.ONE_STAGE_RO, theta=theta))


def _safety_stock(weights: np.ndarray, dbar: np.ndarray) -> np.ndarray:
    """Weights with the depot column replaced by expected return weights."""
    out = weights.copy()
    out[:, 0] = dbar[:, 0]
    return out


def build_static_concurrent(inst: Instance, w: WeightModel, theta: float) -> MilpModel:
    """Static robust model with here-and-now arc cancellations.

    First stage must fit the budget in the most optimistic case (full deviation
    down); the kept arcs ``x - y`` must fit it at the box maximum, with
    cancelled subpaths replaced by an expected direct return.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must be in [0, 1], got {theta}")
    if inst.n_nodes == 1:
        return _degenerate(inst, ModelKind.STATIC_CONCURRENT, theta=theta)
    n = inst.n_nodes
    scores = inst.scores()
    robust = _safety_stock(w.dbar + theta * w.dhat, w.dbar)

    variables, constraints = _path_structure(inst)
    variables += [Variable(f"yij_{i}_{j}", BINARY) for i, j in _arcs(n)]

    constraints.append(Constraint(
        "first_stage_optimistic", _length_terms(w.dbar - w.dhat), "<=", inst.length_limit))
    for i, j in _arcs(n):
        constraints.append(Constraint(
            f"cancel_sub_{i}_{j}", ((f"yij_{i}_{j}", 1.0), (f"x_{i}_{j}", -1.0)), "<=", 0.0))
    for j in range(1, n):
        inflow = tuple((f"yij_{i}_{j}", 1.0) for i in range(n) if i != j)
        outflow = tuple((f"yij_{j}_{k}", -1.0) for k in range(n) if k != j)
        constraints.append(Constraint(f"cancel_flow_{j}", inflow + outflow, "<=", 0.0))

    # Kept-path length at the box maximum: robust*(x - y) plus an expected
    # return leg from the node where the cancelled subpath starts.
    length_terms: list[tuple[str, float]] = list(_length_terms(robust))
    for i, j in _arcs(n):
        coeff = -robust[i, j]
        if i != 0:
            coeff += w.dbar[i, 0]
        if j != 0:
            coeff -= w.dbar[j, 0]
        if coeff != 0.0:
            length_terms.append((f"yij_{i}_{j}", float(coeff)))
    constraints.append(Constraint("robust_length", tuple(length_terms), "<=", inst.length_limit))

    objective = _score_objective(inst)
    for i, j in _arcs(n):
        if j != 0 and scores[j] != 0:
            objective.append((f"yij_{i}_{j}", -float(scores[j])))
    return MilpModel(tuple(variables), tuple(constraints), tuple(objective),
                     _meta(inst, ModelKind.STATIC_CONCURRENT, theta=theta))


def _big_m(w: WeightModel) -> float:
    """Upper bound on any single-path length expression, per arc-sum bound."""
    return float(np.sum(w.dbar + w.dhat) + np.max(w.dbar[:, 0]))


def build_static_sequential(inst: Instance, w: WeightModel, theta: float,
                            relax: bool = False) -> MilpModel:
    """Static robust model with here-and-now abort positions.

    Arc-position variables replicate the path layer by layer; indicator
    variables deactivate the per-position length check once the abort point is
    passed.  With ``relax`` the arc-position and lost-node variables become
    continuous in [0, 1], which provably does not change the optimum.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must be in [0, 1], got {theta}")
    if inst.n_nodes == 1:
        return _degenerate(inst, ModelKind.STATIC_SEQUENTIAL, theta=theta, relax=relax)
    n = inst.n_nodes
    n_score = n - 1
    scores = inst.scores()
    robust = _safety_stock(w.dbar + theta * w.dhat, w.dbar)
    big_m = _big_m(w)
    soft = CONTINUOUS if relax else BINARY

    variables, constraints = _path_structure(inst)
    variables += [Variable(f"xk_{i}_{j}_{k}", soft) for i, j in _arcs(n)
                  for k in range(1, n_score + 1)]
    variables += [Variable(f"y_{i}", soft) for i in range(1, n)]
    variables += [Variable(f"z_{k}", BINARY) for k in range(1, n_score + 1)]

    constraints.append(Constraint(
        "first_stage_optimistic", _length_terms(w.dbar - w.dhat), "<=", inst.length_limit))
    # Position layer 1 holds the arc leaving the depot.
    for j in range(1, n):
        constraints.append(Constraint(
            f"order_first_{j}", ((f"xk_0_{j}_1", 1.0), (f"x_0_{j}", -1.0)), ">=", 0.0))
    # Later layers chain through whichever arc entered node i one layer before.
    for k in range(2, n_score + 1):
        for i in range(1, n):
            for j in range(1, n):
                if i == j:
                    continue
                terms = [(f"xk_{i}_{j}_{k}", 1.0), (f"x_{i}_{j}", -1.0)]
                terms += [(f"xk_{l}_{i}_{k - 1}", -1.0) for l in range(n) if l != i]
                constraints.append(Constraint(f"order_{i}_{j}_{k}", tuple(terms), ">=", -1.0))
    # Per-position length check, deactivated once the abort indicator is set.
    for K in range(1, n_score + 1):
        terms: list[tuple[str, float]] = []
        for k in range(1, K + 1):
            terms += [(f"xk_{i}_{j}_{k}", float(robust[i, j])) for i, j in _arcs(n)]
        terms += [(f"xk_{i}_{j}_{K}", float(w.dbar[j, 0])) for i, j in _arcs(n) if j != 0]
        terms.append((f"z_{K}", -big_m))
        constraints.append(Constraint(f"reach_{K}", tuple(terms), "<=", inst.length_limit))
    for k in range(2, n_score + 1):
        constraints.append(Constraint(
            f"abort_mono_{k}", ((f"z_{k - 1}", 1.0), (f"z_{k}", -1.0)), "<=", 0.0))
    for j in range(1, n):
        for k in range(1, n_score + 1):
            terms = [(f"y_{j}", 1.0), (f"z_{k}", -1.0)]
            terms += [(f"xk_{i}_{j}_{k}", -1.0) for i in range(n) if i != j]
            constraints.append(Constraint(f"lost_{j}_{k}", tuple(terms), ">=", -1.0))

    objective = _score_objective(inst)
    objective += [(f"y_{i}", -float(scores[i])) for i in range(1, n) if scores[i] != 0]
    return MilpModel(tuple(variables), tuple(constraints), tuple(objective),
                     _meta(inst, ModelKind.STATIC_SEQUENTIAL, theta=theta, relax=relax))


def _path_string(path: Path) -> str:
    return "-".join(["0", *map(str, path), "0"])


def _check_path(inst: Instance, path: Path) -> None:
    if len(path) == 0:
        raise ValueError("recourse models need a nonempty first-stage path")
    if len(set(path)) != len(path):
        raise ValueError("path repeats a node")
    for v in path:
        if not 1 <= v < inst.n_nodes:
            raise ValueError(f"path node {v} out of range (depot is implicit)")


def build_recourse_sequential(inst: Instance, path: Path, s: Scenario,
                              dbar: np.ndarray) -> MilpModel:
    """Abort-decision model for a fixed path under one weight realization,
    forward-checking semantics.

    Arc-position variables are created only for the path's own arcs (any
    optimal solution zeroes the others), keeping the model small enough for
    exhaustive enumeration.
    """
    _check_path(inst, path)
    n_path = len(path)
    scores = inst.scores()
    L = inst.length_limit
    realized = _safety_stock(s.d, dbar)
    arcs = [(0, path[0])] + [(path[m - 1], path[m]) for m in range(1, n_path)]
    arc_w = [realized[i, j] for i, j in arcs]
    returns = [dbar[v, 0] for v in path]
    big_m = float(n_path * sum(arc_w) + max(returns))

    def xk(m: int, k: int) -> str:
        i, j = arcs[m - 1]
        return f"xk_{i}_{j}_{k}"

    variables = [Variable(xk(m, k), BINARY) for m in range(1, n_path + 1)
                 for k in range(1, n_path + 1)]
    variables += [Variable(f"y_{v}", BINARY) for v in path]
    variables += [Variable(f"z_{k}", BINARY) for k in range(1, n_path + 1)]

    constraints = [Constraint("order_first", ((xk(1, 1), 1.0),), ">=", 1.0)]
    for m in range(2, n_path + 1):
        for k in range(2, n_path + 1):
            constraints.append(Constraint(
                f"order_{m}_{k}", ((xk(m, k), 1.0), (xk(m - 1, k - 1), -1.0)), ">=", 0.0))
    for K in range(1, n_path + 1):
        terms: list[tuple[str, float]] = []
        for k in range(1, K + 1):
            terms += [(xk(m, k), arc_w[m - 1]) for m in range(1, n_path + 1)]
        terms += [(xk(m, K), returns[m - 1]) for m in range(1, n_path + 1)]
        terms.append((f"z_{K}", -big_m))
        constraints.append(Constraint(f"reach_{K}", tuple(terms), "<=", L))
    for k in range(2, n_path + 1):
        constraints.append(Constraint(
            f"abort_mono_{k}", ((f"z_{k - 1}", 1.0), (f"z_{k}", -1.0)), "<=", 0.0))
    for m, v in enumerate(path, start=1):
        for k in range(1, n_path + 1):
            constraints.append(Constraint(
                f"lost_{v}_{k}",
                ((f"y_{v}", 1.0), (xk(m, k), -1.0), (f"z_{k}", -1.0)), ">=", -1.0))

    objective = tuple((f"y_{v}", -float(scores[v])) for v in path if scores[v] != 0)
    meta = _meta(inst, ModelKind.RECOURSE_SEQUENTIAL,
                 path=_path_string(path), scenario=s.seed_tag)
    return MilpModel(tuple(variables), tuple(constraints), objective, meta)


def build_recourse_concurrent(inst: Instance, path: Path, s: Scenario,
                              dbar: np.ndarray) -> MilpModel:
    """Cancel-decision model for a fixed path under one weight realization,
    backward-checking semantics.  The fixed first-stage length is folded into
    the right-hand side of the length constraint."""
    _check_path(inst, path)
    n = inst.n_nodes
    scores = inst.scores()
    L = inst.length_limit
    realized = _safety_stock(s.d, dbar)
    cycle = [(0, path[0])] + [(path[m - 1], path[m]) for m in range(1, len(path))] \
        + [(path[-1], 0)]
    on_path = set(cycle)
    cycle_length = 0.0
    for i, j in cycle:
        cycle_length += realized[i, j]

    variables = [Variable(f"yij_{i}_{j}", BINARY) for i, j in _arcs(n)]
    constraints = []
    for i, j in _arcs(n):
        x_const = 1.0 if (i, j) in on_path else 0.0
        constraints.append(Constraint(
            f"cancel_sub_{i}_{j}", ((f"yij_{i}_{j}", 1.0),), "<=", x_const))
    for j in range(1, n):
        inflow = tuple((f"yij_{i}_{j}", 1.0) for i in range(n) if i != j)
        outflow = tuple((f"yij_{j}_{k}", -1.0) for k in range(n) if k != j)
        constraints.append(Constraint(f"cancel_flow_{j}", inflow + outflow, "<=", 0.0))

    terms = []
    for i, j in _arcs(n):
        coeff = -realized[i, j]
        if i != 0:
            coeff += dbar[i, 0]
        if j != 0:
            coeff -= dbar[j, 0]
        if coeff != 0.0:
            terms.append((f"yij_{i}_{j}", float(coeff)))
    constraints.append(Constraint("length", tuple(terms), "<=", L - cycle_length))

    objective = tuple((f"yij_{i}_{j}", -float(scores[j])) for i, j in _arcs(n)
                      if j != 0 and scores[j] != 0)
    meta = _meta(inst, ModelKind.RECOURSE_CONCURRENT,
                 path=_path_string(path), scenario=s.seed_tag)
    return MilpModel(tuple(variables), tuple(constraints), objective, meta)


def relax_integrality(m: MilpModel, prefixes: tuple[str, ...] = ("xk_", "y_")) -> MilpModel:
    """Continuous [0, 1] copy of the matching binary variables (abort
    indicators stay binary), for relaxation-equivalence checks."""
    variables = tuple(
        Variable(v.name, CONTINUOUS, 0.0, 1.0)
        if v.kind == BINARY and v.name.startswith(prefixes) else v
        for v in m.variables)
    return MilpModel(variables, m.constraints, m.objective, m.metadata)
