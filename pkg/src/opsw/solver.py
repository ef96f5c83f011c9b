"""Exact desk-scale solving.

Two engines, kept deliberately independent of each other:

* :func:`branch_and_bound` — depth-first search over depot-rooted simple
  paths, evaluating each model kind's objective directly through the recourse
  algorithms (the two-stage/static kinds price the worst case at the box
  maximum, justified by recourse monotonicity in the weights).
* :func:`enumerate_milp` — an exhaustive 0/1 enumerator for tiny linear
  models, with interval presolve and a residual LP for leftover continuous
  variables.  It serves as the oracle for the recourse models and tiny static
  models.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import Instance, WeightModel
from .milp import BINARY, MilpModel, ModelKind
from .recourse import Path, concurrent_recourse, sequential_recourse
from .uncertainty import BoxUncertainty, worst_case_weights


class FeasibilityError(ValueError):
    """A path violates its model kind's first-stage constraint."""


class CapacityError(ValueError):
    """Too many free binary variables for exhaustive enumeration."""


class InfeasibleModelError(ValueError):
    """The model admits no feasible assignment."""


@dataclass(frozen=True)
class RobustSolution:
    path: tuple[int, ...]
    model_kind: ModelKind
    theta: float
    objective: float
    optimal: bool
    nodes_explored: int

    def to_record(self) -> str:
        path_s = "-".join(["0", *map(str, self.path), "0"])
        return (f"kind={self.model_kind.value} theta={self.theta:.2f} "
                f"objective={self.objective!r} optimal={str(self.optimal).lower()} "
                f"path={path_s} explored={self.nodes_explored}")


_EVAL_KINDS = {
    ModelKind.DOP, ModelKind.ONE_STAGE_RO,
    ModelKind.TWO_STAGE_SEQUENTIAL, ModelKind.TWO_STAGE_CONCURRENT,
    ModelKind.STATIC_SEQUENTIAL, ModelKind.STATIC_CONCURRENT,
}


def first_stage_weights(kind: ModelKind, w: WeightModel, theta: float) -> np.ndarray:
    """Matrix the first-stage length constraint is checked against."""
    if kind is ModelKind.DOP:
        return w.dbar
    if kind is ModelKind.ONE_STAGE_RO:
        return w.dbar + theta * w.dhat
    # Two-stage and static kinds bound the path in the most optimistic case.
    return w.dbar - w.dhat


def _cycle_length(path: Path, weights: np.ndarray) -> float:
    length = 0.0
    prev = 0
    for v in path:
        length += weights[prev, v]
        prev = v
    return length + weights[prev, 0] if path else 0.0


def evaluate_objective(path: Path, kind: ModelKind, inst: Instance,
                       u: BoxUncertainty) -> float:
    """Objective of a fixed first-stage path under the given model kind.

    For the two-stage/static kinds, the worst case over the box is attained at
    ``dbar + theta * dhat`` because both recourse losses are nondecreasing in
    the realized weights; the recourse value there is computed by the checking
    algorithms.
    """
    if kind not in _EVAL_KINDS:
        raise ValueError(f"cannot evaluate fixed-path objective for kind {kind}")
    w, theta = u.model, u.theta
    first_stage = first_stage_weights(kind, w, theta)
    if _cycle_length(path, first_stage) > inst.length_limit:
        if kind in (ModelKind.DOP, ModelKind.ONE_STAGE_RO):
            raise FeasibilityError(f"path violates the {kind.value} length constraint")
        raise FeasibilityError("path violates the optimistic first-stage length constraint")

    scores = inst.scores()
    total = float(sum(scores[v] for v in path))
    if kind in (ModelKind.DOP, ModelKind.ONE_STAGE_RO):
        return total
    d_u = worst_case_weights(u).d
    if kind in (ModelKind.TWO_STAGE_SEQUENTIAL, ModelKind.STATIC_SEQUENTIAL):
        out = sequential_recourse(path, d_u, w.dbar, scores, inst.length_limit)
    else:
        out = concurrent_recourse(path, d_u, w.dbar, scores, inst.length_limit)
    return total + out.objective


class _SearchLimit(Exception):
    pass


def branch_and_bound(inst: Instance, u: BoxUncertainty, kind: ModelKind,
                     limit_nodes: int = 10_000_000) -> RobustSolution:
    """Depth-first search over simple paths rooted at the depot.

    Extensions violating the kind's first-stage length constraint are pruned
    (valid when the first-stage matrix satisfies the triangle inequality, as
    Euclidean-with-proportional-deviation instances do).  The bound is the
    current path score plus all unvisited scores, admissible because scores
    and recourse losses are nonnegative.  Ties in the objective resolve to the
    lexicographically smallest node sequence.
    """
    w, theta = u.model, u.theta
    n = inst.n_nodes
    scores = inst.scores()
    first_stage = first_stage_weights(kind, w, theta)
    total_unvisited = float(scores.sum())

    best_obj = 0.0  # empty path: stay at the depot
    best_path: tuple[int, ...] = ()
    explored = 0
    # Fixed child order: descending score, then ascending id.
    child_order = sorted(range(1, n), key=lambda v: (-scores[v], v))

    def visit(path: list[int], walk: float, score: float, unvisited: float) -> None:
        nonlocal best_obj, best_path, explored
        explored += 1
        if explored > limit_nodes:
            raise _SearchLimit
        if path:
            obj = evaluate_objective(path, kind, inst, u)
            tup = tuple(path)
            if obj > best_obj or (obj == best_obj and tup < best_path):
                best_obj, best_path = obj, tup
        if score + unvisited < best_obj:
            return  # no descendant can beat the incumbent
        last = path[-1] if path else 0
        for v in child_order:
            if v in path:
                continue
            new_walk = walk + first_stage[last, v]
            if new_walk + first_stage[v, 0] > inst.length_limit:
                continue
            path.append(v)
            visit(path, new_walk, score + scores[v], unvisited - scores[v])
            path.pop()

    optimal = True
    try:
        visit([], 0.0, 0.0, total_unvisited)
    except _SearchLimit:
        optimal = False
    return RobustSolution(best_path, kind, theta, best_obj, optimal, explored)


# --- exhaustive 0/1 enumeration -------------------------------------------

_FIX_TOL = 1e-9


class _Infeasible(Exception):
    pass


def _normalized(m: MilpModel):
    """Constraints as <= rows over variable indices; '=' becomes two rows."""
    index = {v.name: k for k, v in enumerate(m.variables)}
    rows = []
    for c in m.constraints:
        idx = np.array([index[name] for name, _ in c.terms], dtype=int)
        coef = np.array([coeff for _, coeff in c.terms], dtype=float)
        if c.sense in ("<=", "="):
            rows.append((idx, coef, c.rhs))
        if c.sense in (">=", "="):
            rows.append((idx, -coef, -c.rhs))
    return rows


def _propagate(rows, lb, ub, is_bin) -> None:
    """Interval presolve: tighten bounds, fix forced binaries, detect
    infeasibility.  Mutates lb/ub in place; raises on an empty domain."""
    changed = True
    while changed:
        changed = False
        for idx, coef, rhs in rows:
            lo_terms = np.where(coef >= 0, coef * lb[idx], coef * ub[idx])
            min_act = lo_terms.sum()
            if min_act > rhs + _FIX_TOL:
                raise _Infeasible
            for pos in range(idx.size):
                j = idx[pos]
                a = coef[pos]
                if a == 0.0 or lb[j] == ub[j]:
                    continue
                slack = rhs - (min_act - lo_terms[pos])
                if a > 0:
                    new_ub = slack / a
                    if new_ub < ub[j] - _FIX_TOL:
                        ub[j] = 1.0 if (is_bin[j] and new_ub >= 1.0 - _FIX_TOL) else new_ub
                        if is_bin[j] and ub[j] < 1.0 - _FIX_TOL:
                            ub[j] = 0.0
                        if ub[j] < lb[j] - _FIX_TOL:
                            raise _Infeasible
                        changed = True
                else:
                    new_lb = slack / a
                    if new_lb > lb[j] + _FIX_TOL:
                        lb[j] = 0.0 if (is_bin[j] and new_lb <= _FIX_TOL) else new_lb
                        if is_bin[j] and lb[j] > _FIX_TOL:
                            lb[j] = 1.0
                        if lb[j] > ub[j] + _FIX_TOL:
                            raise _Infeasible
                        changed = True


def _active_rows(rows, lb, ub):
    """Drop rows already satisfied for every point in the current box."""
    active = []
    for idx, coef, rhs in rows:
        max_act = np.where(coef >= 0, coef * ub[idx], coef * lb[idx]).sum()
        if max_act > rhs + _FIX_TOL:
            active.append((idx, coef, rhs))
    return active


def _dual_fix(rows, lb, ub, obj, free_mask) -> None:
    """Fix free variables that no remaining constraint touches to their
    objective-preferred bound."""
    touched = set()
    for idx, _, _ in rows:
        touched.update(int(j) for j in idx)
    for j in np.nonzero(free_mask)[0]:
        if j not in touched:
            if obj[j] > 0:
                lb[j] = ub[j]
            else:
                ub[j] = lb[j]


def _exact_check(m: MilpModel, values: dict[str, float]) -> bool:
    for c in m.constraints:
        lhs = 0.0
        for name, coeff in c.terms:
            lhs += coeff * values[name]
        if c.sense == "<=" and not lhs <= c.rhs:
            return False
        if c.sense == ">=" and not lhs >= c.rhs:
            return False
        if c.sense == "=" and lhs != c.rhs:
            return False
    return True


def _solve_continuous(m: MilpModel, lb, ub, is_bin, obj):
    """Residual LP over unfixed continuous variables with binaries fixed."""
    from scipy.optimize import linprog

    free = np.nonzero((lb != ub) & ~is_bin)[0]
    pos = {int(j): k for k, j in enumerate(free)}
    a_ub, b_ub = [], []
    for c in m.constraints:
        row = np.zeros(free.size)
        const = 0.0
        for name, coeff in c.terms:
            j = _var_index(m, name)
            if j in pos:
                row[pos[j]] = coeff
            else:
                const += coeff * lb[j]
        if c.sense in ("<=", "="):
            a_ub.append(row)
            b_ub.append(c.rhs - const)
        if c.sense in (">=", "="):
            a_ub.append(-row)
            b_ub.append(-(c.rhs - const))
    cost = np.zeros(free.size)
    for k, j in enumerate(free):
        cost[k] = -obj[j]  # linprog minimizes
    res = linprog(cost, A_ub=np.array(a_ub), b_ub=np.array(b_ub),
                  bounds=[(lb[j], ub[j]) for j in free], method="highs")
    if not res.success:
        return None
    return float(-res.fun), {int(j): float(res.x[k]) for k, j in enumerate(free)}


def _var_index(m: MilpModel, name: str) -> int:
    cache = getattr(m, "_var_index_cache", None)
    if cache is None:
        cache = {v.name: k for k, v in enumerate(m.variables)}
        object.__setattr__(m, "_var_index_cache", cache)
    return cache[name]


def enumerate_milp(m: MilpModel, max_binaries: int = 24) -> tuple[float, dict[str, float]]:
    """Exhaustive binary enumeration with presolve and pruning.

    Capacity is measured on the binaries still free after root presolve.
    Returns the best objective and one attaining assignment; raises
    :class:`InfeasibleModelError` when nothing is feasible and
    :class:`CapacityError` when the search space is too large.
    """
    nvars = len(m.variables)
    if nvars == 0:
        return 0.0, {}
    lb = np.array([v.lb for v in m.variables])
    ub = np.array([v.ub for v in m.variables])
    is_bin = np.array([v.kind == BINARY for v in m.variables])
    obj = np.zeros(nvars)
    for name, coeff in m.objective:
        obj[_var_index(m, name)] += coeff
    rows = _normalized(m)

    try:
        _propagate(rows, lb, ub, is_bin)
    except _Infeasible:
        raise InfeasibleModelError("model is infeasible") from None
    free_bin = np.nonzero(is_bin & (lb != ub))[0]
    if free_bin.size > max_binaries:
        raise CapacityError(
            f"{free_bin.size} free binary variables exceed the cap of {max_binaries}")

    best: list = [-np.inf, None]

    def bound(lb, ub) -> float:
        return float(np.where(obj >= 0, obj * ub, obj * lb).sum())

    def leaf(lb, ub) -> None:
        has_free_cont = bool(np.any((lb != ub) & ~is_bin))
        if not has_free_cont:
            values = {v.name: float(lb[k]) for k, v in enumerate(m.variables)}
            if _exact_check(m, values):
                total = float(sum(obj[k] * lb[k] for k in range(nvars)))
                if total > best[0]:
                    best[0], best[1] = total, values
            return
        fixed_obj = float(sum(obj[k] * lb[k] for k in range(nvars) if lb[k] == ub[k]))
        lp = _solve_continuous(m, lb, ub, is_bin, obj)
        if lp is None:
            return
        cont_obj, cont_vals = lp
        total = fixed_obj + cont_obj
        if total > best[0]:
            values = {v.name: float(cont_vals.get(k, lb[k])) for k, v in enumerate(m.variables)}
            best[0], best[1] = total, values

    def dive(lb, ub, active) -> None:
        if best[1] is not None and bound(lb, ub) <= best[0]:
            return
        undecided = np.nonzero(is_bin & (lb != ub))[0]
        if undecided.size == 0:
            leaf(lb, ub)
            return
        j = int(undecided[0])
        for value in (0.0, 1.0):
            lb2, ub2 = lb.copy(), ub.copy()
            lb2[j] = ub2[j] = value
            try:
                _propagate(active, lb2, ub2, is_bin)
            except _Infeasible:
                continue
            remaining = _active_rows(active, lb2, ub2)
            _dual_fix(remaining, lb2, ub2, obj, (lb2 != ub2))
            dive(lb2, ub2, remaining)

    active = _active_rows(rows, lb, ub)
    _dual_fix(active, lb, ub, obj, (lb != ub))
    dive(lb, ub, active)
    if best[1] is None:
        raise InfeasibleModelError("model is infeasible")
    return best[0], best[1]
