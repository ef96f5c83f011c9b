import numpy as np
import pytest

from opsw import (BoxUncertainty, CapacityError, Constraint, FeasibilityError,
                  InfeasibleModelError, MilpModel, ModelKind, Variable,
                  branch_and_bound, build_dop, build_recourse_concurrent,
                  build_recourse_sequential, concurrent_recourse,
                  enumerate_milp, evaluate_objective, sequential_recourse,
                  worst_case_weights)
from opsw.milp import BINARY, CONTINUOUS
from conftest import random_instance


# --- evaluate_objective ----------------------------------------------------

def test_zero_theta_zero_deviation_gives_plain_score(toy):
    inst, w = toy
    u = BoxUncertainty(w, 0.0)
    for kind in (ModelKind.DOP, ModelKind.ONE_STAGE_RO,
                 ModelKind.TWO_STAGE_SEQUENTIAL, ModelKind.TWO_STAGE_CONCURRENT):
        assert evaluate_objective((1, 2), kind, inst, u) == 15.0


def test_hand_trace_both_policies_lose_everything(toy_dev):
    # at the box maximum the first arc costs 12; 12 + 10 > 20 aborts forward
    # checking at the depot, and no backward cut fits either
    inst, w = toy_dev
    u = BoxUncertainty(w, 1.0)
    assert evaluate_objective((1, 2), ModelKind.TWO_STAGE_SEQUENTIAL, inst, u) == 0.0
    assert evaluate_objective((1, 2), ModelKind.TWO_STAGE_CONCURRENT, inst, u) == 0.0


def test_infeasible_path_raises(toy):
    inst, w = toy
    u = BoxUncertainty(w, 0.0)
    tight = type(inst)(inst.nodes, 15.0)  # round trip to v1 costs 20
    with pytest.raises(FeasibilityError, match="length"):
        evaluate_objective((1,), ModelKind.DOP, tight, u)


def test_recourse_kinds_rejected(toy):
    inst, w = toy
    with pytest.raises(ValueError):
        evaluate_objective((1,), ModelKind.RECOURSE_SEQUENTIAL, inst,
                           BoxUncertainty(w, 0.0))


def test_min_over_box_attained_at_extreme_point():
    rng = np.random.default_rng(21)
    inst, w = random_instance(rng, 6, 22.0, alpha=0.3)
    scores = inst.scores()
    path = (1, 2, 3)
    for theta in (0.25, 0.75):
        u = BoxUncertainty(w, theta)
        d_u = worst_case_weights(u).d
        base_seq = sequential_recourse(path, d_u, w.dbar, scores, inst.length_limit)
        base_conc = concurrent_recourse(path, d_u, w.dbar, scores, inst.length_limit)
        for k in range(200):
            shift = (2.0 * rng.random(w.dbar.shape) - 1.0) * theta * w.dhat
            d = np.triu(w.dbar + shift, k=1)
            d = d + d.T
            seq = sequential_recourse(path, d, w.dbar, scores, inst.length_limit)
            conc = concurrent_recourse(path, d, w.dbar, scores, inst.length_limit)
            assert seq.objective >= base_seq.objective
            assert conc.objective >= base_conc.objective


# --- branch and bound ------------------------------------------------------

def test_toy_matches_analytic(toy):
    # cycles 0-1-2-0 and 0-2-1-0 both cost exactly 20 and collect everything;
    # the lexicographic tie-break picks the former
    inst, w = toy
    sol = branch_and_bound(inst, BoxUncertainty(w, 0.0), ModelKind.DOP)
    assert sol.objective == 15.0
    assert sol.path == (1, 2)
    assert sol.optimal


def test_budget_too_small_yields_empty_path(toy):
    inst, w = toy
    tiny = type(inst)(inst.nodes, 5.0)
    sol = branch_and_bound(tiny, BoxUncertainty(w, 0.0), ModelKind.DOP)
    assert sol.path == () and sol.objective == 0.0 and sol.optimal


def test_matches_exhaustive_enumeration():
    rng = np.random.default_rng(2)
    for trial in range(5):
        inst, w = random_instance(rng, 7, 24.0, alpha=0.2)
        for kind in (ModelKind.ONE_STAGE_RO, ModelKind.TWO_STAGE_SEQUENTIAL,
                     ModelKind.TWO_STAGE_CONCURRENT):
            u = BoxUncertainty(w, 0.6)
            sol = branch_and_bound(inst, u, kind)
            assert sol.optimal
            best = _exhaustive(inst, w, u, kind)
            assert sol.objective == best
            assert evaluate_objective(sol.path, kind, inst, u) == sol.objective


def _exhaustive(inst, w, u, kind):
    import itertools
    from opsw.solver import first_stage_weights, _cycle_length
    n = inst.n_nodes
    best = 0.0
    fs = first_stage_weights(kind, w, u.theta)
    for r in range(1, n):
        for perm in itertools.permutations(range(1, n), r):
            if _cycle_length(perm, fs) <= inst.length_limit:
                best = max(best, evaluate_objective(perm, kind, inst, u))
    return best


def test_objective_nonincreasing_in_theta():
    rng = np.random.default_rng(13)
    inst, w = random_instance(rng, 7, 26.0, alpha=0.25)
    prev = None
    for k in range(11):
        sol = branch_and_bound(inst, BoxUncertainty(w, round(0.1 * k, 1)),
                               ModelKind.ONE_STAGE_RO)
        if prev is not None:
            assert sol.objective <= prev
        prev = sol.objective


def test_two_stage_dominates_one_stage():
    rng = np.random.default_rng(17)
    for trial in range(3):
        inst, w = random_instance(rng, 7, 22.0, alpha=0.3)
        for theta in (0.2, 0.6, 1.0):
            u = BoxUncertainty(w, theta)
            one = branch_and_bound(inst, u, ModelKind.ONE_STAGE_RO)
            two = branch_and_bound(inst, u, ModelKind.TWO_STAGE_CONCURRENT)
            assert two.objective >= one.objective


def test_node_limit_reports_non_optimal():
    rng = np.random.default_rng(23)
    inst, w = random_instance(rng, 9, 60.0, alpha=0.1)
    sol = branch_and_bound(inst, BoxUncertainty(w, 0.0), ModelKind.DOP,
                           limit_nodes=10)
    assert not sol.optimal
    assert sol.nodes_explored >= 10


def test_solution_record_format(toy):
    inst, w = toy
    sol = branch_and_bound(inst, BoxUncertainty(w, 0.0), ModelKind.DOP)
    record = sol.to_record()
    assert "kind=dop" in record
    assert "theta=0.00" in record
    assert "optimal=true" in record
    assert "path=0-1-2-0" in record


def test_deterministic_node_counts(toy):
    inst, w = toy
    a = branch_and_bound(inst, BoxUncertainty(w, 0.0), ModelKind.DOP)
    b = branch_and_bound(inst, BoxUncertainty(w, 0.0), ModelKind.DOP)
    assert a == b


# --- enumerate_milp --------------------------------------------------------

def test_enumerate_matches_recourse_algorithms():
    rng = np.random.default_rng(31)
    for trial in range(20):
        inst, w = random_instance(rng, 6, 25.0, alpha=0.3)
        scores = inst.scores()
        k = int(rng.integers(1, 5))
        path = tuple(rng.permutation(np.arange(1, 6))[:k])
        u = BoxUncertainty(w, float(rng.uniform(0, 1)))
        s = worst_case_weights(u)
        seq = sequential_recourse(path, s.d, w.dbar, scores, inst.length_limit)
        conc = concurrent_recourse(path, s.d, w.dbar, scores, inst.length_limit)
        obj_seq, _ = enumerate_milp(build_recourse_sequential(inst, path, s, w.dbar))
        obj_conc, _ = enumerate_milp(build_recourse_concurrent(inst, path, s, w.dbar))
        assert obj_seq == seq.objective
        assert obj_conc == conc.objective


def test_enumerate_solves_tiny_dop(toy):
    # both orientations of the full cycle are optimal at 15
    inst, w = toy
    obj, assignment = enumerate_milp(build_dop(inst, w))
    assert obj == 15.0
    chosen = {name for name, v in assignment.items()
              if name.startswith("x_") and v == 1.0}
    assert chosen in ({"x_0_1", "x_1_2", "x_2_0"}, {"x_0_2", "x_2_1", "x_1_0"})


def test_enumerate_detects_infeasible():
    x = Variable("x", BINARY)
    m = MilpModel((x,), (Constraint("lo", (("x", 1.0),), ">=", 1.0),
                         Constraint("hi", (("x", 1.0),), "<=", 0.0)), (("x", 1.0),))
    with pytest.raises(InfeasibleModelError):
        enumerate_milp(m)


def test_enumerate_capacity_guard():
    variables = tuple(Variable(f"b_{i}", BINARY) for i in range(30))
    # one joint constraint keeps presolve from fixing anything
    c = Constraint("cap", tuple((f"b_{i}", 1.0) for i in range(30)), "<=", 15.0)
    m = MilpModel(variables, (c,), tuple((f"b_{i}", 1.0) for i in range(30)))
    with pytest.raises(CapacityError):
        enumerate_milp(m, max_binaries=24)


def test_enumerate_handles_continuous_leftovers():
    # maximize x + 2t subject to t <= 0.5 + x, t in [0, 2]
    x = Variable("x", BINARY)
    t = Variable("t", CONTINUOUS, 0.0, 2.0)
    m = MilpModel((x, t),
                  (Constraint("link", (("t", 1.0), ("x", -1.0)), "<=", 0.5),),
                  (("x", 1.0), ("t", 2.0)))
    obj, assignment = enumerate_milp(m)
    assert obj == pytest.approx(4.0)
    assert assignment["x"] == 1.0
    assert assignment["t"] == pytest.approx(1.5)
