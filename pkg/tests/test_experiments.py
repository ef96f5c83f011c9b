import numpy as np
import pytest

from opsw import (SolverConfig, TableRow, emit_csv, emit_csv_long,
                  parse_csv, run_table, simulate, verify_equivalences)
from opsw.experiments import CONCURRENT, SEQUENTIAL
from conftest import random_instance


def test_zero_deviation_simulation_is_flat(toy):
    inst, w = toy
    s = simulate((1, 2), inst, w, 50, 42, SEQUENTIAL)
    assert s.mean == 15.0
    assert s.std == 0.0
    assert s.n_scenarios == 50


def test_concurrent_mean_dominates_sequential():
    rng = np.random.default_rng(41)
    for trial in range(5):
        inst, w = random_instance(rng, 6, 20.0, alpha=0.4)
        path = (1, 2, 3)
        seq = simulate(path, inst, w, 300, 42, SEQUENTIAL, keep_objectives=True)
        conc = simulate(path, inst, w, 300, 42, CONCURRENT, keep_objectives=True)
        for a, b in zip(conc.per_scenario_objectives, seq.per_scenario_objectives):
            assert a >= b
        assert conc.mean >= seq.mean


def test_mean_never_exceeds_path_score():
    rng = np.random.default_rng(43)
    inst, w = random_instance(rng, 6, 18.0, alpha=0.4)
    total = float(sum(inst.scores()[v] for v in (1, 2)))
    s = simulate((1, 2), inst, w, 200, 42, SEQUENTIAL)
    assert s.mean <= total


def test_simulate_rejects_bad_inputs(toy):
    inst, w = toy
    with pytest.raises(ValueError):
        simulate((1,), inst, w, 0, 42, SEQUENTIAL)
    with pytest.raises(ValueError):
        simulate((1,), inst, w, 10, 42, "sideways")


def test_population_vs_sample_std():
    rng = np.random.default_rng(47)
    inst, w = random_instance(rng, 5, 16.0, alpha=0.4)
    pop = simulate((1, 2), inst, w, 100, 42, SEQUENTIAL)
    samp = simulate((1, 2), inst, w, 100, 42, SEQUENTIAL, sample_std=True)
    if pop.std > 0:
        assert samp.std > pop.std
        assert samp.std == pytest.approx(pop.std * np.sqrt(100 / 99))


def test_run_table_structure_and_invariants():
    rng = np.random.default_rng(53)
    inst, w = random_instance(rng, 7, 22.0, alpha=0.2)
    rows = run_table(inst, w, (0.0, 0.5, 1.0), n_scenarios=100, base_seed=42)
    assert [r.theta for r in rows] == [0.0, 0.5, 1.0]
    prev = None
    for r in rows:
        assert r.two_stage[0] >= r.one_stage[0]  # dominance in Obj
        assert r.one_stage[3] >= r.one_stage[1]  # conc mean >= seq mean
        assert r.two_stage[3] >= r.two_stage[1]
        if prev is not None:
            assert r.one_stage[0] <= prev
        prev = r.one_stage[0]


def test_run_table_uses_imported_solutions(toy):
    inst, w = toy
    config = SolverConfig(imported={("one-stage", 0.0): (2, 1),
                                    ("static-conc", 0.0): (2, 1)})
    rows = run_table(inst, w, (0.0,), n_scenarios=10, config=config)
    assert rows[0].one_stage[0] == 15.0
    assert rows[0].one_stage_optimal and rows[0].two_stage_optimal


def test_csv_round_trip_and_format():
    rows = [TableRow(0.0, (710.0, 697.3, 11.25, 703.1, 8.5),
                     (710.0, 697.3, 11.25, 703.1, 8.5)),
            TableRow(0.1, (690.0, 689.9, 0.45, 690.0, 0.0),
                     (700.0, 695.0, 1.0, 696.0, 0.5), False, True)]
    text = emit_csv(rows)
    lines = text.splitlines()
    assert lines[0].startswith("theta,one_stage_obj,one_stage_seq_mean")
    assert lines[1].startswith("0.00,710.00,697.30,11.25,703.10,8.50,")
    assert lines[2].endswith("false,true")
    back = parse_csv(text)
    assert emit_csv(back) == text
    assert not back[1].one_stage_optimal


def test_csv_empty_rows_yields_header_only():
    text = emit_csv([])
    assert text.count("\n") == 1
    assert parse_csv(text) == []


def test_long_csv_layout():
    rows = [TableRow(0.5, (10.0, 9.0, 0.5, 9.5, 0.25), (11.0, 10.0, 0.5, 10.5, 0.25))]
    text = emit_csv_long(rows)
    assert text.splitlines()[0] == "theta,model,policy,stat,value"
    assert "0.5,one-stage,sequential,mean,9.0" in text
    assert "0.5,two-stage,concurrent,std,0.25" in text


def test_determinism_byte_identical():
    rng = np.random.default_rng(59)
    inst, w = random_instance(rng, 6, 20.0, alpha=0.3)
    a = emit_csv(run_table(inst, w, (0.0, 0.5), n_scenarios=50))
    b = emit_csv(run_table(inst, w, (0.0, 0.5), n_scenarios=50))
    assert a == b


def test_verify_passes_on_random_suite():
    rng = np.random.default_rng(61)
    for trial in range(5):
        inst, w = random_instance(rng, 6, 18.0, alpha=0.3)
        report = verify_equivalences(inst, w)
        assert report.ok, report.to_text()
        assert report.max_discrepancy == 0.0


def test_verify_rejects_oversized_instance():
    rng = np.random.default_rng(67)
    inst, w = random_instance(rng, 9, 18.0)
    with pytest.raises(ValueError):
        verify_equivalences(inst, w, size_cap=8)


def test_verify_report_text_mentions_each_check(toy_dev):
    inst, w = toy_dev
    report = verify_equivalences(inst, w, theta_grid=(0.0, 1.0))
    text = report.to_text()
    assert "four-model equivalence" in text
    assert "relaxation equivalence" in text
    assert text.strip().endswith("(max discrepancy 0.0)")
