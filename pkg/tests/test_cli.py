import json

import pytest

from opsw.cli import main

TOY = """\
0.0 0.0 0
0.0 0.0 0
10.0 0.0 10
3.0 0.0 5
"""


@pytest.fixture
def toy_file(tmp_path):
    f = tmp_path / "toy.txt"
    f.write_text(TOY)
    return str(f)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_solve_prints_record_and_seed(toy_file, capsys):
    code, out, _ = run(capsys, "solve", "--instance", toy_file, "--L", "20",
                       "--model", "dop")
    assert code == 0
    assert "seed=42" in out
    assert "kind=dop" in out and "path=0-1-2-0" in out and "optimal=true" in out


def test_solve_missing_instance_exits_1(capsys):
    code, _, err = run(capsys, "solve", "--instance", "/no/such/file",
                       "--L", "20", "--model", "dop")
    assert code == 1
    assert "error:" in err


def test_usage_error_exits_2(toy_file):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--instance", toy_file, "--L", "20",
              "--model", "imaginary"])
    assert exc.value.code == 2


def test_missing_length_budget_for_text_instance(toy_file, capsys):
    code, _, err = run(capsys, "solve", "--instance", toy_file, "--model", "dop")
    assert code == 1
    assert "--L" in err


def test_simulate_with_explicit_path(toy_file, capsys):
    code, out, _ = run(capsys, "simulate", "--instance", toy_file, "--L", "20",
                       "--alpha", "0.2", "--path", "0-1-2-0",
                       "--scenarios", "50")
    assert code == 0
    assert "policy=sequential" in out and "policy=concurrent" in out


def test_simulate_rejects_bad_path(toy_file, capsys):
    code, _, err = run(capsys, "simulate", "--instance", toy_file, "--L", "20",
                       "--path", "0-1-1-0")
    assert code == 1
    assert "repeats" in err


def test_export_lp_filename_and_idempotence(toy_file, tmp_path, capsys):
    out_dir = str(tmp_path / "lp")
    argv = ("export-lp", "--instance", toy_file, "--L", "20", "--alpha", "0.2",
            "--model", "one-stage", "--theta", "0.3", "--out", out_dir)
    code, out, _ = run(capsys, *argv)
    assert code == 0
    target = tmp_path / "lp" / "one-stage_theta0.30_alpha0.20_L20.lp"
    assert target.exists()
    first = target.read_text()
    assert run(capsys, *argv)[0] == 0
    assert target.read_text() == first


def test_table_writes_deterministic_csv(toy_file, tmp_path, capsys):
    out_dir = tmp_path / "tab"
    argv = ("table", "--instance", toy_file, "--L", "20", "--alpha", "0.2",
            "--scenarios", "40", "--theta-grid", "0,0.5,1", "--out", str(out_dir))
    assert run(capsys, *argv)[0] == 0
    first = (out_dir / "table.csv").read_bytes()
    long_first = (out_dir / "table_long.csv").read_bytes()
    assert run(capsys, *argv)[0] == 0
    assert (out_dir / "table.csv").read_bytes() == first
    assert (out_dir / "table_long.csv").read_bytes() == long_first
    header = first.decode().splitlines()[0]
    assert header.startswith("theta,one_stage_obj")


def test_import_solution_then_table(toy_file, tmp_path, capsys):
    out_dir = tmp_path / "run"
    sol = tmp_path / "sol.txt"
    sol.write_text("0 2\n2 1\n1 0\n")
    code, out, _ = run(capsys, "import-solution", "--instance", toy_file,
                       "--L", "20", "--alpha", "0.2", "--model", "one-stage",
                       "--theta", "0.0", "--solution", str(sol),
                       "--out", str(out_dir))
    assert code == 0
    assert "path=0-2-1-0" in out
    stored = json.loads((out_dir / "solutions.json").read_text())
    assert stored[0]["path"] == [2, 1]
    code, _, _ = run(capsys, "table", "--instance", toy_file, "--L", "20",
                     "--alpha", "0.2", "--scenarios", "20",
                     "--theta-grid", "0", "--out", str(out_dir))
    assert code == 0
    row = (out_dir / "table.csv").read_text().splitlines()[1]
    assert row.startswith("0.00,15.00")  # imported path collects both scores


def test_import_rejects_broken_arc_sets(toy_file, tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n2 0\n")  # path breaks at node 1
    code, _, err = run(capsys, "import-solution", "--instance", toy_file,
                       "--L", "20", "--model", "one-stage", "--theta", "0.0",
                       "--solution", str(bad), "--out", str(tmp_path / "o"))
    assert code == 1
    assert "node 1" in err


def test_verify_exit_status(toy_file, capsys):
    code, out, _ = run(capsys, "verify", "--instance", toy_file, "--L", "20",
                       "--alpha", "0.2", "--theta-grid", "0,1")
    assert code == 0
    assert "all checks passed" in out


def test_config_file_defaults_with_flag_override(toy_file, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"L": 20.0, "alpha": 0.2, "model": "dop"}))
    code, out, _ = run(capsys, "--config", str(cfg), "solve",
                       "--instance", toy_file)
    assert code == 0
    assert "kind=dop" in out
    # flag wins over the config value
    code, out, _ = run(capsys, "--config", str(cfg), "solve",
                       "--instance", toy_file, "--model", "one-stage")
    assert code == 0
    assert "kind=one-stage" in out
