import csv

import pytest

from itersparse.cli import loglog_slope, main
from itersparse.fileio import read_instance
from itersparse.generate import is_nondegenerate


@pytest.fixture(autouse=True)
def out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("ITERSPARSE_OUT", str(tmp_path))
    return tmp_path


def gen(tmp_path, *args):
    path = tmp_path / "inst.json"
    assert main(["gen", *args, "--out", str(path)]) == 0
    return path


def test_gen_is_byte_identical(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for p in (a, b):
        assert main(["gen", "--kind", "mixed", "--n", "1000", "--d", "3", "--seed", "7", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_nondegenerate(tmp_path):
    path = gen(tmp_path, "--kind", "feasible-nondegenerate", "--n", "500", "--d", "2", "--seed", "1")
    assert is_nondegenerate(read_instance(path))


@pytest.mark.parametrize("argv", [
    ["gen", "--kind", "mixed", "--n", "0", "--d", "2"],
    ["gen", "--kind", "bogus", "--n", "10", "--d", "2"],
    ["solve", "--algorithm", "clarkson", "--in", "/nonexistent.json"],
])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as exc:
        if main(argv) != 0:
            raise SystemExit(2)
    assert exc.value.code == 2


def test_solve_clarkson_reports_optimal(tmp_path, capsys):
    path = gen(tmp_path, "--kind", "feasible-nondegenerate", "--n", "200", "--d", "2", "--seed", "3")
    assert main(["solve", "--algorithm", "clarkson", "--in", str(path), "--seed", "3"]) == 0
    assert "status=Optimal" in capsys.readouterr().out
    rows = list(csv.DictReader(open(tmp_path / "itersparse_report.csv")))
    assert rows[0]["status"] == "Optimal" and int(rows[0]["row_reads"]) > 0


def test_solve_qclarkson_infeasible(tmp_path, capsys):
    path = gen(tmp_path, "--kind", "infeasible", "--n", "50", "--d", "2")
    assert main(["solve", "--algorithm", "qclarkson", "--in", str(path)]) == 0
    assert "status=Infeasible" in capsys.readouterr().out


def test_solve_without_eps_is_usage_error(tmp_path):
    path = gen(tmp_path, "--kind", "feasible-nondegenerate", "--n", "50", "--d", "2")
    assert main(["solve", "--algorithm", "lowprec", "--in", str(path)]) == 2


def test_algorithm_kind_mismatch(tmp_path):
    path = gen(tmp_path, "--kind", "feasible-nondegenerate", "--n", "50", "--d", "2")
    assert main(["solve", "--algorithm", "mpc", "--eps", "0.2", "--in", str(path)]) == 2


def test_sweep_single_n_and_determinism(tmp_path, capsys):
    argv = ["sweep", "--algorithm", "qclarkson", "--d", "2", "--n", "200", "--trials", "2", "--seed", "1"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert "slope=n/a" in first
    assert main(argv) == 0
    second = capsys.readouterr().out

    def table(text):
        # wall time is the only nondeterministic column
        return [line.rsplit(",", 1)[0] for line in text.splitlines()]

    assert table(first) == table(second)


def test_sweep_parallel_matches_serial(tmp_path, capsys):
    argv = ["sweep", "--algorithm", "clarkson", "--d", "2", "--n", "100,300", "--seed", "2"]
    main(argv)
    serial = capsys.readouterr().out
    main(argv + ["--parallel", "2"])
    parallel = capsys.readouterr().out
    strip = lambda t: [line.rsplit(",", 1)[0] for line in t.splitlines()]
    assert strip(serial) == strip(parallel)


def test_loglog_slope():
    assert loglog_slope([10, 100], [3, 30]) == pytest.approx(1.0)
    assert loglog_slope([10, 10], [3, 30]) is None
