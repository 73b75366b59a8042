import csv
import subprocess
import sys


from crowdlease.cli import main

from conftest import data_path

S0 = str(data_path("s0.json"))


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_solve_s0(tmp_path):
    assert main(["solve", S0, "--strategies", "TOP,OM", "--out", str(tmp_path)]) == 0
    report = rows(tmp_path / "report.csv")
    assert [r["strategy"] for r in report] == ["TOP", "OM"]
    om = report[1]
    assert (om["lease_cost"], om["total_cost"], om["p_global"], om["feasible"]) == ("4.00", "6.50", "0.93939", "true")
    header = (tmp_path / "report.csv").read_text().splitlines()[0]
    assert header == "slice_index,strategy,lease_cost,total_cost,p_global,latency_proxy_ms,feasible"
    placed = {(r["strategy"], r["region"]): r["site"] for r in rows(tmp_path / "assignments.csv")}
    assert placed[("OM", "A3")] == "s2"
    assert (tmp_path / "summary.csv").exists()


def test_unknown_strategy_is_a_usage_error(tmp_path, capsys):
    assert main(["solve", S0, "--strategies", "FASTEST", "--out", str(tmp_path)]) == 2
    assert "unknown strategies" in capsys.readouterr().err


def test_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["solve", S0, "--out", str(blocker / "sub")]) != 0
    assert "I/O error" in capsys.readouterr().err


def test_validate(tmp_path, capsys):
    assert main(["validate", S0]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text(open(S0).read().replace('"k": 2', '"k": 5'))
    assert main(["validate", str(bad)]) == 1
    assert "k <= m" in capsys.readouterr().out


def test_gentrace_then_simulate(tmp_path):
    trace = tmp_path / "trace.csv"
    spec = str(data_path("diurnal.json"))
    world = str(data_path("diurnal_world.json"))
    assert main(["gentrace", spec, "--seed", "7", "-o", str(trace)]) == 0
    assert trace.read_text().splitlines()[0] == "slice_index,region,stream_count,demand"
    out = tmp_path / "out"
    assert main(["simulate", world, str(trace), "--benchmark", "cds", "--out", str(out)]) == 0
    report = rows(out / "report.csv")
    assert len(report) == 48 * 5
    summary = {r["strategy"]: r for r in rows(out / "summary.csv")}
    assert set(summary) == {"TOP", "CP", "OM", "OM-online", "CDS"}

    # a generator spec can stand in for the trace file
    out2 = tmp_path / "out2"
    assert main(["simulate", world, spec, "--seed", "7", "--out", str(out2)]) == 0
    assert (out2 / "report.csv").read_bytes() == (out / "report.csv").read_bytes()


def test_simulate_unknown_region(tmp_path, capsys):
    trace = tmp_path / "t.csv"
    trace.write_text("slice_index,region,stream_count,demand\n0,ZZ,1,1\n")
    assert main(["simulate", S0, str(trace), "--out", str(tmp_path / "o")]) == 1
    assert "unknown region" in capsys.readouterr().err


def test_console_script_module_entry(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "crowdlease.cli", "validate", S0], capture_output=True, text=True
    )
    assert proc.returncode == 0 and proc.stdout.strip() == "ok"
