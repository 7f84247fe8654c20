import contextlib
import hashlib
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

import dualsched as ds
from dualsched.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run_cli(*argv):
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = main(list(argv))
    return code, out.getvalue()


def write_config(tmp_path, name="cfg.json", **overrides):
    base = {
        "nodes": [1, 2, 3],
        "links": [[1, 2, 1.0], [2, 3, 0.5]],
        "flows": [[1, 3, "log1p", 1.0]],
        "K": 1,
    }
    base.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(base))
    return path


def test_shipped_configs_load():
    for name, links, k in (("line7_descending.json", 6, 2),
                           ("line7_peak.json", 6, 2),
                           ("single_link.json", 1, 1)):
        cfg = ds.load_config(CONFIGS / name)
        assert len(cfg.net.links) == links
        assert cfg.k == k
        assert cfg.prices is not None and len(cfg.prices) == links
        assert cfg.solver.iterations == 20000
        assert cfg.solver.delta == 0.01
        assert cfg.solver.mode == "dgrd"
        assert cfg.sha256 == hashlib.sha256((CONFIGS / name).read_bytes()).hexdigest()


def test_config_validation_messages(tmp_path):
    with pytest.raises(ds.ConfigError, match="not found"):
        ds.load_config(tmp_path / "absent.json")

    bad = tmp_path / "bad.json"
    bad.write_text('{"nodes": [1, 2,}')
    with pytest.raises(ds.ConfigError, match="line 1"):
        ds.load_config(bad)

    with pytest.raises(ds.ConfigError, match="unknown fields"):
        ds.load_config(write_config(tmp_path, extra=1))
    with pytest.raises(ds.ConfigError, match="missing required field"):
        path = tmp_path / "nok.json"
        path.write_text('{"nodes": [1, 2], "links": []}')
        ds.load_config(path)
    with pytest.raises(ds.ConfigError, match="integer"):
        ds.load_config(write_config(tmp_path, nodes=[1, "a", 3]))
    with pytest.raises(ds.ConfigError, match="links\\[0\\]"):
        ds.load_config(write_config(tmp_path, links=[[1, 2]]))
    with pytest.raises(ds.ConfigError, match="utility kind"):
        ds.load_config(write_config(tmp_path, flows=[[1, 3, "cubic", 1.0]]))
    with pytest.raises(ds.ConfigError, match="K must be"):
        ds.load_config(write_config(tmp_path, K=0))
    with pytest.raises(ds.ConfigError, match="expected 2 prices"):
        ds.load_config(write_config(tmp_path, prices=[1.0]))
    with pytest.raises(ds.ConfigError, match="nonnegative"):
        ds.load_config(write_config(tmp_path, prices=[1.0, -1.0]))
    with pytest.raises(ds.ConfigError, match="unknown solver fields"):
        ds.load_config(write_config(tmp_path, solver={"stepsize": 0.1}))
    with pytest.raises(ds.ConfigError, match="mode"):
        ds.load_config(write_config(tmp_path, solver={"mode": "newton"}))
    with pytest.raises(ds.ConfigError, match="alpha"):
        ds.load_config(write_config(tmp_path, links=[[1, 2, 2.0], [2, 3, 1.0]]))
    with pytest.raises(ds.ConfigError, match="C must be"):
        ds.load_config(write_config(tmp_path, C=-1))
    with pytest.raises(ds.ConfigError, match="initial"):
        ds.load_config(write_config(tmp_path, solver={"initial_prices": [0.1]}))


def test_display_capacity_is_loaded(tmp_path):
    cfg = ds.load_config(write_config(tmp_path, C=25.0))
    assert cfg.display_capacity == 25.0
    assert ds.load_config(write_config(tmp_path)).display_capacity is None


def _short_solve_config(tmp_path, iterations=400):
    cfg = json.loads((CONFIGS / "line7_descending.json").read_text())
    cfg["solver"]["iterations"] = iterations
    path = tmp_path / "short.json"
    path.write_text(json.dumps(cfg))
    return path


def test_solve_writes_all_artifacts(tmp_path):
    cfg = _short_solve_config(tmp_path)
    out = tmp_path / "run"
    code, text = run_cli("solve", "--config", str(cfg), "--out", str(out))
    assert code == 0
    for name in ("trajectory.csv", "band_report.txt", "bracket_report.txt",
                 "dual_trajectory.png", "prices.png", "manifest.json"):
        assert (out / name).is_file(), name
    assert "inside: True" in text
    assert "bracket" in text
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "solve"
    assert manifest["tool"] == "dualsched"
    assert manifest["version"] == ds.__version__
    assert manifest["config_sha256"] == hashlib.sha256(cfg.read_bytes()).hexdigest()
    assert manifest["outputs"] == sorted(manifest["outputs"])
    assert "timestamp" not in json.dumps(manifest)
    band = (out / "band_report.txt").read_text()
    assert "inside band" in band and "True" in band


def test_solve_no_figures(tmp_path):
    cfg = _short_solve_config(tmp_path, iterations=30)
    out = tmp_path / "bare"
    code, _ = run_cli("solve", "--config", str(cfg), "--out", str(out), "--no-figures")
    assert code == 0
    assert not (out / "dual_trajectory.png").exists()
    assert not (out / "prices.png").exists()
    assert (out / "trajectory.csv").is_file()


def test_solve_reruns_are_byte_identical(tmp_path):
    cfg = _short_solve_config(tmp_path, iterations=50)
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli("solve", "--config", str(cfg), "--out", str(a), "--no-figures")[0] == 0
    assert run_cli("solve", "--config", str(cfg), "--out", str(b), "--no-figures")[0] == 0
    assert (a / "trajectory.csv").read_bytes() == (b / "trajectory.csv").read_bytes()
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()
    assert (a / "band_report.txt").read_bytes() == (b / "band_report.txt").read_bytes()


def test_solve_mode_override_changes_the_run(tmp_path):
    cfg = _short_solve_config(tmp_path, iterations=40)
    out = tmp_path / "opt"
    code, text = run_cli("solve", "--config", str(cfg), "--out", str(out),
                         "--mode", "opt", "--no-figures")
    assert code == 0
    assert "mode: opt" in text


def test_trace_command_matches_golden_table(tmp_path):
    out = tmp_path / "t"
    code, text = run_cli("trace", "--config", str(CONFIGS / "line7_peak.json"),
                         "--out", str(out), "--format", "table")
    assert code == 0
    assert "schedule: (1,2) (4,5)  weight: 11.0" in text
    assert "rounds: 2" in text
    rendered = (out / "trace.txt").read_text()
    assert rendered.splitlines()[1].split() == ["0", "O", "O", "O", "O", "O", "O"]
    assert rendered.splitlines()[2].split() == ["T_L^1", "O", "CH", "CH", "M", "CH", "CH"]
    csv_text = (out / "trace.csv").read_text()
    assert csv_text.splitlines()[0] == 'T,"(1,2)","(2,3)","(3,4)","(4,5)","(5,6)","(6,7)"'
    assert csv_text.splitlines()[-1] == "T_M^2,M,CL,CL,M,CL,CL"


def test_trace_requires_prices(tmp_path):
    path = write_config(tmp_path)  # no prices field
    code, _ = run_cli("trace", "--config", str(path), "--out", str(tmp_path / "x"))
    assert code == 1


def test_schedule_command_modes(tmp_path):
    for mode, weight in (("dgrd", "11.0"), ("grd", "11.0"), ("opt", "11.0")):
        out = tmp_path / f"s_{mode}"
        code, text = run_cli("schedule", "--config", str(CONFIGS / "line7_peak.json"),
                             "--out", str(out), "--mode", mode)
        assert code == 0
        assert f"weight: {weight}" in text
        assert (out / "schedule.csv").read_text().splitlines()[0] == \
            "link_id,link,alpha,price,weight"


def test_enumerate_command(tmp_path):
    out = tmp_path / "e"
    code, text = run_cli("enumerate", "--config", str(CONFIGS / "line7_descending.json"),
                         "--out", str(out))
    assert code == 0
    assert "6 maximal valid K-matchings (K=2)" in text
    lines = (out / "maximal_sets.csv").read_text().splitlines()
    assert lines[0] == "set_index,size,link_ids,links,weight"
    assert len(lines) == 7
    assert lines[1].startswith("0,2,0 3,")


def test_degree_command(tmp_path):
    out = tmp_path / "d"
    code, text = run_cli("degree", "--config", str(CONFIGS / "line7_descending.json"),
                         "--out", str(out))
    assert code == 0
    assert "graph interference degree: 2 (K=2)" in text
    lines = (out / "degree.csv").read_text().splitlines()
    assert lines[1] == '0,"(1,2)",3,1'
    assert lines[3] == '2,"(3,4)",5,2'


def test_verify_command_passes_and_writes_report(tmp_path):
    out = tmp_path / "v"
    code, text = run_cli("verify", "--trials", "8", "--seed", "5", "--out", str(out))
    assert code == 0
    assert "all 10 checks passed" in text
    report = (out / "verification.txt").read_text()
    assert report.count("PASS") == 10
    assert "FAIL" not in report


def test_verify_negative_control_fails_with_exit_2(tmp_path):
    out = tmp_path / "vc"
    code, text = run_cli("verify", "--trials", "10", "--seed", "5",
                         "--corrupt-tiebreak", "--out", str(out))
    assert code == 2
    assert "FAIL distributed schedule equals centralized greedy" in text


def test_verify_on_fixed_network(tmp_path):
    out = tmp_path / "vf"
    code, text = run_cli("verify", "--config", str(CONFIGS / "line7_descending.json"),
                         "--trials", "6", "--out", str(out))
    assert code == 0
    assert "all 10 checks passed" in text


def test_missing_config_and_bad_flags_exit_1(tmp_path):
    assert run_cli("solve", "--config", str(tmp_path / "nope.json"))[0] == 1
    err = io.StringIO()
    with contextlib.redirect_stderr(err):
        assert run_cli("trace", "--config", str(CONFIGS / "line7_peak.json"),
                       "--badflag")[0] == 1
    assert run_cli("schedule", "--config",
                   str(write_config(tmp_path)), "--out", str(tmp_path / "s"))[0] == 1


def test_console_script_reports_version():
    proc = subprocess.run(["dualsched", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert ds.__version__ in proc.stdout


def test_python_api_reexports_resolve():
    assert ds.MODES == ("dgrd", "grd", "opt")
    assert ds.UTILITY_KINDS == ("log1p", "quadratic")
    for name in ds.__all__:
        assert getattr(ds, name) is not None
