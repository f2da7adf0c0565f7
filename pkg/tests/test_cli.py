import json
import subprocess
import sys

import pytest

from su2lat.cli import ConfigError, RunConfig, load_config, run


def call(argv, capsys):
    code = run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    return [ln.split(",") for ln in text.splitlines() if not ln.startswith("#")]


def test_selftest(capsys):
    code, out, _ = call(["selftest"], capsys)
    assert code == 0
    assert "false" not in out


def test_rotate_beta0(capsys):
    code, out, _ = call(["rotate", "--ell", "3", "--n", "64", "--beta", "0"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["report"]["fidelity"] - 1) <= 1e-12
    assert doc["config"]["ell"] == 3 and "PCG64" in doc["rng"]


def test_shear_check(capsys):
    code, out, _ = call(["shear-check", "--n", "64"], capsys)
    rows = csv_rows(out)
    assert code == 0
    assert rows[0] == ["theta", "n", "max_disp", "mean_disp", "bijective"]
    assert len(rows) == 26 and all(r[-1] == "true" for r in rows[1:])


def test_unknown_flag(capsys):
    code, _, err = call(["rotate", "--bogus", "1"], capsys)
    assert code == 1 and "bogus" in err


def test_unknown_subcommand(capsys):
    assert call(["spin"], capsys)[0] == 1


def test_empty_file_gives_defaults(tmp_path):
    f = tmp_path / "empty.cfg"
    f.write_text("")
    cfg = load_config(f, "rotate")
    assert cfg == RunConfig(subcommand="rotate")


def test_n48_names_field(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("n = 48\n")
    with pytest.raises(ConfigError) as info:
        load_config(f, "rotate")
    assert any(e.startswith("n:") for e in info.value.errors)


def test_flag_overrides_file(tmp_path, capsys):
    f = tmp_path / "run.cfg"
    f.write_text("n = 32\nell = 2\n")
    code, out, _ = call(["rotate", "--config", str(f), "--n", "64", "--beta", "0"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["config"]["n"] == 64 and doc["config"]["ell"] == 2


def test_sections(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("[common]\nn = 32\n[rotate]\nell = 5\n[kicked-top]\nj = 2\n")
    cfg = load_config(f, "rotate")
    assert (cfg.n, cfg.ell, cfg.j) == (32, 5, 4)
    assert load_config(f, "kicked-top").j == 2


def test_parse_error_line(tmp_path):
    f = tmp_path / "broken.cfg"
    f.write_text("# comment\nn = 32\nthis line is wrong\n")
    with pytest.raises(ConfigError) as info:
        load_config(f, "rotate")
    assert "line 3" in info.value.errors[0]


def test_all_errors_listed(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("n = 48\nmode = fast\nsamples = 0\nell = x\nfoo = 1\n")
    with pytest.raises(ConfigError) as info:
        load_config(f, "fidelity-sweep")
    names = {e.split(":")[0] for e in info.value.errors}
    assert {"n", "mode", "samples", "ell", "foo"} <= names


def test_kicked_top_backend_check():
    with pytest.raises(ConfigError):
        load_config(None, "kicked-top", {"backend": "shear"})


def test_byte_identical_and_header(tmp_path, capsys):
    argv = ["fidelity-sweep", "--ell", "2", "--ns", "16,32", "--betas", "0.5", "--samples", "3", "--seed", "7"]
    code, first, _ = call(argv, capsys)
    _, second, _ = call(argv, capsys)
    assert code == 0 and first == second
    header = first.splitlines()[0]
    assert header.startswith("# config: ")
    assert json.loads(header[len("# config: "):])["seed"] == 7
    assert len(csv_rows(first)) == 3


def test_threads_do_not_change_output(monkeypatch, capsys):
    argv = ["qpe-check", "--ell", "2", "--n", "32"]
    _, serial, _ = call(argv, capsys)
    monkeypatch.setenv("SU2LAT_THREADS", "4")
    _, threaded, _ = call(argv, capsys)
    assert serial == threaded


def test_output_file(tmp_path, capsys):
    out = tmp_path / "hh.csv"
    code, stdout, err = call(["hyper-hadamard", "--N", "3", "--output", str(out)], capsys)
    assert code == 0 and stdout == ""
    assert "N=3" in err
    assert len(csv_rows(out.read_text())) == 5


def test_kicked_top_csv(capsys):
    code, out, _ = call(["kicked-top", "--j", "4", "--steps", "2", "--backend", "lattice", "--n", "64"], capsys)
    rows = csv_rows(out)
    assert code == 0
    assert rows[0] == ["step", "fidelity", "jz_exact", "jz_lattice", "leakage"]
    assert len(rows) == 4


def test_numerical_failure_exit_2(capsys):
    argv = ["rotate", "--ell", "2", "--n", "8", "--r0", "2.5", "--width", "1.5", "--beta", "0.9", "--mode", "circuit"]
    code, _, err = call(argv, capsys)
    assert code == 2 and "leakage" in err


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "su2lat.cli", "selftest"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "selftest" in res.stderr
