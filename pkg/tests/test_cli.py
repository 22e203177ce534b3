import json
import shutil
import subprocess

import pytest

from frl_audit import cli, harness

from helpers import micro_config


@pytest.fixture
def config_file(tmp_path):
    doc = micro_config(tmp_path / "runs").to_dict()
    path = tmp_path / "micro.json"
    path.write_text(json.dumps(doc))
    return path


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_pipeline_verbs(config_file, tmp_path, capsys):
    for verb in cli.PIPELINE_VERBS:
        assert run(verb, "--config", config_file) == 0, verb
    out = capsys.readouterr().out
    tradeoff = tmp_path / "runs" / "micro" / "debias" / "toy" / "tradeoff.csv"
    assert str(tradeoff) in out
    assert len(tradeoff.read_text().splitlines()) == 3
    assert (tmp_path / "runs" / "micro" / "debias" / "toy" / "miner.csv").exists()


def test_overrides_and_out(config_file, tmp_path):
    assert run("prepare", "--config", config_file, "--out", tmp_path / "o", "r=1") == 0
    splits = list((tmp_path / "o" / "micro" / "raw" / "toy").glob("fold_*/split.json"))
    assert len(splits) == 1


def test_env_output(config_file, tmp_path, monkeypatch):
    monkeypatch.setenv("EVALFRL_OUT", str(tmp_path / "env"))
    assert run("prepare", "--config", config_file) == 0
    assert (tmp_path / "env" / "micro" / "dataset.json").exists()
    # --out still wins over the environment
    assert run("prepare", "--config", config_file, "--out", tmp_path / "flag") == 0
    assert (tmp_path / "flag" / "micro" / "dataset.json").exists()


@pytest.mark.parametrize("argv", [
    [],
    ["dance"],
    ["prepare"],
    ["prepare", "--config", "missing.json"],
])
def test_usage_errors(argv, capsys):
    assert run(*argv) == 1
    assert capsys.readouterr().err


def test_invalid_config_exits_one(config_file, capsys):
    assert run("prepare", "--config", config_file, "r=0") == 1
    assert "invalid config: r:" in capsys.readouterr().err
    assert run("prepare", "--config", config_file, "colour=red") == 1
    config_file.write_text("[1, 2]")
    assert run("prepare", "--config", config_file) == 1


def test_runtime_failure_exits_two(config_file, tmp_path, capsys):
    assert run("prepare", "--config", config_file) == 0
    # sweeping before tuning leaves every cell without a tuned spec
    assert run("sweep", "--config", config_file) == 2
    manifest = json.loads((tmp_path / "runs" / "micro" / "failures.json").read_text())
    assert {e["stage"] for e in manifest} == {"sweep"} and len(manifest) == 2
    assert "tune first" in capsys.readouterr().err


def test_crash_is_recorded(config_file, tmp_path, monkeypatch):
    def boom(config):
        raise RuntimeError("disk on fire")
    monkeypatch.setattr(harness, "report", boom)
    assert run("report", "--config", config_file) == 2
    manifest = json.loads((tmp_path / "runs" / "micro" / "failures.json").read_text())
    assert manifest == [{"stage": "report", "model": None, "fold": None, "gamma": None,
                         "error": "RuntimeError: disk on fire"}]


def test_verify_theorem1(tmp_path, capsys):
    out = tmp_path / "t1.json"
    assert run("verify-theorem1", "--seed", 3, "--bits", 1, 2, "--json", out) == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed == json.loads(out.read_text())
    assert printed["all_equal"] and set(printed["layers"][0]["quantized"]) == {"1", "2"}
    assert run("verify-theorem1", "--activation", "relu") == 0
    assert json.loads(capsys.readouterr().out)["injective"] is False


def test_selftest(capsys):
    assert run("selftest", "--metric-instances", 20, "--grad-configs", 2) == 0
    lines = capsys.readouterr().out.splitlines()
    assert sum(line.startswith("PASS") for line in lines) == 14
    assert not any(line.startswith("FAIL") for line in lines)


def test_help_exits_zero(capsys):
    assert run("--help") == 0
    assert "verify-theorem1" in capsys.readouterr().out


@pytest.mark.skipif(shutil.which("frl-audit") is None, reason="console script not installed")
def test_console_script(tmp_path):
    proc = subprocess.run(["frl-audit", "verify-theorem1", "--n", "200"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["n"] == 200
    proc = subprocess.run(["frl-audit", "report"], capture_output=True, text=True)
    assert proc.returncode == 1
