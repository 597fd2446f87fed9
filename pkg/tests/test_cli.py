"""CLI subcommands: exit codes, outputs, embedded provenance, determinism."""

import json
import os

import pytest

from edgeoff.cli import main

SMOKE = {
    "algorithm": "wm-ppo",
    "seed": 0,
    "iterations": 3,
    "hidden": [16, 16],
    "env": {"K": 2, "T": 10, "seed": 0},
    "ppo": {"epochs": 2, "minibatch_size": 16, "actor_lr": 3e-4, "critic_lr": 3e-4},
    "wm_n_h": 8,
    "wm_n_z": 4,
    "wm_hidden": 16,
}


@pytest.fixture
def smoke_config(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(SMOKE))
    return str(path)


def test_train_writes_metric_rows(smoke_config, tmp_path):
    out = tmp_path / "run"
    assert main(["train", "--config", smoke_config, "--out", str(out)]) == 0
    lines = (out / "metrics.jsonl").read_text().strip().splitlines()
    assert len(lines) == 3
    for line in lines:
        row = json.loads(line)
        assert "config_hash" in row and "seed" in row


def test_train_seed_reproduces_bit_exactly(smoke_config, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["train", "--config", smoke_config, "--out", str(out1)]) == 0
    assert main(["train", "--config", smoke_config, "--out", str(out2)]) == 0
    assert (out1 / "metrics.jsonl").read_bytes() == (out2 / "metrics.jsonl").read_bytes()
    assert (out1 / "summary.csv").read_bytes() == (out2 / "summary.csv").read_bytes()


def test_train_resume_continues_iteration_numbering(smoke_config, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["train", "--config", smoke_config, "--out", str(out1)]) == 0
    assert main(["train", "--config", smoke_config, "--out", str(out2),
                 "--resume", str(out1 / "checkpoint.npz")]) == 0
    first = json.loads((out2 / "metrics.jsonl").read_text().splitlines()[0])
    assert first["iteration"] == 3


def test_evaluate_checkpoint_and_baseline(smoke_config, tmp_path):
    out = tmp_path / "run"
    main(["train", "--config", smoke_config, "--out", str(out)])
    ev = tmp_path / "eval.json"
    assert main(["evaluate", "--config", smoke_config, "--checkpoint",
                 str(out / "checkpoint.npz"), "--episodes", "2",
                 "--out", str(ev)]) == 0
    data = json.loads(ev.read_text())
    assert data["policy"] == "wm-ppo"
    assert "config_hash" in data and "seed" in data

    bl = tmp_path / "bl.json"
    assert main(["evaluate", "--config", smoke_config, "--baseline", "offload",
                 "--episodes", "2", "--out", str(bl)]) == 0
    assert json.loads(bl.read_text())["mean_alpha"] == 1.0


def test_evaluate_requires_checkpoint_or_baseline(smoke_config, tmp_path, capsys):
    assert main(["evaluate", "--config", smoke_config,
                 "--out", str(tmp_path / "x.json")]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ValueError"
    assert err["subcommand"] == "evaluate"


def test_compare_table(smoke_config, tmp_path):
    out = tmp_path / "cmp.csv"
    assert main(["compare", "--config", smoke_config, "--episodes", "2",
                 "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    header = lines[0].split(",")
    assert "mean_latency" in header and "config_hash" in header
    policies = [line.split(",")[0] for line in lines[1:]]
    assert policies == ["wm-ppo", "ppo", "always-local", "always-offload"]
    rows = {line.split(",")[0]: dict(zip(header, line.split(","))) for line in lines[1:]}
    assert float(rows["always-offload"]["mean_a_tilde"]) >= float(
        rows["always-local"]["mean_a_tilde"])


def test_compare_deterministic(smoke_config, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["compare", "--config", smoke_config, "--episodes", "2", "--out", str(a)])
    main(["compare", "--config", smoke_config, "--episodes", "2", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_env_check(tmp_path):
    out = tmp_path / "env.json"
    assert main(["env-check", "--seed", "3", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["ok"] is True
    assert all(payload["checks"].values())
    trace = tmp_path / "env_trace.csv"
    assert trace.exists()
    assert "config_hash" in trace.read_text().splitlines()[0]


def test_compress(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"teacher_epochs": 40, "distill_epochs": 40}))
    out = tmp_path / "report.json"
    assert main(["compress", "--config", str(cfg), "--seed", "0",
                 "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    for key in ("accuracy", "hallucination", "accessibility", "energy"):
        assert key in report
    assert report["seed"] == 0 and "config_hash" in report


def test_profile_catalog(tmp_path, capsys):
    out = tmp_path / "catalog.json"
    assert main(["profile-catalog", "--out", str(out)]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert "ecld" in printed and "original" in printed
    saved = json.loads(out.read_text())
    assert "config_hash" in saved


def test_bad_config_gives_machine_readable_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"algorithm": "nope"}))
    assert main(["train", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ValueError"
