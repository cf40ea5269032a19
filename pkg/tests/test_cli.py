import json

import pytest

from treepg.cli import main
from treepg.config import ConfigError, RunConfig


def run(*argv):
    return main(list(argv))


def test_train_writes_checkpoints(tmp_path):
    out = tmp_path / "run"
    assert run("train", "--game", "connect4", "--games", "2", "--iterations", "50", "--seed", "7",
               "--out", str(out), "-q") == 0
    assert sorted(p.name for p in out.glob("*.ckpt")) == ["1.ckpt", "2.ckpt"]
    assert (out / "train_log.csv").exists()
    resolved = RunConfig.load(out / "config.resolved")
    assert resolved["train.iterations"] == 50 and resolved["seed"] == 7 and resolved["train.checkpoints"] == (1, 2)


def test_train_is_reproducible(tmp_path):
    for name in ("a", "b"):
        assert run("train", "--game", "connect4", "--games", "2", "--iterations", "50", "--seed", "7",
                   "--out", str(tmp_path / name), "-q") == 0
    for ck in ("1.ckpt", "2.ckpt"):
        assert (tmp_path / "a" / ck).read_bytes() == (tmp_path / "b" / ck).read_bytes()


def test_missing_game(tmp_path, capsys):
    assert run("train", "--games", "2", "--out", str(tmp_path), "-q") == 1
    assert "game" in capsys.readouterr().err


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# desk run\ngame = tictactoe\ntrain.games = 3\ntrain.iterations = 20\nseed = 4\n")
    out = tmp_path / "out"
    assert run("train", "--config", str(cfg), "--games", "1", "--out", str(out), "-q") == 0
    assert [p.name for p in out.glob("*.ckpt")] == ["1.ckpt"]
    assert RunConfig.load(out / "config.resolved")["seed"] == 4


def test_config_diagnostics(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("game = connect4\n\ntrain.gmaes = 3\n")
    assert run("train", "--config", str(bad), "-q") == 1
    assert "bad.cfg:3" in capsys.readouterr().err
    with pytest.raises(ConfigError, match="<config>:1"):
        RunConfig.parse("train.games = lots")
    with pytest.raises(ConfigError, match="line 1"):
        RunConfig.parse("seed = 1\nseed = 2")
    with pytest.raises(ConfigError):
        RunConfig.parse("just words")
    with pytest.raises(ConfigError):
        RunConfig.parse("game = chess")
    assert run("train", "--config", str(tmp_path / "missing.cfg"), "-q") == 1


def test_defaults_are_published_protocol():
    cfg = RunConfig.parse("game = connect4")
    tc = cfg.train_config()
    assert (tc.games, tc.mcts_iterations, tc.exploration, tc.batch_size, tc.buffer_capacity) == (200, 1600, 2.5, 30, 400)
    assert (tc.learning_rate, tc.rms_decay, tc.momentum, tc.epsilon) == (0.005, 0.9, 0.9, 1e-8)
    assert tc.checkpoints == (1, 25, 50, 100, 200) and tc.move_cap == 150 and tc.playout_cap == 200
    assert RunConfig.parse("train.games = 60").checkpoints() == (1, 25, 50, 60)


def test_usage_errors(capsys):
    assert run("bogus") == 1
    assert run("train", "--games", "x") == 1


def test_evaluate_smoke(tmp_path):
    out = tmp_path / "ev"
    assert run("evaluate", "--game", "tictactoe", "--agent-a", "uct", "--agent-b", "uct", "--iterations", "100",
               "--games", "4", "--out", str(out), "-q") == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["total_games"] == 4 and 0 <= summary["win_percentage_a"] <= 100
    assert (out / "match.csv").exists() and (out / "records.jsonl").exists()


def test_evaluate_repetitions_and_analyze(tmp_path, capsys):
    runs = []
    for seed in (1, 2):
        d = tmp_path / f"r{seed}"
        assert run("train", "--game", "tictactoe", "--games", "2", "--iterations", "20", "--seed", str(seed),
                   "--out", str(d), "-q") == 0
        runs.append(str(d))
    ev = tmp_path / "ev"
    assert run("evaluate", "--checkpoint", *runs, "--agent-a", "biased", "--agent-b", "uct", "--iterations", "30",
               "--games", "3", "--observe", "ce,tspg", "--out", str(ev), "-q") == 0
    summary = json.loads((ev / "summary.json").read_text())
    assert summary["repetitions"] == 2 and summary["total_games"] == 6 and summary["ci_over"] == "repetitions"
    lo, hi = summary["ci"]
    assert lo <= hi
    an = tmp_path / "an"
    assert run("analyze", "--records", str(ev), "--checkpoint", runs[0], "--bins", "5", "--out", str(an), "-q") == 0
    rows = (an / "entropy.csv").read_text().splitlines()[1:]
    vals = [float(r.split(",")[2]) for r in rows if r.split(",")[4] != "0"]
    assert vals and all(0.0 <= v <= 1.0 for v in vals)
    labels = {r.split(",")[0] for r in rows}
    assert labels == {"biased", "uct", "pi_ce", "pi_tspg"}
    from treepg.checkpoint import Checkpoint, find_checkpoint
    n = len(Checkpoint.load(find_checkpoint(runs[0])).base)
    assert len((an / "weights.csv").read_text().splitlines()) == 1 + 2 * n


def test_evaluate_errors(tmp_path, capsys):
    assert run("evaluate", "--game", "tictactoe", "--agent-a", "uct", "--agent-b", "uct", "--games", "0",
               "--out", str(tmp_path), "-q") == 1
    assert run("evaluate", "--checkpoint", str(tmp_path / "none.ckpt"), "--out", str(tmp_path), "-q") == 2
    assert run("evaluate", "--game", "tictactoe", "--agent-a", "raw:ce", "--agent-b", "uct",
               "--out", str(tmp_path), "-q") == 1
    assert run("evaluate", "--game", "tictactoe", "--agent-a", "minimax", "--agent-b", "uct",
               "--out", str(tmp_path), "-q") == 1


def test_analyze_errors(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert run("analyze", "--records", str(empty), "--out", str(tmp_path / "an"), "-q") == 2
    assert "no match records" in capsys.readouterr().err
    assert run("analyze", "--out", str(tmp_path / "an"), "-q") == 1
    junk = tmp_path / "junk.ckpt"
    junk.write_text("not a checkpoint\n")
    assert run("analyze", "--checkpoint", str(junk), "--out", str(tmp_path / "an"), "-q") == 2
