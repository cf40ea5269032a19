"""``treepg`` command line: train, evaluate, analyze.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .analysis import (bootstrap_ci, entropy_profile, load_records, profile_labels, save_records,
                       weight_distribution_export, write_entropy_csv)
from .checkpoint import Checkpoint, CheckpointError, find_checkpoint
from .config import ConfigError, RunConfig
from .evaluation import AgentSpec, play_match, write_match_csv
from .games import make_game
from .search import SearchConfig
from .training import train

log = logging.getLogger("treepg")

EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _csv(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value run configuration file")
    common.add_argument("--game", help="tictactoe, connect4, breakthrough, hex (or hexN), yavalath")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--hex-size", type=int)
    common.add_argument("-q", "--quiet", action="store_true", help="only log warnings")

    parser = _Parser(prog="treepg", description="Self-play policy learning with tree search.")
    parser.add_argument("--version", action="version", version=f"treepg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", parents=[common], help="run self-play training")
    p.add_argument("--games", type=int)
    p.add_argument("--iterations", type=int, help="MCTS iterations per move")
    p.add_argument("--checkpoints", type=_csv_ints, help="game indices to checkpoint, e.g. 1,25,50")
    p.add_argument("--playout", choices=("ce", "tspg", "double", "uniform"), help="self-play play-out policy")
    p.add_argument("--objectives", type=_csv, help="trained vectors, e.g. ce,tspg,double")

    p = sub.add_parser("evaluate", parents=[common], help="play evaluation matches")
    p.add_argument("--agent-a", help="raw:POLICY | biased[:PRIOR[:PLAYOUT]] | uct")
    p.add_argument("--agent-b")
    p.add_argument("--games", type=int, help="games per repetition checkpoint")
    p.add_argument("--iterations", type=int, help="MCTS iterations per move for search agents")
    p.add_argument("--checkpoint", nargs="+", dest="checkpoints",
                   help="checkpoint files or run directories, one per repetition")
    p.add_argument("--checkpoint-games", type=int, help="pick the checkpoint after this many games")
    p.add_argument("--observe", type=_csv, help="extra policies to record, e.g. ce,tspg")
    p.add_argument("--sampled", action="store_true", default=None, help="raw policies sample instead of argmax")

    p = sub.add_parser("analyze", parents=[common], help="entropy profiles and weight distributions")
    p.add_argument("--records", nargs="+", help="records.jsonl files or evaluation directories")
    p.add_argument("--checkpoint", help="checkpoint file or run directory for the weight export")
    p.add_argument("--bins", type=int)
    return parser


def resolve_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig.defaults()
    cfg.override(game=args.game, seed=args.seed, out=args.out, hex_size=args.hex_size)
    if args.command == "train":
        cfg.override(**{"train.games": args.games, "train.iterations": args.iterations,
                        "train.checkpoints": args.checkpoints, "train.playout": args.playout,
                        "train.objectives": args.objectives})
    elif args.command == "evaluate":
        cfg.override(**{"eval.agent_a": args.agent_a, "eval.agent_b": args.agent_b, "eval.games": args.games,
                        "eval.iterations": args.iterations,
                        "eval.checkpoints": tuple(args.checkpoints) if args.checkpoints else None,
                        "eval.checkpoint_games": args.checkpoint_games, "eval.observe": args.observe,
                        "eval.sampled": args.sampled})
    else:
        cfg.override(**{"analyze.records": tuple(args.records) if args.records else None,
                        "analyze.checkpoint": args.checkpoint, "analyze.bins": args.bins})
    return cfg


def _out_dir(cfg: RunConfig, default: str) -> Path:
    out = Path(cfg["out"] or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _log_config(cfg: RunConfig, out: Path) -> None:
    text = cfg.to_text()
    log.info("resolved configuration:\n%s", text.rstrip())
    (out / "config.resolved").write_text(text)


# -- train ---------------------------------------------------------------------

def cmd_train(cfg: RunConfig) -> int:
    tc = cfg.train_config()
    out = _out_dir(cfg, f"runs/{tc.game}-seed{tc.seed}")
    _log_config(cfg, out)
    ckpts = train(tc, out)
    for c in ckpts:
        log.info("checkpoint after %d games: %s", c.games, out / f"{c.games}.ckpt")
    return 0


# -- evaluate ------------------------------------------------------------------

POLICY_NAMES = ("ce", "tspg", "double")


def parse_agent(text: str, ckpt: Optional[Checkpoint], cfg: RunConfig) -> AgentSpec:
    """``raw:POLICY``, ``biased[:PRIOR[:PLAYOUT]]`` (default ``ce:double``) or ``uct``."""
    parts = text.split(":")
    kind = parts[0]
    iterations, exploration = cfg["eval.iterations"], cfg["eval.exploration"]
    cap = cfg["eval.playout_cap"]
    if kind == "uct" and len(parts) == 1:
        return AgentSpec("uct", search=SearchConfig.uct(iterations, playout_cap=cap), label="uct")
    if kind == "raw" and len(parts) == 2 and parts[1] in POLICY_NAMES:
        policy = _policy(ckpt, parts[1], text)
        return AgentSpec("raw", policy, greedy=not cfg["eval.sampled"], label=f"pi_{parts[1]}")
    if kind == "biased" and len(parts) <= 3:
        prior = parts[1] if len(parts) > 1 else "ce"
        playout = parts[2] if len(parts) > 2 else "double"
        if prior not in POLICY_NAMES or playout not in POLICY_NAMES + ("uniform",):
            raise UsageError(f"bad biased agent {text!r}")
        po = None if playout == "uniform" else _policy(ckpt, playout, text)
        search = SearchConfig(iterations, exploration, playout_cap=cap)
        return AgentSpec("biased", _policy(ckpt, prior, text), po, search, label="biased")
    raise UsageError(f"bad agent {text!r}: use raw:POLICY, biased[:PRIOR[:PLAYOUT]] or uct")


def _policy(ckpt: Optional[Checkpoint], name: str, agent: str):
    if ckpt is None:
        raise UsageError(f"agent {agent!r} needs a checkpoint (--checkpoint)")
    return ckpt.policy(name)


def _load_checkpoint(path: str, games: Optional[int]) -> Checkpoint:
    p = Path(path)
    if p.is_dir():
        p = find_checkpoint(p, games)
    elif not p.exists():
        raise FileNotFoundError(f"checkpoint {p} does not exist")
    return Checkpoint.load(p)


def cmd_evaluate(cfg: RunConfig) -> int:
    n_games = cfg["eval.games"]
    if n_games < 1:
        raise UsageError("eval.games must be at least 1")
    ckpts = [_load_checkpoint(p, cfg["eval.checkpoint_games"]) for p in cfg["eval.checkpoints"]]
    if ckpts:
        ids = {c.game.game_id for c in ckpts}
        if len(ids) > 1:
            raise UsageError(f"checkpoints come from different games: {sorted(ids)}")
        game = ckpts[0].game
        if cfg["game"] and make_game(cfg["game"], cfg["hex_size"]) != game:
            raise UsageError(f"--game {cfg['game']} does not match the checkpoints ({game.game_id})")
    else:
        cfg.require("game")
        game = make_game(cfg["game"], cfg["hex_size"])
    out = _out_dir(cfg, "runs/eval")
    _log_config(cfg, out)
    for name in ("match.csv", "records.jsonl"):
        (out / name).unlink(missing_ok=True)
    reps = ckpts or [None]
    per_rep, scores = [], []
    for r, ckpt in enumerate(reps):
        a = parse_agent(cfg["eval.agent_a"], ckpt, cfg)
        b = parse_agent(cfg["eval.agent_b"], ckpt, cfg)
        observers = {f"pi_{n}": _policy(ckpt, n, f"observe {n}") for n in cfg["eval.observe"]}
        fs = ckpt.features if ckpt is not None else None
        m = play_match(a, b, game, n_games, seed=cfg["seed"] + r, fs=fs, move_cap=cfg["eval.move_cap"],
                       observers=observers or None)
        write_match_csv(m, out / "match.csv", r)
        save_records(m.records, out / "records.jsonl", r)
        per_rep.append(m.win_percentage_a)
        scores += [{"a": 100.0, "b": 0.0, None: 50.0}[g.winner] for g in m.records]
        log.info("repetition %d: %s %.1f%% vs %s (%d-%d-%d)", r, a.label, m.win_percentage_a, b.label,
                 m.wins_a, m.draws, m.wins_b)
    # spread across repetitions when there are several, otherwise across games
    spread = per_rep if len(per_rep) > 1 else scores
    lo, hi = bootstrap_ci(spread, cfg["eval.confidence"], cfg["eval.resamples"],
                          np.random.default_rng(cfg["seed"]))
    summary = {"game": game.game_id, "agent_a": cfg["eval.agent_a"], "agent_b": cfg["eval.agent_b"],
               "games_per_repetition": n_games, "repetitions": len(reps), "total_games": n_games * len(reps),
               "win_percentage_a": float(np.mean(scores)), "per_repetition": per_rep,
               "ci": [lo, hi], "confidence": cfg["eval.confidence"],
               "ci_over": "repetitions" if len(per_rep) > 1 else "games"}
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"{cfg['eval.agent_a']} vs {cfg['eval.agent_b']} on {game.game_id}: "
          f"{summary['win_percentage_a']:.1f}% over {summary['total_games']} games, "
          f"{100 * cfg['eval.confidence']:.0f}% CI ({lo:.1f}, {hi:.1f})")
    return 0


# -- analyze -------------------------------------------------------------------

def _record_files(inputs: Sequence[str]) -> list[Path]:
    files = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            found = sorted(p.glob("*.jsonl"))
            if not found:
                raise FileNotFoundError(f"no match records (*.jsonl) in {p}")
            files += found
        elif p.exists():
            files.append(p)
        else:
            raise FileNotFoundError(f"records {p} do not exist")
    return files


def cmd_analyze(cfg: RunConfig) -> int:
    records_in, ckpt_in = cfg["analyze.records"], cfg["analyze.checkpoint"]
    if not records_in and not ckpt_in:
        raise UsageError("analyze needs --records and/or --checkpoint")
    if cfg["analyze.bins"] < 1:
        raise UsageError("analyze.bins must be positive")
    files = _record_files(records_in) if records_in else []
    ckpt = _load_checkpoint(ckpt_in, None) if ckpt_in else None
    out = _out_dir(cfg, "runs/analysis")
    _log_config(cfg, out)
    if files:
        records = [r for f in files for r in load_records(f)]
        if not records:
            raise ValueError("match records are empty")
        profiles = [entropy_profile(records, cfg["analyze.bins"], label) for label in profile_labels(records)]
        write_entropy_csv(profiles, out / "entropy.csv")
        for p in profiles:
            print(f"entropy {p.label}: mean {p.mean_over():.3f}, final two-thirds {p.mean_over(1 / 3, 1):.3f}")
    if ckpt is not None:
        summary = weight_distribution_export(ckpt, out / "weights.csv")
        (out / "weights_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
        for label in ("ce", "ce+tspg"):
            if label in summary:
                s = summary[label]
                print(f"weights {label}: n {s['n']}, std {s['std']:.4f}, "
                      f"fraction in (-0.01, 0.01) {s['frac_near_zero']:.4f}")
    return 0


COMMANDS = {"train": cmd_train, "evaluate": cmd_evaluate, "analyze": cmd_analyze}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s",
                        stream=sys.stderr, force=True)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, UsageError) as exc:
        print(f"treepg {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CheckpointError, OSError, ValueError, KeyError) as exc:
        print(f"treepg {args.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
