"""Self-play Expert Iteration: search, store, update, grow features."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .checkpoint import Checkpoint
from .experience import ExperienceEntry, ReplayBuffer
from .features import FeatureSet, atomic_features, extract_all, grow
from .games import Game, Outcome, make_game
from .optim import CenteredRMSProp
from .policy import PolicySpec, ce_batch_gradient, extend, sample_action, tspg_gradient
from .search import SearchConfig, run_search, subtree

log = logging.getLogger(__name__)

OFFSET_OBJECTIVES = ("double", "tspg")  # update order after the cross-entropy base
PLAYOUT_CHOICES = ("ce", "tspg", "double", "uniform")


@dataclass
class TrainConfig:
    game: str = "connect4"
    games: int = 200
    mcts_iterations: int = 1600
    exploration: float = 2.5
    batch_size: int = 30
    learning_rate: float = 0.005
    rms_decay: float = 0.9
    momentum: float = 0.9
    epsilon: float = 1e-8
    buffer_capacity: int = 400
    move_cap: int = 150
    playout_cap: int = 200
    gamma: float = 1.0
    checkpoints: tuple[int, ...] = (1, 25, 50, 100, 200)
    objectives: tuple[str, ...] = ("ce", "tspg", "double")
    playout: str = "ce"
    replace_when_small: bool = False
    hex_size: int = 7
    seed: int = 0

    def __post_init__(self):
        self.checkpoints = tuple(sorted(set(int(c) for c in self.checkpoints)))
        self.objectives = tuple(self.objectives)
        for name in ("games", "mcts_iterations", "batch_size", "buffer_capacity", "move_cap", "playout_cap"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        for name in ("learning_rate", "rms_decay", "momentum", "epsilon", "exploration"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.gamma != 1.0:
            raise ValueError("only undiscounted episodes (gamma = 1) are supported")
        if any(c < 1 or c > self.games for c in self.checkpoints):
            raise ValueError(f"checkpoints must lie in [1, {self.games}]")
        if "ce" not in self.objectives or any(o not in ("ce",) + OFFSET_OBJECTIVES for o in self.objectives):
            raise ValueError("objectives must include 'ce' and only 'tspg'/'double' besides it")
        if self.playout not in PLAYOUT_CHOICES:
            raise ValueError(f"playout must be one of {PLAYOUT_CHOICES}")
        if self.playout in OFFSET_OBJECTIVES and self.playout not in self.objectives:
            raise ValueError(f"playout policy {self.playout!r} is not being trained")

    def make_game(self) -> Game:
        return make_game(self.game, self.hex_size)


@dataclass
class GameRecord:
    index: int
    length: int
    outcome: Outcome
    actions: list[int] = field(default_factory=list)


class Learner:
    """Parameters, optimiser state and replay buffer of one training run."""

    def __init__(self, cfg: TrainConfig, fs: Optional[FeatureSet] = None):
        self.cfg = cfg
        self.game = cfg.make_game()
        self.fs = fs if fs is not None else atomic_features(self.game)
        n = len(self.fs)
        self.params = {name: np.zeros(n) for name in cfg.objectives}
        self.optims = {name: CenteredRMSProp(cfg.learning_rate, cfg.rms_decay, cfg.momentum, cfg.epsilon)
                       for name in cfg.objectives}
        self.buffer = ReplayBuffer(cfg.buffer_capacity)
        self.steps = 0
        self.games = 0
        self.grad_log: dict[str, list[float]] = {name: [] for name in cfg.objectives}

    def policy(self, name: str) -> PolicySpec:
        if name == "ce":
            return PolicySpec(self.params["ce"])
        return PolicySpec(self.params["ce"], self.params[name])

    def search_config(self) -> SearchConfig:
        cfg = self.cfg
        playout = None if cfg.playout == "uniform" else self.policy(cfg.playout)
        return SearchConfig(cfg.mcts_iterations, cfg.exploration, "puct", playout, cfg.playout_cap, True)

    def update(self, rng: np.random.Generator) -> None:
        """One mini-batch step per trained vector: cross-entropy first, then offsets."""
        batch = self.buffer.sample(rng, self.cfg.batch_size, self.cfg.replace_when_small)
        if not batch:
            return
        g = ce_batch_gradient(self.policy("ce"), batch)
        self.params["ce"] = self.optims["ce"].step(self.params["ce"], g)
        self.grad_log["ce"].append(float(np.abs(g).mean()) if len(g) else 0.0)
        for name in OFFSET_OBJECTIVES:
            if name not in self.params:
                continue
            if name == "double":
                g = ce_batch_gradient(self.policy(name), batch)
                descent = g
            else:
                g = tspg_gradient(self.policy(name), batch)
                descent = -g
            self.params[name] = self.optims[name].step(self.params[name], descent)
            self.grad_log[name].append(float(np.abs(g).mean()) if len(g) else 0.0)
        self.steps += 1

    def set_features(self, fs: FeatureSet) -> None:
        self.fs = fs
        for name in self.params:
            self.params[name] = extend(self.params[name], len(fs))
            self.optims[name].resize(len(fs))

    def checkpoint(self) -> Checkpoint:
        # untrained offsets are stored as zeros so every checkpoint exposes all three policies
        offsets = {name: self.params[name].copy() if name in self.params else np.zeros(len(self.fs))
                   for name in OFFSET_OBJECTIVES}
        return Checkpoint(self.game, self.fs, self.params["ce"].copy(), offsets, self.games, self.steps)


def self_play_game(learner: Learner, rng: np.random.Generator) -> tuple[GameRecord, list[ExperienceEntry]]:
    """Play one self-play game, storing every state and updating after every turn."""
    cfg = learner.cfg
    game = learner.game
    state = game.initial_state()
    tree = None
    entries = []
    actions_played = []
    while not state.terminal and state.move_count < cfg.move_cap:
        res = run_search(state, learner.policy("ce"), learner.search_config(), learner.fs, tree, rng)
        feats = extract_all(state, res.actions, learner.fs)
        entry = ExperienceEntry(state, tuple(res.actions), feats, res.visit_distribution,
                                np.clip(res.q_estimates, -1.0, 1.0), learner.fs.version)
        learner.buffer.add(entry)
        entries.append(entry)
        learner.update(rng)
        action = res.actions[sample_action(res.visit_distribution, rng)]
        actions_played.append(action)
        tree = subtree(res.tree, action)
        state = game.apply(state, action)
    outcome = state.outcome if state.terminal else Outcome(0, 0)
    learner.games += 1
    return GameRecord(learner.games, state.move_count, outcome, actions_played), entries


LOG_FIELDS = ["game", "length", "result", "buffer_size", "features", "mean_abs_grad_ce",
              "mean_abs_grad_tspg", "mean_abs_grad_double"]


def train(cfg: TrainConfig, out_dir=None, fs: Optional[FeatureSet] = None) -> list[Checkpoint]:
    """Run ``cfg.games`` sequential self-play games; return the configured checkpoints.

    With ``out_dir`` set, checkpoints go to ``<out_dir>/<game>.ckpt`` and a
    per-game log to ``<out_dir>/train_log.csv``.
    """
    rng = np.random.default_rng(cfg.seed)
    learner = Learner(cfg, fs)
    out = Path(out_dir) if out_dir is not None else None
    writer = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        log_file = open(out / "train_log.csv", "w", newline="")
        writer = csv.DictWriter(log_file, LOG_FIELDS)
        writer.writeheader()
    checkpoints = []
    try:
        for _ in range(cfg.games):
            for v in learner.grad_log.values():
                v.clear()
            record, entries = self_play_game(learner, rng)
            learner.set_features(grow(learner.fs, entries, rng))
            row = {"game": record.index, "length": record.length, "result": record.outcome.utility_p1,
                   "buffer_size": len(learner.buffer), "features": len(learner.fs)}
            for name in ("ce", "tspg", "double"):
                vals = learner.grad_log.get(name)
                row[f"mean_abs_grad_{name}"] = f"{np.mean(vals):.9g}" if vals else ""
            log.info("game %d: length %d result %+d features %d", record.index, record.length,
                     record.outcome.utility_p1, len(learner.fs))
            if writer is not None:
                writer.writerow(row)
                log_file.flush()
            if record.index in cfg.checkpoints:
                ckpt = learner.checkpoint()
                checkpoints.append(ckpt)
                if out is not None:
                    ckpt.save(out / f"{record.index}.ckpt")
    finally:
        if writer is not None:
            log_file.close()
    return checkpoints
