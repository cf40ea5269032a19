"""Agents and head-to-head matches."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol

import numpy as np

from .features import FeatureSet
from .games import Game, GameState, Player
from .policy import PolicySpec, distribution, greedy_action, sample_action
from .search import SearchConfig, SearchResult, run_search, subtree


class Agent(Protocol):
    label: str

    def reset(self) -> None: ...

    def act(self, state: GameState, rng: np.random.Generator) -> tuple[int, np.ndarray]:
        """Return the chosen action and the distribution it was derived from."""

    def observe(self, action: int) -> None: ...


class PolicyAgent:
    def __init__(self, policy: PolicySpec, fs: FeatureSet, greedy: bool = True, label: str = "policy"):
        self.policy, self.fs, self.greedy, self.label = policy, fs, greedy, label

    def reset(self):
        pass

    def act(self, state, rng):
        actions = state.game.legal_actions(state)
        dist = distribution(self.policy, state, actions, self.fs)
        k = greedy_action(dist) if self.greedy else sample_action(dist, rng)
        return actions[k], dist

    def observe(self, action):
        pass


class SearchAgent:
    """MCTS player; plays the most visited action and reuses its tree."""

    def __init__(self, cfg: SearchConfig, prior: Optional[PolicySpec] = None, fs: Optional[FeatureSet] = None,
                 label: str = "mcts"):
        self.cfg, self.prior, self.fs, self.label = cfg, prior, fs, label
        self.reset()

    def reset(self):
        self._last: Optional[SearchResult] = None
        self._since: list[int] = []

    def act(self, state, rng):
        tree = None
        if self._last is not None and self.cfg.tree_reuse:
            tree = subtree(self._last.tree, *self._since)
        res = run_search(state, self.prior, self.cfg, self.fs, tree, rng)
        self._last, self._since = res, []
        return res.actions[greedy_action(res.counts)], res.visit_distribution

    def observe(self, action):
        if self._last is not None:
            self._since.append(action)


@dataclass
class AgentSpec:
    """Declarative agent description.

    ``kind`` is ``"raw"`` (softmax policy), ``"biased"`` (PUCT with a policy prior
    and optional policy play-outs) or ``"uct"`` (UCB1, uniform play-outs).
    """

    kind: str
    policy: Optional[PolicySpec] = None
    playout: Optional[PolicySpec] = None
    search: Optional[SearchConfig] = None
    greedy: bool = True
    label: str = ""

    def build(self, fs: Optional[FeatureSet]) -> Agent:
        label = self.label or self.kind
        if self.kind == "raw":
            return PolicyAgent(self.policy, fs, self.greedy, label)
        if self.kind == "biased":
            base = self.search or SearchConfig()
            cfg = SearchConfig(base.iterations, base.exploration, "puct", self.playout, base.playout_cap,
                               base.tree_reuse, base.random_ties)
            return SearchAgent(cfg, self.policy, fs, label)
        if self.kind == "uct":
            base = self.search or SearchConfig.uct(1600)
            return SearchAgent(SearchConfig.uct(base.iterations, playout_cap=base.playout_cap,
                                                tree_reuse=base.tree_reuse), None, None, label)
        raise ValueError(f"unknown agent kind {self.kind!r}")


@dataclass
class MoveRecord:
    turn: int
    mover: str
    n_actions: int
    distributions: dict[str, list[float]]


@dataclass
class GameResult:
    index: int
    a_seat: Player
    length: int
    winner: Optional[str]  # "a", "b" or None for a draw
    moves: list[MoveRecord] = field(default_factory=list)


@dataclass
class MatchResult:
    games: int
    wins_a: int
    wins_b: int
    draws: int
    records: list[GameResult] = field(default_factory=list)

    @property
    def win_percentage_a(self) -> float:
        return 100.0 * (self.wins_a + 0.5 * self.draws) / self.games

    @property
    def win_percentage_b(self) -> float:
        return 100.0 - self.win_percentage_a


def _as_agent(x, fs) -> Agent:
    return x.build(fs) if isinstance(x, AgentSpec) else x


def play_game(game: Game, first: Agent, second: Agent, rng: np.random.Generator, move_cap: int = 150,
              observers: Optional[dict] = None, fs: Optional[FeatureSet] = None):
    """Play one game; returns the final state and the per-move records."""
    agents = {Player.P1: first, Player.P2: second}
    for agent in agents.values():
        agent.reset()
    state = game.initial_state()
    moves = []
    while not state.terminal and state.move_count < move_cap:
        agent = agents[state.mover]
        action, dist = agent.act(state, rng)
        dists = {agent.label: np.asarray(dist, dtype=float).tolist()}
        if observers:
            actions = game.legal_actions(state)
            for name, policy in observers.items():
                dists[name] = distribution(policy, state, actions, fs).tolist()
        moves.append(MoveRecord(state.move_count, agent.label, len(dist), dists))
        for a in agents.values():
            a.observe(action)
        state = game.apply(state, action)
    return state, moves


def play_match(a, b, game: Game, n_games: int, seed: int = 0, fs: Optional[FeatureSet] = None,
               move_cap: int = 150, observers: Optional[dict[str, PolicySpec]] = None) -> MatchResult:
    """Play ``n_games`` games, ``a`` moving first in even-numbered games.

    Each game draws from its own stream seeded by ``(seed, index)``.
    ``observers`` are extra policies whose distributions are recorded at every
    position (for entropy analysis).
    """
    if n_games < 1:
        raise ValueError("n_games must be >= 1")
    agent_a, agent_b = _as_agent(a, fs), _as_agent(b, fs)
    result = MatchResult(n_games, 0, 0, 0)
    for i in range(n_games):
        rng = np.random.default_rng([seed, i])
        a_seat = Player.P1 if i % 2 == 0 else Player.P2
        first, second = (agent_a, agent_b) if a_seat == Player.P1 else (agent_b, agent_a)
        state, moves = play_game(game, first, second, rng, move_cap, observers, fs)
        winner = None
        if state.terminal and state.outcome.utility(a_seat) > 0:
            winner, result.wins_a = "a", result.wins_a + 1
        elif state.terminal and state.outcome.utility(a_seat) < 0:
            winner, result.wins_b = "b", result.wins_b + 1
        else:
            result.draws += 1
        result.records.append(GameResult(i, a_seat, state.move_count, winner, moves))
    return result


def write_match_csv(result: MatchResult, path, repetition: int = 0) -> None:
    path = Path(path)
    new = not path.exists()
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(["repetition", "game", "a_seat", "length", "winner", "score_a"])
        for r in result.records:
            score = {"a": 1.0, "b": 0.0, None: 0.5}[r.winner]
            w.writerow([repetition, r.index, f"P{int(r.a_seat)}", r.length, r.winner or "draw", f"{score:.9g}"])
