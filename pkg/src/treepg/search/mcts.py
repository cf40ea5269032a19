from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..features import FeatureSet
from ..games import Game, GameState, Player
from ..games.base import outcome_from_status, status_from_outcome
from ..policy import PolicySpec
from . import kernels as K

SQRT2 = math.sqrt(2.0)


@dataclass
class SearchConfig:
    iterations: int = 1600
    exploration: float = 2.5
    selection: str = "puct"
    playout_policy: Optional[PolicySpec] = None  # None plays uniformly at random
    playout_cap: int = 200
    tree_reuse: bool = True
    random_ties: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.exploration < 0:
            raise ValueError("exploration constant must be non-negative")
        if self.selection not in ("puct", "ucb1"):
            raise ValueError(f"unknown selection rule {self.selection!r}")
        if self.playout_cap < 0:
            raise ValueError("playout cap must be non-negative")

    @classmethod
    def uct(cls, iterations: int, **kw) -> "SearchConfig":
        return cls(iterations=iterations, exploration=SQRT2, selection="ucb1", **kw)


_EMPTY_FS: dict = {}


def _tables(game: Game, fs: Optional[FeatureSet]):
    if fs is None:
        fs = _EMPTY_FS.setdefault(game, FeatureSet(game))
    return fs.compiled.tables, len(fs)


def _logit_memo(game: Game, fs: Optional[FeatureSet]):
    """Fresh play-out logit memo; must not outlive one weight vector."""
    if fs is None:
        fs = _EMPTY_FS.setdefault(game, FeatureSet(game))
    comp = fs.compiled
    hood = comp.neighbourhood
    size = 4 ** hood.shape[1] if comp.local else 1
    return hood, np.zeros((2, size)), np.zeros((2, size), dtype=np.bool_), np.array([comp.local])


def _weights(ps: Optional[PolicySpec], n: int) -> np.ndarray:
    if ps is None:
        return np.zeros(n)
    w = np.ascontiguousarray(ps.weights, dtype=np.float64)
    if len(w) < n:
        raise ValueError(f"policy has {len(w)} parameters but the feature set has {n} features")
    return w


class Tree:
    """Growable parallel arrays holding one search tree."""

    def __init__(self, game: Game, node_cap: int = 64, edge_cap: int = 0):
        self.game = game
        self.epoch = 0
        self.count = np.zeros(2, dtype=np.int64)
        self._alloc(node_cap, max(edge_cap, node_cap * game.max_actions))

    def _alloc(self, node_cap, edge_cap):
        nc = self.game.ncells
        self.nodes = (np.zeros(node_cap, np.int64), np.zeros(node_cap, np.int64), np.zeros(node_cap, np.int64),
                      np.zeros(node_cap, np.int64), np.zeros(node_cap, np.int64), np.zeros(node_cap, np.int64),
                      np.zeros((node_cap, nc), np.int8))
        self.edges = (np.zeros(edge_cap, np.int64), np.zeros(edge_cap, np.int64), np.zeros(edge_cap, np.float64),
                      np.zeros(edge_cap, np.float64), np.full(edge_cap, -1, np.int64))

    def ensure(self, extra_nodes: int, extra_edges: int) -> None:
        n, e = int(self.count[0]), int(self.count[1])
        node_cap, edge_cap = len(self.nodes[0]), len(self.edges[0])
        if n + extra_nodes <= node_cap and e + extra_edges <= edge_cap:
            return
        old_nodes, old_edges = self.nodes, self.edges
        self._alloc(max(2 * node_cap, n + extra_nodes), max(2 * edge_cap, e + extra_edges))
        for new, old in zip(self.nodes, old_nodes):
            new[:n] = old[:n]
        for new, old in zip(self.edges, old_edges):
            new[:e] = old[:e]

    def add_root(self, state: GameState, fs, prior: Optional[PolicySpec]) -> int:
        tables, nfeat = _tables(self.game, fs)
        self.ensure(1, self.game.max_actions)
        scratch = _scratch(self.game)
        return int(K.new_node(self.game.kernel, tables, self.nodes, self.edges, self.count, state.cells(),
                              int(state.mover), status_from_outcome(state.outcome), _weights(prior, nfeat),
                              prior is not None, self.epoch, scratch.actions, scratch.probs,
                              _logit_memo(self.game, fs)))


@dataclass
class _Scratch:
    actions: np.ndarray
    probs: np.ndarray
    work: np.ndarray
    misc: np.ndarray


def _scratch(game: Game) -> _Scratch:
    m = game.max_actions + 1
    return _Scratch(np.zeros(m, np.int64), np.zeros(m, np.float64), np.zeros(game.ncells, np.int8),
                    np.zeros(max(game.ncells, m) + 1, np.int64))


class SearchNode:
    """View of one node of a :class:`Tree`."""

    def __init__(self, tree: Tree, index: int):
        self.tree = tree
        self.index = index

    @classmethod
    def from_stats(cls, state: GameState, counts, sums, priors=None) -> "SearchNode":
        """Build an expanded node with given per-action statistics (for analysis and tests)."""
        tree = Tree(state.game)
        idx = tree.add_root(state, None, None)
        node = cls(tree, idx)
        sl = node._slice
        counts = np.asarray(counts, dtype=np.int64)
        if len(counts) != sl.stop - sl.start:
            raise ValueError("statistics must cover every legal action")
        tree.edges[1][sl] = counts
        tree.edges[2][sl] = np.asarray(sums, dtype=np.float64)
        if priors is not None:
            tree.edges[3][sl] = np.asarray(priors, dtype=np.float64)
        tree.nodes[2][idx] = 1 + counts.sum()
        return node

    @property
    def _slice(self) -> slice:
        e0 = int(self.tree.nodes[0][self.index])
        return slice(e0, e0 + int(self.tree.nodes[1][self.index]))

    @property
    def state(self) -> GameState:
        t = self.tree
        board = t.nodes[6][self.index].tobytes()
        status = int(t.nodes[3][self.index])
        return GameState(t.game, board, Player(int(t.nodes[4][self.index])), 0, outcome_from_status(status))

    @property
    def mover(self) -> Player:
        return Player(int(self.tree.nodes[4][self.index]))

    @property
    def terminal(self) -> bool:
        return int(self.tree.nodes[3][self.index]) != 0

    @property
    def actions(self) -> list[int]:
        return self.tree.edges[0][self._slice].tolist()

    @property
    def counts(self) -> np.ndarray:
        return self.tree.edges[1][self._slice].copy()

    @property
    def value_sums(self) -> np.ndarray:
        return self.tree.edges[2][self._slice].copy()

    @property
    def priors(self) -> np.ndarray:
        return self.tree.edges[3][self._slice].copy()

    @property
    def visits(self) -> int:
        return int(self.tree.nodes[2][self.index])

    @property
    def value(self) -> float:
        """Mean backed-up value for this node's mover; 0 while unvisited."""
        return float(K.node_value(self.tree.nodes, self.tree.edges, self.index))

    @property
    def children(self) -> dict[int, "SearchNode"]:
        sl = self._slice
        kids = self.tree.edges[4][sl]
        return {int(a): SearchNode(self.tree, int(c)) for a, c in zip(self.tree.edges[0][sl], kids) if c >= 0}

    def child(self, action: int) -> Optional["SearchNode"]:
        return self.children.get(int(action))

    def walk(self):
        yield self
        for c in self.children.values():
            yield from c.walk()


@dataclass
class SearchResult:
    actions: list[int]
    visit_distribution: np.ndarray
    q_estimates: np.ndarray
    root_value: float
    tree: SearchNode
    counts: np.ndarray = field(repr=False, default=None)


def visit_distribution(node: SearchNode) -> np.ndarray:
    n = node.counts.astype(np.float64)
    total = n.sum()
    if total <= 0:
        raise ValueError("node has no visited actions")
    return n / total


def q_estimates(node: SearchNode) -> np.ndarray:
    """Mean value per action; unvisited actions take the node's own value."""
    n, w = node.counts, node.value_sums
    q = np.full(len(n), node.value)
    seen = n > 0
    q[seen] = w[seen] / n[seen]
    return q


def _select(node: SearchNode, c: float, rule: int, parent_value: Optional[float], rng) -> int:
    sl = node._slice
    e = node.tree.edges
    v = node.value if parent_value is None else parent_value
    state = np.array([rng if rng else 1], dtype=np.uint64)
    k = K.select_edge(e[1], e[2], e[3], sl.start, sl.stop, float(c), rule, float(v), bool(rng), state)
    return node.actions[k]


def puct_select(node: SearchNode, c: float, parent_value: Optional[float] = None) -> int:
    """``argmax Q + c P sqrt(sum N) / (1 + N)``; unvisited actions use ``parent_value``
    (the node's value by default)."""
    return _select(node, c, K.PUCT, parent_value, None)


def ucb1_select(node: SearchNode, c: float = SQRT2) -> int:
    return _select(node, c, K.UCB1, None, None)


def _seed(rng: Optional[np.random.Generator]) -> np.ndarray:
    rng = rng if rng is not None else np.random.default_rng()
    return np.array([int(rng.integers(1, 2**63 - 1))], dtype=np.uint64)


def playout(state: GameState, policy: Optional[PolicySpec], cap: int, rng: np.random.Generator,
            fs: Optional[FeatureSet] = None) -> float:
    """Random or policy play-out; value for ``state``'s mover, 0 when ``cap`` is hit."""
    game = state.game
    tables, nfeat = _tables(game, fs)
    s = _scratch(game)
    board = state.cells().copy()
    return float(K.playout(game.kernel, tables, board, int(state.mover), status_from_outcome(state.outcome),
                           _weights(policy, nfeat), policy is not None, int(cap), _seed(rng),
                           s.actions, s.probs, s.misc, _logit_memo(game, fs)))


def run_search(root_state: GameState, prior_policy: Optional[PolicySpec], cfg: SearchConfig,
               fs: Optional[FeatureSet] = None, reused_tree: Optional[SearchNode] = None,
               rng: Optional[np.random.Generator] = None) -> SearchResult:
    """Run ``cfg.iterations`` fresh iterations, on top of ``reused_tree`` when given.

    Priors come from ``prior_policy`` (uniform when ``None``) and are refreshed
    the first time a reused node is selected from in this search.
    """
    if root_state.terminal:
        raise ValueError("cannot search from a terminal state")
    game = root_state.game
    tables, nfeat = _tables(game, fs)
    prior_w = _weights(prior_policy, nfeat)
    playout_w = _weights(cfg.playout_policy, nfeat)
    if reused_tree is not None and cfg.tree_reuse and reused_tree.state.board == root_state.board \
            and reused_tree.mover == root_state.mover:
        tree, root = reused_tree.tree, reused_tree.index
        tree.epoch += 1
    else:
        tree = Tree(game, cfg.iterations + 2)
        tree.epoch = 1
        root = tree.add_root(root_state, fs, prior_policy)
    tree.ensure(cfg.iterations + 1, (cfg.iterations + 1) * game.max_actions)
    s = _scratch(game)
    path = np.zeros(game.ncells * 4 + 8, dtype=np.int64)
    rule = K.PUCT if cfg.selection == "puct" else K.UCB1
    K.iterate(game.kernel, tables, tree.nodes, tree.edges, tree.count, root, cfg.iterations,
              float(cfg.exploration), rule, prior_w, prior_policy is not None, playout_w,
              cfg.playout_policy is not None, int(cfg.playout_cap), tree.epoch, cfg.random_ties,
              _seed(rng), path, s.actions, s.probs, s.misc, s.work,
              _logit_memo(game, fs), _logit_memo(game, fs))
    node = SearchNode(tree, root)
    return SearchResult(node.actions, visit_distribution(node), q_estimates(node), node.value, node, node.counts)


def subtree(node: SearchNode, *actions: int) -> Optional[SearchNode]:
    """Detached copy of the subtree reached by ``actions``, or ``None`` if unexpanded."""
    for a in actions:
        node = node.child(a)
        if node is None:
            return None
    src = node.tree
    dst = Tree(src.game, int(src.count[0]), int(src.count[1]))
    dst.epoch = src.epoch
    order = np.zeros(int(src.count[0]) + 1, dtype=np.int64)
    K.compact(src.nodes, src.edges, node.index, dst.nodes, dst.edges, dst.count, order)
    return SearchNode(dst, 0)


def rebase_tree(result: SearchResult, own_action: int, opponent_action: int) -> Optional[SearchNode]:
    return subtree(result.tree, own_action, opponent_action)
