"""Binary state-action pattern features and their growth during self-play.

A feature is a set of ``(anchor, offset, content)`` elements read around the
action's target cell (and source cell for movement games), in the mover's
frame. A feature is active when any image of it under the game's symmetry
group matches the board.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

import numpy as np
from numba import njit

from .games import Game, GameState

CONTENTS = ("empty", "friend", "enemy", "off")
ANCHORS = ("to", "from")
OFF = 3


class Element(NamedTuple):
    anchor: str
    dx: int
    dy: int
    content: str

    def __str__(self):
        tag = "" if self.anchor == "to" else "@src"
        return f"({self.dx},{self.dy}:{self.content}{tag})"


_ELEMENT_RE = re.compile(r"\((-?\d+),(-?\d+):(\w+?)(@src)?\)")


@dataclass(frozen=True)
class FeatureSpec:
    elements: tuple[Element, ...]

    def __post_init__(self):
        if not self.elements:
            raise ValueError("a feature needs at least one element")
        cells = [(e.anchor, e.dx, e.dy) for e in self.elements]
        if len(set(cells)) != len(cells):
            raise ValueError(f"feature has two elements on one cell: {self}")
        for e in self.elements:
            if e.content not in CONTENTS or e.anchor not in ANCHORS:
                raise ValueError(f"bad feature element {e!r}")
        object.__setattr__(self, "elements", tuple(sorted(self.elements)))

    @classmethod
    def of(cls, *elements) -> "FeatureSpec":
        """Build from ``(dx, dy, content)`` or ``(anchor, dx, dy, content)`` tuples."""
        out = []
        for e in elements:
            out.append(Element("to", *e) if len(e) == 3 else Element(*e))
        return cls(tuple(out))

    @classmethod
    def parse(cls, line: str) -> "FeatureSpec":
        found = _ELEMENT_RE.findall(line)
        if not found or "".join(_ELEMENT_RE.sub("", line).split()):
            raise ValueError(f"cannot parse feature line {line!r}")
        return cls(tuple(Element("from" if src else "to", int(x), int(y), c) for x, y, c, src in found))

    def __str__(self):
        return " ".join(str(e) for e in self.elements)


def images(spec: FeatureSpec, game: Game) -> list[tuple[Element, ...]]:
    """Distinct symmetry images of ``spec``, identity first."""
    seen = []
    for g in game.symmetries:
        img = tuple(sorted(Element(e.anchor, *g((e.dx, e.dy)), e.content) for e in spec.elements))
        if img not in seen:
            seen.append(img)
    return seen


def canonical(spec: FeatureSpec, game: Game) -> tuple[Element, ...]:
    return min(images(spec, game))


class SparseFeatureVector:
    """Active feature indices (sorted, unique) of one state-action pair."""

    __slots__ = ("indices", "dimension")

    def __init__(self, indices, dimension: int):
        self.indices = np.asarray(indices, dtype=np.int64)
        self.dimension = int(dimension)

    def __eq__(self, other):
        return (isinstance(other, SparseFeatureVector) and self.dimension == other.dimension
                and np.array_equal(self.indices, other.indices))

    def __repr__(self):
        return f"SparseFeatureVector({self.indices.tolist()}, dimension={self.dimension})"

    def restrict(self, dimension: int) -> "SparseFeatureVector":
        return SparseFeatureVector(self.indices[self.indices < dimension], dimension)


@dataclass(frozen=True, eq=False)
class FeatureSet:
    game: Game
    specs: tuple[FeatureSpec, ...] = ()
    version: int = 0
    _keys: frozenset = field(default=frozenset(), repr=False)

    def __post_init__(self):
        keys = [canonical(s, self.game) for s in self.specs]
        if len(set(keys)) != len(keys):
            raise ValueError("feature set contains symmetric duplicates")
        object.__setattr__(self, "_keys", frozenset(keys))

    def __len__(self):
        return len(self.specs)

    def __eq__(self, other):
        return (isinstance(other, FeatureSet) and self.game == other.game
                and self.specs == other.specs and self.version == other.version)

    def __contains__(self, spec: FeatureSpec):
        return canonical(spec, self.game) in self._keys

    def append(self, spec: FeatureSpec) -> "FeatureSet":
        if spec in self:
            return self
        return FeatureSet(self.game, self.specs + (spec,), self.version + 1)

    def to_lines(self) -> list[str]:
        return [str(s) for s in self.specs]

    @classmethod
    def from_lines(cls, game: Game, lines: Sequence[str], version: int = 0) -> "FeatureSet":
        return cls(game, tuple(FeatureSpec.parse(l) for l in lines if l.strip()), version)

    @cached_property
    def compiled(self) -> "CompiledFeatures":
        return CompiledFeatures(self)


class CompiledFeatures:
    """Flat arrays describing every symmetry image of every spec.

    ``tables`` is the tuple handed to the numba matchers:
    ``(nbr, img_start, el_start, el_off, el_anchor, el_req)`` where
    ``nbr[cell, k]`` is the cell at oriented offset ``k`` from ``cell`` (or
    ``ncells`` off the board) and ``el_off[player - 1, e]`` the oriented offset
    of element ``e``.
    """

    def __init__(self, fs: FeatureSet):
        game = fs.game
        self.images: list[list[tuple[Element, ...]]] = [images(s, game) for s in fs.specs]
        offsets: dict = {}
        img_start, el_start, el_off, el_anchor, el_req = [0], [0], [[], []], [], []
        for imgs in self.images:
            for img in imgs:
                for e in img:
                    for p in (1, 2):
                        o = game.orient(p, (e.dx, e.dy))
                        el_off[p - 1].append(offsets.setdefault(o, len(offsets)))
                    el_anchor.append(ANCHORS.index(e.anchor))
                    el_req.append(CONTENTS.index(e.content))
                el_start.append(len(el_anchor))
            img_start.append(len(el_start) - 1)
        nbr = np.full((game.ncells + 1, max(len(offsets), 1)), game.ncells, dtype=np.int32)
        for (dx, dy), k in offsets.items():
            for i, (x, y) in enumerate(game.coords):
                c = game.cell_at((x + dx, y + dy))
                nbr[i, k] = game.ncells if c < 0 else c
        self.tables = (
            nbr,
            np.array(img_start, dtype=np.int64),
            np.array(el_start, dtype=np.int64),
            np.array(el_off, dtype=np.int32).reshape(2, len(el_anchor)),
            np.array(el_anchor, dtype=np.int8),
            np.array(el_req, dtype=np.int8),
        )
        self.n_specs = len(fs.specs)
        # placement games whose patterns stay within distance 1 of the target:
        # the logit is a function of the mover and the neighbours' contents
        ring = [o for o in game.offsets_within(1) if o != (0, 0)]
        self.local = (not game.moves_pieces and all(e.anchor == "to" for imgs in self.images for img in imgs
                                                    for e in img)
                      and set(offsets) <= set(game.offsets_within(1)))
        self.neighbourhood = np.array([[game.ncells if (c := game.cell_at((x + dx, y + dy))) < 0 else c
                                        for dx, dy in ring] for x, y in game.coords], dtype=np.int64)


@njit(cache=True)
def _image_matches(tables, board, mover, target, source, img):
    nbr, img_start, el_start, el_off, el_anchor, el_req = tables
    ncells = board.shape[0]
    for e in range(el_start[img], el_start[img + 1]):
        anchor = target if el_anchor[e] == 0 else source
        if anchor < 0:
            return False
        c = nbr[anchor, el_off[mover - 1, e]]
        if c == ncells:
            rel = 3
        else:
            v = board[c]
            rel = 0 if v == 0 else (1 if v == mover else 2)
        if rel != el_req[e]:
            return False
    return True


@njit(cache=True)
def active_specs(tables, board, mover, target, source, out):
    """Write active spec indices (ascending) into ``out``; return the count."""
    img_start = tables[1]
    n = 0
    for s in range(img_start.shape[0] - 1):
        for img in range(img_start[s], img_start[s + 1]):
            if _image_matches(tables, board, mover, target, source, img):
                out[n] = s
                n += 1
                break
    return n


@njit(cache=True)
def action_logit(tables, board, mover, target, source, weights):
    img_start = tables[1]
    z = 0.0
    for s in range(img_start.shape[0] - 1):
        for img in range(img_start[s], img_start[s + 1]):
            if _image_matches(tables, board, mover, target, source, img):
                z += weights[s]
                break
    return z


@njit(cache=True)
def matched_images(tables, board, mover, target, source, out):
    """Write every matching image index (all symmetry images, not just the first)."""
    img_start = tables[1]
    n = 0
    for img in range(img_start[-1]):
        if _image_matches(tables, board, mover, target, source, img):
            out[n] = img
            n += 1
    return n


def extract_all(state: GameState, actions: Sequence[int], fs: FeatureSet) -> list[SparseFeatureVector]:
    game = state.game
    comp = fs.compiled
    board = state.cells()
    buf = np.empty(max(comp.n_specs, 1), dtype=np.int64)
    out = []
    for a in actions:
        t, s = game.action_cells(state, a)
        n = active_specs(comp.tables, board, int(state.mover), t, s, buf)
        out.append(SparseFeatureVector(buf[:n].copy(), comp.n_specs))
    return out


def extract(state: GameState, action: int, fs: FeatureSet) -> SparseFeatureVector:
    return extract_all(state, [action], fs)[0]


def atomic_features(game: Game | str, radius: int = 1) -> FeatureSet:
    """Single-element specs for every offset within ``radius`` and every content.

    Symmetric duplicates are merged, so the count is contents times the number
    of offset orbits under the game's symmetry group (per anchor).
    """
    if isinstance(game, str):
        from .games import make_game
        game = make_game(game)
    anchors = ANCHORS if game.moves_pieces else ("to",)
    fs = FeatureSet(game)
    for anchor in anchors:
        for off in game.offsets_within(radius):
            for content in CONTENTS:
                spec = FeatureSpec((Element(anchor, off[0], off[1], content),))
                if spec not in fs:
                    fs = FeatureSet(game, fs.specs + (spec,), 0)
    return fs


def _strip(elements, tautology):
    return frozenset(e for e in elements if (e.anchor, (e.dx, e.dy), e.content) not in tautology)


def _union(a: frozenset, b: frozenset) -> Optional[frozenset]:
    if a <= b or b <= a:
        return None
    merged = a | b
    cells = {(e.anchor, e.dx, e.dy) for e in merged}
    if len(cells) != len(merged):
        return None
    return merged


def grow(fs: FeatureSet, recent_experience, rng: np.random.Generator) -> FeatureSet:
    """Append the most frequently co-active instance union, if any is new.

    For each entry the action with the largest ``|Q|`` is inspected; every pair
    of matching feature instances there proposes the union of their elements.
    Candidates are counted once per entry; ties between top scores are broken
    with ``rng``.
    """
    if not recent_experience:
        raise ValueError("grow needs at least one experience entry")
    game = fs.game
    if not fs.specs:
        return fs
    comp = fs.compiled
    flat_images = [img for imgs in comp.images for img in imgs]
    taut = game.tautology()
    buf = np.empty(len(flat_images), dtype=np.int64)
    scores: Counter = Counter()
    for entry in recent_experience:
        state = entry.state
        q = np.abs(np.asarray(entry.q_values, dtype=float))
        action = entry.actions[int(np.argmax(q))]
        t, s = game.action_cells(state, action)
        n = matched_images(comp.tables, state.cells(), int(state.mover), t, s, buf)
        inst = {_strip(flat_images[i], taut) for i in buf[:n]}
        inst = sorted((x for x in inst if x), key=lambda x: sorted(x))
        seen = set()
        for i in range(len(inst)):
            for j in range(i + 1, len(inst)):
                u = _union(inst[i], inst[j])
                if u is None:
                    continue
                key = canonical(FeatureSpec(tuple(u)), game)
                if key not in seen:
                    seen.add(key)
                    scores[key] += 1
    fresh = [(k, c) for k, c in scores.items() if k not in fs._keys]
    if not fresh:
        return fs
    best = max(c for _, c in fresh)
    tied = sorted(k for k, c in fresh if c == best)
    pick = tied[int(rng.integers(len(tied)))] if len(tied) > 1 else tied[0]
    return fs.append(FeatureSpec(pick))
