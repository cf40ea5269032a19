"""Concrete games: geometry tables, symmetry groups and player orientation."""
from __future__ import annotations

from typing import Optional

import numpy as np

from . import kernels as K
from .base import Game, GameState, Outcome, Player

# square directions: E, NE, N, NW, W, SW, S, SE as (dx, dy); y grows downwards
SQUARE_DIRS = [(1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1)]
# axial hex directions (dq, dr); d and d + 3 are opposite
HEX_DIRS = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)]


def _dir_table(coords, deltas):
    index = {tuple(c): i for i, c in enumerate(coords)}
    table = np.full((len(coords), len(deltas)), -1, dtype=np.int32)
    for i, (x, y) in enumerate(coords):
        for d, (dx, dy) in enumerate(deltas):
            table[i, d] = index.get((x + dx, y + dy), -1)
    return table


def _square(rows, cols):
    # coordinates are (x, y) = (column, row)
    return [(c, r) for r in range(rows) for c in range(cols)]


def _mirror_x(o):
    return (-o[0], o[1])


def _d4():
    def rot(o):
        return (-o[1], o[0])

    out = []
    for k in range(4):
        for flip in (False, True):
            def f(o, k=k, flip=flip):
                if flip:
                    o = _mirror_x(o)
                for _ in range(k):
                    o = rot(o)
                return o
            out.append(f)
    return tuple(out)


def hex_rotate(o):
    """60-degree rotation in axial coordinates."""
    q, r = o
    return (-r, q + r)


def hex_transpose(o):
    return (o[1], o[0])


def _d6():
    out = []
    for k in range(6):
        for flip in (False, True):
            def f(o, k=k, flip=flip):
                if flip:
                    o = hex_transpose(o)
                for _ in range(k):
                    o = hex_rotate(o)
                return o
            out.append(f)
    return tuple(out)


def _identity(o):
    return o


def _rot180(o):
    return (-o[0], -o[1])


def hex_distance(o):
    q, r = o
    return max(abs(q), abs(r), abs(q + r))


class SquareGame(Game):
    def offsets_within(self, radius):
        return [(dx, dy) for dy in range(-radius, radius + 1) for dx in range(-radius, radius + 1)]


class HexGame(Game):
    def offsets_within(self, radius):
        return [(q, r) for r in range(-radius, radius + 1) for q in range(-radius, radius + 1)
                if hex_distance((q, r)) <= radius]


class TicTacToe(SquareGame):
    def __init__(self):
        coords = _square(3, 3)
        super().__init__("tictactoe", K.TICTACTOE, 3, 3, coords, _dir_table(coords, SQUARE_DIRS),
                         win_len=3, max_actions=9, symmetries=_d4())

    def tautology(self):
        return {("to", (0, 0), "empty")}

    def static_outcome(self, state):
        return _line_outcome(self, state)


class Connect4(SquareGame):
    def __init__(self, rows=6, cols=7):
        coords = _square(rows, cols)
        super().__init__("connect4", K.CONNECT4, rows, cols, coords, _dir_table(coords, SQUARE_DIRS),
                         win_len=4, max_actions=cols, symmetries=(_identity, _mirror_x))

    def tautology(self):
        return {("to", (0, 0), "empty")}

    def static_outcome(self, state):
        return _line_outcome(self, state)


class Breakthrough(SquareGame):
    def __init__(self, size=8):
        coords = _square(size, size)
        super().__init__("breakthrough", K.BREAKTHROUGH, size, size, coords,
                         _dir_table(coords, SQUARE_DIRS), max_actions=3 * 2 * size,
                         symmetries=(_identity, _mirror_x), moves_pieces=True)

    def initial_board(self):
        b = np.zeros(self.ncells, dtype=np.int8)
        b[: 2 * self.cols] = 2
        b[-2 * self.cols:] = 1
        return b

    def orient(self, player, offset):
        # features are written with "forward" pointing up the board for either side
        if player == Player.P2:
            return (offset[0], -offset[1])
        return offset

    def tautology(self):
        return {("from", (0, 0), "friend")}

    def static_outcome(self, state):
        cells = state.cells()
        if (cells[: self.cols] == 1).any() or not (cells == 2).any():
            return Outcome(1, -1)
        if (cells[-self.cols:] == 2).any() or not (cells == 1).any():
            return Outcome(-1, 1)
        return super().static_outcome(state)


class Hex(HexGame):
    """Hex on a size x size rhombus, no swap rule.

    The first player connects rows 0 and size-1, the second columns 0 and size-1.
    """

    def __init__(self, size=7):
        if not 2 <= size <= 19:
            raise ValueError("hex size must be in [2, 19]")
        self.size = size
        coords = [(q, r) for r in range(size) for q in range(size)]
        super().__init__("hex", K.HEX, size, size, coords, _dir_table(coords, HEX_DIRS),
                         geometry="hex", max_actions=size * size,
                         symmetries=(_identity, _rot180))

    @property
    def game_id(self):
        return f"hex{self.size}"

    def orient(self, player, offset):
        # transposition maps the second player's goal axis onto the first player's
        if player == Player.P2:
            return hex_transpose(offset)
        return offset

    def tautology(self):
        return {("to", (0, 0), "empty")}

    def render_board(self, cells):
        lines = []
        for r in range(self.size):
            row = " ".join(self.SYMBOLS[cells[r * self.size + q]] for q in range(self.size))
            lines.append(" " * r + row)
        return "\n".join(lines)

    def static_outcome(self, state):
        cells = state.cells()
        for colour in (1, 2):
            axis = 1 if colour == 1 else 0
            for i, c in enumerate(self.coords):
                if cells[i] == colour and c[axis] == 0:
                    seen = np.zeros(self.ncells, dtype=np.bool_)
                    stack = np.zeros(self.ncells + 1, dtype=np.int64)
                    if K._hex_connected(cells, self.kernel[1], self.kernel[2], i, colour, self.size, stack, seen):
                        return Outcome(1, -1) if colour == 1 else Outcome(-1, 1)
        return None


class Yavalath(HexGame):
    """Two-player Yavalath on a side-5 hexagon (61 cells).

    Four in a row wins, three in a row (without four) loses, a full board draws.
    """

    def __init__(self, side=5):
        n = side - 1
        coords = [(q, r) for r in range(-n, n + 1) for q in range(-n, n + 1) if hex_distance((q, r)) <= n]
        self.side = side
        super().__init__("yavalath", K.YAVALATH, 2 * side - 1, 2 * side - 1, coords,
                         _dir_table(coords, HEX_DIRS), geometry="hex", max_actions=len(coords),
                         symmetries=_d6())

    def tautology(self):
        return {("to", (0, 0), "empty")}

    def render_board(self, cells):
        n = self.side - 1
        lines = []
        for r in range(-n, n + 1):
            row = [self.SYMBOLS[cells[self.cell_at((q, r))]] for q in range(-n, n + 1)
                   if hex_distance((q, r)) <= n]
            lines.append(" " * abs(r) + " ".join(row))
        return "\n".join(lines)

    def static_outcome(self, state):
        if (state.cells() == 0).sum() == 0:
            return Outcome(0, 0)
        return None


def _line_outcome(game: Game, state: GameState) -> Optional[Outcome]:
    cells = state.cells()
    for i in range(game.ncells):
        colour = int(cells[i])
        if colour and K._longest_line(cells, game.kernel[1], i, colour) >= game.win_len:
            return Outcome(1, -1) if colour == 1 else Outcome(-1, 1)
    if (cells == 0).sum() == 0:
        return Outcome(0, 0)
    return None
