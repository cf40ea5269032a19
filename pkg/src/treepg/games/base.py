from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import kernels as K


class GameError(ValueError):
    """Raised when a game contract is violated (illegal move, terminal state)."""


class Player(enum.IntEnum):
    P1 = 1
    P2 = 2

    @property
    def opponent(self) -> "Player":
        return Player(3 - self)


class Outcome(NamedTuple):
    utility_p1: int
    utility_p2: int

    def utility(self, player: int) -> int:
        return self.utility_p1 if player == Player.P1 else self.utility_p2


def outcome_from_status(status: int) -> Optional[Outcome]:
    if status == K.P1_WIN:
        return Outcome(1, -1)
    if status == K.P2_WIN:
        return Outcome(-1, 1)
    if status == K.DRAW:
        return Outcome(0, 0)
    return None


def status_from_outcome(outcome: Optional[Outcome]) -> int:
    if outcome is None:
        return K.ONGOING
    if outcome.utility_p1 > 0:
        return K.P1_WIN
    if outcome.utility_p2 > 0:
        return K.P2_WIN
    return K.DRAW


Offset = tuple[int, int]


@dataclass(frozen=True, eq=False)
class GameState:
    """Immutable position. ``board`` holds one byte per cell."""

    game: "Game"
    board: bytes
    mover: Player
    move_count: int = 0
    outcome: Optional[Outcome] = None

    @property
    def terminal(self) -> bool:
        return self.outcome is not None

    def cells(self) -> np.ndarray:
        return np.frombuffer(self.board, dtype=np.int8)

    def key(self) -> tuple:
        return (self.game.name, self.board, int(self.mover), self.move_count, self.outcome)

    def __eq__(self, other):
        return isinstance(other, GameState) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return self.game.to_text(self)


@dataclass(eq=False)
class Game:
    """Static description of a board game plus its rule kernels.

    Subclasses fill in the geometry; all rules run through :mod:`kernels`.
    """

    name: str
    kind: int
    rows: int
    cols: int
    coords: list  # per-cell coordinates used for feature offsets
    dirs: np.ndarray
    win_len: int = 0
    geometry: str = "square"  # or "hex"
    max_actions: int = 0
    symmetries: tuple[Callable[[Offset], Offset], ...] = ()
    moves_pieces: bool = False
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.ncells = len(self.coords)
        self._index = {tuple(c): i for i, c in enumerate(self.coords)}
        params = np.array([self.kind, self.ncells, self.rows, self.cols, self.win_len], dtype=np.int64)
        coords = np.array(self.coords, dtype=np.int32).reshape(self.ncells, 2)
        self.kernel = (params, self.dirs.astype(np.int32), coords)
        self._scratch = np.zeros(max(self.ncells, self.max_actions) + 1, dtype=np.int64)

    # -- config identity ---------------------------------------------------
    @property
    def game_id(self) -> str:
        return self.name

    def __eq__(self, other):
        return isinstance(other, Game) and self.game_id == other.game_id

    def __hash__(self):
        return hash(self.game_id)

    # -- geometry ------------------------------------------------------------
    def cell_at(self, coord: Offset) -> int:
        """Cell index for a coordinate, or -1 when off the board."""
        return self._index.get(tuple(coord), -1)

    def orient(self, player: int, offset: Offset) -> Offset:
        """Map an offset from the mover's frame to board coordinates."""
        return offset

    def offsets_within(self, radius: int) -> list[Offset]:
        raise NotImplementedError

    def tautology(self) -> set:
        """(anchor, offset, content) elements that hold for every legal action."""
        return set()

    # -- rules ---------------------------------------------------------------
    def initial_state(self) -> GameState:
        return GameState(self, bytes(self.initial_board()), Player.P1, 0, None)

    def initial_board(self) -> np.ndarray:
        return np.zeros(self.ncells, dtype=np.int8)

    def legal_actions(self, state: GameState) -> list[int]:
        if state.terminal:
            raise GameError(f"{self.name}: no legal actions in a terminal state")
        out = np.empty(self.max_actions, dtype=np.int64)
        n = K.legal_moves(self.kernel, state.cells(), int(state.mover), out)
        return out[:n].tolist()

    def apply(self, state: GameState, action: int) -> GameState:
        if state.terminal:
            raise GameError(f"{self.name}: cannot move in a terminal state")
        if action not in self.legal_actions(state):
            raise GameError(f"{self.name}: illegal action {action!r}")
        board = state.cells().copy()
        status = K.play(self.kernel, board, int(state.mover), int(action), self._scratch)
        return GameState(self, board.tobytes(), state.mover.opponent, state.move_count + 1, outcome_from_status(status))

    def outcome(self, state: GameState) -> Optional[Outcome]:
        return state.outcome

    def action_cells(self, state: GameState, action: int) -> tuple[int, int]:
        """Target and source cell of an action (source -1 for placements)."""
        t, s = K.move_cells(self.kernel, state.cells(), int(action))
        return int(t), int(s)

    def describe(self, state: GameState, action: int) -> str:
        t, s = self.action_cells(state, action)
        if s >= 0:
            return f"{self.coords[s]}->{self.coords[t]}"
        return str(self.coords[t])

    # -- text form -------------------------------------------------------------
    SYMBOLS = ".XO"

    def to_text(self, state: GameState) -> str:
        head = f"{self.game_id} mover=P{int(state.mover)} moves={state.move_count}"
        return head + "\n" + self.render_board(state.cells()) + "\n"

    def render_board(self, cells: np.ndarray) -> str:
        lines = []
        for r in range(self.rows):
            lines.append(" ".join(self.SYMBOLS[cells[r * self.cols + c]] for c in range(self.cols)))
        return "\n".join(lines)

    def from_text(self, text: str) -> GameState:
        """Parse the diagram written by :meth:`to_text`.

        The terminal status is recomputed only from complete lines/connections
        already present; positions are assumed to be reachable.
        """
        head, *body = text.strip().splitlines()
        fields = dict(tok.split("=") for tok in head.split()[1:])
        symbols = [ch for line in body for ch in line if ch in self.SYMBOLS]
        if len(symbols) != self.ncells:
            raise GameError(f"{self.name}: expected {self.ncells} cells, got {len(symbols)}")
        board = np.array([self.SYMBOLS.index(ch) for ch in symbols], dtype=np.int8)
        mover = Player(int(fields["mover"].lstrip("P")))
        state = GameState(self, board.tobytes(), mover, int(fields.get("moves", 0)), None)
        return GameState(self, state.board, mover, state.move_count, self.static_outcome(state))

    def static_outcome(self, state: GameState) -> Optional[Outcome]:
        """Outcome of a position judged from the board alone (used when parsing)."""
        out = np.empty(self.max_actions, dtype=np.int64)
        if K.legal_moves(self.kernel, state.cells(), int(state.mover), out) == 0:
            return Outcome(0, 0) if self.kind != K.BREAKTHROUGH else outcome_from_status(int(state.mover.opponent))
        return None
