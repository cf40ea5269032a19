"""Two-player, deterministic, perfect-information board games."""
import re

from .base import Game, GameError, GameState, Outcome, Player
from .boards import Breakthrough, Connect4, Hex, TicTacToe, Yavalath

GAME_IDS = ("tictactoe", "connect4", "breakthrough", "hex", "yavalath")

_cache: dict = {}


def make_game(game_id: str, hex_size: int = 7) -> Game:
    """Build a game from its identifier; ``hex11`` style ids carry the Hex size."""
    m = re.fullmatch(r"hex(\d+)", game_id)
    if m:
        game_id, hex_size = "hex", int(m.group(1))
    key = (game_id, hex_size if game_id == "hex" else None)
    if key in _cache:
        return _cache[key]
    if game_id == "tictactoe":
        game = TicTacToe()
    elif game_id == "connect4":
        game = Connect4()
    elif game_id == "breakthrough":
        game = Breakthrough()
    elif game_id == "hex":
        if not 5 <= hex_size <= 11:
            raise ValueError(f"hex size must be between 5 and 11, got {hex_size}")
        game = Hex(hex_size)
    elif game_id == "yavalath":
        game = Yavalath()
    else:
        raise ValueError(f"unknown game {game_id!r}; expected one of {', '.join(GAME_IDS)}")
    _cache[key] = game
    return game


__all__ = ["Game", "GameError", "GameState", "Outcome", "Player", "make_game", "GAME_IDS",
           "TicTacToe", "Connect4", "Breakthrough", "Hex", "Yavalath"]
