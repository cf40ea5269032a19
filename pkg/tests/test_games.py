import numpy as np
import pytest

from treepg.games import GameError, Outcome, Player, make_game
from treepg.games.boards import hex_distance

from conftest import random_states

LINES3 = [(0, 1, 2), (3, 4, 5), (6, 7, 8), (0, 3, 6), (1, 4, 7), (2, 5, 8), (0, 4, 8), (2, 4, 6)]


def ttt(text, mover="P1"):
    return make_game("tictactoe").from_text(f"tictactoe mover={mover} moves=0\n{text}")


def test_initial_action_counts():
    assert len(make_game("tictactoe").legal_actions(make_game("tictactoe").initial_state())) == 9
    c4 = make_game("connect4")
    assert c4.legal_actions(c4.initial_state()) == list(range(7))


def test_connect4_full_column_removed():
    c4 = make_game("connect4")
    s = c4.initial_state()
    for _ in range(6):
        s = c4.apply(s, 3)
    acts = c4.legal_actions(s)
    assert len(acts) == 6 and 3 not in acts


def test_tictactoe_line_wins():
    s = ttt("X X .\nO O .\n. . .")
    after = s.game.apply(s, 2)
    assert after.terminal and after.outcome == Outcome(1, -1)


def test_tictactoe_draw_and_nonterminal():
    g = make_game("tictactoe")
    s = ttt("X O X\nX O O\nO X .")
    after = g.apply(s, 8)
    assert after.outcome == Outcome(0, 0)
    assert g.outcome(g.initial_state()) is None


def _yavalath(stones, mover=Player.P1):
    g = make_game("yavalath")
    board = np.zeros(g.ncells, dtype=np.int8)
    for coord, colour in stones.items():
        board[g.cell_at(coord)] = colour
    from treepg.games import GameState
    return g, GameState(g, board.tobytes(), mover, len(stones), None)


def test_yavalath_three_loses():
    g, s = _yavalath({(-1, 0): 1, (0, 0): 1, (2, 2): 2, (-3, 1): 2})
    after = g.apply(s, g.cell_at((1, 0)))
    assert after.outcome == Outcome(-1, 1)


def test_yavalath_four_wins():
    g, s = _yavalath({(-2, 0): 1, (-1, 0): 1, (1, 0): 1, (2, 2): 2, (-3, 1): 2, (0, 3): 2})
    after = g.apply(s, g.cell_at((0, 0)))
    assert after.outcome == Outcome(1, -1)


def test_yavalath_four_beats_simultaneous_three():
    # (0,0) completes a four along q and a three along r at once
    g, s = _yavalath({(-2, 0): 1, (-1, 0): 1, (1, 0): 1, (0, 1): 1, (0, 2): 1,
                      (3, -3): 2, (-3, 3): 2, (4, -1): 2, (-4, 1): 2, (2, 2): 2})
    after = g.apply(s, g.cell_at((0, 0)))
    assert after.outcome == Outcome(1, -1)


def test_yavalath_second_player_loses_on_three():
    g, s = _yavalath({(-1, 0): 2, (0, 0): 2, (2, 2): 1, (-3, 1): 1, (3, -3): 1}, mover=Player.P2)
    after = g.apply(s, g.cell_at((1, 0)))
    assert after.outcome == Outcome(1, -1)


def test_yavalath_board_geometry():
    g = make_game("yavalath")
    assert g.ncells == 61
    assert all(hex_distance(c) <= 4 for c in g.coords)


def test_hex_first_player_connects_rows():
    g = make_game("hex", hex_size=5)
    s = g.initial_state()
    moves = [(2, 0), (0, 0), (2, 1), (0, 1), (2, 2), (0, 2), (2, 3), (0, 3)]
    for q, r in moves:
        s = g.apply(s, g.cell_at((q, r)))
    assert not s.terminal
    s = g.apply(s, g.cell_at((2, 4)))
    assert s.outcome == Outcome(1, -1)


def test_hex_second_player_connects_columns():
    g = make_game("hex", hex_size=5)
    s = g.initial_state()
    moves = [(0, 0), (0, 2), (1, 0), (1, 2), (2, 0), (2, 2), (3, 1), (3, 2), (4, 4), (4, 2)]
    for q, r in moves:
        s = g.apply(s, g.cell_at((q, r)))
    assert s.outcome == Outcome(-1, 1)


def test_hex_size_bounds():
    assert make_game("hex", hex_size=11).ncells == 121
    assert make_game("hex11").game_id == "hex11"
    with pytest.raises(ValueError):
        make_game("hex", hex_size=4)


def test_breakthrough_capture_and_goal():
    g = make_game("breakthrough")
    s = g.from_text("breakthrough mover=P1 moves=10\n"
                    ". . . . . . . .\n"
                    ". . O . . . . .\n"
                    ". X . . . . . .\n"
                    ". . . . . . . .\n"
                    ". . . . . . . .\n"
                    ". . . . . O . .\n"
                    ". . . . . . . .\n"
                    ". . . . . . . .")
    src = g.cell_at((1, 2))
    capture = src * 64 + g.cell_at((2, 1))
    straight = src * 64 + g.cell_at((1, 1))
    acts = g.legal_actions(s)
    assert capture in acts and straight in acts and src * 64 + g.cell_at((0, 1)) in acts
    s2 = g.apply(s, capture)
    assert s2.cells()[g.cell_at((2, 1))] == 1 and s2.cells()[src] == 0
    s3 = g.apply(g.apply(s2, g.legal_actions(s2)[0]), g.cell_at((2, 1)) * 64 + g.cell_at((2, 0)))
    assert s3.outcome == Outcome(1, -1)


def test_breakthrough_straight_blocked():
    g = make_game("breakthrough")
    s = g.from_text("breakthrough mover=P1 moves=0\n" + ". . . . . . . .\n" * 4
                    + ". . . O . . . .\n. . . X . . . .\n" + ". . . . . . . .\n" * 2)
    src = g.cell_at((3, 5))
    assert src * 64 + g.cell_at((3, 4)) not in g.legal_actions(s)


def test_illegal_action_and_terminal_state_errors():
    g = make_game("connect4")
    s = g.initial_state()
    with pytest.raises(GameError):
        g.apply(s, 7)
    t = ttt("X X X\nO O .\n. . .", mover="P2")
    assert t.terminal
    with pytest.raises(GameError):
        t.game.legal_actions(t)


def test_random_play_invariants(any_game):
    rng = np.random.default_rng(7)
    states = random_states(any_game, 10_000, rng)
    assert len(states) >= 10_000
    checked = 0
    for s in states[:: max(1, len(states) // 600)]:
        if s.terminal:
            u = s.outcome
            assert u.utility_p1 == -u.utility_p2 and u.utility_p1 in (-1, 0, 1)
            continue
        acts = any_game.legal_actions(s)
        assert acts and len(set(acts)) == len(acts)
        for a in acts:
            nxt = any_game.apply(s, a)
            assert nxt.mover == s.mover.opponent and nxt.move_count == s.move_count + 1
            checked += 1
    assert checked > 0
    for s in states:
        if s.terminal:
            assert s.outcome.utility_p1 == -s.outcome.utility_p2


def test_hex_never_draws():
    g = make_game("hex", hex_size=7)
    rng = np.random.default_rng(3)
    finals = [s for s in random_states(g, 2_000, rng) if s.terminal]
    assert finals and all(s.outcome.utility_p1 != 0 for s in finals)


def test_determinism_and_text_round_trip(any_game):
    rng = np.random.default_rng(11)
    for s in random_states(any_game, 300, rng)[::7]:
        text = any_game.to_text(s)
        back = any_game.from_text(text)
        assert back.board == s.board and back.mover == s.mover
        if not s.terminal:
            a = any_game.legal_actions(s)[0]
            assert any_game.to_text(any_game.apply(s, a)) == any_game.to_text(any_game.apply(s, a))


def _oracle_ttt_result(board):
    for a, b, c in LINES3:
        if board[a] and board[a] == board[b] == board[c]:
            return board[a]
    return 3 if all(board) else 0


def _oracle_c4_result(board):
    rows, cols = 6, 7
    for r in range(rows):
        for c in range(cols):
            v = board[r * cols + c]
            if not v:
                continue
            for dr, dc in ((0, 1), (1, 0), (1, 1), (1, -1)):
                if all(0 <= r + k * dr < rows and 0 <= c + k * dc < cols
                       and board[(r + k * dr) * cols + c + k * dc] == v for k in range(4)):
                    return v
    return 3 if all(board) else 0


@pytest.mark.parametrize("game_id,oracle", [("tictactoe", _oracle_ttt_result), ("connect4", _oracle_c4_result)])
def test_terminal_detection_matches_brute_force(game_id, oracle):
    g = make_game(game_id)
    rng = np.random.default_rng(5)
    for s in random_states(g, 3_000, rng):
        res = oracle(s.cells().tolist())
        expected = {0: None, 1: Outcome(1, -1), 2: Outcome(-1, 1), 3: Outcome(0, 0)}[res]
        assert s.outcome == expected


def test_unknown_game():
    with pytest.raises(ValueError):
        make_game("go")
