"""Numba rule kernels shared by the Python game API and the search engine.

Every game is a flat array of cells (0 empty, 1 first player, 2 second player)
plus a static geometry tuple ``(params, dirs, coords)``:

* ``params``: int64 ``[kind, ncells, rows, cols, win_len]``
* ``dirs``: int32 ``[ncells, ndir]`` neighbour in each direction or -1; direction
  ``d`` and ``d + ndir // 2`` are opposite.
* ``coords``: int32 ``[ncells, 2]`` game-specific coordinates.

Status codes returned by :func:`play`: 0 ongoing, 1/2 winner, 3 draw.
"""
import numpy as np
from numba import njit

TICTACTOE, CONNECT4, BREAKTHROUGH, HEX, YAVALATH = 0, 1, 2, 3, 4

ONGOING, P1_WIN, P2_WIN, DRAW = 0, 1, 2, 3


@njit(cache=True)
def run_length(board, dirs, cell, d, colour):
    n = 0
    c = dirs[cell, d]
    while c >= 0 and board[c] == colour:
        n += 1
        c = dirs[c, d]
    return n


@njit(cache=True)
def _longest_line(board, dirs, cell, colour):
    half = dirs.shape[1] // 2
    best = 0
    for d in range(half):
        n = 1 + run_length(board, dirs, cell, d, colour) + run_length(board, dirs, cell, d + half, colour)
        if n > best:
            best = n
    return best


@njit(cache=True)
def _board_full(board):
    for i in range(board.shape[0]):
        if board[i] == 0:
            return False
    return True


@njit(cache=True)
def _bt_forward(mover):
    # row delta for breakthrough pawns; first player starts at the bottom
    return -1 if mover == 1 else 1


@njit(cache=True)
def legal_moves(game, board, mover, out):
    """Write legal action codes in canonical order into ``out``; return the count."""
    params, dirs, coords = game
    kind = params[0]
    ncells = params[1]
    n = 0
    if kind == CONNECT4:
        cols = params[3]
        for c in range(cols):
            if board[c] == 0:
                out[n] = c
                n += 1
    elif kind == BREAKTHROUGH:
        rows = params[2]
        cols = params[3]
        fwd = _bt_forward(mover)
        for src in range(ncells):
            if board[src] != mover:
                continue
            r = src // cols + fwd
            if r < 0 or r >= rows:
                continue
            c0 = src % cols
            for dc in range(-1, 2):
                c = c0 + dc
                if c < 0 or c >= cols:
                    continue
                dst = r * cols + c
                v = board[dst]
                if v == mover:
                    continue
                if dc == 0 and v != 0:
                    continue
                out[n] = src * ncells + dst
                n += 1
    else:
        for c in range(ncells):
            if board[c] == 0:
                out[n] = c
                n += 1
    return n


@njit(cache=True)
def move_cells(game, board, action):
    """Return ``(target, source)`` cells of an action; source is -1 for placements."""
    params = game[0]
    kind = params[0]
    if kind == CONNECT4:
        cols = params[3]
        rows = params[2]
        r = rows - 1
        while r >= 0 and board[r * cols + action] != 0:
            r -= 1
        return r * cols + action, -1
    if kind == BREAKTHROUGH:
        ncells = params[1]
        return action % ncells, action // ncells
    return action, -1


@njit(cache=True)
def _hex_connected(board, dirs, coords, cell, colour, size, stack, seen):
    # first player joins rows 0 and size-1, second player columns 0 and size-1
    axis = 1 if colour == 1 else 0
    for i in range(seen.shape[0]):
        seen[i] = False
    top = 0
    stack[top] = cell
    top += 1
    seen[cell] = True
    lo = False
    hi = False
    while top > 0:
        top -= 1
        c = stack[top]
        k = coords[c, axis]
        if k == 0:
            lo = True
        if k == size - 1:
            hi = True
        if lo and hi:
            return True
        for d in range(6):
            nb_ = dirs[c, d]
            if nb_ >= 0 and not seen[nb_] and board[nb_] == colour:
                seen[nb_] = True
                stack[top] = nb_
                top += 1
    return False


@njit(cache=True)
def play(game, board, mover, action, scratch):
    """Apply ``action`` for ``mover`` in place and return the resulting status.

    ``scratch`` is an int64 work buffer of at least ``ncells`` entries.
    """
    params, dirs, coords = game
    kind = params[0]
    other = 3 - mover
    target, source = move_cells(game, board, action)
    board[target] = mover
    if source >= 0:
        board[source] = 0
    if kind == TICTACTOE or kind == CONNECT4:
        if _longest_line(board, dirs, target, mover) >= params[4]:
            return mover
        if _board_full(board):
            return DRAW
        return ONGOING
    if kind == YAVALATH:
        half = dirs.shape[1] // 2
        three = False
        for d in range(half):
            n = 1 + run_length(board, dirs, target, d, mover) + run_length(board, dirs, target, d + half, mover)
            if n >= 4:
                return mover
            if n == 3:
                three = True
        if three:
            return other
        if _board_full(board):
            return DRAW
        return ONGOING
    if kind == HEX:
        seen = np.zeros(params[1], dtype=np.bool_)
        if _hex_connected(board, dirs, coords, target, mover, params[2], scratch, seen):
            return mover
        return ONGOING
    # breakthrough
    cols = params[3]
    rows = params[2]
    goal = 0 if mover == 1 else rows - 1
    if target // cols == goal:
        return mover
    alive = False
    for c in range(params[1]):
        if board[c] == other:
            alive = True
            break
    if not alive:
        return mover
    if legal_moves(game, board, other, scratch) == 0:
        return mover
    return ONGOING
