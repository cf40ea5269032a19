"""Array-backed MCTS kernels.

A tree is two tuples of parallel arrays::

    nodes = (edge0, nedges, visits, status, mover, epoch, board)
    edges = (action, n, w, prior, child)

plus ``count = [n_nodes, n_edges]``. ``w`` sums values from the perspective of
the mover at the edge's parent node. A node's visit count is one for its
creation plus the visits of its outgoing edges.
"""
import math

import numpy as np
from numba import njit

from ..features import action_logit
from ..games.kernels import legal_moves, move_cells, play

PUCT, UCB1 = 0, 1


@njit(cache=True)
def rng_next(state):
    # xorshift64*
    x = state[0]
    x ^= x >> np.uint64(12)
    x ^= x << np.uint64(25)
    x ^= x >> np.uint64(27)
    state[0] = x
    return (x * np.uint64(2685821657736338717)) >> np.uint64(11)


@njit(cache=True)
def rng_uniform(state):
    return rng_next(state) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def rng_below(state, n):
    return int(rng_uniform(state) * n)


@njit(cache=True)
def terminal_value(status, mover):
    if status == 3:
        return 0.0
    return 1.0 if status == mover else -1.0


@njit(cache=True)
def policy_probs(game, feat, board, mover, actions, n, weights, out):
    """Softmax over linear logits of ``actions[:n]`` written to ``out``."""
    zmax = -1e300
    for i in range(n):
        t, s = move_cells(game, board, actions[i])
        z = action_logit(feat, board, mover, t, s, weights)
        out[i] = z
        if z > zmax:
            zmax = z
    total = 0.0
    for i in range(n):
        out[i] = math.exp(out[i] - zmax)
        total += out[i]
    for i in range(n):
        out[i] /= total


@njit(cache=True)
def memo_probs(game, feat, memo, board, mover, actions, n, weights, out):
    """:func:`policy_probs` with logits memoised by the target's neighbourhood contents."""
    hood, logit, known = memo[0], memo[1], memo[2]
    ncells = board.shape[0]
    zmax = -1e300
    for i in range(n):
        t, s = move_cells(game, board, actions[i])
        code = 0
        for j in range(hood.shape[1]):
            c = hood[t, j]
            code = code * 4 + (3 if c == ncells else board[c])
        if known[mover - 1, code]:
            z = logit[mover - 1, code]
        else:
            z = action_logit(feat, board, mover, t, s, weights)
            logit[mover - 1, code] = z
            known[mover - 1, code] = True
        out[i] = z
        if z > zmax:
            zmax = z
    total = 0.0
    for i in range(n):
        out[i] = math.exp(out[i] - zmax)
        total += out[i]
    for i in range(n):
        out[i] /= total


@njit(cache=True)
def playout(game, feat, board, mover, status, weights, use_policy, cap, rng, actions, probs, scratch, memo):
    """Play from ``board`` (modified in place); value for the starting mover.

    ``memo = (neighbourhood, logits, known, enabled)``; when enabled, policy
    logits are memoised by neighbourhood contents (see ``CompiledFeatures.local``).
    """
    use_memo = use_policy and memo[3][0]
    start = mover
    steps = 0
    while status == 0:
        if steps >= cap:
            return 0.0
        n = legal_moves(game, board, mover, actions)
        if use_policy:
            if use_memo:
                memo_probs(game, feat, memo, board, mover, actions, n, weights, probs)
            else:
                policy_probs(game, feat, board, mover, actions, n, weights, probs)
            u = rng_uniform(rng)
            k = n - 1
            acc = 0.0
            for i in range(n):
                acc += probs[i]
                if u < acc:
                    k = i
                    break
        else:
            k = rng_below(rng, n)
        status = play(game, board, mover, actions[k], scratch)
        mover = 3 - mover
        steps += 1
    return terminal_value(status, start)


@njit(cache=True)
def set_priors(game, feat, nodes, edges, node, weights, use_prior, epoch, actions, probs, memo):
    edge0, nedges, visits, status, mover, ep, boards = nodes
    e_action, e_n, e_w, e_p, e_child = edges
    k = nedges[node]
    if use_prior:
        for i in range(k):
            actions[i] = e_action[edge0[node] + i]
        if memo[3][0]:
            memo_probs(game, feat, memo, boards[node], mover[node], actions, k, weights, probs)
        else:
            policy_probs(game, feat, boards[node], mover[node], actions, k, weights, probs)
        for i in range(k):
            e_p[edge0[node] + i] = probs[i]
    else:
        for i in range(k):
            e_p[edge0[node] + i] = 1.0 / k
    ep[node] = epoch


@njit(cache=True)
def new_node(game, feat, nodes, edges, count, board, to_move, node_status,
             weights, use_prior, epoch, actions, probs, memo):
    edge0, nedges, visits, status, mover, ep, boards = nodes
    e_action, e_n, e_w, e_p, e_child = edges
    node = count[0]
    count[0] += 1
    boards[node, :] = board
    status[node] = node_status
    mover[node] = to_move
    visits[node] = 1
    edge0[node] = count[1]
    nedges[node] = 0
    ep[node] = epoch
    if node_status == 0:
        k = legal_moves(game, board, to_move, actions)
        base = count[1]
        for i in range(k):
            e_action[base + i] = actions[i]
            e_n[base + i] = 0
            e_w[base + i] = 0.0
            e_child[base + i] = -1
        count[1] += k
        nedges[node] = k
        set_priors(game, feat, nodes, edges, node, weights, use_prior, epoch, actions, probs, memo)
    return node


@njit(cache=True)
def node_value(nodes, edges, node):
    edge0, nedges, visits = nodes[0], nodes[1], nodes[2]
    e_w = edges[2]
    total_n = visits[node] - 1
    if total_n <= 0:
        return 0.0
    s = 0.0
    for i in range(edge0[node], edge0[node] + nedges[node]):
        s += e_w[i]
    return s / total_n


@njit(cache=True)
def select_edge(n, w, p, lo, hi, c, rule, parent_value, random_ties, rng):
    """Index (relative to ``lo``) of the selected edge among ``lo..hi``."""
    total = 0
    for i in range(lo, hi):
        total += n[i]
    if rule == UCB1:
        for i in range(lo, hi):
            if n[i] == 0:
                return i - lo
        log_total = math.log(total)
    else:
        root_total = math.sqrt(max(total, 1))
    best = -1
    best_score = -1e300
    ties = 0
    for i in range(lo, hi):
        if rule == UCB1:
            score = w[i] / n[i] + c * math.sqrt(log_total / n[i])
        else:
            q = w[i] / n[i] if n[i] > 0 else parent_value
            score = q + c * p[i] * root_total / (1.0 + n[i])
        if score > best_score:
            best_score = score
            best = i
            ties = 1
        elif score == best_score and random_ties:
            ties += 1
            if rng_below(rng, ties) == 0:
                best = i
    return best - lo


@njit(cache=True)
def iterate(game, feat, nodes, edges, count, root, n_iter, c, rule, prior_w, use_prior,
            playout_w, use_policy, cap, epoch, random_ties, rng,
            path, actions, probs, scratch, work, prior_memo, playout_memo):
    """Run ``n_iter`` select/expand/playout/backup iterations from ``root``."""
    edge0, nedges, visits, status, mover, ep, boards = nodes
    e_action, e_n, e_w, e_p, e_child = edges
    for _ in range(n_iter):
        node = root
        depth = 0
        while True:
            if status[node] != 0:
                value = terminal_value(status[node], mover[node])
                visits[node] += 1
                break
            if use_prior and ep[node] != epoch:
                set_priors(game, feat, nodes, edges, node, prior_w, use_prior, epoch, actions, probs, prior_memo)
            lo = edge0[node]
            hi = lo + nedges[node]
            k = select_edge(e_n, e_w, e_p, lo, hi, c, rule, node_value(nodes, edges, node), random_ties, rng)
            visits[node] += 1
            e = lo + k
            path[depth] = e
            depth += 1
            child = e_child[e]
            if child >= 0:
                node = child
                continue
            work[:] = boards[node]
            st = play(game, work, mover[node], e_action[e], scratch)
            child = new_node(game, feat, nodes, edges, count, work, 3 - mover[node], st,
                             prior_w, use_prior, epoch, actions, probs, prior_memo)
            e_child[e] = child
            node = child
            if st != 0:
                value = terminal_value(st, mover[child])
            else:
                work[:] = boards[child]
                value = playout(game, feat, work, mover[child], 0, playout_w, use_policy, cap, rng,
                                actions, probs, scratch, playout_memo)
            break
        # backup: convert the leaf value to each parent's mover perspective
        below = mover[node]
        for d in range(depth - 1, -1, -1):
            e = path[d]
            parent = root if d == 0 else e_child[path[d - 1]]
            if mover[parent] != below:
                value = -value
            e_n[e] += 1
            e_w[e] += value
            below = mover[parent]
    return 0


@njit(cache=True)
def compact(src_nodes, src_edges, root, dst_nodes, dst_edges, dst_count, order):
    """Copy the subtree below ``root`` into empty destination arrays; return new root."""
    s_edge0, s_nedges, s_visits, s_status, s_mover, s_ep, s_boards = src_nodes
    s_action, s_n, s_w, s_p, s_child = src_edges
    d_edge0, d_nedges, d_visits, d_status, d_mover, d_ep, d_boards = dst_nodes
    d_action, d_n, d_w, d_p, d_child = dst_edges
    # breadth-first: order[i] is the source index of destination node i
    order[0] = root
    head = 0
    tail = 1
    while head < tail:
        src = order[head]
        for e in range(s_edge0[src], s_edge0[src] + s_nedges[src]):
            if s_child[e] >= 0:
                order[tail] = s_child[e]
                tail += 1
        head += 1
    n_edges = 0
    next_child = 1
    for i in range(tail):
        src = order[i]
        d_boards[i, :] = s_boards[src]
        d_visits[i] = s_visits[src]
        d_status[i] = s_status[src]
        d_mover[i] = s_mover[src]
        d_ep[i] = s_ep[src]
        d_edge0[i] = n_edges
        d_nedges[i] = s_nedges[src]
        for e in range(s_edge0[src], s_edge0[src] + s_nedges[src]):
            d_action[n_edges] = s_action[e]
            d_n[n_edges] = s_n[e]
            d_w[n_edges] = s_w[e]
            d_p[n_edges] = s_p[e]
            if s_child[e] >= 0:
                d_child[n_edges] = next_child
                next_child += 1
            else:
                d_child[n_edges] = -1
            n_edges += 1
    dst_count[0] = tail
    dst_count[1] = n_edges
    return 0
