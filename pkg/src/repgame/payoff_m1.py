"""Exact payoffs between memory-1 strategies.

Player 1 uses q, player 2 uses p; states are last-round outcomes seen from
player 1 (LL, LR, RL, RR).  Player 2 sees each outcome swapped, so row LR of
the transition matrix uses q's entry for LR and p's entry for RL.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse.csgraph import connected_components

from .game import SWAP, Memory1Strategy, StageGame
from .linalg import discounted_occupation

EDGE_EPS = 1e-15


def _joint(x, y):
    """Outcome distribution when player 1 cooperates w.p. x and player 2 w.p. y."""
    return np.array([x * y, x * (1 - y), (1 - x) * y, (1 - x) * (1 - y)])


def initial_distribution_m1(q: Memory1Strategy, p: Memory1Strategy) -> np.ndarray:
    return _joint(q.p0, p.p0)


def transition_matrix_m1(q: Memory1Strategy, p: Memory1Strategy) -> np.ndarray:
    qe, pe = q.entries, p.entries
    return np.array([_joint(qe[o], pe[SWAP[o]]) for o in range(4)])


def payoff_m1(q: Memory1Strategy, p: Memory1Strategy, g: StageGame, w: float) -> float:
    """Player 1's expected per-round payoff when the game stops w.p. w after each round."""
    if not 0 < w <= 1:
        raise ValueError(f"stopping probability must be in (0, 1], got {w}")
    v0 = initial_distribution_m1(q, p)
    gv = g.payoff_vector()
    if w == 1:
        return float(v0 @ gv)
    v = discounted_occupation(v0[None], transition_matrix_m1(q, p)[None], w)[0]
    return float(v @ gv)


def recurrent_classes(M: np.ndarray) -> list[list[int]]:
    """Closed communicating classes of a finite chain, via SCCs of its support graph."""
    support = M > EDGE_EPS
    n, labels = connected_components(support, directed=True, connection="strong")
    classes = []
    for c in range(n):
        members = np.flatnonzero(labels == c)
        outside = np.setdiff1d(np.arange(len(M)), members)
        if not support[np.ix_(members, outside)].any():
            classes.append(members.tolist())
    return classes


def class_stationary(M: np.ndarray, members: list[int]) -> np.ndarray:
    """Time-average distribution inside a closed class (works for periodic classes)."""
    sub = M[np.ix_(members, members)]
    k = len(members)
    A = np.vstack([sub.T - np.eye(k), np.ones(k)])
    b = np.zeros(k + 1)
    b[-1] = 1
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    return pi


def absorption_probabilities(M: np.ndarray, v0: np.ndarray, classes: list[list[int]]) -> np.ndarray:
    """Probability that a chain started from v0 ends up in each closed class."""
    n = len(M)
    recurrent = sorted(i for c in classes for i in c)
    transient = [i for i in range(n) if i not in recurrent]
    probs = np.array([v0[c].sum() for c in classes], dtype=float)
    if transient:
        Q = M[np.ix_(transient, transient)]
        R = np.column_stack([M[np.ix_(transient, c)].sum(axis=1) for c in classes])
        # B[t, k]: probability that transient state t is absorbed into class k
        B = np.linalg.solve(np.eye(len(transient)) - Q, R)
        probs += v0[transient] @ B
    return probs


def limit_distribution(M: np.ndarray, v0: np.ndarray) -> np.ndarray:
    """Long-run average occupation of each state starting from v0."""
    classes = recurrent_classes(M)
    weights = absorption_probabilities(M, v0, classes)
    out = np.zeros(len(M))
    for c, wk in zip(classes, weights):
        out[c] += wk * class_stationary(M, c)
    return out


def payoff_m1_limit(q: Memory1Strategy, p: Memory1Strategy, g: StageGame) -> float:
    """Limit-of-means payoff (w = 0) without execution errors."""
    M = transition_matrix_m1(q, p)
    v0 = initial_distribution_m1(q, p)
    return float(limit_distribution(M, v0) @ g.payoff_vector())


def payoff(q, p, g: StageGame, w: float) -> float:
    """payoff_m1 for w > 0, the limit of means for w == 0."""
    if w == 0:
        return payoff_m1_limit(q, p, g)
    return payoff_m1(q, p, g, w)


# -- batched evaluation ------------------------------------------------------
#
# Rows of Q and P are (p0, p_LL, p_LR, p_RL, p_RR); they broadcast against
# each other, so one side may be a single strategy.

def _as_rows(x) -> np.ndarray:
    if isinstance(x, Memory1Strategy):
        x = x.as_tuple()
    return np.atleast_2d(np.asarray(x, dtype=float))


def _joint_batch(x, y):
    return np.stack([x * y, x * (1 - y), (1 - x) * y, (1 - x) * (1 - y)], axis=-1)


def batch_chain(Q, P):
    Q, P = np.broadcast_arrays(_as_rows(Q), _as_rows(P))
    v0 = _joint_batch(Q[:, 0], P[:, 0])
    M = np.stack([_joint_batch(Q[:, 1 + o], P[:, 1 + SWAP[o]]) for o in range(4)], axis=1)
    return v0, M


def batch_payoff_m1(Q, P, g: StageGame, w: float) -> np.ndarray:
    """Payoffs of each row of Q against the matching row of P."""
    v0, M = batch_chain(Q, P)
    return _batch_payoff(v0, M, g.payoff_vector(), w)


def _batch_payoff(v0, M, gv, w):
    if w == 0:
        return batch_limit(v0, M) @ gv
    if not 0 < w <= 1:
        raise ValueError(f"stopping probability must be in [0, 1], got {w}")
    if w == 1:
        return v0 @ gv
    return discounted_occupation(v0, M, w) @ gv


def batch_limit(v0, M) -> np.ndarray:
    """Limit-of-means occupation for a stack of chains.

    Chains are grouped by support pattern; within a group the class
    structure is shared, so every group is handled with stacked solves.
    """
    N, n, _ = M.shape
    support = M > EDGE_EPS
    keys = np.packbits(support.reshape(N, -1), axis=1)
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    out = np.zeros((N, n))
    for k in range(inverse.max() + 1):
        idx = np.flatnonzero(inverse == k)
        out[idx] = _group_limit(v0[idx], M[idx], support[idx[0]])
    return out


def _group_limit(v0, M, support):
    G, n, _ = M.shape
    classes = recurrent_classes(support.astype(float))
    recurrent = sorted(i for c in classes for i in c)
    transient = [i for i in range(n) if i not in recurrent]
    weights = np.stack([v0[:, c].sum(axis=1) for c in classes], axis=1)
    if transient:
        Qt = M[:, transient][:, :, transient]
        R = np.stack([M[:, transient][:, :, c].sum(axis=2) for c in classes], axis=2)
        B = np.linalg.solve(np.eye(len(transient)) - Qt, R)
        weights = weights + np.einsum("gt,gtc->gc", v0[:, transient], B)
    out = np.zeros((G, n))
    for j, c in enumerate(classes):
        k = len(c)
        A = np.swapaxes(M[:, c][:, :, c], 1, 2) - np.eye(k)
        A[:, -1, :] = 1.0
        b = np.zeros(k)
        b[-1] = 1.0
        pi = np.linalg.solve(A, np.broadcast_to(b, (G, k))[..., None])[..., 0]
        out[:, c] += weights[:, j:j + 1] * pi
    return out
