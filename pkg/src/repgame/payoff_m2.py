"""Exact payoffs between memory-2 strategies.

The chain has 16 states (o_-1, o_-2) with flat index 4*o_-1 + o_-2, seen
from player 1 (q).  Player 2 (p) reads the same history with both outcomes
swapped.  States encode two rounds, so the chain starts at round two; round
one is accounted separately:

    pi = w <d1, g> + (1 - w) < w v0 (I - (1 - w) M)^{-1}, G >

where d1 is the round-one outcome distribution, v0 the distribution of the
state after round two, and G pays the payoff of o_-1 in each state.  With
this convention the payoff of lifted memory-1 strategies equals the
memory-1 payoff exactly.
"""

from __future__ import annotations

import numpy as np

from .game import SWAP, Memory2Strategy, StageGame, as_memory2
from .linalg import discounted_occupation

# state index -> (o_-1, o_-2)
_O1 = np.repeat(np.arange(4), 4)
_O2 = np.tile(np.arange(4), 4)
# the co-player's view of each state
_SWAPPED_STATE = np.array([4 * SWAP[a] + SWAP[b] for a, b in zip(_O1, _O2)])


def _joint(x, y):
    return np.stack([x * y, x * (1 - y), (1 - x) * y, (1 - x) * (1 - y)], axis=-1)


def _rows(x) -> np.ndarray:
    if isinstance(x, Memory2Strategy) or hasattr(x, "memory"):
        x = as_memory2(x).as_tuple()
    return np.atleast_2d(np.asarray(x, dtype=float))


def batch_chain_m2(Q, P):
    """Round-one distribution, initial state distribution and transition stack."""
    Q, P = np.broadcast_arrays(_rows(Q), _rows(P))
    N = len(Q)
    d1 = _joint(Q[:, 0], P[:, 0])
    r2 = _joint(Q[:, 1:5], P[:, 1 + np.array(SWAP)])           # (N, o1, o2)
    v0 = (r2 * d1[:, :, None]).transpose(0, 2, 1).reshape(N, 16)   # state (o2, o1)
    h = _joint(Q[:, 5:], P[:, 5 + _SWAPPED_STATE])             # (N, state, o_new)
    M = np.zeros((N, 16, 16))
    for s in range(16):
        o1 = _O1[s]
        M[:, s, 4 * np.arange(4) + o1] = h[:, s, :]
    return d1, v0, M


def initial_distribution_m2(q, p) -> np.ndarray:
    return batch_chain_m2(q, p)[1][0]


def transition_matrix_m2(q, p) -> np.ndarray:
    return batch_chain_m2(q, p)[2][0]


def round_one_distribution(q, p) -> np.ndarray:
    return batch_chain_m2(q, p)[0][0]


def collapse(gv) -> np.ndarray:
    """Per-state payoff: the payoff of the most recent outcome."""
    return np.asarray(gv, dtype=float)[_O1]


def payoff_m2(q, p, g: StageGame, w: float) -> float:
    if not 0 < w <= 1:
        raise ValueError(f"stopping probability must be in (0, 1], got {w}")
    d1, v0, M = (x[0] for x in batch_chain_m2(q, p))
    gv = g.payoff_vector()
    first = float(d1 @ gv)
    if w == 1:
        return first
    v = discounted_occupation(v0[None], M[None], w)[0]
    return w * first + (1 - w) * float(v @ collapse(gv))


def batch_payoff_m2(Q, P, g: StageGame, w: float) -> np.ndarray:
    if not 0 < w <= 1:
        raise ValueError(f"stopping probability must be in (0, 1], got {w}")
    d1, v0, M = batch_chain_m2(Q, P)
    gv = g.payoff_vector()
    first = d1 @ gv
    if w == 1:
        return first
    v = discounted_occupation(v0, M, w)
    return w * first + (1 - w) * (v @ collapse(gv))
