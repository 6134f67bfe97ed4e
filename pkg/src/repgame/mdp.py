"""Best responses to a fixed strategy by policy iteration.

Against a fixed memory-n strategy sigma, the deviant faces a Markov decision
process whose states are the histories sigma conditions on (start, the
round-two states for memory-2, and the last one or two outcomes).  A
deterministic stationary policy on these states is exactly a deterministic
memory-n strategy, so the optimum equals the maximum over the deviants that
the enumeration scans.

Values are kept in per-round units: U(s) = w * (expected discounted reward
from s).  Policies are evaluated with the cancellation-free solver, so the
method is accurate even at w = 1e-10.
"""

from __future__ import annotations

import numpy as np

from .game import SWAP, Memory1Strategy, Memory2Strategy, StageGame, as_memory2
from .linalg import discounted_occupation

IMPROVE_EPS = 1e-14


def _layout(sigma):
    """States, sigma's cooperation prob in each, and the successor map.

    succ[s][o] is the state reached after outcome o (deviant's view) in s.
    """
    if sigma.memory == 1:
        coop = [sigma.p0] + [sigma.entries[SWAP[o]] for o in range(4)]
        succ = [[1 + o for o in range(4)] for _ in range(5)]
        return np.array(coop), np.array(succ)
    s2 = as_memory2(sigma)
    coop = [s2.p0] + [s2.r2[SWAP[o]] for o in range(4)]
    coop += [s2.h2[4 * SWAP[a] + SWAP[b]] for a in range(4) for b in range(4)]
    succ = [[1 + o for o in range(4)]]                         # start -> round-two state
    succ += [[5 + 4 * o + o1 for o in range(4)] for o1 in range(4)]
    succ += [[5 + 4 * o + a for o in range(4)] for a in range(4) for _ in range(4)]
    return np.array(coop), np.array(succ)


def _policy_to_strategy(policy, memory):
    vals = [float(a == 0) for a in policy]   # action 0 is L
    if memory == 1:
        return Memory1Strategy.from_sequence(vals)
    return Memory2Strategy.from_sequence(vals)


def best_response(sigma, g: StageGame, w: float, objective: str = "payoff", max_iter: int = 200):
    """Deterministic same-memory strategy maximizing the objective against sigma.

    objective "payoff" maximizes pi(dev, sigma); "difference" maximizes
    pi(dev, sigma) - pi(sigma, dev), which decides the rival property.
    Returns (strategy, value).
    """
    if not 0 < w <= 1:
        raise ValueError("best responses are computed for w in (0, 1]")
    gv = g.payoff_vector()
    reward = gv if objective == "payoff" else gv - gv[list(SWAP)]
    coop, succ = _layout(sigma)
    n = len(coop)
    # outcome probabilities and rewards for each (state, action)
    # action 0 = L, 1 = R; outcome = 2 * action + (co-player defects)
    P = np.zeros((n, 2, n))
    r = np.zeros((n, 2))
    for s in range(n):
        for a in range(2):
            for b, pb in ((0, coop[s]), (1, 1 - coop[s])):
                o = 2 * a + b
                P[s, a, succ[s][o]] += pb
                r[s, a] += pb * reward[o]
    beta = 1.0 - w
    policy = np.zeros(n, dtype=int)
    U = None
    for _ in range(max_iter):
        Pp = P[np.arange(n), policy]
        rp = r[np.arange(n), policy]
        if w == 1:
            U = rp.copy()
        else:
            occ = discounted_occupation(np.eye(n), np.broadcast_to(Pp, (n, n, n)).copy(), w)
            U = occ @ rp
        Q = w * r + beta * P @ U
        best = Q.argmax(axis=1)
        gain = Q[np.arange(n), best] - Q[np.arange(n), policy]
        change = gain > IMPROVE_EPS * max(1.0, float(np.abs(U).max()))
        if not change.any():
            break
        policy = np.where(change, best, policy)
    return _policy_to_strategy(policy, sigma.memory), float(U[0])
