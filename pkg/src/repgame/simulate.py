"""Monte Carlo play of repeated games with geometric length.

Used as an independent oracle for the exact payoff formulas.  A game lasts
T rounds with P(T >= t) = (1 - w)**(t - 1); the expected per-round payoff
equals E[w * total points], so w * total is an unbiased per-game estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import SWAP, StageGame, as_memory2

_SWAP = np.array(SWAP)


@dataclass
class SimulationResult:
    mean: float
    stderr: float
    n_games: int
    mean_rounds: float


def _coop(s, hist1, hist2, t):
    """Cooperation probabilities of strategy s (memory-2 form) for every game.

    hist1 / hist2: last and second-to-last outcomes from s's view.
    """
    if t == 0:
        return np.full(len(hist1), s.p0)
    if t == 1:
        return np.asarray(s.r2)[hist1]
    return np.asarray(s.h2)[4 * hist1 + hist2]


def simulate_games(q, p, g: StageGame, w: float, n_games: int = 10**5, seed: int = 0,
                   max_rounds: int = 100_000) -> SimulationResult:
    """Play n_games independent games of q against p; payoff is player q's."""
    if not 0 < w <= 1:
        raise ValueError("simulation needs w in (0, 1]")
    rng = np.random.default_rng(seed)
    lengths = rng.geometric(w, size=n_games)
    lengths = np.minimum(lengths, max_rounds)
    q2, p2 = as_memory2(q), as_memory2(p)
    gv = g.payoff_vector()
    total = np.zeros(n_games)
    last = np.zeros(n_games, dtype=int)         # outcomes from q's view
    before = np.zeros(n_games, dtype=int)
    for t in range(int(lengths.max())):
        alive = np.flatnonzero(lengths > t)
        l1, l2 = last[alive], before[alive]
        cq = _coop(q2, l1, l2, t)
        cp = _coop(p2, _SWAP[l1], _SWAP[l2], t)
        a = rng.random(len(alive)) >= cq        # True = R
        b = rng.random(len(alive)) >= cp
        o = 2 * a + b
        total[alive] += gv[o]
        before[alive] = l1
        last[alive] = o
    est = w * total
    return SimulationResult(float(est.mean()), float(est.std(ddof=1) / np.sqrt(n_games)),
                            n_games, float(lengths.mean()))
