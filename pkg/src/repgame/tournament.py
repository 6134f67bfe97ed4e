"""Round-robin tournaments among bounded-memory strategies."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .game import DomainError, StageGame, as_memory2
from .payoff_m1 import batch_payoff_m1
from .payoff_m2 import batch_payoff_m2

RANK_TOL = 1e-9


def competition_ranks(scores, tol: float = RANK_TOL) -> list[int]:
    """1 + number of strictly better scores ("1, 2, 2, 2, 5" style ties)."""
    s = np.asarray(scores, dtype=float)
    return [int(1 + np.sum(s > v + tol)) for v in s]


@dataclass
class TournamentResult:
    names: list
    strategies: list
    matrix: np.ndarray
    include_self: bool = True
    context: dict = field(default_factory=dict)

    @property
    def row_sums(self) -> np.ndarray:
        m = self.matrix
        if self.include_self:
            return m.sum(axis=1)
        return m.sum(axis=1) - np.diag(m)

    @property
    def ranks(self) -> list[int]:
        return competition_ranks(self.row_sums)

    def row(self, name) -> np.ndarray:
        return self.matrix[self.names.index(name)]

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "matrix": self.matrix.tolist(),
            "row_sums": self.row_sums.tolist(),
            "ranks": self.ranks,
            "include_self": self.include_self,
            **self.context,
        }


def run_tournament(roster, g: StageGame, w: float, include_self: bool = True) -> TournamentResult:
    """Every pairing of a roster; roster is a list of (name, strategy) pairs.

    Mixed memory-1/memory-2 rosters are lifted to memory-2.  The limit of
    means (w = 0) is available for memory-1 rosters only.
    """
    roster = list(roster)
    if not roster:
        raise DomainError("empty roster")
    names = [n for n, _ in roster]
    strategies = [s for _, s in roster]
    k = len(roster)
    I, J = np.divmod(np.arange(k * k), k)
    if all(s.memory == 1 for s in strategies):
        rows = np.array([s.as_tuple() for s in strategies])
        values = batch_payoff_m1(rows[I], rows[J], g, w)
    else:
        if w == 0:
            raise DomainError("memory-2 payoffs need w > 0")
        rows = np.array([as_memory2(s).as_tuple() for s in strategies])
        values = batch_payoff_m2(rows[I], rows[J], g, w)
    return TournamentResult(names, strategies, values.reshape(k, k), include_self,
                            {"game": str(g), "w": w})


def aggregate_tournaments(results) -> TournamentResult:
    results = list(results)
    if not results:
        raise DomainError("nothing to aggregate")
    first = results[0]
    for r in results[1:]:
        if r.names != first.names:
            raise DomainError(f"roster mismatch: {r.names} vs {first.names}")
        if r.include_self != first.include_self:
            raise DomainError("cannot mix tournaments with and without self-play")
    total = sum(r.matrix for r in results)
    return TournamentResult(list(first.names), list(first.strategies), total, first.include_self,
                            {"aggregated": len(results)})
