"""Nash, partner and rival checks, beat percentages and payoff regions.

Deviations only need to be checked against deterministic strategies with
the same memory (Levinsky's lemma): 32 for memory-1, 2**21 for memory-2.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .game import DomainError, Memory1Strategy, Memory2Strategy, StageGame, as_memory2
from .mdp import best_response
from .payoff_m1 import batch_payoff_m1, payoff
from .payoff_m2 import batch_payoff_m2, payoff_m2

DEFAULT_TOL = 1e-9
TOL_FLOOR = 1e-12
DEFAULT_SEED = 20240601
CHUNK = 1 << 15


def deterministic_rows(memory: int, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
    """Entry arrays of deterministic strategies in lexicographic bit order.

    Row k has p0 as the most significant bit, so row 0 is ALLD and the last
    row is ALLC.
    """
    n = {1: 5, 2: 21}.get(memory)
    if n is None:
        raise DomainError(f"memory must be 1 or 2, got {memory}")
    total = 1 << n
    stop = total if stop is None else min(stop, total)
    k = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1)
    return ((k[:, None] >> shifts) & 1).astype(float)


def enumerate_deterministic(memory: int) -> Iterator:
    cls = Memory1Strategy if memory == 1 else Memory2Strategy
    n = 5 if memory == 1 else 21
    for start in range(0, 1 << n, CHUNK):
        for row in deterministic_rows(memory, start, start + CHUNK):
            yield cls.from_sequence(row)


def self_payoff(sigma, g: StageGame, w: float) -> float:
    if sigma.memory == 1:
        return payoff(sigma, sigma, g, w)
    return payoff_m2(sigma, sigma, g, w)


def _check_w(sigma, w):
    if w < 0 or w > 1:
        raise DomainError(f"stopping probability must be in [0, 1], got {w}")
    if sigma.memory == 2 and w == 0:
        raise DomainError("memory-2 strategies are evaluated for w > 0 only")


def effective_tol(tol: float, w: float) -> float:
    """Comparison tolerance actually used at stopping probability w.

    A deviation that only matters in finitely many rounds moves a w > 0
    payoff by O(w), so tol is read in units of one round's weight and scaled
    by w.  The floor stays well above rounding noise in payoffs of order 1.
    """
    if w == 0:
        return tol
    return max(tol * w, TOL_FLOOR)


# -- scanning the deterministic deviants ------------------------------------

@dataclass
class ScanResult:
    best_index: int
    best_payoff: float          # max over deviants of pi(dev, sigma)
    max_gap: float              # max over deviants of pi(dev, sigma) - pi(sigma, dev)
    gap_index: int


def _scan_chunk(args):
    sigma_row, memory, g, w, start, stop, need_gap = args
    rows = deterministic_rows(memory, start, stop)
    fn = batch_payoff_m1 if memory == 1 else batch_payoff_m2
    dev = fn(rows, sigma_row, g, w)
    i = int(dev.argmax())
    if not need_gap:
        return ScanResult(start + i, float(dev[i]), float("nan"), -1)
    gap = dev - fn(sigma_row, rows, g, w)
    j = int(gap.argmax())
    return ScanResult(start + i, float(dev[i]), float(gap[j]), start + j)


def scan_deviants(sigma, g: StageGame, w: float, workers: Optional[int] = None,
                  chunk: int = CHUNK, need_gap: bool = True) -> ScanResult:
    """Evaluate every deterministic same-memory deviant against sigma.

    Memory-2 scans are split into chunks and spread across worker processes;
    the reduction is a max, so the answer does not depend on scheduling.
    With need_gap=False only pi(dev, sigma) is computed (enough for Nash),
    which halves the work.
    """
    _check_w(sigma, w)
    memory = sigma.memory
    row = np.array(sigma.as_tuple() if memory == 1 else as_memory2(sigma).as_tuple())
    total = 1 << (5 if memory == 1 else 21)
    jobs = [(row, memory, g, w, s, min(s + chunk, total), need_gap) for s in range(0, total, chunk)]
    if workers is None:
        workers = 1 if memory == 1 else min(8, os.cpu_count() or 1)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_scan_chunk, jobs))
    else:
        parts = [_scan_chunk(j) for j in jobs]
    best = max(parts, key=lambda r: (r.best_payoff, -r.best_index))
    if not need_gap:
        return ScanResult(best.best_index, best.best_payoff, float("nan"), -1)
    gap = max(parts, key=lambda r: (r.max_gap, -r.gap_index))
    return ScanResult(best.best_index, best.best_payoff, gap.max_gap, gap.gap_index)


def _deviant(memory, index):
    row = deterministic_rows(memory, index, index + 1)[0]
    return (Memory1Strategy if memory == 1 else Memory2Strategy).from_sequence(row)


# -- classification ------------------------------------------------------------

@dataclass
class Classification:
    game: StageGame
    w: float
    is_nash: bool
    is_partner: Optional[bool]
    is_rival: Optional[bool]
    self_payoff: float
    worst_deviation: object
    worst_deviation_payoff: float
    beat_percentage: Optional[float] = None
    tol: float = DEFAULT_TOL
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        from .game import strategy_to_dict
        return {
            "game": str(self.game),
            "w": self.w,
            "is_nash": self.is_nash,
            "is_partner": self.is_partner,
            "is_rival": self.is_rival,
            "beat_percentage": self.beat_percentage,
            "self_payoff": self.self_payoff,
            "worst_deviation": {
                "strategy": strategy_to_dict(self.worst_deviation),
                "payoff": self.worst_deviation_payoff,
            },
            "tol": self.tol,
            "notes": list(self.notes),
        }


def is_nash(sigma, g: StageGame, w: float, tol: float = DEFAULT_TOL, method: str = "enumerate",
            workers: Optional[int] = None):
    """(verdict, worst deviant, its payoff).

    method "enumerate" scans every deterministic deviant; "mdp" computes the
    best response by policy iteration (w > 0 only).
    """
    _check_w(sigma, w)
    own = self_payoff(sigma, g, w)
    tol = effective_tol(tol, w)
    if method == "mdp":
        if w == 0:
            raise DomainError("the MDP route needs w > 0")
        dev, _ = best_response(sigma, g, w)
        val = payoff(dev, sigma, g, w) if sigma.memory == 1 else payoff_m2(dev, sigma, g, w)
        return val <= own + tol, dev, val
    if method != "enumerate":
        raise DomainError(f"unknown method {method!r}")
    scan = scan_deviants(sigma, g, w, workers, need_gap=False)
    return scan.best_payoff <= own + tol, _deviant(sigma.memory, scan.best_index), scan.best_payoff


def _require_pd(g: StageGame, require_pd: bool):
    if require_pd and not g.is_prisoners_dilemma():
        raise DomainError(f"{g} is not a Prisoner's Dilemma; partner and rival are undefined "
                          "(pass require_pd=False to evaluate the conditions anyway)")


def is_partner(sigma, g: StageGame, w: float, tol: float = DEFAULT_TOL, require_pd: bool = True,
               workers: Optional[int] = None) -> bool:
    _require_pd(g, require_pd)
    nash, _, _ = is_nash(sigma, g, w, tol, workers=workers)
    return nash and abs(self_payoff(sigma, g, w) - g.a_LL) <= effective_tol(tol, w)


def is_rival(sigma, g: StageGame, w: float, tol: float = DEFAULT_TOL, require_pd: bool = True,
             workers: Optional[int] = None) -> bool:
    _require_pd(g, require_pd)
    return scan_deviants(sigma, g, w, workers).max_gap <= effective_tol(tol, w)


def beat_percentage(sigma: Memory1Strategy, g: StageGame, w: float, n_samples: int = 10**6,
                    seed: int = DEFAULT_SEED, chunk: int = 1 << 17) -> float:
    """Percent of uniform random memory-1 opponents earning strictly more against
    sigma than sigma earns against itself.

    Opponents are drawn with numpy's PCG64 generator seeded by `seed`, five
    i.i.d. U[0, 1) entries each, in chunks (the stream does not depend on
    the chunk size).
    """
    if sigma.memory != 1:
        raise DomainError("beat percentages are defined for memory-1 strategies")
    if n_samples < 1:
        raise DomainError("n_samples must be at least 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    own = payoff(sigma, sigma, g, w)
    row = np.array(sigma.as_tuple())
    beaten = 0
    done = 0
    while done < n_samples:
        k = min(chunk, n_samples - done)
        opp = rng.random((k, 5))
        beaten += int(np.count_nonzero(batch_payoff_m1(opp, row, g, w) > own))
        done += k
    return 100.0 * beaten / n_samples


def classify(sigma, g: StageGame, w: float, tol: float = DEFAULT_TOL, n_samples: int = 10**6,
             seed: int = DEFAULT_SEED, require_pd: bool = True, workers: Optional[int] = None,
             with_beat: bool = True) -> Classification:
    """Full report: one deviant scan answers Nash and rival together."""
    _check_w(sigma, w)
    _require_pd(g, require_pd)
    own = self_payoff(sigma, g, w)
    scan = scan_deviants(sigma, g, w, workers)
    eps = effective_tol(tol, w)
    nash = scan.best_payoff <= own + eps
    out = Classification(
        game=g, w=w, is_nash=nash,
        is_partner=nash and abs(own - g.a_LL) <= eps,
        is_rival=scan.max_gap <= eps,
        self_payoff=own,
        worst_deviation=_deviant(sigma.memory, scan.best_index),
        worst_deviation_payoff=scan.best_payoff,
        tol=tol,
    )
    if not g.is_prisoners_dilemma():
        out.notes.append("game is not a Prisoner's Dilemma; partner/rival conditions evaluated as stated")
    if not nash and with_beat:
        if sigma.memory == 1:
            out.beat_percentage = beat_percentage(sigma, g, w, n_samples, seed)
        else:
            out.notes.append("beat percentage is only defined for memory-1 strategies")
    return out


# -- payoff regions --------------------------------------------------------------

@dataclass
class PayoffRegionSample:
    pairs: np.ndarray           # columns: opponent payoff vs sigma, sigma payoff vs opponent
    opp_range: tuple
    self_range: tuple


def payoff_region(sigma: Memory1Strategy, g: StageGame, w: float, n_samples: int = 10**4,
                  seed: int = DEFAULT_SEED) -> PayoffRegionSample:
    """Payoff pairs of sigma against random opponents plus the 32 deterministic corners."""
    if sigma.memory != 1:
        raise DomainError("payoff regions are sampled for memory-1 strategies")
    rng = np.random.Generator(np.random.PCG64(seed))
    opp = np.vstack([deterministic_rows(1), rng.random((n_samples, 5))])
    row = np.array(sigma.as_tuple())
    theirs = batch_payoff_m1(opp, row, g, w)
    mine = batch_payoff_m1(row, opp, g, w)
    pairs = np.column_stack([theirs, mine])
    return PayoffRegionSample(pairs, (float(theirs.min()), float(theirs.max())),
                              (float(mine.min()), float(mine.max())))
