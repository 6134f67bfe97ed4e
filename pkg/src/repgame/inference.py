"""From per-scenario L counts to estimated strategies, intervals and labels.

Scenario ids follow the entry order of the strategy classes:

* memory-1: R1, LL, LR, RL, RR
* memory-2: R1, then R2:LL .. R2:RR (round two after each round-one outcome),
  then sixteen ids "o1,o2" where o1 is the last outcome and o2 the one
  before it (e.g. "LR,LL": exploited last round, mutual cooperation before).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Optional, Sequence

from .game import (CATALOG, OUTCOMES, DomainError, Memory1Strategy, Memory2Strategy,
                   as_memory2, strategy_from_entries)

Z95 = 1.959964

M1_SCENARIOS = ("R1", "LL", "LR", "RL", "RR")
M2_SCENARIOS = (("R1",) + tuple(f"R2:{o.name}" for o in OUTCOMES)
                + tuple(f"{a.name},{b.name}" for a in OUTCOMES for b in OUTCOMES))

GTFT_MAX_SPREAD = 0.3


def scenarios_for(memory: int) -> tuple:
    if memory == 1:
        return M1_SCENARIOS
    if memory == 2:
        return M2_SCENARIOS
    raise DomainError(f"memory must be 1 or 2, got {memory}")


def round2(x: float) -> str:
    """Two decimals, ties away from zero (how the tables print)."""
    return str(Decimal(repr(float(x))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


# -- Wilson intervals -------------------------------------------------------------

@dataclass(frozen=True)
class WilsonInterval:
    lower: float
    upper: float
    point: float

    def display(self) -> str:
        return f"[{round2(self.lower)}, {round2(self.upper)}]"

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper


def wilson_interval(l_count: int, n: int, z: float = Z95) -> WilsonInterval:
    if n < 1:
        raise DomainError("Wilson interval needs n >= 1")
    if not 0 <= l_count <= n:
        raise DomainError(f"count {l_count} outside [0, {n}]")
    if z <= 0:
        raise DomainError("z must be positive")
    z2 = z * z
    denom = n + z2
    center = (l_count + z2 / 2) / denom
    half = z * math.sqrt(l_count * (n - l_count) / n + z2 / 4) / denom
    point = l_count / n
    # clip, and keep the point inside despite rounding at the ends
    lower = min(max(0.0, center - half), point)
    upper = max(min(1.0, center + half), point)
    return WilsonInterval(lower, upper, point)


# -- counts and inferred strategies -----------------------------------------------

@dataclass
class ScenarioCounts:
    """L counts and trial counts per scenario; unparseable answers kept aside."""
    memory: int
    counts: dict                          # scenario id -> (l_count, n)
    unparseable: dict = field(default_factory=dict)

    def __post_init__(self):
        names = scenarios_for(self.memory)
        missing = [s for s in names if s not in self.counts]
        extra = [s for s in self.counts if s not in names]
        if missing or extra:
            raise DomainError(f"scenario set mismatch: missing {missing}, unexpected {extra}")
        for s, (l, n) in self.counts.items():
            if n < 1 or not 0 <= l <= n:
                raise DomainError(f"bad counts for {s}: {l} of {n}")

    @classmethod
    def from_lists(cls, l_counts: Sequence[int], n: int | Sequence[int] = 50) -> "ScenarioCounts":
        memory = {5: 1, 21: 2}.get(len(l_counts))
        if memory is None:
            raise DomainError(f"expected 5 or 21 counts, got {len(l_counts)}")
        ns = [n] * len(l_counts) if isinstance(n, int) else list(n)
        return cls(memory, {s: (int(l), int(k)) for s, l, k in zip(scenarios_for(memory), l_counts, ns)})

    def ordered(self) -> list:
        return [self.counts[s] for s in scenarios_for(self.memory)]

    def to_dict(self) -> dict:
        return {
            "memory": self.memory,
            "scenarios": {s: {"l": l, "n": n, "unparseable": self.unparseable.get(s, 0)}
                          for s, (l, n) in zip(scenarios_for(self.memory), self.ordered())},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ScenarioCounts":
        sc = d["scenarios"]
        return cls(int(d["memory"]), {s: (int(v["l"]), int(v["n"])) for s, v in sc.items()},
                   {s: int(v.get("unparseable", 0)) for s, v in sc.items() if v.get("unparseable")})


@dataclass(frozen=True)
class Label:
    name: str
    approx: bool

    def __str__(self):
        # bitstring labels are printed bare, as in the published tables
        if self.approx and self.name in CATALOG:
            return "~" + self.name
        return self.name


@dataclass
class InferredStrategy:
    strategy: object
    intervals: list
    label: Label
    counts: Optional[ScenarioCounts] = None

    def row(self) -> list:
        """Table cells: 'mean [lo, hi]' per entry, then the label."""
        return [f"{round2(iv.point)} {iv.display()}" for iv in self.intervals] + [str(self.label)]


def infer_strategy(counts: ScenarioCounts, z: float = Z95) -> InferredStrategy:
    pairs = counts.ordered()
    entries = [l / n for l, n in pairs]
    strategy = strategy_from_entries(entries)
    intervals = [wilson_interval(l, n, z) for l, n in pairs]
    return InferredStrategy(strategy, intervals, label_strategy(strategy), counts)


# -- labels -----------------------------------------------------------------------

def _pure(v: float) -> float:
    return 1.0 if v >= 0.5 else 0.0


def _is_gtft(e) -> bool:
    p0, pll, plr, prl, prr = e
    if min(p0, pll, prl) < 0.5:
        return False
    if not (0 < plr < 1 and 0 < prr < 1):
        return False
    q = (plr + prr) / 2
    return q <= 0.5 and abs(plr - prr) <= GTFT_MAX_SPREAD + 1e-9


def label_strategy(s) -> Label:
    """Nearest catalog name for a strategy, with an approximation flag.

    Entries are rounded at 0.5 (ties up) and the pure profile is looked up
    in the catalog.  GTFT is recognized before rounding: cooperative after
    LL and RL and in round one, with both forgiveness entries strictly
    between 0 and 1, averaging at most 0.5 and within 0.3 of each other.
    Without a catalog match the label is the bitstring of the pure profile.
    """
    e = s.as_tuple()
    if s.memory == 1 and _is_gtft(e):
        exact = e[0] == e[1] == e[3] == 1.0 and e[2] == e[4]
        return Label("GTFT", not exact)
    pure = tuple(_pure(v) for v in e)
    approx = any(v not in (0.0, 1.0) for v in e)
    for name, ns in CATALOG.items():
        if ns.slots:
            continue
        pattern = ns.pattern
        if s.memory == 2:
            pattern = as_memory2(pattern)
        elif pattern.memory != 1:
            continue
        if pattern.as_tuple() == pure:
            return Label(name, approx)
    return Label("".join(str(int(v)) for v in pure), approx)


def label_agreement(rows) -> tuple:
    """rows: iterable of (key, strategy, printed label).

    Returns (agreeing count, total, list of (key, printed, ours)) so that
    disagreements are reported rather than hidden.
    """
    agree, total, diffs = 0, 0, []
    for key, strategy, printed in rows:
        ours = str(label_strategy(strategy))
        total += 1
        if ours == printed:
            agree += 1
        else:
            diffs.append((key, printed, ours))
    return agree, total, diffs


# -- output -----------------------------------------------------------------------

def strategy_table_csv(rows: Mapping[str, InferredStrategy]) -> str:
    """CSV in the layout of the published strategy tables (one row per agent)."""
    rows = dict(rows)
    memory = next(iter(rows.values())).strategy.memory if rows else 1
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["agent", *scenarios_for(memory), "label"])
    for name, inf in rows.items():
        w.writerow([name, *inf.row()])
    return buf.getvalue()
