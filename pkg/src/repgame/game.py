"""Stage games, outcomes, bounded-memory strategies and the named-strategy catalog.

Conventions used everywhere in the package:

* Actions are L (cooperate) and R (defect). C/D are accepted as aliases.
* Joint outcomes are ordered LL, LR, RL, RR. The first letter is the focal
  player's action, the second the co-player's.
* A memory-1 strategy is (p0; p_LL, p_LR, p_RL, p_RR), the probability of
  playing L in round one and after each last-round outcome.
* A memory-2 strategy has 21 entries: p0, four round-two entries indexed by
  the round-one outcome, and sixteen entries indexed by (o_-1, o_-2) with
  flat index 4*o_-1 + o_-2 (zero-based outcome codes).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence, Union

import numpy as np

PROB_TOL = 1e-12


class DomainError(ValueError):
    """Raised when inputs are outside the domain of an operation."""


class Outcome(IntEnum):
    LL = 0
    LR = 1
    RL = 2
    RR = 3

    @property
    def mine(self) -> str:
        return self.name[0]

    @property
    def theirs(self) -> str:
        return self.name[1]

    def swap(self) -> "Outcome":
        return Outcome(SWAP[self])

    @classmethod
    def of(cls, mine: str, theirs: str) -> "Outcome":
        return cls[_action(mine) + _action(theirs)]

    @classmethod
    def parse(cls, text: str) -> "Outcome":
        text = text.strip().upper()
        if len(text) != 2:
            raise DomainError(f"not an outcome: {text!r}")
        return cls.of(text[0], text[1])


OUTCOMES = tuple(Outcome)
SWAP = (0, 2, 1, 3)


def _action(a: str) -> str:
    a = a.strip().upper()
    a = {"C": "L", "D": "R"}.get(a, a)
    if a not in ("L", "R"):
        raise DomainError(f"not an action: {a!r}")
    return a


@dataclass(frozen=True)
class StageGame:
    a_LL: float
    a_LR: float
    a_RL: float
    a_RR: float

    def payoff_vector(self) -> np.ndarray:
        return np.array([self.a_LL, self.a_LR, self.a_RL, self.a_RR], dtype=float)

    def payoff(self, outcome) -> float:
        return float(self.payoff_vector()[int(outcome)])

    def is_prisoners_dilemma(self) -> bool:
        return (self.a_RL > self.a_LL > self.a_RR > self.a_LR
                and 2 * self.a_LL > self.a_RL + self.a_LR)

    def is_equal_gains(self, x: float | None = None) -> bool:
        """Switching L -> R gains the same amount whatever the co-player does.

        With x given, also checks membership of the (10, 0, 10 + x, x) family.
        """
        if x is not None:
            return (self.a_LL, self.a_LR, self.a_RL, self.a_RR) == (10, 0, 10 + x, x)
        return math.isclose(self.a_RL - self.a_LL, self.a_RR - self.a_LR, abs_tol=1e-12)

    @property
    def bounds(self) -> tuple[float, float]:
        v = self.payoff_vector()
        return float(v.min()), float(v.max())

    @classmethod
    def equal_gains(cls, x: float) -> "StageGame":
        return cls(10, 0, 10 + x, x)

    @classmethod
    def parse(cls, text: str) -> "StageGame":
        parts = [p for p in text.replace(" ", "").split(",") if p]
        if len(parts) != 4:
            raise DomainError(f"a game needs four payoffs a_LL,a_LR,a_RL,a_RR, got {text!r}")
        try:
            return cls(*(float(p) for p in parts))
        except ValueError:
            raise DomainError(f"non-numeric payoff in {text!r}") from None

    def __str__(self):
        return "(" + ", ".join(_fmt(v) for v in (self.a_LL, self.a_LR, self.a_RL, self.a_RR)) + ")"


PD = StageGame(3, 0, 5, 1)


def payoff_vector(g: StageGame) -> np.ndarray:
    """(a_LL, a_LR, a_RL, a_RR) in outcome order."""
    return g.payoff_vector()


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def _check_prob(v, what: str) -> float:
    v = float(v)
    if math.isnan(v) or v < -PROB_TOL or v > 1 + PROB_TOL:
        raise DomainError(f"{what} = {v!r} is not a probability")
    return min(1.0, max(0.0, v))


@dataclass(frozen=True)
class Memory1Strategy:
    p0: float
    p_LL: float
    p_LR: float
    p_RL: float
    p_RR: float

    memory = 1

    def __post_init__(self):
        for name in ("p0", "p_LL", "p_LR", "p_RL", "p_RR"):
            object.__setattr__(self, name, _check_prob(getattr(self, name), name))

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "Memory1Strategy":
        if len(values) != 5:
            raise DomainError(f"a memory-1 strategy has 5 entries, got {len(values)}")
        return cls(*values)

    @property
    def entries(self) -> tuple:
        """Continuation probabilities in outcome order."""
        return (self.p_LL, self.p_LR, self.p_RL, self.p_RR)

    def as_tuple(self) -> tuple:
        return (self.p0,) + self.entries

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple())

    def is_deterministic(self) -> bool:
        return all(v in (0.0, 1.0) for v in self.as_tuple())

    def coop_after(self, outcome) -> float:
        return self.entries[int(outcome)]

    def __str__(self):
        return "({}; {})".format(_fmt(self.p0), ", ".join(_fmt(v) for v in self.entries))


def h2_index(o1, o2) -> int:
    """Flat index of the (o_-1, o_-2) entry; o_-1 is the most recent outcome."""
    return 4 * int(o1) + int(o2)


@dataclass(frozen=True)
class Memory2Strategy:
    p0: float
    r2: tuple
    h2: tuple

    memory = 2

    def __post_init__(self):
        r2 = tuple(self.r2)
        h2 = tuple(self.h2)
        if len(r2) != 4 or len(h2) != 16:
            raise DomainError("a memory-2 strategy needs 4 round-two and 16 history entries")
        object.__setattr__(self, "p0", _check_prob(self.p0, "p0"))
        object.__setattr__(self, "r2", tuple(_check_prob(v, "r2") for v in r2))
        object.__setattr__(self, "h2", tuple(_check_prob(v, "h2") for v in h2))

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "Memory2Strategy":
        values = list(values)
        if len(values) != 21:
            raise DomainError(f"a memory-2 strategy has 21 entries, got {len(values)}")
        return cls(values[0], tuple(values[1:5]), tuple(values[5:]))

    @property
    def entries(self) -> tuple:
        return self.r2 + self.h2

    def as_tuple(self) -> tuple:
        return (self.p0,) + self.r2 + self.h2

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple())

    def is_deterministic(self) -> bool:
        return all(v in (0.0, 1.0) for v in self.as_tuple())

    def coop_after(self, o1, o2) -> float:
        return self.h2[h2_index(o1, o2)]

    def __str__(self):
        rows = " | ".join(",".join(_fmt(v) for v in self.h2[4 * i:4 * i + 4]) for i in range(4))
        return "({}; {}; {})".format(_fmt(self.p0), ",".join(_fmt(v) for v in self.r2), rows)


Strategy = Union[Memory1Strategy, Memory2Strategy]


def lift_memory1_to_memory2(s: Memory1Strategy) -> Memory2Strategy:
    """Represent a memory-1 strategy in memory-2 form (o_-2 is ignored)."""
    return Memory2Strategy(s.p0, s.entries, tuple(s.entries[i] for i in range(4) for _ in range(4)))


def as_memory2(s: Strategy) -> Memory2Strategy:
    return s if isinstance(s, Memory2Strategy) else lift_memory1_to_memory2(s)


def strategy_from_entries(values: Sequence[float]) -> Strategy:
    if len(values) == 5:
        return Memory1Strategy.from_sequence(values)
    if len(values) == 21:
        return Memory2Strategy.from_sequence(values)
    raise DomainError(f"expected 5 or 21 entries, got {len(values)}")


# JSON form: {"memory": 1|2, "p0": f, "entries": [...]}.  Python floats
# serialize with repr, which round-trips exactly.

def strategy_to_dict(s: Strategy) -> dict:
    return {"memory": s.memory, "p0": s.p0, "entries": list(s.entries)}


def strategy_from_dict(d: dict) -> Strategy:
    try:
        memory = int(d["memory"])
        values = [d["p0"], *d["entries"]]
    except (KeyError, TypeError, ValueError) as e:
        raise DomainError(f"malformed strategy object: {e}") from None
    s = strategy_from_entries(values)
    if s.memory != memory:
        raise DomainError(f"memory={memory} does not match {len(values)} entries")
    return s


def strategy_to_json(s: Strategy) -> str:
    return json.dumps(strategy_to_dict(s))


def strategy_from_json(text: str) -> Strategy:
    return strategy_from_dict(json.loads(text))


# -- catalog ---------------------------------------------------------------

@dataclass(frozen=True)
class NamedStrategy:
    name: str
    description: str
    pattern: Strategy
    slots: tuple = ()       # entry positions (in as_tuple order) that are free

    def matches(self, profile: Sequence[float]) -> bool:
        return all(i in self.slots or float(a) == float(b)
                   for i, (a, b) in enumerate(zip(profile, self.pattern.as_tuple())))


def _m1(*v):
    return Memory1Strategy(*v)


def _m2(p0, r2, rule):
    return Memory2Strategy(p0, r2, tuple(float(rule(o1, o2)) for o1 in OUTCOMES for o2 in OUTCOMES))


def _tf2t(o1, o2):
    return not (o1.theirs == "R" and o2.theirs == "R")


def _aon2(o1, o2):
    return o1 in (Outcome.LL, Outcome.RR) and o2 in (Outcome.LL, Outcome.RR)


def _tft_atft(o1, o2):
    # Back to TFT after mutual cooperation or two co-player defections.
    if o1 is Outcome.LL:
        return True
    if o1.theirs == "R" and o2.theirs == "R":
        return False
    # Last round consistent with both sides playing TFT: keep copying.
    if o1.mine == o2.theirs and o1.theirs == o2.mine:
        return o1.theirs == "L"
    # Otherwise someone slipped: play anti-TFT.
    return o1.theirs == "R"


GTFT_DEFAULT_Q = 1 / 3

CATALOG = {
    n.name: n for n in (
        NamedStrategy("ALLC", "always cooperate", _m1(1, 1, 1, 1, 1)),
        NamedStrategy("ALLD", "always defect", _m1(0, 0, 0, 0, 0)),
        NamedStrategy("TFT", "tit-for-tat", _m1(1, 1, 0, 1, 0)),
        NamedStrategy("GTFT", "generous tit-for-tat, forgives with probability q",
                      _m1(1, 1, GTFT_DEFAULT_Q, 1, GTFT_DEFAULT_Q), slots=(2, 4)),
        NamedStrategy("WSLS", "win-stay lose-shift", _m1(1, 1, 0, 0, 1)),
        NamedStrategy("GRIM", "cooperate until the first defection", _m1(1, 1, 0, 0, 0)),
        NamedStrategy("Forgiver", "cooperate unless just exploited", _m1(1, 1, 0, 1, 1)),
        NamedStrategy("SGRIM", "suspicious GRIM, opens with defection", _m1(0, 1, 0, 0, 0)),
        NamedStrategy("ATFT", "anti tit-for-tat", _m1(1, 0, 1, 0, 1)),
        NamedStrategy("TF2T", "defect only after two co-player defections in a row",
                      _m2(1, (1, 1, 1, 1), _tf2t)),
        NamedStrategy("AON-2", "cooperate only if both players matched in the last two rounds",
                      _m2(1, (1, 0, 0, 1), _aon2)),
        NamedStrategy("TFT-ATFT", "TFT that switches to anti-TFT after an error",
                      _m2(1, (1, 0, 1, 0), _tft_atft)),
    )
}


def named(name: str, q: float | None = None) -> Strategy:
    """Look up a catalog strategy; `q` fills GTFT's forgiveness slot."""
    key = {k.lower(): k for k in CATALOG}.get(name.lower())
    if key is None:
        raise DomainError(f"unknown strategy name {name!r}")
    s = CATALOG[key].pattern
    if key == "GTFT" and q is not None:
        s = _m1(1, 1, q, 1, q)
    return s


def parse_strategy(text: str) -> Strategy:
    """Catalog name, JSON object, or comma separated entries (5 or 21)."""
    text = text.strip()
    if text.startswith("{"):
        return strategy_from_json(text)
    if text.startswith("GTFT:") or text.startswith("gtft:"):
        return named("GTFT", float(text.split(":", 1)[1]))
    try:
        values = [float(v) for v in text.replace(";", ",").replace("|", ",").split(",") if v.strip()]
    except ValueError:
        return named(text)
    return strategy_from_entries(values)


def iter_outcomes() -> Iterable[Outcome]:
    return iter(OUTCOMES)
