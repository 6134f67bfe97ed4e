"""Elicitation runs, actual-play games and their logs."""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ..game import DomainError, Outcome, StageGame
from ..inference import ScenarioCounts
from .agents import TransportError, parse_action
from .prompts import Treatment, render_actual_play, render_prompt


@dataclass
class ExperimentRecord:
    treatment: str
    scenario: str
    agent: str
    trial: int
    response: Optional[str]
    action: Optional[str]           # "L", "R", or None when unparseable or failed
    parse_rule: Optional[str] = None
    error: Optional[str] = None
    timestamp: float = 0.0

    def to_dict(self, with_time: bool = True) -> dict:
        d = asdict(self)
        if not with_time:
            d.pop("timestamp")
        return d


def write_jsonl(records, path):
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r.to_dict()) + "\n")


def read_jsonl(path) -> list:
    with open(path, encoding="utf-8") as f:
        return [ExperimentRecord(**json.loads(line)) for line in f if line.strip()]


@dataclass
class Tally:
    l: int = 0
    n: int = 0
    unparseable: int = 0
    failed: int = 0


@dataclass
class ElicitationResult:
    treatment: Treatment
    tallies: dict                       # scenario -> Tally
    records: list = field(default_factory=list)

    def counts(self) -> ScenarioCounts:
        """Strategy counts; unparseable and failed trials are excluded from n."""
        if self.treatment.kind == "one_shot":
            raise DomainError("one-shot runs have a single scenario; use the tallies")
        c = {s: (t.l, t.n) for s, t in self.tallies.items()}
        empty = [s for s, (_, n) in c.items() if n == 0]
        if empty:
            raise DomainError(f"no usable answers for scenarios {empty}")
        return ScenarioCounts(self.treatment.memory, c,
                              {s: t.unparseable for s, t in self.tallies.items() if t.unparseable})

    def summary(self) -> dict:
        return {"treatment": self.treatment.to_dict(),
                "scenarios": {s: asdict(t) for s, t in self.tallies.items()}}


def _trial_rng(seed: int, scenario_index: int, trial: int) -> np.random.Generator:
    # one stream per (scenario, trial), so results do not depend on scheduling
    return np.random.default_rng([seed, scenario_index, trial])


def _ask(agent, spec, rng, lenient):
    try:
        text = agent.respond(spec, rng)
    except TransportError as e:
        return text_record(None, None, None, str(e))
    action, rule = parse_action(text, lenient)
    return text_record(text, action, rule, None)


def text_record(text, action, rule, error):
    return {"response": text, "action": action, "parse_rule": rule, "error": error}


def run_elicitation(treatment: Treatment, agent, trials: int = 50, seed: int = 0,
                    g: Optional[StageGame] = None, workers: int = 1, lenient: bool = True,
                    clock=time.time) -> ElicitationResult:
    """Ask `trials` independent single-turn questions per scenario and tally the answers."""
    if trials < 1:
        raise DomainError("trials must be at least 1")
    scenarios = treatment.scenarios()
    jobs = []
    for si, sc in enumerate(scenarios):
        spec = render_prompt(treatment, sc, g)
        jobs += [(si, sc, spec, t) for t in range(trials)]

    def work(job):
        si, sc, spec, t = job
        return _ask(agent, spec, _trial_rng(seed, si, t), lenient), clock()

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            answers = list(ex.map(work, jobs))      # map keeps submission order
    else:
        answers = [work(j) for j in jobs]

    tallies = {sc: Tally() for sc in scenarios}
    records = []
    for (si, sc, spec, t), (ans, ts) in zip(jobs, answers):
        tl = tallies[sc]
        if ans["error"] is not None:
            tl.failed += 1
        elif ans["action"] is None:
            tl.unparseable += 1
        else:
            tl.n += 1
            tl.l += ans["action"] == "L"
        records.append(ExperimentRecord(treatment.kind, sc, agent.name, t, timestamp=ts, **ans))
    return ElicitationResult(treatment, tallies, records)


@dataclass
class Transcript:
    treatment: Treatment
    game: StageGame
    actions: list                       # (agent1 action, agent2 action) per round
    totals: tuple
    records: list

    def outcomes(self) -> list:
        return [Outcome.of(a, b) for a, b in self.actions]

    def to_dict(self) -> dict:
        return {"treatment": self.treatment.to_dict(), "game": str(self.game),
                "rounds": ["".join(a) for a in self.actions], "totals": list(self.totals),
                "records": [r.to_dict() for r in self.records]}


def run_actual_play(agent1, agent2, rounds: int = 10, ending: str = "exact",
                    g: Optional[StageGame] = None, seed: int = 0, framing: Optional[str] = None,
                    lenient: bool = True, clock=time.time) -> Transcript:
    """Play one game; each round both agents see the full history from their side.

    An unparseable or failed answer is logged and treated as R so the game can
    continue; the record keeps the raw text.
    """
    t = Treatment("actual_play", framing=framing, rounds=rounds, ending=ending)
    g = g or t.default_game()
    history: list = []
    actions, records = [], []
    tot1 = tot2 = 0.0
    for k in range(rounds):
        pair = []
        for idx, agent in enumerate((agent1, agent2)):
            view = history if idx == 0 else [o.swap() for o in history]
            spec = render_actual_play(t, view, g)
            ans = _ask(agent, spec, _trial_rng(seed, idx, k), lenient)
            records.append(ExperimentRecord("actual_play", spec.scenario, f"{idx + 1}:{agent.name}", k,
                                            timestamp=clock(), **ans))
            pair.append(ans["action"] or "R")
        o = Outcome.of(*pair)
        history.append(o)
        actions.append(tuple(pair))
        tot1 += g.payoff(o)
        tot2 += g.payoff(o.swap())
    return Transcript(t, g, actions, (tot1, tot2), records)


def treatment_from_config(cfg: dict) -> Treatment:
    kind = cfg.get("treatment", "baseline")
    return Treatment(kind, framing=cfg.get("framing"), w=cfg.get("w"), x=cfg.get("x"),
                     rounds=cfg.get("rounds", 10), ending=cfg.get("ending", "exact"))
