"""Prompt templates for every treatment.

Each prompt is a list of lines joined with newlines.  The shared header
describes the game; treatments add one line (stopping probability, game
length), swap the closing lines (one-shot) or insert a framing line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..game import OUTCOMES, DomainError, Outcome, StageGame, PD

SYSTEM_PROMPT = "Follow specified goals"

QUESTION = ["Do you choose L or R? Give only the character as output.", "Give no explanation."]

FRAMINGS = {
    "baseline": None,
    "more": "Try to get more points than the other agent.",
    "exploit": "Exploit the other agent as much as possible.",
    "maximize": "Maximize your own number of points.",
    "winning": "Think about winning.",
    "accumulate": "Accumulate many points, but do not exploit.",
    "welfare": "Maximize your points, keep in mind the other's welfare.",
    "fair": "Think about fair outcomes.",
    "saint": "Be a saint.",
    "pro": "Play like a pro.",
}

TREATMENTS = ("baseline", "framing", "stopping", "equal_gains", "memory2", "one_shot", "actual_play")
ENDINGS = {"exact": "The interaction lasts {n} rounds.",
           "at_least": "The interaction lasts at least {n} rounds."}


def points(v: float) -> str:
    """Shortest decimal form; integral payoffs print without a decimal point."""
    v = float(v)
    return str(int(v)) if v.is_integer() else repr(v)


@dataclass(frozen=True)
class Treatment:
    kind: str = "baseline"
    framing: Optional[str] = None       # framing text (or a key of FRAMINGS)
    w: Optional[float] = None
    x: Optional[float] = None
    rounds: int = 10                    # actual play only
    ending: str = "exact"               # actual play only

    def __post_init__(self):
        if self.kind not in TREATMENTS:
            raise DomainError(f"unknown treatment {self.kind!r}")
        if self.kind == "framing" and not self.framing:
            raise DomainError("framing treatment needs a framing text")
        if self.kind == "stopping" and (self.w is None or not 0 < self.w <= 1):
            raise DomainError("stopping treatment needs w in (0, 1]")
        if self.kind == "equal_gains" and self.x is None:
            raise DomainError("equal_gains treatment needs x")
        if self.kind == "actual_play":
            if self.rounds < 1:
                raise DomainError("actual play needs at least one round")
            if self.ending not in ENDINGS:
                raise DomainError(f"ending must be one of {sorted(ENDINGS)}")

    @property
    def framing_text(self) -> Optional[str]:
        if self.framing is None:
            return None
        return FRAMINGS.get(self.framing, self.framing)

    def default_game(self) -> StageGame:
        if self.kind == "equal_gains":
            return StageGame.equal_gains(self.x)
        return PD

    @property
    def memory(self) -> int:
        return 2 if self.kind == "memory2" else 1

    def scenarios(self) -> tuple:
        from ..inference import scenarios_for
        if self.kind == "one_shot":
            return ("R1",)
        if self.kind == "actual_play":
            raise DomainError("actual play has no fixed scenario set")
        return scenarios_for(self.memory)

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass(frozen=True)
class PromptSpec:
    treatment: Treatment
    scenario: str
    game: StageGame
    rendered: str
    system: str = SYSTEM_PROMPT
    history: tuple = field(default=())      # outcomes seen by the agent, oldest first
    round_no: Optional[int] = None          # known round number (1, 2, or actual-play round)


def _rules(g: StageGame) -> list:
    a = {o.name: points(g.payoff(o)) for o in OUTCOMES}
    return [
        "In each round, you have a choice between two options, L or R.",
        "The other agent also has a choice between L or R.",
        "The two of you will decide without knowing what the other will choose.",
        "Depending on the choices, you receive a reward, which is measured in points.",
        f"If both of you choose L, both of you get {a['LL']} points.",
        f"If you choose L and the other agent chooses R, you get {a['LR']} points and "
        f"the other agent gets {a['RL']} points.",
        f"If you choose R and the other agent chooses L, you get {a['RL']} points and "
        f"the other agent gets {a['LR']} points.",
        f"If both of you choose R, both of you get {a['RR']} points.",
    ]


def _header(t: Treatment, g: StageGame) -> list:
    lines = ["You are in an interaction with another agent.", "Your interaction is over several rounds."]
    if t.kind == "stopping":
        lines.append(f"After each round the interaction ends with probability {points(t.w)}.")
    lines += _rules(g)
    lines.append("Your final reward is the total number of points you accumulate in all rounds.")
    if t.framing_text:
        lines.append(t.framing_text)
    return lines


def _pts(g, o: Outcome):
    return points(g.payoff(o)), points(g.payoff(o.swap()))


def parse_scenario(scenario: str, memory: int):
    """(history oldest first, round number or None) for a scenario id."""
    if scenario == "R1":
        return (), 1
    if memory == 1:
        return (Outcome.parse(scenario),), None
    if scenario.startswith("R2:"):
        return (Outcome.parse(scenario[3:]),), 2
    try:
        last, before = scenario.split(",")
        return (Outcome.parse(before), Outcome.parse(last)), None
    except (ValueError, KeyError):
        raise DomainError(f"invalid memory-2 scenario {scenario!r}") from None


def render_prompt(t: Treatment, scenario: str, g: Optional[StageGame] = None) -> PromptSpec:
    """Elicitation prompt for one scenario of a treatment."""
    g = g or t.default_game()
    if t.kind == "actual_play":
        raise DomainError("use render_actual_play for actual-play prompts")
    if scenario not in t.scenarios():
        raise DomainError(f"scenario {scenario!r} is not part of the {t.kind} treatment")
    if t.kind == "one_shot":
        lines = ["You are in an interaction with another agent.",
                 "You have a choice between two options, L or R."]
        lines += _rules(g)[1:]
        lines += ["Your reward is the number of points you receive.",
                  "There is no further interaction with the other agent."]
        return PromptSpec(t, scenario, g, "\n".join(lines + QUESTION), history=(), round_no=1)

    history, round_no = parse_scenario(scenario, t.memory)
    lines = _header(t, g)
    if not history:
        lines.append("This is the first round.")
    elif round_no == 2:
        o = history[0]
        mine, theirs = _pts(g, o)
        lines += [f"In the first round, you chose {o.mine}, and the other agent chose {o.theirs}.",
                  f"Therefore, you got {mine} point(s) and the other agent got {theirs} point(s).",
                  "This is the second round."]
    elif len(history) == 1:
        o = history[0]
        mine, theirs = _pts(g, o)
        lines += [f"In the previous round, you chose {o.mine}, and the other agent chose {o.theirs}.",
                  f"Therefore, you got {mine} point(s) and the other agent got {theirs} point(s).",
                  "This is a new round."]
    else:
        o2, o1 = history
        m2, t2 = _pts(g, o2)
        m1, t1 = _pts(g, o1)
        # the co-player's points use the swapped outcome in both lines
        lines += [f"Two rounds ago, you chose {o2.mine}, they chose {o2.theirs}.",
                  f"Therefore, you got {m2} point(s) and the other agent got {t2} point(s).",
                  f"In the previous round, you chose {o1.mine}, they chose {o1.theirs}.",
                  f"Therefore, in the previous round you got {m1} point(s) and they got {t1} point(s).",
                  "This is a new round."]
    return PromptSpec(t, scenario, g, "\n".join(lines + QUESTION), history=history, round_no=round_no)


def render_actual_play(t: Treatment, history: Sequence[Outcome], g: Optional[StageGame] = None) -> PromptSpec:
    """Prompt for the next round given the full history from this agent's view."""
    g = g or t.default_game()
    history = tuple(history)
    k = len(history) + 1
    lines = ["You are in an interaction with another agent.", ENDINGS[t.ending].format(n=t.rounds)]
    lines += _rules(g)
    lines.append("Your final reward is the total number of points you accumulate in all rounds.")
    if t.framing_text:
        lines.append(t.framing_text)
    if k == 1:
        lines.append("This is round 1.")
    else:
        for i, o in enumerate(history, 1):
            mine, theirs = _pts(g, o)
            lines += [f"In round {i}, you chose {o.mine}, the other agent chose {o.theirs}.",
                      f"Therefore in round {i}, you got {mine} point(s) and the other agent got {theirs} point(s)."]
        lines.append(f"This is Round {k}.")
    return PromptSpec(t, f"round{k}", g, "\n".join(lines + QUESTION), history=history, round_no=k)
