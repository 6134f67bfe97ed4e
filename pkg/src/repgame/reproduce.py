"""Recompute published tables from the bundled counts and diff them.

Table ids are descriptive ("tournament/framing:baseline",
"nash/equal_gains:6@w=0", "strategies/memory2", ...).  The bundled data
also carries short aliases; an alias followed by "-<model>-<setting>"
selects a single row of a classification table, e.g. "S29-claude-baseline".
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from functools import lru_cache
from importlib import resources
from typing import Optional

from .classify import DEFAULT_SEED, beat_percentage, classify
from .game import PD, DomainError, Memory1Strategy, Memory2Strategy, StageGame
from .inference import ScenarioCounts, infer_strategy, round2, wilson_interval
from .tournament import aggregate_tournaments, run_tournament

BEAT_TOL = 0.3
TOURNAMENT_TOL = 5e-4


@lru_cache(maxsize=1)
def published() -> dict:
    with resources.files("repgame").joinpath("data/published.json").open(encoding="utf-8") as f:
        return json.load(f)


@dataclass
class Check:
    table: str
    cell: str
    expected: str
    got: str
    status: str             # pass | fail | note (reported, not counted)
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status != "fail"


# -- inputs ------------------------------------------------------------------------

def game_for(setting: str) -> StageGame:
    if setting.startswith("equal_gains:"):
        return StageGame.equal_gains(int(setting.split(":")[1]))
    return PD


def w_for(setting: str) -> float:
    """Stopping probability of the published tournament for a setting."""
    if setting.startswith("stopping:"):
        return float(setting.split(":")[1])
    return 0.01


def strategy_of(setting: str, model: str, raw: bool = False) -> Memory1Strategy:
    d = published()
    if raw:
        counts = d["stopping_raw"][setting.split(":")[1]][model]
    else:
        counts = d["strategies"][setting][model]["counts"]
    return Memory1Strategy(*[c / 50 for c in counts])


def memory2_strategy(model: str) -> Memory2Strategy:
    return Memory2Strategy.from_sequence([c / 50 for c in published()["memory2"][model]["counts"]])


def roster(setting: str, raw: bool = False) -> list:
    return [(m, strategy_of(setting, m, raw)) for m in published()["models"]]


def settings(prefix: str) -> list:
    return [k for k in published()["strategies"] if k.startswith(prefix)]


# -- comparisons -------------------------------------------------------------------

def printed_tol(text: str) -> float:
    """Half a unit in the last printed place, never tighter than 5e-4."""
    frac = text.split(".")[1] if "." in text else ""
    digits = len(frac) if frac else 4
    return max(TOURNAMENT_TOL, 0.5 * 10.0 ** -digits)


def beat_ok(printed: str, value: float) -> bool:
    if printed.startswith("<"):
        return value < float(printed.lstrip("<").rstrip("%")) + BEAT_TOL
    if printed.startswith("100"):
        return value >= 99.5
    return abs(value - float(printed.rstrip("%"))) <= BEAT_TOL


# -- checks per table kind -----------------------------------------------------------

def check_strategies(setting: str) -> list:
    d = published()
    out = []
    table = f"strategies/{setting}"
    if setting == "memory2":
        rows = {m: (e["counts"], e) for m, e in d["memory2"].items()}
    elif setting == "one_shot":
        rows = {m: (e["counts"], e) for m, e in d["one_shot"].items()}
    else:
        rows = {m: (e["counts"], e) for m, e in d["strategies"][setting].items()}
    for model, (counts, e) in rows.items():
        if setting == "one_shot":
            ivs = [wilson_interval(counts[0], 50)]
            label = None
        else:
            inf = infer_strategy(ScenarioCounts.from_lists(counts))
            ivs, label = inf.intervals, str(inf.label)
        for k, (iv, mean, bracket) in enumerate(zip(ivs, e["means"], e["intervals"])):
            got = f"{round2(iv.point)} [{round2(iv.lower)}, {round2(iv.upper)}]"
            exp = f"{mean} [{bracket[0]}, {bracket[1]}]"
            out.append(Check(table, f"{model}[{k}]", exp, got, "pass" if got == exp else "fail"))
        if label is not None and "label" in e:
            # labels are a deterministic rule; divergences are diagnostics
            out.append(Check(table, f"{model}.label", e["label"], label,
                             "pass" if label == e["label"] else "note",
                             "" if label == e["label"] else "label rule differs from printed label"))
    return out


def _tournament_result(setting: str):
    if setting == "framing:aggregate":
        return aggregate_tournaments(run_tournament(roster(s), PD, 0.01) for s in settings("framing:"))
    if setting == "equal_gains:aggregate":
        return aggregate_tournaments(run_tournament(roster(s), game_for(s), 0.01)
                                     for s in settings("equal_gains:"))
    if setting == "stopping:aggregate":
        # the summed figure matches the raw stopping counts, not the interval tables
        return aggregate_tournaments(run_tournament(roster(s, raw=True), PD, w_for(s))
                                     for s in settings("stopping:"))
    return run_tournament(roster(setting), game_for(setting), w_for(setting))


def check_tournament(setting: str) -> list:
    d = published()
    exp = d["tournaments"][setting]
    res = _tournament_result(setting)
    errata = {(e["row"], e["col"]): e for e in d.get("errata", [])
              if e["table"] == "tournaments" and e["setting"] == setting}
    table = f"tournament/{setting}"
    out = []
    sums, ranks = res.row_sums, res.ranks
    for i, row in enumerate(res.names):
        for j, col in enumerate(res.names):
            printed = exp[row]["values"][j]
            got = res.matrix[i, j]
            fix = errata.get((row, col))
            target = fix["implied"] if fix else printed
            ok = abs(got - float(target)) <= printed_tol(printed)
            detail = f"printed {printed} is a misprint: {fix['note']}" if fix else ""
            out.append(Check(table, f"{row} vs {col}", target, f"{got:.4f}", "pass" if ok else "fail", detail))
        s = exp[row]["sum"]
        out.append(Check(table, f"{row} sum", s, f"{sums[i]:.4f}",
                         "pass" if abs(sums[i] - float(s)) <= printed_tol(s) else "fail"))
        out.append(Check(table, f"{row} rank", str(exp[row]["rank"]), str(ranks[i]),
                         "pass" if ranks[i] == exp[row]["rank"] else "fail"))
    return out


def check_nash(key: str, models=None, n_samples: int = 10**6, seed: int = DEFAULT_SEED) -> list:
    d = published()
    cells = d["nash"][key]
    setting, wtxt = key.split("@w=")
    w = float(wtxt)
    g = game_for(setting)
    table = f"nash/{key}"
    out = []
    for model in models or d["models"]:
        s = strategy_of(setting, model)
        c = classify(s, g, w, require_pd=False, with_beat=False)
        want = cells[model]
        for flag in ("nash", "partner", "rival"):
            got = getattr(c, f"is_{flag}")
            out.append(Check(table, f"{model}.{flag}", str(want[flag]), str(got),
                             "pass" if got == want[flag] else "fail"))
        if not c.is_nash and "beat" in want:
            b = beat_percentage(s, g, w, n_samples, seed)
            out.append(Check(table, f"{model}.beat", want["beat"], f"{b:.2f}%",
                             "pass" if beat_ok(want["beat"], b) else "fail"))
    return out


def check_memory2(workers: Optional[int] = None) -> list:
    """Nash and partner for Claude, GPT-4o, GPT-5; nothing for Gemini and Llama."""
    expected = {"claude": (True, True), "gpt-4o": (True, True), "gpt-5": (True, True),
                "gemini": (False, False), "llama": (False, False)}
    out = []
    for model, (nash, partner) in expected.items():
        c = classify(memory2_strategy(model), PD, 1e-10, workers=workers, with_beat=False)
        out.append(Check("classify/memory2", f"{model}.nash", str(nash), str(c.is_nash),
                         "pass" if c.is_nash == nash else "fail"))
        out.append(Check("classify/memory2", f"{model}.partner", str(partner), str(c.is_partner),
                         "pass" if c.is_partner == partner else "fail"))
        if not nash:
            out.append(Check("classify/memory2", f"{model}.rival", "False", str(c.is_rival),
                             "pass" if not c.is_rival else "fail"))
    return out


# -- registry ------------------------------------------------------------------------

def table_ids() -> list:
    d = published()
    ids = [f"strategies/{k}" for k in d["strategies"]] + ["strategies/memory2", "strategies/one_shot"]
    ids += [f"tournament/{k}" for k in d["tournaments"]]
    ids += [f"nash/{k}" for k in d["nash"]]
    ids.append("classify/memory2")
    return ids


def _short_setting(name: str) -> str:
    return name if ":" in name else f"framing:{name}"


def resolve(table_id: str) -> list:
    """Expand an id or alias into (table id, model filter) pairs."""
    d = published()
    aliases = d.get("aliases", {})
    if table_id in table_ids():
        return [(table_id, None)]
    if table_id in aliases:
        return [(t, None) for t in aliases[table_id]]
    head, _, rest = table_id.partition("-")
    if head in aliases and rest:
        model = next((m for m in d["models"] if rest.startswith(m + "-")), None)
        if model:
            setting = _short_setting(rest[len(model) + 1:])
            hits = [t for t in aliases[head] if t.startswith(f"nash/{setting}@")]
            if hits:
                return [(t, model) for t in hits]
    raise DomainError(f"unknown table id {table_id!r} (try 'reproduce --list')")


def reproduce(table_id: str, n_samples: int = 10**6, seed: int = DEFAULT_SEED) -> list:
    checks = []
    for tid, model in resolve(table_id):
        kind, _, key = tid.partition("/")
        if kind == "strategies":
            checks += check_strategies(key)
        elif kind == "tournament":
            checks += check_tournament(key)
        elif kind == "nash":
            checks += check_nash(key, [model] if model else None, n_samples, seed)
        elif kind == "classify":
            checks += check_memory2()
    return checks


def checks_to_dicts(checks) -> list:
    return [asdict(c) for c in checks]
