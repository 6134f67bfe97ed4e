"""Acceptance suite: one verdict per criterion, printed at the end of the run.

Run alone with `pytest tests/test_acceptance.py` (about ten minutes on one
core).  Criteria that cannot be met as worded are recorded as FAIL and their
literal assertion is marked xfail(strict); see notes in the README.
"""

import sys
import time

import numpy as np
import pytest

from repgame import PD, Memory1Strategy, Memory2Strategy, named, payoff_m1, payoff_m1_limit, payoff_m2
from repgame.classify import beat_percentage
from repgame.harness import ScriptedAgent, Treatment, run_actual_play, run_elicitation
from repgame.inference import infer_strategy, round2, wilson_interval
from repgame.reproduce import (check_memory2, check_nash, check_strategies, check_tournament, game_for,
                               published, strategy_of)
from repgame.simulate import simulate_games


def summarize(checks):
    bad = [c for c in checks if c.status == "fail"]
    return not bad, f"{len(checks) - len(bad)}/{len(checks)} cells", bad


def near(text, value):
    return abs(float(text) - value) <= 5e-4


def timed(fn, *args):
    t = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t


def test_c01_baseline_tournament(acceptance):
    checks, dt = timed(check_tournament, "framing:baseline")
    ok, msg, bad = summarize(checks)
    acceptance(1, ok and dt < 1, f"baseline tournament {msg}, {dt:.2f}s")
    assert not bad and dt < 1


def test_c02_framing_tournaments(acceptance):
    t = time.perf_counter()
    checks = []
    for s in ("pro", "more", "exploit", "maximize", "winning", "accumulate", "welfare", "fair", "saint",
              "aggregate"):
        checks += check_tournament(f"framing:{s}")
    dt = time.perf_counter() - t
    ok, msg, bad = summarize(checks)
    rows = {c.cell: c.got for c in checks if c.table == "tournament/framing:winning"}
    assert near(rows["llama sum"], 9.1024) and rows["llama rank"] == "1"
    agg = {c.cell: c.got for c in checks if c.table == "tournament/framing:aggregate"}
    assert agg["llama rank"] == "1" and abs(float(agg["llama sum"]) - 119.73) < 5e-3
    acceptance(2, ok and dt < 5, f"framing tournaments + aggregate {msg}, {dt:.2f}s")
    assert not bad and dt < 5


def test_c03_stopping_tournaments(acceptance):
    checks = []
    for s in ("0.01", "0.1", "0.2", "0.5", "aggregate"):
        checks += check_tournament(f"stopping:{s}")
    ok, msg, bad = summarize(checks)
    rows = {c.cell: c.got for c in checks if c.table == "tournament/stopping:0.5"}
    assert near(rows["gemini sum"], 14.6637) and rows["gemini rank"] == "1"
    fixed = [c for c in checks if c.detail]
    acceptance(3, ok, f"stopping tournaments + aggregate {msg} ({len(fixed)} printed misprint corrected)")
    assert not bad


def test_c04_equal_gains_tournaments(acceptance):
    checks = []
    for x in list(range(11)) + ["aggregate"]:
        checks += check_tournament(f"equal_gains:{x}")
    ok, msg, bad = summarize(checks)
    rows = {c.cell: c.got for c in checks if c.table == "tournament/equal_gains:10"}
    assert near(rows["gpt-5 sum"], 58.1829) and rows["gpt-5 rank"] == "1"
    assert near(rows["llama sum"], 34.1042) and rows["llama rank"] == "5"
    acceptance(4, ok, f"equal-gains tournaments + aggregate {msg}")
    assert not bad


# -- criterion 5 ------------------------------------------------------------------------

# Beat percentages printed for these w=0 cells agree with an evaluation at w=0.01
# instead; every other w=0 cell (including all equal-gains ones) agrees at w=0.
W0_OUTLIERS = {("framing:accumulate@w=0", "gemini"), ("framing:accumulate@w=0", "llama"),
               ("framing:fair@w=0", "gpt-4o"), ("framing:fair@w=0", "gpt-5")}


@pytest.fixture(scope="module")
def nash_checks():
    t = time.perf_counter()
    checks = []
    for key in published()["nash"]:
        for c in check_nash(key):
            checks.append((key, c))
    return checks, time.perf_counter() - t


def test_c05_flags_and_beat_cells(nash_checks, acceptance):
    checks, dt = nash_checks
    flags = [c for _, c in checks if not c.cell.endswith(".beat")]
    beats = [(k, c) for k, c in checks if c.cell.endswith(".beat")]
    bad_flags = [c for c in flags if c.status == "fail"]
    bad_beats = {(k, c.cell.split(".")[0]) for k, c in beats if c.status == "fail"}
    literal = not bad_flags and not bad_beats and dt < 600
    acceptance(5, literal,
               f"{len(flags) - len(bad_flags)}/{len(flags)} flag cells, "
               f"{len(beats) - len(bad_beats)}/{len(beats)} beat cells within 0.3, {dt:.0f}s"
               + ("" if literal else f"; off: {sorted(bad_beats)} (printed values match w=0.01)"))
    assert not bad_flags
    assert dt < 600
    # the only misses are the four cells whose printed values belong to w=0.01
    assert bad_beats <= W0_OUTLIERS
    assert any(c.expected == "2.01%" and c.status == "pass"
               for k, c in beats if k == "framing:baseline@w=0.01")


def test_c05_outliers_match_at_w001():
    printed = {(k, c.cell.split(".")[0]): c.expected for k in {k for k, _ in W0_OUTLIERS}
               for c in check_nash(k, n_samples=1) if c.cell.endswith(".beat")}
    for key, model in W0_OUTLIERS:
        setting = key.split("@")[0]
        b = beat_percentage(strategy_of(setting, model), game_for(setting), 0.01, 10**6)
        assert abs(b - float(printed[(key, model)].rstrip("%"))) <= 0.3


@pytest.mark.xfail(strict=True, reason="four printed w=0 beat percentages were evaluated at w=0.01")
def test_c05_literal(nash_checks):
    checks, _ = nash_checks
    assert all(c.status != "fail" for _, c in checks)


# -- criteria 6 to 11 -------------------------------------------------------------------

def test_c06_memory2_classification(acceptance):
    checks, dt = timed(check_memory2)
    ok, msg, bad = summarize(checks)
    per = dt / 5
    acceptance(6, ok and per <= 600, f"memory-2 flags {msg}, {per:.0f}s per strategy (full enumeration)")
    assert not bad and per <= 600


def test_c07_wilson_intervals(acceptance):
    spots = {(50, 50): ["0.93", "1.00"], (21, 50): ["0.29", "0.56"], (13, 50): ["0.16", "0.40"],
             (27, 50): ["0.40", "0.67"]}
    spot_ok = all([round2(wilson_interval(*k).lower), round2(wilson_interval(*k).upper)] == v
                  for k, v in spots.items())
    checks = []
    for s in list(published()["strategies"]) + ["memory2"]:
        checks += [c for c in check_strategies(s) if not c.cell.endswith(".label")]
    ok, msg, bad = summarize(checks)
    acceptance(7, ok and spot_ok, f"interval cells {msg}, spot set {'ok' if spot_ok else 'wrong'}")
    assert spot_ok and not bad


def test_c08_limit_of_means(acceptance):
    q, p = Memory1Strategy(0.4, 1, 0, 1, 0), Memory1Strategy(0.6, 1, 0, 1, 0)
    ex = payoff_m1_limit(q, p, PD)
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        a = Memory1Strategy(*rng.uniform(0.01, 0.99, 5))
        b = Memory1Strategy(*rng.uniform(0.01, 0.99, 5))
        worst = max(worst, abs(payoff_m1(a, b, PD, 1e-8) - payoff_m1_limit(a, b, PD)))
    ok = abs(ex - 2.26) <= 1e-12 and worst <= 1e-5
    acceptance(8, ok, f"example {ex:.12f}, max |w=1e-8 - limit| = {worst:.1e} over 100 pairs")
    assert ok


# Triples from default_rng(9), game streams seeded 0..49, fixed before the first run.
ORACLE_SEED = 9


@pytest.fixture(scope="module")
def oracle_z():
    rng = np.random.default_rng(ORACLE_SEED)
    zs = []
    for k in range(50):
        w = float(rng.uniform(0.02, 1))
        if k % 2:
            q, p = (Memory2Strategy.from_sequence(rng.random(21)) for _ in range(2))
            exact = payoff_m2(q, p, PD, w)
        else:
            q, p = (Memory1Strategy(*rng.random(5)) for _ in range(2))
            exact = payoff_m1(q, p, PD, w)
        r = simulate_games(q, p, PD, w, 10**5, seed=k)
        zs.append((r.mean - exact) / r.stderr)
    return np.array(zs)


def test_c09_monte_carlo_oracle(oracle_z, acceptance):
    z = np.abs(oracle_z)
    literal = z.max() <= 3
    acceptance(9, literal, f"50 triples (25 memory-1, 25 memory-2), {int((z > 3).sum())} beyond 3 SE, "
               f"max {z.max():.2f} SE" + ("" if literal else
                                          " (P(any of 50 beyond 3 SE) is about 0.13 for an exact engine)"))
    # calibrated check: exceedances ~ Binomial(50, 0.0027), P(X > 2) < 4e-4
    assert (z > 3).sum() <= 2
    assert z.max() < 4.5


@pytest.mark.xfail(strict=False, reason="all 50 within 3 SE fails by chance in about 13% of seeds")
def test_c09_literal(oracle_z):
    assert np.abs(oracle_z).max() <= 3


def test_c10_actual_play(acceptance):
    f = run_actual_play(ScriptedAgent("Forgiver"), ScriptedAgent("Forgiver"), rounds=10, ending="exact")
    g = run_actual_play(ScriptedAgent("GRIM"), ScriptedAgent("ALLD"), rounds=10)
    ok = f.actions == [("L", "L")] * 10 and f.totals == (30, 30) and g.totals == (9, 14)
    acceptance(10, ok, f"Forgiver pair {f.totals}, GRIM vs ALLD {g.totals}")
    assert ok


# Seeds fixed before the run: strategies from default_rng(11), trial streams seeded 0..19.
ROUND_TRIP_SEED = 11


@pytest.fixture(scope="module")
def round_trip():
    rng = np.random.default_rng(ROUND_TRIP_SEED)
    misses = []
    for k in range(20):
        s = Memory1Strategy(*rng.random(5))
        res = run_elicitation(Treatment("baseline"), ScriptedAgent(s), trials=200, seed=k)
        inf = infer_strategy(res.counts())
        misses += [(k, j) for j, (v, iv) in enumerate(zip(s.as_tuple(), inf.intervals))
                   if not iv.contains(v)]
    return misses


def test_c11_round_trip_coverage(round_trip, acceptance):
    literal = not round_trip
    acceptance(11, literal, f"{100 - len(round_trip)}/100 entries inside their 95% interval"
               + ("" if literal else " (about 5 misses expected at 95% coverage)"))
    # calibrated check: misses consistent with Binomial(100, 0.05), P(X > 12) < 0.003
    assert len(round_trip) <= 12


@pytest.mark.xfail(strict=False, reason="'every entry' at 95% coverage holds with probability 0.95**100")
def test_c11_literal(round_trip):
    assert not round_trip


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
