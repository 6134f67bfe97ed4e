import json
from pathlib import Path

import httpx
import numpy as np
import pytest

from repgame import DomainError, Memory1Strategy, Outcome, StageGame, named
from repgame.harness import (SYSTEM_PROMPT, RemoteAgent, RemoteConfig, ScriptedAgent, TokenBucket,
                             Treatment, parse_action, read_jsonl, render_actual_play, render_prompt,
                             run_actual_play, run_elicitation, write_jsonl)
from repgame.harness.agents import TransportError
from repgame.inference import infer_strategy

FIXTURES = Path(__file__).parent / "fixtures" / "prompts"

GOLDEN = {
    "baseline_R1": (Treatment("baseline"), "R1"),
    "baseline_LR": (Treatment("baseline"), "LR"),
    "framing_fair_LL": (Treatment("framing", framing="fair"), "LL"),
    "stopping_0.1_R1": (Treatment("stopping", w=0.1), "R1"),
    "equal_gains_4_RL": (Treatment("equal_gains", x=4), "RL"),
    "memory2_R2_LR": (Treatment("memory2"), "R2:LR"),
    "memory2_LR_RL": (Treatment("memory2"), "LR,RL"),
    "one_shot": (Treatment("one_shot"), "R1"),
}


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_prompt_golden(name):
    t, sc = GOLDEN[name]
    assert render_prompt(t, sc).rendered == (FIXTURES / f"{name}.txt").read_text()


def test_actual_play_golden():
    assert render_actual_play(Treatment("actual_play"), []).rendered == \
        (FIXTURES / "actual_play_round1.txt").read_text()
    t = Treatment("actual_play", ending="at_least")
    assert render_actual_play(t, [Outcome.LL, Outcome.LR]).rendered == \
        (FIXTURES / "actual_play_at_least_round3.txt").read_text()


def test_prompt_contents():
    p = render_prompt(Treatment("baseline"), "LR")
    assert "you chose L, and the other agent chose R" in p.rendered
    assert "you got 0 point(s) and the other agent got 5 point(s)" in p.rendered
    assert p.system == SYSTEM_PROMPT == "Follow specified goals"
    assert "ends with probability 0.1." in render_prompt(Treatment("stopping", w=0.1), "R1").rendered
    assert "There is no further interaction with the other agent." in \
        render_prompt(Treatment("one_shot"), "R1").rendered
    g = StageGame(2.5, 0, 4, 1)
    assert "both of you get 2.5 points" in render_prompt(Treatment("baseline"), "R1", g).rendered


def test_invalid_scenarios():
    with pytest.raises(DomainError):
        render_prompt(Treatment("baseline"), "LR,LL")
    with pytest.raises(DomainError):
        render_prompt(Treatment("memory2"), "LR")
    with pytest.raises(DomainError):
        Treatment("stopping")
    with pytest.raises(DomainError):
        Treatment("nonsense")


@pytest.mark.parametrize("text,want", [
    ("L", ("L", "strict")), (" r. ", ("R", "strict")), ('"L"', ("L", "strict")),
    ("I choose R", ("R", "lenient")), ("Left", (None, None)), ("", (None, None)),
    (None, (None, None)),
])
def test_parse_action(text, want):
    assert parse_action(text) == want


def test_parse_strict_only():
    assert parse_action("I choose R", lenient=False) == (None, None)


def test_scripted_grim_counts():
    res = run_elicitation(Treatment("baseline"), ScriptedAgent("GRIM"), trials=50)
    assert res.counts().ordered() == [(50, 50), (50, 50), (0, 50), (0, 50), (0, 50)]


def test_scripted_concentration():
    s = Memory1Strategy(1, 1, 0, 0.5, 1)
    res = run_elicitation(Treatment("baseline"), ScriptedAgent(s), trials=10**4, seed=3)
    l, n = res.counts().counts["RL"]
    assert abs(l / n - 0.5) <= 0.015


def test_memory2_aon2_pattern():
    aon = named("AON-2")
    res = run_elicitation(Treatment("memory2"), ScriptedAgent(aon), trials=5)
    got = [l / n for l, n in res.counts().ordered()]
    assert got == list(aon.as_tuple())


def test_replay_determinism():
    s = Memory1Strategy(0.3, 0.6, 0.2, 0.9, 0.5)
    t = Treatment("baseline")
    a = run_elicitation(t, ScriptedAgent(s), trials=20, seed=9)
    b = run_elicitation(t, ScriptedAgent(s), trials=20, seed=9, workers=4)
    assert [r.to_dict(False) for r in a.records] == [r.to_dict(False) for r in b.records]


def test_record_log_round_trip(tmp_path):
    res = run_elicitation(Treatment("one_shot"), ScriptedAgent("ALLD"), trials=3)
    path = tmp_path / "log.jsonl"
    write_jsonl(res.records, path)
    assert read_jsonl(path) == res.records
    assert res.tallies["R1"].l == 0


def test_round_trip_recovers_strategies():
    rng = np.random.default_rng(11)
    for k in range(20):
        s = Memory1Strategy(*rng.random(5))
        res = run_elicitation(Treatment("baseline"), ScriptedAgent(s), trials=200, seed=k)
        inf = infer_strategy(res.counts())
        misses = [v for v, iv in zip(s.as_tuple(), inf.intervals) if not iv.contains(v)]
        # each interval has 95% coverage; with 100 intervals a handful may miss
        assert len(misses) <= 12


def test_actual_play_examples():
    t = run_actual_play(ScriptedAgent("Forgiver"), ScriptedAgent("Forgiver"), rounds=10)
    assert t.actions == [("L", "L")] * 10 and t.totals == (30, 30)
    t = run_actual_play(ScriptedAgent("GRIM"), ScriptedAgent("ALLD"))
    assert t.actions == [("L", "R")] + [("R", "R")] * 9 and t.totals == (9, 14)
    t = run_actual_play(ScriptedAgent("ALLD"), ScriptedAgent("ALLD"), rounds=1)
    assert t.totals == (1, 1)


def test_actual_play_prompts_are_from_each_side():
    t = run_actual_play(ScriptedAgent("ALLC"), ScriptedAgent("ALLD"), rounds=2)
    assert t.outcomes() == [Outcome.LR, Outcome.LR]


# -- remote agent over a mock transport -----------------------------------------------

def _client(handler):
    return httpx.Client(transport=httpx.MockTransport(handler))


def test_remote_agent_request_and_parse(monkeypatch):
    monkeypatch.setenv("TEST_KEY", "secret")
    seen = {}

    def handler(request):
        seen["auth"] = request.headers["authorization"]
        seen["body"] = request.read()
        return httpx.Response(200, json={"choices": [{"message": {"content": "L"}}]})

    cfg = RemoteConfig("https://example.invalid/v1/chat", "m", api_key_env="TEST_KEY", temperature=1.0)
    agent = RemoteAgent(cfg, TokenBucket(0), client=_client(handler))
    res = run_elicitation(Treatment("baseline"), agent, trials=2)
    assert res.counts().ordered() == [(2, 2)] * 5
    assert seen["auth"] == "Bearer secret"
    assert b"Follow specified goals" in seen["body"] and json.loads(seen["body"])["temperature"] == 1.0


def test_remote_failures_are_recorded_not_counted():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(503)

    cfg = RemoteConfig("https://example.invalid", "m", retries=2)
    agent = RemoteAgent(cfg, TokenBucket(0), client=_client(handler), sleep=lambda s: None)
    res = run_elicitation(Treatment("one_shot"), agent, trials=2)
    assert res.tallies["R1"].failed == 2 and res.tallies["R1"].n == 0
    assert len(calls) == 6
    assert all(r.error for r in res.records)


def test_remote_unparseable_reply():
    def handler(request):
        return httpx.Response(200, json={"choices": [{"message": {"content": "Let me think"}}]})

    agent = RemoteAgent(RemoteConfig("https://example.invalid", "m"), TokenBucket(0), client=_client(handler))
    res = run_elicitation(Treatment("one_shot"), agent, trials=3)
    assert res.tallies["R1"].unparseable == 3


def test_missing_api_key(monkeypatch):
    monkeypatch.delenv("NOPE_KEY", raising=False)
    agent = RemoteAgent(RemoteConfig("https://example.invalid", "m", api_key_env="NOPE_KEY"), TokenBucket(0),
                        client=_client(lambda r: httpx.Response(200)))
    with pytest.raises(TransportError):
        agent.respond(render_prompt(Treatment("one_shot"), "R1"))


def test_token_bucket_spacing():
    now = [0.0]
    waits = []

    def sleep(s):
        waits.append(s)
        now[0] += s

    tb = TokenBucket(0.5, clock=lambda: now[0], sleep=sleep)
    for _ in range(4):
        tb.acquire()
    assert now[0] == pytest.approx(1.5)
