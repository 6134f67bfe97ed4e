import csv
import io
import json

import pytest

from repgame.cli import main


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def test_payoff_formats(capsys):
    rc, out, _ = run(capsys, "payoff", "--q", "0.4,1,0,1,0", "--p", "0.6,1,0,1,0", "--w", "0",
                     "--format", "json")
    assert rc == 0
    d = json.loads(out)
    assert d["q"] == pytest.approx(2.26) and d["p"] == pytest.approx(2.26)
    rc, out, _ = run(capsys, "payoff", "--q", "TFT", "--p", "ALLD", "--format", "csv")
    assert rc == 0 and len(list(csv.reader(io.StringIO(out)))) >= 2


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["payoff", "--q", "TFT"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["nonsense"])
    assert e.value.code == 2


def test_domain_errors_exit_1(capsys):
    rc, _, err = run(capsys, "payoff", "--q", "1,1,0,1,2", "--p", "TFT")
    assert rc == 1 and err.startswith("error:")
    rc, _, err = run(capsys, "payoff", "--q", "NOPE", "--p", "TFT")
    assert rc == 1
    rc, _, _ = run(capsys, "payoff", "--q", "TFT", "--p", "TF2T", "--w", "0")
    assert rc == 1
    rc, _, _ = run(capsys, "infer", "--counts", "51,0,0,0,0")
    assert rc == 1
    rc, _, _ = run(capsys, "reproduce", "no-such-table")
    assert rc == 1


def test_classify_and_infer(capsys):
    rc, out, _ = run(capsys, "classify", "GRIM", "--w", "0", "--no-beat", "--format", "json")
    d = json.loads(out)
    assert rc == 0 and d["is_nash"] and d["is_partner"] and d["is_rival"]
    rc, out, _ = run(capsys, "classify", "WSLS", "--w", "0.5", "--samples", "2000", "--format", "json")
    d = json.loads(out)
    assert rc == 0 and not d["is_nash"] and 0 <= d["beat_percentage"] <= 100
    rc, out, _ = run(capsys, "infer", "--counts", "50,50,0,50,50", "--format", "csv")
    assert rc == 0 and "Forgiver" in out


def test_tournament_and_region(capsys, tmp_path):
    rc, out, _ = run(capsys, "tournament", "--player", "a=TFT", "--player", "b=ALLD", "--w", "0",
                     "--format", "json")
    assert rc == 0 and json.loads(out)["ranks"] == [1, 2]
    path = tmp_path / "region.csv"
    rc, _, _ = run(capsys, "region", "TFT", "--samples", "50", "--output", str(path))
    assert rc == 0 and len(path.read_text().strip().split("\n")) == 1 + 50 + 32


def test_elicit_then_infer(capsys, tmp_path):
    summary, log = tmp_path / "s.json", tmp_path / "log.jsonl"
    rc, _, _ = run(capsys, "elicit", "--agent", "GRIM", "--treatment", "baseline", "--trials", "10",
                   "--summary", str(summary), "--log", str(log))
    assert rc == 0 and len(log.read_text().splitlines()) == 50
    rc, out, _ = run(capsys, "infer", "--input", str(summary), "--format", "json")
    assert rc == 0 and "GRIM" in out


def test_play(capsys):
    rc, out, _ = run(capsys, "play", "--agent1", "GRIM", "--agent2", "ALLD", "--format", "json")
    assert rc == 0 and json.loads(out)["totals"] == [9, 14]


def test_reproduce(capsys):
    rc, out, _ = run(capsys, "reproduce", "--list")
    assert rc == 0 and "tournament/framing:baseline" in out and "S29" in out
    rc, out, _ = run(capsys, "reproduce", "tournament/framing:baseline")
    assert rc == 0 and out.strip().endswith("cells pass")
    rc, out, _ = run(capsys, "reproduce", "S29-claude-baseline", "--samples", "20000", "--format", "json")
    d = json.loads(out)
    assert d["failed"] == 0 and any(c["cell"] == "claude.beat" for c in d["checks"])
