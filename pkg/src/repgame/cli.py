"""Command-line front end: repgame <subcommand> [options].

Exit codes: 0 success, 1 domain error (or failed reproduction cells),
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional, Sequence

from .game import PD, DomainError, StageGame, parse_strategy, strategy_to_dict

FORMATS = ("table", "csv", "json")


# -- output helpers ------------------------------------------------------------------

def _cell(v):
    if isinstance(v, float):
        return f"{v:.6g}" if abs(v) < 1e-3 and v != 0 else f"{v:.4f}"
    return "" if v is None else str(v)


def emit(headers, rows, fmt: str, payload=None, out=None):
    """Print rows as an aligned table, CSV, or JSON (payload if given)."""
    out = out or sys.stdout
    if fmt == "json":
        data = payload if payload is not None else [dict(zip(headers, r)) for r in rows]
        json.dump(data, out, indent=2, default=str)
        out.write("\n")
        return
    text = [[_cell(v) for v in r] for r in rows]
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(headers)
        w.writerows(text)
        return
    widths = [max(len(str(h)), *(len(r[i]) for r in text)) if text else len(str(h))
              for i, h in enumerate(headers)]
    out.write("  ".join(str(h).ljust(n) for h, n in zip(headers, widths)).rstrip() + "\n")
    for r in text:
        out.write("  ".join(c.ljust(n) for c, n in zip(r, widths)).rstrip() + "\n")


def _game(args) -> StageGame:
    if getattr(args, "x", None) is not None:
        if args.game:
            raise DomainError("give either --game or --x, not both")
        return StageGame.equal_gains(args.x)
    return StageGame.parse(args.game) if args.game else PD


def _config(args) -> dict:
    if not getattr(args, "config", None):
        return {}
    with open(args.config, encoding="utf-8") as f:
        return json.load(f)


# -- subcommands ---------------------------------------------------------------------

def cmd_payoff(args):
    from .payoff_m1 import payoff
    from .payoff_m2 import payoff_m2
    q, p = parse_strategy(args.q), parse_strategy(args.p)
    g = _game(args)
    if q.memory == 1 and p.memory == 1:
        a, b = payoff(q, p, g, args.w), payoff(p, q, g, args.w)
    else:
        if args.w == 0:
            raise DomainError("memory-2 payoffs need w > 0")
        a, b = payoff_m2(q, p, g, args.w), payoff_m2(p, q, g, args.w)
    emit(["player", "payoff"], [["q", a], ["p", b]], args.format,
         {"game": str(g), "w": args.w, "q": a, "p": b})


def cmd_classify(args):
    from .classify import classify
    s = parse_strategy(args.strategy)
    g = _game(args)
    c = classify(s, g, args.w, tol=args.tol, n_samples=args.samples, seed=args.seed,
                 require_pd=not args.any_game, workers=args.workers, with_beat=not args.no_beat)
    if args.method == "mdp":
        from .classify import is_nash
        ok, _, _ = is_nash(s, g, args.w, args.tol, method="mdp")
        if ok != c.is_nash:
            c.notes.append("best-response check disagrees with the enumeration")
    d = c.to_dict()
    rows = [["nash", c.is_nash], ["partner", c.is_partner], ["rival", c.is_rival],
            ["self payoff", c.self_payoff], ["best deviant payoff", c.worst_deviation_payoff],
            ["best deviant", ",".join(_cell(v) for v in c.worst_deviation.as_tuple())],
            ["beat %", c.beat_percentage]]
    rows += [["note", n] for n in c.notes]
    emit(["property", "value"], rows, args.format, d)


def cmd_region(args):
    from .classify import payoff_region
    s = parse_strategy(args.strategy)
    r = payoff_region(s, _game(args), args.w, args.samples, args.seed)
    rows = [[a, b] for a, b in r.pairs]
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as f:
            emit(["opponent_payoff", "strategy_payoff"], rows, "csv", out=f)
    summary = [["opponent min", r.opp_range[0]], ["opponent max", r.opp_range[1]],
               ["strategy min", r.self_range[0]], ["strategy max", r.self_range[1]]]
    emit(["quantity", "value"], summary, args.format,
         {"opponent_range": r.opp_range, "strategy_range": r.self_range, "points": len(rows)})


def cmd_infer(args):
    from .inference import ScenarioCounts, infer_strategy, scenarios_for, strategy_table_csv
    if args.input:
        with open(args.input, encoding="utf-8") as f:
            data = json.load(f)
        counts = ScenarioCounts.from_dict(data.get("counts", data))
    elif args.counts:
        ls = [int(v) for v in args.counts.split(",")]
        counts = ScenarioCounts.from_lists(ls, args.trials)
    else:
        raise DomainError("give --counts or --input")
    inf = infer_strategy(counts)
    if args.format == "csv":
        sys.stdout.write(strategy_table_csv({args.name: inf}))
        return
    names = scenarios_for(counts.memory)
    rows = [[s, iv.point, iv.display()] for s, iv in zip(names, inf.intervals)]
    rows.append(["label", str(inf.label), ""])
    emit(["scenario", "mean", "95% interval"], rows, args.format,
         {"strategy": strategy_to_dict(inf.strategy), "label": str(inf.label),
          "intervals": [[iv.lower, iv.upper] for iv in inf.intervals]})


def cmd_tournament(args):
    from .tournament import run_tournament
    if args.setting:
        from .reproduce import game_for, roster, w_for
        players = roster(args.setting)
        g = game_for(args.setting) if not (args.game or args.x is not None) else _game(args)
        w = w_for(args.setting) if args.w is None else args.w
    else:
        if not args.player:
            raise DomainError("give --setting or at least one --player name=strategy")
        players = []
        for item in args.player:
            name, _, spec = item.partition("=")
            players.append((name, parse_strategy(spec or name)))
        g = _game(args)
        w = 0.01 if args.w is None else args.w
    res = run_tournament(players, g, w, include_self=not args.exclude_self)
    rows = [[n, *res.matrix[i], res.row_sums[i], res.ranks[i]] for i, n in enumerate(res.names)]
    emit(["", *res.names, "sum", "rank"], rows, args.format, res.to_dict())


def cmd_elicit(args):
    from .harness import agent_from_config, run_elicitation, treatment_from_config, write_jsonl
    cfg = _config(args)
    for k in ("treatment", "framing", "w", "x"):
        v = getattr(args, k if k != "treatment" else "treatment_kind", None)
        if v is not None:
            cfg[k] = v
    agent_cfg = cfg.get("agent") or {"kind": "scripted", "strategy": args.agent}
    if args.agent:
        agent_cfg = {"kind": "scripted", "strategy": args.agent}
    if not agent_cfg.get("strategy") and agent_cfg.get("kind", "scripted") == "scripted":
        raise DomainError("no agent given (use --agent or a config file)")
    t = treatment_from_config(cfg)
    game = StageGame.parse(cfg["game"]) if isinstance(cfg.get("game"), str) else None
    res = run_elicitation(t, agent_from_config(agent_cfg), trials=args.trials or cfg.get("trials", 50),
                          seed=args.seed if args.seed is not None else cfg.get("seed", 0), g=game,
                          workers=cfg.get("workers", 1))
    if args.log:
        write_jsonl(res.records, args.log)
    summary = res.summary()
    if t.kind != "one_shot":
        summary["counts"] = res.counts().to_dict()
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as f:
            json.dump(summary, f, indent=2)
    rows = [[s, tl.l, tl.n, tl.unparseable, tl.failed] for s, tl in res.tallies.items()]
    emit(["scenario", "L", "n", "unparseable", "failed"], rows, args.format, summary)


def cmd_play(args):
    from .harness import agent_from_config, run_actual_play
    cfg = _config(args)
    a1 = agent_from_config(cfg["agent1"]) if "agent1" in cfg else agent_from_config(
        {"kind": "scripted", "strategy": args.agent1})
    a2 = agent_from_config(cfg["agent2"]) if "agent2" in cfg else agent_from_config(
        {"kind": "scripted", "strategy": args.agent2})
    g = _game(args)
    tr = run_actual_play(a1, a2, rounds=args.rounds, ending=args.ending, g=g, seed=args.seed)
    rows = [[k + 1, a, b] for k, (a, b) in enumerate(tr.actions)]
    rows.append(["total", tr.totals[0], tr.totals[1]])
    emit(["round", a1.name, a2.name], rows, args.format, tr.to_dict())


def cmd_reproduce(args):
    from .reproduce import published, reproduce, table_ids
    if args.list or not args.table:
        ids = table_ids() + sorted(published().get("aliases", {}))
        emit(["table id"], [[i] for i in ids], args.format)
        return 0
    checks = reproduce(args.table, n_samples=args.samples, seed=args.seed)
    rows = [[c.table, c.cell, c.expected, c.got, c.status, c.detail] for c in checks]
    failed = sum(c.status == "fail" for c in checks)
    emit(["table", "cell", "expected", "got", "status", "detail"], rows, args.format,
         {"checks": [c.__dict__ for c in checks], "failed": failed})
    if args.format == "table":
        print(f"{len(checks) - failed}/{len(checks)} cells pass")
    return 1 if failed else 0


# -- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="repgame", description="Bounded-memory repeated games toolkit.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="table")
    gamearg = argparse.ArgumentParser(add_help=False)
    gamearg.add_argument("--game", help="payoffs a_LL,a_LR,a_RL,a_RR (default 3,0,5,1)")
    gamearg.add_argument("--x", type=float, help="equal-gains game (10, 0, 10+x, x)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("payoff", parents=[common, gamearg], help="expected per-round payoffs")
    s.add_argument("--q", required=True, help="focal strategy (name, entries or JSON)")
    s.add_argument("--p", required=True, help="co-player strategy")
    s.add_argument("--w", type=float, default=0.01, help="stopping probability (0 = limit of means)")
    s.set_defaults(func=cmd_payoff)

    s = sub.add_parser("classify", parents=[common, gamearg], help="Nash / partner / rival")
    s.add_argument("strategy")
    s.add_argument("--w", type=float, default=0.01)
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--samples", type=int, default=10**6, help="opponents for the beat percentage")
    s.add_argument("--seed", type=int, default=20240601)
    s.add_argument("--workers", type=int)
    s.add_argument("--method", choices=("enumerate", "mdp"), default="enumerate",
                   help="mdp additionally cross-checks Nash by policy iteration")
    s.add_argument("--no-beat", action="store_true")
    s.add_argument("--any-game", action="store_true", help="evaluate partner/rival outside the PD")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("region", parents=[common, gamearg], help="sample the payoff region")
    s.add_argument("strategy")
    s.add_argument("--w", type=float, default=0.01)
    s.add_argument("--samples", type=int, default=10**4)
    s.add_argument("--seed", type=int, default=20240601)
    s.add_argument("--output", help="write all payoff pairs to this CSV file")
    s.set_defaults(func=cmd_region)

    s = sub.add_parser("infer", parents=[common], help="strategy and intervals from counts")
    s.add_argument("--counts", help="comma separated L counts (5 or 21)")
    s.add_argument("--trials", type=int, default=50, help="trials per scenario")
    s.add_argument("--input", help="summary JSON written by 'elicit'")
    s.add_argument("--name", default="agent")
    s.set_defaults(func=cmd_infer)

    s = sub.add_parser("tournament", parents=[common, gamearg], help="round-robin payoff matrix")
    s.add_argument("--setting", help="published roster, e.g. framing:baseline or equal_gains:4")
    s.add_argument("--player", action="append", help="name=strategy (repeatable)")
    s.add_argument("--w", type=float)
    s.add_argument("--exclude-self", action="store_true")
    s.set_defaults(func=cmd_tournament)

    s = sub.add_parser("elicit", parents=[common, gamearg], help="run an elicitation experiment")
    s.add_argument("--config", help="experiment config JSON")
    s.add_argument("--agent", help="scripted strategy")
    s.add_argument("--treatment", dest="treatment_kind",
                   choices=("baseline", "framing", "stopping", "equal_gains", "memory2", "one_shot"))
    s.add_argument("--framing")
    s.add_argument("--w", type=float)
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--log", help="write the record log (JSON lines)")
    s.add_argument("--summary", help="write the count summary (JSON)")
    s.set_defaults(func=cmd_elicit)

    s = sub.add_parser("play", parents=[common, gamearg], help="play one multi-round game")
    s.add_argument("--config", help="JSON with agent1/agent2 configs")
    s.add_argument("--agent1", default="TFT")
    s.add_argument("--agent2", default="TFT")
    s.add_argument("--rounds", type=int, default=10)
    s.add_argument("--ending", choices=("exact", "at_least"), default="exact")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_play)

    s = sub.add_parser("reproduce", parents=[common], help="recompute a published table")
    s.add_argument("table", nargs="?")
    s.add_argument("--list", action="store_true")
    s.add_argument("--samples", type=int, default=10**6)
    s.add_argument("--seed", type=int, default=20240601)
    s.set_defaults(func=cmd_reproduce)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rc = args.func(args)
    except DomainError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
