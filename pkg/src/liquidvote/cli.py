"""Command-line front end.

Subcommands ``evaluate``, ``compare``, ``iewds``, ``best-neutral``, ``cutoff``
and ``reproduce`` each emit one report, either as JSON records with a
stable key order (``--format record``) or as plain-text tables.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from typing import Optional

from . import __version__
from .comparison import DEFAULT_NODES, compare_scenario
from .engine import InstanceTooLarge, evaluate_profile
from .equilibrium import Budget, iewds
from .incomplete import (campbell_closed_form, campbell_instance, campbell_profile,
                         exante_utility, solve_campbell_cutoff)
from .model import Mechanism, ValidationError
from .neutral import SearchTooLarge, best_neutral_search
from .scenario import MissingAsset, ScenarioError, build_profile, load_scenario

SEED = Budget().seed


def _mechanism(scenario, kind: Optional[str], representatives: Optional[str]) -> Mechanism:
    if representatives:
        try:
            ids = [int(x) for x in representatives.split(",") if x.strip()]
        except ValueError:
            raise ScenarioError("representatives must be comma-separated voter ids",
                                scenario.id, "mechanism", "--representatives") from None
        n = scenario.committee.n if scenario.committee else 0
        if any(not 1 <= j <= n for j in ids):
            raise ScenarioError("representative id out of range", scenario.id, "mechanism",
                                "--representatives")
        return Mechanism.rd([j - 1 for j in ids])
    return scenario.mechanism(kind or "ld")


def _report(scenario_id: Optional[str], task: str, result) -> dict:
    return {"tool": "liquidvote", "version": __version__, "seed": SEED,
            "scenario": scenario_id, "task": task, "result": result}


# ---------------------------------------------------------------------------
# tasks


def cmd_evaluate(args) -> dict:
    s = load_scenario(args.scenario)
    name = args.profile
    mech_override = _mechanism(s, args.mechanism, args.representatives) \
        if (args.mechanism or args.representatives) else None
    mech, prof = build_profile(s, name, mech_override)
    try:
        if s.profiles[name]["kind"] == "threshold":
            rep = exante_utility(s.type_distribution, mech, prof)
            result = {"profile": name, "mechanism": str(mech), **rep.as_record()}
        else:
            rep = evaluate_profile(s.committee, mech, prof)
            result = {"profile": name, "mechanism": str(mech),
                      "strategies": [str(x) for x in prof], **rep.as_record()}
    except (ValidationError, InstanceTooLarge) as exc:
        raise ScenarioError(str(exc), s.id, "evaluate", getattr(exc, "path", "") or
                            f"profiles.{name}") from None
    return _report(s.id, "evaluate", result)


def cmd_compare(args) -> dict:
    s = load_scenario(args.scenario)
    nodes = args.budget if args.budget is not None else DEFAULT_NODES
    cells = compare_scenario(s, nodes=nodes, run_iewds=not args.no_iewds)
    return _report(s.id, "compare", {"node_cap": nodes, "cells": [c.as_record() for c in cells]})


def _budget(args) -> Budget:
    if args.budget is None:
        return Budget()
    return dataclasses.replace(Budget(), search_profiles=int(args.budget))


def cmd_iewds(args) -> dict:
    s = load_scenario(args.scenario)
    if s.committee is None:
        raise ScenarioError("needs a committee", s.id, "iewds", "voters")
    mech = _mechanism(s, args.mechanism, args.representatives)
    try:
        rep = iewds(s.committee, mech, budget=_budget(args))
    except InstanceTooLarge as exc:
        raise ScenarioError(str(exc), s.id, "iewds", "--budget") from None
    return _report(s.id, "iewds", {"mechanism": str(mech), "n_rounds": rep.n_rounds,
                                   **rep.as_record()})


def cmd_best_neutral(args) -> dict:
    s = load_scenario(args.scenario)
    if s.committee is None:
        raise ScenarioError("needs a committee", s.id, "best-neutral", "voters")
    if not all(v.is_independent for v in s.committee.voters):
        raise ScenarioError("neutral search covers all-independent committees", s.id,
                            "best-neutral", "voters")
    mech = _mechanism(s, args.mechanism, args.representatives)
    kwargs = {} if args.budget is None else {"max_configs": int(args.budget)}
    try:
        res = best_neutral_search(s.committee, mech, **kwargs)
    except SearchTooLarge as exc:
        raise ScenarioError(str(exc), s.id, "best-neutral", "--budget") from None
    return _report(s.id, "best-neutral", {
        "mechanism": str(mech), "neutral": res.neutral.as_record(),
        "strategies": [str(x) for x in res.profile], "is_equilibrium": res.is_equilibrium,
        "searched": res.searched, "tie_mass": res.tie_mass, **res.report.as_record()})


def cmd_cutoff(args) -> dict:
    try:
        sol = solve_campbell_cutoff(args.r, args.lo, args.hi)
    except (ValueError, ValidationError) as exc:
        raise ScenarioError(str(exc), "campbell", "cutoff", "--r/--lo/--hi") from None
    dist = campbell_instance(args.r, args.lo, args.hi)
    rep = exante_utility(dist, Mechanism.ld(), campbell_profile(dist, sol.cutoff))
    return _report("campbell", "cutoff", {
        "r": args.r, "lo": args.lo, "hi": args.hi, "cutoff": sol.cutoff,
        "boundary": sol.boundary, "p_correct": rep.p_correct,
        "closed_form": campbell_closed_form(sol.cutoff, args.r, args.lo, args.hi)})


def cmd_reproduce(args) -> dict:
    from .golden import ITEMS, run_item
    from .scenario import bundled_names
    required = {"single-expert", "non-neutral", "four-experts", "mixed-committee", "trio",
                "partisan-trio", "small-ds", "never-pivotal", "campbell", "three-player"}
    missing = sorted(required - set(bundled_names()))
    if missing:
        raise MissingAsset(f"bundled scenarios missing: {', '.join(missing)}",
                           missing[0], "reproduce", "path")
    which = range(1, len(ITEMS) + 1) if not args.items else \
        [int(k) for k in args.items.split(",")]
    items = []
    for k in which:
        it = run_item(k)
        items.append(it.as_record())
        if args.progress:
            print(f"[{'PASS' if it.passed else 'FAIL'}] {k}. {it.name}", file=sys.stderr)
    failing = [it["item"] for it in items if not it["passed"]]
    return _report(None, "reproduce", {"count": len(items), "passed": len(items) - len(failing),
                                             "failing": failing, "items": items})


# ---------------------------------------------------------------------------
# rendering


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, (list, dict)):
        return json.dumps(v)
    return str(v)


def render_table(report: dict) -> str:
    res = report["result"]
    head = f"# {report['task']}" + (f" [{report['scenario']}]" if report["scenario"] else "")
    lines = [head]
    if report["task"] == "compare":
        cols = ("mechanism", "best", "best_neutral", "iewds", "iewds_p_correct")
        rows = [[_fmt(c[k]) for k in cols] for c in res["cells"]]
        widths = [max(len(h), *(len(r[j]) for r in rows)) for j, h in enumerate(cols)]
        lines.append("  ".join(h.ljust(w) for h, w in zip(cols, widths)).rstrip())
        lines += ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows]
    elif report["task"] == "reproduce":
        for it in res["items"]:
            lines.append(f"{'PASS' if it['passed'] else 'FAIL'}  {it['item']}. {it['name']}")
            for f in it["failures"]:
                lines.append(f"      failed: {f}")
        lines.append(f"{res['passed']}/{res['count']} items passed")
    else:
        width = max(len(k) for k in res)
        lines += [f"{k.ljust(width)}  {_fmt(v)}" for k, v in res.items()]
    return "\n".join(lines) + "\n"


def render(report: dict, fmt: str) -> str:
    if fmt == "record":
        return json.dumps(report, indent=2) + "\n"
    return render_table(report)


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="liquidvote",
                                description="Voting equilibria with and without delegation.")
    p.add_argument("--version", action="version", version=f"liquidvote {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario=True, mechanism=True):
        if scenario:
            sp.add_argument("--scenario", required=True,
                            help="bundled scenario id or path to a JSON file")
        if mechanism:
            sp.add_argument("--mechanism", choices=("dd", "ld", "rd"))
            sp.add_argument("--representatives", help="comma-separated 1-based ids for rd")
        sp.add_argument("--budget", type=int, help="node cap for searches")
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=("table", "record"), default="table")

    sp = sub.add_parser("evaluate", help="evaluate a named profile of a scenario")
    common(sp)
    sp.add_argument("--profile", required=True)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("compare", help="compare mechanisms on a scenario")
    common(sp, mechanism=False)
    sp.add_argument("--no-iewds", action="store_true", help="skip iterated elimination")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("iewds", help="iterated elimination of weakly dominated strategies")
    common(sp)
    sp.set_defaults(func=cmd_iewds)

    sp = sub.add_parser("best-neutral", help="best neutral profile")
    common(sp)
    sp.set_defaults(func=cmd_best_neutral)

    sp = sub.add_parser("cutoff", help="cutoff equilibrium with uniform precisions")
    common(sp, scenario=False, mechanism=False)
    sp.add_argument("--r", type=float, default=0.7, help="expert precision")
    sp.add_argument("--lo", type=float, default=0.5)
    sp.add_argument("--hi", type=float, default=0.7)
    sp.set_defaults(func=cmd_cutoff)

    sp = sub.add_parser("reproduce", aliases=["reproduce-paper"],
                        help="run every reference check")
    common(sp, scenario=False, mechanism=False)
    sp.add_argument("--items", help="comma-separated item numbers (default: all)")
    sp.add_argument("--progress", action="store_true", help="print each verdict to stderr")
    sp.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, ValueError) as exc:
        scen = getattr(args, "scenario", None) or "-"
        path = getattr(exc, "path", "") or "-"
        print(f"error: {ScenarioError(str(exc), scen, args.command, path)}", file=sys.stderr)
        return 2
    text = render(report, args.format)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    if report["task"] == "reproduce" and report["result"]["failing"]:
        print("failing items: " + ", ".join(map(str, report["result"]["failing"])),
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
