"""Side-by-side comparison of DD, LD and RD on one scenario.

Each cell holds a best value, a best neutral value and an IEWDS verdict.  A
cell whose search space exceeds the node cap is reported as undecided rather
than aborting the comparison.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .engine import InstanceTooLarge
from .equilibrium import Budget, best_equilibrium_search, iewds
from .incomplete import (ThresholdStrategy, TypeDistribution, best_threshold_search,
                         threshold_candidates)
from .model import (ABSTAIN, SINCERE, InterimStrategy, Mechanism, always, always_delegate)
from .neutral import SearchTooLarge, best_neutral_search
from .scenario import Scenario

DEFAULT_NODES = 10 ** 8
DEFAULT_STEP = 0.01
UNDECIDED_CELL = "undecided"


@dataclass(frozen=True)
class Cell:
    mechanism: str
    best: object  # float, or UNDECIDED_CELL
    best_neutral: object  # float, None (not applicable) or UNDECIDED_CELL
    iewds: str  # "solvable", "not-solvable", "undecided", "skipped" or "n/a"
    iewds_p_correct: Optional[float] = None

    def as_record(self) -> dict:
        return {"mechanism": self.mechanism, "best": self.best, "best_neutral": self.best_neutral,
                "iewds": self.iewds, "iewds_p_correct": self.iewds_p_correct}


def search_nodes(scenario: Scenario, mechanism: Mechanism) -> float:
    """Size of the independents' full interim strategy space."""
    c = scenario.committee
    return math.prod(float(len(mechanism.strategies(c, i))) for i in c.independents())


def _complete_cell(scenario: Scenario, mech: Mechanism, nodes: float,
                   budget: Budget, run_iewds: bool) -> Cell:
    c = scenario.committee
    feasible = search_nodes(scenario, mech) <= nodes
    best: object = UNDECIDED_CELL
    if feasible:
        try:
            best = best_equilibrium_search(c, mech, budget=budget).report.p_correct
        except InstanceTooLarge:
            pass
    neutral: object = None
    if all(v.is_independent for v in c.voters):
        try:
            neutral = best_neutral_search(c, mech, check_equilibrium=False).report.p_correct
        except SearchTooLarge:
            neutral = UNDECIDED_CELL
    verdict, pc = ("undecided" if run_iewds else "skipped"), None
    if run_iewds and feasible:
        try:
            rep = iewds(c, mech, budget=budget)
            if rep.solvable is None:
                verdict = "undecided"
            else:
                verdict = "solvable" if rep.solvable else "not-solvable"
                pc = rep.solution_metrics.p_correct if rep.solvable else None
        except InstanceTooLarge:
            pass
    return Cell(str(mech), best, neutral, verdict, pc)


# ---------------------------------------------------------------------------
# incomplete information


def threshold_menus(distribution: TypeDistribution, mechanism: Mechanism,
                    step: float = DEFAULT_STEP) -> tuple[dict, dict]:
    """Finite strategy menus for :func:`best_threshold_search`.

    Partisan atoms vote for their side and perfectly informed atoms vote
    sincerely.  Other independent atoms choose among sincere voting,
    abstention and (under LD) delegation to any other voter.  Segments use
    one cutoff on a ``step`` grid with a non-voting action below and sincere
    voting above, plus every constant menu item.  The LD menus contain the DD
    menus, so the LD optimum is never below the DD optimum.
    """
    if mechanism.kind == "rd":
        raise ValueError("threshold menus cover dd and ld")
    n = distribution.n
    atom_options, threshold_options = {}, {}
    for i, d in enumerate(distribution.voters):
        low = [ABSTAIN]
        if mechanism.kind == "ld":
            low += [always_delegate(j).on_a for j in range(n) if j != i]
        low_s = [InterimStrategy(a, a) for a in low]
        for k, (t, _) in enumerate(d.atoms):
            if t.preference.is_partisan:
                atom_options[(i, k)] = [always(t.preference.value[-1])]
            elif t.precision == 1.0:
                atom_options[(i, k)] = [SINCERE]
            else:
                atom_options[(i, k)] = [SINCERE] + low_s
        if d.segment is not None:
            seg = d.segment
            cands = [ThresholdStrategy.constant(s) for s in [SINCERE] + low_s]
            cands += threshold_candidates(seg.lo, seg.hi, low_s, [SINCERE], step)
            threshold_options[i] = cands
    return atom_options, threshold_options


def _incomplete_cell(scenario: Scenario, mech: Mechanism, nodes: float, step: float) -> Cell:
    dist = scenario.type_distribution
    atoms, thresholds = threshold_menus(dist, mech, step)
    size = 1.0
    for i, d in enumerate(dist.voters):
        per = math.prod(len(atoms[(i, k)]) for k in range(len(d.atoms)))
        size *= per * (len(thresholds[i]) if d.segment is not None else 1)
    if size > nodes:
        return Cell(str(mech), UNDECIDED_CELL, None, "n/a")
    res = best_threshold_search(dist, mech, atoms, thresholds)
    return Cell(str(mech), res.report.p_correct, None, "n/a")


def compare_scenario(scenario: Scenario, nodes: float = DEFAULT_NODES, budget: Budget = Budget(),
                     run_iewds: bool = True, step: float = DEFAULT_STEP) -> list[Cell]:
    mechs = list(scenario.mechanisms)
    if scenario.committee is None:
        mechs = [m for m in mechs if m.kind != "rd"]
        return [_incomplete_cell(scenario, m, nodes, step) for m in mechs]
    return [_complete_cell(scenario, m, nodes, budget, run_iewds) for m in mechs]
