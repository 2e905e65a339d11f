"""Dominance-solvability checks with and without delegation.

Runs iterated elimination under LD, DD and RD on one committee, evaluates the
counting conditions under which delegation makes the game dominance solvable,
and builds the equilibria that exist without delegation.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .engine import EvalReport, evaluate_profile
from .equilibrium import Budget, IEWDSReport, is_equilibrium, iewds
from .model import (ALWAYS_ABSTAIN, SINCERE, Committee, Mechanism, Preference,
                    ValidationError, always, classify_voters)


@dataclass(frozen=True)
class Prop5Conditions:
    n_e_ok: bool
    n_U_ok: bool
    pivotality_ok: bool
    n_e: int
    n_U: int
    surplus: int  # |n_A - n_B|
    max_bloc: int  # max(n_e + n_A, n_e + n_B)
    N: int

    @property
    def all_ok(self) -> bool:
        return self.n_e_ok and self.n_U_ok and self.pivotality_ok

    def as_record(self) -> dict:
        return {
            "n_e_ok": self.n_e_ok, "n_U_ok": self.n_U_ok, "pivotality_ok": self.pivotality_ok,
            "n_e": self.n_e, "n_U": self.n_U, "surplus": self.surplus,
            "max_bloc": self.max_bloc, "N": self.N,
        }


def check_prop5(committee: Committee) -> Prop5Conditions:
    c = classify_voters(committee)
    surplus = abs(c.n_A - c.n_B)
    bloc = max(c.n_e + c.n_A, c.n_e + c.n_B)
    return Prop5Conditions(
        n_e_ok=c.n_e >= 1,
        n_U_ok=c.n_U >= c.n_e + surplus + 1,
        pivotality_ok=2 * bloc <= committee.n,
        n_e=c.n_e, n_U=c.n_U, surplus=surplus, max_bloc=bloc, N=committee.n,
    )


def default_rd_sets(committee: Committee) -> list[frozenset]:
    """The expert(s) plus one partisan of each side, when present."""
    experts = [i for i, v in enumerate(committee.voters) if v.is_independent and v.precision == 1.0]
    a = [i for i, v in enumerate(committee.voters) if v.preference is Preference.PartisanA]
    b = [i for i, v in enumerate(committee.voters) if v.preference is Preference.PartisanB]
    J = set(experts) | set(a[:1]) | set(b[:1])
    return [frozenset(J)] if J else []


@dataclass
class Prop5Suite:
    conditions: Prop5Conditions
    ld: IEWDSReport
    dd: IEWDSReport
    rd: list = field(default_factory=list)  # (J, IEWDSReport)

    def as_record(self) -> dict:
        return {
            "conditions": self.conditions.as_record(),
            "ld": self.ld.as_record(),
            "dd": self.dd.as_record(),
            "rd": [{"J": sorted(j + 1 for j in J), "report": r.as_record()} for J, r in self.rd],
        }


def run_prop5_suite(committee: Committee, rd_sets=None, budget: Budget = Budget(),
                    max_rounds: Optional[int] = None) -> Prop5Suite:
    rd_sets = default_rd_sets(committee) if rd_sets is None else [frozenset(J) for J in rd_sets]
    ld = iewds(committee, Mechanism.ld(), max_rounds=max_rounds, budget=budget)
    dd = iewds(committee, Mechanism.dd(), max_rounds=max_rounds, budget=budget)
    rd = [(J, iewds(committee, Mechanism.rd(J), max_rounds=max_rounds, budget=budget))
          for J in rd_sets]
    return Prop5Suite(check_prop5(committee), ld, dd, rd)


# ---------------------------------------------------------------------------
# equilibria without delegation


def outcome_class(report: EvalReport) -> str:
    """Coarse efficiency label of an outcome distribution."""
    pa, pb = report.p_A_given_a, report.p_A_given_b
    if report.p_correct >= 1 - 1e-12:
        return "efficient"
    if pa >= 1 - 1e-12 and pb >= 1 - 1e-12:
        return "constant-A"
    if pa <= 1e-12 and pb <= 1e-12:
        return "constant-B"
    if min(report.p_correct_given_a, report.p_correct_given_b) <= 1e-12:
        return "wrong-in-one-state"
    return "inefficient"


@dataclass(frozen=True)
class CheckedProfile:
    label: str
    profile: tuple
    is_equilibrium: bool
    report: EvalReport
    efficiency: str

    def as_record(self) -> dict:
        return {
            "label": self.label,
            "profile": [str(s) for s in self.profile],
            "is_equilibrium": self.is_equilibrium,
            "p_correct": self.report.p_correct,
            "efficiency": self.efficiency,
        }


@dataclass
class Prop6Result:
    efficient_asymmetric: list
    all_abstain: CheckedProfile  # experts sincere
    all_abstain_equilibrium: Optional[CheckedProfile]  # first expert behavior that is an equilibrium
    unresponsive: list
    multiple_efficient: bool  # enough nonexperts to permute roles

    def as_record(self) -> dict:
        eq = self.all_abstain_equilibrium
        return {
            "efficient_asymmetric": [p.as_record() for p in self.efficient_asymmetric],
            "all_abstain": self.all_abstain.as_record(),
            "all_abstain_equilibrium": None if eq is None else eq.as_record(),
            "unresponsive": [p.as_record() for p in self.unresponsive],
            "multiple_efficient": self.multiple_efficient,
        }


def _check(committee: Committee, label: str, profile) -> CheckedProfile:
    mech = Mechanism.dd()
    ok, _ = is_equilibrium(committee, mech, profile)
    rep = evaluate_profile(committee, mech, profile)
    return CheckedProfile(label, tuple(profile), ok, rep, outcome_class(rep))


def wrong_in_some_state(report: EvalReport) -> bool:
    return min(report.p_correct_given_a, report.p_correct_given_b) <= 1e-12


EXPERT_FALLBACKS = (("sincere", SINCERE), ("abstain", ALWAYS_ABSTAIN),
                    ("unresponsive-A", always("A")), ("unresponsive-B", always("B")))


def _first_equilibrium(committee: Committee, label: str, base, experts, menu):
    """Try each expert behavior in ``menu`` order; return the first equilibrium found."""
    for name, s in menu:
        prof = list(base)
        for e in experts:
            prof[e] = s
        checked = _check(committee, f"{label} (experts {name})", prof)
        if checked.is_equilibrium:
            return checked
    return None


def prop6_equilibria(committee: Committee, max_samples: int = 6) -> Prop6Result:
    """Witness profiles for the game without delegation, each verified.

    Partisans vote for their side, perfectly informed independents vote
    sincerely.  The asymmetric witnesses have ``|n_A - n_B|`` nonexperts
    voting unresponsively against the partisan surplus and the rest
    abstaining; every choice of which nonexperts neutralize (up to
    ``max_samples``) is checked.

    The all-abstain and all-unresponsive witnesses keep experts sincere when
    that is an equilibrium.  Otherwise experts fall back to abstaining or to
    the same unresponsive vote, which is needed when a single deviation can
    still create a tie.
    """
    c = classify_voters(committee)
    cond = check_prop5(committee)
    if not (c.n_e >= 1 and c.n_I >= abs(c.n_A - c.n_B) and cond.pivotality_ok):
        raise ValidationError("needs n_e >= 1, n_I >= |n_A - n_B| and the pivotality bound",
                              "voters")
    voters = committee.voters
    base: list = [None] * committee.n
    nonexperts, experts = [], []
    for i, v in enumerate(voters):
        if v.preference is Preference.PartisanA:
            base[i] = always("A")
        elif v.preference is Preference.PartisanB:
            base[i] = always("B")
        elif v.precision == 1.0:
            base[i] = SINCERE
            experts.append(i)
        else:
            nonexperts.append(i)
    surplus = c.n_A - c.n_B
    against = "B" if surplus >= 0 else "A"
    asym = []
    for chosen in itertools.islice(itertools.combinations(nonexperts, abs(surplus)), max_samples):
        prof = list(base)
        for i in nonexperts:
            prof[i] = always(against) if i in chosen else ALWAYS_ABSTAIN
        label = "neutralize:" + ",".join(str(i + 1) for i in chosen)
        asym.append(_check(committee, label, prof))
    abstain_base = list(base)
    for i in nonexperts:
        abstain_base[i] = ALWAYS_ABSTAIN
    abstain = _check(committee, "all-abstain", abstain_base)
    abstain_eq = abstain if abstain.is_equilibrium else _first_equilibrium(
        committee, "all-abstain", abstain_base, experts, EXPERT_FALLBACKS[1:])
    unresp = []
    for side in ("A", "B"):
        prof = list(base)
        for i in nonexperts:
            prof[i] = always(side)
        menu = (("sincere", SINCERE), (f"unresponsive-{side}", always(side)))
        found = _first_equilibrium(committee, f"all-unresponsive-{side}", prof, experts, menu)
        unresp.append(found if found is not None else _check(committee, f"all-unresponsive-{side}", prof))
    # corrected reading of the multiplicity condition: n_U >= n_e + |n_A - n_B| + 1
    multiple = c.n_U >= c.n_e + abs(surplus) + 1
    return Prop6Result(asym, abstain, abstain_eq, unresp, multiple)


def all_abstain_expected_class(committee: Committee) -> str:
    c = classify_voters(committee)
    surplus = abs(c.n_A - c.n_B)
    if c.n_e > surplus:
        return "efficient"
    if c.n_e < surplus:
        return "inefficient"
    return "tie-in-one-state"
