"""Game instances: voters, committees, mechanisms, actions and interim strategies.

Voters are addressed by 0-based index in the Python API.  Scenario files and
CLI reports use 1-based ids; conversion happens in :mod:`liquidvote.scenario`.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union


class ValidationError(ValueError):
    """Raised when an instance violates a model invariant.

    ``path`` names the offending field, e.g. ``voters[3].precision``.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class Alternative(enum.Enum):
    A = "A"
    B = "B"


class State(enum.Enum):
    a = "a"
    b = "b"

    @property
    def alternative(self) -> Alternative:
        return Alternative.A if self is State.a else Alternative.B

    @property
    def other(self) -> "State":
        return State.b if self is State.a else State.a


STATES = (State.a, State.b)


class Preference(enum.Enum):
    PartisanA = "A"
    PartisanB = "B"
    Independent = "I"

    @property
    def is_partisan(self) -> bool:
        return self is not Preference.Independent


@dataclass(frozen=True)
class VoterType:
    preference: Preference
    precision: float = 0.5

    def __post_init__(self):
        q = self.precision
        if not isinstance(q, (int, float)) or math.isnan(q) or not 0.5 <= q <= 1.0:
            raise ValidationError(f"precision {q!r} outside [0.5, 1]", "precision")
        object.__setattr__(self, "precision", float(q))

    @property
    def is_independent(self) -> bool:
        return self.preference is Preference.Independent


def independent(q: float) -> VoterType:
    return VoterType(Preference.Independent, q)


def partisan(side: str | Alternative, q: float = 0.5) -> VoterType:
    side = Alternative(side) if isinstance(side, str) else side
    pref = Preference.PartisanA if side is Alternative.A else Preference.PartisanB
    return VoterType(pref, q)


@dataclass(frozen=True)
class VoterCounts:
    n_A: int
    n_B: int
    n_I: int
    n_e: int
    n_U: int

    def as_dict(self) -> dict:
        return {"n_A": self.n_A, "n_B": self.n_B, "n_I": self.n_I,
                "n_e": self.n_e, "n_U": self.n_U}


@dataclass(frozen=True)
class Committee:
    voters: tuple[VoterType, ...]
    prior: float = 0.5

    def __post_init__(self):
        voters = tuple(self.voters)
        object.__setattr__(self, "voters", voters)
        if not voters:
            raise ValidationError("committee needs at least one voter", "voters")
        for i, v in enumerate(voters):
            if not isinstance(v, VoterType):
                raise ValidationError("not a VoterType", f"voters[{i}]")
        if not 0.0 < self.prior < 1.0:
            raise ValidationError(f"prior {self.prior!r} outside (0, 1)", "prior")
        object.__setattr__(self, "prior", float(self.prior))

    @property
    def n(self) -> int:
        return len(self.voters)

    def precision(self, i: int) -> float:
        return self.voters[i].precision

    def prior_of(self, state: State) -> float:
        return self.prior if state is State.a else 1.0 - self.prior

    def independents(self) -> list[int]:
        return [i for i, v in enumerate(self.voters) if v.is_independent]

    def replace_voters(self, voters: Iterable[VoterType]) -> "Committee":
        return Committee(tuple(voters), self.prior)


def classify_voters(committee: Committee) -> VoterCounts:
    n_A = sum(v.preference is Preference.PartisanA for v in committee.voters)
    n_B = sum(v.preference is Preference.PartisanB for v in committee.voters)
    ind = [v for v in committee.voters if v.is_independent]
    n_e = sum(v.precision == 1.0 for v in ind)
    return VoterCounts(n_A, n_B, len(ind), n_e, len(ind) - n_e)


# Mechanical RD representatives.  They are not members of the committee.
A_STAR = "a*"
B_STAR = "b*"
MECHANICAL = (A_STAR, B_STAR)

Target = Union[int, str]


@functools.total_ordering
@dataclass(frozen=True)
class Action:
    """One of: vote A (``kind='a'``), vote B, abstain (``'x'``), delegate (``'d'``)."""

    kind: str
    target: Target | None = None

    def __post_init__(self):
        if self.kind not in ("a", "b", "x", "d"):
            raise ValidationError(f"unknown action kind {self.kind!r}")
        if (self.kind == "d") != (self.target is not None):
            raise ValidationError("only delegation carries a target")

    @property
    def is_delegation(self) -> bool:
        return self.kind == "d"

    def __str__(self):
        if self.kind == "d":
            t = self.target if isinstance(self.target, str) else self.target + 1
            return f"d{t}"
        return self.kind

    def __lt__(self, other):
        return _action_key(self) < _action_key(other)


def _action_key(a: Action):
    order = {"a": 0, "b": 1, "x": 2, "d": 3}
    t = a.target
    tk = (-1, "") if t is None else ((1, t) if isinstance(t, str) else (0, f"{t:06d}"))
    return (order[a.kind], tk)


VOTE_A = Action("a")
VOTE_B = Action("b")
ABSTAIN = Action("x")


def delegate(target: Target) -> Action:
    return Action("d", target)


def vote_for(alt: Alternative | State) -> Action:
    if isinstance(alt, State):
        alt = alt.alternative
    return VOTE_A if alt is Alternative.A else VOTE_B


@dataclass(frozen=True, order=True)
class InterimStrategy:
    on_a: Action
    on_b: Action

    def action(self, signal: State) -> Action:
        return self.on_a if signal is State.a else self.on_b

    @property
    def responsive(self) -> bool:
        return self.on_a != self.on_b

    def __str__(self):
        return f"({self.on_a},{self.on_b})"


SINCERE = InterimStrategy(VOTE_A, VOTE_B)
ALWAYS_ABSTAIN = InterimStrategy(ABSTAIN, ABSTAIN)


def unresponsive(action: Action) -> InterimStrategy:
    return InterimStrategy(action, action)


def always(alt: str | Alternative) -> InterimStrategy:
    alt = Alternative(alt) if isinstance(alt, str) else alt
    return unresponsive(vote_for(alt))


def always_delegate(target: Target) -> InterimStrategy:
    return unresponsive(delegate(target))


StrategyProfile = tuple  # tuple[InterimStrategy, ...], one per voter


@dataclass(frozen=True)
class Mechanism:
    kind: str  # "dd", "ld" or "rd"
    representatives: frozenset = field(default_factory=frozenset)
    mechanical_partisans_vote: bool = True

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in ("dd", "ld", "rd"):
            raise ValidationError(f"unknown mechanism {self.kind!r}", "mechanism")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "representatives", frozenset(self.representatives))
        if kind != "rd" and self.representatives:
            raise ValidationError("representatives only apply to rd", "mechanism.representatives")

    @classmethod
    def dd(cls) -> "Mechanism":
        return cls("dd")

    @classmethod
    def ld(cls) -> "Mechanism":
        return cls("ld")

    @classmethod
    def rd(cls, representatives: Iterable[int], mechanical_partisans_vote: bool = True) -> "Mechanism":
        return cls("rd", frozenset(representatives), mechanical_partisans_vote)

    @property
    def has_mechanical(self) -> bool:
        return self.kind == "rd"

    def check_committee(self, committee: Committee) -> None:
        for j in self.representatives:
            if not (isinstance(j, int) and 0 <= j < committee.n):
                raise ValidationError(f"representative {j!r} is not a voter",
                                      "mechanism.representatives")

    def legal_actions(self, committee: Committee, voter: int) -> list[Action]:
        """Actions available to ``voter``, in canonical order."""
        n = committee.n
        if self.kind == "dd":
            return [VOTE_A, VOTE_B, ABSTAIN]
        if self.kind == "ld":
            return [VOTE_A, VOTE_B, ABSTAIN] + [delegate(j) for j in range(n) if j != voter]
        if voter in self.representatives:
            return [VOTE_A, VOTE_B, ABSTAIN]
        reps = sorted(self.representatives)
        return [ABSTAIN] + [delegate(j) for j in reps] + [delegate(A_STAR), delegate(B_STAR)]

    def is_legal(self, committee: Committee, voter: int, action: Action) -> bool:
        if action.is_delegation:
            t = action.target
            if t == voter:
                return False
            if self.kind == "dd":
                return False
            if self.kind == "ld":
                return isinstance(t, int) and 0 <= t < committee.n
            if voter in self.representatives:
                return False
            return t in MECHANICAL or t in self.representatives
        if self.kind == "rd" and voter not in self.representatives:
            return action.kind == "x"
        return True

    def strategies(self, committee: Committee, voter: int) -> list[InterimStrategy]:
        acts = self.legal_actions(committee, voter)
        return [InterimStrategy(x, y) for x in acts for y in acts]

    def __str__(self):
        if self.kind == "rd":
            return "rd{" + ",".join(str(j + 1) for j in sorted(self.representatives)) + "}"
        return self.kind


def validate_profile(committee: Committee, mechanism: Mechanism,
                     profile: Sequence[InterimStrategy]) -> tuple:
    profile = tuple(profile)
    if len(profile) != committee.n:
        raise ValidationError(f"profile has {len(profile)} strategies for {committee.n} voters",
                              "profile")
    for i, s in enumerate(profile):
        for sig, act in (("a", s.on_a), ("b", s.on_b)):
            if not mechanism.is_legal(committee, i, act):
                raise ValidationError(f"action {act} illegal under {mechanism}",
                                      f"profile[{i}].on_{sig}")
    return profile


def as_ld_profile(committee: Committee, mechanism: Mechanism, profile) -> tuple:
    """Embed a DD profile into LD (identity on actions).

    RD profiles cannot be embedded verbatim because of the mechanical
    representatives; use :func:`liquidvote.engine.evaluate_profile` directly.
    """
    if mechanism.kind == "rd":
        raise ValidationError("rd profiles use mechanical representatives", "mechanism")
    return validate_profile(committee, Mechanism.ld(), profile)
