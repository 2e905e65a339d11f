"""Scenario files: committees, mechanisms and named profiles in JSON.

Voter ids in files are 1-based; everything returned here is 0-based.  A
scenario looks like::

    {
      "id": "single-expert",
      "prior": 0.5,
      "voters": [{"preference": "I", "precision": 0.6, "count": 8},
                 {"preference": "I", "precision": 0.7}],
      "mechanisms": ["ld", "dd", {"kind": "rd", "representatives": [1, 2, 9]}],
      "profiles": {
        "single-expert": {"kind": "single-expert"},
        "overdelegation": {"kind": "actions", "mechanism": "ld",
                           "actions": ["d9", "d9", "d4", "sincere", ...]}
      }
    }

Profile kinds are ``actions``, ``vx``, ``weighted``, ``single-expert``,
``multi-expert`` and ``threshold`` (the last needs a ``type_distribution``).  A strategy is written
``"sincere"``, a single action token (played at both signals) or a pair
``[on_a, on_b]``; action tokens are ``a``, ``b``, ``x``, ``dK``, ``da*`` and
``db*``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from .model import (A_STAR, ABSTAIN, B_STAR, SINCERE, VOTE_A, VOTE_B, Action, Committee,
                    InterimStrategy, Mechanism, Preference, ValidationError, VoterType,
                    delegate)

PREFERENCES = {"I": Preference.Independent, "A": Preference.PartisanA,
               "B": Preference.PartisanB}
PROFILE_KINDS = ("actions", "vx", "weighted", "single-expert", "multi-expert", "threshold")


class ScenarioError(ValueError):
    """A scenario could not be loaded or a task on it failed."""

    def __init__(self, message: str, scenario: str = "?", task: str = "load", field: str = ""):
        self.scenario = scenario
        self.task = task
        self.field = field
        super().__init__(f"scenario {scenario!r}, task {task!r}, field {field or '-'!r}: {message}")


class MissingAsset(ScenarioError):
    """A bundled scenario file is absent."""


@dataclass
class Scenario:
    id: str
    committee: Optional[Committee]
    mechanisms: list
    profiles: dict = field(default_factory=dict)
    type_distribution: object = None
    description: str = ""
    source: str = ""

    def mechanism(self, kind: str) -> Mechanism:
        """First listed mechanism of the given kind (``rd`` picks the first J)."""
        for m in self.mechanisms:
            if m.kind == kind:
                return m
        if kind in ("ld", "dd"):
            return Mechanism(kind)
        raise ScenarioError(f"no {kind} mechanism declared", self.id, "mechanism", "mechanisms")

    def rd_mechanisms(self) -> list:
        return [m for m in self.mechanisms if m.kind == "rd"]


# ---------------------------------------------------------------------------
# tokens


def parse_action(token: str, n: int) -> Action:
    if token == "a":
        return VOTE_A
    if token == "b":
        return VOTE_B
    if token == "x":
        return ABSTAIN
    if token == "da*":
        return delegate(A_STAR)
    if token == "db*":
        return delegate(B_STAR)
    if isinstance(token, str) and token.startswith("d") and token[1:].isdigit():
        k = int(token[1:])
        if not 1 <= k <= n:
            raise ValidationError(f"delegation target {k} is not a voter id")
        return delegate(k - 1)
    raise ValidationError(f"unknown action token {token!r}")


def parse_strategy(spec, n: int) -> InterimStrategy:
    if spec == "sincere":
        return SINCERE
    if isinstance(spec, str):
        act = parse_action(spec, n)
        return InterimStrategy(act, act)
    if isinstance(spec, (list, tuple)) and len(spec) == 2:
        return InterimStrategy(parse_action(spec[0], n), parse_action(spec[1], n))
    raise ValidationError(f"bad strategy {spec!r}")


def format_strategy(s: InterimStrategy) -> str:
    return str(s)


def parse_mechanism(spec, n: Optional[int]) -> Mechanism:
    if isinstance(spec, str):
        return Mechanism(spec)
    if isinstance(spec, dict) and spec.get("kind") == "rd":
        reps = spec.get("representatives")
        if not isinstance(reps, list) or not all(isinstance(j, int) for j in reps):
            raise ValidationError("representatives must be a list of voter ids",
                                  "representatives")
        if n is not None and any(not 1 <= j <= n for j in reps):
            raise ValidationError("representative id out of range", "representatives")
        return Mechanism.rd([j - 1 for j in reps],
                            spec.get("mechanical_partisans_vote", True))
    if isinstance(spec, dict):
        return Mechanism(spec.get("kind", "?"))
    raise ValidationError(f"bad mechanism {spec!r}")


def _voter_type(spec: dict) -> VoterType:
    pref = spec.get("preference", "I")
    if pref not in PREFERENCES:
        raise ValidationError(f"unknown preference {pref!r}", "preference")
    default = 0.5 if pref != "I" else None
    q = spec.get("precision", default)
    if q is None:
        raise ValidationError("independents need a precision", "precision")
    return VoterType(PREFERENCES[pref], q)


def _expand(entries, what: str) -> list:
    out = []
    for k, e in enumerate(entries):
        if not isinstance(e, dict):
            raise ValidationError("entry must be an object", f"{what}[{k}]")
        count = e.get("count", 1)
        if not isinstance(count, int) or count < 1:
            raise ValidationError(f"count {count!r} must be a positive integer",
                                  f"{what}[{k}].count")
        out.extend([(k, e)] * count)
    return out


def _type_distribution(spec: dict):
    from .incomplete import TypeDistribution, UniformSegment, VoterDistribution
    voters = []
    for k, e in _expand(spec.get("voters", []), "type_distribution.voters"):
        path = f"type_distribution.voters[{k}]"
        try:
            atoms = tuple((_voter_type(a), a["probability"]) for a in e.get("atoms", []))
            seg = e.get("segment")
            segment = None if seg is None else UniformSegment(seg["lo"], seg["hi"], seg["mass"])
            voters.append(VoterDistribution(atoms, segment))
        except KeyError as exc:
            raise ValidationError(f"missing key {exc.args[0]!r}", path) from None
        except ValidationError as exc:
            raise ValidationError(str(exc), path) from None
    return TypeDistribution(tuple(voters), spec.get("prior", 0.5))


def parse_plans(spec: list, n: int) -> tuple:
    """Ex-ante plans: per voter ``{"atoms": [...], "threshold": {...}}``."""
    from .incomplete import ThresholdStrategy, VoterPlan
    plans = []
    for i, p in enumerate(spec):
        atoms = tuple(parse_strategy(s, n) for s in p.get("atoms", []))
        thr = p.get("threshold")
        if thr is not None:
            thr = ThresholdStrategy(tuple(thr.get("cutoffs", [])),
                                    tuple(parse_strategy(s, n) for s in thr["strategies"]))
        plans.append(VoterPlan(atoms, thr))
    return tuple(plans)


# ---------------------------------------------------------------------------
# loading


def parse_scenario(data: dict, source: str = "") -> Scenario:
    sid = data.get("id", source or "?") if isinstance(data, dict) else source or "?"
    if not isinstance(data, dict):
        raise ScenarioError("top level must be an object", sid)
    fld = "voters"
    try:
        committee = None
        if "voters" in data:
            voters = [_voter_type(e) for _, e in _expand(data["voters"], "voters")]
            fld = "prior"
            committee = Committee(tuple(voters), data.get("prior", 0.5))
        n = committee.n if committee else None
        fld = "type_distribution"
        dist = _type_distribution(data["type_distribution"]) if "type_distribution" in data else None
        if committee is None and dist is None:
            raise ValidationError("need voters or a type_distribution")
        fld = "mechanisms"
        mechs = [parse_mechanism(m, n) for m in data.get("mechanisms", ["ld", "dd"])]
        profiles = {}
        for name, p in data.get("profiles", {}).items():
            fld = f"profiles.{name}"
            kind = p.get("kind") if isinstance(p, dict) else None
            if kind not in PROFILE_KINDS:
                raise ValidationError(f"unknown profile kind {kind!r}", "kind")
            if kind == "threshold" and dist is None:
                raise ValidationError("threshold profiles need a type_distribution", "kind")
            profiles[name] = p
    except ValidationError as exc:
        path = f"{fld}.{exc.path}" if exc.path and exc.path != fld else fld
        raise ScenarioError(str(exc.args[0]).split(": ", 1)[-1], sid, "load", path) from None
    return Scenario(sid, committee, mechs, profiles, dist, data.get("description", ""), source)


def _voter_record(t: VoterType) -> dict:
    pref = next(k for k, v in PREFERENCES.items() if v is t.preference)
    return {"preference": pref, "precision": t.precision}


def _mechanism_record(m: Mechanism):
    if m.kind != "rd":
        return m.kind
    rec = {"kind": "rd", "representatives": sorted(j + 1 for j in m.representatives)}
    if not m.mechanical_partisans_vote:
        rec["mechanical_partisans_vote"] = False
    return rec


def serialize_scenario(scenario: Scenario) -> dict:
    """Inverse of :func:`parse_scenario` (voters are written out one by one)."""
    out: dict = {"id": scenario.id}
    if scenario.description:
        out["description"] = scenario.description
    if scenario.committee is not None:
        out["prior"] = scenario.committee.prior
        out["voters"] = [_voter_record(v) for v in scenario.committee.voters]
    if scenario.type_distribution is not None:
        dist = scenario.type_distribution
        voters = []
        for d in dist.voters:
            rec: dict = {"atoms": [{**_voter_record(t), "probability": p} for t, p in d.atoms]}
            if d.segment is not None:
                rec["segment"] = {"lo": d.segment.lo, "hi": d.segment.hi, "mass": d.segment.mass}
            voters.append(rec)
        out["type_distribution"] = {"prior": dist.prior, "voters": voters}
    out["mechanisms"] = [_mechanism_record(m) for m in scenario.mechanisms]
    out["profiles"] = scenario.profiles
    return out


def bundled_names() -> list[str]:
    root = resources.files("liquidvote") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_scenario(ref: str | Path) -> Scenario:
    """Load a scenario from a path, or a bundled one by id."""
    path = Path(ref)
    if path.suffix == ".json" or path.exists():
        if not path.exists():
            raise ScenarioError(f"file not found: {path}", str(ref), "load", "path")
        text, source = path.read_text(), str(path)
    else:
        res = resources.files("liquidvote") / "scenarios" / f"{ref}.json"
        if not res.is_file():
            raise MissingAsset(f"bundled scenario {ref!r} is missing", str(ref), "load", "path")
        text, source = res.read_text(), str(ref)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}", str(ref), "load", "file") from None
    return parse_scenario(data, source)


# ---------------------------------------------------------------------------
# profile constructors


def build_profile(scenario: Scenario, name: str, mechanism: Optional[Mechanism] = None):
    """Return ``(mechanism, profile)`` for a named profile.

    For ``threshold`` profiles the profile is a tuple of ex-ante plans and the
    caller evaluates it against ``scenario.type_distribution``.
    """
    from .neutral import prop2_construct, prop3_predict, prop4_predict, profile_from_vx
    if name not in scenario.profiles:
        raise ScenarioError(f"no profile named {name!r}", scenario.id, "profile", "profiles")
    spec = scenario.profiles[name]
    kind = spec["kind"]
    fld = f"profiles.{name}"
    c = scenario.committee
    try:
        if kind == "threshold":
            mech = mechanism or parse_mechanism(spec.get("mechanism", "ld"), scenario.type_distribution.n)
            return mech, parse_plans(spec["plans"], scenario.type_distribution.n)
        if c is None:
            raise ValidationError("profile needs a committee", "kind")
        mech = mechanism or parse_mechanism(spec.get("mechanism", "ld"), c.n)
        if kind == "actions":
            acts = spec.get("actions")
            if not isinstance(acts, list) or len(acts) != c.n:
                raise ValidationError(f"need {c.n} strategies", "actions")
            prof = []
            for k, s in enumerate(acts):
                try:
                    prof.append(parse_strategy(s, c.n))
                except ValidationError as exc:
                    raise ValidationError(exc.args[0], f"actions[{k}]") from None
            from .model import validate_profile
            return mech, validate_profile(c, mech, prof)
        if kind == "vx":
            V, X = spec.get("V"), [j - 1 for j in spec.get("X", [])]
            return mech, profile_from_vx(c, V, X, mech)
        if kind == "weighted":
            return Mechanism.ld(), prop2_construct(c, spec.get("k")).profile
        neutral = prop3_predict(c) if kind == "single-expert" else prop4_predict(c)
        return Mechanism.ld(), profile_from_vx(c, neutral.V, neutral.X, Mechanism.ld())
    except (ValidationError, ValueError) as exc:
        path = getattr(exc, "path", "")
        raise ScenarioError(str(exc.args[0]).split(": ", 1)[-1], scenario.id, "profile",
                            f"{fld}.{path}" if path else fld) from None
