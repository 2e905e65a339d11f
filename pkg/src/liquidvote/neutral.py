"""Neutral profiles in (V, X) form, best-neutral search, and predicted equilibria.

A neutral profile is summarized by the vote allocation ``V`` (how many votes
each voter ends up holding; delegators hold zero) and the abstainer set ``X``
(holders who cast everything they hold in abstention).  Holders outside ``X``
vote sincerely, so the outcome is a sincere weighted majority and can be
computed from a small margin distribution instead of a signal enumeration.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .engine import EvalReport, evaluate_profile, report_from_state_probs
from .equilibrium import Deviation, is_equilibrium
from .model import (A_STAR, ALWAYS_ABSTAIN, B_STAR, SINCERE, STATES, Alternative,
                    Committee, InterimStrategy, Mechanism, Preference, State,
                    ValidationError, always, always_delegate, delegate)
from .weights import (TIE, first_best_decision, first_best_probability,
                      floor_weight, optimal_weight, relative_weight)

RD_SINCERE = InterimStrategy(delegate(A_STAR), delegate(B_STAR))
DEFAULT_MAX_CONFIGS = 2_000_000


class SearchTooLarge(RuntimeError):
    """The canonical (V, X) enumeration would exceed its cap."""


class InsufficientUninformed(ValueError):
    """Too few uninformed voters to build the weighted construction."""

    def __init__(self, message: str, minimal_n_U: int):
        self.minimal_n_U = minimal_n_U
        super().__init__(message)


@dataclass(frozen=True)
class NeutralProfile:
    V: tuple
    X: frozenset
    delegation_realization: tuple  # (delegator, recipient) pairs

    @property
    def delegators(self) -> list[int]:
        return [i for i, v in enumerate(self.V) if v == 0]

    @property
    def nonvoters(self) -> frozenset:
        return frozenset(self.delegators) | self.X

    def as_record(self) -> dict:
        return {
            "V": list(self.V),
            "X": sorted(i + 1 for i in self.X),
            "delegation_realization": [[d + 1, r + 1] for d, r in self.delegation_realization],
        }


def _realize(V: Sequence[int]) -> tuple:
    delegators = [i for i, v in enumerate(V) if v == 0]
    pairs = []
    k = 0
    for r, v in enumerate(V):
        for _ in range(max(v - 1, 0)):
            pairs.append((delegators[k], r))
            k += 1
    return tuple(pairs)


def make_neutral(committee: Committee, V, X=(), mechanism: Optional[Mechanism] = None) -> NeutralProfile:
    mechanism = Mechanism.ld() if mechanism is None else mechanism
    V = tuple(V)
    X = frozenset(X)
    n = committee.n
    if len(V) != n:
        raise ValidationError(f"V has {len(V)} entries for {n} voters", "V")
    for i, v in enumerate(V):
        if not isinstance(v, (int, np.integer)) or v < 0:
            raise ValidationError(f"vote count {v!r} must be a nonnegative integer", f"V[{i}]")
    if sum(V) != n:
        raise ValidationError(f"votes sum to {sum(V)}, expected {n}", "V")
    for i in X:
        if not 0 <= i < n:
            raise ValidationError(f"voter {i} out of range", "X")
        if V[i] == 0:
            raise ValidationError(f"voter {i} holds no votes and cannot abstain with them", "X")
    if mechanism.kind == "dd" and any(v != 1 for v in V):
        raise ValidationError("direct democracy allows no delegation", "V")
    if mechanism.kind == "rd":
        for i, v in enumerate(V):
            if v > 1 and i not in mechanism.representatives:
                raise ValidationError(f"voter {i} is not a representative and cannot receive votes",
                                      f"V[{i}]")
    return NeutralProfile(V, X, _realize(V))


def profile_from_vx(committee: Committee, V, X=(), mechanism: Optional[Mechanism] = None) -> tuple:
    """Concrete interim profile realizing ``(V, X)``.

    Delegators are assigned to recipients lowest index first.  Under RD a
    non-representative holder votes through the mechanical representatives.
    """
    mechanism = Mechanism.ld() if mechanism is None else mechanism
    neutral = make_neutral(committee, V, X, mechanism)
    return _strategies(committee, neutral, mechanism)


def _strategies(committee: Committee, neutral: NeutralProfile, mechanism: Mechanism) -> tuple:
    prof: list = [None] * committee.n
    for d, r in neutral.delegation_realization:
        prof[d] = always_delegate(r)
    for i, v in enumerate(neutral.V):
        if v == 0:
            continue
        if i in neutral.X:
            prof[i] = ALWAYS_ABSTAIN
        elif mechanism.kind == "rd" and i not in mechanism.representatives:
            prof[i] = RD_SINCERE
        else:
            prof[i] = SINCERE
    return tuple(prof)


def is_neutral(profile, mechanism: Optional[Mechanism] = None) -> bool:
    """Sincere, always-abstain, or always-delegate-to-one-voter for everyone.

    Under RD the sincere form of a non-representative is delegating to a* on
    signal a and to b* on signal b; unconditional delegation to a mechanical
    representative is an unresponsive vote and does not count as neutral.
    """
    rd = mechanism is not None and mechanism.kind == "rd"
    for i, s in enumerate(profile):
        if s == SINCERE or s == ALWAYS_ABSTAIN:
            continue
        if rd and s == RD_SINCERE and i not in mechanism.representatives:
            continue
        if s.on_a == s.on_b and s.on_a.is_delegation and s.on_a.target not in (A_STAR, B_STAR):
            continue
        return False
    return True


def classify_neutral(committee: Committee, profile, mechanism: Optional[Mechanism] = None) -> NeutralProfile:
    """Recover ``(V, X)`` from a neutral profile (transitive chains included)."""
    mechanism = Mechanism.ld() if mechanism is None else mechanism
    if not is_neutral(profile, mechanism):
        raise ValidationError("profile is not neutral", "profile")
    n = committee.n
    nxt = [s.on_a.target if s.on_a.is_delegation and not s.responsive else None for s in profile]
    V = [0] * n
    X = set()
    for i in range(n):
        seen = {i}
        j = i
        while nxt[j] is not None:
            j = nxt[j]
            if j in seen:
                j = None
                break
            seen.add(j)
        if j is None:
            continue  # cycle: counted as abstention below
        V[j] += 1
    for i in range(n):
        if V[i] and profile[i] == ALWAYS_ABSTAIN:
            X.add(i)
    lost = n - sum(V)
    if lost:
        raise ValidationError(f"{lost} votes are lost in delegation cycles", "profile")
    return NeutralProfile(tuple(V), frozenset(X), _realize(V))


# ---------------------------------------------------------------------------
# weighted-margin evaluation


def weighted_state_probs(weights: Sequence[int], precisions: Sequence[float]):
    """P(A wins | a), P(A wins | b) and the tie masses (state a, state b) for sincere weighted voting."""
    total = int(sum(weights))
    dist_a = np.zeros(2 * total + 1)
    dist_a[total] = 1.0
    dist_b = dist_a.copy()
    for w, q in zip(weights, precisions):
        w = int(w)
        if w == 0:
            continue
        up_a, up_b = np.zeros_like(dist_a), np.zeros_like(dist_b)
        # votes for A shift the margin up
        up_a[w:] += q * dist_a[:-w]
        up_a[:-w] += (1 - q) * dist_a[w:]
        up_b[w:] += (1 - q) * dist_b[:-w]
        up_b[:-w] += q * dist_b[w:]
        dist_a, dist_b = up_a, up_b

    def pa(d):
        return float(d[total + 1:].sum() + 0.5 * d[total])

    return pa(dist_a), pa(dist_b), (float(dist_a[total]), float(dist_b[total]))


def neutral_report(committee: Committee, neutral: NeutralProfile) -> EvalReport:
    holders = [i for i, v in enumerate(neutral.V) if v > 0 and i not in neutral.X]
    pa_a, pa_b, _ = weighted_state_probs([neutral.V[i] for i in holders],
                                         [committee.precision(i) for i in holders])
    return report_from_state_probs(committee, pa_a, pa_b)


def tie_mass(committee: Committee, neutral: NeutralProfile) -> float:
    holders = [i for i, v in enumerate(neutral.V) if v > 0 and i not in neutral.X]
    _, _, (tie_a, tie_b) = weighted_state_probs([neutral.V[i] for i in holders],
                                                [committee.precision(i) for i in holders])
    return committee.prior * tie_a + (1 - committee.prior) * tie_b


# ---------------------------------------------------------------------------
# canonical enumeration


def _groups(committee: Committee) -> list[list[int]]:
    groups: dict = {}
    for i, v in enumerate(committee.voters):
        groups.setdefault(v, []).append(i)
    return sorted(groups.values())


def _multisets(items: list, size: int, budget: int, start: int = 0):
    """Nonincreasing-index multisets of (value, flag) items with value sum <= budget."""
    if size == 0:
        yield ()
        return
    for k in range(start, len(items)):
        v = items[k][0]
        if v > budget:
            continue
        for rest in _multisets(items, size - 1, budget - v, k):
            yield (items[k],) + rest


def _group_configs(members: list[int], mechanism: Mechanism, n: int):
    """Canonical role assignments for one type group.

    Yields ``(votes, abstainers)`` dicts keyed by member index: delegators take
    the lowest indices, then abstaining holders, then sincere holders by
    descending vote count.
    """
    g = len(members)
    if mechanism.kind == "dd":
        caps = {i: 1 for i in members}
    elif mechanism.kind == "rd":
        caps = {i: (n if i in mechanism.representatives else 1) for i in members}
    else:
        caps = {i: n for i in members}
    # members of a group share their receiving capability except in RD, where
    # representatives and non-representatives of one type are split apart
    cap = caps[members[0]]
    items = [(v, f) for v in range(cap, 0, -1) for f in (False, True)]
    # nobody under DD and no RD representative can delegate
    no_delegation = mechanism.kind == "dd" or (mechanism.kind == "rd"
                                                and members[0] in mechanism.representatives)
    sizes = [g] if no_delegation else range(g + 1)
    for h in sizes:
        for ms in _multisets(items, h, n):
            abst = sorted((e for e in ms if e[1]), reverse=True)
            sinc = sorted((e for e in ms if not e[1]), reverse=True)
            roles = [0] * (g - h) + [e[0] for e in abst] + [e[0] for e in sinc]
            votes = dict(zip(members, roles))
            xs = frozenset(members[g - h:g - h + len(abst)])
            yield votes, xs


def _split_rd_groups(committee: Committee, mechanism: Mechanism) -> list[list[int]]:
    out = []
    for grp in _groups(committee):
        if mechanism.kind == "rd":
            reps = [i for i in grp if i in mechanism.representatives]
            rest = [i for i in grp if i not in mechanism.representatives]
            out += [x for x in (reps, rest) if x]
        else:
            out.append(grp)
    return out


def enumerate_neutral(committee: Committee, mechanism: Mechanism,
                      max_configs: int = DEFAULT_MAX_CONFIGS):
    """Every feasible ``(V, X)`` up to within-type permutation, in canonical order."""
    n = committee.n
    groups = _split_rd_groups(committee, mechanism)
    configs = [list(_group_configs(g, mechanism, n)) for g in groups]
    count = 0

    def rec(k: int, votes: dict, xs: frozenset, total: int):
        nonlocal count
        if total > n:
            return
        if k == len(groups):
            if total == n:
                count += 1
                if count > max_configs:
                    raise SearchTooLarge(f"more than {max_configs} neutral configurations")
                yield tuple(votes[i] for i in range(n)), xs
            return
        for v, x in configs[k]:
            s = sum(v.values())
            if total + s > n:
                continue
            yield from rec(k + 1, {**votes, **v}, xs | x, total + s)

    yield from rec(0, {}, frozenset(), 0)


@dataclass(frozen=True)
class NeutralSearchResult:
    neutral: NeutralProfile
    profile: tuple
    report: EvalReport
    is_equilibrium: bool
    deviation: Optional[Deviation]
    searched: int
    tie_mass: float


def best_neutral_search(committee: Committee, mechanism: Optional[Mechanism] = None,
                        max_configs: int = DEFAULT_MAX_CONFIGS,
                        check_equilibrium: bool = True) -> NeutralSearchResult:
    """Exact argmax of ``p_correct`` over neutral profiles; first canonical maximizer wins."""
    mechanism = Mechanism.ld() if mechanism is None else mechanism
    mechanism.check_committee(committee)
    best = None
    best_val = -1.0
    searched = 0
    for V, X in enumerate_neutral(committee, mechanism, max_configs):
        searched += 1
        holders = [i for i, v in enumerate(V) if v > 0 and i not in X]
        pa_a, pa_b, _ = weighted_state_probs([V[i] for i in holders],
                                             [committee.precision(i) for i in holders])
        val = committee.prior * pa_a + (1 - committee.prior) * (1 - pa_b)
        if val > best_val + 1e-12:
            best, best_val = (V, X), val
    neutral = make_neutral(committee, best[0], best[1], mechanism)
    profile = _strategies(committee, neutral, mechanism)
    report = neutral_report(committee, neutral)
    ok, dev = is_equilibrium(committee, mechanism, profile) if check_equilibrium else (False, None)
    return NeutralSearchResult(neutral, profile, report, ok, dev, searched,
                               tie_mass(committee, neutral))


# ---------------------------------------------------------------------------
# predicted equilibria


def _expert_weight(r: float, q: float) -> float:
    return math.inf if r == 1.0 else relative_weight(r, q)


def _single_expert_shape(committee: Committee) -> tuple[int, list[int], float, float]:
    if any(not v.is_independent for v in committee.voters):
        raise ValidationError("single-expert committee has only independents", "voters")
    qs = [v.precision for v in committee.voters]
    r = max(qs)
    experts = [i for i, x in enumerate(qs) if x == r]
    rest = [i for i, x in enumerate(qs) if x != r]
    if len(experts) != 1 or len(set(qs[i] for i in rest)) != 1 or not rest:
        raise ValidationError("need exactly one expert and nonexperts of one common precision",
                              "voters")
    if committee.n % 2 == 0:
        raise ValidationError("single-expert committee needs an odd N", "voters")
    q = qs[rest[0]]
    if q == 0.5:
        raise ValidationError("nonexperts need precision above 0.5", "voters")
    return experts[0], rest, q, r


def prop3_predict(committee: Committee) -> NeutralProfile:
    """Predicted best neutral LD profile of a single-expert committee."""
    e, rest, q, r = _single_expert_shape(committee)
    w = _expert_weight(r, q)
    half = (committee.n - 1) // 2
    k = half if math.isinf(w) else min(max(floor_weight(w) - 1, 0), half)
    V = [1] * committee.n
    for i in rest[:k]:
        V[i] = 0
    V[e] = 1 + k
    return make_neutral(committee, V)


def prop3_delegators(q: float, r: float, n: int) -> int:
    w = _expert_weight(r, q)
    half = (n - 1) // 2
    return half if math.isinf(w) else min(max(floor_weight(w) - 1, 0), half)


def prop4_predict(committee: Committee) -> NeutralProfile:
    """Each expert i receives floor(w*(i)) - 1 nonexpert delegations."""
    if any(not v.is_independent for v in committee.voters):
        raise ValidationError("multi-expert committee has only independents", "voters")
    qs = [v.precision for v in committee.voters]
    q = min(qs)
    nonexperts = [i for i, x in enumerate(qs) if x == q]
    experts = [i for i, x in enumerate(qs) if x != q]
    if q == 0.5 or not experts:
        raise ValidationError("need nonexperts with precision above 0.5 and at least one expert",
                              "voters")
    V = [1] * committee.n
    free = list(nonexperts)
    for e in experts:
        k = max(floor_weight(_expert_weight(qs[e], q)) - 1, 0)
        if k > len(free):
            raise ValidationError(f"only {len(free)} nonexperts left for expert {e}", "voters")
        for d in free[:k]:
            V[d] = 0
        free = free[k:]
        V[e] += k
    return make_neutral(committee, V)


def _delegation_value(experts: Sequence[float], q: float, n_nonexperts: int, d: Sequence[int]) -> float:
    weights = [1 + k for k in d] + [1] * (n_nonexperts - sum(d))
    precisions = list(experts) + [q] * (n_nonexperts - sum(d))
    pa_a, pa_b, _ = weighted_state_probs(weights, precisions)
    return 0.5 * pa_a + 0.5 * (1 - pa_b)


@dataclass(frozen=True)
class Prop4Threshold:
    n_nonexperts: Optional[int]  # smallest count at which the prediction is optimal, None if not found
    predicted: tuple  # delegations per expert
    history: tuple  # (n_nonexperts, best delegations, best value) for every count tried


def prop4_threshold(experts: Sequence[float], q: float, max_nonexperts: int = 200,
                    slack: int = 2, step: int = 2) -> Prop4Threshold:
    """Ascending search for the nonexpert count above which the multi-expert prediction is best.

    At each count, every vector of per-expert delegation counts up to
    ``floor(w*) - 1 + slack`` is evaluated exactly, with the remaining
    nonexperts voting sincerely.  The first count whose unique best vector
    equals the prediction is returned.
    """
    predicted = tuple(max(floor_weight(_expert_weight(r, q)) - 1, 0) for r in experts)
    ranges = [range(k + slack + 1) for k in predicted]
    history = []
    start = step if step > 0 else 1
    for n in range(start, max_nonexperts + 1, step):
        vals = {}
        for d in itertools.product(*ranges):
            if sum(d) <= n:
                vals[d] = _delegation_value(experts, q, n, d)
        top = max(vals.values())
        winners = [d for d, v in vals.items() if v >= top - 1e-12]
        history.append((n, winners[0], top))
        if winners == [predicted]:
            return Prop4Threshold(n, predicted, tuple(history))
    return Prop4Threshold(None, predicted, tuple(history))


@dataclass(frozen=True)
class WeightedConstruction:
    profile: tuple
    kernel: NeutralProfile  # held votes of the experts and their delegators
    k: int
    held_votes: dict  # expert -> votes held
    neutralizers: tuple  # uninformed voters voting unresponsively against the partisan surplus
    p_correct: float
    first_best: float

    @property
    def certificate(self) -> bool:
        return abs(self.p_correct - self.first_best) <= 1e-12


def _scaled_votes(weights: dict, k: int) -> dict:
    base = min(weights.values())
    return {i: max(1, floor_weight(k * w / base)) for i, w in weights.items()}


def _reproduces_first_best(bench: Committee, experts: list[int], votes: dict) -> bool:
    for combo in itertools.product(STATES, repeat=len(experts)):
        signals = dict(zip(range(len(experts)), combo))
        fb = first_best_decision(bench, signals)
        margin = sum(votes[e] if s is State.a else -votes[e] for e, s in zip(experts, combo))
        got = TIE if margin == 0 else (Alternative.A if margin > 0 else Alternative.B)
        if got != fb:
            return False
    return True


def minimal_scale(committee: Committee, max_k: int = 1000) -> int:
    """Smallest integer scale whose floored weights reproduce every first-best decision."""
    experts = [i for i, v in enumerate(committee.voters) if v.is_independent and 0.5 < v.precision]
    if any(committee.precision(i) == 1.0 for i in experts):
        return 1
    bench = Committee(tuple(committee.voters[i] for i in experts), committee.prior)
    weights = {i: optimal_weight(committee.precision(i)) for i in experts}
    for k in range(1, max_k + 1):
        if _reproduces_first_best(bench, experts, _scaled_votes(weights, k)):
            return k
    raise ValueError(f"no scale up to {max_k} reproduces the first-best decisions")


def prop2_construct(committee: Committee, k: Optional[int] = None) -> WeightedConstruction:
    """Experts attain scaled log-likelihood weights through uninformed delegation.

    Uninformed independents (precision 0.5) first neutralize the partisan
    surplus by voting unresponsively for the minority side, then delegate
    ``floor(k w_i / w_min) - 1`` votes to each expert ``i``; the rest abstain.
    """
    if committee.prior != 0.5:
        raise ValidationError("the construction assumes a flat prior", "prior")
    voters = committee.voters
    experts = [i for i, v in enumerate(voters) if v.is_independent and v.precision > 0.5]
    uninformed = [i for i, v in enumerate(voters) if v.is_independent and v.precision == 0.5]
    n_A = sum(v.preference is Preference.PartisanA for v in voters)
    n_B = sum(v.preference is Preference.PartisanB for v in voters)
    if not experts:
        raise ValidationError("need at least one informed independent", "voters")
    perfect = [i for i in experts if voters[i].precision == 1.0]
    if k is None:
        k = minimal_scale(committee)
    if perfect:
        votes = {i: 1 for i in experts}
    else:
        weights = {i: optimal_weight(voters[i].precision) for i in experts}
        votes = _scaled_votes(weights, k)
    surplus = abs(n_A - n_B)
    need = surplus + sum(v - 1 for v in votes.values())
    if need > len(uninformed):
        raise InsufficientUninformed(
            f"scale k={k} needs n_U >= {need} uninformed voters, have {len(uninformed)}", need)
    prof: list = [None] * committee.n
    for i, v in enumerate(voters):
        if v.preference is Preference.PartisanA:
            prof[i] = always("A")
        elif v.preference is Preference.PartisanB:
            prof[i] = always("B")
    free = list(uninformed)
    neutralizers = tuple(free[:surplus])
    against = "B" if n_A >= n_B else "A"
    for i in neutralizers:
        prof[i] = always(against)
    free = free[surplus:]
    V = [0] * committee.n
    for e in experts:
        prof[e] = SINCERE
        V[e] = votes[e]
        for d in free[:votes[e] - 1]:
            prof[d] = always_delegate(e)
        free = free[votes[e] - 1:]
    for i in free:
        prof[i] = ALWAYS_ABSTAIN
        V[i] = 1
    for i in neutralizers + tuple(i for i, v in enumerate(voters) if v.preference.is_partisan):
        V[i] = 1
    realization = tuple((i, prof[i].on_a.target) for i in range(committee.n)
                        if prof[i] is not None and prof[i].on_a.is_delegation)
    kernel = NeutralProfile(tuple(V), frozenset(free), realization)
    profile = tuple(prof)
    rep = evaluate_profile(committee, Mechanism.ld(), profile)
    bench = Committee(tuple(voters[i] for i in experts), committee.prior)
    return WeightedConstruction(profile, kernel, k, votes, neutralizers, rep.p_correct,
                                first_best_probability(bench))
