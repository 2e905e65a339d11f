"""Privately known types: ex-ante evaluation, cutoff strategies and the auxiliary game.

Each voter's type is drawn independently from a distribution made of atoms
(a preference and a precision with a probability) and at most one uniform
segment of independent precisions.  On a segment, voters use threshold
strategies: the precision range is cut into intervals and one interim strategy
is played on each.

Exact integration over a segment is cheap: given the strategies, the winning
probability in each state is affine in every single voter's precision, so
integrating a voter's precision over an interval is the same as plugging in
the interval's mean precision and weighting by its mass.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from .engine import prob_a_wins
from .equilibrium import Game, outcome_tensor, pinned_partisan
from .model import (SINCERE, STATES, Action, Committee,
                    InterimStrategy, Mechanism, Preference, State,
                    ValidationError, VoterType, always, always_delegate,
                    independent, partisan, unresponsive, validate_profile)

MASS_TOL = 1e-9


@dataclass(frozen=True)
class UniformSegment:
    """Independent precisions distributed uniformly on [lo, hi] with total mass ``mass``."""

    lo: float
    hi: float
    mass: float
    density: str = "uniform"

    def __post_init__(self):
        if not 0.5 <= self.lo <= self.hi <= 1.0:
            raise ValidationError(f"segment [{self.lo}, {self.hi}] outside [0.5, 1]", "segment")
        if self.density != "uniform":
            raise ValidationError(f"unsupported density {self.density!r}", "segment.density")
        if not 0 < self.mass <= 1 + MASS_TOL:
            raise ValidationError(f"segment mass {self.mass} outside (0, 1]", "segment.mass")


@dataclass(frozen=True)
class VoterDistribution:
    atoms: tuple = ()  # (VoterType, probability) pairs
    segment: Optional[UniformSegment] = None

    def __post_init__(self):
        atoms = tuple((t, float(p)) for t, p in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        for k, (t, p) in enumerate(atoms):
            if not isinstance(t, VoterType):
                raise ValidationError("atom type must be a VoterType", f"atoms[{k}]")
            if p < 0:
                raise ValidationError(f"negative probability {p}", f"atoms[{k}].probability")
        total = sum(p for _, p in atoms) + (self.segment.mass if self.segment else 0.0)
        if abs(total - 1.0) > MASS_TOL:
            raise ValidationError(f"type probabilities sum to {total}, expected 1", "atoms")

    @classmethod
    def point(cls, t: VoterType) -> "VoterDistribution":
        return cls(((t, 1.0),))


@dataclass(frozen=True)
class TypeDistribution:
    voters: tuple
    prior: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "voters", tuple(self.voters))
        if not self.voters:
            raise ValidationError("need at least one voter", "voters")
        if not 0 < self.prior < 1:
            raise ValidationError(f"prior {self.prior} outside (0, 1)", "prior")

    @property
    def n(self) -> int:
        return len(self.voters)

    @classmethod
    def from_committee(cls, committee: Committee) -> "TypeDistribution":
        return cls(tuple(VoterDistribution.point(v) for v in committee.voters), committee.prior)


@dataclass(frozen=True)
class ThresholdStrategy:
    """Interim strategies played on consecutive precision intervals of a segment.

    ``cutoffs`` are nondecreasing; ``strategies[k]`` is played on
    ``[cutoffs[k-1], cutoffs[k])`` with the segment bounds closing both ends.
    """

    cutoffs: tuple
    strategies: tuple

    def __post_init__(self):
        cut = tuple(float(c) for c in self.cutoffs)
        object.__setattr__(self, "cutoffs", cut)
        object.__setattr__(self, "strategies", tuple(self.strategies))
        if len(self.strategies) != len(cut) + 1:
            raise ValidationError("need one more strategy than cutoffs", "strategies")
        if any(b < a for a, b in zip(cut, cut[1:])):
            raise ValidationError("cutoffs must be nondecreasing", "cutoffs")
        if any(not 0.5 <= c <= 1.0 for c in cut):
            raise ValidationError("cutoffs must lie in [0.5, 1]", "cutoffs")

    @classmethod
    def constant(cls, s: InterimStrategy) -> "ThresholdStrategy":
        return cls((), (s,))

    @classmethod
    def cutoff(cls, c: float, below: InterimStrategy, above: InterimStrategy) -> "ThresholdStrategy":
        return cls((c,), (below, above))

    @classmethod
    def per_signal(cls, actions_a: Sequence[Action], cutoffs_a: Sequence[float],
                   actions_b: Sequence[Action], cutoffs_b: Sequence[float]) -> "ThresholdStrategy":
        """Combine one ordered action list with cutoffs per signal realization."""
        def act(actions, cutoffs, q):
            return actions[int(np.searchsorted(cutoffs, q, side="right"))]

        cut = sorted(set(cutoffs_a) | set(cutoffs_b))
        probes = [0.5] + cut
        strategies = [InterimStrategy(act(actions_a, cutoffs_a, q), act(actions_b, cutoffs_b, q))
                      for q in probes]
        return cls(tuple(cut), tuple(strategies))

    def strategy_at(self, q: float) -> InterimStrategy:
        return self.strategies[int(np.searchsorted(self.cutoffs, q, side="right"))]

    def intervals(self, lo: float, hi: float):
        """(a, b, strategy) pieces covering [lo, hi], dropping empty ones."""
        edges = [lo] + [min(max(c, lo), hi) for c in self.cutoffs] + [hi]
        for k, s in enumerate(self.strategies):
            a, b = edges[k], edges[k + 1]
            if b > a:
                yield a, b, s
        if hi == lo:
            yield lo, hi, self.strategy_at(lo)


@dataclass(frozen=True)
class VoterPlan:
    """One voter's ex-ante strategy: a strategy per atom and a threshold rule on the segment."""

    atoms: tuple = ()
    threshold: Optional[ThresholdStrategy] = None


ExAnteStrategy = tuple  # tuple[VoterPlan, ...]


@dataclass(frozen=True)
class ExAnteReport:
    utilities: tuple
    p_correct: float
    p_A_given_a: float
    p_A_given_b: float

    def as_record(self) -> dict:
        return {"utilities": list(self.utilities), "p_correct": self.p_correct,
                "p_A_given_a": self.p_A_given_a, "p_A_given_b": self.p_A_given_b}


def _components(dist: VoterDistribution, plan: VoterPlan, path: str):
    """(type, mass, strategy) pieces for one voter, segments collapsed to interval means."""
    if len(plan.atoms) != len(dist.atoms):
        raise ValidationError(f"{len(plan.atoms)} atom strategies for {len(dist.atoms)} atoms",
                              f"{path}.atoms")
    out = [(t, p, s) for (t, p), s in zip(dist.atoms, plan.atoms) if p > 0]
    seg = dist.segment
    if seg is not None:
        if plan.threshold is None:
            raise ValidationError("continuous segment needs a threshold strategy",
                                  f"{path}.threshold")
        width = seg.hi - seg.lo
        for a, b, s in plan.threshold.intervals(seg.lo, seg.hi):
            mass = seg.mass if width == 0 else seg.mass * (b - a) / width
            out.append((independent((a + b) / 2), mass, s))
    return out


def _payoff(t: VoterType, pa: float, state: State) -> float:
    if t.preference is Preference.PartisanA:
        return pa
    if t.preference is Preference.PartisanB:
        return 1 - pa
    return pa if state is State.a else 1 - pa


def _check_plan(mechanism: Mechanism, n: int, sigma) -> None:
    if len(sigma) != n:
        raise ValidationError(f"{len(sigma)} plans for {n} voters", "Sigma")


def exante_utility(distribution: TypeDistribution, mechanism: Mechanism, sigma,
                   max_combinations: int = 200_000) -> ExAnteReport:
    """Exact ex-ante utilities (each voter averaged over her own types) and p_correct."""
    _check_plan(mechanism, distribution.n, sigma)
    comps = [_components(d, p, f"Sigma[{i}]") for i, (d, p) in
             enumerate(zip(distribution.voters, sigma))]
    if np.prod([len(c) for c in comps], dtype=float) > max_combinations:
        from .engine import InstanceTooLarge
        raise InstanceTooLarge("too many type combinations")
    pi = distribution.prior
    utils = np.zeros(distribution.n)
    pa_tot = {s: 0.0 for s in STATES}
    for combo in itertools.product(*comps):
        weight = math.prod(m for _, m, _ in combo)
        if weight == 0:
            continue
        committee = Committee(tuple(t for t, _, _ in combo), pi)
        profile = validate_profile(committee, mechanism, [s for _, _, s in combo])
        pa = {s: prob_a_wins(committee, mechanism, profile, s) for s in STATES}
        for s in STATES:
            pa_tot[s] += weight * pa[s]
        for i, (t, _, _) in enumerate(combo):
            utils[i] += weight * sum(committee.prior_of(s) * _payoff(t, pa[s], s) for s in STATES)
    p_correct = pi * pa_tot[State.a] + (1 - pi) * (1 - pa_tot[State.b])
    return ExAnteReport(tuple(float(u) for u in utils), float(p_correct),
                        float(pa_tot[State.a]), float(pa_tot[State.b]))


def exante_utility_quadrature(distribution: TypeDistribution, mechanism: Mechanism, sigma,
                              epsabs: float = 1e-11) -> float:
    """p_correct by nested adaptive quadrature over segment precisions.

    An independent cross-check of :func:`exante_utility`; atoms are still summed
    exactly.  Cost grows exponentially with the number of segments.
    """
    seg_voters = [i for i, d in enumerate(distribution.voters) if d.segment is not None]
    pi = distribution.prior

    def value(qs: dict) -> float:
        comps = []
        for i, (d, plan) in enumerate(zip(distribution.voters, sigma)):
            c = [(t, p, s) for (t, p), s in zip(d.atoms, plan.atoms) if p > 0]
            if i in qs:
                c.append((independent(qs[i]), d.segment.mass, plan.threshold.strategy_at(qs[i])))
            comps.append(c)
        total = 0.0
        for combo in itertools.product(*comps):
            weight = math.prod(m for _, m, _ in combo)
            committee = Committee(tuple(t for t, _, _ in combo), pi)
            prof = [s for _, _, s in combo]
            total += weight * (pi * prob_a_wins(committee, mechanism, prof, State.a)
                               + (1 - pi) * (1 - prob_a_wins(committee, mechanism, prof, State.b)))
        return total

    def nested(k: int, qs: dict) -> float:
        if k == len(seg_voters):
            return value(qs)
        i = seg_voters[k]
        seg = distribution.voters[i].segment
        width = seg.hi - seg.lo
        if width == 0:
            return nested(k + 1, {**qs, i: seg.lo})
        pts = [c for c in sigma[i].threshold.cutoffs if seg.lo < c < seg.hi]
        res, _ = integrate.quad(lambda q: nested(k + 1, {**qs, i: q}), seg.lo, seg.hi,
                                points=pts or None, epsabs=epsabs, limit=200)
        return res / width

    # atoms of segment voters are handled inside value(); mixing segment mass is
    # done by the 1/width normalization above, so only pure-segment voters are
    # supported here
    for i in seg_voters:
        if distribution.voters[i].atoms and any(p > 0 for _, p in distribution.voters[i].atoms):
            raise ValidationError("quadrature check needs pure segment voters",
                                  f"voters[{i}].atoms")
    return nested(0, {})


# ---------------------------------------------------------------------------
# the single-expert cutoff instance


@dataclass(frozen=True)
class CutoffSolution:
    cutoff: float
    boundary: bool  # True when the indifference equation has no interior root


def campbell_gap(c: float, r: float, hi: float) -> float:
    """Expert-wrong minus expert-right pivotal mass at cutoff ``c``."""
    mu = (c + hi) / 2
    return r * (1 - c) * (1 - mu) - (1 - r) * c * mu


def solve_campbell_cutoff(r: float, lo: float, hi: float, tol: float = 1e-10) -> CutoffSolution:
    """Bisection on the nonexperts' indifference condition with uniform precisions on [lo, hi]."""
    if not 0.5 <= lo <= hi <= r <= 1.0:
        raise ValidationError("need 0.5 <= lo <= hi <= r <= 1", "support")
    if hi == lo:
        return CutoffSolution(lo, True)
    g_lo, g_hi = campbell_gap(lo, r, hi), campbell_gap(hi, r, hi)
    if g_lo * g_hi > 0:
        # same sign throughout: everyone delegates (gap > 0) or nobody does
        return CutoffSolution(hi if g_lo > 0 else lo, True)
    if g_lo == 0:
        return CutoffSolution(lo, False)
    if g_hi == 0:
        return CutoffSolution(hi, False)
    root = optimize.bisect(campbell_gap, lo, hi, args=(r, hi), xtol=tol)
    return CutoffSolution(float(root), False)


def campbell_instance(r: float = 0.7, lo: float = 0.5, hi: float = 0.7, n_nonexperts: int = 2):
    """Expert (voter 0, precision r) plus nonexperts with uniform precisions on [lo, hi]."""
    voters = [VoterDistribution.point(independent(r))]
    voters += [VoterDistribution((), UniformSegment(lo, hi, 1.0)) for _ in range(n_nonexperts)]
    return TypeDistribution(tuple(voters), 0.5)


def campbell_profile(dist: TypeDistribution, cutoff: float, expert: int = 0):
    """Nonexperts delegate to the expert below ``cutoff`` and vote sincerely above it."""
    plans = []
    for i, d in enumerate(dist.voters):
        if i == expert:
            plans.append(VoterPlan((SINCERE,) * len(d.atoms)))
        else:
            plans.append(VoterPlan((SINCERE,) * len(d.atoms),
                                   ThresholdStrategy.cutoff(cutoff, always_delegate(expert), SINCERE)))
    return tuple(plans)


def campbell_closed_form(c: float, r: float = 0.7, lo: float = 0.5, hi: float = 0.7) -> float:
    """p_correct of the two-nonexpert cutoff profile, written out by hand."""
    F = (c - lo) / (hi - lo)
    mu = (c + hi) / 2
    both_vote = (1 - F) ** 2
    majority = r * (mu ** 2 + 2 * mu * (1 - mu)) + (1 - r) * mu ** 2
    return r * (1 - both_vote) + both_vote * majority


# ---------------------------------------------------------------------------
# three-player example with uncertain partisanship


@dataclass(frozen=True)
class ThreePlayerResult:
    x: float
    no_delegation: float
    delegation_eq: float
    fie_certificate: bool
    residual_no_delegation: float  # p_correct given no informed independent among two independents
    residual_delegation: float


def three_player_distribution(x: float) -> TypeDistribution:
    """Player 1 partisan of either side; players 2 and 3 informed, uninformed or partisan.

    Players 2 and 3 are informed independents with probability 0.5 - x,
    uninformed independents with probability 0.5 - x, and partisans of each
    side with probability x each.
    """
    if not 0 <= x < 0.5:
        raise ValidationError(f"x={x} outside [0, 0.5)", "x")
    p1 = VoterDistribution(((partisan("A"), 0.5), (partisan("B"), 0.5)))
    atoms = ((independent(1.0), 0.5 - x), (independent(0.5), 0.5 - x),
             (partisan("A"), x), (partisan("B"), x))
    other = VoterDistribution(atoms)
    return TypeDistribution((p1, other, other), 0.5)


def three_player_profiles(dist: TypeDistribution):
    """(no-delegation, delegation) ex-ante profiles for the three-player example."""
    p1 = VoterPlan((always("A"), always("B")))

    def plan(uninformed: InterimStrategy) -> VoterPlan:
        return VoterPlan((SINCERE, uninformed, always("A"), always("B")))

    no_del = (p1, plan(SINCERE), plan(SINCERE))
    deleg = (p1, plan(always_delegate(2)), plan(always_delegate(1)))
    return no_del, deleg


def _conditional_correct(dist: TypeDistribution, sigma, event) -> float:
    """P(correct | type event) by direct enumeration of atom combinations."""
    mech = Mechanism.ld()
    num = den = 0.0
    for combo in itertools.product(*[list(zip(d.atoms, p.atoms)) for d, p in zip(dist.voters, sigma)]):
        types = [t for (t, _), _ in combo]
        w = math.prod(p for (_, p), _ in combo)
        if w == 0 or not event(types):
            continue
        committee = Committee(tuple(types), dist.prior)
        prof = [s for _, s in combo]
        pc = 0.5 * prob_a_wins(committee, mech, prof, State.a) + \
            0.5 * (1 - prob_a_wins(committee, mech, prof, State.b))
        num += w * pc
        den += w
    return num / den if den else float("nan")


def three_player_partisan_example(x: float) -> ThreePlayerResult:
    dist = three_player_distribution(x)
    no_del, deleg = three_player_profiles(dist)
    mech = Mechanism.ld()
    u0 = exante_utility(dist, mech, no_del).p_correct
    u1 = exante_utility(dist, mech, deleg).p_correct

    def two_ind(types):
        return sum(t.is_independent for t in types) >= 2

    def informed(types):
        return two_ind(types) and any(t.is_independent and t.precision == 1.0 for t in types)

    def uninformed_only(types):
        return two_ind(types) and not informed(types)

    cert_mass = _conditional_correct(dist, deleg, informed)
    fie = math.isnan(cert_mass) or abs(cert_mass - 1.0) <= 1e-12
    return ThreePlayerResult(x, u0, u1, fie,
                             _conditional_correct(dist, no_del, uninformed_only),
                             _conditional_correct(dist, deleg, uninformed_only))


# ---------------------------------------------------------------------------
# interim linearity in own precision


@dataclass(frozen=True)
class AffineUtility:
    slope: float
    intercept: float

    def __call__(self, q: float) -> float:
        return self.slope * q + self.intercept


def _win_probs_given_action(distribution: TypeDistribution, mechanism: Mechanism, sigma,
                            voter: int, action: Action) -> tuple[float, float]:
    """(P(A wins | a), P(B wins | b)) when ``voter`` takes ``action`` and others follow ``sigma``."""
    comps = []
    for i, (d, p) in enumerate(zip(distribution.voters, sigma)):
        if i == voter:
            comps.append([(independent(0.5), 1.0, unresponsive(action))])
        else:
            comps.append(_components(d, p, f"Sigma[{i}]"))
    pa = {s: 0.0 for s in STATES}
    for combo in itertools.product(*comps):
        w = math.prod(m for _, m, _ in combo)
        if w == 0:
            continue
        committee = Committee(tuple(t for t, _, _ in combo), distribution.prior)
        prof = validate_profile(committee, mechanism, [s for _, _, s in combo])
        for s in STATES:
            pa[s] += w * prob_a_wins(committee, mechanism, prof, s)
    return pa[State.a], 1 - pa[State.b]


def interim_linearity_check(distribution: TypeDistribution, mechanism: Mechanism, sigma_minus_i,
                            voter: int, action: Action) -> AffineUtility:
    """Coefficients of q -> q P(A wins | a, y) + (1 - q) P(B wins | b, y).

    This is the signal-a interim payoff of action ``y`` (up to the positive
    normalization at a flat prior), affine in the voter's own precision.
    """
    p_a, p_b = _win_probs_given_action(distribution, mechanism, sigma_minus_i, voter, action)
    return AffineUtility(p_a - p_b, p_b)


def best_response_cutoffs(lines: dict, lo: float = 0.5, hi: float = 1.0, tol: float = 1e-12):
    """Upper envelope of affine utilities over [lo, hi].

    Returns ``(cutoffs, maximizers)``: ``maximizers[k]`` is the set of actions
    attaining the envelope inside the k-th interval.
    """
    keys = list(lines)
    pts = {lo, hi}
    for a, b in itertools.combinations(keys, 2):
        la, lb = lines[a], lines[b]
        ds = la.slope - lb.slope
        if abs(ds) > tol:
            q = (lb.intercept - la.intercept) / ds
            if lo < q < hi:
                pts.add(q)
    grid = sorted(pts)
    cut = []
    maxi = []
    for a, b in zip(grid, grid[1:]):
        mid = (a + b) / 2
        vals = {k: lines[k](mid) for k in keys}
        best = max(vals.values())
        arg = frozenset(k for k, v in vals.items() if v >= best - 1e-12)
        if maxi and maxi[-1] == arg:
            continue
        if maxi:
            cut.append(a)
        maxi.append(arg)
    return cut, maxi


# ---------------------------------------------------------------------------
# auxiliary game


@dataclass(frozen=True)
class AuxiliaryGame:
    distribution: TypeDistribution
    mechanism: Mechanism
    pinned: dict  # (voter, atom index) -> InterimStrategy

    def action_sets(self, voter: int, atom: int, committee_free: Optional[Committee] = None):
        """Strategies an atom may use: the pinned one for partisans, everything otherwise."""
        if (voter, atom) in self.pinned:
            return [self.pinned[(voter, atom)]]
        t = self.distribution.voters[voter].atoms[atom][0]
        c = _atom_committee(self.distribution, voter, t)
        return self.mechanism.strategies(c, voter)

    def embed(self, aux_profile: dict) -> dict:
        """Map an auxiliary profile ((voter, atom) -> strategy) into the original game."""
        out = dict(aux_profile)
        out.update(self.pinned)
        return out


def _atom_committee(dist: TypeDistribution, voter: int, t: VoterType) -> Committee:
    voters = [d.atoms[0][0] if d.atoms else independent(0.5) for d in dist.voters]
    voters[voter] = t
    return Committee(tuple(voters), dist.prior)


def auxiliary_transform(distribution: TypeDistribution, mechanism: Mechanism) -> AuxiliaryGame:
    """Pin every partisan atom to its dominant strategy; payoffs become match-the-state."""
    pinned = {}
    for i, d in enumerate(distribution.voters):
        for k, (t, _) in enumerate(d.atoms):
            if t.preference.is_partisan:
                pinned[(i, k)] = pinned_partisan(_atom_committee(distribution, i, t), mechanism, i)
    return AuxiliaryGame(distribution, mechanism, pinned)


class AgentForm:
    """Agent-normal form of an all-atom Bayesian game: one agent per (voter, atom).

    Holds, for every joint agent profile over the given strategy sets, each
    agent's conditional expected utility given her own type.
    """

    def __init__(self, distribution: TypeDistribution, mechanism: Mechanism, sets: dict,
                 common_payoff: bool = False):
        if any(d.segment is not None for d in distribution.voters):
            raise ValidationError("agent form needs all-atom distributions", "voters")
        self.distribution = distribution
        self.mechanism = mechanism
        self.agents = [(i, k) for i, d in enumerate(distribution.voters) for k in range(len(d.atoms))]
        self.sets = {a: list(sets[a]) for a in self.agents}
        shape = [len(self.sets[a]) for a in self.agents]
        self.shape = shape
        axis = {a: n for n, a in enumerate(self.agents)}
        U = np.zeros([len(self.agents)] + shape)
        pi = distribution.prior
        for combo in itertools.product(*[range(len(d.atoms)) for d in distribution.voters]):
            types = [distribution.voters[i].atoms[k][0] for i, k in enumerate(combo)]
            w = math.prod(distribution.voters[i].atoms[k][1] for i, k in enumerate(combo))
            if w == 0:
                continue
            committee = Committee(tuple(types), pi)
            game = Game(committee, mechanism)
            present = [(i, k) for i, k in enumerate(combo)]
            sub_sets = [self.sets[a] for a in present]
            pa = {s: outcome_tensor(game, sub_sets, s) for s in STATES}
            bshape = [1] * len(self.agents)
            for a in present:
                bshape[axis[a]] = len(self.sets[a])
            for i, (vi, k) in enumerate(present):
                t = types[vi]
                if common_payoff:
                    t = independent(0.5)
                val = sum(committee.prior_of(s) * _payoff(t, pa[s], s) for s in STATES)
                pt = distribution.voters[vi].atoms[k][1]
                U[axis[(vi, k)]] += (w / pt) * val.reshape(bshape)
        self.U = U

    def equilibria(self, tol: float = 1e-12) -> np.ndarray:
        ok = np.ones(self.shape, dtype=bool)
        for n in range(len(self.agents)):
            u = self.U[n]
            ok &= u >= u.max(axis=n, keepdims=True) - tol
        return ok

    def undominated(self, tol: float = 1e-12) -> list:
        """Per agent, a boolean mask of strategies not weakly dominated by a pure strategy."""
        out = []
        for n in range(len(self.agents)):
            u = np.moveaxis(self.U[n], n, 0).reshape(self.shape[n], -1)
            keep = np.ones(self.shape[n], dtype=bool)
            for s in range(self.shape[n]):
                d = u - u[s]
                if np.any((d.min(axis=1) >= -tol) & (d.max(axis=1) > tol)):
                    keep[s] = False
            out.append(keep)
        return out

    def profile(self, flat: int) -> dict:
        idx = np.unravel_index(flat, self.shape)
        return {a: self.sets[a][int(k)] for a, k in zip(self.agents, idx)}


# ---------------------------------------------------------------------------
# best threshold profiles on a grid


@dataclass(frozen=True)
class ThresholdSearchResult:
    sigma: tuple
    report: ExAnteReport
    searched: int


def threshold_candidates(lo: float, hi: float, below: Sequence[InterimStrategy],
                         above: Sequence[InterimStrategy], step: float) -> list:
    """Threshold strategies with one cutoff on a grid, deduplicated by behavior."""
    n = int(round((hi - lo) / step))
    grid = [round(lo + k * step, 10) for k in range(n + 1)]
    out = []
    seen = set()
    for b in below:
        for a in above:
            if a == b:
                key = (a,)
                if key not in seen:
                    seen.add(key)
                    out.append(ThresholdStrategy.constant(a))
                continue
            for c in grid[1:-1]:
                out.append(ThresholdStrategy.cutoff(c, b, a))
    return out


def best_threshold_search(distribution: TypeDistribution, mechanism: Mechanism,
                          atom_options: dict, threshold_options: dict) -> ThresholdSearchResult:
    """Exhaustive p_correct maximization over the supplied finite strategy menus.

    ``atom_options[(voter, atom)]`` lists interim strategies for an atom and
    ``threshold_options[voter]`` lists threshold strategies for a segment.
    Ties go to the first profile in menu order.
    """
    per_voter = []
    for i, d in enumerate(distribution.voters):
        atom_menus = [atom_options[(i, k)] for k in range(len(d.atoms))]
        thr = threshold_options.get(i, [None]) if d.segment is not None else [None]
        per_voter.append([VoterPlan(tuple(a), t) for a in itertools.product(*atom_menus) for t in thr])
    best = None
    count = 0
    for sigma in itertools.product(*per_voter):
        count += 1
        rep = exante_utility(distribution, mechanism, sigma)
        if best is None or rep.p_correct > best[1].p_correct + 1e-12:
            best = (sigma, rep)
    return ThresholdSearchResult(best[0], best[1], count)
