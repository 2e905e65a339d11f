"""Delegation resolution, tallying and exact profile evaluation.

Internally a realized action vector is an integer array over *nodes*: the N
voters followed, under RD, by the two mechanical representatives.  Codes:

    VOTE_A_CODE (-1), VOTE_B_CODE (-2), ABSTAIN_CODE (-3), k >= 0: delegate to node k.

Delegation chains are followed by pointer doubling, so whole batches of
realizations resolve in a handful of vectorized gathers.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import (A_STAR, B_STAR, STATES, Action, Alternative, Committee,
                    InterimStrategy, Mechanism, Preference, State,
                    ValidationError, validate_profile)

VOTE_A_CODE = -1
VOTE_B_CODE = -2
ABSTAIN_CODE = -3
HOLDER_CODE = -4  # placeholder terminal used to track the votes one voter ends up holding

DEFAULT_MAX_RESPONSIVE = 25
_CHUNK_BITS = 14


class InstanceTooLarge(RuntimeError):
    """Raised when exact enumeration would exceed the configured cap."""


def n_nodes(n: int, mechanism: Mechanism) -> int:
    return n + 2 if mechanism.has_mechanical else n


def action_code(action: Action, n: int) -> int:
    if action.kind == "a":
        return VOTE_A_CODE
    if action.kind == "b":
        return VOTE_B_CODE
    if action.kind == "x":
        return ABSTAIN_CODE
    t = action.target
    if t == A_STAR:
        return n
    if t == B_STAR:
        return n + 1
    return int(t)


def _mechanical_codes(mechanism: Mechanism) -> list[int]:
    if not mechanism.has_mechanical:
        return []
    return [VOTE_A_CODE, VOTE_B_CODE]


def resolve_terminals(codes: np.ndarray) -> np.ndarray:
    """Return, per node, the code its vote finally carries.

    ``codes`` has shape ``(batch, nodes)``.  The result holds the terminal code
    (negative) reached by each node's chain, or ``ABSTAIN_CODE`` when the chain
    runs into a delegation cycle.
    """
    codes = np.asarray(codes, dtype=np.int64)
    batch, m = codes.shape
    idx = np.broadcast_to(np.arange(m), (batch, m))
    nxt = np.where(codes >= 0, codes, idx)
    steps = max(1, int(np.ceil(np.log2(max(m, 2)))) + 1)
    for _ in range(steps):
        nxt = np.take_along_axis(nxt, nxt, axis=1)
    final = np.take_along_axis(codes, nxt, axis=1)
    return np.where(final >= 0, ABSTAIN_CODE, final)


def count_ballots(codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    term = resolve_terminals(codes)
    return (term == VOTE_A_CODE).sum(axis=1), (term == VOTE_B_CODE).sum(axis=1)


def mechanism_ballots(mechanism: Mechanism, codes: np.ndarray):
    """Ballot counts, dropping the mechanical representatives' own ballots if configured."""
    va, vb = count_ballots(codes)
    if mechanism.has_mechanical and not mechanism.mechanical_partisans_vote:
        va, vb = va - 1, vb - 1
    return va, vb


def p_a_from_counts(votes_a, votes_b) -> np.ndarray:
    va = np.asarray(votes_a)
    vb = np.asarray(votes_b)
    return np.where(va > vb, 1.0, np.where(va < vb, 0.0, 0.5))


@dataclass(frozen=True)
class ResolvedBallots:
    votes_for_A: int
    votes_for_B: int
    abstained: int

    @property
    def total(self) -> int:
        return self.votes_for_A + self.votes_for_B + self.abstained


@dataclass(frozen=True)
class OutcomeDistribution:
    p_A: float
    p_B: float


def resolve(actions: Sequence[Action], mechanism: Mechanism) -> ResolvedBallots:
    """Follow delegation chains and count the votes cast for A, for B and in abstention.

    Under RD the mechanical representatives cast one ballot each, so the
    ballot total is N + 2.
    """
    n = len(actions)
    row = [action_code(a, n) for a in actions] + _mechanical_codes(mechanism)
    for i, c in enumerate(row[:n]):
        if c == i:
            raise ValidationError("self-delegation", f"actions[{i}]")
        if c >= len(row):
            raise ValidationError(f"delegation target {actions[i].target} unknown", f"actions[{i}]")
    va, vb = mechanism_ballots(mechanism, np.array([row]))
    va, vb = int(va[0]), int(vb[0])
    total = len(row) - (2 if mechanism.has_mechanical and not mechanism.mechanical_partisans_vote else 0)
    return ResolvedBallots(va, vb, total - va - vb)


def tally(ballots: ResolvedBallots) -> OutcomeDistribution:
    if ballots.votes_for_A > ballots.votes_for_B:
        return OutcomeDistribution(1.0, 0.0)
    if ballots.votes_for_A < ballots.votes_for_B:
        return OutcomeDistribution(0.0, 1.0)
    return OutcomeDistribution(0.5, 0.5)


def majoritarian_alternative(committee: Committee, state: State) -> frozenset:
    """Alternatives preferred ex post by the larger head-count in ``state``."""
    n_a = n_b = 0
    for v in committee.voters:
        if v.preference is Preference.PartisanA:
            n_a += 1
        elif v.preference is Preference.PartisanB:
            n_b += 1
        elif state is State.a:
            n_a += 1
        else:
            n_b += 1
    if n_a > n_b:
        return frozenset({Alternative.A})
    if n_b > n_a:
        return frozenset({Alternative.B})
    return frozenset({Alternative.A, Alternative.B})


@dataclass(frozen=True)
class EvalReport:
    p_correct_given_a: float
    p_correct_given_b: float
    p_correct: float
    p_majoritarian: float
    voter_utilities: tuple

    @property
    def p_A_given_a(self) -> float:
        return self.p_correct_given_a

    @property
    def p_A_given_b(self) -> float:
        return 1.0 - self.p_correct_given_b

    def as_record(self) -> dict:
        return {
            "p_correct_given_a": self.p_correct_given_a,
            "p_correct_given_b": self.p_correct_given_b,
            "p_correct": self.p_correct,
            "p_majoritarian": self.p_majoritarian,
            "voter_utilities": list(self.voter_utilities),
        }


def signal_realizations(precisions: Sequence[float], state: State):
    """All signal vectors of the given voters with their probabilities in ``state``.

    Returns ``(bits, probs)`` where ``bits[r, k]`` is True when voter k
    observes signal a in realization r.
    """
    r = len(precisions)
    bits = ((np.arange(2 ** r)[:, None] >> np.arange(r)[None, :]) & 1).astype(bool)
    q = np.asarray(precisions, dtype=float)
    right = bits if state is State.a else ~bits
    probs = np.prod(np.where(right, q, 1.0 - q), axis=1) if r else np.ones(1)
    return bits, probs


def _profile_codes(committee: Committee, mechanism: Mechanism, profile):
    n = committee.n
    code_a = [action_code(s.on_a, n) for s in profile] + _mechanical_codes(mechanism)
    code_b = [action_code(s.on_b, n) for s in profile] + _mechanical_codes(mechanism)
    return np.array(code_a), np.array(code_b)


def prob_a_wins(committee: Committee, mechanism: Mechanism, profile, state: State,
                max_responsive: int = DEFAULT_MAX_RESPONSIVE) -> float:
    """Exact P(A wins | state) by enumerating responsive voters' signals."""
    code_a, code_b = _profile_codes(committee, mechanism, profile)
    responsive = [i for i in range(committee.n) if code_a[i] != code_b[i]]
    if len(responsive) > max_responsive:
        raise InstanceTooLarge(
            f"instance too large for exact evaluation: {len(responsive)} responsive voters "
            f"(cap {max_responsive})")
    q = [committee.precision(i) for i in responsive]
    total = 0.0
    r = len(responsive)
    # split the enumeration into fixed chunks so the summation order is stable
    hi_bits = max(0, r - _CHUNK_BITS)
    lo = r - hi_bits
    bits_lo, _ = signal_realizations([0.5] * lo, state)
    for chunk in range(2 ** hi_bits):
        hi = np.array([(chunk >> k) & 1 for k in range(hi_bits)], dtype=bool)
        bits = np.concatenate([bits_lo, np.broadcast_to(hi, (len(bits_lo), hi_bits))], axis=1)
        right = bits if state is State.a else ~bits
        probs = np.prod(np.where(right, q, 1.0 - np.asarray(q)), axis=1) if r else np.ones(1)
        codes = np.broadcast_to(code_b, (len(bits), len(code_b))).copy()
        if r:
            codes[:, responsive] = np.where(bits, code_a[responsive], code_b[responsive])
        va, vb = mechanism_ballots(mechanism, codes)
        total += float(np.dot(probs, p_a_from_counts(va, vb)))
    return total


def evaluate_profile(committee: Committee, mechanism: Mechanism, profile,
                     max_responsive: int = DEFAULT_MAX_RESPONSIVE,
                     validate: bool = True) -> EvalReport:
    """Exact outcome statistics and expected utilities for an interim profile."""
    if validate:
        mechanism.check_committee(committee)
        profile = validate_profile(committee, mechanism, profile)
    pa = {s: prob_a_wins(committee, mechanism, profile, s, max_responsive) for s in STATES}
    return report_from_state_probs(committee, pa[State.a], pa[State.b])


def report_from_state_probs(committee: Committee, pa_given_a: float, pa_given_b: float) -> EvalReport:
    pi = committee.prior
    c_a = pa_given_a
    c_b = 1.0 - pa_given_b
    p_correct = pi * c_a + (1 - pi) * c_b
    p_maj = 0.0
    for state, pa in ((State.a, pa_given_a), (State.b, pa_given_b)):
        maj = majoritarian_alternative(committee, state)
        hit = (pa if Alternative.A in maj else 0.0) + ((1 - pa) if Alternative.B in maj else 0.0)
        p_maj += committee.prior_of(state) * hit
    a_util = pi * pa_given_a + (1 - pi) * pa_given_b
    utils = []
    for v in committee.voters:
        if v.preference is Preference.Independent:
            utils.append(p_correct)
        elif v.preference is Preference.PartisanA:
            utils.append(a_util)
        else:
            utils.append(1.0 - a_util)
    return EvalReport(c_a, c_b, p_correct, p_maj, tuple(utils))


def brute_force_evaluate(committee: Committee, mechanism: Mechanism, profile) -> EvalReport:
    """Reference evaluation enumerating every voter's signal, one realization at a time."""
    n = committee.n
    pa = {}
    for state in STATES:
        total = 0.0
        for mask in range(2 ** n):
            prob = 1.0
            actions = []
            for i in range(n):
                sig = State.a if (mask >> i) & 1 else State.b
                q = committee.precision(i)
                prob *= q if sig is state else 1 - q
                actions.append(profile[i].action(sig))
            total += prob * tally(resolve(actions, mechanism)).p_A
        pa[state] = total
    return report_from_state_probs(committee, pa[State.a], pa[State.b])


def interim_utility(committee: Committee, mechanism: Mechanism, profile, voter: int) -> float:
    return evaluate_profile(committee, mechanism, profile).voter_utilities[voter]


def sincere_profile(committee: Committee) -> tuple:
    from .model import SINCERE
    return tuple(SINCERE for _ in committee.voters)


__all__ = [
    "ResolvedBallots", "OutcomeDistribution", "EvalReport", "InstanceTooLarge",
    "resolve", "tally", "evaluate_profile", "majoritarian_alternative",
    "brute_force_evaluate", "interim_utility", "prob_a_wins", "resolve_terminals",
    "action_code", "signal_realizations", "InterimStrategy",
]
