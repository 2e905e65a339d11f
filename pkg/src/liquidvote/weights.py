"""Nitzan-Paroush log-likelihood weights and the full-information benchmark."""
from __future__ import annotations

import enum
import itertools
import math
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Sequence

from .model import STATES, Alternative, Committee, State

FLOOR_EPS = 1e-9
DEFAULT_MAX_SIGNALS = 25


class InfiniteRelativeWeight(ValueError):
    """The ratio of weights is undefined or infinite (q = 0.5 or r = 1)."""


class ImpossibleSignals(ValueError):
    """Two perfectly informed voters observed different signals."""


class Tie(enum.Enum):
    TIE = "tie"


TIE = Tie.TIE


def optimal_weight(q: float) -> float:
    """Natural-log likelihood ratio log(q / (1 - q)); +inf for a perfect signal."""
    if not 0.5 <= q <= 1.0:
        raise ValueError(f"precision {q!r} outside [0.5, 1]")
    if q == 1.0:
        return math.inf
    return math.log(q / (1.0 - q))


def relative_weight(r: float, q: float) -> float:
    """How many signals of precision ``q`` one signal of precision ``r`` is worth."""
    if q == 0.5 or r == 1.0:
        raise InfiniteRelativeWeight(f"relative weight of r={r} over q={q} is not finite")
    if not 0.5 < q <= r < 1.0:
        raise ValueError(f"need 0.5 < q <= r < 1, got q={q}, r={r}")
    return optimal_weight(r) / optimal_weight(q)


def floor_weight(w: float) -> int:
    # guard against e.g. 2.9999999999 standing for an exact 3
    return int(math.floor(w + FLOOR_EPS))


def weight_vector(committee: Committee) -> list[float]:
    return [optimal_weight(v.precision) for v in committee.voters]


def rounded_normalized_weights(precisions: Sequence[float], decimals: int = 2,
                             base_decimals: int = 1) -> tuple[list[float], list[float]]:
    """Round log-likelihood ratios, then divide by the (rounded) last one.

    Returns ``(rounded_weights, normalized)``.  The base weight is rounded to
    ``base_decimals`` places, which with the defaults turns 0.4055 into 0.4 and
    the 0.8 expert's weight into 1.39 / 0.4 = 3.475.
    """
    def rnd(x: float, d: int) -> Decimal:
        return Decimal(repr(x)).quantize(Decimal(1).scaleb(-d), rounding=ROUND_HALF_UP)

    raw = [optimal_weight(q) for q in precisions]
    rounded = [rnd(w, decimals) for w in raw[:-1]] + [rnd(raw[-1], base_decimals)]
    base = rounded[-1]
    return [float(x) for x in rounded], [float(x / base) for x in rounded]


def _score(committee: Committee, signals: Mapping[int, State], weights=None):
    perfect = {signals[i] for i in signals if committee.precision(i) == 1.0}
    if len(perfect) > 1:
        raise ImpossibleSignals("perfectly informed voters disagree")
    if perfect:
        return math.inf if perfect.pop() is State.a else -math.inf
    pi = committee.prior
    score = math.log(pi / (1 - pi))
    for i, s in signals.items():
        w = optimal_weight(committee.precision(i)) if weights is None else weights[i]
        score += w if s is State.a else -w
    return score


def first_best_decision(committee: Committee, signals, weights=None):
    """Decision of one observer seeing every independent's signal.

    ``signals`` maps voter index to observed state (or is a sequence aligned
    with ``committee.independents()``).  ``weights`` overrides the
    log-likelihood weights, which lets callers test scaled or rounded weights.
    """
    if not isinstance(signals, Mapping):
        signals = dict(zip(committee.independents(), signals))
    missing = set(committee.independents()) - set(signals)
    if missing:
        raise ValueError(f"signals missing for voters {sorted(missing)}")
    score = _score(committee, signals, weights)
    if abs(score) <= 1e-12:
        return TIE
    return Alternative.A if score > 0 else Alternative.B


def _signal_profiles(committee: Committee, state: State, max_signals: int):
    ind = committee.independents()
    if len(ind) > max_signals:
        from .engine import InstanceTooLarge
        raise InstanceTooLarge(f"{len(ind)} independents exceed the enumeration cap {max_signals}")
    for combo in itertools.product(STATES, repeat=len(ind)):
        prob = 1.0
        for i, s in zip(ind, combo):
            q = committee.precision(i)
            prob *= q if s is state else 1 - q
        if prob > 0:
            yield dict(zip(ind, combo)), prob


def first_best_probability(committee: Committee, max_signals: int = DEFAULT_MAX_SIGNALS) -> float:
    """P(first-best decision matches the state); ties count one half."""
    total = 0.0
    for state in STATES:
        acc = 0.0
        for signals, prob in _signal_profiles(committee, state, max_signals):
            d = first_best_decision(committee, signals)
            acc += prob * (0.5 if d is TIE else float(d is state.alternative))
        total += committee.prior_of(state) * acc
    return total


def weighted_decision_table(committee: Committee, weights: Sequence[float]):
    """Map every independent signal profile to the sincere weighted-majority decision."""
    ind = committee.independents()
    out = {}
    for combo in itertools.product(STATES, repeat=len(ind)):
        margin = sum(weights[i] if s is State.a else -weights[i] for i, s in zip(ind, combo))
        out[combo] = TIE if abs(margin) <= 1e-12 else (Alternative.A if margin > 0 else Alternative.B)
    return out


def first_best_table(committee: Committee):
    ind = committee.independents()
    return {combo: first_best_decision(committee, dict(zip(ind, combo)))
            for combo in itertools.product(STATES, repeat=len(ind))}
