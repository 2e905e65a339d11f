"""Best responses, equilibrium checks, weak dominance and IEWDS.

Everything a voter ``i`` needs to know about opponents' behaviour is the
*response matrix* ``F[state, y]``: the probability, in each state, that the
outcome pays ``i`` when she takes action ``y``.  For a realized opponent
action vector the outcome of each of ``i``'s actions is that of voting A,
voting B or abstaining, with her held votes attached (a delegation behaves like
whatever the target's chain finally does; a chain that loops back to ``i`` is a
cycle and abstains).  Interim utilities of all of ``i``'s strategies are linear
in ``F``, so opponent profiles with equal ``F`` are collapsed before any
comparison.

Weak dominance of ``s`` by ``t`` is decided with three exact tools:

* refutation: any opponent profile where ``s`` does strictly better;
* exhaustive enumeration of the opponents' surviving product (tensor
  contraction over realized action vectors) when it fits the budget;
* a pointwise certificate: ``t`` is at least as good as ``s`` for every
  realized opponent action vector reachable from the surviving sets (or a
  sound over-approximation of them), which implies the weak inequality for
  every opponent profile.

When none of them settles a pair the verdict is ``UNDECIDED``; it is never
reported as "not dominated".
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .engine import (ABSTAIN_CODE, HOLDER_CODE, VOTE_A_CODE, VOTE_B_CODE,
                     EvalReport, InstanceTooLarge, action_code,
                     evaluate_profile, p_a_from_counts, report_from_state_probs,
                     resolve_terminals)
from .model import (A_STAR, B_STAR, STATES, Action, Committee, InterimStrategy,
                    Mechanism, Preference, State, delegate, unresponsive,
                    validate_profile)

TOL = 1e-12


@dataclass(frozen=True)
class Budget:
    """Caps on the enumeration work done by dominance checks."""

    exhaustive_profiles: int = 250_000
    z_cells: int = 3_000_000
    unresponsive_profiles: int = 70_000
    random_profiles: int = 600
    backgrounds: int = 12
    search_profiles: int = 2_000_000
    seed: int = 20240601


class _Undecided:
    def __repr__(self):
        return "UNDECIDED"

    def __bool__(self):
        return False


UNDECIDED = _Undecided()


@dataclass(frozen=True)
class DominanceWitness:
    voter: int
    dominated: InterimStrategy
    dominator: InterimStrategy
    strict_at: Optional[tuple]  # opponents' profile, None at the voter's own slot
    gain: float = 0.0

    def as_record(self) -> dict:
        return {
            "voter": self.voter + 1,
            "dominated": str(self.dominated),
            "dominator": str(self.dominator),
            "strict_at": None if self.strict_at is None else
            [None if s is None else str(s) for s in self.strict_at],
            "gain": self.gain,
        }


class Game:
    """Committee plus mechanism, with per-voter action tables cached."""

    def __init__(self, committee: Committee, mechanism: Mechanism):
        mechanism.check_committee(committee)
        self.committee = committee
        self.mechanism = mechanism
        self.n = committee.n
        self.nodes = self.n + (2 if mechanism.has_mechanical else 0)
        self.actions = [mechanism.legal_actions(committee, i) for i in range(self.n)]
        self.strategies = [mechanism.strategies(committee, i) for i in range(self.n)]
        self.q = np.array([v.precision for v in committee.voters])
        self.pref = [v.preference for v in committee.voters]
        self._y_index = [{a: k for k, a in enumerate(acts)} for acts in self.actions]
        self.drop_mechanical = mechanism.has_mechanical and not mechanism.mechanical_partisans_vote
        self._analyses: dict = {}

    def code(self, action: Action) -> int:
        return action_code(action, self.n)

    def base_row(self) -> np.ndarray:
        row = np.full(self.nodes, ABSTAIN_CODE, dtype=np.int64)
        if self.mechanism.has_mechanical:
            row[self.n] = VOTE_A_CODE
            row[self.n + 1] = VOTE_B_CODE
        return row

    def strategy_indices(self, i: int, strategies: Sequence[InterimStrategy]):
        idx = self._y_index[i]
        return (np.array([idx[s.on_a] for s in strategies]),
                np.array([idx[s.on_b] for s in strategies]))

    def signal_probs(self, i: int, state: State) -> tuple[float, float]:
        """(P(signal a | state), P(signal b | state)) for voter i."""
        q = self.q[i]
        return (q, 1 - q) if state is State.a else (1 - q, q)

    def payoff_from_pa(self, i: int, pa: np.ndarray, state: State) -> np.ndarray:
        pref = self.pref[i]
        if pref is Preference.PartisanA:
            return pa
        if pref is Preference.PartisanB:
            return 1.0 - pa
        return pa if state is State.a else 1.0 - pa

    # ---- outcome of each of i's actions for a batch of realized opponent rows

    def action_outcomes(self, i: int, codes: np.ndarray) -> np.ndarray:
        """P(A wins) for each row of ``codes`` and each legal action of voter ``i``.

        Column ``i`` of ``codes`` is overwritten with the holder placeholder.
        """
        codes = np.array(codes, dtype=np.int64, copy=True)
        codes[:, i] = HOLDER_CODE
        term = resolve_terminals(codes)
        na = (term == VOTE_A_CODE).sum(axis=1)
        nb = (term == VOTE_B_CODE).sum(axis=1)
        m = (term == HOLDER_CODE).sum(axis=1)
        if self.drop_mechanical:
            na, nb = na - 1, nb - 1
        pa_a = p_a_from_counts(na + m, nb)
        pa_b = p_a_from_counts(na, nb + m)
        pa_x = p_a_from_counts(na, nb)
        cols = []
        for y in self.actions[i]:
            if y.kind == "a":
                cols.append(pa_a)
            elif y.kind == "b":
                cols.append(pa_b)
            elif y.kind == "x":
                cols.append(pa_x)
            else:
                lab = term[:, self.code(y)]
                cols.append(np.where(lab == VOTE_A_CODE, pa_a, np.where(lab == VOTE_B_CODE, pa_b, pa_x)))
        return np.stack(cols, axis=1)

    def payoff_tables(self, i: int, codes: np.ndarray) -> dict:
        pa = self.action_outcomes(i, codes)
        return {s: self.payoff_from_pa(i, pa, s) for s in STATES}

    def utilities_from_F(self, i: int, F: np.ndarray, strategies) -> np.ndarray:
        """Interim utilities ``(profiles, strategies)`` from response matrices ``(profiles, 2, Y)``."""
        ya, yb = self.strategy_indices(i, strategies)
        u = np.zeros((F.shape[0], len(strategies)))
        for k, state in enumerate(STATES):
            pa_sig, pb_sig = self.signal_probs(i, state)
            w = self.committee.prior_of(state)
            u += w * (pa_sig * F[:, k, ya] + pb_sig * F[:, k, yb])
        return u


# ---------------------------------------------------------------------------
# response matrices for explicit opponent profiles


def response_matrices(game: Game, i: int, profiles: Sequence[Sequence]) -> np.ndarray:
    """``F[p, state, y]`` for each opponent profile (entry ``i`` ignored)."""
    n = game.n
    base = game.base_row()
    rows, weights, owners = {s: [] for s in STATES}, {s: [] for s in STATES}, {s: [] for s in STATES}
    for p, prof in enumerate(profiles):
        code_a = base.copy()
        code_b = base.copy()
        resp = []
        for j in range(n):
            if j == i:
                continue
            ca, cb = game.code(prof[j].on_a), game.code(prof[j].on_b)
            code_a[j], code_b[j] = ca, cb
            if ca != cb:
                resp.append(j)
        r = len(resp)
        bits = ((np.arange(2 ** r)[:, None] >> np.arange(r)[None, :]) & 1).astype(bool)
        block = np.broadcast_to(code_b, (2 ** r, game.nodes)).copy()
        if r:
            block[:, resp] = np.where(bits, code_a[resp], code_b[resp])
            q = game.q[resp]
        for state in STATES:
            if r:
                right = bits if state is State.a else ~bits
                w = np.prod(np.where(right, q, 1 - q), axis=1)
            else:
                w = np.ones(1)
            rows[state].append(block)
            weights[state].append(w)
            owners[state].append(np.full(len(w), p))
    F = np.zeros((len(profiles), 2, len(game.actions[i])))
    if not len(profiles):
        return F
    for k, state in enumerate(STATES):
        codes = np.concatenate(rows[state])
        w = np.concatenate(weights[state])
        own = np.concatenate(owners[state])
        pa = game.action_outcomes(i, codes)
        h = game.payoff_from_pa(i, pa, state) * w[:, None]
        starts = np.flatnonzero(np.r_[True, own[1:] != own[:-1]])
        F[own[starts], k, :] = np.add.reduceat(h, starts, axis=0)
    return F


def interim_utility(committee: Committee, mechanism: Mechanism, profile, voter: int) -> float:
    return evaluate_profile(committee, mechanism, profile).voter_utilities[voter]


def strategy_utilities(game: Game, i: int, profile, strategies=None) -> tuple[list, np.ndarray]:
    strategies = game.strategies[i] if strategies is None else list(strategies)
    F = response_matrices(game, i, [profile])
    return strategies, game.utilities_from_F(i, F, strategies)[0]


def best_responses(committee: Committee, mechanism: Mechanism, sigma_minus_i, voter: int,
                   tol: float = TOL) -> set:
    """All maximizers of ``voter``'s interim utility over her full strategy space."""
    game = Game(committee, mechanism)
    strategies, u = strategy_utilities(game, voter, list(sigma_minus_i))
    best = u.max()
    return {s for s, v in zip(strategies, u) if v >= best - tol}


@dataclass(frozen=True)
class Deviation:
    voter: int
    strategy: InterimStrategy
    gain: float


def is_equilibrium(committee: Committee, mechanism: Mechanism, profile,
                   tol: float = 1e-10) -> tuple[bool, Optional[Deviation]]:
    """Pure BNE check; returns the most profitable deviation when there is one."""
    profile = validate_profile(committee, mechanism, profile)
    game = Game(committee, mechanism)
    worst = None
    for i in range(game.n):
        strategies, u = strategy_utilities(game, i, profile)
        current = u[strategies.index(profile[i])]
        k = int(np.argmax(u))
        gain = float(u[k] - current)
        if gain > tol and (worst is None or gain > worst.gain):
            worst = Deviation(i, strategies[k], gain)
    return worst is None, worst


# ---------------------------------------------------------------------------
# realized action spaces


def _realizable(game: Game, j: int, strategies, state: State):
    """Codes voter ``j`` can realize in ``state`` and the matrix P[strategy, code]."""
    pa, pb = game.signal_probs(j, state)
    codes: list[int] = []
    probs = np.zeros((len(strategies), 2 * len(strategies)))
    for k, s in enumerate(strategies):
        for act, p in ((s.on_a, pa), (s.on_b, pb)):
            if p <= 0:
                continue
            c = game.code(act)
            if c not in codes:
                codes.append(c)
            probs[k, codes.index(c)] += p
    return codes, probs[:, :len(codes)]


def _grid(columns: Sequence[Sequence[int]]) -> np.ndarray:
    """Cartesian product of per-column value lists, first column varying slowest."""
    if not columns:
        return np.zeros((1, 0), dtype=np.int64)
    mesh = np.meshgrid(*[np.asarray(c, dtype=np.int64) for c in columns], indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _rows(game: Game, i: int, opponents, values) -> np.ndarray:
    grid = _grid(values)
    rows = np.broadcast_to(game.base_row(), (len(grid), game.nodes)).copy()
    if opponents:
        rows[:, opponents] = grid
    return rows


def _class_codes(game: Game, i: int, sets, state: State) -> list[list[int]]:
    """Sound over-approximation of the terminal class of every opponent.

    Classes are encoded as the action code that produces them directly: vote A,
    vote B, abstain, or delegate to ``i`` (whose votes ``i`` then holds).
    """
    n = game.n
    real = {j: _realizable(game, j, sets[j], state)[0] for j in range(n) if j != i}
    cls = {j: set() for j in real}
    can_delegate = {j: any(c >= 0 for c in real[j]) for j in real}
    changed = True
    while changed:
        changed = False
        for j, codes in real.items():
            new = set(cls[j])
            for c in codes:
                if c < 0:
                    new.add(c)
                elif c == i:
                    new.add(i)
                elif c == n:
                    new.add(VOTE_A_CODE)
                elif c == n + 1:
                    new.add(VOTE_B_CODE)
                else:
                    new |= cls[c]
                    if can_delegate[c]:
                        new.add(ABSTAIN_CODE)
            if new != cls[j]:
                cls[j] = new
                changed = True
    return [sorted(cls[j]) for j in real]


def _z_space(game: Game, i: int, sets, state: State, budget: Budget):
    """Realized opponent rows for the pointwise certificate: (rows, exact?) or None."""
    opponents = [j for j in range(game.n) if j != i]
    y = len(game.actions[i])
    exact = [_realizable(game, j, sets[j], state)[0] for j in opponents]
    if np.prod([len(v) for v in exact], dtype=float) * y <= budget.z_cells:
        return _rows(game, i, opponents, exact), True
    classes = _class_codes(game, i, sets, state)
    if np.prod([len(v) for v in classes], dtype=float) * y <= budget.z_cells:
        return _rows(game, i, opponents, classes), False
    return None


# ---------------------------------------------------------------------------
# exhaustive enumeration of the opponents' product


def _exhaustive_F(game: Game, i: int, sets) -> np.ndarray:
    """F for every opponent profile, opponents in index order, first varying slowest."""
    opponents = [j for j in range(game.n) if j != i]
    y = len(game.actions[i])
    n_prof = int(np.prod([len(sets[j]) for j in opponents], dtype=np.int64))
    F = np.zeros((n_prof, 2, y))
    for k, state in enumerate(STATES):
        real = [_realizable(game, j, sets[j], state) for j in opponents]
        rows = _rows(game, i, opponents, [codes for codes, _ in real])
        h = game.payoff_from_pa(i, game.action_outcomes(i, rows), state)
        t = h.reshape([len(codes) for codes, _ in real] + [y])
        for _, probs in real:
            t = np.tensordot(t, probs, axes=([0], [1]))
        # axes are now (y, S_1, ..., S_k)
        F[:, k, :] = t.reshape(y, n_prof).T
    return F


def _unravel_profile(sets, i: int, flat: int) -> tuple:
    opponents = [j for j in range(len(sets)) if j != i]
    idx = np.unravel_index(flat, [len(sets[j]) for j in opponents]) if opponents else ()
    prof: list = [None] * len(sets)
    for j, k in zip(opponents, idx):
        prof[j] = sets[j][int(k)]
    return tuple(prof)


# ---------------------------------------------------------------------------
# candidate opponent profiles for refutation and strictness


_CORE_KINDS = ("a", "b", "x")


def _candidate_profiles(game: Game, i: int, sets, budget: Budget, rng: np.random.Generator) -> list:
    opponents = [j for j in range(game.n) if j != i]
    menus = {j: [s for s in sets[j] if not s.responsive] or [sets[j][0]] for j in opponents}
    size = np.prod([len(m) for m in menus.values()], dtype=float)
    if size > budget.unresponsive_profiles:
        core = {}
        for j in opponents:
            keep = [s for s in menus[j] if s.on_a.kind in _CORE_KINDS or s.on_a.target == i]
            core[j] = keep or menus[j]
        menus = core
        size = np.prod([len(m) for m in menus.values()], dtype=float)
    base: list[list] = []
    if size <= budget.unresponsive_profiles:
        for combo in itertools.product(*[menus[j] for j in opponents]):
            prof = [None] * game.n
            for j, s in zip(opponents, combo):
                prof[j] = s
            base.append(prof)
    else:
        for _ in range(budget.unresponsive_profiles):
            prof = [None] * game.n
            for j in opponents:
                prof[j] = menus[j][rng.integers(len(menus[j]))]
            base.append(prof)
    # backgrounds where i's choice matters at all
    F = response_matrices(game, i, base)
    pivotal = np.flatnonzero(np.ptp(F, axis=2).max(axis=1) > TOL)
    pool = pivotal if len(pivotal) else np.arange(len(base))
    picks = rng.choice(pool, size=min(budget.backgrounds, len(pool)), replace=False)
    extra: list[list] = []
    for b in sorted(picks.tolist()):
        for j in opponents:
            for s in sets[j]:
                if s.responsive:
                    prof = list(base[b])
                    prof[j] = s
                    extra.append(prof)
    for _ in range(budget.random_profiles):
        prof = [None] * game.n
        for j in opponents:
            prof[j] = sets[j][rng.integers(len(sets[j]))]
        extra.append(prof)
    return base + extra, F


# ---------------------------------------------------------------------------
# per-voter dominance analysis


@dataclass
class VoterAnalysis:
    voter: int
    strategies: list
    dominated: dict = field(default_factory=dict)  # strategy -> DominanceWitness
    undecided: list = field(default_factory=list)
    exact: bool = True

    @property
    def survivors(self) -> list:
        return [s for s in self.strategies if s not in self.dominated]


def _pair_extremes(u: np.ndarray, pairs: np.ndarray, chunk: int = 4096):
    """min/max over rows of u[:, t] - u[:, s] and the argmax row, for pairs (s, t)."""
    lo = np.full(len(pairs), np.inf)
    hi = np.full(len(pairs), -np.inf)
    arg = np.zeros(len(pairs), dtype=np.int64)
    alive = np.ones(len(pairs), dtype=bool)
    for start in range(0, len(u), chunk):
        idx = np.flatnonzero(alive)
        if not len(idx):
            break
        block = u[start:start + chunk]
        d = block[:, pairs[idx, 1]] - block[:, pairs[idx, 0]]
        lo[idx] = np.minimum(lo[idx], d.min(axis=0))
        bmax = d.max(axis=0)
        better = bmax > hi[idx]
        arg[idx[better]] = start + d.argmax(axis=0)[better]
        hi[idx] = np.maximum(hi[idx], bmax)
        alive = lo >= -TOL
    return lo, hi, arg


def analyze_voter(game: Game, i: int, sets, budget: Budget = Budget(),
                  rng: Optional[np.random.Generator] = None) -> VoterAnalysis:
    """Classify each of voter ``i``'s strategies in ``sets[i]`` as dominated or not.

    Without an explicit ``rng`` the result is deterministic and memoized on
    the game, keyed by the strategy sets.
    """
    if rng is not None:
        return _analyze_voter(game, i, sets, budget, rng)
    key = (i, budget, tuple(tuple(s) for s in sets))
    if key not in game._analyses:
        game._analyses[key] = _analyze_voter(game, i, sets, budget,
                                             np.random.default_rng(budget.seed + i))
    return game._analyses[key]


def _unique_rows(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distinct rows and the index of a first occurrence of each.

    Rows are bucketed by a random projection; the buckets are then checked
    for exact equality, falling back to a full row sort on a collision.
    """
    if len(m) == 0:
        return m, np.zeros(0, dtype=np.int64)
    proj = m @ np.random.default_rng(0).standard_normal(m.shape[1])
    _, first, inverse = np.unique(proj, return_index=True, return_inverse=True)
    if not np.array_equal(m, m[first[inverse.ravel()]]):
        _, first = np.unique(m, axis=0, return_index=True)
    return m[first], first


def _analyze_voter(game: Game, i: int, sets, budget: Budget,
                   rng: np.random.Generator) -> VoterAnalysis:
    strategies = list(sets[i])
    out = VoterAnalysis(i, strategies)
    ns = len(strategies)
    if ns < 2:
        return out
    pairs = np.array([(s, t) for s in range(ns) for t in range(ns) if s != t])
    opponents = [j for j in range(game.n) if j != i]
    n_prof = np.prod([len(sets[j]) for j in opponents], dtype=float)
    y = len(game.actions[i])
    z_exact = max(np.prod([len(_realizable(game, j, sets[j], st)[0]) for j in opponents],
                          dtype=float) for st in STATES)
    exhaustive = n_prof <= budget.exhaustive_profiles and z_exact * y <= budget.z_cells

    if exhaustive:
        F = _exhaustive_F(game, i, sets)
        u = game.utilities_from_F(i, F, strategies)
        u, first = _unique_rows(u)
        lo, hi, arg = _pair_extremes(u, pairs)
        for (s, t), l, h, a in zip(pairs, lo, hi, arg):
            if l >= -TOL and h > TOL and strategies[s] not in out.dominated:
                prof = _unravel_profile(sets, i, int(first[a]))
                out.dominated[strategies[s]] = DominanceWitness(
                    i, strategies[s], strategies[t], prof, float(h))
        return out

    profiles, _ = _candidate_profiles(game, i, sets, budget, rng)
    F = response_matrices(game, i, profiles)
    u = game.utilities_from_F(i, F, strategies)
    u, first = _unique_rows(u)
    lo, hi, arg = _pair_extremes(u, pairs)

    live = lo >= -TOL
    cert = np.zeros(len(pairs), dtype=bool)
    some_pos = np.zeros(len(pairs), dtype=bool)
    witness_z = {}
    exact_z = True
    cand = np.flatnonzero(live)
    if len(cand):
        cert[cand] = True
        for state in STATES:
            zs = _z_space(game, i, sets, state, budget)
            if zs is None:
                cert[:] = False
                exact_z = False
                break
            rows, exact = zs
            exact_z &= exact
            pa_sig, pb_sig = game.signal_probs(i, state)
            H = game.payoff_from_pa(i, game.action_outcomes(i, rows), state)
            H, keep = _unique_rows(H)
            rows = rows[keep]
            ya, yb = game.strategy_indices(i, strategies)
            G = pa_sig * H[:, ya] + pb_sig * H[:, yb]
            for p in cand:
                if not cert[p]:
                    continue
                s, t = pairs[p]
                c = G[:, t] - G[:, s]
                if c.min() < -TOL:
                    cert[p] = False
                elif c.max() > TOL and p not in witness_z:
                    some_pos[p] = True
                    witness_z[p] = (state, rows[int(c.argmax())])
    for p, (s, t) in enumerate(pairs):
        if strategies[s] in out.dominated or not live[p]:
            continue
        if not cert[p]:
            if strategies[s] not in out.undecided:
                out.undecided.append(strategies[s])
            continue
        if hi[p] > TOL:
            prof = tuple(profiles[int(first[arg[p]])])
            out.dominated[strategies[s]] = DominanceWitness(
                i, strategies[s], strategies[t], prof, float(hi[p]))
        elif exact_z and some_pos[p]:
            prof = _realizing_profile(game, i, sets, *witness_z[p])
            _, uu = strategy_utilities(game, i, prof, [strategies[s], strategies[t]])
            out.dominated[strategies[s]] = DominanceWitness(
                i, strategies[s], strategies[t], prof, float(uu[1] - uu[0]))
        elif not some_pos[p]:
            continue  # pointwise equal: never strictly better
        elif strategies[s] not in out.undecided:
            out.undecided.append(strategies[s])
    out.undecided = [s for s in out.undecided if s not in out.dominated]
    out.exact = not out.undecided
    return out


def _realizing_profile(game: Game, i: int, sets, state: State, row) -> tuple:
    """Opponent profile putting positive probability on the realized row in ``state``."""
    prof: list = [None] * game.n
    for j in range(game.n):
        if j == i:
            continue
        codes, probs = _realizable(game, j, sets[j], state)
        col = codes.index(int(row[j]))
        k = int(np.argmax(probs[:, col]))
        prof[j] = sets[j][k]
    return tuple(prof)


def is_weakly_dominated(committee: Committee, mechanism: Mechanism, voter: int,
                        strategy: InterimStrategy, sets=None, budget: Budget = Budget()):
    """Witness if ``strategy`` is weakly dominated given opponents' ``sets``.

    Returns a :class:`DominanceWitness`, ``None`` when it is not dominated, or
    ``UNDECIDED`` when the budget does not allow an exact verdict.
    """
    game = Game(committee, mechanism)
    sets = [list(s) for s in (game.strategies if sets is None else sets)]
    if strategy not in sets[voter]:
        sets[voter] = sets[voter] + [strategy]
    res = analyze_voter(game, voter, sets, budget)
    if strategy in res.dominated:
        return res.dominated[strategy]
    if strategy in res.undecided:
        return UNDECIDED
    return None


# ---------------------------------------------------------------------------
# whole-profile enumeration


def outcome_tensor(game: Game, sets, state: State) -> np.ndarray:
    """P(A wins | state) for every profile of ``sets``; voter 0 varies slowest."""
    real = [_realizable(game, j, sets[j], state) for j in range(game.n)]
    rows = _rows(game, -1, list(range(game.n)), [codes for codes, _ in real])
    va = (resolve_terminals(rows) == VOTE_A_CODE).sum(axis=1)
    vb = (resolve_terminals(rows) == VOTE_B_CODE).sum(axis=1)
    if game.drop_mechanical:
        va, vb = va - 1, vb - 1
    t = p_a_from_counts(va, vb).reshape([len(codes) for codes, _ in real])
    for _, probs in real:
        t = np.tensordot(t, probs, axes=([0], [1]))
    return t.ravel()


def _product_size(sets) -> float:
    return float(np.prod([len(s) for s in sets], dtype=float))


def _check_size(game: Game, sets, budget: Budget) -> None:
    cells = max(np.prod([len(_realizable(game, j, sets[j], st)[0]) for j in range(game.n)],
                        dtype=float) for st in STATES)
    if _product_size(sets) > budget.search_profiles or cells > budget.z_cells:
        raise InstanceTooLarge(
            f"{_product_size(sets):.0f} profiles over {cells:.0f} realized action vectors "
            f"exceed the budget")


def profile_at(sets, flat: int) -> tuple:
    idx = np.unravel_index(flat, [len(s) for s in sets])
    return tuple(s[int(k)] for s, k in zip(sets, idx))


# ---------------------------------------------------------------------------
# iterated elimination


@dataclass(frozen=True)
class Elimination:
    round: int
    witness: DominanceWitness

    def as_record(self) -> dict:
        return {"round": self.round, **self.witness.as_record()}


@dataclass
class IEWDSReport:
    rounds: list  # list of lists of Elimination
    survivors: list  # per voter, list of strategies
    solvable: Optional[bool]  # None when undecided
    solution_metrics: Optional[EvalReport]
    undecided: list  # (round, voter, strategy) triples left in place for lack of budget

    @property
    def n_rounds(self) -> int:
        return len(self.rounds)

    @property
    def solution(self) -> Optional[tuple]:
        if self.solvable and all(len(s) == 1 for s in self.survivors):
            return tuple(s[0] for s in self.survivors)
        return None

    def as_record(self) -> dict:
        return {
            "rounds": [[e.as_record() for e in r] for r in self.rounds],
            "survivors": [[str(s) for s in ss] for ss in self.survivors],
            "solvable": self.solvable,
            "solution_metrics": None if self.solution_metrics is None
            else self.solution_metrics.as_record(),
            "undecided": [{"round": r, "voter": v + 1, "strategy": str(s)}
                          for r, v, s in self.undecided],
        }


def solvability(game: Game, sets, budget: Budget = Budget()):
    """(solvable, pA|a, pA|b) with solvable None when the product is too large.

    Solvable means every surviving profile induces the same outcome
    distribution in each state.
    """
    try:
        _check_size(game, sets, budget)
    except InstanceTooLarge:
        return None, None, None
    pa = [outcome_tensor(game, sets, st) for st in STATES]
    same = all(np.ptp(p) <= 1e-12 for p in pa)
    return same, float(pa[0][0]), float(pa[1][0])


def iewds(committee: Committee, mechanism: Mechanism, max_rounds: Optional[int] = None,
          simultaneous: bool = True, budget: Budget = Budget(), seed: int = 0,
          initial_sets=None, game: Optional[Game] = None) -> IEWDSReport:
    """Iterated elimination of weakly dominated interim strategies.

    With ``simultaneous`` every dominated strategy of every voter is removed in
    each round.  Otherwise each round visits voters in an order drawn from
    ``seed`` and removes a random nonempty subset of the dominated strategies
    of the first voter that has any, so different seeds give different
    elimination orders.  Passing a ``game`` reuses its memoized analyses.
    """
    game = Game(committee, mechanism) if game is None else game
    sets = [list(s) for s in (game.strategies if initial_sets is None else initial_sets)]
    rng = np.random.default_rng(seed)
    rounds: list = []
    undecided: list = []
    if max_rounds is None:
        # every round removes at least one strategy
        max_rounds = sum(len(x) for x in sets)
    for r in range(1, max_rounds + 1):
        if simultaneous:
            analyses = [analyze_voter(game, i, sets, budget) for i in range(game.n)]
            chosen = [(a, s) for a in analyses for s in a.strategies if s in a.dominated]
        else:
            analyses, chosen = [], []
            for i in rng.permutation(game.n):
                a = analyze_voter(game, int(i), sets, budget)
                analyses.append(a)
                dom = [s for s in a.strategies if s in a.dominated]
                if dom:
                    k = int(rng.integers(1, len(dom) + 1))
                    picks = sorted(rng.choice(len(dom), size=k, replace=False))
                    chosen = [(a, dom[j]) for j in picks]
                    break
        if not chosen:
            undecided = [(r, a.voter, s) for a in sorted(analyses, key=lambda a: a.voter)
                         for s in a.undecided]
            break
        rounds.append([Elimination(r, a.dominated[s]) for a, s in chosen])
        for a, s in chosen:
            sets[a.voter].remove(s)
    solvable, pa_a, pa_b = solvability(game, sets, budget)
    metrics = report_from_state_probs(committee, pa_a, pa_b) if solvable else None
    return IEWDSReport(rounds, sets, solvable, metrics, undecided)


def iewds_orders(committee: Committee, mechanism: Mechanism, orders: int = 20,
                 seed: int = 0, budget: Budget = Budget()) -> list[IEWDSReport]:
    """Sequential elimination under ``orders`` random orders sharing one game cache."""
    game = Game(committee, mechanism)
    return [iewds(committee, mechanism, simultaneous=False, budget=budget, seed=seed + k,
                  game=game) for k in range(orders)]


# ---------------------------------------------------------------------------
# best equilibrium among independents


@dataclass(frozen=True)
class SearchResult:
    profile: tuple
    report: EvalReport
    is_equilibrium: bool
    deviation: Optional[Deviation]
    searched: int


def undominated_sets(committee: Committee, mechanism: Mechanism,
                     budget: Budget = Budget()) -> list:
    """One round of elimination against the full strategy spaces.

    Strategies whose status is undecided are kept.
    """
    game = Game(committee, mechanism)
    sets = [list(s) for s in game.strategies]
    return [analyze_voter(game, i, sets, budget).survivors for i in range(game.n)]


def pinned_partisan(committee: Committee, mechanism: Mechanism, voter: int) -> InterimStrategy:
    """Dominant unresponsive strategy of a partisan under the mechanism."""
    pref = committee.voters[voter].preference
    side_a = pref is Preference.PartisanA
    if mechanism.kind == "rd" and voter not in mechanism.representatives:
        return unresponsive(delegate(A_STAR if side_a else B_STAR))
    from .model import VOTE_A, VOTE_B
    return unresponsive(VOTE_A if side_a else VOTE_B)


def best_equilibrium_search(committee: Committee, mechanism: Mechanism,
                            restriction: str = "independents", budget: Budget = Budget(),
                            sets=None) -> SearchResult:
    """Highest ``p_correct`` profile over independents' undominated strategies.

    Partisans are pinned to their dominant strategy.  Ties are broken toward
    the lexicographically smallest profile in canonical strategy order.
    """
    if restriction not in ("independents", "all"):
        raise ValueError(f"unknown restriction {restriction!r}")
    game = Game(committee, mechanism)
    if sets is None:
        sets = undominated_sets(committee, mechanism, budget)
        if restriction == "independents":
            sets = [s if committee.voters[i].is_independent
                    else [pinned_partisan(committee, mechanism, i)] for i, s in enumerate(sets)]
    _check_size(game, sets, budget)
    pa_a = outcome_tensor(game, sets, State.a)
    pa_b = outcome_tensor(game, sets, State.b)
    pi = committee.prior
    pc = pi * pa_a + (1 - pi) * (1 - pa_b)
    k = int(np.flatnonzero(pc >= pc.max() - 1e-12)[0])
    prof = profile_at(sets, k)
    rep = report_from_state_probs(committee, float(pa_a[k]), float(pa_b[k]))
    ok, dev = is_equilibrium(committee, mechanism, prof)
    return SearchResult(prof, rep, ok, dev, len(pc))
