import itertools

import numpy as np
import pytest

from liquidvote.engine import evaluate_profile
from liquidvote.equilibrium import (UNDECIDED, Budget, Game, analyze_voter, best_equilibrium_search,
                                    best_responses, interim_utility, is_equilibrium,
                                    is_weakly_dominated, iewds, iewds_orders, pinned_partisan,
                                    undominated_sets)
from liquidvote.model import (ABSTAIN, ALWAYS_ABSTAIN, SINCERE, VOTE_A, VOTE_B, Committee,
                              InterimStrategy, Mechanism, always, always_delegate, delegate,
                              independent, partisan)
from liquidvote.neutral import profile_from_vx, prop3_predict
from liquidvote.scenario import build_profile, load_scenario

I = independent


def example1():
    return Committee((I(0.6),) * 8 + (I(0.7),))


def is_sign_flipped(s):
    return ((s.on_a == VOTE_B and s.on_b != VOTE_B)
            or (s.on_b == VOTE_A and s.on_a != VOTE_A))


# --- utilities and best responses -----------------------------------------


def test_interim_utility_pass_through():
    c = Committee((I(0.6),) * 3)
    assert interim_utility(c, Mechanism.dd(), (SINCERE,) * 3, 1) == pytest.approx(0.648,
                                                                                abs=1e-12)
    assert interim_utility(c, Mechanism.dd(), (ALWAYS_ABSTAIN,) * 3, 0) == 0.5


def test_partisan_utility_one():
    c = Committee((partisan("A"), I(0.6), I(0.6)))
    assert interim_utility(c, Mechanism.dd(), (always("A"),) * 3, 0) == 1.0


def test_nonexpert_keeps_vote_when_expert_is_full():
    c = example1()
    prof = profile_from_vx(c, prop3_predict(c).V)
    i = next(k for k, s in enumerate(prof) if s == SINCERE and k != 8)
    br = best_responses(c, Mechanism.ld(), prof, i)
    assert SINCERE in br
    assert always_delegate(8) not in br


def test_never_pivotal_voter_is_indifferent():
    c = Committee((partisan("A"),) * 3 + (I(0.7),))
    prof = (always("A"),) * 3 + (SINCERE,)
    br = best_responses(c, Mechanism.ld(), prof, 3)
    assert br == set(Mechanism.ld().strategies(c, 3))


def test_perfect_voter_facing_a_split():
    c = Committee((partisan("A"), partisan("B"), I(1.0)))
    prof = (always("A"), always("B"), SINCERE)
    assert best_responses(c, Mechanism.dd(), prof, 2) == {SINCERE}
    # under LD, lending the vote to the like-minded partisan is outcome-equivalent
    br = best_responses(c, Mechanism.ld(), prof, 2)
    assert len(br) == 4
    for s in br:
        assert s.on_a in (VOTE_A, delegate(0)) and s.on_b in (VOTE_B, delegate(1))


# --- equilibrium checks ----------------------------------------------------


def test_overdelegation_is_equilibrium():
    s = load_scenario("single-expert")
    mech, prof = build_profile(s, "overdelegation")
    ok, dev = is_equilibrium(s.committee, mech, prof)
    assert ok and dev is None


def test_unresponsive_a_is_equilibrium():
    c = example1()
    assert is_equilibrium(c, Mechanism.ld(), (always("A"),) * 9)[0]


def test_single_expert_minus_a_delegator_is_not_equilibrium():
    c = example1()
    ok, dev = is_equilibrium(c, Mechanism.ld(), (SINCERE,) * 9)
    assert not ok
    assert dev.voter != 8
    assert dev.strategy == always_delegate(8)
    assert dev.gain > 0


def test_single_expert_profile_is_equilibrium():
    c = example1()
    assert is_equilibrium(c, Mechanism.ld(), profile_from_vx(c, prop3_predict(c).V))[0]


def test_never_pivotal_undominated_profiles_are_equilibria():
    c = Committee((partisan("A"),) * 3 + (I(0.7),))
    for mech in (Mechanism.dd(), Mechanism.ld()):
        sets = undominated_sets(c, mech)
        sets = [s if c.voters[i].is_independent else [pinned_partisan(c, mech, i)]
                for i, s in enumerate(sets)]
        for prof in itertools.product(*sets):
            assert is_equilibrium(c, mech, prof)[0]


# --- dominance -------------------------------------------------------------


def test_flipped_strategy_is_dominated():
    c = Committee((I(0.6), I(0.7), I(0.8)))
    w = is_weakly_dominated(c, Mechanism.ld(), 0, InterimStrategy(VOTE_B, VOTE_A))
    assert w is not None and w is not UNDECIDED
    assert w.dominated == InterimStrategy(VOTE_B, VOTE_A)


def test_never_pivotal_nothing_dominated():
    c = Committee((partisan("A"),) * 3 + (I(0.7),))
    mech = Mechanism.ld()
    g = Game(c, mech)
    sets = [[pinned_partisan(c, mech, i)] for i in range(3)] + [g.strategies[3]]
    a = analyze_voter(g, 3, sets)
    assert not a.dominated and not a.undecided


def test_partisan_keeps_only_own_vote_under_dd():
    c = Committee((partisan("A"), I(0.6), I(0.7)))
    g = Game(c, Mechanism.dd())
    a = analyze_voter(g, 0, g.strategies)
    assert a.survivors == [always("A")]


@pytest.mark.parametrize("name", ["trio", "partisan-trio", "small-ds"])
def test_sign_flipped_strategies_dominated(name):
    s = load_scenario(name)
    c = s.committee
    for mech in s.mechanisms:
        g = Game(c, mech)
        for i in c.independents():
            if mech.kind == "rd" and i not in mech.representatives:
                continue
            a = analyze_voter(g, i, g.strategies)
            for st in a.strategies:
                if is_sign_flipped(st):
                    assert st in a.dominated, (mech, i, st)


def test_dominance_witnesses_are_sound():
    c = Committee((I(0.6), I(0.7), I(0.8)))
    mech = Mechanism.ld()
    g = Game(c, mech)
    rng = np.random.default_rng(11)
    checked = 0
    for i in range(c.n):
        a = analyze_voter(g, i, g.strategies)
        for w in list(a.dominated.values())[:6]:
            strict = list(w.strict_at)
            strict[i] = w.dominator
            hi = interim_utility(c, mech, strict, i)
            strict[i] = w.dominated
            assert hi > interim_utility(c, mech, strict, i) + 1e-12
            others = [g.strategies[j] for j in range(c.n)]
            for _ in range(1000):
                prof = [s[rng.integers(len(s))] for s in others]
                prof[i] = w.dominator
                u_dom = evaluate_profile(c, mech, prof).voter_utilities[i]
                prof[i] = w.dominated
                assert u_dom >= evaluate_profile(c, mech, prof).voter_utilities[i] - 1e-12
            checked += 1
    assert checked == 18


# --- IEWDS -----------------------------------------------------------------


@pytest.mark.parametrize("mech", [Mechanism.dd(), Mechanism.ld(), Mechanism.rd([0])])
def test_single_voter_solvable(mech):
    c = Committee((I(0.7),))
    r = iewds(c, mech)
    assert r.solvable and r.n_rounds == 1
    assert r.solution_metrics.p_correct == pytest.approx(0.7, abs=1e-12)
    if mech.kind != "rd":
        assert r.solution == (SINCERE,)


def test_small_ds_solvable_with_delegation():
    s = load_scenario("small-ds")
    ld = iewds(s.committee, s.mechanism("ld"))
    assert ld.solvable and ld.n_rounds <= 2
    assert ld.solution_metrics.p_correct == 1.0
    dd = iewds(s.committee, s.mechanism("dd"))
    assert dd.solvable is False
    rd = iewds(s.committee, s.rd_mechanisms()[0])
    assert rd.solvable and rd.solution_metrics.p_correct == 1.0


@pytest.mark.parametrize("voters,value", [
    ((partisan("A"), I(0.95), I(0.6), I(0.6), I(0.6)), 0.95),
    ((I(0.9), I(0.6), I(0.6)), 0.9),
    ((partisan("B"), I(0.9), I(0.6), I(0.6), I(0.55)), 0.9),
])
def test_generalized_expert_solvable(voters, value):
    r = iewds(Committee(voters), Mechanism.ld())
    assert r.solvable
    assert r.solution_metrics.p_correct == pytest.approx(value, abs=1e-12)


def test_sequential_orders_agree_on_trio():
    s = load_scenario("trio")
    for mech in (s.mechanism("ld"), s.mechanism("dd")):
        base = iewds(s.committee, mech)
        ref = (base.solvable, base.solution_metrics.p_correct if base.solvable else None)
        for r in iewds_orders(s.committee, mech, orders=5):
            got = (r.solvable, r.solution_metrics.p_correct if r.solvable else None)
            assert got[0] == ref[0]
            if ref[0]:
                assert got[1] == pytest.approx(ref[1], abs=1e-12)


def test_budget_exhaustion_is_reported():
    c = Committee((I(0.6), I(0.7), I(0.8)))
    tiny = Budget(exhaustive_profiles=1, z_cells=1, unresponsive_profiles=1, random_profiles=1,
                  backgrounds=1, search_profiles=1)
    r = iewds(c, Mechanism.ld(), budget=tiny)
    assert r.solvable is None or r.undecided


# --- best equilibrium search ----------------------------------------------


def test_one_independent_between_partisans():
    c = Committee((partisan("A"), partisan("B"), I(0.7)))
    for mech in (Mechanism.dd(), Mechanism.ld()):
        res = best_equilibrium_search(c, mech)
        assert res.report.p_correct == pytest.approx(0.7, abs=1e-12)
        assert res.profile[2] == SINCERE or mech.kind == "ld"
        assert res.is_equilibrium


@pytest.mark.parametrize("name", ["trio", "partisan-trio", "small-ds", "never-pivotal"])
def test_delegation_never_hurts_at_the_optimum(name):
    s = load_scenario(name)
    vals = {str(m): best_equilibrium_search(s.committee, m).report.p_correct for m in s.mechanisms}
    ld = vals.pop("ld")
    assert vals["dd"] >= 0.5 - 1e-12
    for v in vals.values():
        assert ld >= v - 1e-12


def test_full_representation_matches_direct_democracy():
    s = load_scenario("trio")
    dd = best_equilibrium_search(s.committee, Mechanism.dd()).report.p_correct
    rd = best_equilibrium_search(s.committee, Mechanism.rd([0, 1, 2])).report.p_correct
    assert rd == pytest.approx(dd, abs=1e-12)


def test_non_neutral_profile():
    s = load_scenario("non-neutral")
    mech, prof = build_profile(s, "non-neutral")
    rep = evaluate_profile(s.committee, mech, prof)
    assert rep.p_correct == pytest.approx(0.80272, abs=5e-6)
    assert is_equilibrium(s.committee, mech, prof)[0]
