import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liquidvote.engine import (InstanceTooLarge, ResolvedBallots, brute_force_evaluate,
                               evaluate_profile, majoritarian_alternative, resolve, tally)
from liquidvote.model import (A_STAR, ABSTAIN, ALWAYS_ABSTAIN, B_STAR, SINCERE, VOTE_A, VOTE_B,
                              Alternative, Committee, InterimStrategy, Mechanism, State,
                              ValidationError, always, always_delegate, delegate, independent,
                              partisan)


def walk_oracle(actions):
    """Follow each vote hop by hop; a vote that revisits a voter abstains."""
    va = vb = x = 0
    for i in range(len(actions)):
        seen, j = set(), i
        while actions[j].is_delegation and j not in seen:
            seen.add(j)
            j = actions[j].target
        if actions[j].is_delegation:
            x += 1
        elif actions[j] == VOTE_A:
            va += 1
        elif actions[j] == VOTE_B:
            vb += 1
        else:
            x += 1
    return ResolvedBallots(va, vb, x)


def test_single_hop():
    assert resolve([delegate(1), VOTE_A, VOTE_B], Mechanism.ld()) == ResolvedBallots(2, 1, 0)


def test_two_cycle_abstains():
    assert resolve([delegate(1), delegate(0)], Mechanism.ld()).abstained == 2


def test_chain_into_cycle_abstains():
    acts = [delegate(1), delegate(2), delegate(1)]
    assert resolve(acts, Mechanism.ld()) == ResolvedBallots(0, 0, 3)
    assert walk_oracle(acts) == ResolvedBallots(0, 0, 3)


def test_self_delegation_is_an_error():
    with pytest.raises(ValidationError):
        resolve([delegate(0), VOTE_A], Mechanism.ld())


@given(st.lists(st.integers(min_value=-3, max_value=5), min_size=1, max_size=6))
def test_resolve_matches_walk_oracle_and_conserves(raw):
    n = len(raw)
    acts = []
    for i, k in enumerate(raw):
        if k == -3:
            acts.append(VOTE_A)
        elif k == -2:
            acts.append(VOTE_B)
        elif k == -1 or k % n == i:
            acts.append(ABSTAIN)
        else:
            acts.append(delegate(k % n))
    res = resolve(acts, Mechanism.ld())
    assert res == walk_oracle(acts)
    assert res.total == n


def test_rd_mechanical_ballots_cancel():
    c = Committee((independent(0.6),) * 3)
    acts = [delegate(A_STAR), delegate(B_STAR), VOTE_A]
    res = resolve(acts, Mechanism.rd([2]))
    assert (res.votes_for_A, res.votes_for_B, res.total) == (3, 2, 5)
    silent = resolve(acts, Mechanism.rd([2], mechanical_partisans_vote=False))
    assert (silent.votes_for_A, silent.votes_for_B) == (2, 1)
    assert tally(res) == tally(silent)
    assert c.n == 3


@pytest.mark.parametrize("ballots,p_a", [((2, 1, 0), 1.0), ((1, 1, 1), 0.5), ((0, 0, 3), 0.5),
                                         ((0, 1, 0), 0.0)])
def test_tally(ballots, p_a):
    out = tally(ResolvedBallots(*ballots))
    assert out.p_A == p_a
    assert out.p_A + out.p_B == 1.0


def test_three_sincere_binomial():
    c = Committee((independent(0.6),) * 3)
    q = 0.6
    rep = evaluate_profile(c, Mechanism.dd(), (SINCERE,) * 3)
    assert rep.p_correct == pytest.approx(q ** 3 + 3 * q * q * (1 - q), abs=1e-12)
    assert rep.p_correct == pytest.approx(0.648, abs=1e-12)


def test_two_sincere():
    c = Committee((independent(0.6),) * 2)
    rep = evaluate_profile(c, Mechanism.dd(), (SINCERE,) * 2)
    assert rep.p_correct == pytest.approx(0.36 + 2 * 0.24 * 0.5, abs=1e-12)
    assert rep.p_correct == pytest.approx(0.6, abs=1e-12)


def test_all_delegate_to_expert():
    c = Committee((independent(0.6),) * 8 + (independent(0.7),))
    prof = (always_delegate(8),) * 8 + (SINCERE,)
    assert evaluate_profile(c, Mechanism.ld(), prof).p_correct == pytest.approx(0.7, abs=1e-12)


def test_dictator_gets_own_precision():
    c = Committee((independent(0.6), independent(0.9), independent(0.55), independent(0.6)))
    prof = (always_delegate(1), SINCERE, always_delegate(0), always_delegate(1))
    assert evaluate_profile(c, Mechanism.ld(), prof).p_correct == pytest.approx(0.9, abs=1e-12)


def test_all_abstain_is_a_coin_flip():
    c = Committee((independent(0.6),) * 3)
    rep = evaluate_profile(c, Mechanism.dd(), (ALWAYS_ABSTAIN,) * 3)
    assert rep.p_correct == 0.5
    assert rep.voter_utilities == (0.5, 0.5, 0.5)


def test_partisan_utility_when_a_always_wins():
    c = Committee((partisan("A"), independent(0.6)))
    rep = evaluate_profile(c, Mechanism.dd(), (always("A"), always("A")))
    assert rep.voter_utilities[0] == 1.0
    assert rep.p_A_given_a == 1.0 and rep.p_A_given_b == 1.0


def test_responsive_cap():
    c = Committee((independent(0.6),) * 27)
    with pytest.raises(InstanceTooLarge):
        evaluate_profile(c, Mechanism.dd(), (SINCERE,) * 27)


@pytest.mark.parametrize("state,n_i,expected", [
    (State.b, 5, {Alternative.B}),
    (State.a, 5, {Alternative.A}),
])
def test_majoritarian_section5(state, n_i, expected):
    c = Committee((partisan("A"),) * 3 + (partisan("B"),) + (independent(0.6),) * n_i)
    assert majoritarian_alternative(c, state) == frozenset(expected)


def test_majoritarian_tie():
    c = Committee((partisan("A"), partisan("B")))
    for s in (State.a, State.b):
        assert majoritarian_alternative(c, s) == frozenset({Alternative.A, Alternative.B})


ACTIONS = [VOTE_A, VOTE_B, ABSTAIN]


@st.composite
def small_instances(draw):
    n = draw(st.integers(min_value=1, max_value=4))
    prefs = draw(st.lists(st.sampled_from(["I", "I", "A", "B"]), min_size=n, max_size=n))
    voters = tuple(independent(draw(st.sampled_from([0.5, 0.55, 0.6, 0.7, 0.9, 1.0])))
                   if p == "I" else partisan(p) for p in prefs)
    prior = draw(st.sampled_from([0.5, 0.3, 0.8]))
    c = Committee(voters, prior)
    kind = draw(st.sampled_from(["dd", "ld", "rd"]))
    if kind == "rd":
        reps = draw(st.sets(st.integers(0, n - 1)))
        mech = Mechanism.rd(reps)
    else:
        mech = Mechanism(kind)
    prof = []
    for i in range(n):
        acts = mech.legal_actions(c, i)
        prof.append(InterimStrategy(draw(st.sampled_from(acts)), draw(st.sampled_from(acts))))
    return c, mech, tuple(prof)


@settings(max_examples=300, deadline=None)
@given(small_instances())
def test_matches_brute_force(instance):
    c, mech, prof = instance
    fast = evaluate_profile(c, mech, prof)
    slow = brute_force_evaluate(c, mech, prof)
    assert fast.p_correct_given_a == pytest.approx(slow.p_correct_given_a, abs=1e-12)
    assert fast.p_correct_given_b == pytest.approx(slow.p_correct_given_b, abs=1e-12)
    pi = c.prior
    total = pi * fast.p_correct_given_a + (1 - pi) * fast.p_correct_given_b
    assert fast.p_correct == pytest.approx(total, abs=1e-12)


def test_every_ld_action_vector_conserves_votes():
    n = 4
    c = Committee((independent(0.6),) * n)
    mech = Mechanism.ld()
    for acts in itertools.product(*[mech.legal_actions(c, i) for i in range(n)]):
        assert resolve(list(acts), mech).total == n
