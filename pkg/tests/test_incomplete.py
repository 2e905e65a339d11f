import itertools

import numpy as np
import pytest

from liquidvote.comparison import threshold_menus
from liquidvote.engine import evaluate_profile
from liquidvote.incomplete import (AgentForm, ThresholdStrategy, TypeDistribution,
                                   UniformSegment, VoterDistribution, VoterPlan,
                                   auxiliary_transform, best_response_cutoffs,
                                   best_threshold_search, campbell_closed_form, campbell_gap,
                                   campbell_instance, campbell_profile, exante_utility,
                                   exante_utility_quadrature, interim_linearity_check,
                                   solve_campbell_cutoff, three_player_partisan_example)
from liquidvote.model import (ABSTAIN, SINCERE, VOTE_A, VOTE_B, Committee, Mechanism,
                              ValidationError, always, always_delegate, delegate, independent,
                              partisan)

I = independent
LD = Mechanism.ld()


# --- distributions and ex-ante evaluation -----------------------------------


def test_mass_must_sum_to_one():
    with pytest.raises(ValidationError):
        VoterDistribution(((I(0.6), 0.5),))
    with pytest.raises(ValidationError):
        UniformSegment(0.4, 0.7, 1.0)


def test_segment_needs_threshold():
    dist = campbell_instance()
    plans = (VoterPlan((SINCERE,)), VoterPlan(()), VoterPlan(()))
    with pytest.raises(ValidationError):
        exante_utility(dist, LD, plans)


def test_all_atoms_is_a_mixture():
    d0 = VoterDistribution(((I(0.6), 0.25), (I(0.9), 0.75)))
    dist = TypeDistribution((d0, VoterDistribution.point(I(0.7)),
                             VoterDistribution.point(I(0.55))))
    sigma = (VoterPlan((SINCERE, SINCERE)), VoterPlan((always_delegate(0),)),
             VoterPlan((SINCERE,)))
    got = exante_utility(dist, LD, sigma).p_correct
    want = 0.0
    for q, p in ((0.6, 0.25), (0.9, 0.75)):
        c = Committee((I(q), I(0.7), I(0.55)))
        want += p * evaluate_profile(c, LD, (SINCERE, always_delegate(0), SINCERE)).p_correct
    assert got == pytest.approx(want, abs=1e-12)


def test_never_delegating_equals_sincere_majority():
    dist = campbell_instance()
    rep = exante_utility(dist, LD, campbell_profile(dist, 0.5))
    r, mu = 0.7, 0.6
    want = r * (mu ** 2 + 2 * mu * (1 - mu)) + (1 - r) * mu ** 2
    assert rep.p_correct == pytest.approx(want, abs=1e-12)
    assert rep.p_correct == pytest.approx(0.696, abs=1e-12)


@pytest.mark.parametrize("c", [0.5, 0.55, 0.5718773, 0.62, 0.7])
def test_quadrature_matches_exact(c):
    dist = campbell_instance()
    prof = campbell_profile(dist, c)
    exact = exante_utility(dist, LD, prof).p_correct
    assert exante_utility_quadrature(dist, LD, prof) == pytest.approx(exact, abs=1e-9)
    assert campbell_closed_form(c) == pytest.approx(exact, abs=1e-12)


# --- the cutoff instance ------------------------------------------------------


def test_cutoff_cutoff():
    sol = solve_campbell_cutoff(0.7, 0.5, 0.7)
    assert not sol.boundary
    assert sol.cutoff == pytest.approx(0.572, abs=1e-3)
    assert sol.cutoff == pytest.approx(0.5718773, abs=1e-6)


def test_cutoff_cutoff_is_stationary():
    dist = campbell_instance()
    c = solve_campbell_cutoff(0.7, 0.5, 0.7).cutoff
    u = exante_utility(dist, LD, campbell_profile(dist, c)).p_correct
    assert u == pytest.approx(0.711715, abs=1e-6)
    for dc in (-1e-3, 1e-3):
        assert exante_utility(dist, LD, campbell_profile(dist, c + dc)).p_correct < u


def test_cutoff_degenerate_support():
    sol = solve_campbell_cutoff(0.7, 0.7, 0.7)
    assert sol.cutoff == 0.7 and sol.boundary


def _grid_root(r, lo, hi, top):
    grid = np.linspace(lo, top, 400_001)
    gap = r * (1 - grid) * (1 - (grid + hi) / 2) - (1 - r) * grid * (grid + hi) / 2
    change = np.flatnonzero(np.diff(np.sign(gap)))
    return None if len(change) == 0 else float(grid[change[0]])


def test_cutoff_strong_expert_against_grid_scan():
    # the indifference root lies above the support, so every nonexpert delegates
    root = _grid_root(0.9, 0.5, 0.7, 0.9)
    assert 0.7 < root < 0.8
    assert _grid_root(0.9, 0.5, 0.7, 0.7) is None
    sol = solve_campbell_cutoff(0.9, 0.5, 0.7)
    assert sol.boundary and sol.cutoff == 0.7
    assert campbell_gap(0.7, 0.9, 0.7) > 0


@pytest.mark.parametrize("r", [0.7, 0.75, 0.8])
def test_interior_cutoffs_against_grid_scan(r):
    sol = solve_campbell_cutoff(r, 0.5, 0.7)
    assert not sol.boundary
    assert sol.cutoff == pytest.approx(_grid_root(r, 0.5, 0.7, 0.7), abs=2e-6)
    assert abs(campbell_gap(sol.cutoff, r, 0.7)) < 1e-8


def test_cutoff_bad_support():
    with pytest.raises(ValidationError):
        solve_campbell_cutoff(0.6, 0.5, 0.7)


# --- interim linearity and cutoffs --------------------------------------------


def test_never_pivotal_slope_zero():
    dist = TypeDistribution.from_committee(Committee((partisan("A"),) * 3 + (I(0.7),)))
    sigma = tuple(VoterPlan((always("A"),)) for _ in range(3)) + (VoterPlan((SINCERE,)),)
    lines = [interim_linearity_check(dist, LD, sigma, 3, y)
             for y in (VOTE_A, VOTE_B, ABSTAIN, delegate(0))]
    # A wins in both states whatever the voter does: the lines coincide, so
    # every pairwise slope difference is zero
    for line in lines:
        assert (line.slope, line.intercept) == pytest.approx((1.0, 0.0), abs=1e-12)


def test_equal_win_probabilities_give_identical_lines():
    dist = TypeDistribution.from_committee(Committee((I(0.6), I(0.7), I(0.8))))
    sigma = (VoterPlan((always_delegate(2),)), VoterPlan((SINCERE,)), VoterPlan((SINCERE,)))
    l1 = interim_linearity_check(dist, LD, sigma, 1, ABSTAIN)
    l2 = interim_linearity_check(dist, LD, sigma, 1, delegate(0))
    assert (l1.slope, l1.intercept) == pytest.approx((l2.slope, l2.intercept), abs=1e-12)


def test_linearity_matches_direct_evaluation():
    dist = campbell_instance()
    sigma = campbell_profile(dist, 0.6)
    for y in (VOTE_A, delegate(0)):
        line = interim_linearity_check(dist, LD, sigma, 1, y)
        for q in (0.5, 0.62, 0.7):
            point = TypeDistribution((dist.voters[0], VoterDistribution.point(I(q)),
                                      dist.voters[2]))
            plans = (sigma[0], VoterPlan((always_delegate(0) if y == delegate(0) else
                                          always("A"),)), sigma[2])
            rep = exante_utility(point, LD, plans)
            assert line(q) == pytest.approx(q * rep.p_A_given_a + (1 - q) * (1 - rep.p_A_given_b),
                                            abs=1e-12)


def test_line_intersection_reproduces_cutoff():
    dist = campbell_instance()
    c = solve_campbell_cutoff(0.7, 0.5, 0.7).cutoff
    sigma = campbell_profile(dist, c)
    keep = interim_linearity_check(dist, LD, sigma, 1, VOTE_A)
    dele = interim_linearity_check(dist, LD, sigma, 1, delegate(0))
    q_star = (dele.intercept - keep.intercept) / (keep.slope - dele.slope)
    assert q_star == pytest.approx(c, abs=1e-6)


def test_envelope_matches_pointwise_argmax():
    dist = campbell_instance()
    sigma = campbell_profile(dist, 0.6)
    actions = [VOTE_A, VOTE_B, ABSTAIN, delegate(0), delegate(2)]
    lines = {y: interim_linearity_check(dist, LD, sigma, 1, y) for y in actions}
    cuts, maxi = best_response_cutoffs(lines, 0.5, 1.0)
    assert len(cuts) == len(maxi) - 1
    edges = [0.5] + cuts + [1.0]
    for q in np.linspace(0.5, 1.0, 1000):
        vals = {y: lines[y](q) for y in actions}
        best = max(vals.values())
        k = min(int(np.searchsorted(edges, q, side="right")) - 1, len(maxi) - 1)
        near_cut = any(abs(q - c) < 1e-9 for c in cuts)
        if not near_cut:
            assert {y for y, v in vals.items() if v >= best - 1e-12} == set(maxi[k])


# --- three-player example ------------------------------------------------------


@pytest.mark.parametrize("x", [0.0, 0.1, 0.25, 0.4])
def test_three_player(x):
    res = three_player_partisan_example(x)
    assert res.delegation_eq > res.no_delegation
    assert res.fie_certificate
    assert res.residual_no_delegation == pytest.approx(0.5, abs=1e-12)
    assert res.residual_delegation == pytest.approx(0.5, abs=1e-12)


def test_three_player_hand_values():
    res = three_player_partisan_example(0.0)
    # with x = 0 both others are informed or uninformed with probability one half
    assert res.no_delegation == pytest.approx(0.75, abs=1e-12)
    assert res.delegation_eq == pytest.approx(0.875, abs=1e-12)


def test_three_player_rejects_bad_x():
    with pytest.raises(ValidationError):
        three_player_partisan_example(0.5)


# --- auxiliary game -----------------------------------------------------------


def test_auxiliary_identity_without_partisans():
    dist = TypeDistribution.from_committee(Committee((I(0.6), I(0.7), I(0.8))))
    aux = auxiliary_transform(dist, LD)
    assert not aux.pinned
    c = Committee((I(0.6), I(0.7), I(0.8)))
    for i in range(3):
        assert aux.action_sets(i, 0) == LD.strategies(c, i)


def test_auxiliary_pins_partisans():
    d0 = VoterDistribution(((partisan("A"), 0.5), (partisan("B"), 0.5)))
    dist = TypeDistribution((d0, VoterDistribution.point(I(0.7))))
    aux = auxiliary_transform(dist, LD)
    assert aux.pinned == {(0, 0): always("A"), (0, 1): always("B")}
    assert aux.embed({(1, 0): SINCERE})[(0, 1)] == always("B")
    rd = auxiliary_transform(dist, Mechanism.rd([1]))
    assert rd.pinned[(0, 0)].on_a.target == "a*"


def _undominated_equilibria(form):
    mask = form.equilibria()
    for n, keep in enumerate(form.undominated()):
        shape = [1] * len(form.agents)
        shape[n] = len(keep)
        mask &= keep.reshape(shape)
    return {tuple(sorted((a, str(s)) for a, s in form.profile(f).items()))
            for f in np.flatnonzero(mask)}


@pytest.mark.parametrize("mech", [Mechanism.dd(), Mechanism.ld()])
@pytest.mark.parametrize("voters", [
    (VoterDistribution(((partisan("A"), 0.3), (I(0.7), 0.7))), VoterDistribution.point(I(0.6)),
     VoterDistribution.point(I(0.8))),
    (VoterDistribution(((partisan("A"), 0.5), (partisan("B"), 0.5))),
     VoterDistribution(((I(0.9), 0.6), (partisan("B"), 0.4)))),
])
def test_auxiliary_bijection(mech, voters):
    dist = TypeDistribution(voters)
    c = Committee(tuple(d.atoms[0][0] for d in dist.voters))
    full = {(i, k): mech.strategies(c, i) for i, d in enumerate(voters) for k in range(len(d.atoms))}
    original = AgentForm(dist, mech, full)
    aux = auxiliary_transform(dist, mech)
    restricted = AgentForm(dist, mech, {a: aux.action_sets(*a) for a in full}, common_payoff=True)
    e1 = _undominated_equilibria(original)
    e2 = _undominated_equilibria(restricted)
    assert e1 and e1 == e2


# --- threshold search -----------------------------------------------------------


def test_threshold_candidates_include_cutoff_profile():
    dist = campbell_instance()
    atoms, thresholds = threshold_menus(dist, LD, step=0.05)
    assert ThresholdStrategy.cutoff(0.55, always_delegate(0), SINCERE) in thresholds[1]
    assert atoms[(0, 0)][0] == SINCERE


@pytest.mark.parametrize("dist", [campbell_instance(),
                                  TypeDistribution.from_committee(Committee((I(0.7), I(0.6),
                                                                             I(0.6))))])
def test_delegation_weakly_improves_best_threshold_profile(dist):
    best = {}
    for mech in (Mechanism.dd(), LD):
        atoms, thresholds = threshold_menus(dist, mech, step=0.05)
        best[mech.kind] = best_threshold_search(dist, mech, atoms, thresholds)
    assert best["ld"].report.p_correct >= best["dd"].report.p_correct - 1e-12
    assert best["dd"].report.p_correct >= 0.5
    # the DD optimum re-embedded in LD is a feasible LD profile with the same value
    again = exante_utility(dist, LD, best["dd"].sigma)
    assert again.p_correct == pytest.approx(best["dd"].report.p_correct, abs=1e-12)
