import itertools

import pytest

from liquidvote.dominance import (all_abstain_expected_class, check_prop5, default_rd_sets,
                                  outcome_class, prop6_equilibria, run_prop5_suite,
                                  wrong_in_some_state)
from liquidvote.engine import report_from_state_probs
from liquidvote.equilibrium import is_equilibrium
from liquidvote.model import Committee, Mechanism, ValidationError, independent, partisan
from liquidvote.scenario import load_scenario

I = independent


def section5():
    return load_scenario("mixed-committee").committee


def test_dominance_conditions_mixed_committee():
    cond = check_prop5(section5())
    assert cond.all_ok
    assert (cond.n_U, cond.n_e, cond.surplus, cond.max_bloc, cond.N) == (4, 1, 2, 4, 9)


def test_dominance_conditions_without_expert():
    c = Committee((partisan("A"),) + (I(0.6),) * 4)
    assert not check_prop5(c).n_e_ok


def test_dominance_conditions_pivotality_fails():
    c = Committee((partisan("A"),) * 4 + (I(1.0),))
    assert not check_prop5(c).pivotality_ok


def test_default_rd_set_section5():
    assert default_rd_sets(section5()) == [frozenset({0, 3, 4})]


def test_suite_on_small_instance():
    s = load_scenario("small-ds")
    suite = run_prop5_suite(s.committee, [r.representatives for r in s.rd_mechanisms()])
    assert suite.conditions.all_ok
    assert suite.ld.solvable and suite.ld.n_rounds <= 2
    assert suite.ld.solution_metrics.p_correct == 1.0
    assert suite.dd.solvable is False
    for J, rep in suite.rd:
        assert rep.solvable and rep.solution_metrics.p_correct == 1.0
    rec = suite.as_record()
    assert rec["rd"][0]["J"] == [1, 2]


def test_no_delegation_witnesses_mixed_committee():
    c = section5()
    res = prop6_equilibria(c)
    assert res.efficient_asymmetric
    for p in res.efficient_asymmetric:
        assert p.is_equilibrium and p.efficiency == "efficient"
    eq = res.all_abstain_equilibrium
    assert eq is not None and eq.is_equilibrium
    assert wrong_in_some_state(eq.report)
    classes = {p.label.split(" ")[0]: p for p in res.unresponsive}
    assert classes["all-unresponsive-A"].efficiency == "constant-A"
    assert classes["all-unresponsive-B"].efficiency == "constant-B"
    assert all(p.is_equilibrium for p in res.unresponsive)
    assert res.multiple_efficient


def test_no_delegation_permutation_closure():
    c = section5()
    res = prop6_equilibria(c)
    nonexperts = [i for i, v in enumerate(c.voters) if v.is_independent and v.precision < 1]
    base = res.efficient_asymmetric[0].profile
    for perm in itertools.permutations(nonexperts):
        prof = list(base)
        for src, dst in zip(nonexperts, perm):
            prof[dst] = base[src]
        assert is_equilibrium(c, Mechanism.dd(), prof)[0]


def test_no_delegation_requires_its_conditions():
    with pytest.raises(ValidationError):
        prop6_equilibria(Committee((partisan("A"),) * 3 + (I(0.6),) * 2))


def test_all_abstain_classes():
    assert all_abstain_expected_class(section5()) == "inefficient"
    one_gap = Committee((partisan("A"), I(1.0), I(0.6), I(0.6)))
    assert all_abstain_expected_class(one_gap) == "tie-in-one-state"
    balanced = Committee((partisan("A"), partisan("B"), I(1.0), I(0.6)))
    assert all_abstain_expected_class(balanced) == "efficient"


@pytest.mark.parametrize("pa,pb,label", [(1.0, 0.0, "efficient"), (1.0, 1.0, "constant-A"),
                                         (0.0, 0.0, "constant-B"), (0.5, 1.0, "wrong-in-one-state"),
                                         (0.7, 0.3, "inefficient")])
def test_outcome_class(pa, pb, label):
    c = Committee((I(0.6),))
    assert outcome_class(report_from_state_probs(c, pa, pb)) == label
