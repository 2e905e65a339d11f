import json

import pytest

from liquidvote.engine import evaluate_profile
from liquidvote.incomplete import exante_utility
from liquidvote.model import (SINCERE, Committee, InterimStrategy, Mechanism, always_delegate,
                              classify_voters, delegate, independent)
from liquidvote.scenario import (MissingAsset, ScenarioError, build_profile, bundled_names,
                                 load_scenario, parse_action, parse_scenario, parse_strategy,
                                 serialize_scenario)

EXPECTED = {
    ("single-expert", "overdelegation"): 0.72,
    ("single-expert", "single-expert"): 0.758592,
    ("single-expert", "sincere"): 0.75665664,
    ("single-expert", "all-abstain"): 0.5,
    ("non-neutral", "non-neutral"): 0.80272,
    ("non-neutral", "best-neutral"): 0.8,
    ("four-experts", "weighted"): 0.821,
    ("mixed-committee", "ds-solution"): 1.0,
    ("mixed-committee", "all-abstain"): 0.5,
    ("trio", "sincere"): 0.788,
    ("trio", "follow-expert"): 0.8,
    ("partisan-trio", "pinned"): 0.7,
    ("small-ds", "delegate-to-expert"): 1.0,
}


def write(tmp_path, data, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def test_example1_loads():
    s = load_scenario("single-expert")
    k = classify_voters(s.committee)
    assert (k.n_I, k.n_A, k.n_B) == (9, 0, 0)
    assert s.committee.precision(8) == 0.7
    assert [str(m) for m in s.mechanisms] == ["ld", "dd", "rd{1,2,9}"]


def test_bundled_names():
    assert set(bundled_names()) >= {"single-expert", "mixed-committee", "campbell", "three-player"}


@pytest.mark.parametrize("key,value", sorted(EXPECTED.items()))
def test_bundled_profiles(key, value):
    s = load_scenario(key[0])
    mech, prof = build_profile(s, key[1])
    assert evaluate_profile(s.committee, mech, prof).p_correct == pytest.approx(value, abs=1e-12)


def test_threshold_profiles():
    s = load_scenario("campbell")
    mech, plans = build_profile(s, "cutoff")
    assert exante_utility(s.type_distribution, mech, plans).p_correct == pytest.approx(0.711715,
                                                                                       abs=1e-6)
    mech, plans = build_profile(s, "all-sincere")
    assert exante_utility(s.type_distribution, mech, plans).p_correct == pytest.approx(0.696,
                                                                                       abs=1e-12)
    t = load_scenario("three-player")
    for name, value in (("no-delegation", 0.70), ("delegation", 0.78)):
        mech, plans = build_profile(t, name)
        assert exante_utility(t.type_distribution, mech, plans).p_correct == pytest.approx(
            value, abs=1e-12)


@pytest.mark.parametrize("name", bundled_names())
def test_round_trip(name):
    s = load_scenario(name)
    again = parse_scenario(json.loads(json.dumps(serialize_scenario(s))), s.source)
    assert again == s


def test_single_voter(tmp_path):
    s = load_scenario(write(tmp_path, {"id": "one", "prior": 0.5,
                                       "voters": [{"preference": "I", "precision": 0.5}]}))
    assert s.committee == Committee((independent(0.5),))


def test_bad_precision_names_the_voter(tmp_path):
    p = write(tmp_path, {"id": "bad", "voters": [{"preference": "I", "precision": 0.6},
                                                 {"preference": "I", "precision": 1.2}]})
    with pytest.raises(ScenarioError) as exc:
        load_scenario(p)
    assert exc.value.scenario == "bad"
    assert exc.value.field.startswith("voters")
    assert "1.2" in str(exc.value)


@pytest.mark.parametrize("data,field", [
    ({"id": "x", "voters": [{"preference": "Q", "precision": 0.6}]}, "voters"),
    ({"id": "x", "voters": [{"preference": "I", "precision": 0.6, "count": 0}]}, "voters"),
    ({"id": "x", "voters": [{"preference": "I", "precision": 0.6}], "prior": 2}, "prior"),
    ({"id": "x", "voters": [{"preference": "I", "precision": 0.6}],
      "mechanisms": [{"kind": "rd", "representatives": [3]}]}, "mechanisms"),
    ({"id": "x", "voters": [{"preference": "I", "precision": 0.6}],
      "profiles": {"p": {"kind": "nope"}}}, "profiles.p"),
    ({"id": "x"}, "type_distribution"),
])
def test_load_errors(tmp_path, data, field):
    with pytest.raises(ScenarioError) as exc:
        load_scenario(write(tmp_path, data))
    assert exc.value.field.startswith(field)


def test_missing_file(tmp_path):
    with pytest.raises(ScenarioError) as exc:
        load_scenario(tmp_path / "nope.json")
    assert exc.value.field == "path"


def test_invalid_json(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{")
    with pytest.raises(ScenarioError):
        load_scenario(p)


def test_missing_bundled_scenario():
    with pytest.raises(MissingAsset):
        load_scenario("no-such-scenario")


def test_ids_are_one_based_in_files():
    assert parse_action("d1", 3) == delegate(0)
    assert parse_action("d3", 3) == delegate(2)
    with pytest.raises(Exception):
        parse_action("d4", 3)
    with pytest.raises(Exception):
        parse_action("d0", 3)
    assert parse_strategy("sincere", 3) == SINCERE
    assert parse_strategy("d2", 3) == always_delegate(1)
    assert parse_strategy(["a", "d2"], 3) == InterimStrategy(parse_action("a", 3), delegate(1))
    s = load_scenario("single-expert")
    assert s.mechanism("rd") == Mechanism.rd([0, 1, 8])


def test_bad_profile_reports_field(tmp_path):
    p = write(tmp_path, {"id": "x", "voters": [{"preference": "I", "precision": 0.6, "count": 2}],
                         "profiles": {"p": {"kind": "actions", "mechanism": "dd",
                                            "actions": ["d2", "sincere"]}}})
    s = load_scenario(p)
    with pytest.raises(ScenarioError) as exc:
        build_profile(s, "p")
    assert exc.value.field.startswith("profiles.p")
