import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from bellepr.constructions import epr_grid_model, hall_brans_model, pr_box_model
from bellepr.decide import Joint, decide_lhv, decide_mdl
from bellepr.errors import StructuralError
from bellepr.hvmodel import reconstruct_behavior
from bellepr.quantum import chsh_singlet_behavior, ghz_behavior, ghz_constraints
from bellepr.sampling import CHSH_SCENARIO, random_behavior, random_model
from bellepr.scenario import pr_box_behavior
from bellepr.serialize import (
    dumps,
    from_json,
    functional_from_json,
    load_document,
    mdl_certificate_from_json,
    to_json,
)


def round_trip(obj):
    return from_json(json.loads(dumps(obj)))


def test_behavior_round_trip_exact():
    b = pr_box_behavior()
    back = round_trip(b)
    assert back.exact and back.table == b.table
    assert back.scenario.settings == b.scenario.settings


def test_behavior_round_trip_float():
    b = chsh_singlet_behavior()
    back = round_trip(b)
    assert not back.exact
    assert back.table == b.table


def test_three_party_round_trip():
    b = ghz_behavior()
    doc = to_json(b)
    assert {"x", "y", "z", "a", "b", "c"} <= set(doc["table"][0])
    assert round_trip(b).table == b.table


def test_model_round_trips():
    for m in (pr_box_model(2), hall_brans_model(pr_box_behavior()), epr_grid_model(3)):
        back = round_trip(m)
        assert reconstruct_behavior(back).table == reconstruct_behavior(m).table
        assert back.prior == m.prior


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_random_model_round_trip(seed):
    m = random_model(random.Random(seed), weights="random")
    back = round_trip(m)
    assert back.response == m.response and back.setting_weights == m.setting_weights


def test_joint_round_trip():
    j = Joint.from_behavior(random_behavior(random.Random(2), CHSH_SCENARIO))
    back = round_trip(j)
    assert back.table() == j.table()


def test_system_round_trip():
    s = ghz_constraints()
    back = round_trip(s)
    assert back.variables == s.variables
    assert [c.allowed for c in back.constraints] == [c.allowed for c in s.constraints]


def test_certificates_round_trip():
    f = decide_lhv(pr_box_behavior()).functional
    assert functional_from_json(json.loads(dumps(f))).replay(pr_box_behavior())
    joint = Joint.from_behavior(pr_box_behavior())
    cert = decide_mdl(joint, Fraction(1, 4)).certificate
    back = mdl_certificate_from_json(json.loads(dumps(cert)))
    assert back.l == cert.l and back.value == cert.value


def test_bad_documents(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(StructuralError):
        load_document(p)
    p.write_text("[1, 2]")
    with pytest.raises(StructuralError):
        load_document(p)
    with pytest.raises(StructuralError):
        from_json({"kind": "mystery"})
    with pytest.raises(StructuralError):
        from_json({"kind": "model"})
