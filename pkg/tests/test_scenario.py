import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from bellepr.decide import enumerate_deterministic_strategies, strategy_behavior
from bellepr.errors import ExactnessError, StructuralError, UnsupportedScenarioError
from bellepr.quantum import chsh_singlet_behavior, planar, singlet_behavior
from bellepr.sampling import CHSH_SCENARIO, random_behavior
from bellepr.scenario import (
    Behavior,
    Scenario,
    chsh_value,
    chsh_variants,
    check_no_signalling,
    find_perfect_correlations,
    marginals,
    max_chsh_value,
    pr_box_behavior,
    uniform_behavior,
    validate_behavior,
)

HALF = Fraction(1, 2)


def test_scenario_invariants():
    with pytest.raises(StructuralError):
        Scenario.bipartite([], ["y0"])
    with pytest.raises(StructuralError):
        Scenario.bipartite(["x", "x"], ["y"])
    with pytest.raises(StructuralError):
        Scenario.bipartite(["x"], ["y"], outcomes=(1,))
    with pytest.raises(UnsupportedScenarioError):
        Scenario.create([["x"]])
    assert len(list(CHSH_SCENARIO.keys())) == 16


def test_validate_pr_box_is_valid():
    assert validate_behavior(pr_box_behavior()).ok


def test_validate_normalization_excess():
    b = Behavior.from_function(CHSH_SCENARIO, lambda o, s: Fraction(3, 10))
    rep = validate_behavior(b)
    norm = [v for v in rep.violations if v.kind == "normalization"]
    assert len(norm) == 4
    assert all(v.magnitude == Fraction(1, 5) for v in norm)


def test_validate_negative_entry():
    table = dict(uniform_behavior(CHSH_SCENARIO).table)
    key = (1, 1, "x0", "y0")
    table[key] = Fraction(-1, 10)
    rep = validate_behavior(Behavior(CHSH_SCENARIO, table))
    neg = [v for v in rep.violations if v.kind == "negative"]
    assert [v.index for v in neg] == [key]


def test_validate_missing_entry_is_structural():
    table = dict(pr_box_behavior().table)
    del table[(1, 1, "x1", "y1")]
    with pytest.raises(StructuralError, match="x1"):
        validate_behavior(Behavior(CHSH_SCENARIO, table))


def test_exact_mode_rejects_floats():
    with pytest.raises(ExactnessError):
        Behavior(CHSH_SCENARIO, {k: 0.25 for k in CHSH_SCENARIO.keys()})


def test_marginals_examples():
    pa, pb = marginals(pr_box_behavior(), "x1", "y0")
    assert pa[1] == HALF and pb[1] == HALF
    s = singlet_behavior([planar(0.3)], [planar(0.3)])
    pa, _ = marginals(s, "x0", "y0")
    assert abs(pa[1] - 0.5) < 1e-12
    det = Behavior.from_function(CHSH_SCENARIO, lambda o, s: int(o == (1, 1)))
    assert marginals(det, "x0", "y1")[0] == {1: 1, -1: 0}
    with pytest.raises(IndexError):
        marginals(det, "x9", "y0")


def test_no_signalling():
    assert check_no_signalling(pr_box_behavior()).passed
    sigma = {"y0": 1, "y1": -1}
    sig = Behavior.from_function(CHSH_SCENARIO, lambda o, s: HALF if o[0] == sigma[s[1]] else 0)
    rep = check_no_signalling(sig)
    assert not rep.passed
    assert rep.witnesses[0].indices[0] == 0  # party A
    assert check_no_signalling(singlet_behavior([planar(t) for t in (0, 1, 2)], [planar(0.5)])).passed


def test_perfect_correlations_examples():
    pcs = find_perfect_correlations(pr_box_behavior())
    assert len(pcs) == 4
    for pc in pcs:
        j, k = int(pc.pair[0][1]), int(pc.pair[1][1])
        assert pc.as_dict() == {a: (-1) ** (j * k) * a for a in (1, -1)}
    s = singlet_behavior([planar(0.7)], [planar(0.7)])
    assert find_perfect_correlations(s)[0].as_dict() == {1: -1, -1: 1}
    assert find_perfect_correlations(uniform_behavior(CHSH_SCENARIO)) == []


def test_perfect_correlation_off_support_extension():
    # a = +1 always; b = -1 always: only a = +1 is realised, f extended by smallest label
    b = Behavior.from_function(CHSH_SCENARIO, lambda o, s: int(o == (1, -1)))
    f = find_perfect_correlations(b)[0].as_dict()
    assert f[1] == -1 and f[-1] == 1


def test_chsh_anchors():
    assert chsh_value(pr_box_behavior()) == 4
    det = Behavior.from_function(CHSH_SCENARIO, lambda o, s: int(o == (1, 1)))
    assert chsh_value(det) == 2
    assert abs(max_chsh_value(chsh_singlet_behavior()) - 2 * 2**0.5) < 1e-9
    three = Scenario.bipartite(["x0"], ["y0"], outcomes=(0, 1, 2))
    with pytest.raises(UnsupportedScenarioError):
        chsh_value(uniform_behavior(three), ("x0", "x0", "y0", "y0"))


def test_chsh_variants_cover_layout():
    b = pr_box_behavior()
    assert chsh_variants(b)[(0, 0, 0)] == chsh_value(b)
    assert sorted(chsh_variants(b).values()) == [-4] + [0] * 6 + [4]


def test_chsh_of_deterministic_strategies_bounded():
    vals = [chsh_value(strategy_behavior(d, CHSH_SCENARIO)) for d in enumerate_deterministic_strategies(CHSH_SCENARIO)]
    assert max(vals) == 2 and min(vals) == -2


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_marginals_sum_to_one(seed):
    b = random_behavior(random.Random(seed), CHSH_SCENARIO)
    for x, y in CHSH_SCENARIO.setting_tuples():
        pa, pb = marginals(b, x, y)
        assert sum(pa.values()) == 1 and sum(pb.values()) == 1


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_perfect_correlation_characterisation(seed):
    rng = random.Random(seed)
    b = random_behavior(rng, CHSH_SCENARIO, sparsity=0.7)
    found = {pc.pair for pc in find_perfect_correlations(b)}
    for x, y in CHSH_SCENARIO.setting_tuples():
        pa, _ = marginals(b, x, y)
        images = {}
        ok = True
        for a in (1, -1):
            if pa[a] == 0:
                continue
            bs = [bb for bb in (1, -1) if b.p((a, bb), (x, y)) > 0]
            if len(bs) != 1:
                ok = False
            else:
                images[a] = bs[0]
        ok = ok and len(set(images.values())) == len(images)
        assert ((x, y) in found) == ok


@given(st.lists(st.integers(0, 9), min_size=16, max_size=16).filter(any))
@settings(max_examples=60, deadline=None)
def test_chsh_of_local_mixtures_in_range(weights):
    strategies = enumerate_deterministic_strategies(CHSH_SCENARIO)
    total = sum(weights)
    table = {
        k: sum(Fraction(w, total) * int(d.hits(k)) for w, d in zip(weights, strategies)) for k in CHSH_SCENARIO.keys()
    }
    b = Behavior(CHSH_SCENARIO, table)
    assert all(-2 <= v <= 2 for v in chsh_variants(b).values())
