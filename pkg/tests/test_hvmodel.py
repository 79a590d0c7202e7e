import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from bellepr.constructions import hall_brans_model, pr_box_model
from bellepr.errors import IncompatibleConditionError, PreconditionError, UndefinedConditionalError
from bellepr.hvmodel import (
    HiddenVariableModel,
    check,
    check_accessible_choice,
    check_determinism,
    check_local_causality,
    check_measurement_independence,
    check_outcome_independence,
    check_parameter_independence,
    condition_preserves_determinism,
    reconstruct_behavior,
    validate_model,
)
from bellepr.reproduce import lemma_trial
from bellepr.sampling import CHSH_SCENARIO, MODEL_KINDS, random_behavior, random_model
from bellepr.scenario import Behavior, check_no_signalling, find_perfect_correlations, pr_box_behavior

HALF = Fraction(1, 2)
seeds = st.integers(0, 2**32 - 1)


def single_lambda(fn, weights=None) -> HiddenVariableModel:
    return HiddenVariableModel.build(CHSH_SCENARIO, {0: 1}, lambda o, s, lam: fn(o, s), weights)


def test_reconstruct_pr_box_model():
    assert reconstruct_behavior(pr_box_model(3)).table == pr_box_behavior().table


def test_reconstruct_single_lambda_is_response():
    b = random_behavior(random.Random(3), CHSH_SCENARIO)
    m = single_lambda(lambda o, s: b.p(o, s))
    assert reconstruct_behavior(m).table == b.table


def test_reconstruct_hall_brans_exact():
    b = random_behavior(random.Random(5), CHSH_SCENARIO)
    assert reconstruct_behavior(hall_brans_model(b)).table == b.table


def test_reconstruct_undefined_pair():
    m = single_lambda(lambda o, s: HALF * (o[0] == o[1]), lambda s, lam: HALF if s[0] == "x0" else 0)
    with pytest.raises(UndefinedConditionalError, match="x1"):
        reconstruct_behavior(m)


def test_parameter_independence_examples():
    assert check_parameter_independence(pr_box_model()).passed
    sigma = {"y0": 1, "y1": -1}
    m = single_lambda(lambda o, s: HALF if o[0] == sigma[s[1]] else 0)
    rep = check_parameter_independence(m)
    assert not rep.passed
    assert all(w.indices[1] == 0 for w in rep.witnesses)


def test_outcome_independence_examples():
    rep = check_outcome_independence(pr_box_model())
    assert not rep.passed
    assert {(w.lhs, w.rhs) for w in rep.witnesses} <= {(HALF, Fraction(1, 4)), (0, Fraction(1, 4))}
    det = single_lambda(lambda o, s: int(o == (1, -1)))
    assert check_outcome_independence(det).passed
    pa = {1: Fraction(1, 3), -1: Fraction(2, 3)}
    prod = single_lambda(lambda o, s: pa[o[0]] * HALF)
    assert check_outcome_independence(prod).passed


def test_local_causality_and_determinism_examples():
    assert not check_local_causality(pr_box_model()).passed
    hb = hall_brans_model(pr_box_behavior())
    assert check_local_causality(hb).passed
    assert check_determinism(hb).passed
    assert not check_determinism(pr_box_model()).passed


def test_measurement_independence_and_accessible_choice():
    m = random_model(random.Random(1), weights="uniform")
    assert check_measurement_independence(m).passed
    assert check_accessible_choice(m).passed
    hb = hall_brans_model(pr_box_behavior())
    assert not check_measurement_independence(hb).passed
    assert not check_accessible_choice(hb).passed
    one = single_lambda(lambda o, s: Fraction(1, 4))
    assert check_measurement_independence(one).passed


def test_superdeterministic_model_fails_accessible_choice():
    tuples = CHSH_SCENARIO.setting_tuples()
    prior = {t: Fraction(1, 4) for t in tuples}
    m = HiddenVariableModel.build(
        CHSH_SCENARIO, prior, lambda o, s, lam: int(o == (1, 1)), lambda s, lam: int(s == lam)
    )
    assert not check_accessible_choice(m).passed


def test_reports_record_mode():
    assert check_determinism(pr_box_model()).exact
    f = HiddenVariableModel.build(CHSH_SCENARIO, {0: 1.0}, lambda o, s, l: 0.25, exact=False)
    assert not check_determinism(f).exact


def test_validate_model_flags_bad_normalisation():
    m = HiddenVariableModel(CHSH_SCENARIO, [0], {0: HALF}, {}, {})
    kinds = {v.kind for v in validate_model(m).violations}
    assert "normalization" in kinds
    assert validate_model(pr_box_model(2)).ok


def test_lemma_examples():
    v = condition_preserves_determinism({0: 1, 1: 0}, {"w": HALF, "w'": HALF}, {(0, "w"): HALF, (0, "w'"): HALF}, "w")
    assert v.passed and v.u0 == 0 and v.conditional == {0: 1, 1: 0}
    with pytest.raises(IncompatibleConditionError):
        condition_preserves_determinism({0: 1, 1: 0}, {"w": 1, "z": 0}, {(0, "w"): 1}, "z")
    with pytest.raises(PreconditionError):
        condition_preserves_determinism({0: HALF, 1: HALF}, {"w": 1}, {(0, "w"): HALF, (1, "w"): HALF}, "w")


@given(seeds)
@settings(max_examples=200, deadline=None)
def test_lemma_random_trials(seed):
    p_u, p_w, p_uw, w = lemma_trial(random.Random(seed))
    assert condition_preserves_determinism(p_u, p_w, p_uw, w).passed


@given(seeds, st.sampled_from(MODEL_KINDS), st.sampled_from(["uniform", "shared", "random"]))
@settings(max_examples=150, deadline=None)
def test_lc_iff_pi_and_oi(seed, kind, weights):
    m = random_model(random.Random(seed), kind=kind, weights=weights, point_bias=0.5)
    lc = check_local_causality(m).passed
    assert lc == (check_parameter_independence(m).passed and check_outcome_independence(m).passed)


@given(seeds, st.sampled_from(["deterministic", "deterministic-local"]))
@settings(max_examples=100, deadline=None)
def test_determinism_and_pi_imply_lc(seed, kind):
    m = random_model(random.Random(seed), kind=kind, weights="random")
    assert check_determinism(m).passed
    if check_parameter_independence(m).passed:
        assert check_local_causality(m).passed


@given(seeds)
@settings(max_examples=100, deadline=None)
def test_oi_with_perfect_correlation_forces_determinism(seed):
    # product responses are OI; point-mass-heavy factors make perfect correlations common
    m = random_model(random.Random(seed), kind="product", weights="uniform", point_bias=0.7, n_lambda=2)
    assert check_outcome_independence(m).passed
    b = reconstruct_behavior(m)
    for pc in find_perfect_correlations(b):
        for lam in m.supported_lambdas():
            for party in (0, 1):
                marg = m.party_marginal(party, pc.pair, lam)
                assert sorted(marg.values()) == [0, 1]


@given(seeds, st.sampled_from(["uniform", "shared", "random"]))
@settings(max_examples=100, deadline=None)
def test_measurement_independence_implies_accessible_choice(seed, weights):
    m = random_model(random.Random(seed), weights=weights)
    if any(v == 0 for v in m.settings_marginal().values()):
        return
    if check_measurement_independence(m).passed:
        assert check_accessible_choice(m).passed


@given(seeds, st.sampled_from(MODEL_KINDS))
@settings(max_examples=100, deadline=None)
def test_pi_with_independent_weights_gives_no_signalling(seed, kind):
    m = random_model(random.Random(seed), kind=kind, weights="shared", point_bias=0.5)
    if check_parameter_independence(m).passed:
        assert check_no_signalling(reconstruct_behavior(m)).passed


@given(seeds, st.fractions(0, 1))
@settings(max_examples=80, deadline=None)
def test_reconstruction_linear_in_prior(seed, t):
    rng = random.Random(seed)
    m = random_model(rng, weights="shared")
    other = random_model(rng)
    prior2 = dict(other.prior)
    mixed = {l: t * m.prior[l] + (1 - t) * prior2[l] for l in m.lambdas}
    build = lambda prior: HiddenVariableModel(m.scenario, m.lambdas, prior, m.setting_weights, m.response)
    b1, b2 = reconstruct_behavior(build(m.prior)), reconstruct_behavior(build(prior2))
    bm = reconstruct_behavior(build(mixed))
    for k in bm.table:
        assert bm.table[k] == t * b1.table[k] + (1 - t) * b2.table[k]


@given(seeds, st.sampled_from(MODEL_KINDS))
@settings(max_examples=60, deadline=None)
def test_random_models_validate(seed, kind):
    m = random_model(random.Random(seed), kind=kind, weights="shared")
    assert validate_model(m).ok
    assert set(check(m)) == {"PI", "OI", "LC", "DET", "MI", "AC"}
