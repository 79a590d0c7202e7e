"""Membership of behaviors in the local and measurement-dependent-local sets.

Both decisions are feasibility LPs over weights on deterministic strategies,
solved exactly by :mod:`bellepr.lp`.  Infeasibility comes back as a dual
functional that can be replayed in rational arithmetic.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import ExactnessError, PreconditionError, UnsupportedScenarioError
from .hvmodel import HiddenVariableModel
from .lp import LinearProgram, LPResult, solve_lp
from .scenario import Behavior, Label, Scenario, chsh_variants, validate_behavior

MAX_STRATEGIES = 1 << 16


@dataclass(frozen=True)
class DeterministicStrategy:
    a: tuple[tuple[Label, Label], ...]  # (x, a(x)) pairs
    b: tuple[tuple[Label, Label], ...]  # (y, b(y)) pairs

    def outcome(self, party: int, setting: Label) -> Label:
        return dict(self.a if party == 0 else self.b)[setting]

    def hits(self, key: tuple) -> bool:
        """True if this strategy produces outcomes (a, b) at settings (x, y)."""
        a, b, x, y = key
        return dict(self.a)[x] == a and dict(self.b)[y] == b


def enumerate_deterministic_strategies(s: Scenario, cap: int = MAX_STRATEGIES) -> list[DeterministicStrategy]:
    if s.parties != 2:
        raise UnsupportedScenarioError("strategy enumeration is bipartite")
    count = 1
    for party in range(2):
        for outs in s.outcomes[party]:
            count *= len(outs)
    if count > cap:
        raise MemoryError(f"{count} deterministic strategies exceed the cap of {cap}")
    xs, ys = s.settings
    a_funcs = list(itertools.product(*s.outcomes[0]))
    b_funcs = list(itertools.product(*s.outcomes[1]))
    return [
        DeterministicStrategy(tuple(zip(xs, fa)), tuple(zip(ys, fb)))
        for fa in a_funcs
        for fb in b_funcs
    ]


def strategy_behavior(strategy: DeterministicStrategy, s: Scenario) -> Behavior:
    return Behavior.from_function(s, lambda outs, sets: int(strategy.hits((*outs, *sets))))


def _require_exact(b: Behavior):
    if not b.exact:
        raise ExactnessError("exact decision needs an exact-mode behavior; rationalize it first")


@dataclass
class BellFunctional:
    """Linear functional on p(a,b|x,y) whose local maximum is below its value on the input."""

    coefficients: dict[tuple, Fraction]
    local_bound: Fraction
    value: Fraction

    def evaluate(self, b: Behavior) -> Fraction:
        return sum(c * b.table[k] for k, c in self.coefficients.items())

    def replay(self, b: Behavior) -> bool:
        strategies = enumerate_deterministic_strategies(b.scenario)
        bound = max(sum(c for k, c in self.coefficients.items() if d.hits(k)) for d in strategies)
        return bound == self.local_bound and self.evaluate(b) == self.value and bound < self.value


@dataclass
class LHVDecision:
    feasible: bool
    model: HiddenVariableModel | None = None
    functional: BellFunctional | None = None
    lp: LPResult | None = field(default=None, repr=False)


def _deterministic_model(s: Scenario, prior: dict, strategies: dict, setting_weights: dict | None = None) -> HiddenVariableModel:
    def response(outs, sets, lam):
        return int(strategies[lam].hits((*outs, *sets)))

    weights = None
    if setting_weights is not None:
        weights = lambda sets, lam: setting_weights.get((*sets, lam), 0)
    return HiddenVariableModel.build(s, prior, response, weights)


def chsh_shaped(s: Scenario) -> bool:
    """Two parties, two settings each, outcomes ±1."""
    return s.parties == 2 and all(len(x) == 2 for x in s.settings) and all(
        set(o) == {1, -1} for outs in s.outcomes for o in outs
    )


def _violated_chsh(b: Behavior) -> dict[tuple, Fraction] | None:
    """Coefficients of the most violated CHSH-type functional, or None if none exceeds 2.

    Preferred over the raw dual vector because its local bound is the familiar 2.
    """
    variants = chsh_variants(b)
    (al, be, ga), value = max(variants.items(), key=lambda kv: kv[1])
    if value <= 2:
        return None
    xs, ys = b.scenario.settings
    coeffs = {}
    for a, bb, x, y in b.scenario.keys():
        j, k = xs.index(x), ys.index(y)
        coeffs[(a, bb, x, y)] = Fraction((-1) ** ((j * k + al * j + be * k + ga) % 2) * a * bb)
    return coeffs


def decide_lhv(b: Behavior) -> LHVDecision:
    """Is ``b`` a convex mixture of deterministic local strategies?"""
    _require_exact(b)
    validate_behavior(b)
    s = b.scenario
    strategies = enumerate_deterministic_strategies(s)
    keys = list(s.keys())
    A = [[int(d.hits(k)) for d in strategies] for k in keys]
    A.append([1] * len(strategies))
    rhs = [b.table[k] for k in keys] + [1]
    res = solve_lp(LinearProgram(A, ["=="] * len(A), rhs))
    if res.feasible:
        prior = {i: q for i, q in enumerate(res.x) if q}
        model = _deterministic_model(s, prior, {i: strategies[i] for i in prior})
        return LHVDecision(True, model=model, lp=res)
    coeffs = _violated_chsh(b) if chsh_shaped(s) else None
    if coeffs is None:
        coeffs = {k: -res.y[i] for i, k in enumerate(keys) if res.y[i]}
    bound = max(sum(c for k, c in coeffs.items() if d.hits(k)) for d in strategies)
    value = sum(c * b.table[k] for k, c in coeffs.items())
    return LHVDecision(False, functional=BellFunctional(coeffs, bound, value), lp=res)


@dataclass(frozen=True)
class Joint:
    """p(a,b,x,y) = p(a,b|x,y) p(x,y)."""

    behavior: Behavior
    settings_dist: Mapping[tuple, Fraction]

    @classmethod
    def from_behavior(cls, b: Behavior, settings_dist: Mapping[tuple, Fraction] | None = None) -> Joint:
        tuples = b.scenario.setting_tuples()
        if settings_dist is None:
            settings_dist = {t: Fraction(1, len(tuples)) for t in tuples}
        return cls(b, dict(settings_dist))

    @property
    def scenario(self) -> Scenario:
        return self.behavior.scenario

    def p(self, key: tuple) -> Fraction:
        return self.behavior.table[key] * self.settings_dist.get(key[2:], 0)

    def table(self) -> dict[tuple, Fraction]:
        return {k: self.p(k) for k in self.scenario.keys()}


@dataclass
class MDLCertificate:
    """Farkas certificate: ``coefficients`` define sum c*q <= 0 for every
    measurement-dependent-local joint q at level ``l``; ``value`` > 0 on the input."""

    l: Fraction
    coefficients: dict[tuple, Fraction]
    ineq_multipliers: dict[tuple, Fraction]
    value: Fraction


@dataclass
class MDLDecision:
    feasible: bool
    l: Fraction
    model: HiddenVariableModel | None = None
    certificate: MDLCertificate | None = None
    lp: LPResult | None = field(default=None, repr=False)


def _check_joint(joint: Joint):
    _require_exact(joint.behavior)
    if not validate_behavior(joint.behavior).ok:
        raise PreconditionError("joint has an invalid conditional table")
    dist = joint.settings_dist
    if any(v < 0 for v in dist.values()) or sum(dist.values()) != 1:
        raise PreconditionError("settings distribution must be a probability distribution")


def max_level(s: Scenario) -> Fraction:
    return Fraction(1, len(s.setting_tuples()))


def _mdl_lp(joint: Joint, l: Fraction, strategies: list[DeterministicStrategy]):
    s = joint.scenario
    tuples = s.setting_tuples()
    S = len(tuples)
    var = {(d, t): d * S + ti for d in range(len(strategies)) for ti, t in enumerate(tuples)}
    n = len(var)
    keys = list(s.keys())
    A, senses, rhs = [], [], []
    for k in keys:
        row = [0] * n
        for d, strat in enumerate(strategies):
            if strat.hits(k):
                row[var[(d, k[2:])]] = 1
        A.append(row)
        senses.append("==")
        rhs.append(joint.p(k))
    ineq = []
    for d in range(len(strategies)):
        for t in tuples:
            row = [0] * n
            for t2 in tuples:
                row[var[(d, t2)]] -= l
            row[var[(d, t)]] += 1
            A.append(row)
            senses.append(">=")
            rhs.append(0)
            ineq.append((d, t))
    return LinearProgram(A, senses, rhs), keys, ineq, var


def decide_mdl(joint: Joint, l) -> MDLDecision:
    """Is ``joint`` a mixture of deterministic strategies with p(x,y|lambda) >= l?"""
    l = Fraction(l)
    _check_joint(joint)
    s = joint.scenario
    if not 0 <= l <= max_level(s):
        raise ValueError(f"l = {l} outside [0, {max_level(s)}]")
    strategies = enumerate_deterministic_strategies(s)
    lp, keys, ineq, var = _mdl_lp(joint, l, strategies)
    res = solve_lp(lp)
    if res.feasible:
        tuples = s.setting_tuples()
        prior, weights = {}, {}
        for d in range(len(strategies)):
            pd = sum(res.x[var[(d, t)]] for t in tuples)
            if pd:
                prior[d] = pd
                for t in tuples:
                    weights[(*t, d)] = res.x[var[(d, t)]] / pd
        model = _deterministic_model(s, prior, {d: strategies[d] for d in prior}, weights)
        return MDLDecision(True, l, model=model, lp=res)
    coeffs = {k: -res.y[i] for i, k in enumerate(keys) if res.y[i]}
    mult = {ineq[j]: -res.y[len(keys) + j] for j in range(len(ineq)) if res.y[len(keys) + j]}
    value = sum(c * joint.p(k) for k, c in coeffs.items())
    return MDLDecision(False, l, certificate=MDLCertificate(l, coeffs, mult, value), lp=res)


def replay_mdl_certificate(joint: Joint, cert: MDLCertificate) -> bool:
    """Rebuild the LP at level ``cert.l`` and check the Farkas conditions exactly."""
    strategies = enumerate_deterministic_strategies(joint.scenario)
    lp, keys, ineq, _ = _mdl_lp(joint, cert.l, strategies)
    y = [-cert.coefficients.get(k, 0) for k in keys] + [-cert.ineq_multipliers.get(i, 0) for i in ineq]
    value = sum(c * joint.p(k) for k, c in cert.coefficients.items())
    return lp.is_farkas_certificate([Fraction(v) for v in y]) and value == cert.value and value > 0


class NoThresholdError(ValueError):
    pass


@dataclass
class Threshold:
    lo: Fraction
    hi: Fraction
    probes: list[tuple[Fraction, bool]]

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo


def mdl_threshold(joint: Joint, precision) -> Threshold:
    """Bisect for the supremum of feasible l; returns [lo, hi] with lo feasible
    and hi infeasible (or lo == hi == the maximal level when that is feasible)."""
    precision = Fraction(precision)
    probes: list[tuple[Fraction, bool]] = []

    def probe(l: Fraction) -> bool:
        ok = decide_mdl(joint, l).feasible
        probes.append((l, ok))
        feas = [p for p, f in probes if f]
        infeas = [p for p, f in probes if not f]
        if feas and infeas and max(feas) >= min(infeas):
            raise AssertionError(f"MDL feasibility not monotone in l: probes {probes}")
        return ok

    lo, hi = Fraction(0), max_level(joint.scenario)
    if not probe(lo):
        raise NoThresholdError("joint is infeasible already at l = 0")
    if probe(hi):
        return Threshold(hi, hi, probes)
    while hi - lo > precision:
        mid = (lo + hi) / 2
        if probe(mid):
            lo = mid
        else:
            hi = mid
    return Threshold(lo, hi, probes)
