"""Finite hidden-variable models and the lambda-level locality conditions.

A model stores p(lambda), p(x,y|lambda) and p(a,b|x,y,lambda); the
posterior p(lambda|x,y) is derived by Bayes' rule.  Conditions are only
tested on the support p(lambda) > 0 and p(x,y|lambda) > 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from types import MappingProxyType
from typing import Any, Callable, Hashable, Mapping, Sequence

from .errors import IncompatibleConditionError, PreconditionError, StructuralError, UndefinedConditionalError
from .scenario import (
    TOL,
    Behavior,
    Label,
    Number,
    Report,
    Scenario,
    ValidationReport,
    Violation,
    Witness,
    close,
    is_zero,
    to_number,
)

ConditionReport = Report

CONDITIONS = ("PI", "OI", "LC", "DET", "MI", "AC")


@dataclass(frozen=True)
class HiddenVariableModel:
    """Missing ``setting_weights`` and ``response`` entries read as zero."""

    scenario: Scenario
    lambdas: tuple
    prior: Mapping[Hashable, Number]
    setting_weights: Mapping[tuple, Number]
    response: Mapping[tuple, Number]
    exact: bool = True
    tol: float = TOL

    def __post_init__(self):
        conv = lambda d: MappingProxyType({k: to_number(v, self.exact) for k, v in dict(d).items()})
        object.__setattr__(self, "lambdas", tuple(self.lambdas))
        object.__setattr__(self, "prior", conv(self.prior))
        object.__setattr__(self, "setting_weights", conv({tuple(k): v for k, v in dict(self.setting_weights).items()}))
        object.__setattr__(self, "response", conv({tuple(k): v for k, v in dict(self.response).items()}))

    @classmethod
    def build(
        cls,
        scenario: Scenario,
        prior: Mapping[Hashable, Any],
        response: Callable[[tuple, tuple, Hashable], Any],
        setting_weights: Callable[[tuple, Hashable], Any] | None = None,
        exact: bool = True,
    ) -> HiddenVariableModel:
        """Tabulate a model from callables; setting weights default to uniform."""
        tuples = scenario.setting_tuples()
        if setting_weights is None:
            u = Fraction(1, len(tuples)) if exact else 1.0 / len(tuples)
            setting_weights = lambda sets, lam: u
        lambdas = tuple(prior)
        weights, resp = {}, {}
        for lam in lambdas:
            for sets in tuples:
                w = setting_weights(sets, lam)
                if w:
                    weights[(*sets, lam)] = w
                for outs in scenario.events(sets):
                    v = response(outs, sets, lam)
                    if v:
                        resp[(*outs, *sets, lam)] = v
        return cls(scenario, lambdas, dict(prior), weights, resp, exact)

    def p_lambda(self, lam) -> Number:
        return self.prior.get(lam, 0)

    def weight(self, settings: tuple, lam) -> Number:
        return self.setting_weights.get((*settings, lam), 0)

    def r(self, outcomes: tuple, settings: tuple, lam) -> Number:
        return self.response.get((*outcomes, *settings, lam), 0)

    def response_dist(self, settings: tuple, lam) -> dict[tuple, Number]:
        return {outs: self.r(outs, settings, lam) for outs in self.scenario.events(settings)}

    def _zero(self, v) -> bool:
        return is_zero(v, self.exact, self.tol)

    def supported_lambdas(self) -> list:
        return [lam for lam in self.lambdas if not self._zero(self.p_lambda(lam))]

    def support(self, lam) -> list[tuple]:
        """Setting tuples with p(x,y|lambda) > 0."""
        return [s for s in self.scenario.setting_tuples() if not self._zero(self.weight(s, lam))]

    @cached_property
    def _settings_marginal(self) -> dict[tuple, Number]:
        zero = Fraction(0) if self.exact else 0.0
        return {
            s: sum((self.p_lambda(lam) * self.weight(s, lam) for lam in self.lambdas), zero)
            for s in self.scenario.setting_tuples()
        }

    def settings_marginal(self) -> dict[tuple, Number]:
        """p(x,y) = sum over lambda of p(lambda) p(x,y|lambda)."""
        return dict(self._settings_marginal)

    def posterior(self, settings: tuple) -> dict[Hashable, Number]:
        """p(lambda|x,y) = p(x,y|lambda) p(lambda) / p(x,y)."""
        pxy = self._settings_marginal[settings]
        if self._zero(pxy):
            raise UndefinedConditionalError(f"p(settings) = 0 at {settings!r}; conditional undefined")
        return {lam: self.weight(settings, lam) * self.p_lambda(lam) / pxy for lam in self.lambdas}

    def party_marginal(self, party: int, settings: tuple, lam) -> dict[Label, Number]:
        dist = {o: 0 for o in self.scenario.outcomes_of(party, settings[party])}
        for outs, v in self.response_dist(settings, lam).items():
            dist[outs[party]] += v
        return dist


def validate_model(m: HiddenVariableModel) -> ValidationReport:
    sc = m.scenario
    report = ValidationReport()
    for lam in m.prior:
        if lam not in m.lambdas:
            raise StructuralError(f"prior references unknown lambda {lam!r}")
    for key in list(m.setting_weights) + list(m.response):
        if key[-1] not in m.lambdas:
            raise StructuralError(f"entry {key!r} references unknown lambda")
    for table in (m.prior, m.setting_weights, m.response):
        for k, v in table.items():
            if v < 0 and not (not m.exact and -v <= m.tol):
                report.violations.append(Violation("negative", k if isinstance(k, tuple) else (k,), v))
    total = sum(m.prior.values())
    if not close(total, 1, m.exact, m.tol):
        report.violations.append(Violation("normalization", ("prior",), total - 1))
    for lam in m.supported_lambdas():
        tw = sum(m.weight(s, lam) for s in sc.setting_tuples())
        if not close(tw, 1, m.exact, m.tol):
            report.violations.append(Violation("normalization", ("setting_weights", lam), tw - 1))
        for s in m.support(lam):
            tr = sum(m.response_dist(s, lam).values())
            if not close(tr, 1, m.exact, m.tol):
                report.violations.append(Violation("normalization", ("response", *s, lam), tr - 1))
    return report


def reconstruct_behavior(m: HiddenVariableModel) -> Behavior:
    """p(a,b|x,y) = sum over lambda of p(a,b|x,y,lambda) p(lambda|x,y)."""
    table = {}
    for sets in m.scenario.setting_tuples():
        post = m.posterior(sets)
        for outs in m.scenario.events(sets):
            table[(*outs, *sets)] = sum(
                (m.r(outs, sets, lam) * post[lam] for lam in m.lambdas if post[lam]),
                Fraction(0) if m.exact else 0.0,
            )
    return Behavior(m.scenario, table, m.exact, m.tol)


def _supported(m: HiddenVariableModel):
    for lam in m.supported_lambdas():
        yield lam, m.support(lam)


def check_parameter_independence(m: HiddenVariableModel) -> ConditionReport:
    """Each party's response marginal must not depend on distant settings."""
    report = ConditionReport("PI", exact=m.exact)
    for lam, supp in _supported(m):
        for party in range(m.scenario.parties):
            ref: dict = {}
            for sets in supp:
                marg = m.party_marginal(party, sets, lam)
                first = ref.setdefault(sets[party], (sets, marg))
                if first[0] == sets:
                    continue
                for o, v in marg.items():
                    if not close(first[1][o], v, m.exact, m.tol):
                        report.witnesses.append(
                            Witness((lam, party, first[0], sets, o), first[1][o], v, v - first[1][o])
                        )
    return report


def _product(m, sets, lam, marginals_for) -> dict[tuple, Number]:
    out = {}
    margs = [marginals_for(party) for party in range(m.scenario.parties)]
    for outs in m.scenario.events(sets):
        v = 1
        for party, o in enumerate(outs):
            v *= margs[party][o]
        out[outs] = v
    return out


def check_outcome_independence(m: HiddenVariableModel) -> ConditionReport:
    """Joint response equals the product of its own marginals."""
    report = ConditionReport("OI", exact=m.exact)
    for lam, supp in _supported(m):
        for sets in supp:
            prod = _product(m, sets, lam, lambda party: m.party_marginal(party, sets, lam))
            for outs, v in m.response_dist(sets, lam).items():
                if not close(v, prod[outs], m.exact, m.tol):
                    report.witnesses.append(Witness((lam, sets, outs), v, prod[outs], v - prod[outs]))
    return report


def check_local_causality(m: HiddenVariableModel) -> ConditionReport:
    """Joint response equals a product of local marginals p(a|x,lambda) p(b|y,lambda).

    Each local marginal is read off the first supported setting tuple that
    contains its setting; every supported joint is then compared with the
    product of those reference marginals.
    """
    report = ConditionReport("LC", exact=m.exact)
    for lam, supp in _supported(m):
        local: list[dict] = [dict() for _ in range(m.scenario.parties)]
        for sets in supp:
            for party, s in enumerate(sets):
                if s not in local[party]:
                    local[party][s] = m.party_marginal(party, sets, lam)
        for sets in supp:
            prod = _product(m, sets, lam, lambda party: local[party][sets[party]])
            for outs, v in m.response_dist(sets, lam).items():
                if not close(v, prod[outs], m.exact, m.tol):
                    report.witnesses.append(Witness((lam, sets, outs), v, prod[outs], v - prod[outs]))
    return report


def check_determinism(m: HiddenVariableModel) -> ConditionReport:
    """Every party's response marginal is 0 or 1."""
    report = ConditionReport("DET", exact=m.exact)
    for lam, supp in _supported(m):
        for sets in supp:
            for party in range(m.scenario.parties):
                for o, v in m.party_marginal(party, sets, lam).items():
                    if not (close(v, 0, m.exact, m.tol) or close(v, 1, m.exact, m.tol)):
                        nearest = 0 if v < Fraction(1, 2) else 1
                        report.witnesses.append(Witness((lam, sets, party, o), v, nearest, v - nearest))
    return report


def check_measurement_independence(m: HiddenVariableModel) -> ConditionReport:
    """p(lambda|x,y) is the same distribution for every setting tuple."""
    report = ConditionReport("MI", exact=m.exact)
    tuples = m.scenario.setting_tuples()
    ref = m.posterior(tuples[0])
    for sets in tuples[1:]:
        post = m.posterior(sets)
        for lam in m.lambdas:
            if not close(ref[lam], post[lam], m.exact, m.tol):
                report.witnesses.append(
                    Witness((lam, tuples[0], sets), ref[lam], post[lam], post[lam] - ref[lam])
                )
    return report


def check_accessible_choice(m: HiddenVariableModel) -> ConditionReport:
    """p(x,y|lambda) > 0 for every setting tuple whenever p(lambda) > 0."""
    report = ConditionReport("AC", exact=m.exact)
    for lam in m.supported_lambdas():
        for sets in m.scenario.setting_tuples():
            w = m.weight(sets, lam)
            if w <= 0 or (not m.exact and w <= m.tol):
                report.witnesses.append(Witness((lam, sets), w, 0, w))
    return report


CHECKERS: dict[str, Callable[[HiddenVariableModel], ConditionReport]] = {
    "PI": check_parameter_independence,
    "OI": check_outcome_independence,
    "LC": check_local_causality,
    "DET": check_determinism,
    "MI": check_measurement_independence,
    "AC": check_accessible_choice,
}


def check(m: HiddenVariableModel, conditions: Sequence[str] = CONDITIONS) -> dict[str, ConditionReport]:
    return {c.upper(): CHECKERS[c.upper()](m) for c in conditions}


@dataclass(frozen=True)
class LemmaVerdict:
    passed: bool
    u0: Hashable
    conditional: dict


def condition_preserves_determinism(
    p_u_given_v: Mapping[Hashable, Number],
    p_w_given_v: Mapping[Hashable, Number],
    p_uw_given_v: Mapping[tuple, Number],
    w: Hashable,
) -> LemmaVerdict:
    """Condition a deterministic p(u|v) on extra information w.

    Returns the computed p(u|v,w) = p(u,w|v) / p(w|v) and whether it is a
    point mass at the same value as p(u|v).
    """
    support = [u for u, v in p_u_given_v.items() if v != 0]
    if len(support) != 1 or p_u_given_v[support[0]] != 1:
        raise PreconditionError("p(u|v) is not deterministic")
    u0 = support[0]
    pw = p_w_given_v.get(w, 0)
    if pw == 0:
        raise IncompatibleConditionError(f"p(w|v) = 0 for w = {w!r}")
    for u, pu in p_u_given_v.items():
        if sum(v for (uu, _), v in p_uw_given_v.items() if uu == u) != pu:
            raise PreconditionError(f"joint inconsistent with p(u|v) at u = {u!r}")
    for ww, pww in p_w_given_v.items():
        if sum(v for (_, wk), v in p_uw_given_v.items() if wk == ww) != pww:
            raise PreconditionError(f"joint inconsistent with p(w|v) at w = {ww!r}")
    cond = {u: Fraction(p_uw_given_v.get((u, w), 0)) / Fraction(pw) for u in p_u_given_v}
    passed = cond[u0] == 1 and all(v == 0 for u, v in cond.items() if u != u0)
    return LemmaVerdict(passed, u0, cond)
