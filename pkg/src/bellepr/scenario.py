"""Bell scenarios and observed behaviors p(a,b|x,y).

A behavior table is keyed by the flat tuple ``(*outcomes, *settings)``, i.e.
``(a, b, x, y)`` for two parties and ``(a, b, c, x, y, z)`` for three.
Exact-mode tables hold :class:`fractions.Fraction` values; float-mode tables
hold floats compared with an absolute tolerance.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Any, Callable, Hashable, Iterable, Iterator, Mapping, Sequence

from .errors import ExactnessError, StructuralError, UnsupportedScenarioError

TOL = 1e-9

Label = Hashable
Number = Fraction | float


def to_number(value: Any, exact: bool) -> Number:
    if exact:
        if isinstance(value, float):
            raise ExactnessError(f"float {value!r} given to an exact-mode table")
        return Fraction(value)
    return float(value)


def is_zero(value: Number, exact: bool, tol: float = TOL) -> bool:
    return value == 0 if exact else abs(value) <= tol


def close(u: Number, v: Number, exact: bool, tol: float = TOL) -> bool:
    return u == v if exact else abs(u - v) <= tol


def sort_labels(labels: Iterable[Label]) -> list[Label]:
    labels = list(labels)
    try:
        return sorted(labels)
    except TypeError:
        return labels


@dataclass(frozen=True)
class Scenario:
    """Setting labels per party and outcome labels per (party, setting)."""

    settings: tuple[tuple[Label, ...], ...]
    outcomes: tuple[tuple[tuple[Label, ...], ...], ...]

    def __post_init__(self):
        if len(self.settings) not in (2, 3):
            raise UnsupportedScenarioError("only 2- or 3-party scenarios are supported")
        if len(self.outcomes) != len(self.settings):
            raise StructuralError("outcomes must be given for every party")
        for party, (sets, outs) in enumerate(zip(self.settings, self.outcomes)):
            if not sets:
                raise StructuralError(f"party {party} has no settings")
            if len(set(sets)) != len(sets):
                raise StructuralError(f"party {party} has duplicate setting labels")
            if len(outs) != len(sets):
                raise StructuralError(f"party {party}: one outcome set per setting required")
            for s, o in zip(sets, outs):
                if len(o) < 2 or len(set(o)) != len(o):
                    raise StructuralError(
                        f"party {party}, setting {s!r}: need >= 2 distinct outcomes"
                    )

    @classmethod
    def create(
        cls,
        settings: Sequence[Sequence[Label]],
        outcomes: Sequence[Label] = (1, -1),
        per_setting: Sequence[Sequence[Sequence[Label]]] | None = None,
    ) -> Scenario:
        """One alphabet shared by every setting, unless ``per_setting`` gives
        alphabets indexed [party][setting]."""
        settings = tuple(tuple(s) for s in settings)
        if per_setting is not None:
            outs = tuple(tuple(tuple(o) for o in per_party) for per_party in per_setting)
        else:
            alphabet = tuple(outcomes)
            outs = tuple(tuple(alphabet for _ in sets) for sets in settings)
        return cls(settings, outs)

    @classmethod
    def bipartite(cls, xs: Sequence[Label], ys: Sequence[Label], outcomes: Sequence = (1, -1)) -> Scenario:
        return cls.create([xs, ys], outcomes)

    @property
    def parties(self) -> int:
        return len(self.settings)

    def outcomes_of(self, party: int, setting: Label) -> tuple[Label, ...]:
        try:
            idx = self.settings[party].index(setting)
        except ValueError:
            raise IndexError(f"unknown setting {setting!r} for party {party}") from None
        return self.outcomes[party][idx]

    def setting_tuples(self) -> list[tuple]:
        return list(itertools.product(*self.settings))

    def events(self, settings: tuple) -> list[tuple]:
        """All outcome tuples for a setting tuple."""
        return list(
            itertools.product(*(self.outcomes_of(i, s) for i, s in enumerate(settings)))
        )

    def keys(self) -> Iterator[tuple]:
        for sets in self.setting_tuples():
            for outs in self.events(sets):
                yield (*outs, *sets)


@dataclass(frozen=True)
class Behavior:
    scenario: Scenario
    table: Mapping[tuple, Number]
    exact: bool = True
    tol: float = TOL

    def __post_init__(self):
        table = {tuple(k): to_number(v, self.exact) for k, v in dict(self.table).items()}
        object.__setattr__(self, "table", MappingProxyType(table))

    @classmethod
    def from_function(
        cls, scenario: Scenario, fn: Callable[[tuple, tuple], Any], exact: bool = True, tol: float = TOL
    ) -> Behavior:
        n = scenario.parties
        table = {key: fn(key[:n], key[n:]) for key in scenario.keys()}
        return cls(scenario, table, exact, tol)

    def p(self, outcomes: tuple, settings: tuple) -> Number:
        key = (*outcomes, *settings)
        try:
            return self.table[key]
        except KeyError:
            raise StructuralError(f"missing table entry {key!r}") from None

    def distribution(self, settings: tuple) -> dict[tuple, Number]:
        return {outs: self.p(outs, settings) for outs in self.scenario.events(settings)}

    def rationalized(self, digits: int) -> Behavior:
        """Round to multiples of 10**-digits, then renormalise each setting row exactly."""
        if self.exact:
            return self
        scale = 10**digits
        table = {}
        for sets in self.scenario.setting_tuples():
            row = {
                outs: Fraction(max(round(v * scale), 0), scale)
                for outs, v in self.distribution(sets).items()
            }
            total = sum(row.values())
            if total == 0:
                raise ValueError(f"row {sets!r} rounds to zero at {digits} digits")
            for outs, v in row.items():
                table[(*outs, *sets)] = v / total
        return Behavior(self.scenario, table, exact=True)

    def to_float(self) -> Behavior:
        return Behavior(self.scenario, {k: float(v) for k, v in self.table.items()}, False, self.tol)


@dataclass(frozen=True)
class Violation:
    kind: str  # "negative" | "normalization"
    index: tuple
    magnitude: Number


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class Witness:
    indices: tuple
    lhs: Number
    rhs: Number
    deviation: Number


@dataclass
class Report:
    """Pass/fail verdict for a named condition; failing iff witnesses exist."""

    condition: str
    witnesses: list[Witness] = field(default_factory=list)
    exact: bool = True

    @property
    def passed(self) -> bool:
        return not self.witnesses

    def __bool__(self) -> bool:
        return self.passed


def validate_behavior(b: Behavior) -> ValidationReport:
    sc = b.scenario
    missing = [key for key in sc.keys() if key not in b.table]
    if missing:
        raise StructuralError(f"behavior table is missing entry {missing[0]!r} ({len(missing)} missing)")
    report = ValidationReport()
    for sets in sc.setting_tuples():
        total = 0
        for outs in sc.events(sets):
            v = b.table[(*outs, *sets)]
            if v < 0 and not (not b.exact and -v <= b.tol):
                report.violations.append(Violation("negative", (*outs, *sets), v))
            total += v
        if not close(total, 1, b.exact, b.tol):
            report.violations.append(Violation("normalization", sets, total - 1))
    return report


def marginal(b: Behavior, party: int, settings: tuple) -> dict[Label, Number]:
    """Outcome distribution of one party at a joint setting tuple."""
    dist: dict[Label, Number] = {o: 0 for o in b.scenario.outcomes_of(party, settings[party])}
    for outs, v in b.distribution(settings).items():
        dist[outs[party]] += v
    return dist


def marginals(b: Behavior, x: Label, y: Label) -> tuple[dict, dict]:
    if b.scenario.parties != 2:
        raise UnsupportedScenarioError("marginals(b, x, y) is defined for two parties")
    sc = b.scenario
    for party, s in ((0, x), (1, y)):
        if s not in sc.settings[party]:
            raise IndexError(f"unknown setting {s!r} for party {party}")
    return marginal(b, 0, (x, y)), marginal(b, 1, (x, y))


def check_no_signalling(b: Behavior) -> Report:
    """Each party's marginal must not depend on the other parties' settings."""
    sc = b.scenario
    report = Report("NS", exact=b.exact)
    for party in range(sc.parties):
        for s in sc.settings[party]:
            tuples = [t for t in sc.setting_tuples() if t[party] == s]
            ref = marginal(b, party, tuples[0])
            for t in tuples[1:]:
                other = marginal(b, party, t)
                for o in ref:
                    if not close(ref[o], other[o], b.exact, b.tol):
                        report.witnesses.append(
                            Witness((party, tuples[0], t, o), ref[o], other[o], other[o] - ref[o])
                        )
    return report


@dataclass(frozen=True)
class PerfectCorrelation:
    """Certainty link b = f(a) at the setting pair (x, y)."""

    pair: tuple[Label, Label]
    mapping: tuple[tuple[Label, Label], ...]

    def f(self, a: Label) -> Label:
        return dict(self.mapping)[a]

    def as_dict(self) -> dict:
        return dict(self.mapping)


def _perfect_map(b: Behavior, x: Label, y: Label) -> dict | None:
    sc = b.scenario
    a_outs, b_outs = sc.outcomes_of(0, x), sc.outcomes_of(1, y)
    if len(a_outs) != len(b_outs):
        return None
    pa, _ = marginals(b, x, y)
    f = {}
    for a in a_outs:
        if is_zero(pa[a], b.exact, b.tol):
            continue
        hits = [o for o in b_outs if not is_zero(b.p((a, o), (x, y)), b.exact, b.tol)]
        if len(hits) != 1:
            return None
        f[a] = hits[0]
    if len(set(f.values())) != len(f):
        return None
    if not close(sum(b.p((a, f[a]), (x, y)) for a in f), 1, b.exact, b.tol):
        return None
    free_b = [o for o in sort_labels(b_outs) if o not in f.values()]
    for a in sort_labels(o for o in a_outs if o not in f):
        f[a] = free_b.pop(0)
    return f


def find_perfect_correlations(b: Behavior) -> list[PerfectCorrelation]:
    if b.scenario.parties != 2:
        raise UnsupportedScenarioError("perfect-correlation detection is bipartite")
    found = []
    for x, y in b.scenario.setting_tuples():
        f = _perfect_map(b, x, y)
        if f is not None:
            mapping = tuple((a, f[a]) for a in b.scenario.outcomes_of(0, x))
            found.append(PerfectCorrelation((x, y), mapping))
    return found


def correlator(b: Behavior, settings: tuple) -> Number:
    """E(settings) = sum of outcome products weighted by probability (±1 outcomes)."""
    for party, s in enumerate(settings):
        if set(b.scenario.outcomes_of(party, s)) != {1, -1}:
            raise UnsupportedScenarioError("correlators need ±1 outcomes")
    total = 0
    for outs, v in b.distribution(settings).items():
        sign = 1
        for o in outs:
            sign *= o
        total += sign * v
    return total


def chsh_value(b: Behavior, quad: tuple | None = None) -> Number:
    """E(x0,y0) + E(x0,y1) + E(x1,y0) - E(x1,y1) on the ordered quad."""
    if b.scenario.parties != 2:
        raise UnsupportedScenarioError("CHSH is bipartite")
    if quad is None:
        xs, ys = b.scenario.settings
        if len(xs) < 2 or len(ys) < 2:
            raise UnsupportedScenarioError("CHSH needs two settings per side")
        quad = (xs[0], xs[1], ys[0], ys[1])
    x0, x1, y0, y1 = quad
    return (
        correlator(b, (x0, y0))
        + correlator(b, (x0, y1))
        + correlator(b, (x1, y0))
        - correlator(b, (x1, y1))
    )


def chsh_variants(b: Behavior) -> dict[tuple[int, int, int], Number]:
    """All eight CHSH-type combinations on the first two settings per side:
    (-1)^g * sum_jk (-1)^(jk + a j + b k) E(x_j, y_k), keyed by (a, b, g)."""
    xs, ys = b.scenario.settings
    E = {(j, k): correlator(b, (xs[j], ys[k])) for j in range(2) for k in range(2)}
    out = {}
    for al, be, ga in itertools.product((0, 1), repeat=3):
        out[(al, be, ga)] = (-1) ** ga * sum(
            (-1) ** ((j * k + al * j + be * k) % 2) * E[(j, k)] for j in range(2) for k in range(2)
        )
    return out


def max_chsh_value(b: Behavior) -> Number:
    return max(chsh_variants(b).values())


def pr_box_behavior(xs=("x0", "x1"), ys=("y0", "y1")) -> Behavior:
    """p(a,b|x_j,y_k) = 1/2 when ab = (-1)^(jk), else 0."""
    sc = Scenario.bipartite(xs, ys)

    def fn(outs, sets):
        j, k = xs.index(sets[0]), ys.index(sets[1])
        return Fraction(1, 2) if outs[0] * outs[1] == (-1) ** (j * k) else 0

    return Behavior.from_function(sc, fn)


def uniform_behavior(scenario: Scenario) -> Behavior:
    def fn(outs, sets):
        n = 1
        for party, s in enumerate(sets):
            n *= len(scenario.outcomes_of(party, s))
        return Fraction(1, n)

    return Behavior.from_function(scenario, fn)


def compose_joint(b: Behavior, settings_dist: Mapping[tuple, Number] | None = None) -> dict[tuple, Number]:
    """Joint p(a,b,x,y) = p(a,b|x,y) p(x,y); uniform p(x,y) by default."""
    tuples = b.scenario.setting_tuples()
    if settings_dist is None:
        settings_dist = {t: Fraction(1, len(tuples)) for t in tuples}
    n = b.scenario.parties
    return {key: v * settings_dist[key[n:]] for key, v in b.table.items()}
