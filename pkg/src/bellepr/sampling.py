"""Seeded random instances for property checks and reproduction runs."""
from __future__ import annotations

import random
from fractions import Fraction

from .hvmodel import HiddenVariableModel
from .scenario import Behavior, Scenario


def random_distribution(rng: random.Random, support: list, max_weight: int = 12, sparsity: float = 0.0) -> dict:
    """Exact random distribution on ``support``; entries are dropped with
    probability ``sparsity`` (at least one survives)."""
    weights = [0 if rng.random() < sparsity else rng.randint(1, max_weight) for _ in support]
    if not any(weights):
        weights[rng.randrange(len(weights))] = 1
    total = sum(weights)
    return {s: Fraction(w, total) for s, w in zip(support, weights)}


def random_behavior(rng: random.Random, scenario: Scenario, sparsity: float = 0.3) -> Behavior:
    """Independent random rows; generally signalling."""
    table = {}
    for sets in scenario.setting_tuples():
        for outs, v in random_distribution(rng, scenario.events(sets), sparsity=sparsity).items():
            table[(*outs, *sets)] = v
    return Behavior(scenario, table)


CHSH_SCENARIO = Scenario.bipartite(("x0", "x1"), ("y0", "y1"))


def deterministic_vertices(scenario: Scenario = CHSH_SCENARIO) -> list[Behavior]:
    xs, ys = scenario.settings
    out = []
    for a0 in (1, -1):
        for a1 in (1, -1):
            for b0 in (1, -1):
                for b1 in (1, -1):
                    A, B = dict(zip(xs, (a0, a1))), dict(zip(ys, (b0, b1)))
                    out.append(
                        Behavior.from_function(scenario, lambda o, s, A=A, B=B: int(o[0] == A[s[0]] and o[1] == B[s[1]]))
                    )
    return out


def pr_vertices(scenario: Scenario = CHSH_SCENARIO) -> list[Behavior]:
    """The eight relabelled PR boxes: ab = (-1)^(jk + alpha j + beta k + gamma)."""
    xs, ys = scenario.settings
    out = []
    for alpha in (0, 1):
        for beta in (0, 1):
            for gamma in (0, 1):
                def fn(o, s, al=alpha, be=beta, ga=gamma):
                    j, k = xs.index(s[0]), ys.index(s[1])
                    return Fraction(1, 2) if o[0] * o[1] == (-1) ** (j * k + al * j + be * k + ga) else 0
                out.append(Behavior.from_function(scenario, fn))
    return out


def mixture(parts: list[tuple[Fraction, Behavior]]) -> Behavior:
    sc = parts[0][1].scenario
    return Behavior(sc, {k: sum(w * b.table[k] for w, b in parts) for k in sc.keys()})


def random_no_signalling_behavior(rng: random.Random) -> Behavior:
    """Mixture of a few deterministic vertices and, half the time, one PR vertex."""
    det, pr = deterministic_vertices(), pr_vertices()
    chosen = rng.sample(det, rng.randint(1, 4))
    if rng.random() < 0.5:
        chosen.append(rng.choice(pr))
    weights = random_distribution(rng, list(range(len(chosen))))
    return mixture([(weights[i], b) for i, b in enumerate(chosen)])


MODEL_KINDS = ("general", "product", "local", "deterministic", "deterministic-local")


def _point(rng: random.Random, labels) -> dict:
    pick = rng.choice(list(labels))
    return {o: Fraction(int(o == pick)) for o in labels}


def random_model(
    rng: random.Random,
    scenario: Scenario = CHSH_SCENARIO,
    n_lambda: int = 3,
    kind: str = "general",
    weights: str = "uniform",
    point_bias: float = 0.0,
) -> HiddenVariableModel:
    """Random exact bipartite model.

    kind: "general" (arbitrary joint responses), "product" (p(a|x,y,l) p(b|x,y,l)),
    "local" (p(a|x,l) p(b|y,l)), "deterministic" (a, b functions of (x, y, l)),
    "deterministic-local" (a(x, l), b(y, l)).
    weights: "uniform", "shared" (one random p(x,y) for all l) or "random".
    ``point_bias`` is the chance that a product/local factor is a point mass.
    """
    tuples = scenario.setting_tuples()
    lams = list(range(n_lambda))
    prior = random_distribution(rng, lams)

    def factor(labels):
        if rng.random() < point_bias:
            return _point(rng, labels)
        return random_distribution(rng, list(labels), sparsity=0.2)

    response = {}
    for lam in lams:
        loc_a = {x: factor(scenario.outcomes_of(0, x)) for x in scenario.settings[0]}
        loc_b = {y: factor(scenario.outcomes_of(1, y)) for y in scenario.settings[1]}
        det_a = {x: _point(rng, scenario.outcomes_of(0, x)) for x in scenario.settings[0]}
        det_b = {y: _point(rng, scenario.outcomes_of(1, y)) for y in scenario.settings[1]}
        for x, y in tuples:
            events = scenario.events((x, y))
            if kind == "general":
                dist = random_distribution(rng, events, sparsity=0.3)
            elif kind in ("product", "deterministic"):
                fa = factor(scenario.outcomes_of(0, x)) if kind == "product" else _point(rng, scenario.outcomes_of(0, x))
                fb = factor(scenario.outcomes_of(1, y)) if kind == "product" else _point(rng, scenario.outcomes_of(1, y))
                dist = {(a, b): fa[a] * fb[b] for a, b in events}
            elif kind == "local":
                dist = {(a, b): loc_a[x][a] * loc_b[y][b] for a, b in events}
            elif kind == "deterministic-local":
                dist = {(a, b): det_a[x][a] * det_b[y][b] for a, b in events}
            else:
                raise ValueError(f"unknown model kind {kind!r}")
            for (a, b), v in dist.items():
                if v:
                    response[(a, b, x, y, lam)] = v

    setting_weights = {}
    shared = random_distribution(rng, tuples, sparsity=0.0)
    for lam in lams:
        if weights == "uniform":
            w = {t: Fraction(1, len(tuples)) for t in tuples}
        elif weights == "shared":
            w = shared
        else:
            w = random_distribution(rng, tuples, sparsity=0.3)
        for t, v in w.items():
            if v:
                setting_weights[(*t, lam)] = v
    return HiddenVariableModel(scenario, lams, prior, setting_weights, response)
