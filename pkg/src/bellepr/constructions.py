"""Counterexample models and constructive completions.

Settings of the discretised EPR model are ``Q1, P1`` (first particle) and
``Q2, P2`` (second particle) with outcomes in Z_N; delta densities become
Kronecker deltas with q1 + q2 = 0 and p1 - p2 = 0 taken mod N.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .assignments import (
    ContradictionCertificate,
    ValueConstraintSystem,
    check_value_assignment,
    link_constraint,
    parity_constraint,
    parity_obstruction,
    unsat_core,
)
from .errors import ExactnessError, PreconditionError
from .hvmodel import HiddenVariableModel
from .scenario import (
    TOL,
    Behavior,
    PerfectCorrelation,
    Scenario,
    close,
    correlator,
    find_perfect_correlations,
    marginals,
    sort_labels,
)

PR_SETTINGS = (("x0", "x1"), ("y0", "y1"))
EPR_SETTINGS = (("Q1", "P1"), ("Q2", "P2"))


def pr_box_model(n_lambda: int = 1) -> HiddenVariableModel:
    """Every lambda responds with p(a,b|x_j,y_k) = 1/2 when ab = (-1)^(jk)."""
    if n_lambda < 1:
        raise ValueError("n_lambda must be >= 1")
    xs, ys = PR_SETTINGS
    sc = Scenario.bipartite(xs, ys)

    def response(outs, sets, lam):
        j, k = xs.index(sets[0]), ys.index(sets[1])
        return Fraction(1, 2) if outs[0] * outs[1] == (-1) ** (j * k) else 0

    prior = {lam: Fraction(1, n_lambda) for lam in range(n_lambda)}
    return HiddenVariableModel.build(sc, prior, response)


def _grid_dist(dist, N: int, name: str) -> list[Fraction]:
    if isinstance(dist, str):
        if dist == "uniform":
            return [Fraction(1, N)] * N
        if dist.startswith("point:"):
            k = int(dist.split(":", 1)[1])
            if not 0 <= k < N:
                raise ValueError(f"{name}: point mass at {k} is off the grid Z_{N}")
            return [Fraction(int(i == k)) for i in range(N)]
        raise ValueError(f"{name}: unknown distribution spec {dist!r}")
    out = [Fraction(v) for v in dist]
    if len(out) != N or any(v < 0 for v in out) or sum(out) != 1:
        raise ValueError(f"{name} must be a probability distribution over Z_{N}")
    return out


def epr_scenario(N: int) -> Scenario:
    if N < 2:
        raise ValueError("grid size N must be >= 2")
    return Scenario.bipartite(*EPR_SETTINGS, outcomes=range(N))


def epr_grid_model(N: int, mu="uniform", nu="uniform") -> HiddenVariableModel:
    """Single-lambda model with the joint densities of the position-momentum
    counterexample on Z_N."""
    sc = epr_scenario(N)
    mu, nu = _grid_dist(mu, N, "mu"), _grid_dist(nu, N, "nu")

    def response(outs, sets, lam):
        u, v = outs
        match sets:
            case ("Q1", "Q2"):
                return mu[u] if (u + v) % N == 0 else 0
            case ("P1", "P2"):
                return nu[u] if (u - v) % N == 0 else 0
            case ("Q1", "P2"):
                return mu[u] * nu[v]
            case ("P1", "Q2"):
                return nu[u] * mu[(-v) % N]

    return HiddenVariableModel.build(sc, {0: Fraction(1)}, response)


def epr_deterministic_completion(N: int, mu="uniform", nu="uniform") -> HiddenVariableModel:
    """Phase-space ensemble: lambda = (q1, p1) with weight mu(q1) nu(p1) and
    predetermined q2 = -q1, p2 = p1."""
    sc = epr_scenario(N)
    mu, nu = _grid_dist(mu, N, "mu"), _grid_dist(nu, N, "nu")
    prior = {(q, p): mu[q] * nu[p] for q in range(N) for p in range(N) if mu[q] * nu[p]}
    values = {
        lam: {"Q1": lam[0], "P1": lam[1], "Q2": (-lam[0]) % N, "P2": lam[1]} for lam in prior
    }

    def response(outs, sets, lam):
        v = values[lam]
        return int(v[sets[0]] == outs[0] and v[sets[1]] == outs[1])

    return HiddenVariableModel.build(sc, prior, response)


def hall_brans_model(b: Behavior, settings_dist: Mapping[tuple, Fraction] | None = None) -> HiddenVariableModel:
    """Deterministic, parameter-independent model reproducing any behavior.

    lambda = (x, y, a, b) over the support of ``b``; p(lambda) = p(x,y) p(a,b|x,y)
    and p(x',y'|lambda) puts all weight on (x, y).  Away from its own setting
    pair each lambda answers with the smallest outcome label.
    """
    if not b.exact:
        raise ExactnessError("hall_brans_model needs an exact-mode behavior")
    sc = b.scenario
    if sc.parties != 2:
        raise PreconditionError("hall_brans_model is bipartite")
    tuples = sc.setting_tuples()
    if settings_dist is None:
        settings_dist = {t: Fraction(1, len(tuples)) for t in tuples}
    if any(settings_dist.get(t, 0) <= 0 for t in tuples) or sum(settings_dist.values()) != 1:
        raise PreconditionError("settings distribution must have full support and sum to 1")
    prior = {}
    for key, v in b.table.items():
        if v > 0:
            a, bb, x, y = key
            prior[(x, y, a, bb)] = settings_dist[(x, y)] * v

    def answer(party, setting, lam):
        x, y, a, bb = lam
        if setting == (x, y)[party]:
            return (a, bb)[party]
        return sort_labels(sc.outcomes_of(party, setting))[0]

    def response(outs, sets, lam):
        return int(outs[0] == answer(0, sets[0], lam) and outs[1] == answer(1, sets[1], lam))

    def weights(sets, lam):
        return int(sets == lam[:2])

    return HiddenVariableModel.build(sc, prior, response, weights)


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or abs(np.linalg.norm(v) - 1) > TOL:
        raise ValueError(f"{v!r} is not a unit 3-vector")
    return v


@dataclass(frozen=True)
class SequentialOnticModel:
    """B measures first on a totally mixed spin; its outcome b along y sends
    region A's spin into the -b eigenstate along y; A then measures along x.

    Ontic states are Bloch vectors; the totally mixed state is the origin.
    """

    a_dirs: tuple
    b_dirs: tuple
    xs: tuple
    ys: tuple

    def b_outcome_dist(self, y) -> dict[int, float]:
        """B's outcome distribution before anything is measured (initial B state = origin)."""
        r = np.zeros(3)
        n = self.b_dirs[self.ys.index(y)]
        return {b: 0.5 * (1 + b * float(r @ n)) for b in (1, -1)}

    def update(self, y, b: int) -> tuple[float, ...]:
        """Region-A ontic state after B obtains ``b`` along ``y``."""
        return tuple(float(-b * c) for c in self.b_dirs[self.ys.index(y)])

    def a_response(self, x, state) -> dict[int, float]:
        n = self.a_dirs[self.xs.index(x)]
        return {a: 0.5 * (1 + a * float(np.dot(n, state))) for a in (1, -1)}

    def region_a_state_dist(self, y) -> dict[tuple, Fraction]:
        """Distribution of A's ontic state after B measures ``y``; the weights are exactly 1/2."""
        out: dict[tuple, Fraction] = {}
        for b, pb in self.b_outcome_dist(y).items():
            s = self.update(y, b)
            out[s] = out.get(s, Fraction(0)) + Fraction(pb).limit_denominator(2)
        return out

    def joint(self, x, y) -> dict[tuple[int, int], float]:
        out = {}
        for b, pb in self.b_outcome_dist(y).items():
            for a, pa in self.a_response(x, self.update(y, b)).items():
                out[(a, b)] = pb * pa
        return out

    def region_b_stats(self, x=None, y=None) -> dict[int, float]:
        """B's outcome statistics when A measures ``x`` (or nothing, if None)."""
        if x is None:
            return self.b_outcome_dist(y)
        j = self.joint(x, y)
        return {b: sum(v for (a, bb), v in j.items() if bb == b) for b in (1, -1)}

    def scenario(self) -> Scenario:
        return Scenario.bipartite(self.xs, self.ys)

    def behavior(self) -> Behavior:
        return Behavior.from_function(
            self.scenario(), lambda outs, sets: self.joint(*sets)[outs], exact=False
        )

    def flatten(self, lambda_includes_setting: bool = False) -> HiddenVariableModel:
        """HiddenVariableModel with lambda = b (B's outcome, setting-independent
        weights), or lambda = (y, b) with setting-dependent weights."""
        sc = self.scenario()

        def response(outs, sets, lam):
            b = lam[1] if lambda_includes_setting else lam
            if outs[1] != b:
                return 0.0
            return self.a_response(sets[0], self.update(sets[1], b))[outs[0]]

        if not lambda_includes_setting:
            return HiddenVariableModel.build(sc, {1: 0.5, -1: 0.5}, response, exact=False)
        ny, nx = len(self.ys), len(self.xs)
        prior = {(y, b): 0.5 / ny for y in self.ys for b in (1, -1)}

        def weights(sets, lam):
            return 1.0 / nx if sets[1] == lam[0] else 0.0

        return HiddenVariableModel.build(sc, prior, response, weights, exact=False)

    def disturbance(self, tol: float = TOL) -> dict[str, object]:
        """Compare each region's ontic/statistical state across the other region's settings.

        ``A_disturbed_by_B`` carries an exact witness (y, y', state, weight, weight').
        """
        a_witness = None
        for i, y in enumerate(self.ys):
            for y2 in self.ys[i + 1:]:
                d1, d2 = self.region_a_state_dist(y), self.region_a_state_dist(y2)
                for s, w in d1.items():
                    w2 = next((v for t, v in d2.items() if np.allclose(t, s, atol=tol)), Fraction(0))
                    if w != w2:
                        a_witness = (y, y2, s, w, w2)
                        break
                if a_witness:
                    break
            if a_witness:
                break
        b_dev = 0.0
        for y in self.ys:
            ref = self.region_b_stats(None, y)
            for x in self.xs:
                got = self.region_b_stats(x, y)
                b_dev = max(b_dev, max(abs(got[b] - ref[b]) for b in ref))
        return {
            "A_disturbed_by_B": a_witness is not None,
            "A_witness": a_witness,
            "B_disturbed_by_A": b_dev > tol,
            "B_max_deviation": b_dev,
        }


def example1_model(a_dirs: Sequence, b_dirs: Sequence | None = None, xs=None, ys=None) -> SequentialOnticModel:
    """One-way signalling model reproducing singlet statistics (1 - ab x·y)/4.

    With a single direction list both regions measure along the same set.
    """
    a = tuple(_unit(d) for d in a_dirs)
    b = a if b_dirs is None else tuple(_unit(d) for d in b_dirs)
    xs = tuple(xs or (f"x{i}" for i in range(len(a))))
    ys = tuple(ys or (f"y{i}" for i in range(len(b))))
    return SequentialOnticModel(a, b, xs, ys)


def _var(party: int, setting) -> str:
    return f"{'AB'[party]}:{setting}"


def pairs_system(b: Behavior, pairs: Sequence[PerfectCorrelation]) -> ValueConstraintSystem:
    """Links b(y) = f(a(x)) over predetermined values of every setting."""
    sc = b.scenario
    variables = {
        _var(party, s): sc.outcomes_of(party, s) for party in range(2) for s in sc.settings[party]
    }
    cons = [
        link_constraint(_var(0, pc.pair[0]), _var(1, pc.pair[1]), pc.as_dict(), f"{pc.pair[0]}~{pc.pair[1]}")
        for pc in pairs
    ]
    return ValueConstraintSystem(variables, cons)


def _verify_pairs(b: Behavior, pairs: Sequence[PerfectCorrelation]):
    for pc in pairs:
        x, y = pc.pair
        f = pc.as_dict()
        if set(f) != set(b.scenario.outcomes_of(0, x)) or sorted(map(repr, f.values())) != sorted(
            map(repr, b.scenario.outcomes_of(1, y))
        ):
            raise PreconditionError(f"map at {pc.pair} is not a bijection between outcome sets")
        mass = sum(b.p((a, f[a]), (x, y)) for a in f)
        if not close(mass, 1, b.exact, b.tol):
            raise PreconditionError(f"{pc.pair} is not perfectly correlated under f (mass {mass})")


def counterfactual_completion(
    b: Behavior, pairs: Sequence[PerfectCorrelation]
) -> HiddenVariableModel | ContradictionCertificate:
    """Predetermined values for every setting consistent with all perfect correlations.

    Returns a deterministic, parameter-independent model with uniform setting
    weights reproducing ``b`` on the given pairs, or a certificate that no
    joint assignment satisfies the links.
    """
    if b.scenario.parties != 2:
        raise PreconditionError("counterfactual completion is bipartite")
    _verify_pairs(b, pairs)
    system = pairs_system(b, pairs)
    result = check_value_assignment(system)
    if not result.satisfiable:
        core = system.subsystem(unsat_core(system))
        return ContradictionCertificate(core, core.search_space(), result.nodes, parity_obstruction(core))

    sc = b.scenario
    adj: dict[str, list[tuple[str, dict]]] = {v: [] for v in system.variables}
    pair_of: dict[str, tuple] = {}
    for pc in pairs:
        u, v = _var(0, pc.pair[0]), _var(1, pc.pair[1])
        f = pc.as_dict()
        adj[u].append((v, f))
        adj[v].append((u, {w: k for k, w in f.items()}))
        pair_of.setdefault(u, pc.pair)
        pair_of.setdefault(v, pc.pair)

    # connected components; each is fixed by the value of its root
    seen: set[str] = set()
    components = []
    for root in system.variables:
        if root in seen:
            continue
        seen.add(root)
        comp = [root]
        queue = deque([root])
        while queue:
            for nb, _ in adj[queue.popleft()]:
                if nb not in seen:
                    seen.add(nb)
                    comp.append(nb)
                    queue.append(nb)
        components.append(comp)

    def root_dist(root: str) -> dict:
        if root not in pair_of:
            party = "AB".index(root[0])
            setting = next(s for s in sc.settings[party] if _var(party, s) == root)
            first = sort_labels(sc.outcomes_of(party, setting))[0]
            return {first: Fraction(1) if b.exact else 1.0}
        x, y = pair_of[root]
        pa, pb = marginals(b, x, y)
        return pa if root.startswith("A:") else pb

    def spread(root: str, value) -> dict | None:
        vals = {root: value}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for nb, f in adj[u]:
                w = f[vals[u]]
                if nb in vals:
                    if vals[nb] != w:
                        return None
                else:
                    vals[nb] = w
                    queue.append(nb)
        return vals

    comp_choices = []
    for comp in components:
        choices = []
        for value, weight in root_dist(comp[0]).items():
            if not weight:
                continue
            vals = spread(comp[0], value)
            if vals is None:
                raise PreconditionError(f"value {value!r} of {comp[0]} has weight but violates the links")
            choices.append((vals, weight))
        comp_choices.append(choices)

    # induced marginals must match every constrained pair
    for pc in pairs:
        x, y = pc.pair
        u = _var(0, x)
        ci = next(i for i, c in enumerate(components) if u in c)
        induced: dict = {}
        for vals, w in comp_choices[ci]:
            induced[vals[u]] = induced.get(vals[u], 0) + w
        pa, _ = marginals(b, x, y)
        for a, v in pa.items():
            if not close(induced.get(a, 0), v, b.exact, b.tol):
                raise PreconditionError(f"marginal of {u} at {pc.pair} disagrees with other pairs")

    order = list(system.variables)
    prior: dict[tuple, Fraction | float] = {(): Fraction(1) if b.exact else 1.0}
    partial = {(): {}}
    for choices in comp_choices:
        new_prior, new_partial = {}, {}
        for key, w in prior.items():
            for i, (vals, cw) in enumerate(choices):
                k = (*key, i)
                new_prior[k] = w * cw
                new_partial[k] = {**partial[key], **vals}
        prior, partial = new_prior, new_partial
    labels = {k: tuple(partial[k][v] for v in order) for k in prior}
    lam_prior = {labels[k]: w for k, w in prior.items()}
    index = {v: i for i, v in enumerate(order)}

    def response(outs, sets, lam):
        return int(lam[index[_var(0, sets[0])]] == outs[0] and lam[index[_var(1, sets[1])]] == outs[1])

    return HiddenVariableModel.build(sc, lam_prior, response, exact=b.exact)


def correlation_constraints(b: Behavior) -> ValueConstraintSystem:
    """Constraints on predetermined values implied by the certain correlations of ``b``.

    Two parties: one bijection link per perfectly correlated pair.  Three
    parties (±1 outcomes): one parity constraint per context with |E| = 1.
    """
    if b.scenario.parties == 2:
        return pairs_system(b, find_perfect_correlations(b))
    sc = b.scenario
    names = {(p, s): f"{'ABC'[p]}:{s}" for p in range(sc.parties) for s in sc.settings[p]}
    cons = []
    for sets in sc.setting_tuples():
        e = correlator(b, sets)
        if close(abs(e), 1, b.exact, b.tol):
            sign = 1 if e > 0 else -1
            cons.append(parity_constraint([names[(p, s)] for p, s in enumerate(sets)], sign, "".join(map(str, sets))))
    return ValueConstraintSystem({n: (1, -1) for n in names.values()}, cons)
