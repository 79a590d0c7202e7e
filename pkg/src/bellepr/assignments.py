"""Predetermined-value assignments: finite constraint systems and KS colouring."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from .errors import StructuralError

ENUMERATION_CAP = 1 << 24


@dataclass(frozen=True)
class Constraint:
    scope: tuple[str, ...]
    allowed: frozenset[tuple]
    label: str = ""
    parity: int | None = None  # product of the ±1 scope values, when a parity constraint

    def holds(self, assignment: Mapping[str, Hashable]) -> bool:
        return tuple(assignment[v] for v in self.scope) in self.allowed


def parity_constraint(scope: Sequence[str], sign: int, label: str = "") -> Constraint:
    allowed = frozenset(t for t in itertools.product((1, -1), repeat=len(scope)) if math.prod(t) == sign)
    return Constraint(tuple(scope), allowed, label, parity=sign)


def link_constraint(u: str, v: str, mapping: Mapping[Hashable, Hashable], label: str = "") -> Constraint:
    """v = f(u).  On ±1 alphabets f = ±id is also recorded as the parity u·v = ±1."""
    parity = None
    if set(mapping) == {1, -1}:
        if all(mapping[k] == k for k in mapping):
            parity = 1
        elif all(mapping[k] == -k for k in mapping):
            parity = -1
    return Constraint((u, v), frozenset(mapping.items()), label, parity=parity)


@dataclass(frozen=True)
class ValueConstraintSystem:
    variables: Mapping[str, tuple]
    constraints: tuple[Constraint, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", {k: tuple(v) for k, v in dict(self.variables).items()})
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for c in self.constraints:
            for v in c.scope:
                if v not in self.variables:
                    raise StructuralError(f"constraint {c.label or c.scope} references undeclared {v!r}")

    def subsystem(self, indices: Sequence[int]) -> ValueConstraintSystem:
        cons = [self.constraints[i] for i in indices]
        used = {v for c in cons for v in c.scope}
        return ValueConstraintSystem({k: a for k, a in self.variables.items() if k in used}, cons)

    def without(self, index: int) -> ValueConstraintSystem:
        return ValueConstraintSystem(
            self.variables, [c for i, c in enumerate(self.constraints) if i != index]
        )

    def search_space(self) -> int:
        return math.prod(len(a) for a in self.variables.values())

    def satisfied_by(self, assignment: Mapping[str, Hashable]) -> bool:
        return all(assignment.get(v) in a for v, a in self.variables.items()) and all(
            c.holds(assignment) for c in self.constraints
        )

    def enumerate_solutions(self):
        names = list(self.variables)
        for values in itertools.product(*(self.variables[n] for n in names)):
            assignment = dict(zip(names, values))
            if all(c.holds(assignment) for c in self.constraints):
                yield assignment


@dataclass
class ContradictionCertificate:
    """Unsatisfiable constraint subset with the size of the space it rules out."""

    system: ValueConstraintSystem
    search_space: int
    nodes: int
    parity_subset: tuple[int, ...] | None = None

    def replay(self, cap: int = ENUMERATION_CAP) -> bool:
        """Enumerate every assignment of the subset's variables; True iff none satisfies it."""
        if self.search_space > cap:
            raise MemoryError(f"search space {self.search_space} exceeds replay cap {cap}")
        return next(self.system.enumerate_solutions(), None) is None


@dataclass
class AssignmentResult:
    satisfiable: bool
    assignment: dict | None = None
    certificate: ContradictionCertificate | None = None
    nodes: int = 0


def _backtrack(system: ValueConstraintSystem):
    names = sorted(system.variables, key=lambda v: -sum(v in c.scope for c in system.constraints))
    order = {v: i for i, v in enumerate(names)}
    # each constraint is checked once its last variable (in search order) is set
    closing: dict[str, list[Constraint]] = {v: [] for v in names}
    for c in system.constraints:
        if c.scope:
            closing[max(c.scope, key=order.__getitem__)].append(c)
    empty = [c for c in system.constraints if not c.scope]
    if any(() not in c.allowed for c in empty):
        return None, 0
    assignment: dict = {}
    nodes = 0

    def rec(i: int) -> bool:
        nonlocal nodes
        if i == len(names):
            return True
        v = names[i]
        for val in system.variables[v]:
            nodes += 1
            assignment[v] = val
            if all(c.holds(assignment) for c in closing[v]) and rec(i + 1):
                return True
        del assignment[v]
        return False

    found = rec(0)
    return (dict(assignment) if found else None), nodes


def parity_obstruction(system: ValueConstraintSystem) -> tuple[int, ...] | None:
    """Constraints whose product gives 1 = -1, found by GF(2) elimination, if all
    constraints are parity constraints on ±1 variables."""
    if not system.constraints or any(c.parity is None for c in system.constraints):
        return None
    if any(set(a) != {1, -1} for a in system.variables.values()):
        return None
    names = list(system.variables)
    rows = []
    for i, c in enumerate(system.constraints):
        bits = 0
        for v in c.scope:
            bits ^= 1 << names.index(v)
        rows.append([bits, int(c.parity == -1), 1 << i])
    pivots: dict[int, list[int]] = {}  # lowest set bit -> row
    for row in rows:
        for bit in range(len(names)):
            if row[0] >> bit & 1 and bit in pivots:
                p = pivots[bit]
                row = [row[0] ^ p[0], row[1] ^ p[1], row[2] ^ p[2]]
        if row[0]:
            pivots[(row[0] & -row[0]).bit_length() - 1] = row
        elif row[1]:
            return tuple(i for i in range(len(rows)) if row[2] >> i & 1)
    return None


def check_value_assignment(system: ValueConstraintSystem) -> AssignmentResult:
    assignment, nodes = _backtrack(system)
    if assignment is not None:
        if not system.satisfied_by(assignment):
            raise AssertionError("backtracking returned a non-solution")
        return AssignmentResult(True, assignment=assignment, nodes=nodes)
    cert = ContradictionCertificate(system, system.search_space(), nodes, parity_obstruction(system))
    return AssignmentResult(False, certificate=cert, nodes=nodes)


def unsat_core(system: ValueConstraintSystem) -> list[int]:
    """Deletion-minimal unsatisfiable subset of constraint indices."""
    keep = list(range(len(system.constraints)))
    for i in list(keep):
        trial = [j for j in keep if j != i]
        if _backtrack(system.subsystem(trial))[0] is None:
            keep = trial
    return keep


class DegenerateDirectionsError(ValueError):
    pass


@dataclass
class KSCertificate:
    branches: int
    edges: list[tuple[int, int]]
    triples: list[tuple[int, int, int]]


@dataclass
class KSResult:
    colorable: bool
    assignment: dict[int, int] | None = None
    certificate: KSCertificate | None = None
    edges: list[tuple[int, int]] = field(default_factory=list)
    triples: list[tuple[int, int, int]] = field(default_factory=list)


def orthogonality_graph(directions, tol: float = 1e-9):
    """Normalise directions and freeze their orthogonal pairs and triples."""
    v = np.asarray(directions, dtype=float).reshape(-1, 3) if len(directions) else np.zeros((0, 3))
    norms = np.linalg.norm(v, axis=1)
    if np.any(norms < tol):
        raise DegenerateDirectionsError("zero direction vector")
    v = v / norms[:, None]
    g = np.abs(v @ v.T)
    n = len(v)
    for i, j in itertools.combinations(range(n), 2):
        if g[i, j] > 1 - tol:
            raise DegenerateDirectionsError(f"directions {i} and {j} are parallel")
    edges = [(i, j) for i, j in itertools.combinations(range(n), 2) if g[i, j] < tol]
    adj = {i: set() for i in range(n)}
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    triples = [
        (i, j, k) for i, j in edges for k in sorted(adj[i] & adj[j]) if k > j
    ]
    return n, edges, triples


def ks_constraint_system(directions, tol: float = 1e-9) -> ValueConstraintSystem:
    """The 101 rule as a generic constraint system (used as an independent check)."""
    n, edges, triples = orthogonality_graph(directions, tol)
    names = [f"v{i}" for i in range(n)]
    cons = [
        Constraint((names[i], names[j]), frozenset({(0, 1), (1, 0), (1, 1)}), f"pair {i},{j}")
        for i, j in edges
    ]
    one_zero = frozenset({(0, 1, 1), (1, 0, 1), (1, 1, 0)})
    cons += [Constraint(tuple(names[t] for t in tri), one_zero, f"triple {tri}") for tri in triples]
    return ValueConstraintSystem({nm: (0, 1) for nm in names}, cons)


def ks_colorable(directions, tol: float = 1e-9) -> KSResult:
    """Backtracking with unit propagation over {0,1} colourings: each orthogonal
    triple holds exactly one 0 and no orthogonal pair holds two 0s."""
    n, edges, triples = orthogonality_graph(directions, tol)
    adj = {i: set() for i in range(n)}
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    in_triples = {i: [] for i in range(n)}
    for t in triples:
        for i in t:
            in_triples[i].append(t)

    def propagate(assign: dict, queue: list) -> bool:
        while queue:
            v = queue.pop()
            if assign[v] == 0:
                for u in adj[v]:
                    if assign.get(u) == 0:
                        return False
                    if u not in assign:
                        assign[u] = 1
                        queue.append(u)
            for t in in_triples[v]:
                vals = [assign.get(i) for i in t]
                zeros = vals.count(0)
                free = [i for i in t if i not in assign]
                if zeros > 1 or (zeros == 0 and not free):
                    return False
                if zeros == 1:
                    for u in free:
                        assign[u] = 1
                        queue.append(u)
                elif len(free) == 1:
                    assign[free[0]] = 0
                    queue.append(free[0])
        return True

    order = sorted(range(n), key=lambda i: (-len(in_triples[i]), -len(adj[i]), i))
    branches = 0

    def solve(assign: dict) -> dict | None:
        nonlocal branches
        v = next((i for i in order if i not in assign), None)
        if v is None:
            return assign
        for val in (0, 1):
            branches += 1
            trial = dict(assign)
            trial[v] = val
            if propagate(trial, [v]):
                out = solve(trial)
                if out is not None:
                    return out
        return None

    colouring = solve({})
    if colouring is None:
        return KSResult(False, certificate=KSCertificate(branches, edges, triples), edges=edges, triples=triples)
    for i, j in edges:
        if colouring[i] == 0 and colouring[j] == 0:
            raise AssertionError("colouring puts 0 on an orthogonal pair")
    for t in triples:
        if sorted(colouring[i] for i in t) != [0, 1, 1]:
            raise AssertionError("colouring breaks the one-zero rule on a triple")
    return KSResult(True, assignment=dict(sorted(colouring.items())), edges=edges, triples=triples)


def peres33_directions() -> np.ndarray:
    """Peres' 33 rays: components from {0, ±1, ±sqrt 2}, loaded from the bundled data file."""
    import json
    from importlib import resources

    raw = json.loads(resources.files("bellepr").joinpath("data/peres33.json").read_text())
    r2 = math.sqrt(2)
    parse = {"0": 0.0, "1": 1.0, "-1": -1.0, "r2": r2, "-r2": -r2}
    return np.array([[parse[c] for c in vec] for vec in raw["directions"]])
