"""Dense state-vector Born-rule behaviors for the singlet, GHZ and spin-1 pair states."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .assignments import ValueConstraintSystem, parity_constraint
from .scenario import TOL, Behavior, Scenario, correlator

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# spin-1 in the |m = 1, 0, -1> basis
_S = 1 / np.sqrt(2)
SPIN1 = {
    "x": _S * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex),
    "y": _S * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex),
    "z": np.diag([1, 0, -1]).astype(complex),
}

SPIN1_OUTCOMES = ((0, 1, 1), (1, 0, 1), (1, 1, 0))


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        if abs(np.linalg.norm(amps) - 1) > TOL:
            raise ValueError(f"state norm {np.linalg.norm(amps)} is not 1")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dimension(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True)
class MeasurementSetting:
    label: object
    projectors: tuple[np.ndarray, ...]
    outcomes: tuple

    def __post_init__(self):
        projs = tuple(np.asarray(p, dtype=complex) for p in self.projectors)
        object.__setattr__(self, "projectors", projs)
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        if len(projs) != len(self.outcomes):
            raise ValueError("one projector per outcome required")
        d = projs[0].shape[0]
        for i, p in enumerate(projs):
            if p.shape != (d, d) or not np.allclose(p, p.conj().T, atol=TOL):
                raise ValueError(f"projector {i} of {self.label!r} is not Hermitian")
            if not np.allclose(p @ p, p, atol=TOL):
                raise ValueError(f"projector {i} of {self.label!r} is not idempotent")
            for q in projs[i + 1:]:
                if not np.allclose(p @ q, 0, atol=TOL):
                    raise ValueError(f"projectors of {self.label!r} are not orthogonal")
        if not np.allclose(sum(projs), np.eye(d), atol=TOL):
            raise ValueError(f"projectors of {self.label!r} do not sum to the identity")

    @property
    def dimension(self) -> int:
        return self.projectors[0].shape[0]


def _unit(v, tol=TOL) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or abs(np.linalg.norm(v) - 1) > tol:
        raise ValueError(f"{v!r} is not a unit 3-vector")
    return v


def spin_half_setting(label, direction) -> MeasurementSetting:
    """Spin along a unit direction: projectors (I ± n·sigma)/2 for outcomes ±1."""
    n = _unit(direction)
    ns = n[0] * PAULI["X"] + n[1] * PAULI["Y"] + n[2] * PAULI["Z"]
    return MeasurementSetting(label, ((PAULI["I"] + ns) / 2, (PAULI["I"] - ns) / 2), (1, -1))


def pauli_setting(label: str) -> MeasurementSetting:
    """Measurement of a Pauli observable, outcomes ±1."""
    P = PAULI[label]
    return MeasurementSetting(label, ((PAULI["I"] + P) / 2, (PAULI["I"] - P) / 2), (1, -1))


def spin1_triple_setting(label, frame) -> MeasurementSetting:
    """Joint measurement of squared spin-1 components along an orthonormal frame.

    The outcome (s1², s2², s3²) has exactly one zero; the projector for a
    zero along axis k is I - (n_k·S)².
    """
    frame = np.asarray(frame, dtype=float)
    if frame.shape != (3, 3) or not np.allclose(frame @ frame.T, np.eye(3), atol=TOL):
        raise ValueError(f"{label!r} is not an orthonormal triple")
    projs = []
    for k in range(3):
        n = frame[k]
        Sn = n[0] * SPIN1["x"] + n[1] * SPIN1["y"] + n[2] * SPIN1["z"]
        projs.append(np.eye(3) - Sn @ Sn)
    outcomes = tuple(tuple(0 if i == k else 1 for i in range(3)) for k in range(3))
    return MeasurementSetting(label, tuple(projs), outcomes)


def born_behavior(state: StateVector, *party_settings: Sequence[MeasurementSetting]) -> Behavior:
    """p(outcomes|settings) = <psi| tensor of projectors |psi>, float mode."""
    dims = [ms[0].dimension for ms in party_settings]
    if int(np.prod(dims)) != state.dimension:
        raise ValueError(f"state dimension {state.dimension} != product of local dimensions {dims}")
    for ms in party_settings:
        if any(m.dimension != ms[0].dimension for m in ms):
            raise ValueError("settings of one party act on different dimensions")
    scenario = Scenario.create(
        [[m.label for m in ms] for ms in party_settings],
        per_setting=[[m.outcomes for m in ms] for ms in party_settings],
    )
    psi = state.amplitudes.reshape(dims)
    table = {}
    for combo in itertools.product(*party_settings):
        for idx in itertools.product(*(range(len(m.outcomes)) for m in combo)):
            phi = psi
            for axis, (m, i) in enumerate(zip(combo, idx)):
                phi = np.moveaxis(np.tensordot(m.projectors[i], phi, axes=([1], [axis])), 0, axis)
            p = float(np.real(np.vdot(psi, phi)))
            outs = tuple(m.outcomes[i] for m, i in zip(combo, idx))
            table[(*outs, *(m.label for m in combo))] = max(p, 0.0)
    return Behavior(scenario, table, exact=False)


def singlet_state() -> StateVector:
    return StateVector(np.array([0, 1, -1, 0]) / np.sqrt(2))


def ghz_state() -> StateVector:
    """(|000> - |111>)/sqrt 2 in the Z basis."""
    v = np.zeros(8, dtype=complex)
    v[0], v[7] = 1, -1
    return StateVector(v / np.sqrt(2))


def spin1_pair_state() -> StateVector:
    """3^(-1/2)(|1,-1> + |-1,1> - |0,0>): two spin-1 particles with zero total spin."""
    v = np.zeros(9, dtype=complex)
    v[0 * 3 + 2] = 1
    v[2 * 3 + 0] = 1
    v[1 * 3 + 1] = -1
    return StateVector(v / np.sqrt(3))


def singlet_behavior(a_dirs, b_dirs, a_labels=None, b_labels=None) -> Behavior:
    """Closed form p(a,b|x,y) = (1 - ab x·y)/4."""
    a_dirs = [_unit(d) for d in a_dirs]
    b_dirs = [_unit(d) for d in b_dirs]
    xs = list(a_labels or [f"x{i}" for i in range(len(a_dirs))])
    ys = list(b_labels or [f"y{i}" for i in range(len(b_dirs))])
    sc = Scenario.bipartite(xs, ys)

    def fn(outs, sets):
        dot = float(a_dirs[xs.index(sets[0])] @ b_dirs[ys.index(sets[1])])
        return (1 - outs[0] * outs[1] * dot) / 4

    return Behavior.from_function(sc, fn, exact=False)


def planar(theta: float) -> np.ndarray:
    return np.array([np.cos(theta), np.sin(theta), 0.0])


CHSH_ANGLES = (0.0, np.pi / 2, np.pi / 4, 3 * np.pi / 4)


def chsh_singlet_behavior(angles=CHSH_ANGLES) -> Behavior:
    """Singlet at planar angles (x0, x1; y0, y1)."""
    t = angles
    return singlet_behavior([planar(t[0]), planar(t[1])], [planar(t[2]), planar(t[3])])


GHZ_CONTEXTS = (("X", "X", "X"), ("X", "Y", "Y"), ("Y", "X", "Y"), ("Y", "Y", "X"))


def ghz_behavior() -> Behavior:
    settings = [pauli_setting("X"), pauli_setting("Y")]
    return born_behavior(ghz_state(), settings, settings, settings)


def ghz_constraints(tol: float = TOL) -> ValueConstraintSystem:
    """Parity constraints A_s1 B_s2 C_s3 = sign on the four GHZ contexts.

    Signs are read off Born-rule correlators of the GHZ state, which must be
    perfectly (anti)correlated within ``tol``.
    """
    b = ghz_behavior()
    names = {(party, s): f"{'ABC'[party]}_{s}" for party in range(3) for s in "XY"}
    constraints = []
    for ctx in GHZ_CONTEXTS:
        e = correlator(b, ctx)
        if abs(abs(e) - 1) > tol:
            raise AssertionError(f"GHZ context {ctx} is not perfectly correlated: E = {e}")
        sign = 1 if e > 0 else -1
        constraints.append(
            parity_constraint([names[(i, s)] for i, s in enumerate(ctx)], sign, "".join(ctx))
        )
    return ValueConstraintSystem({n: (1, -1) for n in names.values()}, constraints)


def spin1_pair_behavior(triples, labels=None) -> Behavior:
    """Both parties measure the same list of orthonormal frames on the spin-1 pair state."""
    labels = list(labels or [f"t{i}" for i in range(len(triples))])
    settings = [spin1_triple_setting(lab, fr) for lab, fr in zip(labels, triples)]
    return born_behavior(spin1_pair_state(), settings, settings)


def random_unit_vectors(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1)[:, None]


def rotation_about(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K
