"""JSON documents for behaviors, joints, models, constraint systems and certificates.

Exact numbers are written as "num/den" strings and floats as JSON numbers.
JSON has no tuples, so list-valued labels are turned back into tuples on load.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .assignments import Constraint, ContradictionCertificate, KSCertificate, ValueConstraintSystem
from .decide import BellFunctional, Joint, MDLCertificate
from .errors import StructuralError
from .hvmodel import HiddenVariableModel
from .scenario import TOL, Behavior, Scenario

OUT_KEYS = ("a", "b", "c")
SET_KEYS = ("x", "y", "z")


def num_out(v) -> str | float:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return f"{v}/1"
    return float(v)


def num_in(v, exact: bool):
    if exact:
        if isinstance(v, float):
            raise StructuralError(f"float {v!r} in an exact-mode document")
        return Fraction(v)
    return float(Fraction(v)) if isinstance(v, str) else float(v)


def label_out(v) -> Any:
    if isinstance(v, tuple):
        return [label_out(u) for u in v]
    if hasattr(v, "item"):  # numpy scalar
        return v.item()
    return v


def label_in(v) -> Any:
    if isinstance(v, list):
        return tuple(label_in(u) for u in v)
    return v


def scenario_to_json(s: Scenario) -> dict:
    return {"settings": label_out(s.settings), "outcomes": label_out(s.outcomes)}


def scenario_from_json(d: dict) -> Scenario:
    try:
        settings = label_in(d["settings"])
        outcomes = label_in(d["outcomes"])
    except KeyError as e:
        raise StructuralError(f"scenario lacks {e.args[0]!r}") from None
    return Scenario(settings, outcomes)


def _key_out(key: tuple, n: int) -> dict:
    row = {SET_KEYS[i]: label_out(key[n + i]) for i in range(n)}
    row.update({OUT_KEYS[i]: label_out(key[i]) for i in range(n)})
    return row


def _key_in(row: dict, n: int) -> tuple:
    try:
        return tuple(label_in(row[k]) for k in OUT_KEYS[:n]) + tuple(label_in(row[k]) for k in SET_KEYS[:n])
    except KeyError as e:
        raise StructuralError(f"table row {row!r} lacks {e.args[0]!r}") from None


def _mode(exact: bool) -> str:
    return "exact" if exact else "float"


def _exact_from(d: dict) -> bool:
    mode = d.get("mode", "exact")
    if mode not in ("exact", "float"):
        raise StructuralError(f"unknown mode {mode!r}")
    return mode == "exact"


def behavior_to_json(b: Behavior) -> dict:
    n = b.scenario.parties
    doc = {"kind": "behavior", "scenario": scenario_to_json(b.scenario), "mode": _mode(b.exact)}
    if not b.exact:
        doc["tolerance"] = b.tol
    doc["table"] = [{**_key_out(k, n), "p": num_out(b.table[k])} for k in b.scenario.keys()]
    return doc


def behavior_from_json(d: dict) -> Behavior:
    sc = scenario_from_json(d["scenario"])
    exact = _exact_from(d)
    n = sc.parties
    table = {_key_in(row, n): num_in(row["p"], exact) for row in d["table"]}
    return Behavior(sc, table, exact, d.get("tolerance", TOL))


def joint_to_json(j: Joint) -> dict:
    doc = behavior_to_json(j.behavior)
    doc["kind"] = "joint"
    n = j.scenario.parties
    doc["settings_dist"] = [
        {**{SET_KEYS[i]: label_out(t[i]) for i in range(n)}, "p": num_out(j.settings_dist.get(t, 0))}
        for t in j.scenario.setting_tuples()
    ]
    return doc


def joint_from_json(d: dict) -> Joint:
    b = behavior_from_json(d)
    if "settings_dist" not in d:
        return Joint.from_behavior(b)
    n = b.scenario.parties
    dist = {
        tuple(label_in(row[k]) for k in SET_KEYS[:n]): num_in(row["p"], True) for row in d["settings_dist"]
    }
    return Joint(b, dist)


def model_to_json(m: HiddenVariableModel) -> dict:
    n = m.scenario.parties
    lam_out = lambda k: label_out(k)
    return {
        "kind": "model",
        "scenario": scenario_to_json(m.scenario),
        "mode": _mode(m.exact),
        "lambdas": [lam_out(l) for l in m.lambdas],
        "prior": [{"lambda": lam_out(l), "p": num_out(v)} for l, v in m.prior.items()],
        "setting_weights": [
            {**{SET_KEYS[i]: label_out(k[i]) for i in range(n)}, "lambda": lam_out(k[n]), "p": num_out(v)}
            for k, v in m.setting_weights.items()
        ],
        "response": [
            {**_key_out(k[:-1], n), "lambda": lam_out(k[-1]), "p": num_out(v)} for k, v in m.response.items()
        ],
    }


def model_from_json(d: dict) -> HiddenVariableModel:
    sc = scenario_from_json(d["scenario"])
    exact = _exact_from(d)
    n = sc.parties
    try:
        prior = {label_in(r["lambda"]): num_in(r["p"], exact) for r in d["prior"]}
        weights = {
            (*(label_in(r[k]) for k in SET_KEYS[:n]), label_in(r["lambda"])): num_in(r["p"], exact)
            for r in d["setting_weights"]
        }
        response = {(*_key_in(r, n), label_in(r["lambda"])): num_in(r["p"], exact) for r in d["response"]}
        lambdas = [label_in(l) for l in d.get("lambdas", list(prior))]
    except KeyError as e:
        raise StructuralError(f"model document lacks {e.args[0]!r}") from None
    return HiddenVariableModel(sc, lambdas, prior, weights, response, exact, d.get("tolerance", TOL))


def system_to_json(s: ValueConstraintSystem) -> dict:
    return {
        "kind": "value-system",
        "variables": {k: label_out(v) for k, v in s.variables.items()},
        "constraints": [
            {
                "scope": list(c.scope),
                "allowed": sorted((label_out(t) for t in c.allowed), key=repr),
                "label": c.label,
                "parity": c.parity,
            }
            for c in s.constraints
        ],
    }


def system_from_json(d: dict) -> ValueConstraintSystem:
    variables = {k: label_in(v) for k, v in d["variables"].items()}
    cons = [
        Constraint(
            tuple(c["scope"]),
            frozenset(label_in(t) for t in c["allowed"]),
            c.get("label", ""),
            c.get("parity"),
        )
        for c in d["constraints"]
    ]
    return ValueConstraintSystem(variables, cons)


def contradiction_to_json(c: ContradictionCertificate) -> dict:
    return {
        "kind": "contradiction",
        "system": system_to_json(c.system),
        "search_space": c.search_space,
        "nodes": c.nodes,
        "parity_subset": list(c.parity_subset) if c.parity_subset is not None else None,
    }


def functional_to_json(f: BellFunctional, n: int = 2) -> dict:
    return {
        "kind": "bell-functional",
        "coefficients": [
            {**_key_out(k, n), "c": num_out(v)} for k, v in sorted(f.coefficients.items(), key=repr)
        ],
        "local_bound": num_out(f.local_bound),
        "value": num_out(f.value),
    }


def functional_from_json(d: dict, n: int = 2) -> BellFunctional:
    coeffs = {_key_in(r, n): num_in(r["c"], True) for r in d["coefficients"]}
    return BellFunctional(coeffs, num_in(d["local_bound"], True), num_in(d["value"], True))


def mdl_certificate_to_json(c: MDLCertificate) -> dict:
    return {
        "kind": "mdl-certificate",
        "l": num_out(c.l),
        "inequality": "sum c*p(a,b,x,y) <= 0 for every joint at this level",
        "coefficients": [
            {**_key_out(k, 2), "c": num_out(v)} for k, v in sorted(c.coefficients.items(), key=repr)
        ],
        "ineq_multipliers": [
            {"strategy": d, **{SET_KEYS[i]: label_out(t[i]) for i in range(2)}, "m": num_out(v)}
            for (d, t), v in sorted(c.ineq_multipliers.items(), key=repr)
        ],
        "value": num_out(c.value),
    }


def mdl_certificate_from_json(d: dict) -> MDLCertificate:
    coeffs = {_key_in(r, 2): num_in(r["c"], True) for r in d["coefficients"]}
    mult = {
        (r["strategy"], (label_in(r["x"]), label_in(r["y"]))): num_in(r["m"], True) for r in d["ineq_multipliers"]
    }
    return MDLCertificate(num_in(d["l"], True), coeffs, mult, num_in(d["value"], True))


def ks_certificate_to_json(c: KSCertificate) -> dict:
    return {
        "kind": "ks-certificate",
        "branches": c.branches,
        "edges": [list(e) for e in c.edges],
        "triples": [list(t) for t in c.triples],
    }


def directions_to_json(directions, name: str = "") -> dict:
    return {"kind": "directions", "name": name, "directions": [[float(c) for c in v] for v in directions]}


def to_json(obj) -> dict:
    match obj:
        case Joint():
            return joint_to_json(obj)
        case Behavior():
            return behavior_to_json(obj)
        case HiddenVariableModel():
            return model_to_json(obj)
        case ValueConstraintSystem():
            return system_to_json(obj)
        case ContradictionCertificate():
            return contradiction_to_json(obj)
        case BellFunctional():
            return functional_to_json(obj)
        case MDLCertificate():
            return mdl_certificate_to_json(obj)
        case KSCertificate():
            return ks_certificate_to_json(obj)
    raise TypeError(f"no JSON form for {type(obj).__name__}")


def dumps(obj, indent: int | None = 2) -> str:
    doc = obj if isinstance(obj, dict) else to_json(obj)
    return json.dumps(doc, indent=indent, sort_keys=False)


def load_document(path: str | Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise StructuralError(f"{path}: not valid JSON ({e})") from None
    if not isinstance(doc, dict):
        raise StructuralError(f"{path}: top level must be an object")
    return doc


def from_json(doc: dict):
    """Dispatch on the document's "kind" field (behavior if absent)."""
    kind = doc.get("kind", "behavior")
    loaders = {
        "behavior": behavior_from_json,
        "joint": joint_from_json,
        "model": model_from_json,
        "value-system": system_from_json,
    }
    if kind not in loaders:
        raise StructuralError(f"unknown document kind {kind!r}")
    try:
        return loaders[kind](doc)
    except KeyError as e:
        raise StructuralError(f"{kind} document lacks {e.args[0]!r}") from None
