"""bellepr command line.

Exit codes: 0 = pass / feasible / claim holds, 1 = negative verdict, 2 = usage or input error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import constructions, quantum
from .assignments import ValueConstraintSystem, check_value_assignment, ks_colorable, peres33_directions
from .decide import Joint, chsh_shaped, decide_lhv, decide_mdl, mdl_threshold
from .errors import ExactnessError
from .hvmodel import CONDITIONS, HiddenVariableModel, check, reconstruct_behavior
from .reproduce import PIPELINES, reproduce
from .scenario import Behavior, max_chsh_value
from .serialize import dumps, from_json, load_document, num_out, to_json

KINDS = ("pr-box", "epr-grid", "epr-complete", "example1", "hall-brans", "singlet", "ghz", "spin1")
DECIDE_MODES = ("lhv", "mdl", "mdl-threshold", "assignment", "ks")


class UsageError(Exception):
    pass


def _grid_dist(text: str):
    if text == "uniform" or text.startswith("point:"):
        return text
    return [Fraction(v) for v in text.split(",")]


def _vectors(path: str | None, key: str = "directions"):
    if path is None:
        return None
    doc = load_document(path)
    vals = doc.get(key) if isinstance(doc, dict) else None
    if vals is None:
        raise UsageError(f"{path}: expected a JSON object with a {key!r} list")
    return np.asarray(vals, dtype=float)


def _digest(paths: list[str], params: dict) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
    h.update(json.dumps(params, sort_keys=True, default=str).encode())
    return h.hexdigest()[:16]


def _as(model: HiddenVariableModel, form: str):
    if form == "model":
        return model
    b = reconstruct_behavior(model)
    return b if form == "behavior" else Joint.from_behavior(b)


def generate(args) -> tuple[object, dict]:
    rng = np.random.default_rng(args.seed)
    kind = args.kind
    if kind == "pr-box":
        return _as(constructions.pr_box_model(args.lambdas), args.form), {}
    if kind == "epr-grid":
        return _as(constructions.epr_grid_model(args.n, _grid_dist(args.mu), _grid_dist(args.nu)), args.form), {}
    if kind == "epr-complete":
        m = constructions.epr_deterministic_completion(args.n, _grid_dist(args.mu), _grid_dist(args.nu))
        return _as(m, args.form), {}
    if kind == "example1":
        dirs = _vectors(args.directions)
        if dirs is None:
            dirs = quantum.random_unit_vectors(rng, args.count)
        seq = constructions.example1_model(dirs)
        m = seq.flatten(args.lambda_includes_setting)
        d = seq.disturbance()
        info = {"A_disturbed_by_B": d["A_disturbed_by_B"], "B_disturbed_by_A": d["B_disturbed_by_A"]}
        return _as(m, args.form), info
    if kind == "hall-brans":
        if not args.behavior:
            raise UsageError("hall-brans needs --behavior FILE")
        b = from_json(load_document(args.behavior))
        if isinstance(b, Joint):
            return _as(constructions.hall_brans_model(b.behavior, b.settings_dist), args.form), {}
        if not isinstance(b, Behavior):
            raise UsageError("--behavior must hold a behavior or joint document")
        if not b.exact:
            if args.rationalize is None:
                raise ExactnessError("float behavior: pass --rationalize DIGITS")
            b = b.rationalized(args.rationalize)
        return _as(constructions.hall_brans_model(b), args.form), {}
    if kind == "singlet":
        a = _vectors(args.directions)
        if a is None:
            out = quantum.chsh_singlet_behavior()
        else:
            bd = _vectors(args.b_directions)
            out = quantum.singlet_behavior(a, a if bd is None else bd)
        return out, {}
    if kind == "ghz":
        return quantum.ghz_behavior(), {}
    if kind == "spin1":
        triples = _vectors(args.triples, "triples")
        if triples is None:
            # two frames sharing the z axis
            triples = [np.eye(3), quantum.rotation_about((0, 0, 1), np.pi / 4).T]
        return quantum.spin1_pair_behavior(list(triples)), {}
    raise UsageError(f"unknown kind {kind!r}")


def cmd_generate(args) -> tuple[dict, int]:
    obj, info = generate(args)
    text = dumps(obj)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")
    doc = to_json(obj)
    report = {
        "verdicts": {"generated": doc["kind"], **info},
        "mode": doc.get("mode", "exact"),
        "output": args.output,
    }
    return report, 0


def _load_model(path: str) -> HiddenVariableModel:
    """Model documents load as is; a behavior becomes the trivial single-lambda model."""
    obj = from_json(load_document(path))
    if isinstance(obj, Joint):
        obj = obj.behavior
    if isinstance(obj, Behavior):
        return HiddenVariableModel.build(obj.scenario, {0: 1}, lambda o, s, lam: obj.p(o, s), exact=obj.exact)
    if not isinstance(obj, HiddenVariableModel):
        raise UsageError(f"{path}: check needs a model or behavior document")
    return obj


def cmd_check(args) -> tuple[dict, int]:
    m = _load_model(args.input)
    conds = [c.strip().upper() for c in args.conditions.split(",") if c.strip()]
    bad = [c for c in conds if c not in CONDITIONS]
    if bad:
        raise UsageError(f"unknown conditions {bad}; choose from {', '.join(c.lower() for c in CONDITIONS)}")
    reports = check(m, conds)
    verdicts = {c.lower(): ("pass" if r.passed else "fail") for c, r in reports.items()}
    witnesses = {
        c.lower(): [
            {
                "indices": [str(i) for i in w.indices],
                "lhs": num_out(w.lhs),
                "rhs": num_out(w.rhs),
                "deviation": num_out(w.deviation),
            }
            for w in r.witnesses[: args.max_witnesses]
        ]
        for c, r in reports.items()
        if not r.passed
    }
    code = 0 if all(r.passed for r in reports.values()) else 1
    return {"verdicts": verdicts, "certificates": witnesses, "mode": "exact" if m.exact else "float"}, code


def _exact_behavior(obj, args) -> Behavior:
    if isinstance(obj, HiddenVariableModel):
        obj = reconstruct_behavior(obj)
    b = obj.behavior if isinstance(obj, Joint) else obj
    if not isinstance(b, Behavior):
        raise UsageError("input must be a behavior, joint or model document")
    if not b.exact:
        if args.rationalize is None:
            raise ExactnessError("float behavior given to an exact decision; pass --rationalize DIGITS")
        b = b.rationalized(args.rationalize)
    return b


def _joint(obj, args) -> Joint:
    b = _exact_behavior(obj, args)
    if isinstance(obj, Joint):
        return Joint(b, obj.settings_dist)
    if isinstance(obj, HiddenVariableModel):
        dist = obj.settings_marginal()
        if not obj.exact:
            dist = {t: Fraction(round(v, args.rationalize)).limit_denominator(10**args.rationalize) for t, v in dist.items()}
            total = sum(dist.values())
            dist = {t: v / total for t, v in dist.items()}
        return Joint(b, dist)
    return Joint.from_behavior(b)


def cmd_decide(args) -> tuple[dict, int]:
    mode = args.mode
    if mode == "ks":
        dirs = _vectors(args.input) if args.input else peres33_directions()
        res = ks_colorable(dirs)
        cert = to_json(res.certificate) if res.certificate else None
        verdicts = {
            "ks": "colorable" if res.colorable else "uncolorable",
            "directions": len(dirs),
            "orthogonal_pairs": len(res.edges),
            "orthogonal_triples": len(res.triples),
        }
        certs = {"assignment": res.assignment and {str(k): v for k, v in res.assignment.items()}} if res.colorable else {"uncolorable": cert}
        return {"verdicts": verdicts, "certificates": certs, "mode": "exact"}, 0 if res.colorable else 1
    if not args.input:
        raise UsageError(f"decide {mode} needs an input file")
    obj = from_json(load_document(args.input))
    if mode == "assignment":
        if isinstance(obj, HiddenVariableModel):
            obj = reconstruct_behavior(obj)
        if isinstance(obj, ValueConstraintSystem):
            system = obj
        elif isinstance(obj, Behavior):
            system = constructions.correlation_constraints(obj)
        else:
            raise UsageError("assignment needs a value-system or behavior document")
        res = check_value_assignment(system)
        verdicts = {"assignment": "SAT" if res.satisfiable else "UNSAT", "constraints": len(system.constraints), "nodes": res.nodes}
        if res.satisfiable:
            certs = {"assignment": {k: v for k, v in res.assignment.items()}}
        else:
            verdicts["search_space"] = res.certificate.search_space
            verdicts["replayed"] = res.certificate.replay()
            certs = {"contradiction": to_json(res.certificate)}
        return {"verdicts": verdicts, "certificates": certs, "mode": "exact"}, 0 if res.satisfiable else 1
    if mode == "lhv":
        b = _exact_behavior(obj, args)
        res = decide_lhv(b)
        verdicts = {"lhv": "feasible" if res.feasible else "infeasible"}
        if res.feasible:
            certs = {"model": to_json(res.model)}
        else:
            f = res.functional
            verdicts.update(value=num_out(f.value), local_bound=num_out(f.local_bound), replayed=f.replay(b))
            certs = {"functional": to_json(f)}
        if chsh_shaped(b.scenario):
            verdicts.update(max_chsh=num_out(max_chsh_value(b)))
        return {"verdicts": verdicts, "certificates": certs, "mode": "exact"}, 0 if res.feasible else 1
    joint = _joint(obj, args)
    if mode == "mdl":
        if args.l is None:
            raise UsageError("decide mdl needs --l RATIONAL")
        res = decide_mdl(joint, Fraction(args.l))
        verdicts = {"mdl": "feasible" if res.feasible else "infeasible", "l": num_out(res.l)}
        certs = {"model": to_json(res.model)} if res.feasible else {"mdl_certificate": to_json(res.certificate)}
        return {"verdicts": verdicts, "certificates": certs, "mode": "exact"}, 0 if res.feasible else 1
    if mode == "mdl-threshold":
        thr = mdl_threshold(joint, Fraction(args.precision))
        verdicts = {
            "threshold": [num_out(thr.lo), num_out(thr.hi)],
            "width": num_out(thr.width),
            "probes": [[num_out(l), ok] for l, ok in thr.probes],
        }
        return {"verdicts": verdicts, "certificates": {}, "mode": "exact"}, 0
    raise UsageError(f"unknown decide mode {mode!r}")


def cmd_reproduce(args) -> tuple[dict, int]:
    if args.id not in PIPELINES:
        raise UsageError(f"unknown id {args.id!r}; choose from {', '.join(PIPELINES)}")
    r = reproduce(args.id, args.seed)
    return {"verdicts": {"match": r["match"], "checks": r["checks"]}, "mode": "exact"}, 0 if r["match"] else 1


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable report")
    common.add_argument("--seed", type=int, default=42)

    p = argparse.ArgumentParser(prog="bellepr", description="Locality, determinism and EPR constructions.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="emit a model or behavior JSON")
    g.add_argument("kind", choices=KINDS)
    g.add_argument("-o", "--output")
    g.add_argument("--as", dest="form", choices=("model", "behavior", "joint"), default="model",
                   help="for model kinds: emit the model, its behavior, or the joint with uniform settings")
    g.add_argument("--lambdas", type=int, default=1)
    g.add_argument("--n", type=int, default=8)
    g.add_argument("--mu", default="uniform", help="uniform | point:K | comma-separated rationals")
    g.add_argument("--nu", default="uniform")
    g.add_argument("--directions", help="JSON file with a 'directions' list of 3-vectors")
    g.add_argument("--b-directions")
    g.add_argument("--count", type=int, default=3, help="random directions for example1")
    g.add_argument("--lambda-includes-setting", action="store_true")
    g.add_argument("--behavior")
    g.add_argument("--triples", help="JSON file with a 'triples' list of 3x3 frames")
    g.add_argument("--rationalize", type=int)
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("check", parents=[common], help="check locality conditions on a model")
    c.add_argument("input")
    c.add_argument("--conditions", default=",".join(x.lower() for x in CONDITIONS))
    c.add_argument("--max-witnesses", type=int, default=5)
    c.set_defaults(func=cmd_check)

    d = sub.add_parser("decide", parents=[common], help="run a decision procedure")
    d.add_argument("mode", choices=DECIDE_MODES)
    d.add_argument("input", nargs="?")
    d.add_argument("--l")
    d.add_argument("--precision", default="1/1000")
    d.add_argument("--rationalize", type=int)
    d.set_defaults(func=cmd_decide)

    r = sub.add_parser("reproduce", parents=[common], help="run a pre-wired claim pipeline")
    r.add_argument("id")
    r.set_defaults(func=cmd_reproduce)
    return p


def _text(report: dict) -> str:
    lines = [f"command: {' '.join(report['command'])}", f"mode: {report['mode']}"]
    for k, v in report["verdicts"].items():
        if k == "checks":
            for chk in v:
                tag = "ok  " if chk["match"] else "FAIL"
                exp = f" (expected {chk['expected']})" if "expected" in chk else ""
                lines.append(f"  [{tag}] {chk['name']}: {chk['observed']}{exp}")
        else:
            lines.append(f"{k}: {v}")
    for k, v in report.get("certificates", {}).items():
        if v:
            lines.append(f"{k}: {json.dumps(v, separators=(',', ':'))[:400]}")
    lines.append(f"exit: {report['exit']}")
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    start = time.perf_counter()
    try:
        inputs = [p for p in (getattr(args, "input", None), getattr(args, "behavior", None)) if p]
        params = {k: v for k, v in vars(args).items() if k not in ("func", "json")}
        digest = _digest(inputs, params)
        body, code = args.func(args)
    except (UsageError, ValueError, TypeError, KeyError, OSError, MemoryError, ZeroDivisionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    report = {
        "command": ["bellepr", *argv],
        "inputs_digest": digest,
        "mode": body.pop("mode", "exact"),
        "verdicts": body.pop("verdicts"),
        "certificates": body.pop("certificates", {}),
        **body,
        "exit": code,
        "timing": {"seconds": round(time.perf_counter() - start, 6)},
    }
    out = sys.stderr if args.command == "generate" and not args.output else sys.stdout
    if args.json:
        print(json.dumps(report, indent=2, default=str), file=out)
    else:
        print(_text(report), file=out)
    return code


if __name__ == "__main__":
    sys.exit(main())
