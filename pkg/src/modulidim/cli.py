"""Command-line front end.

Every command takes a JSON payload (built from positional arguments or read
with ``--config``) and prints a JSON result. Exit codes: 0 success,
2 invalid input, 3 computation failure. Errors go to stderr as JSON.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Any, Callable

import jsonschema

from . import geometry, localization, orbifold
from .dedekind import dedekind_sum
from .errors import (
    IntegralityWarning,
    ModulidimError,
    QuasiRegularWarning,
    ValidationError,
)
from .exact import eval_at_one, format_rational, parse_rational

RATIONAL = {
    "oneOf": [
        {"type": "integer"},
        {"type": "string", "pattern": r"^\s*[-+]?\d+(\s*/\s*\d+)?\s*$"},
    ]
}
INT = {"type": "integer"}
NAT = {"type": "integer", "minimum": 0}
ORDERS = {"type": "array", "items": {"type": "integer", "minimum": 2}}
PQ = {
    "type": "object",
    "properties": {"p": INT, "q": INT},
    "required": ["p", "q"],
    "additionalProperties": False,
}
ORBIT = {
    "type": "object",
    "properties": {
        "label": {"type": "string"},
        "numerator": {
            "type": "array",
            "items": {
                "type": "array",
                "prefixItems": [RATIONAL, {"type": "array", "items": INT, "minItems": 2, "maxItems": 2}],
                "minItems": 2,
                "maxItems": 2,
            },
        },
        "factors": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "monomial": {"type": "array", "items": INT, "minItems": 2, "maxItems": 2},
                    "polarization": {"enum": ["+", "-"]},
                },
                "required": ["monomial"],
                "additionalProperties": False,
            },
        },
        "delta": {"type": "array", "items": INT, "minItems": 2, "maxItems": 2},
    },
    "required": ["numerator"],
    "additionalProperties": False,
}

SCHEMAS: dict[str, dict] = {
    "dedekind": {
        "type": "object",
        "properties": {"w": INT, "m": INT},
        "required": ["w", "m"],
        "additionalProperties": False,
    },
    "orbifold-index": {
        "type": "object",
        "properties": {
            "singularities": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {"m": INT, "w": INT, "weights": {"type": "array", "items": INT}},
                    "required": ["m", "w"],
                    "additionalProperties": False,
                },
            },
            "topology": {
                "type": "object",
                "properties": {
                    "tauB": RATIONAL,
                    "chiB": RATIONAL,
                    "b1B": NAT,
                    "bplusB": NAT,
                    "p1BH": RATIONAL,
                    "eBH": RATIONAL,
                },
                "additionalProperties": False,
            },
            "bundle": {
                "type": "object",
                "properties": {"dimG": {"type": "integer", "minimum": 1}, "p1B": RATIONAL},
                "required": ["dimG", "p1B"],
                "additionalProperties": False,
            },
        },
        "additionalProperties": False,
    },
    "cy-dim": {
        "type": "object",
        "properties": {"orders": ORDERS},
        "required": ["orders"],
        "additionalProperties": False,
    },
    "flatness": {
        "type": "object",
        "properties": {"orders": ORDERS},
        "required": ["orders"],
        "additionalProperties": False,
    },
    "ypq-index": {
        "oneOf": [
            PQ,
            {
                "type": "object",
                "properties": {"orbits": {"type": "array", "items": ORBIT, "minItems": 1}},
                "required": ["orbits"],
                "additionalProperties": False,
            },
        ]
    },
    "ypq-quasireg": PQ,
    "ypq-curvature": {
        "type": "object",
        "properties": {
            "a": {"type": "number"},
            "rho": {"type": "number"},
            "tol": {"type": "number", "exclusiveMinimum": 0},
        },
        "required": ["a", "rho"],
        "additionalProperties": False,
    },
    "u1-moduli": {
        "type": "object",
        "properties": {
            "duality": {"enum": ["SD", "ASD"]},
            "b1": NAT,
            "latticeRank": NAT,
            "torsionOrders": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        },
        "required": ["duality", "b1", "latticeRank"],
        "additionalProperties": False,
    },
}

FORMULAS = {
    "dedekind": "s(w;m) = (1/4m) sum_{k=1}^{m-1} cot(pi k/m) cot(pi k w/m), evaluated by reciprocity",
    "orbifold-index/general": (
        "ind = p1_B(g_P)[X] + (dim G/2)(1 - b1_B + b+_B) "
        "+ sum_j (1/m_j) sum_k (chi(k) - dim G)/det(1 - g_k)"
    ),
    "orbifold-index/asd": (
        "ind = (5/4)(3 tau_B - chi_B) + sum_j (2 - (w_j + w'_j)/m_j + 12 s(w_j;m_j))"
    ),
    "cy-dim": "-ind = 90 - 2 sum_j (2 m_j - 1); h11 = 20 - sum_j (m_j - 1)",
    "flatness": "flat only if sum_j (m_j^2 - 1)/m_j = 24",
    "ypq-index": "dim = -ind^{T^2_xi}(t = 1), ind^{T^2_xi} = s^0 u^0 part of the closed-orbit sum",
    "ypq-quasireg": "quasi-regular iff 4p^2 - 3q^2 is a perfect square",
    "ypq-curvature": (
        "R_T(e12 - e34) = ((8 - 8 Delta)/rho^2 - 6)(e12 - e34); "
        "R_T(e13 + e24), R_T(e14 - e23) scale by (4 Delta - 4)/rho^2 + 6"
    ),
    "u1-moduli": "components T^{b1} (ASD) or R x T^{b1} (SD); component group = lattice + torsion",
}


def _fraction_pq(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _singularities(payload: dict) -> list[orbifold.CyclicSingularity]:
    return [
        orbifold.CyclicSingularity(s["m"], s["w"], tuple(s["weights"]) if "weights" in s else None)
        for s in payload.get("singularities", [])
    ]


def _integrality(value: Fraction, warn: list[str]) -> None:
    if value.denominator != 1:
        warn.append(f"IntegralityWarning: index {value} is not an integer; inputs are inconsistent")


# ---------------------------------------------------------------- handlers


def _dedekind(payload: dict, warn: list[str]) -> tuple[dict, str]:
    return {"value": _fraction_pq(dedekind_sum(payload["w"], payload["m"]))}, "dedekind"


def _orbifold_index(payload: dict, warn: list[str]) -> tuple[dict, str]:
    sings = _singularities(payload)
    topo_in = payload.get("topology", {})
    topo = orbifold.BasicTopology(
        b1_b=topo_in.get("b1B"),
        bplus_b=topo_in.get("bplusB"),
        tau_b=topo_in.get("tauB"),
        chi_b=topo_in.get("chiB"),
        p1b_h=topo_in.get("p1BH"),
        eb_h=topo_in.get("eBH"),
    )
    if (topo.tau_b is None or topo.chi_b is None) and None not in (topo.p1b_h, topo.eb_h):
        book = orbifold.signature_bookkeeping(topo.p1b_h, topo.eb_h, sings)
        topo = orbifold.BasicTopology(topo.b1_b, topo.bplus_b, book.tau_b, book.chi_b, topo.p1b_h, topo.eb_h)

    routes: dict[str, Fraction] = {}
    bundle = payload.get("bundle")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegralityWarning)
        if bundle is not None:
            if topo.b1_b is None or topo.bplus_b is None:
                raise ValidationError("bundle route needs topology.b1B and topology.bplusB")
            routes["general"] = orbifold.index_general(
                parse_rational(bundle["p1B"]),
                bundle["dimG"],
                topo.b1_b,
                topo.bplus_b,
                sings,
                asd_closed_form=bundle["dimG"] == 3,
            )
        if topo.tau_b is not None and topo.chi_b is not None and (
            bundle is None or bundle["dimG"] == 3
        ):
            routes["asd"] = orbifold.index_asd_bundle(topo, sings)
    if not routes:
        raise ValidationError("need a bundle (dimG, p1B) or topology with tauB/chiB (or p1BH/eBH)")
    primary = "general" if "general" in routes else "asd"
    index = routes[primary]
    if len(routes) == 2 and routes["general"] != routes["asd"]:
        warn.append(
            f"routes disagree: general formula gives {routes['general']}, "
            f"anti-self-dual formula gives {routes['asd']}"
        )
    _integrality(index, warn)
    dimension: Any = int(-index) if index.denominator == 1 else None
    return {"index": format_rational(index), "dimension": dimension}, f"orbifold-index/{primary}"


def _cy_dim(payload: dict, warn: list[str]) -> tuple[dict, str]:
    result = orbifold.cy_k3_dimension(payload["orders"])
    if orbifold.flatness_obstruction(payload["orders"]).is_flat:
        warn.append("flatness condition holds: the connection may be reducible, no moduli claim")
    return {"negIndex": result.neg_index, "h11": format_rational(result.h11)}, "cy-dim"


def _flatness(payload: dict, warn: list[str]) -> tuple[dict, str]:
    result = orbifold.flatness_obstruction(payload["orders"])
    return {"value": format_rational(result.value), "isFlat": result.is_flat}, "flatness"


def _ypq_index(payload: dict, warn: list[str]) -> tuple[dict, str]:
    out: dict[str, Any] = {}
    if "orbits" in payload:
        contribs = [localization.OrbitContribution.from_json(o) for o in payload["orbits"]]
    else:
        y = localization.YpqParams(payload["p"], payload["q"])
        regularity = localization.quasi_regularity(y)
        if regularity is localization.Regularity.QUASI_REGULAR:
            warn.append(
                f"QuasiRegularWarning: Y^{{{y.p},{y.q}}} is quasi-regular; "
                "the rank-2 extraction is not the basic complex"
            )
        contribs = localization.ypq_orbit_data(y)
        out["regularity"] = regularity.value
    poly = localization.invariant_index(contribs)
    dim = -eval_at_one(poly)
    out = {
        "invariantIndex": poly.compact(),
        "invariantIndexTerms": poly.to_terms(),
        "dimension": int(dim) if dim.denominator == 1 else format_rational(dim),
        **out,
    }
    return out, "ypq-index"


def _ypq_quasireg(payload: dict, warn: list[str]) -> tuple[dict, str]:
    y = localization.YpqParams(payload["p"], payload["q"])
    disc = 4 * y.p**2 - 3 * y.q**2
    regularity = localization.quasi_regularity(y)
    root = math.isqrt(disc) if disc >= 0 else None
    return {
        "regularity": regularity.value,
        "discriminant": disc,
        "squareRoot": root if regularity is localization.Regularity.QUASI_REGULAR else None,
    }, "ypq-quasireg"


def _ypq_curvature(payload: dict, warn: list[str]) -> tuple[dict, str]:
    params = geometry.MetricParams(float(payload["a"]), float(payload["rho"]))
    report = geometry.transverse_curvature(params)
    check = geometry.verify_eigenforms(params, float(payload.get("tol", 1e-8)))
    out = {
        "delta": params.delta,
        **report.to_json(),
        "expectedEigenvalues": list(geometry.asd_eigenvalue_formulas(params.a, params.rho)),
        "eigenCheck": {"maxResidual": check.max_residual, "pass": check.passed},
    }
    return out, "ypq-curvature"


def _u1_moduli(payload: dict, warn: list[str]) -> tuple[dict, str]:
    d = orbifold.ModuliDescriptorU1(
        orbifold.Duality(payload["duality"]),
        payload["b1"],
        payload["latticeRank"],
        tuple(payload.get("torsionOrders", ())),
    )
    r = orbifold.u1_moduli_descriptor(d)
    return {
        "componentGroupRank": r.component_group_rank,
        "componentTorsion": list(r.component_torsion),
        "componentTopology": r.component_topology,
    }, "u1-moduli"


HANDLERS: dict[str, Callable[[dict, list[str]], tuple[dict, str]]] = {
    "dedekind": _dedekind,
    "orbifold-index": _orbifold_index,
    "cy-dim": _cy_dim,
    "flatness": _flatness,
    "ypq-index": _ypq_index,
    "ypq-quasireg": _ypq_quasireg,
    "ypq-curvature": _ypq_curvature,
    "u1-moduli": _u1_moduli,
}


def run(job: dict, formula: bool = False) -> dict:
    """Validate and execute one job ``{"command": ..., "payload": {...}}``."""
    if not isinstance(job, dict) or "command" not in job:
        raise ValidationError("job must be an object with a 'command'")
    command = job["command"]
    if command not in HANDLERS:
        raise ValidationError(f"unknown command {command!r}")
    payload = job.get("payload", {})
    try:
        jsonschema.validate(payload, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"{command}: invalid payload: {exc.message}") from None
    warn: list[str] = []
    result, tag = HANDLERS[command](payload, warn)
    result["warnings"] = warn
    if formula:
        result["formula"] = FORMULAS[tag]
    return result


def error_object(exc: BaseException) -> dict:
    return {"error": {"type": type(exc).__name__, "message": str(exc)}}


def _run_safe(job: dict, formula: bool) -> dict:
    try:
        return run(job, formula)
    except ModulidimError as exc:
        out = error_object(exc)
        out["error"]["exitCode"] = exc.exit_code
        return out


def run_batch(jobs: list[dict], parallelism: int = 1, formula: bool = False) -> list[dict]:
    """Run independent jobs; results come back in input order. A failing job
    yields an error object in its slot and never stops the batch."""
    if parallelism < 1:
        raise ValidationError("parallelism must be >= 1")
    if parallelism == 1:
        return [_run_safe(job, formula) for job in jobs]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(lambda job: _run_safe(job, formula), jobs))


# --------------------------------------------------------------------- CLI


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        sys.stderr.write(json.dumps(error_object(ValidationError(message))) + "\n")
        raise SystemExit(2)


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON payload file")
    common.add_argument("--formula", action="store_true", default=argparse.SUPPRESS,
                        help="include the formula behind each result")

    parser = _Parser(prog="modulidim", description=__doc__.splitlines()[0])
    parser.add_argument("--batch", help="JSON file with a list of jobs")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers for --batch")
    parser.add_argument("--formula", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("dedekind", parents=[common], help="exact Dedekind sum s(w;m)")
    p.add_argument("w", type=int, nargs="?")
    p.add_argument("m", type=int, nargs="?")

    sub.add_parser("orbifold-index", parents=[common], help="quasi-regular index (needs --config)")

    for name, text in (("cy-dim", "transverse Calabi-Yau moduli dimension"),
                       ("flatness", "flatness obstruction")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("orders", type=int, nargs="*")

    for name in ("ypq-index", "ypq-quasireg"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("p", type=int, nargs="?")
        p.add_argument("q", type=int, nargs="?")
        if name == "ypq-index":
            p.add_argument("--orbits", help="JSON file with a generic orbit table")

    p = sub.add_parser("ypq-curvature", parents=[common])
    _curvature_args(p)

    ypq = sub.add_parser("ypq", help="Y^{p,q} verbs: index, quasireg, curvature")
    verbs = ypq.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    for verb in ("index", "quasireg"):
        v = verbs.add_parser(verb, parents=[common])
        v.add_argument("p", type=int, nargs="?")
        v.add_argument("q", type=int, nargs="?")
        if verb == "index":
            v.add_argument("--orbits", help="JSON file with a generic orbit table")
    _curvature_args(verbs.add_parser("curvature", parents=[common]))

    p = sub.add_parser("u1-moduli", parents=[common], help="U(1) instanton moduli shape")
    p.add_argument("--duality", choices=["SD", "ASD"])
    p.add_argument("--b1", type=int)
    p.add_argument("--rank", type=int, dest="lattice_rank")
    p.add_argument("--torsion", type=int, nargs="*", default=[])
    return parser


def _curvature_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--a", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--tol", type=float)


def _payload_from_args(command: str, args: argparse.Namespace) -> dict:
    config = getattr(args, "config", None)
    if config is not None:
        data = _load_json(config)
        if isinstance(data, dict) and "payload" in data:
            data = data["payload"]
        return data
    if command == "dedekind":
        return _drop_none({"w": args.w, "m": args.m})
    if command in ("cy-dim", "flatness"):
        return {"orders": args.orders}
    if command == "ypq-index" and getattr(args, "orbits", None):
        table = _load_json(args.orbits)
        return {"orbits": table["orbits"] if isinstance(table, dict) else table}
    if command in ("ypq-index", "ypq-quasireg"):
        return _drop_none({"p": args.p, "q": args.q})
    if command == "ypq-curvature":
        return _drop_none({"a": args.a, "rho": args.rho, "tol": args.tol})
    if command == "u1-moduli":
        return _drop_none({
            "duality": args.duality,
            "b1": args.b1,
            "latticeRank": args.lattice_rank,
            "torsionOrders": args.torsion,
        })
    raise ValidationError(f"{command} needs --config")


def _drop_none(d: dict) -> dict:
    return {k: v for k, v in d.items() if v is not None}


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    formula = bool(getattr(args, "formula", False))
    warnings.simplefilter("ignore", IntegralityWarning)
    warnings.simplefilter("ignore", QuasiRegularWarning)
    try:
        if args.batch:
            data = _load_json(args.batch)
            jobs = data["jobs"] if isinstance(data, dict) and "jobs" in data else data
            if not isinstance(jobs, list):
                raise ValidationError("batch file must hold a list of jobs")
            results = run_batch(jobs, args.jobs, formula)
            _emit(results)
            codes = [r["error"]["exitCode"] for r in results if "error" in r]
            return max(codes, default=0)
        if args.command is None:
            parser.print_help(sys.stderr)
            return 2
        command = args.command
        if command == "ypq":
            command = f"ypq-{args.verb}"
        payload = _payload_from_args(command, args)
        _emit(run({"command": command, "payload": payload}, formula))
        return 0
    except ModulidimError as exc:
        sys.stderr.write(json.dumps(error_object(exc)) + "\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
