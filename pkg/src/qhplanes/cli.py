"""Command-line front end: ``analyze``, ``balance``, ``construct``, ``enumerate``, ``fiber``.

Documents are JSON.  A graph document looks like::

    {"version": 1, "graphs": {"D": {"vertices": [{"id": 0, "weight": -2}], "edges": []},
                              "F": "[2,1,2]"}}

where a string ``"[a1,...,an]"`` is chain shorthand (entries are minus the
weights).  A model document is ``{"version": 1, "kind": ..., "params": {...}}``.
Rationals are always written as ``"p/q"`` strings.

Exit status: 0 when every hard check passes, 1 on a validator failure,
2 on parse or precondition errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Dict, List, Optional

from . import __version__
from .birational import (
    SPROUTING,
    SUBDIVISIONAL,
    StandardizationError,
    is_standard,
    is_strongly_balanced,
    standardize,
)
from .fibration import columnar_from_tilde_e, contraction_history, fiber_from_history, validate_fiber
from .graph import (
    WeightedGraph,
    classify_singularity,
    discriminant,
    e_invariant,
    inertia,
    intersection_matrix,
    is_negative_definite,
    tilde_e,
)
from . import qhp

DOC_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_PARSE = 0, 1, 2

KIND_ALIASES = {
    "affine-ruled": qhp.AFFINE_RULED,
    "nonextendable": qhp.NONEXTENDABLE,
    "twisted": qhp.TWISTED,
    "untwisted-c1": qhp.UNTWISTED_C1,
    "untwisted-p1": qhp.UNTWISTED_P1,
}


class DocumentError(ValueError):
    pass


# -- serialization ------------------------------------------------------------------

def _to_json_id(v):
    return list(_to_json_id(x) for x in v) if isinstance(v, tuple) else v


def _from_json_id(v):
    return tuple(_from_json_id(x) for x in v) if isinstance(v, list) else v


def rational(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s) -> Fraction:
    if isinstance(s, bool):
        raise DocumentError(f"not a rational: {s!r}")
    if isinstance(s, int):
        return Fraction(s)
    try:
        return Fraction(str(s).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise DocumentError(f"not a rational: {s!r}") from exc


def parse_chain_shorthand(s: str) -> WeightedGraph:
    s = s.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise DocumentError(f"chain shorthand must look like [a1,...,an]: {s!r}")
    body = s[1:-1].strip()
    try:
        entries = [int(x) for x in body.split(",")] if body else []
    except ValueError as exc:
        raise DocumentError(f"chain entries must be integers: {s!r}") from exc
    return WeightedGraph.chain(entries)


def graph_to_doc(g: WeightedGraph) -> dict:
    return {
        "vertices": [{"id": _to_json_id(v.id), "weight": v.weight, "genus": v.genus} for v in g.vertices],
        "edges": [[_to_json_id(u), _to_json_id(v)] for u, v in g.edges],
    }


def graph_from_doc(doc) -> WeightedGraph:
    if isinstance(doc, str):
        return parse_chain_shorthand(doc)
    if not isinstance(doc, dict) or "vertices" not in doc:
        raise DocumentError("graph must be chain shorthand or an object with 'vertices'")
    try:
        g = WeightedGraph()
        for v in doc["vertices"]:
            w = v["weight"]
            genus = v.get("genus", 0)
            if not isinstance(w, int) or isinstance(w, bool) or not isinstance(genus, int):
                raise DocumentError("weights and genera must be integers")
            g = g.add_vertex(_from_json_id(v["id"]), w, genus)
        for e in doc.get("edges", []):
            u, v = e
            g = g.add_edge(_from_json_id(u), _from_json_id(v))
    except DocumentError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"malformed graph: {exc}") from exc
    return g


def model_to_doc(m: qhp.SurfaceModel) -> dict:
    params = {k: v for k, v in m.params.items() if not k.startswith("_")}
    return {"version": DOC_VERSION, "kind": m.kind, "params": params}


def _steps_from_doc(raw):
    out = []
    for s in raw or ():
        if not isinstance(s, dict) or "kind" not in s or "target" not in s:
            raise DocumentError(f"malformed blowup step: {s!r}")
        kind = s["kind"].upper()
        if kind not in (SPROUTING, SUBDIVISIONAL):
            raise DocumentError(f"unknown blowup kind {s['kind']!r}")
        target = s["target"]
        target = tuple(target) if kind == SUBDIVISIONAL else target
        out.append({"kind": kind, "target": target, "created": s.get("created")})
    return out


def model_from_doc(doc) -> qhp.SurfaceModel:
    """Build a model from a model document; construction errors propagate."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise DocumentError("model document needs a 'kind'")
    kind = KIND_ALIASES.get(str(doc["kind"]).lower(), str(doc["kind"]).upper())
    p = doc.get("params", {})
    if not isinstance(p, dict):
        raise DocumentError("'params' must be an object")
    if kind == qhp.AFFINE_RULED:
        specs = []
        for f in p.get("fibers", []):
            if isinstance(f, dict) and "graph" in f:
                specs.append(qhp.affine_spec_from_fiber(graph_from_doc(f["graph"]), _from_json_id(f["attach"])))
            else:
                specs.append(_steps_from_doc(f))
        return qhp.construct_affine_ruled(specs)
    if kind == qhp.NONEXTENDABLE:
        try:
            N, g = int(p["N"]), int(p.get("g", 0))
        except (KeyError, TypeError, ValueError) as exc:
            raise DocumentError("nonextendable needs integer N (and g)") from exc
        es = [parse_rational(x) for x in p.get("tilde_e", [])]
        return qhp.construct_nonextendable(N, g, es)
    if kind in qhp.CSTAR_KINDS:
        params = dict(p)
        params["columnar"] = [parse_rational(x) for x in p.get("columnar", [])]
        if params.get("f0_tilde") not in (None, "", "none"):
            params["f0_tilde"] = parse_rational(params["f0_tilde"])
        params["f0_history"] = _steps_from_doc(p.get("f0_history"))
        return qhp.construct_cstar(kind, params)
    if kind == qhp.HAND:
        return qhp.SurfaceModel.hand(
            graph_from_doc(p["boundary"]),
            graph_from_doc(p["exceptional"]) if "exceptional" in p else None,
            kodaira_S0=_kodaira_from_doc(p.get("kodaira_S0")),
            logarithmic=p.get("logarithmic"),
            exceptional_plane=bool(p.get("exceptional_plane", False)),
        )
    raise DocumentError(f"unknown model kind {doc['kind']!r}")


def _kodaira_from_doc(x):
    if x is None:
        return None
    if x in ("-inf", qhp.NEG_INFINITY):
        return qhp.NEG_INFINITY
    return int(x)


def _jsonable(x):
    if isinstance(x, Fraction):
        return rational(x)
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, (frozenset, set)):
        return sorted(_jsonable(y) for y in x)
    if isinstance(x, dict):
        return {str(_to_json_id(k)): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(y) for y in x]
    if isinstance(x, WeightedGraph):
        return graph_to_doc(x)
    if hasattr(x, "label"):
        return x.label()
    return str(x)


def singularity_doc(desc):
    if desc is None:
        return None
    return {
        "kind": desc.kind,
        "order": desc.order,
        "fork_type": list(desc.fork_type) if desc.fork_type else None,
        "topologically_rational": desc.topologically_rational,
        "label": desc.label(),
    }


COMPUTED_BY = {
    "dD": "fraction-free determinant of -Q(D)",
    "dE": "fraction-free determinant of -Q(E)",
    "h1_order": "sqrt(|d(D)|/|d(E)|)",
    "h1_group": "mu(C_i)/d(E_i) per fiber",
    "lambda": "n + nu - 1 - sum 1/mu_i",
    "kappa": "case dispatch on the F0 type",
    "kappa0": "case dispatch on the F0 type",
    "alpha": "n - 2 + 2g - sum 1/mu_i",
    "singularities": "chain/fork classification of E components",
    "rationality": "arithmetic genus of the Laufer fundamental cycle",
    "ruling_count": "case dispatch on kbar(S0), E shape and boundary pattern",
    "contractible_count": "boundary pattern",
    "strongly_balanced_completions": "construction kind",
}


def report_to_doc(m: qhp.SurfaceModel, r: qhp.InvariantReport) -> dict:
    return {
        "kind": r.kind,
        "f0_type": r.f0_type,
        "eta_trivial": m.eta_trivial,
        "dD": r.dD,
        "dE": r.dE,
        "h1_order": r.h1_order,
        "h1_group": r.h1_group,
        "lambda": _jsonable(r.lam),
        "kappa": _jsonable(r.kappa),
        "kappa0": _jsonable(r.kappa0),
        "alpha": _jsonable(r.alpha),
        "kodaira_S": r.kodaira_S,
        "kodaira_S0": r.kodaira_S0,
        "singularities": [singularity_doc(d) for d in r.singularities],
        "rationality": r.rationality,
        "ruling_count": r.ruling_count,
        "contractible_count": _jsonable(r.contractible_count),
        "strongly_balanced_completions": r.strongly_balanced_completions,
        "validators": _jsonable(r.validators.clauses),
        "validator_info": _jsonable(r.validators.info),
        "passed": r.passed,
        "computed_by": COMPUTED_BY,
    }


# -- oracles ------------------------------------------------------------------------

def cofactor_determinant(m) -> int:
    """Laplace expansion along the first row; exponential, only for small matrices."""
    n = len(m)
    if n == 0:
        return 1
    if n == 1:
        return m[0][0]
    total = 0
    for j in range(n):
        if m[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        total += (-1) ** j * m[0][j] * cofactor_determinant(minor)
    return total


def oracle_discriminant(g: WeightedGraph) -> int:
    q = intersection_matrix(g)
    return cofactor_determinant([[-x for x in row] for row in q])


def _oracle_checks_graph(g: WeightedGraph) -> dict:
    out = {}
    if len(g) <= 10:
        out["discriminant_cofactor"] = oracle_discriminant(g) == discriminant(g)
    return out


def _oracle_checks_model(m: qhp.SurfaceModel, r: qhp.InvariantReport) -> dict:
    out = {}
    if len(m.boundary) <= 10:
        out["dD_cofactor"] = oracle_discriminant(m.boundary) == r.dD
    if len(m.exceptional) <= 10:
        out["dE_cofactor"] = oracle_discriminant(m.exceptional) == r.dE
    if m.kind == qhp.NONEXTENDABLE:
        out["dE_product_formula"] = qhp.nonextendable_dE_formula(m) == r.dE
        out["dD_equals_minus_dE"] = r.dD == -r.dE
    if m.kind == qhp.AFFINE_RULED:
        prod_d = 1
        for fd in m.fiber_data:
            prod_d *= fd["d_D"]
        out["dD_product_formula"] = r.dD == -prod_d
        prod_h = 1
        for x in r.h1_group:
            prod_h *= x
        out["h1_double_count"] = prod_h == r.h1_order
    return out


# -- graph analysis -----------------------------------------------------------------

def analyze_graph(g: WeightedGraph, as_fiber=False, oracle=False):
    doc = {
        "graph": graph_to_doc(g),
        "discriminant": discriminant(g),
        "inertia": list(inertia(g)),
        "negative_definite": is_negative_definite(g),
        "is_chain": g.is_chain(),
        "is_forest": g.is_forest(),
    }
    passed = True
    if g.is_chain() and len(g):
        try:
            doc["e"] = rational(e_invariant(g))
            doc["tilde_e"] = rational(tilde_e(g))
        except (ValueError, ZeroDivisionError):
            pass
    if g.is_forest():
        doc["standard"] = is_standard(g)
        doc["strongly_balanced"] = is_strongly_balanced(g)
    if len(g) and g.is_connected() and is_negative_definite(g):
        doc["singularity"] = singularity_doc(classify_singularity(g))
        doc["rationality"] = qhp.is_rational_singularity(g)
        z = qhp.fundamental_cycle(g)
        doc["fundamental_cycle"] = _jsonable(z.coefficients)
    if as_fiber:
        root, hist = contraction_history(g)
        f = fiber_from_history(hist, root)
        if f.graph != g:
            f = _align_fiber(g, hist, root)
        rep = validate_fiber(f)
        doc["fiber"] = {
            "multiplicities": [f.multiplicity[v] for v in g.ids()],
            "clauses": _jsonable(rep.clauses),
            "passed": rep.passed,
        }
        passed = rep.passed
    if oracle:
        doc["oracle"] = _oracle_checks_graph(g)
        passed = passed and all(doc["oracle"].values())
    return doc, passed


def _align_fiber(g, hist, root):
    f = fiber_from_history(hist, root)
    if set(f.graph.ids()) != set(g.ids()) or f.graph != g:
        raise DocumentError("graph is not a fiber of a P1-ruling")
    return f


# -- commands -----------------------------------------------------------------------

def _read_input(arg: str):
    """Chain shorthand, ``-`` for standard input, or a path to a JSON document."""
    if arg.strip().startswith("["):
        return {"version": DOC_VERSION, "graphs": {"input": arg}}
    try:
        text = sys.stdin.read() if arg == "-" else open(arg, encoding="utf-8").read()
    except OSError as exc:
        raise DocumentError(f"cannot read {arg}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise DocumentError("document must be a JSON object")
    if doc.get("version", DOC_VERSION) != DOC_VERSION:
        raise DocumentError(f"unsupported document version {doc.get('version')!r}")
    return doc


def _graphs_of(doc) -> Dict[str, WeightedGraph]:
    graphs = doc.get("graphs")
    if not isinstance(graphs, dict) or not graphs:
        raise DocumentError("document has no 'graphs'")
    return {name: graph_from_doc(g) for name, g in graphs.items()}


def cmd_analyze(args):
    doc = _read_input(args.input)
    if "kind" in doc:
        m = model_from_doc(doc)
        r = qhp.analyze(m)
        out = {"model": model_to_doc(m), "report": report_to_doc(m, r)}
        passed = r.passed
        if args.oracle:
            out["oracle"] = _oracle_checks_model(m, r)
            passed = passed and all(out["oracle"].values())
        return out, (EXIT_OK if passed else EXIT_FAIL)
    results = {}
    ok = True
    for name, g in _graphs_of(doc).items():
        results[name], passed = analyze_graph(g, as_fiber=args.fiber, oracle=args.oracle)
        ok = ok and passed
    return {"graphs": results}, (EXIT_OK if ok else EXIT_FAIL)


def cmd_balance(args):
    doc = _read_input(args.input)
    results = {}
    for name, g in _graphs_of(doc).items():
        if not g.is_forest():
            raise DocumentError("NON_FOREST: balancing needs a forest")
        try:
            res = standardize(g)
        except StandardizationError as exc:
            raise DocumentError(str(exc)) from exc
        results[name] = {
            "standard": graph_to_doc(res.graph),
            "strongly_balanced": is_strongly_balanced(res.graph),
            "input_standard": is_standard(g),
            "flow": [_op_doc(op) for op in res.operations],
            "identity": len(res.operations) == 0,
        }
    return {"graphs": results}, EXIT_OK


def _op_doc(op):
    name, obj = op
    if name == "transform":
        center = "OUTER" if not obj.inner else _to_json_id(obj.center)
        return {"op": name, "zero": _to_json_id(obj.zero_vertex), "center": center}
    if name == "blowdown":
        return {"op": name, "vertex": _to_json_id(obj)}
    return {"op": name, "kind": obj.kind, "target": _to_json_id(obj.target), "created": _to_json_id(obj.created)}


def _parse_params(pairs: List[str]) -> dict:
    out = {}
    for p in pairs or ():
        if "=" not in p:
            raise DocumentError(f"parameter must be key=value: {p!r}")
        k, v = p.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _csv_rationals(s: str) -> List[str]:
    return [rational(parse_rational(x)) for x in s.split(",") if x.strip()] if s else []


def construct_document(kind: str, raw: dict) -> dict:
    """Model document from ``key=value`` parameters of ``construct``."""
    kind = KIND_ALIASES.get(kind.lower(), kind.upper())
    if kind == qhp.NONEXTENDABLE:
        es = _csv_rationals(raw.get("e", raw.get("tilde_e", "")))
        if "n" in raw and not es:
            # only the number of fibers given: every fiber gets tilde e = 1/2
            es = ["1/2"] * int(raw["n"])
        return {"version": DOC_VERSION, "kind": kind, "params": {"N": int(raw["N"]), "g": int(raw.get("g", 0)), "tilde_e": es}}
    if kind == qhp.AFFINE_RULED:
        fibers = []
        for spec in raw.get("fibers", "").split(";"):
            spec = spec.strip()
            if not spec:
                continue
            chain, _, attach = spec.partition("@")
            # id 0 is the root curve of the rebuilt fiber, so shorthand ids start at 1
            g = parse_chain_shorthand(chain)
            g = g.relabel({v: v + 1 for v in g.ids()})
            a = (int(attach) if attach else len(g) - 1) + 1
            fibers.append({"graph": graph_to_doc(g), "attach": a})
        return {"version": DOC_VERSION, "kind": kind, "params": {"fibers": fibers}}
    if kind in qhp.CSTAR_KINDS:
        params = {"columnar": _csv_rationals(raw.get("columnar", ""))}
        if "N" in raw:
            params["N"] = int(raw["N"])
        if raw.get("f0_tilde"):
            params["f0_tilde"] = rational(parse_rational(raw["f0_tilde"]))
        params["f0_history"] = [_parse_step(s) for s in raw.get("f0", "").split(";") if s.strip()]
        return {"version": DOC_VERSION, "kind": kind, "params": params}
    raise DocumentError(f"unknown construction kind {kind!r}")


def _parse_local(x: str):
    x = x.strip()
    return int(x) if x.lstrip("-").isdigit() else x


def _parse_step(s: str) -> dict:
    """``sprout:v`` or ``subdiv:u,v``."""
    kind, _, rest = s.strip().partition(":")
    kind = kind.lower()
    if kind in ("sprout", "sprouting"):
        return {"kind": SPROUTING, "target": _parse_local(rest)}
    if kind in ("subdiv", "subdivisional"):
        parts = rest.split(",")
        if len(parts) != 2:
            raise DocumentError(f"subdivisional step needs two centers: {s!r}")
        return {"kind": SUBDIVISIONAL, "target": [_parse_local(p) for p in parts]}
    raise DocumentError(f"unknown step {s!r}")


def cmd_construct(args):
    raw = _parse_params(args.param)
    if args.params:
        doc = _read_input(args.params)
        doc.setdefault("kind", args.kind)
    else:
        doc = construct_document(args.kind, raw)
    m = model_from_doc(doc)
    r = qhp.analyze(m)
    out = {"model": model_to_doc(m), "report": report_to_doc(m, r)}
    if args.oracle:
        out["oracle"] = _oracle_checks_model(m, r)
    return out, EXIT_OK


# -- enumeration --------------------------------------------------------------------

def _parse_bounds(s: Optional[str]) -> Dict[str, int]:
    out = {}
    if not s:
        return out
    for part in s.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise DocumentError(f"bound must be key=value: {part!r}")
        k, v = part.split("=", 1)
        try:
            out[k.strip()] = int(v)
        except ValueError as exc:
            raise DocumentError(f"bound {k!r} must be an integer") from exc
    return out


def fractions_up_to(denom: int) -> List[Fraction]:
    vals = {Fraction(a, b) for b in range(2, denom + 1) for a in range(1, b)}
    return sorted(vals)


def enumerate_nonextendable(bounds):
    if not {"n", "N", "denom"} <= set(bounds):
        return
    qs = fractions_up_to(bounds["denom"])
    for g in range(bounds.get("g", 0) + 1):
        for N in range(1, bounds["N"] + 1):
            for n in range(bounds["n"] + 1):
                for es in combinations_with_replacement(qs, n):
                    if sum(es) >= N or (g == 0 and n < 3):
                        continue
                    yield {"version": DOC_VERSION, "kind": qhp.NONEXTENDABLE, "params": {"N": N, "g": g, "tilde_e": [rational(e) for e in es]}}


def _canonical_rooted(g: WeightedGraph, root) -> str:
    def rec(v, parent):
        kids = sorted(rec(y, v) for y in g.neighbors(v) if y != parent)
        return f"({g.weight(v)}" + "".join(kids) + ")"

    return rec(root, None)


def affine_fiber_catalog(max_vertices: int):
    """Distinct fibers (up to isomorphism fixing the section point) with a unique (-1)-curve."""
    seen = {}
    start = [{"kind": SUBDIVISIONAL, "target": ("Dh", 0), "created": 1}]
    frontier = [start]
    out = []
    while frontier:
        nxt = []
        for hist in frontier:
            if len(hist) + 1 > max_vertices:
                continue
            model_steps = [qhp.BlowupStep(s["kind"], s["target"], s["created"]) for s in hist]
            world = [qhp.BlowupStep(SPROUTING, 0, 1)] + model_steps[1:]
            f = fiber_from_history(world, 0)
            key = _canonical_rooted(f.graph, 1)
            if key in seen:
                continue
            seen[key] = hist
            if len(f.minus_one_vertices()) == 1:
                out.append(hist)
            new = len(hist) + 1
            for v in f.graph.ids():
                nxt.append(hist + [{"kind": SPROUTING, "target": v, "created": new}])
            for u, v in f.graph.edges:
                nxt.append(hist + [{"kind": SUBDIVISIONAL, "target": (u, v), "created": new}])
        frontier = nxt
    return out


def enumerate_affine_ruled(bounds):
    if not {"fibers", "vertices"} <= set(bounds):
        return
    catalog = affine_fiber_catalog(bounds["vertices"])
    for k in range(1, bounds["fibers"] + 1):
        for combo in combinations_with_replacement(range(len(catalog)), k):
            specs = [[{"kind": s["kind"], "target": list(s["target"]) if s["kind"] == SUBDIVISIONAL else s["target"], "created": s["created"]} for s in catalog[i]] for i in combo]
            yield {"version": DOC_VERSION, "kind": qhp.AFFINE_RULED, "params": {"fibers": specs}}


def enumerate_kodaira(bounds):
    if not {"n", "mu"} <= set(bounds):
        return
    for label, n, mus, extra, lam, k, k0 in qhp.kodaira_table(bounds["n"], bounds["mu"]):
        yield {
            "label": label,
            "n": n,
            "mus": list(mus),
            **extra,
            "lambda": rational(lam),
            "kappa": rational(k),
            "kappa0": rational(k0),
            "kodaira_S": qhp.sign_to_dimension(k),
            "kodaira_S0": qhp.sign_to_dimension(k0),
        }


def _record(doc):
    try:
        m = model_from_doc(doc)
    except (qhp.ConstructionError, DocumentError):
        return None
    r = qhp.analyze(m)
    return {
        "params": doc["params"],
        "dD": r.dD,
        "dE": r.dE,
        "h1_order": r.h1_order,
        "kappa": _jsonable(r.kappa),
        "kappa0": _jsonable(r.kappa0),
        "alpha": _jsonable(r.alpha),
        "singularities": [d.label() if d else None for d in r.singularities],
        "rationality": r.rationality,
        "ruling_count": r.ruling_count,
        "contractible_count": _jsonable(r.contractible_count),
        "passed": r.passed,
    }


def enumerate_records(kind: str, bounds: Dict[str, int]):
    kind = kind.lower()
    if kind == "kodaira":
        yield from enumerate_kodaira(bounds)
        return
    gen = {"nonextendable": enumerate_nonextendable, "affine-ruled": enumerate_affine_ruled}.get(kind)
    if gen is None:
        raise DocumentError(f"enumeration for {kind!r} is not available")
    for doc in gen(bounds):
        rec = _record(doc)
        if rec is not None:
            yield rec


def cmd_enumerate(args):
    bounds = _parse_bounds(args.bounds)
    rows = list(enumerate_records(args.kind, bounds))
    return {"kind": args.kind, "bounds": bounds, "records": rows, "count": len(rows)}, EXIT_OK


def cmd_fiber(args):
    if args.tilde_e:
        col = columnar_from_tilde_e(parse_rational(args.tilde_e))
        f = col.fiber
        extra = {"A": list(col.A.entries), "B": list(col.B.entries), "mu_C": col.mu}
    else:
        if not args.input:
            raise DocumentError("fiber needs a graph or --tilde-e")
        doc = _read_input(args.input)
        g = next(iter(_graphs_of(doc).values()))
        root, hist = contraction_history(g)
        f = _align_fiber(g, hist, root)
        extra = {}
    rep = validate_fiber(f)
    out = {
        "fiber": graph_to_doc(f.graph),
        "multiplicities": {str(_to_json_id(v)): f.multiplicity[v] for v in f.graph.ids()},
        "history": [_jsonable({"kind": s.kind, "target": _to_json_id(s.target), "created": s.created}) for s in f.history],
        "clauses": _jsonable(rep.clauses),
        "passed": rep.passed,
        **extra,
    }
    return out, (EXIT_OK if rep.passed else EXIT_FAIL)


# -- output -------------------------------------------------------------------------

def _table(doc, prefix="") -> List[str]:
    """Flatten a document into ``dotted.key<TAB>value`` lines."""
    if isinstance(doc, dict) and doc:
        return [line for k in sorted(doc) for line in _table(doc[k], f"{prefix}{k}.")]
    if isinstance(doc, list) and any(isinstance(x, (dict, list)) for x in doc):
        return [line for i, v in enumerate(doc) for line in _table(v, f"{prefix}{i}.")]
    return [f"{prefix.rstrip('.')}\t{json.dumps(doc, sort_keys=True)}"]


def _emit(doc, fmt: str, output: Optional[str]):
    doc = {"version": DOC_VERSION, "artifact_version": __version__, **doc}
    text = json.dumps(doc, sort_keys=True, indent=2) if fmt == "json" else "\n".join(_table(doc))
    if output:
        outdir = os.environ.get("QHPLANES_OUTPUT_DIR")
        path = os.path.join(outdir, output) if outdir and not os.path.isabs(output) else output
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qhplanes", description="Weighted dual graphs and Q-homology plane constructions.")
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default="json")
    common.add_argument("--oracle", action="store_true", help="run brute-force cross-checks")
    common.add_argument("--output", "-o", help="write the report to this file")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="analyze a graph or model document")
    a.add_argument("input", help="path, '-' for stdin, or chain shorthand like [2,1,2]")
    a.add_argument("--fiber", action="store_true", help="treat graphs as fibers of a P1-ruling")
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("balance", parents=[common], help="standard form of a forest boundary")
    b.add_argument("input")
    b.set_defaults(func=cmd_balance)

    c = sub.add_parser("construct", parents=[common], help="run a surface construction")
    c.add_argument("kind", choices=sorted(KIND_ALIASES))
    c.add_argument("param", nargs="*", help="key=value parameters, e.g. N=3 g=0 e=1/2,1/2,1/2")
    c.add_argument("--params", help="read the model document from a file instead")
    c.set_defaults(func=cmd_construct)

    e = sub.add_parser("enumerate", parents=[common], help="bounded enumeration of models")
    e.add_argument("kind", choices=("nonextendable", "affine-ruled", "kodaira"))
    e.add_argument("--bounds", default="", help="k=v,... e.g. n=3,N=3,denom=4")
    e.set_defaults(func=cmd_enumerate)

    f = sub.add_parser("fiber", parents=[common], help="multiplicities and fiber lemmas")
    f.add_argument("input", nargs="?")
    f.add_argument("--tilde-e", help="synthesize the columnar fiber with this tilde e")
    f.set_defaults(func=cmd_fiber)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0, None) else EXIT_OK
    try:
        doc, code = args.func(args)
    except (DocumentError, qhp.ConstructionError, StandardizationError, ValueError) as exc:
        clause = getattr(exc, "clause", None)
        err = {"error": str(exc)}
        if clause:
            err["clause"] = clause
        sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
        return EXIT_PARSE
    _emit(doc, args.format, args.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
