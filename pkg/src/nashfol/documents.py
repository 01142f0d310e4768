"""JSON document codecs for the CLI and the scenario corpus.

Polynomials inside documents are grammar strings (the term-list encoding from
``poly_to_doc`` is also accepted anywhere a polynomial is expected).  Bracket
and bivector entry keys are "i,j" with 0-based indices.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Sequence

from .algebroid import AlmostLieAlgebroid, AnchoredBundle
from .charts import ChartMap
from .nash import CurveGerm
from .poisson import Bivector
from .poly import MultiPoly, parse_rational, poly_from_doc

CURVE_VAR = ("t",)


class DocumentError(ValueError):
    """A JSON document is malformed or references something undefined."""


def parse_point(text: str) -> tuple[Fraction, ...]:
    """Comma-separated rationals, e.g. "1,2,-1/3"."""
    parts = [s for s in text.split(",") if s.strip()]
    if not parts:
        raise DocumentError(f"empty point {text!r}")
    try:
        return tuple(parse_rational(s) for s in parts)
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc


def point_from_doc(doc) -> tuple[Fraction, ...]:
    if not isinstance(doc, list) or not doc:
        raise DocumentError("a point is a non-empty list of rationals")
    try:
        return tuple(parse_rational(str(c)) for c in doc)
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc


def point_to_doc(point: Sequence[Fraction]) -> list[str]:
    return [str(c) for c in point]


def _poly(doc, variables) -> MultiPoly:
    try:
        return poly_from_doc(doc, variables)
    except (ValueError, KeyError, TypeError) as exc:
        raise DocumentError(f"bad polynomial {doc!r}: {exc}") from exc


def _pair_key(key: str, bound: int) -> tuple[int, int]:
    try:
        i_text, j_text = key.split(",")
        i, j = int(i_text), int(j_text)
    except ValueError as exc:
        raise DocumentError(f"bad index pair {key!r}, expected \"i,j\"") from exc
    if not (0 <= i < bound and 0 <= j < bound):
        raise DocumentError(f"index pair {key!r} out of range (0-based, < {bound})")
    if i == j:
        raise DocumentError(f"diagonal index pair {key!r}")
    return i, j


def algebroid_from_doc(doc):
    """Read an algebroid document.

    Returns an AlmostLieAlgebroid when "brackets" is present, otherwise the
    bare AnchoredBundle.
    """
    if not isinstance(doc, dict):
        raise DocumentError("algebroid document must be an object")
    try:
        variables = tuple(str(v) for v in doc["vars"])
        n = int(doc["rank"])
        anchor_doc = doc["anchor"]
    except KeyError as exc:
        raise DocumentError(f"algebroid document missing {exc}") from exc
    if len(anchor_doc) != len(variables):
        raise DocumentError(
            f"anchor has {len(anchor_doc)} rows for {len(variables)} variables"
        )
    anchor = []
    for row in anchor_doc:
        if len(row) != n:
            raise DocumentError(f"anchor row of width {len(row)}, expected {n}")
        anchor.append([_poly(e, variables) for e in row])
    try:
        bundle = AnchoredBundle(variables, anchor)
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc
    if "brackets" not in doc:
        return bundle
    structure = {}
    for key, section in doc["brackets"].items():
        pair = _pair_key(key, n)
        if len(section) != n:
            raise DocumentError(f"bracket {key!r} has {len(section)} components")
        structure[pair] = [_poly(e, variables) for e in section]
    try:
        return AlmostLieAlgebroid(bundle, structure)
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc


def algebroid_to_doc(a) -> dict:
    bundle = a.bundle if isinstance(a, AlmostLieAlgebroid) else a
    doc = {
        "vars": list(bundle.base_vars),
        "rank": bundle.fiber_rank,
        "anchor": [[str(e) for e in row] for row in bundle.anchor],
    }
    if isinstance(a, AlmostLieAlgebroid):
        doc["brackets"] = {
            f"{i},{j}": [str(p) for p in section]
            for (i, j), section in sorted(a.structure.items())
        }
    return doc


def bivector_from_doc(doc) -> Bivector:
    if not isinstance(doc, dict):
        raise DocumentError("bivector document must be an object")
    try:
        variables = tuple(str(v) for v in doc["vars"])
        entries_doc = doc["pi"]
    except KeyError as exc:
        raise DocumentError(f"bivector document missing {exc}") from exc
    d = len(variables)
    entries = {}
    for key, value in entries_doc.items():
        i, j = _pair_key(key, d)
        if i > j:
            raise DocumentError(f"entry {key!r} must use i < j (lower half is implied)")
        entries[(i, j)] = _poly(value, variables)
    return Bivector.from_upper_entries(variables, entries)


def bivector_to_doc(pi: Bivector) -> dict:
    d = pi.dim
    entries = {}
    for i in range(d):
        for j in range(i + 1, d):
            if not pi.matrix[i][j].is_zero():
                entries[f"{i},{j}"] = str(pi.matrix[i][j])
    return {"vars": list(pi.vars), "pi": entries}


def curve_from_doc(doc) -> CurveGerm:
    if not isinstance(doc, dict):
        raise DocumentError("curve document must be an object")
    try:
        target = tuple(parse_rational(str(c)) for c in doc["target"])
        components = tuple(_poly(c, CURVE_VAR) for c in doc["components"])
    except KeyError as exc:
        raise DocumentError(f"curve document missing {exc}") from exc
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc
    try:
        return CurveGerm(target, components)
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc


def curve_to_doc(curve: CurveGerm) -> dict:
    return {
        "target": [str(c) for c in curve.target],
        "components": [str(p) for p in curve.components],
    }


def chart_from_doc(doc, target_vars: Sequence[str]) -> ChartMap:
    """Read a chart document; the target variables come from the input it
    will be applied to."""
    if not isinstance(doc, dict):
        raise DocumentError("chart document must be an object")
    try:
        chart_vars = tuple(str(v) for v in doc["chart_vars"])
        phi = [_poly(p, chart_vars) for p in doc["phi"]]
    except KeyError as exc:
        raise DocumentError(f"chart document missing {exc}") from exc
    exceptional = None
    if doc.get("exceptional") is not None:
        exceptional = _poly(doc["exceptional"], chart_vars)
    try:
        return ChartMap(chart_vars, tuple(target_vars), phi, exceptional=exceptional)
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc


def kernel_gens_from_doc(doc, variables: Sequence[str], n: int) -> list[list[MultiPoly]]:
    gens = []
    for idx, section in enumerate(doc):
        if len(section) != n:
            raise DocumentError(
                f"kernel generator {idx} has {len(section)} components, expected {n}"
            )
        gens.append([_poly(e, variables) for e in section])
    return gens


def load_json(path: str):
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path} is not valid JSON: {exc}") from exc
