"""JSON instance files and run reports.  Every rational is written as "p/q"."""
from __future__ import annotations

import json
from fractions import Fraction

from .valuations import Instance, ValuationError, as_fraction, build_valuation, fraction_str


class SchemaError(ValueError):
    """Malformed instance file; the message starts with the offending field path."""


def _require(obj, key, path):
    if key not in obj:
        raise SchemaError(f"{path}{key}: missing required field")
    return obj[key]


def instance_from_dict(data: dict) -> tuple:
    """``(Instance, options)`` from a decoded instance document.

    Options are the optional top-level ``epsilon``, ``variant``, ``seed``
    and ``family`` fields.
    """
    if not isinstance(data, dict):
        raise SchemaError("$: expected an object")
    m = _require(data, "m", "")
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise SchemaError(f"m: expected a positive integer, got {m!r}")
    bidders = _require(data, "bidders", "")
    if not isinstance(bidders, list) or not bidders:
        raise SchemaError("bidders: expected a non-empty list")
    vals = []
    for i, spec in enumerate(bidders):
        path = f"bidders[{i}]"
        if not isinstance(spec, dict):
            raise SchemaError(f"{path}: expected an object")
        for key, val in spec.items():
            if key in ("value", "per_unit", "cap"):
                try:
                    if as_fraction(val) < 0:
                        raise SchemaError(f"{path}.{key}: negative value {val!r}")
                except ValuationError as exc:
                    raise SchemaError(f"{path}.{key}: {exc}") from exc
        try:
            vals.append(build_valuation(spec, m))
        except ValuationError as exc:
            raise SchemaError(f"{path}: {exc}") from exc
    options = {}
    if "epsilon" in data:
        try:
            options["epsilon"] = as_fraction(data["epsilon"])
        except ValuationError as exc:
            raise SchemaError(f"epsilon: {exc}") from exc
    for key in ("variant", "seed", "family"):
        if key in data:
            options[key] = data[key]
    strict = bool(data.get("strictly_increasing", False))
    return Instance(m, vals, strict), options


def parse_instance(path) -> tuple:
    """Read an instance file; see :func:`instance_from_dict`."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"$: invalid JSON ({exc})") from exc
    return instance_from_dict(data)


def instance_to_dict(inst: Instance, **options) -> dict:
    out = {"m": inst.m, "bidders": [v.to_dict() for v in inst.bidders]}
    if inst.strictly_increasing:
        out["strictly_increasing"] = True
    for key, val in options.items():
        if val is not None:
            out[key] = jsonable(val)
    return out


def jsonable(x):
    """Recursively replace Fractions by "p/q" strings and tuples by lists."""
    if isinstance(x, Fraction):
        return fraction_str(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return x


def dumps(doc) -> str:
    """Byte-stable JSON text."""
    return json.dumps(jsonable(doc), indent=2, sort_keys=True) + "\n"


def distribution_to_dict(dist) -> dict:
    return {"base": list(dist.base),
            "nodes": [{"bidders": [n.lo, n.hi], "weight": n.weight} for n in dist.nodes],
            "inclusion": dist.inclusion_probabilities()}


def report_from_outcome(inst, epsilon, variant, outcome, opt=None,
                        queries=None, extra=None) -> dict:
    """Run report for one mechanism outcome.

    ``opt`` (unweighted optimum, when computable) adds the ``(1 - eps) OPT``
    check; ``payments`` is omitted when they were not computed.
    """
    rep = {"input": {"m": inst.m, "n": inst.n, "epsilon": Fraction(epsilon),
                     "variant": variant},
           "distribution": distribution_to_dict(outcome.distribution),
           "expected_welfare": outcome.expected_welfare}
    if opt is not None:
        bound = (1 - Fraction(epsilon)) * opt
        rep["approximation"] = {"opt": opt, "bound": bound,
                                "holds": outcome.expected_welfare >= bound}
    if outcome.payments and any(p is not None for p in outcome.payments):
        rep["payments"] = outcome.payments
    if outcome.sampled is not None:
        rep["sample"] = {"seed": outcome.seed, "allocation": list(outcome.sampled)}
    if queries is not None:
        rep["queries"] = queries
    if extra:
        rep.update(extra)
    return rep
