"""JSON serialization of FIS models and access to the bundled reference models.

A model document lists each variable's terms as {label, type, params} with
"trimf"/"trapmf" shapes, rules as per-input term labels (null = don't care),
and consequents as {"term": label} | {"const": c} | {"linear": [p1..pk, p0]}
with the intercept last.
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .fis import (
    Constant,
    FisModel,
    FuzzyVariable,
    InferenceConfig,
    Linear,
    LinguisticTerm,
    MamdaniTerm,
    Rule,
    SugenoOutput,
    Trapezoidal,
    Triangular,
    ValidationError,
    require_valid,
)

_MF_TYPES = {"trimf": (Triangular, 3), "trapmf": (Trapezoidal, 4)}


def _term_to_dict(term: LinguisticTerm) -> dict:
    kind = "trimf" if isinstance(term.mf, Triangular) else "trapmf"
    return {"label": term.label, "type": kind, "params": list(term.mf.breakpoints)}


def _term_from_dict(d: dict) -> LinguisticTerm:
    try:
        cls, arity = _MF_TYPES[d["type"]]
    except KeyError:
        raise ValidationError(f"unknown membership type {d.get('type')!r}") from None
    params = [float(p) for p in d["params"]]
    if len(params) != arity:
        raise ValidationError(
            f"term {d.get('label')!r}: {d['type']} needs {arity} params, got {len(params)}"
        )
    return LinguisticTerm(str(d["label"]), cls(*params))


def _variable_to_dict(var: FuzzyVariable) -> dict:
    return {
        "name": var.name,
        "universe": [var.universe[0], var.universe[1]],
        "terms": [_term_to_dict(t) for t in var.terms],
    }


def _variable_from_dict(d: dict) -> FuzzyVariable:
    lo, hi = d["universe"]
    return FuzzyVariable(
        str(d["name"]),
        (float(lo), float(hi)),
        tuple(_term_from_dict(t) for t in d["terms"]),
    )


def _consequent_to_dict(c) -> dict:
    if isinstance(c, MamdaniTerm):
        return {"term": c.label}
    if isinstance(c, Constant):
        return {"const": c.value}
    return {"linear": list(c.coefficients) + [c.intercept]}  # intercept last


def _consequent_from_dict(d: dict):
    if "term" in d:
        return MamdaniTerm(str(d["term"]))
    if "const" in d:
        return Constant(float(d["const"]))
    if "linear" in d:
        params = [float(p) for p in d["linear"]]
        if len(params) < 1:
            raise ValidationError("linear consequent needs at least an intercept")
        return Linear(tuple(params[:-1]), params[-1])
    raise ValidationError(f"unknown consequent {sorted(d)!r}")


def model_to_dict(model: FisModel) -> dict:
    if isinstance(model.output, FuzzyVariable):
        output = _variable_to_dict(model.output)
    else:
        output = {"name": model.output.name, "units": model.output.units}
    doc = {
        "kind": model.kind,
        "config": {
            "and_method": model.config.and_method,
            "implication": model.config.implication,
            "aggregation": model.config.aggregation,
            "defuzz": model.config.defuzz,
            "resolution": model.config.resolution,
        },
        "inputs": [_variable_to_dict(v) for v in model.inputs],
        "output": output,
        "rules": [
            {
                "if": list(r.antecedent),
                "then": _consequent_to_dict(r.consequent),
                "weight": r.weight,
            }
            for r in model.rules
        ],
    }
    if model.metadata:
        doc["metadata"] = model.metadata
    return doc


def model_from_dict(doc: dict) -> FisModel:
    try:
        kind = doc["kind"]
        cfg = doc.get("config", {})
        config = InferenceConfig(
            and_method=cfg.get("and_method", "min" if kind == "mamdani" else "product"),
            implication=cfg.get("implication", "min"),
            aggregation=cfg.get("aggregation", "max"),
            defuzz=cfg.get(
                "defuzz", "centroid" if kind == "mamdani" else "weighted-average"
            ),
            resolution=int(cfg.get("resolution", 1001)),
        )
        out = doc["output"]
        output = (
            _variable_from_dict(out)
            if "terms" in out
            else SugenoOutput(str(out["name"]), str(out.get("units", "person-hours")))
        )
        rules = tuple(
            Rule(
                tuple(None if lbl is None else str(lbl) for lbl in r["if"]),
                _consequent_from_dict(r["then"]),
                float(r.get("weight", 1.0)),
            )
            for r in doc["rules"]
        )
        return FisModel(
            kind=str(kind),
            inputs=tuple(_variable_from_dict(v) for v in doc["inputs"]),
            output=output,
            rules=rules,
            config=config,
            metadata=dict(doc.get("metadata", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed model document: {exc}") from exc


def save_model(model: FisModel, path) -> None:
    Path(path).write_text(
        json.dumps(model_to_dict(model), indent=2, sort_keys=False) + "\n",
        encoding="utf-8",
    )


def load_model(path, validate: bool = True) -> FisModel:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    model = model_from_dict(doc)
    return require_valid(model) if validate else model


# ---------------------------------------------------------------------------
# Bundled reference models

def _fixture_root():
    return resources.files("regfuzz.fixtures")


def available_fixtures() -> list[str]:
    return sorted(
        p.name[: -len(".json")]
        for p in _fixture_root().iterdir()
        if p.name.endswith(".json") and p.name != "mlr_equations.json"
    )


def load_fixture(name: str, validate: bool = True) -> FisModel:
    """Load a bundled reference model, e.g. "band2_sugeno1"."""
    ref = _fixture_root() / f"{name}.json"
    try:
        text = ref.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise KeyError(
            f"no bundled model {name!r}; available: {', '.join(available_fixtures())}"
        ) from None
    model = model_from_dict(json.loads(text))
    return require_valid(model) if validate else model


def load_mlr_equations() -> dict:
    """Bundled regression planes, keyed by band name."""
    text = (_fixture_root() / "mlr_equations.json").read_text(encoding="utf-8")
    return json.loads(text)
