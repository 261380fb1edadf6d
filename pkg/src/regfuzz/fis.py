"""Mamdani and Sugeno (zero- and first-order) fuzzy inference systems.

Models are immutable value objects; every operation here is a pure function,
so everything in this module is safe to call from multiple threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import kernels
from ._kernels_py import SHAPE_TRAPEZOID, SHAPE_TRIANGLE, mf_values


class ValidationError(ValueError):
    """A model or membership function violates a structural invariant."""


class NoRuleFiredError(RuntimeError):
    """No rule produced any output mass for the given input point."""

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = tuple(indices)


@dataclass(frozen=True)
class Triangular:
    """Triangle with feet at a and c and peak at b (a <= b <= c)."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if not (self.a <= self.b <= self.c):
            raise ValidationError(
                f"triangular breakpoints must satisfy a <= b <= c, got "
                f"[{self.a}, {self.b}, {self.c}]"
            )

    @property
    def breakpoints(self):
        return (self.a, self.b, self.c)

    @property
    def peak(self) -> float:
        return self.b


@dataclass(frozen=True)
class Trapezoidal:
    """Trapezoid with feet at a and d and plateau on [b, c]."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not (self.a <= self.b <= self.c <= self.d):
            raise ValidationError(
                f"trapezoidal breakpoints must satisfy a <= b <= c <= d, got "
                f"[{self.a}, {self.b}, {self.c}, {self.d}]"
            )

    @property
    def breakpoints(self):
        return (self.a, self.b, self.c, self.d)

    @property
    def peak(self) -> float:
        return 0.5 * (self.b + self.c)


MembershipFunction = Union[Triangular, Trapezoidal]


def membership_degree(mf: MembershipFunction, x: float) -> float:
    """Piecewise-linear degree of x under mf, exactly 0/1 on the flat parts.

    Degenerate equal breakpoints form vertical edges whose degree at the
    shared abscissa is taken from the plateau side.  Must stay in lockstep
    with the array and compiled kernels.
    """
    if isinstance(mf, Triangular):
        a, b, c = mf.a, mf.b, mf.c
        if x < a or x > c:
            return 0.0
        if x == b:
            return 1.0
        if x < b:
            return (x - a) / (b - a)
        return (c - x) / (c - b)
    a, b, c, d = mf.a, mf.b, mf.c, mf.d
    if x < a or x > d:
        return 0.0
    if b <= x <= c:
        return 1.0
    if x < b:
        return (x - a) / (b - a)
    return (d - x) / (d - c)


@dataclass(frozen=True)
class LinguisticTerm:
    label: str
    mf: MembershipFunction


@dataclass(frozen=True)
class FuzzyVariable:
    """A named variable with a universe of discourse and its linguistic terms.

    Values outside the universe are legal inputs; they are evaluated by the
    same piecewise formulas with no clamping.
    """

    name: str
    universe: tuple[float, float]
    terms: tuple[LinguisticTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "universe", tuple(self.universe))

    def term(self, label: str) -> LinguisticTerm:
        for t in self.terms:
            if t.label == label:
                return t
        raise KeyError(f"variable {self.name!r} has no term {label!r}")

    def labels(self):
        return [t.label for t in self.terms]


def fuzzify(var: FuzzyVariable, x: float) -> dict[str, float]:
    """Degrees of x under every term of var (they need not sum to 1)."""
    return {t.label: membership_degree(t.mf, x) for t in var.terms}


@dataclass(frozen=True)
class MamdaniTerm:
    """Consequent naming a term of the output variable."""

    label: str


@dataclass(frozen=True)
class Constant:
    """Zero-order consequent: a constant output level."""

    value: float


@dataclass(frozen=True)
class Linear:
    """First-order consequent: intercept + sum(coefficients * inputs)."""

    coefficients: tuple[float, ...]
    intercept: float

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(self.coefficients))

    def __call__(self, values: Sequence[float]) -> float:
        acc = self.intercept
        for c, v in zip(self.coefficients, values):
            acc += c * v
        return acc


Consequent = Union[MamdaniTerm, Constant, Linear]


@dataclass(frozen=True)
class Rule:
    """AND-connected rule; antecedent entries are term labels or None (don't care)."""

    antecedent: tuple[Optional[str], ...]
    consequent: Consequent
    weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "antecedent", tuple(self.antecedent))


@dataclass(frozen=True)
class SugenoOutput:
    """Output declaration for Sugeno models (no fuzzy partition)."""

    name: str
    units: str = "person-hours"


@dataclass(frozen=True)
class InferenceConfig:
    and_method: str = "min"  # "min" | "product"
    implication: str = "min"
    aggregation: str = "max"
    defuzz: str = "centroid"  # "centroid" | "weighted-average"
    resolution: int = 1001

    @classmethod
    def defaults_for(cls, kind: str) -> "InferenceConfig":
        if kind == "mamdani":
            return cls(and_method="min", defuzz="centroid")
        return cls(and_method="product", defuzz="weighted-average")


@dataclass(frozen=True)
class FisModel:
    kind: str  # "mamdani" | "sugeno0" | "sugeno1"
    inputs: tuple[FuzzyVariable, ...]
    output: Union[FuzzyVariable, SugenoOutput]
    rules: tuple[Rule, ...]
    config: InferenceConfig
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "rules", tuple(self.rules))

    @property
    def input_names(self):
        return [v.name for v in self.inputs]


_CONSEQUENT_FOR_KIND = {"mamdani": MamdaniTerm, "sugeno0": Constant, "sugeno1": Linear}


def midpoint_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """n midpoint samples of [lo, hi]; odd n puts a sample at the center."""
    h = (hi - lo) / n
    return lo + (np.arange(n) + 0.5) * h


_SHAPE_CODE = {Triangular: SHAPE_TRIANGLE, Trapezoidal: SHAPE_TRAPEZOID}


def _shape_and_params(mf: MembershipFunction):
    code = _SHAPE_CODE[type(mf)]
    p = list(mf.breakpoints)
    if len(p) == 3:
        p.append(p[2])  # triangle packed as [a, b, c, c]; 4th slot unused
    return code, p


def validate_model(model: FisModel) -> list[str]:
    """Collect every structural violation; an empty list means the model is ok.

    Coverage is checked on a `resolution`-point midpoint grid of each
    variable's universe: the best term degree must be at least 0.01
    everywhere, so no in-universe point can silently fire nothing.
    """
    v: list[str] = []
    cfg = model.config

    if model.kind not in _CONSEQUENT_FOR_KIND:
        v.append(f"unknown model kind {model.kind!r}")
        return v
    if cfg.and_method not in ("min", "product"):
        v.append(f"and_method must be 'min' or 'product', got {cfg.and_method!r}")
    if cfg.resolution < 101 or cfg.resolution % 2 == 0:
        v.append(f"resolution must be odd and >= 101, got {cfg.resolution}")
    if not model.rules:
        v.append("model has no rules")

    variables = list(model.inputs)
    if model.kind == "mamdani":
        if isinstance(model.output, FuzzyVariable):
            variables.append(model.output)
        else:
            v.append("mamdani model requires a partitioned output variable")
    elif isinstance(model.output, FuzzyVariable):
        v.append("sugeno model output must not carry a fuzzy partition")

    for var in variables:
        lo, hi = var.universe
        if not lo < hi:
            v.append(f"variable {var.name!r}: universe lo must be < hi")
            continue
        if not var.terms:
            v.append(f"variable {var.name!r}: at least one term required")
            continue
        labels = var.labels()
        if len(set(labels)) != len(labels):
            v.append(f"variable {var.name!r}: duplicate term labels")
        grid = midpoint_grid(lo, hi, cfg.resolution)
        best = np.zeros_like(grid)
        for t in var.terms:
            code, params = _shape_and_params(t.mf)
            np.maximum(best, mf_values(grid, code, params), out=best)
        if best.min() < 0.01:
            gap = grid[int(np.argmin(best))]
            v.append(
                f"universe coverage: variable {var.name!r} has max term degree "
                f"{best.min():.4g} < 0.01 near x={gap:.6g}"
            )

    expected = _CONSEQUENT_FOR_KIND[model.kind]
    n_inputs = len(model.inputs)
    for i, rule in enumerate(model.rules):
        if len(rule.antecedent) != n_inputs:
            v.append(f"rule {i}: antecedent arity {len(rule.antecedent)} != {n_inputs} inputs")
            continue
        if all(label is None for label in rule.antecedent):
            v.append(f"rule {i}: at least one non-don't-care clause required")
        for var, label in zip(model.inputs, rule.antecedent):
            if label is not None and label not in var.labels():
                v.append(f"rule {i}: unknown term label {label!r} for input {var.name!r}")
        if not 0.0 < rule.weight <= 1.0:
            v.append(f"rule {i}: weight must be in (0, 1], got {rule.weight}")
        if not isinstance(rule.consequent, expected):
            v.append(
                f"rule {i}: consequent kind {type(rule.consequent).__name__} "
                f"inconsistent with model kind {model.kind!r}"
            )
            continue
        if isinstance(rule.consequent, MamdaniTerm):
            if (
                isinstance(model.output, FuzzyVariable)
                and rule.consequent.label not in model.output.labels()
            ):
                v.append(f"rule {i}: unknown output term {rule.consequent.label!r}")
        elif isinstance(rule.consequent, Linear):
            if len(rule.consequent.coefficients) != n_inputs:
                v.append(
                    f"rule {i}: consequent arity {len(rule.consequent.coefficients)} "
                    f"!= {n_inputs} inputs"
                )
    return v


def require_valid(model: FisModel) -> FisModel:
    violations = validate_model(model)
    if violations:
        raise ValidationError("; ".join(violations))
    return model


def firing_strength(
    rule: Rule, degrees: Sequence[dict[str, float]], and_method: str = "min"
) -> float:
    """weight x (min or product) over the rule's non-don't-care clause degrees."""
    clause = [d[label] for label, d in zip(rule.antecedent, degrees) if label is not None]
    if not clause:
        raise ValidationError("rule has no non-don't-care clause")
    if and_method == "min":
        strength = min(clause)
    elif and_method == "product":
        strength = 1.0
        for c in clause:
            strength *= c
    else:
        raise ValidationError(f"unknown and_method {and_method!r}")
    return rule.weight * strength


def _pack(model: FisModel):
    """Flatten a model into the numeric arrays the batch kernels consume."""
    n_rules = len(model.rules)
    n_inputs = len(model.inputs)
    ante_shape = np.full((n_rules, n_inputs), -1, dtype=np.int8)
    ante_params = np.zeros((n_rules, n_inputs, 4), dtype=np.float64)
    weights = np.empty(n_rules, dtype=np.float64)
    for r, rule in enumerate(model.rules):
        weights[r] = rule.weight
        for k, (var, label) in enumerate(zip(model.inputs, rule.antecedent)):
            if label is None:
                continue
            code, params = _shape_and_params(var.term(label).mf)
            ante_shape[r, k] = code
            ante_params[r, k, :] = params
    and_code = 0 if model.config.and_method == "min" else 1

    if model.kind == "mamdani":
        cons_shape = np.empty(n_rules, dtype=np.int8)
        cons_params = np.zeros((n_rules, 4), dtype=np.float64)
        for r, rule in enumerate(model.rules):
            code, params = _shape_and_params(model.output.term(rule.consequent.label).mf)
            cons_shape[r] = code
            cons_params[r, :] = params
        lo, hi = model.output.universe
        return {
            "kind": "mamdani",
            "and": and_code,
            "ante_shape": ante_shape,
            "ante_params": ante_params,
            "weights": weights,
            "cons_shape": cons_shape,
            "cons_params": cons_params,
            "lo": float(lo),
            "hi": float(hi),
            "resolution": int(model.config.resolution),
        }

    cons = np.zeros((n_rules, n_inputs + 1), dtype=np.float64)
    for r, rule in enumerate(model.rules):
        if isinstance(rule.consequent, Constant):
            cons[r, n_inputs] = rule.consequent.value
        else:
            cons[r, :n_inputs] = rule.consequent.coefficients
            cons[r, n_inputs] = rule.consequent.intercept
    return {
        "kind": "sugeno",
        "and": and_code,
        "ante_shape": ante_shape,
        "ante_params": ante_params,
        "weights": weights,
        "cons": cons,
    }


def predict_many(model: FisModel, X) -> np.ndarray:
    """Crisp outputs for every row of X (rows ordered like model.inputs).

    Raises NoRuleFiredError naming the offending rows when any input point
    accumulates zero rule mass.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != len(model.inputs):
        raise ValueError(
            f"expected {len(model.inputs)} input columns, got {X.shape[1]}"
        )
    packed = _pack(model)
    out = np.empty(X.shape[0], dtype=np.float64)
    fired = np.empty(X.shape[0], dtype=np.uint8)
    if packed["kind"] == "mamdani":
        kernels.mamdani_batch(
            X,
            packed["and"],
            packed["ante_shape"],
            packed["ante_params"],
            packed["weights"],
            packed["cons_shape"],
            packed["cons_params"],
            packed["lo"],
            packed["hi"],
            packed["resolution"],
            out,
            fired,
        )
    else:
        kernels.sugeno_batch(
            X,
            packed["and"],
            packed["ante_shape"],
            packed["ante_params"],
            packed["weights"],
            packed["cons"],
            out,
            fired,
        )
    if not fired.all():
        bad = np.flatnonzero(fired == 0)
        first = X[bad[0]].tolist()
        raise NoRuleFiredError(
            f"no rule fired for {len(bad)} input point(s); first offender "
            f"{dict(zip(model.input_names, first))}",
            indices=bad.tolist(),
        )
    return out


def infer(model: FisModel, values: Sequence[float]) -> float:
    """Crisp output for one input point (ordered like model.inputs)."""
    return float(predict_many(model, np.asarray(values, dtype=np.float64))[0])
