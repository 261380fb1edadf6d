"""Regression-assisted fuzzy inference models for software effort estimation."""

from .fis import (
    Constant,
    FisModel,
    FuzzyVariable,
    InferenceConfig,
    Linear,
    LinguisticTerm,
    MamdaniTerm,
    NoRuleFiredError,
    Rule,
    SugenoOutput,
    Trapezoidal,
    Triangular,
    ValidationError,
    fuzzify,
    firing_strength,
    infer,
    membership_degree,
    predict_many,
    validate_model,
)

__version__ = "0.1.0"

__all__ = [
    "Constant",
    "FisModel",
    "FuzzyVariable",
    "InferenceConfig",
    "Linear",
    "LinguisticTerm",
    "MamdaniTerm",
    "NoRuleFiredError",
    "Rule",
    "SugenoOutput",
    "Trapezoidal",
    "Triangular",
    "ValidationError",
    "fuzzify",
    "firing_strength",
    "infer",
    "membership_degree",
    "predict_many",
    "validate_model",
    "__version__",
]
