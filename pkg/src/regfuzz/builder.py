"""Construct Mamdani and Sugeno effort models from a training project set.

Inputs get triangular partitions anchored on min/median/max (quantiles for
other term counts); the effort range is cut into overlapping sections whose
statistics feed the Sugeno consequents; a default rule grid is derived from
where the training projects actually fall.  An optional seeded tuner nudges
membership breakpoints while a held-out-fold MAE improves.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .data import ProjectSet, most_frequent_resource_level
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
    predict_many,
    require_valid,
)
from .regression import DesignMatrix, fit_ols


class BuildError(ValueError):
    """Training data cannot support the requested model structure."""


@dataclass(frozen=True)
class BuilderConfig:
    terms_per_input: int = 3
    output_sections: int = 3
    section_overlap: float = 0.25  # fraction of a section's width
    tuning: bool = False
    tuning_folds: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.terms_per_input < 2:
            raise ValueError("terms_per_input must be >= 2")
        if self.output_sections < 1:
            raise ValueError("output_sections must be >= 1")
        if not 0.0 <= self.section_overlap < 0.5:
            raise ValueError("section_overlap must be in [0, 0.5)")
        if self.tuning_folds < 2:
            raise ValueError("tuning_folds must be >= 2")


@dataclass(frozen=True)
class OutputSection:
    index: int
    lo: float
    hi: float
    member_ids: tuple[str, ...]

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)


def term_labels(k: int) -> list[str]:
    if k == 2:
        return ["Small", "Large"]
    if k == 3:
        return ["Small", "Average", "Large"]
    return ["Small"] + [f"Average{i}" for i in range(1, k - 1)] + ["Large"]


def _quantile_peaks(values: np.ndarray, k: int) -> np.ndarray:
    return np.percentile(values, np.linspace(0.0, 100.0, k))


def input_partition(name: str, values, config: BuilderConfig) -> FuzzyVariable:
    """Triangular partition with peaks at the value quantiles.

    With the default three terms the peaks are min, median and max; the
    outer triangles get mirrored feet past the data so the edge peaks keep
    full membership at the extremes.  When heavy duplication collapses two
    quantile peaks, the quantiles are retaken over the distinct values.
    """
    values = np.asarray(values, dtype=np.float64)
    distinct = np.unique(values)
    if distinct.size < 3:
        raise BuildError(
            f"input {name!r}: need at least 3 distinct values, got {distinct.size}"
        )
    k = config.terms_per_input
    peaks = _quantile_peaks(values, k)
    if np.any(np.diff(peaks) <= 0):
        peaks = _quantile_peaks(distinct, k)
    if np.any(np.diff(peaks) <= 0):
        raise BuildError(f"input {name!r}: cannot place {k} distinct term peaks")
    labels = term_labels(k)
    terms = []
    for i, label in enumerate(labels):
        left = peaks[i - 1] if i > 0 else peaks[0] - (peaks[1] - peaks[0])
        right = peaks[i + 1] if i < k - 1 else peaks[k - 1] + (peaks[k - 1] - peaks[k - 2])
        terms.append(LinguisticTerm(label, Triangular(left, peaks[i], right)))
    return FuzzyVariable(name, (float(peaks[0]), float(peaks[-1])), tuple(terms))


def binary_variable(name: str) -> FuzzyVariable:
    """Single-term variable for a 0/1 indicator input.

    The lone trapezoid holds full membership at 1 and fades out below 0.7,
    so the indicator contributes only when the level is present; rules leave
    these positions as don't-care.
    """
    term = LinguisticTerm("one", Trapezoidal(0.7, 0.7, 1.0, 1.0))
    return FuzzyVariable(name, (0.7, 1.0), (term,))


def default_feature_names(ps: ProjectSet) -> list[str]:
    """AFP, Team, and one dummy per non-baseline resource level present."""
    names = ["AFP", "Team"]
    levels = sorted({r.resource_level for r in ps.records})
    if len(levels) > 1:
        baseline = most_frequent_resource_level(ps)
        names += [f"ResourceLevel{lvl}" for lvl in levels if lvl != baseline]
    return names


def feature_column(ps: ProjectSet, name: str) -> np.ndarray:
    if name == "AFP":
        return ps.column("afp")
    if name == "Team":
        return ps.column("team_size")
    if name.startswith("ResourceLevel"):
        level = int(name[len("ResourceLevel"):])
        return np.array(
            [1.0 if r.resource_level == level else 0.0 for r in ps.records]
        )
    raise KeyError(f"unknown feature {name!r}")


def project_features(ps: ProjectSet, names) -> DesignMatrix:
    cols = np.column_stack([feature_column(ps, n) for n in names]) if names else \
        np.empty((len(ps), 0))
    return DesignMatrix(tuple(names), cols)


def predict_projects(model: FisModel, ps: ProjectSet) -> np.ndarray:
    X = project_features(ps, model.input_names).values
    return predict_many(model, X)


def output_sections(train: ProjectSet, config: BuilderConfig) -> list[OutputSection]:
    """Equal-width overlapping cover of the training effort range."""
    efforts = train.efforts()
    if efforts.size == 0:
        raise BuildError("empty training set")
    emin, emax = float(efforts.min()), float(efforts.max())
    if not emin < emax:
        raise BuildError("constant training effort: cannot form output sections")
    n, o = config.output_sections, config.section_overlap
    width = (emax - emin) / (n - (n - 1) * o)
    sections = []
    for i in range(n):
        lo = emin + i * width * (1.0 - o)
        hi = lo + width
        ids = tuple(r.id for r, e in zip(train.records, efforts) if lo <= e <= hi)
        sections.append(OutputSection(index=i, lo=lo, hi=hi, member_ids=ids))
    return sections


def _build_input_variables(train, names, config):
    variables = []
    for name in names:
        col = feature_column(train, name)
        distinct = set(np.unique(col).tolist())
        if distinct == {0.0, 1.0}:
            variables.append(binary_variable(name))
        else:
            variables.append(input_partition(name, col, config))
    return tuple(variables)


def _round_half_down(x: float) -> int:
    return int(math.ceil(x - 0.5))


def _rule_grid(variables, train, consequent_refs, make_consequent):
    """One rule per combination of multi-term input terms.

    Each training record is assigned to the cell given by its top-membership
    term per multi-term input (ties toward the lower term).  A populated
    cell's consequent is chosen by nearest reference effort to the cell's
    mean effort; empty cells fall back to matching the normalized rank of
    the antecedent terms onto the consequent scale.
    """
    multi = [i for i, v in enumerate(variables) if len(v.terms) >= 2]
    if not multi:
        raise BuildError("no multi-term inputs: cannot form a rule grid")
    efforts = train.efforts()
    cols = {i: feature_column(train, variables[i].name) for i in multi}

    assignments = []
    for row in range(len(train)):
        key = []
        for i in multi:
            var = variables[i]
            degrees = [
                _scalar_degree(term.mf, cols[i][row]) for term in var.terms
            ]
            key.append(int(np.argmax(degrees)))  # argmax takes the lower index on ties
        assignments.append(tuple(key))

    refs = np.asarray(consequent_refs, dtype=np.float64)
    n_out = refs.size
    rules = []
    for cell in itertools.product(*[range(len(variables[i].terms)) for i in multi]):
        members = [r for r, key in enumerate(assignments) if key == cell]
        if members:
            mean_effort = float(efforts[members].mean())
            out_idx = int(np.argmin(np.abs(refs - mean_effort)))
        else:
            norm = float(
                np.mean([t / (len(variables[i].terms) - 1) for t, i in zip(cell, multi)])
            )
            out_idx = _round_half_down(norm * (n_out - 1)) if n_out > 1 else 0
        antecedent = [None] * len(variables)
        for t, i in zip(cell, multi):
            antecedent[i] = variables[i].terms[t].label
        rules.append(Rule(tuple(antecedent), make_consequent(out_idx)))
    return tuple(rules)


def _scalar_degree(mf, x: float) -> float:
    from .fis import membership_degree

    return membership_degree(mf, float(x))


def rank_matched_rules(variables, n_out: int, make_consequent):
    """Default rule grid when no training data is available.

    Maps each antecedent cell's normalized mean term rank onto the
    consequent scale (halves round down).  This is how the bundled
    reference models get their rules, since their original rule bases were
    never published; such models carry a metadata flag saying so.
    """
    multi = [i for i, v in enumerate(variables) if len(v.terms) >= 2]
    if not multi:
        raise BuildError("no multi-term inputs: cannot form a rule grid")
    rules = []
    for cell in itertools.product(*[range(len(variables[i].terms)) for i in multi]):
        norm = float(
            np.mean([t / (len(variables[i].terms) - 1) for t, i in zip(cell, multi)])
        )
        out_idx = _round_half_down(norm * (n_out - 1)) if n_out > 1 else 0
        antecedent = [None] * len(variables)
        for t, i in zip(cell, multi):
            antecedent[i] = variables[i].terms[t].label
        rules.append(Rule(tuple(antecedent), make_consequent(out_idx)))
    return tuple(rules)


def _base_metadata(config: BuilderConfig, features) -> dict:
    return {
        "builder": {
            "terms_per_input": config.terms_per_input,
            "output_sections": config.output_sections,
            "section_overlap": config.section_overlap,
            "average_interpretation": "median",
        },
        "features": list(features),
    }


def build_mamdani(train: ProjectSet, config: BuilderConfig, features=None) -> FisModel:
    """Mamdani model: effort partitioned like the inputs, min/min/max/centroid."""
    names = list(features) if features else default_feature_names(train)
    variables = _build_input_variables(train, names, config)
    out_cfg = replace(config, terms_per_input=max(config.output_sections, 2))
    out_var = input_partition("Effort", train.efforts(), out_cfg)
    peaks = [t.mf.peak for t in out_var.terms]
    rules = _rule_grid(
        variables, train, peaks,
        lambda i: MamdaniTerm(out_var.terms[i].label),
    )
    model = FisModel(
        kind="mamdani",
        inputs=variables,
        output=out_var,
        rules=rules,
        config=InferenceConfig.defaults_for("mamdani"),
        metadata=_base_metadata(config, names),
    )
    return require_valid(model)


def build_sugeno_constant(train: ProjectSet, config: BuilderConfig, features=None) -> FisModel:
    """Zero-order Sugeno: each rule outputs its section's mean training effort."""
    names = list(features) if features else default_feature_names(train)
    variables = _build_input_variables(train, names, config)
    sections = output_sections(train, config)
    by_id = {r.id: r.effort for r in train.records}
    constants = []
    for s in sections:
        if not s.member_ids:
            raise BuildError(
                f"output section {s.index} [{s.lo:g}, {s.hi:g}] has no training projects"
            )
        constants.append(float(np.mean([by_id[i] for i in s.member_ids])))
    rules = _rule_grid(
        variables, train, [s.midpoint for s in sections],
        lambda i: Constant(constants[i]),
    )
    model = FisModel(
        kind="sugeno0",
        inputs=variables,
        output=SugenoOutput("Effort"),
        rules=rules,
        config=InferenceConfig.defaults_for("sugeno0"),
        metadata=_base_metadata(config, names),
    )
    return require_valid(model)


def build_sugeno_linear(train: ProjectSet, config: BuilderConfig, features=None) -> FisModel:
    """First-order Sugeno: per-section least-squares planes as consequents."""
    names = list(features) if features else default_feature_names(train)
    variables = _build_input_variables(train, names, config)
    sections = output_sections(train, config)
    need = len(names) + 2
    rec_by_id = {r.id: r for r in train.records}
    planes = []
    for s in sections:
        if len(s.member_ids) < need:
            raise BuildError(
                f"output section {s.index} [{s.lo:g}, {s.hi:g}] holds "
                f"{len(s.member_ids)} projects, need at least {need} to fit "
                f"{len(names)} inputs"
            )
        members = ProjectSet(tuple(rec_by_id[i] for i in s.member_ids))
        fit = fit_ols(project_features(members, names), members.efforts())
        planes.append(Linear(tuple(fit.coefficients[1:]), float(fit.coefficients[0])))
    rules = _rule_grid(
        variables, train, [s.midpoint for s in sections],
        lambda i: planes[i],
    )
    model = FisModel(
        kind="sugeno1",
        inputs=variables,
        output=SugenoOutput("Effort"),
        rules=rules,
        config=InferenceConfig.defaults_for("sugeno1"),
        metadata=_base_metadata(config, names),
    )
    return require_valid(model)


BUILDERS = {
    "mamdani": build_mamdani,
    "sugeno0": build_sugeno_constant,
    "sugeno1": build_sugeno_linear,
}


def _tunable_slots(model: FisModel):
    """(variable path, term index, param index) for breakpoints strictly
    inside their variable's universe; single-term indicators stay fixed."""
    slots = []
    spans = []
    targets = list(enumerate(model.inputs))
    if model.kind == "mamdani":
        targets.append(("output", model.output))
    for where, var in targets:
        if len(var.terms) < 2:
            continue
        lo, hi = var.universe
        for t, term in enumerate(var.terms):
            for p, value in enumerate(term.mf.breakpoints):
                if lo < value < hi:
                    slots.append((where, t, p))
                    spans.append(hi - lo)
    return slots, spans


def _with_breakpoint(model: FisModel, slot, value: float):
    where, t, p = slot

    def rebuild(var):
        term = var.terms[t]
        points = list(term.mf.breakpoints)
        points[p] = value
        if any(points[i] > points[i + 1] for i in range(len(points) - 1)):
            return None
        mf = Triangular(*points) if len(points) == 3 else Trapezoidal(*points)
        terms = list(var.terms)
        terms[t] = LinguisticTerm(term.label, mf)
        return replace(var, terms=tuple(terms))

    if where == "output":
        new_var = rebuild(model.output)
        if new_var is None:
            return None
        return replace(model, output=new_var)
    new_var = rebuild(model.inputs[where])
    if new_var is None:
        return None
    inputs = list(model.inputs)
    inputs[where] = new_var
    return replace(model, inputs=tuple(inputs))


def _fold_mae(model: FisModel, folds) -> float:
    total = 0.0
    for X, e in folds:
        try:
            pred = predict_many(model, X)
        except NoRuleFiredError:
            return math.inf
        total += float(np.mean(np.abs(e - pred)))
    return total / len(folds)


def tune(model: FisModel, train: ProjectSet, config: BuilderConfig) -> FisModel:
    """Seeded coordinate descent on membership breakpoints.

    Each move shifts one breakpoint by 10% of its variable's span and is
    kept only when the mean held-out-fold MAE strictly improves; ordering
    violations and moves that break inference are rejected.  At most 50
    sweeps; the fold split and coordinate order are fixed by config.seed.
    """
    if not config.tuning:
        raise ValueError("tuning is disabled in this configuration")
    n = len(train)
    if n < config.tuning_folds:
        raise ValueError(f"need at least {config.tuning_folds} records to tune, got {n}")

    rng = np.random.default_rng(config.seed)
    perm = rng.permutation(n)
    X_all = project_features(train, model.input_names).values
    e_all = train.efforts()
    folds = []
    for part in np.array_split(perm, config.tuning_folds):
        folds.append((np.ascontiguousarray(X_all[part]), e_all[part]))

    best = model
    best_score = _fold_mae(model, folds)
    slots, spans = _tunable_slots(model)
    if not slots:
        return best

    order = np.arange(len(slots))
    for _ in range(50):
        rng.shuffle(order)
        improved = False
        for idx in order:
            slot, span = slots[idx], spans[idx]
            where, t, p = slot
            var = best.output if where == "output" else best.inputs[where]
            current = var.terms[t].mf.breakpoints[p]
            for delta in (0.1 * span, -0.1 * span):
                candidate = _with_breakpoint(best, slot, current + delta)
                if candidate is None:
                    continue
                score = _fold_mae(candidate, folds)
                if score < best_score:
                    best, best_score = candidate, score
                    improved = True
                    break
        if not improved:
            break
    return best
