"""Shared fixtures: tiny hand-checkable models and synthetic project sets."""
import numpy as np
import pytest


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance scorecard where it cannot be missed."""
    try:
        from tests.test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

from regfuzz.data import ProjectRecord, ProjectSet
from regfuzz.fis import (
    FisModel,
    FuzzyVariable,
    InferenceConfig,
    LinguisticTerm,
    MamdaniTerm,
    Rule,
    SugenoOutput,
    Triangular,
)


@pytest.fixture
def two_term_var():
    """One input over [0, 10] whose Small/Large degrees always sum to 1."""
    return FuzzyVariable(
        "x",
        (0.0, 10.0),
        (
            LinguisticTerm("Small", Triangular(-10.0, 0.0, 10.0)),
            LinguisticTerm("Large", Triangular(0.0, 10.0, 20.0)),
        ),
    )


@pytest.fixture
def symmetric_mamdani(two_term_var):
    """Mirror-symmetric single-input Mamdani model; infer(5) must sit at 50."""
    out = FuzzyVariable(
        "y",
        (25.0, 75.0),
        (
            LinguisticTerm("Low", Triangular(0.0, 25.0, 55.0)),
            LinguisticTerm("High", Triangular(45.0, 75.0, 100.0)),
        ),
    )
    return FisModel(
        kind="mamdani",
        inputs=(two_term_var,),
        output=out,
        rules=(
            Rule(("Small",), MamdaniTerm("Low")),
            Rule(("Large",), MamdaniTerm("High")),
        ),
        config=InferenceConfig.defaults_for("mamdani"),
    )


def make_record(i, afp=10.0, team=2.0, rl=1, dev="new", quality="A", effort=100.0):
    return ProjectRecord(str(i), afp, team, rl, dev, quality, effort)


@pytest.fixture
def linear_projects():
    """40 projects with effort almost exactly 8*AFP + 50*Team (+500 for level 2)."""
    rng = np.random.default_rng(4)
    recs = []
    for i in range(40):
        afp = float(rng.uniform(100, 2000))
        team = float(rng.integers(2, 30))
        rl = int(rng.choice([1, 2]))
        effort = 8.0 * afp + 50.0 * team + (500.0 if rl == 2 else 0.0)
        effort += float(rng.normal(0, 40))
        recs.append(ProjectRecord(str(i + 1), afp, team, rl, "new", "A", effort))
    return ProjectSet(tuple(recs))
