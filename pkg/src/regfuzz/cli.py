"""Command-line experiment driver: pipeline -> train -> evaluate.

Each command reads one flat key=value config (file and/or flags), writes CSV
and JSON artifacts stamped with the config hash and seed, and is exactly
reproducible: identical config and seed give byte-identical outputs.

Exit codes: 0 ok, 2 config error, 3 data error, 4 build error, 5 evaluate error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from .builder import (
    BUILDERS,
    BuildError,
    BuilderConfig,
    default_feature_names,
    predict_projects,
    project_features,
    tune,
)
from .data import (
    CSV_COLUMNS,
    ProjectSet,
    SchemaError,
    SynthSpec,
    filter_projects,
    load_projects,
    partition_by_productivity,
    remove_outliers_iqr,
    split_train_test,
    summarize,
    synth_generate,
)
from .fis import NoRuleFiredError, ValidationError
from .metrics import REPORT_COLUMNS, evaluate, random_guess_baseline
from .model_io import available_fixtures, load_fixture, load_model, save_model
from .regression import RankDeficiencyError, predict_ols_many, stepwise_select
from .stats import (
    InsufficientDataError,
    anderson_darling_normality,
    box_cox,
    scott_knott,
    wilcoxon_signed_rank,
)

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_BUILD, EXIT_EVAL = 0, 2, 3, 4, 5
MODEL_ORDER = ("mlr", "mamdani", "sugeno0", "sugeno1")
BANDS = ("band1", "band2", "band3", "combined")

DEFAULTS = {
    "seed": "0",
    "ratio": "0.7",
    "outliers": "test",
    "models": ",".join(MODEL_ORDER),
    "baseline_runs": "1000",
    "terms_per_input": "3",
    "output_sections": "3",
    "section_overlap": "0.25",
    "tuning": "off",
    "tuning_folds": "5",
}


class ConfigError(ValueError):
    pass


class DataError(ValueError):
    pass


class EvaluateError(RuntimeError):
    pass


def fmt(v: float) -> str:
    return f"{v:.10g}"


def parse_config_file(path: Path) -> dict:
    """Flat key = value lines; blank lines and # comments ignored."""
    out = {}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def effective_config(args) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(parse_config_file(Path(args.config)))
    overrides = {
        "seed": getattr(args, "seed", None),
        "ratio": getattr(args, "ratio", None),
        "outliers": getattr(args, "outliers", None),
        "models": getattr(args, "models", None),
        "synth": getattr(args, "synth", None),
        "data": getattr(args, "data", None),
        "train": getattr(args, "train", None),
        "test": getattr(args, "test", None),
        "models_dir": getattr(args, "models_dir", None),
        "out": getattr(args, "out", None),
    }
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = str(value)
    fis = getattr(args, "fis", None)
    if fis:
        cfg["fis"] = ";".join(fis)
    return cfg


def config_hash(cfg: dict) -> str:
    # the destination directory is not part of the experiment's identity
    canon = "\n".join(f"{k}={cfg[k]}" for k in sorted(cfg) if k != "out")
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]


def header_line(cfg: dict) -> str:
    return f"# config={config_hash(cfg)} seed={cfg['seed']}"


def _int(cfg, key) -> int:
    try:
        return int(cfg[key])
    except (KeyError, ValueError):
        raise ConfigError(f"config key {key!r} must be an integer, got {cfg.get(key)!r}")


def _float(cfg, key) -> float:
    try:
        return float(cfg[key])
    except (KeyError, ValueError):
        raise ConfigError(f"config key {key!r} must be a number, got {cfg.get(key)!r}")


def model_list(cfg) -> list[str]:
    names = [m.strip() for m in cfg["models"].split(",") if m.strip()]
    if not names:
        raise ConfigError("at least one model required")
    bad = [m for m in names if m not in MODEL_ORDER]
    if bad:
        raise ConfigError(
            f"unknown model(s) {', '.join(bad)}; choose from {', '.join(MODEL_ORDER)}"
        )
    return [m for m in MODEL_ORDER if m in names]


def builder_config(cfg) -> BuilderConfig:
    tuning = cfg["tuning"].lower()
    if tuning not in ("on", "off"):
        raise ConfigError(f"tuning must be on or off, got {cfg['tuning']!r}")
    try:
        return BuilderConfig(
            terms_per_input=_int(cfg, "terms_per_input"),
            output_sections=_int(cfg, "output_sections"),
            section_overlap=_float(cfg, "section_overlap"),
            tuning=tuning == "on",
            tuning_folds=_int(cfg, "tuning_folds"),
            seed=_int(cfg, "seed"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_synth_spec(text: str, default_seed: int) -> SynthSpec:
    """e.g. "n=468,seed=1,fractions=0.52:0.25:0.23,noise=0.05,p_max=300"."""
    fields = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ConfigError(f"synth spec: expected key=value, got {part!r}")
        k, _, v = part.partition("=")
        fields[k.strip()] = v.strip()
    unknown = set(fields) - {"n", "seed", "fractions", "noise", "p_max"}
    if unknown:
        raise ConfigError(f"synth spec: unknown key(s) {', '.join(sorted(unknown))}")
    if "n" not in fields:
        raise ConfigError("synth spec: n is required")
    try:
        n = int(fields["n"])
        seed = int(fields.get("seed", default_seed))
        noise = float(fields.get("noise", 0.05))
        p_max = float(fields.get("p_max", 300.0))
        if "fractions" in fields:
            parts = [float(x) for x in fields["fractions"].split(":")]
            if len(parts) != 3:
                raise ValueError("fractions needs 3 colon-separated shares")
            fractions = tuple(parts)
        else:
            fractions = (245 / 468, 116 / 468, 107 / 468)
        return SynthSpec(n=n, fractions=fractions, seed=seed, noise=noise, p_max=p_max)
    except ValueError as exc:
        raise ConfigError(f"synth spec: {exc}") from exc


def out_dir(cfg) -> Path:
    if "out" not in cfg:
        raise ConfigError("output directory required (--out or config key out)")
    path = Path(cfg["out"])
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_text(path: Path, text: str):
    path.write_text(text, encoding="utf-8")


def write_projects_csv(ps: ProjectSet, path: Path, cfg: dict):
    lines = [header_line(cfg), ",".join(CSV_COLUMNS)]
    for r in ps.records:
        lines.append(
            f"{r.id},{fmt(r.afp)},{fmt(r.team_size)},{r.resource_level},"
            f"{r.dev_type},{r.quality},{fmt(r.effort)}"
        )
    write_text(path, "\n".join(lines) + "\n")


def write_meta(path: Path, cfg: dict, payload: dict):
    doc = {"_header": header_line(cfg)[2:], **payload}
    write_text(path, json.dumps(doc, indent=2) + "\n")


# ---------------------------------------------------------------------------
# pipeline


def cmd_pipeline(cfg) -> int:
    seed = _int(cfg, "seed")
    ratio = _float(cfg, "ratio")
    policy = cfg["outliers"]
    if policy not in ("none", "test", "both"):
        raise ConfigError(f"outliers must be none, test or both, got {policy!r}")
    out = out_dir(cfg)

    if ("synth" in cfg) == ("data" in cfg):
        raise ConfigError("exactly one of --synth or --data is required")
    if "synth" in cfg:
        ps = synth_generate(parse_synth_spec(cfg["synth"], seed))
    else:
        try:
            ps = load_projects(cfg["data"])
        except FileNotFoundError as exc:
            raise DataError(f"input file not found: {cfg['data']}") from exc

    filtered = filter_projects(ps)
    if not len(filtered):
        print("warning: no records survive filtering", file=sys.stderr)
    parts = partition_by_productivity(filtered)

    for band in BANDS:
        bset = parts[band]
        write_projects_csv(bset, out / f"{band}.csv", cfg)
        meta = {"provenance": list(bset.provenance), "n": len(bset)}
        if len(bset) >= 2:
            train, test = split_train_test(bset, ratio=ratio, seed=seed)
            reports = {}
            if policy in ("test", "both") and len(test) >= 4:
                test, rep = remove_outliers_iqr(test)
                reports["test"] = rep.__dict__ | {"iqr": rep.iqr}
            if policy == "both" and len(train) >= 4:
                train, rep = remove_outliers_iqr(train)
                reports["train"] = rep.__dict__ | {"iqr": rep.iqr}
            write_projects_csv(train, out / f"{band}_train.csv", cfg)
            write_projects_csv(test, out / f"{band}_test.csv", cfg)
            meta["train"] = {
                "n": len(train),
                "provenance": list(train.provenance),
                "summary": summarize(train).__dict__ if len(train) >= 2 else None,
            }
            meta["test"] = {
                "n": len(test),
                "provenance": list(test.provenance),
                "summary": summarize(test).__dict__ if len(test) >= 2 else None,
            }
            if reports:
                meta["outliers"] = reports
            print(f"{band}: n={len(bset)} train={len(train)} test={len(test)}")
        else:
            meta["note"] = "too few records to split"
            print(f"{band}: n={len(bset)} (not split)")
        write_meta(out / f"{band}.meta.json", cfg, meta)
    return EXIT_OK


# ---------------------------------------------------------------------------
# train


def _selection_report(candidates, selected, fit, fallback: bool) -> str:
    lines = ["stepwise input selection", ""]
    lines.append(f"candidates: {', '.join(candidates)}")
    lines.append(f"selected:   {', '.join(selected) if selected else '(none)'}")
    if fallback:
        lines.append("note: selection was empty; all candidates retained for building")
    lines.append("")
    lines.append(f"{'column':<16} {'coefficient':>14} {'p-value':>12}")
    names = ("Intercept",) + fit.columns
    for name, coef, p in zip(names, fit.coefficients, fit.pvalues):
        lines.append(f"{name:<16} {coef:>14.6g} {p:>12.6g}")
    lines.append("")
    lines.append(f"r2 = {fit.r2:.6g}   residual dof = {fit.df_resid}")
    return "\n".join(lines)


def cmd_train(cfg) -> int:
    out = out_dir(cfg)
    fis_items = [p for p in cfg.get("fis", "").split(";") if p]
    if fis_items:
        for item in fis_items:
            path = Path(item)
            if path.exists():
                model = load_model(path)
            elif item in available_fixtures():
                model = load_fixture(item)
            else:
                raise DataError(f"--fis {item}: no such file or bundled model")
            model.metadata["config_hash"] = config_hash(cfg)
            model.metadata["seed"] = _int(cfg, "seed")
            save_model(model, out / f"{model.kind}.json")
            print(f"wrote {model.kind}.json (from {item})")
        return EXIT_OK

    if "train" not in cfg:
        raise ConfigError("training dataset required (--train) unless --fis is used")
    try:
        train_set = load_projects(cfg["train"])
    except FileNotFoundError as exc:
        raise DataError(f"training file not found: {cfg['train']}") from exc
    if len(train_set) < 4:
        raise DataError(f"training set too small: {len(train_set)} records")

    models = model_list(cfg)
    bcfg = builder_config(cfg)

    candidates = default_feature_names(train_set)
    selected, fit = stepwise_select(
        project_features(train_set, candidates), train_set.efforts()
    )
    fallback = not selected
    features = list(selected) if selected else candidates
    if fallback:
        from .regression import fit_ols

        fit = fit_ols(project_features(train_set, features), train_set.efforts())
    write_text(
        out / "selection.txt",
        header_line(cfg) + "\n" + _selection_report(candidates, features, fit, fallback) + "\n",
    )

    if "mlr" in models:
        doc = {
            "_header": header_line(cfg)[2:],
            "columns": list(fit.columns),
            "coefficients": [float(c) for c in fit.coefficients[1:]],
            "intercept": float(fit.coefficients[0]),
            "r2": fit.r2,
            "pvalues": {
                name: float(p)
                for name, p in zip(("Intercept",) + fit.columns, fit.pvalues)
            },
        }
        write_text(out / "mlr.json", json.dumps(doc, indent=2) + "\n")
        print(f"wrote mlr.json ({len(fit.columns)} inputs, r2={fit.r2:.4f})")

    for name in models:
        if name == "mlr":
            continue
        model = BUILDERS[name](train_set, bcfg, features=features)
        if bcfg.tuning:
            model = tune(model, train_set, bcfg)
        model.metadata["config_hash"] = config_hash(cfg)
        model.metadata["seed"] = bcfg.seed
        save_model(model, out / f"{name}.json")
        print(f"wrote {name}.json ({len(model.rules)} rules)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# evaluate


def _load_models(cfg, names):
    models_dir = Path(cfg.get("models_dir", cfg.get("out", ".")))
    loaded = {}
    for name in names:
        path = models_dir / f"{name}.json"
        if not path.exists():
            raise DataError(f"model file not found: {path}")
        if name == "mlr":
            doc = json.loads(path.read_text(encoding="utf-8"))
            loaded[name] = ("mlr", doc)
        else:
            loaded[name] = ("fis", load_model(path))
    return loaded


def _predict(name, payload, test_set) -> np.ndarray:
    kind, model = payload
    if kind == "mlr":
        X = project_features(test_set, model["columns"]).values
        return model["intercept"] + X @ np.asarray(model["coefficients"])
    try:
        return predict_projects(model, test_set)
    except NoRuleFiredError as exc:
        ids = [test_set.records[i].id for i in exc.indices]
        raise EvaluateError(
            f"model {name}: no rule fired for test project(s) {', '.join(ids)}"
        ) from exc


def _metrics_csv(cfg, reports) -> str:
    lines = [header_line(cfg), "model," + ",".join(REPORT_COLUMNS)]
    for name, rep in reports.items():
        row = rep.row()
        lines.append(name + "," + ",".join(fmt(row[c]) for c in REPORT_COLUMNS))
    return "\n".join(lines) + "\n"


def _wilcoxon_matrix(cfg, abs_errors) -> tuple[str, list[str]]:
    names = list(abs_errors)
    notes = []
    lines = [header_line(cfg), "model," + ",".join(names)]
    for a in names:
        cells = []
        for b in names:
            if a == b:
                cells.append("X")
                continue
            try:
                r = wilcoxon_signed_rank(abs_errors[a], abs_errors[b])
                cells.append(fmt(r.p_value))
            except InsufficientDataError as exc:
                cells.append("n/a")
                notes.append(f"{a} vs {b}: {exc}")
        lines.append(a + "," + ",".join(cells))
    return "\n".join(lines) + "\n", notes


def _interval_csv(cfg, abs_errors) -> str:
    lines = [header_line(cfg), "model,n,mean_abs_error,ci_low,ci_high"]
    for name, errs in abs_errors.items():
        n = errs.size
        mean = float(errs.mean())
        half = 1.96 * float(errs.std(ddof=1)) / math.sqrt(n) if n > 1 else 0.0
        lines.append(f"{name},{n},{fmt(mean)},{fmt(mean - half)},{fmt(mean + half)}")
    return "\n".join(lines) + "\n"


def cmd_evaluate(cfg) -> int:
    seed = _int(cfg, "seed")
    out = out_dir(cfg)
    models = model_list(cfg)
    if "test" not in cfg:
        raise ConfigError("test dataset required (--test)")
    try:
        test_set = load_projects(cfg["test"])
    except FileNotFoundError as exc:
        raise DataError(f"test file not found: {cfg['test']}") from exc
    if len(test_set) < 2:
        raise DataError(f"test set too small: {len(test_set)} records")

    loaded = _load_models(cfg, models)
    actuals = test_set.efforts()
    baseline = random_guess_baseline(actuals, runs=_int(cfg, "baseline_runs"), seed=seed)

    predictions, reports, abs_errors = {}, {}, {}
    for name in models:
        pred = _predict(name, loaded[name], test_set)
        predictions[name] = pred
        try:
            reports[name] = evaluate(pred, actuals, baseline)
        except (ValueError, ZeroDivisionError) as exc:
            raise EvaluateError(f"model {name}: {exc}") from exc
        abs_errors[name] = np.abs(actuals - pred)

    write_text(out / "metrics.csv", _metrics_csv(cfg, reports))

    wilcoxon_text, wilcoxon_notes = _wilcoxon_matrix(cfg, abs_errors)
    write_text(out / "wilcoxon.csv", wilcoxon_text)
    write_text(out / "intervals.csv", _interval_csv(cfg, abs_errors))

    # Normality gate, then a shared power transform, then group clustering.
    pooled = np.concatenate(list(abs_errors.values()))
    ad = anderson_darling_normality(pooled)
    sk_input = abs_errors
    bc_note = "not applied (pooled abs errors consistent with normality)"
    if ad.p_value <= 0.05:
        bc = box_cox(pooled)
        sk_input = {
            name: box_cox(errs + bc.shift, lam=bc.lam).transformed
            for name, errs in abs_errors.items()
        }
        bc_note = f"lambda={bc.lam:.5g} shift={bc.shift:g}"
    sk = None
    if len(sk_input) >= 2 and all(v.size >= 2 for v in sk_input.values()):
        sk = scott_knott({k: v for k, v in sk_input.items()})
        lines = [header_line(cfg), "rank,model,group"]
        for rank, (name, group) in enumerate(zip(sk.order, sk.groups), 1):
            lines.append(f"{rank},{name},{group}")
        write_text(out / "scott_knott.csv", "\n".join(lines) + "\n")

    summary = [header_line(cfg), "", "model evaluation summary", ""]
    colw = max(len(n) for n in reports) + 2
    summary.append(
        f"{'model':<{colw}}" + "".join(f"{c:>12}" for c in REPORT_COLUMNS)
    )
    for name, rep in reports.items():
        row = rep.row()
        summary.append(
            f"{name:<{colw}}" + "".join(f"{row[c]:>12.4g}" for c in REPORT_COLUMNS)
        )
    summary.append("")
    summary.append(
        f"random-guess baseline: mae={fmt(baseline.mae_p_bar)} sp0={fmt(baseline.sp0)} "
        f"runs={baseline.runs} exact-pair-mean={fmt(baseline.exact_mae)}"
    )
    summary.append(
        f"normality (pooled abs errors): A*^2={ad.statistic:.4g} p={ad.p_value:.4g}"
    )
    summary.append(f"box-cox: {bc_note}")
    if sk is not None:
        groups = ", ".join(f"{n}:{g}" for n, g in zip(sk.order, sk.groups))
        summary.append(f"scott-knott groups (by ascending mean): {groups}")
    for note in wilcoxon_notes:
        summary.append(f"wilcoxon note: {note}")
    write_text(out / "summary.txt", "\n".join(summary) + "\n")

    for name, rep in reports.items():
        print(f"{name}: MAE={rep.mae:.2f} SA={100 * rep.sa:.1f} delta={rep.delta:.3f}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regfuzz",
        description="Regression-assisted fuzzy effort estimation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--seed", type=int, help="master random seed")
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("pipeline", help="load/synthesize, filter, band, split")
    common(p)
    p.add_argument("--data", help="input project CSV")
    p.add_argument("--synth", help='synthetic spec, e.g. "n=468,seed=1"')
    p.add_argument("--ratio", type=float, help="train share (default 0.7)")
    p.add_argument("--outliers", choices=["none", "test", "both"],
                   help="IQR outlier removal policy (default test)")

    p = sub.add_parser("train", help="select inputs and build models")
    common(p)
    p.add_argument("--train", help="training CSV (from pipeline)")
    p.add_argument("--models", help="comma list of mlr,mamdani,sugeno0,sugeno1")
    p.add_argument("--fis", action="append",
                   help="model JSON path or bundled name; skips building")

    p = sub.add_parser("evaluate", help="score models on a test set")
    common(p)
    p.add_argument("--test", help="test CSV (from pipeline)")
    p.add_argument("--models-dir", dest="models_dir",
                   help="directory holding <model>.json files (default --out)")
    p.add_argument("--models", help="comma list of models to score")
    return parser


COMMANDS = {"pipeline": cmd_pipeline, "train": cmd_train, "evaluate": cmd_evaluate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = effective_config(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, SchemaError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (BuildError, ValidationError, RankDeficiencyError) as exc:
        print(f"build error: {exc}", file=sys.stderr)
        return EXIT_BUILD
    except (EvaluateError, NoRuleFiredError, InsufficientDataError) as exc:
        print(f"evaluate error: {exc}", file=sys.stderr)
        return EXIT_EVAL


def entrypoint():
    sys.exit(main())
