"""Command-line interface: extract / label / select / evaluate / bench / synth.

Exit codes: 0 success, 2 usage or validation problems, 3 data
conditions (single-class labels, non-temporal order keys, ...). Output
files are written via a temporary file and an atomic rename, so no
subcommand leaves partial output behind on failure.
"""

from __future__ import annotations

import csv
import functools
import json
import os
import sys
import tempfile
from contextlib import contextmanager

import click
import numpy as np

from . import bench as bench_mod
from .errors import DataConditionError, LogselectError, ValidationError
from .eventlog import (
    CsvSchema,
    label_by_attribute,
    label_by_duration,
    load_event_log,
    parse_duration,
    write_canonical_csv,
)
from .features import load_matrix, save_matrix, extract
from .gbm import GbmConfig, evaluate, split_train_test
from .mi import CoverageScorer
from .bench import combo_from_tokens, generate_synthetic_log, SyntheticSpec
from .selection import ALGORITHMS, run_selection


@contextmanager
def _atomic_file(path: str, newline: str | None = ""):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline=newline) as f:
            yield f
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _domain_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DataConditionError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
        except (LogselectError, OSError, json.JSONDecodeError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)

    return wrapper


def _schema_options(fn):
    fn = click.option("--attr-cols", default="", help="Comma-separated attribute columns.")(fn)
    fn = click.option("--time-col", required=True, help="Order-key column (timestamp or integer).")(fn)
    fn = click.option("--activity-col", required=True, help="Activity column.")(fn)
    fn = click.option("--case-col", required=True, help="Case id column.")(fn)
    fn = click.option("--log", "log_path", required=True, type=click.Path(exists=True, dir_okay=False))(fn)
    return fn


def _schema(case_col, activity_col, time_col, attr_cols) -> CsvSchema:
    attrs = tuple(c.strip() for c in attr_cols.split(",") if c.strip()) if attr_cols else ()
    return CsvSchema(case_col=case_col, activity_col=activity_col, order_col=time_col, attr_cols=attrs)


@click.group()
@click.version_option(package_name="logselect")
def main():
    """Structural feature extraction and selection for event logs."""


@main.command(name="extract")
@_schema_options
@click.option("--types", "types_", required=True,
              help="Comma-separated feature kinds: activity,2gram,starter,finisher,order.")
@click.option("--out", "out_prefix", required=True, help="Output prefix for .header.json / .values.csv.")
@_domain_errors
def extract_cmd(log_path, case_col, activity_col, time_col, attr_cols, types_, out_prefix):
    """Extract a structural feature matrix from an event-log CSV."""
    kinds = combo_from_tokens([t for t in types_.split(",") if t.strip()])
    log = load_event_log(log_path, _schema(case_col, activity_col, time_col, attr_cols))
    matrix = extract(log, kinds)
    save_matrix(matrix, out_prefix)
    click.echo(f"{matrix.n_cases} cases x {matrix.n_features} features -> {out_prefix}.header.json")


@main.command()
@_schema_options
@click.option("--duration-over", default=None, help="Duration threshold, e.g. 7d, 168h, 20w.")
@click.option("--attr", "attr_eq", default=None, help="Attribute rule as name=value.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@_domain_errors
def label(log_path, case_col, activity_col, time_col, attr_cols, duration_over, attr_eq, out_path):
    """Write per-case labels (case,label CSV) for a scenario rule."""
    if (duration_over is None) == (attr_eq is None):
        raise ValidationError("provide exactly one of --duration-over or --attr")
    log = load_event_log(log_path, _schema(case_col, activity_col, time_col, attr_cols))
    if duration_over is not None:
        labels = label_by_duration(log, parse_duration(duration_over))
    else:
        name, sep, value = attr_eq.partition("=")
        if not sep:
            raise ValidationError("--attr expects name=value")
        labels = label_by_attribute(log, name, value)
    with _atomic_file(out_path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["case", "label"])
        for case, flag in zip(log.cases, labels.values):
            writer.writerow([case.id, int(flag)])
    click.echo(f"{labels.positive_count}/{len(labels)} positive cases -> {out_path}")


def _load_labels(path: str, case_ids: list[str]) -> np.ndarray:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or header[:2] != ["case", "label"]:
            raise ValidationError(f"{path}: expected a case,label CSV header")
        flags = {row[0]: row[1] for row in reader if row}
    missing = [c for c in case_ids if c not in flags]
    if missing:
        raise ValidationError(f"{path}: labels missing for {len(missing)} cases (first: {missing[0]!r})")
    values = []
    for c in case_ids:
        if flags[c] not in ("0", "1"):
            raise ValidationError(f"{path}: label for case {c!r} must be 0 or 1")
        values.append(flags[c] == "1")
    return np.asarray(values, dtype=bool)


@main.command()
@click.option("--features", "features_prefix", required=True, help="Matrix prefix from `extract`.")
@click.option("--labels", "labels_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--algorithm", required=True, type=click.Choice(sorted(ALGORITHMS)))
@click.option("--k", required=True, type=int)
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--params", "params_json", default=None, help="Algorithm knobs as a JSON object.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@_domain_errors
def select(features_prefix, labels_path, algorithm, k, seed, params_json, out_path):
    """Select k features and write the result JSON."""
    matrix = load_matrix(features_prefix)
    y = _load_labels(labels_path, matrix.case_ids)
    params = json.loads(params_json) if params_json else {}
    if k > matrix.n_features:
        click.echo(f"warning: k={k} exceeds {matrix.n_features} features; selecting all", err=True)
    result = run_selection(matrix, y, algorithm, k, seed, **params)
    names = matrix.feature_names()
    with _atomic_file(out_path) as f:
        json.dump(result.to_json(names), f, indent=1)
        f.write("\n")
    picked = ", ".join(names[j] for j in result.selected[:20])
    if len(result.selected) > 20:
        picked += ", ..."
    click.echo(f"{len(result.selected)} features ({picked}) -> {out_path}")


@main.command(name="evaluate")
@click.option("--features", "features_prefix", required=True, help="Matrix prefix from `extract`.")
@click.option("--labels", "labels_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--selection", "selection_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="Selection JSON from `select`; omit to use all features.")
@click.option("--train-fraction", default=0.25, type=float, show_default=True)
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--rounds", default=100, type=int, show_default=True)
@click.option("--learning-rate", default=0.1, type=float, show_default=True)
@click.option("--max-depth", default=3, type=int, show_default=True)
@click.option("--mi-bins", default=4, type=int, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@_domain_errors
def evaluate_cmd(features_prefix, labels_path, selection_path, train_fraction, seed,
                 rounds, learning_rate, max_depth, mi_bins, out_path):
    """Train the booster on selected features and report test metrics."""
    import time as _time

    matrix = load_matrix(features_prefix)
    y = _load_labels(labels_path, matrix.case_ids)
    names = matrix.feature_names()
    if selection_path is not None:
        with open(selection_path, "r", encoding="utf-8") as f:
            picked_names = json.load(f)["selected"]
        index = {n: j for j, n in enumerate(names)}
        unknown = [n for n in picked_names if n not in index]
        if unknown:
            raise ValidationError(f"selection references unknown features (first: {unknown[0]!r})")
        selected = [index[n] for n in picked_names]
    else:
        selected = list(range(matrix.n_features))

    X = matrix.dense().astype(np.float64)
    train_rows, test_rows = split_train_test(X.shape[0], train_fraction, seed)
    config = GbmConfig(rounds=rounds, learning_rate=learning_rate, max_depth=max_depth, seed=seed)
    t0 = _time.perf_counter_ns()
    model = config.as_classifier().fit(X[train_rows][:, selected], y[train_rows])
    train_ns = _time.perf_counter_ns() - t0
    metrics = evaluate(model, X[test_rows][:, selected], y[test_rows], train_ns=train_ns)
    coverage = CoverageScorer(X, y, mi_bins).score(selected)
    payload = {
        "accuracy": metrics.accuracy,
        "confusion": {"tp": metrics.tp, "fp": metrics.fp, "fn": metrics.fn, "tn": metrics.tn},
        "mi_vs_predictors": coverage.vs_predictors,
        "mi_vs_outcome": coverage.vs_outcome,
        "train_ns": metrics.train_ns,
        "predict_ns": metrics.predict_ns,
        "n_selected": len(selected),
        "n_train": int(len(train_rows)),
        "n_test": int(len(test_rows)),
    }
    with _atomic_file(out_path) as f:
        json.dump(payload, f, indent=1)
        f.write("\n")
    click.echo(f"accuracy {metrics.accuracy:.4f} -> {out_path}")


@main.command(name="bench")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_prefix", required=True, help="Output prefix for .csv / .json.")
@click.option("--jobs", default=None, type=int, help="Worker threads (default: available parallelism).")
@_domain_errors
def bench_cmd(config_path, out_prefix, jobs):
    """Run the experiment grid from a JSON config."""
    with open(config_path, "r", encoding="utf-8") as f:
        config = bench_mod.ExperimentConfig.from_json(f.read())
    if jobs is None:
        jobs = os.cpu_count() or 1

    def progress(i, total, cell, ms):
        click.echo(f"[{i + 1}/{total}] {cell}  {ms:.1f} ms", err=True)

    report = bench_mod.run_experiment(config, jobs=jobs, progress=progress)
    with _atomic_file(f"{out_prefix}.csv") as f:
        f.write(report.to_csv())
    with _atomic_file(f"{out_prefix}.json") as f:
        f.write(report.to_json())
        f.write("\n")
    click.echo(f"{len(report.records)} records, {len(report.skipped)} skipped -> {out_prefix}.csv")


@main.command()
@click.option("--cases", default=2000, type=int, show_default=True)
@click.option("--alphabet", default=10, type=int, show_default=True)
@click.option("--min-len", default=5, type=int, show_default=True)
@click.option("--max-len", default=15, type=int, show_default=True)
@click.option("--rule", default="transition", type=click.Choice(["transition", "order", "activity"]),
              show_default=True)
@click.option("--strength", default=1, type=int, show_default=True,
              help="Pattern insertions per rule-positive case.")
@click.option("--noise", default=0.0, type=float, show_default=True)
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@_domain_errors
def synth(cases, alphabet, min_len, max_len, rule, strength, noise, seed, out_path):
    """Generate a planted-signal synthetic log CSV (with a label column)."""
    spec = SyntheticSpec(
        n_cases=cases, alphabet_size=alphabet, min_len=min_len, max_len=max_len,
        rule=rule, strength=strength, noise=noise, seed=seed,
    )
    log, labels = generate_synthetic_log(spec)
    with _atomic_file(out_path) as f:
        write_canonical_csv(log, f)
    click.echo(f"{log.n_cases} cases, {labels.positive_count} positive -> {out_path}")


if __name__ == "__main__":
    main()
