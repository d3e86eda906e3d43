"""Seeded experiment harness.

Enumerates (dataset, scenario, feature-kind combo, k, algorithm) cells,
runs extract -> dedup -> split -> select -> train -> evaluate for each,
and collects accuracy, confusion counts, MI coverage and stage timings
into a report with deterministic CSV/JSON renderings. Every cell seed
derives from a stable hash of the cell identity, so cells can run in
any order (or concurrently) with identical results.
"""

from __future__ import annotations

import json
import string
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, IO, Sequence

import numpy as np

from .errors import DataConditionError, LogselectError, ValidationError
from .eventlog import (
    CsvSchema,
    EventLog,
    EventRecord,
    LabelVector,
    build_log,
    label_by_attribute,
    label_by_duration,
    load_event_log,
    parse_duration,
)
from .features import ALL_KINDS, KIND_ORDER, FeatureKind, dedup, extract
from .gbm import GbmConfig, evaluate
from .mi import CoverageScorer
from .seeding import derive_seed
from .selection import run_selection

# ---------------------------------------------------------------------------
# synthetic logs


@dataclass(frozen=True)
class SyntheticSpec:
    """Planted-signal log generator parameters.

    A seeded half of the cases receive the planted pattern, repeated
    `strength` times; the label is pattern presence XOR seeded noise
    flips. The label is also stored as a case attribute ``label`` in
    {"0", "1"} so the attribute scenario machinery applies unchanged.
    """

    n_cases: int = 2000
    alphabet_size: int = 10
    min_len: int = 5
    max_len: int = 15
    rule: str = "transition"  # transition | order | activity
    strength: int = 1
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.alphabet_size < 3:
            raise ValidationError("alphabet_size must be >= 3")
        if not 1 <= self.min_len <= self.max_len:
            raise ValidationError("need 1 <= min_len <= max_len")
        if not 0.0 <= self.noise < 0.5:
            raise ValidationError("noise must be in [0, 0.5)")
        if self.strength < 1:
            raise ValidationError("strength must be >= 1")
        if self.rule not in ("transition", "order", "activity"):
            raise ValidationError(f"unknown planted rule {self.rule!r}")
        if self.n_cases < 2:
            raise ValidationError("n_cases must be >= 2")


def _activity_names(size: int) -> list[str]:
    if size <= 26:
        return list(string.ascii_lowercase[:size])
    return [f"act{i:03d}" for i in range(size)]


def _plant(base: list[int], rule: str, strength: int, rng: np.random.Generator) -> list[int]:
    """Insert the planted pattern into distinct gaps of the base trace.

    Distinct gaps keep repetitions separated by base activities, so the
    pattern's occurrence count is exactly `strength` in every planted
    case and the transition pair never touches a neighbouring copy.
    """
    gaps = len(base) + 1
    if rule == "order":
        reps = max(1, min(strength, gaps // 2))
        slots = np.sort(rng.choice(gaps, size=2 * reps, replace=False))
        inserts = [(int(s), 0) for s in slots[:reps]] + [(int(s), 1) for s in slots[reps:]]
    else:
        symbol_block = [0, 1] if rule == "transition" else [0]
        reps = max(1, min(strength, gaps))
        slots = np.sort(rng.choice(gaps, size=reps, replace=False))
        inserts = [(int(s), symbol_block) for s in slots]

    trace: list[int] = []
    pending = dict()
    for slot, payload in inserts:
        pending.setdefault(slot, []).append(payload)
    for pos in range(gaps):
        for payload in pending.get(pos, ()):
            trace.extend(payload if isinstance(payload, list) else [payload])
        if pos < len(base):
            trace.append(base[pos])
    return trace


def generate_synthetic_log(spec: SyntheticSpec) -> tuple[EventLog, LabelVector]:
    """Seeded random traces with a planted rule on the first two activities.

    Base traces avoid the rule activities entirely, so with zero noise
    the planted pattern's column equals the label column exactly.
    """
    rng = np.random.default_rng(spec.seed)
    names = _activity_names(spec.alphabet_size)
    n = spec.n_cases

    planted = np.zeros(n, dtype=bool)
    planted[rng.permutation(n)[: n // 2]] = True
    flips = rng.random(n) < spec.noise
    labels = planted ^ flips

    records: list[EventRecord] = []
    for i in range(n):
        length = int(rng.integers(spec.min_len, spec.max_len + 1))
        base = [int(a) for a in rng.integers(2, spec.alphabet_size, size=length)]
        if planted[i]:
            trace = _plant(base, spec.rule, spec.strength, rng)
        else:
            trace = base
        attrs = {"label": "1" if labels[i] else "0"}
        for t, a in enumerate(trace):
            records.append(EventRecord(f"c{i}", names[a], t, attrs))
    return build_log(records), LabelVector(labels)


# ---------------------------------------------------------------------------
# combos


def combo_to_string(combo: frozenset[FeatureKind]) -> str:
    return "+".join(k.value for k in KIND_ORDER if k in combo)


def combo_from_tokens(tokens: Sequence[str]) -> frozenset[FeatureKind]:
    kinds = set()
    for token in tokens:
        try:
            kinds.add(FeatureKind(token.strip()))
        except ValueError:
            known = ", ".join(k.value for k in KIND_ORDER)
            raise ValidationError(f"unknown feature kind {token!r} (known: {known})")
    if not kinds:
        raise ValidationError("combo needs at least one feature kind")
    return frozenset(kinds)


def default_combos() -> list[frozenset[FeatureKind]]:
    """The preset pattern combinations: the 8 activity-containing subsets
    over {activity, starter+finisher, 2gram, order}, plus 2gram, order,
    and 2gram+order."""
    a = frozenset({FeatureKind.ACTIVITY})
    sf = frozenset({FeatureKind.STARTER, FeatureKind.FINISHER})
    g = frozenset({FeatureKind.TWO_GRAM})
    o = frozenset({FeatureKind.ORDER})
    return [a, a | sf, a | g, a | o, a | sf | g, a | sf | o, a | g | o, a | sf | g | o, g, o, g | o]


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    kind: str  # "duration" | "attribute"
    threshold: str | None = None
    attr: str | None = None
    value: str | None = None

    def __post_init__(self):
        if self.kind == "duration":
            if self.threshold is None:
                raise ValidationError(f"scenario {self.name!r}: duration scenarios need a threshold")
        elif self.kind == "attribute":
            if self.attr is None or self.value is None:
                raise ValidationError(f"scenario {self.name!r}: attribute scenarios need attr and value")
        else:
            raise ValidationError(f"scenario {self.name!r}: unknown kind {self.kind!r}")

    def labels(self, log: EventLog) -> LabelVector:
        if self.kind == "duration":
            return label_by_duration(log, parse_duration(self.threshold))
        return label_by_attribute(log, self.attr, self.value)


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    path: str | None = None
    schema: CsvSchema | None = None
    synthetic: SyntheticSpec | None = None
    sample: int | None = None

    def __post_init__(self):
        if (self.path is None) == (self.synthetic is None):
            raise ValidationError(f"dataset {self.name!r}: provide exactly one of path or synthetic")
        if self.path is not None and self.schema is None:
            raise ValidationError(f"dataset {self.name!r}: CSV datasets need a schema")

    def load(self, master_seed: int) -> EventLog:
        if self.synthetic is not None:
            log, _ = generate_synthetic_log(self.synthetic)
        else:
            log = load_event_log(self.path, self.schema)
        if self.sample is not None and self.sample < log.n_cases:
            rng = np.random.default_rng(derive_seed(master_seed, "sample", self.name))
            keep = np.sort(rng.choice(log.n_cases, size=self.sample, replace=False))
            log = EventLog(
                alphabet=log.alphabet,
                cases=[log.cases[i] for i in keep],
                temporal=log.temporal,
                attr_keys=log.attr_keys,
            )
        return log


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    params: dict = field(default_factory=dict)
    label: str | None = None

    @property
    def key(self) -> str:
        return self.label if self.label is not None else self.name


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple[DatasetSpec, ...]
    scenarios: tuple[ScenarioSpec, ...]
    combos: tuple[frozenset[FeatureKind], ...]
    ks: tuple[int, ...]
    algorithms: tuple[AlgorithmSpec, ...]
    master_seed: int = 0
    train_fraction: float = 0.25
    gbm: GbmConfig = field(default_factory=GbmConfig)
    mi_bins: int = 4
    record_timings: bool = True

    def __post_init__(self):
        for name, collection in (
            ("datasets", self.datasets),
            ("scenarios", self.scenarios),
            ("combos", self.combos),
            ("ks", self.ks),
            ("algorithms", self.algorithms),
        ):
            if not collection:
                raise ValidationError(f"config {name} must be non-empty")

    @staticmethod
    def from_json(text: str) -> "ExperimentConfig":
        raw = json.loads(text)
        datasets = []
        for d in raw["datasets"]:
            schema = None
            if "schema" in d:
                s = d["schema"]
                schema = CsvSchema(
                    case_col=s["case_col"],
                    activity_col=s["activity_col"],
                    order_col=s["order_col"],
                    attr_cols=tuple(s.get("attr_cols", ())),
                )
            synthetic = SyntheticSpec(**d["synthetic"]) if "synthetic" in d else None
            datasets.append(
                DatasetSpec(
                    name=d["name"],
                    path=d.get("path"),
                    schema=schema,
                    synthetic=synthetic,
                    sample=d.get("sample"),
                )
            )
        scenarios = [ScenarioSpec(**s) for s in raw["scenarios"]]
        combos_raw = raw.get("combos", "default")
        if combos_raw == "default":
            combos = default_combos()
        else:
            combos = [combo_from_tokens(tokens) for tokens in combos_raw]
        algorithms = [
            AlgorithmSpec(name=a["name"], params=a.get("params", {}), label=a.get("label"))
            for a in raw["algorithms"]
        ]
        return ExperimentConfig(
            datasets=tuple(datasets),
            scenarios=tuple(scenarios),
            combos=tuple(combos),
            ks=tuple(raw["ks"]),
            algorithms=tuple(algorithms),
            master_seed=raw.get("master_seed", 0),
            train_fraction=raw.get("train_fraction", 0.25),
            gbm=GbmConfig(**raw.get("gbm", {})),
            mi_bins=raw.get("mi_bins", 4),
            record_timings=raw.get("record_timings", True),
        )

    def to_json(self) -> str:
        def dataset_obj(d: DatasetSpec) -> dict:
            obj: dict = {"name": d.name}
            if d.path is not None:
                obj["path"] = d.path
                obj["schema"] = {
                    "case_col": d.schema.case_col,
                    "activity_col": d.schema.activity_col,
                    "order_col": d.schema.order_col,
                    "attr_cols": list(d.schema.attr_cols),
                }
            if d.synthetic is not None:
                obj["synthetic"] = {
                    "n_cases": d.synthetic.n_cases,
                    "alphabet_size": d.synthetic.alphabet_size,
                    "min_len": d.synthetic.min_len,
                    "max_len": d.synthetic.max_len,
                    "rule": d.synthetic.rule,
                    "strength": d.synthetic.strength,
                    "noise": d.synthetic.noise,
                    "seed": d.synthetic.seed,
                }
            if d.sample is not None:
                obj["sample"] = d.sample
            return obj

        payload = {
            "master_seed": self.master_seed,
            "train_fraction": self.train_fraction,
            "mi_bins": self.mi_bins,
            "record_timings": self.record_timings,
            "gbm": {
                "rounds": self.gbm.rounds,
                "learning_rate": self.gbm.learning_rate,
                "max_depth": self.gbm.max_depth,
                "min_leaf": self.gbm.min_leaf,
                "seed": self.gbm.seed,
            },
            "datasets": [dataset_obj(d) for d in self.datasets],
            "scenarios": [
                {k: v for k, v in (("name", s.name), ("kind", s.kind), ("threshold", s.threshold),
                                   ("attr", s.attr), ("value", s.value)) if v is not None}
                for s in self.scenarios
            ],
            "combos": [[k.value for k in KIND_ORDER if k in combo] for combo in self.combos],
            "ks": list(self.ks),
            "algorithms": [
                {k: v for k, v in (("name", a.name), ("params", a.params or None), ("label", a.label))
                 if v is not None}
                for a in self.algorithms
            ],
        }
        return json.dumps(payload, indent=1)


# ---------------------------------------------------------------------------
# report


CSV_COLUMNS = (
    "dataset", "scenario", "combo", "k", "algorithm", "seed",
    "n_features", "n_after_dedup", "accuracy", "tp", "fp", "fn", "tn",
    "mi_vs_predictors", "mi_vs_outcome", "select_ns", "train_ns", "eval_ns",
    "selected_features",
)


@dataclass
class RunRecord:
    dataset: str
    scenario: str
    combo: str
    k: int
    algorithm: str
    seed: int
    n_features: int
    n_after_dedup: int
    accuracy: float
    tp: int
    fp: int
    fn: int
    tn: int
    mi_vs_predictors: float
    mi_vs_outcome: float
    select_ns: int
    train_ns: int
    eval_ns: int
    selected: list[str]
    scores: list[float]
    diagnostics: dict = field(default_factory=dict)

    def csv_row(self) -> list:
        return [
            self.dataset, self.scenario, self.combo, self.k, self.algorithm, self.seed,
            self.n_features, self.n_after_dedup, repr(self.accuracy),
            self.tp, self.fp, self.fn, self.tn,
            repr(self.mi_vs_predictors), repr(self.mi_vs_outcome),
            self.select_ns, self.train_ns, self.eval_ns,
            json.dumps(self.selected),
        ]


@dataclass(frozen=True)
class SkippedCell:
    dataset: str
    scenario: str
    combo: str
    k: int | None
    algorithm: str | None
    reason: str


@dataclass
class Report:
    records: list[RunRecord]
    skipped: list[SkippedCell]

    def to_csv(self) -> str:
        import csv as _csv
        import io as _io

        buf = _io.StringIO()
        writer = _csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for record in self.records:
            writer.writerow(record.csv_row())
        return buf.getvalue()

    def to_json_obj(self) -> dict:
        def record_obj(r: RunRecord) -> dict:
            obj = {c: getattr(r, c) for c in CSV_COLUMNS if c != "selected_features"}
            obj["selected_features"] = r.selected
            obj["scores"] = [_json_float(s) for s in r.scores]
            if r.diagnostics:
                obj["diagnostics"] = r.diagnostics
            return obj

        return {
            "records": [record_obj(r) for r in self.records],
            "skipped": [
                {"dataset": s.dataset, "scenario": s.scenario, "combo": s.combo,
                 "k": s.k, "algorithm": s.algorithm, "reason": s.reason}
                for s in self.skipped
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), indent=1)


def _json_float(v: float) -> float | str:
    return float(v) if np.isfinite(v) else repr(float(v))


# ---------------------------------------------------------------------------
# the harness


def run_experiment(
    config: ExperimentConfig,
    jobs: int = 1,
    progress: Callable[[int, int, str, float], None] | None = None,
) -> Report:
    """Run every cell of the experiment grid; see the module docstring.

    Per (dataset, scenario, combo) one baseline cell trains on all
    post-dedup features with no selection (algorithm "none"). Random
    cells run the full pipeline three times (cell seed, +1, +2) and
    keep the run with the median accuracy. Failed cells are recorded
    and never abort their siblings.
    """
    skipped: list[SkippedCell] = []
    tasks: list[Callable[[], RunRecord]] = []

    union_kinds = frozenset().union(*config.combos) or ALL_KINDS
    for dataset in config.datasets:
        try:
            log = dataset.load(config.master_seed)
            full_matrix = extract(log, union_kinds)
        except LogselectError as exc:
            for scenario in config.scenarios:
                skipped.append(SkippedCell(dataset.name, scenario.name, "*", None, None, str(exc)))
            continue

        for scenario in config.scenarios:
            try:
                labels = scenario.labels(log)
                if labels.positive_count in (0, len(labels)):
                    raise DataConditionError(
                        f"scenario {scenario.name!r} yields a single class on {dataset.name!r}"
                    )
            except LogselectError as exc:
                skipped.append(SkippedCell(dataset.name, scenario.name, "*", None, None, str(exc)))
                continue

            for combo in config.combos:
                tasks_for_combo = _combo_tasks(
                    config, dataset.name, scenario.name, combo, full_matrix, labels, skipped
                )
                tasks.extend(tasks_for_combo)

    records: list[RunRecord | None] = [None] * len(tasks)

    def execute(i: int) -> None:
        t0 = time.perf_counter()
        record = tasks[i]()
        records[i] = record
        if progress is not None and record is not None:
            cell = f"{record.dataset} {record.scenario} {record.combo} k={record.k} {record.algorithm}"
            progress(i, len(tasks), cell, (time.perf_counter() - t0) * 1e3)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(execute, range(len(tasks))))
    else:
        for i in range(len(tasks)):
            execute(i)

    # canonical skip order regardless of worker completion order
    skipped.sort(key=lambda s: (s.dataset, s.scenario, s.combo,
                                -1 if s.k is None else s.k, s.algorithm or ""))
    return Report(records=[r for r in records if r is not None], skipped=skipped)


def _combo_tasks(config, dataset_name, scenario_name, combo, full_matrix, labels, skipped):
    """Build one callable per cell of a (dataset, scenario, combo) block."""
    combo_str = combo_to_string(combo)
    matrix = full_matrix.select_kinds(combo)
    n_features = matrix.n_features
    if n_features == 0:
        skipped.append(SkippedCell(dataset_name, scenario_name, combo_str, None, None,
                                   "no features of the requested kinds observed"))
        return []
    deduped, _ = dedup(matrix)
    names = deduped.feature_names()
    X = deduped.dense().astype(np.float64)
    y = labels.values

    from .gbm import split_train_test

    split_seed = derive_seed(config.master_seed, "split", dataset_name, scenario_name, combo_str)
    try:
        train_rows, test_rows = split_train_test(X.shape[0], config.train_fraction, split_seed)
    except LogselectError as exc:
        skipped.append(SkippedCell(dataset_name, scenario_name, combo_str, None, None, str(exc)))
        return []
    assert np.intersect1d(train_rows, test_rows).size == 0
    X_train, y_train = X[train_rows], y[train_rows]
    X_test, y_test = X[test_rows], y[test_rows]

    # coverage is scored on the full post-dedup matrix and labels so the
    # "none" baseline upper-bounds every selection cell of this block
    scorer = CoverageScorer(X, y, config.mi_bins)

    def base_record(k, algorithm, seed, accuracy, metrics, mi, select_ns, train_ns,
                    selected_names, scores, diagnostics):
        keep = config.record_timings
        return RunRecord(
            dataset=dataset_name, scenario=scenario_name, combo=combo_str,
            k=k, algorithm=algorithm, seed=seed,
            n_features=n_features, n_after_dedup=deduped.n_features,
            accuracy=accuracy, tp=metrics.tp, fp=metrics.fp, fn=metrics.fn, tn=metrics.tn,
            mi_vs_predictors=mi.vs_predictors, mi_vs_outcome=mi.vs_outcome,
            select_ns=select_ns if keep else 0,
            train_ns=train_ns if keep else 0,
            eval_ns=metrics.predict_ns if keep else 0,
            selected=selected_names, scores=scores, diagnostics=diagnostics,
        )

    def train_and_eval(selected: list[int]):
        t0 = time.perf_counter_ns()
        model = config.gbm.as_classifier().fit(X_train[:, selected], y_train)
        train_ns = time.perf_counter_ns() - t0
        metrics = evaluate(model, X_test[:, selected], y_test)
        return model, metrics, train_ns

    def none_cell() -> RunRecord | None:
        seed = derive_seed(config.master_seed, "cell", dataset_name, scenario_name, combo_str, 0, "none")
        try:
            all_features = list(range(deduped.n_features))
            _, metrics, train_ns = train_and_eval(all_features)
            mi = scorer.score(all_features)
            return base_record(0, "none", seed, metrics.accuracy, metrics, mi,
                               0, train_ns, [], [], {})
        except Exception as exc:  # record-and-continue
            skipped.append(SkippedCell(dataset_name, scenario_name, combo_str, 0, "none",
                                       f"{type(exc).__name__}: {exc}"))
            return None

    def algo_cell(k: int, algo) -> RunRecord | None:
        seed = derive_seed(config.master_seed, "cell", dataset_name, scenario_name, combo_str, k, algo.key)
        params = dict(algo.params)
        if algo.name in ("clust_importance", "recursive") and "gbm" not in params:
            params["gbm"] = config.gbm
        if algo.name in ("mrmr", "clust_mrmr") and "bins" not in params:
            params["bins"] = config.mi_bins
        try:
            def one(sub_seed: int):
                result = run_selection(X_train, y_train, algo.name, k, sub_seed, **params)
                selected = list(result.selected)
                _, metrics, train_ns = train_and_eval(selected)
                return result, metrics, train_ns

            diagnostics: dict = {}
            if algo.name == "random":
                sub_runs = [one(seed + off) for off in (0, 1, 2)]
                by_acc = sorted(range(3), key=lambda i: (sub_runs[i][1].accuracy, i))
                result, metrics, train_ns = sub_runs[by_acc[1]]
                diagnostics["random_accuracies"] = [r[1].accuracy for r in sub_runs]
            else:
                result, metrics, train_ns = one(seed)

            mi = scorer.score(list(result.selected))
            return base_record(
                k, algo.key, seed, metrics.accuracy, metrics, mi,
                result.elapsed_ns, train_ns,
                [names[j] for j in result.selected],
                [float(s) for s in result.scores], diagnostics,
            )
        except Exception as exc:  # record-and-continue
            skipped.append(SkippedCell(dataset_name, scenario_name, combo_str, k, algo.key,
                                       f"{type(exc).__name__}: {exc}"))
            return None

    tasks: list[Callable[[], RunRecord | None]] = [none_cell]
    for k in config.ks:
        for algo in config.algorithms:
            tasks.append(lambda k=k, algo=algo: algo_cell(k, algo))
    return tasks


def bundled_synthetic_config() -> ExperimentConfig:
    """The self-contained config used by the determinism checks.

    Timings are recorded as zero so two executions render byte-identical
    reports; wall clocks are the one inherently non-reproducible field.
    """
    return ExperimentConfig(
        datasets=(
            DatasetSpec(
                name="synthetic",
                synthetic=SyntheticSpec(
                    n_cases=250, alphabet_size=6, min_len=4, max_len=8,
                    rule="transition", noise=0.05, seed=11,
                ),
            ),
        ),
        scenarios=(ScenarioSpec(name="planted", kind="attribute", attr="label", value="1"),),
        combos=(
            frozenset({FeatureKind.ACTIVITY}),
            ALL_KINDS,
        ),
        ks=(10,),
        algorithms=(
            AlgorithmSpec(name="random"),
            AlgorithmSpec(name="fisher"),
            AlgorithmSpec(name="cluster"),
            AlgorithmSpec(name="clust_importance"),
            AlgorithmSpec(name="clust_fisher"),
            AlgorithmSpec(name="mrmr", params={"solution_count": 1}, label="mrmr1"),
            AlgorithmSpec(name="mrmr", params={"solution_count": 5}, label="mrmr_ens5"),
            AlgorithmSpec(name="clust_mrmr"),
            AlgorithmSpec(name="lasso_vote"),
            AlgorithmSpec(name="recursive"),
        ),
        master_seed=7,
        gbm=GbmConfig(rounds=50),
        record_timings=False,
    )
