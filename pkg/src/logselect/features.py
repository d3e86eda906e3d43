"""Structural features over event-log traces.

Five feature kinds are extracted from the S/E-augmented trace of each
case: per-activity occurrence counts, adjacent-pair (2-gram) counts,
starter/finisher flags, and first-occurrence ordering flags. Only
features observed at least once in the log are instantiated, in a fixed
canonical order, so extraction is fully deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable, Sequence

import numpy as np
from scipy import sparse

from .errors import EmptyKinds, LengthMismatch, ValidationError
from .eventlog import END, START, EventLog


class FeatureKind(Enum):
    ACTIVITY = "activity"
    TWO_GRAM = "2gram"
    STARTER = "starter"
    FINISHER = "finisher"
    ORDER = "order"


#: Canonical block order of feature kinds within a matrix.
KIND_ORDER = (
    FeatureKind.ACTIVITY,
    FeatureKind.STARTER,
    FeatureKind.FINISHER,
    FeatureKind.TWO_GRAM,
    FeatureKind.ORDER,
)

ALL_KINDS = frozenset(KIND_ORDER)

_END_SORT = 1 << 30  # virtual end sorts after every real activity


@dataclass(frozen=True)
class FeatureDescriptor:
    """One structural feature: a kind plus its activity endpoint(s).

    `a`/`b` are alphabet indices, or the START/END sentinels. ACTIVITY
    uses only `a`; STARTER is (START, a); FINISHER is (b, END);
    TWO_GRAM and ORDER are directed pairs.
    """

    kind: FeatureKind
    a: int
    b: int | None = None

    def sort_key(self) -> tuple:
        ka = _END_SORT if self.a == END else self.a
        kb = _END_SORT if self.b == END else (self.b if self.b is not None else 0)
        return (KIND_ORDER.index(self.kind), ka, kb)


def feature_name(desc: FeatureDescriptor, alphabet: Sequence[str]) -> str:
    """Stable human-readable name, e.g. ``act:a``, ``2g:S>a``, ``ord:a->b``."""

    def sym(i: int | None) -> str:
        if i == START:
            return "S"
        if i == END:
            return "E"
        return alphabet[i]

    if desc.kind is FeatureKind.ACTIVITY:
        return f"act:{sym(desc.a)}"
    if desc.kind is FeatureKind.TWO_GRAM:
        return f"2g:{sym(desc.a)}>{sym(desc.b)}"
    if desc.kind is FeatureKind.STARTER:
        return f"start:{sym(desc.b)}"
    if desc.kind is FeatureKind.FINISHER:
        return f"end:{sym(desc.a)}"
    return f"ord:{sym(desc.a)}->{sym(desc.b)}"


class FeatureMatrix:
    """Sparse case-by-feature matrix with canonical column order."""

    def __init__(
        self,
        descriptors: list[FeatureDescriptor],
        values: sparse.csc_matrix,
        case_ids: list[str],
        alphabet: list[str],
    ):
        if values.shape != (len(case_ids), len(descriptors)):
            raise ValidationError(
                f"matrix shape {values.shape} does not match {len(case_ids)} cases x {len(descriptors)} features"
            )
        self.descriptors = descriptors
        self.values = values
        self.case_ids = case_ids
        self.alphabet = alphabet
        self._dense: np.ndarray | None = None

    @property
    def n_cases(self) -> int:
        return len(self.case_ids)

    @property
    def n_features(self) -> int:
        return len(self.descriptors)

    def column(self, j: int) -> np.ndarray:
        return np.asarray(self.values[:, [j]].todense()).ravel()

    def dense(self) -> np.ndarray:
        # cached; treat the matrix as immutable after construction
        if self._dense is None:
            self._dense = np.asarray(self.values.todense())
        return self._dense

    def feature_names(self) -> list[str]:
        return [feature_name(d, self.alphabet) for d in self.descriptors]

    def select_kinds(self, kinds: Iterable[FeatureKind]) -> "FeatureMatrix":
        kinds = set(kinds)
        if not kinds:
            raise EmptyKinds()
        keep = [j for j, d in enumerate(self.descriptors) if d.kind in kinds]
        return self.take_columns(keep)

    def take_columns(self, indices: Sequence[int]) -> "FeatureMatrix":
        idx = list(indices)
        values = sparse.csc_matrix(self.values[:, idx])
        return FeatureMatrix([self.descriptors[j] for j in idx], values, self.case_ids, self.alphabet)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FeatureMatrix)
            and self.descriptors == other.descriptors
            and self.case_ids == other.case_ids
            and self.alphabet == other.alphabet
            and self.values.shape == other.values.shape
            and (self.values != other.values).nnz == 0
        )


def extract(log: EventLog, kinds: Iterable[FeatureKind] = ALL_KINDS) -> FeatureMatrix:
    """Build the structural feature matrix for the requested kinds.

    ACTIVITY and TWO_GRAM columns hold occurrence counts; STARTER,
    FINISHER and ORDER columns hold 0/1 flags. ORDER(a, b) fires when
    both activities occur and the first a precedes the first b.
    """
    kinds = set(kinds)
    if not kinds:
        raise EmptyKinds()

    want_act = FeatureKind.ACTIVITY in kinds
    want_2g = FeatureKind.TWO_GRAM in kinds
    want_start = FeatureKind.STARTER in kinds
    want_end = FeatureKind.FINISHER in kinds
    want_ord = FeatureKind.ORDER in kinds

    cols: dict[FeatureDescriptor, tuple[list[int], list[int]]] = {}

    def add(desc: FeatureDescriptor, row: int, value: int) -> None:
        slot = cols.get(desc)
        if slot is None:
            slot = ([], [])
            cols[desc] = slot
        slot[0].append(row)
        slot[1].append(value)

    for row, case in enumerate(log.cases):
        trace = case.trace
        if want_act:
            counts: dict[int, int] = {}
            for a in trace:
                counts[a] = counts.get(a, 0) + 1
            for a, c in counts.items():
                add(FeatureDescriptor(FeatureKind.ACTIVITY, a), row, c)
        if want_2g:
            pair_counts: dict[tuple[int, int], int] = {}
            prev = START
            for a in trace:
                pair_counts[(prev, a)] = pair_counts.get((prev, a), 0) + 1
                prev = a
            pair_counts[(prev, END)] = pair_counts.get((prev, END), 0) + 1
            for (u, v), c in pair_counts.items():
                add(FeatureDescriptor(FeatureKind.TWO_GRAM, u, v), row, c)
        if want_start and trace:
            add(FeatureDescriptor(FeatureKind.STARTER, START, trace[0]), row, 1)
        if want_end and trace:
            add(FeatureDescriptor(FeatureKind.FINISHER, trace[-1], END), row, 1)
        if want_ord:
            firsts: list[int] = []
            seen: set[int] = set()
            for a in trace:
                if a not in seen:
                    seen.add(a)
                    firsts.append(a)
            for i in range(len(firsts)):
                for j in range(i + 1, len(firsts)):
                    add(FeatureDescriptor(FeatureKind.ORDER, firsts[i], firsts[j]), row, 1)

    descriptors = sorted(cols, key=FeatureDescriptor.sort_key)
    n_rows = log.n_cases
    if descriptors:
        rows_all: list[int] = []
        cols_all: list[int] = []
        vals_all: list[int] = []
        for j, desc in enumerate(descriptors):
            rows, vals = cols[desc]
            rows_all.extend(rows)
            cols_all.extend([j] * len(rows))
            vals_all.extend(vals)
        values = sparse.coo_matrix(
            (np.asarray(vals_all, dtype=np.int64), (rows_all, cols_all)),
            shape=(n_rows, len(descriptors)),
        ).tocsc()
    else:
        values = sparse.csc_matrix((n_rows, 0), dtype=np.int64)
    return FeatureMatrix(descriptors, values, log.case_ids(), list(log.alphabet))


@dataclass(frozen=True)
class DedupMap:
    """For each original feature index, its surviving representative."""

    representative: np.ndarray

    def __post_init__(self):
        rep = self.representative
        if rep.size and not np.array_equal(rep[rep], rep):
            raise ValidationError("dedup map is not idempotent")

    def survivors(self) -> np.ndarray:
        return np.unique(self.representative)

    def __len__(self) -> int:
        return len(self.representative)


def dedup(matrix: FeatureMatrix) -> tuple[FeatureMatrix, DedupMap]:
    """Drop columns whose value vectors duplicate an earlier column.

    Among identical columns the lowest canonical index survives;
    surviving column order is preserved.
    """
    csc = matrix.values.copy()
    csc.sort_indices()
    csc.eliminate_zeros()
    indptr, indices, data = csc.indptr, csc.indices, csc.data
    rep = np.arange(matrix.n_features, dtype=np.int64)
    seen: dict[bytes, int] = {}
    for j in range(matrix.n_features):
        lo, hi = indptr[j], indptr[j + 1]
        sig = indices[lo:hi].tobytes() + b"|" + data[lo:hi].tobytes()
        first = seen.setdefault(sig, j)
        rep[j] = first
    keep = np.flatnonzero(rep == np.arange(matrix.n_features))
    return matrix.take_columns(keep.tolist()), DedupMap(rep)


def save_matrix(matrix: FeatureMatrix, prefix: str) -> tuple[str, str]:
    """Persist as `<prefix>.header.json` + `<prefix>.values.csv`."""
    header_path = f"{prefix}.header.json"
    values_path = f"{prefix}.values.csv"
    with open(header_path, "w", encoding="utf-8") as f:
        _write_header(matrix, f)
    with open(values_path, "w", encoding="utf-8", newline="") as f:
        _write_values(matrix, f)
    return header_path, values_path


def _sym_name(i: int | None, alphabet: Sequence[str]) -> str | None:
    if i is None:
        return None
    if i == START:
        return "S"
    if i == END:
        return "E"
    return alphabet[i]


def _sym_index(name: str | None, index: dict[str, int]) -> int | None:
    if name is None:
        return None
    if name == "S":
        return START
    if name == "E":
        return END
    if name not in index:
        raise ValidationError(f"descriptor references unknown activity {name!r}")
    return index[name]


def _write_header(matrix: FeatureMatrix, f: IO) -> None:
    payload = {
        "n_cases": matrix.n_cases,
        "case_ids": matrix.case_ids,
        "alphabet": matrix.alphabet,
        "kinds": sorted({d.kind.value for d in matrix.descriptors}),
        "descriptors": [
            {
                "kind": d.kind.value,
                "from": _sym_name(d.a, matrix.alphabet),
                "to": _sym_name(d.b, matrix.alphabet),
            }
            for d in matrix.descriptors
        ],
    }
    json.dump(payload, f, indent=1)


def _write_values(matrix: FeatureMatrix, f: IO) -> None:
    import csv as _csv

    writer = _csv.writer(f, lineterminator="\n")
    writer.writerow(matrix.feature_names())
    dense = matrix.dense()
    for row in dense:
        writer.writerow([int(v) for v in row])


def load_matrix(prefix: str) -> FeatureMatrix:
    """Load a matrix saved by :func:`save_matrix`, validating consistency."""
    import csv as _csv

    with open(f"{prefix}.header.json", "r", encoding="utf-8") as f:
        header = json.load(f)
    alphabet = list(header["alphabet"])
    index = {a: i for i, a in enumerate(alphabet)}
    descriptors = [
        FeatureDescriptor(
            FeatureKind(d["kind"]),
            _sym_index(d["from"], index),
            _sym_index(d["to"], index),
        )
        for d in header["descriptors"]
    ]
    case_ids = list(header["case_ids"])
    if header["n_cases"] != len(case_ids):
        raise ValidationError("header n_cases does not match case id list")

    with open(f"{prefix}.values.csv", "r", encoding="utf-8", newline="") as f:
        reader = _csv.reader(f)
        try:
            names = next(reader)
        except StopIteration:
            raise ValidationError("values grid is empty")
        rows = [[int(cell) for cell in row] for row in reader if row]

    if len(names) != len(descriptors):
        raise LengthMismatch(len(names), len(descriptors))
    if len(rows) != len(case_ids):
        raise LengthMismatch(len(rows), len(case_ids))
    expected = [feature_name(d, alphabet) for d in descriptors]
    if names != expected:
        raise ValidationError("values grid column names do not match header descriptors")
    values = sparse.csc_matrix(np.asarray(rows, dtype=np.int64).reshape(len(rows), len(descriptors)))
    matrix = FeatureMatrix(descriptors, values, case_ids, alphabet)
    if (matrix.dense() < 0).any():
        raise ValidationError("feature values must be non-negative")
    return matrix
