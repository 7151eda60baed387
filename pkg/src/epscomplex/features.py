"""Per-subject feature vectors from complexity coefficients of a record
and its finite differences.

Order 0 is the original record and contributes features (A, B); order k >= 1
contributes (ADk, BDk) computed on the k-th difference.  The default set
{0, 4} yields the four-dimensional vector (A, B, AD4, BD4).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .complexity import ComplexityCoefficients, ComplexitySpectrum, compute_spectrum, fit_coefficients
from .errors import BadParamsError, EpsComplexError, FTrivialRecordError, ParseError
from .ingest import Label
from .recon import MethodFamily, RetentionGrid
from .signals import Record, difference

ALL_ORDERS = (0, 1, 2, 3, 4)


def order_feature_names(order: int) -> tuple[str, str]:
    return ("A", "B") if order == 0 else (f"AD{order}", f"BD{order}")


@dataclass(frozen=True)
class FeatureConfig:
    """Which difference orders to featurize, and with what estimator settings."""

    difference_orders: tuple = (0, 4)
    grid: RetentionGrid = field(default_factory=RetentionGrid)
    family: MethodFamily = field(default_factory=MethodFamily)

    def __post_init__(self):
        orders = tuple(sorted(set(int(k) for k in self.difference_orders)))
        if not orders:
            raise BadParamsError("at least one difference order is required")
        if any(k not in ALL_ORDERS for k in orders):
            raise BadParamsError(f"difference orders must be a subset of {ALL_ORDERS}, got {orders}")
        object.__setattr__(self, "difference_orders", orders)

    def feature_names(self) -> tuple:
        names = []
        for k in self.difference_orders:
            names.extend(order_feature_names(k))
        return tuple(names)


@dataclass(frozen=True)
class FeatureVector:
    """Named complexity features for one subject."""

    subject_id: str
    label: Label | None
    names: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        names = tuple(self.names)
        if values.ndim != 1 or values.size != len(names):
            raise BadParamsError(
                f"feature vector has {values.size} values for {len(names)} names"
            )
        if not np.isfinite(values).all():
            raise BadParamsError(f"subject {self.subject_id!r}: non-finite feature values")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", names)
        if self.label is not None:
            object.__setattr__(self, "label", Label(self.label))

    def as_dict(self) -> dict:
        return dict(zip(self.names, self.values.tolist()))

    def restrict(self, names) -> "FeatureVector":
        """Project onto a subset of feature names, in the given order."""
        names = tuple(names)
        missing = [n for n in names if n not in self.names]
        if missing:
            raise BadParamsError(f"subject {self.subject_id!r} lacks features {missing}")
        pos = [self.names.index(n) for n in names]
        return FeatureVector(self.subject_id, self.label, names, self.values[pos])


def extract_detailed(
    record: Record,
    config: FeatureConfig | None = None,
    label: Label | None = None,
) -> tuple[FeatureVector, dict]:
    """Like extract, but also returns {order: (spectrum, coefficients)} for
    plot-data emission."""
    config = config or FeatureConfig()
    names, values = [], []
    detail = {}
    for k in config.difference_orders:
        rec_k = record if k == 0 else difference(record, k)
        try:
            spectrum = compute_spectrum(rec_k, config.grid, config.family)
            coeffs = fit_coefficients(spectrum, config.grid)
        except FTrivialRecordError as exc:
            raise FTrivialRecordError(f"difference order {k}: {exc}") from exc
        detail[k] = (spectrum, coeffs)
        a_name, b_name = order_feature_names(k)
        names.extend([a_name, b_name])
        values.extend([coeffs.a, coeffs.b])
    vector = FeatureVector(record.subject_id, label, tuple(names), np.array(values))
    return vector, detail


def extract(
    record: Record,
    config: FeatureConfig | None = None,
    label: Label | None = None,
) -> FeatureVector:
    """Complexity features of the record and its configured differences."""
    return extract_detailed(record, config, label)[0]


def extract_cohort(
    records,
    config: FeatureConfig | None = None,
    threads: int = 1,
) -> tuple[list[FeatureVector], list[tuple[str, EpsComplexError]]]:
    """Featurize a labeled cohort, input order preserved.

    Per-subject failures do not abort the batch; they come back as
    (subject_id, error) pairs alongside the successful vectors.
    """
    config = config or FeatureConfig()
    items = list(records)

    def run(item):
        record, label = item
        try:
            return extract(record, config, label), None
        except EpsComplexError as exc:
            return None, (record.subject_id, exc)

    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, items))
    else:
        results = [run(item) for item in items]
    vectors = [vec for vec, _ in results if vec is not None]
    failures = [err for _, err in results if err is not None]
    return vectors, failures


def write_feature_table(vectors, path: str, delimiter: str = ",") -> None:
    """Delimited feature table: subject_id,label,<feature columns>.

    Values are written with 12 significant digits, deterministically.
    """
    vectors = list(vectors)
    if not vectors:
        raise BadParamsError("no feature vectors to write")
    names = vectors[0].names
    for vec in vectors:
        if vec.names != names:
            raise BadParamsError(
                f"inconsistent feature schema: {vec.subject_id!r} has {vec.names}, expected {names}"
            )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(delimiter.join(("subject_id", "label") + names) + "\n")
        for vec in vectors:
            label = vec.label.value if vec.label is not None else ""
            cells = [vec.subject_id, label] + [f"{v:.12g}" for v in vec.values]
            fh.write(delimiter.join(cells) + "\n")


def read_feature_table(path: str, delimiter: str = ",") -> list[FeatureVector]:
    """Inverse of write_feature_table."""
    vectors = []
    names = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            parts = [p.strip() for p in text.split(delimiter)]
            if names is None:
                if len(parts) < 3 or parts[:2] != ["subject_id", "label"]:
                    raise ParseError(f"{path}: line {lineno}: bad feature-table header")
                names = tuple(parts[2:])
                continue
            if len(parts) != len(names) + 2:
                raise ParseError(
                    f"{path}: line {lineno} has {len(parts)} fields, expected {len(names) + 2}"
                )
            sid, label_token = parts[0], parts[1]
            try:
                label = Label(label_token) if label_token else None
                values = [float(tok) for tok in parts[2:]]
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from None
            vectors.append(FeatureVector(sid, label, names, np.array(values)))
    if names is None:
        raise ParseError(f"{path}: empty feature table")
    return vectors
