"""Loading and saving multichannel records and labeled cohort manifests.

Two on-disk layouts are supported: delimited text with one column per
channel, and a single column holding all channels back to back
(channel-major).  Values are parsed as 64-bit floats and written back with
shortest round-trip formatting, so save/load is bit-exact.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import BadParamsError, ParseError, ShapeError
from .signals import Record


class Label(str, enum.Enum):
    """Binary class label.  A is the negative/control class in FP/FN bookkeeping."""

    A = "A"
    B = "B"


class LayoutKind(str, enum.Enum):
    COLUMNS_PER_CHANNEL = "columns"
    CHANNEL_MAJOR = "channel-major"


@dataclass(frozen=True)
class RawLayout:
    """On-disk shape of a record file."""

    kind: LayoutKind = LayoutKind.COLUMNS_PER_CHANNEL
    delimiter: str = ","
    has_header: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", LayoutKind(self.kind))
        if len(self.delimiter) != 1:
            raise BadParamsError(f"delimiter must be a single character, got {self.delimiter!r}")


@dataclass(frozen=True)
class DatasetManifest:
    """Cohort bookkeeping: one (path, subject id, label) entry per record."""

    entries: tuple
    channel_count: int
    sample_rate_hz: float

    def __post_init__(self):
        entries = tuple((str(p), str(sid), Label(lab)) for p, sid, lab in self.entries)
        ids = [sid for _, sid, _ in entries]
        if len(set(ids)) != len(ids):
            dupes = sorted({sid for sid in ids if ids.count(sid) > 1})
            raise BadParamsError(f"duplicate subject ids in manifest: {dupes}")
        if self.channel_count < 1:
            raise BadParamsError(f"channel_count must be positive, got {self.channel_count}")
        if self.sample_rate_hz <= 0:
            raise BadParamsError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        object.__setattr__(self, "entries", entries)


def _data_lines(path: str, has_header: bool):
    """Yield (1-based line number, stripped text) for non-blank data lines."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if has_header and lineno == 1:
                continue
            text = raw.strip()
            if text:
                yield lineno, text


def _parse_row(text: str, delimiter: str, lineno: int, path: str) -> list[float]:
    out = []
    for col, token in enumerate(text.split(delimiter), start=1):
        token = token.strip()
        try:
            value = float(token)
        except ValueError:
            raise ParseError(
                f"{path}: non-numeric token {token!r} at line {lineno}, column {col}"
            ) from None
        if not math.isfinite(value):
            raise ParseError(f"{path}: non-finite value {token!r} at line {lineno}, column {col}")
        out.append(value)
    return out


def load_record(
    path: str,
    layout: RawLayout,
    channel_count: int,
    sample_rate_hz: float,
    subject_id: str = "",
) -> Record:
    """Parse a record file into an (n, channel_count) Record.

    Raises ParseError for malformed tokens (line/column reported) and
    ShapeError when the contents disagree with the layout or channel count.
    """
    if channel_count < 1:
        raise BadParamsError(f"channel_count must be positive, got {channel_count}")
    rows = []
    for lineno, text in _data_lines(path, layout.has_header):
        values = _parse_row(text, layout.delimiter, lineno, path)
        if layout.kind is LayoutKind.COLUMNS_PER_CHANNEL:
            if len(values) != channel_count:
                raise ShapeError(
                    f"{path}: line {lineno} has {len(values)} columns, expected {channel_count}"
                )
        else:
            if len(values) != 1:
                raise ShapeError(
                    f"{path}: line {lineno} has {len(values)} columns, expected a single value"
                )
        rows.append(values)
    if not rows:
        raise ShapeError(f"{path}: no data lines")
    if layout.kind is LayoutKind.COLUMNS_PER_CHANNEL:
        samples = np.array(rows, dtype=np.float64)
    else:
        flat = np.array([v[0] for v in rows], dtype=np.float64)
        if flat.size % channel_count:
            raise ShapeError(
                f"{path}: {flat.size} values are not divisible by {channel_count} channels"
            )
        samples = flat.reshape(channel_count, -1).T
    return Record(samples, sample_rate_hz=sample_rate_hz, subject_id=subject_id)


def save_record(record: Record, path: str, layout: RawLayout) -> None:
    """Write a record in the given layout; values round-trip bit-exactly."""
    d = record.n_channels
    with open(path, "w", encoding="utf-8") as fh:
        if layout.kind is LayoutKind.COLUMNS_PER_CHANNEL:
            if layout.has_header:
                fh.write(layout.delimiter.join(f"ch{i}" for i in range(d)) + "\n")
            for row in record.samples:
                fh.write(layout.delimiter.join(repr(float(v)) for v in row) + "\n")
        else:
            if layout.has_header:
                fh.write("value\n")
            for channel in record.samples.T:
                for v in channel:
                    fh.write(repr(float(v)) + "\n")


MANIFEST_HEADER = ("path", "subject_id", "label")


def read_manifest(
    path: str,
    channel_count: int,
    sample_rate_hz: float,
    delimiter: str = ",",
    label_names: dict[str, Label] | None = None,
) -> DatasetManifest:
    """Read a `path,subject_id,label` manifest; relative paths resolve
    against the manifest's own directory."""
    label_names = label_names or {lab.value: lab for lab in Label}
    base = os.path.dirname(os.path.abspath(path))
    entries = []
    for lineno, text in _data_lines(path, has_header=False):
        parts = [p.strip() for p in text.split(delimiter)]
        if lineno == 1 and tuple(p.lower() for p in parts) == MANIFEST_HEADER:
            continue
        if len(parts) != 3:
            raise ParseError(f"{path}: line {lineno} has {len(parts)} fields, expected 3")
        rec_path, sid, label_token = parts
        if label_token not in label_names:
            raise ParseError(
                f"{path}: line {lineno}: unknown label {label_token!r}, "
                f"expected one of {sorted(label_names)}"
            )
        if not os.path.isabs(rec_path):
            rec_path = os.path.join(base, rec_path)
        entries.append((rec_path, sid, label_names[label_token]))
    return DatasetManifest(
        entries=tuple(entries), channel_count=channel_count, sample_rate_hz=sample_rate_hz
    )


def write_manifest(entries, path: str, delimiter: str = ",") -> None:
    """Write manifest rows; paths are stored relative to the manifest's directory."""
    base = os.path.dirname(os.path.abspath(path))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(delimiter.join(MANIFEST_HEADER) + "\n")
        for rec_path, sid, label in entries:
            rel = os.path.relpath(rec_path, base) if os.path.isabs(rec_path) else rec_path
            fh.write(delimiter.join([rel, sid, Label(label).value]) + "\n")


def load_cohort(manifest: DatasetManifest, layout: RawLayout) -> list[tuple[Record, Label]]:
    """Load every manifest entry in order; failures name the subject."""
    cohort = []
    for rec_path, sid, label in manifest.entries:
        try:
            record = load_record(
                rec_path, layout, manifest.channel_count, manifest.sample_rate_hz, subject_id=sid
            )
        except OSError as exc:
            raise ParseError(f"subject {sid!r}: cannot read {rec_path}: {exc}") from exc
        except (ParseError, ShapeError, BadParamsError) as exc:
            raise type(exc)(f"subject {sid!r}: {exc}") from exc
        cohort.append((record, label))
    return cohort
