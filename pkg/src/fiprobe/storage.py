"""Bit-exact feature-file format (FFSB v1), spec config files, results tables.

FFSB layout, all little-endian:

    magic     5 bytes  0x46 0x46 0x53 0x42 0x01 ("FFSB" + version 1)
    n_samples u32
    dim       u32
    n_classes u32
    has_groups u8 (0 or 1)
    labels    u32 * n_samples
    groups    u32 * n_samples            (only if has_groups == 1)
    features  f32 * n_samples * dim      (row-major)

Features are float32 on disk and upcast to float64 in memory. The gaussian
spec config is line-oriented "key = value" text with exactly the keys dim,
mean_a, mean_b and std (comma-separated floats); unknown keys are rejected.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .core import LabeledFeatureSet, ValidationError
from .gaussian import GaussianTaskSpec

__all__ = [
    "FFSB_MAGIC",
    "FFSBError",
    "read_feature_file",
    "write_feature_file",
    "parse_spec_config",
    "format_spec_config",
    "read_spec_config",
    "ResultsTable",
    "write_results",
    "read_results_csv",
]

FFSB_MAGIC = b"FFSB\x01"
_HEADER = struct.Struct("<5sIIIB")


class FFSBError(ValidationError):
    """Malformed FFSB file."""


def read_feature_file(path) -> LabeledFeatureSet:
    """Read and validate an FFSB v1 file."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise FFSBError(f"{path}: truncated header ({len(blob)} bytes)")
    magic, n, dim, n_classes, has_groups = _HEADER.unpack_from(blob, 0)
    if magic != FFSB_MAGIC:
        raise FFSBError(f"{path}: not an FFSB file")
    if n < 1 or dim < 1 or n_classes < 1:
        raise FFSBError(f"{path}: header counts must be >= 1 "
                        f"(n={n}, dim={dim}, classes={n_classes})")
    if has_groups not in (0, 1):
        raise FFSBError(f"{path}: has_groups must be 0 or 1, got {has_groups}")
    expected = _HEADER.size + 4 * n + (4 * n if has_groups else 0) + 4 * n * dim
    if len(blob) != expected:
        raise FFSBError(f"{path}: size mismatch, expected {expected} bytes "
                        f"for the declared header, found {len(blob)}")
    off = _HEADER.size
    labels = np.frombuffer(blob, dtype="<u4", count=n, offset=off).astype(np.int64)
    off += 4 * n
    groups = None
    if has_groups:
        groups = np.frombuffer(blob, dtype="<u4", count=n, offset=off).astype(np.int64)
        off += 4 * n
    feats = np.frombuffer(blob, dtype="<f4", count=n * dim, offset=off)
    feats = feats.reshape(n, dim).astype(np.float64)
    try:
        return LabeledFeatureSet(feats, labels, int(n_classes), groups)
    except ValidationError as exc:
        raise FFSBError(f"{path}: {exc}") from exc


def write_feature_file(data: LabeledFeatureSet, path) -> None:
    """Write an FFSB v1 file; identical inputs produce identical bytes."""
    n, dim = data.features.shape
    for name, arr in (("labels", data.labels),) + (
            (("groups", data.groups),) if data.groups is not None else ()):
        if arr.min() < 0 or arr.max() >= 2 ** 32:
            raise ValidationError(f"{name} do not fit in u32")
    buf = io.BytesIO()
    buf.write(_HEADER.pack(FFSB_MAGIC, n, dim, data.n_classes,
                           1 if data.groups is not None else 0))
    buf.write(data.labels.astype("<u4").tobytes())
    if data.groups is not None:
        buf.write(data.groups.astype("<u4").tobytes())
    buf.write(data.features.astype("<f4").tobytes())
    try:
        with open(path, "wb") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write feature file {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# gaussian spec config

_SPEC_KEYS = ("dim", "mean_a", "mean_b", "std")


def parse_spec_config(text: str) -> GaussianTaskSpec:
    """Parse a key = value gaussian spec config; strict about keys."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"spec config line {lineno}: expected key = value")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _SPEC_KEYS:
            raise ValidationError(f"spec config line {lineno}: unknown key {key!r}")
        if key in values:
            raise ValidationError(f"spec config line {lineno}: duplicate key {key!r}")
        values[key] = val.strip()
    missing = [k for k in _SPEC_KEYS if k not in values]
    if missing:
        raise ValidationError(f"spec config missing keys: {', '.join(missing)}")
    try:
        dim = int(values["dim"])
        vecs = {k: np.array([float(x) for x in values[k].replace(",", " ").split()])
                for k in ("mean_a", "mean_b", "std")}
    except ValueError as exc:
        raise ValidationError(f"spec config: {exc}") from exc
    for k, v in vecs.items():
        if v.size != dim:
            raise ValidationError(
                f"spec config: {k} has {v.size} values, expected dim={dim}")
    return GaussianTaskSpec(means=np.vstack([vecs["mean_a"], vecs["mean_b"]]),
                            stds=vecs["std"])


def format_spec_config(spec: GaussianTaskSpec) -> str:
    def fmt(v):
        return ", ".join(repr(float(x)) for x in v)
    return (f"dim = {spec.dim}\n"
            f"mean_a = {fmt(spec.means[0])}\n"
            f"mean_b = {fmt(spec.means[1])}\n"
            f"std = {fmt(spec.stds)}\n")


def read_spec_config(path) -> GaussianTaskSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spec_config(fh.read())


# ---------------------------------------------------------------------------
# results tables

@dataclass
class ResultsTable:
    """Rectangular results with a metadata map (config echo, seed, version)."""

    columns: list[str]
    rows: list[list] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def append(self, *cells) -> None:
        if len(cells) != len(self.columns):
            raise ValidationError(
                f"row width {len(cells)} != {len(self.columns)} columns")
        self.rows.append(list(cells))


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def format_results_csv(table: ResultsTable) -> str:
    """CSV text: header row + rows, LF endings, 17 significant digits."""
    out = [",".join(table.columns)]
    for row in table.rows:
        out.append(",".join(_cell(v) for v in row))
    return "\n".join(out) + "\n"


def format_results_structured(table: ResultsTable) -> str:
    payload = {
        "columns": table.columns,
        "rows": [[_cell(v) for v in row] for row in table.rows],
        "metadata": table.metadata,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_results(table: ResultsTable, path, format: str = "csv") -> None:
    """Write a results table as CSV or as self-describing JSON."""
    if format == "csv":
        text = format_results_csv(table)
    elif format == "structured":
        text = format_results_structured(table)
    else:
        raise ValidationError(f"unknown results format {format!r}")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write results {path}: {exc}") from exc


def read_results_csv(path) -> ResultsTable:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValidationError(f"{path}: empty results file")
    return ResultsTable(columns=lines[0].split(","),
                        rows=[line.split(",") for line in lines[1:]])
