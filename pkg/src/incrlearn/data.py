"""Datasets: synthetic Gaussian mixtures and a delimited text format.

Delimited format
----------------
One sample per row, fields separated by ``schema.delimiter`` (default
``,``).  Columns are ``label, x_1, ..., x_D``; with ``split_column=True`` a
leading ``train``/``test`` column comes first.  An optional header row is
skipped when ``schema.header`` is set.  Labels are arbitrary strings and are
mapped to class ids ``0..C-1`` in order of first appearance; the original
strings are kept in ``Dataset.class_names``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .core import RngStream
from .errors import EmptyDatasetError, MissingDataError, ParseError, ShapeError


@dataclass
class Dataset:
    """Per-class train and test samples, keyed by class id."""

    train: dict
    test: dict
    input_dim: int
    class_names: list = field(default_factory=list)

    def __post_init__(self):
        if not self.class_names:
            self.class_names = [str(c) for c in self.classes]

    @property
    def classes(self) -> list:
        return sorted(set(self.train) | set(self.test))

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    def num_train(self) -> int:
        return sum(X.shape[0] for X in self.train.values())

    def validate(self) -> "Dataset":
        for c in self.classes:
            for part, name in ((self.train, "train"), (self.test, "test")):
                X = part.get(c)
                if X is None or X.shape[0] == 0:
                    raise MissingDataError(f"class {c} has no {name} samples")
                if X.ndim != 2 or X.shape[1] != self.input_dim:
                    raise ShapeError(f"class {c} {name} samples have shape {X.shape}")
        return self


def gen_synthetic(num_classes: int = 10, dim: int = 64, modes_per_class: int = 2,
                  separation: float = 3.0, noise: float = 1.0, n_train: int = 200,
                  n_test: int = 100, seed: int = 0) -> Dataset:
    """Gaussian-mixture classes.

    Each class has ``modes_per_class`` centers drawn as standard normal
    vectors rescaled to norm ``separation``; samples are a uniformly chosen
    center plus isotropic noise of standard deviation ``noise``.
    """
    if separation <= 0 or noise < 0:
        raise ValueError("separation must be > 0 and noise >= 0")
    if min(num_classes, dim, modes_per_class, n_train, n_test) < 1:
        raise ValueError("counts and dimensions must be >= 1")
    rng = RngStream(seed)
    centers = rng.normal((num_classes, modes_per_class, dim))
    centers *= separation / np.linalg.norm(centers, axis=2, keepdims=True)
    train, test = {}, {}
    for c in range(num_classes):
        for part, n in ((train, n_train), (test, n_test)):
            modes = rng.integers(modes_per_class, n)
            part[c] = centers[c, modes] + noise * rng.normal((n, dim))
    return Dataset(train, test, dim)


# desk-scale default benchmark
TOY_IBENCH = dict(num_classes=10, dim=64, modes_per_class=2, separation=3.0,
                  noise=1.0, n_train=200, n_test=100)


def toy_ibench(seed: int = 0, **overrides) -> Dataset:
    return gen_synthetic(**{**TOY_IBENCH, **overrides, "seed": seed})


@dataclass(frozen=True)
class DelimitedSchema:
    delimiter: str = ","
    header: bool = False
    split_column: bool = False


def _read_rows(path, schema: DelimitedSchema, names: dict, dim: list):
    out = {"train": [], "test": []}
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter=schema.delimiter), start=1):
            if lineno == 1 and schema.header:
                continue
            if not row or all(not f.strip() for f in row):
                continue
            part = "train"
            if schema.split_column:
                part = row[0].strip().lower()
                if part not in out:
                    raise ParseError(f"split must be 'train' or 'test', got {row[0]!r}", lineno)
                row = row[1:]
            if len(row) < 2:
                raise ParseError("expected a label followed by at least one value", lineno)
            label = row[0].strip()
            try:
                values = [float(f) for f in row[1:]]
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            if dim[0] is None:
                dim[0] = len(values)
            elif len(values) != dim[0]:
                raise ShapeError(f"line {lineno}: expected {dim[0]} values, got {len(values)}")
            cid = names.setdefault(label, len(names))
            out[part].append((cid, values))
    return out


def load_delimited(path, test_path=None, schema: DelimitedSchema = DelimitedSchema()) -> Dataset:
    """Parse a delimited dataset; the test split comes from ``test_path`` or a split column."""
    names: dict = {}
    dim = [None]
    rows = _read_rows(path, schema, names, dim)
    if test_path is not None:
        rows["test"] += _read_rows(test_path, schema, names, dim)["train"]
    if not rows["train"] and not rows["test"]:
        raise EmptyDatasetError(f"no samples in {path}")
    parts = []
    for key in ("train", "test"):
        grouped: dict = {}
        for cid, values in rows[key]:
            grouped.setdefault(cid, []).append(values)
        parts.append({c: np.array(v, dtype=np.float64) for c, v in sorted(grouped.items())})
    return Dataset(parts[0], parts[1], dim[0], list(names))


def write_delimited(ds: Dataset, path, schema: DelimitedSchema = DelimitedSchema(split_column=True)) -> None:
    """Write ``ds`` in the delimited format; floats use repr (round-trip exact)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=schema.delimiter, lineterminator="\n")
        if schema.header:
            head = (["split"] if schema.split_column else []) + ["label"] + [f"x{i}" for i in range(ds.input_dim)]
            w.writerow(head)
        for part_name, part in (("train", ds.train), ("test", ds.test)):
            if part_name == "test" and not schema.split_column:
                break
            for c in sorted(part):
                for x in part[c]:
                    prefix = [part_name] if schema.split_column else []
                    w.writerow(prefix + [ds.class_names[c]] + [repr(float(v)) for v in x])
