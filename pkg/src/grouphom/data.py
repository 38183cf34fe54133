"""Count data model: validated per-group paired multinomial counts.

A dataset holds ``k`` groups; group ``r`` carries two independent count
vectors over the same ``d`` categories, one per population.  The on-disk
format is a CSV with header ``group,population,c1,...,cd`` where
``population`` is 1 or 2 and each group must contribute exactly one row
per population.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    DatasetError,
    DimensionMismatch,
    DuplicateSample,
    EmptyInput,
    MissingMate,
    MixedDimension,
    NegativeCount,
    ZeroTotal,
)

__all__ = [
    "CountVector",
    "ProbVector",
    "GroupPair",
    "GroupedDataset",
    "validate_dataset",
    "empirical_proportions",
    "pooled_counts",
    "read_counts_csv",
    "load_dataset",
    "write_dataset_csv",
]


def _frozen_array(values, dtype):
    arr = np.asarray(values, dtype=dtype)
    if arr.ndim != 1:
        raise DatasetError(f"expected a 1-d vector, got shape {arr.shape}")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class CountVector:
    """Immutable vector of non-negative integer category counts."""

    counts: np.ndarray
    total: int = field(init=False)

    def __post_init__(self):
        arr = np.asarray(self.counts)
        if arr.dtype.kind not in "iu":
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise DatasetError("counts must be integers")
        arr = _frozen_array(arr, np.int64)
        if arr.size == 0:
            raise DatasetError("count vector must have at least one category")
        if np.any(arr < 0):
            raise NegativeCount(f"negative count in {arr.tolist()}")
        object.__setattr__(self, "counts", arr)
        object.__setattr__(self, "total", int(arr.sum()))

    @property
    def d(self) -> int:
        return self.counts.size

    def __len__(self) -> int:
        return self.counts.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, CountVector):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)

    def __hash__(self) -> int:
        return hash(self.counts.tobytes())


@dataclass(frozen=True, eq=False)
class ProbVector:
    """Probability vector: entries in [0, 1] summing to 1 (tolerance 1e-9)."""

    probs: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.probs, np.float64)
        if np.any(arr < 0) or np.any(arr > 1):
            raise DatasetError("probabilities must lie in [0, 1]")
        if abs(float(arr.sum()) - 1.0) > 1e-9:
            raise DatasetError(f"probabilities sum to {arr.sum()!r}, not 1")
        object.__setattr__(self, "probs", arr)

    @property
    def d(self) -> int:
        return self.probs.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProbVector):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())


@dataclass(frozen=True)
class GroupPair:
    """One group's pair of samples, sharing the category dimension."""

    group_id: str
    sample1: CountVector
    sample2: CountVector

    def __post_init__(self):
        if self.sample1.d != self.sample2.d:
            raise DimensionMismatch(
                f"group {self.group_id!r}: samples have {self.sample1.d} "
                f"and {self.sample2.d} categories"
            )

    @property
    def d(self) -> int:
        return self.sample1.d


@dataclass(frozen=True)
class GroupedDataset:
    """An ordered collection of groups over a common category dimension."""

    groups: tuple[GroupPair, ...]
    d: int = field(init=False)

    def __post_init__(self):
        groups = tuple(self.groups)
        if not groups:
            raise EmptyInput("dataset has no groups")
        d = groups[0].d
        for g in groups:
            if g.d != d:
                raise MixedDimension(
                    f"group {g.group_id!r} has {g.d} categories, expected {d}"
                )
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "d", d)

    @property
    def k(self) -> int:
        return len(self.groups)

    def __iter__(self) -> Iterator[GroupPair]:
        return iter(self.groups)

    def __len__(self) -> int:
        return len(self.groups)

    def group_ids(self) -> list[str]:
        return [g.group_id for g in self.groups]

    def counts_matrix(self, population: int) -> np.ndarray:
        """Stack one population's counts as a (k, d) int64 matrix."""
        if population not in (1, 2):
            raise DatasetError(f"population must be 1 or 2, got {population}")
        attr = "sample1" if population == 1 else "sample2"
        return np.stack([getattr(g, attr).counts for g in self.groups])

    def sizes(self, population: int) -> np.ndarray:
        """Per-group totals of one population as a (k,) int64 array."""
        attr = "sample1" if population == 1 else "sample2"
        return np.array(
            [getattr(g, attr).total for g in self.groups], dtype=np.int64
        )


RawRow = tuple[str, int, Sequence[int]]


def validate_dataset(rows: Iterable[RawRow]) -> GroupedDataset:
    """Assemble raw ``(group, population, counts)`` rows into a dataset.

    Groups appear in the output in order of first appearance; each group
    must contribute exactly one row per population.

    Raises
    ------
    EmptyInput, MixedDimension, NegativeCount, DuplicateSample, MissingMate
        On the corresponding defect.  Validation is idempotent: re-running
        it on a dataset's own rows returns an equal dataset.
    """
    rows = list(rows)
    if not rows:
        raise EmptyInput("no data rows")
    d = len(rows[0][2])
    order: list[str] = []
    seen: dict[tuple[str, int], CountVector] = {}
    for group_id, population, counts in rows:
        group_id = str(group_id)
        if population not in (1, 2):
            raise DatasetError(
                f"group {group_id!r}: population must be 1 or 2, got {population}"
            )
        if len(counts) != d:
            raise MixedDimension(
                f"group {group_id!r} population {population}: row has "
                f"{len(counts)} categories, expected {d}"
            )
        key = (group_id, population)
        if key in seen:
            raise DuplicateSample(
                f"group {group_id!r} population {population} appears twice"
            )
        if group_id not in order:
            order.append(group_id)
        seen[key] = CountVector(np.asarray(counts))
    groups = []
    for group_id in order:
        try:
            s1 = seen[(group_id, 1)]
            s2 = seen[(group_id, 2)]
        except KeyError as exc:
            raise MissingMate(
                f"group {group_id!r} is missing population {exc.args[0][1]}"
            ) from None
        groups.append(GroupPair(group_id, s1, s2))
    return GroupedDataset(tuple(groups))


def empirical_proportions(v: CountVector) -> ProbVector:
    """Counts divided by their total.

    Raises
    ------
    ZeroTotal
        If the vector sums to zero.
    """
    if v.total == 0:
        raise ZeroTotal("cannot form proportions of an all-zero count vector")
    return ProbVector(v.counts / v.total)


def pooled_counts(pair: GroupPair) -> CountVector:
    """Elementwise sum of a group's two samples."""
    return CountVector(pair.sample1.counts + pair.sample2.counts)


def read_counts_csv(path) -> list[RawRow]:
    """Read raw rows from a ``group,population,c1,...,cd`` CSV file."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInput(f"{path}: file is empty") from None
        header = [h.strip().lower() for h in header]
        if len(header) < 3 or header[:2] != ["group", "population"]:
            raise DatasetError(
                f"{path}: header must be group,population,c1,...,cd "
                f"(got {','.join(header)})"
            )
        d = len(header) - 2
        rows: list[RawRow] = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != d + 2:
                raise MixedDimension(
                    f"{path}:{lineno}: expected {d + 2} fields, got {len(row)}"
                )
            group_id = row[0].strip()
            try:
                population = int(row[1])
            except ValueError:
                raise DatasetError(
                    f"{path}:{lineno}: population {row[1]!r} is not an integer"
                ) from None
            try:
                counts = [int(cell) for cell in row[2:]]
            except ValueError:
                raise DatasetError(
                    f"{path}:{lineno}: counts must be integers, got {row[2:]}"
                ) from None
            rows.append((group_id, population, counts))
    return rows


def load_dataset(path) -> GroupedDataset:
    """Read and validate a dataset CSV in one step."""
    return validate_dataset(read_counts_csv(path))


def write_dataset_csv(ds: GroupedDataset, path) -> None:
    """Write a dataset in the ingestible CSV format (round-trip safe)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["group", "population"] + [f"c{j + 1}" for j in range(ds.d)]
        )
        for g in ds.groups:
            writer.writerow([g.group_id, 1] + g.sample1.counts.tolist())
            writer.writerow([g.group_id, 2] + g.sample2.counts.tolist())
