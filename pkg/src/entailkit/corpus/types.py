"""Core dataset types: task definitions, records, datasets."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..errors import DataError, ValidationError


class TaskKind(str, Enum):
    SINGLE_SENTENCE = "single_sentence"
    SENTENCE_PAIR = "sentence_pair"
    REGRESSION = "regression"


class Metric(str, Enum):
    ACCURACY = "accuracy"
    MACRO_F1 = "macro_f1"
    BINARY_F1 = "binary_f1"
    PEARSON = "pearson"


@dataclass(frozen=True)
class TaskSpec:
    """A task's label space, per-class description sentences, and metric.

    ``labels`` is an ordered tuple of (class_id, class_name) with ids
    0..n-1 and no gaps. ``descriptions`` maps every class_id to one
    description sentence; sentence-pair tasks may leave them empty, in
    which case training degenerates to plain pair classification.
    Regression tasks have no labels and carry ``score_range`` instead.
    """

    name: str
    kind: TaskKind
    labels: tuple[tuple[int, str], ...] = ()
    descriptions: dict[int, str] = field(default_factory=dict)
    metric: Metric = Metric.ACCURACY
    score_range: tuple[float, float] | None = None

    def validate(self) -> None:
        failures: list[str] = []
        if not self.name:
            failures.append("task name must be non-empty")
        ids = [cid for cid, _ in self.labels]
        if ids != list(range(len(ids))):
            failures.append(f"class_ids must be 0..{len(ids) - 1} with no gaps, got {ids}")
        if self.kind is TaskKind.REGRESSION:
            if self.labels:
                failures.append("regression tasks must have an empty label set")
            if self.score_range is None:
                failures.append("regression tasks require a score_range")
            elif not self.score_range[0] < self.score_range[1]:
                failures.append(f"score_range min must be < max, got {self.score_range}")
        else:
            if len(self.labels) < 2:
                failures.append("classification tasks need at least 2 classes")
            if self.score_range is not None:
                failures.append("score_range is only valid for regression tasks")
            if set(self.descriptions) != set(ids):
                failures.append(
                    "descriptions must cover exactly the declared class_ids "
                    f"(have {sorted(self.descriptions)}, want {ids})"
                )
        if failures:
            raise ValidationError(failures)

    @property
    def n_classes(self) -> int:
        return len(self.labels)

    def class_name(self, class_id: int) -> str:
        return self.labels[class_id][1]

    def class_id(self, name: str) -> int:
        for cid, cname in self.labels:
            if cname == name:
                return cid
        raise DataError(f"task {self.name!r} has no class named {name!r}")


@dataclass(frozen=True)
class Record:
    """One raw example. ``label`` is a class_id, a real score, or None."""

    uid: str
    text_a: str
    text_b: str | None = None
    label: int | float | None = None
    language: str | None = None


@dataclass(frozen=True)
class Dataset:
    task: TaskSpec
    split_name: str
    records: tuple[Record, ...]
    labeled: bool = True

    def __len__(self) -> int:
        return len(self.records)

    def validate(self) -> None:
        seen: set[str] = set()
        for i, rec in enumerate(self.records):
            where = f"record {i} (uid={rec.uid!r})"
            if not rec.uid:
                raise DataError(f"{where}: uid must be non-empty")
            if rec.uid in seen:
                raise DataError(f"duplicate uid {rec.uid!r} in split {self.split_name!r}")
            seen.add(rec.uid)
            if not rec.text_a:
                raise DataError(f"{where}: text_a must be non-empty")
            if rec.label is None:
                if self.labeled:
                    raise DataError(
                        f"{where}: missing label in split not flagged unlabeled"
                    )
                continue
            if self.task.kind is TaskKind.REGRESSION:
                lo, hi = self.task.score_range  # type: ignore[misc]
                if not lo <= float(rec.label) <= hi:
                    raise DataError(
                        f"{where}: score {rec.label} outside range [{lo}, {hi}]"
                    )
            else:
                if not isinstance(rec.label, int) or not 0 <= rec.label < self.task.n_classes:
                    raise DataError(
                        f"{where}: label {rec.label!r} is not a valid class_id "
                        f"for task {self.task.name!r}"
                    )

    def by_class(self) -> dict[int, list[Record]]:
        """Records grouped by class_id, dataset order preserved within a class."""
        groups: dict[int, list[Record]] = {}
        for rec in self.records:
            if rec.label is None:
                continue
            groups.setdefault(int(rec.label), []).append(rec)
        return groups
