"""Turning labeled records into entailment training instances.

Single-sentence tasks become (text, label-description) premise and
hypothesis pairs with a 0/1 entailment target. Binary tasks use only
the positive class description; tasks with three or more classes emit,
per example, one entailing pair against the true class description and
one non-entailing pair against a uniformly drawn wrong description.
Sentence-pair tasks keep their native form (the pair itself already is
the premise and hypothesis), and regression maps the score linearly
onto [0, 1].
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus.types import Dataset, TaskKind
from .errors import DataError, ValidationError
from .rng import Rng

_POSITIVE_CLASS = 1  # described class in binary single-sentence tasks

# Instances built from annotated records are "original"; the other
# values are reserved for contrastive augmentation outputs.
PROVENANCES = ("original", "uca_positive", "uca_negative", "downsample_negative")


@dataclass(frozen=True)
class EntailmentInstance:
    """One training pair for an entailment-style head.

    ``target`` is the entailment probability in [0, 1] for reformulated
    instances, or a class index for native-form instances trained with a
    task-sized head. ``hypothesis`` may be empty only in native form.
    ``provenance`` is one of PROVENANCES. The uid keeps the source
    record's uid as a prefix, so lineage stays recoverable from files.
    """

    uid: str
    premise: str
    hypothesis: str
    target: float
    source_class: int | None
    provenance: str


@dataclass(frozen=True)
class EflPlan:
    """How a task was mapped to a trainable head.

    ``mode`` is one of binary, multiclass, native, regression.
    ``head_size`` is the number of outputs the backend trains; 1 means
    a scalar head whose output lands in [0, 1].
    """

    mode: str
    head_size: int


def validate_instances(
    instances: Sequence[EntailmentInstance],
    head_size: int = 2,
    allow_empty_hypothesis: bool = False,
) -> None:
    failures: list[str] = []
    for inst in instances:
        ctx = f"instance {inst.uid!r}"
        if not inst.uid:
            failures.append("instance with empty uid")
        if not inst.premise:
            failures.append(f"{ctx}: empty premise")
        if not inst.hypothesis and not allow_empty_hypothesis:
            failures.append(f"{ctx}: empty hypothesis")
        if inst.provenance not in PROVENANCES:
            failures.append(f"{ctx}: unknown provenance {inst.provenance!r}")
        if head_size <= 2:
            if not 0.0 <= inst.target <= 1.0:
                failures.append(f"{ctx}: target {inst.target} outside [0, 1]")
        else:
            if inst.target != int(inst.target) or not 0 <= int(inst.target) < head_size:
                failures.append(
                    f"{ctx}: target {inst.target} is not a class index below {head_size}"
                )
    if failures:
        raise ValidationError(failures)


def _require_labeled(dataset: Dataset) -> None:
    if not dataset.labeled:
        raise DataError(
            f"split {dataset.split_name!r} is unlabeled and cannot be reformulated for training"
        )


def reformulate_binary(dataset: Dataset) -> tuple[list[EntailmentInstance], EflPlan]:
    """Binary single-sentence task against the positive class description."""
    task = dataset.task
    _require_labeled(dataset)
    if task.kind is not TaskKind.SINGLE_SENTENCE or task.n_classes != 2:
        raise DataError(f"task {task.name!r} is not a binary single-sentence task")
    description = task.descriptions[_POSITIVE_CLASS]
    if not description:
        raise DataError(f"task {task.name!r} has no description for class {_POSITIVE_CLASS}")
    out = [
        EntailmentInstance(
            uid=f"{rec.uid}#bin",
            premise=rec.text_a,
            hypothesis=description,
            target=1.0 if rec.label == _POSITIVE_CLASS else 0.0,
            source_class=int(rec.label),  # type: ignore[arg-type]
            provenance="original",
        )
        for rec in dataset.records
    ]
    return out, EflPlan(mode="binary", head_size=2)


def reformulate_multiclass(
    dataset: Dataset, rng: Rng
) -> tuple[list[EntailmentInstance], EflPlan]:
    """Per class: one entailing pair per example, then one pair against a
    uniformly drawn wrong description. A K-shot split over n classes
    yields 2*K*n instances."""
    task = dataset.task
    _require_labeled(dataset)
    if task.kind is not TaskKind.SINGLE_SENTENCE or task.n_classes < 3:
        raise DataError(
            f"task {task.name!r} is not a single-sentence task with 3 or more classes"
        )
    for cid, _ in task.labels:
        if not task.descriptions[cid]:
            raise DataError(f"task {task.name!r} has an empty description for class {cid}")
    groups = dataset.by_class()
    out: list[EntailmentInstance] = []
    for class_id in range(task.n_classes):
        members = groups.get(class_id, [])
        for rec in members:
            out.append(
                EntailmentInstance(
                    uid=f"{rec.uid}#pos",
                    premise=rec.text_a,
                    hypothesis=task.descriptions[class_id],
                    target=1.0,
                    source_class=class_id,
                    provenance="original",
                )
            )
        others = [c for c in range(task.n_classes) if c != class_id]
        for rec in members:
            wrong = others[rng.randbelow(len(others))]
            out.append(
                EntailmentInstance(
                    uid=f"{rec.uid}#neg",
                    premise=rec.text_a,
                    hypothesis=task.descriptions[wrong],
                    target=0.0,
                    source_class=class_id,
                    provenance="original",
                )
            )
    return out, EflPlan(mode="multiclass", head_size=2)


def reformulate_regression(dataset: Dataset) -> tuple[list[EntailmentInstance], EflPlan]:
    """Scores map linearly onto [0, 1]. The hypothesis is the task's
    description when one is set, otherwise the record's second text."""
    task = dataset.task
    _require_labeled(dataset)
    if task.kind is not TaskKind.REGRESSION:
        raise DataError(f"task {task.name!r} is not a regression task")
    assert task.score_range is not None
    lo, hi = task.score_range
    description = task.descriptions.get(0, "")
    out: list[EntailmentInstance] = []
    for rec in dataset.records:
        hypothesis = description or (rec.text_b or "")
        if not hypothesis:
            raise DataError(f"record {rec.uid!r}: no hypothesis source for regression")
        if not lo <= float(rec.label) <= hi:  # type: ignore[arg-type]
            raise DataError(
                f"record {rec.uid!r}: score {rec.label} outside [{lo}, {hi}]"
            )
        out.append(
            EntailmentInstance(
                uid=f"{rec.uid}#reg",
                premise=rec.text_a,
                hypothesis=hypothesis,
                target=(float(rec.label) - lo) / (hi - lo),  # type: ignore[arg-type]
                source_class=None,
                provenance="original",
            )
        )
    return out, EflPlan(mode="regression", head_size=1)


def reformulate_native(dataset: Dataset) -> tuple[list[EntailmentInstance], EflPlan]:
    """Keep the task's own form: a head with one output per class.

    Pair tasks feed both texts; single-sentence tasks leave the
    hypothesis empty. This is the standard fine-tuning path and the
    degenerate entailment-mode path for pair tasks.
    """
    task = dataset.task
    _require_labeled(dataset)
    if task.kind is TaskKind.REGRESSION:
        raise DataError(f"task {task.name!r} is regression; use the regression form")
    if task.kind is TaskKind.SENTENCE_PAIR:
        for rec in dataset.records:
            if not rec.text_b:
                raise DataError(f"record {rec.uid!r}: pair task without a second text")
    out = [
        EntailmentInstance(
            uid=f"{rec.uid}#nat",
            premise=rec.text_a,
            hypothesis=rec.text_b or "",
            target=float(int(rec.label)),  # type: ignore[arg-type]
            source_class=int(rec.label),  # type: ignore[arg-type]
            provenance="original",
        )
        for rec in dataset.records
    ]
    return out, EflPlan(mode="native", head_size=task.n_classes)


def reformulate_entailment(
    dataset: Dataset, rng: Rng | None = None
) -> tuple[list[EntailmentInstance], EflPlan]:
    """Entailment-mode dispatch over task kinds.

    Binary single-sentence uses the positive description; three or more
    classes use per-class positives and sampled negatives (this path
    needs ``rng``); pair tasks stay native; regression maps onto [0, 1].
    """
    task = dataset.task
    if task.kind is TaskKind.SINGLE_SENTENCE:
        if task.n_classes == 2:
            return reformulate_binary(dataset)
        if rng is None:
            raise DataError("multiclass reformulation needs an rng")
        return reformulate_multiclass(dataset, rng)
    if task.kind is TaskKind.SENTENCE_PAIR:
        return reformulate_native(dataset)
    return reformulate_regression(dataset)


def collapse_nli(dataset: Dataset) -> tuple[list[EntailmentInstance], EflPlan]:
    """Collapse an n-way entailment corpus to a binary one.

    The class literally named ``entailment`` maps to 1, every other
    class to 0. Used to pretrain a binary entailment head before
    continuing on a reformulated target task.
    """
    task = dataset.task
    _require_labeled(dataset)
    if task.kind is not TaskKind.SENTENCE_PAIR:
        raise DataError(f"task {task.name!r} is not a sentence-pair task")
    names = {cid: name for cid, name in task.labels}
    if "entailment" not in names.values():
        raise DataError(f"task {task.name!r} has no class named 'entailment'")
    out = [
        EntailmentInstance(
            uid=f"{rec.uid}#nli",
            premise=rec.text_a,
            hypothesis=rec.text_b or "",
            target=1.0 if names[int(rec.label)] == "entailment" else 0.0,  # type: ignore[arg-type]
            source_class=int(rec.label),  # type: ignore[arg-type]
            provenance="original",
        )
        for rec in dataset.records
    ]
    return out, EflPlan(mode="binary", head_size=2)


def expand_for_inference(dataset: Dataset) -> list[tuple[str, str]]:
    """Premise and hypothesis pairs for every record and class, record-major.

    A task with n classes expands each record into n pairs; slice i*n to
    (i+1)*n belongs to record i, in class order. Every class needs a
    description sentence, binary tasks included.
    """
    task = dataset.task
    if task.kind is not TaskKind.SINGLE_SENTENCE or task.n_classes < 2:
        raise DataError(
            f"task {task.name!r} is not a single-sentence classification task"
        )
    for cid, _ in task.labels:
        if not task.descriptions.get(cid):
            raise DataError(f"task {task.name!r} has no description for class {cid}")
    return [
        (rec.text_a, task.descriptions[cid])
        for rec in dataset.records
        for cid, _ in task.labels
    ]


def predict_multiclass(entail_scores: Sequence[Sequence[float]]) -> list[int]:
    """Argmax over per-class entailment scores; ties go to the lowest class."""
    out: list[int] = []
    for row in entail_scores:
        if not row:
            raise DataError("empty score row")
        best = 0
        for j in range(1, len(row)):
            if row[j] > row[best]:
                best = j
        out.append(best)
    return out


_INSTANCE_FIELDS = (
    "uid", "premise", "hypothesis", "target", "source_class", "provenance",
)


def instance_to_obj(inst: EntailmentInstance) -> dict:
    return {name: getattr(inst, name) for name in _INSTANCE_FIELDS}


def instance_from_obj(obj: object, where: str = "instance") -> EntailmentInstance:
    if not isinstance(obj, dict) or set(obj) != set(_INSTANCE_FIELDS):
        raise DataError(f"{where}: expected fields {sorted(_INSTANCE_FIELDS)}")
    if obj["provenance"] not in PROVENANCES:
        raise DataError(f"{where}: unknown provenance {obj['provenance']!r}")
    try:
        return EntailmentInstance(
            uid=str(obj["uid"]),
            premise=str(obj["premise"]),
            hypothesis=str(obj["hypothesis"]),
            target=float(obj["target"]),
            source_class=None if obj["source_class"] is None else int(obj["source_class"]),
            provenance=str(obj["provenance"]),
        )
    except (TypeError, ValueError) as exc:
        raise DataError(f"{where}: malformed instance ({exc})") from None


def dump_instances(instances: Iterable[EntailmentInstance], path: str | Path) -> None:
    """Canonical JSONL: sorted keys, tight separators, one instance per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(json.dumps(instance_to_obj(inst), sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def load_instances(path: str | Path) -> list[EntailmentInstance]:
    out: list[EntailmentInstance] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{Path(path).name}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{where}: invalid JSON ({exc.msg})") from None
            out.append(instance_from_obj(obj, where))
    return out
