"""K-shot multi-seed evaluation protocol.

A run samples K examples per class with a seeded generator, trains one
of the supported methods, scores the test split, and repeats the whole
thing over several seeds. Reported numbers are the mean and sample
standard deviation over seeds. All artifacts are deterministic given
the same inputs and seeds; timing is kept in memory only so reruns stay
byte-identical.

Methods:
  majority      predict the most frequent full-train class everywhere
  standard_ft   train the task's native form from scratch
  efl_wo_pt     entailment reformulation, no pretrained entailment head
  efl           pretrain a binary head on an entailment corpus, then
                continue training on the reformulated task
  stilts        pretrain natively on a full source task, then continue
                on the target task's native form
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Sequence

from .augment import AugmentConfig, build_uca_set
from .backend import Backend, BackendConfig, Hyperparams, get_backend
from .corpus.types import Dataset, Record, TaskKind
from .errors import DataError, EntailkitError, ValidationError
from .hashing import text_key
from .metrics import Prediction, compute_metric, majority_class, mean, sample_std
from .reformulate import (
    EflPlan,
    collapse_nli,
    expand_for_inference,
    predict_multiclass,
    reformulate_entailment,
    reformulate_native,
    reformulate_regression,
)
from .rng import Rng, derive_seed

METHODS = ("majority", "standard_ft", "efl_wo_pt", "efl", "stilts")
DEFAULT_SEEDS = (1, 2, 3, 4, 5)
DEFAULT_K = 8
SCHEMA_VERSION = 1  # bump when a report JSON shape changes


@dataclass(frozen=True)
class TaskBundle:
    """A task's training and test splits.

    Bundles used only as pretraining sources may omit the test split.
    """

    train: Dataset
    test: Dataset | None = None

    def __post_init__(self) -> None:
        if self.test is not None and self.train.task.name != self.test.task.name:
            raise DataError(
                f"bundle mixes tasks {self.train.task.name!r} and {self.test.task.name!r}"
            )

    @property
    def task(self):
        return self.train.task

    def require_test(self) -> Dataset:
        if self.test is None:
            raise DataError(f"task {self.task.name!r} has no test split")
        return self.test


@dataclass(frozen=True)
class RunSpec:
    """One evaluation cell: a task, a method, and the sampling setup.

    ``pretrain_task`` names the entailment corpus for ``efl`` or the
    source task for ``stilts``. ``augment`` turns on contrastive
    augmentation of the reformulated training set when set.
    """

    task: str
    method: str
    k: int = DEFAULT_K
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    pretrain_task: str | None = None
    augment: AugmentConfig | None = None

    def validate(self) -> None:
        failures = []
        if self.method not in METHODS:
            failures.append(f"unknown method {self.method!r} (known: {list(METHODS)})")
        if self.k < 1:
            failures.append(f"k must be at least 1, got {self.k}")
        if not self.seeds:
            failures.append("at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            failures.append(f"seeds must be distinct, got {self.seeds}")
        if self.method in ("efl", "stilts") and not self.pretrain_task:
            failures.append(f"method {self.method!r} requires pretrain_task")
        if self.augment is not None and self.method not in ("efl", "efl_wo_pt"):
            failures.append("augmentation only applies to the entailment methods")
        if failures:
            raise DataError("; ".join(failures))


@dataclass
class SeedResult:
    seed: int
    score: float
    predictions: list[Prediction]
    n_train_instances: int
    wall_time: float  # in-memory only, never serialized


@dataclass
class RunReport:
    spec: RunSpec
    backend_kind: str
    n_test: int
    metric: str
    results: list[SeedResult] = field(default_factory=list)

    @property
    def scores(self) -> list[float]:
        return [r.score for r in self.results]

    @property
    def mean(self) -> float:
        return mean(self.scores)

    @property
    def std(self) -> float:
        return sample_std(self.scores)

    def to_obj(self) -> dict:
        """Serializable form; deterministic, so no timing fields."""
        return {
            "schema_version": SCHEMA_VERSION,
            "task": self.spec.task,
            "method": self.spec.method,
            "k": self.spec.k,
            "seeds": list(self.spec.seeds),
            "pretrain_task": self.spec.pretrain_task,
            "augment": dataclasses.asdict(self.spec.augment) if self.spec.augment else None,
            "backend": self.backend_kind,
            "n_test": self.n_test,
            "metric": self.metric,
            "per_seed": [
                {
                    "seed": r.seed,
                    "score": r.score,
                    "n_train_instances": r.n_train_instances,
                }
                for r in self.results
            ],
            "mean": self.mean,
            "std": self.std,
        }


def format_score(score: float) -> str:
    """Scores print scaled by 100 with one decimal: 0.668 -> '66.8'."""
    return f"{score * 100:.1f}"


def _sub_seed(seed: int, label: str) -> int:
    return derive_seed(seed, text_key(label))


def _relabel(exc: EntailkitError, prefix: str) -> EntailkitError:
    """The same error with ``prefix`` prepended to its message(s)."""
    if isinstance(exc, ValidationError):
        relabeled: EntailkitError = ValidationError(
            [f"{prefix}: {f}" for f in exc.failures]
        )
    else:
        relabeled = type(exc)(f"{prefix}: {exc}")
    stage = getattr(exc, "stage", None)
    if stage is not None:
        relabeled.stage = stage  # type: ignore[attr-defined]
    return relabeled


@contextmanager
def _stage(label: str) -> Iterator[None]:
    """Tag errors escaping a pipeline stage with the stage name.

    The tag lands once; errors already tagged pass through unchanged.
    The wrapped error keeps its class (so exit-code mapping holds) and
    carries the stage on a ``stage`` attribute.
    """
    try:
        yield
    except EntailkitError as exc:
        if getattr(exc, "stage", None) is not None:
            raise
        wrapped = _relabel(exc, label)
        wrapped.stage = label  # type: ignore[attr-defined]
        raise wrapped from exc


@dataclass(frozen=True)
class FewShotSplit:
    """Which training uids a seed's K-shot sample picked, per class.

    Regression tasks use two pseudo-classes: 0 below the midpoint of
    the score range, 1 at or above it.
    """

    seed: int
    k: int
    uids_per_class: dict[int, tuple[str, ...]]

    def all_uids(self) -> list[str]:
        return [uid for uids in self.uids_per_class.values() for uid in uids]

    def validate(self, source: Dataset) -> None:
        """Check the split against the dataset it claims to come from."""
        failures: list[str] = []
        for class_id in sorted(self.uids_per_class):
            uids = self.uids_per_class[class_id]
            if len(uids) != self.k:
                failures.append(
                    f"class {class_id} has {len(uids)} uids, expected k={self.k}"
                )
        flat = self.all_uids()
        if len(set(flat)) != len(flat):
            dupes = sorted({uid for uid in flat if flat.count(uid) > 1})
            failures.append(f"uid lists overlap: {dupes[:5]}")
        known = {rec.uid for rec in source.records}
        missing = sorted(set(flat) - known)
        if missing:
            failures.append(f"uids not in split {source.split_name!r}: {missing[:5]}")
        if failures:
            raise ValidationError(failures)


def few_shot_split(train: Dataset, k: int, seed: int) -> FewShotSplit:
    """Draw K uids per class, one seeded stream per class.

    Class streams are independent: the draw for class c depends only on
    (c, seed), never on other classes' sizes. Regression splits bin at
    the midpoint of the score range, low bin first. A class with fewer
    than K examples is an error.
    """
    if k < 1:
        raise DataError(f"k must be at least 1, got {k}")
    if not train.labeled:
        raise DataError(f"split {train.split_name!r} is unlabeled")
    task = train.task
    if task.kind is TaskKind.REGRESSION:
        assert task.score_range is not None
        mid = (task.score_range[0] + task.score_range[1]) / 2.0
        groups: dict[int, list[Record]] = {0: [], 1: []}
        for rec in train.records:
            groups[0 if float(rec.label) < mid else 1].append(rec)  # type: ignore[arg-type]
        class_ids = [0, 1]
    else:
        groups = train.by_class()
        class_ids = list(range(task.n_classes))
    uids_per_class: dict[int, tuple[str, ...]] = {}
    for class_id in class_ids:
        members = groups.get(class_id, [])
        if len(members) < k:
            raise DataError(
                f"class {class_id} of split {train.split_name!r} has "
                f"{len(members)} examples, fewer than k={k}"
            )
        rng = Rng(derive_seed(seed, class_id))
        uids_per_class[class_id] = tuple(rec.uid for rec in rng.sample(members, k))
    return FewShotSplit(seed=seed, k=k, uids_per_class=uids_per_class)


def resolve_split(train: Dataset, split: FewShotSplit) -> Dataset:
    """The sampled records as a dataset, classes in id order."""
    split.validate(train)
    by_uid = {rec.uid: rec for rec in train.records}
    picked = [
        by_uid[uid]
        for class_id in sorted(split.uids_per_class)
        for uid in split.uids_per_class[class_id]
    ]
    return Dataset(
        task=train.task,
        split_name=f"{train.split_name}-k{split.k}-s{split.seed}",
        records=tuple(picked),
        labeled=True,
    )


def sample_few_shot(train: Dataset, k: int, seed: int) -> Dataset:
    """Draw K examples per class as a dataset; see few_shot_split."""
    return resolve_split(train, few_shot_split(train, k, seed))


def audit_no_leakage(few_shot: Dataset, test: Dataset) -> None:
    """Fail if any sampled training example also appears in the test split."""
    test_uids = {rec.uid for rec in test.records}
    test_texts = {(rec.text_a, rec.text_b) for rec in test.records}
    for rec in few_shot.records:
        if rec.uid in test_uids:
            raise DataError(f"train/test leakage: uid {rec.uid!r} is in both splits")
        if (rec.text_a, rec.text_b) in test_texts:
            raise DataError(f"train/test leakage: text of {rec.uid!r} is in the test split")


def _build_train_instances(spec: RunSpec, bundle: TaskBundle, seed: int):
    """Reformulated (and optionally augmented) training set for one seed."""
    with _stage("sample"):
        few = sample_few_shot(bundle.train, spec.k, _sub_seed(seed, "sample"))
    with _stage("reformulate"):
        if spec.method == "standard_ft" or spec.method == "stilts":
            if bundle.task.kind is TaskKind.REGRESSION:
                instances, plan = reformulate_regression(few)
            else:
                instances, plan = reformulate_native(few)
        else:
            instances, plan = reformulate_entailment(few, Rng(_sub_seed(seed, "reformulate")))
    if spec.augment is not None:
        with _stage("augment"):
            if plan.head_size != 2:
                raise DataError(
                    "contrastive augmentation needs a two-way head; "
                    f"task {bundle.task.name!r} trains a {plan.head_size}-way head"
                )
            extra = build_uca_set(
                instances, bundle.task.kind, spec.augment, Rng(_sub_seed(seed, "uca"))
            )
        instances = list(instances) + extra
    return instances, plan, few


def _train_for_seed(
    spec: RunSpec,
    bundles: Mapping[str, TaskBundle],
    backend: Backend,
    seed: int,
) -> tuple[str, EflPlan, int, Dataset]:
    bundle = bundles[spec.task]
    instances, plan, few = _build_train_instances(spec, bundle, seed)
    backend_seed = _sub_seed(seed, "backend")
    if spec.method in ("efl", "stilts"):
        assert spec.pretrain_task is not None
        with _stage("pretrain"):
            try:
                source = bundles[spec.pretrain_task]
            except KeyError:
                raise DataError(f"pretrain task {spec.pretrain_task!r} has no bundle") from None
            if spec.method == "efl":
                pre_instances, pre_plan = collapse_nli(source.train)
            else:
                pre_instances, pre_plan = reformulate_native(source.train)
            model_id = backend.train(
                pre_instances,
                pre_plan.head_size,
                _sub_seed(seed, "pretrain"),
                Hyperparams.full_data(),
            )
        with _stage("train"):
            model_id = backend.continue_train(
                model_id, instances, plan.head_size, backend_seed, Hyperparams.few_shot()
            )
    else:
        with _stage("train"):
            model_id = backend.train(
                instances, plan.head_size, backend_seed, Hyperparams.few_shot()
            )
    return model_id, plan, len(instances), few


def _predict(backend: Backend, model_id: str, plan: EflPlan, test: Dataset) -> list:
    task = test.task
    if plan.mode == "binary":
        description = task.descriptions[1]
        pairs = [(rec.text_a, description) for rec in test.records]
        probs = backend.score(model_id, pairs)
        return [1 if row[1] > 0.5 else 0 for row in probs]
    if plan.mode == "multiclass":
        pairs = expand_for_inference(test)
        probs = backend.score(model_id, pairs)
        n = task.n_classes
        entail = [
            [probs[i * n + c][1] for c in range(n)] for i in range(len(test.records))
        ]
        return predict_multiclass(entail)
    if plan.mode == "native":
        pairs = [(rec.text_a, rec.text_b or "") for rec in test.records]
        return predict_multiclass(backend.score(model_id, pairs))
    if plan.mode == "regression":
        assert task.score_range is not None
        lo, hi = task.score_range
        description = task.descriptions.get(0, "")
        pairs = [(rec.text_a, description or (rec.text_b or "")) for rec in test.records]
        probs = backend.score(model_id, pairs)
        return [lo + row[0] * (hi - lo) for row in probs]
    raise DataError(f"unknown plan mode {plan.mode!r}")


def _score_predictions(test: Dataset, preds: Sequence) -> tuple[float, list[Prediction]]:
    golds = [rec.label for rec in test.records]
    score = compute_metric(test.task.metric, golds, preds, test.task.n_classes or None)
    predictions = [
        Prediction(uid=rec.uid, predicted=p, gold=rec.label)  # type: ignore[arg-type]
        for rec, p in zip(test.records, preds)
    ]
    return score, predictions


def run_single(
    spec: RunSpec,
    bundles: Mapping[str, TaskBundle],
    backend: Backend,
    seed: int,
) -> SeedResult:
    """Train and evaluate one (spec, seed) cell."""
    spec.validate()
    if spec.task not in bundles:
        raise DataError(f"task {spec.task!r} has no bundle")
    bundle = bundles[spec.task]
    test = bundle.require_test()
    started = time.perf_counter()
    if spec.method == "majority":
        cls = majority_class(bundle.train)
        preds: list = [cls] * len(test.records)
        n_train = 0
    else:
        model_id, plan, n_train, few = _train_for_seed(spec, bundles, backend, seed)
        with _stage("leakage-audit"):
            audit_no_leakage(few, test)
        with _stage("predict"):
            preds = _predict(backend, model_id, plan, test)
    with _stage("score"):
        score, predictions = _score_predictions(test, preds)
    return SeedResult(
        seed=seed,
        score=score,
        predictions=predictions,
        n_train_instances=n_train,
        wall_time=time.perf_counter() - started,
    )


def run_protocol(
    spec: RunSpec,
    bundles: Mapping[str, TaskBundle],
    backend: Backend | None = None,
    backend_config: BackendConfig | None = None,
    parallel: bool = False,
) -> RunReport:
    """Run every seed in the spec and aggregate.

    With ``parallel`` set, seeds run concurrently on one backend
    instance each; scores and result order match the sequential run
    because every random stream is derived from the seed alone.
    """
    spec.validate()
    if spec.task not in bundles:
        raise DataError(f"task {spec.task!r} has no bundle")
    bundle = bundles[spec.task]
    kind = backend_config.kind if backend_config else getattr(
        getattr(backend, "config", None), "kind", "builtin"
    )
    report = RunReport(
        spec=spec,
        backend_kind=kind,
        n_test=len(bundle.require_test().records),
        metric=bundle.task.metric.value,
    )

    def one_seed(b: Backend, seed: int) -> SeedResult:
        try:
            return run_single(spec, bundles, b, seed)
        except EntailkitError as exc:
            raise _relabel(exc, f"seed {seed}") from exc

    if parallel and len(spec.seeds) > 1:
        if backend is not None:
            raise DataError(
                "parallel seeds each need their own backend; "
                "pass backend_config instead of a backend instance"
            )

        def run_one(seed: int) -> SeedResult:
            with get_backend(backend_config) as b:
                return one_seed(b, seed)

        with ThreadPoolExecutor(max_workers=len(spec.seeds)) as pool:
            report.results.extend(pool.map(run_one, spec.seeds))
        return report

    own_backend = backend is None
    backend = backend or get_backend(backend_config)
    try:
        for seed in spec.seeds:
            report.results.append(one_seed(backend, seed))
    finally:
        if own_backend:
            backend.close()
    return report


@dataclass
class GridCell:
    task: str
    method: str
    report: RunReport | None = None
    error: str | None = None


@dataclass
class GridReport:
    cells: list[GridCell]
    k: int
    seeds: tuple[int, ...]

    def planned_runs(self) -> list[tuple[str, str, int]]:
        """Every individual fine-tuning run the grid performs."""
        return [
            (cell.task, cell.method, seed)
            for cell in self.cells
            for seed in self.seeds
        ]

    def to_obj(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "k": self.k,
            "seeds": list(self.seeds),
            "cells": [
                {
                    "task": cell.task,
                    "method": cell.method,
                    "report": cell.report.to_obj() if cell.report else None,
                    "error": cell.error,
                }
                for cell in self.cells
            ],
        }


def plan_grid(
    tasks: Sequence[str], methods: Sequence[str], seeds: Sequence[int]
) -> list[tuple[str, str, int]]:
    """The (task, method, seed) runs a grid will perform, without running."""
    return [(task, method, seed) for task in tasks for method in methods for seed in seeds]


def run_grid(
    bundles: Mapping[str, TaskBundle],
    tasks: Sequence[str],
    methods: Sequence[str],
    k: int = DEFAULT_K,
    seeds: Sequence[int] = DEFAULT_SEEDS,
    backend_config: BackendConfig | None = None,
    augment: AugmentConfig | None = None,
    pretrain: Mapping[str, str] | None = None,
) -> GridReport:
    """Every task against every method; failures stay in their cell.

    ``pretrain`` maps method name to the pretrain task it should use
    (for efl and stilts).
    """
    grid = GridReport(cells=[], k=k, seeds=tuple(seeds))
    backend_config = backend_config or BackendConfig()
    for task in tasks:
        for method in methods:
            spec = RunSpec(
                task=task,
                method=method,
                k=k,
                seeds=tuple(seeds),
                pretrain_task=(pretrain or {}).get(method),
                augment=augment if method in ("efl", "efl_wo_pt") else None,
            )
            cell = GridCell(task=task, method=method)
            try:
                cell.report = run_protocol(spec, bundles, backend_config=backend_config)
            except EntailkitError as exc:
                cell.error = str(exc)
            grid.cells.append(cell)
    return grid


def grid_to_csv(grid: GridReport) -> str:
    """Tasks as rows, methods as columns, formatted mean scores in cells."""
    methods: list[str] = []
    tasks: list[str] = []
    for cell in grid.cells:
        if cell.method not in methods:
            methods.append(cell.method)
        if cell.task not in tasks:
            tasks.append(cell.task)
    by_key = {(cell.task, cell.method): cell for cell in grid.cells}
    lines = ["task," + ",".join(methods)]
    for task in tasks:
        row = [task]
        for method in methods:
            cell = by_key.get((task, method))
            if cell is None:
                row.append("")
            elif cell.error is not None:
                row.append("ERR")
            else:
                assert cell.report is not None
                row.append(format_score(cell.report.mean))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


@dataclass
class TransferCell:
    source: str
    target: str
    report: RunReport | None = None
    error: str | None = None


@dataclass
class TransferReport:
    cells: list[TransferCell]
    k: int
    seeds: tuple[int, ...]
    #: Row/column order for the source × target matrix; falls back to
    #: first-seen cell order when a report predates these fields.
    sources: tuple[str, ...] = ()
    targets: tuple[str, ...] = ()

    def to_obj(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "k": self.k,
            "seeds": list(self.seeds),
            "cells": [
                {
                    "source": c.source,
                    "target": c.target,
                    "report": c.report.to_obj() if c.report else None,
                    "error": c.error,
                }
                for c in self.cells
            ],
        }


def plan_transfer(
    sources: Sequence[str], targets: Sequence[str] | None = None
) -> list[tuple[str, str]]:
    """Ordered (source, target) pairs, skipping source == target.

    With one list of n tasks playing both roles this is the full
    off-diagonal sweep of n*(n-1) cells.
    """
    if targets is None:
        targets = sources
    return [(s, t) for s in sources for t in targets if s != t]


def transfer_sweep(
    bundles: Mapping[str, TaskBundle],
    sources: Sequence[str],
    targets: Sequence[str] | None = None,
    k: int = DEFAULT_K,
    seeds: Sequence[int] = DEFAULT_SEEDS,
    backend_config: BackendConfig | None = None,
) -> TransferReport:
    """Full-data native pretraining on each source, few-shot continuation
    on each target, for every off-diagonal (source, target) pair. Cell
    failures are recorded in the cell."""
    report = TransferReport(
        cells=[],
        k=k,
        seeds=tuple(seeds),
        sources=tuple(sources),
        targets=tuple(targets if targets is not None else sources),
    )
    backend_config = backend_config or BackendConfig()
    for source, target in plan_transfer(sources, targets):
        spec = RunSpec(
            task=target,
            method="stilts",
            k=k,
            seeds=tuple(seeds),
            pretrain_task=source,
        )
        cell = TransferCell(source=source, target=target)
        try:
            cell.report = run_protocol(spec, bundles, backend_config=backend_config)
        except EntailkitError as exc:
            cell.error = str(exc)
        report.cells.append(cell)
    return report


def transfer_to_csv(report: TransferReport) -> str:
    """Sources as rows, targets as columns."""
    sources = list(report.sources)
    targets = list(report.targets)
    for cell in report.cells:
        if cell.source not in sources:
            sources.append(cell.source)
        if cell.target not in targets:
            targets.append(cell.target)
    by_key = {(c.source, c.target): c for c in report.cells}
    lines = ["source," + ",".join(targets)]
    for source in sources:
        row = [source]
        for target in targets:
            cell = by_key.get((source, target))
            if cell is None:
                row.append("")
            elif cell.error is not None:
                row.append("ERR")
            else:
                assert cell.report is not None
                row.append(format_score(cell.report.mean))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def with_descriptions(bundle: TaskBundle, descriptions: dict[int, str]) -> TaskBundle:
    """The same bundle with the task's description sentences replaced."""
    task = dataclasses.replace(bundle.task, descriptions=dict(descriptions))
    task.validate()
    return TaskBundle(
        train=dataclasses.replace(bundle.train, task=task),
        test=dataclasses.replace(bundle.test, task=task),
    )


def _normalize_candidate(
    task, candidate: Mapping[int, str] | Sequence[str], index: int
) -> dict[int, str]:
    """One candidate as a complete class_id -> description map."""
    if isinstance(candidate, Mapping):
        desc = {int(cid): str(text) for cid, text in candidate.items()}
    else:
        desc = {cid: str(text) for cid, text in enumerate(candidate)}
    want = set(range(task.n_classes))
    failures: list[str] = []
    missing = sorted(want - set(desc))
    if missing:
        failures.append(f"candidate {index} misses descriptions for classes {missing}")
    extra = sorted(set(desc) - want)
    if extra:
        failures.append(f"candidate {index} names unknown classes {extra}")
    empty = sorted(cid for cid in want & set(desc) if not desc[cid])
    if empty:
        failures.append(f"candidate {index} has empty descriptions for classes {empty}")
    if failures:
        raise DataError("; ".join(failures))
    return desc


def ablate_descriptions(
    bundle: TaskBundle,
    candidates: Sequence[Mapping[int, str] | Sequence[str]] | None = None,
    method: str = "efl_wo_pt",
    k: int = DEFAULT_K,
    seeds: Sequence[int] = DEFAULT_SEEDS,
    backend_config: BackendConfig | None = None,
    pretrain_bundle: TaskBundle | None = None,
) -> list[tuple[str, RunReport]]:
    """One full protocol run per candidate description set.

    A candidate maps every class to one description sentence (a
    class-ordered sequence of strings works too). Rows come back in
    candidate order, keyed by the candidate's description text;
    identical candidates produce identical reports. When no candidates
    are given, the task's registered descriptions are compared against
    an uninformative sentence shared by every class, which removes the
    only signal the per-class inference passes can use.
    """
    task = bundle.task
    if task.kind is not TaskKind.SINGLE_SENTENCE:
        raise DataError("the description ablation applies to single-sentence tasks")
    if candidates is None:
        candidates = [
            dict(task.descriptions),
            {cid: "It was something" for cid, _ in task.labels},
        ]
    if not candidates:
        raise DataError("at least one candidate description set is required")
    rows: list[tuple[str, RunReport]] = []
    for index, candidate in enumerate(candidates):
        desc = _normalize_candidate(task, candidate, index)
        bundles: dict[str, TaskBundle] = {task.name: with_descriptions(bundle, desc)}
        pretrain_task = None
        if pretrain_bundle is not None:
            bundles[pretrain_bundle.task.name] = pretrain_bundle
            pretrain_task = pretrain_bundle.task.name
        spec = RunSpec(
            task=task.name,
            method=method,
            k=k,
            seeds=tuple(seeds),
            pretrain_task=pretrain_task,
        )
        key = " | ".join(desc[cid] for cid in range(task.n_classes))
        rows.append((key, run_protocol(spec, bundles, backend_config=backend_config)))
    return rows


def ablate_to_csv(rows: Sequence[tuple[str, RunReport]]) -> str:
    """The ablation rows as a CSV table, one row per candidate."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["descriptions", "mean", "std"])
    for key, report in rows:
        writer.writerow([key, format_score(report.mean), format_score(report.std)])
    return buf.getvalue()


def multilingual_eval(
    train_bundle: TaskBundle,
    tests_by_language: Mapping[str, Dataset],
    method: str = "efl_wo_pt",
    k: int = DEFAULT_K,
    seeds: Sequence[int] = DEFAULT_SEEDS,
    backend_config: BackendConfig | None = None,
    pretrain_bundles: Mapping[str, TaskBundle] | None = None,
    pretrain_task: str | None = None,
) -> dict[str, dict[str, float]]:
    """Train once per seed, score every language's test split.

    Returns per-language mean and std plus an unweighted ``avg`` row
    over languages. Descriptions stay as registered on the task, so a
    single description set serves every language.
    """
    if not tests_by_language:
        raise DataError("no test splits given")
    task = train_bundle.task
    bundles: dict[str, TaskBundle] = {task.name: train_bundle}
    if pretrain_bundles:
        bundles.update(pretrain_bundles)
    spec = RunSpec(
        task=task.name,
        method=method,
        k=k,
        seeds=tuple(seeds),
        pretrain_task=pretrain_task,
    )
    spec.validate()
    if method == "majority":
        raise DataError("the multilingual evaluation needs a trainable method")
    per_language: dict[str, list[float]] = {lang: [] for lang in tests_by_language}
    backend = get_backend(backend_config)
    try:
        for seed in spec.seeds:
            model_id, plan, _, few = _train_for_seed(spec, bundles, backend, seed)
            for lang, test in tests_by_language.items():
                if test.task.name != task.name:
                    raise DataError(
                        f"language {lang!r} test split belongs to task {test.task.name!r}"
                    )
                audit_no_leakage(few, test)
                preds = _predict(backend, model_id, plan, test)
                score, _ = _score_predictions(test, preds)
                per_language[lang].append(score)
    finally:
        backend.close()
    out: dict[str, dict[str, float]] = {}
    for lang, scores in per_language.items():
        out[lang] = {"mean": mean(scores), "std": sample_std(scores)}
    lang_means = [out[lang]["mean"] for lang in tests_by_language]
    out["avg"] = {"mean": mean(lang_means), "std": sample_std(lang_means)}
    return out


def dump_report(report: RunReport, path: str | Path) -> None:
    """Canonical JSON artifact for one run."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_obj(), fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def report_to_csv(report: RunReport) -> str:
    """One row per seed plus mean and std summary rows."""
    lines = ["task,method,k,seed,score,n_train_instances"]
    prefix = f"{report.spec.task},{report.spec.method},{report.spec.k}"
    for r in report.results:
        lines.append(f"{prefix},{r.seed},{r.score!r},{r.n_train_instances}")
    lines.append(f"{prefix},mean,{report.mean!r},")
    lines.append(f"{prefix},std,{report.std!r},")
    return "\n".join(lines) + "\n"


def dump_predictions(result: SeedResult, path: str | Path) -> None:
    """Canonical JSONL: one prediction per line for one seed."""
    with open(path, "w", encoding="utf-8") as fh:
        for p in result.predictions:
            obj = {"uid": p.uid, "predicted": p.predicted, "gold": p.gold}
            fh.write(json.dumps(obj, sort_keys=True, separators=(",", ":")))
            fh.write("\n")
