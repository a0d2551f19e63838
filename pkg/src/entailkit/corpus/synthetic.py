"""Deterministic synthetic datasets for fixtures and self-tests.

Every class is tied to a pseudo-keyword; an example signals its class by
containing that keyword among filler words. ``separability`` is the
probability that the signal is faithful, so 1.0 gives a cleanly
learnable task and 0.5 is near noise.
"""

from __future__ import annotations

from typing import Sequence

from ..errors import DataError
from ..hashing import text_key
from ..rng import Rng, derive_seed
from .types import Dataset, Metric, Record, TaskKind, TaskSpec

_KEYWORDS = (
    "zorp", "blick", "fenwick", "quill", "marzipan", "grotto", "velvet", "candle",
    "orbit", "saffron", "timber", "lagoon", "pewter", "nimbus", "copper", "dune",
)

# A wide filler vocabulary keeps individual filler words rare in any
# K-shot sample, so they carry little weight at inference time.
_ONSETS = (
    "ba", "den", "kor", "mul", "san", "tev", "lor", "pin",
    "gam", "rud", "fel", "nok", "vit", "hes", "jam", "wub",
)
_CODAS = ("a", "en", "ik", "or", "us", "el", "ot", "ary")
_FILLERS = tuple(onset + coda for onset in _ONSETS for coda in _CODAS)


def class_keyword(class_id: int) -> str:
    return _KEYWORDS[class_id % len(_KEYWORDS)]


def make_task(
    name: str,
    kind: TaskKind | str = TaskKind.SINGLE_SENTENCE,
    n_classes: int = 2,
    metric: Metric | str = Metric.ACCURACY,
    score_range: tuple[float, float] | None = None,
) -> TaskSpec:
    """A task spec whose labels and descriptions come from the keyword pool.

    Descriptions take the form ``It was <keyword> .`` so entailment
    patterns learned on one synthetic task carry over to another.
    """
    kind = TaskKind(kind)
    if kind is TaskKind.REGRESSION:
        spec = TaskSpec(
            name=name,
            kind=kind,
            metric=Metric(metric),
            score_range=score_range or (0.0, 5.0),
        )
    else:
        labels = tuple((c, class_keyword(c)) for c in range(n_classes))
        descriptions = {c: f"It was {class_keyword(c)} ." for c in range(n_classes)}
        spec = TaskSpec(
            name=name,
            kind=kind,
            labels=labels,
            descriptions=descriptions,
            metric=Metric(metric),
        )
    spec.validate()
    return spec


def make_nli_task(name: str = "synthetic_nli") -> TaskSpec:
    """Three-way pair task in the order: entailment, neutral, contradiction."""
    spec = TaskSpec(
        name=name,
        kind=TaskKind.SENTENCE_PAIR,
        labels=((0, "entailment"), (1, "neutral"), (2, "contradiction")),
        descriptions={0: "", 1: "", 2: ""},
        metric=Metric.ACCURACY,
    )
    spec.validate()
    return spec


def _filler_words(rng: Rng, n: int) -> list[str]:
    return [_FILLERS[rng.randbelow(len(_FILLERS))] for _ in range(n)]


def _insert(rng: Rng, words: list[str], token: str) -> list[str]:
    out = list(words)
    out.insert(rng.randbelow(len(out) + 1), token)
    return out


def _signal_keyword(rng: Rng, class_id: int, n_classes: int, separability: float) -> str:
    if n_classes < 2 or rng.random() < separability:
        return class_keyword(class_id)
    others = [class_keyword(c) for c in range(n_classes) if c != class_id]
    return rng.choice(others)


def _single_text(rng: Rng, class_id: int, n_classes: int, separability: float, text_len: int) -> str:
    kw = _signal_keyword(rng, class_id, n_classes, separability)
    return " ".join(_insert(rng, _filler_words(rng, text_len), kw))


def _pair_texts(
    rng: Rng, class_id: int, n_classes: int, separability: float, text_len: int
) -> tuple[str, str]:
    kw = rng.choice(_KEYWORDS)
    others = [k for k in _KEYWORDS if k != kw]
    a = " ".join(_insert(rng, _filler_words(rng, text_len), kw))
    effective = class_id
    if rng.random() >= separability:
        effective = rng.choice([c for c in range(n_classes) if c != class_id])
    if n_classes == 2:
        # Binary pair order: 0 = unrelated, 1 = matching.
        b_kw = kw if effective == 1 else rng.choice(others)
        b = " ".join(_insert(rng, _filler_words(rng, text_len), b_kw))
    elif n_classes == 3:
        # Three-way pair order: 0 = match, 1 = unrelated, 2 = mismatch.
        if effective == 0:
            b = f"It was {kw} ."
        elif effective == 1:
            b = " ".join(_filler_words(rng, 4))
        else:
            b = f"It was {rng.choice(others)} ."
    else:
        raise DataError(
            f"synthetic pair generation supports 2 or 3 classes, got {n_classes}"
        )
    return a, b


def _regression_pair(
    rng: Rng, score_range: tuple[float, float], text_len: int
) -> tuple[str, str, float]:
    lo, hi = score_range
    u = rng.random()
    score = lo + u * (hi - lo)
    slots = rng.sample(_KEYWORDS, 6)
    a_kws, fresh = slots[:3], slots[3:]
    n_shared = min(3, int(u * 4))
    b_kws = a_kws[:n_shared] + fresh[: 3 - n_shared]
    a_words = _filler_words(rng, text_len)
    b_words = _filler_words(rng, text_len)
    for kw in a_kws:
        a_words = _insert(rng, a_words, kw)
    for kw in b_kws:
        b_words = _insert(rng, b_words, kw)
    return " ".join(a_words), " ".join(b_words), score


def gen_synthetic(
    task: TaskSpec,
    split_name: str,
    sizes: int | Sequence[int],
    seed: int,
    separability: float = 1.0,
    text_len: int = 6,
    language: str | None = None,
) -> Dataset:
    """Generate a labeled synthetic split for ``task``.

    ``sizes`` is either a per-class count or a sequence giving each
    class its own count (a single total for regression tasks). Records
    are emitted class by class; identical arguments always produce
    byte-identical datasets.
    """
    if not 0.0 <= separability <= 1.0:
        raise DataError(f"separability must be in [0, 1], got {separability}")
    rng = Rng(derive_seed(seed, text_key(task.name), text_key(split_name)))
    records: list[Record] = []

    def uid() -> str:
        return f"{task.name}-{split_name}-{len(records):05d}"

    if task.kind is TaskKind.REGRESSION:
        if not isinstance(sizes, int):
            raise DataError("regression tasks take a single total size")
        assert task.score_range is not None
        for _ in range(sizes):
            a, b, score = _regression_pair(rng, task.score_range, text_len)
            records.append(Record(uid=uid(), text_a=a, text_b=b, label=score, language=language))
    else:
        n = task.n_classes
        per_class = [sizes] * n if isinstance(sizes, int) else list(sizes)
        if len(per_class) != n:
            raise DataError(f"sizes has {len(per_class)} entries for {n} classes")
        for class_id, count in enumerate(per_class):
            for _ in range(count):
                if task.kind is TaskKind.SINGLE_SENTENCE:
                    a = _single_text(rng, class_id, n, separability, text_len)
                    b = None
                else:
                    a, b = _pair_texts(rng, class_id, n, separability, text_len)
                records.append(
                    Record(uid=uid(), text_a=a, text_b=b, label=class_id, language=language)
                )

    ds = Dataset(task=task, split_name=split_name, records=tuple(records))
    ds.validate()
    return ds


def gen_synthetic_nli(
    split_name: str,
    n_per_class: int,
    seed: int,
    text_len: int = 6,
) -> Dataset:
    """A clean three-way entailment corpus over the shared keyword pool.

    The entailment hypotheses use the same ``It was <keyword> .`` shape
    as synthetic task descriptions, so models pretrained here carry a
    usable matching pattern into keyword tasks.
    """
    return gen_synthetic(
        make_nli_task(), split_name, n_per_class, seed, separability=1.0, text_len=text_len
    )
