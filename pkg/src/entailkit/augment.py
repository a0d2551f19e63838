"""Unsupervised contrastive augmentation over entailment instances.

Each augmented positive pairs a sentence with a lightly corrupted copy
of itself, keeps a true hypothesis against a corrupted premise, or (for
pair tasks) corrupts one side of an entailing pair. Each augmented
negative pairs a sentence with either the premise of a non-entailing
example (a pairwise down-sample) or an aggressively corrupted copy of
itself. Corruption draws one arm per call from a weighted mixture:
character deletion, character span swapping, word deletion, word span
swapping, and optionally synonym substitution from a lexicon.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .corpus.types import TaskKind
from .errors import DataError, ValidationError
from .reformulate import EntailmentInstance
from .rng import Rng


def _round_half_up(x: float) -> int:
    """Round with halves away from zero (for non-negative x)."""
    return int(x + 0.5)


@dataclass(frozen=True)
class ArmParams:
    """Corruption strengths for one severity level.

    ``word_pair_frac`` sizes the swapped word spans as a fraction of the
    sentence; None means single-word spans. ``span_del_words`` and
    ``n_sub_words`` parameterize the standalone word-span deletion and
    synonym substitution ops.
    """

    p_del_chars: float
    span_char_frac: float
    n_span_pairs: int
    p_del_words: float
    n_word_pairs: int
    word_pair_frac: float | None = None
    span_del_words: int = 2
    n_sub_words: int = 2


_POSITIVE_PARAMS = ArmParams(
    p_del_chars=0.15,
    span_char_frac=0.05,
    n_span_pairs=3,
    p_del_words=0.15,
    n_word_pairs=2,
    word_pair_frac=None,
)

_AGGRESSIVE_PARAMS = ArmParams(
    p_del_chars=0.40,
    span_char_frac=0.25,
    n_span_pairs=3,
    p_del_words=0.40,
    n_word_pairs=2,
    word_pair_frac=0.40,
)

_DEFAULT_MIX = (
    ("char_delete", 0.10),
    ("span_reorder", 0.10),
    ("word_delete", 0.40),
    ("word_reorder", 0.40),
)

_MIX_ARMS = ("char_delete", "span_reorder", "word_delete", "word_reorder", "substitute_synonyms")


@dataclass(frozen=True)
class AugmentConfig:
    """Arm mixture, per-severity strengths, and set sizing.

    ``positive_mix`` weights the corruption arms (must sum to 1); the
    same mixture drives both severity levels. ``per_class_budget`` is
    how many positives and how many negatives each class receives.
    ``neg_downsample_frac`` is the fraction of negatives drawn as
    pairwise down-samples rather than aggressive corruptions. The
    ``substitute_synonyms`` arm may only appear in the mixture when a
    ``lexicon`` is set.
    """

    positive_mix: tuple[tuple[str, float], ...] = _DEFAULT_MIX
    positive: ArmParams = _POSITIVE_PARAMS
    aggressive: ArmParams = _AGGRESSIVE_PARAMS
    per_class_budget: int = 8
    neg_downsample_frac: float = 0.70
    lexicon: tuple[tuple[str, tuple[str, ...]], ...] | None = None

    def validate(self) -> None:
        failures: list[str] = []
        names = [name for name, _ in self.positive_mix]
        unknown = [n for n in names if n not in _MIX_ARMS]
        if unknown:
            failures.append(f"unknown mixture arms {unknown}; choose from {list(_MIX_ARMS)}")
        if len(set(names)) != len(names):
            failures.append(f"mixture arms must be unique, got {names}")
        total = sum(w for _, w in self.positive_mix)
        if any(w < 0 for _, w in self.positive_mix) or abs(total - 1.0) > 1e-9:
            failures.append(f"mixture weights must be non-negative and sum to 1, got {total}")
        if "substitute_synonyms" in names and not self.lexicon:
            failures.append("the substitute_synonyms arm needs a lexicon")
        for level, params in (("positive", self.positive), ("aggressive", self.aggressive)):
            for field_name in ("p_del_chars", "span_char_frac", "p_del_words"):
                v = getattr(params, field_name)
                if not 0.0 <= v < 1.0:
                    failures.append(f"{level}.{field_name} must be in [0, 1), got {v}")
            if params.n_span_pairs < 0 or params.n_word_pairs < 0:
                failures.append(f"{level}: span pair counts must be non-negative")
            if params.word_pair_frac is not None and not 0.0 < params.word_pair_frac < 1.0:
                failures.append(
                    f"{level}.word_pair_frac must be in (0, 1), got {params.word_pair_frac}"
                )
            if params.span_del_words < 1:
                failures.append(f"{level}.span_del_words must be at least 1")
            if params.n_sub_words < 1:
                failures.append(f"{level}.n_sub_words must be at least 1")
        if self.per_class_budget < 1:
            failures.append(f"per_class_budget must be positive, got {self.per_class_budget}")
        if not 0.0 <= self.neg_downsample_frac <= 1.0:
            failures.append(
                f"neg_downsample_frac must be in [0, 1], got {self.neg_downsample_frac}"
            )
        if failures:
            raise ValidationError(failures)


def _delete_at(items: list, frac: float, rng: Rng) -> list:
    n = len(items)
    r = min(_round_half_up(frac * n), n - 1)
    if r <= 0:
        return list(items)
    drop = set(rng.sample(range(n), r))
    return [item for i, item in enumerate(items) if i not in drop]


def _span_starts(rng: Rng, length: int, n_spans: int, span_len: int) -> list[int]:
    """Starts of n_spans disjoint spans of span_len, uniform over placements."""
    slack = length - n_spans * span_len
    vals = sorted(rng.sample(range(slack + n_spans), n_spans))
    return [v - i + i * span_len for i, v in enumerate(vals)]


def _swap_span_pairs(items: list, n_pairs: int, span_len: int, rng: Rng) -> list:
    length = len(items)
    if span_len < 1:
        span_len = 1
    fit = length // (2 * span_len)
    pairs = min(n_pairs, fit)
    if pairs < 1:
        return list(items)
    starts = _span_starts(rng, length, 2 * pairs, span_len)
    out = list(items)
    for k in range(0, 2 * pairs, 2):
        a, b = starts[k], starts[k + 1]
        out[a : a + span_len], out[b : b + span_len] = (
            out[b : b + span_len],
            out[a : a + span_len],
        )
    return out


def _check_frac(p: float, what: str) -> None:
    if not 0.0 <= p < 1.0:
        raise DataError(f"{what} must be in [0, 1), got {p}")


def delete_chars(text: str, p: float, rng: Rng) -> str:
    """Delete round-half-up(p * len) characters, never all of them."""
    _check_frac(p, "character deletion fraction")
    if not text:
        raise DataError("cannot delete characters from an empty sentence")
    return "".join(_delete_at(list(text), p, rng))


def reorder_spans(text: str, frac: float, n_pairs: int, rng: Rng) -> str:
    """Swap n_pairs pairs of disjoint character spans, each sized
    max(1, round(frac * len)). Pairs that cannot fit are dropped."""
    if not 0.0 < frac <= 1.0:
        raise DataError(f"span fraction must be in (0, 1], got {frac}")
    if n_pairs < 0:
        raise DataError(f"pair count must be non-negative, got {n_pairs}")
    span_len = max(1, _round_half_up(frac * len(text)))
    return "".join(_swap_span_pairs(list(text), n_pairs, span_len, rng))


def delete_words(text: str, p: float, rng: Rng) -> str:
    """Delete round-half-up(p * W) word positions, never all of them;
    survivors are rejoined with single spaces."""
    _check_frac(p, "word deletion fraction")
    words = text.split()
    if not words:
        raise DataError("cannot delete words from an empty sentence")
    return " ".join(_delete_at(words, p, rng))


def delete_word_span(text: str, d: int, rng: Rng) -> str:
    """Delete one uniformly placed run of min(d, W-1) consecutive words.

    A sentence with fewer than two words comes back unchanged: there is
    no deletable span that leaves content.
    """
    if d < 1:
        raise DataError(f"span word count must be at least 1, got {d}")
    words = text.split()
    span = min(d, len(words) - 1)
    if span < 1:
        return text
    start = rng.randbelow(len(words) - span + 1)
    return " ".join(words[:start] + words[start + span :])


def reorder_words(text: str, n_pairs: int, rng: Rng, span_frac: float | None = None) -> str:
    """Swap n_pairs pairs of word spans; span size is one word, or
    round(span_frac * W) words when span_frac is given."""
    if n_pairs < 0:
        raise DataError(f"pair count must be non-negative, got {n_pairs}")
    words = text.split()
    span_len = 1 if span_frac is None else max(1, _round_half_up(span_frac * len(words)))
    return " ".join(_swap_span_pairs(words, n_pairs, span_len, rng))


def substitute_synonyms(
    text: str, d: int, lexicon: Mapping[str, Sequence[str]], rng: Rng
) -> str:
    """Replace up to d lexicon-covered words with uniformly drawn synonyms.

    Positions are sampled among covered words, then replaced in sentence
    order with one synonym draw each. Words without entries are skipped;
    an empty lexicon warns and returns the sentence unchanged.
    """
    if d < 1:
        raise DataError(f"substitution count must be at least 1, got {d}")
    if not lexicon:
        warnings.warn("empty synonym lexicon leaves the sentence unchanged", RuntimeWarning)
        return text
    words = text.split()
    covered = [i for i, w in enumerate(words) if lexicon.get(w)]
    if not covered:
        return text
    picks = sorted(rng.sample(covered, min(d, len(covered))))
    out = list(words)
    for i in picks:
        options = list(lexicon[words[i]])
        out[i] = options[rng.randbelow(len(options))]
    return " ".join(out)


def load_lexicon(path: str | Path) -> dict[str, tuple[str, ...]]:
    """Synonym lexicon from TSV lines of ``word<TAB>syn1,syn2,...``."""
    out: dict[str, tuple[str, ...]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            where = f"{Path(path).name}:{lineno}"
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0]:
                raise DataError(f"{where}: expected word<TAB>comma-separated synonyms")
            synonyms = tuple(s for s in parts[1].split(",") if s)
            if not synonyms:
                raise DataError(f"{where}: no synonyms listed for {parts[0]!r}")
            out[parts[0]] = synonyms
    return out


def pick_arm(rng: Rng, mixture: Sequence[tuple[str, float]]) -> str:
    u = rng.random()
    cum = 0.0
    for name, weight in mixture:
        cum += weight
        if u < cum:
            return name
    return mixture[-1][0]


def _apply_arm(
    text: str,
    arm: str,
    params: ArmParams,
    lexicon: Mapping[str, Sequence[str]] | None,
    rng: Rng,
) -> str:
    if arm == "char_delete":
        return delete_chars(text, params.p_del_chars, rng)
    if arm == "span_reorder":
        return reorder_spans(text, params.span_char_frac, params.n_span_pairs, rng)
    if arm == "word_delete":
        return delete_words(text, params.p_del_words, rng)
    if arm == "word_reorder":
        return reorder_words(text, params.n_word_pairs, rng, params.word_pair_frac)
    if arm == "substitute_synonyms":
        return substitute_synonyms(text, params.n_sub_words, lexicon or {}, rng)
    raise DataError(f"unknown augmentation arm {arm!r}")


def _config_lexicon(config: AugmentConfig) -> dict[str, tuple[str, ...]] | None:
    return dict(config.lexicon) if config.lexicon else None


def augment_positive(text: str, config: AugmentConfig, rng: Rng) -> str:
    """One light corruption, arm drawn from the configured mixture."""
    if not text:
        raise DataError("cannot augment an empty sentence")
    arm = pick_arm(rng, config.positive_mix)
    return _apply_arm(text, arm, config.positive, _config_lexicon(config), rng)


def augment_aggressive(text: str, config: AugmentConfig, rng: Rng) -> str:
    """One heavy corruption; same mixture, aggressive strengths."""
    if not text:
        raise DataError("cannot augment an empty sentence")
    arm = pick_arm(rng, config.positive_mix)
    return _apply_arm(text, arm, config.aggressive, _config_lexicon(config), rng)


def build_uca_set(
    instances: Sequence[EntailmentInstance],
    task_kind: TaskKind,
    config: AugmentConfig,
    rng: Rng,
) -> list[EntailmentInstance]:
    """Contrastive instances derived from a reformulated training set.

    Per source class, emits ``per_class_budget`` positives then
    ``per_class_budget`` negatives, classes in ascending order.

    Positives (target 1): single-sentence tasks pair a sentence with its
    light corruption, or pair the corruption with a true hypothesis,
    coin-flipped when both forms exist. Pair tasks corrupt one side of
    an entailing pair, coin-flipped; classes with no entailing pair fall
    back to the self-corruption form.

    Negatives (target 0): with probability ``neg_downsample_frac`` the
    premise of an entailing instance is paired with the premise of a
    non-entailing one carrying a different sentence (a pairwise
    down-sample, provenance ``downsample_negative``); otherwise the
    sentence is paired with its own aggressive corruption (provenance
    ``uca_negative``).

    Returns only the new instances; callers concatenate with the
    originals, which pass through untouched.
    """
    config.validate()
    if len(instances) < 2:
        raise DataError("contrastive augmentation needs at least 2 source instances")
    by_class: dict[int, list[EntailmentInstance]] = {}
    for inst in instances:
        if inst.provenance != "original":
            raise DataError(
                f"instance {inst.uid!r} is already augmented ({inst.provenance}); "
                "augmentation runs on original instances only"
            )
        if inst.source_class is None:
            raise DataError(f"instance {inst.uid!r} has no source_class")
        by_class.setdefault(inst.source_class, []).append(inst)
    pair_task = task_kind is TaskKind.SENTENCE_PAIR
    non_entailing_all = [inst for inst in instances if inst.target < 0.5]

    out: list[EntailmentInstance] = []
    for class_id in sorted(by_class):
        members = by_class[class_id]
        entailing = [m for m in members if m.target >= 0.5]
        pos_pool = entailing if entailing else members
        for j in range(config.per_class_budget):
            src = pos_pool[rng.randbelow(len(pos_pool))]
            if pair_task:
                if entailing:
                    if rng.coin():
                        premise = augment_positive(src.premise, config, rng)
                        hypothesis = src.hypothesis
                    else:
                        premise = src.premise
                        hypothesis = augment_positive(src.hypothesis, config, rng)
                else:
                    premise = src.premise
                    hypothesis = augment_positive(src.premise, config, rng)
            else:
                use_hypothesis = bool(entailing) and rng.coin()
                corrupted = augment_positive(src.premise, config, rng)
                if use_hypothesis:
                    premise, hypothesis = corrupted, src.hypothesis
                else:
                    premise, hypothesis = src.premise, corrupted
            out.append(
                EntailmentInstance(
                    uid=f"uca-pos-{class_id}-{j}",
                    premise=premise,
                    hypothesis=hypothesis,
                    target=1.0,
                    source_class=class_id,
                    provenance="uca_positive",
                )
            )
        for j in range(config.per_class_budget):
            anchor = pos_pool[rng.randbelow(len(pos_pool))]
            if rng.random() < config.neg_downsample_frac:
                pool = [
                    inst for inst in non_entailing_all
                    if inst.premise != anchor.premise
                ]
                if not pool:
                    pool = [
                        inst for inst in instances if inst.premise != anchor.premise
                    ]
                if not pool:
                    raise DataError("pairwise down-sampling needs a second source sentence")
                partner = pool[rng.randbelow(len(pool))]
                premise, hypothesis = anchor.premise, partner.premise
                provenance = "downsample_negative"
            else:
                premise = anchor.premise
                hypothesis = augment_aggressive(anchor.premise, config, rng)
                provenance = "uca_negative"
            out.append(
                EntailmentInstance(
                    uid=f"uca-neg-{class_id}-{j}",
                    premise=premise,
                    hypothesis=hypothesis,
                    target=0.0,
                    source_class=class_id,
                    provenance=provenance,
                )
            )
    return out
