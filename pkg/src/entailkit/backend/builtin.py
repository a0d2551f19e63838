"""Builtin scoring backend: hashed text features + multinomial logistic
regression trained by seeded mini-batch SGD.

Features are FNV-1a hashed into a fixed bucket space: word unigrams and
character 2-4 grams over the premise, the hypothesis, and the pair
joined with a boundary marker, plus premise-word by hypothesis-word
cross products. The cross products are what let a linear model tell
which description a sentence entails; bag features alone cannot.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..errors import BackendError, DataError
from ..hashing import fnv1a64
from ..reformulate import EntailmentInstance
from ..rng import Rng
from .base import Backend, BackendConfig, Hyperparams

_BOUNDARY = "\x1f"


def featurize(
    premise: str, hypothesis: str, n_buckets: int, cross_weight: float = 8.0
) -> dict[int, float]:
    """Hashed feature counts for one pair, L2-normalized.

    ``cross_weight`` boosts the premise-by-hypothesis word products and
    the shared-token count so they are not drowned out by the far more
    numerous character grams; they carry the matching signal, so they
    get most of the mass. The shared-token count is what generalizes:
    word products only fire on vocabulary seen in training, while the
    count rewards overlap for any word.
    """
    counts: dict[int, float] = {}

    def bump(key: str, value: float = 1.0) -> None:
        bucket = fnv1a64(key.encode("utf-8")) % n_buckets
        counts[bucket] = counts.get(bucket, 0.0) + value

    p_words = premise.split()
    h_words = hypothesis.split()
    joined = premise + _BOUNDARY + hypothesis
    for w in p_words:
        bump("P" + _BOUNDARY + w)
    for w in h_words:
        bump("H" + _BOUNDARY + w)
    for w in joined.split():
        bump("J" + _BOUNDARY + w)
    for tag, text in (("Pc", premise), ("Hc", hypothesis), ("Jc", joined)):
        for n in (2, 3, 4):
            for i in range(len(text) - n + 1):
                bump(f"{tag}{n}{_BOUNDARY}{text[i : i + n]}")
    for wp in p_words:
        for wh in h_words:
            bump(f"X{_BOUNDARY}{wp}{_BOUNDARY}{wh}", cross_weight)
    shared = len(set(p_words) & set(h_words))
    if shared:
        bump("O" + _BOUNDARY + "shared", cross_weight * shared)

    norm = math.sqrt(sum(v * v for v in counts.values()))
    if norm > 0:
        counts = {k: v / norm for k, v in counts.items()}
    return counts


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def _pack(feats: Iterable[dict[int, float]]) -> list[tuple[np.ndarray, np.ndarray]]:
    """Feature dicts as (bucket index, value) array pairs."""
    packed = []
    for row in feats:
        idx = np.fromiter(row.keys(), dtype=np.int64, count=len(row))
        vals = np.fromiter(row.values(), dtype=np.float64, count=len(row))
        packed.append((idx, vals))
    return packed


def _batch_step(
    W: np.ndarray,
    b: np.ndarray,
    packed: Sequence[tuple[np.ndarray, np.ndarray]],
    targets: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Mean batch loss and gradient as (loss, buckets, G, grad_b).

    Heads of size 2+ use softmax cross-entropy; a size-1 head is a
    linear output trained with squared loss. ``G`` holds one gradient
    row per entry of ``buckets`` (the sorted union of buckets touched
    by the batch).
    """
    n = len(packed)
    if n == 0:
        raise DataError("empty batch")
    outputs = np.empty((n, b.size), dtype=np.float64)
    for i, (idx, vals) in enumerate(packed):
        logits = W[:, idx] @ vals + b if idx.size else b.copy()
        outputs[i] = logits if b.size == 1 else _softmax(logits)
    if b.size == 1:
        diff = outputs - targets
        loss = float(np.sum(diff * diff)) / n
        delta = 2.0 * diff / n
    else:
        loss = -float(np.sum(targets * np.log(np.clip(outputs, 1e-12, None)))) / n
        delta = (outputs - targets) / n
    grad_b = delta.sum(axis=0)
    flat_idx = np.concatenate([idx for idx, _ in packed])
    flat_val = np.concatenate([vals for _, vals in packed])
    reps = np.fromiter((idx.size for idx, _ in packed), dtype=np.int64, count=n)
    contrib = np.repeat(delta, reps, axis=0) * flat_val[:, None]
    buckets, inverse = np.unique(flat_idx, return_inverse=True)
    G = np.zeros((buckets.size, b.size), dtype=np.float64)
    np.add.at(G, inverse, contrib)
    return loss, buckets, G, grad_b


def batch_loss_and_grad(
    W: np.ndarray,
    b: np.ndarray,
    feats: Sequence[dict[int, float]],
    targets: np.ndarray,
) -> tuple[float, dict[int, np.ndarray], np.ndarray]:
    """Mean batch loss (cross-entropy, or squared error for a size-1
    head) and its exact gradient.

    ``targets`` holds one target row per example. The weight gradient
    comes back sparse, keyed by bucket. Weight decay is not part of
    this loss; the trainer applies it as a decoupled shrink.
    """
    loss, buckets, G, grad_b = _batch_step(W, b, _pack(feats), targets)
    grad_w = {int(bucket): G[i].copy() for i, bucket in enumerate(buckets)}
    return loss, grad_w, grad_b


def _validate_pairs(X: Sequence) -> list[tuple[str, str]]:
    failures: list[str] = []
    pairs: list[tuple[str, str]] = []
    for i, item in enumerate(X):
        if (
            not isinstance(item, (tuple, list))
            or len(item) != 2
            or not all(isinstance(t, str) for t in item)
        ):
            if len(failures) < 5:
                failures.append(f"X[{i}] is not a (premise, hypothesis) string pair")
            continue
        pairs.append((item[0], item[1]))
    if failures:
        raise DataError("; ".join(failures))
    if not pairs:
        raise DataError("X is empty")
    return pairs


class HashedTextClassifier(ClassifierMixin, BaseEstimator):
    """Multinomial logistic regression over hashed pair features.

    X is a sequence of (premise, hypothesis) string pairs. For a
    two-way head, y may be soft targets in [0, 1] (the probability of
    class 1); larger heads take integer class labels; a one-way head is
    a linear scalar output trained with squared loss on targets in
    [0, 1]. With ``warm_start`` set, ``fit`` keeps existing weights
    when the head shape is unchanged and reinitializes them otherwise.
    """

    def __init__(
        self,
        head_size: int = 2,
        n_buckets: int = 1 << 18,
        learning_rate: float = 0.1,
        batch_size: int = 8,
        max_epochs: int = 50,
        weight_decay: float = 0.0,
        warmup_frac: float = 0.0,
        cross_weight: float = 8.0,
        seed: int = 0,
        warm_start: bool = False,
    ) -> None:
        self.head_size = head_size
        self.n_buckets = n_buckets
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.weight_decay = weight_decay
        self.warmup_frac = warmup_frac
        self.cross_weight = cross_weight
        self.seed = seed
        self.warm_start = warm_start

    def _target_rows(self, y: Sequence) -> np.ndarray:
        rows = np.zeros((len(y), self.head_size), dtype=np.float64)
        for i, t in enumerate(y):
            t = float(t)
            if self.head_size == 1:
                if not 0.0 <= t <= 1.0:
                    raise DataError(f"y[{i}]={t} outside [0, 1] for a scalar head")
                rows[i, 0] = t
            elif self.head_size == 2:
                if not 0.0 <= t <= 1.0:
                    raise DataError(f"y[{i}]={t} outside [0, 1] for a two-way head")
                rows[i, 0] = 1.0 - t
                rows[i, 1] = t
            else:
                if t != int(t) or not 0 <= int(t) < self.head_size:
                    raise DataError(
                        f"y[{i}]={t} is not a class index below {self.head_size}"
                    )
                rows[i, int(t)] = 1.0
        return rows

    def fit(self, X: Sequence, y: Sequence) -> "HashedTextClassifier":
        pairs = _validate_pairs(X)
        if len(pairs) != len(y):
            raise DataError(f"X has {len(pairs)} rows but y has {len(y)}")
        if self.head_size < 1:
            raise DataError(f"head_size must be at least 1, got {self.head_size}")
        targets = self._target_rows(y)
        shape = (self.head_size, self.n_buckets)
        if not (self.warm_start and getattr(self, "coef_", None) is not None and self.coef_.shape == shape):
            self.coef_ = np.zeros(shape, dtype=np.float64)
            self.intercept_ = np.zeros(self.head_size, dtype=np.float64)
        self.classes_ = np.arange(self.head_size)

        packed = _pack(
            featurize(p, h, self.n_buckets, self.cross_weight) for p, h in pairs
        )
        n = len(packed)
        rng = Rng(self.seed)
        n_batches = (n + self.batch_size - 1) // self.batch_size
        total_steps = self.max_epochs * n_batches
        warmup_steps = int(self.warmup_frac * total_steps + 0.5)
        step = 0
        for _ in range(self.max_epochs):
            order = list(range(n))
            rng.shuffle(order)
            for start in range(0, n, self.batch_size):
                step += 1
                chunk = order[start : start + self.batch_size]
                lr = self.learning_rate
                if warmup_steps and step <= warmup_steps:
                    lr *= step / warmup_steps
                _, buckets, G, grad_b = _batch_step(
                    self.coef_, self.intercept_, [packed[i] for i in chunk], targets[chunk]
                )
                cols = self.coef_[:, buckets]
                self.coef_[:, buckets] = cols - lr * (G.T + self.weight_decay * cols)
                self.intercept_ -= lr * grad_b
        return self

    def predict_proba(self, X: Sequence) -> np.ndarray:
        """One row per input: class probabilities, or for a one-way
        head the scalar output clamped into [0, 1]."""
        if getattr(self, "coef_", None) is None:
            raise BackendError("model is not fitted")
        pairs = _validate_pairs(X)
        out = np.zeros((len(pairs), self.head_size), dtype=np.float64)
        for i, (p, h) in enumerate(pairs):
            row = featurize(p, h, self.n_buckets, self.cross_weight)
            if row:
                idx = np.fromiter(row.keys(), dtype=np.int64, count=len(row))
                vals = np.fromiter(row.values(), dtype=np.float64, count=len(row))
                logits = self.coef_[:, idx] @ vals + self.intercept_
            else:
                logits = self.intercept_.copy()
            out[i] = np.clip(logits, 0.0, 1.0) if self.head_size == 1 else _softmax(logits)
        return out

    def predict(self, X: Sequence) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)


@dataclass
class _Model:
    estimator: HashedTextClassifier
    hyperparams: Hyperparams


class BuiltinBackend(Backend):
    """In-process backend over HashedTextClassifier.

    Protocol learning rates and epoch counts are rescaled by the
    config's ``lr_scale`` and ``epoch_scale`` before reaching the
    linear model (the protocol values suit far larger models); the
    reported hyperparameters stay untouched.
    """

    def __init__(self, config: BackendConfig | None = None) -> None:
        self.config = config or BackendConfig()
        self.config.validate()
        self._models: dict[str, _Model] = {}
        self._counter = 0

    def _new_id(self) -> str:
        self._counter += 1
        return f"m{self._counter:04d}"

    def _get(self, model_id: str) -> _Model:
        try:
            return self._models[model_id]
        except KeyError:
            raise BackendError(f"unknown model id {model_id!r}") from None

    def _fit(
        self,
        estimator: HashedTextClassifier | None,
        instances: Sequence[EntailmentInstance],
        head_size: int,
        seed: int,
        hp: Hyperparams,
    ) -> str:
        hp.validate()
        if head_size < 1:
            raise DataError(f"head_size must be at least 1, got {head_size}")
        params = dict(
            head_size=head_size,
            n_buckets=self.config.n_buckets,
            learning_rate=hp.learning_rate * self.config.lr_scale,
            batch_size=hp.batch_size,
            max_epochs=hp.max_epochs * self.config.epoch_scale,
            weight_decay=hp.weight_decay,
            warmup_frac=hp.warmup_frac,
            cross_weight=self.config.cross_weight,
            seed=seed,
        )
        if estimator is None:
            est = HashedTextClassifier(**params)
        else:
            est = HashedTextClassifier(**params, warm_start=True)
            if getattr(estimator, "coef_", None) is not None and estimator.coef_.shape == (
                head_size,
                self.config.n_buckets,
            ):
                est.coef_ = estimator.coef_.copy()
                est.intercept_ = estimator.intercept_.copy()
        X = [(inst.premise, inst.hypothesis) for inst in instances]
        y = [inst.target for inst in instances]
        est.fit(X, y)
        model_id = self._new_id()
        self._models[model_id] = _Model(estimator=est, hyperparams=hp)
        return model_id

    def train(
        self,
        instances: Sequence[EntailmentInstance],
        head_size: int,
        seed: int,
        hyperparams: Hyperparams | None = None,
    ) -> str:
        if not instances:
            raise DataError("cannot train on an empty instance list")
        return self._fit(None, instances, head_size, seed, hyperparams or Hyperparams())

    def continue_train(
        self,
        model_id: str,
        instances: Sequence[EntailmentInstance],
        head_size: int,
        seed: int,
        hyperparams: Hyperparams | None = None,
    ) -> str:
        model = self._get(model_id)
        if not instances:
            return model_id
        return self._fit(
            model.estimator, instances, head_size, seed, hyperparams or Hyperparams()
        )

    def score(self, model_id: str, pairs: Sequence[tuple[str, str]]) -> list[list[float]]:
        model = self._get(model_id)
        if not pairs:
            return []
        return model.estimator.predict_proba(list(pairs)).tolist()

    def save(self, model_id: str, path: str) -> None:
        """Flat little-endian binary: int64 head_size, int64 n_buckets,
        then the intercept and weight matrix as float64."""
        est = self._get(model_id).estimator
        with open(path, "wb") as fh:
            fh.write(struct.pack("<2q", est.head_size, est.n_buckets))
            fh.write(np.ascontiguousarray(est.intercept_, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(est.coef_, dtype="<f8").tobytes())

    def load(self, path: str) -> str:
        """Inverse of save. The featurizer settings (bucket count aside)
        are not stored in the file, so loading assumes the backend is
        configured like the one that trained the model."""
        try:
            with open(path, "rb") as fh:
                blob = fh.read()
        except OSError as exc:
            raise BackendError(f"cannot load model from {path}: {exc}") from None
        if len(blob) < 16:
            raise BackendError(f"{path} is not a saved linear model (too short)")
        head_size, n_buckets = struct.unpack_from("<2q", blob)
        expected = 16 + 8 * (head_size + head_size * n_buckets)
        if head_size < 1 or n_buckets < 2 or len(blob) != expected:
            raise BackendError(
                f"{path} is not a saved linear model "
                f"(dims {head_size}x{n_buckets} need {expected} bytes, file has {len(blob)})"
            )
        est = HashedTextClassifier(
            head_size=head_size,
            n_buckets=n_buckets,
            cross_weight=self.config.cross_weight,
        )
        flat = np.frombuffer(blob, dtype="<f8", offset=16)
        est.intercept_ = flat[:head_size].astype(np.float64)
        est.coef_ = flat[head_size:].astype(np.float64).reshape(head_size, n_buckets)
        est.classes_ = np.arange(head_size)
        model_id = self._new_id()
        self._models[model_id] = _Model(estimator=est, hyperparams=Hyperparams())
        return model_id

    def effective_hyperparams(self, model_id: str) -> Hyperparams:
        return self._get(model_id).hyperparams
