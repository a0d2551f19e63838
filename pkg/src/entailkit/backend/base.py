"""Backend abstraction: anything that can train and score pair models."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, replace
from typing import Sequence

from ..errors import DataError
from ..reformulate import EntailmentInstance


@dataclass(frozen=True)
class Hyperparams:
    """Protocol-level training settings.

    Defaults are the few-shot profile. Backends may map these onto
    their own scale internally but must echo them back unchanged.
    """

    learning_rate: float = 1e-5
    batch_size: int = 8
    max_epochs: int = 10
    weight_decay: float = 0.0
    warmup_frac: float = 0.0

    @classmethod
    def few_shot(cls) -> "Hyperparams":
        return cls()

    @classmethod
    def full_data(cls) -> "Hyperparams":
        """Larger-corpus profile: bigger batches, decay, and warmup."""
        return cls(batch_size=32, weight_decay=0.1, warmup_frac=0.06)

    def to_obj(self) -> dict:
        return asdict(self)

    @classmethod
    def from_obj(cls, obj: dict | None) -> "Hyperparams":
        if obj is None:
            return cls()
        known = set(cls().to_obj())
        unknown = set(obj) - known
        if unknown:
            raise DataError(f"unknown hyperparameters {sorted(unknown)}")
        base = cls()
        try:
            return replace(
                base,
                learning_rate=float(obj.get("learning_rate", base.learning_rate)),
                batch_size=int(obj.get("batch_size", base.batch_size)),
                max_epochs=int(obj.get("max_epochs", base.max_epochs)),
                weight_decay=float(obj.get("weight_decay", base.weight_decay)),
                warmup_frac=float(obj.get("warmup_frac", base.warmup_frac)),
            )
        except (TypeError, ValueError) as exc:
            raise DataError(f"malformed hyperparameters: {exc}") from None

    def validate(self) -> None:
        failures = []
        if self.learning_rate <= 0:
            failures.append(f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            failures.append(f"batch_size must be at least 1, got {self.batch_size}")
        if self.max_epochs < 1:
            failures.append(f"max_epochs must be at least 1, got {self.max_epochs}")
        if self.weight_decay < 0:
            failures.append(f"weight_decay must be non-negative, got {self.weight_decay}")
        if not 0.0 <= self.warmup_frac <= 1.0:
            failures.append(f"warmup_frac must be in [0, 1], got {self.warmup_frac}")
        if failures:
            raise DataError("; ".join(failures))


@dataclass(frozen=True)
class BackendConfig:
    """Which backend to use and how to set it up.

    ``kind`` is ``builtin`` or ``bridge``. ``lr_scale`` and
    ``epoch_scale`` map protocol learning rates and epoch counts onto
    the builtin linear model's scale (the protocol values suit much
    larger models); the reported hyperparameters stay untouched. The
    default lr_scale turns the protocol's 1e-5 into an effective 0.1.
    ``cross_weight`` is the builtin featurizer's boost for premise-by-
    hypothesis word products. ``bridge_cmd`` overrides the
    EFL_BRIDGE_CMD environment variable.
    """

    kind: str = "builtin"
    n_buckets: int = 1 << 18
    lr_scale: float = 1e4
    epoch_scale: int = 5
    cross_weight: float = 8.0
    bridge_cmd: str | None = None

    def validate(self) -> None:
        if self.kind not in ("builtin", "bridge"):
            raise DataError(f"backend kind must be builtin or bridge, got {self.kind!r}")
        if self.n_buckets < 2:
            raise DataError(f"n_buckets must be at least 2, got {self.n_buckets}")
        if self.lr_scale <= 0:
            raise DataError(f"lr_scale must be positive, got {self.lr_scale}")
        if self.epoch_scale < 1:
            raise DataError(f"epoch_scale must be at least 1, got {self.epoch_scale}")
        if self.cross_weight <= 0:
            raise DataError(f"cross_weight must be positive, got {self.cross_weight}")


class Backend(ABC):
    """Trains pair models and scores premise/hypothesis pairs.

    Models are referred to by opaque string ids. ``continue_train``
    never mutates the source model: it returns a new id, except that an
    empty instance list is a no-op returning the same id.
    """

    @abstractmethod
    def train(
        self,
        instances: Sequence[EntailmentInstance],
        head_size: int,
        seed: int,
        hyperparams: Hyperparams | None = None,
    ) -> str: ...

    @abstractmethod
    def continue_train(
        self,
        model_id: str,
        instances: Sequence[EntailmentInstance],
        head_size: int,
        seed: int,
        hyperparams: Hyperparams | None = None,
    ) -> str: ...

    @abstractmethod
    def score(self, model_id: str, pairs: Sequence[tuple[str, str]]) -> list[list[float]]: ...

    @abstractmethod
    def save(self, model_id: str, path: str) -> None: ...

    @abstractmethod
    def load(self, path: str) -> str: ...

    @abstractmethod
    def effective_hyperparams(self, model_id: str) -> Hyperparams: ...

    def close(self) -> None:
        pass

    def __enter__(self) -> "Backend":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()
