"""Scoring backends: the builtin hashed linear model and the bridge."""

from ..errors import DataError
from .base import Backend, BackendConfig, Hyperparams
from .bridge import BridgeBackend
from .builtin import BuiltinBackend, HashedTextClassifier, featurize

__all__ = [
    "Backend",
    "BackendConfig",
    "BridgeBackend",
    "BuiltinBackend",
    "HashedTextClassifier",
    "Hyperparams",
    "featurize",
    "get_backend",
]


def get_backend(config: BackendConfig | None = None) -> Backend:
    config = config or BackendConfig()
    config.validate()
    if config.kind == "builtin":
        return BuiltinBackend(config)
    if config.kind == "bridge":
        return BridgeBackend(config)
    raise DataError(f"unknown backend kind {config.kind!r}")
