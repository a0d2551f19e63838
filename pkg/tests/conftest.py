"""Shared fixtures: synthetic task bundles and a small, fast backend setup."""

from __future__ import annotations

import pytest

from entailkit import BackendConfig, TaskBundle, gen_synthetic, gen_synthetic_nli, make_task


def build_bundle(
    name: str = "toy",
    kind: str = "single_sentence",
    n_classes: int = 2,
    metric: str = "accuracy",
    train_per_class: int = 40,
    test_per_class: int = 25,
    seed: int = 7,
    separability: float = 1.0,
) -> TaskBundle:
    """A fully synthetic labeled task with train and test splits."""
    task = make_task(name, kind=kind, n_classes=n_classes, metric=metric)
    train = gen_synthetic(task, "train", train_per_class, seed, separability)
    test = gen_synthetic(task, "test", test_per_class, seed + 1, separability)
    return TaskBundle(train=train, test=test)


def build_regression_bundle(
    name: str = "toyreg",
    n_train: int = 120,
    n_test: int = 60,
    seed: int = 11,
) -> TaskBundle:
    task = make_task(name, kind="regression", metric="pearson", score_range=(0.0, 5.0))
    train = gen_synthetic(task, "train", n_train, seed)
    test = gen_synthetic(task, "test", n_test, seed + 1)
    return TaskBundle(train=train, test=test)


@pytest.fixture(scope="session")
def fast_config() -> BackendConfig:
    """Small feature table keeps builtin training quick in tests."""
    return BackendConfig(n_buckets=1 << 14)


@pytest.fixture(scope="session")
def nli_bundle() -> TaskBundle:
    """Entailment pretraining corpus (train split only)."""
    return TaskBundle(train=gen_synthetic_nli("train", 40, 3))


@pytest.fixture(scope="session")
def binary_bundle() -> TaskBundle:
    return build_bundle("toy2", n_classes=2)


@pytest.fixture(scope="session")
def fourway_bundle() -> TaskBundle:
    return build_bundle("toy4", n_classes=4)
