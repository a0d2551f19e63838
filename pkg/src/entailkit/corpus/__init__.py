"""Datasets, task specs, record IO, and synthetic fixtures."""

from .io import check_column_map, dump_records, load_records, record_to_obj
from .registry import TaskRegistry, default_registry, load_registry, save_registry
from .synthetic import (
    class_keyword,
    gen_synthetic,
    gen_synthetic_nli,
    make_nli_task,
    make_task,
)
from .types import Dataset, Metric, Record, TaskKind, TaskSpec

__all__ = [
    "Dataset",
    "Metric",
    "Record",
    "TaskKind",
    "TaskRegistry",
    "TaskSpec",
    "check_column_map",
    "class_keyword",
    "default_registry",
    "dump_records",
    "gen_synthetic",
    "gen_synthetic_nli",
    "load_records",
    "load_registry",
    "make_nli_task",
    "make_task",
    "record_to_obj",
    "save_registry",
]
