"""Reading and writing record files (JSONL and TSV)."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping

from ..errors import DataError
from .types import Dataset, Record, TaskKind, TaskSpec

_RECORD_KEYS = {"uid", "text_a", "text_b", "label", "language"}


def _parse_label(task: TaskSpec, raw: object, where: str) -> int | float | None:
    if raw is None:
        return None
    if task.kind is TaskKind.REGRESSION:
        try:
            return float(raw)  # type: ignore[arg-type]
        except (TypeError, ValueError):
            raise DataError(f"{where}: score {raw!r} is not a number") from None
    if isinstance(raw, bool):
        raise DataError(f"{where}: label {raw!r} is not a class_id or class name")
    if isinstance(raw, int):
        return raw
    if isinstance(raw, str):
        # Accept class names as well as stringified ids.
        for cid, cname in task.labels:
            if raw == cname:
                return cid
        if raw.lstrip("-").isdigit():
            return int(raw)
        raise DataError(
            f"{where}: unknown label {raw!r} for task {task.name!r} "
            f"(known: {[name for _, name in task.labels]})"
        )
    raise DataError(f"{where}: label {raw!r} is not a class_id or class name")


def _record_from_obj(task: TaskSpec, obj: dict, where: str) -> Record:
    unknown = set(obj) - _RECORD_KEYS
    if unknown:
        raise DataError(f"{where}: unknown fields {sorted(unknown)}")
    if "uid" not in obj or "text_a" not in obj:
        raise DataError(f"{where}: records require uid and text_a")
    text_b = obj.get("text_b")
    if task.kind is TaskKind.SINGLE_SENTENCE and text_b:
        raise DataError(f"{where}: single-sentence task but text_b is present")
    if task.kind in (TaskKind.SENTENCE_PAIR, TaskKind.REGRESSION) and not text_b:
        raise DataError(f"{where}: pair task requires text_b")
    return Record(
        uid=str(obj["uid"]),
        text_a=str(obj["text_a"]),
        text_b=str(text_b) if text_b else None,
        label=_parse_label(task, obj.get("label"), where),
        language=obj.get("language"),
    )


def load_records(
    path: str | Path,
    task: TaskSpec,
    split_name: str,
    labeled: bool = True,
    column_map: Mapping[int, str] | None = None,
) -> Dataset:
    """Load a JSONL or TSV record file and validate it against the task.

    Errors name the offending 1-based line number. JSONL rows are objects
    with uid/text_a and optional text_b/label/language. TSV files need an
    explicit ``column_map`` of column index to record field, and their
    first line is a header, which is skipped unread.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix in (".jsonl", ".json"):
        rows = _load_jsonl(path, task)
    elif suffix in (".tsv", ".txt"):
        if column_map is None:
            raise DataError(
                f"{path.name}: TSV loading needs an explicit column_map of "
                "column index to record field, e.g. {0: 'uid', 1: 'text_a', 2: 'label'}"
            )
        rows = _load_tsv(path, task, column_map)
    else:
        raise DataError(f"unsupported record file extension {suffix!r} for {path}")
    ds = Dataset(task=task, split_name=split_name, records=tuple(rows), labeled=labeled)
    ds.validate()
    return ds


def _load_jsonl(path: Path, task: TaskSpec) -> list[Record]:
    rows: list[Record] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path.name}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{where}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise DataError(f"{where}: expected a JSON object")
            rows.append(_record_from_obj(task, obj, where))
    return rows


def check_column_map(column_map: Mapping[int, str]) -> dict[int, str]:
    """Validate a TSV column map: distinct record fields by column index."""
    checked: dict[int, str] = {}
    seen: set[str] = set()
    for index, field in column_map.items():
        if not isinstance(index, int) or isinstance(index, bool) or index < 0:
            raise DataError(f"column_map index {index!r} is not a non-negative integer")
        if field not in _RECORD_KEYS:
            raise DataError(
                f"column_map field {field!r} is not one of {sorted(_RECORD_KEYS)}"
            )
        if field in seen:
            raise DataError(f"column_map maps two columns to {field!r}")
        seen.add(field)
        checked[index] = field
    for required in ("uid", "text_a"):
        if required not in seen:
            raise DataError(f"column_map is missing the {required!r} field")
    return checked


def _load_tsv(path: Path, task: TaskSpec, column_map: Mapping[int, str]) -> list[Record]:
    columns = check_column_map(column_map)
    width = max(columns) + 1
    rows: list[Record] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if lineno == 1:
                continue  # header line, never data
            line = line.rstrip("\n")
            if not line:
                continue
            where = f"{path.name}:{lineno}"
            cols = line.split("\t")
            if len(cols) < width:
                raise DataError(
                    f"{where}: expected at least {width} tab-separated columns, "
                    f"got {len(cols)}"
                )
            obj: dict[str, object] = {}
            for index, field in columns.items():
                value = cols[index]
                if value == "" and field != "text_a":
                    continue  # empty optional cell means absent
                obj[field] = value
            rows.append(_record_from_obj(task, obj, where))
    return rows


def record_to_obj(rec: Record) -> dict:
    obj: dict[str, object] = {"uid": rec.uid, "text_a": rec.text_a}
    if rec.text_b is not None:
        obj["text_b"] = rec.text_b
    if rec.label is not None:
        obj["label"] = rec.label
    if rec.language is not None:
        obj["language"] = rec.language
    return obj


def dump_records(records: Iterable[Record], path: str | Path) -> None:
    """Write records as canonical JSONL: sorted keys, tight separators."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(record_to_obj(rec), sort_keys=True, separators=(",", ":")))
            fh.write("\n")
