"""Task registry: named task specs, with a built-in default set."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from ..errors import DataError
from .types import Metric, TaskKind, TaskSpec


class TaskRegistry:
    """Mutable mapping from task name to TaskSpec."""

    def __init__(self) -> None:
        self._tasks: dict[str, TaskSpec] = {}

    def register(self, spec: TaskSpec, replace: bool = False) -> None:
        spec.validate()
        if spec.name in self._tasks and not replace:
            raise DataError(f"task {spec.name!r} is already registered")
        self._tasks[spec.name] = spec

    def get(self, name: str) -> TaskSpec:
        try:
            return self._tasks[name]
        except KeyError:
            raise DataError(
                f"unknown task {name!r} (known: {sorted(self._tasks)})"
            ) from None

    def __contains__(self, name: str) -> bool:
        return name in self._tasks

    def names(self) -> list[str]:
        return sorted(self._tasks)

    def __len__(self) -> int:
        return len(self._tasks)


def _spec_from_obj(obj: dict) -> TaskSpec:
    try:
        kind = TaskKind(obj["kind"])
        metric = Metric(obj.get("metric", "accuracy"))
        labels = tuple((int(cid), str(name)) for cid, name in obj.get("labels", ()))
        descriptions = {int(k): str(v) for k, v in obj.get("descriptions", {}).items()}
        score_range = obj.get("score_range")
        spec = TaskSpec(
            name=str(obj["name"]),
            kind=kind,
            labels=labels,
            descriptions=descriptions,
            metric=metric,
            score_range=tuple(float(x) for x in score_range) if score_range else None,
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise DataError(f"malformed task entry {obj.get('name', '?')!r}: {exc}") from None
    spec.validate()
    return spec


def _spec_to_obj(spec: TaskSpec) -> dict:
    obj: dict[str, object] = {
        "name": spec.name,
        "kind": spec.kind.value,
        "labels": [[cid, name] for cid, name in spec.labels],
        "descriptions": {str(k): v for k, v in spec.descriptions.items()},
        "metric": spec.metric.value,
    }
    if spec.score_range is not None:
        obj["score_range"] = list(spec.score_range)
    return obj


def load_registry(path: str | Path) -> TaskRegistry:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return _registry_from_payload(payload, str(path))


def _registry_from_payload(payload: object, source: str) -> TaskRegistry:
    if not isinstance(payload, dict) or not isinstance(payload.get("tasks"), list):
        raise DataError(f"{source}: registry file must be an object with a 'tasks' list")
    reg = TaskRegistry()
    for obj in payload["tasks"]:
        reg.register(_spec_from_obj(obj))
    return reg


def save_registry(reg: TaskRegistry, path: str | Path) -> None:
    payload = {"tasks": [_spec_to_obj(reg.get(name)) for name in reg.names()]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=False)
        fh.write("\n")


def default_registry() -> TaskRegistry:
    """The built-in benchmark tasks shipped with the package."""
    text = resources.files("entailkit.data").joinpath("default_tasks.json").read_text("utf-8")
    return _registry_from_payload(json.loads(text), "default_tasks.json")
