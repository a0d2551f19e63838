"""Command line interface.

Exit codes: 0 success, 2 usage error, 3 data error, 4 backend error,
5 internal error. Every command that draws random numbers requires an
explicit seed so runs are reproducible by construction.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .augment import AugmentConfig, build_uca_set
from .backend import BackendConfig
from .corpus import Dataset, TaskRegistry, default_registry, dump_records, load_records, load_registry
from .errors import BackendError, DataError, EntailkitError
from .metrics import Metric, compute_metric
from .protocol import (
    DEFAULT_K,
    METHODS,
    SCHEMA_VERSION,
    RunSpec,
    TaskBundle,
    ablate_descriptions,
    ablate_to_csv,
    dump_predictions,
    dump_report,
    few_shot_split,
    format_score,
    report_to_csv,
    resolve_split,
    run_protocol,
    transfer_sweep,
    transfer_to_csv,
)
from .reformulate import (
    collapse_nli,
    dump_instances,
    load_instances,
    reformulate_entailment,
    reformulate_native,
    reformulate_regression,
)
from .rng import Rng


def _registry(args: argparse.Namespace) -> TaskRegistry:
    if getattr(args, "registry", None):
        return load_registry(args.registry)
    return default_registry()


def _parse_column_map(text: str | None) -> dict[int, str] | None:
    """Parse a TSV column map flag of the form ``0=uid,1=text_a,2=label``."""
    if text is None:
        return None
    out: dict[int, str] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        key, sep, value = part.partition("=")
        if not sep or not key.strip().isdigit():
            raise DataError(f"column map entries look like INDEX=FIELD, got {part!r}")
        out[int(key.strip())] = value.strip()
    if not out:
        raise DataError("empty column map")
    return out


def _load_split(
    registry: TaskRegistry,
    task_name: str,
    path: str,
    split_name: str,
    column_map: dict[int, str] | None = None,
) -> Dataset:
    return load_records(path, registry.get(task_name), split_name, column_map=column_map)


def _parse_seeds(text: str) -> tuple[int, ...]:
    try:
        seeds = tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise DataError(f"seeds must be comma-separated integers, got {text!r}") from None
    if not seeds:
        raise DataError("at least one seed is required")
    return seeds


def _backend_config(args: argparse.Namespace) -> BackendConfig:
    return BackendConfig(
        kind=args.backend,
        n_buckets=args.buckets,
        lr_scale=args.lr_scale,
        epoch_scale=args.epoch_scale,
        cross_weight=args.cross_weight,
        bridge_cmd=getattr(args, "bridge_cmd", None),
    )


def _add_backend_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--backend", choices=("builtin", "bridge"), default="builtin")
    sub.add_argument("--buckets", type=int, default=1 << 18, help="builtin hash buckets")
    sub.add_argument(
        "--lr-scale", type=float, default=1e4, dest="lr_scale",
        help="builtin factor mapping protocol learning rates to the linear model",
    )
    sub.add_argument(
        "--epoch-scale", type=int, default=5, dest="epoch_scale",
        help="builtin factor mapping protocol epoch counts to the linear model",
    )
    sub.add_argument(
        "--cross-weight", type=float, default=8.0, dest="cross_weight",
        help="builtin weight on premise-word x hypothesis-word features",
    )
    sub.add_argument(
        "--bridge-cmd", dest="bridge_cmd", default=None,
        help="bridge server command (default: the EFL_BRIDGE_CMD environment variable)",
    )


def _cmd_reformulate(args: argparse.Namespace) -> int:
    registry = _registry(args)
    cmap = _parse_column_map(args.column_map)
    dataset = _load_split(registry, args.task, args.input, "train", cmap)
    task = dataset.task
    if args.mode == "entailment":
        rng = None
        if task.kind.value == "single_sentence" and task.n_classes >= 3:
            if args.seed is None:
                raise DataError(
                    "this task draws wrong-class descriptions; pass --seed"
                )
            rng = Rng(args.seed)
        instances, plan = reformulate_entailment(dataset, rng)
    elif args.mode == "native":
        if task.kind.value == "regression":
            instances, plan = reformulate_regression(dataset)
        else:
            instances, plan = reformulate_native(dataset)
    else:
        instances, plan = collapse_nli(dataset)
    dump_instances(instances, args.output)
    print(f"wrote {len(instances)} instances ({plan.mode}, head size {plan.head_size}) to {args.output}")
    return 0


def _cmd_augment(args: argparse.Namespace) -> int:
    registry = _registry(args)
    task = registry.get(args.task)
    instances = load_instances(args.input)
    config = AugmentConfig(
        per_class_budget=args.per_class_budget,
        neg_downsample_frac=args.neg_downsample_frac,
    )
    extra = build_uca_set(instances, task.kind, config, Rng(args.seed))
    out = list(instances) + extra if args.include_originals else extra
    dump_instances(out, args.output)
    print(f"wrote {len(out)} instances ({len(extra)} augmented) to {args.output}")
    return 0


def _cmd_sample(args: argparse.Namespace) -> int:
    registry = _registry(args)
    cmap = _parse_column_map(args.column_map)
    dataset = _load_split(registry, args.task, args.input, "train", cmap)
    split = few_shot_split(dataset, args.k, args.seed)
    obj = {
        "schema_version": SCHEMA_VERSION,
        "seed": split.seed,
        "k": split.k,
        "uids_per_class": {
            str(cid): list(split.uids_per_class[cid]) for cid in sorted(split.uids_per_class)
        },
    }
    with open(args.output, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    if args.records:
        few = resolve_split(dataset, split)
        dump_records(few.records, args.records)
    print(f"wrote split of {len(split.all_uids())} uids to {args.output}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    registry = _registry(args)
    cmap = _parse_column_map(args.column_map)
    train = _load_split(registry, args.task, args.train, "train", cmap)
    test = _load_split(registry, args.task, args.test, "test", cmap)
    bundles = {args.task: TaskBundle(train=train, test=test)}
    pretrain_task = args.pretrain_task
    if pretrain_task:
        if not args.pretrain_train:
            raise DataError("--pretrain-task needs --pretrain-train")
        pre = _load_split(registry, pretrain_task, args.pretrain_train, "train", cmap)
        bundles[pretrain_task] = TaskBundle(train=pre)
    spec = RunSpec(
        task=args.task,
        method=args.method,
        k=args.k,
        seeds=_parse_seeds(args.seeds),
        pretrain_task=pretrain_task,
        augment=AugmentConfig() if args.uca else None,
    )
    report = run_protocol(
        spec, bundles, backend_config=_backend_config(args), parallel=args.parallel
    )
    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        dump_report(report, out_dir / "report.json")
        (out_dir / "report.csv").write_text(report_to_csv(report), encoding="utf-8")
        for result in report.results:
            dump_predictions(result, out_dir / f"predictions-s{result.seed}.jsonl")
    print(
        f"{spec.task} {spec.method} k={spec.k} "
        f"{format_score(report.mean)} +/- {format_score(report.std)}"
    )
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    registry = _registry(args)
    data_dir = Path(args.data_dir)
    sources = [s for s in args.sources.split(",") if s]
    targets = [t for t in args.targets.split(",") if t]
    bundles: dict[str, TaskBundle] = {}
    for name in dict.fromkeys(sources + targets):
        train = _load_split(registry, name, str(data_dir / f"{name}.train.jsonl"), "train")
        test_path = data_dir / f"{name}.test.jsonl"
        test = (
            _load_split(registry, name, str(test_path), "test") if test_path.exists() else None
        )
        bundles[name] = TaskBundle(train=train, test=test)
    report = transfer_sweep(
        bundles,
        sources,
        targets,
        k=args.k,
        seeds=_parse_seeds(args.seeds),
        backend_config=_backend_config(args),
    )
    csv_text = transfer_to_csv(report)
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
        print(f"wrote sweep table to {args.out}")
    else:
        sys.stdout.write(csv_text)
    return 0


def _load_candidates(path: str | None) -> list | None:
    """Candidate description sets from a JSON file: a list whose items
    are either class-ordered lists of sentences or class_id->sentence
    objects."""
    if path is None:
        return None
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc.msg})") from None
    if not isinstance(raw, list):
        raise DataError(f"{path}: expected a JSON list of candidates")
    out: list = []
    for i, item in enumerate(raw):
        if isinstance(item, dict):
            try:
                out.append({int(cid): text for cid, text in item.items()})
            except ValueError:
                raise DataError(f"{path}: candidate {i} has a non-integer class id") from None
        elif isinstance(item, list):
            out.append(item)
        else:
            raise DataError(f"{path}: candidate {i} must be a list or an object")
    return out


def _cmd_ablate(args: argparse.Namespace) -> int:
    registry = _registry(args)
    cmap = _parse_column_map(args.column_map)
    train = _load_split(registry, args.task, args.train, "train", cmap)
    test = _load_split(registry, args.task, args.test, "test", cmap)
    rows = ablate_descriptions(
        TaskBundle(train=train, test=test),
        candidates=_load_candidates(args.candidates),
        method=args.method,
        k=args.k,
        seeds=_parse_seeds(args.seeds),
        backend_config=_backend_config(args),
    )
    if args.out:
        Path(args.out).write_text(ablate_to_csv(rows), encoding="utf-8")
    for key, report in rows:
        print(f"{args.task} [{key}] {format_score(report.mean)} +/- {format_score(report.std)}")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    golds: list = []
    preds: list = []
    with open(args.predictions, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{args.predictions}:{lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict) or "gold" not in obj or "predicted" not in obj:
                raise DataError(f"{args.predictions}:{lineno}: expected predicted and gold fields")
            golds.append(obj["gold"])
            preds.append(obj["predicted"])
    metric = Metric(args.metric)
    score = compute_metric(metric, golds, preds, args.n_classes)
    print(format_score(score))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entailkit",
        description="Entailment reformulation, contrastive augmentation, and K-shot evaluation.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("reformulate", help="turn labeled records into training instances")
    p.add_argument("--task", required=True)
    p.add_argument("--input", required=True, help="records file (.jsonl or .tsv)")
    p.add_argument("--output", required=True, help="instances JSONL to write")
    p.add_argument("--mode", choices=("entailment", "native", "nli-collapse"), default="entailment")
    p.add_argument("--seed", type=int, default=None, help="required when negatives are drawn")
    p.add_argument("--registry", default=None, help="task registry JSON (default: built in)")
    p.add_argument("--column-map", dest="column_map", default=None,
                   help="TSV column layout, e.g. 0=uid,1=text_a,2=label")
    p.set_defaults(func=_cmd_reformulate)

    p = subs.add_parser("augment", help="add contrastive pairs to an instance file")
    p.add_argument("--task", required=True,
                   help="task the instances came from; its kind sets the pair handling")
    p.add_argument("--input", required=True, help="instances JSONL")
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--per-class", type=int, default=8, dest="per_class_budget",
                   help="positives (and negatives) to add per class")
    p.add_argument("--downsample-frac", type=float, default=0.70, dest="neg_downsample_frac",
                   help="fraction of negatives built by pairing existing sentences")
    p.add_argument("--include-originals", action="store_true", dest="include_originals")
    p.add_argument("--registry", default=None)
    p.set_defaults(func=_cmd_augment)

    p = subs.add_parser("sample", help="draw a K-shot split")
    p.add_argument("--task", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="split JSON to write")
    p.add_argument("--records", default=None,
                   help="also write the sampled records as JSONL here")
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--registry", default=None)
    p.add_argument("--column-map", dest="column_map", default=None,
                   help="TSV column layout, e.g. 0=uid,1=text_a,2=label")
    p.set_defaults(func=_cmd_sample)

    p = subs.add_parser("run", help="run the K-shot protocol for one task and method")
    p.add_argument("--task", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--seeds", required=True, help="comma-separated, e.g. 1,2,3,4,5")
    p.add_argument("--uca", action="store_true", help="add contrastive augmentation")
    p.add_argument("--parallel", action="store_true",
                   help="run seeds concurrently, one backend per seed; results are unchanged")
    p.add_argument("--pretrain-task", dest="pretrain_task", default=None)
    p.add_argument("--pretrain-train", dest="pretrain_train", default=None)
    p.add_argument("--out-dir", dest="out_dir", default=None, help="write report and predictions here")
    p.add_argument("--registry", default=None)
    p.add_argument("--column-map", dest="column_map", default=None,
                   help="TSV column layout, e.g. 0=uid,1=text_a,2=label")
    _add_backend_flags(p)
    p.set_defaults(func=_cmd_run)

    p = subs.add_parser("sweep", help="source-to-target transfer table")
    p.add_argument("--data-dir", required=True, dest="data_dir",
                   help="directory with <task>.train.jsonl and <task>.test.jsonl")
    p.add_argument("--sources", required=True, help="comma-separated source tasks")
    p.add_argument("--targets", required=True, help="comma-separated target tasks")
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--seeds", required=True)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.add_argument("--registry", default=None)
    _add_backend_flags(p)
    p.set_defaults(func=_cmd_sweep)

    p = subs.add_parser("ablate", help="compare candidate description sets")
    p.add_argument("--task", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--method", choices=("standard_ft", "efl_wo_pt"), default="efl_wo_pt")
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--seeds", required=True)
    p.add_argument("--candidates", default=None,
                   help="JSON file of candidate description sets "
                        "(default: registered descriptions vs one uninformative sentence)")
    p.add_argument("--out", default=None, help="write the rows as a CSV table here")
    p.add_argument("--registry", default=None)
    p.add_argument("--column-map", dest="column_map", default=None,
                   help="TSV column layout, e.g. 0=uid,1=text_a,2=label")
    _add_backend_flags(p)
    p.set_defaults(func=_cmd_ablate)

    p = subs.add_parser("score", help="score a predictions JSONL file")
    p.add_argument("--metric", choices=[m.value for m in Metric], required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--n-classes", type=int, default=None, dest="n_classes",
                   help="needed for macro_f1")
    p.set_defaults(func=_cmd_score)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return 4
    except EntailkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except BrokenPipeError:
        return 0
    except Exception as exc:  # anything unplanned is an internal error
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
