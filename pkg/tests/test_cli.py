"""Command line surface: exit codes, artifacts, reproducibility."""

from __future__ import annotations

import json
import subprocess
import sys

import pytest

from entailkit import gen_synthetic, make_task
from entailkit.cli import main
from entailkit.corpus import dump_records, save_registry
from entailkit.corpus.registry import TaskRegistry
from entailkit.reformulate import load_instances

FAST_FLAGS = ["--buckets", "4096"]


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """A registry of synthetic tasks plus train/test record files."""
    root = tmp_path_factory.mktemp("cli")
    reg = TaskRegistry()
    tasks = {
        "clibin": make_task("clibin", n_classes=2),
        "cli4": make_task("cli4", n_classes=4),
        "clialt": make_task("clialt", n_classes=2),
    }
    for task in tasks.values():
        reg.register(task)
    registry_path = root / "registry.json"
    save_registry(reg, registry_path)

    paths = {"registry": str(registry_path), "root": root}
    for name, task in tasks.items():
        train = gen_synthetic(task, "train", 20, seed=5)
        test = gen_synthetic(task, "test", 10, seed=6)
        dump_records(train.records, root / f"{name}.train.jsonl")
        dump_records(test.records, root / f"{name}.test.jsonl")
        paths[f"{name}.train"] = str(root / f"{name}.train.jsonl")
        paths[f"{name}.test"] = str(root / f"{name}.test.jsonl")
    return paths


def run_cli(*argv: str) -> int:
    return main(list(argv))


# ---------------------------------------------------------------------------
# Usage errors (argparse owns these: SystemExit with code 2)
# ---------------------------------------------------------------------------


def test_no_command_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        run_cli()
    assert info.value.code == 2


def test_unknown_command_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        run_cli("frobnicate")
    assert info.value.code == 2


def test_unknown_method_is_a_usage_error(workspace, capsys):
    with pytest.raises(SystemExit) as info:
        run_cli(
            "run", "--task", "clibin",
            "--train", workspace["clibin.train"], "--test", workspace["clibin.test"],
            "--method", "wat", "--seeds", "1",
        )
    assert info.value.code == 2


def test_randomized_commands_require_an_explicit_seed(workspace, capsys):
    with pytest.raises(SystemExit) as info:
        run_cli(
            "sample", "--task", "clibin", "--input", workspace["clibin.train"],
            "--output", str(workspace["root"] / "nope.json"), "--k", "2",
        )
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        run_cli(
            "augment", "--task", "clibin", "--input", "x.jsonl", "--output", "y.jsonl",
        )
    assert info.value.code == 2


# ---------------------------------------------------------------------------
# reformulate
# ---------------------------------------------------------------------------


def test_reformulate_binary(workspace, tmp_path, capsys):
    out = tmp_path / "bin.jsonl"
    rc = run_cli(
        "reformulate", "--task", "clibin", "--registry", workspace["registry"],
        "--input", workspace["clibin.train"], "--output", str(out),
    )
    assert rc == 0
    assert "wrote 40 instances" in capsys.readouterr().out
    instances = load_instances(out)
    assert len(instances) == 40  # one per record for a binary task
    assert all(inst.provenance == "original" for inst in instances)


def test_reformulate_multiclass_needs_a_seed(workspace, tmp_path, capsys):
    out = tmp_path / "four.jsonl"
    rc = run_cli(
        "reformulate", "--task", "cli4", "--registry", workspace["registry"],
        "--input", workspace["cli4.train"], "--output", str(out),
    )
    assert rc == 3
    assert "--seed" in capsys.readouterr().err
    rc = run_cli(
        "reformulate", "--task", "cli4", "--registry", workspace["registry"],
        "--input", workspace["cli4.train"], "--output", str(out), "--seed", "11",
    )
    assert rc == 0
    assert len(load_instances(out)) == 2 * 80  # entailing + contrastive per record


def test_reformulate_is_byte_identical_across_reruns(workspace, tmp_path, capsys):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for out in (a, b):
        assert run_cli(
            "reformulate", "--task", "cli4", "--registry", workspace["registry"],
            "--input", workspace["cli4.train"], "--output", str(out), "--seed", "11",
        ) == 0
    assert a.read_bytes() == b.read_bytes()


def test_reformulate_missing_input_maps_to_data_error(workspace, tmp_path, capsys):
    rc = run_cli(
        "reformulate", "--task", "clibin", "--registry", workspace["registry"],
        "--input", str(tmp_path / "ghost.jsonl"), "--output", str(tmp_path / "o.jsonl"),
    )
    assert rc == 3
    assert "data error" in capsys.readouterr().err


def test_reformulate_unknown_task(workspace, tmp_path, capsys):
    rc = run_cli(
        "reformulate", "--task", "ghost", "--registry", workspace["registry"],
        "--input", workspace["clibin.train"], "--output", str(tmp_path / "o.jsonl"),
    )
    assert rc == 3


# ---------------------------------------------------------------------------
# augment
# ---------------------------------------------------------------------------


def test_augment_adds_contrastive_pairs(workspace, tmp_path, capsys):
    base = tmp_path / "base.jsonl"
    run_cli(
        "reformulate", "--task", "clibin", "--registry", workspace["registry"],
        "--input", workspace["clibin.train"], "--output", str(base),
    )
    capsys.readouterr()
    out = tmp_path / "aug.jsonl"
    rc = run_cli(
        "augment", "--task", "clibin", "--registry", workspace["registry"],
        "--input", str(base), "--output", str(out), "--seed", "4", "--per-class", "3",
    )
    assert rc == 0
    assert "wrote 12 instances (12 augmented)" in capsys.readouterr().out
    extras = load_instances(out)
    assert len(extras) == 2 * (3 + 3)
    assert {i.provenance for i in extras} <= {"uca_positive", "uca_negative", "downsample_negative"}

    merged = tmp_path / "merged.jsonl"
    rc = run_cli(
        "augment", "--task", "clibin", "--registry", workspace["registry"],
        "--input", str(base), "--output", str(merged), "--seed", "4", "--per-class", "3",
        "--include-originals",
    )
    assert rc == 0
    assert len(load_instances(merged)) == 40 + 12


def test_augment_is_byte_identical_across_reruns(workspace, tmp_path, capsys):
    base = tmp_path / "base.jsonl"
    run_cli(
        "reformulate", "--task", "clibin", "--registry", workspace["registry"],
        "--input", workspace["clibin.train"], "--output", str(base),
    )
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for out in (a, b):
        assert run_cli(
            "augment", "--task", "clibin", "--registry", workspace["registry"],
            "--input", str(base), "--output", str(out), "--seed", "9",
        ) == 0
    assert a.read_bytes() == b.read_bytes()


# ---------------------------------------------------------------------------
# sample
# ---------------------------------------------------------------------------


def test_sample_writes_the_split_and_records(workspace, tmp_path, capsys):
    split_path = tmp_path / "split.json"
    records_path = tmp_path / "few.jsonl"
    rc = run_cli(
        "sample", "--task", "clibin", "--registry", workspace["registry"],
        "--input", workspace["clibin.train"], "--output", str(split_path),
        "--records", str(records_path), "--k", "3", "--seed", "2",
    )
    assert rc == 0
    obj = json.loads(split_path.read_text())
    assert set(obj) == {"schema_version", "seed", "k", "uids_per_class"}
    assert obj["seed"] == 2 and obj["k"] == 3
    assert set(obj["uids_per_class"]) == {"0", "1"}
    assert all(len(uids) == 3 for uids in obj["uids_per_class"].values())
    lines = records_path.read_text().strip().split("\n")
    assert len(lines) == 6


def test_sample_is_byte_identical_across_reruns(workspace, tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run_cli(
            "sample", "--task", "clibin", "--registry", workspace["registry"],
            "--input", workspace["clibin.train"], "--output", str(out),
            "--k", "3", "--seed", "2",
        ) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sample_with_too_large_k_is_a_data_error(workspace, tmp_path, capsys):
    rc = run_cli(
        "sample", "--task", "clibin", "--registry", workspace["registry"],
        "--input", workspace["clibin.train"], "--output", str(tmp_path / "s.json"),
        "--k", "999", "--seed", "2",
    )
    assert rc == 3
    assert "fewer than k=999" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def test_run_writes_report_and_predictions(workspace, tmp_path, capsys):
    out_dir = tmp_path / "artifacts"
    rc = run_cli(
        "run", "--task", "clibin", "--registry", workspace["registry"],
        "--train", workspace["clibin.train"], "--test", workspace["clibin.test"],
        "--method", "efl_wo_pt", "--k", "4", "--seeds", "1,2",
        "--out-dir", str(out_dir), *FAST_FLAGS,
    )
    assert rc == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("clibin efl_wo_pt k=4 ")
    assert "+/-" in line
    report = json.loads((out_dir / "report.json").read_text())
    assert report["schema_version"] == 1
    assert report["task"] == "clibin"
    assert report["seeds"] == [1, 2]
    assert (out_dir / "report.csv").read_text().startswith(
        "task,method,k,seed,score,n_train_instances"
    )
    for seed in (1, 2):
        preds = (out_dir / f"predictions-s{seed}.jsonl").read_text().strip().split("\n")
        assert len(preds) == 20  # the full test split


def test_run_report_is_byte_identical_across_reruns_and_parallel(workspace, tmp_path, capsys):
    outs = []
    for sub, extra in (("a", []), ("b", []), ("c", ["--parallel"])):
        out_dir = tmp_path / sub
        assert run_cli(
            "run", "--task", "clibin", "--registry", workspace["registry"],
            "--train", workspace["clibin.train"], "--test", workspace["clibin.test"],
            "--method", "efl_wo_pt", "--k", "4", "--seeds", "1,2", *extra,
            "--out-dir", str(out_dir), *FAST_FLAGS,
        ) == 0
        outs.append((out_dir / "report.json").read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_run_with_uca_flag(workspace, tmp_path, capsys):
    out_dir = tmp_path / "uca"
    rc = run_cli(
        "run", "--task", "clibin", "--registry", workspace["registry"],
        "--train", workspace["clibin.train"], "--test", workspace["clibin.test"],
        "--method", "efl_wo_pt", "--k", "4", "--seeds", "1", "--uca",
        "--out-dir", str(out_dir), *FAST_FLAGS,
    )
    assert rc == 0
    report = json.loads((out_dir / "report.json").read_text())
    assert report["augment"] is not None
    # 2K originals + (8 positives + 8 negatives) per class.
    assert report["per_seed"][0]["n_train_instances"] == 8 + 2 * 16


def test_run_pretrain_flags(workspace, tmp_path, capsys):
    rc = run_cli(
        "run", "--task", "clibin", "--registry", workspace["registry"],
        "--train", workspace["clibin.train"], "--test", workspace["clibin.test"],
        "--method", "stilts", "--k", "4", "--seeds", "1",
        "--pretrain-task", "clialt", "--pretrain-train", workspace["clialt.train"],
        *FAST_FLAGS,
    )
    assert rc == 0
    rc = run_cli(
        "run", "--task", "clibin", "--registry", workspace["registry"],
        "--train", workspace["clibin.train"], "--test", workspace["clibin.test"],
        "--method", "stilts", "--k", "4", "--seeds", "1",
        "--pretrain-task", "clialt", *FAST_FLAGS,
    )
    assert rc == 3
    assert "--pretrain-train" in capsys.readouterr().err


def test_run_bad_seeds_flag(workspace, capsys):
    rc = run_cli(
        "run", "--task", "clibin", "--registry", workspace["registry"],
        "--train", workspace["clibin.train"], "--test", workspace["clibin.test"],
        "--method", "majority", "--seeds", "1,two",
    )
    assert rc == 3
    assert "comma-separated integers" in capsys.readouterr().err


def test_run_bridge_without_a_command_is_a_backend_error(workspace, capsys, monkeypatch):
    monkeypatch.delenv("EFL_BRIDGE_CMD", raising=False)
    rc = run_cli(
        "run", "--task", "clibin", "--registry", workspace["registry"],
        "--train", workspace["clibin.train"], "--test", workspace["clibin.test"],
        "--method", "majority", "--seeds", "1", "--backend", "bridge",
    )
    assert rc == 4
    assert "backend error" in capsys.readouterr().err


def test_run_bridge_with_an_unlaunchable_command(workspace, capsys):
    rc = run_cli(
        "run", "--task", "clibin", "--registry", workspace["registry"],
        "--train", workspace["clibin.train"], "--test", workspace["clibin.test"],
        "--method", "majority", "--seeds", "1",
        "--backend", "bridge", "--bridge-cmd", "/does/not/exist-xyz",
    )
    assert rc == 4
    assert "cannot launch bridge" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def test_sweep_writes_a_transfer_table(workspace, tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    rc = run_cli(
        "sweep", "--data-dir", str(workspace["root"]),
        "--sources", "clibin,clialt", "--targets", "clibin,clialt",
        "--k", "4", "--seeds", "1", "--registry", workspace["registry"],
        "--out", str(out), *FAST_FLAGS,
    )
    assert rc == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "source,clibin,clialt"
    assert lines[1].startswith("clibin,,")  # no diagonal cell
    assert len(lines) == 3


def test_sweep_prints_to_stdout_without_out(workspace, capsys):
    rc = run_cli(
        "sweep", "--data-dir", str(workspace["root"]),
        "--sources", "clibin", "--targets", "clialt",
        "--k", "4", "--seeds", "1", "--registry", workspace["registry"], *FAST_FLAGS,
    )
    assert rc == 0
    assert capsys.readouterr().out.startswith("source,clialt\n")


# ---------------------------------------------------------------------------
# ablate
# ---------------------------------------------------------------------------


def test_ablate_with_candidate_file(workspace, tmp_path, capsys):
    candidates = tmp_path / "cands.json"
    candidates.write_text(json.dumps([
        {"0": "It was zorp .", "1": "It was blick ."},
        ["It was something", "It was something"],
    ]))
    out = tmp_path / "ablate.csv"
    rc = run_cli(
        "ablate", "--task", "clibin", "--registry", workspace["registry"],
        "--train", workspace["clibin.train"], "--test", workspace["clibin.test"],
        "--k", "3", "--seeds", "1", "--candidates", str(candidates),
        "--out", str(out), *FAST_FLAGS,
    )
    assert rc == 0
    printed = capsys.readouterr().out.strip().split("\n")
    assert len(printed) == 2
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "descriptions,mean,std"
    assert lines[1].startswith("It was zorp . | It was blick .,")


def test_ablate_rejects_bad_candidate_files(workspace, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"not": "a list"}')
    rc = run_cli(
        "ablate", "--task", "clibin", "--registry", workspace["registry"],
        "--train", workspace["clibin.train"], "--test", workspace["clibin.test"],
        "--k", "3", "--seeds", "1", "--candidates", str(bad), *FAST_FLAGS,
    )
    assert rc == 3
    assert "expected a JSON list" in capsys.readouterr().err

    notjson = tmp_path / "notjson.json"
    notjson.write_text("{nope")
    rc = run_cli(
        "ablate", "--task", "clibin", "--registry", workspace["registry"],
        "--train", workspace["clibin.train"], "--test", workspace["clibin.test"],
        "--k", "3", "--seeds", "1", "--candidates", str(notjson), *FAST_FLAGS,
    )
    assert rc == 3
    assert "invalid JSON" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# score
# ---------------------------------------------------------------------------


def _write_predictions(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def test_score_accuracy(tmp_path, capsys):
    path = tmp_path / "preds.jsonl"
    _write_predictions(path, [
        {"uid": "a", "predicted": 1, "gold": 1},
        {"uid": "b", "predicted": 0, "gold": 1},
        {"uid": "c", "predicted": 0, "gold": 0},
        {"uid": "d", "predicted": 0, "gold": 0},
    ])
    rc = run_cli("score", "--metric", "accuracy", "--predictions", str(path))
    assert rc == 0
    assert capsys.readouterr().out.strip() == "75.0"


def test_score_macro_f1_needs_n_classes(tmp_path, capsys):
    path = tmp_path / "preds.jsonl"
    _write_predictions(path, [{"uid": "a", "predicted": 1, "gold": 1}])
    rc = run_cli("score", "--metric", "macro_f1", "--predictions", str(path))
    assert rc == 3
    rc = run_cli(
        "score", "--metric", "macro_f1", "--predictions", str(path), "--n-classes", "2"
    )
    assert rc == 0


def test_score_rejects_malformed_rows(tmp_path, capsys):
    path = tmp_path / "preds.jsonl"
    path.write_text('{"uid": "a"}\n')
    rc = run_cli("score", "--metric", "accuracy", "--predictions", str(path))
    assert rc == 3
    assert ":1: expected predicted and gold" in capsys.readouterr().err

    path.write_text("{nope\n")
    rc = run_cli("score", "--metric", "accuracy", "--predictions", str(path))
    assert rc == 3
    assert "invalid JSON" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# the installed console script
# ---------------------------------------------------------------------------


def test_module_entry_point_runs_in_a_subprocess(workspace, tmp_path):
    out = tmp_path / "sub.jsonl"
    proc = subprocess.run(
        [
            sys.executable, "-m", "entailkit.cli",
            "reformulate", "--task", "clibin", "--registry", workspace["registry"],
            "--input", workspace["clibin.train"], "--output", str(out),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "wrote 40 instances" in proc.stdout
    assert out.exists()
