"""Mapping labeled records onto entailment training and inference forms."""

from __future__ import annotations

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from entailkit import (
    DataError,
    Dataset,
    EntailmentInstance,
    Metric,
    Record,
    Rng,
    TaskKind,
    TaskSpec,
    ValidationError,
    collapse_nli,
    default_registry,
    dump_instances,
    expand_for_inference,
    gen_synthetic,
    gen_synthetic_nli,
    load_instances,
    make_task,
    predict_multiclass,
    reformulate_binary,
    reformulate_entailment,
    reformulate_multiclass,
    reformulate_native,
    reformulate_regression,
)
from entailkit.reformulate import instance_from_obj, instance_to_obj, validate_instances

from .oracles import RefRng


def binary_dataset(n_per_class: int = 8, seed: int = 3) -> Dataset:
    return gen_synthetic(make_task("bin", n_classes=2), "train", n_per_class, seed)


def multi_dataset(n_classes: int = 4, n_per_class: int = 8, seed: int = 3) -> Dataset:
    return gen_synthetic(
        make_task(f"multi{n_classes}", n_classes=n_classes), "train", n_per_class, seed
    )


# ---------------------------------------------------------------------------
# Binary single-sentence form
# ---------------------------------------------------------------------------


def test_binary_emits_one_instance_per_record():
    ds = binary_dataset(8)
    instances, plan = reformulate_binary(ds)
    assert len(instances) == len(ds.records) == 16
    assert plan.mode == "binary" and plan.head_size == 2
    positive_desc = ds.task.descriptions[1]
    for rec, inst in zip(ds.records, instances):
        assert inst.uid == f"{rec.uid}#bin"
        assert inst.premise == rec.text_a
        assert inst.hypothesis == positive_desc
        assert inst.target == (1.0 if rec.label == 1 else 0.0)
        assert inst.source_class == rec.label
        assert inst.provenance == "original"


def test_binary_uses_only_the_positive_description():
    ds = binary_dataset()
    instances, _ = reformulate_binary(ds)
    assert {i.hypothesis for i in instances} == {ds.task.descriptions[1]}


def test_binary_rejects_wrong_task_shapes():
    with pytest.raises(DataError):
        reformulate_binary(multi_dataset(3))
    pair = gen_synthetic(make_task("p", kind="sentence_pair"), "train", 4, 1)
    with pytest.raises(DataError):
        reformulate_binary(pair)


def test_binary_rejects_unlabeled_split():
    ds = binary_dataset()
    unlabeled = Dataset(
        task=ds.task,
        split_name="test",
        records=tuple(
            Record(uid=r.uid, text_a=r.text_a, label=None) for r in ds.records
        ),
        labeled=False,
    )
    with pytest.raises(DataError, match="unlabeled"):
        reformulate_binary(unlabeled)


def test_binary_rejects_empty_positive_description():
    task = TaskSpec(
        name="mute",
        kind=TaskKind.SINGLE_SENTENCE,
        labels=((0, "a"), (1, "b")),
        descriptions={0: "It was a", 1: ""},
        metric=Metric.ACCURACY,
    )
    ds = Dataset(
        task=task,
        split_name="train",
        records=(Record(uid="u", text_a="hello", label=1),),
    )
    with pytest.raises(DataError, match="description"):
        reformulate_binary(ds)


# ---------------------------------------------------------------------------
# Multiclass form: one entailing and one sampled non-entailing pair each
# ---------------------------------------------------------------------------


def test_multiclass_counts_and_balance():
    ds = multi_dataset(n_classes=4, n_per_class=8)
    instances, plan = reformulate_multiclass(ds, Rng(5))
    assert len(instances) == 2 * 8 * 4 == 64
    assert sum(1 for i in instances if i.target == 1.0) == 32
    assert sum(1 for i in instances if i.target == 0.0) == 32
    assert plan.mode == "multiclass" and plan.head_size == 2


def test_multiclass_positive_pairs_use_true_description():
    ds = multi_dataset(3, 4)
    instances, _ = reformulate_multiclass(ds, Rng(5))
    for inst in instances:
        if inst.target == 1.0:
            assert inst.uid.endswith("#pos")
            assert inst.hypothesis == ds.task.descriptions[inst.source_class]
        else:
            assert inst.uid.endswith("#neg")
            assert inst.hypothesis != ds.task.descriptions[inst.source_class]
            assert inst.hypothesis in ds.task.descriptions.values()


def test_multiclass_negative_draws_follow_the_stream():
    ds = multi_dataset(n_classes=4, n_per_class=3)
    seed = 17
    instances, _ = reformulate_multiclass(ds, Rng(seed))
    # Reference: classes ascending; positives consume no draws; each
    # negative consumes one bounded draw below n_classes - 1.
    ref = RefRng(seed)
    expected_wrong = {}
    groups: dict[int, list] = {}
    for rec in ds.records:
        groups.setdefault(rec.label, []).append(rec)
    for class_id in range(4):
        others = [c for c in range(4) if c != class_id]
        for rec in groups.get(class_id, []):
            expected_wrong[f"{rec.uid}#neg"] = others[ref.randbelow(3)]
    negatives = {i.uid: i for i in instances if i.uid.endswith("#neg")}
    assert negatives.keys() == expected_wrong.keys()
    for uid, wrong_class in expected_wrong.items():
        assert negatives[uid].hypothesis == ds.task.descriptions[wrong_class]


def test_multiclass_rejects_binary_and_empty_descriptions():
    with pytest.raises(DataError):
        reformulate_multiclass(binary_dataset(), Rng(1))
    task = TaskSpec(
        name="holes",
        kind=TaskKind.SINGLE_SENTENCE,
        labels=((0, "a"), (1, "b"), (2, "c")),
        descriptions={0: "x", 1: "", 2: "z"},
        metric=Metric.ACCURACY,
    )
    ds = Dataset(
        task=task,
        split_name="train",
        records=(Record(uid="u", text_a="hello", label=0),),
    )
    with pytest.raises(DataError, match="empty description"):
        reformulate_multiclass(ds, Rng(1))


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def test_dispatch_binary_needs_no_rng():
    ds = binary_dataset()
    instances, plan = reformulate_entailment(ds)
    assert plan.mode == "binary"
    assert instances == reformulate_binary(ds)[0]


def test_dispatch_multiclass_requires_rng():
    ds = multi_dataset(3)
    with pytest.raises(DataError, match="rng"):
        reformulate_entailment(ds)
    instances, plan = reformulate_entailment(ds, Rng(9))
    assert plan.mode == "multiclass"
    assert instances == reformulate_multiclass(ds, Rng(9))[0]


def test_dispatch_pair_tasks_stay_native():
    ds = gen_synthetic(make_task("pairs", kind="sentence_pair", n_classes=2), "train", 5, 2)
    instances, plan = reformulate_entailment(ds)
    assert plan.mode == "native" and plan.head_size == 2
    assert instances == reformulate_native(ds)[0]


def test_dispatch_regression():
    task = make_task("sc", kind="regression", metric="pearson", score_range=(0.0, 5.0))
    ds = gen_synthetic(task, "train", 10, 4)
    instances, plan = reformulate_entailment(ds)
    assert plan.mode == "regression" and plan.head_size == 1
    assert instances == reformulate_regression(ds)[0]


# ---------------------------------------------------------------------------
# Native form
# ---------------------------------------------------------------------------


def test_native_keeps_class_targets_and_pair_texts():
    ds = gen_synthetic(make_task("nat", kind="sentence_pair", n_classes=3), "train", 4, 6)
    instances, plan = reformulate_native(ds)
    assert plan.head_size == 3
    for rec, inst in zip(ds.records, instances):
        assert inst.uid == f"{rec.uid}#nat"
        assert (inst.premise, inst.hypothesis) == (rec.text_a, rec.text_b)
        assert inst.target == float(rec.label)


def test_native_single_sentence_has_empty_hypothesis():
    ds = binary_dataset(4)
    instances, plan = reformulate_native(ds)
    assert plan.head_size == 2
    assert all(i.hypothesis == "" for i in instances)


def test_native_rejects_pair_records_missing_second_text():
    task = make_task("badpair", kind="sentence_pair", n_classes=2)
    ds = Dataset(
        task=task,
        split_name="train",
        records=(Record(uid="u1", text_a="only one side", label=0),),
    )
    with pytest.raises(DataError, match="u1"):
        reformulate_native(ds)


def test_native_rejects_regression():
    task = make_task("r", kind="regression", metric="pearson", score_range=(0, 5))
    ds = gen_synthetic(task, "train", 4, 1)
    with pytest.raises(DataError):
        reformulate_native(ds)


# ---------------------------------------------------------------------------
# Regression form
# ---------------------------------------------------------------------------


def test_regression_maps_scores_linearly():
    task = make_task("lin", kind="regression", metric="pearson", score_range=(0.0, 5.0))
    recs = tuple(
        Record(uid=f"u{i}", text_a="a text", text_b="b text", label=score)
        for i, score in enumerate((0.0, 1.25, 2.5, 5.0))
    )
    ds = Dataset(task=task, split_name="train", records=recs)
    instances, plan = reformulate_regression(ds)
    assert plan.head_size == 1
    assert [i.target for i in instances] == [0.0, 0.25, 0.5, 1.0]
    assert all(i.uid.endswith("#reg") for i in instances)
    assert all(i.source_class is None for i in instances)
    assert all(i.hypothesis == "b text" for i in instances)


def test_regression_rejects_out_of_range_scores():
    task = make_task("oor", kind="regression", metric="pearson", score_range=(0.0, 5.0))
    ds = Dataset(
        task=task,
        split_name="train",
        records=(Record(uid="u", text_a="a", text_b="b", label=6.0),),
    )
    with pytest.raises(DataError, match="outside"):
        reformulate_regression(ds)


# ---------------------------------------------------------------------------
# Entailment-corpus collapse
# ---------------------------------------------------------------------------


def test_collapse_nli_binarizes_on_the_entailment_class():
    ds = gen_synthetic_nli("train", 5, 2)
    instances, plan = collapse_nli(ds)
    assert plan.mode == "binary" and plan.head_size == 2
    assert len(instances) == 15
    for rec, inst in zip(ds.records, instances):
        assert inst.uid == f"{rec.uid}#nli"
        assert inst.target == (1.0 if rec.label == 0 else 0.0)
        assert inst.source_class == rec.label


def test_collapse_nli_requires_an_entailment_class():
    ds = gen_synthetic(make_task("p2", kind="sentence_pair", n_classes=2), "train", 3, 1)
    with pytest.raises(DataError, match="entailment"):
        collapse_nli(ds)
    with pytest.raises(DataError):
        collapse_nli(binary_dataset())


# ---------------------------------------------------------------------------
# Inference expansion and argmax
# ---------------------------------------------------------------------------


def test_expand_for_inference_is_record_major():
    ds = multi_dataset(n_classes=4, n_per_class=3)
    pairs = expand_for_inference(ds)
    n = ds.task.n_classes
    assert len(pairs) == len(ds.records) * n
    for i, rec in enumerate(ds.records):
        chunk = pairs[i * n : (i + 1) * n]
        assert chunk == [(rec.text_a, ds.task.descriptions[c]) for c in range(n)]


def test_expand_for_inference_emits_exactly_n_classes_per_record():
    ds = binary_dataset(5)
    pairs = expand_for_inference(ds)
    assert len(pairs) == len(ds.records) * 2


def test_expand_for_inference_rejects_pair_tasks_and_missing_descriptions():
    pair = gen_synthetic(make_task("p", kind="sentence_pair"), "train", 3, 1)
    with pytest.raises(DataError):
        expand_for_inference(pair)
    task = TaskSpec(
        name="quiet",
        kind=TaskKind.SINGLE_SENTENCE,
        labels=((0, "a"), (1, "b")),
        descriptions={0: "said", 1: ""},
        metric=Metric.ACCURACY,
    )
    ds = Dataset(
        task=task,
        split_name="test",
        records=(Record(uid="u", text_a="hi", label=0),),
    )
    with pytest.raises(DataError, match="description"):
        expand_for_inference(ds)


def test_predict_multiclass_brute_forced_tie_breaks():
    # Every permutation of four distinct scores must pick the position
    # holding the largest one.
    scores = (0.1, 0.2, 0.3, 0.4)
    for perm in itertools.permutations(scores):
        assert predict_multiclass([list(perm)]) == [perm.index(max(perm))]
    # Ties go to the lowest class index, whatever the pattern.
    assert predict_multiclass([[0.5, 0.5, 0.5, 0.5]]) == [0]
    assert predict_multiclass([[0.1, 0.9, 0.9, 0.2]]) == [1]
    assert predict_multiclass([[0.3, 0.1, 0.3]]) == [0]


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=8))
def test_predict_multiclass_picks_a_maximal_index(row):
    [choice] = predict_multiclass([row])
    assert row[choice] == max(row)
    assert all(row[j] < row[choice] for j in range(choice))


def test_predict_multiclass_rejects_empty_rows():
    with pytest.raises(DataError):
        predict_multiclass([[]])


# ---------------------------------------------------------------------------
# Instance validation and serialization
# ---------------------------------------------------------------------------


def make_instance(**overrides) -> EntailmentInstance:
    base = dict(
        uid="u#bin",
        premise="some text",
        hypothesis="It was great",
        target=1.0,
        source_class=1,
        provenance="original",
    )
    base.update(overrides)
    return EntailmentInstance(**base)


def test_validate_instances_entailment_targets():
    validate_instances([make_instance(target=0.25)], head_size=2)
    with pytest.raises(ValidationError):
        validate_instances([make_instance(target=1.5)], head_size=2)
    with pytest.raises(ValidationError):
        validate_instances([make_instance(target=-0.1)], head_size=1)


def test_validate_instances_class_targets():
    validate_instances([make_instance(target=2.0)], head_size=3)
    with pytest.raises(ValidationError):
        validate_instances([make_instance(target=3.0)], head_size=3)
    with pytest.raises(ValidationError):
        validate_instances([make_instance(target=0.5)], head_size=3)


def test_validate_instances_structure():
    with pytest.raises(ValidationError):
        validate_instances([make_instance(premise="")])
    with pytest.raises(ValidationError):
        validate_instances([make_instance(hypothesis="")])
    validate_instances([make_instance(hypothesis="")], allow_empty_hypothesis=True)
    with pytest.raises(ValidationError):
        validate_instances([make_instance(provenance="mystery")])


def test_instance_obj_round_trip_requires_exact_fields():
    inst = make_instance()
    obj = instance_to_obj(inst)
    assert set(obj) == {
        "uid", "premise", "hypothesis", "target", "source_class", "provenance",
    }
    assert instance_from_obj(obj) == inst
    extra = dict(obj, bogus=1)
    with pytest.raises(DataError, match="expected fields"):
        instance_from_obj(extra)
    missing = dict(obj)
    del missing["target"]
    with pytest.raises(DataError, match="expected fields"):
        instance_from_obj(missing)
    with pytest.raises(DataError, match="provenance"):
        instance_from_obj(dict(obj, provenance="hand_written"))


_safe_text = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=30
)


@given(
    st.lists(
        st.tuples(
            _safe_text,
            _safe_text,
            st.floats(min_value=0.0, max_value=1.0),
            st.one_of(st.none(), st.integers(min_value=0, max_value=5)),
        ),
        min_size=1,
        max_size=10,
    )
)
def test_instance_file_round_trip(rows):
    import tempfile
    from pathlib import Path

    instances = [
        EntailmentInstance(
            uid=f"u{i}",
            premise=premise,
            hypothesis=hypothesis,
            target=target,
            source_class=source_class,
            provenance="original",
        )
        for i, (premise, hypothesis, target, source_class) in enumerate(rows)
    ]
    with tempfile.TemporaryDirectory() as d:
        path = Path(d) / "instances.jsonl"
        dump_instances(instances, path)
        assert load_instances(path) == instances
        first = path.read_bytes()
        dump_instances(instances, path)
        assert path.read_bytes() == first


def test_load_instances_errors_name_the_line(tmp_path):
    path = tmp_path / "x.jsonl"
    path.write_text('{"bad": 1}\n')
    with pytest.raises(DataError, match="x.jsonl:1"):
        load_instances(path)


def test_builtin_binary_tasks_reformulate_cleanly():
    # Every builtin binary single-sentence task has a usable positive
    # description for the single-pass training form.
    reg = default_registry()
    for name in ("sst2", "mr", "cr", "mpqa", "subj", "imdb", "os", "cola"):
        spec = reg.get(name)
        ds = Dataset(
            task=spec,
            split_name="train",
            records=(
                Record(uid="a", text_a="first text", label=0),
                Record(uid="b", text_a="second text", label=1),
            ),
        )
        instances, plan = reformulate_entailment(ds)
        assert plan.mode == "binary"
        assert instances[0].hypothesis == spec.descriptions[1]
