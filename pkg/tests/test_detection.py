import io
import json

import numpy as np
import pytest

from graphsentry.attacks import plan_succeeds
from graphsentry.attributes import ATTRIBUTE_NAMES, attribute_vector
from graphsentry.detection import (
    ADVERSARIAL,
    CLEAN,
    DetectionDataset,
    DetectionSample,
    build_detection_dataset,
    evaluate_detector,
    histogram_rows,
    rank_attributes,
    read_samples_csv,
    recognize_attack,
    samples_to_arrays,
    top_k_sweep,
    write_histograms_csv,
    write_importances_csv,
    write_metrics_csv_row,
    write_samples_csv,
    _paired_split,
)
from graphsentry.metrics import relative_gain
from oracles import make_graph, random_graph


def separable_samples(n_targets=40, signal=9, gap=5.0, seed=0,
                      dataset="synthetic", attack="nettack"):
    """Clean/adversarial pairs split cleanly by one attribute."""
    rng = np.random.default_rng(seed)
    samples = []
    for t in range(n_targets):
        base = rng.normal(0.0, 1.0, size=len(ATTRIBUTE_NAMES))
        clean = base.copy()
        clean[signal] = rng.normal(0.0, 0.1)
        adv = base.copy()
        adv[signal] = rng.normal(gap, 0.1)
        samples.append(DetectionSample(clean, CLEAN, t, dataset))
        samples.append(DetectionSample(adv, ADVERSARIAL, t, dataset, attack))
    return samples


def recognition_samples(per_class=15, seed=0):
    """Three attack signatures, each marked on its own attribute."""
    rng = np.random.default_rng(seed)
    samples = []
    for c, name in enumerate(["alpha", "beta", "gamma"]):
        for t in range(per_class):
            vec = rng.normal(0.0, 0.5, size=len(ATTRIBUTE_NAMES))
            vec[c] += 4.0
            samples.append(DetectionSample(vec, ADVERSARIAL, t, f"d{c}", name))
    return samples


class TestDetectionSample:
    def test_vector_length_validated(self):
        with pytest.raises(ValueError, match="entries"):
            DetectionSample(np.zeros(5), CLEAN, 0, "d")

    def test_label_validated(self):
        with pytest.raises(ValueError, match="label"):
            DetectionSample(np.zeros(17), 2, 0, "d")

    def test_adversarial_needs_attack_name(self):
        with pytest.raises(ValueError, match="attack name"):
            DetectionSample(np.zeros(17), ADVERSARIAL, 0, "d")
        DetectionSample(np.zeros(17), ADVERSARIAL, 0, "d", "nettack")

    def test_clean_needs_no_attack_name(self):
        s = DetectionSample([0.0] * 17, CLEAN, 3, "d")
        assert s.attack_name is None
        assert s.vector.dtype == np.float64


class TestBuildDataset:
    def test_pairing_and_counts(self):
        g = random_graph(30, 0.2, seed=4)
        ds = build_detection_dataset(g, "nettack", 10, seed=0, dataset_name="toy")
        assert ds.n_sampled == 10
        assert len(ds.plans) == len(ds.successes) == 10
        assert ds.n_success == sum(ds.successes)
        assert len(ds.samples) == 2 * ds.n_success
        assert ds.success_rate == ds.n_success / 10
        for clean, adv in zip(ds.samples[0::2], ds.samples[1::2]):
            assert clean.target == adv.target
            assert (clean.label, adv.label) == (CLEAN, ADVERSARIAL)
            assert clean.dataset_name == adv.dataset_name == "toy"
            assert adv.attack_name == "nettack"
            assert np.array_equal(clean.vector, attribute_vector(g, clean.target))
            attacked = g.apply_flips(
                next(p for p in ds.plans if p.target == adv.target).flips)
            assert np.array_equal(adv.vector, attribute_vector(attacked, adv.target))

    def test_success_means_argmax_change(self):
        g = random_graph(25, 0.25, seed=9)
        ds = build_detection_dataset(g, "meta", 12, seed=1)
        for plan, ok in zip(ds.plans, ds.successes):
            if ok:
                assert plan.flips and plan_succeeds(g, plan)
            else:
                assert not plan.flips or not plan_succeeds(g, plan)

    def test_target_count_caps_at_node_count(self):
        g = random_graph(12, 0.3, seed=2)
        ds = build_detection_dataset(g, "nettack", 999, seed=0)
        assert ds.n_sampled == 12
        assert sorted(p.target for p in ds.plans) == list(range(12))

    def test_deterministic(self):
        g = random_graph(20, 0.25, seed=3)
        a = build_detection_dataset(g, "gradargmax", 8, seed=5)
        b = build_detection_dataset(g, "gradargmax", 8, seed=5)
        assert a.plans == b.plans
        assert a.successes == b.successes
        assert all(np.array_equal(x.vector, y.vector)
                   for x, y in zip(a.samples, b.samples))

    def test_zero_successes_returned_not_raised(self):
        # one shared class: no wrong class can ever take over the argmax
        g = make_graph(8, [(i, i + 1) for i in range(7)],
                       labels=[0] * 8, class_count=2)
        ds = build_detection_dataset(g, "nettack", 8, seed=0)
        assert ds.n_success == 0
        assert ds.samples == []
        assert ds.success_rate == 0.0

    def test_empty_plans_count_as_failures(self):
        g = make_graph(6, [], labels=[0, 1, 0, 1, 0, 1])
        ds = build_detection_dataset(g, "gradargmax", 6, seed=0)
        assert ds.n_success == 0
        assert all(not p.flips for p in ds.plans)

    def test_n_targets_validated(self):
        g = random_graph(10, 0.3, seed=0)
        with pytest.raises(ValueError, match="n_targets"):
            build_detection_dataset(g, "nettack", 0, seed=0)

    def test_empty_dataset_success_rate(self):
        assert DetectionDataset([], [], [], 0, 0).success_rate == 0.0


class TestPairedSplit:
    def test_targets_never_straddle_folds(self):
        samples = separable_samples(n_targets=10)
        train, test = _paired_split(samples, split_seed=0)
        assert sorted(np.concatenate([train, test]).tolist()) == list(range(20))
        train_targets = {samples[i].target for i in train}
        test_targets = {samples[i].target for i in test}
        assert not train_targets & test_targets
        assert len(test_targets) == 2  # 20% of 10 groups

    def test_seed_changes_fold(self):
        samples = separable_samples(n_targets=25)
        folds = {tuple(_paired_split(samples, split_seed=s)[1].tolist())
                 for s in range(8)}
        assert len(folds) > 1
        again = _paired_split(samples, split_seed=3)
        assert np.array_equal(again[1], _paired_split(samples, split_seed=3)[1])

    def test_too_few_groups_rejected(self):
        samples = separable_samples(n_targets=1)
        with pytest.raises(ValueError, match="too few targets"):
            _paired_split(samples, split_seed=0)


class TestRankAttributes:
    def test_descending_with_stable_ties(self):
        assert rank_attributes(np.array([0.5, 0.7, 0.5])).tolist() == [1, 0, 2]
        assert rank_attributes(np.array([0.0, 0.0, 0.0])).tolist() == [0, 1, 2]


class TestEvaluateDetector:
    def test_separable_data_is_solved(self):
        samples = separable_samples(signal=9)
        report = evaluate_detector(samples, k=4, n_trees=30)
        assert report.auc == 1.0
        assert report.auc_all == 1.0
        assert report.top_k_names[0] == ATTRIBUTE_NAMES[9]
        assert int(np.argmax(report.importances)) == 9
        assert report.n_train + report.n_test == len(samples)
        assert report.k == 4

    def test_gains_match_metric_definition(self):
        samples = separable_samples(signal=2, gap=1.2, seed=7)
        report = evaluate_detector(samples, k=3, n_trees=30)
        assert report.gains["auc"] == pytest.approx(
            relative_gain(report.auc_all, report.auc))
        assert report.gains["acc"] == pytest.approx(
            relative_gain(report.acc_all, report.acc))

    def test_full_width_model_equals_baseline(self):
        samples = separable_samples(signal=5, gap=1.0, seed=3)
        report = evaluate_detector(samples, k=len(ATTRIBUTE_NAMES), n_trees=30)
        assert report.auc == report.auc_all
        assert report.acc == report.acc_all
        assert report.precision == report.precision_all

    def test_to_dict_is_json_ready(self):
        report = evaluate_detector(separable_samples(), k=4, n_trees=20)
        payload = report.to_dict()
        json.dumps(payload)
        assert set(payload["importances"]) == set(ATTRIBUTE_NAMES)
        assert abs(sum(payload["importances"].values()) - 1.0) < 1e-9

    def test_deterministic(self):
        samples = separable_samples(seed=11)
        a = evaluate_detector(samples, k=4, split_seed=2, n_trees=20)
        b = evaluate_detector(samples, k=4, split_seed=2, n_trees=20)
        assert a.to_dict() == b.to_dict()

    def test_k_validated(self):
        samples = separable_samples()
        with pytest.raises(ValueError, match="k"):
            evaluate_detector(samples, k=0)
        with pytest.raises(ValueError, match="at most"):
            evaluate_detector(samples, k=len(ATTRIBUTE_NAMES) + 1)

    def test_needs_ten_of_each_label(self):
        with pytest.raises(ValueError, match="at least 10"):
            evaluate_detector(separable_samples(n_targets=9), k=4)
        with pytest.raises(ValueError, match="at least 10"):
            evaluate_detector([], k=4)


class TestTopKSweep:
    def test_sweep_rows(self):
        samples = separable_samples()
        rows = top_k_sweep(samples, [1, 4, 17], seed=0, n_trees=20)
        assert [r["k"] for r in rows] == [1, 4, 17]
        assert all(r["auc"] == 1.0 for r in rows)

    def test_sweep_agrees_with_single_evaluation(self):
        samples = separable_samples(gap=1.0, seed=5)
        rows = top_k_sweep(samples, [17], seed=4, n_trees=25)
        report = evaluate_detector(samples, k=17, split_seed=4, n_trees=25)
        assert rows[0]["auc"] == report.auc

    def test_k_values_validated(self):
        samples = separable_samples()
        with pytest.raises(ValueError, match="non-empty"):
            top_k_sweep(samples, [])
        with pytest.raises(ValueError, match="at most"):
            top_k_sweep(samples, [40])


class TestRecognition:
    def test_separable_classes_recognized(self):
        report = recognize_attack(recognition_samples(), n_repeats=4, n_trees=30)
        assert report.classes == ["alpha", "beta", "gamma"]
        assert report.auc_mean > 0.95
        assert len(report.per_seed_auc) == 4
        assert set(report.per_class_auc) == {"alpha", "beta", "gamma"}
        assert report.confusion.shape == (3, 3)
        # 20% of 15 per class per repeat land in the test fold
        assert report.confusion.sum() == 3 * 3 * 4
        assert np.trace(report.confusion) > report.confusion.sum() / 2

    def test_to_dict_is_json_ready(self):
        report = recognize_attack(recognition_samples(per_class=6),
                                  n_repeats=2, n_trees=10)
        json.dumps(report.to_dict())

    def test_deterministic(self):
        samples = recognition_samples(per_class=8)
        a = recognize_attack(samples, split_seed=1, n_repeats=3, n_trees=15)
        b = recognize_attack(samples, split_seed=1, n_repeats=3, n_trees=15)
        assert a.to_dict() == b.to_dict()

    def test_rejects_clean_samples(self):
        bad = recognition_samples(per_class=6) + [
            DetectionSample(np.zeros(17), CLEAN, 0, "d")]
        with pytest.raises(ValueError, match="adversarial samples only"):
            recognize_attack(bad)

    def test_needs_two_classes(self):
        one = [s for s in recognition_samples() if s.attack_name == "alpha"]
        with pytest.raises(ValueError, match="at least 2"):
            recognize_attack(one)

    def test_needs_five_per_class(self):
        with pytest.raises(ValueError, match="at least 5"):
            recognize_attack(recognition_samples(per_class=4))


class TestCsvEmission:
    def test_samples_round_trip_exactly(self):
        samples = separable_samples(n_targets=6, seed=2)
        buf = io.StringIO()
        write_samples_csv(buf, samples)
        X, y, attacks = read_samples_csv(io.StringIO(buf.getvalue()))
        expected_X, expected_y = samples_to_arrays(samples)
        assert np.array_equal(X, expected_X)  # repr round-trips exactly
        assert np.array_equal(y, expected_y)
        assert attacks == [s.attack_name or "" for s in samples]

    def test_samples_header(self):
        buf = io.StringIO()
        write_samples_csv(buf, separable_samples(n_targets=1))
        header = buf.getvalue().splitlines()[0].split(",")
        assert header == ["dataset", "attack", "target", "label", *ATTRIBUTE_NAMES]

    def test_read_validates_structure(self):
        with pytest.raises(ValueError, match="empty"):
            read_samples_csv(io.StringIO(""))
        with pytest.raises(ValueError, match="missing required column"):
            read_samples_csv(io.StringIO("a,b\n1,2\n"))
        header = ",".join(["dataset", "attack", "target", "label", *ATTRIBUTE_NAMES])
        with pytest.raises(ValueError, match="no data rows"):
            read_samples_csv(io.StringIO(header + "\n"))

    def test_importances_written_in_rank_order(self):
        imp = np.zeros(17)
        imp[9], imp[0], imp[3] = 0.5, 0.3, 0.2
        buf = io.StringIO()
        write_importances_csv(buf, imp)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "attribute,importance"
        names = [line.split(",")[0] for line in lines[1:]]
        assert names[:3] == [ATTRIBUTE_NAMES[9], ATTRIBUTE_NAMES[0], ATTRIBUTE_NAMES[3]]
        assert float(lines[1].split(",")[1]) == 0.5

    def test_metrics_row(self):
        report = evaluate_detector(separable_samples(), k=4, n_trees=20)
        buf = io.StringIO()
        write_metrics_csv_row(buf, "toy", "nettack", report, header=True)
        lines = buf.getvalue().splitlines()
        assert lines[0].startswith("dataset,attack,k,acc,auc,precision")
        cells = lines[1].split(",")
        assert cells[:3] == ["toy", "nettack", "4"]
        assert float(cells[4]) == report.auc

    def test_histograms_cover_all_attributes(self):
        samples = separable_samples(n_targets=12)
        rows = histogram_rows(samples, bins=10)
        assert len(rows) == 17 * 2 * 10
        by_key: dict[tuple, int] = {}
        for name, label, _, left, right, count in rows:
            assert right > left
            by_key[(name, label)] = by_key.get((name, label), 0) + count
        for name in ATTRIBUTE_NAMES:
            assert by_key[(name, CLEAN)] == 12
            assert by_key[(name, ADVERSARIAL)] == 12

    def test_histogram_constant_attribute(self):
        vecs = [np.full(17, 2.0) for _ in range(4)]
        samples = [DetectionSample(v, CLEAN, i, "d") for i, v in enumerate(vecs)]
        samples += [DetectionSample(v, ADVERSARIAL, i, "d", "meta")
                    for i, v in enumerate(vecs)]
        rows = histogram_rows(samples, bins=5)
        first_bin = [r for r in rows if r[2] == 0]
        assert all(r[5] == 4 for r in first_bin)

    def test_histograms_csv_shape(self):
        buf = io.StringIO()
        write_histograms_csv(buf, separable_samples(n_targets=3), bins=4)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "attribute,label,bin,bin_left,bin_right,count"
        assert len(lines) == 1 + 17 * 2 * 4

    def test_histogram_requires_samples(self):
        with pytest.raises(ValueError, match="no samples"):
            histogram_rows([])
