"""Detection datasets, detector evaluation, top-k sweeps, and recognition."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .attacks import AttackPlan, plan_succeeds, run_attack
from .attributes import ATTRIBUTE_NAMES, attribute_vector
from .forest import GiniForestClassifier
from .graph import Graph
from .metrics import auc_score, precision_score, relative_gain
from .validation import check_positive_int

CLEAN, ADVERSARIAL = 0, 1
N_ATTRIBUTES = len(ATTRIBUTE_NAMES)


class EmptyResultError(RuntimeError):
    """A requested computation produced no usable results."""


@dataclass(frozen=True)
class DetectionSample:
    """One attribute vector with its provenance and clean/adversarial label."""

    vector: np.ndarray
    label: int
    target: int
    dataset_name: str
    attack_name: str | None = None

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=np.float64)
        if vec.shape != (N_ATTRIBUTES,):
            raise ValueError(f"vector must have {N_ATTRIBUTES} entries, got {vec.shape}")
        object.__setattr__(self, "vector", vec)
        if self.label not in (CLEAN, ADVERSARIAL):
            raise ValueError(f"label must be 0 or 1, got {self.label}")
        if self.label == ADVERSARIAL and not self.attack_name:
            raise ValueError("adversarial samples must carry an attack name")


@dataclass
class DetectionDataset:
    """Paired clean/adversarial samples plus the attack log that produced them."""

    samples: list[DetectionSample]
    plans: list[AttackPlan]
    successes: list[bool]
    n_sampled: int
    n_success: int

    @property
    def success_rate(self) -> float:
        return self.n_success / self.n_sampled if self.n_sampled else 0.0


def build_detection_dataset(g: Graph, attack_name: str, n_targets: int, seed: int,
                            dataset_name: str = "graph",
                            budget: int | None = None) -> DetectionDataset:
    """Attack seeded uniform targets; keep pairs for targets that were fooled.

    Successful means the surrogate argmax of the target changes under the
    plan. Each success contributes two samples sharing the target id: the
    clean-graph vector (label 0) and the perturbed-graph vector (label 1).
    A zero-success result is returned (not raised) with an empty sample list.
    n_targets caps at the node count, since targets are drawn without
    replacement.
    """
    n_targets = check_positive_int(n_targets, "n_targets")
    n_targets = min(n_targets, g.n)  # a small graph caps how many distinct targets exist
    rng = np.random.default_rng(seed)
    targets = np.sort(rng.choice(g.n, size=n_targets, replace=False))

    samples: list[DetectionSample] = []
    plans: list[AttackPlan] = []
    successes: list[bool] = []
    n_success = 0
    for t in targets:
        t = int(t)
        plan = run_attack(g, attack_name, t, budget)
        ok = bool(plan.flips) and plan_succeeds(g, plan)
        plans.append(plan)
        successes.append(ok)
        if not ok:
            continue
        n_success += 1
        attacked = g.apply_flips(plan.flips)
        samples.append(DetectionSample(attribute_vector(g, t), CLEAN, t, dataset_name))
        samples.append(DetectionSample(attribute_vector(attacked, t), ADVERSARIAL, t,
                                       dataset_name, attack_name))
    return DetectionDataset(samples, plans, successes, n_targets, n_success)


def samples_to_arrays(samples: list[DetectionSample]) -> tuple[np.ndarray, np.ndarray]:
    X = np.vstack([s.vector for s in samples])
    y = np.asarray([s.label for s in samples], dtype=np.int64)
    return X, y


def _paired_split(samples: list[DetectionSample], split_seed: int,
                  test_fraction: float = 0.2) -> tuple[np.ndarray, np.ndarray]:
    """80/20 split over targets so a target's pair never straddles folds."""
    groups: dict[tuple, list[int]] = {}
    for i, s in enumerate(samples):
        groups.setdefault((s.dataset_name, s.target), []).append(i)
    keys = sorted(groups)
    rng = np.random.default_rng(split_seed)
    order = rng.permutation(len(keys))
    n_test = max(1, round(test_fraction * len(keys)))
    if n_test >= len(keys):
        raise ValueError("too few targets to carve out a test fold")
    test_keys = {keys[i] for i in order[:n_test]}
    train_idx, test_idx = [], []
    for key in keys:
        (test_idx if key in test_keys else train_idx).extend(groups[key])
    return np.asarray(train_idx), np.asarray(test_idx)


def rank_attributes(importances: np.ndarray) -> np.ndarray:
    """Attribute indices by descending importance; ties keep index order."""
    return np.argsort(-np.asarray(importances), kind="stable")


@dataclass
class MetricsReport:
    """Test metrics for the top-k detector and its all-attribute baseline."""

    k: int
    acc: float
    auc: float
    precision: float | None
    acc_all: float
    auc_all: float
    precision_all: float | None
    gains: dict
    importances: np.ndarray
    top_k_names: list[str]
    n_train: int
    n_test: int
    all_model: GiniForestClassifier | None = field(default=None, repr=False)
    top_model: GiniForestClassifier | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "acc": self.acc,
            "auc": self.auc,
            "precision": self.precision,
            "acc_all": self.acc_all,
            "auc_all": self.auc_all,
            "precision_all": self.precision_all,
            "gains": self.gains,
            "importances": {name: float(v) for name, v in
                            zip(ATTRIBUTE_NAMES, self.importances)},
            "top_k_names": list(self.top_k_names),
            "n_train": self.n_train,
            "n_test": self.n_test,
        }


def _binary_metrics(clf: GiniForestClassifier, X: np.ndarray,
                    y: np.ndarray) -> tuple[float, float, float | None]:
    pred = clf.predict(X)
    proba = clf.predict_proba(X)[:, ADVERSARIAL]
    acc = float(np.mean(pred == y))
    auc = auc_score(proba, y)
    tp = int(np.sum((pred == ADVERSARIAL) & (y == ADVERSARIAL)))
    fp = int(np.sum((pred == ADVERSARIAL) & (y == CLEAN)))
    return acc, auc, precision_score(tp, fp)


def _check_detection_samples(samples: list[DetectionSample]) -> None:
    labels = np.asarray([s.label for s in samples]) if samples else np.zeros(0)
    if np.sum(labels == CLEAN) < 10 or np.sum(labels == ADVERSARIAL) < 10:
        raise ValueError("need at least 10 samples of each label")


def evaluate_detector(samples: list[DetectionSample], k: int,
                      split_seed: int = 0, n_trees: int = 100) -> MetricsReport:
    """Train on the train fold, rank attributes there, retrain on the top k.

    Reports test ACC / AUC / Precision for the top-k model and for the
    all-attribute model on the same split, plus per-metric relative gains.
    """
    _check_detection_samples(samples)
    k = check_positive_int(k, "k")
    if k > N_ATTRIBUTES:
        raise ValueError(f"k must be at most {N_ATTRIBUTES}")
    X, y = samples_to_arrays(samples)
    train_idx, test_idx = _paired_split(samples, split_seed)

    all_model = GiniForestClassifier(n_trees=n_trees, seed=split_seed,
                                     feature_names=list(ATTRIBUTE_NAMES))
    all_model.fit(X[train_idx], y[train_idx])
    importances = all_model.feature_importances_
    ranked = rank_attributes(importances)
    top = np.sort(ranked[:k])  # column order stays canonical
    top_names = [ATTRIBUTE_NAMES[i] for i in ranked[:k]]

    top_model = GiniForestClassifier(n_trees=n_trees, seed=split_seed)
    top_model.fit(X[np.ix_(train_idx, top)], y[train_idx])

    acc_all, auc_all, prec_all = _binary_metrics(all_model, X[test_idx], y[test_idx])
    acc_top, auc_top, prec_top = _binary_metrics(top_model, X[np.ix_(test_idx, top)],
                                                 y[test_idx])
    gains = {"acc": relative_gain(acc_all, acc_top) if acc_top > 0 else None,
             "auc": relative_gain(auc_all, auc_top) if auc_top > 0 else None}
    if prec_all is not None and prec_top is not None and prec_top > 0:
        gains["precision"] = relative_gain(prec_all, prec_top)
    else:
        gains["precision"] = None

    return MetricsReport(k=k, acc=acc_top, auc=auc_top, precision=prec_top,
                         acc_all=acc_all, auc_all=auc_all, precision_all=prec_all,
                         gains=gains, importances=importances, top_k_names=top_names,
                         n_train=len(train_idx), n_test=len(test_idx),
                         all_model=all_model, top_model=top_model)


def top_k_sweep(samples: list[DetectionSample], k_values: list[int],
                seed: int = 0, n_trees: int = 100) -> list[dict]:
    """Test AUC per k with one fixed split and one fixed attribute ranking."""
    _check_detection_samples(samples)
    if not k_values:
        raise ValueError("k_values must be non-empty")
    for k in k_values:
        check_positive_int(k, "k")
        if k > N_ATTRIBUTES:
            raise ValueError(f"k must be at most {N_ATTRIBUTES}")
    X, y = samples_to_arrays(samples)
    train_idx, test_idx = _paired_split(samples, seed)
    all_model = GiniForestClassifier(n_trees=n_trees, seed=seed)
    all_model.fit(X[train_idx], y[train_idx])
    ranked = rank_attributes(all_model.feature_importances_)

    rows = []
    for k in k_values:
        top = np.sort(ranked[:k])
        model = GiniForestClassifier(n_trees=n_trees, seed=seed)
        model.fit(X[np.ix_(train_idx, top)], y[train_idx])
        proba = model.predict_proba(X[np.ix_(test_idx, top)])[:, ADVERSARIAL]
        rows.append({"k": int(k), "auc": auc_score(proba, y[test_idx])})
    return rows


@dataclass
class RecognitionReport:
    """Macro one-vs-rest AUC of attack recognition over repeated splits."""

    classes: list[str]
    auc_mean: float
    auc_std: float
    per_seed_auc: list[float]
    per_class_auc: dict
    confusion: np.ndarray  # rows true class, columns predicted, summed over seeds

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "auc_mean": self.auc_mean,
            "auc_std": self.auc_std,
            "per_seed_auc": list(self.per_seed_auc),
            "per_class_auc": dict(self.per_class_auc),
            "confusion": [[int(v) for v in row] for row in self.confusion],
        }


def recognize_attack(samples: list[DetectionSample], split_seed: int = 0,
                     n_repeats: int = 10, n_trees: int = 100) -> RecognitionReport:
    """Which attack made each adversarial sample: forest + macro OvR AUC.

    Stratified 80/20 splits repeated n_repeats times (seeds split_seed,
    split_seed+1, ...); reports mean and standard deviation of the macro
    AUC and the summed test confusion matrix.
    """
    if any(s.label != ADVERSARIAL for s in samples):
        raise ValueError("recognition expects adversarial samples only")
    classes = sorted({s.attack_name for s in samples})
    if len(classes) < 2:
        raise ValueError("need samples from at least 2 attacks")
    class_to_idx = {c: i for i, c in enumerate(classes)}
    X = np.vstack([s.vector for s in samples])
    y = np.asarray([class_to_idx[s.attack_name] for s in samples], dtype=np.int64)
    counts = np.bincount(y, minlength=len(classes))
    if counts.min() < 5:
        raise ValueError("each attack class needs at least 5 samples")

    per_seed = []
    per_class_acc = np.zeros(len(classes))
    confusion = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for rep in range(n_repeats):
        seed = split_seed + rep
        rng = np.random.default_rng(seed)
        train_idx, test_idx = [], []
        for c in range(len(classes)):
            members = np.nonzero(y == c)[0]
            order = rng.permutation(members.shape[0])
            n_test = max(1, round(0.2 * members.shape[0]))
            test_idx.extend(members[order[:n_test]])
            train_idx.extend(members[order[n_test:]])
        train_idx = np.sort(np.asarray(train_idx))
        test_idx = np.sort(np.asarray(test_idx))

        clf = GiniForestClassifier(n_trees=n_trees, seed=seed)
        clf.fit(X[train_idx], y[train_idx])
        proba = clf.predict_proba(X[test_idx])
        pred = np.argmax(proba, axis=1)
        aucs = []
        for c in range(len(classes)):
            ovr = (y[test_idx] == c).astype(np.int64)
            aucs.append(auc_score(proba[:, c], ovr))
        per_seed.append(float(np.mean(aucs)))
        per_class_acc += np.asarray(aucs)
        for yt, yp in zip(y[test_idx], pred):
            confusion[yt, yp] += 1

    per_class = {c: float(per_class_acc[i] / n_repeats) for i, c in enumerate(classes)}
    return RecognitionReport(classes=classes,
                             auc_mean=float(np.mean(per_seed)),
                             auc_std=float(np.std(per_seed)),
                             per_seed_auc=per_seed,
                             per_class_auc=per_class,
                             confusion=confusion)


# -- CSV emission -----------------------------------------------------------


def write_samples_csv(handle, samples: list[DetectionSample]) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(["dataset", "attack", "target", "label", *ATTRIBUTE_NAMES])
    for s in samples:
        writer.writerow([s.dataset_name, s.attack_name or "", s.target, s.label,
                         *[repr(float(v)) for v in s.vector]])


def read_samples_csv(handle) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Feature matrix, labels, and attack names from a samples CSV."""
    reader = csv.reader(handle)
    header = next(reader, None)
    if header is None:
        raise ValueError("empty samples CSV")
    try:
        label_col = header.index("label")
        attr_cols = [header.index(name) for name in ATTRIBUTE_NAMES]
    except ValueError as exc:
        raise ValueError(f"samples CSV missing required column: {exc}") from None
    attack_col = header.index("attack") if "attack" in header else None
    rows, labels, attacks = [], [], []
    for line in reader:
        if not line:
            continue
        rows.append([float(line[c]) for c in attr_cols])
        labels.append(int(line[label_col]))
        attacks.append(line[attack_col] if attack_col is not None else "")
    if not rows:
        raise ValueError("samples CSV has no data rows")
    return np.asarray(rows), np.asarray(labels, dtype=np.int64), attacks


def histogram_rows(samples: list[DetectionSample], bins: int = 30) -> list[tuple]:
    """Per attribute and label: equal-width bin counts over the pooled range."""
    if not samples:
        raise ValueError("no samples to histogram")
    X, y = samples_to_arrays(samples)
    rows = []
    for a, name in enumerate(ATTRIBUTE_NAMES):
        lo = float(X[:, a].min())
        hi = float(X[:, a].max())
        if hi <= lo:
            hi = lo + 1.0  # degenerate range: single occupied bin
        for label in (CLEAN, ADVERSARIAL):
            values = X[y == label, a]
            counts, edges = np.histogram(values, bins=bins, range=(lo, hi))
            for b in range(bins):
                rows.append((name, label, b, float(edges[b]), float(edges[b + 1]),
                             int(counts[b])))
    return rows


def write_histograms_csv(handle, samples: list[DetectionSample], bins: int = 30) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(["attribute", "label", "bin", "bin_left", "bin_right", "count"])
    for row in histogram_rows(samples, bins):
        writer.writerow([row[0], row[1], row[2], repr(row[3]), repr(row[4]), row[5]])


def write_importances_csv(handle, importances: np.ndarray) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(["attribute", "importance"])
    order = rank_attributes(importances)
    for i in order:
        writer.writerow([ATTRIBUTE_NAMES[i], repr(float(importances[i]))])


def write_metrics_csv_row(handle, dataset: str, attack: str, report: MetricsReport,
                          header: bool = False) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    if header:
        writer.writerow(["dataset", "attack", "k", "acc", "auc", "precision",
                         "acc_all", "auc_all", "precision_all",
                         "gain_acc", "gain_auc", "gain_precision"])
    fmt = lambda v: "" if v is None else repr(float(v))
    writer.writerow([dataset, attack, report.k, fmt(report.acc), fmt(report.auc),
                     fmt(report.precision), fmt(report.acc_all), fmt(report.auc_all),
                     fmt(report.precision_all), fmt(report.gains.get("acc")),
                     fmt(report.gains.get("auc")), fmt(report.gains.get("precision"))])
