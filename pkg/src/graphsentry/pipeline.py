"""End-to-end experiment runs: attack, featurize, train, evaluate, report."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

from .attacks import write_plans
from .config import RunConfig
from .detection import (
    DetectionDataset,
    EmptyResultError,
    build_detection_dataset,
    evaluate_detector,
    recognize_attack,
    top_k_sweep,
    write_histograms_csv,
    write_importances_csv,
    write_metrics_csv_row,
    write_samples_csv,
)
from .generators import generate_synthetic
from .graph import Graph, load_graph_with_mapping

PAIR_FILES = ("plans.txt", "plans_summary.json", "samples.csv", "metrics.json",
              "metrics.csv", "importances.csv", "histograms.csv", "forest_all.json",
              "forest_topk.json", "sweep.csv")
# detector training requires 10 samples of each label, i.e. 10 successful attacks
MIN_EVAL_SUCCESSES = 10


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _log(quiet: bool, message: str) -> None:
    if not quiet:
        print(message, flush=True)


def load_input_graph(config: RunConfig) -> tuple[Graph, list[int] | None]:
    """The configured graph plus the original node ids for file datasets."""
    if config.dataset_edges is not None:
        g, original_ids = load_graph_with_mapping(config.dataset_edges,
                                                  config.dataset_labels)
        return g, original_ids
    s = config.synthetic
    g = generate_synthetic(s.model, s.size, s.resolved_parameter(), s.seed,
                           classes=s.classes)
    return g, None


def _write_id_map(path: Path, original_ids: list[int]) -> None:
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["node_id", "original_id"])
        for node, original in enumerate(original_ids):
            writer.writerow([node, original])


def run_attack_stage(g: Graph, config: RunConfig, attack_name: str,
                     budget: int | None, out_dir: Path,
                     quiet: bool) -> DetectionDataset:
    """Build and persist one attack's detection dataset; fail if it is empty."""
    dataset = build_detection_dataset(g, attack_name, config.n_targets,
                                      config.sampling_seed, config.dataset_name,
                                      budget=budget)
    _log(quiet, f"[{attack_name}] {dataset.n_success}/{dataset.n_sampled} "
                f"targets misclassified after attack")
    with (out_dir / "plans.txt").open("w", encoding="utf-8") as handle:
        write_plans(handle, dataset.plans)
    _write_json(out_dir / "plans_summary.json", {
        "attack": attack_name,
        "dataset": config.dataset_name,
        "n_sampled": dataset.n_sampled,
        "n_success": dataset.n_success,
        "success_rate": dataset.success_rate,
        "total_flips": sum(len(p.flips) for p in dataset.plans),
        "successful_targets": [p.target for p, ok in
                               zip(dataset.plans, dataset.successes) if ok],
    })
    with (out_dir / "samples.csv").open("w", encoding="utf-8", newline="") as handle:
        write_samples_csv(handle, dataset.samples)
    if dataset.n_success == 0:
        raise EmptyResultError(
            f"attack '{attack_name}' produced zero successful plans on "
            f"{config.dataset_name}; nothing to evaluate")
    return dataset


def run_evaluation_stage(dataset: DetectionDataset, config: RunConfig,
                         attack_name: str, out_dir: Path, quiet: bool) -> dict:
    """Train detectors, sweep k, and persist every evaluation artifact."""
    report = evaluate_detector(dataset.samples, config.top_k, config.split_seed)
    _log(quiet, f"[{attack_name}] top-{config.top_k} test AUC {report.auc:.3f} "
                f"(all attributes {report.auc_all:.3f})")
    _write_json(out_dir / "metrics.json", report.to_dict())
    with (out_dir / "metrics.csv").open("w", encoding="utf-8", newline="") as handle:
        write_metrics_csv_row(handle, config.dataset_name, attack_name, report,
                              header=True)
    with (out_dir / "importances.csv").open("w", encoding="utf-8",
                                            newline="") as handle:
        write_importances_csv(handle, report.importances)
    with (out_dir / "histograms.csv").open("w", encoding="utf-8",
                                           newline="") as handle:
        write_histograms_csv(handle, dataset.samples)
    report.all_model.save(out_dir / "forest_all.json")
    report.top_model.save(out_dir / "forest_topk.json")

    sweep = top_k_sweep(dataset.samples, list(config.k_values), config.split_seed)
    with (out_dir / "sweep.csv").open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["k", "auc"])
        for row in sweep:
            writer.writerow([row["k"], repr(row["auc"])])
    return report.to_dict()


def run_experiment(config: RunConfig, quiet: bool = False) -> dict:
    """Execute a full run and return the written summary.

    Raises ParseError / OSError for unreadable inputs and EmptyResultError
    when a configured attack fools no sampled target.
    """
    out_root = config.output_dir
    out_root.mkdir(parents=True, exist_ok=True)
    g, original_ids = load_input_graph(config)
    _log(quiet, f"graph '{config.dataset_name}': {g.n} nodes, "
                f"{g.edge_count} edges, {g.class_count} classes")
    dataset_dir = out_root / config.dataset_name
    dataset_dir.mkdir(parents=True, exist_ok=True)
    if original_ids is not None:
        _write_id_map(dataset_dir / "id_map.csv", original_ids)

    summary: dict = {
        "dataset": config.dataset_name,
        "n_nodes": g.n,
        "n_edges": g.edge_count,
        "n_classes": g.class_count,
        "n_targets": config.n_targets,
        "top_k": config.top_k,
        "seeds": {"sampling": config.sampling_seed, "split": config.split_seed},
        "attacks": {},
    }
    datasets: dict[str, DetectionDataset] = {}
    for spec in config.attacks:
        pair_dir = dataset_dir / spec.name
        pair_dir.mkdir(parents=True, exist_ok=True)
        dataset = run_attack_stage(g, config, spec.name, spec.budget, pair_dir, quiet)
        entry = {
            "budget": spec.budget,
            "n_success": dataset.n_success,
            "success_rate": dataset.success_rate,
        }
        if dataset.n_success < MIN_EVAL_SUCCESSES:
            entry["metrics"] = None
            entry["note"] = (f"evaluation skipped: {dataset.n_success} successful "
                             f"attacks, detector training needs "
                             f"{MIN_EVAL_SUCCESSES}")
            _log(quiet, f"[{spec.name}] {entry['note']}")
        else:
            entry["metrics"] = run_evaluation_stage(dataset, config, spec.name,
                                                    pair_dir, quiet)
        datasets[spec.name] = dataset
        summary["attacks"][spec.name] = entry

    if len(datasets) >= 2:
        adversarial = [s for d in datasets.values() for s in d.samples if s.label == 1]
        counts = {name: d.n_success for name, d in datasets.items()}
        if min(counts.values()) >= 5:
            recognition = recognize_attack(adversarial, config.split_seed)
            _write_json(dataset_dir / "recognition.json", recognition.to_dict())
            summary["recognition"] = recognition.to_dict()
            _log(quiet, f"recognition macro AUC {recognition.auc_mean:.3f} "
                        f"± {recognition.auc_std:.3f}")
        else:
            summary["recognition"] = None
            _log(quiet, "recognition skipped: an attack has fewer than 5 successes")

    _write_json(dataset_dir / "run_summary.json", summary)
    return summary


def collect_run_reports(run_dir: Path) -> list[dict]:
    """All metrics.json payloads under a run directory, with their pair names."""
    reports = []
    for path in sorted(run_dir.rglob("metrics.json")):
        with path.open("r", encoding="utf-8") as handle:
            payload = json.load(handle)
        pair = path.parent
        reports.append({"dataset": pair.parent.name, "attack": pair.name,
                        "metrics": payload})
    return reports


def format_report_table(reports: list[dict]) -> str:
    """Human-readable metric table for the report subcommand."""
    header = f"{'dataset':<24} {'attack':<12} {'k':>3} {'acc':>7} {'auc':>7} " \
             f"{'precision':>9} {'auc_all':>8} {'gain_auc%':>9}"
    lines = [header, "-" * len(header)]
    fmt = lambda v: "  none" if v is None else f"{v:7.3f}"
    for entry in reports:
        m = entry["metrics"]
        gain = m["gains"].get("auc")
        gain_text = "     none" if gain is None else f"{gain:9.3f}"
        lines.append(f"{entry['dataset']:<24} {entry['attack']:<12} "
                     f"{m['k']:>3} {fmt(m['acc'])} {fmt(m['auc'])} "
                     f"{fmt(m['precision']):>9} {fmt(m['auc_all']):>8} {gain_text}")
    return "\n".join(lines)
