"""Cross-validated benchmark harness: oversample, train, score, report.

For every (dataset, oversampler, classifier) cell, runs n_shuffles x
n_folds stratified cross-validation. Oversamplers see only the training
fold; synthetic rows top the minority class up to exact balance; scores
are minority F1 and Cohen's kappa per fold.

The raw report is fully deterministic under the master seed (cell timings
live in a separate structure so raw dumps stay bit-identical between
runs).
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baselines import Gan, GanConfig, interpolation_sample, load_synthetic_csv, repeater_sample
from .classifiers import (
    ExternalPredictions,
    KNNClassifier,
    LogisticRegressionClassifier,
)
from .data import DataError, Dataset, FoldPlan, load_csv, stratified_kfold
from .metrics import cohen_kappa, confusion, f1_minority
from .model import ConvGeNConfig, ConvGeNModel
from .rng import derive_seed


@dataclass(frozen=True)
class DatasetSpec:
    path: str
    label_column: str
    minority_label: str
    name: str

    def load(self) -> Dataset:
        return load_csv(self.path, self.label_column, self.minority_label, name=self.name)


@dataclass(frozen=True)
class OversamplerSpec:
    name: str
    kind: str  # repeater | gan | interpolation | convgen | from-file
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ClassifierSpec:
    name: str
    kind: str  # knn | logreg | doc | external
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BenchmarkConfig:
    datasets: tuple[DatasetSpec, ...]
    oversamplers: tuple[OversamplerSpec, ...]
    classifiers: tuple[ClassifierSpec, ...]
    n_folds: int = 5
    n_shuffles: int = 5
    seed: int = 0

    @staticmethod
    def from_json(path, seed_override: int | None = None) -> "BenchmarkConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        datasets = tuple(
            DatasetSpec(
                path=d["path"],
                label_column=d["label_column"],
                minority_label=str(d["minority_label"]),
                name=d.get("name", os.path.splitext(os.path.basename(d["path"]))[0]),
            )
            for d in raw["datasets"]
        )
        oversamplers = tuple(
            OversamplerSpec(
                name=o.get("name", o["kind"]),
                kind=o["kind"],
                params={k: v for k, v in o.items() if k not in ("name", "kind")},
            )
            for o in raw["oversamplers"]
        )
        classifiers = tuple(
            ClassifierSpec(name=c, kind=c, params={})
            if isinstance(c, str)
            else ClassifierSpec(
                name=c.get("name", c["kind"]),
                kind=c["kind"],
                params={k: v for k, v in c.items() if k not in ("name", "kind")},
            )
            for c in raw["classifiers"]
        )
        env_seed = os.environ.get("CONVGEN_SEED")
        seed = raw.get("seed", 0)
        if env_seed is not None:
            seed = int(env_seed)
        if seed_override is not None:
            seed = seed_override
        return BenchmarkConfig(
            datasets=datasets,
            oversamplers=oversamplers,
            classifiers=classifiers,
            n_folds=raw.get("n_folds", 5),
            n_shuffles=raw.get("n_shuffles", 5),
            seed=seed,
        )

    def echo(self) -> dict:
        return {
            "datasets": [vars(d) for d in self.datasets],
            "oversamplers": [
                {"name": o.name, "kind": o.kind, "params": o.params}
                for o in self.oversamplers
            ],
            "classifiers": [
                {"name": c.name, "kind": c.kind, "params": c.params}
                for c in self.classifiers
            ],
            "n_folds": self.n_folds,
            "n_shuffles": self.n_shuffles,
            "seed": self.seed,
        }


class FoldResult:
    """Everything produced while oversampling one training fold."""

    def __init__(self, synthetic: np.ndarray, provenance: np.ndarray | None,
                 doc_factory=None) -> None:
        self.synthetic = synthetic
        self.provenance = provenance  # original-dataset row ids, or None
        self.doc_factory = doc_factory


def oversample_fold(spec: OversamplerSpec, train: Dataset, train_ids: np.ndarray,
                    n_synthetic: int, seed: int) -> FoldResult:
    """Train the configured oversampler on the fold and emit synthetic rows.

    `train_ids` maps the fold-local rows back to original dataset row ids
    so provenance can be audited against the held-out fold.
    """
    minority_rows = train.features[train.minority_indices]
    minority_ids = train_ids[train.minority_indices]

    if spec.kind == "repeater":
        synthetic = repeater_sample(minority_rows, n_synthetic)
        provenance = minority_ids[np.arange(n_synthetic) % len(minority_rows)]
        return FoldResult(synthetic, provenance)

    if spec.kind == "interpolation":
        rng = np.random.default_rng(seed)
        synthetic, pairs = interpolation_sample(
            minority_rows, int(spec.params.get("k", 5)), n_synthetic, rng
        )
        provenance = np.unique(minority_ids[pairs.reshape(-1)]) if len(pairs) else minority_ids[:0]
        return FoldResult(synthetic, provenance)

    if spec.kind == "gan":
        cfg = GanConfig(
            n_features=train.n_features,
            epochs=int(spec.params.get("epochs", 300)),
            seed=seed,
        )
        gan = Gan(cfg).train(minority_rows)
        return FoldResult(gan.generate(n_synthetic), minority_ids.copy())

    if spec.kind == "convgen":
        preset = spec.params.get("preset")
        if preset:
            cfg = ConvGeNConfig.preset(preset, seed=seed)
        else:
            cfg = ConvGeNConfig(
                neb=spec.params.get("neb", "min"),
                maj_proximal=bool(spec.params.get("maj_proximal", False)),
                seed=seed,
            )
        cfg = ConvGeNConfig(
            neb=cfg.neb,
            disc_train_count=int(spec.params.get("disc_train_count", cfg.disc_train_count)),
            neb_epochs=int(spec.params.get("neb_epochs", cfg.neb_epochs)),
            maj_proximal=cfg.maj_proximal,
            k_prime=spec.params.get("k_prime", cfg.k_prime),
            seed=seed,
        )
        model = ConvGeNModel(cfg).fit(train)
        batches = model.generate(n_synthetic)
        if batches:
            synthetic = np.vstack([b.samples for b in batches])
            provenance = np.unique(
                np.concatenate([train_ids[b.source_neighborhood] for b in batches])
            )
        else:
            synthetic = np.empty((0, train.n_features))
            provenance = minority_ids[:0]
        return FoldResult(synthetic, provenance, doc_factory=model.retrain_doc)

    if spec.kind == "from-file":
        rows = load_synthetic_csv(spec.params["path"], train.n_features)
        idx = np.arange(n_synthetic) % len(rows)
        return FoldResult(rows[idx].copy(), None)

    raise DataError(f"unknown oversampler kind {spec.kind!r}")


def make_classifier(spec: ClassifierSpec, fold_result: FoldResult,
                    external_path: str | None = None):
    if spec.kind == "knn":
        return KNNClassifier(k=int(spec.params.get("k", 5)))
    if spec.kind == "logreg":
        return LogisticRegressionClassifier()
    if spec.kind == "doc":
        if fold_result.doc_factory is None:
            raise DataError("the doc classifier requires the convgen oversampler")
        return fold_result.doc_factory()
    if spec.kind == "external":
        if external_path is None:
            raise DataError("external classifier needs a predictions directory")
        return ExternalPredictions(external_path)
    raise DataError(f"unknown classifier kind {spec.kind!r}")


def run_fold(cfg: BenchmarkConfig, dataset: Dataset, plan: FoldPlan,
             oversampler: OversamplerSpec, shuffle: int, fold: int) -> dict:
    """One (oversampler, shuffle, fold) unit: returns per-classifier scores.

    Also performs the protocol checks: provenance stays inside the training
    fold and the rebalanced training set has exactly equal classes.
    """
    train_ids = plan.train_indices(shuffle, fold)
    test_ids = plan.test_indices(shuffle, fold)
    train = dataset.subset(train_ids)
    n_synthetic = train.majority_count - train.minority_count
    seed = derive_seed(cfg.seed, dataset.name, oversampler.name, shuffle, fold)

    result = oversample_fold(oversampler, train, train_ids, n_synthetic, seed)
    if result.provenance is not None:
        leaked = np.setdiff1d(result.provenance, train_ids)
        if len(leaked):
            raise DataError(f"oversampler touched held-out rows {leaked[:5]}")
    if len(result.synthetic) != n_synthetic:
        raise DataError(
            f"expected {n_synthetic} synthetic rows, got {len(result.synthetic)}"
        )

    full_features = np.vstack([train.features, result.synthetic])
    full_labels = np.concatenate([train.labels, np.ones(n_synthetic, dtype=int)])
    test_features = dataset.features[test_ids]
    test_labels = dataset.labels[test_ids]

    scores = {}
    for clf_spec in cfg.classifiers:
        started = time.perf_counter()
        try:
            external_path = None
            if clf_spec.kind == "external":
                external_path = os.path.join(
                    clf_spec.params["dir"],
                    f"{dataset.name}_s{shuffle}_f{fold}.csv",
                )
            clf = make_classifier(clf_spec, result, external_path)
            clf.fit(full_features, full_labels)
            cm = confusion(test_labels, clf.predict(test_features))
            scores[clf_spec.name] = {
                "shuffle": shuffle,
                "fold": fold,
                "f1": f1_minority(cm),
                "kappa": cohen_kappa(cm),
                "_seconds": time.perf_counter() - started,
            }
        except Exception as exc:  # per-cell failure, run continues
            scores[clf_spec.name] = {
                "shuffle": shuffle,
                "fold": fold,
                "error": f"{type(exc).__name__}: {exc}",
                "_seconds": time.perf_counter() - started,
            }
    return scores


def _run_unit(args):
    cfg, dataset, plan, oversampler, shuffle = args
    started = time.perf_counter()
    out = []
    for fold in range(cfg.n_folds):
        try:
            scores = run_fold(cfg, dataset, plan, oversampler, shuffle, fold)
        except Exception as exc:
            scores = {
                clf.name: {
                    "shuffle": shuffle,
                    "fold": fold,
                    "error": f"{type(exc).__name__}: {exc}",
                    "_seconds": 0.0,
                }
                for clf in cfg.classifiers
            }
        out.append(scores)
    return dataset.name, oversampler.name, shuffle, out, time.perf_counter() - started


def run_benchmark(cfg: BenchmarkConfig, jobs: int = 1,
                  progress=None) -> tuple[dict, dict]:
    """Run the full grid; returns (report, timings).

    The report is deterministic under cfg.seed; timings are wall-clock
    seconds and vary run to run.
    """
    datasets = {spec.name: spec.load() for spec in cfg.datasets}
    plans = {
        name: stratified_kfold(ds, cfg.n_folds, cfg.n_shuffles,
                               derive_seed(cfg.seed, "folds", name))
        for name, ds in datasets.items()
    }
    fold_indices = {
        name: {
            str(s): {
                str(k): plans[name].test_indices(s, k).tolist()
                for k in range(cfg.n_folds)
            }
            for s in range(cfg.n_shuffles)
        }
        for name in datasets
    }

    units = [
        (cfg, datasets[d.name], plans[d.name], ovs, shuffle)
        for d in cfg.datasets
        for ovs in cfg.oversamplers
        for shuffle in range(cfg.n_shuffles)
    ]
    results = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for res in pool.map(_run_unit, units):
                results.append(res)
                if progress:
                    progress(res)
    else:
        for unit in units:
            res = _run_unit(unit)
            results.append(res)
            if progress:
                progress(res)

    # assemble cells in config order so output ordering is stable
    fold_scores: dict[tuple, list] = {}
    unit_seconds: dict[tuple, float] = {}
    for ds_name, ovs_name, shuffle, fold_list, seconds in results:
        unit_seconds[(ds_name, ovs_name, shuffle)] = seconds
        for scores in fold_list:
            for clf_name, entry in scores.items():
                fold_scores.setdefault((ds_name, ovs_name, clf_name), []).append(entry)

    cells = []
    timings = {}
    for d in cfg.datasets:
        for ovs in cfg.oversamplers:
            for clf in cfg.classifiers:
                entries = sorted(
                    fold_scores.get((d.name, ovs.name, clf.name), []),
                    key=lambda e: (e["shuffle"], e["fold"]),
                )
                seconds = sum(e.pop("_seconds", 0.0) for e in entries)
                ok = [e for e in entries if "error" not in e]
                failed = [e for e in entries if "error" in e]
                cell = {
                    "dataset": d.name,
                    "oversampler": ovs.name,
                    "classifier": clf.name,
                    "status": "ok" if not failed else "failed",
                    "folds": entries,
                }
                if ok:
                    f1s = np.array([e["f1"] for e in ok])
                    kappas = np.array([e["kappa"] for e in ok])
                    cell.update(
                        f1_mean=float(f1s.mean()),
                        f1_std=float(f1s.std(ddof=0)),
                        kappa_mean=float(kappas.mean()),
                        kappa_std=float(kappas.std(ddof=0)),
                    )
                cells.append(cell)
                timings[f"{d.name}/{ovs.name}/{clf.name}"] = seconds

    report = {
        "config": cfg.echo(),
        "fold_indices": fold_indices,
        "cells": cells,
    }
    return report, {"cells": timings, "units": {
        f"{d}/{o}/s{s}": sec for (d, o, s), sec in sorted(unit_seconds.items())
    }}


def dump_report(report: dict) -> str:
    """Canonical raw JSON text (stable key order, repr floats)."""
    return json.dumps(report, sort_keys=True, indent=1)


def report_to_csv(report: dict) -> str:
    lines = ["dataset,oversampler,classifier,status,f1_mean,f1_std,kappa_mean,kappa_std"]
    for cell in report["cells"]:
        lines.append(
            ",".join(
                [
                    cell["dataset"],
                    cell["oversampler"],
                    cell["classifier"],
                    cell["status"],
                    *(
                        f"{cell[key]:.6f}" if key in cell else ""
                        for key in ("f1_mean", "f1_std", "kappa_mean", "kappa_std")
                    ),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def report_to_markdown(report: dict) -> str:
    """Per-dataset tables of `F1 / kappa` per oversampler and classifier.

    The best F1 cell in each classifier row is flagged with a `*`.
    """
    by_dataset: dict[str, list] = {}
    for cell in report["cells"]:
        by_dataset.setdefault(cell["dataset"], []).append(cell)

    out = []
    for ds_name, cells in by_dataset.items():
        oversamplers = list(dict.fromkeys(c["oversampler"] for c in cells))
        classifiers = list(dict.fromkeys(c["classifier"] for c in cells))
        out.append(f"## {ds_name}\n")
        out.append("| classifier | " + " | ".join(oversamplers) + " |")
        out.append("|" + "---|" * (len(oversamplers) + 1))
        lookup = {(c["oversampler"], c["classifier"]): c for c in cells}
        for clf in classifiers:
            row_cells = [lookup.get((ovs, clf)) for ovs in oversamplers]
            best = None
            scored = [c for c in row_cells if c and "f1_mean" in c]
            if scored:
                best = max(scored, key=lambda c: c["f1_mean"])
            rendered = []
            for c in row_cells:
                if c is None or "f1_mean" not in c:
                    rendered.append("failed" if c else "-")
                    continue
                text = f"{c['f1_mean']:.3f} / {c['kappa_mean']:.3f}"
                rendered.append(f"**{text}**\\*" if c is best else text)
            out.append(f"| {clf} | " + " | ".join(rendered) + " |")
        out.append("")
    return "\n".join(out) + "\n"


def emit_report(report: dict, timings: dict, out_dir) -> dict:
    """Write report.json, timings.json, means.csv and report.md; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "raw": os.path.join(out_dir, "report.json"),
        "timings": os.path.join(out_dir, "timings.json"),
        "csv": os.path.join(out_dir, "means.csv"),
        "markdown": os.path.join(out_dir, "report.md"),
    }
    with open(paths["raw"], "w", encoding="utf-8") as fh:
        fh.write(dump_report(report))
    with open(paths["timings"], "w", encoding="utf-8") as fh:
        json.dump(timings, fh, sort_keys=True, indent=1)
    with open(paths["csv"], "w", encoding="utf-8") as fh:
        fh.write(report_to_csv(report))
    with open(paths["markdown"], "w", encoding="utf-8") as fh:
        fh.write(report_to_markdown(report))
    return paths
