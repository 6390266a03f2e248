"""Experiment orchestration shared by the CLI and the scripts."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .config import Preset, RunConfig
from .datasets import Bundle, DatasetManifest
from .evaluation import (PRCurve, aggregate_timing, compute_pr, recall_at_1, write_pr_csv,
                         write_pr_svg)
from .features import ExtractorConfig, FeatureSet, extract
from .imaging import load_image
from .pipeline import (EnvironmentMap, LocalizationResult, TimingRecord, build_map, localize,
                       save_map)
from .vocab import VisualDictionary, save_dictionary, train_dictionary

log = logging.getLogger(__name__)


class StageError(RuntimeError):
    """A bench stage failed; ``cause`` keeps the original exception."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# -- extraction ----------------------------------------------------------------------

def _extract_one(args) -> FeatureSet:
    image_id, path, cfg = args
    try:
        return extract(load_image(path), cfg, image_id)
    except Exception as exc:
        try:
            wrapped = type(exc)(f"{path}: {exc}")
        except Exception:
            raise exc from None
        raise wrapped from exc


def extract_dataset(manifest: DatasetManifest, cfg: ExtractorConfig, workers: int = 1) -> list[FeatureSet]:
    manifest.validate()
    jobs = [(i, p, cfg) for i, p in zip(manifest.ids, manifest.paths())]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_extract_one, jobs, chunksize=4))
    return [_extract_one(j) for j in jobs]


def train_from_manifest(manifest: DatasetManifest, cfg: RunConfig, extractor: ExtractorConfig | None = None,
                        k: int | None = None) -> VisualDictionary:
    extractor = extractor or cfg.extractor
    feats = extract_dataset(manifest, extractor, cfg.workers)
    return train_dictionary(feats, k or cfg.dictionary.k, seed=cfg.dictionary_seed,
                            max_iters=cfg.dictionary.max_iters, tol=cfg.dictionary.tol)


def map_from_manifest(manifest: DatasetManifest, V: VisualDictionary, cfg: RunConfig,
                      extractor: ExtractorConfig | None = None) -> EnvironmentMap:
    manifest.validate()
    env = build_map(manifest.iter_images(), V, extractor or cfg.extractor, cfg.vlad,
                    leaf_size=cfg.leaf_size, workers=cfg.workers, dataset=manifest.name)
    env.provenance["dataset_fingerprint"] = manifest.fingerprint()
    return env


def localize_all(manifest: DatasetManifest, env: EnvironmentMap, n: int,
                 extractor: ExtractorConfig | None = None) -> list[LocalizationResult]:
    """Sequential, single-worker localization so per-query timings are undisturbed."""
    manifest.validate()
    if not manifest.images:
        raise ValueError(f"{manifest.name}: query manifest is empty")
    return [localize(img, env, n, image_id, extractor) for image_id, img in manifest.iter_images()]


# -- results files --------------------------------------------------------------------

RESULT_FIELDS = ["query_id", "rank", "ref_id", "similarity", "distance"]
TIMING_CSV_FIELDS = ["query_id", "t_descriptor", "t_search", "t_total", "degenerate"]


def write_results_csv(results: Sequence[LocalizationResult], path) -> None:
    """One row per (query, rank); a degenerate query gets a single rank-0 row with empty fields."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\r\n")
        w.writerow(RESULT_FIELDS)
        for r in results:
            if not r.ranking:
                w.writerow([r.query_id, 0, "", "", ""])
            for rank, ((ref, sim), d) in enumerate(zip(r.ranking, r.distances), start=1):
                w.writerow([r.query_id, rank, ref, repr(sim), repr(d)])


def read_results_csv(path) -> list[LocalizationResult]:
    zero = TimingRecord(0.0, 0.0, 0.0)
    out: dict[str, LocalizationResult] = {}
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != RESULT_FIELDS:
            raise ValueError(f"{path}: expected columns {RESULT_FIELDS}, got {reader.fieldnames}")
        for row in reader:
            q = row["query_id"]
            r = out.setdefault(q, LocalizationResult(q, [], zero, [], False))
            if int(row["rank"]) == 0:
                r.degenerate = True
                continue
            r.ranking.append((row["ref_id"], float(row["similarity"])))
            r.distances.append(float(row["distance"]))
    return list(out.values())


def write_timing_csv(results: Sequence[LocalizationResult], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\r\n")
        w.writerow(TIMING_CSV_FIELDS)
        for r in results:
            t = r.timing
            w.writerow([r.query_id, repr(t.t_descriptor), repr(t.t_search), repr(t.t_total),
                        int(r.degenerate)])


# -- bench -------------------------------------------------------------------------

@dataclass
class SplitOutcome:
    preset: str
    split: str
    curve: PRCurve
    recall_at_1: float
    timing: dict


def _stage(name: str, fn, *args, **kwargs):
    log.info("stage %s", name)
    try:
        return fn(*args, **kwargs)
    except Exception as exc:
        raise StageError(name, exc) from exc


def run_preset(bundle: Bundle, preset: Preset, cfg: RunConfig, out: Path,
               splits: Sequence[str]) -> list[SplitOutcome]:
    pdir = out / preset.name
    pdir.mkdir(parents=True, exist_ok=True)
    V = _stage(f"train-dict[{preset.name}]", train_from_manifest, bundle.training, cfg,
               preset.extractor, preset.k)
    save_dictionary(V, pdir / "dictionary.vprd", {"run_config": cfg.to_dict(), "preset": preset.name})
    env = _stage(f"build-map[{preset.name}]", map_from_manifest, bundle.reference, V, cfg,
                 preset.extractor)
    env.provenance["run_config"] = cfg.to_dict()
    save_map(env, pdir / "map")
    outcomes = []
    for split in splits:
        tag = f"{preset.name}/{split}"
        results = _stage(f"localize[{tag}]", localize_all, bundle.queries[split], env, cfg.n)
        sdir = pdir / split
        sdir.mkdir(exist_ok=True)
        write_results_csv(results, sdir / cfg.outputs.results_csv)
        write_timing_csv(results, sdir / cfg.outputs.timing_csv)
        gt = _stage(f"evaluate[{tag}]", bundle.ground_truth, split)
        curve = _stage(f"evaluate[{tag}]", compute_pr, results, gt)
        write_pr_csv(curve, sdir / cfg.outputs.pr_csv)
        outcomes.append(SplitOutcome(preset.name, split, curve, recall_at_1(results, gt),
                                     aggregate_timing(results)))
    return outcomes


def run_bench(bundle: Bundle, cfg: RunConfig, out_dir, splits: Sequence[str] | None = None) -> dict:
    """Train, map, localize and evaluate every preset; returns the combined report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    splits = list(splits) if splits else sorted(bundle.queries)
    unknown = [s for s in splits if s not in bundle.queries]
    if unknown:
        raise ValueError(f"unknown query splits {unknown}; bundle has {sorted(bundle.queries)}")
    meta = {
        "bundle": bundle.name,
        "run_config": cfg.to_dict(),
        "seed": cfg.seed,
        "inputs": {
            "training": bundle.training.fingerprint(),
            "reference": bundle.reference.fingerprint(),
            **{f"query:{s}": bundle.queries[s].fingerprint() for s in splits},
        },
        "similarity": "1/(1+euclidean)",
        "vlad_normalization": cfg.vlad.describe(),
    }
    write_json(meta, out / "meta.json")

    outcomes: list[SplitOutcome] = []
    for preset in cfg.presets:
        outcomes += run_preset(bundle, preset, cfg, out, splits)

    accuracy = {"meta": meta, "results": {}}
    timing_rows = []
    for o in outcomes:
        accuracy["results"].setdefault(o.preset, {})[o.split] = {
            "auc": o.curve.auc, "recall_at_1": o.recall_at_1, "n_queries": o.curve.n_queries}
        timing_rows.append(o)
    write_json(accuracy, out / "accuracy.json")
    for split in splits:
        curves = {o.preset: o.curve for o in outcomes if o.split == split}
        write_pr_svg(curves, out / f"pr_{split}.svg", title=f"Precision-Recall ({split})")

    with open(out / "timing.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\r\n")
        w.writerow(["preset", "split", "n_queries"] +
                   [f"{stat}_{field}" for field in ("t_descriptor", "t_search", "t_total")
                    for stat in ("mean", "median", "p95")])
        for o in timing_rows:
            w.writerow([o.preset, o.split, o.timing["count"]] +
                       [repr(o.timing[field][stat]) for field in ("t_descriptor", "t_search", "t_total")
                        for stat in ("mean", "median", "p95")])

    report = {
        "meta": meta,
        "presets": {
            p.name: {
                "k": p.k,
                "extractor": p.extractor.to_dict(),
                "splits": {o.split: {"auc": o.curve.auc, "recall_at_1": o.recall_at_1,
                                     "mean_t_total": o.timing["t_total"]["mean"],
                                     "mean_t_descriptor": o.timing["t_descriptor"]["mean"],
                                     "mean_t_search": o.timing["t_search"]["mean"]}
                           for o in outcomes if o.preset == p.name},
            }
            for p in cfg.presets
        },
    }
    write_json(report, out / "report.json")
    return report
