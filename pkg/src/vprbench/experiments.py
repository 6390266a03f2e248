"""Repeatable experiments shared by ``scripts/`` and the acceptance tests."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from .config import BASE_PRESETS, RunConfig
from .datasets import load_bundle
from .evaluation import aggregate_timing
from .features import ExtractorConfig, extract
from .harness import run_bench
from .pipeline import build_map, localize
from .synthetic import SyntheticConfig, generate, write_bundle
from .vocab import train_dictionary

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TradeoffRun:
    seed: int
    binary_auc: float
    float_auc: float
    binary_t_total: float
    float_t_total: float

    @property
    def binary_faster(self) -> bool:
        return self.binary_t_total < self.float_t_total

    @property
    def float_not_worse(self) -> bool:
        return self.float_auc >= self.binary_auc - 0.05

    @property
    def holds(self) -> bool:
        return self.binary_faster and self.float_not_worse


def tradeoff(bundle_dir, out_dir, seeds=(0, 1, 2), split: str = "t15",
             binary: str = "binary-low", float_: str = "float-high") -> list[TradeoffRun]:
    """Bench a binary and a float preset on one split, once per dictionary seed."""
    bundle = load_bundle(bundle_dir)
    runs = []
    for seed in seeds:
        cfg = RunConfig(seed=seed, presets=(BASE_PRESETS[binary], BASE_PRESETS[float_]))
        report = run_bench(bundle, cfg, Path(out_dir) / f"seed{seed}", [split])
        b = report["presets"][binary]["splits"][split]
        f = report["presets"][float_]["splits"][split]
        runs.append(TradeoffRun(seed, b["auc"], f["auc"], b["mean_t_total"], f["mean_t_total"]))
        log.info("seed %d: %s", seed, runs[-1])
    return runs


@dataclass(frozen=True)
class ScalingResult:
    small_size: int
    large_size: int
    n_queries: int
    small_t_search: float
    large_t_search: float


def map_scaling(large: SyntheticConfig = SyntheticConfig(cols=50, rows=40, n_training=40),
                small_size: int = 200, n_queries: int = 40, k: int = 256,
                extractor: ExtractorConfig = ExtractorConfig(), seed: int = 0,
                query_split: str = "t15") -> ScalingResult:
    """Mean query search time against a small map and a large map of the same world.

    The small map is the first ``small_size`` reference frames of the large
    one; both maps share one dictionary and are queried with the same images.
    """
    bundle = generate(large)
    feats = [extract(img, extractor, i) for i, img in bundle.training.images.items()]
    V = train_dictionary(feats, k, seed=seed)
    refs = list(bundle.reference.images.items())
    queries = list(bundle.queries[query_split].images.items())[:n_queries]

    def mean_search(items) -> float:
        env = build_map(items, V, extractor)
        results = [localize(img, env, 20, qid) for qid, img in queries]
        return aggregate_timing(results)["t_search"]["mean"]

    small = mean_search(refs[:small_size])
    large_t = mean_search(refs)
    return ScalingResult(small_size, len(refs), len(queries), small, large_t)


def default_bundle_dir(out_dir, cfg: SyntheticConfig = SyntheticConfig()) -> Path:
    path = write_bundle(generate(cfg), out_dir)
    return path.parent


__all__ = ["TradeoffRun", "tradeoff", "ScalingResult", "map_scaling", "default_bundle_dir"]
