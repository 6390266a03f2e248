"""Precision-recall, latency summaries, and cross-dataset descriptor correlation."""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass
from html import escape
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .features.keypoint import FeatureSet, lift
from .pipeline import LocalizationResult
from .vocab import KindMismatchError


class GroundTruthError(ValueError):
    pass


@dataclass(frozen=True)
class PRPoint:
    threshold: float
    precision: float
    recall: float


@dataclass
class PRCurve:
    """Points ordered by decreasing threshold (so recall never decreases along the list)."""

    points: list[PRPoint]
    auc: float
    n_queries: int = 0

    def pairs(self) -> list[tuple[float, float]]:
        return [(p.precision, p.recall) for p in self.points]


def _ratio(num: int, den: int) -> float:
    # nothing predicted counts as perfectly precise
    return 1.0 if den == 0 else num / den


def pr_auc(points: Sequence[PRPoint]) -> float:
    """Mean precision over the attained recall range (trapezoidal).

    The curve is anchored at recall 0 with the precision of the strictest
    threshold, and the area is divided by the largest recall reached, so a
    flat precision ``p`` scores exactly ``p``.
    """
    if not points:
        return 0.0
    ordered = sorted(points, key=lambda p: (p.recall, -p.threshold))
    max_recall = ordered[-1].recall
    if max_recall == 0:
        return 0.0
    r = [0.0] + [p.recall for p in ordered]
    p = [points[0].precision] + [q.precision for q in ordered]
    area = sum((r[i + 1] - r[i]) * (p[i + 1] + p[i]) / 2.0 for i in range(len(r) - 1))
    return area / max_recall


def rank1_outcomes(results: Sequence[LocalizationResult],
                   gt: Mapping[str, set[str]]) -> list[tuple[float | None, bool]]:
    missing = [r.query_id for r in results if r.query_id not in gt]
    if missing:
        raise GroundTruthError(f"{len(missing)} queries lack ground truth: {missing}")
    out = []
    for r in results:
        if r.degenerate or not r.ranking:
            out.append((None, False))
        else:
            ref, sim = r.ranking[0]
            out.append((sim, ref in gt[r.query_id]))
    return out


def pr_from_outcomes(outcomes: Sequence[tuple[float | None, bool]]) -> PRCurve:
    total = len(outcomes)
    scored = [(s, c) for s, c in outcomes if s is not None]
    if not scored:
        return PRCurve([], 0.0, total)
    sims = np.array([s for s, _ in scored])
    correct = np.array([c for _, c in scored])
    points = []
    for t in sorted(set(sims.tolist()), reverse=True):
        predicted = sims >= t
        hits = int((predicted & correct).sum())
        points.append(PRPoint(t, _ratio(hits, int(predicted.sum())), hits / total))
    return PRCurve(points, pr_auc(points), total)


def compute_pr(results: Sequence[LocalizationResult], gt: Mapping[str, set[str]]) -> PRCurve:
    """Rank-1 protocol: at threshold t a query predicts its top match iff similarity >= t."""
    return pr_from_outcomes(rank1_outcomes(results, gt))


def recall_at_1(results: Sequence[LocalizationResult], gt: Mapping[str, set[str]]) -> float:
    outcomes = rank1_outcomes(results, gt)
    return sum(c for _, c in outcomes) / len(outcomes) if outcomes else 0.0


# -- timing ------------------------------------------------------------------------

TIMING_FIELDS = ("t_descriptor", "t_search", "t_total")


def order_stats(values: Sequence[float]) -> dict[str, float]:
    """Mean, lower median and nearest-rank 95th percentile."""
    if not values:
        raise ValueError("no values to summarise")
    v = sorted(values)
    n = len(v)
    return {
        "mean": math.fsum(v) / n,
        "median": v[(n - 1) // 2],
        "p95": v[max(math.ceil(0.95 * n) - 1, 0)],
    }


def aggregate_timing(results: Sequence[LocalizationResult]) -> dict[str, dict[str, float]]:
    if not results:
        raise ValueError("cannot aggregate timing of zero results")
    summary = {f: order_stats([getattr(r.timing, f) for r in results]) for f in TIMING_FIELDS}
    summary["count"] = len(results)  # type: ignore[assignment]
    return summary


# -- descriptor correlation ----------------------------------------------------------

@dataclass(frozen=True)
class CorrelationResult:
    value: float
    pairs_used: int
    pairs_skipped: int
    seed: int

    def to_dict(self) -> dict:
        return {"value": self.value, "pairs_used": self.pairs_used,
                "pairs_skipped": self.pairs_skipped, "seed": self.seed}


def _pool(sets: Sequence[FeatureSet]) -> tuple[np.ndarray, str]:
    kinds = {fs.kind for fs in sets}
    if len(kinds) != 1:
        raise KindMismatchError(f"feature sets mix descriptor kinds {sorted(kinds)}")
    kind = kinds.pop()
    rows = [fs.descriptors for fs in sets if len(fs)]
    if not rows:
        raise ValueError("no descriptors on one side")
    return lift(np.concatenate(rows), kind), kind


def pearson_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise Pearson r; NaN where either row is constant."""
    ac = a - a.mean(axis=1, keepdims=True)
    bc = b - b.mean(axis=1, keepdims=True)
    saa = np.einsum("ij,ij->i", ac, ac)
    sbb = np.einsum("ij,ij->i", bc, bc)
    sab = np.einsum("ij,ij->i", ac, bc)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = sab / np.sqrt(saa * sbb)
    r[(saa == 0) | (sbb == 0)] = np.nan
    return np.clip(r, -1.0, 1.0)


def correlation_coefficient(a: Sequence[FeatureSet], b: Sequence[FeatureSet],
                            sample_n: int = 10000, seed: int = 0) -> CorrelationResult:
    """Mean Pearson correlation over randomly drawn (descriptor from a, descriptor from b) pairs.

    The two sides are put in a content-defined order before sampling, so
    swapping the arguments draws the same pairs and returns the same value.
    """
    if sample_n < 1:
        raise ValueError("sample_n must be >= 1")
    xa, ka = _pool(a)
    xb, kb = _pool(b)
    if ka != kb:
        raise KindMismatchError(f"cannot correlate {ka} with {kb} descriptors")
    if hashlib.sha256(xb.tobytes()).digest() < hashlib.sha256(xa.tobytes()).digest():
        xa, xb = xb, xa
    rng = np.random.default_rng(seed)
    ia = rng.integers(len(xa), size=sample_n)
    ib = rng.integers(len(xb), size=sample_n)
    r = pearson_rows(xa[ia], xb[ib])
    ok = ~np.isnan(r)
    used = int(ok.sum())
    if used == 0:
        raise ValueError("every sampled pair had a constant descriptor; correlation undefined")
    value = math.fsum(r[ok].tolist()) / used
    return CorrelationResult(min(max(value, -1.0), 1.0), used, sample_n - used, seed)


# -- artifacts ---------------------------------------------------------------------

def write_pr_csv(curve: PRCurve, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\r\n")
        w.writerow(["threshold", "precision", "recall"])
        for p in curve.points:
            w.writerow([repr(p.threshold), repr(p.precision), repr(p.recall)])


def read_pr_csv(path) -> list[PRPoint]:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    return [PRPoint(float(r["threshold"]), float(r["precision"]), float(r["recall"])) for r in rows]


_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2")


def pr_svg(curves: Mapping[str, PRCurve], title: str = "Precision-Recall") -> str:
    """SVG 1.1 overlay of one step-free polyline per curve."""
    W, H, L, R, T, B = 520, 400, 60, 150, 40, 50
    pw, ph = W - L - R, H - T - B

    def xy(recall, precision):
        return L + recall * pw, T + (1.0 - precision) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{L + pw / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{L}" y="{T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for i in range(6):
        v = i / 5
        x, _ = xy(v, 0)
        _, y = xy(0, v)
        out.append(f'<line x1="{x:.1f}" y1="{T + ph}" x2="{x:.1f}" y2="{T + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{x:.1f}" y="{T + ph + 16}" text-anchor="middle">{v:.1f}</text>')
        out.append(f'<line x1="{L - 4}" y1="{y:.1f}" x2="{L}" y2="{y:.1f}" stroke="black"/>')
        out.append(f'<text x="{L - 7}" y="{y + 4:.1f}" text-anchor="end">{v:.1f}</text>')
    out.append(f'<text x="{L + pw / 2:.1f}" y="{H - 12}" text-anchor="middle">Recall</text>')
    out.append(f'<text x="16" y="{T + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {T + ph / 2:.1f})">Precision</text>')
    for i, (label, curve) in enumerate(curves.items()):
        colour = _PALETTE[i % len(_PALETTE)]
        pts = sorted(curve.points, key=lambda p: (p.recall, -p.threshold))
        if pts:
            coords = " ".join("%.2f,%.2f" % xy(p.recall, p.precision) for p in pts)
            out.append(f'<polyline points="{coords}" fill="none" stroke="{colour}" stroke-width="2"/>')
        ly = T + 14 + 18 * i
        out.append(f'<line x1="{L + pw + 10}" y1="{ly - 4}" x2="{L + pw + 30}" y2="{ly - 4}" '
                   f'stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{L + pw + 34}" y="{ly}">{escape(label)} ({curve.auc:.3f})</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_pr_svg(curves: Mapping[str, PRCurve], path, title: str = "Precision-Recall") -> None:
    Path(path).write_text(pr_svg(curves, title), encoding="utf-8")
