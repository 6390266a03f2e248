"""Dataset manifests and ground-truth files."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping

from .imaging import GrayImage, load_image

ROLES = ("training", "reference", "query")


class ManifestError(ValueError):
    pass


@dataclass
class DatasetManifest:
    """Ordered list of image files under ``root``; image ids are file stems."""

    name: str
    root: Path
    images: list[str]
    role: str
    ground_truth: Path | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.root = Path(self.root)
        if self.ground_truth is not None:
            self.ground_truth = Path(self.ground_truth)
        if self.role not in ROLES:
            raise ManifestError(f"{self.name}: role must be one of {ROLES}, got {self.role!r}")
        ids = self.ids
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ManifestError(f"{self.name}: duplicate image ids {dupes}")

    @property
    def ids(self) -> list[str]:
        return [Path(p).stem for p in self.images]

    def paths(self) -> list[Path]:
        return [self.root / p for p in self.images]

    def validate(self) -> None:
        missing = [str(p) for p in self.paths() if not p.is_file()]
        if missing:
            raise ManifestError(f"{self.name}: {len(missing)} missing image(s): {missing[:5]}")
        if self.ground_truth is not None and not self.ground_truth.is_file():
            raise ManifestError(f"{self.name}: ground truth {self.ground_truth} not found")

    def iter_images(self) -> Iterator[tuple[str, GrayImage]]:
        for image_id, path in zip(self.ids, self.paths()):
            yield image_id, load_image(path)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for image_id, path in zip(self.ids, self.paths()):
            h.update(image_id.encode() + b"\0" + path.read_bytes())
        return h.hexdigest()

    def to_dict(self, relative_to: Path | None = None) -> dict:
        def rel(p: Path | None):
            if p is None:
                return None
            if relative_to is not None:
                try:
                    return str(p.resolve().relative_to(relative_to.resolve()))
                except ValueError:
                    pass
            return str(p)

        return {"name": self.name, "root": rel(self.root), "images": list(self.images),
                "role": self.role, "ground_truth": rel(self.ground_truth), "meta": self.meta}

    def save(self, path) -> None:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(path.parent), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        path = Path(path)
        try:
            d = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ManifestError(f"{path}: {exc}") from exc
        base = path.parent
        root = Path(d["root"])
        gt = d.get("ground_truth")
        return cls(d["name"], root if root.is_absolute() else base / root, list(d["images"]),
                   d["role"], (Path(gt) if Path(gt).is_absolute() else base / gt) if gt else None,
                   d.get("meta", {}))

    @classmethod
    def from_directory(cls, directory, role: str, name: str | None = None,
                       ground_truth=None) -> "DatasetManifest":
        directory = Path(directory)
        files = sorted(p.name for p in directory.iterdir()
                       if p.suffix.lower() in (".pgm", ".png"))
        return cls(name or directory.name, directory, files, role, ground_truth)


def load_manifest(path_or_dir, role: str) -> DatasetManifest:
    """A manifest JSON file, or a bare image directory taken in sorted order."""
    p = Path(path_or_dir)
    m = DatasetManifest.from_directory(p, role) if p.is_dir() else DatasetManifest.load(p)
    if m.role != role:
        raise ManifestError(f"{m.name}: manifest role is {m.role!r}, expected {role!r}")
    return m


# -- ground truth ------------------------------------------------------------------

def read_ground_truth(path) -> dict[str, set[str]]:
    """CSV rows ``query_id,ref_id;ref_id;...`` (a header row is optional)."""
    gt: dict[str, set[str]] = {}
    with open(path, newline="", encoding="utf-8") as f:
        for i, row in enumerate(csv.reader(f)):
            if not row or (i == 0 and row[0] == "query_id"):
                continue
            if len(row) != 2:
                raise ManifestError(f"{path}:{i + 1}: expected 2 columns, got {len(row)}")
            refs = {r for r in row[1].split(";") if r}
            if not refs:
                raise ManifestError(f"{path}:{i + 1}: query {row[0]!r} has no reference ids")
            gt[row[0]] = refs
    return gt


def write_ground_truth(gt: Mapping[str, set[str]], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\r\n")
        w.writerow(["query_id", "reference_ids"])
        for q in gt:
            w.writerow([q, ";".join(sorted(gt[q]))])


def identity_ground_truth(ids) -> dict[str, set[str]]:
    """Every image matches itself: the ground truth for same-loop self-tests."""
    return {i: {i} for i in ids}


def open_manifest(path_or_dir) -> DatasetManifest:
    """Like ``load_manifest`` but accepts any role (bare directories count as queries)."""
    p = Path(path_or_dir)
    return DatasetManifest.from_directory(p, "query") if p.is_dir() else DatasetManifest.load(p)


@dataclass
class Bundle:
    """Training, reference and query manifests that together define one experiment."""

    name: str
    training: DatasetManifest
    reference: DatasetManifest
    queries: dict[str, DatasetManifest]
    path: Path

    def ground_truth(self, split: str) -> dict[str, set[str]]:
        m = self.queries[split]
        if m.ground_truth is None:
            raise ManifestError(f"query split {split!r} has no ground truth file")
        return read_ground_truth(m.ground_truth)


def load_bundle(path) -> Bundle:
    """Read ``bundle.json`` (or a directory containing it)."""
    p = Path(path)
    if p.is_dir():
        p = p / "bundle.json"
    try:
        d = json.loads(p.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"{p}: {exc}") from exc
    base = p.parent
    try:
        training = load_manifest(base / d["training"], "training")
        reference = load_manifest(base / d["reference"], "reference")
        queries = {name: load_manifest(base / rel, "query") for name, rel in d["queries"].items()}
    except KeyError as exc:
        raise ManifestError(f"{p}: bundle lacks {exc}") from None
    if not queries:
        raise ManifestError(f"{p}: bundle defines no query splits")
    return Bundle(d.get("name", base.name), training, reference, queries, p)
