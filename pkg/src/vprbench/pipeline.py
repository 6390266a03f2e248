"""Mapping (dictionary -> VLAD store -> ball tree) and timed localization."""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .features import ExtractorConfig, extract
from .imaging import GrayImage
from .index import BallTree, build_balltree
from .vlad import VladDescriptor, VladOptions, compute_vlad, load_store, save_store, similarity
from .vocab import KindMismatchError, VisualDictionary, load_dictionary, save_dictionary

DEFAULT_N = 20


class ProvenanceError(ValueError):
    """A map is queried with a different extractor or dictionary than it was built with."""


@dataclass(frozen=True)
class TimingRecord:
    t_descriptor: float
    t_search: float
    t_total: float


@dataclass
class LocalizationResult:
    query_id: str
    ranking: list[tuple[str, float]]
    timing: TimingRecord
    distances: list[float] = field(default_factory=list)
    degenerate: bool = False

    @property
    def top(self) -> tuple[str, float] | None:
        return self.ranking[0] if self.ranking else None


@dataclass
class EnvironmentMap:
    dictionary: VisualDictionary
    vlads: list[tuple[str, VladDescriptor]]
    tree: BallTree | None
    extractor_config: ExtractorConfig
    vlad_options: VladOptions = VladOptions()
    provenance: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.vlads)

    @property
    def degenerate_ids(self) -> list[str]:
        return [i for i, v in self.vlads if v.degenerate]


def image_fingerprint(img: GrayImage) -> str:
    return hashlib.sha256(b"%d %d " % (img.width, img.height) + img.data.tobytes()).hexdigest()


def describe_image(img: GrayImage, V: VisualDictionary, cfg: ExtractorConfig,
                   options: VladOptions = VladOptions(), image_id: str = "") -> VladDescriptor:
    return compute_vlad(extract(img, cfg, image_id), V, options)


_worker_state: tuple | None = None


def _init_worker(V, cfg, options):
    global _worker_state
    _worker_state = (V, cfg, options)


def _worker_describe(item):
    image_id, img = item
    V, cfg, options = _worker_state
    return describe_image(img, V, cfg, options, image_id)


def check_compatible(V: VisualDictionary, cfg: ExtractorConfig) -> None:
    if V.descriptor_kind != cfg.descriptor_kind:
        raise KindMismatchError(
            f"dictionary holds {V.descriptor_kind} words but extractor {cfg.kind!r} "
            f"produces {cfg.descriptor_kind} descriptors")


def build_map(ref_images: Iterable[tuple[str, GrayImage]], V: VisualDictionary,
              extractor_config: ExtractorConfig, vlad_options: VladOptions = VladOptions(),
              leaf_size: int = 16, workers: int = 1, dataset: str = "reference") -> EnvironmentMap:
    """Extract, aggregate and index every reference image.

    Degenerate (all-zero) VLADs stay in the store but not in the tree.
    """
    check_compatible(V, extractor_config)
    items = list(ref_images)
    if not items:
        raise ValueError("cannot build a map from an empty dataset")
    if workers > 1:
        with ProcessPoolExecutor(workers, initializer=_init_worker,
                                 initargs=(V, extractor_config, vlad_options)) as pool:
            vlads = list(pool.map(_worker_describe, items, chunksize=8))
    else:
        vlads = [describe_image(img, V, extractor_config, vlad_options, i) for i, img in items]
    entries = [(image_id, v) for (image_id, _), v in zip(items, vlads)]
    return assemble_map(entries, V, extractor_config, vlad_options, leaf_size, {
        "dataset": dataset,
        "image_ids": [i for i, _ in items],
        "image_fingerprints": {i: image_fingerprint(img) for i, img in items},
    })


def assemble_map(entries: list[tuple[str, VladDescriptor]], V: VisualDictionary,
                 extractor_config: ExtractorConfig, vlad_options: VladOptions,
                 leaf_size: int = 16, provenance: dict | None = None) -> EnvironmentMap:
    live = [(i, v) for i, v in entries if not v.degenerate]
    tree = build_balltree(live, leaf_size) if live else None
    prov = dict(provenance or {})
    prov.update({
        "dictionary_fingerprint": V.training_fingerprint,
        "dictionary_k": V.k,
        "descriptor_kind": V.descriptor_kind,
        "extractor": extractor_config.to_dict(),
        "vlad_normalization": vlad_options.describe(),
        "similarity": "1/(1+euclidean)",
        "leaf_size": leaf_size,
        "map_size": len(entries),
        "tree_size": len(live),
        "degenerate_ids": [i for i, v in entries if v.degenerate],
    })
    return EnvironmentMap(V, entries, tree, extractor_config, vlad_options, prov)


def localize(query: GrayImage, env_map: EnvironmentMap, n: int = DEFAULT_N, query_id: str = "",
             extractor_config: ExtractorConfig | None = None) -> LocalizationResult:
    """Rank mapped references by similarity to ``query``.

    ``t_descriptor`` covers detection, description and VLAD aggregation of the
    query; ``t_search`` covers the tree search.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if extractor_config is not None and extractor_config != env_map.extractor_config:
        raise ProvenanceError(
            f"map was built with extractor {env_map.extractor_config.to_dict()}, "
            f"query uses {extractor_config.to_dict()}")
    t0 = time.perf_counter()
    v = compute_vlad(extract(query, env_map.extractor_config, query_id),
                     env_map.dictionary, env_map.vlad_options)
    t1 = time.perf_counter()
    if v.degenerate or env_map.tree is None:
        t2 = time.perf_counter()
        return LocalizationResult(query_id, [], TimingRecord(t1 - t0, t2 - t1, t2 - t0), [], True)
    hits = env_map.tree.query(v, n)
    t2 = time.perf_counter()
    return LocalizationResult(
        query_id,
        [(ref, similarity(d)) for ref, d in hits],
        TimingRecord(t1 - t0, t2 - t1, t2 - t0),
        [d for _, d in hits],
    )


# -- map directories -------------------------------------------------------------

DICT_FILE = "dictionary.vprd"
STORE_FILE = "vlads.vprv"
PROVENANCE_FILE = "provenance.json"


def save_map(env_map: EnvironmentMap, directory) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    save_dictionary(env_map.dictionary, d / DICT_FILE)
    save_store(env_map.vlads, d / STORE_FILE)
    prov = dict(env_map.provenance)
    prov["vlad_options"] = {"intra_norm": env_map.vlad_options.intra_norm,
                            "signed_sqrt": env_map.vlad_options.signed_sqrt}
    (d / PROVENANCE_FILE).write_text(json.dumps(prov, indent=2, sort_keys=True) + "\n")
    return d


def load_map(directory) -> EnvironmentMap:
    d = Path(directory)
    for name in (DICT_FILE, STORE_FILE, PROVENANCE_FILE):
        if not (d / name).is_file():
            raise FileNotFoundError(f"{d}: map is missing {name}")
    V = load_dictionary(d / DICT_FILE)
    prov = json.loads((d / PROVENANCE_FILE).read_text())
    if prov.get("dictionary_fingerprint") != V.training_fingerprint:
        raise ProvenanceError(f"{d}: dictionary fingerprint does not match provenance")
    cfg = ExtractorConfig.from_dict(prov["extractor"])
    opts = VladOptions(**prov.get("vlad_options", {}))
    entries = load_store(d / STORE_FILE)
    keep = {k: v for k, v in prov.items() if k != "vlad_options"}
    return assemble_map(entries, V, cfg, opts, int(prov.get("leaf_size", 16)), keep)
