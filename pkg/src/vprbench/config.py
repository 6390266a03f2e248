"""Run configuration: dataclasses plus an INI loader.

Schema (every key optional; defaults shown)::

    [run]
    seed = 0
    n = 20
    leaf_size = 16
    workers = 1            ; parallel extraction for mapping / training
    sample_n = 10000       ; correlation pairs

    [extractor]
    kind = binary          ; binary | float | passthrough
    max_features = 1000
    fast_threshold = 20
    n_levels = 8
    scale_factor = 1.2
    contrast_threshold = 0.03
    edge_ratio = 10.0
    feature_dir =          ; passthrough only
    feature_kind = float   ; passthrough only

    [dictionary]
    k = 256
    seed =                 ; empty -> run seed
    max_iters = 100
    tol = 1e-4

    [vlad]
    intra_norm = true
    signed_sqrt = true

    [outputs]
    results_csv = results.csv
    timing_csv = timing.csv
    summary_json = summary.json
    pr_csv = pr.csv
    pr_svg = pr.svg
    correlation_json = correlation.json

    [bench]
    presets = binary-low, float-high

    [preset:float-high]    ; optional per-preset overrides of extractor keys and k
    contrast_threshold = 0.01
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .features import ExtractorConfig
from .features.keypoint import BINARY, FLOAT
from .vlad import VladOptions
from .vocab import PRESET_SIZES


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DictionaryConfig:
    k: int = 256
    seed: int | None = None
    max_iters: int = 100
    tol: float = 1e-4

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("dictionary k must be >= 1")
        if self.max_iters < 1:
            raise ConfigError("dictionary max_iters must be >= 1")
        if self.tol < 0:
            raise ConfigError("dictionary tol must be >= 0")


@dataclass(frozen=True)
class OutputNames:
    results_csv: str = "results.csv"
    timing_csv: str = "timing.csv"
    summary_json: str = "summary.json"
    pr_csv: str = "pr.csv"
    pr_svg: str = "pr.svg"
    correlation_json: str = "correlation.json"


@dataclass(frozen=True)
class Preset:
    """A named extractor + dictionary size pairing for the bench command."""

    name: str
    extractor: ExtractorConfig
    k: int


# Dictionary sizes per family; the float family also lowers its contrast
# threshold so small synthetic frames yield enough training descriptors.
BASE_PRESETS = {
    "binary-low": Preset("binary-low", ExtractorConfig(kind=BINARY), PRESET_SIZES["binary-low"]),
    "binary-high": Preset("binary-high", ExtractorConfig(kind=BINARY), PRESET_SIZES["binary-high"]),
    "float-high": Preset("float-high", ExtractorConfig(kind=FLOAT, contrast_threshold=0.01),
                         PRESET_SIZES["float-high"]),
}


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    n: int = 20
    leaf_size: int = 16
    workers: int = 1
    sample_n: int = 10000
    extractor: ExtractorConfig = field(default_factory=ExtractorConfig)
    dictionary: DictionaryConfig = field(default_factory=DictionaryConfig)
    vlad: VladOptions = field(default_factory=VladOptions)
    outputs: OutputNames = field(default_factory=OutputNames)
    presets: tuple[Preset, ...] = (BASE_PRESETS["binary-low"], BASE_PRESETS["float-high"])

    def __post_init__(self):
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.leaf_size < 1:
            raise ConfigError("leaf_size must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.sample_n < 1:
            raise ConfigError("sample_n must be >= 1")
        if not self.presets:
            raise ConfigError("at least one bench preset is required")

    @property
    def dictionary_seed(self) -> int:
        return self.seed if self.dictionary.seed is None else self.dictionary.seed

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["presets"] = [{"name": p.name, "k": p.k, "extractor": p.extractor.to_dict()}
                        for p in self.presets]
        d["dictionary_seed"] = self.dictionary_seed
        return d


def _coerce(raw: str, default, key: str):
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {type(default).__name__}") from None
    return raw


def _section(parser, name: str, cls, base, extra_types: dict | None = None) -> dict:
    """Parse ``[name]`` into kwargs for ``cls`` using ``base`` values as type hints."""
    if not parser.has_section(name):
        return {}
    known = {f.name for f in fields(cls)}
    out = {}
    for key, raw in parser.items(name):
        if key not in known:
            raise ConfigError(f"[{name}] unknown key {key!r}")
        optional = key in (extra_types or {})
        if optional and raw.strip() == "":
            out[key] = None
        else:
            hint = extra_types[key] if optional else getattr(base, key)
            out[key] = _coerce(raw, hint, f"[{name}] {key}")
    return out


_OPTIONAL_HINTS = {"feature_dir": "", "seed": 0}


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text, source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    allowed = {"run", "extractor", "dictionary", "vlad", "outputs", "bench"}
    for s in parser.sections():
        if s not in allowed and not s.startswith("preset:"):
            raise ConfigError(f"{source}: unknown section [{s}]")
    base = RunConfig()
    try:
        run = _section(parser, "run", RunConfig, base)
        for bad in ("extractor", "dictionary", "vlad", "outputs", "presets"):
            if bad in run:
                raise ConfigError(f"[run] {bad} is a section, not a key")
        ext = _section(parser, "extractor", ExtractorConfig, base.extractor, _OPTIONAL_HINTS)
        dic = _section(parser, "dictionary", DictionaryConfig, base.dictionary, _OPTIONAL_HINTS)
        presets = base.presets
        if parser.has_section("bench"):
            names = [p.strip() for p in parser.get("bench", "presets", fallback="").split(",") if p.strip()]
            presets = tuple(_preset(parser, name) for name in names) if names else presets
        return RunConfig(
            extractor=ExtractorConfig(**ext),
            dictionary=DictionaryConfig(**dic),
            vlad=VladOptions(**_section(parser, "vlad", VladOptions, base.vlad)),
            outputs=OutputNames(**_section(parser, "outputs", OutputNames, base.outputs)),
            presets=presets,
            **run,
        )
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def _preset(parser, name: str) -> Preset:
    section = f"preset:{name}"
    base = BASE_PRESETS.get(name)
    if base is None and not parser.has_section(section):
        raise ConfigError(f"unknown preset {name!r}; define [{section}] or use one of {sorted(BASE_PRESETS)}")
    extractor = base.extractor if base else ExtractorConfig()
    k = base.k if base else None
    if parser.has_section(section):
        over = dict(parser.items(section))
        if "k" in over:
            k = _coerce(over.pop("k"), 0, f"[{section}] k")
        known = {f.name for f in fields(ExtractorConfig)}
        unknown = set(over) - known
        if unknown:
            raise ConfigError(f"[{section}] unknown keys {sorted(unknown)}")
        kw = {key: _coerce(v, getattr(extractor, key) if getattr(extractor, key) is not None else "",
                           f"[{section}] {key}") for key, v in over.items()}
        extractor = replace(extractor, **kw)
    if k is None or k < 1:
        raise ConfigError(f"[{section}] needs a dictionary size k >= 1")
    return Preset(name, extractor, k)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    return parse_config(text, str(path))
