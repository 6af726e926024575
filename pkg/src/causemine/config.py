"""Pipeline configuration: JSON file, documented defaults, env overrides.

Only provider endpoints can be overridden from the environment
(CAUSEMINE_TAGGER_URL, CAUSEMINE_EMBED_URL, CAUSEMINE_CONCEPTS_URL);
numeric knobs always come from the file so a run is reproducible from its
config alone.
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import ConfigError

ENV_TAGGER_URL = "CAUSEMINE_TAGGER_URL"
ENV_EMBED_URL = "CAUSEMINE_EMBED_URL"
ENV_CONCEPTS_URL = "CAUSEMINE_CONCEPTS_URL"


@dataclass
class ExpansionConfig:
    top_k: int = 10
    min_similarity: float = 0.5
    min_confidence: float = 0.5
    vectors_path: str | None = None   # word2vec text file for substitution
    synonyms_path: str | None = None


@dataclass
class ClassifyConfig:
    flag_threshold: float = 0.85
    min_degree: int = 4


@dataclass
class StoreConfig:
    bin_size: int = 40_000


@dataclass
class TaggerConfig:
    kind: str = "heuristic"           # heuristic | http | pretagged
    base_url: str | None = None
    timeout: float = 5.0
    retries: int = 2


@dataclass
class ConceptsConfig:
    kind: str | None = None           # local | http | None (enrichment off)
    path: str | None = None
    base_url: str | None = None
    timeout: float = 5.0
    retries: int = 2


@dataclass
class PipelineConfig:
    models: list[dict] = field(default_factory=list)
    expansion: ExpansionConfig = field(default_factory=ExpansionConfig)
    classify: ClassifyConfig = field(default_factory=ClassifyConfig)
    store: StoreConfig = field(default_factory=StoreConfig)
    tagger: TaggerConfig = field(default_factory=TaggerConfig)
    concepts: ConceptsConfig = field(default_factory=ConceptsConfig)
    api_token: str | None = None

    def to_json(self) -> dict:
        return asdict(self)

    def validate(self) -> "PipelineConfig":
        if not 0.0 <= self.expansion.min_similarity <= 1.0:
            raise ConfigError("expansion.min_similarity must be in [0, 1]")
        if not 0.0 <= self.expansion.min_confidence <= 1.0:
            raise ConfigError("expansion.min_confidence must be in [0, 1]")
        if self.expansion.top_k < 1:
            raise ConfigError("expansion.top_k must be at least 1")
        if not 0.0 <= self.classify.flag_threshold <= 1.0:
            raise ConfigError("classify.flag_threshold must be in [0, 1]")
        if self.classify.min_degree < 1:
            raise ConfigError("classify.min_degree must be at least 1")
        if self.store.bin_size < 1:
            raise ConfigError("store.bin_size must be at least 1")
        if self.tagger.kind not in ("heuristic", "http", "pretagged"):
            raise ConfigError(f"unknown tagger kind {self.tagger.kind!r}")
        if self.tagger.kind == "http" and not self.tagger.base_url:
            raise ConfigError("tagger.kind http requires tagger.base_url")
        if self.concepts.kind not in (None, "local", "http"):
            raise ConfigError(f"unknown concepts kind {self.concepts.kind!r}")
        if self.concepts.kind == "local" and not self.concepts.path:
            raise ConfigError("concepts.kind local requires concepts.path")
        if self.concepts.kind == "http" and not self.concepts.base_url:
            raise ConfigError("concepts.kind http requires concepts.base_url")
        seen = set()
        for entry in self.models:
            mid = entry.get("model_id")
            if not mid:
                raise ConfigError(f"model entry missing model_id: {entry}")
            if mid in seen:
                raise ConfigError(f"duplicate model_id {mid!r}")
            seen.add(mid)
        return self


_SECTIONS = {"models", "expansion", "classify", "store", "tagger", "concepts", "api_token"}


def _section(cls, data: dict, name: str):
    allowed = {f for f in cls.__dataclass_fields__}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {name}: {sorted(unknown)}")
    return cls(**data)


def load_config(path: str | Path | None = None) -> PipelineConfig:
    """Read a JSON config file; None means the built-in defaults."""
    if path is None:
        return PipelineConfig().validate()
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    unknown = set(data) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown top-level config keys: {sorted(unknown)}")
    cfg = PipelineConfig(
        models=list(data.get("models", [])),
        expansion=_section(ExpansionConfig, data.get("expansion", {}), "expansion"),
        classify=_section(ClassifyConfig, data.get("classify", {}), "classify"),
        store=_section(StoreConfig, data.get("store", {}), "store"),
        tagger=_section(TaggerConfig, data.get("tagger", {}), "tagger"),
        concepts=_section(ConceptsConfig, data.get("concepts", {}), "concepts"),
        api_token=data.get("api_token"),
    )
    return apply_env_overrides(cfg).validate()


def apply_env_overrides(cfg: PipelineConfig, env: dict | None = None) -> PipelineConfig:
    """Swap provider endpoints for their env values; nothing else moves."""
    if env is None:
        env = dict(os.environ)
    tagger_url = env.get(ENV_TAGGER_URL)
    if tagger_url and cfg.tagger.kind == "http":
        cfg.tagger.base_url = tagger_url
    embed_url = env.get(ENV_EMBED_URL)
    if embed_url:
        for entry in cfg.models:
            if entry.get("kind") == "http_service":
                entry["base_url"] = embed_url
    concepts_url = env.get(ENV_CONCEPTS_URL)
    if concepts_url and cfg.concepts.kind == "http":
        cfg.concepts.base_url = concepts_url
    return cfg


def save_config(cfg: PipelineConfig, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cfg.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
