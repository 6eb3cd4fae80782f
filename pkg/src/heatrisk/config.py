"""Runtime configuration as plain dataclasses, optionally loaded from a JSON file."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass
class ProviderConfig:
    """Connection settings for a text-generation / embedding provider."""

    endpoint: str = ""
    model: str = "mock"
    credential_env: str = "HEATRISK_PROVIDER_KEY"
    timeout_s: float = 30.0
    max_retries: int = 3
    concurrency: int = 4

    def __post_init__(self) -> None:
        if self.timeout_s <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.concurrency < 1:
            raise ValueError("concurrency must be >= 1")


@dataclass
class ClusteringConfig:
    eps: float = 0.35          # cosine distance
    min_pts: int = 3


@dataclass
class LayoutConfig:
    cell_size: float | None = None   # None: derived so grid capacity >= 4x point count
    hex_size: float = 1.0
    projector: str = "pca"
    coxcomb_r_min: float = 3.0
    coxcomb_r_max: float = 24.0
    coxcomb_scale: float = 4.0


@dataclass
class RagConfig:
    max_chunk_chars: int = 500
    top_k: int = 5


@dataclass
class AppConfig:
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    clustering: ClusteringConfig = field(default_factory=ClusteringConfig)
    layout: LayoutConfig = field(default_factory=LayoutConfig)
    rag: RagConfig = field(default_factory=RagConfig)
    embed_dim: int = 256
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(path: str | Path | None) -> AppConfig:
    """Build an AppConfig from a JSON file; missing sections keep their defaults."""
    cfg = AppConfig()
    if path is None:
        return cfg
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if "provider" in raw:
        cfg.provider = ProviderConfig(**raw["provider"])
    if "clustering" in raw:
        cfg.clustering = ClusteringConfig(**raw["clustering"])
    if "layout" in raw:
        cfg.layout = LayoutConfig(**raw["layout"])
    if "rag" in raw:
        cfg.rag = RagConfig(**raw["rag"])
    for key in ("embed_dim", "seed"):
        if key in raw:
            setattr(cfg, key, raw[key])
    return cfg
