"""Pipeline configuration: one flat namespace of settings, loadable from a
``key = value`` file and overridable by command-line flags."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

from .cluster import ClusterTrainConfig, FilterConfig
from .embed import derive_seed
from .errors import ConfigError
from .oracle import OracleConfig
from .rank import RankTrainConfig

VARIANTS = ("1", "2", "L")


@dataclass(frozen=True)
class PipelineConfig:
    top_k: int = 3
    threshold: float = 0.25
    rouge_variants: str = "1,2,L"
    seed: int = 0
    embed: str = "hashed:64:0"
    rank_learning_rate: float = 0.01
    rank_epochs: int = 5
    rank_loss: str = "triplet_nll"
    rank_init_scale: float = 0.1
    cluster_k: int = 8
    cluster_epochs: int = 2
    cluster_learning_rate: float = 0.05
    cluster_init: str = "random"
    cluster_ortho_weight: float = 0.0
    oracle_n: int = 2
    oracle_length_factor: float = 2.0
    oracle_mode: str = "auto"
    oracle_auto_cutoff: int = 12

    def __post_init__(self):
        if self.top_k < 1:
            raise ConfigError(f"top_k must be >= 1, got {self.top_k}")
        if not self.variants:
            raise ConfigError("rouge_variants is empty")
        # build every nested config once so their invariants are checked eagerly
        self.rank_cfg, self.cluster_cfg, self.oracle_cfg, self.filter_cfg

    @property
    def variants(self) -> tuple[str, ...]:
        out = []
        for v in self.rouge_variants.split(","):
            v = v.strip().upper()
            if v not in VARIANTS:
                raise ConfigError(f"unknown ROUGE variant {v!r}; choose from {', '.join(VARIANTS)}")
            if v not in out:
                out.append(v)
        return tuple(out)

    @property
    def rank_cfg(self) -> RankTrainConfig:
        return RankTrainConfig(
            learning_rate=self.rank_learning_rate,
            epochs=self.rank_epochs,
            seed=derive_seed(self.seed, "rank"),
            loss_kind=self.rank_loss,
            init_scale=self.rank_init_scale,
        )

    @property
    def cluster_cfg(self) -> ClusterTrainConfig:
        return ClusterTrainConfig(
            clusters=self.cluster_k,
            epochs=self.cluster_epochs,
            learning_rate=self.cluster_learning_rate,
            seed=derive_seed(self.seed, "cluster"),
            init=self.cluster_init,
            ortho_weight=self.cluster_ortho_weight,
        )

    @property
    def oracle_cfg(self) -> OracleConfig:
        return OracleConfig(
            n=self.oracle_n,
            length_factor=self.oracle_length_factor,
            mode=self.oracle_mode,
            auto_cutoff=self.oracle_auto_cutoff,
        )

    @property
    def filter_cfg(self) -> FilterConfig:
        return FilterConfig(self.threshold)

    def triplet_seed(self, doc_id: str) -> int:
        return derive_seed(self.seed, "triplets", doc_id)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def update(self, **values) -> "PipelineConfig":
        coerced = {}
        for name, value in values.items():
            if value is None:
                continue
            coerced[name] = _coerce(name, value)
        return replace(self, **coerced)


_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _coerce(name: str, value):
    if name not in _TYPES:
        raise ConfigError(f"unknown setting {name!r}")
    kind = _TYPES[name]
    try:
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"setting {name!r}: cannot parse {value!r} as {kind}") from None
    return str(value)


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are ignored."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        if key not in _TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown setting {key!r}")
        values[key] = value.strip()
    return values


def setting_names() -> list[str]:
    return list(_TYPES)


def setting_type(name: str) -> str:
    return _TYPES[name]
