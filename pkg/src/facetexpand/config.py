"""Run configuration: one flat record of every tunable, loadable from TOML."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .clustering import COSINE, NEG_SQ_EUCLIDEAN, ClusterConfig
from .corpus import IndexConfig
from .errors import ConfigError
from .fusion import FusionConfig

CORPUS_SCORER = "corpus"
MLM_SCORER = "mlm"


@dataclass
class RunConfig:
    # corpus
    window: int = 2
    min_count: int = 3
    # clustering
    metric: str = NEG_SQ_EUCLIDEAN
    preference: float | str = -60.0
    damping: float = 0.9
    max_iter: int = 1000
    stable_iters: int = 100
    max_contexts: int = 500
    noise_seed: int = 0
    include_stopword_contexts: bool = False
    # fusion
    ridge: float = 1e-3
    tau: float = 0.25
    tau_raw: float = 0.5
    softmax_scale: float = 10.0
    center: bool = False
    # expansion
    scorer: str = CORPUS_SCORER
    top_k: int = 200
    expansion_size: int = 20
    frequency_weighted: bool = False
    # evaluation
    cutoffs: list[int] = field(default_factory=lambda: [5, 10, 20])
    # execution
    threads: int = 0  # 0 = number of available cores

    def validate(self) -> "RunConfig":
        if self.window < 1:
            raise ConfigError("window must be >= 1")
        if self.min_count < 1:
            raise ConfigError("min_count must be >= 1")
        if self.metric not in (COSINE, NEG_SQ_EUCLIDEAN):
            raise ConfigError(f"unknown metric {self.metric!r}")
        if isinstance(self.preference, str) and self.preference != "median":
            raise ConfigError("preference must be a number or 'median'")
        if not 0.5 <= self.damping < 1.0:
            raise ConfigError("damping must lie in [0.5, 1)")
        if self.max_iter < 1 or self.stable_iters < 1:
            raise ConfigError("max_iter and stable_iters must be >= 1")
        if self.max_contexts < 1:
            raise ConfigError("max_contexts must be >= 1")
        if self.ridge <= 0:
            raise ConfigError("ridge must be positive")
        if self.tau < 0 or self.tau_raw < 0:
            raise ConfigError("thresholds must be non-negative")
        if self.softmax_scale <= 0:
            raise ConfigError("softmax_scale must be positive")
        if self.scorer not in (CORPUS_SCORER, MLM_SCORER):
            raise ConfigError(f"unknown scorer {self.scorer!r}")
        if self.top_k < 1 or self.expansion_size < 1:
            raise ConfigError("top_k and expansion_size must be >= 1")
        if not self.cutoffs or any(c < 1 for c in self.cutoffs):
            raise ConfigError("cutoffs must be positive integers")
        if self.threads < 0:
            raise ConfigError("threads must be >= 0")
        return self

    def index_config(self, stopwords=frozenset()) -> IndexConfig:
        return IndexConfig(
            window=self.window, min_count=self.min_count, stopwords=stopwords
        )

    def cluster_config(self) -> ClusterConfig:
        return ClusterConfig(
            metric=self.metric,
            preference=self.preference,
            damping=self.damping,
            max_iter=self.max_iter,
            stable_iters=self.stable_iters,
            max_contexts=self.max_contexts,
            noise_seed=self.noise_seed,
            include_stopword_contexts=self.include_stopword_contexts,
        )

    def fusion_config(self) -> FusionConfig:
        return FusionConfig(
            tau=self.tau,
            tau_raw=self.tau_raw,
            ridge=self.ridge,
            softmax_scale=self.softmax_scale,
            center=self.center,
        )

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def apply_overrides(config: RunConfig, overrides: dict) -> RunConfig:
    unknown = set(overrides) - set(_FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    cleaned = {}
    for key, value in overrides.items():
        if key == "cutoffs":
            if not isinstance(value, list):
                raise ConfigError("cutoffs must be a list of integers")
            value = [int(v) for v in value]
        cleaned[key] = value
    return dataclasses.replace(config, **cleaned).validate()


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """defaults < file < overrides."""
    config = RunConfig()
    if path is not None:
        with open(path, "rb") as fh:
            try:
                data = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from exc
        config = apply_overrides(config, data)
    if overrides:
        config = apply_overrides(config, overrides)
    return config.validate()
