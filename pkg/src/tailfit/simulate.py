"""Monte Carlo model of parallel one-to-many writes.

A run's duration is the congestion-scaled maximum of independent per-node
service times: traffic_factor * max(node draws) + meta_overhead. Per-run
randomness comes from substreams keyed by (campaign seed, run index), so
coupled campaigns (same seed, different node count or traffic factor) are
comparable draw-for-draw.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError

MODEL_KINDS = ("exponential", "lognormal", "normal", "uniform", "pareto", "empirical")

_KIND_ALIASES = {"exp": "exponential", "lognorm": "lognormal", "unif": "uniform"}


@dataclass(frozen=True)
class LatencyModel:
    """Per-storage-node service-time distribution p(s), in seconds.

    Build instances through the named constructors or from_spec; the raw
    constructor performs only validation.
    """

    kind: str
    params: tuple[float, ...] = ()
    values: np.ndarray | None = None
    source: str | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ParameterError(
                f"unknown latency model kind {self.kind!r}; supported: {', '.join(MODEL_KINDS)}"
            )
        p = self.params
        if any(not math.isfinite(v) for v in p):
            raise ParameterError(f"{self.kind} parameters must be finite, got {p}")
        if self.kind == "exponential":
            if len(p) != 1 or p[0] <= 0:
                raise ParameterError(f"exponential needs rate > 0, got {p}")
        elif self.kind == "lognormal":
            if len(p) != 2 or p[1] <= 0:
                raise ParameterError(f"lognormal needs (log-mean, log-sd > 0), got {p}")
        elif self.kind == "normal":
            if len(p) != 2 or p[1] <= 0:
                raise ParameterError(f"normal needs (mean, sd > 0), got {p}")
        elif self.kind == "uniform":
            # service times are durations, so the lower endpoint cannot be negative
            if len(p) != 2 or not p[0] < p[1] or p[0] < 0:
                raise ParameterError(f"uniform needs 0 <= low < high, got {p}")
        elif self.kind == "pareto":
            if len(p) != 2 or p[0] <= 0 or p[1] <= 0:
                raise ParameterError(f"pareto needs (scale > 0, tail-index > 0), got {p}")
        elif self.kind == "empirical":
            if self.values is None or len(self.values) == 0:
                raise ParameterError("empirical model needs a nonempty value sample")
            arr = np.asarray(self.values, dtype=float)
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ParameterError("empirical values must be finite and >= 0")
            object.__setattr__(self, "values", arr)

    @classmethod
    def exponential(cls, rate: float) -> "LatencyModel":
        return cls("exponential", (float(rate),))

    @classmethod
    def lognormal(cls, log_mean: float, log_sd: float) -> "LatencyModel":
        return cls("lognormal", (float(log_mean), float(log_sd)))

    @classmethod
    def normal(cls, mean: float, sd: float) -> "LatencyModel":
        """Normal service times, truncated at 0 by rejection (so not exactly normal)."""
        return cls("normal", (float(mean), float(sd)))

    @classmethod
    def uniform(cls, low: float, high: float) -> "LatencyModel":
        return cls("uniform", (float(low), float(high)))

    @classmethod
    def pareto(cls, scale: float, tail_index: float) -> "LatencyModel":
        return cls("pareto", (float(scale), float(tail_index)))

    @classmethod
    def empirical(cls, values, source: str | None = None) -> "LatencyModel":
        return cls("empirical", (), np.asarray(values, dtype=float), source)

    @classmethod
    def from_spec(cls, text: str) -> "LatencyModel":
        """Parse 'kind:p1,p2' (e.g. 'exp:1', 'uniform:0,1', 'empirical:file.csv')."""
        kind, sep, rest = text.partition(":")
        kind = _KIND_ALIASES.get(kind.strip(), kind.strip())
        if kind not in MODEL_KINDS:
            raise ParameterError(
                f"unknown latency model kind {kind!r}; supported: {', '.join(MODEL_KINDS)}"
            )
        if kind == "empirical":
            if not sep or not rest:
                raise ParameterError("empirical model needs a file path: empirical:PATH")
            return cls.empirical(_load_empirical(rest.strip()), source=rest.strip())
        try:
            params = tuple(float(tok) for tok in rest.split(",")) if rest else ()
        except ValueError as exc:
            raise ParameterError(f"could not parse parameters in {text!r}: {exc}") from None
        return cls(kind, params)

    @property
    def spec(self) -> str:
        """Canonical 'kind:params' form (inverse of from_spec for manifests)."""
        if self.kind == "empirical":
            return f"empirical:{self.source if self.source else '-'}"
        return f"{self.kind}:{','.join(repr(v) for v in self.params)}"

    def lower_bound(self) -> float:
        if self.kind == "uniform":
            return self.params[0]
        if self.kind == "pareto":
            return self.params[0]
        if self.kind == "empirical":
            return float(np.min(self.values))
        return 0.0

    def draw(self, rng: np.random.Generator, size: int):
        """size independent draws, consumed element-by-element from rng's stream.

        Element-order consumption is what makes a (seed, run) substream give a
        fixed value for node j regardless of how many nodes follow it.
        """
        if self.kind == "exponential":
            return rng.exponential(1.0 / self.params[0], size)
        if self.kind == "lognormal":
            return rng.lognormal(self.params[0], self.params[1], size)
        if self.kind == "normal":
            mean, sd = self.params
            out = np.empty(size)
            for j in range(size):
                v = rng.normal(mean, sd)
                while v < 0.0:
                    v = rng.normal(mean, sd)
                out[j] = v
            return out
        if self.kind == "uniform":
            return rng.uniform(self.params[0], self.params[1], size)
        if self.kind == "pareto":
            scale, tail = self.params
            return scale * (1.0 - rng.random(size)) ** (-1.0 / tail)
        return self.values[rng.integers(0, self.values.size, size)]


def _load_empirical(path: str) -> np.ndarray:
    """Load atoms from an ingest-format CSV or a plain one-value-per-line file."""
    text = Path(path).read_text()
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParameterError(f"empirical sample file {path} is empty")
    if lines[0].lower().startswith("run,"):
        from .ingest import parse_log

        return parse_log(path).durations
    try:
        return np.array([float(ln) for ln in lines])
    except ValueError as exc:
        raise ParameterError(f"could not parse empirical sample {path}: {exc}") from None


@dataclass(frozen=True)
class SimConfig:
    """Campaign settings: node count, constant congestion factor, run count, seed."""

    model: LatencyModel
    nodes: int = 16
    traffic_factor: float = 1.0
    runs: int = 400
    seed: int = 0
    meta_overhead: float = 0.0
    keep_node_max: bool = False

    def __post_init__(self):
        if self.nodes < 1:
            raise ParameterError(f"nodes must be >= 1, got {self.nodes}")
        if self.runs < 1:
            raise ParameterError(f"runs must be >= 1, got {self.runs}")
        if not (math.isfinite(self.traffic_factor) and self.traffic_factor >= 1.0):
            raise ParameterError(
                f"traffic factor must be >= 1 (1 means quiescent), got {self.traffic_factor}"
            )
        if not (isinstance(self.seed, int) and self.seed >= 0):
            raise ParameterError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if not (math.isfinite(self.meta_overhead) and self.meta_overhead >= 0.0):
            raise ParameterError(f"meta_overhead must be >= 0, got {self.meta_overhead}")


@dataclass(frozen=True)
class ObservationSet:
    """Campaign output: one duration per run, in run order."""

    durations: np.ndarray
    config: SimConfig
    node_max: np.ndarray | None = None


def _run_rng(seed: int, run: int) -> np.random.Generator:
    return np.random.default_rng([seed, run])


def sample_node(model: LatencyModel, rng: np.random.Generator) -> float:
    """One service-time draw from p(s)."""
    return float(model.draw(rng, 1)[0])


def simulate_write(config: SimConfig, rng: np.random.Generator) -> float:
    """One observed duration: traffic_factor * max of node draws + meta_overhead."""
    draws = config.model.draw(rng, config.nodes)
    return config.traffic_factor * float(np.max(draws)) + config.meta_overhead


def simulate_campaign(config: SimConfig) -> ObservationSet:
    """runs independent writes, bit-reproducible for a fixed seed."""
    durations = np.empty(config.runs)
    node_max = np.empty(config.runs) if config.keep_node_max else None
    for run in range(config.runs):
        rng = _run_rng(config.seed, run)
        draws = config.model.draw(rng, config.nodes)
        peak = float(np.max(draws))
        if node_max is not None:
            node_max[run] = peak
        durations[run] = config.traffic_factor * peak + config.meta_overhead
    return ObservationSet(durations=durations, config=config, node_max=node_max)
