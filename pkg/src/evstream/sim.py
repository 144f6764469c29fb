"""Seeded Monte-Carlo harness: type-I behaviour under optional stopping,
power/sample-size search, the stillbirth-trial replay, and growth-rate
estimation.

Every replication draws from its own counter-based substream keyed by
(seed, replication index), and aggregation is order-fixed, so results
are bit-identical for a given config regardless of worker count.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .core import BlockDesign
from .errors import ValidationError
from .process import (
    BayesBeta,
    BayesRestricted,
    PointFromRate,
    SimplePoint,
    model_from_config,
)
from .restricted import DEFAULT_GRID_PRECISION, Divergence, divergence_value

SCENARIOS = ("type1", "power", "swepis", "growth")

#: The stillbirth-trial replay protocol: 1380 one/one blocks, six events
#: in group b with the last pinned to the final block, none in group a.
SWEPIS_BLOCKS = 1380
SWEPIS_EVENTS = 6
SWEPIS_DIFFERENCE_DELTA = 0.00318
SWEPIS_LOG_ODDS_DELTA = math.log(2.0)
SWEPIS_CONTROL_RATE = 0.0001


@dataclass(frozen=True)
class SimConfig:
    scenario: str
    replications: int
    max_blocks: int
    alpha: float
    design: BlockDesign
    generator: tuple[float, float]
    models: list[dict]
    seed: int
    include_fisher: bool = False

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ValidationError(f"unknown scenario {self.scenario!r}")
        if self.replications < 1:
            raise ValidationError("replications must be >= 1")
        if self.max_blocks < 1:
            raise ValidationError("max_blocks must be >= 1")
        if not (0.0 < self.alpha <= 1.0):
            raise ValidationError("alpha must lie in (0, 1]")
        for theta in self.generator:
            if not (0.0 <= theta <= 1.0):
                raise ValidationError("generator rates must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "replications": self.replications,
            "max_blocks": self.max_blocks,
            "alpha": self.alpha,
            "design": {"n_a": self.design.n_a, "n_b": self.design.n_b},
            "generator": list(self.generator),
            "models": self.models,
            "seed": self.seed,
            "include_fisher": self.include_fisher,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        design = data.get("design", {"n_a": 1, "n_b": 1})
        return cls(
            scenario=data["scenario"],
            replications=int(data.get("replications", 1000)),
            max_blocks=int(data.get("max_blocks", 1000)),
            alpha=float(data.get("alpha", 0.05)),
            design=BlockDesign(int(design["n_a"]), int(design["n_b"])),
            generator=tuple(float(v) for v in data.get("generator", (0.1, 0.1))),
            models=list(data.get("models", [{"type": "beta", "gamma": 0.18}])),
            seed=int(data.get("seed", 0)),
            include_fisher=bool(data.get("include_fisher", False)),
        )


def default_type1_models(
    grid_precision: float = DEFAULT_GRID_PRECISION,
) -> list[dict]:
    """The comparison set for the optional-stopping type-I experiment."""
    log_odds = divergence_value(Divergence.LOG_ODDS_RATIO, 0.1, 0.15)
    return [
        {"label": "beta-gamma-0.5", "type": "beta", "gamma": 0.5},
        {"label": "beta-gamma-0.18", "type": "beta", "gamma": 0.18},
        {
            "label": "restricted-difference",
            "type": "restricted",
            "divergence": "difference",
            "delta": 0.05,
            "alpha": 0.18,
            "beta": 0.18,
            "grid_precision": grid_precision,
        },
        {
            "label": "restricted-log-odds",
            "type": "restricted",
            "divergence": "log_odds_ratio",
            "delta": log_odds,
            "alpha": 0.18,
            "beta": 0.18,
            "grid_precision": grid_precision,
        },
        {
            "label": "point-from-rate",
            "type": "restricted",
            "divergence": "difference",
            "delta": 0.05,
            "control_rate": 0.1,
        },
    ]


def default_swepis_models(
    grid_precision: float = DEFAULT_GRID_PRECISION,
) -> list[dict]:
    """The four analysis variants of the stillbirth-trial replay."""
    return [
        {"label": "unrestricted-beta", "type": "beta", "gamma": 0.18},
        {
            "label": "restricted-difference",
            "type": "restricted",
            "divergence": "difference",
            "delta": SWEPIS_DIFFERENCE_DELTA,
            "alpha": 0.18,
            "beta": 0.18,
            "grid_precision": grid_precision,
        },
        {
            "label": "restricted-log-odds",
            "type": "restricted",
            "divergence": "log_odds_ratio",
            "delta": SWEPIS_LOG_ODDS_DELTA,
            "alpha": 0.18,
            "beta": 0.18,
            "grid_precision": grid_precision,
        },
        {
            "label": "point-from-rate",
            "type": "restricted",
            "divergence": "difference",
            "delta": SWEPIS_DIFFERENCE_DELTA,
            "control_rate": SWEPIS_CONTROL_RATE,
        },
    ]


def _spawn_children(seed: int, replications: int):
    return np.random.SeedSequence(seed).spawn(replications)


def block_count_streams(
    theta_a: float,
    theta_b: float,
    design: BlockDesign,
    max_blocks: int,
    replications: int,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-block success counts for i.i.d. streams.

    Each replication thresholds its own uniform draws, so runs with the
    same seed but different rates are coupled (paired-seed comparisons).
    """
    for theta in (theta_a, theta_b):
        if not (0.0 <= theta <= 1.0):
            raise ValidationError("stream rates must lie in [0, 1]")
    counts_a = np.empty((replications, max_blocks), dtype=np.int64)
    counts_b = np.empty((replications, max_blocks), dtype=np.int64)
    for r, child in enumerate(_spawn_children(seed, replications)):
        gen = np.random.Generator(np.random.Philox(child))
        u = gen.random((max_blocks, design.n))
        counts_a[r] = (u[:, : design.n_a] < theta_a).sum(axis=1)
        counts_b[r] = (u[:, design.n_a :] < theta_b).sum(axis=1)
    return counts_a, counts_b


def swepis_streams(
    replications: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Permutation replay streams: five events uniformly among the first
    1379 blocks, the sixth pinned to block 1380, group a all zeros."""
    counts_a = np.zeros((replications, SWEPIS_BLOCKS), dtype=np.int64)
    counts_b = np.zeros((replications, SWEPIS_BLOCKS), dtype=np.int64)
    for r, child in enumerate(_spawn_children(seed, replications)):
        gen = np.random.Generator(np.random.Philox(child))
        positions = gen.choice(
            SWEPIS_BLOCKS - 1, size=SWEPIS_EVENTS - 1, replace=False
        )
        counts_b[r, positions] = 1
    counts_b[:, SWEPIS_BLOCKS - 1] = 1
    return counts_a, counts_b


def fold_log_e(
    model_config: dict,
    counts_a: np.ndarray,
    counts_b: np.ndarray,
    design: BlockDesign,
    workers: Optional[int] = None,
) -> np.ndarray:
    """Cumulative log e-value trajectories for one model config."""
    config = {k: v for k, v in model_config.items() if k != "label"}
    model = model_from_config(config)
    if isinstance(model, BayesBeta):
        p = model.prior
        return kernels.beta_log_e_batch(
            counts_a,
            counts_b,
            design.n_a,
            design.n_b,
            p.alpha_a,
            p.beta_a,
            p.alpha_b,
            p.beta_b,
        )
    if isinstance(model, (SimplePoint, PointFromRate)):
        point = model.point
        return kernels.point_log_e_batch(
            counts_a,
            counts_b,
            design.n_a,
            design.n_b,
            point.theta_a,
            point.theta_b,
        )
    if isinstance(model, BayesRestricted):
        return kernels.restricted_log_e_batch(
            counts_a, counts_b, design, model.posterior, workers=workers
        )
    raise ValidationError(f"cannot simulate model {type(model).__name__}")


def first_crossing(log_e: np.ndarray, log_threshold: float) -> np.ndarray:
    """1-based block index of the first threshold crossing, -1 if never."""
    hit = log_e >= log_threshold
    any_hit = hit.any(axis=1)
    idx = hit.argmax(axis=1) + 1
    return np.where(any_hit, idx, -1).astype(np.int64)


def _rejection_curve(
    stop_block: np.ndarray, max_blocks: int
) -> tuple[np.ndarray, np.ndarray]:
    reps = stop_block.shape[0]
    stopped = stop_block[stop_block > 0]
    counts = np.bincount(stopped, minlength=max_blocks + 1)[1:]
    rate = np.cumsum(counts) / reps
    se = np.sqrt(rate * (1.0 - rate) / reps)
    return rate, se


@dataclass
class VariantResult:
    """Per-model outcome distributions of one simulation scenario."""

    label: str
    max_blocks: int
    stop_block: np.ndarray
    rejection_rate: np.ndarray
    rejection_se: np.ndarray
    final_log_e: Optional[np.ndarray] = None

    @property
    def stopping_times(self) -> np.ndarray:
        """Stopping time under the capped aggressive rule (cap when the
        threshold is never crossed)."""
        return np.where(self.stop_block > 0, self.stop_block, self.max_blocks)

    def summary(self) -> dict:
        times = self.stopping_times
        quantiles = {
            f"q{int(q * 100):02d}": float(np.quantile(times, q))
            for q in (0.05, 0.25, 0.5, 0.75, 0.95)
        }
        out = {
            "label": self.label,
            "rejected_fraction": float(np.mean(self.stop_block > 0)),
            "final_rejection_rate": float(self.rejection_rate[-1]),
            "final_rejection_se": float(self.rejection_se[-1]),
            "mean_stopping_time": float(times.mean()),
            "stopping_quantiles": quantiles,
        }
        if self.final_log_e is not None:
            out["mean_final_log_e"] = float(self.final_log_e.mean())
            out["mean_final_e"] = float(np.exp(self.final_log_e).mean())
        return out

    def to_dict(self) -> dict:
        out = self.summary()
        out["stop_block"] = self.stop_block.tolist()
        out["rejection_rate"] = self.rejection_rate.tolist()
        out["rejection_se"] = self.rejection_se.tolist()
        if self.final_log_e is not None:
            out["final_log_e"] = self.final_log_e.tolist()
        return out


def _slug(label: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", label.lower()).strip("-")


@dataclass
class SimResult:
    scenario: str
    config: dict
    variants: list[VariantResult] = field(default_factory=list)

    def variant(self, label: str) -> VariantResult:
        for v in self.variants:
            if v.label == label:
                return v
        raise KeyError(label)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "config": self.config,
            "variants": [v.to_dict() for v in self.variants],
        }

    def write(self, out_dir: "str | Path") -> list[Path]:
        """One CSV per variant (block, rejection_rate, se) plus the full
        distributions as JSON. Returns the paths written."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for v in self.variants:
            path = out_dir / f"{self.scenario}_{_slug(v.label)}.csv"
            lines = ["block,rejection_rate,se"]
            for t in range(v.max_blocks):
                lines.append(
                    f"{t + 1},{v.rejection_rate[t]!r},{v.rejection_se[t]!r}"
                )
            path.write_text("\n".join(lines) + "\n")
            written.append(path)
        json_path = out_dir / f"{self.scenario}.json"
        json_path.write_text(json.dumps(self.to_dict(), sort_keys=True))
        written.append(json_path)
        return written


def simulate_type1(
    config: SimConfig, workers: Optional[int] = None
) -> SimResult:
    """Null streams under the most aggressive stopping rule.

    Tracks the first threshold crossing per model variant; optionally
    also re-computes the one-sided exact-test p on the cumulative table
    after every block (the misused-fixed-design comparator) and records
    its first p < alpha.
    """
    theta_a, theta_b = config.generator
    if theta_a != theta_b:
        raise ValidationError("type1 scenario needs equal generator rates")
    counts_a, counts_b = block_count_streams(
        theta_a,
        theta_b,
        config.design,
        config.max_blocks,
        config.replications,
        config.seed,
    )
    log_threshold = math.log(1.0 / config.alpha)
    result = SimResult(scenario="type1", config=config.to_dict())
    for model in config.models:
        log_e = fold_log_e(model, counts_a, counts_b, config.design, workers)
        stop = first_crossing(log_e, log_threshold)
        rate, se = _rejection_curve(stop, config.max_blocks)
        result.variants.append(
            VariantResult(
                label=model.get("label", model.get("type", "model")),
                max_blocks=config.max_blocks,
                stop_block=stop,
                rejection_rate=rate,
                rejection_se=se,
                final_log_e=log_e[:, -1].copy(),
            )
        )
    if config.include_fisher:
        p_values = kernels.fisher_curve_batch(
            counts_a, counts_b, config.design.n_a, config.design.n_b
        )
        hit = p_values < config.alpha
        any_hit = hit.any(axis=1)
        stop = np.where(any_hit, hit.argmax(axis=1) + 1, -1).astype(np.int64)
        rate, se = _rejection_curve(stop, config.max_blocks)
        result.variants.append(
            VariantResult(
                label="fisher-optional-stopping",
                max_blocks=config.max_blocks,
                stop_block=stop,
                rejection_rate=rate,
                rejection_se=se,
            )
        )
    return result


@dataclass
class PowerResult:
    """Smallest block budget reaching the power target, plus the mean
    stopping time under that budget."""

    target_power: float
    effect: float
    ceiling: int
    worst_case_m: Optional[int]
    expected_stopping_time: Optional[float]
    per_theta: list[dict]

    def to_dict(self) -> dict:
        return {
            "target_power": self.target_power,
            "effect": self.effect,
            "ceiling": self.ceiling,
            "worst_case_m": self.worst_case_m,
            "expected_stopping_time": self.expected_stopping_time,
            "per_theta": self.per_theta,
        }


def _minimal_m(stop_block: np.ndarray, target: float, ceiling: int):
    """Binary search for the smallest cap reaching the target power.

    Power at cap m is the fraction of replications whose first crossing
    is at most m, which is nondecreasing in m on fixed streams.
    """

    def power(m: int) -> float:
        return float(np.mean((stop_block > 0) & (stop_block <= m)))

    if power(ceiling) < target:
        return None, None
    lo, hi = 1, ceiling
    while lo < hi:
        mid = (lo + hi) // 2
        if power(mid) >= target:
            hi = mid
        else:
            lo = mid + 1
    capped = np.where((stop_block > 0) & (stop_block <= lo), stop_block, lo)
    return lo, float(capped.mean())


def simulate_power(
    config: SimConfig,
    target_power: float = 0.8,
    theta_a_grid: Optional[Sequence[float]] = None,
    workers: Optional[int] = None,
) -> PowerResult:
    """Worst-case and expected sample sizes for a power target.

    The effect size is the rate difference of the generator pair; the
    worst case is taken over ``theta_a_grid`` (default: the generator's
    control rate only). Replications reuse the same substreams across
    grid points, so comparisons are paired.
    """
    if not (0.0 < target_power < 1.0):
        raise ValidationError("target power must lie in (0, 1)")
    theta_a0, theta_b0 = config.generator
    effect = theta_b0 - theta_a0
    if effect == 0:
        raise ValidationError("power scenario needs a nonzero effect")
    grid = list(theta_a_grid) if theta_a_grid is not None else [theta_a0]
    model = config.models[0]
    log_threshold = math.log(1.0 / config.alpha)

    per_theta = []
    for theta_a in grid:
        theta_b = theta_a + effect
        if not (0.0 <= theta_b <= 1.0):
            raise ValidationError(
                f"theta_a={theta_a} infeasible for effect {effect}"
            )
        counts_a, counts_b = block_count_streams(
            theta_a,
            theta_b,
            config.design,
            config.max_blocks,
            config.replications,
            config.seed,
        )
        log_e = fold_log_e(model, counts_a, counts_b, config.design, workers)
        stop = first_crossing(log_e, log_threshold)
        m_needed, expected = _minimal_m(stop, target_power, config.max_blocks)
        per_theta.append(
            {
                "theta_a": theta_a,
                "theta_b": theta_b,
                "m_needed": m_needed,
                "expected_stopping_time": expected,
            }
        )

    if any(entry["m_needed"] is None for entry in per_theta):
        worst_m, expected = None, None
    else:
        worst = max(per_theta, key=lambda e: e["m_needed"])
        worst_m = worst["m_needed"]
        expected = worst["expected_stopping_time"]
    return PowerResult(
        target_power=target_power,
        effect=effect,
        ceiling=config.max_blocks,
        worst_case_m=worst_m,
        expected_stopping_time=expected,
        per_theta=per_theta,
    )


def swepis_config(
    replications: int = 1000,
    seed: int = 0,
    alpha: float = 0.05,
    grid_precision: float = DEFAULT_GRID_PRECISION,
    models: Optional[list[dict]] = None,
) -> SimConfig:
    return SimConfig(
        scenario="swepis",
        replications=replications,
        max_blocks=SWEPIS_BLOCKS,
        alpha=alpha,
        design=BlockDesign(1, 1),
        generator=(0.0, SWEPIS_EVENTS / SWEPIS_BLOCKS),
        models=models or default_swepis_models(grid_precision),
        seed=seed,
    )


def simulate_swepis(
    config: SimConfig, workers: Optional[int] = None
) -> SimResult:
    """Permutation replay of the stopped trial, per analysis variant.

    Each replication stops at the first block where the running e-value
    reaches 1/alpha, or runs to the final block; the recorded final
    e-value is the one at the stop.
    """
    if config.max_blocks != SWEPIS_BLOCKS or config.design.n != 2:
        raise ValidationError(
            "swepis replay is fixed to 1380 one/one blocks; use swepis_config()"
        )
    counts_a, counts_b = swepis_streams(config.replications, config.seed)
    log_threshold = math.log(1.0 / config.alpha)
    result = SimResult(scenario="swepis", config=config.to_dict())
    rows = np.arange(config.replications)
    for model in config.models:
        log_e = fold_log_e(model, counts_a, counts_b, config.design, workers)
        stop = first_crossing(log_e, log_threshold)
        stop_idx = np.where(stop > 0, stop, config.max_blocks) - 1
        rate, se = _rejection_curve(stop, config.max_blocks)
        result.variants.append(
            VariantResult(
                label=model.get("label", model.get("type", "model")),
                max_blocks=config.max_blocks,
                stop_block=stop,
                rejection_rate=rate,
                rejection_se=se,
                final_log_e=log_e[rows, stop_idx].copy(),
            )
        )
    return result


@dataclass
class GrowthEstimate:
    mean_log_e: float
    se: float
    replications: int

    def to_dict(self) -> dict:
        return {
            "mean_log_e": self.mean_log_e,
            "se": self.se,
            "replications": self.replications,
        }


def estimate_growth(
    model_config: dict,
    generator: tuple[float, float],
    design: BlockDesign,
    max_blocks: int,
    replications: int,
    seed: int,
    workers: Optional[int] = None,
) -> GrowthEstimate:
    """Monte-Carlo estimate of the expected final log e-value under the
    given true rates (no stopping)."""
    counts_a, counts_b = block_count_streams(
        generator[0], generator[1], design, max_blocks, replications, seed
    )
    log_e = fold_log_e(model_config, counts_a, counts_b, design, workers)
    finals = log_e[:, -1]
    se = float(finals.std(ddof=1) / math.sqrt(replications)) if replications > 1 else 0.0
    return GrowthEstimate(
        mean_log_e=float(finals.mean()), se=se, replications=replications
    )
