"""Running evidence process: block assembly, scoring, and decisions.

The process is a value: every transition returns a new instance, so a
snapshot can be kept, compared, or replayed without defensive copies.
Observations buffer per group until a full block of ``n_a`` a-outcomes
and ``n_b`` b-outcomes is available (oldest first); only completed
blocks contribute evidence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Union

from .core import (
    DEFAULT_GAMMA,
    AlternativePoint,
    BetaPriorConfig,
    Block,
    BlockDesign,
    Decision,
    StreamState,
    log_simple_block_e,
    posterior_means,
)
from .errors import ValidationError
from .restricted import (
    DEFAULT_GRID_PRECISION,
    RestrictedPrior,
    build_grid,
    grid_posterior_means,
    grid_posterior_update,
    parse_divergence,
    point_alternative_from_rate,
)


@dataclass(frozen=True)
class SimplePoint:
    """Fixed simple alternative."""

    point: AlternativePoint

    def current_point(self, state: StreamState, design: BlockDesign) -> AlternativePoint:
        return self.point

    def after_block(self, block: Block) -> "SimplePoint":
        return self

    def config(self) -> dict:
        return {
            "type": "point",
            "theta_a": self.point.theta_a,
            "theta_b": self.point.theta_b,
        }


@dataclass(frozen=True)
class PointFromRate:
    """Simple alternative derived from a known control rate and effect."""

    control_rate: float
    divergence: str
    delta: float
    point: AlternativePoint

    @classmethod
    def create(
        cls, control_rate: float, divergence, delta: float
    ) -> "PointFromRate":
        divergence = parse_divergence(divergence)
        return cls(
            control_rate=control_rate,
            divergence=divergence.value,
            delta=delta,
            point=point_alternative_from_rate(control_rate, divergence, delta),
        )

    def current_point(self, state: StreamState, design: BlockDesign) -> AlternativePoint:
        return self.point

    def after_block(self, block: Block) -> "PointFromRate":
        return self

    def config(self) -> dict:
        return {
            "type": "restricted",
            "divergence": self.divergence,
            "delta": self.delta,
            "control_rate": self.control_rate,
        }


@dataclass(frozen=True)
class BayesBeta:
    """Learned alternative with independent beta priors per group."""

    prior: BetaPriorConfig

    def current_point(self, state: StreamState, design: BlockDesign) -> AlternativePoint:
        theta_a_hat, theta_b_hat, _ = posterior_means(self.prior, state, design)
        return AlternativePoint(theta_a_hat, theta_b_hat)

    def after_block(self, block: Block) -> "BayesBeta":
        return self

    def config(self) -> dict:
        p = self.prior
        return {
            "type": "beta",
            "alpha_a": p.alpha_a,
            "beta_a": p.beta_a,
            "alpha_b": p.alpha_b,
            "beta_b": p.beta_b,
        }


@dataclass(frozen=True, eq=False)
class BayesRestricted:
    """Learned alternative constrained to the effect boundary."""

    posterior: RestrictedPrior

    def current_point(self, state: StreamState, design: BlockDesign) -> AlternativePoint:
        theta_a_hat, theta_b_hat = grid_posterior_means(self.posterior)
        return AlternativePoint(theta_a_hat, theta_b_hat)

    def after_block(self, block: Block) -> "BayesRestricted":
        counts = StreamState(
            u_a=block.k_a,
            t_a=len(block.ys_a),
            u_b=block.k_b,
            t_b=len(block.ys_b),
            j=1,
        )
        return BayesRestricted(grid_posterior_update(self.posterior, counts))

    def config(self) -> dict:
        p = self.posterior
        return {
            "type": "restricted",
            "divergence": p.divergence.value,
            "delta": p.delta,
            "grid_precision": p.grid_precision,
            "alpha": p.alpha,
            "beta": p.beta,
        }


AlternativeModel = Union[SimplePoint, PointFromRate, BayesBeta, BayesRestricted]


def model_from_config(config: dict) -> AlternativeModel:
    """Build an alternative model from its JSON description."""
    if not isinstance(config, dict):
        raise ValidationError("model config must be an object")
    kind = config.get("type", "beta")
    if kind == "beta":
        if "gamma" in config:
            prior = BetaPriorConfig.symmetric(float(config["gamma"]))
        else:
            prior = BetaPriorConfig(
                alpha_a=float(config.get("alpha_a", DEFAULT_GAMMA)),
                beta_a=float(config.get("beta_a", DEFAULT_GAMMA)),
                alpha_b=float(config.get("alpha_b", DEFAULT_GAMMA)),
                beta_b=float(config.get("beta_b", DEFAULT_GAMMA)),
            )
        return BayesBeta(prior)
    if kind == "point":
        return SimplePoint(
            AlternativePoint(
                float(config["theta_a"]), float(config["theta_b"])
            )
        )
    if kind == "restricted":
        divergence = parse_divergence(config["divergence"])
        delta = float(config["delta"])
        if config.get("control_rate") is not None:
            return PointFromRate.create(
                float(config["control_rate"]), divergence, delta
            )
        prior = build_grid(
            divergence,
            delta,
            grid_precision=float(
                config.get("grid_precision", DEFAULT_GRID_PRECISION)
            ),
            alpha=float(config.get("alpha", DEFAULT_GAMMA)),
            beta=float(config.get("beta", DEFAULT_GAMMA)),
        )
        return BayesRestricted(prior)
    raise ValidationError(f"unknown model type {kind!r}")


@dataclass(frozen=True, eq=False)
class EvidenceProcess:
    """Test-martingale state over completed blocks plus pending buffers."""

    design: BlockDesign
    model: AlternativeModel
    state: StreamState
    log_e: float
    trajectory: tuple[tuple[int, float], ...]
    pending_a: tuple[int, ...]
    pending_b: tuple[int, ...]

    @classmethod
    def start(
        cls, design: BlockDesign, model: AlternativeModel
    ) -> "EvidenceProcess":
        return cls(
            design=design,
            model=model,
            state=StreamState(),
            log_e=0.0,
            trajectory=(),
            pending_a=(),
            pending_b=(),
        )

    @property
    def e_value(self) -> float:
        return math.exp(self.log_e)

    @property
    def blocks_completed(self) -> int:
        return self.state.j

    def update_with_block(self, block: Block) -> "EvidenceProcess":
        """Score the block at the current model point, then learn from it."""
        block.check_design(self.design)
        point = self.model.current_point(self.state, self.design)
        log_factor = log_simple_block_e(
            block.k_a, block.k_b, self.design, point
        )
        log_e = self.log_e + log_factor
        state = self.state.add_block(block)
        return replace(
            self,
            model=self.model.after_block(block),
            state=state,
            log_e=log_e,
            trajectory=self.trajectory + ((state.j, log_e),),
        )

    def observe(self, group: str, y: int) -> "EvidenceProcess":
        """Buffer one outcome, completing blocks whenever possible."""
        if group not in ("a", "b"):
            raise ValidationError(f"group must be 'a' or 'b', got {group!r}")
        if y not in (0, 1):
            raise ValidationError(f"outcome must be 0 or 1, got {y!r}")
        proc = self
        if group == "a":
            proc = replace(proc, pending_a=proc.pending_a + (int(y),))
        else:
            proc = replace(proc, pending_b=proc.pending_b + (int(y),))
        n_a, n_b = proc.design.n_a, proc.design.n_b
        while len(proc.pending_a) >= n_a and len(proc.pending_b) >= n_b:
            block = Block(proc.pending_a[:n_a], proc.pending_b[:n_b])
            proc = replace(
                proc,
                pending_a=proc.pending_a[n_a:],
                pending_b=proc.pending_b[n_b:],
            ).update_with_block(block)
        return proc

    def decide(self, alpha: float) -> Decision:
        """Threshold rule at level alpha, compared in log space."""
        if not (0.0 < alpha <= 1.0):
            raise ValidationError(f"alpha must lie in (0, 1], got {alpha}")
        threshold = 1.0 / alpha
        return Decision(
            reject=self.log_e >= math.log(threshold),
            threshold=threshold,
            e_value=self.e_value,
        )

    def replay(self, observations: Iterable[tuple[str, int]]) -> "EvidenceProcess":
        proc = self
        for group, y in observations:
            proc = proc.observe(group, y)
        return proc

    def snapshot(self) -> dict:
        """JSON-ready export of the full process state."""
        return {
            "design": {"n_a": self.design.n_a, "n_b": self.design.n_b},
            "model": self.model.config(),
            "state": {
                "u_a": self.state.u_a,
                "t_a": self.state.t_a,
                "u_b": self.state.u_b,
                "t_b": self.state.t_b,
                "j": self.state.j,
            },
            "log_e": self.log_e,
            "e_value": self.e_value,
            "pending": {"a": len(self.pending_a), "b": len(self.pending_b)},
            "trajectory": [[j, log_e] for j, log_e in self.trajectory],
        }


def parse_observation(line: str, lineno: int) -> tuple[str, int]:
    """One JSONL observation: ``{"group": "a"|"b", "y": 0|1}``.

    An optional integer ``t`` index is accepted and ignored.
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"line {lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise ValidationError(f"line {lineno}: expected an object")
    group = obj.get("group")
    y = obj.get("y")
    if group not in ("a", "b"):
        raise ValidationError(f"line {lineno}: group must be 'a' or 'b'")
    if isinstance(y, bool) or y not in (0, 1):
        raise ValidationError(f"line {lineno}: y must be 0 or 1")
    return group, int(y)


def iter_observations(lines: Iterable[str]) -> Iterator[tuple[str, int]]:
    """Parse a JSONL observation stream, skipping blank lines."""
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        yield parse_observation(line, lineno)
