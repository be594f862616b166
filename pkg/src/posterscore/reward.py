"""Reward for policy optimization of the poster scorer.

total = r_score + lambda_fmt * r_fmt, where r_score blends a tier-aware
tolerance accuracy over all five scores with an exponential penalty on the
Euclidean distance between the four sub-score vectors. Invalid outputs
(after retries) get an all-zero breakdown.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Any, Mapping, Sequence

from .errors import ConfigError, LengthMismatch
from .parsing import ModelOutput
from .scores import BOUNDARY_EPS, DIMENSIONS, ScoreVector, tier_of


@dataclass(frozen=True)
class RewardConfig:
    tau: float = 0.2
    lambda_score: float = 0.65
    alpha: float = 0.5
    tier_penalty: float = 0.7
    # Not fixed by the method description; 1.0 is the toolbox default.
    lambda_fmt: float = 1.0
    group_size: int = 4
    advantage_epsilon: float = 1e-8

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ConfigError(f"{f.name} must be a finite number, got {value!r}")
        if self.tau <= 0:
            raise ConfigError("tau must be > 0")
        if not 0.0 <= self.lambda_score <= 1.0:
            raise ConfigError("lambda_score must lie in [0, 1]")
        if self.alpha <= 0:
            raise ConfigError("alpha must be > 0")
        if not 0.0 < self.tier_penalty <= 1.0:
            raise ConfigError("tier_penalty must lie in (0, 1]")
        if self.lambda_fmt < 0:
            raise ConfigError("lambda_fmt must be >= 0")
        if not isinstance(self.group_size, int) or self.group_size < 2:
            raise ConfigError("group_size must be an integer >= 2")
        if self.advantage_epsilon <= 0:
            raise ConfigError("advantage_epsilon must be > 0")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "RewardConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown reward config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class RewardBreakdown:
    r_fmt: int
    r_acc: float
    r_dist: float
    r_score: float
    total: float

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


ZERO_REWARD = RewardBreakdown(0, 0.0, 0.0, 0.0, 0.0)


def format_reward(output: ModelOutput) -> int:
    return 1 if output.valid else 0


def accuracy_reward(pred: ScoreVector, gt: ScoreVector, cfg: RewardConfig = RewardConfig()) -> float:
    total = 0.0
    for dim in DIMENSIONS:
        p, g = pred[dim], gt[dim]
        if abs(p - g) <= cfg.tau + BOUNDARY_EPS:
            total += cfg.tier_penalty if tier_of(p) != tier_of(g) else 1.0
    return total / len(DIMENSIONS)


def distribution_reward(pred: ScoreVector, gt: ScoreVector, cfg: RewardConfig = RewardConfig()) -> float:
    return math.exp(-cfg.alpha * math.dist(pred.sub_vector(), gt.sub_vector()))


def score_reward(pred: ScoreVector, gt: ScoreVector, cfg: RewardConfig = RewardConfig()) -> RewardBreakdown:
    r_acc = accuracy_reward(pred, gt, cfg)
    r_dist = distribution_reward(pred, gt, cfg)
    r_score = cfg.lambda_score * r_acc + (1.0 - cfg.lambda_score) * r_dist
    return RewardBreakdown(1, r_acc, r_dist, r_score, r_score + cfg.lambda_fmt)


def total_reward(output: ModelOutput, gt: ScoreVector, cfg: RewardConfig = RewardConfig()) -> RewardBreakdown:
    if not output.valid:
        return ZERO_REWARD
    return score_reward(output.scores, gt, cfg)


def group_advantages(rewards: Sequence[float], cfg: RewardConfig = RewardConfig()) -> list[float]:
    """Standardize rewards within one sampled group (population std + epsilon)."""
    if len(rewards) != cfg.group_size:
        raise LengthMismatch(f"expected {cfg.group_size} rewards, got {len(rewards)}")
    n = len(rewards)
    mean = math.fsum(rewards) / n
    std = math.sqrt(math.fsum((r - mean) ** 2 for r in rewards) / n)
    return [(r - mean) / (std + cfg.advantage_epsilon) for r in rewards]
