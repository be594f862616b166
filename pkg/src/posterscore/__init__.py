"""Scoring, reward and evaluation toolbox for multi-dimensional e-commerce poster quality."""

__version__ = "0.1.0"

from .parsing import ModelOutput, RetryPolicy, Verdict, attempt_parse, parse_output  # noqa: E402
from .reward import RewardBreakdown, RewardConfig, total_reward  # noqa: E402
from .scores import AnnotationRecord, Dimension, ScoreVector, SourceKind, Tier, tier_of  # noqa: E402

__all__ = [
    "AnnotationRecord",
    "Dimension",
    "ModelOutput",
    "RetryPolicy",
    "RewardBreakdown",
    "RewardConfig",
    "ScoreVector",
    "SourceKind",
    "Tier",
    "Verdict",
    "attempt_parse",
    "parse_output",
    "tier_of",
    "total_reward",
]
