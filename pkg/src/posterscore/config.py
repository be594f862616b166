"""Tool configuration: one declarative file (JSON or TOML) plus CLI overrides."""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError
from .reward import RewardConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

REMAINDER_POLICIES = ("none", "fill")
SELECTION_MODES = ("stratified", "global")
OUTPUT_FORMATS = ("json", "csv", "md")


@dataclass(frozen=True)
class ToolConfig:
    reward: RewardConfig = field(default_factory=RewardConfig)
    ks: tuple[float, ...] = (0.5, 1.0)
    weakest_link_threshold: float = 3.0
    loose_margin: float = 0.5
    max_attempts: int = 3
    taxonomy_path: str | None = None
    validate_tags: bool = False
    remainder_policy: str = "none"
    selection_mode: str = "stratified"
    output_format: str = "json"

    def __post_init__(self):
        if not self.ks or any(not isinstance(k, (int, float)) or isinstance(k, bool) or k <= 0 for k in self.ks):
            raise ConfigError("ks must be a non-empty list of positive numbers")
        if not 1.0 < self.weakest_link_threshold < 5.0:
            raise ConfigError("weakest_link_threshold must lie in (1, 5)")
        if not self.loose_margin > 0:
            raise ConfigError("loose_margin must be > 0")
        if isinstance(self.max_attempts, bool) or not isinstance(self.max_attempts, int) or self.max_attempts < 1:
            raise ConfigError("max_attempts must be an integer >= 1")
        if self.remainder_policy not in REMAINDER_POLICIES:
            raise ConfigError(f"remainder_policy must be one of {REMAINDER_POLICIES}")
        if self.selection_mode not in SELECTION_MODES:
            raise ConfigError(f"selection_mode must be one of {SELECTION_MODES}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"output_format must be one of {OUTPUT_FORMATS}")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ToolConfig":
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        reward = data.pop("reward", None) or {}
        if not isinstance(reward, Mapping):
            raise ConfigError("reward must be a table/object")
        if "ks" in data:
            if not isinstance(data["ks"], (list, tuple)):
                raise ConfigError("ks must be a list")
            data["ks"] = tuple(data["ks"])
        try:
            return cls(reward=RewardConfig.from_dict(reward), **data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["ks"] = list(self.ks)
        return out

    def with_overrides(self, **overrides) -> "ToolConfig":
        overrides = {k: v for k, v in overrides.items() if v is not None}
        reward_over = overrides.pop("reward", None)
        cfg = replace(self, **overrides) if overrides else self
        if reward_over:
            cfg = replace(cfg, reward=replace(cfg.reward, **reward_over))
        return cfg

    def digest(self) -> str:
        """Hash of the canonical effective config; changes iff a field changes."""
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return "sha256:" + hashlib.sha256(canon.encode("utf-8")).hexdigest()


def load_config(path=None) -> ToolConfig:
    if path is None:
        return ToolConfig()
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    try:
        if p.suffix.lower() == ".toml":
            data = tomllib.loads(raw.decode("utf-8"))
        else:
            data = json.loads(raw)
    except (ValueError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse config {p}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object/table")
    return ToolConfig.from_dict(data)
