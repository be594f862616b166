"""Parse raw model generations into validated score vectors.

A conformant generation is a ``<think>...</think>`` block (optional) followed
by an ``<answer>...</answer>`` block holding a JSON object with the five
numeric score keys. Only the first occurrence of each block is honored.
"""

from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import dataclass
from typing import Any, Callable

from .errors import GeneratorError
from .scores import DIMENSIONS, SCORE_MAX, SCORE_MIN, ScoreVector

_THINK_RE = re.compile(r"<think>(.*?)</think>", re.DOTALL)
_ANSWER_RE = re.compile(r"<answer>(.*?)</answer>", re.DOTALL)


class Verdict(str, enum.Enum):
    VALID = "valid"
    INVALID_STRUCTURE = "invalid_structure"
    INVALID_JSON = "invalid_json"
    INVALID_SCHEMA = "invalid_schema"
    OUT_OF_RANGE_SCORE = "out_of_range_score"


@dataclass(frozen=True)
class ModelOutput:
    raw: str
    verdict: Verdict
    think: str | None = None
    answer_json: Any = None
    scores: ScoreVector | None = None

    @property
    def valid(self) -> bool:
        return self.verdict is Verdict.VALID


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3

    def __post_init__(self):
        if isinstance(self.max_attempts, bool) or not isinstance(self.max_attempts, int) or self.max_attempts < 1:
            raise ValueError(f"max_attempts must be an integer >= 1, got {self.max_attempts!r}")


def _reject_constant(name):
    # NaN / Infinity are accepted by the stdlib decoder but are not JSON.
    raise ValueError(f"non-standard JSON constant {name}")


def _is_json_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def parse_output(raw: str | bytes) -> ModelOutput:
    """Parse one generation. Never raises; every failure is encoded in the verdict."""
    if isinstance(raw, (bytes, bytearray)):
        raw = bytes(raw).decode("utf-8", errors="replace")
    elif not isinstance(raw, str):
        raw = str(raw)

    think_match = _THINK_RE.search(raw)
    think = think_match.group(1).strip() if think_match else None

    answer_match = _ANSWER_RE.search(raw)
    if answer_match is None:
        return ModelOutput(raw, Verdict.INVALID_STRUCTURE, think=think)

    try:
        answer = json.loads(answer_match.group(1), parse_constant=_reject_constant)
    except (ValueError, RecursionError):
        return ModelOutput(raw, Verdict.INVALID_JSON, think=think)

    if not isinstance(answer, dict):
        return ModelOutput(raw, Verdict.INVALID_SCHEMA, think=think, answer_json=answer)

    found: dict[str, Any] = {}
    for key, value in answer.items():
        norm = key.strip().casefold()
        if norm in found:
            # two keys collapse to the same score name: ambiguous
            return ModelOutput(raw, Verdict.INVALID_SCHEMA, think=think, answer_json=answer)
        found[norm] = value

    values = []
    for dim in DIMENSIONS:
        value = found.get(dim.value)
        if not _is_json_number(value):
            return ModelOutput(raw, Verdict.INVALID_SCHEMA, think=think, answer_json=answer)
        values.append(value)

    for value in values:
        try:
            fvalue = float(value)
        except OverflowError:  # huge JSON integer
            fvalue = math.inf
        if not math.isfinite(fvalue) or not SCORE_MIN <= fvalue <= SCORE_MAX:
            return ModelOutput(raw, Verdict.OUT_OF_RANGE_SCORE, think=think, answer_json=answer)

    return ModelOutput(
        raw,
        Verdict.VALID,
        think=think,
        answer_json=answer,
        scores=ScoreVector.from_list(float(v) for v in values),
    )


def format_output(scores: ScoreVector, think: str = "") -> str:
    """Render a conformant generation for ``scores`` (inverse of parse_output)."""
    body = json.dumps(scores.to_dict(decimals=None))
    return f"<think>{think}</think>\n<answer>{body}</answer>"


def attempt_parse(generator: Callable[[], str], policy: RetryPolicy | None = None) -> tuple[ModelOutput, int]:
    """Call ``generator`` until it yields a valid output or attempts run out.

    Returns the first valid output, or the last invalid one, together with the
    number of attempts used. A final invalid output should be rewarded 0.
    """
    policy = policy or RetryPolicy()
    output = None
    for attempt in range(1, policy.max_attempts + 1):
        try:
            raw = generator()
        except Exception as exc:
            raise GeneratorError(attempt, exc) from exc
        output = parse_output(raw)
        if output.valid:
            return output, attempt
    return output, policy.max_attempts
