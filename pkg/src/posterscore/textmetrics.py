"""Text content accuracy: key-phrase F1 and character-level similarities.

Characters are Unicode code points. Whitespace is removed before the
character-level metrics since spacing in rendered copy is typographic.
"""

from __future__ import annotations

import math
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .errors import SchemaError


def normalize_phrase(phrase: str) -> str:
    return unicodedata.normalize("NFC", phrase.strip()).casefold()


def phrase_set(phrases: Iterable[str]) -> frozenset[str]:
    """Normalize and deduplicate phrases, dropping ones that normalize to empty."""
    out = set()
    for p in phrases:
        norm = normalize_phrase(p)
        if norm:
            out.add(norm)
    return frozenset(out)


def phrase_f1(gt: Iterable[str], pred: Iterable[str]) -> float:
    """F1 of exact matches between normalized phrase sets; two empty sets score 1.0."""
    gt_set, pred_set = phrase_set(gt), phrase_set(pred)
    if not gt_set and not pred_set:
        return 1.0
    hits = len(gt_set & pred_set)
    if hits == 0:
        return 0.0
    precision = hits / len(pred_set)
    recall = hits / len(gt_set)
    return 2 * precision * recall / (precision + recall)


def strip_whitespace(text: str) -> str:
    return "".join(ch for ch in text if not ch.isspace())


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance (insert, delete, substitute) over code points."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def bag_of_chars_cosine(reference: str, candidate: str) -> float:
    """Cosine between character-frequency vectors; ignores order."""
    a = Counter(strip_whitespace(reference))
    b = Counter(strip_whitespace(candidate))
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    dot = sum(count * b[ch] for ch, count in a.items())
    norm = math.sqrt(sum(c * c for c in a.values())) * math.sqrt(sum(c * c for c in b.values()))
    return min(1.0, dot / norm)


def normalized_levenshtein_sim(reference: str, candidate: str) -> float:
    a, b = strip_whitespace(reference), strip_whitespace(candidate)
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


@dataclass(frozen=True)
class TextCase:
    case_id: str
    model: str
    gt_phrases: tuple[str, ...]
    pred_phrases: tuple[str, ...]
    gt_text: str
    pred_text: str

    @classmethod
    def from_dict(cls, data) -> "TextCase":
        try:
            gt_ph, pred_ph = data["gt_phrases"], data["pred_phrases"]
            gt_text, pred_text = data["gt_text"], data["pred_text"]
            case_id, model = data["case_id"], data["model"]
        except KeyError as exc:
            raise SchemaError(f"text case missing {exc.args[0]!r}") from None
        for name, value in (("gt_phrases", gt_ph), ("pred_phrases", pred_ph)):
            if not isinstance(value, list) or not all(isinstance(p, str) for p in value):
                raise SchemaError(f"{name} must be an array of strings")
        if not isinstance(gt_text, str) or not isinstance(pred_text, str):
            raise SchemaError("gt_text and pred_text must be strings")
        return cls(str(case_id), str(model), tuple(gt_ph), tuple(pred_ph), gt_text, pred_text)

    def scores(self) -> dict[str, float]:
        return {
            "phrase_f1": phrase_f1(self.gt_phrases, self.pred_phrases),
            "char_sim": bag_of_chars_cosine(self.gt_text, self.pred_text),
            "lev_sim": normalized_levenshtein_sim(self.gt_text, self.pred_text),
        }


TEXT_METRICS = ("phrase_f1", "char_sim", "lev_sim")


def text_row(cases: Iterable[TextCase]) -> dict[str, float]:
    """Per-model means of every text metric, aggregated in case_id order."""
    ordered = sorted(cases, key=lambda c: c.case_id)
    if not ordered:
        raise ValueError("no text cases")
    per_case = [c.scores() for c in ordered]
    row = {name: math.fsum(s[name] for s in per_case) / len(per_case) for name in TEXT_METRICS}
    row["n"] = len(per_case)
    return row
