"""Falsehood-propensity scoring.

The scorer matches a weighted cue lexicon against text and combines the
weights of the distinct matched cues with a noisy-or:

    score = 1 - prod(1 - w_i)

Determinism rules: each cue counts at most once no matter how often it
matches, and the product is taken over cues sorted by cue id, so the score
is independent of lexicon file order and of where in the text matches occur.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Optional

from . import codec
from .errors import ConfigError


@dataclass(frozen=True)
class Cue:
    cue_id: str
    category: str
    weight: float
    pattern: str

    def compile(self) -> "re.Pattern[str]":
        return re.compile(self.pattern, re.IGNORECASE)


@dataclass(frozen=True)
class CueMatch:
    cue_id: str
    category: str
    weight: float
    start: int
    text: str


@dataclass(frozen=True)
class PropensityReport:
    score: float
    matches: tuple[CueMatch, ...]
    explanation: str

    def to_json(self) -> dict:
        return {
            "score": self.score,
            "matches": [
                {"cue_id": m.cue_id, "category": m.category,
                 "weight": m.weight, "start": m.start, "text": m.text}
                for m in self.matches
            ],
            "explanation": self.explanation,
        }


class CueLexicon:
    """Parsed cue lexicon; line format ``category<TAB>weight<TAB>pattern``."""

    def __init__(self, cues: Iterable[Cue]) -> None:
        self.cues = tuple(cues)
        if not self.cues:
            raise ConfigError("lexicon has no entries")
        ids = [c.cue_id for c in self.cues]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate cue ids")
        self._compiled = [(cue, cue.compile()) for cue in self.cues]

    @property
    def categories(self) -> tuple[str, ...]:
        return tuple(sorted({c.category for c in self.cues}))

    def digest(self) -> str:
        body = b"".join(
            codec.enc_str(c.cue_id) + codec.enc_str(c.category)
            + codec.enc_str(repr(c.weight)) + codec.enc_str(c.pattern)
            for c in self.cues
        )
        return codec.sha256_hex(body)

    @classmethod
    def parse(cls, text: str) -> "CueLexicon":
        cues = []
        index = 0
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ConfigError(
                    f"lexicon line {lineno}: expected 3 tab-separated fields")
            category, weight_text, pattern = (p.strip() for p in parts)
            if not category or not pattern:
                raise ConfigError(f"lexicon line {lineno}: empty field")
            try:
                weight = float(weight_text)
            except ValueError as exc:
                raise ConfigError(
                    f"lexicon line {lineno}: bad weight {weight_text!r}") from exc
            if not 0.0 < weight < 1.0:
                raise ConfigError(
                    f"lexicon line {lineno}: weight must be in (0, 1)")
            try:
                re.compile(pattern, re.IGNORECASE)
            except re.error as exc:
                raise ConfigError(
                    f"lexicon line {lineno}: bad pattern: {exc}") from exc
            cues.append(Cue(f"{category}:{index:02d}", category, weight, pattern))
            index += 1
        return cls(cues)

    @classmethod
    def load(cls, path: str) -> "CueLexicon":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.parse(fh.read())

    @classmethod
    def default(cls) -> "CueLexicon":
        text = resources.files("factledger").joinpath("data/lexicon.txt").read_text("utf-8")
        return cls.parse(text)

    def find_matches(self, text: str) -> tuple[CueMatch, ...]:
        """First match per cue; result sorted by (start, cue_id)."""
        found = []
        for cue, compiled in self._compiled:
            m = compiled.search(text)
            if m is not None:
                found.append(CueMatch(cue.cue_id, cue.category, cue.weight,
                                      m.start(), m.group(0)))
        found.sort(key=lambda m: (m.start, m.cue_id))
        return tuple(found)


def combine_weights(weights: Iterable[float]) -> float:
    """Noisy-or over weights in sorted order (float-stable)."""
    miss = 1.0
    for w in sorted(weights):
        miss *= 1.0 - w
    return 1.0 - miss


def score_text(text: str, lexicon: CueLexicon) -> PropensityReport:
    matches = lexicon.find_matches(text)
    # Sort by cue id for the product so file order and match position are
    # irrelevant to the arithmetic.
    score = combine_weights(
        m.weight for m in sorted(matches, key=lambda m: m.cue_id))
    return PropensityReport(score, matches, _explain(score, matches))


def is_suspicious(score: float, threshold: float) -> bool:
    """Strictly greater: a score exactly at the threshold is not flagged."""
    return score > threshold


def _explain(score: float, matches: tuple[CueMatch, ...]) -> str:
    if not matches:
        return "no falsehood cues matched"
    parts = [
        f"{m.category} cue {m.text!r} at offset {m.start}"
        for m in matches
    ]
    return (f"propensity {score:.4f} from {len(matches)} cue(s): "
            + "; ".join(parts))
