"""Synthetic social-media corpus: generation and JSONL reading.

Corpus lines are JSON objects with ``external_id``, ``content``,
``created_at``, ``author``, ``platform`` and a ground-truth ``truth`` label
used only by the voter simulator (it never reaches the ledger).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Iterable

from .errors import BadRequest

_AUTHORS = ("ana.reporter", "buzz.hub", "carla.m", "daily.pulse", "ed.the.skeptic",
            "freshfeed", "gossip.wire", "hard.facts.hq")
_PLATFORMS = ("chirper", "facegram", "newsly", "pigeonhole")

_FALSE_TEMPLATES = (
    "SHOCKING report: {topic} cover-up finally leaks, share this before it's "
    "deleted! Insiders reveal what they are hiding. (ref {uid})",
    "You won't believe what big pharma is hiding about {topic}. Wake up! "
    "Forwarded as received. (ref {uid})",
    "BOMBSHELL: secret plan around {topic} exposed by unnamed insider. "
    "100% confirmed, mainstream media won't touch it. (ref {uid})",
    "Doctors hate this: one weird trick involving {topic}. Click here before "
    "it's taken down! (ref {uid})",
    "URGENT!! {topic} emergency they don't want you to know about. Act now, "
    "time is running out. Trust me. (ref {uid})",
)

_TRUE_TEMPLATES = (
    "The municipal council approved the budget for {topic} after a public "
    "hearing on Tuesday. Minutes are available online. (ref {uid})",
    "Researchers published a peer-reviewed study on {topic}; the dataset and "
    "methodology are linked in the article. (ref {uid})",
    "The transit authority announced schedule changes for {topic} starting "
    "next month, citing maintenance works. (ref {uid})",
    "Local library opens a new reading room dedicated to {topic}; funding "
    "came from the annual community grant. (ref {uid})",
)

_PARTIAL_TEMPLATES = (
    "Report claims {topic} costs doubled this year; officials confirm a rise "
    "but put it at 40%, unbelievable as that gap sounds. (ref {uid})",
    "Viral post says {topic} was cancelled outright; organizers say it was "
    "postponed, though no new date exists. Urgently awaiting details. (ref {uid})",
    "Thread about {topic} mixes real figures with an outdated chart from "
    "2019; the trend is right, the numbers are not. (ref {uid})",
)

_TOPICS = ("the river cleanup", "school lunches", "the metro extension",
           "vaccine storage", "the housing census", "wind farm permits",
           "the election audit", "hospital staffing", "the data leak",
           "wheat prices", "the stadium contract", "ferry safety checks")


@dataclass(frozen=True)
class CorpusEntry:
    external_id: str
    content: str
    created_at: str
    author: str
    platform: str
    truth: str

    def to_json(self) -> dict:
        return {
            "external_id": self.external_id,
            "content": self.content,
            "created_at": self.created_at,
            "author": self.author,
            "platform": self.platform,
            "truth": self.truth,
        }


def generate(n: int, seed: int = 7) -> list[CorpusEntry]:
    """Deterministic mix: ~45% false, ~40% true, ~15% partly-true posts."""
    rng = random.Random(seed)
    entries = []
    for i in range(n):
        uid = f"{seed}-{i:05d}"
        roll = rng.random()
        if roll < 0.45:
            truth = "False"
            template = rng.choice(_FALSE_TEMPLATES)
        elif roll < 0.85:
            truth = "True"
            template = rng.choice(_TRUE_TEMPLATES)
        else:
            truth = "Partial"
            template = rng.choice(_PARTIAL_TEMPLATES)
        content = template.format(topic=rng.choice(_TOPICS), uid=uid)
        day = 1 + (i % 28)
        entries.append(CorpusEntry(
            external_id=f"post-{i:05d}",
            content=content,
            created_at=f"2026-07-{day:02d}T{(i * 7) % 24:02d}:00:00Z",
            author=rng.choice(_AUTHORS),
            platform=rng.choice(_PLATFORMS),
            truth=truth,
        ))
    return entries


def write_jsonl(entries: Iterable[CorpusEntry], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(json.dumps(entry.to_json(), sort_keys=True) + "\n")


def read_jsonl(path: str) -> list[CorpusEntry]:
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except ValueError as exc:
                raise BadRequest(f"corpus line {lineno}: invalid JSON") from exc
            try:
                entries.append(CorpusEntry(
                    external_id=str(obj["external_id"]),
                    content=str(obj["content"]),
                    created_at=str(obj.get("created_at", "")),
                    author=str(obj.get("author", "")),
                    platform=str(obj.get("platform", "")),
                    truth=str(obj.get("truth", "")),
                ))
            except KeyError as exc:
                raise BadRequest(
                    f"corpus line {lineno}: missing field {exc}") from exc
    return entries
