"""Verdict tallying and credibility updates.

Two tally modes:

- ``simple_majority``: every revealed vote weighs 1.
- ``credibility_weighted``: each vote weighs its checker's current
  credibility at tally time.

Ties resolve by fixed precedence: False beats Partial beats True. The
comparison is strict, so the precedence order only matters on exact weight
equality; weights are accumulated per verdict in vote order, which keeps the
arithmetic reproducible for any re-execution that sees the same vote order.
"""

from __future__ import annotations

from typing import Optional, Sequence

from ..errors import EmptyVotes
from .records import TIE_PRECEDENCE, VERDICTS, check_verdict


def tally_votes(verdicts: Sequence[str],
                weights: Optional[Sequence[float]] = None,
                mode: str = "simple_majority") -> tuple[str, dict[str, float]]:
    """Return ``(winning_verdict, per_verdict_totals)``.

    ``weights`` is required for ``credibility_weighted`` and ignored for
    ``simple_majority``.
    """
    if not verdicts:
        raise EmptyVotes("no votes to tally")
    for v in verdicts:
        check_verdict(v)
    if mode == "simple_majority":
        weights = [1.0] * len(verdicts)
    elif mode == "credibility_weighted":
        if weights is None or len(weights) != len(verdicts):
            raise ValueError("credibility_weighted needs one weight per vote")
    else:
        raise ValueError(f"unknown tally mode {mode!r}")

    totals = {v: 0.0 for v in VERDICTS}
    for verdict, weight in zip(verdicts, weights):
        totals[verdict] += weight

    winner = TIE_PRECEDENCE[0]
    for candidate in TIE_PRECEDENCE[1:]:
        if totals[candidate] > totals[winner]:
            winner = candidate
    return winner, totals


def update_credibility(credibility: float, aligned: bool, step: float) -> float:
    """Move credibility toward 1 on alignment, toward 0 otherwise.

    aligned:     c' = c + step * (1 - c)
    misaligned:  c' = c * (1 - step)

    Both maps keep values strictly inside (0, 1) for step in (0, 1).
    """
    if aligned:
        return credibility + step * (1.0 - credibility)
    return credibility * (1.0 - step)
