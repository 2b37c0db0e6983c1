"""On-ledger record schemas and key layout for the fact-checking domain.

Key namespaces (all values are canonical JSON bytes):

- ``news/<news_id>``                the asset, its score and lifecycle status
- ``checker/<checker_id>``         fact-checker profile and token balance
- ``vote/<news_id>/<checker_id>``  sealed commitment, opened after consensus
- ``consensus/<news_id>``          final verdict, tally and participants
- ``reward/total``                 total tokens minted

Vote plaintexts live in the private collection ``votes`` until consensus.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Optional

from .. import codec
from ..codec import Reader
from ..errors import CodecError, ConfigError, UnknownVerdict

NEWS_PREFIX = "news/"
CHECKER_PREFIX = "checker/"
VOTE_PREFIX = "vote/"
CONSENSUS_PREFIX = "consensus/"
REWARD_TOTAL_KEY = "reward/total"

VOTES_COLLECTION = "votes"

VERDICTS = ("True", "False", "Partial")
# On a tie the harsher verdict wins, in this precedence order.
TIE_PRECEDENCE = ("False", "Partial", "True")

STATUS_UNDER_ANALYSIS = "under_analysis"
STATUS_LABELED = "labeled"

ROLE_CHECKER = "checker"
ROLE_CURATOR = "curator"

CONSENSUS_MODES = ("simple_majority", "credibility_weighted")

CREDIBILITY_INITIAL = 0.5


def news_key(news_id: str) -> str:
    return NEWS_PREFIX + news_id


def checker_key(checker_id: str) -> str:
    return CHECKER_PREFIX + checker_id


def vote_key(news_id: str, checker_id: str) -> str:
    return f"{VOTE_PREFIX}{news_id}/{checker_id}"


def consensus_key(news_id: str) -> str:
    return CONSENSUS_PREFIX + news_id


def compute_news_id(content: bytes, content_format: str) -> str:
    """Content-addressed id: identical content + format collapses to one asset."""
    return codec.sha256_hex(codec.enc_bytes(content) + codec.enc_str(content_format))


def check_verdict(verdict: str) -> str:
    if verdict not in VERDICTS:
        raise UnknownVerdict(f"verdict must be one of {VERDICTS}, got {verdict!r}",
                             verdict=verdict)
    return verdict


# --- sealed votes -------------------------------------------------------------

def encode_reveal(verdict: str, rationale: str, salt: bytes) -> bytes:
    """Canonical reveal bytes; their SHA-256 hex is the vote commitment."""
    check_verdict(verdict)
    return codec.enc_str(verdict) + codec.enc_str(rationale) + codec.enc_bytes(salt)


def decode_reveal(data: bytes) -> tuple[str, str, bytes]:
    r = Reader(data)
    verdict = r.read_str()
    rationale = r.read_str()
    salt = r.read_bytes()
    r.expect_end()
    check_verdict(verdict)
    return verdict, rationale, salt


def commitment_of(reveal: bytes) -> str:
    return codec.sha256_hex(reveal)


# --- policy ---------------------------------------------------------------------

@dataclass(frozen=True)
class ConsensusPolicy:
    """Quorum size, tally mode, and incentive parameters."""

    quorum: int = 3
    mode: str = "simple_majority"
    reward_per_aligned_vote: int = 10
    credibility_step: float = 0.1

    def check(self) -> "ConsensusPolicy":
        if self.quorum < 1:
            raise ConfigError("quorum must be at least 1")
        if self.mode not in CONSENSUS_MODES:
            raise ConfigError(f"unknown consensus mode {self.mode!r}")
        if self.reward_per_aligned_vote < 0:
            raise ConfigError("reward must be non-negative")
        if not 0.0 < self.credibility_step < 1.0:
            raise ConfigError("credibility step must be in (0, 1)")
        return self


# --- records ---------------------------------------------------------------------

@dataclass
class NewsAsset:
    news_id: str
    content_format: str
    content_b64: str
    created_at: str
    author: str
    platform: str
    excerpt: str
    seq: int                   # registration order (submission nonce)
    register_tx: str
    status: str = STATUS_UNDER_ANALYSIS
    score: Optional[dict] = None      # propensity report, text formats only
    verdict: Optional[str] = None
    vote_count: int = 0
    finalize_tx: Optional[str] = None

    def to_bytes(self) -> bytes:
        return codec.canonical_json({
            "news_id": self.news_id,
            "content_format": self.content_format,
            "content_b64": self.content_b64,
            "created_at": self.created_at,
            "author": self.author,
            "platform": self.platform,
            "excerpt": self.excerpt,
            "seq": self.seq,
            "register_tx": self.register_tx,
            "status": self.status,
            "score": self.score,
            "verdict": self.verdict,
            "vote_count": self.vote_count,
            "finalize_tx": self.finalize_tx,
        })

    @classmethod
    def from_bytes(cls, data: bytes) -> "NewsAsset":
        return cls(**_load_json(data, cls.__name__))


@dataclass
class FactChecker:
    checker_id: str
    display_name: str
    role: str
    org: str
    credential_salt: str
    credential_digest: str
    created_tx: str
    credibility: float = CREDIBILITY_INITIAL
    active: bool = True
    flagged: bool = False
    token_balance: int = 0

    def to_bytes(self) -> bytes:
        return codec.canonical_json({
            "checker_id": self.checker_id,
            "display_name": self.display_name,
            "role": self.role,
            "org": self.org,
            "credential_salt": self.credential_salt,
            "credential_digest": self.credential_digest,
            "created_tx": self.created_tx,
            "credibility": self.credibility,
            "active": self.active,
            "flagged": self.flagged,
            "token_balance": self.token_balance,
        })

    @classmethod
    def from_bytes(cls, data: bytes) -> "FactChecker":
        return cls(**_load_json(data, cls.__name__))

    def public_view(self) -> dict:
        return {
            "checker_id": self.checker_id,
            "display_name": self.display_name,
            "role": self.role,
            "org": self.org,
            "credibility": self.credibility,
            "active": self.active,
            "flagged": self.flagged,
            "token_balance": self.token_balance,
        }


@dataclass
class VoteRecord:
    news_id: str
    checker_id: str
    commitment: str
    cast_tx: str
    revealed: bool = False
    verdict: Optional[str] = None     # populated only after consensus
    rationale: Optional[str] = None
    salt_hex: Optional[str] = None

    def to_bytes(self) -> bytes:
        return codec.canonical_json({
            "news_id": self.news_id,
            "checker_id": self.checker_id,
            "commitment": self.commitment,
            "cast_tx": self.cast_tx,
            "revealed": self.revealed,
            "verdict": self.verdict,
            "rationale": self.rationale,
            "salt_hex": self.salt_hex,
        })

    @classmethod
    def from_bytes(cls, data: bytes) -> "VoteRecord":
        return cls(**_load_json(data, cls.__name__))


def _load_json(data: bytes, kind: str) -> dict[str, Any]:
    try:
        obj = json.loads(data.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise CodecError(f"undecodable {kind} record") from exc
    if not isinstance(obj, dict):
        raise CodecError(f"malformed {kind} record")
    return obj
