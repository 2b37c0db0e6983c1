"""Chaincode operations for the fact-checking platform.

All state transitions go through these operations; they run inside the
simulation stub, so every read/write is tracked for MVCC validation and
vote plaintexts only ever travel via the transient map and the private
``votes`` collection.

Concurrency anchor: every ``cast_vote`` rewrites the news record (its
``vote_count``), so two concurrent votes on the same news conflict and the
later one is invalidated and retried by the caller. That makes the quorum
check race-free: exactly one transaction observes the count crossing the
threshold and finalizes.
"""

from __future__ import annotations

import base64
import json
from typing import Any, Optional

from .. import codec
from ..chaincode import ChaincodeStub
from ..errors import (
    AlreadyVoted,
    BadRequest,
    CheckerExists,
    CommitmentMismatch,
    EmptyContent,
    InactiveChecker,
    NewsAlreadyLabeled,
    NotAuthorized,
    NotFound,
    QuorumNotReached,
    UnknownChecker,
)
from ..scoring import CueLexicon, score_text
from . import records
from .consensus import tally_votes, update_credibility
from .records import (
    ConsensusPolicy,
    FactChecker,
    NewsAsset,
    VoteRecord,
    checker_key,
    compute_news_id,
    consensus_key,
    decode_reveal,
    news_key,
    vote_key,
)

MAX_CONTENT_BYTES = 1 << 20

TRANSIENT_REVEAL_PREFIX = "reveal."

# Exclusion reasons recorded in the consensus record.
EXCLUDED_NO_REVEAL = "no_reveal"
EXCLUDED_DIGEST_MISMATCH = "digest_mismatch"
EXCLUDED_BAD_ENCODING = "bad_encoding"


def transient_reveal_key(checker_id: str) -> str:
    return TRANSIENT_REVEAL_PREFIX + checker_id


class FactcheckContract:
    """Operation handlers; register them on an ``OperationRegistry``."""

    def __init__(self, policy: ConsensusPolicy, lexicon: CueLexicon,
                 org_ids: tuple[str, ...]) -> None:
        self.policy = policy.check()
        self.lexicon = lexicon
        self.org_ids = org_ids

    def register(self, registry) -> None:
        registry.register("bootstrap_platform", self.bootstrap_platform)
        registry.register("register_news", self.register_news)
        registry.register("create_checker", self.create_checker)
        registry.register("update_checker", self.update_checker)
        registry.register("deactivate_checker", self.deactivate_checker)
        registry.register("cast_vote", self.cast_vote)
        registry.register("finalize_consensus", self.finalize_consensus)

    # --- helpers -----------------------------------------------------------

    def _load_checker(self, stub: ChaincodeStub, checker_id: str) -> FactChecker:
        data = stub.get_state(checker_key(checker_id))
        if data is None:
            raise UnknownChecker(f"no such fact-checker: {checker_id}",
                                 checker_id=checker_id)
        return FactChecker.from_bytes(data)

    def _require_curator(self, stub: ChaincodeStub) -> FactChecker:
        actor = self._load_checker(stub, stub.submitter)
        if actor.role != records.ROLE_CURATOR or not actor.active:
            raise NotAuthorized("curator role required",
                                submitter=stub.submitter)
        return actor

    def _assign_org(self, checker_id: str) -> str:
        digest = codec.sha256_hex(checker_id.encode("utf-8"))
        return self.org_ids[int(digest[:8], 16) % len(self.org_ids)]

    # --- platform bootstrap ---------------------------------------------------

    def bootstrap_platform(self, stub: ChaincodeStub, args: dict) -> Any:
        """Create the first (curator) account; only valid on an empty roster."""
        if stub.get_state_by_prefix(records.CHECKER_PREFIX):
            raise NotAuthorized("platform already bootstrapped")
        checker_id = _require_id(args, "checker_id")
        if stub.submitter != checker_id:
            raise NotAuthorized("bootstrap must be submitted by the curator")
        checker = FactChecker(
            checker_id=checker_id,
            display_name=_require_str(args, "display_name"),
            role=records.ROLE_CURATOR,
            org=self._assign_org(checker_id),
            credential_salt=_require_str(args, "credential_salt"),
            credential_digest=_require_str(args, "credential_digest"),
            created_tx=stub.tx_id,
        )
        stub.put_state(checker_key(checker_id), checker.to_bytes())
        return {"checker": checker.public_view()}

    # --- news ----------------------------------------------------------------

    def register_news(self, stub: ChaincodeStub, args: dict) -> Any:
        content = args.get("content")
        if not isinstance(content, bytes):
            raise BadRequest("content must be bytes")
        if not content:
            raise EmptyContent("content must not be empty")
        if len(content) > MAX_CONTENT_BYTES:
            raise BadRequest("content exceeds 1 MiB")
        content_format = _require_str(args, "content_format")
        news_id = compute_news_id(content, content_format)
        existing = stub.get_state(news_key(news_id))
        if existing is not None:
            # Same content resolves to the same asset; point at it.
            asset = NewsAsset.from_bytes(existing)
            return {"news_id": news_id, "duplicate": True,
                    "status": asset.status}
        score = None
        if content_format == "text":
            text = content.decode("utf-8", errors="replace")
            score = score_text(text, self.lexicon).to_json()
        excerpt = str(args.get("excerpt") or "")
        if not excerpt and content_format == "text":
            excerpt = content.decode("utf-8", errors="replace")[:140]
        asset = NewsAsset(
            news_id=news_id,
            content_format=content_format,
            content_b64=base64.b64encode(content).decode("ascii"),
            created_at=str(args.get("created_at") or ""),
            author=str(args.get("author") or ""),
            platform=str(args.get("platform") or ""),
            excerpt=excerpt,
            seq=stub.nonce,
            register_tx=stub.tx_id,
            score=score,
        )
        stub.put_state(news_key(news_id), asset.to_bytes())
        return {"news_id": news_id, "duplicate": False,
                "status": asset.status, "score": score}

    # --- fact-checker CRUD ------------------------------------------------------

    def create_checker(self, stub: ChaincodeStub, args: dict) -> Any:
        self._require_curator(stub)
        checker_id = _require_id(args, "checker_id")
        if stub.get_state(checker_key(checker_id)) is not None:
            raise CheckerExists(f"fact-checker {checker_id} already exists",
                                checker_id=checker_id)
        role = str(args.get("role") or records.ROLE_CHECKER)
        if role not in (records.ROLE_CHECKER, records.ROLE_CURATOR):
            raise BadRequest(f"unknown role {role!r}")
        checker = FactChecker(
            checker_id=checker_id,
            display_name=_require_str(args, "display_name"),
            role=role,
            org=self._assign_org(checker_id),
            credential_salt=_require_str(args, "credential_salt"),
            credential_digest=_require_str(args, "credential_digest"),
            created_tx=stub.tx_id,
        )
        stub.put_state(checker_key(checker_id), checker.to_bytes())
        return {"checker": checker.public_view()}

    def update_checker(self, stub: ChaincodeStub, args: dict) -> Any:
        checker_id = _require_id(args, "checker_id")
        target = self._load_checker(stub, checker_id)
        if stub.submitter != checker_id:
            self._require_curator(stub)
        elif not target.active:
            raise InactiveChecker("deactivated accounts cannot act",
                                  checker_id=checker_id)
        if "display_name" in args:
            target.display_name = _require_str(args, "display_name")
        if "credential_digest" in args or "credential_salt" in args:
            target.credential_salt = _require_str(args, "credential_salt")
            target.credential_digest = _require_str(args, "credential_digest")
        stub.put_state(checker_key(checker_id), target.to_bytes())
        return {"checker": target.public_view()}

    def deactivate_checker(self, stub: ChaincodeStub, args: dict) -> Any:
        self._require_curator(stub)
        checker_id = _require_id(args, "checker_id")
        target = self._load_checker(stub, checker_id)
        if target.role == records.ROLE_CURATOR and target.active:
            others = [
                FactChecker.from_bytes(value)
                for key, value in stub.get_state_by_prefix(records.CHECKER_PREFIX)
                if key != checker_key(checker_id)
            ]
            if not any(c.role == records.ROLE_CURATOR and c.active for c in others):
                raise BadRequest("cannot deactivate the last active curator")
        target.active = False
        stub.put_state(checker_key(checker_id), target.to_bytes())
        return {"checker": target.public_view()}

    # --- voting -----------------------------------------------------------------

    def cast_vote(self, stub: ChaincodeStub, args: dict) -> Any:
        checker_id = _require_id(args, "checker_id")
        if stub.submitter != checker_id:
            raise NotAuthorized("votes must be submitted by the voting checker")
        checker = self._load_checker(stub, checker_id)
        if not checker.active:
            raise InactiveChecker(f"{checker_id} is deactivated",
                                  checker_id=checker_id)
        news_id = _require_str(args, "news_id")
        news_data = stub.get_state(news_key(news_id))
        if news_data is None:
            raise NotFound(f"no such news asset: {news_id}", news_id=news_id)
        news = NewsAsset.from_bytes(news_data)
        if news.status == records.STATUS_LABELED:
            raise NewsAlreadyLabeled(f"news {news_id} already labeled",
                                     news_id=news_id)
        if stub.get_state(vote_key(news_id, checker_id)) is not None:
            raise AlreadyVoted(f"{checker_id} already voted on {news_id}",
                               checker_id=checker_id, news_id=news_id)
        commitment = _require_str(args, "commitment")
        if not codec.is_hex_digest(commitment):
            raise BadRequest("commitment must be 64 lowercase hex chars")
        reveal = stub.transient.get(transient_reveal_key(checker_id))
        if reveal is None:
            raise BadRequest("vote reveal missing from transient input")
        if records.commitment_of(reveal) != commitment:
            raise CommitmentMismatch(
                "commitment does not match the sealed vote")
        decode_reveal(reveal)  # validates encoding and verdict

        # Seal the commitment publicly; plaintext goes only to the private
        # collection, restricted to the checker's own org until consensus.
        stub.pdc_put(records.VOTES_COLLECTION, vote_key(news_id, checker_id),
                     reveal, member_orgs=[checker.org])
        record = VoteRecord(news_id=news_id, checker_id=checker_id,
                            commitment=commitment, cast_tx=stub.tx_id)
        stub.put_state(vote_key(news_id, checker_id), record.to_bytes())

        news.vote_count += 1
        finalized = False
        verdict: Optional[str] = None
        if news.vote_count >= self.policy.quorum:
            verdict = self._try_finalize(
                stub, news, extra_vote=(checker_id, commitment, reveal))
            finalized = verdict is not None
        if not finalized:
            stub.put_state(news_key(news_id), news.to_bytes())
        return {
            "news_id": news_id,
            "checker_id": checker_id,
            "commitment": commitment,
            "vote_count": news.vote_count,
            "finalized": finalized,
            "verdict": verdict,
        }

    def finalize_consensus(self, stub: ChaincodeStub, args: dict) -> Any:
        """Explicit finalization (curator); needs quorum after exclusions."""
        self._require_curator(stub)
        news_id = _require_str(args, "news_id")
        news_data = stub.get_state(news_key(news_id))
        if news_data is None:
            raise NotFound(f"no such news asset: {news_id}", news_id=news_id)
        news = NewsAsset.from_bytes(news_data)
        if news.status == records.STATUS_LABELED:
            raise NewsAlreadyLabeled(f"news {news_id} already labeled",
                                     news_id=news_id)
        verdict = self._try_finalize(stub, news, extra_vote=None, strict=True)
        return {"news_id": news_id, "finalized": True, "verdict": verdict}

    def _try_finalize(self, stub: ChaincodeStub, news: NewsAsset,
                      extra_vote: Optional[tuple[str, str, bytes]],
                      strict: bool = False) -> Optional[str]:
        """Open reveals, tally, pay rewards, update credibility, label.

        Returns the verdict, or None when (non-strict) too few reveals
        survive exclusion; strict mode raises ``QuorumNotReached`` instead.
        """
        vote_records: dict[str, VoteRecord] = {}
        prefix = vote_key(news.news_id, "")
        for _key, value in stub.get_state_by_prefix(prefix):
            record = VoteRecord.from_bytes(value)
            vote_records[record.checker_id] = record
        if extra_vote is not None:
            checker_id, commitment, _ = extra_vote
            vote_records[checker_id] = VoteRecord(
                news_id=news.news_id, checker_id=checker_id,
                commitment=commitment, cast_tx=stub.tx_id)
        if strict and len(vote_records) < self.policy.quorum:
            raise QuorumNotReached(
                f"{len(vote_records)} votes < quorum {self.policy.quorum}",
                news_id=news.news_id, votes=len(vote_records),
                quorum=self.policy.quorum)

        reveals: dict[str, tuple[str, str, bytes]] = {}
        excluded: list[dict] = []
        for checker_id in sorted(vote_records):
            commitment = vote_records[checker_id].commitment
            if extra_vote is not None and checker_id == extra_vote[0]:
                blob: Optional[bytes] = extra_vote[2]
            else:
                blob = stub.transient.get(transient_reveal_key(checker_id))
            if blob is None:
                excluded.append({"checker_id": checker_id,
                                 "reason": EXCLUDED_NO_REVEAL})
                continue
            if records.commitment_of(blob) != commitment:
                excluded.append({"checker_id": checker_id,
                                 "reason": EXCLUDED_DIGEST_MISMATCH})
                continue
            try:
                reveals[checker_id] = decode_reveal(blob)
            except Exception:
                excluded.append({"checker_id": checker_id,
                                 "reason": EXCLUDED_BAD_ENCODING})
        if len(reveals) < self.policy.quorum:
            if strict:
                raise QuorumNotReached(
                    f"{len(reveals)} usable reveals < quorum "
                    f"{self.policy.quorum}",
                    news_id=news.news_id, usable=len(reveals),
                    quorum=self.policy.quorum)
            return None

        ordered = sorted(reveals)  # fixed order keeps the tally reproducible
        checkers = {cid: self._load_checker(stub, cid)
                    for cid in sorted(vote_records)}
        verdicts = [reveals[cid][0] for cid in ordered]
        if self.policy.mode == "credibility_weighted":
            used_weights = [checkers[cid].credibility for cid in ordered]
        else:
            used_weights = [1.0] * len(ordered)
        verdict, totals = tally_votes(verdicts, used_weights, self.policy.mode)

        minted = 0
        participants = []
        for weight, cid in zip(used_weights, ordered):
            checker = checkers[cid]
            v, rationale, salt = reveals[cid]
            aligned = v == verdict
            checker.credibility = update_credibility(
                checker.credibility, aligned, self.policy.credibility_step)
            if aligned:
                checker.token_balance += self.policy.reward_per_aligned_vote
                minted += self.policy.reward_per_aligned_vote
            stub.put_state(checker_key(cid), checker.to_bytes())
            participants.append({"checker_id": cid, "verdict": v,
                                 "aligned": aligned, "weight": weight})
            record = vote_records[cid]
            record.revealed = True
            record.verdict = v
            record.rationale = rationale
            record.salt_hex = salt.hex()
            stub.put_state(vote_key(news.news_id, cid), record.to_bytes())
        for item in excluded:
            cid = item["checker_id"]
            checker = checkers[cid]
            checker.flagged = True
            checker.credibility = update_credibility(
                checker.credibility, False, self.policy.credibility_step)
            stub.put_state(checker_key(cid), checker.to_bytes())

        if minted:
            total = _read_reward_total(stub) + minted
            stub.put_state(records.REWARD_TOTAL_KEY,
                           codec.canonical_json({"total": total}))

        news.status = records.STATUS_LABELED
        news.verdict = verdict
        news.finalize_tx = stub.tx_id
        stub.put_state(news_key(news.news_id), news.to_bytes())
        stub.put_state(consensus_key(news.news_id), codec.canonical_json({
            "news_id": news.news_id,
            "verdict": verdict,
            "mode": self.policy.mode,
            "quorum": self.policy.quorum,
            "tally": totals,
            "participants": participants,
            "excluded": excluded,
            "finalize_tx": stub.tx_id,
        }))
        return verdict

def _read_reward_total(stub: ChaincodeStub) -> int:
    data = stub.get_state(records.REWARD_TOTAL_KEY)
    if data is None:
        return 0
    return int(json.loads(data.decode("utf-8"))["total"])


def _require_str(args: dict, name: str) -> str:
    value = args.get(name)
    if not isinstance(value, str) or not value:
        raise BadRequest(f"{name} must be a non-empty string", field=name)
    return value


def _require_id(args: dict, name: str) -> str:
    value = _require_str(args, name)
    if "/" in value or value.startswith("~"):
        raise BadRequest(f"{name} must not contain '/' or start with '~'",
                         field=name)
    return value
