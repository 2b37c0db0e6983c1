"""Node wiring: configuration -> network, contract, queries, persistence.

The node owns everything the REST facade and the CLI need: it prepares
arguments (salts, commitments, credential digests), gathers private reveals
for finalization, submits transactions, and retries the few-line dance when
a concurrent vote invalidates a submission under MVCC.
"""

from __future__ import annotations

import json
import os
import random
import secrets
import threading
from dataclasses import dataclass
from typing import Any, Optional

from . import codec
from .chaincode import OperationRegistry, PdcConfig
from .config import NodeConfig
from .errors import AuthFailed, InactiveChecker, TxConflict
from .factcheck import (
    ConsensusPolicy,
    FactcheckContract,
    FactcheckQueries,
    VOTES_COLLECTION,
    encode_reveal,
)
from .factcheck import records
from .factcheck.records import vote_key
from .ledger import VerificationReport
from .scoring import CueLexicon
from .txflow import EndorsementPolicy, LogicalClock, Network, wall_clock_ms

_MVCC_RETRIES = 5


@dataclass
class InvokeResult:
    response: Any
    tx_id: str
    block_height: int
    tx_index: int

    def location(self) -> dict:
        return {"tx_id": self.tx_id, "block_height": self.block_height,
                "tx_index": self.tx_index}


def hash_credential(salt: str, credential: str) -> str:
    return codec.sha256_hex(salt.encode("utf-8") + credential.encode("utf-8"))


class FactledgerNode:
    def __init__(self, cfg: NodeConfig) -> None:
        self.cfg = cfg.check()
        self.policy = ConsensusPolicy(
            quorum=cfg.quorum,
            mode=cfg.consensus_mode,
            reward_per_aligned_vote=cfg.reward_per_aligned_vote,
            credibility_step=cfg.credibility_step,
        ).check()
        self.lexicon = (CueLexicon.load(cfg.lexicon_path) if cfg.lexicon_path
                        else CueLexicon.default())
        registry = OperationRegistry()
        self.contract = FactcheckContract(self.policy, self.lexicon, cfg.orgs)
        self.contract.register(registry)
        clock = (LogicalClock(cfg.time_start_ms, cfg.time_step_ms)
                 if cfg.deterministic_time else wall_clock_ms)
        data_dir = cfg.data_dir
        if data_dir:
            os.makedirs(data_dir, exist_ok=True)
        self.network = Network(
            cfg.orgs,
            registry,
            PdcConfig({VOTES_COLLECTION: frozenset(cfg.votes_members)}),
            EndorsementPolicy(cfg.endorsements_required, len(cfg.orgs)),
            max_block_txs=cfg.max_block_txs,
            cut_timeout_ms=cfg.cut_timeout_ms,
            cut_on_idle=cfg.cut_on_idle,
            clock=clock,
            block_log_path=os.path.join(data_dir, "blocks.log") if data_dir else None,
            private_dir=data_dir or None,
            trace_path=os.path.join(data_dir, "trace.log")
            if (data_dir and cfg.trace) else None,
        )
        self.queries = FactcheckQueries(
            lambda: self.network.primary.ledger, self.policy,
            cfg.suspicion_threshold)
        self._rng = random.Random(cfg.rng_seed) if cfg.seeded else None
        self._rng_lock = threading.Lock()
        self._started = False

    # --- lifecycle ----------------------------------------------------------------

    def start(self, background_ordering: bool = True) -> None:
        self.network.bootstrap()
        self._ensure_curator()
        if background_ordering:
            self.network.start_ordering()
        self._started = True

    def stop(self) -> None:
        self.network.close()
        self.flush()
        self._started = False

    def flush(self) -> None:
        """Persist private sidecars and the state snapshot without stopping.

        Safe to call from the service shutdown hook: process supervisors
        (and uvicorn itself, which re-raises a caught SIGTERM after its
        graceful shutdown) may end the process before code that runs after
        the serve loop gets a chance to.
        """
        for org in self.network.orgs:
            org.private.save()
        if self.cfg.data_dir:
            path = os.path.join(self.cfg.data_dir, "snapshot.json")
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(self.network.primary.ledger.snapshot_json(), fh,
                          sort_keys=True, indent=1)

    def _ensure_curator(self) -> None:
        store = self.network.primary.ledger
        if store.state_get(records.checker_key(self.cfg.curator_id)) is not None:
            return
        salt = self._rand_hex(8)
        self.invoke("bootstrap_platform", {
            "checker_id": self.cfg.curator_id,
            "display_name": "Platform curator",
            "credential_salt": salt,
            "credential_digest": hash_credential(salt, self.cfg.curator_credential),
        }, submitter=self.cfg.curator_id)

    # --- randomness -----------------------------------------------------------------

    def _rand_bytes(self, n: int) -> bytes:
        if self._rng is None:
            return secrets.token_bytes(n)
        with self._rng_lock:
            return self._rng.randbytes(n)

    def _rand_hex(self, n: int) -> str:
        return self._rand_bytes(n).hex()

    # --- invocation -----------------------------------------------------------------

    def invoke(self, operation: str, args: dict, submitter: str,
               transient: Optional[dict[str, bytes]] = None,
               timeout: float = 30.0) -> InvokeResult:
        response, outcome = self.network.invoke(
            operation, args, submitter, transient, timeout=timeout)
        return InvokeResult(response, outcome.tx_id, outcome.height,
                            outcome.tx_index)

    # --- domain entry points -----------------------------------------------------------

    def register_news(self, submitter: str, content: bytes,
                      content_format: str = "text", created_at: str = "",
                      author: str = "", platform: str = "",
                      excerpt: str = "") -> InvokeResult:
        return self.invoke("register_news", {
            "content": content,
            "content_format": content_format,
            "created_at": created_at,
            "author": author,
            "platform": platform,
            "excerpt": excerpt,
        }, submitter=submitter)

    def create_checker(self, curator_id: str, checker_id: str,
                       display_name: str, credential: str,
                       role: str = records.ROLE_CHECKER) -> InvokeResult:
        salt = self._rand_hex(8)
        return self.invoke("create_checker", {
            "checker_id": checker_id,
            "display_name": display_name,
            "role": role,
            "credential_salt": salt,
            "credential_digest": hash_credential(salt, credential),
        }, submitter=curator_id)

    def update_checker(self, submitter: str, checker_id: str,
                       display_name: Optional[str] = None,
                       credential: Optional[str] = None) -> InvokeResult:
        args: dict = {"checker_id": checker_id}
        if display_name is not None:
            args["display_name"] = display_name
        if credential is not None:
            salt = self._rand_hex(8)
            args["credential_salt"] = salt
            args["credential_digest"] = hash_credential(salt, credential)
        return self.invoke("update_checker", args, submitter=submitter)

    def deactivate_checker(self, curator_id: str, checker_id: str) -> InvokeResult:
        return self.invoke("deactivate_checker", {"checker_id": checker_id},
                           submitter=curator_id)

    def cast_vote(self, checker_id: str, news_id: str, verdict: str,
                  rationale: str) -> InvokeResult:
        salt = self._rand_bytes(16)
        reveal = encode_reveal(verdict, rationale, salt)
        commitment = records.commitment_of(reveal)
        args = {"news_id": news_id, "checker_id": checker_id,
                "commitment": commitment}
        last: Optional[TxConflict] = None
        for _ in range(_MVCC_RETRIES):
            transient = self._gather_reveals(news_id)
            transient[f"reveal.{checker_id}"] = reveal
            try:
                return self.invoke("cast_vote", args, submitter=checker_id,
                                   transient=transient)
            except TxConflict as exc:
                # A concurrent vote moved the news record; re-simulate with
                # fresh reveals and try again.
                last = exc
        raise last  # type: ignore[misc]

    def finalize_consensus(self, curator_id: str, news_id: str) -> InvokeResult:
        last: Optional[TxConflict] = None
        for _ in range(_MVCC_RETRIES):
            try:
                return self.invoke("finalize_consensus", {"news_id": news_id},
                                   submitter=curator_id,
                                   transient=self._gather_reveals(news_id))
            except TxConflict as exc:
                last = exc
        raise last  # type: ignore[misc]

    def _gather_reveals(self, news_id: str) -> dict[str, bytes]:
        """Pull every available vote plaintext from the orgs' private stores.

        The facade hosts all orgs in one process, so it may act on behalf of
        each org when assembling the transient input for finalization.
        """
        transient: dict[str, bytes] = {}
        store = self.network.primary.ledger
        for key, _value, _version in store.state_items(vote_key(news_id, "")):
            checker_id = key.rsplit("/", 1)[1]
            blob = self.network.collect_private(VOTES_COLLECTION,
                                                vote_key(news_id, checker_id))
            if blob is not None:
                transient[f"reveal.{checker_id}"] = blob
        return transient

    # --- auth ----------------------------------------------------------------------

    def verify_credential(self, checker_id: str, credential: str) -> dict:
        """Validate a login; returns the checker's public view."""
        try:
            checker = self.queries.load_checker(checker_id)
        except Exception as exc:
            raise AuthFailed("unknown account or bad credential") from exc
        if hash_credential(checker.credential_salt, credential) \
                != checker.credential_digest:
            raise AuthFailed("unknown account or bad credential")
        if not checker.active:
            raise InactiveChecker("account is deactivated",
                                  checker_id=checker_id)
        return checker.public_view()

    # --- chain inspection ------------------------------------------------------------

    def verify_chain(self) -> VerificationReport:
        return self.network.primary.ledger.verify_chain()

    def get_block(self, height: int) -> dict:
        return self.network.primary.ledger.get_block(height).to_json()
