"""Execute-order-validate pipeline across simulated peer organizations.

One process hosts N peer orgs (each with its own ledger copy and private
store) and a single orderer. A submission is simulated on E endorsing orgs;
their results must match byte-for-byte, otherwise the operation is
non-deterministic and the submission is rejected. Matching results become a
transaction envelope that the orderer batches into blocks (cut at a max
transaction count or a timeout). Every org validates and applies each block
independently; the commit asserts the org copies stay hash-identical.

Plaintext private data rides alongside the envelope to the orderer but is
never part of block bytes; after commit it is distributed to member orgs
only.
"""

from __future__ import annotations

import base64
import json
import logging
import os
import queue
import threading
import time
from concurrent.futures import Future
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping, Optional

from . import codec
from .chaincode import (
    OperationRegistry,
    PdcConfig,
    PrivateWrite,
    SimulationResult,
    simulate,
)
from .errors import (
    EndorsementMismatch,
    PolicyUnsatisfiable,
    ReplicaDivergence,
    TxConflict,
)
from .ledger import (
    Block,
    BlockLog,
    Endorsement,
    LedgerStore,
    TransactionEnvelope,
    VALID,
    replay_log,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EndorsementPolicy:
    """Require ``required`` matching simulations out of ``total`` orgs."""

    required: int
    total: int

    def check(self) -> None:
        if self.total < 1 or not (1 <= self.required <= self.total):
            raise PolicyUnsatisfiable(
                f"cannot satisfy {self.required}-of-{self.total}",
                required=self.required, total=self.total)


class PrivateStore:
    """One org's off-chain store for private collection data."""

    def __init__(self, path: Optional[str] = None) -> None:
        self._data: dict[tuple[str, str], bytes] = {}
        self._dirty = False
        self.path = path

    def put(self, collection: str, key: str, value: bytes) -> None:
        self._data[(collection, key)] = value
        self._dirty = True

    def get(self, collection: str, key: str) -> Optional[bytes]:
        return self._data.get((collection, key))

    def view(self) -> Mapping[tuple[str, str], bytes]:
        return self._data

    def save(self) -> None:
        # Dirty-gated so a process that never wrote private data (a replay
        # that failed before serving, a read-only tool) cannot clobber the
        # sidecar written by the live server.
        if not self.path or not self._dirty:
            return
        payload = {
            f"{c}\x00{k}": base64.b64encode(v).decode("ascii")
            for (c, k), v in sorted(self._data.items())
        }
        tmp = self.path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True)
        os.replace(tmp, self.path)
        self._dirty = False

    def load(self) -> None:
        if not self.path or not os.path.exists(self.path):
            return
        with open(self.path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        for joined, b64 in payload.items():
            collection, key = joined.split("\x00", 1)
            self._data[(collection, key)] = base64.b64decode(b64)


@dataclass
class PeerOrg:
    org_id: str
    ledger: LedgerStore
    private: PrivateStore


@dataclass(frozen=True)
class CommitOutcome:
    tx_id: str
    height: int
    tx_index: int
    validity: str
    reason: str

    @property
    def is_valid(self) -> bool:
        return self.validity == VALID


class SubmitHandle:
    """Returned by ``submit``: simulation response now, commit outcome later."""

    def __init__(self, tx_id: str, response: Any, future: "Future[CommitOutcome]") -> None:
        self.tx_id = tx_id
        self.response = response
        self._future = future

    def outcome(self, timeout: Optional[float] = None) -> CommitOutcome:
        return self._future.result(timeout=timeout)


class LogicalClock:
    """Deterministic block timestamps: ``start + ticks * step``."""

    def __init__(self, start_ms: int = 1_600_000_000_000, step_ms: int = 1000) -> None:
        self._next = start_ms
        self._step = step_ms
        self._lock = threading.Lock()

    def __call__(self) -> int:
        with self._lock:
            value = self._next
            self._next += self._step
            return value

    def advance_past(self, timestamp_ms: int) -> None:
        with self._lock:
            while self._next <= timestamp_ms:
                self._next += self._step


def wall_clock_ms() -> int:
    return time.time_ns() // 1_000_000


@dataclass
class _Pending:
    envelope: TransactionEnvelope
    private_writes: tuple[PrivateWrite, ...]
    future: "Future[CommitOutcome]"


class Network:
    """The in-process network: N orgs, one orderer, one operation registry."""

    def __init__(
        self,
        org_ids: Iterable[str],
        registry: OperationRegistry,
        pdc_config: PdcConfig,
        endorsement: EndorsementPolicy,
        *,
        max_block_txs: int = 10,
        cut_timeout_ms: int = 500,
        cut_on_idle: bool = True,
        clock: Callable[[], int] = wall_clock_ms,
        block_log_path: Optional[str] = None,
        private_dir: Optional[str] = None,
        trace_path: Optional[str] = None,
        on_commit: Optional[Callable[[Block], None]] = None,
    ) -> None:
        ids = list(org_ids)
        if len(set(ids)) != len(ids) or not ids:
            raise PolicyUnsatisfiable("org ids must be unique and non-empty")
        endorsement = EndorsementPolicy(endorsement.required, len(ids))
        endorsement.check()
        for name, members in pdc_config.collections.items():
            unknown = members - set(ids)
            if unknown:
                raise PolicyUnsatisfiable(
                    f"collection {name!r} names unknown orgs {sorted(unknown)}")
        self.org_ids = ids
        self.endorsement = endorsement
        self.registry = registry
        self.pdc_config = pdc_config
        self.max_block_txs = max_block_txs
        self.cut_timeout_ms = cut_timeout_ms
        self.cut_on_idle = cut_on_idle
        self.clock = clock
        self.on_commit = on_commit
        self.orgs = [
            PeerOrg(org_id, LedgerStore(),
                    PrivateStore(os.path.join(private_dir, f"private_{org_id}.json")
                                 if private_dir else None))
            for org_id in ids
        ]
        self.block_log = BlockLog(block_log_path) if block_log_path else None
        self._queue: "queue.Queue[_Pending]" = queue.Queue()
        self._state_lock = threading.RLock()   # guards simulate vs commit
        self._commit_lock = threading.Lock()   # serializes block cuts
        self._nonce_lock = threading.Lock()
        self._next_nonce = 0
        self._stop = threading.Event()
        self._orderer_thread: Optional[threading.Thread] = None
        self._trace_fh = open(trace_path, "a", encoding="utf-8") if trace_path else None
        self._trace_lock = threading.Lock()

    # --- lifecycle -------------------------------------------------------------

    @property
    def primary(self) -> PeerOrg:
        return self.orgs[0]

    def bootstrap(self) -> None:
        """Initialize genesis, or rebuild every org from the block log."""
        if self.block_log and os.path.exists(self.block_log.path):
            stores, blocks = replay_log(self.block_log.path, LedgerStore,
                                        copies=len(self.orgs))
            for org, store in zip(self.orgs, stores):
                org.ledger = store
                org.private.load()
            with self._nonce_lock:
                self._next_nonce = stores[0].max_nonce() + 1
            if isinstance(self.clock, LogicalClock) and blocks:
                self.clock.advance_past(blocks[-1].timestamp_ms)
            self._trace(f"replayed {len(blocks)} blocks from log")
            return
        ts = self.clock()
        genesis = None
        for org in self.orgs:
            genesis = org.ledger.initialize(ts)
        if self.block_log and genesis is not None:
            self.block_log.append(genesis)
        self._trace("genesis created")

    def start_ordering(self) -> None:
        if self._orderer_thread is not None:
            return
        self._stop.clear()
        self._orderer_thread = threading.Thread(
            target=self._orderer_loop, name="orderer", daemon=True)
        self._orderer_thread.start()

    def stop_ordering(self) -> None:
        if self._orderer_thread is None:
            return
        self._stop.set()
        self._orderer_thread.join()
        self._orderer_thread = None
        # Drain anything still queued so no submitter hangs.
        while self.order_and_commit() is not None:
            pass

    def close(self) -> None:
        self.stop_ordering()
        for org in self.orgs:
            org.private.save()
        if self.block_log:
            self.block_log.close()
        if self._trace_fh:
            self._trace_fh.close()
            self._trace_fh = None

    # --- submission --------------------------------------------------------------

    def submit(self, operation: str, args: dict[str, codec.ArgValue],
               submitter: str,
               transient: Optional[Mapping[str, bytes]] = None) -> SubmitHandle:
        """Simulate on E orgs, enforce matching results, enqueue for ordering."""
        transient = transient or {}
        with self._nonce_lock:
            nonce = self._next_nonce
            self._next_nonce += 1
        tx_id = TransactionEnvelope.compute_tx_id(operation, args, submitter, nonce)
        self._trace(f"{tx_id[:12]} SUBMIT op={operation} submitter={submitter}")
        endorsers = self.orgs[: self.endorsement.required]
        results: list[SimulationResult] = []
        with self._state_lock:
            for org in endorsers:
                results.append(simulate(
                    self.registry, org.ledger, org.org_id, org.private.view(),
                    self.pdc_config, operation, args, submitter, tx_id, nonce,
                    transient))
        digests = [r.digest() for r in results]
        if len(set(digests)) != 1:
            self._trace(f"{tx_id[:12]} ENDORSE mismatch {digests}")
            raise EndorsementMismatch(
                f"endorsers disagree on {operation}",
                operation=operation, digests=digests)
        self._trace(f"{tx_id[:12]} ENDORSE ok orgs="
                    f"{','.join(o.org_id for o in endorsers)}")
        first = results[0]
        envelope = TransactionEnvelope(
            tx_id=tx_id, operation=operation, args=dict(args),
            submitter=submitter, nonce=nonce,
            read_set=first.read_set, write_set=first.write_set,
            endorsements=tuple(Endorsement(org.org_id, digest)
                               for org, digest in zip(endorsers, digests)),
        )
        future: "Future[CommitOutcome]" = Future()
        self._queue.put(_Pending(envelope, first.private_writes, future))
        self._trace(f"{tx_id[:12]} ORDER queued")
        return SubmitHandle(tx_id, first.response, future)

    def invoke(self, operation: str, args: dict[str, codec.ArgValue],
               submitter: str,
               transient: Optional[Mapping[str, bytes]] = None,
               timeout: float = 30.0) -> tuple[Any, CommitOutcome]:
        """Submit and block until committed; invalid commits raise."""
        handle = self.submit(operation, args, submitter, transient)
        if self._orderer_thread is None:
            self.order_and_commit()
        outcome = handle.outcome(timeout=timeout)
        if not outcome.is_valid:
            raise TxConflict(
                f"transaction {handle.tx_id[:12]} invalid: {outcome.reason}",
                tx_id=handle.tx_id, reason=outcome.reason)
        return handle.response, outcome

    # --- ordering ----------------------------------------------------------------

    def order_and_commit(self) -> Optional[Block]:
        """Cut one block from the queue now; None when the queue is empty."""
        with self._commit_lock:
            batch: list[_Pending] = []
            while len(batch) < self.max_block_txs:
                try:
                    batch.append(self._queue.get_nowait())
                except queue.Empty:
                    break
            if not batch:
                return None
            return self._commit(batch)

    def _orderer_loop(self) -> None:
        timeout_s = self.cut_timeout_ms / 1000.0
        while not self._stop.is_set():
            try:
                first = self._queue.get(timeout=0.05)
            except queue.Empty:
                continue
            batch = [first]
            deadline = time.monotonic() + timeout_s
            while len(batch) < self.max_block_txs:
                try:
                    batch.append(self._queue.get_nowait())
                except queue.Empty:
                    if self.cut_on_idle or time.monotonic() >= deadline:
                        break
                    time.sleep(0.001)
            with self._commit_lock:
                self._commit(batch)

    def _commit(self, batch: list[_Pending]) -> Block:
        ts = self.clock()
        envelopes = [p.envelope for p in batch]
        with self._state_lock:
            sealed = self.primary.ledger.append_block(envelopes, ts)
            for org in self.orgs[1:]:
                copy = org.ledger.append_block(
                    [env.fresh_copy() for env in envelopes], ts)
                if copy.block_hash != sealed.block_hash:
                    raise ReplicaDivergence(
                        f"org {org.org_id} diverged at height {sealed.height}",
                        height=sealed.height)
            # Distribute private data for valid txs to member orgs only.
            for pending in batch:
                if pending.envelope.validity != VALID:
                    continue
                for pw in pending.private_writes:
                    for org in self.orgs:
                        if org.org_id in pw.members:
                            org.private.put(pw.collection, pw.key, pw.value)
        if self.block_log:
            self.block_log.append(sealed)
        # Private data must be durable before any submitter sees the commit:
        # it exists nowhere else (the chain carries only its hash), so unlike
        # public state it cannot be rebuilt by replaying the block log.
        for org in self.orgs:
            org.private.save()
        for idx, pending in enumerate(batch):
            env = pending.envelope
            self._trace(f"{env.tx_id[:12]} VALIDATE {env.validity}"
                        + (f" reason={env.invalid_reason}" if env.invalid_reason else ""))
            self._trace(f"{env.tx_id[:12]} COMMIT height={sealed.height} idx={idx}")
            pending.future.set_result(CommitOutcome(
                env.tx_id, sealed.height, idx, env.validity, env.invalid_reason))
        if self.on_commit is not None:
            self.on_commit(sealed)
        return sealed

    # --- helpers ---------------------------------------------------------------

    def collect_private(self, collection: str, key: str) -> Optional[bytes]:
        """Fetch a private value from whichever org holds it.

        This is a host-process privilege used by the service layer when it
        gathers vote reveals for finalization; org boundaries are simulated
        within one process, so the facade acts for all orgs it hosts.
        """
        for org in self.orgs:
            value = org.private.get(collection, key)
            if value is not None:
                return value
        return None

    def snapshot_digests(self) -> list[str]:
        with self._state_lock:
            return [org.ledger.snapshot_digest() for org in self.orgs]

    def _trace(self, line: str) -> None:
        if self._trace_fh is None:
            log.debug("%s", line)
            return
        with self._trace_lock:
            self._trace_fh.write(line + "\n")
            self._trace_fh.flush()
