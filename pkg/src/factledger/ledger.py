"""Hash-chained block store with an MVCC world state.

Design points:

- Versions are ``(block_height, tx_index)``. A read set records the version
  observed during simulation (``None`` when the key was absent or deleted);
  validation re-checks those versions in commit order, so earlier valid
  transactions in the same block are visible to later ones.
- Deletes write a tombstone: the key keeps a monotonically increasing
  version but reads and prefix scans treat it as absent.
- A block hash covers every serialized byte of the block, including the
  per-transaction validity flags that are sealed in during validation.
  Flipping any single byte of a stored block is therefore detectable.
- The append-only block log is the source of truth; world state is a cache
  rebuilt by replaying the log through the exact same validation path.
"""

from __future__ import annotations

import os
import struct
import threading
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Iterator, Optional

from . import codec
from .codec import Reader
from .errors import (
    ChainAlreadyInitialized,
    ChainNotInitialized,
    CodecError,
    CorruptLog,
    EmptyBlock,
    NotFound,
)

Version = tuple[int, int]

VALID = "valid"
INVALID = "invalid"
PENDING = "pending"

REASON_MVCC = "mvcc_conflict"
REASON_DUP_TX = "duplicate_tx_id"


@dataclass(frozen=True)
class ReadItem:
    """Key plus the version observed at simulation time (None = absent)."""

    key: str
    version: Optional[Version]


@dataclass(frozen=True)
class WriteItem:
    """Key plus new value; ``value is None`` means delete (tombstone)."""

    key: str
    value: Optional[bytes]


@dataclass(frozen=True)
class Endorsement:
    org_id: str
    rwset_digest: str


@dataclass
class TransactionEnvelope:
    """A simulated transaction ready for ordering.

    ``validity`` starts as ``pending`` and is sealed to ``valid`` or
    ``invalid`` during block validation; the sealed value is covered by the
    block hash.
    """

    tx_id: str
    operation: str
    args: dict[str, codec.ArgValue]
    submitter: str
    nonce: int
    read_set: tuple[ReadItem, ...]
    write_set: tuple[WriteItem, ...]
    endorsements: tuple[Endorsement, ...]
    validity: str = PENDING
    invalid_reason: str = ""

    @staticmethod
    def compute_tx_id(operation: str, args: dict[str, codec.ArgValue],
                      submitter: str, nonce: int) -> str:
        payload = (
            codec.enc_str(operation)
            + codec.enc_args(args)
            + codec.enc_str(submitter)
            + codec.enc_u64(nonce)
        )
        return codec.sha256_hex(payload)

    def rwset_bytes(self) -> bytes:
        out = [codec.enc_u32(len(self.read_set))]
        for item in self.read_set:
            out.append(codec.enc_str(item.key))
            if item.version is None:
                out.append(codec.enc_u8(0))
            else:
                out.append(codec.enc_u8(1))
                out.append(codec.enc_u64(item.version[0]))
                out.append(codec.enc_u32(item.version[1]))
        out.append(codec.enc_u32(len(self.write_set)))
        for w in self.write_set:
            out.append(codec.enc_str(w.key))
            if w.value is None:
                out.append(codec.enc_u8(0))
            else:
                out.append(codec.enc_u8(1))
                out.append(codec.enc_bytes(w.value))
        return b"".join(out)

    def to_bytes(self) -> bytes:
        return b"".join([
            codec.enc_str(self.tx_id),
            codec.enc_str(self.operation),
            codec.enc_args(self.args),
            codec.enc_str(self.submitter),
            codec.enc_u64(self.nonce),
            self.rwset_bytes(),
            codec.enc_u32(len(self.endorsements)),
            b"".join(codec.enc_str(e.org_id) + codec.enc_str(e.rwset_digest)
                     for e in self.endorsements),
            codec.enc_str(self.validity),
            codec.enc_str(self.invalid_reason),
        ])

    @classmethod
    def read_from(cls, r: Reader) -> "TransactionEnvelope":
        tx_id = r.read_str()
        operation = r.read_str()
        args = r.read_args()
        submitter = r.read_str()
        nonce = r.read_u64()
        reads = []
        for _ in range(r.read_u32()):
            key = r.read_str()
            version = None
            if r.read_u8():
                version = (r.read_u64(), r.read_u32())
            reads.append(ReadItem(key, version))
        writes = []
        for _ in range(r.read_u32()):
            key = r.read_str()
            value = r.read_bytes() if r.read_u8() else None
            writes.append(WriteItem(key, value))
        endorsements = tuple(
            Endorsement(r.read_str(), r.read_str()) for _ in range(r.read_u32())
        )
        validity = r.read_str()
        reason = r.read_str()
        if validity not in (VALID, INVALID, PENDING):
            raise CodecError(f"bad validity flag {validity!r}")
        return cls(tx_id, operation, args, submitter, nonce,
                   tuple(reads), tuple(writes), endorsements, validity, reason)

    def fresh_copy(self) -> "TransactionEnvelope":
        """Copy with validity reset, for independent re-validation."""
        return replace(self, args=dict(self.args), validity=PENDING,
                       invalid_reason="")

    def to_json(self) -> dict:
        return {
            "tx_id": self.tx_id,
            "operation": self.operation,
            "args": {k: codec.value_to_json(v) for k, v in sorted(self.args.items())},
            "submitter": self.submitter,
            "nonce": self.nonce,
            "read_set": [
                {"key": i.key,
                 "version": list(i.version) if i.version else None}
                for i in self.read_set
            ],
            "write_set": [
                {"key": w.key, "delete": w.value is None,
                 "value": codec.value_to_json(w.value) if w.value is not None else None}
                for w in self.write_set
            ],
            "endorsements": [
                {"org_id": e.org_id, "rwset_digest": e.rwset_digest}
                for e in self.endorsements
            ],
            "validity": self.validity,
            "invalid_reason": self.invalid_reason,
        }


@dataclass
class Block:
    height: int
    prev_hash: str
    timestamp_ms: int
    tx_list: tuple[TransactionEnvelope, ...]
    block_hash: str = ""

    def body_bytes(self) -> bytes:
        out = [
            codec.enc_u64(self.height),
            codec.enc_str(self.prev_hash),
            codec.enc_u64(self.timestamp_ms),
            codec.enc_u32(len(self.tx_list)),
        ]
        for tx in self.tx_list:
            out.append(codec.enc_bytes(tx.to_bytes()))
        return b"".join(out)

    def seal(self) -> "Block":
        self.block_hash = codec.sha256_hex(self.body_bytes())
        return self

    def to_bytes(self) -> bytes:
        return self.body_bytes() + codec.enc_str(self.block_hash)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Block":
        r = Reader(data)
        height = r.read_u64()
        prev_hash = r.read_str()
        timestamp_ms = r.read_u64()
        txs = []
        for _ in range(r.read_u32()):
            tx_bytes = r.read_bytes()
            tr = Reader(tx_bytes)
            txs.append(TransactionEnvelope.read_from(tr))
            tr.expect_end()
        block_hash = r.read_str()
        r.expect_end()
        if not codec.is_hex_digest(block_hash) or not codec.is_hex_digest(prev_hash):
            raise CodecError("malformed digest field")
        return cls(height, prev_hash, timestamp_ms, tuple(txs), block_hash)

    def to_json(self) -> dict:
        return {
            "height": self.height,
            "prev_hash": self.prev_hash,
            "timestamp_ms": self.timestamp_ms,
            "block_hash": self.block_hash,
            "tx_list": [tx.to_json() for tx in self.tx_list],
        }


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    blocks_checked: int
    first_bad_height: Optional[int] = None
    reason: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "blocks_checked": self.blocks_checked,
            "first_bad_height": self.first_bad_height,
            "reason": self.reason,
        }


@dataclass
class StateEntry:
    value: Optional[bytes]  # None = tombstone
    version: Version


class LedgerStore:
    """One org's copy of the chain plus its derived world state."""

    def __init__(self) -> None:
        self._blocks: list[Block] = []
        self._state: dict[str, StateEntry] = {}
        self._tx_index: dict[str, Version] = {}

    # --- chain growth -------------------------------------------------------

    @property
    def height(self) -> int:
        """Height of the latest block; -1 when uninitialized."""
        return len(self._blocks) - 1

    def initialize(self, timestamp_ms: int) -> Block:
        """Create the genesis block (height 0, zero prev hash, no txs)."""
        if self._blocks:
            raise ChainAlreadyInitialized("genesis already present")
        block = Block(0, codec.ZERO_DIGEST, timestamp_ms, ()).seal()
        self._blocks.append(block)
        return block

    def append_block(self, txs: Iterable[TransactionEnvelope],
                     timestamp_ms: int) -> Block:
        """Validate ``txs`` in order, apply valid writes, seal and append.

        Every transaction lands in the block regardless of validity; invalid
        ones carry a reason and produce no state change.
        """
        tx_tuple = tuple(txs)
        if not self._blocks:
            raise ChainNotInitialized("append before genesis")
        if not tx_tuple:
            raise EmptyBlock("blocks must carry at least one transaction")
        height = len(self._blocks)
        seen_in_block: set[str] = set()
        for idx, tx in enumerate(tx_tuple):
            if tx.tx_id in self._tx_index or tx.tx_id in seen_in_block:
                tx.validity = INVALID
                tx.invalid_reason = REASON_DUP_TX
                continue
            seen_in_block.add(tx.tx_id)
            conflict = None
            for item in tx.read_set:
                if self.observed_version(item.key) != item.version:
                    conflict = item.key
                    break
            if conflict is not None:
                tx.validity = INVALID
                tx.invalid_reason = REASON_MVCC
                continue
            tx.validity = VALID
            version = (height, idx)
            for w in tx.write_set:
                self._state[w.key] = StateEntry(w.value, version)
            self._tx_index[tx.tx_id] = version
        block = Block(height, self._blocks[-1].block_hash, timestamp_ms,
                      tx_tuple).seal()
        # Register invalid tx ids too: an id is unique per chain either way.
        for idx, tx in enumerate(tx_tuple):
            self._tx_index.setdefault(tx.tx_id, (height, idx))
        self._blocks.append(block)
        return block

    # --- world state --------------------------------------------------------

    def observed_version(self, key: str) -> Optional[Version]:
        """Version a simulation would record for ``key`` (None = absent)."""
        entry = self._state.get(key)
        if entry is None or entry.value is None:
            return None
        return entry.version

    def state_get(self, key: str) -> Optional[tuple[bytes, Version]]:
        entry = self._state.get(key)
        if entry is None or entry.value is None:
            return None
        return entry.value, entry.version

    def state_items(self, prefix: str) -> list[tuple[str, bytes, Version]]:
        """Live entries with the prefix, sorted by key."""
        out = []
        for key in sorted(self._state):
            if not key.startswith(prefix):
                continue
            entry = self._state[key]
            if entry.value is None:
                continue
            out.append((key, entry.value, entry.version))
        return out

    def raw_entry(self, key: str) -> Optional[StateEntry]:
        return self._state.get(key)

    def snapshot_digest(self) -> str:
        """Digest over the full state, tombstones included."""
        out = []
        for key in sorted(self._state):
            entry = self._state[key]
            out.append(codec.enc_str(key))
            if entry.value is None:
                out.append(codec.enc_u8(0))
            else:
                out.append(codec.enc_u8(1))
                out.append(codec.enc_bytes(entry.value))
            out.append(codec.enc_u64(entry.version[0]))
            out.append(codec.enc_u32(entry.version[1]))
        return codec.sha256_hex(b"".join(out))

    def snapshot_json(self) -> dict:
        import base64
        entries = {}
        for key in sorted(self._state):
            entry = self._state[key]
            entries[key] = {
                "value_b64": (None if entry.value is None
                              else base64.b64encode(entry.value).decode("ascii")),
                "deleted": entry.value is None,
                "version": list(entry.version),
            }
        return {"height": self.height, "digest": self.snapshot_digest(),
                "entries": entries}

    # --- lookups --------------------------------------------------------------

    def get_block(self, height: int) -> Block:
        if height < 0 or height > self.height:
            raise NotFound(f"no block at height {height}", height=height)
        return self._blocks[height]

    def iter_blocks(self) -> Iterator[Block]:
        return iter(self._blocks)

    def get_transaction(self, tx_id: str) -> tuple[TransactionEnvelope, int, int]:
        loc = self._tx_index.get(tx_id)
        if loc is None:
            raise NotFound(f"unknown transaction {tx_id}", tx_id=tx_id)
        height, idx = loc
        return self._blocks[height].tx_list[idx], height, idx

    def max_nonce(self) -> int:
        nonce = -1
        for block in self._blocks:
            for tx in block.tx_list:
                nonce = max(nonce, tx.nonce)
        return nonce

    # --- verification ---------------------------------------------------------

    def verify_chain(self) -> VerificationReport:
        return _verify_blocks(self._blocks)


def _verify_blocks(blocks: list[Block]) -> VerificationReport:
    """Shared integrity check: hash, link, height, validity sealing."""
    prev_hash = codec.ZERO_DIGEST
    for i, block in enumerate(blocks):
        if block.height != i:
            return VerificationReport(False, i, i, "height_mismatch")
        if codec.sha256_hex(block.body_bytes()) != block.block_hash:
            return VerificationReport(False, i, i, "hash_mismatch")
        if block.prev_hash != prev_hash:
            return VerificationReport(False, i, i, "broken_link")
        if i == 0:
            if block.tx_list:
                return VerificationReport(False, i, i, "genesis_not_empty")
        else:
            if not block.tx_list:
                return VerificationReport(False, i, i, "empty_block")
        for tx in block.tx_list:
            if tx.validity not in (VALID, INVALID):
                return VerificationReport(False, i, i, "unsealed_validity")
        prev_hash = block.block_hash
    return VerificationReport(True, len(blocks))


def verify_chain_bytes(records: Iterable[bytes]) -> VerificationReport:
    """Offline integrity check over raw framed block payloads."""
    blocks: list[Block] = []
    for i, record in enumerate(records):
        try:
            blocks.append(Block.from_bytes(record))
        except CodecError:
            return VerificationReport(False, i, i, "decode_error")
    return _verify_blocks(blocks)


class BlockLog:
    """Append-only framed block log: ``u32(len) || block bytes`` per record.

    The log is the durable source of truth; the in-memory store is rebuilt
    from it on restart by replaying every block through validation.
    """

    def __init__(self, path: str) -> None:
        self.path = path
        self._fh = None
        self._lock = threading.Lock()

    def open_for_append(self) -> None:
        os.makedirs(os.path.dirname(self.path) or ".", exist_ok=True)
        self._fh = open(self.path, "ab")

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def append(self, block: Block) -> None:
        if self._fh is None:
            self.open_for_append()
        payload = block.to_bytes()
        with self._lock:
            self._fh.write(codec.enc_u32(len(payload)))
            self._fh.write(payload)
            self._fh.flush()

    @staticmethod
    def read_records(path: str) -> list[bytes]:
        """Decode the framing; a malformed frame raises ``CorruptLog``."""
        with open(path, "rb") as fh:
            data = fh.read()
        records = []
        pos = 0
        while pos < len(data):
            if pos + 4 > len(data):
                raise CorruptLog("truncated length prefix",
                                 record=len(records))
            (length,) = struct.unpack(">I", data[pos:pos + 4])
            pos += 4
            if pos + length > len(data):
                raise CorruptLog("truncated record", record=len(records))
            records.append(data[pos:pos + length])
            pos += length
        return records

    @staticmethod
    def verify_file(path: str) -> VerificationReport:
        try:
            records = BlockLog.read_records(path)
        except CorruptLog as exc:
            bad = int(exc.details.get("record", 0))
            return VerificationReport(False, bad, bad, "decode_error")
        return verify_chain_bytes(records)


def replay_log(path: str, make_store: Callable[[], LedgerStore],
               copies: int = 1) -> tuple[list[LedgerStore], list[Block]]:
    """Rebuild ``copies`` stores from the log via the normal validation path.

    Each replayed block must reproduce the logged block hash exactly,
    otherwise the log is corrupt (or validation is non-deterministic, which
    would be a bug this check is designed to catch).
    """
    records = BlockLog.read_records(path)
    stores = [make_store() for _ in range(copies)]
    logged_blocks: list[Block] = []
    for i, record in enumerate(records):
        try:
            logged = Block.from_bytes(record)
        except CodecError as exc:
            raise CorruptLog(f"undecodable block at height {i}",
                             height=i) from exc
        logged_blocks.append(logged)
        for store in stores:
            if logged.height == 0:
                sealed = store.initialize(logged.timestamp_ms)
            else:
                fresh = [tx.fresh_copy() for tx in logged.tx_list]
                sealed = store.append_block(fresh, logged.timestamp_ms)
            if sealed.block_hash != logged.block_hash:
                raise CorruptLog(
                    f"replay mismatch at height {logged.height}",
                    height=logged.height,
                )
    return stores, logged_blocks
