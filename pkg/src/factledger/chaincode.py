"""Operation registry and the stub handed to chaincode during simulation.

Simulation semantics mirror a permissioned-ledger peer:

- ``get_state`` reads the committed snapshot only (a transaction never sees
  its own buffered writes) and records the observed version in the read set.
- ``put_state``/``delete_state`` buffer writes; last write per key wins.
- Private data goes to a named collection: only a digest of the value lands
  in the public write set (under a reserved key prefix); the plaintext is
  distributed out-of-band to member orgs after commit.
- ``transient`` carries sensitive inputs that must never appear in envelope
  bytes (e.g. vote plaintexts); chaincode may read it but the pipeline never
  serializes it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Mapping, Optional

from . import codec
from .errors import NotAMember, UnknownCollection, UnknownOperation
from .ledger import LedgerStore, ReadItem, Version, WriteItem

# Reserved prefix for on-ledger private-data digests. Application keys are
# plain identifiers, so the prefix cannot collide.
PDC_KEY_PREFIX = "~pdc/"


def pdc_state_key(collection: str, key: str) -> str:
    return f"{PDC_KEY_PREFIX}{collection}/{key}"


OperationFn = Callable[["ChaincodeStub", dict[str, codec.ArgValue]], Any]


class OperationRegistry:
    def __init__(self) -> None:
        self._ops: dict[str, OperationFn] = {}

    def register(self, name: str, fn: OperationFn) -> None:
        if name in self._ops:
            raise ValueError(f"operation {name!r} registered twice")
        self._ops[name] = fn

    def resolve(self, name: str) -> OperationFn:
        fn = self._ops.get(name)
        if fn is None:
            raise UnknownOperation(f"no such operation: {name}", operation=name)
        return fn

    def names(self) -> list[str]:
        return sorted(self._ops)


@dataclass(frozen=True)
class PdcConfig:
    """Named private collections and their member orgs."""

    collections: Mapping[str, frozenset[str]]

    def members(self, collection: str) -> frozenset[str]:
        members = self.collections.get(collection)
        if members is None:
            raise UnknownCollection(f"no such collection: {collection}",
                                    collection=collection)
        return members


@dataclass(frozen=True)
class PrivateWrite:
    collection: str
    key: str
    value: bytes
    members: tuple[str, ...]


@dataclass(frozen=True)
class PdcValue:
    """Result of a private read: plaintext when held locally, else digest only."""

    digest: str
    value: Optional[bytes]


@dataclass
class SimulationResult:
    read_set: tuple[ReadItem, ...]
    write_set: tuple[WriteItem, ...]
    private_writes: tuple[PrivateWrite, ...]
    response: Any

    def digest(self) -> str:
        """Digest endorsers compare; covers rwset, private data and response."""
        out = [codec.enc_u32(len(self.read_set))]
        for item in self.read_set:
            out.append(codec.enc_str(item.key))
            if item.version is None:
                out.append(codec.enc_u8(0))
            else:
                out.append(codec.enc_u8(1) + codec.enc_u64(item.version[0])
                           + codec.enc_u32(item.version[1]))
        out.append(codec.enc_u32(len(self.write_set)))
        for w in self.write_set:
            out.append(codec.enc_str(w.key))
            out.append(codec.enc_u8(0) if w.value is None
                       else codec.enc_u8(1) + codec.enc_bytes(w.value))
        out.append(codec.enc_u32(len(self.private_writes)))
        for p in self.private_writes:
            out.append(codec.enc_str(p.collection) + codec.enc_str(p.key)
                       + codec.enc_bytes(p.value))
            out.append(codec.enc_u32(len(p.members)))
            for m in p.members:
                out.append(codec.enc_str(m))
        out.append(codec.enc_bytes(codec.canonical_json(self.response)))
        return codec.sha256_hex(b"".join(out))


class ChaincodeStub:
    """Per-simulation view of one endorsing org's ledger."""

    def __init__(self, store: LedgerStore, org_id: str,
                 private_store: Mapping[tuple[str, str], bytes],
                 pdc_config: PdcConfig, tx_id: str, submitter: str,
                 nonce: int, transient: Mapping[str, bytes]) -> None:
        self._store = store
        self._org_id = org_id
        self._private = private_store
        self._pdc = pdc_config
        self.tx_id = tx_id
        self.submitter = submitter
        self.nonce = nonce
        self.transient = dict(transient)
        self._reads: dict[str, Optional[Version]] = {}
        self._writes: dict[str, Optional[bytes]] = {}
        self._private_writes: list[PrivateWrite] = []

    # --- public state ---------------------------------------------------------

    def _record_read(self, key: str) -> Optional[tuple[bytes, Version]]:
        found = self._store.state_get(key)
        observed = found[1] if found else None
        if key in self._reads and self._reads[key] != observed:
            # Committed state moved under us mid-simulation; validation would
            # reject one of the two versions anyway, so fail fast.
            raise RuntimeError(f"unstable read of {key!r} during simulation")
        self._reads[key] = observed
        return found

    def get_state(self, key: str) -> Optional[bytes]:
        _check_key(key)
        found = self._record_read(key)
        return found[0] if found else None

    def put_state(self, key: str, value: bytes) -> None:
        _check_key(key)
        if not isinstance(value, bytes):
            raise TypeError("state values are bytes")
        self._writes[key] = value

    def delete_state(self, key: str) -> None:
        _check_key(key)
        self._writes[key] = None

    def get_state_by_prefix(self, prefix: str) -> list[tuple[str, bytes]]:
        """Committed live entries under ``prefix``; each read is recorded."""
        out = []
        for key, value, version in self._store.state_items(prefix):
            if key.startswith(PDC_KEY_PREFIX):
                continue
            self._reads[key] = version
            out.append((key, value))
        return out

    # --- private data -----------------------------------------------------------

    def pdc_put(self, collection: str, key: str, value: bytes,
                member_orgs: Optional[list[str]] = None) -> str:
        """Buffer a private write; the public write set gets only a digest."""
        members = self._pdc.members(collection)
        if self._org_id not in members:
            raise NotAMember(
                f"org {self._org_id} is not a member of {collection}",
                collection=collection, org=self._org_id)
        if member_orgs is None:
            targets = tuple(sorted(members))
        else:
            extra = set(member_orgs) - members
            if extra:
                raise NotAMember(
                    f"orgs {sorted(extra)} are not members of {collection}",
                    collection=collection, orgs=sorted(extra))
            targets = tuple(sorted(set(member_orgs)))
        digest = codec.sha256_hex(value)
        self._writes[pdc_state_key(collection, key)] = digest.encode("ascii")
        self._private_writes.append(
            PrivateWrite(collection, key, value, targets))
        return digest

    def pdc_get(self, collection: str, key: str) -> Optional[PdcValue]:
        """Read a private value; non-holders get the digest only."""
        self._pdc.members(collection)
        found = self._record_read(pdc_state_key(collection, key))
        if found is None:
            return None
        digest = found[0].decode("ascii")
        plain = self._private.get((collection, key))
        if plain is not None and codec.sha256_hex(plain) == digest:
            return PdcValue(digest, plain)
        return PdcValue(digest, None)

    # --- result ---------------------------------------------------------------

    def build_result(self, response: Any) -> SimulationResult:
        reads = tuple(ReadItem(k, v) for k, v in sorted(self._reads.items()))
        writes = tuple(WriteItem(k, v) for k, v in self._writes.items())
        return SimulationResult(reads, writes, tuple(self._private_writes),
                                response)


def _check_key(key: str) -> None:
    if not isinstance(key, str) or not key:
        raise ValueError("state keys are non-empty strings")
    if key.startswith(PDC_KEY_PREFIX):
        raise ValueError(f"key prefix {PDC_KEY_PREFIX!r} is reserved")


def simulate(registry: OperationRegistry, store: LedgerStore, org_id: str,
             private_store: Mapping[tuple[str, str], bytes],
             pdc_config: PdcConfig, operation: str,
             args: dict[str, codec.ArgValue], submitter: str, tx_id: str,
             nonce: int, transient: Mapping[str, bytes]) -> SimulationResult:
    fn = registry.resolve(operation)
    stub = ChaincodeStub(store, org_id, private_store, pdc_config,
                         tx_id, submitter, nonce, transient)
    response = fn(stub, args)
    return stub.build_result(response)
