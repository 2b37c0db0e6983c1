"""Canonical byte encoding.

Every hash in the system (tx ids, block hashes, snapshot digests, vote
commitments) is SHA-256 over bytes produced here, so the rules are strict:
fixed field order, length-prefixed variable fields, big-endian integers.
Decoding is exact: trailing bytes or truncation raise ``CodecError``.
"""

from __future__ import annotations

import base64
import hashlib
import json
import struct
from typing import Any, Mapping, Union

from .errors import CodecError

ZERO_DIGEST = "0" * 64

# Argument values allowed in a transaction envelope.
ArgValue = Union[bytes, str, int, bool]

_TAG_BYTES = 0
_TAG_STR = 1
_TAG_INT = 2
_TAG_BOOL = 3

_MAX_FIELD = 1 << 30  # 1 GiB sanity bound on any length prefix


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def enc_u8(value: int) -> bytes:
    return struct.pack(">B", value)


def enc_u32(value: int) -> bytes:
    return struct.pack(">I", value)


def enc_u64(value: int) -> bytes:
    return struct.pack(">Q", value)


def enc_i64(value: int) -> bytes:
    return struct.pack(">q", value)


def enc_bytes(data: bytes) -> bytes:
    if len(data) > _MAX_FIELD:
        raise CodecError("field too large")
    return enc_u32(len(data)) + data


def enc_str(text: str) -> bytes:
    return enc_bytes(text.encode("utf-8"))


def enc_value(value: ArgValue) -> bytes:
    # bool first: bool is a subclass of int
    if isinstance(value, bool):
        return enc_u8(_TAG_BOOL) + enc_u8(1 if value else 0)
    if isinstance(value, bytes):
        return enc_u8(_TAG_BYTES) + enc_bytes(value)
    if isinstance(value, str):
        return enc_u8(_TAG_STR) + enc_str(value)
    if isinstance(value, int):
        return enc_u8(_TAG_INT) + enc_i64(value)
    raise CodecError(f"unsupported arg type: {type(value).__name__}")


def enc_args(args: Mapping[str, ArgValue]) -> bytes:
    """Args are encoded sorted by key so equal mappings hash equally."""
    out = [enc_u32(len(args))]
    for key in sorted(args):
        out.append(enc_str(key))
        out.append(enc_value(args[key]))
    return b"".join(out)


class Reader:
    """Sequential decoder over a bytes buffer with strict bounds checks."""

    def __init__(self, data: bytes) -> None:
        self._data = data
        self._pos = 0

    @property
    def remaining(self) -> int:
        return len(self._data) - self._pos

    def _take(self, n: int) -> bytes:
        if n < 0 or self.remaining < n:
            raise CodecError("truncated input")
        chunk = self._data[self._pos:self._pos + n]
        self._pos += n
        return chunk

    def read_u8(self) -> int:
        return self._take(1)[0]

    def read_u32(self) -> int:
        return struct.unpack(">I", self._take(4))[0]

    def read_u64(self) -> int:
        return struct.unpack(">Q", self._take(8))[0]

    def read_i64(self) -> int:
        return struct.unpack(">q", self._take(8))[0]

    def read_bytes(self) -> bytes:
        length = self.read_u32()
        if length > _MAX_FIELD:
            raise CodecError("length prefix out of range")
        return self._take(length)

    def read_str(self) -> str:
        try:
            return self.read_bytes().decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CodecError("invalid utf-8") from exc

    def read_raw(self, n: int) -> bytes:
        return self._take(n)

    def read_value(self) -> ArgValue:
        tag = self.read_u8()
        if tag == _TAG_BYTES:
            return self.read_bytes()
        if tag == _TAG_STR:
            return self.read_str()
        if tag == _TAG_INT:
            return self.read_i64()
        if tag == _TAG_BOOL:
            return self.read_u8() != 0
        raise CodecError(f"unknown value tag {tag}")

    def read_args(self) -> dict[str, ArgValue]:
        count = self.read_u32()
        if count > 1 << 20:
            raise CodecError("arg count out of range")
        args: dict[str, ArgValue] = {}
        for _ in range(count):
            key = self.read_str()
            args[key] = self.read_value()
        return args

    def expect_end(self) -> None:
        if self.remaining:
            raise CodecError(f"{self.remaining} trailing bytes")


def canonical_json(obj: Any) -> bytes:
    """Deterministic JSON bytes: sorted keys, no whitespace, exact floats."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def value_to_json(value: ArgValue) -> Any:
    """JSON projection of an arg value; bytes become {"b64": ...}."""
    if isinstance(value, bytes):
        return {"b64": base64.b64encode(value).decode("ascii")}
    return value


def is_hex_digest(text: str) -> bool:
    if len(text) != 64:
        return False
    return all(c in "0123456789abcdef" for c in text)
