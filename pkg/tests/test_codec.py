"""Canonical encoding: round-trips, determinism, strict decoding."""

import pytest

from factledger import codec
from factledger.codec import Reader
from factledger.errors import CodecError


def test_primitive_round_trips():
    r = Reader(codec.enc_u8(7) + codec.enc_u32(1 << 20) + codec.enc_u64(1 << 40)
               + codec.enc_i64(-5))
    assert r.read_u8() == 7
    assert r.read_u32() == 1 << 20
    assert r.read_u64() == 1 << 40
    assert r.read_i64() == -5
    r.expect_end()


def test_bytes_and_str_round_trip():
    r = Reader(codec.enc_bytes(b"\x00\xffdata") + codec.enc_str("héllo"))
    assert r.read_bytes() == b"\x00\xffdata"
    assert r.read_str() == "héllo"
    r.expect_end()


@pytest.mark.parametrize("value", [b"raw", "text", 42, -42, True, False, 0])
def test_value_round_trip(value):
    r = Reader(codec.enc_value(value))
    decoded = r.read_value()
    assert decoded == value and type(decoded) is type(value)
    r.expect_end()


def test_args_sorted_by_key():
    a = codec.enc_args({"b": 1, "a": "x"})
    b = codec.enc_args({"a": "x", "b": 1})
    assert a == b
    r = Reader(a)
    assert r.read_args() == {"a": "x", "b": 1}


def test_truncated_input_raises():
    data = codec.enc_bytes(b"hello")
    with pytest.raises(CodecError):
        Reader(data[:-1]).read_bytes()
    with pytest.raises(CodecError):
        Reader(b"\x00\x00\x00\x05ab").read_bytes()


def test_trailing_bytes_raise():
    r = Reader(codec.enc_u8(1) + b"junk")
    r.read_u8()
    with pytest.raises(CodecError):
        r.expect_end()


def test_unknown_tag_raises():
    with pytest.raises(CodecError):
        Reader(b"\x09").read_value()


def test_unsupported_type_raises():
    with pytest.raises(CodecError):
        codec.enc_value(3.14)  # floats never enter envelopes


def test_invalid_utf8_raises():
    with pytest.raises(CodecError):
        Reader(codec.enc_bytes(b"\xff\xfe")).read_str()


def test_canonical_json_is_sorted_and_compact():
    assert codec.canonical_json({"b": 1, "a": [1, 2]}) == b'{"a":[1,2],"b":1}'


def test_sha256_hex_known_value():
    # sha256("") is a well-known constant.
    assert codec.sha256_hex(b"") == (
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855")


def test_zero_digest_shape():
    assert codec.ZERO_DIGEST == "0" * 64
    assert codec.is_hex_digest(codec.ZERO_DIGEST)
    assert not codec.is_hex_digest("XYZ")
    assert not codec.is_hex_digest("ab" * 31)
