"""Array files and serialized structure files."""

import struct

import numpy as np

from .bits import DecodeError, IntegrityError

ARRAY_MAGIC = b"RMQA"
ARRAY_VERSION = 1
MAGIC = b"SRMQ"
VERSION = 1
KINDS = {1: "onebit", 2: "tradeoff", 3: "sparse"}
KIND_IDS = {v: k for k, v in KINDS.items()}


class FormatError(ValueError):
    pass


def encode_array(A, fmt="bin"):
    A = [int(v) for v in A]
    if fmt == "text":
        return ("\n".join(str(v) for v in A) + "\n").encode()
    if fmt != "bin":
        raise ValueError("format must be text or bin")
    return ARRAY_MAGIC + struct.pack("<IQ", ARRAY_VERSION, len(A)) + np.asarray(A, dtype="<i8").tobytes()


def decode_array(buf):
    if buf[:4] == ARRAY_MAGIC:
        if len(buf) < 16:
            raise FormatError("truncated array header")
        version, n = struct.unpack_from("<IQ", buf, 4)
        if version != ARRAY_VERSION:
            raise FormatError("unsupported array version %d" % version)
        if len(buf) != 16 + 8 * n:
            raise FormatError("array length does not match header")
        return np.frombuffer(buf, dtype="<i8", count=n, offset=16).astype(np.int64).tolist()
    try:
        text = buf.decode("ascii")
        return [int(tok) for tok in text.replace(",", " ").split()]
    except (UnicodeDecodeError, ValueError) as exc:
        raise FormatError("not an array file: %s" % exc) from None


def read_array(path):
    with open(path, "rb") as fh:
        return decode_array(fh.read())


def write_array(path, A, fmt="bin"):
    with open(path, "wb") as fh:
        fh.write(encode_array(A, fmt))


def _header(kind):
    return MAGIC + struct.pack("<IB", VERSION, KIND_IDS[kind])


def structure_kind(ds):
    from .onebit import OneBitRMQ
    from .tradeoff import TradeoffRMQ
    from .cartesian import SparseTable
    if isinstance(ds, OneBitRMQ):
        return "onebit"
    if isinstance(ds, TradeoffRMQ):
        return "tradeoff"
    if isinstance(ds, SparseTable):
        return "sparse"
    raise TypeError("unknown structure type")


def encode_structure(ds):
    kind = structure_kind(ds)
    if kind == "tradeoff":
        return ds.to_bytes()
    if kind == "onebit":
        return _header(kind) + ds.to_bytes()
    vals = np.asarray(ds.values, dtype="<i8")
    return _header(kind) + struct.pack("<Q", ds.n) + vals.tobytes()


def decode_structure(buf):
    buf = bytes(buf)
    if len(buf) < 9 or buf[:4] != MAGIC:
        raise FormatError("not a structure file")
    version, kid = struct.unpack_from("<IB", buf, 4)
    if version != VERSION or kid not in KINDS:
        raise FormatError("unsupported structure version %d or kind %d" % (version, kid))
    kind = KINDS[kid]
    try:
        if kind == "tradeoff":
            from .tradeoff import TradeoffRMQ
            return TradeoffRMQ.from_bytes(buf)
        if kind == "onebit":
            from .onebit import OneBitRMQ
            ds, off = OneBitRMQ.from_bytes(buf, 9)
            if off != len(buf):
                raise DecodeError("trailing bytes after structure")
            return ds
        from .cartesian import SparseTable
        (n,) = struct.unpack_from("<Q", buf, 9)
        if len(buf) != 17 + 8 * n or n < 1:
            raise DecodeError("sparse table length does not match header")
        return SparseTable(np.frombuffer(buf, dtype="<i8", count=n, offset=17).astype(np.int64))
    except IntegrityError:
        raise
    except (struct.error, ValueError) as exc:
        raise FormatError(str(exc)) from None


def save_structure(path, ds):
    with open(path, "wb") as fh:
        fh.write(encode_structure(ds))


def load_structure(path):
    with open(path, "rb") as fh:
        return decode_structure(fh.read())
