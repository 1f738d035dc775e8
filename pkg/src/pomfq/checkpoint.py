"""Checkpoint persistence: magic header, version, content checksum.

The payload is an arbitrary picklable dict. Writes are atomic (temp file
plus rename) so a crashed save never leaves partial state behind, and
loads verify the checksum before unpickling anything.
"""

import hashlib
import os
import pickle
import struct

MAGIC = b"POMFQCK\x01"
VERSION = 1
_HEADER = struct.Struct("<8sIQQ")  # magic, version, checksum, payload length


class CheckpointError(Exception):
    """Base class for checkpoint load failures."""


class CheckpointVersionError(CheckpointError):
    pass


class CheckpointTruncatedError(CheckpointError):
    pass


class CheckpointChecksumError(CheckpointError):
    pass


def _checksum(data: bytes) -> int:
    digest = hashlib.blake2b(data, digest_size=8).digest()
    return int.from_bytes(digest, "little")


def save_checkpoint(path, payload: dict) -> None:
    data = pickle.dumps(payload, protocol=4)
    header = _HEADER.pack(MAGIC, VERSION, _checksum(data), len(data))
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def load_checkpoint(path) -> dict:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise CheckpointTruncatedError(f"{path}: shorter than the header")
    magic, version, checksum, length = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    if version != VERSION:
        raise CheckpointVersionError(
            f"{path}: version {version}, expected {VERSION}")
    data = blob[_HEADER.size:]
    if len(data) != length:
        raise CheckpointTruncatedError(
            f"{path}: payload is {len(data)} bytes, header says {length}")
    if _checksum(data) != checksum:
        raise CheckpointChecksumError(f"{path}: checksum mismatch")
    return pickle.loads(data)
