import numpy as np
import pytest

from pomfq.checkpoint import (MAGIC, CheckpointChecksumError, CheckpointError,
                              CheckpointTruncatedError, CheckpointVersionError,
                              load_checkpoint, save_checkpoint)


def sample_payload():
    return {"kind": "train", "arrays": [np.arange(5.0), np.eye(3)],
            "nested": {"a": 1, "b": (2.0, "x")}}


def test_round_trip(tmp_path):
    path = tmp_path / "ck.bin"
    save_checkpoint(path, sample_payload())
    loaded = load_checkpoint(path)
    assert loaded["kind"] == "train"
    assert np.array_equal(loaded["arrays"][0], np.arange(5.0))
    assert loaded["nested"] == {"a": 1, "b": (2.0, "x")}


def test_no_partial_file_after_save(tmp_path):
    path = tmp_path / "ck.bin"
    save_checkpoint(path, sample_payload())
    assert not (tmp_path / "ck.bin.tmp").exists()


def test_corrupted_payload_raises_checksum_error(tmp_path):
    path = tmp_path / "ck.bin"
    save_checkpoint(path, sample_payload())
    blob = bytearray(path.read_bytes())
    blob[-1] ^= 0xFF
    path.write_bytes(bytes(blob))
    with pytest.raises(CheckpointChecksumError):
        load_checkpoint(path)


def test_truncated_file_raises_truncation_error(tmp_path):
    path = tmp_path / "ck.bin"
    save_checkpoint(path, sample_payload())
    blob = path.read_bytes()
    path.write_bytes(blob[:len(blob) - 7])
    with pytest.raises(CheckpointTruncatedError):
        load_checkpoint(path)
    path.write_bytes(blob[:10])
    with pytest.raises(CheckpointTruncatedError):
        load_checkpoint(path)


def test_version_mismatch_raises_version_error(tmp_path):
    path = tmp_path / "ck.bin"
    save_checkpoint(path, sample_payload())
    blob = bytearray(path.read_bytes())
    blob[8] = 99  # version field follows the 8-byte magic
    path.write_bytes(bytes(blob))
    with pytest.raises(CheckpointVersionError):
        load_checkpoint(path)


def test_wrong_magic_raises_generic_error(tmp_path):
    path = tmp_path / "ck.bin"
    save_checkpoint(path, sample_payload())
    blob = bytearray(path.read_bytes())
    blob[:8] = b"NOTMAGIC"
    path.write_bytes(bytes(blob))
    with pytest.raises(CheckpointError):
        load_checkpoint(path)
    assert len(MAGIC) == 8
