"""Artifact rendering: CSV text and the binary spectrum dump.

All CSV output uses a decimal point, no thousands separators and LF
line endings; identical inputs render byte-identical files.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

SPECTRUM_MAGIC = b"RTSC"
SPECTRUM_VERSION = 1
_HEADER = struct.Struct("<4s3II")   # magic, dims (chirp, antenna, sample), version
HEADER_SIZE = 32


def render_csv(header: list[str], rows: list[tuple]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def write_text(path: str | Path, content: str) -> None:
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(content)


def encode_spectrum(data: np.ndarray) -> bytes:
    """Serialize a complex cube [sample, chirp, antenna].

    Layout: 32-byte header (magic "RTSC", three u32 dims in written
    order chirp/antenna/sample, u32 version, zero padding), then
    little-endian float64 (re, im) pairs, row-major with chirp slowest
    and sample fastest.
    """
    if data.ndim != 3:
        raise ValueError("spectrum cube must be 3-dimensional")
    n_s, n_c, n_a = data.shape
    head = _HEADER.pack(SPECTRUM_MAGIC, n_c, n_a, n_s, SPECTRUM_VERSION)
    head += b"\x00" * (HEADER_SIZE - len(head))
    cube = np.ascontiguousarray(data.transpose(1, 2, 0).astype(np.complex128))
    interleaved = cube.view(np.float64).astype("<f8", copy=False)
    return head + interleaved.tobytes()


def decode_spectrum(blob: bytes) -> np.ndarray:
    """Inverse of encode_spectrum; returns a [sample, chirp, antenna] cube."""
    if len(blob) < HEADER_SIZE:
        raise ValueError("truncated spectrum dump")
    magic, n_c, n_a, n_s, version = _HEADER.unpack(blob[:_HEADER.size])
    if magic != SPECTRUM_MAGIC:
        raise ValueError("bad magic in spectrum dump")
    if version != SPECTRUM_VERSION:
        raise ValueError(f"unsupported spectrum dump version {version}")
    count = 2 * n_c * n_a * n_s
    flat = np.frombuffer(blob, dtype="<f8", offset=HEADER_SIZE, count=count)
    cube = flat.view(np.complex128).reshape(n_c, n_a, n_s)
    return cube.transpose(2, 0, 1)


def fmt(value: float, decimals: int) -> str:
    return f"{value:.{decimals}f}"


def fmt_sci(value: float, decimals: int = 6) -> str:
    return f"{value:.{decimals}e}"
