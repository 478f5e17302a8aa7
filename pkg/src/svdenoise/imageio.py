"""Grayscale image I/O: Netpbm PGM (P2/P5), raw float64 dumps and dataset manifests."""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, ManifestError, PgmParseError, RangeError, ValidationError
from .matrix import as_matrix

__all__ = [
    "ImageBuffer",
    "read_pgm",
    "write_pgm",
    "to_matrix",
    "from_matrix",
    "to_mask",
    "read_raw",
    "write_raw",
    "ManifestEntry",
    "DatasetManifest",
    "load_manifest",
    "write_manifest",
]

_WHITESPACE = b" \t\n\r\v\f"
DEPTH_MAX = {8: 255, 16: 65535}
RAW_MAGIC = b"SVDRAW01"
_RAW_HEADER = struct.Struct("<8sII")


@dataclass(frozen=True)
class ImageBuffer:
    """Unsigned integer grayscale raster.

    ``samples`` has shape (rows, cols) and dtype uint8 when ``maxval < 256``,
    uint16 otherwise.
    """

    samples: np.ndarray
    maxval: int = 255

    def __post_init__(self):
        if not 1 <= self.maxval <= 65535:
            raise RangeError(f"maxval must lie in [1, 65535], got {self.maxval}")
        s = self.samples
        if s.ndim != 2 or s.shape[0] < 1 or s.shape[1] < 1:
            raise ValidationError(f"samples must be a non-empty 2-D array, got shape {s.shape}")
        if s.dtype not in (np.uint8, np.uint16):
            raise ValidationError(f"samples must be uint8 or uint16, got {s.dtype}")
        if int(s.max()) > self.maxval:
            raise ValidationError(f"sample {int(s.max())} exceeds maxval {self.maxval}")

    @property
    def rows(self) -> int:
        return self.samples.shape[0]

    @property
    def cols(self) -> int:
        return self.samples.shape[1]

    @property
    def depth(self) -> int:
        return 8 if self.maxval < 256 else 16


def _dtype_for(maxval: int) -> np.dtype:
    return np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")


class _HeaderReader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def skip_space(self) -> None:
        data = self.data
        while self.pos < len(data):
            ch = data[self.pos : self.pos + 1]
            if ch == b"#":
                end = data.find(b"\n", self.pos)
                self.pos = len(data) if end < 0 else end + 1
            elif ch in _WHITESPACE:
                self.pos += 1
            else:
                return

    def integer(self, what: str) -> tuple[int, int]:
        """Next decimal token as ``(value, offset of its first byte)``."""
        self.skip_space()
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos : self.pos + 1].isdigit():
            self.pos += 1
        if start == self.pos:
            if start >= len(self.data):
                raise PgmParseError(f"unexpected end of data while reading {what}", start)
            raise PgmParseError(f"expected a decimal integer for {what}", start)
        return int(self.data[start : self.pos]), start


def parse_pgm(data: bytes) -> ImageBuffer:
    """Parse an in-memory P2 or P5 PGM image."""
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise PgmParseError(f"unsupported magic number {magic!r}, expected b'P2' or b'P5'", 0)
    r = _HeaderReader(data)
    r.pos = 2
    if r.pos < len(data) and data[r.pos : r.pos + 1] not in _WHITESPACE + b"#":
        raise PgmParseError("magic number must be followed by whitespace", r.pos)
    width, _ = r.integer("width")
    height, _ = r.integer("height")
    maxval, maxval_pos = r.integer("maxval")
    if width < 1 or height < 1:
        raise PgmParseError(f"image dimensions must be positive, got {width}x{height}", maxval_pos)
    if not 1 <= maxval <= 65535:
        raise PgmParseError(f"maxval {maxval} outside [1, 65535]", maxval_pos)
    count = width * height

    if magic == b"P5":
        if r.pos >= len(data) or data[r.pos : r.pos + 1] not in _WHITESPACE:
            raise PgmParseError("expected a single whitespace byte after maxval", r.pos)
        start = r.pos + 1
        dtype = _dtype_for(maxval)
        need = count * dtype.itemsize
        if len(data) - start < need:
            raise PgmParseError(f"truncated raster: need {need} bytes, found {len(data) - start}", len(data))
        samples = np.frombuffer(data, dtype=dtype, count=count, offset=start)
        bad = np.flatnonzero(samples > maxval)
        if bad.size:
            raise PgmParseError(
                f"sample {int(samples[bad[0]])} exceeds maxval {maxval}", start + int(bad[0]) * dtype.itemsize
            )
    else:
        values = []
        for _ in range(count):
            v, pos = r.integer("sample")
            if v > maxval:
                raise PgmParseError(f"sample {v} exceeds maxval {maxval}", pos)
            values.append(v)
        samples = np.array(values)

    native = np.uint8 if maxval < 256 else np.uint16
    return ImageBuffer(samples=samples.astype(native).reshape(height, width), maxval=maxval)


def read_pgm(path) -> ImageBuffer:
    with open(path, "rb") as fh:
        return parse_pgm(fh.read())


def encode_pgm(buf: ImageBuffer, *, plain: bool = False) -> bytes:
    header = f"{'P2' if plain else 'P5'}\n{buf.cols} {buf.rows}\n{buf.maxval}\n".encode("ascii")
    if plain:
        lines = (" ".join(map(str, row)) for row in buf.samples.tolist())
        return header + "\n".join(lines).encode("ascii") + b"\n"
    return header + buf.samples.astype(_dtype_for(buf.maxval)).tobytes()


def write_pgm(path, buf: ImageBuffer, *, plain: bool = False) -> None:
    """Write ``buf`` as binary P5 (default) or plain-text P2 with ``plain=True``."""
    with open(path, "wb") as fh:
        fh.write(encode_pgm(buf, plain=plain))


def to_matrix(buf: ImageBuffer) -> np.ndarray:
    """Samples as float64, unscaled."""
    return buf.samples.astype(np.float64)


def from_matrix(m, depth: int = 8) -> ImageBuffer:
    """Quantise to ``depth`` bits: round half away from zero, then clamp to [0, max]."""
    if depth not in DEPTH_MAX:
        raise RangeError(f"depth must be 8 or 16, got {depth}")
    m = as_matrix(m)
    top = DEPTH_MAX[depth]
    rounded = np.sign(m) * np.floor(np.abs(m) + 0.5)
    samples = np.clip(rounded, 0, top).astype(np.uint8 if depth == 8 else np.uint16)
    return ImageBuffer(samples=samples, maxval=top)


def to_mask(buf: ImageBuffer) -> np.ndarray:
    """Binary mask: a pixel is positive when it exceeds half of maxval (127 for 8-bit)."""
    return buf.samples > buf.maxval // 2


def write_raw(path, m) -> None:
    """Self-describing float64 dump: magic, rows, cols (uint32 LE), row-major LE doubles."""
    m = as_matrix(m)
    rows, cols = m.shape
    with open(path, "wb") as fh:
        fh.write(_RAW_HEADER.pack(RAW_MAGIC, rows, cols))
        fh.write(m.astype("<f8").tobytes())


def read_raw(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _RAW_HEADER.size:
        raise FormatError("truncated raw header", len(data))
    magic, rows, cols = _RAW_HEADER.unpack_from(data)
    if magic != RAW_MAGIC:
        raise FormatError(f"bad raw magic {magic!r}", 0)
    need = rows * cols * 8
    have = len(data) - _RAW_HEADER.size
    if have != need:
        raise FormatError(f"raw payload holds {have} bytes, {rows}x{cols} needs {need}", len(data))
    return np.frombuffer(data, dtype="<f8", offset=_RAW_HEADER.size).reshape(rows, cols).astype(np.float64)


@dataclass(frozen=True)
class ManifestEntry:
    identifier: str
    image_path: Path
    mask_path: Path


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def load_manifest(path, *, check_files: bool = True) -> DatasetManifest:
    """Read ``identifier, image path, mask path`` records, one per line.

    Blank lines and ``#`` comments are skipped.  Relative paths resolve against
    the manifest's directory.  With ``check_files`` every referenced file must
    exist.
    """
    path = Path(path)
    base = path.parent
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc.strerror}") from exc
    seen: dict[str, int] = {}
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 3 or not all(fields):
            raise ManifestError(f"expected 'identifier, image path, mask path', got {raw.strip()!r}", lineno)
        ident, image, mask = fields
        if ident in seen:
            raise ManifestError(f"duplicate identifier {ident!r} (first seen on line {seen[ident]})", lineno)
        seen[ident] = lineno
        entry = ManifestEntry(ident, base / image, base / mask)
        if check_files:
            for p in (entry.image_path, entry.mask_path):
                if not p.is_file():
                    raise ManifestError(f"referenced file does not exist: {p}", lineno)
        entries.append(entry)
    return DatasetManifest(tuple(entries))


def write_manifest(path, entries) -> None:
    """Write ``(identifier, image path, mask path)`` triples, paths relative to the manifest when possible."""
    path = Path(path)
    lines = ["# identifier, image, mask"]
    for ident, image, mask in entries:
        rel = [os.path.relpath(p, path.parent) for p in (image, mask)]
        lines.append(f"{ident}, {rel[0]}, {rel[1]}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
