"""Strict NPY 1.0 array files for pipeline interchange.

Only version 1.0 containers with little-endian float32 ('<f4'), uint8
('|u1') or bool ('|b1') payloads in C order are accepted, so files produced
by any scientific stack can be dropped in while malformed ones fail loudly.
Writes are byte-stable: identical arrays give identical files.
"""

from __future__ import annotations

import ast
import struct
from pathlib import Path

import numpy as np

from .edges import EdgeMap
from .errors import (
    BadHeaderError,
    BadRankError,
    DtypeMismatchError,
    IoError,
    OutOfRangeError,
)
from .grid import (
    GridShape,
    LabelVolume,
    ProbVolume,
    ScalarField,
    validate_prob,
)

_MAGIC = b"\x93NUMPY"

#: dtype tag expected for each content kind
KIND_DESCR = {
    "prob": "<f4",
    "image": "<f4",
    "scalar": "<f4",
    "labels": "|u1",
    "edges": "|b1",
}

_KIND_RANKS = {
    "prob": (3, 4),  # class axis first
    "image": (2, 3),
    "scalar": (2, 3),
    "labels": (2, 3),
    "edges": (2,),
}


def _header_bytes(descr: str, shape: tuple[int, ...]) -> bytes:
    text = "{'descr': %r, 'fortran_order': False, 'shape': %r, }" % (
        descr,
        tuple(int(d) for d in shape),
    )
    tail = len(_MAGIC) + 4  # magic + version + 2-byte length
    pad = (64 - (tail + len(text) + 1) % 64) % 64
    header = (text + " " * pad + "\n").encode("latin1")
    return _MAGIC + b"\x01\x00" + struct.pack("<H", len(header)) + header


def _payload(volume) -> tuple[np.ndarray, str]:
    if isinstance(volume, ProbVolume):
        return volume.values, "<f4"
    if isinstance(volume, LabelVolume):
        return volume.values, "|u1"
    if isinstance(volume, ScalarField):
        return volume.values.astype("<f4"), "<f4"
    if isinstance(volume, EdgeMap):
        return volume.values, "|b1"
    a = np.asarray(volume)
    if a.dtype == np.uint8:
        return a, "|u1"
    if a.dtype == bool:
        return a, "|b1"
    return a.astype("<f4"), "<f4"


def write_array(volume, path) -> None:
    """Write a volume or raw array as NPY 1.0, little-endian, C order."""
    arr, descr = _payload(volume)
    arr = np.ascontiguousarray(arr.astype(descr, copy=False))
    try:
        with open(path, "wb") as fh:
            fh.write(_header_bytes(descr, arr.shape))
            fh.write(arr.tobytes(order="C"))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _parse_header(buf: bytes, path) -> tuple[str, tuple[int, ...], int]:
    if len(buf) < 10:
        raise IoError(f"{path}: truncated file")
    if buf[:6] != _MAGIC:
        raise BadHeaderError(f"{path}: not an NPY file")
    if buf[6:8] != b"\x01\x00":
        raise BadHeaderError(
            f"{path}: unsupported NPY version {buf[6]}.{buf[7]} (need 1.0)"
        )
    (hlen,) = struct.unpack("<H", buf[8:10])
    if len(buf) < 10 + hlen:
        raise IoError(f"{path}: truncated header")
    try:
        header = ast.literal_eval(buf[10 : 10 + hlen].decode("latin1"))
    except (ValueError, SyntaxError) as exc:
        raise BadHeaderError(f"{path}: unparseable header") from exc
    if not isinstance(header, dict) or set(header) != {
        "descr",
        "fortran_order",
        "shape",
    }:
        raise BadHeaderError(f"{path}: malformed header fields")
    if header["fortran_order"] is not False:
        raise BadHeaderError(f"{path}: Fortran-order arrays are not supported")
    shape = header["shape"]
    if not isinstance(shape, tuple) or not all(
        isinstance(d, int) and d >= 0 for d in shape
    ):
        raise BadHeaderError(f"{path}: bad shape {shape!r}")
    return str(header["descr"]), shape, 10 + hlen


def read_array(
    path,
    kind: str,
    classes: int | None = None,
    tolerance: float = 1e-4,
    spacing: tuple[float, ...] = (),
):
    """Read and validate an NPY file as the given content kind.

    kind 'prob' returns a ProbVolume, 'labels' a LabelVolume (class count
    inferred from the maximum label unless given), 'image' a float64 array
    in [0, 1], 'edges' an EdgeMap and 'scalar' a ScalarField.
    """
    if kind not in KIND_DESCR:
        raise ValueError(f"unknown content kind {kind!r}")
    path = Path(path)
    try:
        buf = path.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc

    descr, shape, offset = _parse_header(buf, path)
    expected = KIND_DESCR[kind]
    if descr != expected:
        raise DtypeMismatchError(
            f"{path}: dtype {descr!r} but kind {kind!r} requires {expected!r}"
        )
    if len(shape) not in _KIND_RANKS[kind]:
        raise BadRankError(
            f"{path}: rank {len(shape)} invalid for kind {kind!r} "
            f"(allowed: {_KIND_RANKS[kind]})"
        )
    dtype = np.dtype(expected)
    count = int(np.prod(shape, dtype=np.int64))
    if len(buf) - offset != count * dtype.itemsize:
        raise IoError(
            f"{path}: payload is {len(buf) - offset} bytes, "
            f"expected {count * dtype.itemsize}"
        )
    arr = np.frombuffer(buf, dtype=dtype, count=count, offset=offset).reshape(shape)
    arr = np.array(arr)  # own, writable copy

    if kind == "prob":
        return validate_prob(arr, tolerance=tolerance, spacing=spacing)
    if kind == "labels":
        n_classes = classes if classes is not None else max(2, int(arr.max()) + 1)
        return LabelVolume(arr, n_classes, GridShape(arr.shape, spacing))
    if kind == "edges":
        return EdgeMap(arr, GridShape(arr.shape, spacing))
    if kind == "scalar":
        return ScalarField(arr.astype(np.float64), GridShape(arr.shape, spacing))
    img = arr.astype(np.float64)
    if not np.isfinite(img).all():
        raise OutOfRangeError(f"{path}: image intensities must be finite")
    if img.size and (img.min() < 0.0 or img.max() > 1.0):
        raise OutOfRangeError(f"{path}: image intensities must lie in [0, 1]")
    return img
