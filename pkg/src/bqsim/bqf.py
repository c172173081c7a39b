"""BQF1 binary container for spectral coefficient arrays.

Layout: 4-byte magic ``BQF1``; little-endian u32 rank, n1, n2, n3; f64
box length; then rank*n1*n2*n3 complex coefficients as interleaved f64
(re, im) pairs, row-major with the first axis slowest, component-major
for vector ranks.  The single box-length word restricts the container
to cubic boxes.

Mode and stream states ride in the same container with a JSON sidecar
(same path, ``.json`` suffix) naming the channels and carrying scalar
metadata such as sigma, time, and the limit tag.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .euler2d import StreamState
from .field import SpectralField
from .grid import SpectralGrid, make_grid
from .modes import ModeState

__all__ = [
    "write_field",
    "read_field",
    "write_mode_state",
    "read_mode_state",
    "write_stream_state",
    "read_stream_state",
]

MAGIC = b"BQF1"
_HEADER = struct.Struct("<IIIId")

_FIBER_NOTE = "k_h=0 slots of (psi, a, b) hold the frozen (w1, w2, T) fiber channels"


def _check_cubic(grid: SpectralGrid) -> float:
    lx, ly, lz = grid.lengths
    if not (lx == ly == lz):
        raise ValueError("BQF1 stores a single box length; grid must be cubic")
    return float(lx)


def _write_array(path: Path, grid: SpectralGrid, coeffs: np.ndarray) -> None:
    box = _check_cubic(grid)
    rank = 1 if coeffs.ndim == 3 else coeffs.shape[0]
    data = np.ascontiguousarray(coeffs, dtype="<c16")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(_HEADER.pack(rank, *grid.shape, box))
        f.write(data.tobytes(order="C"))


def _read_array(path: Path):
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ValueError(f"{path}: not a BQF1 file")
    rank, n1, n2, n3, box = _HEADER.unpack_from(raw, 4)
    count = rank * n1 * n2 * n3
    start = 4 + _HEADER.size
    expect = start + 16 * count
    if len(raw) != expect:
        raise ValueError(f"{path}: expected {expect} bytes, found {len(raw)}")
    flat = np.frombuffer(raw, dtype="<c16", count=count, offset=start)
    coeffs = flat.astype(np.complex128)
    shape = (n1, n2, n3) if rank == 1 else (rank, n1, n2, n3)
    return make_grid(n1, n2, n3, box_length=box), coeffs.reshape(shape)


def write_field(path, field: SpectralField) -> None:
    _write_array(Path(path), field.grid, field.coeffs)


def read_field(path) -> SpectralField:
    grid, coeffs = _read_array(Path(path))
    return SpectralField(grid, coeffs)


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")


def _write_sidecar(path: Path, meta: dict) -> None:
    _sidecar(path).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def write_mode_state(path, m: ModeState, extra: dict | None = None) -> None:
    path = Path(path)
    _write_array(path, m.grid, np.stack([m.psi, m.a, m.b]))
    meta = {
        "kind": "mode_state",
        "channels": ["psi", "a", "b"],
        "sigma": m.sigma,
        "fiber": _FIBER_NOTE,
        "limit": False,
    }
    if extra:
        meta.update(extra)
    _write_sidecar(path, meta)


def read_mode_state(path) -> ModeState:
    path = Path(path)
    grid, coeffs = _read_array(path)
    meta = json.loads(_sidecar(path).read_text())
    if meta.get("kind") != "mode_state" or coeffs.ndim != 4 or coeffs.shape[0] != 3:
        raise ValueError(f"{path}: not a mode-state container")
    return ModeState(grid, float(meta["sigma"]), coeffs[0], coeffs[1], coeffs[2])


def write_stream_state(path, s: StreamState, extra: dict | None = None) -> None:
    path = Path(path)
    _write_array(path, s.grid, s.psi_hat)
    meta = {"kind": "stream_state", "time": s.time, "limit": True}
    if extra:
        meta.update(extra)
    _write_sidecar(path, meta)


def read_stream_state(path) -> StreamState:
    path = Path(path)
    grid, coeffs = _read_array(path)
    meta = json.loads(_sidecar(path).read_text())
    if meta.get("kind") != "stream_state" or coeffs.ndim != 3:
        raise ValueError(f"{path}: not a stream-state container")
    return StreamState(grid, coeffs, float(meta.get("time", 0.0)))
