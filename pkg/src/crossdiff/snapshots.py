"""Binary state snapshots (.xdif).

Layout, all little-endian:

    offset  size  field
    0       4     magic "XDIF"
    4       2     format version (u16, currently 1)
    6       2     dim (u16)
    8       4     n per axis (u32)
    12      40    five float64: half_width, t, chi, xi, epsilon
    52      12    reserved padding (zero)
    64      -     u values, float64, row-major, n^dim entries
    ...     -     v values, float64, row-major, n^dim entries

Round trips are bit-exact.
"""

from __future__ import annotations

import struct

import numpy as np

from .grid import Field, make_grid
from .dynamics import SimParams, State

MAGIC = b"XDIF"
VERSION = 1
HEADER_SIZE = 64
_HEADER_FMT = "<4sHHI5d"


class SnapshotFormatError(ValueError):
    """The file is not a valid snapshot."""


def snapshot_save(state: State, path, params: SimParams | None = None) -> None:
    """Write the state (and, when given, the physics coefficients) to path."""
    g = state.grid
    chi = params.chi if params is not None else 0.0
    xi = params.xi if params is not None else 0.0
    eps = params.epsilon if params is not None else 0.0
    header = struct.pack(
        _HEADER_FMT, MAGIC, VERSION, g.dim, g.n, g.half_width, state.t, chi, xi, eps
    )
    header += b"\x00" * (HEADER_SIZE - len(header))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(state.u.values, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(state.v.values, dtype="<f8").tobytes())


def snapshot_header(path) -> dict:
    """Parse and validate the 64-byte header."""
    with open(path, "rb") as fh:
        raw = fh.read(HEADER_SIZE)
    if len(raw) < HEADER_SIZE:
        raise SnapshotFormatError(f"file too short for a snapshot header: {path}")
    magic, version, dim, n, half_width, t, chi, xi, eps = struct.unpack(
        _HEADER_FMT, raw[: struct.calcsize(_HEADER_FMT)]
    )
    if magic != MAGIC:
        raise SnapshotFormatError(f"bad magic {magic!r}; not a snapshot file")
    if version != VERSION:
        raise SnapshotFormatError(
            f"unsupported snapshot version {version} (this build reads version {VERSION})"
        )
    return {
        "dim": dim,
        "n": n,
        "half_width": half_width,
        "t": t,
        "chi": chi,
        "xi": xi,
        "epsilon": eps,
    }


def snapshot_load(path) -> State:
    """Read a snapshot back into a State; bit-identical to what was saved."""
    meta = snapshot_header(path)
    grid = make_grid(meta["dim"], meta["half_width"], meta["n"])
    count = grid.size
    with open(path, "rb") as fh:
        fh.seek(HEADER_SIZE)
        body = fh.read()
    expected = 2 * count * 8
    if len(body) != expected:
        raise SnapshotFormatError(
            f"size mismatch: expected {expected} data bytes for two {grid.shape} fields, "
            f"got {len(body)}"
        )
    u = np.frombuffer(body[: count * 8], dtype="<f8").reshape(grid.shape)
    v = np.frombuffer(body[count * 8 :], dtype="<f8").reshape(grid.shape)
    return State(Field(grid, u.copy()), Field(grid, v.copy()), meta["t"])
