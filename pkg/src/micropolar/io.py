"""Snapshot files and the energy CSV.

Snapshot layout (little-endian)::

    b"MPF1"          magic
    uint32           format version (1)
    3 x uint32       points per axis
    float64          box length
    float64          time
    uint32           flags (bit 0: pressure present)
    payload          u1 u2 u3 w1 w2 w3 [p], each n^3 float64, axis 1 fastest

Axis 1 fastest means the first grid index varies fastest, i.e. Fortran
order on our ``[i1, i2, i3]`` arrays.
"""
from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import GridSpec, ScalarField, VectorField
from .solver import State, Trajectory

MAGIC = b"MPF1"
VERSION = 1
FLAG_PRESSURE = 1
_HEADER = struct.Struct("<4sI3IddI")

CSV_COLUMNS = ("t", "energy_u", "energy_w", "grad_u", "grad_w", "div_w", "energy_balance_residual", "def11_slack")


class SnapshotError(ValueError):
    pass


@dataclass
class Snapshot:
    grid: GridSpec
    t: float
    u: np.ndarray  # (3, n, n, n)
    w: np.ndarray
    p: np.ndarray | None = None

    def state(self) -> State:
        p = None if self.p is None else ScalarField(self.grid, self.p)
        return State(VectorField(self.grid, self.u), VectorField(self.grid, self.w), self.t, p)


def encode_snapshot(snap: Snapshot) -> bytes:
    g = snap.grid
    flags = FLAG_PRESSURE if snap.p is not None else 0
    head = _HEADER.pack(MAGIC, VERSION, g.n, g.n, g.n, float(g.box_length), float(snap.t), flags)
    arrays = [snap.u[i] for i in range(3)] + [snap.w[i] for i in range(3)]
    if snap.p is not None:
        arrays.append(snap.p)
    body = b"".join(np.asarray(a, dtype="<f8").ravel(order="F").tobytes() for a in arrays)
    return head + body


def decode_snapshot(raw: bytes) -> Snapshot:
    if len(raw) < _HEADER.size:
        raise SnapshotError("file shorter than the snapshot header")
    magic, version, n1, n2, n3, L, t, flags = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise SnapshotError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    if not n1 == n2 == n3:
        raise SnapshotError(f"unequal axis sizes {(n1, n2, n3)}")
    grid = GridSpec(n1, L)
    count = 7 if flags & FLAG_PRESSURE else 6
    size = n1**3
    expected = _HEADER.size + count * size * 8
    if len(raw) != expected:
        raise SnapshotError(f"payload size {len(raw) - _HEADER.size} does not match {count} arrays of {size} doubles")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).astype(float)
    arrays = [data[i * size : (i + 1) * size].reshape(grid.shape, order="F") for i in range(count)]
    p = arrays[6] if count == 7 else None
    return Snapshot(grid, t, np.array(arrays[:3]), np.array(arrays[3:6]), p)


def write_snapshot(path, snap: Snapshot) -> None:
    Path(path).write_bytes(encode_snapshot(snap))


def read_snapshot(path) -> Snapshot:
    return decode_snapshot(Path(path).read_bytes())


def snapshot_name(k: int) -> str:
    return f"snap_{k:05d}.mpf"


def write_trajectory(directory, traj: Trajectory) -> list[Path]:
    """One snapshot per recorded slice, named by slice index."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    p = traj.p
    paths = []
    for k, t in enumerate(traj.times):
        path = directory / snapshot_name(k)
        write_snapshot(path, Snapshot(traj.grid, float(t), traj.u[k], traj.w[k], None if p is None else p[k]))
        paths.append(path)
    return paths


def read_trajectory(directory) -> Trajectory:
    """Load every ``*.mpf`` in a directory, ordered by time."""
    paths = sorted(Path(directory).glob("*.mpf"))
    if not paths:
        raise SnapshotError(f"no snapshots in {directory}")
    snaps = sorted((read_snapshot(p) for p in paths), key=lambda s: s.t)
    grid = snaps[0].grid
    if any(s.grid != grid for s in snaps):
        raise SnapshotError("snapshots disagree on the grid")
    has_p = all(s.p is not None for s in snaps)
    return Trajectory(
        grid,
        np.array([s.t for s in snaps]),
        np.array([s.u for s in snaps]),
        np.array([s.w for s in snaps]),
        np.array([s.p for s in snaps]) if has_p else None,
    )


def energy_rows(traj: Trajectory) -> np.ndarray:
    e = traj.energy
    if e is None:
        raise ValueError("trajectory carries no energy series")
    return np.column_stack([e.t, e.energy_u, e.energy_w, e.grad_u, e.grad_w, e.div_w, e.balance_residual(), e.def11_slack()])


def write_energy_csv(path, traj: Trajectory) -> None:
    rows = energy_rows(traj)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(CSV_COLUMNS)
        for row in rows:
            out.writerow(repr(float(v)) for v in row)


def read_energy_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {rows[0]}")
    data = np.array(rows[1:], dtype=float).reshape(-1, len(CSV_COLUMNS))
    return {name: data[:, i] for i, name in enumerate(CSV_COLUMNS)}
