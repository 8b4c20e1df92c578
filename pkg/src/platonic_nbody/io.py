"""Trajectory files.

CSV rows are ``t,particle,x,y,z`` for every sample and particle, with
floats written to 17 significant digits so that doubles survive a round
trip.  JSON holds the generating samples plus run metadata.
"""

from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .loops import GeneratingLoop, expand_orbit, group_from_name

CSV_HEADER = ["t", "particle", "x", "y", "z"]


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


@dataclass
class Trajectory:
    t: np.ndarray  # (m,)
    positions: np.ndarray  # (N, m, 3)

    @property
    def n_particles(self) -> int:
        return self.positions.shape[0]

    @classmethod
    def from_loop(cls, loop: GeneratingLoop) -> "Trajectory":
        return cls(loop.times.copy(), expand_orbit(loop))

    def speeds(self, T: float) -> np.ndarray:
        """Speed of every particle on every grid interval, shape (N, m)."""
        h = T / len(self.t)
        d = np.roll(self.positions, -1, axis=1) - self.positions
        return np.linalg.norm(d, axis=2) / h


def trajectory_csv(traj: Trajectory) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    N, m, _ = traj.positions.shape
    for j in range(m):
        tj = _fmt(traj.t[j])
        for k in range(N):
            x, y, z = traj.positions[k, j]
            w.writerow([tj, k + 1, _fmt(x), _fmt(y), _fmt(z)])
    return buf.getvalue()


def write_trajectory_csv(traj: Trajectory, path) -> None:
    Path(path).write_text(trajectory_csv(traj))


def read_trajectory_csv(path) -> Trajectory:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != CSV_HEADER:
        raise ValueError(f"{path}: expected header {','.join(CSV_HEADER)}")
    body = rows[1:]
    parts = np.array([int(r[1]) for r in body])
    N = int(parts.max())
    if len(body) % N:
        raise ValueError(f"{path}: row count is not a multiple of the particle count")
    m = len(body) // N
    if not np.array_equal(parts, np.tile(np.arange(1, N + 1), m)):
        raise ValueError(f"{path}: rows must be ordered by sample, then particle 1..{N}")
    t = np.array([float(body[j * N][0]) for j in range(m)])
    pos = np.array([[float(v) for v in r[2:5]] for r in body]).reshape(m, N, 3)
    return Trajectory(t, pos.transpose(1, 0, 2).copy())


# --- JSON ---------------------------------------------------------------------


def loop_to_dict(loop: GeneratingLoop, extra: dict | None = None) -> dict:
    meta = {k: v for k, v in loop.meta.items() if _jsonable(v)}
    d = {
        "group": loop.group.kind,
        "polyhedron": loop.group.polyhedron,
        "T": loop.T,
        "m": loop.m,
        "meta": meta,
        "x": loop.x.tolist(),
    }
    if extra:
        d.update(extra)
    return d


def loop_from_dict(d: dict) -> GeneratingLoop:
    for key in ("group", "T", "x"):
        if key not in d:
            raise ValueError(f"trajectory JSON lacks {key!r}")
    poly = d.get("polyhedron")
    group = group_from_name(d["group"], None if poly in (None, "none") else poly)
    return GeneratingLoop(float(d["T"]), np.array(d["x"], dtype=float), group, dict(d.get("meta", {})))


def _jsonable(v) -> bool:
    try:
        json.dumps(v)
        return True
    except TypeError:
        return False


def loop_json(loop: GeneratingLoop, extra: dict | None = None) -> str:
    return json.dumps(loop_to_dict(loop, extra), indent=1, sort_keys=True) + "\n"


def write_loop_json(loop: GeneratingLoop, path, extra: dict | None = None) -> None:
    Path(path).write_text(loop_json(loop, extra))


def read_loop_json(path) -> tuple[GeneratingLoop, dict]:
    d = json.loads(Path(path).read_text())
    return loop_from_dict(d), d


def export_trajectory(loop: GeneratingLoop, path, fmt: str | None = None, extra: dict | None = None) -> Path:
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".").lower()
    if fmt == "csv":
        write_trajectory_csv(Trajectory.from_loop(loop), path)
    elif fmt == "json":
        write_loop_json(loop, path, extra)
    else:
        raise ValueError(f"unknown trajectory format {fmt!r} (csv or json)")
    return path


def import_trajectory(path, fmt: str | None = None):
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".").lower()
    if fmt == "csv":
        return read_trajectory_csv(path)
    if fmt == "json":
        return read_loop_json(path)[0]
    raise ValueError(f"unknown trajectory format {fmt!r} (csv or json)")


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, sort_keys=True, default=_default) + "\n")


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
