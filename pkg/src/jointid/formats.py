"""CSV readers and writers with fixed headers.

Floats are written as the shortest decimal that round-trips a 64-bit value,
so identical inputs give byte-identical files. Writes go to a temporary file
in the target directory and are renamed into place.
"""

from __future__ import annotations

import csv
import hashlib
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dynamics import COEFF_NAMES, JointCoefficients
from .kinematics import BodyTrajectory, JointStateSeries, LinkMotionSeries, MarkerFrameSpec

POSE_HEADER = ("t", "px", "py", "pz", "qw", "qx", "qy", "qz")
JOINT_HEADER = ("t", "dx", "dy", "dz", "vx", "vy", "vz", "thx", "thy", "thz", "wx", "wy", "wz", "valid")
LINK_HEADER = ("t", "qw", "qx", "qy", "qz", "wx", "wy", "wz", "ax", "ay", "az", "valid")
WRENCH_HEADER = ("t", "fx", "fy", "fz", "tx", "ty", "tz")
COEFF_HEADER = ("joint",) + COEFF_NAMES
BIAS_HEADER = ("bfx", "bfy", "bfz")


class FormatError(ValueError):
    pass


def fmt(x) -> str:
    """Shortest round-trip text for a float (integers stay integral)."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_table(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    lines += [",".join(v if isinstance(v, str) else fmt(v) for v in row) for row in rows]
    atomic_write(path, "\n".join(lines) + "\n")


def read_table(path, expected: Sequence[str] | None = None) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from None
    if not rows:
        raise FormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if expected is not None and tuple(header) != tuple(expected):
        raise FormatError(f"{path}: header {','.join(header)!r} does not match {','.join(expected)!r}")
    body = rows[1:]
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise FormatError(f"{path}:{i}: expected {len(header)} fields, found {len(r)}")
    return header, body


def _numeric(path, body, start: int = 0) -> np.ndarray:
    try:
        arr = np.array([[float(v) for v in r[start:]] for r in body], dtype=float)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    if arr.size and not np.all(np.isfinite(arr)):
        raise FormatError(f"{path}: non-finite value")
    return arr


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# -- poses ---------------------------------------------------------------------


def write_pose(path, traj: BodyTrajectory) -> None:
    write_table(path, POSE_HEADER, np.column_stack([traj.t, traj.p, traj.q]).tolist())


def read_pose(path, body_id: str | None = None) -> BodyTrajectory:
    _, body = read_table(path, POSE_HEADER)
    a = _numeric(path, body).reshape(-1, len(POSE_HEADER))
    if len(a) == 0:
        raise FormatError(f"{path}: no samples")
    return BodyTrajectory(body_id or Path(path).stem, a[:, 0], a[:, 1:4], a[:, 4:8])


# -- markers -------------------------------------------------------------------


def marker_header(ids: Sequence[str]) -> tuple[str, ...]:
    return ("t",) + tuple(f"{m}_{ax}" for m in ids for ax in "xyz")


def write_markers(path, t, markers: dict[str, np.ndarray]) -> None:
    ids = list(markers)
    cols = [np.asarray(t)[:, None]] + [np.asarray(markers[m]) for m in ids]
    write_table(path, marker_header(ids), np.hstack(cols).tolist())


def read_markers(path) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    header, body = read_table(path)
    if not header or header[0] != "t" or (len(header) - 1) % 3:
        raise FormatError(f"{path}: marker header must be t followed by <id>_x,<id>_y,<id>_z triples")
    a = _numeric(path, body).reshape(-1, len(header))
    out = {}
    for k in range(1, len(header), 3):
        names = header[k : k + 3]
        mid = names[0][:-2]
        if names != [f"{mid}_x", f"{mid}_y", f"{mid}_z"]:
            raise FormatError(f"{path}: malformed marker columns {names}")
        out[mid] = a[:, k : k + 3]
    return a[:, 0], out


def marker_ids(specs: Sequence[tuple[str, MarkerFrameSpec]]) -> list[str]:
    return [m for _, s in specs for m in s.ids]


# -- joint states and link motion ---------------------------------------------


def write_joint_state(path, s: JointStateSeries) -> None:
    a = np.column_stack([s.t, s.delta, s.vel, s.theta, s.theta_rate])
    rows = [list(r) + [bool(v)] for r, v in zip(a.tolist(), s.valid)]
    write_table(path, JOINT_HEADER, rows)


def _valid_column(path, col) -> np.ndarray:
    if not np.all(np.isin(col, (0.0, 1.0))):
        raise FormatError(f"{path}: valid column must be 0 or 1")
    return col.astype(bool)


def read_joint_state(path) -> JointStateSeries:
    _, body = read_table(path, JOINT_HEADER)
    a = _numeric(path, body).reshape(-1, len(JOINT_HEADER))
    return JointStateSeries(a[:, 0], a[:, 1:4], a[:, 4:7], a[:, 7:10], a[:, 10:13], _valid_column(path, a[:, 13]))


def write_link_motion(path, m: LinkMotionSeries) -> None:
    a = np.column_stack([m.t, m.q, m.omega, m.alpha])
    write_table(path, LINK_HEADER, [list(r) + [bool(v)] for r, v in zip(a.tolist(), m.valid)])


def read_link_motion(path) -> LinkMotionSeries:
    _, body = read_table(path, LINK_HEADER)
    a = _numeric(path, body).reshape(-1, len(LINK_HEADER))
    return LinkMotionSeries(a[:, 0], a[:, 1:5], a[:, 5:8], a[:, 8:11], _valid_column(path, a[:, 11]))


def write_wrench(path, t, force, torque) -> None:
    write_table(path, WRENCH_HEADER, np.column_stack([t, force, torque]).tolist())


# -- coefficients --------------------------------------------------------------


def write_coefficients(path, names: Sequence[str], coeffs: Sequence[JointCoefficients], bias=None) -> None:
    header = COEFF_HEADER + (BIAS_HEADER if bias is not None else ())
    rows = []
    for j, (name, c) in enumerate(zip(names, coeffs, strict=True)):
        row = [name] + c.as_vector().tolist()
        if bias is not None:
            row += np.asarray(bias[j], dtype=float).tolist()
        rows.append(row)
    write_table(path, header, rows)


def read_coefficients(path) -> tuple[list[str], list[JointCoefficients], np.ndarray | None]:
    header, body = read_table(path)
    has_bias = tuple(header) == COEFF_HEADER + BIAS_HEADER
    if tuple(header) != COEFF_HEADER and not has_bias:
        raise FormatError(f"{path}: unexpected coefficient header {','.join(header)!r}")
    if not body:
        raise FormatError(f"{path}: no joints")
    names = [r[0] for r in body]
    a = _numeric(path, body, start=1)
    coeffs = [JointCoefficients.from_vector(r[:12]) for r in a]
    return names, coeffs, (a[:, 12:15] if has_bias else None)
