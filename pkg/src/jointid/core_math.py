"""Rotation and quaternion kernel.

Conventions used throughout the package:

* quaternions are scalar-first ``[w, x, y, z]`` Hamilton quaternions;
* a quaternion describing a body maps body coordinates to world
  coordinates (``v_world = R(q) @ v_body``);
* Z-Y-X Euler angles are intrinsic: ``R = Rz(yaw) @ Ry(pitch) @ Rx(roll)``.

Every function accepts either a single value or a stack of values along the
leading axes (``(..., 4)`` quaternions, ``(..., 3, 3)`` matrices).
"""

from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np

GIMBAL_TOL = 1e-6


class DegenerateQuaternion(ValueError):
    pass


class DegenerateFrame(ValueError):
    pass


class EulerZYX(NamedTuple):
    yaw: float
    pitch: float
    roll: float
    gimbal_lock: bool = False


class AngularRate(NamedTuple):
    """Vector part of a quaternion-rate formula plus its scalar residual."""

    vector: np.ndarray
    residual: np.ndarray
    renormalized: bool = False


def normalize_quat(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(n == 0.0) or not np.all(np.isfinite(n)):
        raise DegenerateQuaternion("degenerate quaternion")
    return q / n


def quat_conj(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_mul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def quat_to_rotmat(q) -> np.ndarray:
    w, x, y, z = np.moveaxis(normalize_quat(q), -1, 0)
    return np.stack(
        [
            np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], axis=-1),
            np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], axis=-1),
            np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], axis=-1),
        ],
        axis=-2,
    )


def rotmat_to_quat(R) -> np.ndarray:
    """Convert rotation matrices to unit quaternions with ``w >= 0``.

    Uses the largest-diagonal branch (Shepperd) for numerical robustness.
    """
    R = np.asarray(R, dtype=float)
    flat = R.reshape(-1, 3, 3)
    out = np.empty((flat.shape[0], 4))
    for i, m in enumerate(flat):
        tr = m[0, 0] + m[1, 1] + m[2, 2]
        k = int(np.argmax([tr, m[0, 0], m[1, 1], m[2, 2]]))
        if k == 0:
            s = 2.0 * np.sqrt(1.0 + tr)
            q = [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
        elif k == 1:
            s = 2.0 * np.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2])
            q = [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]
        elif k == 2:
            s = 2.0 * np.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2])
            q = [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s]
        else:
            s = 2.0 * np.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1])
            q = [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s]
        q = np.asarray(q)
        out[i] = -q if q[0] < 0 else q
    out /= np.linalg.norm(out, axis=-1, keepdims=True)
    return out.reshape(R.shape[:-2] + (4,))


def make_continuous(q) -> np.ndarray:
    """Flip signs along a quaternion series so consecutive samples agree."""
    q = np.array(q, dtype=float)
    for i in range(1, len(q)):
        if np.dot(q[i], q[i - 1]) < 0.0:
            q[i] = -q[i]
    return q


def axis_angle_to_quat(axis, angle) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    angle = np.asarray(angle, dtype=float)[..., None]
    return np.concatenate([np.cos(angle / 2), np.sin(angle / 2) * axis], axis=-1)


def rotvec_to_rotmat(v) -> np.ndarray:
    """Rotation vector(s) ``(..., 3)`` to matrices ``(..., 3, 3)``."""
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v, axis=-1, keepdims=True)
    # sin(x/2)/x with its small-angle series near zero
    half = np.where(theta < 1e-8, 0.5 - theta**2 / 48.0, np.sin(0.5 * theta) / np.where(theta == 0, 1.0, theta))
    q = np.concatenate([np.cos(0.5 * theta), half * v], axis=-1)
    return quat_to_rotmat(q)


def skew(v) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def nearest_orthonormal(M) -> np.ndarray:
    """Closest proper rotation to ``M`` in the Frobenius norm.

    Polar factor from the SVD, ``U @ diag(1, 1, det(U V^T)) @ V^T``, so the
    result always has determinant +1.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (3, 3) or not np.all(np.isfinite(M)):
        raise DegenerateFrame("degenerate frame")
    U, s, Vt = np.linalg.svd(M)
    if s[-1] < 1e-12 * s[0] or s[0] == 0.0:
        raise DegenerateFrame("degenerate frame")
    d = np.sign(np.linalg.det(U @ Vt))
    return U @ np.diag([1.0, 1.0, d]) @ Vt


def _rate_normalize(q):
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(n == 0.0):
        raise DegenerateQuaternion("degenerate quaternion")
    renorm = bool(np.any(np.abs(n - 1.0) > 1e-9))
    if renorm:
        warnings.warn("non-unit quaternion normalized before rate evaluation", stacklevel=3)
    return q / n, renorm


def angular_velocity_from_quat(q, q_dot) -> AngularRate:
    """omega = 2 q_dot q*; world-frame when ``q`` is world-from-body."""
    q, renorm = _rate_normalize(q)
    w = 2.0 * quat_mul(q_dot, quat_conj(q))
    return AngularRate(w[..., 1:], w[..., 0], renorm)


def angular_acceleration_from_quat(q, q_dot, q_ddot) -> AngularRate:
    """alpha = 2 (q_ddot q* - (q_dot q*)^2)."""
    q, renorm = _rate_normalize(q)
    qc = quat_conj(q)
    p = quat_mul(q_dot, qc)
    a = 2.0 * (quat_mul(q_ddot, qc) - quat_mul(p, p))
    return AngularRate(a[..., 1:], a[..., 0], renorm)


def _wrap_pi(a):
    a = np.asarray(a, dtype=float)
    return np.where(a <= -np.pi, a + 2 * np.pi, a)


def euler_zyx_from_rotmat(R) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized intrinsic Z-Y-X decomposition: ``(yaw, pitch, roll, gimbal)``."""
    R = np.asarray(R, dtype=float)
    pitch = np.arctan2(-R[..., 2, 0], np.hypot(R[..., 0, 0], R[..., 1, 0]))
    gimbal = np.abs(np.abs(pitch) - np.pi / 2) < GIMBAL_TOL
    yaw = np.where(gimbal, np.arctan2(-R[..., 0, 1], R[..., 1, 1]), np.arctan2(R[..., 1, 0], R[..., 0, 0]))
    roll = np.where(gimbal, 0.0, np.arctan2(R[..., 2, 1], R[..., 2, 2]))
    return _wrap_pi(yaw), pitch, _wrap_pi(roll), gimbal


def quat_to_euler_zyx(q) -> EulerZYX:
    yaw, pitch, roll, gimbal = euler_zyx_from_rotmat(quat_to_rotmat(q))
    return EulerZYX(float(yaw), float(pitch), float(roll), bool(gimbal))


def euler_zyx_to_quat(yaw, pitch, roll) -> np.ndarray:
    qz = axis_angle_to_quat([0, 0, 1], yaw)
    qy = axis_angle_to_quat([0, 1, 0], pitch)
    qx = axis_angle_to_quat([1, 0, 0], roll)
    return quat_mul(quat_mul(qz, qy), qx)


def euler_zyx_to_rotmat(yaw, pitch, roll) -> np.ndarray:
    return quat_to_rotmat(euler_zyx_to_quat(yaw, pitch, roll))


def joint_angles(R) -> np.ndarray:
    """Per-axis joint angles ``(theta_x, theta_y, theta_z) = (roll, pitch, yaw)``."""
    yaw, pitch, roll, _ = euler_zyx_from_rotmat(R)
    return np.stack([roll, pitch, yaw], axis=-1)
