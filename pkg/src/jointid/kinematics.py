"""Pose trajectories to per-joint relative motion in the joint base frame."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import core_math as cm
from . import signals

TIME_TOL = 1e-9


class KinematicsError(ValueError):
    pass


@dataclass(frozen=True)
class PoseSample:
    t: float
    p: np.ndarray
    q: np.ndarray


@dataclass
class BodyTrajectory:
    """Uniformly sampled world poses of one rigid body.

    ``p`` is the tracked point (body origin for simulator output, origin
    marker for marker-derived frames), ``q`` is world-from-body.
    """

    body_id: str
    t: np.ndarray
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.p = np.asarray(self.p, dtype=float).reshape(-1, 3)
        self.q = np.asarray(self.q, dtype=float).reshape(-1, 4)
        if not (len(self.t) == len(self.p) == len(self.q)):
            raise KinematicsError(f"{self.body_id}: t, p, q lengths differ")
        if len(self.t) > 1:
            dt = np.diff(self.t)
            if np.any(dt <= 0):
                raise KinematicsError(f"{self.body_id}: timestamps not strictly increasing")
            if np.max(np.abs(dt - dt.mean())) > TIME_TOL * max(1.0, abs(self.t[-1])):
                raise KinematicsError(f"{self.body_id}: non-uniform sample interval")
        n = np.linalg.norm(self.q, axis=1)
        if np.any(n == 0):
            raise cm.DegenerateQuaternion("degenerate quaternion")
        self.q = self.q / n[:, None]

    def __len__(self) -> int:
        return len(self.t)

    @property
    def sample_rate(self) -> float:
        if len(self.t) < 2:
            raise KinematicsError(f"{self.body_id}: sample rate undefined for < 2 samples")
        return 1.0 / float(np.mean(np.diff(self.t)))

    @property
    def R(self) -> np.ndarray:
        return cm.quat_to_rotmat(self.q)

    def samples(self) -> list[PoseSample]:
        return [PoseSample(float(t), p, q) for t, p, q in zip(self.t, self.p, self.q)]

    @classmethod
    def static(cls, body_id: str, t, p=(0.0, 0.0, 0.0), q=(1.0, 0.0, 0.0, 0.0)) -> "BodyTrajectory":
        t = np.asarray(t, dtype=float)
        return cls(body_id, t, np.tile(p, (len(t), 1)), np.tile(q, (len(t), 1)))


@dataclass(frozen=True)
class MarkerFrameSpec:
    """Three markers defining a body frame.

    ``origin`` sits at the frame origin, ``x_axis`` along +x and ``plane``
    anywhere in the x-y half-plane with y > 0. ``positions`` holds the body
    coordinates of the three markers (used to synthesize marker data).
    """

    origin: str
    x_axis: str
    plane: str
    positions: tuple = ()

    @property
    def ids(self) -> tuple[str, str, str]:
        return (self.origin, self.x_axis, self.plane)


@dataclass(frozen=True)
class JointGeometry:
    """Lever arms of one joint.

    ``r1``/``r2`` are the CoM-to-head and CoM-to-tail joint offsets of the
    current link (body frame). ``r1_alg`` is the joint position relative to
    the base tracking point (base frame) and ``r2_alg`` the follower tracking
    point relative to the joint (follower frame), so that with no deformation
    ``x_base - x_follower = -R1 r1_alg - R2 r2_alg``.
    """

    r1: np.ndarray = field(default_factory=lambda: np.zeros(3))
    r2: np.ndarray = field(default_factory=lambda: np.zeros(3))
    r1_alg: np.ndarray = field(default_factory=lambda: np.zeros(3))
    r2_alg: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name in ("r1", "r2", "r1_alg", "r2_alg"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(3)
            if not np.all(np.isfinite(v)) or np.linalg.norm(v) >= 10.0:
                raise KinematicsError(f"{name} must be finite and shorter than 10 m")
            object.__setattr__(self, name, v)


@dataclass
class JointStateSeries:
    """Relative motion of a follower link with respect to its base link.

    All channels are expressed in the base frame: ``delta`` (m), ``vel``
    (m/s), ``theta`` per-axis Z-Y-X angles ordered (x, y, z) (rad) and
    ``theta_rate`` the relative angular velocity (rad/s).
    """

    t: np.ndarray
    delta: np.ndarray
    vel: np.ndarray
    theta: np.ndarray
    theta_rate: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        n = len(self.t)
        for name in ("delta", "vel", "theta", "theta_rate"):
            a = np.asarray(getattr(self, name), dtype=float).reshape(n, 3)
            setattr(self, name, a)
        self.valid = np.asarray(self.valid, dtype=bool).reshape(n)

    def __len__(self) -> int:
        return len(self.t)

    def subset(self, idx) -> "JointStateSeries":
        return JointStateSeries(
            self.t[idx], self.delta[idx], self.vel[idx], self.theta[idx], self.theta_rate[idx], self.valid[idx]
        )

    def as_array(self) -> np.ndarray:
        return np.hstack([self.delta, self.vel, self.theta, self.theta_rate])


@dataclass
class LinkMotionSeries:
    """World rotation, angular velocity and angular acceleration of a link."""

    t: np.ndarray
    q: np.ndarray
    omega: np.ndarray
    alpha: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        n = len(self.t)
        self.q = np.asarray(self.q, dtype=float).reshape(n, 4)
        self.omega = np.asarray(self.omega, dtype=float).reshape(n, 3)
        self.alpha = np.asarray(self.alpha, dtype=float).reshape(n, 3)
        self.valid = np.asarray(self.valid, dtype=bool).reshape(n)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def R(self) -> np.ndarray:
        return cm.quat_to_rotmat(self.q)

    def subset(self, idx) -> "LinkMotionSeries":
        return LinkMotionSeries(self.t[idx], self.q[idx], self.omega[idx], self.alpha[idx], self.valid[idx])


@dataclass(frozen=True)
class FilterConfig:
    """Processing parameters; ``cutoff=None`` disables the low-pass stage."""

    cutoff: float | None = None
    window: int = signals.DEFAULT_WINDOW
    degree: int = signals.DEFAULT_DEGREE
    edge_trim: int | None = None
    euler_rates: bool = False

    def trim(self) -> int:
        return self.window // 2 if self.edge_trim is None else self.edge_trim


def frame_from_markers(markers, spec: MarkerFrameSpec | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Body frame ``(p, R)`` from three marker positions ordered
    (origin, x-axis, plane)."""
    m = np.asarray(markers, dtype=float).reshape(3, 3)
    o, xm, pm = m
    ex = xm - o
    ep = pm - o
    n = np.cross(ex, ep)
    if 0.5 * np.linalg.norm(n) <= 1e-8:
        raise KinematicsError("degenerate marker set")
    x = ex / np.linalg.norm(ex)
    z = n / np.linalg.norm(n)
    y = np.cross(z, x)
    R = cm.nearest_orthonormal(np.column_stack([x, y, z]))
    return o.copy(), R


def frames_from_marker_series(markers) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`frame_from_markers` over ``(N, 3, 3)`` marker arrays."""
    m = np.asarray(markers, dtype=float)
    o, xm, pm = m[:, 0], m[:, 1], m[:, 2]
    ex = xm - o
    n = np.cross(ex, pm - o)
    area = 0.5 * np.linalg.norm(n, axis=1)
    if np.any(area <= 1e-8):
        raise KinematicsError(f"degenerate marker set at sample {int(np.argmax(area <= 1e-8))}")
    x = ex / np.linalg.norm(ex, axis=1, keepdims=True)
    z = n / np.linalg.norm(n, axis=1, keepdims=True)
    y = np.cross(z, x)
    M = np.stack([x, y, z], axis=-1)
    U, _, Vt = np.linalg.svd(M)
    d = np.sign(np.linalg.det(U @ Vt))
    U[:, :, 2] *= d[:, None]
    return o.copy(), U @ Vt


def relative_rotation(R1, R2) -> np.ndarray:
    R1 = np.asarray(R1, dtype=float)
    return np.swapaxes(R1, -1, -2) @ np.asarray(R2, dtype=float)


def relative_translation(x1, x2, R1, R2, r1_alg, r2_alg) -> np.ndarray:
    """Joint translation in the base frame from two tracking points."""
    R1 = np.asarray(R1, dtype=float)
    R2 = np.asarray(R2, dtype=float)
    X = np.asarray(x1, dtype=float) - np.asarray(x2, dtype=float)
    X_img = -(R1 @ np.asarray(r1_alg, dtype=float)) - (R2 @ np.asarray(r2_alg, dtype=float))
    X_rel = X_img - X
    return (np.swapaxes(R1, -1, -2) @ X_rel[..., None])[..., 0]


def _check_aligned(a: BodyTrajectory, b: BodyTrajectory):
    if len(a) != len(b) or np.max(np.abs(a.t - b.t), initial=0.0) > TIME_TOL:
        raise KinematicsError("unaligned trajectories")


def _filtered(x, rate, cutoff):
    if cutoff is None or len(x) < 16:
        return np.asarray(x, dtype=float)
    return signals.lowpass_array(x, rate, cutoff)


def quaternion_rates(q, rate: float, cfg: FilterConfig):
    """Filter a quaternion series component-wise, renormalize, differentiate.

    Returns ``(q_filtered, omega, alpha)`` with the rates in the parent frame
    of ``q``.
    """
    q = cm.make_continuous(q)
    qf = _filtered(q, rate, cfg.cutoff)
    qf = qf / np.linalg.norm(qf, axis=1, keepdims=True)
    _, qd, qdd = signals.local_polyfit(qf, 1.0 / rate, cfg.window, cfg.degree)
    omega = cm.angular_velocity_from_quat(qf, qd).vector
    alpha = cm.angular_acceleration_from_quat(qf, qd, qdd).vector
    return qf, omega, alpha


def joint_state_series(
    traj_base: BodyTrajectory,
    traj_follower: BodyTrajectory,
    geom: JointGeometry,
    cfg: FilterConfig = FilterConfig(),
) -> JointStateSeries:
    _check_aligned(traj_base, traj_follower)
    rate = traj_base.sample_rate
    R1, R2 = traj_base.R, traj_follower.R
    delta_raw = relative_translation(traj_base.p, traj_follower.p, R1, R2, geom.r1_alg, geom.r2_alg)
    q_rel = cm.rotmat_to_quat(relative_rotation(R1, R2))
    delta = _filtered(delta_raw, rate, cfg.cutoff)
    _, vel, _ = signals.local_polyfit(delta, 1.0 / rate, cfg.window, cfg.degree)
    qf, omega_rel, _ = quaternion_rates(q_rel, rate, cfg)
    theta = cm.joint_angles(cm.quat_to_rotmat(qf))
    if cfg.euler_rates:
        _, omega_rel, _ = signals.local_polyfit(np.unwrap(theta, axis=0), 1.0 / rate, cfg.window, cfg.degree)
    valid = signals.edge_mask(len(traj_base), cfg.trim())
    return JointStateSeries(traj_base.t, delta, vel, theta, omega_rel, valid)


def link_motion_series(traj: BodyTrajectory, cfg: FilterConfig = FilterConfig()) -> LinkMotionSeries:
    qf, omega, alpha = quaternion_rates(traj.q, traj.sample_rate, cfg)
    return LinkMotionSeries(traj.t, qf, omega, alpha, signals.edge_mask(len(traj), cfg.trim()))


def trajectories_from_markers(
    t, markers: dict[str, np.ndarray], specs: Sequence[tuple[str, MarkerFrameSpec]]
) -> list[BodyTrajectory]:
    """Build one trajectory per body from named marker tracks of shape (N, 3)."""
    out = []
    for body_id, spec in specs:
        try:
            m = np.stack([markers[mid] for mid in spec.ids], axis=1)
        except KeyError as e:
            raise KinematicsError(f"marker {e.args[0]!r} missing for body {body_id}") from None
        p, R = frames_from_marker_series(m)
        out.append(BodyTrajectory(body_id, t, p, cm.make_continuous(cm.rotmat_to_quat(R))))
    return out
