"""Shared oracles and generators for the test suite."""

import numpy as np
from scipy.spatial.transform import Rotation

from jointid import core_math as cm
from jointid import dynamics as dy


def random_rotations(n, seed=0):
    return Rotation.random(n, random_state=seed).as_matrix()


def random_quats(n, seed=0):
    # scipy is scalar-last
    return np.roll(Rotation.random(n, random_state=seed).as_quat(), 1, axis=-1)


def to_scipy(q):
    return Rotation.from_quat(np.roll(np.asarray(q), -1, axis=-1))


def nrms(err, ref):
    return float(np.sqrt(np.mean(np.square(err))) / np.sqrt(np.mean(np.square(ref))))


def forward_chain(x1, R1, R2, r1_alg, r2_alg, d):
    """Follower tracking point for a joint displaced by ``d`` (base frame)."""
    joint = x1 + R1 @ r1_alg
    return joint + R1 @ d + R2 @ r2_alg


def axis_factor(axis, th, thd, thdd):
    """Quaternion of a rotation by ``th(t)`` about a fixed axis with its first
    and second time derivatives."""
    axis = np.asarray(axis, dtype=float)
    c, s = np.cos(th / 2), np.sin(th / 2)
    q = np.concatenate([[c], s * axis])
    dq = 0.5 * thd * np.concatenate([[-s], c * axis])
    ddq = 0.5 * thdd * np.concatenate([[-s], c * axis]) + 0.25 * thd**2 * np.concatenate([[-c], -s * axis])
    return q, dq, ddq


def smooth_orientation(t):
    """Analytic ``q(t) = qz(a) qy(b) qx(c)`` with exact first and second derivatives."""
    angles = [
        (0.7 * np.sin(1.3 * t), 0.7 * 1.3 * np.cos(1.3 * t), -0.7 * 1.69 * np.sin(1.3 * t)),
        (0.4 * np.cos(0.9 * t), -0.4 * 0.9 * np.sin(0.9 * t), -0.4 * 0.81 * np.cos(0.9 * t)),
        (0.5 * t + 0.05 * t**2, 0.5 + 0.1 * t, 0.1),
    ]
    (A, dA, ddA), (B, dB, ddB), (C, dC, ddC) = (
        axis_factor(ax, *a) for ax, a in zip(([0, 0, 1], [0, 1, 0], [1, 0, 0]), angles)
    )
    m = cm.quat_mul
    q = m(m(A, B), C)
    dq = m(m(dA, B), C) + m(m(A, dB), C) + m(m(A, B), dC)
    ddq = (
        m(m(ddA, B), C) + m(m(A, ddB), C) + m(m(A, B), ddC)
        + 2 * (m(m(dA, dB), C) + m(m(dA, B), dC) + m(m(A, dB), dC))
    )  # fmt: skip
    return q, dq, ddq


def planar_chain():
    """Two links swinging in the x-z plane: y translation and the x/z
    rotations stay exactly zero."""
    link = dy.LinkProperties(1.0, np.diag([0.01, 0.012, 0.002]), [0.03, 0, 0.15], [-0.02, 0, -0.15])
    coeffs = [
        dy.JointCoefficients([1e4, 1e4, 1.2e4], [40, 40, 45], [100, 120, 90], [1.0, 1.2, 0.5]),
        dy.JointCoefficients([8e3, 9e3, 1e4], [30, 35, 40], [60, 70, 80], [0.8, 0.9, 0.4]),
    ]
    model = dy.ChainModel([link, link], [dy.Joint(c, np.eye(3), np.zeros(3)) for c in coeffs])
    R = [cm.rotvec_to_rotmat([0, 0.35, 0]), cm.rotvec_to_rotmat([0, -0.2, 0])]
    return model, dy.assemble_state(model, R)
