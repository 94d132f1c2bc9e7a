"""Compiled right-hand side and RK4 loop for :mod:`jointid.dynamics`.

Mirrors ``ChainDynamics.derivative`` with scalar loops; the two are checked
against each other in the test suite.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _quat_to_rotmat(q, R):
    w, x, y, z = q[0], q[1], q[2], q[3]
    R[0, 0] = 1 - 2 * (y * y + z * z)
    R[0, 1] = 2 * (x * y - w * z)
    R[0, 2] = 2 * (x * z + w * y)
    R[1, 0] = 2 * (x * y + w * z)
    R[1, 1] = 1 - 2 * (x * x + z * z)
    R[1, 2] = 2 * (y * z - w * x)
    R[2, 0] = 2 * (x * z - w * y)
    R[2, 1] = 2 * (y * z + w * x)
    R[2, 2] = 1 - 2 * (x * x + y * y)


@njit(cache=True)
def _cross(a, b, out):
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


@njit(cache=True)
def _euler_xyz(M, out):
    # (roll, pitch, yaw) of M = Rz(yaw) Ry(pitch) Rx(roll)
    pitch = math.atan2(-M[2, 0], math.hypot(M[0, 0], M[1, 0]))
    if abs(abs(pitch) - math.pi / 2) < 1e-6:
        yaw = math.atan2(-M[0, 1], M[1, 1])
        roll = 0.0
    else:
        yaw = math.atan2(M[1, 0], M[0, 0])
        roll = math.atan2(M[2, 1], M[2, 2])
    if yaw <= -math.pi:
        yaw += 2 * math.pi
    if roll <= -math.pi:
        roll += 2 * math.pi
    out[0] = roll
    out[1] = pitch
    out[2] = yaw


@njit(cache=True)
def derivative(y, n, mass, I_body, r1, r2, coeffs, gravity, anchor, N, d0, rotated_neutral, dy):
    p = y[0 : 3 * n].reshape((n, 3))
    v = y[3 * n : 6 * n].reshape((n, 3))
    q = y[6 * n : 10 * n].reshape((n, 4))
    w = y[10 * n :].reshape((n, 3))
    R = np.empty((n, 3, 3))
    for i in range(n):
        _quat_to_rotmat(q[i], R[i])
    F_net = np.zeros((n, 3))
    tau_net = np.zeros((n, 3))
    for i in range(n):
        for a in range(3):
            F_net[i, a] = mass[i] * gravity[a]

    Rb = np.eye(3)
    pb = np.empty(3)
    vb = np.zeros(3)
    wb = np.zeros(3)
    arm_b = np.zeros(3)
    arm_f = np.empty(3)
    d_w = np.empty(3)
    dd_w = np.empty(3)
    tmp = np.empty(3)
    tmp2 = np.empty(3)
    delta = np.empty(3)
    vel = np.empty(3)
    theta = np.empty(3)
    rate = np.empty(3)
    Rrel = np.empty((3, 3))
    Fw = np.empty(3)
    Tw = np.empty(3)
    for j in range(n):
        if j == 0:
            for a in range(3):
                pb[a] = anchor[a]
                vb[a] = 0.0
                wb[a] = 0.0
                arm_b[a] = 0.0
            Rb[:, :] = np.eye(3)
        else:
            Rb[:, :] = R[j - 1]
            for a in range(3):
                pb[a] = p[j - 1, a]
                vb[a] = v[j - 1, a]
                wb[a] = w[j - 1, a]
                arm_b[a] = Rb[a, 0] * r2[j - 1, 0] + Rb[a, 1] * r2[j - 1, 1] + Rb[a, 2] * r2[j - 1, 2]
        Rf = R[j]
        for a in range(3):
            arm_f[a] = Rf[a, 0] * r1[j, 0] + Rf[a, 1] * r1[j, 1] + Rf[a, 2] * r1[j, 2]
            d_w[a] = p[j, a] + arm_f[a] - pb[a] - arm_b[a]
        _cross(w[j], arm_f, tmp)
        _cross(wb, arm_b, tmp2)
        for a in range(3):
            dd_w[a] = v[j, a] + tmp[a] - vb[a] - tmp2[a]
        _cross(wb, d_w, tmp)
        for a in range(3):
            delta[a] = Rb[0, a] * d_w[0] + Rb[1, a] * d_w[1] + Rb[2, a] * d_w[2] - d0[j, a]
            vel[a] = Rb[0, a] * (dd_w[0] - tmp[0]) + Rb[1, a] * (dd_w[1] - tmp[1]) + Rb[2, a] * (dd_w[2] - tmp[2])
            rate[a] = Rb[0, a] * (w[j, 0] - wb[0]) + Rb[1, a] * (w[j, 1] - wb[1]) + Rb[2, a] * (w[j, 2] - wb[2])
        for a in range(3):
            for b in range(3):
                Rrel[a, b] = Rb[0, a] * Rf[0, b] + Rb[1, a] * Rf[1, b] + Rb[2, a] * Rf[2, b]
        if rotated_neutral:
            Rrel = Rrel @ np.ascontiguousarray(N[j].T)
        _euler_xyz(Rrel, theta)
        c = coeffs[j]
        for a in range(3):
            tmp[a] = c[a] * delta[a] + c[3 + a] * vel[a]
            tmp2[a] = c[6 + a] * theta[a] + c[9 + a] * rate[a]
        for a in range(3):
            Fw[a] = Rb[a, 0] * tmp[0] + Rb[a, 1] * tmp[1] + Rb[a, 2] * tmp[2]
            Tw[a] = Rb[a, 0] * tmp2[0] + Rb[a, 1] * tmp2[1] + Rb[a, 2] * tmp2[2]
        # follower (link j) receives the reaction at its head
        _cross(arm_f, Fw, tmp)
        for a in range(3):
            F_net[j, a] -= Fw[a]
            tau_net[j, a] -= tmp[a] + Tw[a]
        if j > 0:
            for a in range(3):
                tmp2[a] = arm_b[a] + d_w[a]
            _cross(tmp2, Fw, tmp)
            for a in range(3):
                F_net[j - 1, a] += Fw[a]
                tau_net[j - 1, a] += tmp[a] + Tw[a]

    Iw = np.empty((3, 3))
    Iwv = np.empty(3)
    for i in range(n):
        Ri = R[i]
        for a in range(3):
            for b in range(3):
                acc = 0.0
                for c1 in range(3):
                    for c2 in range(3):
                        acc += Ri[a, c1] * I_body[i, c1, c2] * Ri[b, c2]
                Iw[a, b] = acc
        for a in range(3):
            Iwv[a] = Iw[a, 0] * w[i, 0] + Iw[a, 1] * w[i, 1] + Iw[a, 2] * w[i, 2]
        _cross(w[i], Iwv, tmp)
        for a in range(3):
            tmp2[a] = tau_net[i, a] - tmp[a]
        alpha = np.linalg.solve(Iw, tmp2)
        for a in range(3):
            dy[3 * i + a] = v[i, a]
            dy[3 * n + 3 * i + a] = F_net[i, a] / mass[i]
            dy[10 * n + 3 * i + a] = alpha[a]
        qw, qx, qy, qz = q[i, 0], q[i, 1], q[i, 2], q[i, 3]
        ox, oy, oz = w[i, 0], w[i, 1], w[i, 2]
        dy[6 * n + 4 * i + 0] = 0.5 * (-ox * qx - oy * qy - oz * qz)
        dy[6 * n + 4 * i + 1] = 0.5 * (ox * qw + oy * qz - oz * qy)
        dy[6 * n + 4 * i + 2] = 0.5 * (-ox * qz + oy * qw + oz * qx)
        dy[6 * n + 4 * i + 3] = 0.5 * (ox * qy - oy * qx + oz * qw)


@njit(cache=True)
def integrate(y, h, substeps, n, mass, I_body, r1, r2, coeffs, gravity, anchor, N, d0, rotated_neutral):
    """Advance ``y`` by ``substeps`` RK4 steps of size ``h`` (in place)."""
    m = y.shape[0]
    k1 = np.empty(m)
    k2 = np.empty(m)
    k3 = np.empty(m)
    k4 = np.empty(m)
    yt = np.empty(m)
    for _ in range(substeps):
        derivative(y, n, mass, I_body, r1, r2, coeffs, gravity, anchor, N, d0, rotated_neutral, k1)
        for i in range(m):
            yt[i] = y[i] + 0.5 * h * k1[i]
        derivative(yt, n, mass, I_body, r1, r2, coeffs, gravity, anchor, N, d0, rotated_neutral, k2)
        for i in range(m):
            yt[i] = y[i] + 0.5 * h * k2[i]
        derivative(yt, n, mass, I_body, r1, r2, coeffs, gravity, anchor, N, d0, rotated_neutral, k3)
        for i in range(m):
            yt[i] = y[i] + h * k3[i]
        derivative(yt, n, mass, I_body, r1, r2, coeffs, gravity, anchor, N, d0, rotated_neutral, k4)
        for i in range(m):
            y[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        for i in range(n):
            s = 0.0
            for a in range(4):
                s += y[6 * n + 4 * i + a] ** 2
            s = math.sqrt(s)
            for a in range(4):
                y[6 * n + 4 * i + a] /= s
    return y
