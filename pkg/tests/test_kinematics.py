from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import forward_chain, nrms, random_quats, random_rotations
from jointid import core_math as cm
from jointid import kinematics as kin
from jointid import pipeline as pl

seeds = st.integers(0, 2**31 - 1)


# -- frames from markers --------------------------------------------------------


def test_canonical_triad():
    p, R = kin.frame_from_markers([[0, 0, 0], [1, 0, 0], [0, 1, 0]])
    np.testing.assert_array_equal(p, 0)
    np.testing.assert_allclose(R, np.eye(3), atol=1e-15)


def test_frame_equivariance():
    base = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
    for R0 in random_rotations(50, seed=1):
        _, R = kin.frame_from_markers(base @ R0.T)
        np.testing.assert_allclose(R, R0, atol=1e-9)


def test_noisy_markers_monte_carlo():
    rng = np.random.default_rng(2)
    base = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
    errs = []
    for R0 in random_rotations(1000, seed=3):
        _, R = kin.frame_from_markers(base @ R0.T + rng.normal(0, 1e-3, (3, 3)))
        errs.append(np.degrees(np.arccos(np.clip((np.trace(R0.T @ R) - 1) / 2, -1, 1))))
    assert np.mean(errs) < 0.5


def test_collinear_markers():
    with pytest.raises(kin.KinematicsError, match="degenerate marker set"):
        kin.frame_from_markers([[0, 0, 0], [1, 0, 0], [2, 0, 0]])


def test_vectorized_frames_match_single():
    rng = np.random.default_rng(4)
    m = rng.normal(size=(20, 3, 3))
    p, R = kin.frames_from_marker_series(m)
    for i in range(20):
        pi, Ri = kin.frame_from_markers(m[i])
        np.testing.assert_allclose(R[i], Ri, atol=1e-12)
        np.testing.assert_array_equal(p[i], pi)


@given(seeds)
def test_frame_is_rotation(seed):
    m = np.random.default_rng(seed).normal(size=(3, 3))
    _, R = kin.frame_from_markers(m)
    assert np.linalg.norm(R.T @ R - np.eye(3)) <= 1e-9 and abs(np.linalg.det(R) - 1) <= 1e-9


# -- relative rotation ----------------------------------------------------------


def test_relative_rotation_of_equal_frames():
    R = random_rotations(1000, seed=5)
    assert np.max(np.abs(kin.relative_rotation(R, R) - np.eye(3))) <= 1e-12


def test_relative_rotation_from_identity():
    R = random_rotations(10, seed=6)
    np.testing.assert_array_equal(kin.relative_rotation(np.tile(np.eye(3), (10, 1, 1)), R), R)


def test_relative_rotation_quaternion_quotient():
    q1, q2 = random_quats(500, seed=7), random_quats(500, seed=8)
    oracle = cm.quat_to_rotmat(cm.quat_mul(cm.quat_conj(q1), q2))
    R = kin.relative_rotation(cm.quat_to_rotmat(q1), cm.quat_to_rotmat(q2))
    assert np.max(np.abs(R - oracle)) < 1e-12


# -- Algorithm 1 ----------------------------------------------------------------


def test_rigid_configuration_gives_zero():
    R1, R2 = random_rotations(2, seed=9)
    r1, r2 = np.array([0.1, 0.2, -0.3]), np.array([-0.05, 0.0, 0.2])
    x1 = np.array([0.3, -0.1, 1.0])
    x2 = forward_chain(x1, R1, R2, r1, r2, np.zeros(3))
    np.testing.assert_allclose(kin.relative_translation(x1, x2, R1, R2, r1, r2), 0, atol=1e-15)


def test_prescribed_translation_identity_rotations():
    d = np.array([0.002, 0.0, -0.001])
    r1, r2 = np.array([0.0, 0.0, -0.15]), np.array([0.0, 0.0, -0.15])
    x1 = np.zeros(3)
    x2 = forward_chain(x1, np.eye(3), np.eye(3), r1, r2, d)
    np.testing.assert_allclose(kin.relative_translation(x1, x2, np.eye(3), np.eye(3), r1, r2), d, atol=1e-12)


def test_random_prescribed_translations():
    rng = np.random.default_rng(10)
    R1, R2 = random_rotations(1000, seed=11), random_rotations(1000, seed=12)
    x1 = rng.normal(size=(1000, 3))
    r1, r2 = rng.normal(0, 0.2, (2, 3))
    d = rng.normal(0, 0.005, (1000, 3))
    x2 = np.array([forward_chain(x1[i], R1[i], R2[i], r1, r2, d[i]) for i in range(1000)])
    out = kin.relative_translation(x1, x2, R1, R2, r1, r2)
    assert np.max(np.abs(out - d)) < 1e-10


@given(seeds)
def test_relative_translation_equivariance(seed):
    rng = np.random.default_rng(seed)
    R1, R2, G = random_rotations(3, seed=seed % 2**31)
    x1, x2, r1, r2, shift = rng.normal(size=(5, 3))
    ref = kin.relative_translation(x1, x2, R1, R2, r1, r2)
    moved = kin.relative_translation(G @ x1 + shift, G @ x2 + shift, G @ R1, G @ R2, r1, r2)
    assert np.max(np.abs(moved - ref)) < 1e-10


# -- joint state series ---------------------------------------------------------


def _traj(body, t, p, q):
    return kin.BodyTrajectory(body, t, p, q)


def test_static_identical_trajectories():
    t = np.arange(240) / 120.0
    tr = kin.BodyTrajectory.static("a", t, p=(0.1, 0.2, 0.3), q=cm.axis_angle_to_quat([1, 1, 0], 0.4))
    js = kin.joint_state_series(tr, tr, kin.JointGeometry(), kin.FilterConfig(cutoff=5.0))
    for a in (js.delta, js.vel, js.theta, js.theta_rate):
        assert np.max(np.abs(a)) < 1e-12


def test_rigidly_connected_pair():
    t = np.arange(600) / 120.0
    q1 = cm.make_continuous(
        np.array([cm.euler_zyx_to_quat(0.5 * np.sin(1.1 * s), 0.3 * np.sin(0.7 * s), 0.2 * s) for s in t])
    )
    R1 = cm.quat_to_rotmat(q1)
    p1 = np.stack([0.1 * np.sin(t), 0.05 * t, np.cos(0.3 * t)], axis=1)
    r1_alg, r2_alg = np.array([0.0, 0.02, -0.3]), np.array([0.01, 0.0, -0.2])
    R_off = cm.euler_zyx_to_rotmat(0.2, -0.1, 0.3)
    R2 = R1 @ R_off
    p2 = p1 + R1 @ r1_alg + R2 @ r2_alg
    geom = kin.JointGeometry(r1_alg=r1_alg, r2_alg=r2_alg)
    base, follower = _traj("b", t, p1, q1), _traj("f", t, p2, cm.rotmat_to_quat(R2))
    js = kin.joint_state_series(base, follower, geom, kin.FilterConfig(cutoff=10.0, window=9, degree=4))
    assert np.max(np.linalg.norm(js.delta, axis=1)) < 1e-9
    # constant relative rotation, expressed as per-axis angles of R_off
    assert np.max(np.abs(js.theta - cm.joint_angles(R_off))) < 1e-9
    assert np.max(np.abs(js.theta_rate)) < 1e-9


def test_unaligned_trajectories():
    t = np.arange(100) / 120.0
    a = kin.BodyTrajectory.static("a", t)
    b = kin.BodyTrajectory.static("b", t + 0.5)
    with pytest.raises(kin.KinematicsError, match="unaligned trajectories"):
        kin.joint_state_series(a, b, kin.JointGeometry())


def test_non_uniform_timestamps_rejected():
    t = np.arange(10) / 120.0
    t[5] += 1e-3
    with pytest.raises(kin.KinematicsError):
        kin.BodyTrajectory.static("a", t)


def test_geometry_sanity_bound():
    with pytest.raises(kin.KinematicsError):
        kin.JointGeometry(r1=[20.0, 0, 0])


def _process(preset, truth, noise, cutoff, seed=0):
    model = preset.model
    markers = pl.synthesize_markers(truth.t, truth.p, truth.q, preset.markers, noise, np.random.default_rng(seed))
    bodies = kin.trajectories_from_markers(truth.t, markers, preset.markers)
    geoms = pl.joint_geometries(model, pl.tracking_origins(preset.markers, model.n))
    return pl.process_chain(model, bodies, geoms, replace(preset.filtering, cutoff=cutoff))


def test_simulator_roundtrip_noise_free(preset, truth):
    proc = _process(preset, truth, 0.0, preset.reference_cutoff)
    for j, js in enumerate(proc.joints):
        v = js.valid
        assert nrms(js.delta[v] - truth.delta[j][v], truth.delta[j][v]) < 0.01
        assert nrms(js.theta[v] - truth.theta[j][v], truth.theta[j][v]) < 0.01
        assert nrms(js.vel[v] - truth.vel[j][v], truth.vel[j][v]) < 0.01
        assert nrms(js.theta_rate[v] - truth.theta_rate[j][v], truth.theta_rate[j][v]) < 0.01


def test_link_motion_noise_free(preset, truth):
    proc = _process(preset, truth, 0.0, preset.reference_cutoff)
    for i, lm in enumerate(proc.links):
        v = lm.valid
        assert nrms(lm.omega[v] - truth.omega[i][v], truth.omega[i][v]) < 0.01
        assert nrms(lm.alpha[v] - truth.alpha[i][v], truth.alpha[i][v]) < 0.01


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_simulator_roundtrip_with_marker_noise(preset, truth, seed):
    # 5 Hz: the cutoff value reported for the hardware capture
    proc = _process(preset, truth, 1e-4, 5.0, seed)
    for j, js in enumerate(proc.joints):
        v = js.valid
        assert nrms(js.delta[v] - truth.delta[j][v], truth.delta[j][v]) < 0.10
        assert nrms(js.theta[v] - truth.theta[j][v], truth.theta[j][v]) < 0.10


def test_euler_rate_alternative(preset, truth):
    model = preset.model
    markers = pl.synthesize_markers(truth.t, truth.p, truth.q, preset.markers)
    bodies = kin.trajectories_from_markers(truth.t, markers, preset.markers)
    geoms = pl.joint_geometries(model, pl.tracking_origins(preset.markers, model.n))
    cfg = replace(preset.filtering, cutoff=preset.reference_cutoff, euler_rates=True)
    js = kin.joint_state_series(bodies[0], bodies[1], geoms[1], cfg)
    v = js.valid
    # Euler-angle rates differ from the angular velocity only at second order
    assert nrms(js.theta_rate[v] - truth.theta_rate[1][v], truth.theta_rate[1][v]) < 0.05
