import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import planar_chain, random_rotations
from jointid import core_math as cm
from jointid import dynamics as dy
from jointid import identify as idf
from jointid import pipeline as pl
from jointid.kinematics import JointGeometry

seeds = st.integers(0, 2**31 - 1)


def true_vector(model, bias=None):
    return idf.pack_coefficients([j.coeffs for j in model.joints], bias)


def zero_state():
    return [np.zeros(3)] * 4


@pytest.fixture(scope="module")
def exact(preset, truth):
    """Identification from ground-truth states, no held-out data."""
    return pl.identify_chain(preset.model, truth.joint_states(), truth.link_motion(), test_fraction=None)


@pytest.fixture(scope="module")
def noisy(preset):
    with warnings.catch_warnings():
        # identified coefficients may be negative; the re-simulation warns
        warnings.simplefilter("ignore", UserWarning)
        return pl.run_pipeline(preset, noise_std=1e-4, seed=0)


# -- target vector --------------------------------------------------------------


def test_target_at_rest():
    link = dy.LinkProperties(1.0, np.diag([1.0, 2.0, 2.5]), np.zeros(3), np.zeros(3))
    assert not idf.target_vector_sample(link, np.eye(3), np.zeros(3), np.zeros(3)).any()


def test_target_spherical_inertia():
    link = dy.LinkProperties(1.0, 0.4 * np.eye(3), np.zeros(3), np.zeros(3))
    (R,) = random_rotations(1, seed=0)
    out = idf.target_vector_sample(link, R, [0.3, -2.0, 5.0], [1.0, 0, 0])
    np.testing.assert_allclose(out, [0.4, 0, 0], atol=1e-15)


@given(seeds)
def test_target_inverts_gyroscopic_rhs(seed):
    rng = np.random.default_rng(seed)
    link = dy.LinkProperties(1.0, np.diag(rng.uniform(1, 2, 3)), np.zeros(3), np.zeros(3))
    (R,) = random_rotations(1, seed=seed)
    w, tau = rng.normal(size=(2, 3))
    alpha = dy.gyroscopic_rhs(dy.world_inertia(R, link.inertia), w, tau)
    np.testing.assert_allclose(idf.target_vector_sample(link, R, w, alpha), tau, atol=1e-12)


# -- design block ---------------------------------------------------------------


def test_zero_states_zero_block():
    geom = JointGeometry(r1=[0.1, 0, 0.2], r2=[0, 0, -0.2])
    blk = idf.design_block(zero_state(), zero_state(), np.eye(3), np.eye(3), geom)
    assert blk.shape == (3, 24) and not blk.any()


def test_single_displacement_column():
    geom = JointGeometry(r1=[0, 0, 0.1])
    head = [np.array([0.01, 0, 0]), np.zeros(3), np.zeros(3), np.zeros(3)]
    blk = idf.design_block(head, zero_state(), np.eye(3), np.eye(3), geom)
    labels = idf.column_labels(2)
    k = labels.index("joint1.kpx")
    # the follower carries the reaction of the restoring force
    np.testing.assert_allclose(blk[:, k], [0, -0.001, 0], atol=1e-18)
    assert not np.delete(blk, k, axis=1).any()


@pytest.mark.parametrize("seed", range(10))
def test_block_matches_simulator_torque(preset, seed):
    rng = np.random.default_rng(seed)
    coeffs = [dy.JointCoefficients.from_vector(rng.uniform(-50, 50, 12)) for _ in range(3)]
    model = preset.model.with_coefficients(coeffs)
    s = dy.assemble_state(model, cm.rotvec_to_rotmat(rng.normal(0, 0.4, (3, 3))), rng.normal(size=(3, 3)))
    s.w = rng.normal(size=(3, 3))
    s.p += rng.normal(0, 0.01, (3, 3))
    neutral = (cm.rotvec_to_rotmat(rng.normal(0, 0.1, (3, 3))), np.zeros((3, 3)))
    k = dy.ChainDynamics(model, *neutral).kinematics(s)
    R = cm.quat_to_rotmat(s.q)
    state = lambda j: [k.delta[j], k.vel[j], k.theta[j], k.theta_rate[j]]
    link = model.links[1]
    blk = idf.design_block(state(1), state(2), R[0], R[1], JointGeometry(link.r1, link.r2))
    _, tau = dy.net_wrench_on_link(1, s, model, neutral)
    pred = blk @ idf.pack_coefficients(coeffs[1:])
    np.testing.assert_allclose(pred, tau, rtol=0, atol=1e-10 * max(1.0, np.abs(tau).max()))


@given(seeds)
def test_block_linear_in_coefficients(seed):
    rng = np.random.default_rng(seed)
    head, tail = list(rng.normal(size=(4, 3))), list(rng.normal(size=(4, 3)))
    R1, R2 = random_rotations(2, seed=seed)
    geom = JointGeometry(rng.normal(size=3), rng.normal(size=3))
    blk = idf.design_block(head, tail, R1, R2, geom)
    c1, c2 = rng.normal(size=(2, 24))
    np.testing.assert_allclose(blk @ (c1 + c2), blk @ c1 + blk @ c2, atol=1e-12)


# -- assembly -------------------------------------------------------------------


def test_rows_per_sample(preset, truth):
    eqs = pl.chain_equations(preset.model, truth.joint_states(), truth.link_motion())
    prob = idf.assemble(eqs, 3)
    assert prob.A.shape == (3 * 3 * 1200, 36) and prob.b.shape == (3 * 3 * 1200,)
    assert np.all(np.diff(prob.t) >= 0)


def test_true_coefficients_residual(preset, truth):
    eqs = pl.chain_equations(preset.model, truth.joint_states(), truth.link_motion())
    prob = idf.assemble(eqs, 3)
    r = prob.A @ true_vector(preset.model) - prob.b
    assert np.linalg.norm(r) / np.linalg.norm(prob.b) < 1e-8


def test_underdetermined(preset, truth):
    eqs = pl.chain_equations(preset.model, truth.joint_states(), truth.link_motion())
    with pytest.raises(idf.Underdetermined, match="underdetermined"):
        idf.assemble(eqs, 3, sample_idx=[0, 1, 2])


def test_sample_order_invariance(preset, truth):
    # one link with both joints, rows built sample by sample in shuffled order
    model = preset.model
    js, lm = truth.joint_states(), truth.link_motion()
    link, R = model.links[1], [m.R for m in lm]
    states = lambda j: [js[j].delta, js[j].vel, js[j].theta, js[j].theta_rate]
    geom = JointGeometry(link.r1, link.r2)
    A = idf.design_rows(states(1), states(2), R[0], R[1], geom)
    b = idf.target_vector_sample(link, R[1], lm[1].omega, lm[1].alpha)
    perm = np.random.default_rng(0).permutation(len(b))
    shuffled = idf.design_rows(
        [a[perm] for a in states(1)], [a[perm] for a in states(2)], R[0][perm], R[1][perm], geom
    )
    np.testing.assert_array_equal(shuffled, A[perm])
    labels = idf.column_labels(2)
    t = truth.t
    p1 = idf.RegressionProblem(A.reshape(-1, 24), b.ravel(), labels, t, 2, False)
    p2 = idf.RegressionProblem(shuffled.reshape(-1, 24), b[perm].ravel(), labels, t[perm], 2, False)
    c1, c2 = idf.solve(p1).c, idf.solve(p2).c
    np.testing.assert_allclose(c2, c1, rtol=1e-9, atol=1e-9 * np.abs(c1).max())
    np.testing.assert_allclose(c1, idf.pack_coefficients([model.joints[1].coeffs, model.joints[2].coeffs]), rtol=1e-6)


def test_non_finite_problem_rejected():
    A = np.ones((3, 2))
    A[0, 0] = np.nan
    with pytest.raises(ValueError):
        idf.RegressionProblem(A, np.zeros(3), ["a", "b"], np.zeros(1), 1, False)


# -- solve ----------------------------------------------------------------------


def _problem(A, b):
    labels = [f"c{i}" for i in range(A.shape[1])]
    return idf.RegressionProblem(A, b, labels, np.arange(A.shape[0] // 3), 1, False)


def test_zero_target_zero_solution():
    A = np.random.default_rng(0).normal(size=(30, 12))
    np.testing.assert_allclose(idf.solve(_problem(A, np.zeros(30))).c, 0, atol=1e-15)


def test_exact_recovery(preset, exact):
    c_true = true_vector(preset.model)
    assert exact.result.excited.all()
    assert np.max(np.abs(exact.result.c - c_true) / np.abs(c_true)) < 1e-6


def test_condition_numbers_reported(exact):
    r = exact.result
    assert np.isfinite(r.condition_number) and r.condition_number >= r.scaled_condition_number >= 1
    assert r.rank == 36


def test_no_excitation():
    with pytest.raises(idf.NoExcitation, match="no excitation"):
        idf.solve(_problem(np.zeros((6, 4)), np.ones(6)))


def test_locked_dofs_flagged_and_rest_recovered():
    model, s0 = planar_chain()
    truth = dy.simulate(model, dy.SimConfig(substeps=20), 5.0, s0)
    ident = pl.identify_chain(model, truth.joint_states(), truth.link_motion(), test_fraction=None)
    r = ident.result
    locked = {f"joint{j}.{k}" for j in (1, 2) for k in ("kpy", "kdy", "kptx", "kptz", "kdtx", "kdtz")}
    assert {lab for lab, e in zip(r.labels, r.excited) if not e} == locked
    assert all(f"unexcited:{lab}" in r.flags for lab in locked)
    c_true = true_vector(model)
    assert np.all(r.c[~r.excited] == 0)
    assert np.max(np.abs(r.c[r.excited] - c_true[r.excited]) / np.abs(c_true[r.excited])) < 1e-6


# -- split ----------------------------------------------------------------------


def test_split_sizes():
    tr, te = idf.split_train_test(1000, 0.3)
    assert len(tr) == 700 and len(te) == 300
    tr, te = idf.split_train_test(2, 0.5)
    assert len(tr) == 1 and len(te) == 1


@given(st.integers(2, 5000), st.floats(0.01, 0.99))
def test_split_partitions(n, f):
    tr, te = idf.split_train_test(n, f)
    assert len(tr) and len(te)
    np.testing.assert_array_equal(np.concatenate([tr, te]), np.arange(n))


@pytest.mark.parametrize("n,f", [(1, 0.3), (10, 0.0), (10, 1.0)])
def test_split_errors(n, f):
    with pytest.raises(ValueError):
        idf.split_train_test(n, f)


# -- prediction -----------------------------------------------------------------


def test_train_rmse_is_residual(exact):
    r, train = exact.result, exact.train
    res = np.sqrt(np.mean((train.A @ r.c - train.b) ** 2))
    assert idf.predict_net_torque(r.c, train)[1] == pytest.approx(res, abs=1e-12)
    assert r.train_rmse == idf.predict_net_torque(r.c, train)[1]


def test_held_out_noise_free(preset, truth):
    ident = pl.identify_chain(preset.model, truth.joint_states(), truth.link_motion())
    rms_b = np.sqrt(np.mean(ident.test.b**2))
    assert ident.result.test_rmse < 1e-8 * rms_b


def test_zero_coefficients_give_rms_of_target(exact):
    train = exact.train
    _, rmse = idf.predict_net_torque(np.zeros(36), train)
    assert rmse == pytest.approx(np.sqrt(np.mean(train.b**2)), rel=1e-14)


def test_dimension_mismatch(exact):
    with pytest.raises(ValueError):
        idf.predict_net_torque(np.zeros(24), exact.train)


def test_noisy_overfit_guard(noisy):
    r = noisy.identification.result
    assert np.isfinite(r.train_rmse) and np.isfinite(r.test_rmse)
    assert r.test_rmse <= 2 * r.train_rmse


def test_bias_never_increases_train_rmse(preset, noisy):
    proc = noisy.processed
    with_bias = pl.identify_chain(preset.model, proc.joints, proc.links, bias=True)
    assert with_bias.result.train_rmse <= noisy.identification.result.train_rmse + 1e-15
    assert with_bias.result.c.shape == (45,)


@given(st.floats(1e-3, 1e3))
def test_row_scaling_invariance(k):
    rng = np.random.default_rng(1)
    A = rng.normal(size=(60, 12)) * np.logspace(-4, 3, 12)
    b = rng.normal(size=60)
    c1 = idf.solve(_problem(A, b)).c
    c2 = idf.solve(_problem(k * A, k * b)).c
    np.testing.assert_allclose(c2, c1, rtol=1e-8, atol=0)


def test_coefficient_packing_roundtrip():
    coeffs = [dy.JointCoefficients.from_vector(np.arange(12) + 12 * j) for j in range(3)]
    bias = np.arange(9.0).reshape(3, 3)
    back, b2 = idf.unpack_coefficients(idf.pack_coefficients(coeffs, bias), 3)
    assert all(np.array_equal(a.as_vector(), c.as_vector()) for a, c in zip(back, coeffs))
    np.testing.assert_array_equal(b2, bias)
    labels = idf.column_labels(2, bias=True)
    assert labels[:7] == [
        "joint1.kpx", "joint1.kpy", "joint1.kpz", "joint1.kdx", "joint1.kdy", "joint1.kdz", "joint2.kpx",
    ]  # fmt: skip
    assert labels[12] == "joint1.kptx" and labels[24] == "joint1.bfx" and len(labels) == 30


# -- wrench reconstruction ------------------------------------------------------


def test_zero_states_zero_wrench(truth):
    js = truth.joint_states()[0]
    zero = type(js)(js.t, 0 * js.delta, 0 * js.vel, 0 * js.theta, 0 * js.theta_rate, js.valid)
    (w,) = idf.reconstruct_wrench_series([dy.JointCoefficients.from_vector(np.ones(12))], [zero])
    assert not w.force.any() and not w.torque.any()


def test_wrench_matches_ground_truth(preset, truth):
    ws = idf.reconstruct_wrench_series([j.coeffs for j in preset.model.joints], truth.joint_states())
    for j, w in enumerate(ws):
        np.testing.assert_allclose(w.force, truth.force[j], rtol=1e-8, atol=1e-8 * np.abs(truth.force[j]).max())
        np.testing.assert_allclose(w.torque, truth.torque[j], rtol=1e-8, atol=1e-8 * np.abs(truth.torque[j]).max())


def test_noisy_ranges_finite(preset, noisy):
    ws = idf.reconstruct_wrench_series(
        noisy.identification.result.joint_coefficients(),
        noisy.processed.joints,
        levers=[lk.r1 for lk in preset.model.links],
    )
    for w in ws:
        rng = w.ranges()
        assert set(rng) == {f"{n}{a}" for n in ("F", "tau", "rxF") for a in "xyz"}
        assert all(np.isfinite(lo) and np.isfinite(hi) and lo <= hi for lo, hi in rng.values())
