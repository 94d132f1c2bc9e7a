"""Linear regression of joint coefficients from a link's rotational balance.

For a link with a head joint (link is the follower) and a tail joint (link is
the base) the net torque about its CoM,

    I' alpha + omega x (I' omega),

is linear in the spring-damper coefficients of both joints. Each sample gives
three rows of ``A c = b``. Column layout for joints ``0..n-1``::

    [kp/kd of joint 0 .. n-1 | kp_rot/kd_rot of joint 0 .. n-1 | bias 0 .. n-1]

with the per-joint order ``kpx kpy kpz kdx kdy kdz`` (and the same for the
rotational block). With two joints this is ``[K1; K2; Ktheta1; Ktheta2]``.
Bias columns are constant base-frame force offsets ``bfx bfy bfz`` per joint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import COEFF_NAMES, JointCoefficients, LinkProperties, joint_wrench, world_inertia
from .kinematics import JointGeometry, JointStateSeries, LinkMotionSeries

BIAS_NAMES = ("bfx", "bfy", "bfz")
EXCITATION_TOL = 1e-12

_E = np.eye(3)


class Underdetermined(ValueError):
    pass


class NoExcitation(ValueError):
    pass


def column_labels(n_joints: int, bias: bool = False, joint_names: Sequence[str] | None = None) -> list[str]:
    names = list(joint_names) if joint_names is not None else [f"joint{j + 1}" for j in range(n_joints)]
    labels = [f"{names[j]}.{k}" for j in range(n_joints) for k in COEFF_NAMES[:6]]
    labels += [f"{names[j]}.{k}" for j in range(n_joints) for k in COEFF_NAMES[6:]]
    if bias:
        labels += [f"{names[j]}.{k}" for j in range(n_joints) for k in BIAS_NAMES]
    return labels


def n_columns(n_joints: int, bias: bool) -> int:
    return (15 if bias else 12) * n_joints


def pack_coefficients(coeffs: Sequence[JointCoefficients], bias=None) -> np.ndarray:
    """Joint coefficients (and optional per-joint bias forces) to the column layout."""
    m = np.array([c.as_vector() for c in coeffs])
    c = np.concatenate([m[:, :6].ravel(), m[:, 6:].ravel()])
    if bias is not None:
        c = np.concatenate([c, np.asarray(bias, dtype=float).ravel()])
    return c


def unpack_coefficients(c, n_joints: int) -> tuple[list[JointCoefficients], np.ndarray | None]:
    c = np.asarray(c, dtype=float)
    force = c[: 6 * n_joints].reshape(n_joints, 6)
    rot = c[6 * n_joints : 12 * n_joints].reshape(n_joints, 6)
    coeffs = [JointCoefficients.from_vector(np.concatenate([force[j], rot[j]])) for j in range(n_joints)]
    bias = c[12 * n_joints :].reshape(n_joints, 3) if len(c) > 12 * n_joints else None
    return coeffs, bias


def target_vector_sample(link: LinkProperties, R, omega, alpha) -> np.ndarray:
    """Net torque about the CoM, ``I' alpha + omega x (I' omega)``; vectorized
    over leading axes."""
    Iw = world_inertia(np.asarray(R, dtype=float), link.inertia)
    omega = np.asarray(omega, dtype=float)
    Iwv = (Iw @ omega[..., None])[..., 0]
    return (Iw @ np.asarray(alpha, dtype=float)[..., None])[..., 0] + np.cross(omega, Iwv)


def _state_arrays(s):
    if isinstance(s, JointStateSeries):
        return s.delta, s.vel, s.theta, s.theta_rate
    delta, vel, theta, rate = (np.asarray(a, dtype=float) for a in s)
    return delta, vel, theta, rate


def _head_columns(state, R1, R2, r1):
    """Torque of unit coefficients of the head joint; ``(N, 3, 15)``
    ordered kp(3) kd(3) kp_rot(3) kd_rot(3) bias(3)."""
    delta, vel, theta, rate = state
    arm = R2 @ r1  # (N, 3)
    dirs = R1  # column a of R1 is the world direction of base axis a
    lever = -np.cross(arm[:, :, None], dirs, axis=1)  # (N, 3, 3): torque of unit force along axis a
    out = np.empty(arm.shape[:1] + (3, 15))
    out[:, :, 0:3] = lever * delta[:, None, :]
    out[:, :, 3:6] = lever * vel[:, None, :]
    out[:, :, 6:9] = -dirs * theta[:, None, :]
    out[:, :, 9:12] = -dirs * rate[:, None, :]
    out[:, :, 12:15] = lever
    return out


def _tail_columns(state, R2, r2):
    delta, vel, theta, rate = state
    arm = (R2 @ (r2 + delta)[..., None])[..., 0]
    dirs = R2
    lever = np.cross(arm[:, :, None], dirs, axis=1)
    out = np.empty(arm.shape[:1] + (3, 15))
    out[:, :, 0:3] = lever * delta[:, None, :]
    out[:, :, 3:6] = lever * vel[:, None, :]
    out[:, :, 6:9] = dirs * theta[:, None, :]
    out[:, :, 9:12] = dirs * rate[:, None, :]
    out[:, :, 12:15] = lever
    return out


def _scatter(block15, joint: int, n_joints: int, bias: bool) -> np.ndarray:
    N = block15.shape[0]
    out = np.zeros((N, 3, n_columns(n_joints, bias)))
    out[:, :, 6 * joint : 6 * joint + 6] = block15[:, :, 0:6]
    out[:, :, 6 * n_joints + 6 * joint : 6 * n_joints + 6 * joint + 6] = block15[:, :, 6:12]
    if bias:
        out[:, :, 12 * n_joints + 3 * joint : 12 * n_joints + 3 * joint + 3] = block15[:, :, 12:15]
    return out


def design_rows(head, tail, R1, R2, geom: JointGeometry, bias: bool = False) -> np.ndarray:
    """Stacked ``(N, 3, P)`` design blocks for one link with head and tail joints.

    ``R1`` is the world rotation of the previous link (head-joint base) and
    ``R2`` that of the current link (tail-joint base). ``head``/``tail`` are
    joint state series or ``(delta, vel, theta, theta_rate)`` arrays; either
    may be ``None`` for a link without that joint.
    """
    R2 = np.asarray(R2, dtype=float).reshape(-1, 3, 3)
    N = R2.shape[0]
    out = np.zeros((N, 3, n_columns(2, bias)))
    if head is not None:
        R1 = np.asarray(R1, dtype=float).reshape(-1, 3, 3)
        hs = [a.reshape(N, 3) for a in _state_arrays(head)]
        out += _scatter(_head_columns(hs, R1, R2, geom.r1), 0, 2, bias)
    if tail is not None:
        ts = [a.reshape(N, 3) for a in _state_arrays(tail)]
        out += _scatter(_tail_columns(ts, R2, geom.r2), 1, 2, bias)
    return out


def design_block(head, tail, R1, R2, geom: JointGeometry, bias: bool = False) -> np.ndarray:
    """3 x P design block of a single sample."""
    wrap = lambda s: None if s is None else [np.asarray(a, dtype=float).reshape(1, 3) for a in _state_arrays(s)]
    return design_rows(wrap(head), wrap(tail), R1, R2, geom, bias)[0]


@dataclass
class LinkEquation:
    """Rotational balance of one link inside a chain of ``n_joints`` joints.

    ``head``/``tail`` index into the chain's joint list (``None`` when the
    link has no such joint). ``head_base_R`` is the world rotation of the
    head joint's base (identity series for the anchor joint).
    """

    link: LinkProperties
    motion: LinkMotionSeries
    head: int | None
    tail: int | None
    head_state: JointStateSeries | None
    tail_state: JointStateSeries | None
    head_base_R: np.ndarray | None = None


@dataclass
class RegressionProblem:
    A: np.ndarray
    b: np.ndarray
    labels: list[str]
    t: np.ndarray
    n_joints: int
    bias: bool

    def __post_init__(self):
        if self.A.shape[0] != self.b.shape[0] or self.A.shape[0] % 3:
            raise ValueError("rows of A and b must match and come in triples")
        if self.A.shape[1] != len(self.labels):
            raise ValueError("column count does not match labels")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b))):
            raise ValueError("non-finite entries in regression problem")

    @property
    def n_samples(self) -> int:
        return self.A.shape[0] // 3

    def rows(self, sample_idx) -> "RegressionProblem":
        idx = np.asarray(sample_idx, dtype=int)
        r = (3 * idx[:, None] + np.arange(3)).ravel()
        return RegressionProblem(self.A[r], self.b[r], self.labels, self.t[idx], self.n_joints, self.bias)


@dataclass
class IdentResult:
    c: np.ndarray
    labels: list[str]
    n_joints: int
    bias: bool
    excited: np.ndarray
    excitation: np.ndarray
    condition_number: float
    scaled_condition_number: float
    rank: int
    train_rmse: float = float("nan")
    test_rmse: float = float("nan")
    flags: list[str] = field(default_factory=list)

    def joint_coefficients(self) -> list[JointCoefficients]:
        return unpack_coefficients(self.c, self.n_joints)[0]

    def bias_forces(self) -> np.ndarray | None:
        return unpack_coefficients(self.c, self.n_joints)[1]


def equation_rows(eq: LinkEquation, n_joints: int, bias: bool) -> tuple[np.ndarray, np.ndarray]:
    """``(N, 3, P)`` design rows and ``(N, 3)`` targets for every sample."""
    R2 = eq.motion.R
    N = len(eq.motion)
    A = np.zeros((N, 3, n_columns(n_joints, bias)))
    if eq.head is not None:
        R1 = np.tile(np.eye(3), (N, 1, 1)) if eq.head_base_R is None else eq.head_base_R
        A += _scatter(_head_columns(_state_arrays(eq.head_state), R1, R2, eq.link.r1), eq.head, n_joints, bias)
    if eq.tail is not None:
        A += _scatter(_tail_columns(_state_arrays(eq.tail_state), R2, eq.link.r2), eq.tail, n_joints, bias)
    b = target_vector_sample(eq.link, R2, eq.motion.omega, eq.motion.alpha)
    return A, b


def equation_valid(eq: LinkEquation) -> np.ndarray:
    valid = eq.motion.valid.copy()
    for s in (eq.head_state, eq.tail_state):
        if s is not None:
            valid &= s.valid
    return valid


def assemble(
    equations: Sequence[LinkEquation],
    n_joints: int,
    bias: bool = False,
    joint_names: Sequence[str] | None = None,
    sample_idx=None,
) -> RegressionProblem:
    """Stack rows sample-major (timestamp order), then link order within a sample.

    ``sample_idx`` restricts the samples used (e.g. a train or test split);
    invalid samples of any equation are skipped.
    """
    P = n_columns(n_joints, bias)
    labels = column_labels(n_joints, bias, joint_names)
    if not equations:
        raise Underdetermined("underdetermined: no equations")
    t = equations[0].motion.t
    valid = np.logical_and.reduce([equation_valid(eq) for eq in equations])
    if sample_idx is not None:
        keep = np.zeros(len(t), dtype=bool)
        keep[np.asarray(sample_idx, dtype=int)] = True
        valid &= keep
    idx = np.nonzero(valid)[0]
    if 3 * len(idx) * len(equations) < P:
        raise Underdetermined(f"underdetermined: {len(idx)} valid samples for {P} columns")
    blocks = [equation_rows(eq, n_joints, bias) for eq in equations]
    A = np.stack([blk[0][idx] for blk in blocks], axis=1).reshape(-1, P)  # (N, L, 3, P)
    b = np.stack([blk[1][idx] for blk in blocks], axis=1).reshape(-1)
    # one "sample" row-triple per (time, link) pair
    ts = np.repeat(t[idx], len(equations))
    return RegressionProblem(A, b, labels, ts, n_joints, bias)


def solve(problem: RegressionProblem) -> IdentResult:
    """Minimum-norm least squares via SVD on column-equilibrated ``A``.

    Columns with RMS below ``1e-12`` of the largest column RMS are flagged as
    unexcited and their coefficients set to zero.
    """
    A, b = problem.A, problem.b
    if A.size == 0:
        raise Underdetermined("underdetermined: empty design matrix")
    rms = np.sqrt(np.mean(A**2, axis=0))
    if rms.max() == 0.0:
        raise NoExcitation("no excitation")
    excited = rms > EXCITATION_TOL * rms.max()
    As = A[:, excited] / rms[excited]
    x, _, rank, sv = np.linalg.lstsq(As, b, rcond=None)
    c = np.zeros(A.shape[1])
    c[excited] = x / rms[excited]
    sv_raw = np.linalg.svd(A[:, excited], compute_uv=False)
    cond = float(sv_raw[0] / sv_raw[-1]) if sv_raw[-1] > 0 else float("inf")
    scond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    flags = [f"unexcited:{lab}" for lab, e in zip(problem.labels, excited) if not e]
    if rank < int(excited.sum()):
        flags.append(f"rank-deficient:{rank}/{int(excited.sum())}")
    res = IdentResult(c, list(problem.labels), problem.n_joints, problem.bias, excited, rms, cond, scond, int(rank))
    res.flags = flags
    res.train_rmse = predict_net_torque(c, problem)[1]
    return res


def predict_net_torque(c, problem: RegressionProblem) -> tuple[np.ndarray, float]:
    """Per-sample predicted net torque ``(N, 3)`` and RMSE against ``b`` (N m)."""
    c = np.asarray(c, dtype=float)
    if c.shape[0] != problem.A.shape[1]:
        raise ValueError(f"coefficient vector has {c.shape[0]} entries, design has {problem.A.shape[1]}")
    pred = problem.A @ c
    rmse = float(np.sqrt(np.mean((pred - problem.b) ** 2))) if len(pred) else float("nan")
    return pred.reshape(-1, 3), rmse


def split_train_test(n: int, test_fraction: float = 0.3, mode: str = "contiguous-tail"):
    """Index arrays ``(train, test)``; the test set is the contiguous tail."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    if mode != "contiguous-tail":
        raise ValueError(f"unknown split mode {mode!r}")
    if n < 2:
        raise ValueError("too few samples to split")
    n_test = min(max(int(round(n * test_fraction)), 1), n - 1)
    idx = np.arange(n)
    return idx[: n - n_test], idx[n - n_test :]


@dataclass
class WrenchSeries:
    """Joint-law output in the base frame plus the lever torque ``r x F``."""

    t: np.ndarray
    force: np.ndarray
    torque: np.ndarray
    force_torque: np.ndarray

    def ranges(self) -> dict[str, tuple[float, float]]:
        out = {}
        for name, arr in (("F", self.force), ("tau", self.torque), ("rxF", self.force_torque)):
            for a, ax in enumerate("xyz"):
                out[f"{name}{ax}"] = (float(arr[:, a].min()), float(arr[:, a].max()))
        return out


def reconstruct_wrench_series(
    coeffs: Sequence[JointCoefficients], states: Sequence[JointStateSeries], levers=None
) -> list[WrenchSeries]:
    """Joint forces/torques from identified coefficients. ``levers[j]`` is the
    arm used for ``r x F`` (defaults to zero)."""
    out = []
    for j, (c, s) in enumerate(zip(coeffs, states, strict=True)):
        F, tau = joint_wrench(s.delta, s.vel, s.theta, s.theta_rate, c)
        r = np.zeros(3) if levers is None else np.asarray(levers[j], dtype=float)
        out.append(WrenchSeries(s.t, F, tau, np.cross(r, F)))
    return out
