"""Maximal-coordinate simulator for serial chains of 6-DOF spring-damper joints.

Every link is a free rigid body with state ``(p, v, q, omega)`` (world CoM
position and velocity, world-from-body quaternion, world angular velocity).
Joint ``j`` connects base link ``j - 1`` (the world for ``j = 0``) to
follower link ``j``. The joint law acts on the relative pose of the follower
with respect to the base, expressed in the base frame::

    F   = kp * delta + kd * vel
    tau = kp_rot * theta + kd_rot * theta_rate

``(F, tau)`` is the restoring wrench the joint applies to its base link; the
follower receives the opposite wrench. Both forces act at the follower's
attachment point, so the translational springs derive from the potential
``0.5 * kp * delta**2`` and conserve energy and angular momentum.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import _kernels
from . import core_math as cm
from .kinematics import BodyTrajectory, JointStateSeries, LinkMotionSeries

log = logging.getLogger(__name__)

COEFF_NAMES = ("kpx", "kpy", "kpz", "kdx", "kdy", "kdz", "kptx", "kpty", "kptz", "kdtx", "kdty", "kdtz")
GRAVITY = (0.0, 0.0, -9.81)


class SimulationDiverged(RuntimeError):
    pass


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class JointCoefficients:
    kp: np.ndarray = field(default_factory=lambda: np.zeros(3))
    kd: np.ndarray = field(default_factory=lambda: np.zeros(3))
    kp_rot: np.ndarray = field(default_factory=lambda: np.zeros(3))
    kd_rot: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name in ("kp", "kd", "kp_rot", "kd_rot"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(3)
            if not np.all(np.isfinite(v)):
                raise ModelError(f"joint coefficient {name} is not finite")
            object.__setattr__(self, name, v)

    def as_vector(self) -> np.ndarray:
        """Coefficients in the file order ``kpx..kdz, kptx..kdtz``."""
        return np.concatenate([self.kp, self.kd, self.kp_rot, self.kd_rot])

    @classmethod
    def from_vector(cls, c) -> "JointCoefficients":
        c = np.asarray(c, dtype=float).reshape(12)
        return cls(c[0:3], c[3:6], c[6:9], c[9:12])

    @classmethod
    def from_dict(cls, d: dict) -> "JointCoefficients":
        return cls.from_vector([d.get(k, 0.0) for k in COEFF_NAMES])

    def to_dict(self) -> dict:
        return dict(zip(COEFF_NAMES, self.as_vector().tolist()))

    def __add__(self, other: "JointCoefficients") -> "JointCoefficients":
        return JointCoefficients.from_vector(self.as_vector() + other.as_vector())


@dataclass(frozen=True)
class LinkProperties:
    mass: float
    inertia: np.ndarray
    r1: np.ndarray
    r2: np.ndarray

    def __post_init__(self):
        I = np.asarray(self.inertia, dtype=float)
        if I.shape == (3,):
            I = np.diag(I)
        object.__setattr__(self, "inertia", I.reshape(3, 3))
        object.__setattr__(self, "r1", np.asarray(self.r1, dtype=float).reshape(3))
        object.__setattr__(self, "r2", np.asarray(self.r2, dtype=float).reshape(3))
        if not self.mass > 0:
            raise ModelError("link mass must be positive")
        I = self.inertia
        if np.max(np.abs(I - I.T)) > 1e-12:
            raise ModelError("inertia tensor is not symmetric")
        ev = np.linalg.eigvalsh(I)
        if np.any(ev <= 0):
            raise ModelError("inertia tensor is not positive definite")
        a, b, c = ev
        if a + b < c * (1 - 1e-12):
            raise ModelError("principal moments violate the triangle inequality")


@dataclass(frozen=True)
class Joint:
    """A 6-DOF joint. ``None`` neutral values are taken from the initial state."""

    coeffs: JointCoefficients
    neutral_rotation: np.ndarray | None = None
    neutral_translation: np.ndarray | None = None


@dataclass(frozen=True)
class ChainModel:
    links: tuple[LinkProperties, ...]
    joints: tuple[Joint, ...]
    gravity: np.ndarray = field(default_factory=lambda: np.array(GRAVITY))
    anchor: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "joints", tuple(self.joints))
        object.__setattr__(self, "gravity", np.asarray(self.gravity, dtype=float).reshape(3))
        object.__setattr__(self, "anchor", np.asarray(self.anchor, dtype=float).reshape(3))
        if len(self.links) == 0 or len(self.links) != len(self.joints):
            raise ModelError("a chain with n links needs n joints (anchor joint first)")
        for j in self.joints:
            if j.neutral_rotation is not None:
                N = np.asarray(j.neutral_rotation, dtype=float)
                if np.linalg.norm(N.T @ N - np.eye(3)) > 1e-9 or abs(np.linalg.det(N) - 1) > 1e-9:
                    raise ModelError("neutral rotation is not a valid rotation")

    @property
    def n(self) -> int:
        return len(self.links)

    def coefficient_matrix(self) -> np.ndarray:
        return np.array([j.coeffs.as_vector() for j in self.joints])

    def with_coefficients(self, coeffs: Sequence[JointCoefficients]) -> "ChainModel":
        joints = tuple(replace(j, coeffs=c) for j, c in zip(self.joints, coeffs, strict=True))
        return replace(self, joints=joints)

    def joint_offsets(self) -> tuple[np.ndarray, np.ndarray]:
        """Per joint: base attachment (base body frame) and follower attachment."""
        a_b = np.array([self.anchor] + [lk.r2 for lk in self.links[:-1]])
        a_f = np.array([lk.r1 for lk in self.links])
        return a_b, a_f


@dataclass(frozen=True)
class SimConfig:
    dt_output: float = 1.0 / 120.0
    substeps: int = 10
    rel_tol: float = 1e-6
    abs_tol: float = 1e-8

    def __post_init__(self):
        if not self.dt_output > 0 or self.substeps < 1:
            raise ModelError("dt_output must be > 0 and substeps >= 1")


@dataclass
class SimState:
    p: np.ndarray
    v: np.ndarray
    q: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float).reshape(-1, 3)
        self.v = np.asarray(self.v, dtype=float).reshape(-1, 3)
        self.q = np.asarray(self.q, dtype=float).reshape(-1, 4)
        self.w = np.asarray(self.w, dtype=float).reshape(-1, 3)

    def copy(self) -> "SimState":
        return SimState(self.p.copy(), self.v.copy(), self.q.copy(), self.w.copy())

    def pack(self) -> np.ndarray:
        return np.concatenate([self.p.ravel(), self.v.ravel(), self.q.ravel(), self.w.ravel()])

    @classmethod
    def unpack(cls, y: np.ndarray, n: int) -> "SimState":
        return cls(y[: 3 * n], y[3 * n : 6 * n], y[6 * n : 10 * n], y[10 * n :])


# -- joint law -----------------------------------------------------------------


def joint_wrench(delta, vel, theta, theta_rate, coeffs) -> tuple[np.ndarray, np.ndarray]:
    """Base-frame force and torque of the spring-damper law.

    ``coeffs`` is a :class:`JointCoefficients` or an array of 12-vectors
    broadcasting against the leading axes of the state.
    """
    c = coeffs.as_vector() if isinstance(coeffs, JointCoefficients) else np.asarray(coeffs, dtype=float)
    F = c[..., 0:3] * np.asarray(delta) + c[..., 3:6] * np.asarray(vel)
    tau = c[..., 6:9] * np.asarray(theta) + c[..., 9:12] * np.asarray(theta_rate)
    return F, tau


def gyroscopic_rhs(I_world, omega, tau_net) -> np.ndarray:
    """Solve ``I' alpha + omega x (I' omega) = tau_net`` for ``alpha``."""
    I_world = np.asarray(I_world, dtype=float)
    omega = np.asarray(omega, dtype=float)
    rhs = np.asarray(tau_net, dtype=float) - np.cross(omega, (I_world @ omega[..., None])[..., 0])
    try:
        return np.linalg.solve(I_world, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError as e:
        raise ModelError("singular inertia tensor") from e


def world_inertia(R, I_body) -> np.ndarray:
    return R @ I_body @ np.swapaxes(R, -1, -2)


@dataclass
class ChainKinematics:
    """Everything the right-hand side needs, per link and per joint."""

    R: np.ndarray  # (n, 3, 3) link rotations
    R_base: np.ndarray  # (n, 3, 3) base rotation per joint
    d_world: np.ndarray  # (n, 3) follower minus base attachment point, world
    delta: np.ndarray
    vel: np.ndarray
    theta: np.ndarray
    theta_rate: np.ndarray


class ChainDynamics:
    """Right-hand side of the chain ODE with model constants precomputed."""

    def __init__(self, model: ChainModel, neutral_rotation: np.ndarray, neutral_translation: np.ndarray):
        self.model = model
        self.n = model.n
        self.mass = np.array([lk.mass for lk in model.links])
        self.I_body = np.array([lk.inertia for lk in model.links])
        self.r1 = np.array([lk.r1 for lk in model.links])
        self.r2 = np.array([lk.r2 for lk in model.links])
        self.coeffs = model.coefficient_matrix()
        self.gravity = model.gravity
        self.anchor = model.anchor
        self.N = np.asarray(neutral_rotation, dtype=float)
        self.d0 = np.asarray(neutral_translation, dtype=float)
        self._NT = np.swapaxes(self.N, 1, 2)
        self._rotated_neutral = bool(np.any(self.N != np.eye(3)))

    def kernel_args(self) -> tuple:
        return (
            self.n, self.mass, self.I_body, self.r1, self.r2, self.coeffs,
            self.gravity, self.anchor, self.N, self.d0, self._rotated_neutral,
        )  # fmt: skip

    def kinematics(self, s: SimState) -> ChainKinematics:
        R = cm.quat_to_rotmat(s.q)
        n = self.n
        R_base = np.empty((n, 3, 3))
        R_base[0] = np.eye(3)
        R_base[1:] = R[:-1]
        RbT = np.swapaxes(R_base, 1, 2)
        arm_f = np.einsum("nij,nj->ni", R, self.r1)
        arm_b = np.empty((n, 3))
        arm_b[0] = 0.0
        arm_b[1:] = np.einsum("nij,nj->ni", R[:-1], self.r2[:-1])
        pb = np.empty((n, 3))
        pb[0] = self.anchor
        pb[1:] = s.p[:-1]
        vb = np.zeros((n, 3))
        vb[1:] = s.v[:-1]
        wb = np.zeros((n, 3))
        wb[1:] = s.w[:-1]
        d_w = s.p + arm_f - pb - arm_b
        dd_w = s.v + np.cross(s.w, arm_f) - vb - np.cross(wb, arm_b)
        delta = np.einsum("nij,nj->ni", RbT, d_w) - self.d0
        vel = np.einsum("nij,nj->ni", RbT, dd_w - np.cross(wb, d_w))
        R_rel = RbT @ R
        if self._rotated_neutral:
            R_rel = R_rel @ self._NT
        theta = cm.joint_angles(R_rel)
        theta_rate = np.einsum("nij,nj->ni", RbT, s.w - wb)
        return ChainKinematics(R, R_base, d_w, delta, vel, theta, theta_rate)

    def link_wrenches(self, k: ChainKinematics) -> tuple[np.ndarray, np.ndarray]:
        """Net force and net torque about the CoM for every link (world)."""
        F_b, tau_b = joint_wrench(k.delta, k.vel, k.theta, k.theta_rate, self.coeffs)
        F_w = np.einsum("nij,nj->ni", k.R_base, F_b)
        tau_w = np.einsum("nij,nj->ni", k.R_base, tau_b)
        arm_head = np.einsum("nij,nj->ni", k.R, self.r1)
        F_net = self.mass[:, None] * self.gravity - F_w
        tau_net = -np.cross(arm_head, F_w) - tau_w
        # tail joint j+1 reacts on link j at the follower attachment point
        arm_tail = np.einsum("nij,nj->ni", k.R[:-1], self.r2[:-1]) + k.d_world[1:]
        F_net[:-1] += F_w[1:]
        tau_net[:-1] += np.cross(arm_tail, F_w[1:]) + tau_w[1:]
        return F_net, tau_net

    def accelerations(self, s: SimState, k: ChainKinematics | None = None):
        k = self.kinematics(s) if k is None else k
        F_net, tau_net = self.link_wrenches(k)
        I_w = world_inertia(k.R, self.I_body)
        return F_net / self.mass[:, None], gyroscopic_rhs(I_w, s.w, tau_net), k

    def derivative(self, y: np.ndarray) -> np.ndarray:
        s = SimState.unpack(y, self.n)
        a, alpha, _ = self.accelerations(s)
        wq = np.concatenate([np.zeros((self.n, 1)), s.w], axis=1)
        q_dot = 0.5 * cm.quat_mul(wq, s.q)
        return np.concatenate([s.v.ravel(), a.ravel(), q_dot.ravel(), alpha.ravel()])


def net_wrench_on_link(index: int, state: SimState, model: ChainModel, neutral=None):
    """Net force and torque about the CoM acting on link ``index``."""
    dyn = make_dynamics(model, state, neutral)
    F, tau = dyn.link_wrenches(dyn.kinematics(state))
    return F[index], tau[index]


def resolve_neutral(model: ChainModel, initial: SimState) -> tuple[np.ndarray, np.ndarray]:
    """Neutral relative rotation/translation per joint; missing values default
    to the relative pose found in ``initial``."""
    n = model.n
    tmp = ChainDynamics(model, np.tile(np.eye(3), (n, 1, 1)), np.zeros((n, 3)))
    k = tmp.kinematics(initial)
    R_rel = np.swapaxes(k.R_base, 1, 2) @ k.R
    N = np.empty((n, 3, 3))
    d0 = np.empty((n, 3))
    for j, joint in enumerate(model.joints):
        N[j] = R_rel[j] if joint.neutral_rotation is None else joint.neutral_rotation
        d0[j] = k.delta[j] if joint.neutral_translation is None else joint.neutral_translation
    return N, d0


def make_dynamics(model: ChainModel, initial: SimState, neutral=None) -> ChainDynamics:
    N, d0 = resolve_neutral(model, initial) if neutral is None else neutral
    return ChainDynamics(model, N, d0)


def _rk4(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _renormalize(y: np.ndarray, n: int) -> np.ndarray:
    q = y[6 * n : 10 * n].reshape(n, 4)
    y[6 * n : 10 * n] = (q / np.linalg.norm(q, axis=1, keepdims=True)).ravel()
    return y


def step(state: SimState, model: ChainModel | ChainDynamics, dt: float, step_index: int = 0) -> SimState:
    """One RK4 step; quaternions are renormalized afterwards."""
    dyn = model if isinstance(model, ChainDynamics) else make_dynamics(model, state)
    y = _renormalize(_rk4(dyn.derivative, state.pack(), dt), dyn.n)
    if not np.all(np.isfinite(y)):
        raise SimulationDiverged(f"simulation diverged at step {step_index}")
    return SimState.unpack(y, dyn.n)


def recommended_substeps(model: ChainModel, dt_output: float) -> int:
    """Substeps keeping ``dt_internal < 0.1 / sqrt(k_max / m_min)`` for the
    translational and rotational springs.

    Translational springs acting at an attachment arm ``r`` also stiffen the
    rotation by ``k * |r|**2``, which usually dominates for slender links.
    """
    c = np.abs(model.coefficient_matrix())
    m_min = min(lk.mass for lk in model.links)
    i_min = min(np.linalg.eigvalsh(lk.inertia)[0] for lk in model.links)
    arm = max(max(np.linalg.norm(lk.r1), np.linalg.norm(lk.r2)) for lk in model.links)
    k_rot = c[:, 6:9].max() + 2.0 * c[:, 0:3].max() * arm**2
    w = max(np.sqrt(c[:, 0:3].max() / m_min), np.sqrt(k_rot / i_min), 1e-12)
    return max(1, int(np.ceil(dt_output * w / 0.1)))


@dataclass
class SimResult:
    """Fixed-rate simulator output with ground truth from the internal state."""

    t: np.ndarray
    p: np.ndarray  # (n_links, N, 3) CoM positions
    v: np.ndarray
    q: np.ndarray  # (n_links, N, 4)
    omega: np.ndarray  # (n_links, N, 3) world
    alpha: np.ndarray  # (n_links, N, 3) world
    delta: np.ndarray  # (n_joints, N, 3) base frame
    vel: np.ndarray
    theta: np.ndarray
    theta_rate: np.ndarray
    force: np.ndarray  # (n_joints, N, 3) joint-law force, base frame
    torque: np.ndarray
    neutral_rotation: np.ndarray
    neutral_translation: np.ndarray

    @property
    def n_links(self) -> int:
        return self.p.shape[0]

    def trajectories(self) -> list[BodyTrajectory]:
        return [BodyTrajectory(f"link{i + 1}", self.t, self.p[i], self.q[i]) for i in range(self.n_links)]

    def joint_states(self) -> list[JointStateSeries]:
        valid = np.ones(len(self.t), dtype=bool)
        return [
            JointStateSeries(self.t, self.delta[j], self.vel[j], self.theta[j], self.theta_rate[j], valid)
            for j in range(self.delta.shape[0])
        ]

    def link_motion(self) -> list[LinkMotionSeries]:
        valid = np.ones(len(self.t), dtype=bool)
        return [LinkMotionSeries(self.t, self.q[i], self.omega[i], self.alpha[i], valid) for i in range(self.n_links)]

    def state_at(self, k: int) -> SimState:
        return SimState(self.p[:, k], self.v[:, k], self.q[:, k], self.omega[:, k])


def n_output_samples(duration: float, dt_output: float) -> int:
    if duration < 0:
        raise ModelError("duration must be non-negative")
    return max(1, int(round(duration / dt_output)))


def simulate(
    model: ChainModel, config: SimConfig, duration: float, initial: SimState, neutral=None
) -> SimResult:
    if initial.p.shape[0] != model.n:
        raise ModelError("initial state does not match the number of links")
    if np.any(model.coefficient_matrix() < 0):
        warnings.warn("negative joint coefficients in simulation model", stacklevel=2)
    dyn = make_dynamics(model, initial, neutral)
    n_out = n_output_samples(duration, config.dt_output)
    h = config.dt_output / config.substeps
    n = model.n
    shape_l, shape_j = (n_out, n, 3), (n_out, n, 3)
    rec = {k: np.empty(shape_l) for k in ("p", "v", "w", "alpha")}
    rec["q"] = np.empty((n_out, n, 4))
    for k in ("delta", "vel", "theta", "theta_rate", "force", "torque"):
        rec[k] = np.empty(shape_j)

    y = initial.pack().copy()
    y = _renormalize(y, n)
    step_index = 0
    for i in range(n_out):
        if i > 0:
            try:
                y = _kernels.integrate(y, h, config.substeps, *dyn.kernel_args())
            except (np.linalg.LinAlgError, ValueError, ZeroDivisionError) as exc:
                # the compiled solver rejects non-finite or singular inertia
                raise SimulationDiverged(f"simulation diverged near step {step_index + config.substeps}") from exc
            step_index += config.substeps
            if not np.all(np.isfinite(y)):
                raise SimulationDiverged(f"simulation diverged at step {step_index}")
        s = SimState.unpack(y, n)
        _, alpha, k = dyn.accelerations(s)
        F, tau = joint_wrench(k.delta, k.vel, k.theta, k.theta_rate, dyn.coeffs)
        rec["p"][i], rec["v"][i], rec["q"][i], rec["w"][i] = s.p, s.v, s.q, s.w
        rec["alpha"][i] = alpha
        rec["delta"][i], rec["vel"][i], rec["theta"][i], rec["theta_rate"][i] = k.delta, k.vel, k.theta, k.theta_rate
        rec["force"][i], rec["torque"][i] = F, tau
    sw = {k: np.swapaxes(v, 0, 1).copy() for k, v in rec.items()}
    t = np.arange(n_out) * config.dt_output
    return SimResult(
        t, sw["p"], sw["v"], sw["q"], sw["w"], sw["alpha"],
        sw["delta"], sw["vel"], sw["theta"], sw["theta_rate"], sw["force"], sw["torque"],
        dyn.N, dyn.d0,
    )  # fmt: skip


# -- initial states, energy, momentum -----------------------------------------


def assemble_state(model: ChainModel, rotations, velocities=None, omegas=None) -> SimState:
    """State with every joint at zero translation for the given link rotations."""
    R = np.asarray(rotations, dtype=float).reshape(model.n, 3, 3)
    p = np.empty((model.n, 3))
    prev = model.anchor
    for i, lk in enumerate(model.links):
        p[i] = prev - R[i] @ lk.r1
        prev = p[i] + R[i] @ lk.r2
    v = np.zeros((model.n, 3)) if velocities is None else velocities
    w = np.zeros((model.n, 3)) if omegas is None else omegas
    return SimState(p, v, cm.rotmat_to_quat(R), w)


def kinetic_energy(model: ChainModel, s: SimState) -> float:
    R = cm.quat_to_rotmat(s.q)
    e = 0.0
    for i, lk in enumerate(model.links):
        e += 0.5 * lk.mass * s.v[i] @ s.v[i] + 0.5 * s.w[i] @ world_inertia(R[i], lk.inertia) @ s.w[i]
    return float(e)


def total_energy(model: ChainModel, s: SimState, neutral) -> float:
    """Kinetic + translational spring + gravitational energy (rotational
    springs are not conservative and are left out)."""
    dyn = ChainDynamics(model, *neutral)
    k = dyn.kinematics(s)
    spring = 0.5 * np.sum(dyn.coeffs[:, 0:3] * k.delta**2)
    grav = -float(np.sum(dyn.mass[:, None] * s.p * model.gravity))
    return kinetic_energy(model, s) + float(spring) + grav


def momentum(model: ChainModel, s: SimState) -> tuple[np.ndarray, np.ndarray]:
    """Total linear momentum and angular momentum about the world origin."""
    R = cm.quat_to_rotmat(s.q)
    P = np.zeros(3)
    L = np.zeros(3)
    for i, lk in enumerate(model.links):
        mv = lk.mass * s.v[i]
        P += mv
        L += np.cross(s.p[i], mv) + world_inertia(R[i], lk.inertia) @ s.w[i]
    return P, L


def static_equilibrium(model: ChainModel, guess: SimState | None = None, neutral=None, tol: float = 1e-12) -> SimState:
    """Rest configuration where every link's net force and torque vanish.

    Unknowns are link positions and small rotation vectors applied to the
    guess (default: the neutral-aligned chain).
    """
    from scipy.optimize import root

    n = model.n
    if guess is None:
        guess = assemble_state(model, np.tile(np.eye(3), (n, 1, 1)))
    if neutral is None:
        neutral = (np.tile(np.eye(3), (n, 1, 1)), np.zeros((n, 3)))
    dyn = ChainDynamics(model, *neutral)
    R0 = cm.quat_to_rotmat(guess.q)
    zeros = np.zeros((n, 3))

    def state(x):
        dR = cm.rotvec_to_rotmat(x[3 * n :].reshape(n, 3))
        return SimState(x[: 3 * n].reshape(n, 3), zeros, cm.rotmat_to_quat(dR @ R0), zeros)

    def residual(x):
        F, tau = dyn.link_wrenches(dyn.kinematics(state(x)))
        return np.concatenate([F.ravel(), tau.ravel()])

    x0 = np.concatenate([guess.p.ravel(), np.zeros(3 * n)])
    sol = root(residual, x0, method="hybr", tol=tol)
    if not sol.success:
        raise ModelError(f"static equilibrium not found: {sol.message}")
    return state(sol.x)


def rotate_state(s: SimState, R, pivot) -> SimState:
    """Rigidly rotate a whole configuration about ``pivot`` (world)."""
    R = np.asarray(R, dtype=float)
    pivot = np.asarray(pivot, dtype=float)
    q = cm.rotmat_to_quat(R @ cm.quat_to_rotmat(s.q))
    return SimState(pivot + (s.p - pivot) @ R.T, s.v @ R.T, q, s.w @ R.T)
