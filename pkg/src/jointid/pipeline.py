"""End-to-end chain processing: markers or poses -> joint states ->
coefficients -> re-simulation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import core_math as cm
from . import identify as idf
from . import signals
from .dynamics import ChainModel, SimConfig, SimResult, SimState, SimulationDiverged, assemble_state, simulate
from .kinematics import (
    BodyTrajectory,
    FilterConfig,
    JointGeometry,
    JointStateSeries,
    LinkMotionSeries,
    MarkerFrameSpec,
    joint_state_series,
    link_motion_series,
    relative_translation,
    trajectories_from_markers,
)


CUTOFF_BAND = 0.5  # Hz, equal to the cutoff rounding step


def synthesize_markers(
    t, p, q, specs: Sequence[tuple[str, MarkerFrameSpec]], noise_std: float = 0.0, rng=None
) -> dict[str, np.ndarray]:
    """World marker tracks for every body; ``p``/``q`` are ``(n_bodies, N, .)``."""
    rng = np.random.default_rng(0) if rng is None else rng
    R = cm.quat_to_rotmat(np.asarray(q))
    out = {}
    for i, (_, spec) in enumerate(specs):
        for mid, pos in zip(spec.ids, spec.positions):
            x = p[i] + R[i] @ np.asarray(pos, dtype=float)
            if noise_std > 0:
                x = x + rng.normal(0.0, noise_std, size=x.shape)
            out[mid] = x
    return out


def static_poses(model: ChainModel, n_samples: int) -> tuple[np.ndarray, np.ndarray]:
    """A chain held at its neutral configuration for ``n_samples`` samples."""
    s = assemble_state(model, np.tile(np.eye(3), (model.n, 1, 1)))
    p = np.repeat(s.p[:, None, :], n_samples, axis=1)
    q = np.repeat(s.q[:, None, :], n_samples, axis=1)
    return p, q


def tracking_origins(specs: Sequence[tuple[str, MarkerFrameSpec]] | None, n: int) -> np.ndarray:
    if specs is None:
        return np.zeros((n, 3))
    return np.array([np.asarray(spec.positions[0], dtype=float) for _, spec in specs])


def joint_geometries(model: ChainModel, origins: np.ndarray) -> list[JointGeometry]:
    """Algorithm-1 lever arms for every joint given the tracking point of each
    link (body coordinates relative to the CoM)."""
    geoms = []
    for j, lk in enumerate(model.links):
        if j == 0:
            r1_alg = np.zeros(3)
        else:
            r1_alg = model.links[j - 1].r2 - origins[j - 1]
        geoms.append(JointGeometry(lk.r1, lk.r2, r1_alg, origins[j] - lk.r1))
    return geoms


@dataclass
class ProcessedChain:
    t: np.ndarray
    joints: list[JointStateSeries]
    links: list[LinkMotionSeries]
    cutoff: float | None
    diagnostics: dict = field(default_factory=dict)


def world_trajectory(model: ChainModel, t) -> BodyTrajectory:
    return BodyTrajectory.static("world", t, p=model.anchor)


def relative_translations(model: ChainModel, bodies: Sequence[BodyTrajectory], geoms) -> list[np.ndarray]:
    """Unfiltered Algorithm-1 translation of every joint, ``(N, 3)`` each."""
    world = world_trajectory(model, bodies[0].t)
    out = []
    for j in range(model.n):
        base = world if j == 0 else bodies[j - 1]
        out.append(relative_translation(base.p, bodies[j].p, base.R, bodies[j].R, geoms[j].r1_alg, geoms[j].r2_alg))
    return out


def resolve_cutoff(bodies, model, geoms, static_bodies, margin: float = signals.DEFAULT_MARGIN, skip: int = 0):
    """Shared cutoff from relative-translation spectra of a moving capture
    against a static one.

    The first and last ``skip`` samples (release transient, filter edges) are
    left out of the moving spectrum. Both spectra are compared on 0.5 Hz
    bands so single noise bins in the tail cannot set the cutoff, and the
    floor is rescaled to the moving segment length since white-noise
    amplitudes scale as ``1 / sqrt(N)``. Returns the largest per-channel
    cutoff and per-channel diagnostics.
    """
    rate = bodies[0].sample_rate
    moving = relative_translations(model, bodies, geoms)
    static = relative_translations(model, static_bodies, geoms)
    n = len(bodies[0].t)
    sl = slice(skip, n - skip) if n - 2 * skip >= 8 else slice(None)
    per_channel, spectra = {}, {}
    for j in range(model.n):
        for a, ax in enumerate("xyz"):
            key = f"joint{j + 1}.d{ax}"
            spec = signals.amplitude_spectrum(signals.SampledSeries(rate, moving[j][sl, a]))
            spec = signals.band_spectrum(spec, CUTOFF_BAND)
            floor = signals.noise_floor(signals.SampledSeries(rate, static[j][:, a]), band_width=CUTOFF_BAND)
            floor *= np.sqrt(len(static[j]) / len(moving[j][sl]))
            per_channel[key] = signals.select_cutoff(spec, floor, margin)
            spectra[key] = (spec, floor)
    return max(per_channel.values()), {"per_channel": per_channel, "spectra": spectra}


def process_chain(
    model: ChainModel, bodies: Sequence[BodyTrajectory], geoms: Sequence[JointGeometry], cfg: FilterConfig
) -> ProcessedChain:
    world = world_trajectory(model, bodies[0].t)
    joints = []
    for j in range(model.n):
        base = world if j == 0 else bodies[j - 1]
        joints.append(joint_state_series(base, bodies[j], geoms[j], cfg))
    links = [link_motion_series(b, cfg) for b in bodies]
    return ProcessedChain(bodies[0].t, joints, links, cfg.cutoff)


def chain_equations(model: ChainModel, joints, links, link_idx: Sequence[int] | None = None):
    """Rotational balance of each chosen link with its head and tail joints."""
    n = model.n
    link_idx = range(n) if link_idx is None else link_idx
    eqs = []
    for i in link_idx:
        tail = i + 1 if i + 1 < n else None
        eqs.append(
            idf.LinkEquation(
                model.links[i],
                links[i],
                head=i,
                tail=tail,
                head_state=joints[i],
                tail_state=joints[tail] if tail is not None else None,
                head_base_R=None if i == 0 else links[i - 1].R,
            )
        )
    return eqs


@dataclass
class ChainIdentification:
    result: idf.IdentResult
    train: idf.RegressionProblem
    test: idf.RegressionProblem | None
    train_idx: np.ndarray
    test_idx: np.ndarray


def split_samples(model: ChainModel, joints, links, test_fraction: float | None = 0.3):
    """Equations plus train/test sample indices over samples valid in every
    equation; the test set is the contiguous tail."""
    eqs = chain_equations(model, joints, links)
    valid = np.logical_and.reduce([idf.equation_valid(e) for e in eqs])
    vidx = np.nonzero(valid)[0]
    if test_fraction is None:
        return eqs, vidx, vidx[:0]
    if len(vidx) < 2:
        raise idf.Underdetermined(f"underdetermined: {len(vidx)} valid samples")
    tr, te = idf.split_train_test(len(vidx), test_fraction)
    return eqs, vidx[tr], vidx[te]


def identify_chain(
    model: ChainModel,
    joints,
    links,
    bias: bool = False,
    test_fraction: float | None = 0.3,
    joint_names=None,
) -> ChainIdentification:
    eqs, tr, te = split_samples(model, joints, links, test_fraction)
    train = idf.assemble(eqs, model.n, bias, joint_names, sample_idx=tr)
    result = idf.solve(train)
    test = None
    if len(te):
        test = idf.assemble(eqs, model.n, bias, joint_names, sample_idx=te)
        result.test_rmse = idf.predict_net_torque(result.c, test)[1]
    return ChainIdentification(result, train, test, tr, te)


def model_from_result(model: ChainModel, result: idf.IdentResult) -> ChainModel:
    """Chain with identified coefficients; bias forces become neutral offsets."""
    coeffs = result.joint_coefficients()
    m = model.with_coefficients(coeffs)
    bias = result.bias_forces()
    if bias is None:
        return m
    joints = []
    for jt, c, bf in zip(m.joints, coeffs, bias):
        base = np.zeros(3) if jt.neutral_translation is None else np.asarray(jt.neutral_translation)
        with np.errstate(divide="ignore", invalid="ignore"):
            shift = np.where(c.kp != 0, -bf / c.kp, 0.0)
        joints.append(replace(jt, neutral_translation=base + shift))
    return replace(m, joints=tuple(joints))


def normalized_rms(err, ref) -> float:
    """``RMS(err) / RMS(ref)`` over all entries."""
    den = np.sqrt(np.mean(np.square(ref)))
    return float(np.sqrt(np.mean(np.square(err))) / den) if den > 0 else float("inf")


def trajectory_errors(truth: SimResult, recon: SimResult) -> dict[str, float]:
    """Normalized RMS joint-trajectory errors (translation and rotation groups,
    over all joints and samples) plus per-joint values."""
    out = {
        "translation": normalized_rms(recon.delta - truth.delta, truth.delta),
        "rotation": normalized_rms(recon.theta - truth.theta, truth.theta),
    }
    for j in range(truth.delta.shape[0]):
        out[f"joint{j + 1}.translation"] = normalized_rms(recon.delta[j] - truth.delta[j], truth.delta[j])
        out[f"joint{j + 1}.rotation"] = normalized_rms(recon.theta[j] - truth.theta[j], truth.theta[j])
    return out


def resimulate(model: ChainModel, result: idf.IdentResult, config: SimConfig, duration: float, initial: SimState):
    return simulate(model_from_result(model, result), config, duration, initial)


@dataclass
class PipelineRun:
    """Everything produced by one simulate -> identify -> re-simulate pass."""

    truth: SimResult
    processed: ProcessedChain
    identification: ChainIdentification
    recon: SimResult | None
    errors: dict[str, float]
    cutoff: float
    failure: str | None = None


def run_pipeline(
    preset,
    noise_std: float = 0.0,
    seed: int = 0,
    cutoff: float | None = None,
    bias: bool = False,
    test_fraction: float = 0.3,
    duration: float | None = None,
) -> PipelineRun:
    """Full round trip on a preset: markers with optional noise, cutoff from a
    static capture unless given, identification, re-simulation and errors.

    A diverging re-simulation is reported through ``failure`` with infinite
    errors instead of raising.
    """
    duration = preset.duration if duration is None else duration
    model = preset.model
    truth = simulate(model, preset.sim, duration, preset.initial)
    rng = np.random.default_rng(seed)
    markers = synthesize_markers(truth.t, truth.p, truth.q, preset.markers, noise_std, rng)
    bodies = trajectories_from_markers(truth.t, markers, preset.markers)
    geoms = joint_geometries(model, tracking_origins(preset.markers, model.n))
    cfg = preset.filtering
    diag = {}
    if cutoff is None:
        if noise_std > 0:
            sp, sq = static_poses(model, len(truth.t))
            smk = synthesize_markers(truth.t, sp, sq, preset.markers, noise_std, rng)
            static = trajectories_from_markers(truth.t, smk, preset.markers)
            cutoff, diag = resolve_cutoff(bodies, model, geoms, static, skip=cfg.trim())
        elif preset.reference_cutoff is not None:
            cutoff = preset.reference_cutoff
        else:
            raise ValueError("cutoff unresolvable: no noise floor and no explicit cutoff")
    cfg = replace(cfg, cutoff=cutoff)
    proc = process_chain(model, bodies, geoms, cfg)
    proc.diagnostics = diag
    ident = identify_chain(model, proc.joints, proc.links, bias=bias, test_fraction=test_fraction)
    recon, failure = None, None
    try:
        recon = resimulate(model, ident.result, preset.sim, duration, preset.initial)
        errors = trajectory_errors(truth, recon)
    except SimulationDiverged as exc:
        failure = str(exc)
        errors = {"translation": float("inf"), "rotation": float("inf")}
    return PipelineRun(truth, proc, ident, recon, errors, float(cutoff), failure)
