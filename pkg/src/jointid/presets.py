"""Bundled simulation presets."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import core_math as cm
from .dynamics import ChainModel, Joint, JointCoefficients, LinkProperties, SimConfig, SimState, assemble_state
from .kinematics import FilterConfig, MarkerFrameSpec


@dataclass
class Preset:
    name: str
    model: ChainModel
    initial: SimState
    sim: SimConfig
    markers: list[tuple[str, MarkerFrameSpec]]
    filtering: FilterConfig
    duration: float = 10.0
    link_names: list[str] = field(default_factory=list)
    joint_names: list[str] = field(default_factory=list)
    # used when no static capture is available (noise-free data has no floor)
    reference_cutoff: float | None = None


def marker_cluster(prefix: str, origin=(0.04, 0.03, 0.05)) -> MarkerFrameSpec:
    o = np.asarray(origin, dtype=float)
    pos = (tuple(o), tuple(o + [0.25, 0.0, 0.0]), tuple(o + [0.06, 0.25, 0.0]))
    return MarkerFrameSpec(f"{prefix}_o", f"{prefix}_x", f"{prefix}_p", pos)


def three_link_pendulum() -> Preset:
    """Three 1 kg links hanging from a world anchor, released 20 degrees off
    neutral about a skew horizontal axis so every joint DOF is loaded.

    Links are 0.3 m long along body z with CoM offsets off the link axis;
    the anchor joint is the compliant "actuator" DOF pair (1e2 N m/rad).
    """
    inertia = np.diag([0.01, 0.01, 0.002])
    link = LinkProperties(1.0, inertia, r1=[0.02, -0.015, 0.15], r2=[-0.015, 0.02, -0.15])
    anchor = JointCoefficients(
        kp=[1.0e4, 1.0e4, 1.0e4], kd=[40.0, 40.0, 40.0], kp_rot=[1.0e2, 1.0e2, 1.0e2], kd_rot=[1.0, 1.0, 0.3]
    )
    middle = JointCoefficients(
        kp=[8.0e3, 6.0e3, 1.0e4], kd=[30.0, 25.0, 40.0], kp_rot=[2.0e2, 1.5e2, 1.0e2], kd_rot=[1.5, 1.0, 0.3]
    )
    # the distal joint is rotationally soft so its bending stays well above marker noise
    distal = JointCoefficients(
        kp=[8.0e3, 6.0e3, 1.0e4], kd=[30.0, 25.0, 40.0], kp_rot=[1.0e2, 1.0e2, 1.0e2], kd_rot=[1.5, 1.0, 0.3]
    )
    joints = [Joint(c, np.eye(3), np.zeros(3)) for c in (anchor, middle, distal)]
    model = ChainModel([link] * 3, joints)
    axis = np.array([1.0, 0.5, 0.0])
    R0 = cm.rotvec_to_rotmat(np.deg2rad(20.0) * axis / np.linalg.norm(axis))
    initial = assemble_state(model, [R0] * 3)
    markers = [(f"link{i + 1}", marker_cluster(f"L{i + 1}", [0.04, 0.03, 0.05])) for i in range(3)]
    return Preset(
        name="three-link-pendulum",
        model=model,
        initial=initial,
        sim=SimConfig(dt_output=1.0 / 120.0, substeps=20),
        markers=markers,
        # a 1 s trim drops the release transient and the filter edge zone
        filtering=FilterConfig(cutoff=None, window=9, degree=4, edge_trim=120),
        duration=10.0,
        link_names=[name for name, _ in markers],
        joint_names=[f"joint{i + 1}" for i in range(3)],
        reference_cutoff=14.0,
    )


PRESETS = {"three-link-pendulum": three_link_pendulum}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None
