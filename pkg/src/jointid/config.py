"""Project configuration: a YAML document validated against a strict schema.

Any section may be omitted; the chain defaults to the bundled preset named in
``preset``. Unknown keys are rejected with their location.

Example::

    preset: three-link-pendulum
    signal: {window: 9, degree: 4, margin: 2.0, cutoff_hz: null, edge_trim: 120}
    identify: {test_fraction: 0.3, bias: false}
    simulation: {duration: 10.0, noise_std: 1.0e-4, seed: 0}
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Annotated, Literal

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from . import core_math as cm
from .dynamics import ChainModel, Joint, JointCoefficients, LinkProperties, SimConfig, assemble_state
from .kinematics import FilterConfig, MarkerFrameSpec
from .presets import Preset, get_preset, marker_cluster

Vec3 = Annotated[list[float], Field(min_length=3, max_length=3)]


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class MarkerSpec(_Strict):
    ids: Annotated[list[str], Field(min_length=3, max_length=3)]
    # body coordinates relative to the CoM
    origin: Vec3
    x_axis: Vec3
    plane: Vec3


class LinkSpec(_Strict):
    name: str
    mass: float = Field(gt=0)
    inertia: Annotated[list[Vec3], Field(min_length=3, max_length=3)]
    r1: Vec3
    r2: Vec3
    markers: MarkerSpec | None = None


class JointSpec(_Strict):
    name: str
    kp: Vec3
    kd: Vec3
    kp_rot: Vec3
    kd_rot: Vec3
    neutral_rotation: Annotated[list[Vec3], Field(min_length=3, max_length=3)] | None = None
    neutral_translation: Vec3 | None = None


class ChainSpec(_Strict):
    links: list[LinkSpec] = Field(min_length=1)
    joints: list[JointSpec] = Field(min_length=1)
    gravity: Vec3 = [0.0, 0.0, -9.81]
    anchor: Vec3 = [0.0, 0.0, 0.0]


class InitialSpec(_Strict):
    mode: Literal["rigid"] = "rigid"
    axis: Vec3 = [1.0, 0.5, 0.0]
    angle_deg: float = 20.0


class SignalSpec(_Strict):
    window: int = Field(9, ge=3)
    degree: int = Field(4, ge=2)
    margin: float = Field(2.0, ge=1.0)
    cutoff_hz: float | None = Field(None, gt=0)
    edge_trim: int | None = Field(120, ge=0)

    @field_validator("window")
    @classmethod
    def _odd(cls, v):
        if v % 2 == 0:
            raise ValueError("window must be odd")
        return v


class IdentifySpec(_Strict):
    test_fraction: float = Field(0.3, gt=0, lt=1)
    bias: bool = False


class SimulationSpec(_Strict):
    duration: float = Field(10.0, ge=0)
    dt_output: float = Field(1.0 / 120.0, gt=0)
    substeps: int = Field(20, ge=1)
    noise_std: float = Field(0.0, ge=0)
    seed: int = 0
    initial: InitialSpec = InitialSpec()
    static_duration: float = Field(2.0, gt=0)


class ProjectConfig(_Strict):
    preset: str = "three-link-pendulum"
    chain: ChainSpec | None = None
    signal: SignalSpec = SignalSpec()
    identify: IdentifySpec = IdentifySpec()
    simulation: SimulationSpec = SimulationSpec()

    def digest(self) -> str:
        text = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def filter_config(self, cutoff: float | None = None) -> FilterConfig:
        s = self.signal
        return FilterConfig(cutoff=cutoff, window=s.window, degree=s.degree, edge_trim=s.edge_trim)

    def sim_config(self) -> SimConfig:
        return SimConfig(dt_output=self.simulation.dt_output, substeps=self.simulation.substeps)

    def build(self) -> Preset:
        """Resolve the configuration into a runnable preset."""
        try:
            base = get_preset(self.preset)
        except KeyError as exc:
            raise ConfigError(f"preset: {exc.args[0]}") from None
        if self.chain is None:
            model, markers, names, jnames = base.model, base.markers, base.link_names, base.joint_names
        else:
            model, markers, names, jnames = _chain(self.chain)
        ini = self.simulation.initial
        axis = np.asarray(ini.axis, dtype=float)
        if np.linalg.norm(axis) == 0:
            raise ConfigError("simulation.initial.axis: zero vector")
        R0 = cm.rotvec_to_rotmat(np.deg2rad(ini.angle_deg) * axis / np.linalg.norm(axis))
        initial = assemble_state(model, [R0] * model.n)
        return Preset(
            name=self.preset if self.chain is None else "custom",
            model=model,
            initial=initial,
            sim=self.sim_config(),
            markers=markers,
            filtering=self.filter_config(self.signal.cutoff_hz),
            duration=self.simulation.duration,
            link_names=names,
            joint_names=jnames,
            reference_cutoff=self.signal.cutoff_hz if self.signal.cutoff_hz is not None else base.reference_cutoff,
        )


def _chain(spec: ChainSpec):
    if len(spec.links) != len(spec.joints):
        raise ConfigError(f"chain: {len(spec.links)} links need {len(spec.links)} joints, found {len(spec.joints)}")
    try:
        links = [LinkProperties(lk.mass, np.array(lk.inertia), lk.r1, lk.r2) for lk in spec.links]
        joints = [
            Joint(
                JointCoefficients(j.kp, j.kd, j.kp_rot, j.kd_rot),
                None if j.neutral_rotation is None else np.array(j.neutral_rotation),
                None if j.neutral_translation is None else np.array(j.neutral_translation),
            )
            for j in spec.joints
        ]
        model = ChainModel(links, joints, gravity=np.array(spec.gravity), anchor=np.array(spec.anchor))
    except ValueError as exc:
        raise ConfigError(f"chain: {exc}") from None
    markers = []
    for lk in spec.links:
        if lk.markers is None:
            continue
        m = lk.markers
        markers.append((lk.name, MarkerFrameSpec(*m.ids, (tuple(m.origin), tuple(m.x_axis), tuple(m.plane)))))
    if markers and len(markers) != len(spec.links):
        raise ConfigError("chain.links: markers must be given for every link or for none")
    if not markers:
        markers = [(lk.name, marker_cluster(f"L{i + 1}")) for i, lk in enumerate(spec.links)]
    return model, markers, [lk.name for lk in spec.links], [j.name for j in spec.joints]


def _location(err: dict) -> str:
    return ".".join(str(p) for p in err["loc"]) or "<root>"


def parse_config(data) -> ProjectConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a mapping")
    try:
        return ProjectConfig.model_validate(data)
    except ValidationError as exc:
        msgs = [f"{_location(e)}: {e['msg']}" for e in exc.errors()]
        raise ConfigError("invalid config; " + "; ".join(msgs)) from None


def load_config(path: str | Path | None) -> ProjectConfig:
    if path is None:
        return ProjectConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(data)
