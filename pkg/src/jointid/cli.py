"""Batch command line: simulate -> process -> identify -> predict, composed
through CSV files only.

Exit codes: 0 success, 2 input or configuration error, 3 numeric divergence,
4 underdetermined problem.
"""

from __future__ import annotations

import functools
import sys
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from . import __version__
from . import formats as io
from . import identify as idf
from . import pipeline as pl
from . import signals
from .config import ProjectConfig, load_config
from .dynamics import SimulationDiverged, n_output_samples, simulate
from .kinematics import BodyTrajectory, trajectories_from_markers

EXIT_INPUT, EXIT_DIVERGED, EXIT_UNDERDETERMINED = 2, 3, 4


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (idf.Underdetermined, idf.NoExcitation) as exc:
            _fail(EXIT_UNDERDETERMINED, exc)
        except SimulationDiverged as exc:
            _fail(EXIT_DIVERGED, exc)
        except (ValueError, OSError) as exc:
            _fail(EXIT_INPUT, exc)

    return wrapper


def _fail(code: int, exc: Exception):
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _setup(config_path) -> tuple[ProjectConfig, object]:
    cfg = load_config(config_path)
    return cfg, cfg.build()


def _joint_names(preset) -> list[str]:
    return preset.joint_names or [f"joint{j + 1}" for j in range(preset.model.n)]


config_option = click.option(
    "--config", "config_path", type=click.Path(dir_okay=False), default=None, help="YAML project configuration."
)


@click.group()
@click.version_option(__version__, prog_name="jointid")
def main():
    """Identify spring-damper joint coefficients of a serial chain from motion capture."""


# -- simulate ------------------------------------------------------------------


@main.command("simulate")
@config_option
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--duration", type=float, default=None, help="Seconds; overrides the configuration.")
@click.option("--seed", type=int, default=None, help="Marker-noise seed.")
@click.option("--noise-std", type=float, default=None, help="Marker noise standard deviation in meters.")
@_guarded
def cmd_simulate(config_path, out_dir, duration, seed, noise_std):
    """Simulate the configured chain and write poses, markers and ground truth."""
    cfg, preset = _setup(config_path)
    sim = cfg.simulation
    duration = sim.duration if duration is None else duration
    seed = sim.seed if seed is None else seed
    noise = sim.noise_std if noise_std is None else noise_std
    if duration < 0 or noise < 0:
        raise ValueError("duration and noise-std must be non-negative")
    out = Path(out_dir)
    truth = simulate(preset.model, preset.sim, duration, preset.initial)
    rng = np.random.default_rng(seed)
    markers = pl.synthesize_markers(truth.t, truth.p, truth.q, preset.markers, noise, rng)
    n_static = n_output_samples(sim.static_duration, preset.sim.dt_output)
    t_static = np.arange(n_static) * preset.sim.dt_output
    sp, sq = pl.static_poses(preset.model, n_static)
    static = pl.synthesize_markers(t_static, sp, sq, preset.markers, noise, rng)

    for i, name in enumerate(preset.link_names):
        io.write_pose(out / f"{name}_pose.csv", BodyTrajectory(name, truth.t, truth.p[i], truth.q[i]))
    io.write_markers(out / "markers.csv", truth.t, markers)
    io.write_markers(out / "static_markers.csv", t_static, static)
    for name, js in zip(_joint_names(preset), truth.joint_states()):
        io.write_joint_state(out / f"{name}_truth.csv", js)
    for j, name in enumerate(_joint_names(preset)):
        io.write_wrench(out / f"{name}_wrench.csv", truth.t, truth.force[j], truth.torque[j])
    for name, lm in zip(preset.link_names, truth.link_motion()):
        io.write_link_motion(out / f"{name}_motion_truth.csv", lm)
    click.echo(f"simulated {len(truth.t)} samples of {preset.model.n} links into {out}")


# -- process -------------------------------------------------------------------


def _read_bodies(paths, preset) -> tuple[list[BodyTrajectory], bool]:
    """Link trajectories from one marker CSV or one pose CSV per link."""
    paths = list(paths)
    header, _ = io.read_table(paths[0])
    if tuple(header) == io.POSE_HEADER:
        if len(paths) != preset.model.n:
            raise ValueError(f"expected {preset.model.n} pose files, got {len(paths)}")
        bodies = [io.read_pose(p, name) for p, name in zip(paths, preset.link_names)]
        return bodies, False
    if len(paths) != 1:
        raise ValueError("marker input is a single CSV")
    t, markers = io.read_markers(paths[0])
    return trajectories_from_markers(t, markers, preset.markers), True


@main.command("process")
@config_option
@click.argument("inputs", nargs=-1, required=True, type=click.Path(dir_okay=False, exists=True))
@click.option("--static", "static_paths", multiple=True, type=click.Path(dir_okay=False, exists=True),
              help="Static capture in the same format as the inputs.")
@click.option("--cutoff-hz", type=float, default=None, help="Explicit low-pass cutoff; skips selection.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@_guarded
def cmd_process(config_path, inputs, static_paths, cutoff_hz, out_dir):
    """Turn pose or marker captures into joint-state and link-motion CSVs."""
    cfg, preset = _setup(config_path)
    model = preset.model
    bodies, from_markers = _read_bodies(inputs, preset)
    origins = pl.tracking_origins(preset.markers if from_markers else None, model.n)
    geoms = pl.joint_geometries(model, origins)
    fcfg = cfg.filter_config()
    cutoff = cutoff_hz if cutoff_hz is not None else cfg.signal.cutoff_hz
    out = Path(out_dir)

    rows, spectra = [], []
    if cutoff is not None:
        rows.append(["all", "explicit", cutoff, ""])
    else:
        if not static_paths:
            raise ValueError("cutoff unresolvable: no static capture and no explicit cutoff")
        static, _ = _read_bodies(static_paths, preset)
        try:
            cutoff, diag = pl.resolve_cutoff(bodies, model, geoms, static, cfg.signal.margin, skip=fcfg.trim())
        except signals.SignalError as exc:
            raise ValueError(f"cutoff unresolvable: {exc}") from None
        for key, (spec, floor) in diag["spectra"].items():
            rows.append([key, "selected", diag["per_channel"][key], floor])
        rows.append(["all", "selected", cutoff, ""])
    n = len(bodies[0].t)
    skip = fcfg.trim() if n - 2 * fcfg.trim() >= 8 else 0
    if n - 2 * skip >= 8:
        rate = bodies[0].sample_rate
        for j, d in enumerate(pl.relative_translations(model, bodies, geoms)):
            for a, ax in enumerate("xyz"):
                spec = signals.amplitude_spectrum(signals.SampledSeries(rate, d[skip : n - skip, a]))
                key = f"joint{j + 1}.d{ax}"
                spectra += [[key, f, m] for f, m in zip(spec.frequencies, spec.magnitudes)]

    proc = pl.process_chain(model, bodies, geoms, replace(fcfg, cutoff=cutoff))
    for name, js in zip(_joint_names(preset), proc.joints):
        io.write_joint_state(out / f"{name}_state.csv", js)
    for name, lm in zip(preset.link_names, proc.links):
        io.write_link_motion(out / f"{name}_motion.csv", lm)
    io.write_table(out / "cutoff.csv", ("channel", "source", "cutoff_hz", "noise_floor"), rows)
    io.write_table(out / "spectrum.csv", ("channel", "freq_hz", "amplitude"), spectra)
    click.echo(f"cutoff_hz={io.fmt(cutoff)}")


# -- identify / predict --------------------------------------------------------


def _read_series(paths, n: int):
    joints, links = [], []
    for p in paths:
        header, _ = io.read_table(p)
        if tuple(header) == io.JOINT_HEADER:
            joints.append(io.read_joint_state(p))
        elif tuple(header) == io.LINK_HEADER:
            links.append(io.read_link_motion(p))
        else:
            raise io.FormatError(f"{p}: neither a joint-state nor a link-motion file")
    if len(joints) != n or len(links) != n:
        raise ValueError(f"need {n} joint-state and {n} link-motion files, got {len(joints)} and {len(links)}")
    lengths = {len(s) for s in joints + links}
    if lengths == {0}:
        raise idf.Underdetermined("underdetermined: empty input")
    if len(lengths) != 1:
        raise ValueError(f"series lengths differ: {sorted(lengths)}")
    t0 = joints[0].t
    if any(not np.array_equal(s.t, t0) for s in joints + links):
        raise ValueError("series time stamps are not aligned")
    return joints, links


def _prediction_rows(problem, c, tag: str, n_links: int):
    pred, _ = idf.predict_net_torque(c, problem)
    target = problem.b.reshape(-1, 3)
    link = np.tile(np.arange(1, n_links + 1), len(pred) // n_links)
    return [[tag, t, int(k)] + list(p) + list(b) for t, k, p, b in zip(problem.t, link, pred.tolist(), target.tolist())]


PREDICTION_HEADER = ("set", "t", "link", "pred_x", "pred_y", "pred_z", "target_x", "target_y", "target_z")


def _rms(x) -> float:
    return float(np.sqrt(np.mean(np.square(x)))) if np.size(x) else float("nan")


def render_report(result, ident, names, rms_b, wrenches, provenance) -> str:
    lines = ["# joint identification report", ""]
    lines += [f"{k}={v}" for k, v in provenance]
    lines += ["", "## coefficients", "joint," + ",".join(io.COEFF_HEADER[1:])]
    for name, c in zip(names, result.joint_coefficients()):
        lines.append(name + "," + ",".join(f"{v:.6e}" for v in c.as_vector()))
    bias = result.bias_forces()
    if bias is not None:
        lines += ["", "## bias forces (N, base frame)"]
        lines += [f"{name}," + ",".join(f"{v:.6e}" for v in bf) for name, bf in zip(names, bias)]
    lines += [
        "",
        "## fit",
        f"train_samples={len(ident.train_idx)}",
        f"test_samples={len(ident.test_idx)}",
        f"train_rmse_nm={io.fmt(result.train_rmse)}",
        f"test_rmse_nm={io.fmt(result.test_rmse)}",
        f"rms_b_nm={io.fmt(rms_b)}",
        f"condition_number={io.fmt(result.condition_number)}",
        f"scaled_condition_number={io.fmt(result.scaled_condition_number)}",
        f"rank={result.rank}",
        "flags=" + (";".join(result.flags) if result.flags else "none"),
        "",
        "## wrench ranges (min,max)",
    ]
    for name, w in zip(names, wrenches):
        for key, (lo, hi) in w.ranges().items():
            lines.append(f"{name}.{key}={lo:.6e},{hi:.6e}")
    return "\n".join(lines) + "\n"


@main.command("identify")
@config_option
@click.argument("inputs", nargs=-1, type=click.Path(dir_okay=False, exists=True))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--test-fraction", type=float, default=None, help="Contiguous held-out tail fraction.")
@click.option("--bias/--no-bias", default=None, help="Estimate a constant force offset per joint.")
@_guarded
def cmd_identify(config_path, inputs, out_dir, test_fraction, bias):
    """Fit joint coefficients from joint-state and link-motion CSVs."""
    cfg, preset = _setup(config_path)
    if not inputs:
        raise idf.Underdetermined("underdetermined: empty input")
    model = preset.model
    names = _joint_names(preset)
    joints, links = _read_series(inputs, model.n)
    frac = cfg.identify.test_fraction if test_fraction is None else test_fraction
    bias = cfg.identify.bias if bias is None else bias
    ident = pl.identify_chain(model, joints, links, bias=bias, test_fraction=frac, joint_names=names)
    res = ident.result
    eqs, tr, te = pl.split_samples(model, joints, links, frac)
    full = idf.assemble(eqs, model.n, bias, names, sample_idx=np.concatenate([tr, te]))
    levers = [lk.r1 for lk in model.links]
    wrenches = idf.reconstruct_wrench_series(res.joint_coefficients(), [s.subset(tr) for s in joints], levers)

    provenance = [("tool_version", __version__), ("config_sha256", cfg.digest())]
    provenance += [(f"input_sha256[{Path(p).name}]", io.file_digest(p)) for p in inputs]
    out = Path(out_dir)
    io.atomic_write(out / "report.txt", render_report(res, ident, names, _rms(full.b), wrenches, provenance))
    io.write_table(
        out / "report.csv",
        ("index", "label", "value", "excited", "excitation"),
        [[i, lab, v, bool(e), x] for i, (lab, v, e, x) in enumerate(zip(res.labels, res.c, res.excited, res.excitation))],
    )
    io.write_coefficients(out / "coefficients.csv", names, res.joint_coefficients(), res.bias_forces())
    rows = _prediction_rows(ident.train, res.c, "train", model.n)
    if ident.test is not None:
        rows += _prediction_rows(ident.test, res.c, "test", model.n)
    io.write_table(out / "prediction.csv", PREDICTION_HEADER, rows)
    click.echo(f"train_rmse_nm={io.fmt(res.train_rmse)} test_rmse_nm={io.fmt(res.test_rmse)}")


@main.command("predict")
@config_option
@click.argument("coefficients", type=click.Path(dir_okay=False, exists=True))
@click.argument("inputs", nargs=-1, type=click.Path(dir_okay=False, exists=True))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--subset", type=click.Choice(["all", "train", "test"]), default="all", show_default=True)
@click.option("--test-fraction", type=float, default=None, help="Split used by --subset.")
@_guarded
def cmd_predict(config_path, coefficients, inputs, out_path, subset, test_fraction):
    """Predict net link torques from a coefficient file and print the RMSE."""
    cfg, preset = _setup(config_path)
    model = preset.model
    names, coeffs, bias = io.read_coefficients(coefficients)
    if len(coeffs) != model.n:
        raise ValueError(f"coefficient file has {len(coeffs)} joints, the chain has {model.n}")
    if not inputs:
        raise idf.Underdetermined("underdetermined: empty input")
    joints, links = _read_series(inputs, model.n)
    frac = cfg.identify.test_fraction if test_fraction is None else test_fraction
    eqs, tr, te = pl.split_samples(model, joints, links, frac)
    idx = {"all": np.concatenate([tr, te]), "train": tr, "test": te}[subset]
    problem = idf.assemble(eqs, model.n, bias is not None, names, sample_idx=idx)
    c = idf.pack_coefficients(coeffs, bias)
    _, rmse = idf.predict_net_torque(c, problem)
    io.write_table(out_path, PREDICTION_HEADER, _prediction_rows(problem, c, subset, model.n))
    click.echo(f"rmse_nm={io.fmt(rmse)}")


if __name__ == "__main__":
    main()
