"""Scenario orchestration: builds frames from a validated scenario,
calibrates channel pairs, runs the detection pipeline and renders the
file artifacts.

Everything here is a deterministic function of (scenario, options).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import io
from .calibration import (CalibrationResult, PairProbe, SweepSpec,
                          calibrate_pair)
from .config import (FrontEndChannel, RadarConfig, RtsConfig, TargetSpec,
                     target_to_rts_params)
from .dsp import (BeatCube, NoiseSpec, RangeDopplerMap, RangeSpectrum,
                  detect_cells, doppler_dft, empty_cube, estimate_angle,
                  extract_cell, range_dft, synthesize_beat)
from .schema import RunOptions, ScenarioModel
from .synthesis import (ChannelPair, ConstraintReport, check_constraints,
                        command_gains)


@dataclass(frozen=True)
class Detection:
    """One matched target detection with its errors and flag."""

    target_id: int
    range_m: float
    velocity_mps: float
    angle_deg: float
    range_err_m: float
    velocity_err_mps: float
    angle_err_deg: float
    flagged: bool


@dataclass(frozen=True)
class PairState:
    """Calibration outcome applied to a channel pair."""

    delta_tau: float
    corrections: tuple[float, float]
    result: CalibrationResult | None = None


@dataclass
class Frame:
    """A synthesized frame with its processing products."""

    cfg: RadarConfig
    rts: RtsConfig
    cube: BeatCube
    spectrum: RangeSpectrum
    rd_map: RangeDopplerMap
    calibrations: dict[tuple[int, int], PairState]
    constraints: list[tuple[int, ConstraintReport]]
    warnings: list[str]


@dataclass
class SimulateResult:
    detections: list[Detection]
    constraints: list[tuple[int, ConstraintReport]]
    flagged: bool
    files: dict[str, str]
    warnings: list[str] = field(default_factory=list)


@dataclass
class CalibrateResult:
    best_offset_s: float
    period_estimate_s: float | None
    min_abs_error_deg: float
    probe_alpha_deg: float
    files: dict[str, str]


@dataclass
class LinearityResult:
    rows: list[tuple[float, float, float, float, float]]
    max_abs_error_deg: float
    files: dict[str, str]


def _sweep_spec(model: ScenarioModel) -> SweepSpec:
    cal = model.calibration
    if cal is None:
        raise ValueError("scenario has no calibration section")
    probe_alpha = None if cal.probe_angle_deg is None \
        else math.radians(cal.probe_angle_deg)
    return SweepSpec(start=cal.sweep_start_s, stop=cal.sweep_stop_s,
                     step=cal.sweep_step_s, probe_alpha=probe_alpha,
                     probe_range_m=cal.probe_range_m)


def _probe_config(cfg: RadarConfig, model: ScenarioModel) -> RadarConfig:
    """Reduced-chirp config for calibration probes (static target)."""
    cal = model.calibration
    n = cal.probe_n_chirps if cal and cal.probe_n_chirps else min(cfg.n_chirps, 8)
    return cfg.with_chirps(min(cfg.n_chirps, n))


def _calibrate(pair: ChannelPair, model: ScenarioModel, cfg: RadarConfig,
               rts: RtsConfig, options: RunOptions) -> PairState:
    if model.calibration is None:
        return PairState(delta_tau=0.0, corrections=(1.0, 1.0))
    result = calibrate_pair(pair, _sweep_spec(model), _probe_config(cfg, model),
                            rts, refine_iterations=model.calibration.refine_iterations,
                            shrink=model.calibration.shrink, grid=options.grid,
                            refine=options.refine,
                            quantize=options.quantize_delay)
    return PairState(delta_tau=result.delta_tau,
                     corrections=result.corrections, result=result)


def _resolve_pair(model: ScenarioModel, channels: tuple[FrontEndChannel, ...],
                  indices: list[int]) -> tuple[tuple[int, int], ChannelPair]:
    i, j = sorted(indices)
    return (i, j), ChannelPair(channels[i], channels[j])


def build_frame(model: ScenarioModel, options: RunOptions) -> Frame:
    """Synthesize one frame with all targets applied to their channels."""
    cfg = model.radar.to_config()
    rts = model.rts.to_config()
    channels = rts.channels
    warnings: list[str] = []
    if not cfg.half_wavelength_spacing:
        warnings.append(
            f"element spacing {cfg.d:.6e} m differs from lambda/2 at the "
            f"sweep lower bound ({cfg.wavelength / 2:.6e} m)")

    calibrations: dict[tuple[int, int], PairState] = {}
    echoes: list[FrontEndChannel] = []
    provenance: list[tuple[int, int]] = []
    constraints: list[tuple[int, ConstraintReport]] = []

    for t in model.targets:
        spec = TargetSpec(range_m=t.range_m, velocity_mps=t.velocity_mps,
                          rcs_m2=t.rcs_m2, angle_rad=math.radians(t.angle_deg))
        if len(t.channels) == 1:
            q = t.channels[0]
            ch = channels[q]
            if abs(math.sin(spec.angle_rad) - math.sin(ch.theta)) > 1e-6:
                raise ValueError(
                    f"target {t.id}: single-channel angle {t.angle_deg} deg "
                    f"must equal the channel angle {math.degrees(ch.theta):.3f} deg")
            p = target_to_rts_params(spec, cfg, ch.path_length)
            echoes.append(replace(ch, tau_rts=p.tau_rts, f_d_rts=p.f_d_rts,
                                  gain=p.amplitude * ch.gain))
            provenance.append((q, t.id))
            continue

        key, pair = _resolve_pair(model, channels, t.channels)
        if key not in calibrations:
            calibrations[key] = _calibrate(pair, model, cfg, rts, options)
        cal = calibrations[key]
        cmd = command_gains(pair, spec.angle_rad, cfg, delta_tau=cal.delta_tau)
        p1 = target_to_rts_params(spec, cfg, pair.ch1.path_length)
        p2 = target_to_rts_params(spec, cfg, pair.ch2.path_length)
        echo1 = replace(pair.ch1, tau_rts=p1.tau_rts, f_d_rts=p1.f_d_rts,
                        gain=p1.amplitude * cmd.a1 * cal.corrections[0]
                        * pair.ch1.gain)
        echo2 = replace(pair.ch2, tau_rts=p2.tau_rts + cal.delta_tau,
                        f_d_rts=p2.f_d_rts,
                        gain=p2.amplitude * cmd.a2 * cal.corrections[1]
                        * pair.ch2.gain)
        echoes.extend((echo1, echo2))
        provenance.extend(((key[0], t.id), (key[1], t.id)))
        constraints.append((t.id, check_constraints(
            ChannelPair(echo1, echo2), cfg, rts)))

    for e in model.extra_echoes:
        ch = channels[e.channel]
        spec = TargetSpec(range_m=e.range_m, velocity_mps=e.velocity_mps,
                          rcs_m2=1.0, angle_rad=ch.theta)
        p = target_to_rts_params(spec, cfg, ch.path_length)
        echoes.append(replace(ch, tau_rts=p.tau_rts, f_d_rts=p.f_d_rts,
                              gain=e.amplitude))
        provenance.append((e.channel, -1))

    noise = None
    if model.noise is not None:
        seed = options.seed if options.seed is not None else model.noise.seed
        noise = NoiseSpec(power=model.noise.power, seed=seed)
    if echoes:
        cube = synthesize_beat(echoes, cfg, rts, noise=noise,
                               quantize=options.quantize_delay,
                               provenance=tuple(provenance))
    else:
        cube = empty_cube(cfg, noise)
    spectrum = range_dft(cube)
    rd = doppler_dft(spectrum)
    return Frame(cfg=cfg, rts=rts, cube=cube, spectrum=spectrum, rd_map=rd,
                 calibrations=calibrations, constraints=constraints,
                 warnings=warnings)


def _match_detections(model: ScenarioModel, frame: Frame,
                      options: RunOptions) -> list[Detection]:
    """Extract as many peaks as targets and pair them greedily in bin units."""
    cfg = frame.cfg
    if not model.targets:
        return []
    cells = detect_cells(frame.rd_map, len(model.targets))
    raw = []
    for cell in cells:
        values = extract_cell(frame.cube, cell.range_bin, cell.doppler_bin)
        angle, _ = estimate_angle(values, grid=options.grid,
                                  refine=options.refine)
        raw.append((cell.range_bin * cfg.range_bin,
                    cell.doppler_bin * cfg.velocity_bin,
                    math.degrees(angle)))

    tol_r = model.tolerances.range_m if model.tolerances.range_m is not None \
        else cfg.range_bin
    tol_v = model.tolerances.velocity_mps \
        if model.tolerances.velocity_mps is not None else cfg.velocity_bin
    tol_a = model.tolerances.angle_deg

    pairs = []
    for ti, t in enumerate(model.targets):
        for di, (r, v, a) in enumerate(raw):
            cost = abs(r - t.range_m) / cfg.range_bin \
                + abs(v - t.velocity_mps) / cfg.velocity_bin
            pairs.append((cost, ti, di))
    pairs.sort()
    taken_t: set[int] = set()
    taken_d: set[int] = set()
    assignment: dict[int, int] = {}
    for cost, ti, di in pairs:
        if ti in taken_t or di in taken_d:
            continue
        assignment[ti] = di
        taken_t.add(ti)
        taken_d.add(di)

    out = []
    for ti, t in enumerate(model.targets):
        di = assignment.get(ti)
        if di is None:
            out.append(Detection(target_id=t.id, range_m=math.nan,
                                 velocity_mps=math.nan, angle_deg=math.nan,
                                 range_err_m=math.nan, velocity_err_mps=math.nan,
                                 angle_err_deg=math.nan, flagged=True))
            continue
        r, v, a = raw[di]
        err_r, err_v, err_a = r - t.range_m, v - t.velocity_mps, a - t.angle_deg
        flagged = (abs(err_r) > tol_r or abs(err_v) > tol_v
                   or abs(err_a) > tol_a)
        out.append(Detection(target_id=t.id, range_m=r, velocity_mps=v,
                             angle_deg=a, range_err_m=err_r,
                             velocity_err_mps=err_v, angle_err_deg=err_a,
                             flagged=flagged))
    out.sort(key=lambda d: d.target_id)
    return out


def _render_rd_map(frame: Frame) -> str:
    """Dense antenna-integrated magnitude map in dB, range-major rows."""
    mag = frame.rd_map.magnitude()
    db = 20.0 * np.log10(mag + 1e-30)
    ranges = frame.rd_map.range_axis()
    velocities = frame.rd_map.velocity_axis()
    rows = []
    for i, r in enumerate(ranges):
        r_s = io.fmt(float(r), 4)
        for j, v in enumerate(velocities):
            rows.append((r_s, io.fmt(float(v), 4), io.fmt(float(db[i, j]), 3)))
    return io.render_csv(["range_m", "velocity_mps", "magnitude_db"], rows)


def _render_detections(detections: list[Detection]) -> str:
    rows = []
    for det in detections:
        rows.append((str(det.target_id), io.fmt(det.range_m, 4),
                     io.fmt(det.velocity_mps, 4), io.fmt(det.angle_deg, 3),
                     io.fmt(det.range_err_m, 4), io.fmt(det.velocity_err_mps, 4),
                     io.fmt(det.angle_err_deg, 3)))
    return io.render_csv(["target_id", "range_m", "velocity_mps", "angle_deg",
                          "range_err_m", "velocity_err_mps", "angle_err_deg"],
                         rows)


def run_simulate(model: ScenarioModel, options: RunOptions) -> SimulateResult:
    """Full multi-target frame: synthesis, detection and reports."""
    frame = build_frame(model, options)
    detections = _match_detections(model, frame, options)
    flagged = any(d.flagged for d in detections) \
        or any(not rep.ok for _, rep in frame.constraints)
    files = {
        "rd_map.csv": _render_rd_map(frame),
        "detections.csv": _render_detections(detections),
    }
    return SimulateResult(detections=detections, constraints=frame.constraints,
                          flagged=flagged, files=files,
                          warnings=frame.warnings)


def _linearity_pair(model: ScenarioModel):
    cfg = model.radar.to_config()
    rts = model.rts.to_config()
    lin = model.linearity
    indices = lin.pair if lin is not None else [0, 1]
    if len(rts.channels) < 2:
        raise ValueError("linearity and calibration need at least two channels")
    i, j = sorted(indices)
    return cfg, rts, (i, j), ChannelPair(rts.channels[i], rts.channels[j])


def run_calibration(model: ScenarioModel, options: RunOptions) -> CalibrateResult:
    """Coherency sweep for the configured pair, plus the sweep CSV."""
    cfg, rts, _, pair = _linearity_pair(model)
    if model.calibration is None:
        raise ValueError("scenario has no calibration section")
    result = calibrate_pair(pair, _sweep_spec(model), _probe_config(cfg, model),
                            rts,
                            refine_iterations=model.calibration.refine_iterations,
                            shrink=model.calibration.shrink,
                            grid=options.grid, refine=options.refine,
                            quantize=options.quantize_delay)
    rows = [(io.fmt_sci(float(dt)), io.fmt(math.degrees(float(err)), 6))
            for dt, err in zip(result.sweep.offsets, result.sweep.angle_errors)]
    files = {"calibration.csv": io.render_csv(
        ["delta_tau_s", "angle_error_deg"], rows)}
    period = result.sweep.period_estimate
    return CalibrateResult(
        best_offset_s=result.delta_tau,
        period_estimate_s=period,
        min_abs_error_deg=math.degrees(result.final_error),
        probe_alpha_deg=math.degrees(result.sweep.probe_alpha),
        files=files)


def run_linearity(model: ScenarioModel, options: RunOptions) -> LinearityResult:
    """Calibrate the pair, then steer through the set-point list."""
    cfg, rts, _, pair = _linearity_pair(model)
    probe_cfg = _probe_config(cfg, model) if model.calibration else cfg.with_chirps(min(cfg.n_chirps, 8))
    if model.calibration is not None:
        cal = calibrate_pair(pair, _sweep_spec(model), probe_cfg, rts,
                             refine_iterations=model.calibration.refine_iterations,
                             shrink=model.calibration.shrink,
                             grid=options.grid, refine=options.refine,
                             quantize=options.quantize_delay)
        delta_tau, corrections = cal.delta_tau, cal.corrections
        probe_spec = _sweep_spec(model)
    else:
        delta_tau, corrections = 0.0, (1.0, 1.0)
        probe_spec = SweepSpec(start=-1e-9, stop=1e-9, step=1e-9)

    lin = model.linearity
    s1, s2 = pair.sin_interval
    if lin is not None and lin.set_points_deg is not None:
        points = [math.radians(a) for a in lin.set_points_deg]
    else:
        start = math.radians(lin.start_deg) if lin and lin.start_deg is not None \
            else pair.ch1.theta
        stop = math.radians(lin.stop_deg) if lin and lin.stop_deg is not None \
            else pair.ch2.theta
        count = lin.count if lin is not None else 45
        points = list(np.linspace(start, stop, count))
    for a in points:
        if not (s1 - 1e-9 <= math.sin(a) <= s2 + 1e-9):
            raise ValueError(
                f"set-point {math.degrees(a):.3f} deg outside the pair interval")

    probe = PairProbe(pair, probe_spec, probe_cfg, rts, grid=options.grid,
                      refine=options.refine, quantize=options.quantize_delay)
    rows = []
    worst = 0.0
    for alpha in points:
        cmd = command_gains(pair, alpha, cfg, delta_tau=delta_tau)
        measured = probe.measure_angle(
            delta_tau, gains=(cmd.a1 * corrections[0], cmd.a2 * corrections[1]))
        err = math.degrees(measured - alpha)
        worst = max(worst, abs(err))
        rows.append((math.degrees(alpha), math.degrees(measured), err,
                     cmd.a1, cmd.a2))
    csv_rows = [(io.fmt(r[0], 6), io.fmt(r[1], 6), io.fmt(r[2], 6),
                 io.fmt(r[3], 6), io.fmt(r[4], 6)) for r in rows]
    files = {"linearity.csv": io.render_csv(
        ["alpha_set_deg", "alpha_meas_deg", "alpha_err_deg", "gain1", "gain2"],
        csv_rows)}
    return LinearityResult(rows=rows, max_abs_error_deg=worst, files=files)


def dump_spectrum(model: ScenarioModel, options: RunOptions) -> bytes:
    """Binary dump of the frame's range spectrum."""
    frame = build_frame(model, options)
    return io.encode_spectrum(frame.spectrum.data)
