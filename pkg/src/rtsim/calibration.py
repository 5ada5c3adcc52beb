"""Two-step pair calibration: range-bin alignment, fine delay sweep for
phase coherency, and per-channel amplitude equalization.

The sweep varies the second channel's simulated delay, measures the
angle error of a probe target and takes the arg-min.  The probe
measurement gates the range extraction at the commanded target
position (midpoint of the two channel delays), which keeps the two
range responses symmetrically weighted across the whole sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .config import C0, RadarConfig, RtsConfig, TargetSpec, target_to_rts_params
from .dsp import estimate_angle, extract_cell, synthesize_beat
from .synthesis import ChannelPair, command_gains, delay_phase_slope

#: refinement cannot go below this delay resolution
DELAY_FLOOR = 1e-15


@dataclass(frozen=True)
class SweepSpec:
    """Delay-offset sweep: interval, step and probe definition.

    probe_alpha defaults to the quarter point of the pair's sin-space
    interval.  The exact midpoint is degenerate: with the symmetric
    equal-gain command the composite peak stays at the midpoint for any
    moderate phase offset, so the angle error carries no coherency
    signal there.  gains default to the commanded pair for the probe
    set-point; probe_range_m defaults to a bin-centered range around
    60 % of the unambiguous span.
    """

    start: float
    stop: float
    step: float
    probe_alpha: float | None = None
    probe_range_m: float | None = None
    gains: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.step <= 0:
            raise ValueError("sweep step must be positive")
        if self.stop <= self.start:
            raise ValueError("sweep interval must satisfy stop > start")

    def offsets(self) -> np.ndarray:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + np.arange(n) * self.step


@dataclass(frozen=True)
class SweepResult:
    """Angle error versus delay offset, with the arg-min and the period."""

    offsets: np.ndarray
    angle_errors: np.ndarray          # signed, rad
    best_offset: float
    period_estimate: float | None
    step: float
    probe_alpha: float

    def __post_init__(self) -> None:
        if len(self.offsets) != len(self.angle_errors):
            raise ValueError("offsets and angle_errors must have equal length")

    @property
    def min_abs_error(self) -> float:
        return float(np.min(np.abs(self.angle_errors)))


def align_range_bins(pair: ChannelPair, cfg: RadarConfig) -> float:
    """Delay adjustment for ch2 that equalizes the two total delays.

    Both detected range peaks then share a bin.  Raises when the
    aligned delay would be negative (geometry that cannot be reached
    with a causal loop delay).
    """
    tau1 = 2 * pair.ch1.path_length / C0 + pair.ch1.tau_rts
    tau2 = 2 * pair.ch2.path_length / C0 + pair.ch2.tau_rts
    adjustment = tau1 - tau2
    if pair.ch2.tau_rts + adjustment < 0:
        raise ValueError("range alignment unreachable: needed delay is negative")
    return adjustment


class PairProbe:
    """Repeated pair measurements against a fixed probe target.

    Builds both channel states from one probe target (so the totals are
    range-aligned by construction), applies a delay offset to ch2, and
    estimates the composite angle with the range gate at the split
    midpoint.
    """

    def __init__(self, pair: ChannelPair, spec: SweepSpec, cfg: RadarConfig,
                 rts: RtsConfig, grid: int = 8192, refine: bool = True,
                 quantize: bool = False):
        self.pair = pair
        self.cfg = cfg
        self.rts = rts
        self.grid = grid
        self.refine = refine
        self.quantize = quantize
        s1, s2 = pair.sin_interval
        if spec.probe_alpha is None:
            self.probe_alpha = math.asin(s1 + 0.25 * (s2 - s1))
        else:
            self.probe_alpha = spec.probe_alpha
        if spec.probe_range_m is None:
            # short probe range keeps the residual-video phase drift across
            # the sweep small; stay clear of the front-end ring
            bin_idx = max(4, round(0.2 * cfg.n_samples))
            ring = max(pair.ch1.path_length, pair.ch2.path_length)
            self.probe_range = max(bin_idx * cfg.range_bin, 3.0 * ring)
        else:
            self.probe_range = spec.probe_range_m
        if spec.gains is None:
            cmd = command_gains(pair, self.probe_alpha, cfg)
            self.gains = (cmd.a1, cmd.a2)
        else:
            self.gains = spec.gains
        target = TargetSpec(range_m=self.probe_range, velocity_mps=0.0,
                            rcs_m2=1.0, angle_rad=self.probe_alpha)
        self._tau1 = target_to_rts_params(target, cfg, pair.ch1.path_length).tau_rts
        self._tau2 = target_to_rts_params(target, cfg, pair.ch2.path_length).tau_rts

    def channels(self, delta_tau: float,
                 gains: tuple[float, float] | None = None):
        g1, g2 = gains if gains is not None else self.gains
        return (
            replace(self.pair.ch1, tau_rts=self._tau1, f_d_rts=0.0, gain=g1),
            replace(self.pair.ch2, tau_rts=self._tau2 + delta_tau,
                    f_d_rts=0.0, gain=g2),
        )

    def measure_angle(self, delta_tau: float,
                      gains: tuple[float, float] | None = None) -> float:
        """Detected composite angle, rad."""
        ch1, ch2 = self.channels(delta_tau, gains)
        cube = synthesize_beat([ch1, ch2], self.cfg, self.rts,
                               quantize=self.quantize)
        gate = self.cfg.bandwidth * (2 * self.probe_range / C0 + delta_tau / 2)
        values = extract_cell(cube, gate, doppler_bin=0.0)
        angle, _ = estimate_angle(values, grid=self.grid, refine=self.refine)
        return angle

    def angle_error(self, delta_tau: float,
                    gains: tuple[float, float] | None = None) -> float:
        return self.measure_angle(delta_tau, gains) - self.probe_alpha


def _period_estimate(offsets: np.ndarray, errors: np.ndarray) -> float | None:
    """Spacing between the two dominant |error| maxima.

    The second maximum is searched outside a quarter-span exclusion zone
    around the first so both flanks of the error curve contribute one
    maximum each.
    """
    if len(offsets) < 3:
        return None
    mag = np.abs(errors)
    span = offsets[-1] - offsets[0]
    i1 = int(np.argmax(mag))
    masked = np.where(np.abs(offsets - offsets[i1]) > 0.25 * span, mag, -1.0)
    i2 = int(np.argmax(masked))
    if masked[i2] < 0:
        return None
    return float(abs(offsets[i1] - offsets[i2]))


def coherency_sweep(pair: ChannelPair, spec: SweepSpec, cfg: RadarConfig,
                    rts: RtsConfig, grid: int = 8192, refine: bool = True,
                    quantize: bool = False) -> SweepResult:
    """Sweep the ch2 delay offset and locate the angle-error minimum.

    The span must cover at least one full rotation of the relative
    phase, i.e. one period 1/(f_rts + B/2), so a minimum is guaranteed
    to be bracketed.
    """
    period = 2 * math.pi / delay_phase_slope(rts, cfg)
    if spec.stop - spec.start < period * (1 - 1e-9):
        raise ValueError(
            f"sweep span {spec.stop - spec.start:.3e} s is shorter than one "
            f"phase period {period:.3e} s"
        )
    probe = PairProbe(pair, spec, cfg, rts, grid=grid, refine=refine,
                      quantize=quantize)
    offsets = spec.offsets()
    errors = np.array([probe.angle_error(dt) for dt in offsets])
    best = float(offsets[int(np.argmin(np.abs(errors)))])
    return SweepResult(offsets=offsets, angle_errors=errors, best_offset=best,
                       period_estimate=_period_estimate(offsets, errors),
                       step=spec.step, probe_alpha=probe.probe_alpha)


def refine_sweep(prev: SweepResult, pair: ChannelPair, spec: SweepSpec,
                 cfg: RadarConfig, rts: RtsConfig, shrink: float = 5.0,
                 grid: int = 8192, refine: bool = True,
                 quantize: bool = False) -> SweepResult:
    """Re-sweep +-2 previous steps around the minimum with a finer step.

    The window is centered on the previous best offset, so the minimum
    absolute error never increases across iterations.
    """
    if shrink <= 1:
        raise ValueError("shrink factor must exceed 1")
    step = prev.step / shrink
    if step < DELAY_FLOOR:
        raise ValueError("refinement window collapsed below the delay floor")
    probe = PairProbe(pair, spec, cfg, rts, grid=grid, refine=refine,
                      quantize=quantize)
    half = 2 * prev.step
    n = int(round(half / step))
    offsets = prev.best_offset + np.arange(-n, n + 1) * step
    errors = np.array([probe.angle_error(dt) for dt in offsets])
    best = float(offsets[int(np.argmin(np.abs(errors)))])
    return SweepResult(offsets=offsets, angle_errors=errors, best_offset=best,
                       period_estimate=prev.period_estimate, step=step,
                       probe_alpha=probe.probe_alpha)


def amplitude_cal(channels, cfg: RadarConfig, rts: RtsConfig,
                  grid: int = 8192, quantize: bool = False) -> np.ndarray:
    """Gain corrections equalizing single-channel peak magnitudes.

    Activates one channel at a time (with its current delay state),
    measures the beamformed peak magnitude at its own range gate and
    returns per-channel factors normalizing all magnitudes to the mean.
    """
    mags = []
    for ch in channels:
        cube = synthesize_beat([replace(ch, active=True)], cfg, rts,
                               quantize=quantize)
        gate = cfg.bandwidth * (2 * ch.path_length / C0 + ch.tau_rts)
        values = extract_cell(cube, gate, doppler_bin=0.0)
        if not np.any(np.abs(values) > 0):
            raise ValueError("a channel produced zero measured power")
        _, peak = estimate_angle(values, grid=grid)
        mags.append(peak.magnitude)
    mags = np.asarray(mags)
    if np.any(mags <= 0):
        raise ValueError("a channel produced zero measured power")
    return mags.mean() / mags


@dataclass(frozen=True)
class CalibrationResult:
    """Outcome of the full pair calibration."""

    delta_tau: float
    corrections: tuple[float, float]
    sweep: SweepResult
    refinements: tuple[SweepResult, ...] = ()

    @property
    def final_error(self) -> float:
        last = self.refinements[-1] if self.refinements else self.sweep
        return last.min_abs_error


def calibrate_pair(pair: ChannelPair, spec: SweepSpec, cfg: RadarConfig,
                   rts: RtsConfig, refine_iterations: int = 2,
                   shrink: float = 5.0, grid: int = 8192,
                   refine: bool = True, quantize: bool = False) -> CalibrationResult:
    """Amplitude-equalize the pair, then sweep and refine the delay offset."""
    probe = PairProbe(pair, spec, cfg, rts, grid=grid, quantize=quantize)
    corrections = amplitude_cal(probe.channels(0.0, gains=(1.0, 1.0)), cfg, rts,
                                grid=grid, quantize=quantize)
    balanced = SweepSpec(start=spec.start, stop=spec.stop, step=spec.step,
                         probe_alpha=probe.probe_alpha,
                         probe_range_m=probe.probe_range,
                         gains=(probe.gains[0] * corrections[0],
                                probe.gains[1] * corrections[1]))
    sweep = coherency_sweep(pair, balanced, cfg, rts, grid=grid,
                            refine=refine, quantize=quantize)
    refinements = []
    last = sweep
    for _ in range(refine_iterations):
        last = refine_sweep(last, pair, balanced, cfg, rts, shrink=shrink,
                            grid=grid, refine=refine, quantize=quantize)
        refinements.append(last)
    return CalibrationResult(delta_tau=last.best_offset,
                             corrections=(float(corrections[0]),
                                          float(corrections[1])),
                             sweep=sweep, refinements=tuple(refinements))
