"""Radar-side processing: beat-cube synthesis, range/Doppler DFTs,
beamforming and peak extraction.

Cube layout is [sample, chirp, antenna] throughout.  All transforms are
rectangular-windowed; the closed forms below assume that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chain import quantize_delay, return_delay
from .config import C0, FrontEndChannel, RadarConfig, RtsConfig, virtual_array

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class NoiseSpec:
    """Complex white Gaussian noise: per-sample variance and generator seed."""

    power: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.power < 0:
            raise ValueError("noise power must be non-negative")


@dataclass(frozen=True)
class BeatCube:
    """Complex beat samples [n_samples, n_chirps, n_antennas]."""

    data: np.ndarray
    cfg: RadarConfig
    provenance: tuple = ()

    def __post_init__(self) -> None:
        expected = (self.cfg.n_samples, self.cfg.n_chirps, self.cfg.n_antennas)
        if self.data.shape != expected:
            raise ValueError(f"cube shape {self.data.shape} != {expected}")
        if not np.all(np.isfinite(self.data.view(float))):
            raise ValueError("cube contains non-finite values")


@dataclass(frozen=True)
class RangeSpectrum:
    """Range DFT per chirp and antenna; bin axis is the first dimension."""

    data: np.ndarray
    cfg: RadarConfig
    pad: int = 1

    @property
    def n_bins(self) -> int:
        return self.data.shape[0]

    def range_axis(self) -> np.ndarray:
        """Range of each bin, m (one un-padded bin is c0/(2B))."""
        return np.arange(self.n_bins) / self.pad * self.cfg.range_bin

    def bin_to_range(self, f_r) -> np.ndarray:
        return np.asarray(f_r, dtype=float) / self.pad * self.cfg.range_bin


@dataclass(frozen=True)
class RangeDopplerMap:
    """Range-Doppler transform per antenna, Doppler axis fftshifted."""

    data: np.ndarray
    cfg: RadarConfig
    pad: int = 1

    def range_axis(self) -> np.ndarray:
        return np.arange(self.data.shape[0]) / self.pad * self.cfg.range_bin

    def velocity_axis(self) -> np.ndarray:
        n = self.cfg.n_chirps
        bins = np.arange(n) - n // 2
        return bins * self.cfg.velocity_bin

    def magnitude(self) -> np.ndarray:
        """Antenna-integrated magnitude [range, doppler]."""
        return np.abs(self.data).sum(axis=2)


@dataclass(frozen=True)
class AngleSpectrum:
    """Beamformed response on a grid uniform in sin(alpha)."""

    data: np.ndarray
    sin_grid: np.ndarray

    def angle_axis_deg(self) -> np.ndarray:
        return np.degrees(np.arcsin(self.sin_grid))


@dataclass(frozen=True)
class Peak:
    """Peak location in axis units, with interpolated magnitude and phase."""

    location: float
    magnitude: float
    phase: float
    index: int


def synthesize_beat(channels: Sequence[FrontEndChannel], cfg: RadarConfig,
                    rts: RtsConfig, noise: NoiseSpec | None = None,
                    quantize: bool = False,
                    provenance: tuple = ()) -> BeatCube:
    """Superpose the beat contributions of all active channel echoes.

    Each entry contributes gain * exp(j*phi_b) with the beat phase of the
    full loop, the per-element return delay for its arrival angle, and a
    slow-time Doppler rotation 2*pi*f_d_rts*T per chirp.  Echoes from the
    same physical front end are passed as repeated channel entries.
    """
    active = [ch for ch in channels if ch.active]
    if not active:
        raise ValueError("at least one active channel is required")
    f_rts = rts.f_rts(cfg)
    b_over_t = cfg.bandwidth / cfg.chirp_time
    t = (np.arange(cfg.n_samples) / cfg.sample_rate)[:, None, None]
    chirp_idx = np.arange(cfg.n_chirps)[None, :, None]
    n_a = virtual_array(cfg)[None, None, :]

    data = np.zeros((cfg.n_samples, cfg.n_chirps, cfg.n_antennas),
                    dtype=complex)
    for ch in active:
        tau_rts = float(quantize_delay(ch.tau_rts)) if quantize else ch.tau_rts
        tau_tx = ch.path_length / C0
        tau_rx = return_delay(ch.theta, n_a, ch.path_length, cfg,
                              near_field=rts.near_field)
        tau_c = tau_tx + tau_rx
        tau = tau_c + tau_rts
        phase = TWO_PI * (cfg.f_c * tau_c + f_rts * tau_rts
                          + b_over_t * (tau * t - tau ** 2 / 2))
        if ch.f_d_rts != 0.0:
            phase = phase + TWO_PI * ch.f_d_rts * (cfg.chirp_time * chirp_idx + t)
        data += ch.gain * np.exp(1j * phase)

    if noise is not None and noise.power > 0:
        rng = np.random.default_rng(noise.seed)
        scale = math.sqrt(noise.power / 2)
        data = data + scale * (rng.standard_normal(data.shape)
                               + 1j * rng.standard_normal(data.shape))
    return BeatCube(data=data, cfg=cfg, provenance=tuple(provenance))


def empty_cube(cfg: RadarConfig, noise: NoiseSpec | None = None) -> BeatCube:
    """A frame with no echoes (optionally noise only)."""
    data = np.zeros((cfg.n_samples, cfg.n_chirps, cfg.n_antennas),
                    dtype=complex)
    if noise is not None and noise.power > 0:
        rng = np.random.default_rng(noise.seed)
        scale = math.sqrt(noise.power / 2)
        data = data + scale * (rng.standard_normal(data.shape)
                               + 1j * rng.standard_normal(data.shape))
    return BeatCube(data=data, cfg=cfg)


def range_dft(cube: BeatCube, pad: int = 1) -> RangeSpectrum:
    """Forward DFT across fast time per (chirp, antenna)."""
    if pad < 1:
        raise ValueError("pad factor must be >= 1")
    data = np.fft.fft(cube.data, n=cube.cfg.n_samples * pad, axis=0)
    return RangeSpectrum(data=data, cfg=cube.cfg, pad=pad)


def doppler_dft(spec: RangeSpectrum) -> RangeDopplerMap:
    """DFT across chirps per (range bin, antenna), fftshifted in Doppler."""
    if spec.cfg.n_chirps < 2:
        raise ValueError("Doppler processing needs at least two chirps")
    data = np.fft.fft(spec.data, axis=1)
    data = np.fft.fftshift(data, axes=1)
    return RangeDopplerMap(data=data, cfg=spec.cfg, pad=spec.pad)


def dirichlet_kernel(u, n: int):
    """Exact N-point DFT response sum_{k=0}^{n-1} exp(j*2*pi*u*k/n).

    Equals exactly n at u = 0 (mod n); the paper approximates its
    magnitude by a sinc.
    """
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    out = np.empty(u.shape, dtype=complex)
    frac = np.remainder(u, n)
    aligned = np.isclose(frac, 0.0, atol=1e-9) | np.isclose(frac, float(n), atol=1e-9)
    us = u[~aligned]
    out[~aligned] = (np.exp(1j * np.pi * us * (n - 1) / n)
                     * np.sin(np.pi * us) / np.sin(np.pi * us / n))
    out[aligned] = float(n)
    return out[0] if scalar else out


def range_closed_form(tau_c: float, tau_rts: float, f_r: float,
                      cfg: RadarConfig, rts: RtsConfig,
                      amplitude: float = 1.0, kind: str = "dirichlet"):
    """Closed-form range-DFT value at bin f_r for a single echo.

    kind "dirichlet" evaluates the exact geometric-series sum and
    matches range_dft to machine precision.  kind "sinc" is the
    small-argument approximation A*N_s*sinc(B*tau - f_r) with the
    simplified peak phase 2*pi*(f_c*tau_c + f_rts*tau_rts + (B*tau-f_r)/2);
    it is an analysis oracle, accurate to about a percent in magnitude
    near the peak, and its phase omits the residual video term
    -pi*B*tau^2/T.
    """
    f_rts = rts.f_rts(cfg)
    tau = tau_c + tau_rts
    u = cfg.bandwidth * tau - f_r
    if kind == "dirichlet":
        const = TWO_PI * (cfg.f_c * tau_c + f_rts * tau_rts) \
            - np.pi * cfg.bandwidth * tau ** 2 / cfg.chirp_time
        return amplitude * np.exp(1j * const) * dirichlet_kernel(u, cfg.n_samples)
    if kind == "sinc":
        phase = TWO_PI * (cfg.f_c * tau_c + f_rts * tau_rts + u / 2)
        return amplitude * cfg.n_samples * np.sinc(u) * np.exp(1j * phase)
    raise ValueError(f"unknown closed-form kind {kind!r}")


def sin_space_grid(size: int = 8192) -> np.ndarray:
    """Uniform grid in sin(alpha) covering [-90, 90] degrees."""
    if size < 2:
        raise ValueError("grid must contain at least two points")
    return np.linspace(-1.0, 1.0, size)


def beamform(values: np.ndarray, sin_grid: np.ndarray | None = None,
             grid: int = 8192) -> AngleSpectrum:
    """Beamform per-antenna values onto a sin(alpha) grid.

    The steering phases conjugate-match the element phase progression
    pi*sin(theta)*n_a of an arrival from theta, and the global factor
    exp(j*pi*sin(alpha)*(N_A-1)/2) re-centers the element indices so the
    result equals the symmetric-index sum of the analytic model.
    """
    values = np.asarray(values)
    if sin_grid is None:
        sin_grid = sin_space_grid(grid)
    if sin_grid.size == 0:
        raise ValueError("empty angle grid")
    n = values.shape[0]
    n_a = np.arange(n)
    steering = np.exp(-1j * np.pi * sin_grid[:, None] * n_a[None, :])
    centered = np.exp(1j * np.pi * sin_grid * (n - 1) / 2)
    return AngleSpectrum(data=(steering @ values) * centered, sin_grid=sin_grid)


def find_peak(values: np.ndarray, axis: np.ndarray,
              refine: bool = True) -> Peak:
    """Global magnitude peak with optional 3-point quadratic refinement.

    The refinement interpolates in the axis variable and never moves the
    location by more than half a step.
    """
    mag = np.abs(np.asarray(values))
    if mag.size == 0 or not np.any(mag > 0):
        raise ValueError("no detectable peak in an all-zero spectrum")
    i = int(np.argmax(mag))
    location = float(axis[i])
    magnitude = float(mag[i])
    if refine and 0 < i < mag.size - 1:
        ym, y0, yp = mag[i - 1], mag[i], mag[i + 1]
        den = ym - 2 * y0 + yp
        if den != 0:
            delta = 0.5 * (ym - yp) / den
            delta = float(np.clip(delta, -0.5, 0.5))
            step = float(axis[min(i + 1, mag.size - 1)] - axis[i]) if i + 1 < mag.size \
                else float(axis[i] - axis[i - 1])
            location = float(axis[i]) + delta * step
            magnitude = float(y0 - 0.25 * (ym - yp) * delta)
    return Peak(location=location, magnitude=magnitude,
                phase=float(np.angle(values[i])), index=i)


def _refine_fractional(mag: np.ndarray, i: int, wrap: bool = False) -> float:
    """3-point parabola vertex around index i, in fractional bins."""
    n = mag.size
    if wrap:
        ym, y0, yp = mag[(i - 1) % n], mag[i], mag[(i + 1) % n]
    else:
        if i <= 0 or i >= n - 1:
            return float(i)
        ym, y0, yp = mag[i - 1], mag[i], mag[i + 1]
    den = ym - 2 * y0 + yp
    if den == 0:
        return float(i)
    return i + float(np.clip(0.5 * (ym - yp) / den, -0.5, 0.5))


def extract_cell(cube: BeatCube, range_bin: float,
                 doppler_bin: float | None = None,
                 chirp: int = 0) -> np.ndarray:
    """Per-antenna complex values at a fractional (range, Doppler) cell.

    Evaluates the DTFT at the exact fractional bin instead of snapping to
    the FFT grid, which keeps the two superposed channel responses
    symmetrically weighted when their range peaks are split by the
    coherency delay offset.  range_bin is in un-padded bin units;
    doppler_bin is in (signed) Doppler bin units, or None to use a
    single chirp.
    """
    n_s = cube.cfg.n_samples
    steer_r = np.exp(-2j * np.pi * range_bin * np.arange(n_s) / n_s)
    if doppler_bin is None:
        return steer_r @ cube.data[:, chirp, :]
    n_c = cube.cfg.n_chirps
    steer_d = np.exp(-2j * np.pi * doppler_bin * np.arange(n_c) / n_c)
    return np.einsum("s,c,sca->a", steer_r, steer_d, cube.data)


def estimate_angle(values: np.ndarray, grid: int = 8192,
                   refine: bool = True) -> tuple[float, Peak]:
    """Angle of arrival from per-antenna values: beamform plus peak pick.

    Returns (angle_rad, peak); the peak location is in sin units.
    """
    spectrum = beamform(values, grid=grid)
    peak = find_peak(spectrum.data, spectrum.sin_grid, refine=refine)
    return float(np.arcsin(np.clip(peak.location, -1.0, 1.0))), peak


@dataclass(frozen=True)
class CellDetection:
    """A detected range-Doppler cell in fractional bin units."""

    range_bin: float
    doppler_bin: float        # signed, fftshift-free
    magnitude: float


def detect_cells(rd: RangeDopplerMap, count: int,
                 guard: tuple[int, int] = (4, 4)) -> list[CellDetection]:
    """Extract the `count` strongest range-Doppler peaks.

    Iterative masked argmax on the antenna-integrated un-shifted map,
    with per-axis quadratic refinement (Doppler refinement wraps).
    """
    if count <= 0:
        return []
    mag = np.fft.ifftshift(np.abs(rd.data).sum(axis=2), axes=1)
    if not np.any(mag > 0):
        raise ValueError("no detectable peak in an all-zero map")
    n_r, n_d = mag.shape
    work = mag.copy()
    out: list[CellDetection] = []
    for _ in range(count):
        i, j = np.unravel_index(int(np.argmax(work)), work.shape)
        if work[i, j] <= 0:
            break
        ii = _refine_fractional(mag[:, j], int(i))
        jj = _refine_fractional(mag[i, :], int(j), wrap=True)
        if jj > n_d / 2:
            jj -= n_d
        out.append(CellDetection(range_bin=float(ii) / rd.pad,
                                 doppler_bin=float(jj),
                                 magnitude=float(mag[i, j])))
        rows = np.arange(max(0, i - guard[0]), min(n_r, i + guard[0] + 1))
        cols = np.arange(j - guard[1], j + guard[1] + 1) % n_d
        work[np.ix_(rows, cols)] = 0.0
    return out
