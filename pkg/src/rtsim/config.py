"""Shared physical parameters, target parameter mapping and array geometry.

All angles are radians, all times seconds, all frequencies Hz unless a
field name says otherwise.  Value objects are frozen dataclasses; every
function here is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

C0 = 299792458.0  # speed of light in vacuum, m/s


@dataclass(frozen=True)
class RadarConfig:
    """Waveform and virtual-array parameters of the radar under test.

    Attributes:
        f_c: lower bound of the frequency sweep, Hz
        bandwidth: swept bandwidth B, Hz
        chirp_time: chirp period T, s
        sample_rate: ADC sampling rate f_s, Hz
        n_samples: samples per chirp N_s (must equal round(T * f_s))
        n_chirps: chirps per frame
        n_tx, n_rx: physical antenna counts
        spacing: virtual-array element spacing d, m.  None selects
            half a wavelength at f_c.
    """

    f_c: float
    bandwidth: float
    chirp_time: float
    sample_rate: float
    n_samples: int
    n_chirps: int
    n_tx: int = 1
    n_rx: int = 1
    spacing: float | None = None

    def __post_init__(self) -> None:
        for name in ("f_c", "bandwidth", "chirp_time", "sample_rate"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.n_samples < 1 or self.n_chirps < 1:
            raise ValueError("n_samples and n_chirps must be >= 1")
        if self.n_tx < 1 or self.n_rx < 1:
            raise ValueError("antenna counts must be >= 1")
        expected = round(self.chirp_time * self.sample_rate)
        if expected != self.n_samples:
            raise ValueError(
                f"n_samples={self.n_samples} but round(T*f_s)={expected}; "
                "the range-DFT bin scale assumes the full chirp is sampled"
            )
        if self.spacing is not None and self.spacing <= 0:
            raise ValueError("spacing must be positive")

    @classmethod
    def from_chirp(cls, f_c, bandwidth, chirp_time, n_samples, n_chirps,
                   n_tx=1, n_rx=1, spacing=None) -> "RadarConfig":
        """Build a config with the sample rate derived from T and N_s."""
        return cls(f_c=f_c, bandwidth=bandwidth, chirp_time=chirp_time,
                   sample_rate=n_samples / chirp_time, n_samples=n_samples,
                   n_chirps=n_chirps, n_tx=n_tx, n_rx=n_rx, spacing=spacing)

    @property
    def wavelength(self) -> float:
        return C0 / self.f_c

    @property
    def d(self) -> float:
        """Element spacing in meters (default lambda/2 at f_c)."""
        return self.spacing if self.spacing is not None else self.wavelength / 2

    @property
    def n_antennas(self) -> int:
        return self.n_tx * self.n_rx

    @property
    def half_wavelength_spacing(self) -> bool:
        """True when d equals lambda/2 at f_c; other spacings are allowed but flagged."""
        return abs(self.d - self.wavelength / 2) <= 1e-9 * self.wavelength

    @property
    def range_bin(self) -> float:
        """Width of one un-padded range bin, m."""
        return C0 / (2 * self.bandwidth)

    @property
    def doppler_bin_hz(self) -> float:
        return 1.0 / (self.n_chirps * self.chirp_time)

    @property
    def velocity_bin(self) -> float:
        """Width of one Doppler bin, m/s."""
        return self.doppler_bin_hz * C0 / (2 * self.f_c)

    def with_chirps(self, n_chirps: int) -> "RadarConfig":
        return replace(self, n_chirps=n_chirps)


@dataclass(frozen=True)
class FrontEndChannel:
    """One simulator front end: an Rx/Tx pair at a fixed angular position.

    Attributes:
        theta: azimuth position relative to radar boresight, rad
        path_length: one-way physical distance radar <-> front end (R_c), m
        tau_rts: simulated delay applied in the loop, s
        f_d_rts: simulated Doppler shift, Hz
        gain: linear amplitude factor
        active: whether the channel re-transmits
    """

    theta: float
    path_length: float
    tau_rts: float = 0.0
    f_d_rts: float = 0.0
    gain: float = 1.0
    active: bool = True

    def __post_init__(self) -> None:
        if abs(self.theta) >= math.pi / 2:
            raise ValueError("front-end angle must satisfy |theta| < pi/2")
        if self.path_length < 0:
            raise ValueError("path_length must be non-negative")
        if self.tau_rts < 0:
            raise ValueError("tau_rts must be non-negative")
        if self.gain < 0:
            raise ValueError("gain must be non-negative")


@dataclass(frozen=True)
class RtsConfig:
    """Simulator-side frequency plan and front-end ring."""

    f_lo: float
    channels: tuple[FrontEndChannel, ...] = field(default_factory=tuple)
    near_field: bool = False

    def __post_init__(self) -> None:
        if self.f_lo <= 0:
            raise ValueError("f_lo must be positive")
        object.__setattr__(self, "channels", tuple(self.channels))
        thetas = [ch.theta for ch in self.channels]
        if any(b <= a for a, b in zip(thetas, thetas[1:])):
            raise ValueError("channel angles must be strictly increasing")

    def f_rts(self, cfg: RadarConfig) -> float:
        """Down-converted lower-bound frequency f_rts = f_c - f_lo."""
        f = cfg.f_c - self.f_lo
        if f <= 0:
            raise ValueError("f_lo must lie below the radar band (f_rts > 0)")
        return f


@dataclass(frozen=True)
class TargetSpec:
    """A virtual target to be presented to the radar."""

    range_m: float
    velocity_mps: float
    rcs_m2: float
    angle_rad: float

    def __post_init__(self) -> None:
        if self.range_m <= 0:
            raise ValueError("range_m must be positive")
        if self.rcs_m2 <= 0:
            raise ValueError("rcs_m2 must be positive")


class RtsParams(NamedTuple):
    tau_rts: float
    f_d_rts: float
    amplitude: float


def target_to_rts_params(target: TargetSpec, cfg: RadarConfig,
                         path_length: float) -> RtsParams:
    """Map a target to the loop parameters of one front-end channel.

    The physical loop already contributes a delay 2*R_c/c0, so the
    simulated delay covers only the range beyond the front-end ring;
    the detected total range then equals the commanded one.
    """
    if target.range_m <= path_length:
        raise ValueError(
            f"target range {target.range_m} m must exceed the front-end "
            f"path length {path_length} m"
        )
    tau_rts = 2.0 * (target.range_m - path_length) / C0
    f_d_rts = 2.0 * cfg.f_c * target.velocity_mps / C0
    amplitude = math.sqrt(target.rcs_m2) / target.range_m ** 2
    return RtsParams(tau_rts, f_d_rts, amplitude)


def virtual_array(cfg: RadarConfig) -> np.ndarray:
    """Element indices of the MIMO virtual array, n_A in [0, N_A-1]."""
    return np.arange(cfg.n_antennas)


def angular_resolution(cfg: RadarConfig, convention: str = "n_minus_1") -> float:
    """Angular resolution 1.22 * lambda / d_A of the virtual array, rad.

    The aperture d_A is (N_A - 1) * d by default; convention "n" uses
    N_A * d instead (both are in circulation and the difference matters
    at the ten-percent level for small arrays).
    """
    n = cfg.n_antennas
    if n < 2:
        raise ValueError("angle estimation needs at least two virtual elements")
    if convention == "n_minus_1":
        aperture = (n - 1) * cfg.d
    elif convention == "n":
        aperture = n * cfg.d
    else:
        raise ValueError(f"unknown aperture convention {convention!r}")
    return 1.22 * cfg.wavelength / aperture
