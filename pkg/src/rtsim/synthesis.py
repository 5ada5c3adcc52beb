"""Two-channel superposition: steering a composite target between two
front ends by the ratio of their amplitudes.

The composite phase, the derivative substitute g and the amplitude
relation implement the analytic model; because that model approximates
the array response by a plain sinc, the default gain command uses the
slope of the exact array kernel instead, which steers the simulated
peak to the set-point with no systematic bias.  The plain-sinc ratio
remains available as kernel="sinc".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import FrontEndChannel, RadarConfig, RtsConfig, angular_resolution
from .dsp import AngleSpectrum, sin_space_grid

TWO_PI = 2.0 * math.pi

#: set-points closer than this to an endpoint (in sin space) collapse to
#: a single-channel command
EPS_SIN = 1e-6


@dataclass(frozen=True)
class ChannelPair:
    """Two adjacent front ends, ch1 at the smaller angle."""

    ch1: FrontEndChannel
    ch2: FrontEndChannel

    def __post_init__(self) -> None:
        if self.ch1.theta >= self.ch2.theta:
            raise ValueError("pair must satisfy theta_1 < theta_2")
        if not (self.ch1.active and self.ch2.active):
            raise ValueError("both channels of a pair must be active")

    @property
    def sin_interval(self) -> tuple[float, float]:
        return (math.sin(self.ch1.theta), math.sin(self.ch2.theta))


@dataclass(frozen=True)
class AoaCommand:
    """Gains and delay offset realizing one set-point."""

    alpha_set: float
    ratio: float          # A_1/A_2, may be inf/0 at the endpoints
    a1: float
    a2: float
    delta_tau: float = 0.0

    def __post_init__(self) -> None:
        if self.a1 < 0 or self.a2 < 0:
            raise ValueError("gains must be non-negative")


def composite_phase(ch: FrontEndChannel, cfg: RadarConfig,
                    rts: RtsConfig) -> float:
    """Phase of one channel's beamformed peak response, rad.

    2*pi*[(f_c + B/2) * 2*R_c/c0 + (f_rts + B/2) * tau_rts
          + sin(theta) * (N_A - 1)/4]

    Meaningful modulo 2*pi and, between two channels, as the offset
    Delta-phi that the coherency calibration drives to zero.  Small
    residual-video and fractional-bin terms of the full simulation are
    not included; they stay well inside the default coherency tolerance.
    """
    from .config import C0

    f_rts = rts.f_rts(cfg)
    return TWO_PI * ((cfg.f_c + cfg.bandwidth / 2) * 2 * ch.path_length / C0
                     + (f_rts + cfg.bandwidth / 2) * ch.tau_rts
                     + math.sin(ch.theta) * (cfg.n_antennas - 1) / 4)


def _g_of_x(x):
    """Closed form 2*cos(x/2)/x - 4*sin(x/2)/x^2 with series fallback."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    closed = 2 * np.cos(xs / 2) / xs - 4 * np.sin(xs / 2) / xs ** 2
    series = -x / 6 + x ** 3 / 240
    out = np.where(small, series, closed)
    return out if out.ndim else float(out)


def g(theta_q: float, alpha):
    """Derivative substitute of the plain-sinc channel model.

    Odd in x = sin(theta_q) - sin(alpha) and zero at alpha = theta_q;
    the singularity at x = 0 is removable (series -x/6 + x^3/240).
    """
    return _g_of_x(np.sin(theta_q) - np.sin(np.asarray(alpha, dtype=float)))


def dirichlet_slope(x, n: int):
    """d/dx of the normalized array kernel sin(n*pi*x/2)/(n*sin(pi*x/2)).

    The exact counterpart of g for an n-element half-wavelength array;
    x is the sin-space offset sin(theta) - sin(alpha).
    """
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-6
    xs = np.where(small, 1.0, x)
    u = np.pi * xs / 2
    closed = (np.pi / 2) * (n * np.cos(n * u) * np.sin(u)
                            - np.sin(n * u) * np.cos(u)) / (n * np.sin(u) ** 2)
    series = -(n ** 2 - 1) * np.pi ** 2 * x / 12
    out = np.where(small, series, closed)
    return out if out.ndim else float(out)


def dirichlet_magnitude(x, n: int):
    """Normalized array kernel sin(n*pi*x/2)/(n*sin(pi*x/2)), equal to 1 at x=0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-9
    xs = np.where(small, 1.0, x)
    out = np.where(small, 1.0,
                   np.sin(n * np.pi * xs / 2) / (n * np.sin(np.pi * xs / 2)))
    return out if out.ndim else float(out)


def amplitude_ratio(pair: ChannelPair, alpha_set: float, cfg: RadarConfig,
                    kernel: str = "dirichlet") -> float:
    """Gain ratio A_1/A_2 that places the composite peak at alpha_set.

    Solves the stationarity of the coherently superposed channel
    responses; positive on the open interval.  kernel "dirichlet" uses
    the exact array-kernel slope (default; steers without systematic
    bias), kernel "sinc" uses the plain-sinc substitute g.
    """
    s1, s2 = pair.sin_interval
    s = math.sin(alpha_set)
    if not (s1 + EPS_SIN < s < s2 - EPS_SIN):
        raise ValueError(
            "set-point must lie strictly between the pair angles in sin space"
        )
    x1, x2 = s1 - s, s2 - s
    if kernel == "dirichlet":
        ratio = -dirichlet_slope(x2, cfg.n_antennas) / dirichlet_slope(x1, cfg.n_antennas)
    elif kernel == "sinc":
        ratio = -_g_of_x(x2) / _g_of_x(x1)
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    if ratio <= 0:
        raise ValueError("amplitude relation produced a non-positive ratio")
    return float(ratio)


def command_gains(pair: ChannelPair, alpha_set: float, cfg: RadarConfig,
                  kernel: str = "dirichlet", delta_tau: float = 0.0) -> AoaCommand:
    """Full gain command, with endpoint set-points collapsing to one channel.

    Gains are normalized so max(a1, a2) = 1; absolute target amplitude
    scaling is applied separately.
    """
    s1, s2 = pair.sin_interval
    s = math.sin(alpha_set)
    if s <= s1 - EPS_SIN or s >= s2 + EPS_SIN:
        raise ValueError("set-point outside the pair interval")
    if s <= s1 + EPS_SIN:
        return AoaCommand(alpha_set=alpha_set, ratio=math.inf,
                          a1=1.0, a2=0.0, delta_tau=delta_tau)
    if s >= s2 - EPS_SIN:
        return AoaCommand(alpha_set=alpha_set, ratio=0.0,
                          a1=0.0, a2=1.0, delta_tau=delta_tau)
    ratio = amplitude_ratio(pair, alpha_set, cfg, kernel=kernel)
    if ratio >= 1.0:
        a1, a2 = 1.0, 1.0 / ratio
    else:
        a1, a2 = ratio, 1.0
    return AoaCommand(alpha_set=alpha_set, ratio=ratio, a1=a1, a2=a2,
                      delta_tau=delta_tau)


def superposed_spectrum(pair: ChannelPair, a1: float, a2: float,
                        cfg: RadarConfig, rts: RtsConfig,
                        sin_grid: np.ndarray | None = None,
                        grid: int = 8192) -> AngleSpectrum:
    """Model angle spectrum of the two superposed channels.

    Exact per-channel array kernels with the composite phases of the
    current channel states; amplitudes carry the A*N_s*N_A peak scale.
    """
    if sin_grid is None:
        sin_grid = sin_space_grid(grid)
    n = cfg.n_antennas
    scale = cfg.n_samples * n
    out = np.zeros(sin_grid.shape, dtype=complex)
    for ch, a in ((pair.ch1, a1), (pair.ch2, a2)):
        x = math.sin(ch.theta) - sin_grid
        phi = composite_phase(ch, cfg, rts)
        out += a * scale * dirichlet_magnitude(x, n) * np.exp(1j * phi)
    return AngleSpectrum(data=out, sin_grid=sin_grid)


def delay_phase_slope(rts: RtsConfig, cfg: RadarConfig) -> float:
    """Phase shift per second of simulated delay: 2*pi*(f_rts + B/2)."""
    return TWO_PI * (rts.f_rts(cfg) + cfg.bandwidth / 2)


def phase_offset(pair: ChannelPair, cfg: RadarConfig, rts: RtsConfig) -> float:
    """Composite-phase offset Delta-phi = phi_1 - phi_2, wrapped to (-pi, pi]."""
    d = composite_phase(pair.ch1, cfg, rts) - composite_phase(pair.ch2, cfg, rts)
    return float((d + math.pi) % TWO_PI - math.pi)


@dataclass(frozen=True)
class ConstraintCheck:
    ok: bool
    value: float
    limit: float


@dataclass(frozen=True)
class ConstraintReport:
    """Superposition preconditions with their margins."""

    same_range_bin: ConstraintCheck
    same_doppler_bin: ConstraintCheck
    spacing_within_resolution: ConstraintCheck
    phase_coherent: ConstraintCheck

    @property
    def ok(self) -> bool:
        return (self.same_range_bin.ok and self.same_doppler_bin.ok
                and self.spacing_within_resolution.ok and self.phase_coherent.ok)


def check_constraints(pair: ChannelPair, cfg: RadarConfig, rts: RtsConfig,
                      tol_phi: float = math.radians(5.0),
                      aperture_convention: str = "n_minus_1") -> ConstraintReport:
    """Report whether the pair can form a single constructive target.

    Checks that both channel echoes land in the same range and Doppler
    bin, that the front-end spacing does not exceed the angular
    resolution, and that the composite phases agree modulo 2*pi within
    tol_phi.
    """
    from .config import C0

    tau1 = 2 * pair.ch1.path_length / C0 + pair.ch1.tau_rts
    tau2 = 2 * pair.ch2.path_length / C0 + pair.ch2.tau_rts
    range_split = abs(tau1 - tau2) * cfg.bandwidth          # in range bins
    dopp_split = abs(pair.ch1.f_d_rts - pair.ch2.f_d_rts) \
        * cfg.n_chirps * cfg.chirp_time                     # in Doppler bins
    dtheta = pair.ch2.theta - pair.ch1.theta
    resolution = angular_resolution(cfg, convention=aperture_convention)
    dphi = abs(phase_offset(pair, cfg, rts))
    return ConstraintReport(
        same_range_bin=ConstraintCheck(range_split <= 1.0, range_split, 1.0),
        same_doppler_bin=ConstraintCheck(dopp_split <= 1.0, dopp_split, 1.0),
        spacing_within_resolution=ConstraintCheck(dtheta <= resolution,
                                                  dtheta, resolution),
        phase_coherent=ConstraintCheck(dphi <= tol_phi, dphi, tol_phi),
    )
