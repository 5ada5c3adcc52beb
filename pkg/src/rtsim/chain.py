"""Phase-domain model of the simulator loop.

The chirp, the down/up conversion and the beat signal are modelled on
analytic phase; the radar mixer is a conjugate complex mixer, so the
beat signal is exp(j * phi_b) directly.  Functions accept scalars or
numpy arrays for the time argument.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import C0, RadarConfig, RtsConfig

TWO_PI = 2.0 * np.pi

#: delay granularity of a sample-buffer back end at 4 GS/s
BUFFER_DELAY_STEP = 0.25e-9


@dataclass(frozen=True)
class PhasePath:
    """Delays and modifications accumulated along one echo path."""

    tau_tx: float
    tau_rts: float
    tau_rx: float
    f_d_rts: float = 0.0
    gain: float = 1.0

    def __post_init__(self) -> None:
        if self.tau_tx < 0 or self.tau_rts < 0 or self.tau_rx < 0:
            raise ValueError("delays must be non-negative")

    @property
    def tau_c(self) -> float:
        """Free-space propagation delay."""
        return self.tau_tx + self.tau_rx

    @property
    def tau(self) -> float:
        """Total delay seen by the radar."""
        return self.tau_c + self.tau_rts


def tx_phase(t, cfg: RadarConfig):
    """Transmit chirp phase 2*pi*(f_c*t + B/(2T)*t^2) for t in [0, T]."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > cfg.chirp_time):
        raise ValueError("t outside the chirp interval [0, T]")
    return TWO_PI * (cfg.f_c * t + cfg.bandwidth / (2 * cfg.chirp_time) * t ** 2)


def downconvert_phase(t, tau_tx: float, cfg: RadarConfig, rts: RtsConfig):
    """Phase after free-space delay and mixing down to the intermediate band."""
    t = np.asarray(t, dtype=float)
    f_rts = rts.f_rts(cfg)
    return TWO_PI * (-cfg.f_c * tau_tx + f_rts * t
                     + cfg.bandwidth / (2 * cfg.chirp_time) * (t - tau_tx) ** 2)


def rts_modify_then_upconvert(t, path: PhasePath, cfg: RadarConfig,
                              rts: RtsConfig):
    """Phase after the loop delay and mixing back up to the carrier.

    The constant term carries tau_rts scaled by f_rts, not f_c: that
    difference is what the coherency calibration exploits.  A non-zero
    f_d_rts adds the quadrature-mixer term 2*pi*f_d_rts*t.
    """
    t = np.asarray(t, dtype=float)
    f_rts = rts.f_rts(cfg)
    phase = TWO_PI * (-cfg.f_c * path.tau_tx - f_rts * path.tau_rts
                      + cfg.f_c * t
                      + cfg.bandwidth / (2 * cfg.chirp_time)
                      * (t - path.tau_tx - path.tau_rts) ** 2)
    if path.f_d_rts != 0.0:
        phase = phase + TWO_PI * path.f_d_rts * t
    return phase


def return_delay(theta: float, n_a, path_length: float, cfg: RadarConfig,
                 near_field: bool = False):
    """Return-path delay to virtual element(s) n_a for an arrival from theta.

    Far field: (R_c + d*sin(theta)*n_a)/c0.  Near field: exact Euclidean
    distance between the front end and each element, with element 0 at
    the reference point (distance exactly R_c) and the line of elements
    spaced d apart.
    """
    if abs(theta) > np.pi / 2:
        raise ValueError("|theta| must not exceed pi/2")
    n_a = np.asarray(n_a, dtype=float)
    if not near_field:
        return (path_length + cfg.d * np.sin(theta) * n_a) / C0
    # front end placed so that the plane-wave limit reproduces the
    # far-field expression above
    px = -path_length * np.sin(theta)
    py = path_length * np.cos(theta)
    ex = n_a * cfg.d
    return np.hypot(ex - px, py) / C0


def beat_phase(t, path: PhasePath, cfg: RadarConfig, rts: RtsConfig):
    """Beat phase 2*pi*(f_c*tau_c + f_rts*tau_rts + B/(2T)*(2*tau*t - tau^2)).

    Closed form of the full chain (transmit, down-convert, modify,
    up-convert, return, conjugate mix).  The intra-chirp Doppler term is
    included here; the per-chirp slow-time rotation is applied by the
    beat-cube synthesis.
    """
    t = np.asarray(t, dtype=float)
    f_rts = rts.f_rts(cfg)
    tau = path.tau
    phase = TWO_PI * (cfg.f_c * path.tau_c + f_rts * path.tau_rts
                      + cfg.bandwidth / (2 * cfg.chirp_time)
                      * (2 * tau * t - tau ** 2))
    if path.f_d_rts != 0.0:
        phase = phase + TWO_PI * path.f_d_rts * t
    return phase


def beat_phase_via_chain(t, path: PhasePath, cfg: RadarConfig,
                         rts: RtsConfig):
    """Beat phase composed step by step; numerically equals beat_phase.

    Kept as the cross-check of the closed form, not used in synthesis
    (the explicit composition wastes precision on cancelling carrier
    terms).
    """
    t = np.asarray(t, dtype=float)
    return tx_phase(t, cfg) - rts_modify_then_upconvert(
        t - path.tau_rx, path, cfg, rts)


def quantize_delay(tau, step: float = BUFFER_DELAY_STEP):
    """Round delays to the grid of a sample-buffer back end."""
    if step <= 0:
        raise ValueError("step must be positive")
    return np.round(np.asarray(tau, dtype=float) / step) * step
