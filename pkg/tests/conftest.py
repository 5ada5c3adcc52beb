import math
from pathlib import Path

import pytest

from rtsim.config import C0, FrontEndChannel, RadarConfig, RtsConfig
from rtsim.synthesis import ChannelPair

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"

# lambda/2 at the sweep-center frequency; keeps the array phase scale of
# the synthesized cube aligned with the unit-exponent beamformer
D_CENTER = C0 / (2 * (77e9 + 0.5e9))


@pytest.fixture(scope="session")
def cfg_ref() -> RadarConfig:
    """Reference radar: 77 GHz, 1 GHz sweep, 41.33 us chirps, 2x4 MIMO."""
    return RadarConfig.from_chirp(f_c=77e9, bandwidth=1e9,
                                  chirp_time=41.33e-6, n_samples=512,
                                  n_chirps=8, n_tx=2, n_rx=4,
                                  spacing=D_CENTER)


@pytest.fixture(scope="session")
def rts_ref() -> RtsConfig:
    """Two front ends at 3.4 and 12.2 degrees, 1 m ring with a sub-mm
    mounting offset on the second channel."""
    return RtsConfig(f_lo=76.5e9, channels=(
        FrontEndChannel(theta=math.radians(3.4), path_length=1.0),
        FrontEndChannel(theta=math.radians(12.2), path_length=1.0 - 0.660e-3),
    ))


@pytest.fixture(scope="session")
def pair_ref(rts_ref) -> ChannelPair:
    return ChannelPair(rts_ref.channels[0], rts_ref.channels[1])


def scenario_dict(n_chirps=8, targets=(), calibration=True, linearity=None,
                  noise=None, extra_echoes=(), spacing=D_CENTER):
    """Scenario payload builder shared by scenario/service/cli tests."""
    doc = {
        "radar": {
            "lower_freq_hz": 77.0e9,
            "bandwidth_hz": 1.0e9,
            "chirp_time_s": 41.33e-6,
            "n_samples": 512,
            "n_chirps": n_chirps,
            "n_tx": 2,
            "n_rx": 4,
            "element_spacing_m": spacing,
        },
        "rts": {
            "lo_freq_hz": 76.5e9,
            "channels": [
                {"angle_deg": 3.4, "path_length_m": 1.0},
                {"angle_deg": 12.2, "path_length_m": 0.99934},
            ],
        },
        "targets": list(targets),
    }
    if calibration:
        doc["calibration"] = {
            "sweep_start_s": -0.5e-9,
            "sweep_stop_s": 1.0e-9,
            "sweep_step_s": 25e-12,
            "refine_iterations": 2,
            "shrink": 5.0,
            "probe_n_chirps": 8,
        }
    if linearity is not None:
        doc["linearity"] = linearity
    if noise is not None:
        doc["noise"] = noise
    if extra_echoes:
        doc["extra_echoes"] = list(extra_echoes)
    return doc
