"""Closed-loop FMCW radar target simulator with two-channel
angle-of-arrival synthesis and phase-coherency calibration."""

__version__ = "0.1.0"

from .config import (C0, FrontEndChannel, RadarConfig, RtsConfig, RtsParams,
                     TargetSpec, angular_resolution, target_to_rts_params,
                     virtual_array)
from .chain import (PhasePath, beat_phase, beat_phase_via_chain,
                    downconvert_phase, quantize_delay, return_delay,
                    rts_modify_then_upconvert, tx_phase)
from .dsp import (AngleSpectrum, BeatCube, NoiseSpec, Peak, RangeDopplerMap,
                  RangeSpectrum, beamform, detect_cells, dirichlet_kernel,
                  doppler_dft, estimate_angle, extract_cell, find_peak,
                  range_closed_form, range_dft, sin_space_grid,
                  synthesize_beat)
from .synthesis import (AoaCommand, ChannelPair, ConstraintReport,
                        amplitude_ratio, check_constraints, command_gains,
                        composite_phase, delay_phase_slope, dirichlet_slope, g,
                        phase_offset, superposed_spectrum)
from .calibration import (CalibrationResult, PairProbe, SweepResult, SweepSpec,
                          align_range_bins, amplitude_cal, calibrate_pair,
                          coherency_sweep, refine_sweep)
from .schema import RunOptions, ScenarioModel, load_scenario
from .scenario import (Detection, run_calibration, run_linearity, run_simulate,
                       dump_spectrum)

__all__ = [name for name in dir() if not name.startswith("_")]
