"""Acceptance suite: one test per release criterion, each printing a
PASS line with the measured figure (run with -s to see them).

The reference scenarios live in scenarios/ at the repo root; all
tolerances are fixed here, nothing is calibrated afterwards.
"""

import dataclasses
import json
import math
import time

import numpy as np
import pytest

from conftest import SCENARIO_DIR, scenario_dict
from rtsim.calibration import PairProbe, SweepSpec, calibrate_pair
from rtsim.chain import PhasePath, beat_phase, beat_phase_via_chain
from rtsim.cli import main
from rtsim.config import (C0, FrontEndChannel, RadarConfig, RtsConfig,
                          angular_resolution)
from rtsim.dsp import (beamform, find_peak, range_closed_form, range_dft,
                       sin_space_grid, synthesize_beat)
from rtsim.schema import RunOptions, load_scenario
from rtsim.scenario import run_calibration, run_linearity, run_simulate
from rtsim.synthesis import (ChannelPair, command_gains, delay_phase_slope,
                             g, phase_offset, superposed_spectrum)

OPTS = RunOptions()


def test_acceptance_1_calibration_period():
    """Sweep [-0.5, 1] ns at 25 ps: angle-error maxima spaced 1.00 +- 0.05 ns."""
    model = load_scenario(SCENARIO_DIR / "siv_calibration.json")
    start = time.perf_counter()
    result = run_calibration(model, OPTS)
    elapsed = time.perf_counter() - start
    assert result.period_estimate_s is not None
    assert result.period_estimate_s == pytest.approx(1.00e-9, abs=0.05e-9)
    assert elapsed < 30.0
    print(f"\nACCEPTANCE 1: PASS - maxima spacing "
          f"{result.period_estimate_s * 1e9:.4f} ns (1.00 +- 0.05), "
          f"{elapsed:.1f} s")


def test_acceptance_2_angle_linearity():
    """45 set-points across [3.4, 12.2] deg: max |angle error| <= 0.05 deg."""
    model = load_scenario(SCENARIO_DIR / "siv_linearity.json")
    start = time.perf_counter()
    result = run_linearity(model, OPTS)
    elapsed = time.perf_counter() - start
    assert len(result.rows) == 45
    assert result.max_abs_error_deg <= 0.05
    assert elapsed < 60.0
    print(f"\nACCEPTANCE 2: PASS - max |angle error| "
          f"{result.max_abs_error_deg:.4f} deg (<= 0.05), {elapsed:.1f} s")


def test_acceptance_3_angular_resolution():
    """2x4 MIMO at half-wavelength spacing: resolution 17.5 +- 0.1 deg."""
    cfg = RadarConfig.from_chirp(f_c=77e9, bandwidth=1e9, chirp_time=41.33e-6,
                                 n_samples=512, n_chirps=8, n_tx=2, n_rx=4)
    res = math.degrees(angular_resolution(cfg, convention="n"))
    assert res == pytest.approx(17.5, abs=0.1)
    print(f"\nACCEPTANCE 3: PASS - angular resolution {res:.3f} deg "
          f"(17.5 +- 0.1)")


def test_acceptance_4_four_target_frame():
    """All four reference targets within one range bin, one Doppler bin
    and 0.5 deg."""
    model = load_scenario(SCENARIO_DIR / "table1.json")
    start = time.perf_counter()
    result = run_simulate(model, OPTS)
    elapsed = time.perf_counter() - start
    cfg = model.radar.to_config()
    assert len(result.detections) == 4
    worst_r = worst_v = worst_a = 0.0
    for det in result.detections:
        assert not det.flagged
        assert abs(det.range_err_m) <= cfg.range_bin          # 0.15 m
        assert abs(det.velocity_err_mps) <= cfg.velocity_bin  # one bin
        assert abs(det.angle_err_deg) <= 0.5
        worst_r = max(worst_r, abs(det.range_err_m))
        worst_v = max(worst_v, abs(det.velocity_err_mps))
        worst_a = max(worst_a, abs(det.angle_err_deg))
    assert all(rep.ok for _, rep in result.constraints)
    assert not result.flagged
    assert elapsed < 60.0
    print(f"\nACCEPTANCE 4: PASS - worst errors {worst_r:.3f} m / "
          f"{worst_v:.3f} m/s / {worst_a:.3f} deg "
          f"(<= {cfg.range_bin:.3f} / {cfg.velocity_bin:.3f} / 0.5), "
          f"{elapsed:.1f} s")


def _coherent_pair(theta1, theta2, cfg, rts):
    tau = 2 * (45.0 - 1.0) / C0
    ch1 = FrontEndChannel(theta=theta1, path_length=1.0, tau_rts=tau)
    ch2 = FrontEndChannel(theta=theta2, path_length=1.0, tau_rts=tau)
    pair = ChannelPair(ch1, ch2)
    slope = delay_phase_slope(rts, cfg)
    period = 2 * math.pi / slope
    trim = (phase_offset(pair, cfg, rts) / slope) % period
    return ChannelPair(ch1, dataclasses.replace(ch2, tau_rts=tau + trim))


def _envelope_peak_deg(pair, a1, a2, cfg, rts):
    s1, s2 = pair.sin_interval
    grid = np.linspace(s1 - 0.05, s2 + 0.05, 1 << 15)
    spec = superposed_spectrum(pair, a1, a2, cfg, rts, sin_grid=grid)
    peak = find_peak(spec.data, spec.sin_grid)
    return math.degrees(math.asin(peak.location))


def test_acceptance_5_oracle_equivalence():
    """Commanded gains steer to the same peak a brute-force ratio search
    finds, within 0.02 deg, over 25 random front-end geometries."""
    cfg = RadarConfig.from_chirp(f_c=77e9, bandwidth=1e9, chirp_time=41.33e-6,
                                 n_samples=512, n_chirps=8, n_tx=2, n_rx=4)
    rts = RtsConfig(f_lo=76.5e9)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(25):
        theta1 = math.radians(rng.uniform(-25.0, 5.0))
        theta2 = theta1 + math.radians(rng.uniform(3.0, 17.0))
        pair = _coherent_pair(theta1, theta2, cfg, rts)
        s1, s2 = pair.sin_interval
        alpha_set = math.asin(s1 + rng.uniform(0.1, 0.9) * (s2 - s1))
        cmd = command_gains(pair, alpha_set, cfg)
        peak_cmd = _envelope_peak_deg(pair, cmd.a1, cmd.a2, cfg, rts)

        # search over 201 log-spaced ratios bracketing the command by a
        # factor e^0.6; each candidate is judged purely by its realized
        # peak, so a systematically biased command would lose to a
        # neighbor that steers closer to the set-point
        best_peak, best_dist = None, math.inf
        for r in cmd.ratio * np.exp(np.linspace(-0.3, 0.3, 201)):
            a1, a2 = (1.0, 1.0 / r) if r >= 1 else (r, 1.0)
            peak = _envelope_peak_deg(pair, a1, a2, cfg, rts)
            dist = abs(peak - math.degrees(alpha_set))
            if dist < best_dist:
                best_peak, best_dist = peak, dist
        worst = max(worst, abs(peak_cmd - best_peak))
    assert worst <= 0.02
    print(f"\nACCEPTANCE 5: PASS - worst command/search disagreement "
          f"{worst:.4f} deg (<= 0.02)")


def test_acceptance_6_destructive_interference():
    """Half a period of extra delay puts the angle error at a local
    maximum and collapses the superposed peak below 0.8x the coherent one."""
    model = load_scenario(SCENARIO_DIR / "siv_calibration.json")
    cfg = model.radar.to_config()
    rts = model.rts.to_config()
    pair = ChannelPair(rts.channels[0], rts.channels[1])
    spec = SweepSpec(start=-0.5e-9, stop=1.0e-9, step=25e-12)
    cal = calibrate_pair(pair, spec, cfg, rts)
    probe = PairProbe(pair, spec, cfg, rts)
    half = 0.5 / (rts.f_rts(cfg) + cfg.bandwidth / 2)

    def err_and_mag(dt):
        gains = (probe.gains[0] * cal.corrections[0],
                 probe.gains[1] * cal.corrections[1])
        angle = probe.measure_angle(dt, gains=gains)
        ch1, ch2 = probe.channels(dt, gains=gains)
        from rtsim.dsp import estimate_angle, extract_cell
        cube = synthesize_beat([ch1, ch2], cfg, rts)
        gate = cfg.bandwidth * (2 * probe.probe_range / C0 + dt / 2)
        _, peak = estimate_angle(extract_cell(cube, gate, doppler_bin=0.0))
        return abs(angle - probe.probe_alpha), peak.magnitude

    err_coh, mag_coh = err_and_mag(cal.delta_tau)
    err_des, mag_des = err_and_mag(cal.delta_tau + half)
    err_lo, _ = err_and_mag(cal.delta_tau + half - spec.step)
    err_hi, _ = err_and_mag(cal.delta_tau + half + spec.step)
    ratio = mag_des / mag_coh

    assert err_des >= err_lo - 1e-12 and err_des >= err_hi - 1e-12
    assert err_des > math.radians(1.0) > err_coh
    assert ratio < 0.8
    # frozen regression value for this fixture
    assert ratio == pytest.approx(0.598, abs=0.02)
    print(f"\nACCEPTANCE 6: PASS - destructive/coherent peak ratio "
          f"{ratio:.3f} (< 0.8, frozen 0.598), angle error at maximum "
          f"{math.degrees(err_des):.2f} deg")


def test_acceptance_7_model_identity_suite():
    """Phase-model identity, closed-form accuracy, series accuracy, and
    transform sanity on random inputs."""
    cfg = RadarConfig.from_chirp(f_c=77e9, bandwidth=1e9, chirp_time=41.33e-6,
                                 n_samples=512, n_chirps=8, n_tx=2, n_rx=4)
    rts = RtsConfig(f_lo=76.5e9)
    rng = np.random.default_rng(7)

    # beat-phase composition equals the closed form to < 1e-9 relative
    path = PhasePath(tau_tx=1.0 / C0, tau_rts=293e-9, tau_rx=1.0003 / C0)
    t = rng.uniform(path.tau_rx, cfg.chirp_time, 2000)
    direct = beat_phase(t, path, cfg, rts)
    composed = beat_phase_via_chain(t, path, cfg, rts)
    worst_phase = float(np.max(np.abs(direct - composed) / np.abs(direct)))
    assert worst_phase < 1e-9

    # sinc closed form within 1 % of the exact DFT near the peak
    ch = FrontEndChannel(theta=0.0, path_length=1.0,
                         tau_rts=2 * (45.02 - 1.0) / C0)
    spec = range_dft(synthesize_beat([ch], cfg, rts))
    tau_c = 2 * 1.0 / C0
    center = round(cfg.bandwidth * (tau_c + ch.tau_rts))
    worst_cf = 0.0
    for f_r in range(center - 2, center + 3):
        exact = abs(spec.data[f_r, 0, 0])
        approx = abs(range_closed_form(tau_c, ch.tau_rts, f_r, cfg, rts,
                                       kind="sinc"))
        worst_cf = max(worst_cf, abs(exact - approx) / exact)
    assert worst_cf < 0.01

    # derivative substitute: series vs closed form to < 1e-9
    worst_g = 0.0
    for x in (0.02, 0.05, 0.1, 0.2):
        closed = g(0.0, -math.asin(x))
        series = -x / 6 + x ** 3 / 240 - x ** 5 / 26880 + x ** 7 / 4838400
        worst_g = max(worst_g, abs(closed - series) / abs(series))
    assert worst_g < 1e-9

    # beamform linearity and DFT Parseval on 100 random inputs
    grid = sin_space_grid(512)
    worst_lin = worst_par = 0.0
    for _ in range(100):
        a = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        b = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        lhs = beamform(a + b, sin_grid=grid).data
        rhs = beamform(a, sin_grid=grid).data + beamform(b, sin_grid=grid).data
        worst_lin = max(worst_lin, float(
            np.max(np.abs(lhs - rhs)) / np.max(np.abs(lhs))))
        x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        X = np.fft.fft(x)
        worst_par = max(worst_par, abs(
            np.sum(np.abs(X) ** 2) - 64 * np.sum(np.abs(x) ** 2))
            / np.sum(np.abs(X) ** 2))
    assert worst_lin < 1e-9
    assert worst_par < 1e-9
    print(f"\nACCEPTANCE 7: PASS - phase identity {worst_phase:.1e}, "
          f"closed form {worst_cf:.2e}, series {worst_g:.1e}, "
          f"linearity {worst_lin:.1e}, Parseval {worst_par:.1e}")


def test_acceptance_8_determinism(tmp_path):
    """Identical scenario and seed produce bitwise-identical artifacts."""
    doc = scenario_dict(
        n_chirps=32,
        targets=[{"id": 1, "range_m": 45.0, "velocity_mps": -2.0,
                  "rcs_m2": 1.0, "angle_deg": 9.0, "channels": [0, 1]}],
        noise={"power": 1e-9, "seed": 11})
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(doc))
    pairs = []
    for run in ("a", "b"):
        out = tmp_path / run
        assert main(["simulate", str(path), "--out-dir", str(out)]) == 0
        assert main(["dump-spectrum", str(path), "--out-dir", str(out)]) == 0
        pairs.append({name.name: name.read_bytes()
                      for name in sorted(out.iterdir())})
    assert set(pairs[0]) == {"rd_map.csv", "detections.csv", "spectrum.bin"}
    assert pairs[0] == pairs[1]
    print("\nACCEPTANCE 8: PASS - bitwise-identical CSV and binary outputs")
