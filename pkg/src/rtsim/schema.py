"""Scenario file schema.

A scenario is a single JSON document validated by these models; field
names carry explicit units.  The same models serve as the request
bodies of the HTTP service.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import FrontEndChannel, RadarConfig, RtsConfig


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RadarModel(StrictModel):
    """Radar-under-test waveform and array."""

    lower_freq_hz: float = Field(gt=0)
    bandwidth_hz: float = Field(gt=0)
    chirp_time_s: float = Field(gt=0)
    n_samples: int = Field(ge=1)
    n_chirps: int = Field(ge=1)
    n_tx: int = Field(default=1, ge=1)
    n_rx: int = Field(default=1, ge=1)
    sample_rate_hz: float | None = Field(default=None, gt=0)
    element_spacing_m: float | None = Field(default=None, gt=0)

    def to_config(self) -> RadarConfig:
        rate = self.sample_rate_hz
        if rate is None:
            rate = self.n_samples / self.chirp_time_s
        return RadarConfig(
            f_c=self.lower_freq_hz, bandwidth=self.bandwidth_hz,
            chirp_time=self.chirp_time_s, sample_rate=rate,
            n_samples=self.n_samples, n_chirps=self.n_chirps,
            n_tx=self.n_tx, n_rx=self.n_rx, spacing=self.element_spacing_m,
        )


class ChannelModel(StrictModel):
    """One front end of the simulator ring."""

    angle_deg: float
    path_length_m: float = Field(gt=0)
    gain: float = Field(default=1.0, ge=0)

    def to_channel(self) -> FrontEndChannel:
        return FrontEndChannel(theta=math.radians(self.angle_deg),
                               path_length=self.path_length_m,
                               gain=self.gain)


class RtsModel(StrictModel):
    """Simulator frequency plan and front-end ring."""

    lo_freq_hz: float = Field(gt=0)
    channels: list[ChannelModel] = Field(min_length=1)
    near_field: bool = False

    def to_config(self) -> RtsConfig:
        return RtsConfig(f_lo=self.lo_freq_hz,
                         channels=tuple(ch.to_channel() for ch in self.channels),
                         near_field=self.near_field)


class TargetModel(StrictModel):
    """A virtual target and the channel(s) that generate it."""

    id: int
    range_m: float = Field(gt=0)
    velocity_mps: float = 0.0
    rcs_m2: float = Field(default=1.0, gt=0)
    angle_deg: float
    channels: list[int] = Field(min_length=1, max_length=2)


class CalibrationModel(StrictModel):
    """Coherency sweep parameters (defaults reproduce the reference setup)."""

    sweep_start_s: float = -0.5e-9
    sweep_stop_s: float = 1.0e-9
    sweep_step_s: float = Field(default=25e-12, gt=0)
    probe_angle_deg: float | None = None
    probe_range_m: float | None = Field(default=None, gt=0)
    refine_iterations: int = Field(default=2, ge=0)
    shrink: float = Field(default=5.0, gt=1)
    probe_n_chirps: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _ordered(self):
        if self.sweep_stop_s <= self.sweep_start_s:
            raise ValueError("sweep_stop_s must exceed sweep_start_s")
        return self


class LinearityModel(StrictModel):
    """Set-point list for the angle linearity run."""

    pair: list[int] = Field(default=[0, 1], min_length=2, max_length=2)
    set_points_deg: list[float] | None = None
    start_deg: float | None = None
    stop_deg: float | None = None
    count: int = Field(default=45, ge=2)

    @model_validator(mode="after")
    def _consistent(self):
        if self.set_points_deg is not None and (
                self.start_deg is not None or self.stop_deg is not None):
            raise ValueError("give either set_points_deg or start/stop, not both")
        return self


class NoiseModel(StrictModel):
    power: float = Field(ge=0)
    seed: int = 0


class EchoModel(StrictModel):
    """Additive parasitic echo (cable ghost or static structure reflection)."""

    channel: int
    range_m: float = Field(gt=0)
    velocity_mps: float = 0.0
    amplitude: float = Field(gt=0)


class ToleranceModel(StrictModel):
    """Per-detection flagging thresholds; None means one bin."""

    range_m: float | None = Field(default=None, gt=0)
    velocity_mps: float | None = Field(default=None, gt=0)
    angle_deg: float = Field(default=0.5, gt=0)


class ScenarioModel(StrictModel):
    """Complete experiment description."""

    radar: RadarModel
    rts: RtsModel
    targets: list[TargetModel] = Field(default_factory=list)
    calibration: CalibrationModel | None = None
    linearity: LinearityModel | None = None
    noise: NoiseModel | None = None
    extra_echoes: list[EchoModel] = Field(default_factory=list)
    tolerances: ToleranceModel = Field(default_factory=ToleranceModel)

    @model_validator(mode="after")
    def _targets_reference_channels(self):
        n = len(self.rts.channels)
        for t in self.targets:
            for c in t.channels:
                if not 0 <= c < n:
                    raise ValueError(
                        f"target {t.id}: channel index {c} out of range 0..{n - 1}")
            if len(t.channels) == 2 and t.channels[0] == t.channels[1]:
                raise ValueError(f"target {t.id}: pair must use two distinct channels")
        for e in self.extra_echoes:
            if not 0 <= e.channel < n:
                raise ValueError(f"extra echo: channel index {e.channel} out of range")
        if self.linearity is not None:
            for c in self.linearity.pair:
                if not 0 <= c < n:
                    raise ValueError(f"linearity: channel index {c} out of range")
        return self


class RunOptions(StrictModel):
    """Execution options shared by all commands."""

    seed: int | None = None
    grid: int = Field(default=8192, ge=16)
    refine: bool = True
    quantize_delay: bool = False


def load_scenario(path: str | Path) -> ScenarioModel:
    """Read and validate a scenario file, with line/field diagnostics."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(
            f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return ScenarioModel.model_validate(raw)
