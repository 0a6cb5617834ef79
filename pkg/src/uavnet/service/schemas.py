"""Request/response models for the HTTP service.

Requests carry overrides for ExperimentConfig fields; anything left
unset keeps the reference default.  The experiment kind comes from the
route, never from the body.  Responses include both structured rows and
the rendered CSV text, so a thin client can persist the exact artifact
the server would have written.
"""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, ConfigDict

from ..experiments import ExperimentConfig


class ConfigOverrides(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int | None = None
    trials: int | None = None
    allow_out_of_range: bool | None = None

    freq_5g_hz: float | None = None
    gs_height_m: float | None = None
    gs_gain_dbi: float | None = None
    uav_tx_power_w: float | None = None
    ground_arc_m: float | None = None
    rel_permittivity: float | None = None
    conductivity_s_m: float | None = None
    base_height_km: float | None = None
    layer_gap_km: float | None = None
    layer: str | None = None
    sweep_points: int | None = None
    fading: str | None = None
    fading_draws: int | None = None
    geometry_mode: str | None = None
    reflection_mode: str | None = None

    freq_adsb_hz: float | None = None
    bandwidth_hz: float | None = None
    noise_density_dbm_hz: float | None = None
    sub_tx_power_w: float | None = None
    antenna_gain_dbi: float | None = None
    threshold_db: float | None = None
    pathloss_exp: float | None = None
    expected_count: float | None = None
    fading_shape: float | None = None
    half_extent_x_m: float | None = None
    half_extent_y_m: float | None = None
    extent_z_m: float | None = None
    densities: list[float] | None = None
    powers_w: list[float] | None = None
    thetas_db: list[float] | None = None

    trajectory: str | None = None
    filter_mode: str | None = None
    window_size: int | None = None
    minkowski_p: float | None = None
    units: str | None = None
    max_supplements: int | None = None

    def to_config(self, kind: str) -> ExperimentConfig:
        overrides = {k: v for k, v in self.model_dump().items()
                     if v is not None}
        return ExperimentConfig(kind=kind, **overrides)


class HealthResponse(BaseModel):
    status: str
    version: str


class ExperimentResponse(BaseModel):
    kind: str
    columns: list[str]
    rows: list[dict[str, Any]]
    csv: str


class FilterSummary(BaseModel):
    total: int
    abandoned_count: int
    supplement_count: int
    reduction_ratio: float


class FilterResponse(ExperimentResponse):
    summary: FilterSummary


class SelftestResponse(ExperimentResponse):
    ok: bool
