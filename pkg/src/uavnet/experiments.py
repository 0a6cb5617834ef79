"""Experiment harness: config handling, sweeps, CSV emission.

All knobs live in one flat ``ExperimentConfig`` whose defaults reproduce
the reference simulation setting, so an empty config file runs the
published scenario.  Values are entered in engineering units (dBi, dB,
dBm/Hz, watts, kilometers) and converted to linear/SI exactly once, at
the boundary where scenario objects are built.

Reproducibility contract: (config, seed) fully determines every output
byte.  Grid points draw from generators seeded with (master seed, grid
index), so extending a sweep does not disturb existing points.
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, field, replace
from itertools import product
from pathlib import Path

import numpy as np
import yaml

from .a2a import (A2aScenario, AirspaceVolume, averaged_sinr_sweep,
                  coverage_probability_analytic, coverage_probability_mc)
from .a2g import (A2gEndpoints, A2gLinkBudget, EarthModel, GroundElectrical,
                  free_space_path_loss, path_loss)
from .errors import ConfigError, EmptyResult, IoError, UavnetError
from .packet_filter import FilterReport, read_packets, run_stream
from .trajectories import BUNDLED, load_bundled

EXPERIMENT_KINDS = ("a2g-sweep", "a2a-sinr", "a2a-coverage", "filter")

# printed parameter ranges; anything outside needs allow_out_of_range
_RANGES = {
    "sub_tx_power_w": (1.0, 20.0),
    "threshold_db": (7.0, 14.0),
    "pathloss_exp": (2.0, 4.9),
    "expected_count": (1.0, 60.0),
}


def _db(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """Every tunable of the four experiments, defaults = Table setting."""
    kind: str = "a2a-coverage"
    seed: int = 1234
    trials: int = 100_000
    allow_out_of_range: bool = False

    # air-to-ground link
    freq_5g_hz: float = 3.5e9
    gs_height_m: float = 50.0
    gs_gain_dbi: float = 20.0          # total gain of the ground station pair
    uav_tx_power_w: float = 20.0       # P for both layers
    ground_arc_m: float = 200.0
    rel_permittivity: float = 15.0
    conductivity_s_m: float = 5e3
    base_height_km: float = 1.0        # bottom of the low layer
    layer_gap_km: float = 4.5          # low/high layer separation
    layer: str = "low"
    sweep_points: int = 100
    fading: str = "off"                # off | rice:<K> | rayleigh
    # the dB-domain Rice mean at K=10 is +0.217 dB with spread 2.0 dB;
    # 20000 draws put every sweep point ~15 sigma above the no-fading
    # floor, so the "fading never helps on average" property holds at
    # every grid point rather than merely in expectation
    fading_draws: int = 20_000
    geometry_mode: str = "exact"       # exact | grazing
    reflection_mode: str = "standard"  # standard | paper-literal

    # air-to-air network
    freq_adsb_hz: float = 1.09e9
    bandwidth_hz: float = 1e6
    noise_density_dbm_hz: float = -174.0
    sub_tx_power_w: float = 8.0
    antenna_gain_dbi: float = 23.0
    threshold_db: float = 10.0
    pathloss_exp: float = 2.0
    expected_count: float = 20.0       # mean sub-UAV count in the box
    fading_shape: float = 1.0
    half_extent_x_m: float = 1000.0
    half_extent_y_m: float = 1000.0
    extent_z_m: float = 1000.0
    densities: tuple = (1.0, 10.0, 20.0, 30.0, 40.0, 60.0)
    powers_w: tuple = (4.0, 8.0, 16.0)
    thetas_db: tuple = (7.0, 10.0, 14.0)

    # packet filter
    trajectory: str = "hover"          # bundled name or a file path
    filter_mode: str = "paper-literal"
    window_size: int = 10
    minkowski_p: float = 2.0
    units: str = "projected"
    max_supplements: int = 10

    def __post_init__(self):
        for name in ("densities", "powers_w", "thetas_db"):
            val = getattr(self, name)
            if not isinstance(val, tuple):
                object.__setattr__(self, name, tuple(float(v) for v in val))
        self._validate()

    def _validate(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}; "
                              f"choices: {EXPERIMENT_KINDS}")
        if self.layer not in ("low", "high"):
            raise ConfigError(f"layer must be 'low' or 'high', got {self.layer!r}")
        if self.geometry_mode not in ("exact", "grazing"):
            raise ConfigError(f"bad geometry_mode {self.geometry_mode!r}")
        if self.reflection_mode not in ("standard", "paper-literal"):
            raise ConfigError(f"bad reflection_mode {self.reflection_mode!r}")
        if self.filter_mode not in ("paper-literal", "corrected"):
            raise ConfigError(f"bad filter_mode {self.filter_mode!r}")
        if self.units not in ("projected", "raw"):
            raise ConfigError(f"bad units {self.units!r}")
        parse_fading(self.fading)
        if not isinstance(self.seed, int) or self.seed < 0 or self.seed > 2**64 - 1:
            raise ConfigError(f"seed must be a u64, got {self.seed!r}")
        positives = ("trials", "freq_5g_hz", "gs_gain_dbi", "uav_tx_power_w",
                     "ground_arc_m", "conductivity_s_m", "base_height_km",
                     "layer_gap_km", "fading_draws", "freq_adsb_hz",
                     "bandwidth_hz", "sub_tx_power_w", "antenna_gain_dbi",
                     "half_extent_x_m", "half_extent_y_m", "extent_z_m")
        for name in positives:
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, "
                                  f"got {getattr(self, name)}")
        if self.gs_height_m < 0:
            raise ConfigError("gs_height_m must be >= 0")
        if self.rel_permittivity < 1:
            raise ConfigError("rel_permittivity must be >= 1")
        if self.sweep_points < 2:
            raise ConfigError("sweep_points must be >= 2")
        if self.window_size < 2:
            raise ConfigError("window_size must be >= 2")
        if self.minkowski_p < 1:
            raise ConfigError("minkowski_p must be >= 1")
        if self.fading_shape < 1:
            raise ConfigError("fading_shape must be >= 1")
        if self.max_supplements < 0:
            raise ConfigError("max_supplements must be >= 0")
        for name in ("densities", "powers_w", "thetas_db"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be non-empty")
        if self.allow_out_of_range:
            return
        checks = [(name, (v,)) for name, v in
                  (("sub_tx_power_w", self.sub_tx_power_w),
                   ("threshold_db", self.threshold_db),
                   ("pathloss_exp", self.pathloss_exp),
                   ("expected_count", self.expected_count))]
        checks.append(("sub_tx_power_w", self.powers_w))
        checks.append(("threshold_db", self.thetas_db))
        checks.append(("expected_count", self.densities))
        for name, values in checks:
            lo, hi = _RANGES[name]
            for v in values:
                if not lo <= v <= hi:
                    raise ConfigError(
                        f"{name}={v} outside the supported range "
                        f"[{lo}, {hi}]; set allow_out_of_range to force")

    def layer_bounds_km(self) -> tuple[float, float]:
        """Height sweep bounds for the configured layer."""
        h0, gap = self.base_height_km, self.layer_gap_km
        if self.layer == "low":
            return (h0, h0 + gap - h0 / 2.0)
        return (h0 + gap, h0 + 2.0 * gap)


def parse_fading(spec: str) -> tuple[str, float]:
    """Map a CLI/config fading spec to (path_loss mode, K factor)."""
    if spec == "off":
        return ("off", 0.0)
    if spec == "rayleigh":
        return ("expectation", 0.0)
    if spec.startswith("rice:"):
        try:
            k = float(spec[5:])
        except ValueError:
            raise ConfigError(f"bad rice K factor in {spec!r}") from None
        if k < 0 or not math.isfinite(k):
            raise ConfigError(f"rice K factor must be finite and >= 0, got {k}")
        return ("expectation", k)
    raise ConfigError(f"bad fading spec {spec!r}; "
                      "expected off, rayleigh, or rice:<K>")


def to_yaml(config: ExperimentConfig) -> str:
    return yaml.safe_dump(asdict(config), sort_keys=True,
                          default_flow_style=False)


def from_yaml(text: str) -> ExperimentConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"config is not valid YAML: {err}") from err
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"config must be a mapping, got {type(data).__name__}")
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    try:
        return ExperimentConfig(**data)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad config value: {err}") from err


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    return from_yaml(text)


@dataclass(frozen=True)
class SweepRow:
    """One output grid point: ordered (column, value) pairs."""
    items: tuple[tuple[str, object], ...]

    @classmethod
    def make(cls, **columns) -> "SweepRow":
        for name, value in columns.items():
            if isinstance(value, float) and not math.isfinite(value):
                raise ValueError(f"non-finite output {name}={value}")
        return cls(items=tuple(columns.items()))

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.items)

    def as_dict(self) -> dict:
        return dict(self.items)

    def __getitem__(self, name: str):
        return self.as_dict()[name]


def default_out_dir() -> Path:
    return Path(os.environ.get("UAVNET_OUT_DIR", "."))


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        text = repr(value)
    else:
        text = str(value)
    if any(ch in text for ch in ',"\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text


def render_csv(rows) -> str:
    """Rows as delimited text: header, '.' decimals, LF endings."""
    rows = list(rows)
    if not rows:
        raise EmptyResult("no rows to write")
    columns = rows[0].columns
    for i, row in enumerate(rows):
        if row.columns != columns:
            raise ValueError(f"row {i} columns {row.columns} differ from "
                             f"header {columns}")
    lines = [",".join(columns)]
    lines.extend(",".join(_cell(v) for _, v in row.items) for row in rows)
    return "\n".join(lines) + "\n"


def emit_csv(rows, destination) -> Path:
    text = render_csv(rows)
    dest = Path(destination)
    try:
        dest.parent.mkdir(parents=True, exist_ok=True)
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as err:
        raise IoError(f"cannot write {dest}: {err}") from err
    return dest


def _a2g_parts(config: ExperimentConfig):
    earth = EarthModel()
    ground = GroundElectrical(rel_permittivity_eps_r=config.rel_permittivity,
                              conductivity_sigma=config.conductivity_s_m)
    gain = math.sqrt(_db(config.gs_gain_dbi))
    _, k_factor = parse_fading(config.fading)
    budget = A2gLinkBudget(tx_power_Pc=config.uav_tx_power_w,
                           tx_gain_Gt=gain, rx_gain_Gr=gain,
                           rice_k_factor=k_factor)
    return earth, ground, budget


def run_a2g_sweep(config: ExperimentConfig) -> list[SweepRow]:
    earth, ground, budget = _a2g_parts(config)
    fading_mode, _ = parse_fading(config.fading)
    lo_km, hi_km = config.layer_bounds_km()
    heights_km = np.linspace(lo_km, hi_km, config.sweep_points)
    rows = []
    for i, h_km in enumerate(heights_km):
        endpoints = A2gEndpoints(uav_height_H=float(h_km) * 1000.0,
                                 gs_height_HG=config.gs_height_m,
                                 ground_arc_s=config.ground_arc_m,
                                 frequency_f=config.freq_5g_hz)
        try:
            done = path_loss(endpoints, earth, ground, budget,
                             geometry_mode=config.geometry_mode,
                             reflection_mode=config.reflection_mode,
                             fading=fading_mode,
                             fading_seed=np.random.SeedSequence([config.seed, i]),
                             fading_draws=config.fading_draws)
            fspl = free_space_path_loss(endpoints, earth, budget)
        except UavnetError as err:
            raise type(err)(f"height {h_km:.6g} km (grid point {i}): {err}") \
                from err
        rows.append(SweepRow.make(
            height_km=float(h_km),
            ground_arc_m=config.ground_arc_m,
            path_loss_db=done.path_loss_PL,
            free_space_db=fspl,
            fading=config.fading,
            seed=config.seed,
            trials=config.fading_draws if fading_mode != "off" else 0,
            method=f"cemr-{config.geometry_mode}"))
    return rows


def _a2a_parts(config: ExperimentConfig):
    vol = AirspaceVolume(half_extent_Lx=config.half_extent_x_m,
                         half_extent_Ly=config.half_extent_y_m,
                         extent_Lz=config.extent_z_m)
    noise_density = _db(config.noise_density_dbm_hz) * 1e-3
    scen = A2aScenario(density_lambda=config.expected_count / vol.volume_V,
                       tx_power_Ps=config.sub_tx_power_w,
                       channel_gain_Ga=_db(config.antenna_gain_dbi),
                       pathloss_exp_delta=config.pathloss_exp,
                       noise_density_n0=noise_density,
                       bandwidth_B=config.bandwidth_hz,
                       threshold_theta=_db(config.threshold_db),
                       fading_shape_iota=config.fading_shape)
    return scen, vol


def run_a2a_sinr(config: ExperimentConfig) -> list[SweepRow]:
    scen, vol = _a2a_parts(config)
    per_m3 = [count / vol.volume_V for count in config.densities]
    sweep = averaged_sinr_sweep(per_m3, scen, vol, config.trials, config.seed)
    rows = []
    for count, (_, mean_db) in zip(config.densities, sweep):
        rows.append(SweepRow.make(
            expected_count=float(count),
            mean_sinr_db=mean_db,
            seed=config.seed,
            trials=config.trials,
            method="mc-mean-db"))
    return rows


def run_a2a_coverage(config: ExperimentConfig) -> list[SweepRow]:
    scen, vol = _a2a_parts(config)
    rows = []
    grid = list(product(config.powers_w, config.thetas_db))
    for i, (power_w, theta_db) in enumerate(grid):
        point = replace(scen, tx_power_Ps=float(power_w),
                        threshold_theta=_db(float(theta_db)))
        try:
            analytic = coverage_probability_analytic(point, vol)
            mc = coverage_probability_mc(point, vol, config.trials,
                                         np.random.SeedSequence([config.seed, i]))
        except UavnetError as err:
            raise type(err)(f"P_s={power_w} W, theta={theta_db} dB "
                            f"(grid point {i}): {err}") from err
        rows.append(SweepRow.make(
            power_w=float(power_w),
            theta_db=float(theta_db),
            p_cov_analytic=analytic.p_cov,
            p_cov_mc=mc.p_cov,
            mc_std_error=mc.std_error,
            seed=config.seed,
            trials=config.trials,
            method="analytic+mc"))
    return rows


def load_trajectory(config: ExperimentConfig):
    if config.trajectory in BUNDLED:
        return load_bundled(config.trajectory)
    return read_packets(config.trajectory)


def run_filter_report(config: ExperimentConfig) \
        -> tuple[list[SweepRow], FilterReport]:
    packets = load_trajectory(config)
    report = run_stream(packets, mode=config.filter_mode,
                        window_size_Nstar=config.window_size,
                        order_p=config.minkowski_p, units=config.units,
                        max_supplements=config.max_supplements)
    rows = [SweepRow.make(source_id=p.source_id, seq=p.seq_k,
                          time_s=p.time, lon_deg=p.lon_deg,
                          lat_deg=p.lat_deg, alt_m=p.alt_m,
                          flag="supp" if p.supplement else "recv")
            for p in report.accepted]
    return rows, report


def run_experiment(config: ExperimentConfig) -> list[SweepRow]:
    """Dispatch on config.kind; rows are deterministic under the seed."""
    if config.kind == "a2g-sweep":
        return run_a2g_sweep(config)
    if config.kind == "a2a-sinr":
        return run_a2a_sinr(config)
    if config.kind == "a2a-coverage":
        return run_a2a_coverage(config)
    if config.kind == "filter":
        return run_filter_report(config)[0]
    raise ConfigError(f"unknown experiment kind {config.kind!r}")


def run_selftest(config: ExperimentConfig | None = None) \
        -> tuple[bool, list[SweepRow]]:
    """Cross-check the analytic coverage integral against Monte Carlo
    on the (power, threshold) grid; a point passes when the gap is
    within max(0.02, 3 sigma of the MC estimate)."""
    if config is None:
        config = ExperimentConfig(kind="a2a-coverage")
    rows = []
    all_ok = True
    for row in run_a2a_coverage(config):
        data = row.as_dict()
        diff = abs(data["p_cov_analytic"] - data["p_cov_mc"])
        tol = max(0.02, 3.0 * data["mc_std_error"])
        ok = diff <= tol
        all_ok = all_ok and ok
        rows.append(SweepRow.make(**data, abs_diff=diff, tolerance=tol,
                                  verdict="pass" if ok else "fail"))
    return all_ok, rows
