"""Air-to-air links under a Poisson point process.

Sub-UAVs are dropped as a homogeneous PPP inside a rectangular airspace
slab; the central UAV associates with the nearest one.  The module
computes SINR samples, coverage probability (both a vectorized Monte
Carlo engine and the analytic form that composes the nearest-distance
law with the interference Laplace functional), and mean-SINR sweeps
over density.

Conventions: densities are per cubic meter, powers in watts, gains
linear, thresholds linear.  Every stochastic routine takes an explicit
seed and is bit-reproducible for a fixed (inputs, seed) pair, including
across chunked evaluation, because per-chunk generators are spawned
from one SeedSequence with a fixed chunk size.

The analytic coverage uses the mixed-domain form: the nearest-distance
density over an unbounded ball law combined with the box-domain
interference integral.  That mirrors the derivation it implements; its
agreement with the honest box Monte Carlo at the default geometry is a
tested property, not an assumption.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (DegenerateDistance, DomainError, EmptyRealization,
                     UnsupportedFading)
from .fading import gamma_power
from .quadrature import adaptive_simpson, kernel_box_integral

# exp(-46) ~ 1e-20: nearest-neighbor distances beyond the radius where
# the void probability reaches e^-46 contribute nothing at double
# precision, so the analytic outer integral stops there.
_TAIL_EXPONENT = 46.0

# absolute-tolerance coupling for the interference integral inside the
# coverage integrand: an absolute error eps/lambda on the box integral
# is a relative error eps on exp(-lambda * integral).
_INNER_EPS = 1e-4

_MC_CHUNK = 50_000


@dataclass(frozen=True)
class AirspaceVolume:
    """Axis-aligned slab: x in [-Lx, Lx], y in [-Ly, Ly], z in [0, Lz],
    shifted by ``center_offset`` into world coordinates."""
    half_extent_Lx: float = 1000.0
    half_extent_Ly: float = 1000.0
    extent_Lz: float = 1000.0
    center_offset: tuple[float, float, float] = (0.0, 0.0, 0.0)
    volume_V: float = field(init=False)

    def __post_init__(self):
        if min(self.half_extent_Lx, self.half_extent_Ly, self.extent_Lz) <= 0:
            raise ValueError("all extents must be > 0")
        object.__setattr__(self, "volume_V",
                           4.0 * self.half_extent_Lx * self.half_extent_Ly
                           * self.extent_Lz)

    @property
    def bounds(self):
        ox, oy, oz = self.center_offset
        return (ox - self.half_extent_Lx, ox + self.half_extent_Lx,
                oy - self.half_extent_Ly, oy + self.half_extent_Ly,
                oz, oz + self.extent_Lz)

    @property
    def center(self) -> np.ndarray:
        ox, oy, oz = self.center_offset
        return np.array([ox, oy, oz + 0.5 * self.extent_Lz])


@dataclass(frozen=True)
class A2aScenario:
    """One air-to-air evaluation setting.

    ``noise_N`` is always derived as n0 * B.  ``central_uav_position``
    of None resolves to the airspace center at evaluation time.
    """
    density_lambda: float = 20.0 / 4e9
    tx_power_Ps: float = 8.0
    channel_gain_Ga: float = 10.0 ** 2.3
    pathloss_exp_delta: float = 2.0
    noise_density_n0: float = 10.0 ** -20.4
    bandwidth_B: float = 1e6
    threshold_theta: float = 10.0 ** 0.7
    fading_shape_iota: float = 1.0
    central_uav_position: tuple[float, float, float] | None = None
    noise_N: float = field(init=False)

    def __post_init__(self):
        if self.density_lambda <= 0:
            raise ValueError("density_lambda must be > 0")
        if self.fading_shape_iota < 1.0:
            raise ValueError("fading_shape_iota must be >= 1")
        if self.tx_power_Ps <= 0 or self.channel_gain_Ga <= 0:
            raise ValueError("tx_power_Ps and channel_gain_Ga must be > 0")
        if self.noise_density_n0 < 0 or self.bandwidth_B <= 0:
            raise ValueError("noise density/bandwidth out of range")
        if self.threshold_theta <= 0:
            raise ValueError("threshold_theta must be > 0")
        object.__setattr__(self, "noise_N",
                           self.noise_density_n0 * self.bandwidth_B)


@dataclass(frozen=True)
class PppRealization:
    """One PPP draw: positions, distances to the central UAV, and the
    index of the nearest (tagged/serving) point."""
    points: np.ndarray
    tagged_index: int
    distances: np.ndarray


def _central(scen: A2aScenario, vol: AirspaceVolume) -> np.ndarray:
    if scen.central_uav_position is None:
        return vol.center
    return np.asarray(scen.central_uav_position, dtype=float)


@dataclass(frozen=True)
class CoverageResult:
    p_cov: float
    method: str
    trials_or_quadrature_info: dict
    std_error: float | None = None


def sample_ppp(vol: AirspaceVolume, density: float, seed,
               central=None, domain: str = "box",
               ball_radius: float | None = None) -> PppRealization:
    """Draw one PPP realization and tag the nearest point.

    ``domain="box"`` fills the airspace slab; ``domain="ball"`` fills a
    ball of ``ball_radius`` around the central position instead (used to
    validate the nearest-distance law, which is exact on a ball).
    Raises EmptyRealization when the Poisson draw is zero.
    """
    if density <= 0:
        raise ValueError("density must be > 0")
    rng = np.random.default_rng(seed)
    c = vol.center if central is None else np.asarray(central, dtype=float)
    if domain == "box":
        x0, x1, y0, y1, z0, z1 = vol.bounds
        n = int(rng.poisson(density * vol.volume_V))
        if n == 0:
            raise EmptyRealization("PPP drew zero points")
        pts = rng.uniform([x0, y0, z0], [x1, y1, z1], (n, 3))
    elif domain == "ball":
        if ball_radius is None or ball_radius <= 0:
            raise ValueError("ball domain needs a positive ball_radius")
        vball = 4.0 / 3.0 * math.pi * ball_radius ** 3
        n = int(rng.poisson(density * vball))
        if n == 0:
            raise EmptyRealization("PPP drew zero points")
        direction = rng.standard_normal((n, 3))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radii = ball_radius * rng.uniform(0.0, 1.0, n) ** (1.0 / 3.0)
        pts = c + direction * radii[:, None]
    else:
        raise ValueError(f"unknown domain {domain!r}")
    dists = np.linalg.norm(pts - c, axis=1)
    return PppRealization(points=pts, tagged_index=int(np.argmin(dists)),
                          distances=dists)


def nearest_distance_cdf(d, density: float):
    """CDF of the distance to the nearest PPP point: 1 - exp(-4/3 pi l d^3)."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise DomainError("distance must be >= 0")
    out = 1.0 - np.exp(-4.0 / 3.0 * math.pi * density * d ** 3)
    return float(out) if out.ndim == 0 else out


def nearest_distance_pdf(d, density: float):
    """Density of the nearest-point distance, 4 pi l d^2 exp(-4/3 pi l d^3)."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise DomainError("distance must be >= 0")
    out = (4.0 * math.pi * density * d ** 2
           * np.exp(-4.0 / 3.0 * math.pi * density * d ** 3))
    return float(out) if out.ndim == 0 else out


def sinr(realization: PppRealization, scen: A2aScenario,
         fading_seed=None) -> float:
    """Linear SINR of the tagged link for one realization.

    ``fading_seed=None`` fixes every fading coefficient to 1 (useful for
    closed-form checks); otherwise unit-mean Gamma(iota) power fades are
    drawn per link.
    """
    d = realization.distances
    if d.size == 0:
        raise EmptyRealization("realization has no points")
    if np.any(d == 0.0):
        raise DegenerateDistance("a point coincides with the central UAV")
    if fading_seed is None:
        rho = np.ones(d.size)
    else:
        rng = np.random.default_rng(fading_seed)
        rho = gamma_power(rng, scen.fading_shape_iota, d.size)
    w = scen.channel_gain_Ga * rho * d ** (-scen.pathloss_exp_delta)
    tag = realization.tagged_index
    interference = scen.tx_power_Ps * (w.sum() - w[tag])
    return float(scen.tx_power_Ps * w[tag] / (scen.noise_N + interference))


def _sinr_chunks(scen: A2aScenario, vol: AirspaceVolume, trials: int, seed,
                 chunk: int = _MC_CHUNK):
    """Vectorized SINR trials, yielded per chunk.

    Yields (gamma, n_empty) where ``gamma`` holds one SINR per non-empty
    trial in the chunk.  Point counts, positions, and fades are drawn
    from a per-chunk generator spawned off one SeedSequence, so results
    are reproducible and independent of chunk evaluation order.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    x0, x1, y0, y1, z0, z1 = vol.bounds
    c = _central(scen, vol)
    mean_count = scen.density_lambda * vol.volume_V
    delta = scen.pathloss_exp_delta
    ss = seed if isinstance(seed, np.random.SeedSequence) \
        else np.random.SeedSequence(seed)
    n_chunks = (trials + chunk - 1) // chunk
    children = ss.spawn(n_chunks)
    done = 0
    for child in children:
        n = min(chunk, trials - done)
        done += n
        rng = np.random.default_rng(child)
        counts = rng.poisson(mean_count, n)
        tot = int(counts.sum())
        if tot == 0:
            yield np.empty(0), n
            continue
        pts = rng.uniform([x0, y0, z0], [x1, y1, z1], (tot, 3))
        rho = gamma_power(rng, scen.fading_shape_iota, tot)
        d = np.linalg.norm(pts - c, axis=1)
        w = scen.channel_gain_Ga * rho * d ** (-delta)
        seg = np.repeat(np.arange(n), counts)
        w_sum = np.bincount(seg, weights=w, minlength=n)
        order = np.lexsort((d, seg))
        seg_sorted = seg[order]
        present, first = np.unique(seg_sorted, return_index=True)
        tag_idx = order[first]
        w_tag = w[tag_idx]
        interference = scen.tx_power_Ps * (w_sum[present] - w_tag)
        gamma = scen.tx_power_Ps * w_tag / (scen.noise_N + interference)
        yield gamma, n - present.size


def coverage_probability_mc(scen: A2aScenario, vol: AirspaceVolume,
                            trials: int, seed) -> CoverageResult:
    """Monte-Carlo coverage probability P(SINR >= theta).

    Empty realizations count as non-coverage (there is no server to
    receive from).
    """
    covered = 0
    for gamma, _ in _sinr_chunks(scen, vol, trials, seed):
        covered += int((gamma >= scen.threshold_theta).sum())
    p = covered / trials
    se = math.sqrt(p * (1.0 - p) / trials)
    return CoverageResult(
        p_cov=p, method="monte-carlo",
        trials_or_quadrature_info={"trials": trials, "seed": seed,
                                   "chunk": _MC_CHUNK},
        std_error=se)


def interference_laplace(lambda_arg: float, scen: A2aScenario,
                         vol: AirspaceVolume,
                         rel_tol: float = 1e-5, abs_tol: float = 0.0,
                         budget: int = 5_000_000) -> float:
    """Laplace functional of the box interference at argument Lambda.

    Returns exp(-density * I) with
    I = integral over the box of [1 - 1/(1 + Lambda*Ga*r^-delta)] dV,
    which simplifies to the kernel c/(r^delta + c) with c = Lambda*Ga.
    Exact for unit-mean exponential power fading (iota = 1).
    """
    if lambda_arg < 0:
        raise DomainError(f"Lambda must be >= 0, got {lambda_arg}")
    if lambda_arg == 0.0:
        return 1.0
    coef = lambda_arg * scen.channel_gain_Ga
    theta_int = kernel_box_integral(vol.bounds, _central(scen, vol), coef,
                                    scen.pathloss_exp_delta,
                                    rel_tol=rel_tol, abs_tol=abs_tol,
                                    budget=budget)
    return math.exp(-scen.density_lambda * theta_int)


def coverage_probability_analytic(scen: A2aScenario, vol: AirspaceVolume,
                                  rel_tol: float = 1e-4,
                                  inner_budget: int = 5_000_000,
                                  outer_budget: int = 20_000) -> CoverageResult:
    """Coverage probability by quadrature over the association distance.

    Composes the nearest-distance density, the noise term, and the
    interference Laplace functional:

        p = int_0^dmax 4 pi l d^2
                exp(-theta d^delta N / (Ps Ga) - l*I(d) - 4/3 pi l d^3) dd

    Only exponential power fading (iota = 1) admits this form.
    """
    if scen.fading_shape_iota != 1.0:
        raise UnsupportedFading(
            "analytic coverage requires iota = 1 (exponential power fading); "
            f"got iota = {scen.fading_shape_iota}")
    lam = scen.density_lambda
    delta = scen.pathloss_exp_delta
    theta = scen.threshold_theta
    noise_over = scen.noise_N / (scen.tx_power_Ps * scen.channel_gain_Ga)
    d_max = (3.0 * _TAIL_EXPONENT / (4.0 * math.pi * lam)) ** (1.0 / 3.0)
    abs_tol_inner = _INNER_EPS / lam
    bounds = vol.bounds
    c = _central(scen, vol)
    four_thirds_pi_lam = 4.0 / 3.0 * math.pi * lam

    def integrand(d):
        if d <= 0.0:
            return 0.0
        coef = theta * d ** delta
        theta_int = kernel_box_integral(bounds, c, coef, delta,
                                        rel_tol=1e-5, abs_tol=abs_tol_inner,
                                        budget=inner_budget)
        return (4.0 * math.pi * lam * d * d
                * math.exp(-coef * noise_over - lam * theta_int
                           - four_thirds_pi_lam * d ** 3))

    value, evals = adaptive_simpson(integrand, 0.0, d_max, rel_tol=rel_tol,
                                    budget=outer_budget)
    return CoverageResult(
        p_cov=min(max(value, 0.0), 1.0), method="analytic",
        trials_or_quadrature_info={"d_max": d_max, "outer_evals": evals,
                                   "outer_rel_tol": rel_tol},
        std_error=None)


def averaged_sinr_sweep(densities, scen: A2aScenario, vol: AirspaceVolume,
                        trials: int, seed) -> list[tuple[float, float]]:
    """Mean SINR (in dB, averaged over dB samples) per density.

    ``densities`` are per-m3 intensities.  Each density gets its own
    generator derived from (seed, index), so adding or removing grid
    points does not shift the other points' draws.  Empty realizations
    carry no SINR and are excluded from the mean.
    """
    if len(densities) == 0:
        raise ValueError("densities must be non-empty")
    out = []
    for i, dens in enumerate(densities):
        point = replace(scen, density_lambda=float(dens))
        ss = np.random.SeedSequence([int(seed), i])
        total = 0.0
        count = 0
        for gamma, _ in _sinr_chunks(point, vol, trials, ss):
            if gamma.size:
                total += float(np.sum(10.0 * np.log10(gamma)))
                count += gamma.size
        mean_db = total / count if count else float("nan")
        out.append((float(dens), mean_db))
    return out
