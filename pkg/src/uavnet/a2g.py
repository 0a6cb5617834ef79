"""Air-to-ground link over a spherical earth.

Solves the specular-reflection geometry between a UAV and a ground
station on a sphere (arc split, grazing angle, path-length difference),
evaluates the ground reflection coefficient and the divergence factor,
sums the line-of-sight and reflected fields coherently, and turns the
result into received power and path loss.  Optional unit-mean Rician
fading rides on top of the deterministic field.

Geometry comes in two flavours, selected by ``geometry_mode``:

* ``"exact"`` (default): grazing angle from the actual ray vectors at the
  reflection point and path difference ``(r1 + r2) - R1``.  Valid at any
  elevation, which matters because the default experiment geometry is a
  steep link (UAV almost overhead).
* ``"grazing"``: the closed-form small-angle approximations
  ``psi = (H + H_G) * (1 - w1*(1 + w2^2)) / s`` and
  ``ds = 2*s1*s2*psi^2 / s``.  These are only meaningful when the arc is
  long compared to the heights; at steep geometries the approximated
  "angle" exceeds pi/2 and downstream operations reject it.

Everything here is deterministic given its inputs; fading draws take an
explicit seed.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, GeometryError
from .fading import rician_envelope

SPEED_OF_LIGHT = 299792458.0
VACUUM_PERMITTIVITY = 8.8541878128e-12
EARTH_RADIUS = 6371000.0


@dataclass(frozen=True)
class EarthModel:
    """Spherical earth, optionally scaled to an effective radius."""
    radius_a: float = EARTH_RADIUS
    effective_radius_factor: float = 1.0

    def __post_init__(self):
        if self.radius_a <= 0:
            raise ValueError("radius_a must be > 0")
        if self.effective_radius_factor <= 0:
            raise ValueError("effective_radius_factor must be > 0")

    @property
    def effective_radius(self) -> float:
        return self.radius_a * self.effective_radius_factor


@dataclass(frozen=True)
class A2gEndpoints:
    """UAV and ground-station placement plus carrier frequency.

    Heights are above the sphere surface; ``ground_arc_s`` is the
    great-circle arc between the two sub-points.  The wavelength is
    derived from the frequency and cannot be set independently.
    """
    uav_height_H: float
    gs_height_HG: float
    ground_arc_s: float
    frequency_f: float
    wavelength_lambda: float = field(init=False)

    def __post_init__(self):
        if not self.uav_height_H > self.gs_height_HG >= 0:
            raise ValueError("need uav_height_H > gs_height_HG >= 0")
        if self.ground_arc_s < 0:
            raise ValueError("ground_arc_s must be >= 0")
        if self.frequency_f <= 0:
            raise ValueError("frequency_f must be > 0")
        object.__setattr__(self, "wavelength_lambda",
                           SPEED_OF_LIGHT / self.frequency_f)


@dataclass(frozen=True)
class GroundElectrical:
    """Electrical properties of the reflecting ground."""
    rel_permittivity_eps_r: float
    conductivity_sigma: float
    vacuum_permittivity_eps0: float = VACUUM_PERMITTIVITY

    def __post_init__(self):
        if self.rel_permittivity_eps_r < 1:
            raise ValueError("rel_permittivity_eps_r must be >= 1")
        if self.conductivity_sigma < 0:
            raise ValueError("conductivity_sigma must be >= 0")

    def loss_term_b(self, frequency_f: float) -> float:
        """Dimensionless loss term b = sigma / (2 pi f eps0)."""
        return self.conductivity_sigma / (
            2.0 * math.pi * frequency_f * self.vacuum_permittivity_eps0)


@dataclass(frozen=True)
class CemrGeometry:
    """Solved specular geometry: arc split, angles, and ray lengths."""
    arc_s1: float
    arc_s2: float
    angle_phi: float
    angle_phi1: float
    angle_phi2: float
    omega1: float
    omega2: float
    omega3: float
    grazing_angle_psi: float
    los_distance_R1: float
    reflect_r1: float
    reflect_r2: float
    path_delta_s: float
    phase_delta_phi: float


@dataclass(frozen=True)
class RayContribution:
    """One reflected ray, ready for the coherent field sum."""
    reflection_gamma: complex
    divergence_D: float
    phase_delta: float


@dataclass(frozen=True)
class A2gLinkBudget:
    """Transmit-side parameters plus (after path_loss) the link outputs.

    ``rice_k_factor`` is the linear Rice factor; ``None`` disables fading
    entirely.  ``total_gain_Gg`` is derived as Gt*Gr when omitted.
    """
    tx_power_Pc: float
    tx_gain_Gt: float
    rx_gain_Gr: float
    total_gain_Gg: float | None = None
    beamwidth_rho: float = math.pi / 2.0
    rice_k_factor: float | None = 10.0
    field_EG: complex | None = None
    rx_power_PG: float | None = None
    path_loss_PL: float | None = None

    def __post_init__(self):
        if self.tx_power_Pc <= 0 or self.tx_gain_Gt <= 0 or self.rx_gain_Gr <= 0:
            raise ValueError("powers and gains must be > 0")
        if not 0 < self.beamwidth_rho <= math.pi:
            raise ValueError("beamwidth_rho must be in (0, pi]")
        prod = self.tx_gain_Gt * self.rx_gain_Gr
        if self.total_gain_Gg is None:
            object.__setattr__(self, "total_gain_Gg", prod)
        elif not math.isclose(self.total_gain_Gg, prod, rel_tol=1e-9):
            raise ValueError("total_gain_Gg inconsistent with Gt * Gr")

    @property
    def ray_count(self) -> int:
        """Number of reflected rays the beamwidth admits."""
        return int(math.floor(math.pi / (2.0 * self.beamwidth_rho)))


def _chord(x: float, y: float, theta: float) -> float:
    # law of cosines sqrt(x^2 + y^2 - 2xy cos t) in the cancellation-free
    # half-angle form; the naive form loses everything when t ~ 1e-11 at
    # huge effective radii (flat-earth limit).
    return math.sqrt((x - y) ** 2 + 4.0 * x * y * math.sin(0.5 * theta) ** 2)


def _ray_elevation(height: float, radius: float, phi: float) -> float:
    # grazing angle at the reflection point for the ray to an endpoint at
    # `height` with arc angle `phi`; (a+H)cos(phi) - a rewritten to avoid
    # cancellation.
    up = height * math.cos(phi) - 2.0 * radius * math.sin(0.5 * phi) ** 2
    return math.atan2(up, (radius + height) * math.sin(phi))


def solve_specular_geometry(endpoints: A2gEndpoints, earth: EarthModel,
                            geometry_mode: str = "exact") -> CemrGeometry:
    """Locate the specular reflection point and solve the ray geometry.

    Splits the ground arc s into s1 (UAV side) and s2 via the cubic-root
    closed form, then builds chord lengths, grazing angle, and the
    LoS/reflected path difference.  ``geometry_mode`` picks between the
    exact vector geometry and the closed-form grazing approximations for
    psi and delta-s (see module docstring).
    """
    if geometry_mode not in ("exact", "grazing"):
        raise ValueError(f"unknown geometry_mode {geometry_mode!r}")
    a = earth.effective_radius
    hp = endpoints.uav_height_H
    hg = endpoints.gs_height_HG
    s = endpoints.ground_arc_s
    if s <= 0.0:
        raise GeometryError("ground arc s = 0: omega1 is undefined")

    omega1 = s * s / (4.0 * a * (hp + hg))
    omega2 = (hp - hg) / (hp + hg)
    arg = 1.5 * omega2 * math.sqrt(3.0 * omega1 / (omega1 + 1.0) ** 3)
    if not -1.0 <= arg <= 1.0:
        raise GeometryError(
            f"arccos argument {arg} outside [-1, 1] while splitting the arc")
    omega3 = (2.0 * math.sqrt((omega1 + 1.0) / (3.0 * omega1))
              * math.cos(math.pi / 3.0 + math.acos(arg) / 3.0))

    # omega3 <= 1 analytically (equality when the station sits on the
    # surface); clamp the float overshoot so s2 cannot round negative
    s1 = min(s * (1.0 + omega3) / 2.0, s)
    s2 = s - s1
    phi1 = s1 / a
    phi2 = s2 / a
    phi = phi1 + phi2

    R1 = _chord(a + hp, a + hg, phi)
    r1 = _chord(a + hp, a, phi1)
    r2 = _chord(a + hg, a, phi2)

    if geometry_mode == "grazing":
        psi = (hp + hg) * (1.0 - omega1 * (1.0 + omega2 * omega2)) / s
        ds = 2.0 * s1 * s2 * psi * psi / s
    else:
        psi1 = _ray_elevation(hp, a, phi1)
        psi2 = _ray_elevation(hg, a, phi2)
        psi = 0.5 * (psi1 + psi2)
        ds = (r1 + r2) - R1

    if psi <= 0.0:
        raise GeometryError(
            f"grazing angle psi = {psi:.6g} <= 0: endpoint beyond the radio "
            f"horizon for arc s = {s} m")

    return CemrGeometry(
        arc_s1=s1, arc_s2=s2,
        angle_phi=phi, angle_phi1=phi1, angle_phi2=phi2,
        omega1=omega1, omega2=omega2, omega3=omega3,
        grazing_angle_psi=psi,
        los_distance_R1=R1, reflect_r1=r1, reflect_r2=r2,
        path_delta_s=ds,
        phase_delta_phi=2.0 * math.pi * ds / endpoints.wavelength_lambda,
    )


def reflection_coefficient(geom: CemrGeometry, ground: GroundElectrical,
                           frequency_f: float,
                           mode: str = "standard") -> complex:
    """Ground reflection coefficient at the solved grazing angle.

    ``mode="standard"`` uses cos^2(psi) under the radical (the usual
    vertical-polarization Fresnel form); ``mode="paper-literal"`` keeps a
    bare cos(psi) there.  Both share the complex permittivity
    ``eps_r - j*b``.
    """
    psi = geom.grazing_angle_psi
    return _reflection_at(psi, ground, frequency_f, mode)


def _reflection_at(psi: float, ground: GroundElectrical, frequency_f: float,
                   mode: str) -> complex:
    if mode not in ("standard", "paper-literal"):
        raise ValueError(f"unknown reflection mode {mode!r}")
    # pi/2 itself is normal incidence, a valid (and testable) evaluation
    if not 0.0 < psi <= math.pi / 2.0:
        raise DomainError(
            f"grazing angle psi = {psi:.6g} outside (0, pi/2]")
    eps = complex(ground.rel_permittivity_eps_r,
                  -ground.loss_term_b(frequency_f))
    c = math.cos(psi)
    radicand = eps - (c * c if mode == "standard" else c)
    root = cmath.sqrt(radicand)
    sin_psi = math.sin(psi)
    return (eps * sin_psi - root) / (eps * sin_psi + root)


def divergence_factor(geom: CemrGeometry, earth: EarthModel) -> float:
    """Spherical-spreading correction for the reflected ray, in (0, 1]."""
    return _divergence_at(geom.reflect_r1, geom.reflect_r2,
                          geom.grazing_angle_psi, earth.effective_radius)


def _divergence_at(r1: float, r2: float, psi: float, radius: float) -> float:
    if r1 <= 0 or r2 <= 0:
        raise DomainError("ray segments r1, r2 must be > 0")
    if not 0.0 < psi <= math.pi / 2.0:
        raise DomainError(f"grazing angle psi = {psi:.6g} outside (0, pi/2]")
    sin_psi = math.sin(psi)
    if sin_psi == 0.0:
        raise DomainError("sin(psi) = 0: divergence factor singular")
    return (1.0 + 2.0 * r1 * r2 / (radius * (r1 + r2) * sin_psi)) ** -0.5


def received_field(budget: A2gLinkBudget, rays: list[RayContribution]) -> complex:
    """Coherent sum of the LoS field and the reflected-ray contributions.

    The LoS reference amplitude satisfies |E_LoS|^2 = Pc * Gt; each ray
    adds D * |Gamma| * exp(-j*(delta_phi - arg Gamma)).
    """
    e_los = math.sqrt(budget.tx_power_Pc * budget.tx_gain_Gt)
    total = complex(1.0, 0.0)
    for ray in rays:
        mag = abs(ray.reflection_gamma)
        phase = cmath.phase(ray.reflection_gamma)
        total += (ray.divergence_D * mag
                  * cmath.exp(-1j * (ray.phase_delta - phase)))
    return e_los * total


def _build_rays(endpoints: A2gEndpoints, earth: EarthModel,
                ground: GroundElectrical, geom: CemrGeometry,
                n_rays: int, reflection_mode: str) -> list[RayContribution]:
    """Reflected-ray contributions for the field sum.

    One ray is the plain specular geometry.  More rays (an extension past
    the single-reflector derivation) place the t-th reflection point at
    arc position s1*t/T from the UAV sub-point and reuse the same
    chord/angle/divergence machinery at each point; the t = T ray is the
    specular one.
    """
    a = earth.effective_radius
    rays = []
    if n_rays == 1:
        gamma = reflection_coefficient(geom, ground, endpoints.frequency_f,
                                       reflection_mode)
        d = divergence_factor(geom, earth)
        rays.append(RayContribution(gamma, d, geom.phase_delta_phi))
        return rays
    for t in range(1, n_rays + 1):
        u = geom.arc_s1 * t / n_rays
        phi1 = u / a
        phi2 = (endpoints.ground_arc_s - u) / a
        r1 = _chord(a + endpoints.uav_height_H, a, phi1)
        r2 = _chord(a + endpoints.gs_height_HG, a, phi2)
        psi1 = _ray_elevation(endpoints.uav_height_H, a, phi1)
        psi2 = _ray_elevation(endpoints.gs_height_HG, a, phi2)
        psi = 0.5 * (psi1 + psi2)
        if psi <= 0.0:
            raise GeometryError(
                f"ray {t}/{n_rays}: reflection point beyond the horizon")
        ds = (r1 + r2) - geom.los_distance_R1
        dphi = 2.0 * math.pi * ds / endpoints.wavelength_lambda
        gamma = _reflection_at(psi, ground, endpoints.frequency_f,
                               reflection_mode)
        d = _divergence_at(r1, r2, psi, a)
        rays.append(RayContribution(gamma, d, dphi))
    return rays


def path_loss(endpoints: A2gEndpoints, earth: EarthModel,
              ground: GroundElectrical, budget: A2gLinkBudget,
              geometry_mode: str = "exact",
              reflection_mode: str = "standard",
              n_rays: int | None = None,
              fading: str = "off",
              fading_seed=None,
              fading_draws: int = 1000) -> A2gLinkBudget:
    """Complete the link budget: field sum, received power, path loss.

    ``n_rays=None`` takes the ray count from the beamwidth
    (floor(pi/(2*rho))); 0 suppresses reflections entirely, giving the
    free-space result.  ``fading`` is one of:

    * ``"off"``: deterministic field only;
    * ``"sample"``: multiply the field by one unit-mean Rician envelope
      draw (K from ``budget.rice_k_factor``);
    * ``"expectation"``: average the path loss over ``fading_draws``
      seeded envelope draws.

    The returned budget always satisfies PL = -10*log10(PG / Pc).
    """
    geom = solve_specular_geometry(endpoints, earth, geometry_mode)
    t = budget.ray_count if n_rays is None else n_rays
    if t < 0:
        raise ValueError("n_rays must be >= 0")
    rays = _build_rays(endpoints, earth, ground, geom, t,
                       reflection_mode) if t > 0 else []
    e_g = received_field(budget, rays)

    lam = endpoints.wavelength_lambda
    r1 = geom.los_distance_R1
    spread = (lam / (4.0 * math.pi * r1)) ** 2
    p_g = abs(e_g) ** 2 * budget.rx_gain_Gr * spread

    if fading != "off":
        if budget.rice_k_factor is None:
            raise ValueError("fading requested but rice_k_factor is None")
        rng = np.random.default_rng(fading_seed)
        if fading == "sample":
            v = float(rician_envelope(rng, budget.rice_k_factor))
            p_g = p_g * v * v
            pl = -10.0 * math.log10(p_g / budget.tx_power_Pc)
        elif fading == "expectation":
            v = rician_envelope(rng, budget.rice_k_factor, fading_draws)
            base = -10.0 * math.log10(p_g / budget.tx_power_Pc)
            pl = base + float(np.mean(-20.0 * np.log10(v)))
            # keep PL = -10 log10(PG/Pc) exact for the averaged loss
            p_g = budget.tx_power_Pc * 10.0 ** (-pl / 10.0)
        else:
            raise ValueError(f"unknown fading mode {fading!r}")
    else:
        pl = -10.0 * math.log10(p_g / budget.tx_power_Pc)

    return replace(budget, field_EG=e_g, rx_power_PG=p_g, path_loss_PL=pl)


def free_space_path_loss(endpoints: A2gEndpoints, earth: EarthModel,
                         budget: A2gLinkBudget) -> float:
    """Friis loss minus antenna gains over the same slant distance."""
    geom = solve_specular_geometry(endpoints, earth)
    return (20.0 * math.log10(4.0 * math.pi * geom.los_distance_R1
                              / endpoints.wavelength_lambda)
            - 10.0 * math.log10(budget.total_gain_Gg))
