"""Small-scale fading draws, all normalized to unit mean.

Two families are used in the package:

* Rician amplitude fading on the air-to-ground link.  Draws are scaled so
  the envelope itself has mean 1 (not unit mean power), so multiplying a
  field amplitude by a draw leaves the average amplitude unchanged.
* Gamma power fading (Nakagami-m power) on the air-to-air links, with
  shape ``iota`` and unit mean; ``iota = 1`` is the exponential /
  Rayleigh-power case required by the analytic coverage expression.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special


def rician_mean_envelope(k_factor: float) -> float:
    """Mean of a Rician envelope with E[v^2] = 1 and Rice factor K.

    With nu^2 = K/(K+1) and 2*sigma^2 = 1/(K+1), the mean is
    sigma*sqrt(pi/2)*exp(-K/2)*[(1+K)*I0(K/2) + K*I1(K/2)]; the
    exponentially scaled Bessel functions keep this stable for large K.
    """
    if k_factor < 0:
        raise ValueError("Rice K factor must be >= 0")
    sigma = math.sqrt(1.0 / (2.0 * (1.0 + k_factor)))
    half = 0.5 * k_factor
    return (sigma * math.sqrt(math.pi / 2.0)
            * ((1.0 + k_factor) * special.i0e(half) + k_factor * special.i1e(half)))


def rician_envelope(rng: np.random.Generator, k_factor: float, size=None):
    """Unit-mean Rician envelope samples.

    ``k_factor`` is the linear Rice factor (specular power over diffuse
    power); 0 degenerates to Rayleigh.
    """
    nu = math.sqrt(k_factor / (1.0 + k_factor))
    sigma = math.sqrt(1.0 / (2.0 * (1.0 + k_factor)))
    x = nu + sigma * rng.standard_normal(size)
    y = sigma * rng.standard_normal(size)
    return np.hypot(x, y) / rician_mean_envelope(k_factor)


def rayleigh_envelope(rng: np.random.Generator, size=None):
    """Unit-mean Rayleigh envelope samples (Rician with K = 0)."""
    return rician_envelope(rng, 0.0, size)


def gamma_power(rng: np.random.Generator, iota: float, size=None):
    """Unit-mean Gamma(iota) power fading samples; iota = 1 is exponential."""
    if iota < 1.0:
        raise ValueError("fading shape iota must be >= 1")
    return rng.gamma(iota, 1.0 / iota, size)
