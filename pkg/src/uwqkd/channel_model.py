"""Classical optics of the underwater link.

Everything here is a pure function of immutable inputs: Beer-Lambert style
attenuation with the aperture correction exponent, ambient irradiance at
depth, the receiver solid angle, the per-pulse noise probability and the
resulting end-to-end detection efficiencies.

All angles are radians and all lengths metres. Degrees only appear in
configuration files and on the command line (see :mod:`uwqkd.config`).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import DomainError, NoiseWarning

# CODATA 2018 exact values
PLANCK = 6.62607015e-34  # J s
SPEED_OF_LIGHT = 299792458.0  # m / s
BOLTZMANN = 1.380649e-23  # J / K

#: Aperture correction exponent keyed by pupil diameter in metres (d1 = d2).
CORRECTION_FACTORS: dict[float, float] = {
    0.05: 0.13,
    0.10: 0.16,
    0.20: 0.21,
    0.30: 0.26,
}

#: Surface irradiance (W/m^2) for the five illumination scenarios.
SCENARIO_IRRADIANCE: dict[int, float] = {
    1: 1e-3,  # clear sky, full moon at zenith
    2: 10.0,  # heavy overcast, sun near horizon
    3: 50.0,  # hazy, sun near horizon
    4: 125.0,  # heavy overcast, sun at zenith
    5: 500.0,  # clear sky, sun at zenith
}

WATER_TYPES = ("clear", "coastal", "turbid")


@dataclass(frozen=True)
class WaterProfile:
    """Optical constants of one water type.

    Parameters
    ----------
    name : {"clear", "coastal", "turbid"}
    alpha : float
        Extinction coefficient in 1/m.
    gamma_dep : float
        Linear depolarization coefficient in 1/m.
    """

    name: str
    alpha: float
    gamma_dep: float

    def __post_init__(self):
        if self.name not in WATER_TYPES:
            raise DomainError(f"unknown water type {self.name!r}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not self.gamma_dep >= 0:
            raise DomainError(f"gamma_dep must be non-negative, got {self.gamma_dep}")


WATER_PROFILES: dict[str, WaterProfile] = {
    "clear": WaterProfile("clear", 0.151, 2.4e-6),
    "coastal": WaterProfile("coastal", 0.339, 3.7e-6),
    "turbid": WaterProfile("turbid", 2.195, 7.5e-6),
}


@dataclass(frozen=True)
class SystemConfig:
    """Transmitter, receiver, detector and environment parameters (SI units).

    ``theta`` is the full beam divergence angle and is used as-is in the
    attenuation law. ``t_corr`` is the aperture correction exponent; use
    :func:`correction_factor` to look it up for the tabulated pupils.
    """

    wavelength: float
    theta: float
    delta: float
    d1: float
    d2: float
    delta_lambda: float
    delta_t: float
    delta_t_prime: float
    eta_alice: float
    eta_bob: float
    mu: float
    dark_count_rate: float
    k_inf: float
    depth: float
    surface_irradiance: float
    e_det: float
    t_corr: float

    def __post_init__(self):
        for name in ("wavelength", "theta", "delta", "d1", "d2", "delta_lambda",
                     "delta_t", "delta_t_prime", "mu"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be positive and finite, got {value}")
        for name in ("dark_count_rate", "k_inf", "depth", "surface_irradiance"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be non-negative and finite, got {value}")
        for name in ("eta_alice", "eta_bob"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise DomainError(f"{name} must lie in [0, 1], got {value}")
        if not 0 <= self.e_det < 0.5:
            raise DomainError(f"e_det must lie in [0, 0.5), got {self.e_det}")
        if not 0 < self.t_corr < 1:
            raise DomainError(f"t_corr must lie in (0, 1), got {self.t_corr}")
        if self.delta > 2 * math.pi:
            raise DomainError(f"delta must not exceed 2*pi, got {self.delta}")


@dataclass(frozen=True)
class NoiseTerms:
    """The two additive contributions to the per-pulse noise probability."""

    dark: float
    background: float

    @property
    def total(self) -> float:
        return self.dark + self.background


@dataclass(frozen=True)
class LinkBudget:
    """Derived per-link quantities for a source at ``x`` on a link of length ``L``."""

    A_alice: float
    A_bob: float
    eta_A: float
    eta_B: float
    y0: float
    noise: NoiseTerms


def correction_factor(pupil: float) -> float:
    """Return the tabulated aperture correction exponent for ``pupil`` metres.

    Only the four tabulated diameters are accepted. Any other pupil needs an
    explicit ``t_corr``; no interpolation rule is known.
    """
    for diameter, t_corr in CORRECTION_FACTORS.items():
        if math.isclose(pupil, diameter, rel_tol=1e-9, abs_tol=0.0):
            return t_corr
    known = ", ".join(f"{d * 100:g} cm" for d in CORRECTION_FACTORS)
    raise DomainError(
        f"no tabulated correction factor for a {pupil * 100:g} cm pupil "
        f"(known: {known}); supply t_corr explicitly"
    )


def optical_depth(L: float, water: WaterProfile, sys: SystemConfig) -> float:
    """Exponent of the modified Beer-Lambert law, alpha*L*(d1/(theta*L))**T."""
    if L < 0:
        raise DomainError(f"distance must be non-negative, got {L}")
    T = sys.t_corr
    if not 0 < T < 1:
        raise DomainError(f"t_corr must lie in (0, 1), got {T}")
    # written as L**(1-T) so tiny L neither overflows nor divides by zero
    return water.alpha * L ** (1 - T) * (sys.d1 / sys.theta) ** T


def attenuation(L: float, water: WaterProfile, sys: SystemConfig) -> float:
    """Transmittance A(L) of a path of length ``L`` metres, in [0, 1]."""
    return math.exp(-optical_depth(L, water, sys))


def irradiance(z: float, R0: float, k_inf: float) -> float:
    """Ambient irradiance at depth ``z`` for surface irradiance ``R0``."""
    if z < 0:
        raise DomainError(f"depth must be non-negative, got {z}")
    return R0 * math.exp(-k_inf * z)


def solid_angle(delta: float) -> float:
    """Solid angle (sr) of a cone with full opening angle ``delta`` radians."""
    if not 0 <= delta <= 2 * math.pi:
        raise DomainError(f"field of view must lie in [0, 2*pi], got {delta}")
    return 2 * math.pi * (1 - math.cos(delta / 2))


def noise_terms(sys: SystemConfig) -> NoiseTerms:
    """Dark-count and ambient-light contributions to y0, kept separate."""
    dark = 4 * sys.dark_count_rate * sys.delta_t
    R = irradiance(sys.depth, sys.surface_irradiance, sys.k_inf)
    area = math.pi * (sys.d2 / 2) ** 2
    omega = solid_angle(sys.delta)
    background = (R * area * sys.delta_t_prime * sys.wavelength * sys.delta_lambda * omega
                  / (PLANCK * SPEED_OF_LIGHT))
    return NoiseTerms(dark=dark, background=background)


def noise_probability(sys: SystemConfig, water: WaterProfile | None = None) -> float:
    """Per-pulse probability y0 of a noise detection.

    ``water`` is accepted for interface symmetry; the diffuse attenuation
    coefficient lives on ``sys`` and is shared by all water types.
    A :class:`~uwqkd.errors.NoiseWarning` is emitted when y0 >= 1, where the
    value can no longer be read as a probability.
    """
    y0 = noise_terms(sys).total
    if y0 >= 1:
        warnings.warn(f"noise probability y0 = {y0:.3g} is not below 1", NoiseWarning,
                      stacklevel=2)
    return y0


def link_budget(x: float, L: float, water: WaterProfile, sys: SystemConfig) -> LinkBudget:
    """Efficiencies for a source at distance ``x`` from Alice on a link of length ``L``.

    Prepare-and-measure protocols put the source at Alice, ``x = 0``.
    """
    if not 0 <= x <= L:
        raise DomainError(f"source position must satisfy 0 <= x <= L, got x={x}, L={L}")
    A_alice = attenuation(x, water, sys)
    A_bob = attenuation(L - x, water, sys)
    noise = noise_terms(sys)
    if noise.total >= 1:
        warnings.warn(f"noise probability y0 = {noise.total:.3g} is not below 1",
                      NoiseWarning, stacklevel=2)
    return LinkBudget(
        A_alice=A_alice,
        A_bob=A_bob,
        eta_A=sys.eta_alice * A_alice,
        eta_B=sys.eta_bob * A_bob,
        y0=noise.total,
        noise=noise,
    )
