"""Distance sweeps and threshold solving on top of the analytic models.

Protocols are named ``bb84``, ``sarg04``, ``bbm92`` (detector errors only)
and ``bbm92-kraus`` (decoherence through the Kraus channel). Prepare-and-
measure protocols always place the source at Alice; the entanglement-based
ones put it at ``x = x_fraction * L``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .channel_model import SCENARIO_IRRADIANCE, SystemConfig, WaterProfile, link_budget
from .errors import DomainError, NoCrossingError
from .montecarlo import McConfig, McResult, derive_seed, simulate
from .protocol_analytics import (
    THRESHOLDS,
    QberResult,
    qber_bb84,
    qber_bbm92_simple,
    qber_sarg04,
)
from .quantum_channel import channel_pipeline, correlation_xx, qber_bbm92_kraus

PROTOCOLS = ("bb84", "sarg04", "bbm92", "bbm92-kraus")

L_LO = 0.01
L_HI = 500.0
L_FLOOR = 1e-6
DISTANCE_TOL = 1e-3
RELATIVE_TOL = 1e-9
QBER_TOL = 5e-4
MAX_ITERATIONS = 60
SCAN_POINTS = 200
SOURCE_FRACTIONS = tuple(round(0.05 * i, 2) for i in range(11))


@dataclass(frozen=True)
class CurvePoint:
    x_value: float
    qber: float
    gain: float
    corr_xx: float | None = None
    method: str = "analytic"
    std_err: float | None = None


@dataclass(frozen=True)
class SecureDistanceResult:
    """Distance at which the QBER first rises through ``threshold``.

    ``monotone`` reports whether the QBER was non-decreasing on the scan
    points up to the crossing.
    """

    L_max: float
    threshold: float
    iterations: int
    bracket: tuple[float, float]
    qber: float
    monotone: bool = True
    x_fraction: float = 0.0


def threshold_for(protocol: str) -> float:
    _check_protocol(protocol)
    return THRESHOLDS[protocol.split("-")[0]]


def _check_protocol(protocol: str) -> None:
    if protocol not in PROTOCOLS:
        raise DomainError(f"unknown protocol {protocol!r}; expected one of {PROTOCOLS}")


def with_scenario(sys: SystemConfig, scenario: int | None) -> SystemConfig:
    """``sys`` with the surface irradiance of ``scenario``; ``None`` keeps it."""
    if scenario is None:
        return sys
    try:
        return replace(sys, surface_irradiance=SCENARIO_IRRADIANCE[scenario])
    except KeyError:
        raise DomainError(f"unknown scenario {scenario!r}") from None


def source_position(protocol: str, L: float, x_fraction: float) -> float:
    if not 0 <= x_fraction <= 1:
        raise DomainError(f"x_fraction must lie in [0, 1], got {x_fraction}")
    return 0.0 if protocol in ("bb84", "sarg04") else x_fraction * L


def qber_model(protocol: str, water: WaterProfile, sys: SystemConfig, x_fraction: float = 0.5,
               *, approx: bool = False, damping_model: str = "transmittance"
               ) -> Callable[[float], QberResult]:
    """Return ``L -> QberResult`` for one protocol and configuration."""
    _check_protocol(protocol)
    source_position(protocol, 1.0, x_fraction)

    def evaluate(L: float) -> QberResult:
        x = source_position(protocol, L, x_fraction)
        if protocol == "bbm92-kraus":
            return qber_bbm92_kraus(x, L, water, sys, approx=approx, damping_model=damping_model)
        if protocol == "bbm92":
            return qber_bbm92_simple(x, L, water, sys, approx=approx)
        link = link_budget(x, L, water, sys)
        fn = qber_bb84 if protocol == "bb84" else qber_sarg04
        return fn(link.y0, link.eta_B, sys.mu, sys.e_det)

    return evaluate


def _check_grid(L_grid) -> np.ndarray:
    grid = np.asarray(L_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("distance grid must be a non-empty 1-D sequence")
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise DomainError("distances must be finite and non-negative")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("distance grid must be strictly increasing")
    return grid


def montecarlo_point(protocol: str, water: WaterProfile, sys: SystemConfig, x_fraction: float,
                     L: float, mc: McConfig) -> McResult:
    """One Monte Carlo run at distance ``L``, configured like :func:`qber_model`."""
    _check_protocol(protocol)
    x = source_position(protocol, L, x_fraction)
    link = link_budget(x, L, water, sys)
    kraus = protocol == "bbm92-kraus"
    mc = replace(mc, protocol=protocol.split("-")[0], use_kraus_channel=kraus)
    rho = channel_pipeline(x, L, water, sys) if kraus else None
    return simulate(mc, link, sys.e_det, sys.mu, rho)


def qber_curve(protocol: str, water: WaterProfile, scenario: int | None, sys: SystemConfig,
               x_fraction: float, L_grid, *, mc: McConfig | None = None,
               approx: bool = False) -> list[CurvePoint]:
    """Analytic QBER along ``L_grid``.

    With ``mc`` each distance also gets a Monte Carlo point, seeded from
    ``mc.seed`` and the grid index, placed right after its analytic point.
    """
    grid = _check_grid(L_grid)
    sys = with_scenario(sys, scenario)
    model = qber_model(protocol, water, sys, x_fraction, approx=approx)
    points: list[CurvePoint] = []
    for i, L in enumerate(grid):
        L = float(L)
        res = model(L)
        points.append(CurvePoint(L, res.qber, res.gain.q_total, res.corr_xx))
        if mc is not None:
            run = montecarlo_point(protocol, water, sys, x_fraction, L,
                                   replace(mc, seed=derive_seed(mc.seed, i)))
            points.append(CurvePoint(L, run.qber_hat, run.events / run.n_pulses,
                                     run.corr_xx_hat, "montecarlo", run.std_err))
    return points


def solve_crossing(f: Callable[[float], float], threshold: float, lo: float = L_LO,
                   hi: float = L_HI) -> SecureDistanceResult:
    """First upward crossing of ``threshold`` by ``f`` on ``[lo, hi]``.

    ``lo`` is pushed down towards ``L_FLOOR`` while ``f(lo)`` is already at or
    above the threshold. The interval is scanned on a log grid, then the
    first bracketing cell is bisected until it is narrower than both 1 mm and
    1e-9 of the distance, with the QBER within 5e-4 of the threshold.
    """
    if not 0 < lo < hi:
        raise DomainError(f"need 0 < lo < hi, got lo={lo}, hi={hi}")
    while f(lo) >= threshold:
        if lo <= L_FLOOR:
            raise NoCrossingError(
                f"QBER is already above {threshold} at {lo:g} m", bracket=(lo, hi))
        lo = max(lo / 10, L_FLOOR)

    scan = np.geomspace(lo, hi, SCAN_POINTS)
    values = [f(float(L)) for L in scan]
    above = next((i for i, v in enumerate(values) if v >= threshold), None)
    if above is None:
        raise NoCrossingError(
            f"QBER stays below {threshold} up to {hi:g} m (max {max(values):.4g})",
            bracket=(lo, hi))
    monotone = all(b >= a for a, b in zip(values[:above], values[1:above + 1]))

    a, b = float(scan[above - 1]), float(scan[above])
    bracket = (a, b)
    iterations = 0
    mid, q = (a + b) / 2, f((a + b) / 2)
    while iterations < MAX_ITERATIONS:
        iterations += 1
        if q < threshold:
            a = mid
        else:
            b = mid
        mid = (a + b) / 2
        q = f(mid)
        if b - a <= min(DISTANCE_TOL, RELATIVE_TOL * b) and abs(q - threshold) <= QBER_TOL:
            break
    return SecureDistanceResult(L_max=mid, threshold=threshold, iterations=iterations,
                                bracket=bracket, qber=q, monotone=monotone)


def max_secure_distance(protocol: str, water: WaterProfile, scenario: int | None,
                        sys: SystemConfig, x_fraction: float = 0.5,
                        threshold: float | None = None, *, approx: bool = False,
                        L_hi: float = L_HI) -> SecureDistanceResult:
    """Largest distance before the analytic QBER first exceeds ``threshold``.

    The threshold defaults to the protocol's security limit. Raises
    :class:`~uwqkd.errors.NoCrossingError` when there is no crossing below
    ``L_hi``, including when the QBER starts above the threshold.
    """
    if threshold is None:
        threshold = threshold_for(protocol)
    sys = with_scenario(sys, scenario)
    if not sys.e_det < threshold < 0.5:
        raise NoCrossingError(
            f"threshold {threshold} is outside (e_det, 0.5) = ({sys.e_det}, 0.5)")
    model = qber_model(protocol, water, sys, x_fraction, approx=approx)
    result = solve_crossing(lambda L: model(L).qber, threshold, hi=L_hi)
    return replace(result, x_fraction=source_position(protocol, 1.0, x_fraction))


def source_position_sweep(water: WaterProfile, scenario: int | None, sys: SystemConfig,
                          fractions=SOURCE_FRACTIONS, *, approx: bool = False,
                          threshold: float | None = None) -> list[SecureDistanceResult]:
    """BBM92 (Kraus channel) maximum distance for each source fraction x/L."""
    out = []
    for frac in fractions:
        if not 0 <= frac <= 0.5:
            raise DomainError(f"source fractions must lie in [0, 0.5], got {frac}")
        out.append(max_secure_distance("bbm92-kraus", water, scenario, sys, frac, threshold,
                                       approx=approx))
    return out


def correlation_curve(water: WaterProfile, x_fraction: float, L_grid,
                      sys: SystemConfig) -> list[CurvePoint]:
    """<sigma_x (x) sigma_x> of the channel output along ``L_grid``.

    The ``qber`` field holds the channel-only flip probability (1 - corr)/2
    and ``gain`` is 0, since no detection is modelled here.
    """
    grid = _check_grid(L_grid)
    points = []
    for L in grid:
        L = float(L)
        corr = correlation_xx(channel_pipeline(x_fraction * L, L, water, sys))
        points.append(CurvePoint(L, (1 - corr) / 2, 0.0, corr))
    return points


@dataclass(frozen=True)
class ValidationCell:
    protocol: str
    water: str
    scenario: int
    L: float
    qber_analytic: float
    qber_hat: float
    std_err: float
    corr_xx: float | None
    corr_xx_hat: float | None
    corr_std_err: float | None

    @property
    def tolerance(self) -> float:
        return max(3 * self.std_err, 0.002)

    @property
    def passed(self) -> bool:
        ok = math.isfinite(self.qber_hat) and abs(self.qber_hat - self.qber_analytic) <= self.tolerance
        if ok and self.corr_xx_hat is not None and self.corr_xx is not None:
            ok = abs(self.corr_xx_hat - self.corr_xx) <= max(3 * self.corr_std_err, 1e-12)
        return ok


def validation_distances(protocol: str, water: WaterProfile, sys: SystemConfig,
                         x_fraction: float = 0.5,
                         fractions=(0.25, 0.5, 0.75, 1.0)) -> list[float]:
    """Grid points at fixed fractions of the analytic threshold distance.

    When the QBER never crosses the threshold the reference distance is where
    it has risen 0.05 above its short-range value instead.
    """
    model = qber_model(protocol, water, sys, x_fraction)
    try:
        ref = max_secure_distance(protocol, water, None, sys, x_fraction).L_max
    except NoCrossingError:
        target = model(L_LO).qber + 0.05
        ref = solve_crossing(lambda L: model(L).qber, target).L_max
    return [f * ref for f in fractions]


def validation_grid(sys: SystemConfig, mc: McConfig, *,
                    protocols=("bb84", "sarg04", "bbm92-kraus"),
                    waters: dict[str, WaterProfile], scenarios=(1, 5),
                    x_fraction: float = 0.5) -> list[ValidationCell]:
    """Monte Carlo vs analytic QBER on protocols x waters x scenarios x 4 distances."""
    cells = []
    index = 0
    for protocol in protocols:
        for name, water in waters.items():
            for scenario in scenarios:
                s = with_scenario(sys, scenario)
                model = qber_model(protocol, water, s, x_fraction)
                for L in validation_distances(protocol, water, s, x_fraction):
                    analytic = model(L)
                    run = montecarlo_point(protocol, water, s, x_fraction, L,
                                           replace(mc, seed=derive_seed(mc.seed, index)))
                    index += 1
                    cells.append(ValidationCell(
                        protocol, name, scenario, L, analytic.qber, run.qber_hat, run.std_err,
                        analytic.corr_xx, run.corr_xx_hat, run.corr_std_err))
    return cells
