"""Closed-form quantum gains and QBERs for BB84, SARG04 and BBM92.

Gains are per-pulse probabilities of a retained detection (a sifted click,
a conclusive click or a coincidence) for weak coherent pulses with Poisson
photon statistics. Each gain is returned as a :class:`GainBreakdown` so the
signal and noise mechanisms stay visible to callers and to the Monte Carlo
cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel_model import SystemConfig, WaterProfile, attenuation, link_budget, optical_depth
from .errors import DegenerateInputError, DomainError

#: Error probability of a click carrying no information about the state.
E0 = 0.5

BB84_THRESHOLD = 0.11
BBM92_THRESHOLD = 0.11
SARG04_THRESHOLD = 0.149

THRESHOLDS = {"bb84": BB84_THRESHOLD, "sarg04": SARG04_THRESHOLD, "bbm92": BBM92_THRESHOLD}


@dataclass(frozen=True)
class GainBreakdown:
    """Per-pulse gain split into its noise and signal mechanisms.

    For BBM92 ``p_true`` and ``p_false`` mirror ``signal_part`` and
    ``noise_part``; they are ``None`` for the prepare-and-measure protocols.
    """

    q_total: float
    noise_part: float
    signal_part: float
    p_true: float | None = None
    p_false: float | None = None


@dataclass(frozen=True)
class QberResult:
    qber: float
    e_mu: float
    gain: GainBreakdown
    corr_xx: float | None = None


def _click(eta: float, mu: float) -> float:
    # 1 - exp(-eta*mu), accurate for tiny eta*mu
    return -math.expm1(-eta * mu)


def _check_gain_args(y0: float, eta: float, mu: float) -> None:
    if y0 < 0:
        raise DomainError(f"y0 must be non-negative, got {y0}")
    if not 0 <= eta <= 1:
        raise DomainError(f"efficiency must lie in [0, 1], got {eta}")
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu}")


def _ratio(e_mu: float, gain: GainBreakdown, **extra) -> QberResult:
    if gain.q_total == 0:
        raise DegenerateInputError("QBER undefined: the gain is exactly zero")
    return QberResult(qber=e_mu / gain.q_total, e_mu=e_mu, gain=gain, **extra)


def gain_bb84(y0: float, eta_B: float, mu: float) -> GainBreakdown:
    """Gain y0 + 1 - exp(-eta_B*mu) of BB84 with the source at Alice."""
    _check_gain_args(y0, eta_B, mu)
    signal = _click(eta_B, mu)
    return GainBreakdown(q_total=y0 + signal, noise_part=y0, signal_part=signal)


def gain_bb84_series(y0: float, eta_B: float, mu: float, n_terms: int) -> float:
    """Partial Poisson sum of the BB84 gain over photon numbers 0..n_terms.

    Uses the per-photon-number yields Y_0 = y0 and
    Y_i = 1 - (1 - eta_B)**i + y0, so it converges to :func:`gain_bb84`.
    """
    if n_terms < 1:
        raise DomainError(f"n_terms must be at least 1, got {n_terms}")
    _check_gain_args(y0, eta_B, mu)
    weight = math.exp(-mu)  # P(N = 0)
    total = y0 * weight
    survive = 1.0  # (1 - eta)**i
    for i in range(1, n_terms + 1):
        weight *= mu / i
        survive *= 1.0 - eta_B
        total += ((1.0 - survive) + y0) * weight
    return total


def gain_sarg04(y0: float, eta_B: float, mu: float, e_det: float) -> GainBreakdown:
    """Conclusive-click gain of SARG04.

    Empty pulses contribute a quarter of their noise clicks; detected pulses
    are conclusive with probability 1/4 + e_det/2.
    """
    _check_gain_args(y0, eta_B, mu)
    signal = _click(eta_B, mu)
    noise = 0.25 * y0 * math.exp(-eta_B * mu)
    sig = (0.25 + e_det / 2) * signal
    return GainBreakdown(q_total=noise + sig, noise_part=noise, signal_part=sig)


def gain_bbm92(y0: float, eta_A: float, eta_B: float, mu: float,
               approx: bool = False) -> GainBreakdown:
    """Coincidence probability of BBM92 split into true and false coincidences.

    With ``approx`` every arm click probability 1 - exp(-eta*mu) is replaced
    by its first-order form eta*mu.
    """
    _check_gain_args(y0, eta_A, mu)
    _check_gain_args(y0, eta_B, mu)
    if approx:
        s_a, s_b = eta_A * mu, eta_B * mu
    else:
        s_a, s_b = _click(eta_A, mu), _click(eta_B, mu)
    p_true = s_a * s_b
    p_false = y0 * s_a + y0 * s_b + y0 * y0
    return GainBreakdown(q_total=p_true + p_false, noise_part=p_false, signal_part=p_true,
                         p_true=p_true, p_false=p_false)


def qber_bb84(y0: float, eta_B: float, mu: float, e_det: float) -> QberResult:
    gain = gain_bb84(y0, eta_B, mu)
    e_mu = E0 * y0 + e_det * gain.signal_part
    return _ratio(e_mu, gain)


def qber_sarg04(y0: float, eta_B: float, mu: float, e_det: float) -> QberResult:
    """QBER over conclusive clicks; tends to 1 as eta_B -> 0."""
    gain = gain_sarg04(y0, eta_B, mu, e_det)
    e_mu = 0.25 * y0 * math.exp(-eta_B * mu) + e_det / 2 * _click(eta_B, mu)
    return _ratio(e_mu, gain)


def qber_bbm92(gain: GainBreakdown, e_signal: float, **extra) -> QberResult:
    """QBER of coincidences whose true part errs with probability ``e_signal``."""
    e_mu = e_signal * gain.p_true + E0 * gain.p_false
    return _ratio(e_mu, gain, **extra)


def qber_bbm92_simple(x: float, L: float, water: WaterProfile, sys: SystemConfig,
                      approx: bool = False) -> QberResult:
    """BBM92 QBER with detector errors only (no channel decoherence)."""
    link = link_budget(x, L, water, sys)
    gain = gain_bbm92(link.y0, link.eta_A, link.eta_B, sys.mu, approx=approx)
    return qber_bbm92(gain, sys.e_det)


def false_coincidence_rate(x: float, L: float, water: WaterProfile, sys: SystemConfig) -> float:
    """Accidental-coincidence rate f(x) for a source at ``x`` on a link of length ``L``."""
    if not 0 <= x <= L:
        raise DomainError(f"source position must satisfy 0 <= x <= L, got x={x}, L={L}")
    link = link_budget(x, L, water, sys)
    y0 = link.y0
    return y0 * sys.eta_alice * link.A_alice + y0 * sys.eta_bob * link.A_bob + y0 * y0


def false_coincidence_rate_derivative(x: float, L: float, water: WaterProfile,
                                      sys: SystemConfig) -> float:
    """Analytic d f/d x on the open interval 0 < x < L."""
    if not 0 < x < L:
        raise DomainError(f"derivative needs 0 < x < L, got x={x}, L={L}")
    link = link_budget(x, L, water, sys)
    T = sys.t_corr
    k = water.alpha * (sys.d1 / sys.theta) ** T * (1 - T)
    alice = sys.eta_alice * k * x ** (-T) * math.exp(-optical_depth(x, water, sys))
    bob = sys.eta_bob * k * (L - x) ** (-T) * math.exp(-optical_depth(L - x, water, sys))
    return link.y0 * (bob - alice)


def _golden_section(f, a: float, b: float, tol: float) -> float:
    inv_phi = (math.sqrt(5) - 1) / 2
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return (a + b) / 2


def optimal_source_position(L: float, water: WaterProfile, sys: SystemConfig) -> float:
    """Source position minimising the false-coincidence rate.

    Bisection on the sign change of the analytic derivative, to 1e-6*L. When
    the derivative has no sign change (e.g. y0 = 0) the rate itself is
    minimised by golden-section search and the result may sit on a boundary.
    """
    if not L > 0:
        raise DomainError(f"link length must be positive, got {L}")
    if sys.eta_alice == sys.eta_bob:
        return L / 2
    tol = 1e-6 * L
    lo, hi = L * 1e-12, L * (1 - 1e-12)
    d_lo = false_coincidence_rate_derivative(lo, L, water, sys)
    d_hi = false_coincidence_rate_derivative(hi, L, water, sys)
    if d_lo < 0 < d_hi:
        while hi - lo > tol:
            mid = (lo + hi) / 2
            if false_coincidence_rate_derivative(mid, L, water, sys) < 0:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2
    x = _golden_section(lambda s: false_coincidence_rate(s, L, water, sys), 0.0, L, tol)
    # compare against the endpoints, which golden-section never evaluates
    candidates = [0.0, x, L]
    return min(candidates, key=lambda s: false_coincidence_rate(s, L, water, sys))
