"""Independent reference implementations used as test oracles.

Nothing here imports uwqkd. Scalars are evaluated with mpmath at 40 digits
from the reference parameter table typed in again below, so an error in the
package's unit handling or formulas cannot leak into the expected values.
"""

from __future__ import annotations

import mpmath as mp
from scipy.optimize import brentq

mp.mp.dps = 40

H = mp.mpf("6.62607015e-34")
C = mp.mpf("299792458")

TABLE = {
    "wavelength": mp.mpf("530e-9"),
    "theta": mp.radians(6),
    "delta": mp.pi,
    "delta_lambda": mp.mpf("0.2e-9"),
    "delta_t": mp.mpf("40e-9"),
    "delta_t_prime": mp.mpf("200e-12"),
    "eta": mp.mpf("0.5"),
    "mu": mp.mpf(1),
    "dark": mp.mpf(60),
    "k_inf": mp.mpf("0.08"),
    "depth": mp.mpf(80),
    "e_det": mp.mpf("0.033"),
}
ALPHA = {"clear": mp.mpf("0.151"), "coastal": mp.mpf("0.339"), "turbid": mp.mpf("2.195")}
GAMMA = {"clear": mp.mpf("2.4e-6"), "coastal": mp.mpf("3.7e-6"), "turbid": mp.mpf("7.5e-6")}
T_CORR = {0.05: mp.mpf("0.13"), 0.10: mp.mpf("0.16"), 0.20: mp.mpf("0.21"), 0.30: mp.mpf("0.26")}
R0 = {1: mp.mpf("1e-3"), 2: mp.mpf(10), 3: mp.mpf(50), 4: mp.mpf(125), 5: mp.mpf(500)}


def transmittance(L, water="clear", pupil=0.30):
    L = mp.mpf(L)
    if L == 0:
        return mp.mpf(1)
    T = T_CORR[pupil]
    return mp.e ** (-ALPHA[water] * L * (mp.mpf(pupil) / (TABLE["theta"] * L)) ** T)


def noise(scenario=1, pupil=0.30):
    t = TABLE
    dark = 4 * t["dark"] * t["delta_t"]
    R = R0[scenario] * mp.e ** (-t["k_inf"] * t["depth"])
    S = mp.pi * (mp.mpf(pupil) / 2) ** 2
    omega = 2 * mp.pi * (1 - mp.cos(t["delta"] / 2))
    return dark + R * S * t["delta_t_prime"] * t["wavelength"] * t["delta_lambda"] * omega / (H * C)


def qber_bb84(y0, eta, mu=1, e_det=TABLE["e_det"]):
    s = 1 - mp.e ** (-mp.mpf(eta) * mu)
    return (y0 / 2 + e_det * s) / (y0 + s)


def qber_sarg04(y0, eta, mu=1, e_det=TABLE["e_det"]):
    x = mp.e ** (-mp.mpf(eta) * mu)
    s = 1 - x
    return (y0 * x / 4 + e_det / 2 * s) / (y0 * x / 4 + (mp.mpf(1) / 4 + e_det / 2) * s)


def qber_bbm92(y0, eta_a, eta_b, e_signal, mu=1, approx=False):
    if approx:
        sa, sb = eta_a * mu, eta_b * mu
    else:
        sa, sb = 1 - mp.e ** (-eta_a * mu), 1 - mp.e ** (-eta_b * mu)
    p_true = sa * sb
    p_false = y0 * (sa + sb) + y0 ** 2
    return (e_signal * p_true + p_false / 2) / (p_true + p_false)


def corr_xx(t_a, t_b, q_a, q_b):
    """<XX> of Phi+ after zero-temperature damping then depolarization."""
    return t_a * t_b * (1 - 4 * mp.mpf(q_a) / 3) * (1 - 4 * mp.mpf(q_b) / 3)


def qber_bbm92_kraus(L, water="clear", scenario=1, pupil=0.30, x_fraction=0.5, approx=False):
    L = mp.mpf(L)
    x = x_fraction * L
    A_a, A_b = transmittance(x, water, pupil), transmittance(L - x, water, pupil)
    q_a = 1 - mp.e ** (-GAMMA[water] * x)
    q_b = 1 - mp.e ** (-GAMMA[water] * (L - x))
    corr = corr_xx(mp.sqrt(A_a), mp.sqrt(A_b), q_a, q_b)
    e_det = TABLE["e_det"]
    e_signal = e_det + (1 - 2 * e_det) * (1 - corr) / 2
    eta = TABLE["eta"]
    return qber_bbm92(noise(scenario, pupil), eta * A_a, eta * A_b, e_signal, approx=approx)


def qber_at(protocol, L, water="clear", scenario=1, pupil=0.30):
    y0 = noise(scenario, pupil)
    eta_b = TABLE["eta"] * transmittance(L, water, pupil)
    if protocol == "bb84":
        return qber_bb84(y0, eta_b)
    if protocol == "sarg04":
        return qber_sarg04(y0, eta_b)
    raise ValueError(protocol)


def crossing(f, threshold, lo, hi):
    """Root of f(L) = threshold by Brent's method on a bracket the caller supplies."""
    return brentq(lambda L: float(f(L)) - threshold, lo, hi, xtol=1e-9, rtol=1e-12)
