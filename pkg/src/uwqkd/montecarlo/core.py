"""Pulse-level Monte Carlo estimates of QBER for the three protocols.

Each pulse draws a fixed number of uniforms from a counter-based stream keyed
by (seed, packet, pulse), so the integer counts are identical for any number
of workers and for either kernel backend.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..channel_model import LinkBudget
from ..errors import DomainError, InvalidStateError
from ..quantum_channel import DensityMatrix4, bell_phi_plus
from . import _fallback
from .rng import MASK64, master_key

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

PROTOCOLS = ("bb84", "sarg04", "bbm92")

_HADAMARD2 = np.kron(*(2 * [np.array([[1, 1], [1, -1]]) / math.sqrt(2)]))


def available_backends() -> tuple[str, ...]:
    return ("compiled", "python") if _compiled is not None else ("python",)


def default_backend() -> str:
    """``compiled`` when the extension imports, unless UWQKD_FORCE_PYTHON=1."""
    if _compiled is None or os.environ.get("UWQKD_FORCE_PYTHON") == "1":
        return "python"
    return "compiled"


def _kernels(backend: str | None):
    backend = backend or default_backend()
    if backend == "python":
        return _fallback
    if backend == "compiled":
        if _compiled is None:
            raise DomainError("the compiled Monte Carlo extension is not available")
        return _compiled
    raise DomainError(f"unknown backend {backend!r}")


BACKEND = default_backend()


@dataclass(frozen=True)
class McConfig:
    """Size, seed and protocol of one Monte Carlo run.

    ``workers`` only changes wall time; the counts never depend on it.
    """

    n_packets: int = 10_000
    photons_per_packet: int = 1_000
    seed: int = 0
    protocol: str = "bb84"
    use_kraus_channel: bool = False
    workers: int = 1
    backend: str | None = None

    def __post_init__(self):
        if self.n_packets < 1 or self.photons_per_packet < 1:
            raise DomainError("n_packets and photons_per_packet must be at least 1")
        if not 0 <= self.seed <= MASK64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.protocol not in PROTOCOLS:
            raise DomainError(f"unknown protocol {self.protocol!r}")
        if self.use_kraus_channel and self.protocol != "bbm92":
            raise DomainError("use_kraus_channel applies to bbm92 only")
        if self.workers < 1:
            raise DomainError(f"workers must be at least 1, got {self.workers}")

    @property
    def n_pulses(self) -> int:
        return self.n_packets * self.photons_per_packet


@dataclass(frozen=True)
class McResult:
    """Aggregated counts of one run and the QBER estimated from them.

    ``sifted_or_coincident`` counts retained events: sifted clicks (BB84),
    conclusive clicks (SARG04) or basis-matched diagonal coincidences (BBM92).
    ``events`` counts every detection event, retained or not; ``discarded``
    counts events dropped by sifting, and ``no_click`` counts pulses without
    any event. For BBM92 ``events`` also includes the rectilinear-basis
    coincidences, which are kept in ``counts``.
    """

    protocol: str
    n_pulses: int
    events: int
    sifted_or_coincident: int
    erroneous: int
    discarded: int
    no_click: int
    counts: dict[str, int] = field(default_factory=dict)
    corr_xx_hat: float | None = None
    corr_std_err: float | None = None

    def __post_init__(self):
        if not 0 <= self.erroneous <= self.sifted_or_coincident:
            raise InvalidStateError("erroneous count exceeds retained count")

    @property
    def qber_hat(self) -> float:
        """Observed QBER; NaN when nothing was retained."""
        n = self.sifted_or_coincident
        return self.erroneous / n if n else math.nan

    @property
    def std_err(self) -> float:
        n = self.sifted_or_coincident
        if not n:
            return math.nan
        q = self.qber_hat
        return math.sqrt(q * (1 - q) / n)


def _run(kernel, mc: McConfig, *params) -> tuple[int, ...]:
    key = master_key(mc.seed)
    photons = mc.photons_per_packet
    workers = min(mc.workers, mc.n_packets)
    if workers == 1:
        return kernel(key, 0, mc.n_packets, photons, *params)
    bounds = np.linspace(0, mc.n_packets, workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda r: kernel(key, int(r[0]), int(r[1] - r[0]), photons, *params),
                         zip(bounds[:-1], bounds[1:]))
        return tuple(int(sum(col)) for col in zip(*parts))


def _check_probabilities(**probs: float) -> None:
    for name, value in probs.items():
        if not 0 <= value <= 1:
            raise DomainError(f"{name} must lie in [0, 1], got {value}")


def _click(eta: float, mu: float) -> float:
    return -math.expm1(-eta * mu)


def simulate_bb84(mc: McConfig, link: LinkBudget, e_det: float, mu: float) -> McResult:
    """Sifted-key QBER of BB84 with the source at Alice.

    Signal and noise are independent detection channels; a pulse may yield a
    signal click, a noise click or both, and every click is one event.
    """
    p_sig = _click(link.eta_B, mu)
    _check_probabilities(y0=link.y0, e_det=e_det)
    sig, noi, sifted, errors, discarded, idle = _run(
        _kernels(mc.backend).bb84_counts, mc, p_sig, link.y0, e_det)
    return McResult("bb84", mc.n_pulses, sig + noi, sifted, errors, discarded, idle,
                    counts={"signal_clicks": sig, "noise_clicks": noi})


def simulate_sarg04(mc: McConfig, link: LinkBudget, e_det: float, mu: float) -> McResult:
    """Conclusive-key QBER of SARG04.

    Noise is only sampled on pulses without a signal click. A signal click is
    conclusive and correct with probability 1/4, conclusive and wrong with
    probability e_det/2. A noise click is conclusive with probability 1/4 and
    then always wrong.
    """
    p_sig = _click(link.eta_B, mu)
    _check_probabilities(y0=link.y0, e_det=e_det)
    sig, noi, conclusive, errors, inconclusive, idle = _run(
        _kernels(mc.backend).sarg04_counts, mc, p_sig, link.y0, e_det)
    return McResult("sarg04", mc.n_pulses, sig + noi, conclusive, errors, inconclusive, idle,
                    counts={"signal_clicks": sig, "noise_clicks": noi})


def _basis_thresholds(rho: np.ndarray) -> tuple[float, ...]:
    # cumulative Born probabilities of |00>,|01>,|10> in H/V then D/A
    out = []
    for basis_rho in (rho, _HADAMARD2 @ rho @ _HADAMARD2):
        probs = np.clip(np.real(np.diag(basis_rho)), 0.0, None)
        out.extend(np.cumsum(probs / probs.sum())[:3])
    return tuple(float(c) for c in out)


def simulate_bbm92(mc: McConfig, link: LinkBudget, e_det: float, mu: float,
                   rho_out: DensityMatrix4 | None = None) -> McResult:
    """Coincidence QBER of BBM92 in the diagonal basis.

    Each arm has independent signal and noise channels, and each of the four
    signal/noise pairings that fire is one coincidence. Signal-signal pairs
    sample a joint outcome of ``rho_out`` (Phi+ when ``use_kraus_channel`` is
    off) and then flip with probability ``e_det``; other pairs are random.
    The QBER and ``corr_xx_hat`` come from diagonal-basis coincidences, the
    rectilinear QBER is reported in ``counts``.
    """
    if mc.use_kraus_channel != (rho_out is not None):
        raise DomainError("rho_out must be given exactly when use_kraus_channel is set")
    if rho_out is None:
        rho_out = bell_phi_plus()
    elif not isinstance(rho_out, DensityMatrix4):
        rho_out = DensityMatrix4(rho_out)
    else:
        rho_out.validate()
    p_a, p_b = _click(link.eta_A, mu), _click(link.eta_B, mu)
    _check_probabilities(y0=link.y0, e_det=e_det)
    (coinc, sifted_hv, errors_hv, sifted_da, errors_da, discarded, idle, true_da,
     same_da) = _run(_kernels(mc.backend).bbm92_counts, mc, p_a, p_b, link.y0, e_det,
                     *_basis_thresholds(rho_out.matrix))
    corr = corr_se = None
    if true_da:
        f = same_da / true_da
        corr = 2 * f - 1
        corr_se = 2 * math.sqrt(f * (1 - f) / true_da)
    return McResult(
        "bbm92", mc.n_pulses, coinc, sifted_da, errors_da, discarded, idle,
        counts={"sifted_hv": sifted_hv, "errors_hv": errors_hv,
                "true_da": true_da, "same_da": same_da},
        corr_xx_hat=corr, corr_std_err=corr_se,
    )


def simulate(mc: McConfig, link: LinkBudget, e_det: float, mu: float,
             rho_out: DensityMatrix4 | None = None) -> McResult:
    """Dispatch on ``mc.protocol``."""
    if mc.protocol == "bb84":
        return simulate_bb84(mc, link, e_det, mu)
    if mc.protocol == "sarg04":
        return simulate_sarg04(mc, link, e_det, mu)
    return simulate_bbm92(mc, link, e_det, mu, rho_out)
