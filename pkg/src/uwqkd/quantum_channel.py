"""Two-qubit polarization states through amplitude damping and depolarization.

Basis order is |00>, |01>, |10>, |11> with qubit A (Alice) first and
|0> = |H>, |1> = |V>. Each photon of the Bell pair crosses its own arm of
the link: amplitude damping first, depolarization second. The order is
fixed because the two channels do not commute.

Explicit Kraus sums are the reference implementation. Closed forms for
the X-shaped states produced here are kept as fast paths and are checked
against the sums in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .channel_model import (
    BOLTZMANN,
    PLANCK,
    SPEED_OF_LIGHT,
    SystemConfig,
    WaterProfile,
    attenuation,
    link_budget,
)
from .errors import CompletenessError, DomainError, InvalidStateError
from .protocol_analytics import QberResult, gain_bbm92, qber_bbm92


def _const(rows) -> np.ndarray:
    arr = np.array(rows, dtype=complex)
    arr.setflags(write=False)
    return arr


IDENTITY = _const([[1, 0], [0, 1]])
SIGMA_X = _const([[0, 1], [1, 0]])
SIGMA_Y = _const([[0, -1j], [1j, 0]])
SIGMA_Z = _const([[1, 0], [0, -1]])
XX = _const(np.kron(SIGMA_X, SIGMA_X))
ZZ = _const(np.kron(SIGMA_Z, SIGMA_Z))

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = -1e-10
COMPLETENESS_TOL = 1e-12
XI_CUTOFF = 1e-20
DEFAULT_TEMPERATURE = 298.15  # K


class DensityMatrix4:
    """Immutable 4x4 density matrix of a polarization qubit pair.

    Construction validates Hermiticity, unit trace and positive
    semi-definiteness; pass ``check=False`` only for intermediate values.
    """

    __slots__ = ("_data",)

    def __init__(self, data, *, check: bool = True):
        arr = np.array(data, dtype=complex)
        if arr.shape != (4, 4):
            raise InvalidStateError(f"expected a 4x4 matrix, got shape {arr.shape}")
        arr.setflags(write=False)
        self._data = arr
        if check:
            self.validate()

    @property
    def matrix(self) -> np.ndarray:
        return self._data

    def __array__(self, dtype=None, copy=None):
        return self._data if dtype is None else self._data.astype(dtype)

    def __repr__(self):
        return f"DensityMatrix4(\n{np.array2string(self._data, precision=6)})"

    def trace(self) -> complex:
        return complex(np.trace(self._data))

    def validate(self) -> None:
        rho = self._data
        if not np.all(np.isfinite(rho)):
            raise InvalidStateError("density matrix has non-finite entries")
        herm = float(np.max(np.abs(rho - rho.conj().T)))
        if herm > HERMITIAN_TOL:
            raise InvalidStateError(f"not Hermitian (max deviation {herm:.3g})")
        tr = np.trace(rho)
        if abs(tr - 1) > TRACE_TOL:
            raise InvalidStateError(f"trace is {tr:.15g}, expected 1")
        lowest = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0])
        if lowest < POSITIVITY_TOL:
            raise InvalidStateError(f"negative eigenvalue {lowest:.3g}")

    def allclose(self, other, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self._data, np.asarray(other), rtol=0, atol=atol))

    def to_text(self) -> str:
        """Serialize as 16 lines of ``re im``, row-major."""
        return "".join(f"{z.real:.17g} {z.imag:.17g}\n" for z in self._data.ravel())

    @classmethod
    def from_text(cls, text: str, *, check: bool = True) -> "DensityMatrix4":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if len(lines) != 16:
            raise InvalidStateError(f"expected 16 lines, got {len(lines)}")
        values = []
        for ln in lines:
            parts = ln.split()
            if len(parts) != 2:
                raise InvalidStateError(f"malformed line {ln!r}")
            values.append(complex(float(parts[0]), float(parts[1])))
        return cls(np.array(values).reshape(4, 4), check=check)


@dataclass(frozen=True)
class KrausSet:
    """Kraus operators of one channel; 2x2 for a single arm, 4x4 for the pair."""

    operators: tuple[np.ndarray, ...]
    label: str

    def __post_init__(self):
        if self.label not in ("damping", "depolarizing", "composed", "identity"):
            raise DomainError(f"unknown Kraus set label {self.label!r}")
        ops = tuple(np.array(k, dtype=complex) for k in self.operators)
        dims = {k.shape for k in ops}
        if len(dims) != 1 or next(iter(dims)) not in ((2, 2), (4, 4)):
            raise DomainError(f"Kraus operators must all be 2x2 or all 4x4, got {dims}")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def completeness_error(self) -> float:
        total = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(total - np.eye(self.dim))))

    def check(self, tol: float = COMPLETENESS_TOL) -> None:
        err = self.completeness_error()
        if err > tol:
            raise CompletenessError(
                f"{self.label} Kraus set violates completeness by {err:.3g}")

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.operators)


@dataclass(frozen=True)
class DampingParams:
    """Damping probabilities of both arms and the thermal occupancy."""

    p_A: float
    p_B: float
    xi: float = 0.0

    def __post_init__(self):
        for name in ("p_A", "p_B"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise DomainError(f"{name} must lie in [0, 1], got {value}")
        if not 0 <= self.xi <= 0.5:
            raise DomainError(f"xi must lie in [0, 1/2], got {self.xi}")

    @property
    def t_A(self) -> float:
        return math.sqrt(1 - self.p_A)

    @property
    def t_B(self) -> float:
        return math.sqrt(1 - self.p_B)

    @property
    def T_A(self) -> float:
        return 1 - self.p_A

    @property
    def T_B(self) -> float:
        return 1 - self.p_B


@dataclass(frozen=True)
class DepolarizingParams:
    q_A: float
    q_B: float

    def __post_init__(self):
        for name in ("q_A", "q_B"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise DomainError(f"{name} must lie in [0, 1], got {value}")


def bell_phi_plus() -> DensityMatrix4:
    """Projector onto (|HH> + |VV>)/sqrt(2)."""
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = rho[0, 3] = rho[3, 0] = rho[3, 3] = 0.5
    return DensityMatrix4(rho)


def thermal_photon_number(temperature: float, wavelength: float) -> float:
    """Bose-Einstein mean occupancy of the mode at ``wavelength`` metres."""
    if not temperature > 0:
        raise DomainError(f"temperature must be positive, got {temperature}")
    x = PLANCK * SPEED_OF_LIGHT / (wavelength * BOLTZMANN * temperature)
    if x > 700:
        return math.exp(-x)  # expm1 overflows; 1/(e^x - 1) == e^-x to double precision
    return 1.0 / math.expm1(x)


def damping_kraus_single(p: float, xi: float = 0.0) -> KrausSet:
    """Generalized amplitude damping on one qubit.

    Returns the four operators K0..K3, or just K0 and K1 when ``xi`` is 0.
    """
    if not 0 <= p <= 1:
        raise DomainError(f"damping probability must lie in [0, 1], got {p}")
    if not 0 <= xi <= 0.5:
        raise DomainError(f"thermal parameter must lie in [0, 1/2], got {xi}")
    a, b = math.sqrt(1 - xi), math.sqrt(xi)
    sp, sq = math.sqrt(p), math.sqrt(1 - p)
    k0 = a * np.array([[1, 0], [0, sq]])
    k1 = a * np.array([[0, sp], [0, 0]])
    if xi == 0:
        return KrausSet((k0, k1), "damping")
    k2 = b * np.array([[0, 0], [sp, 0]])
    k3 = b * np.array([[sq, 0], [0, 1]])
    return KrausSet((k0, k1, k2, k3), "damping")


def depolarizing_kraus_single(q: float) -> KrausSet:
    if not 0 <= q <= 1:
        raise DomainError(f"depolarization probability must lie in [0, 1], got {q}")
    w = math.sqrt(q / 3)
    return KrausSet((math.sqrt(1 - q) * IDENTITY, w * SIGMA_X, w * SIGMA_Y, w * SIGMA_Z),
                    "depolarizing")


def tensor(setA: KrausSet, setB: KrausSet) -> KrausSet:
    """Pair operators K_ij = K_i (x) K_j acting on both qubits."""
    if setA.dim != 2 or setB.dim != 2:
        raise DomainError("tensor() needs single-qubit Kraus sets")
    ops = tuple(np.kron(ka, kb) for ka, kb in product(setA.operators, setB.operators))
    return KrausSet(ops, "composed")


def apply_bipartite(rho: DensityMatrix4, setA: KrausSet, setB: KrausSet) -> DensityMatrix4:
    """Apply independent single-arm channels to Alice's and Bob's qubits."""
    setA.check()
    setB.check()
    out = tensor(setA, setB).apply(rho.matrix)
    return DensityMatrix4(out)


def apply_local(rho: DensityMatrix4, kraus: KrausSet, arm: str = "B") -> DensityMatrix4:
    """Apply a single-qubit channel to one arm, leaving the other untouched."""
    identity = KrausSet((IDENTITY,), "identity")
    if arm == "A":
        return apply_bipartite(rho, kraus, identity)
    if arm == "B":
        return apply_bipartite(rho, identity, kraus)
    raise DomainError(f"arm must be 'A' or 'B', got {arm!r}")


def damped_state_closed_form(dp: DampingParams) -> DensityMatrix4:
    """Bell pair after zero-temperature damping on both arms."""
    if dp.xi != 0:
        raise DomainError("the closed form only holds for xi = 0")
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 0.5 * (1 + dp.p_A * dp.p_B)
    rho[1, 1] = 0.5 * dp.p_A * dp.T_B
    rho[2, 2] = 0.5 * dp.p_B * dp.T_A
    rho[3, 3] = 0.5 * dp.T_A * dp.T_B
    rho[0, 3] = rho[3, 0] = 0.5 * dp.t_A * dp.t_B
    return DensityMatrix4(rho)


def depolarized_state(rho_damped: DensityMatrix4, qp: DepolarizingParams) -> DensityMatrix4:
    """Explicit 16-operator Kraus sum for depolarization of both arms."""
    return apply_bipartite(rho_damped, depolarizing_kraus_single(qp.q_A),
                           depolarizing_kraus_single(qp.q_B))


def _x_state_depolarized(rho: np.ndarray, qp: DepolarizingParams, keep, flip, coh) -> np.ndarray:
    a0, b0, c0, d0 = (rho[i, i].real for i in range(4))
    nA, nB = keep(qp.q_A), keep(qp.q_B)
    sA, sB = flip(qp.q_A), flip(qp.q_B)
    out = np.zeros((4, 4), dtype=complex)
    out[0, 0] = nA * nB * a0 + nA * sB * b0 + sA * nB * c0 + sA * sB * d0
    out[1, 1] = nA * sB * a0 + nA * nB * b0 + sA * sB * c0 + sA * nB * d0
    out[2, 2] = sA * nB * a0 + sA * sB * b0 + nA * nB * c0 + nA * sB * d0
    out[3, 3] = sA * sB * a0 + sA * nB * b0 + nA * sB * c0 + nA * nB * d0
    out[0, 3] = coh(qp.q_A) * coh(qp.q_B) * rho[0, 3]
    out[3, 0] = coh(qp.q_A) * coh(qp.q_B) * rho[3, 0]
    return out


def _require_x_state(rho: np.ndarray) -> None:
    mask = np.ones((4, 4), dtype=bool)
    mask[np.diag_indices(4)] = False
    mask[0, 3] = mask[3, 0] = False
    if np.max(np.abs(rho[mask]), initial=0.0) > 1e-15:
        raise DomainError("closed form needs an X-shaped state (only rho[0,3], rho[3,0] off-diagonal)")


def depolarized_state_closed_form(rho_damped: DensityMatrix4,
                                  qp: DepolarizingParams) -> DensityMatrix4:
    """Fast path for X-shaped inputs: per-arm keep 1 - 2q/3, flip 2q/3, coherence 1 - 4q/3."""
    rho = rho_damped.matrix
    _require_x_state(rho)
    out = _x_state_depolarized(rho, qp, keep=lambda q: 1 - 2 * q / 3,
                               flip=lambda q: 2 * q / 3, coh=lambda q: 1 - 4 * q / 3)
    return DensityMatrix4(out)


def depolarization_closed_form_report(rho_damped: DensityMatrix4,
                                      qp: DepolarizingParams) -> dict[str, float]:
    """Compare the printed and corrected closed forms against the Kraus sum.

    The printed coefficients use 1 - 4q/3 as the diagonal keep factor, which
    does not preserve the trace. Returned values are maximum absolute entry
    deviations plus the trace of the printed form.
    """
    rho = rho_damped.matrix
    _require_x_state(rho)
    exact = depolarized_state(rho_damped, qp).matrix
    printed = _x_state_depolarized(rho, qp, keep=lambda q: 1 - 4 * q / 3,
                                   flip=lambda q: 2 * q / 3, coh=lambda q: 1 - 4 * q / 3)
    corrected = depolarized_state_closed_form(rho_damped, qp).matrix
    return {
        "printed_max_deviation": float(np.max(np.abs(printed - exact))),
        "printed_trace": float(np.trace(printed).real),
        "corrected_max_deviation": float(np.max(np.abs(corrected - exact))),
    }


def damping_probability(distance: float, water: WaterProfile, sys: SystemConfig,
                        model: str = "transmittance") -> float:
    """Damping probability of one arm.

    ``"transmittance"`` gives p = 1 - A(distance), the photon-loss
    probability. ``"literal"`` gives p = 1 - exp(-A(distance)), which treats
    the transmittance itself as an exponent; it is kept only for comparison.
    """
    A = attenuation(distance, water, sys)
    if model == "transmittance":
        return 1.0 - A
    if model == "literal":
        return -math.expm1(-A)
    raise DomainError(f"unknown damping model {model!r}")


def channel_params(x: float, L: float, water: WaterProfile, sys: SystemConfig, *,
                   damping_model: str = "transmittance",
                   temperature: float = DEFAULT_TEMPERATURE) -> tuple[DampingParams, DepolarizingParams]:
    if not 0 <= x <= L:
        raise DomainError(f"source position must satisfy 0 <= x <= L, got x={x}, L={L}")
    xi = thermal_photon_number(temperature, sys.wavelength)
    if xi < XI_CUTOFF:
        xi = 0.0
    dp = DampingParams(damping_probability(x, water, sys, damping_model),
                       damping_probability(L - x, water, sys, damping_model), xi)
    qp = DepolarizingParams(-math.expm1(-water.gamma_dep * x),
                            -math.expm1(-water.gamma_dep * (L - x)))
    return dp, qp


def channel_pipeline(x: float, L: float, water: WaterProfile, sys: SystemConfig, *,
                     damping_model: str = "transmittance",
                     temperature: float = DEFAULT_TEMPERATURE) -> DensityMatrix4:
    """State shared by Alice and Bob for a source at ``x`` on a link of length ``L``.

    Alice's photon crosses ``x`` metres and Bob's ``L - x``; each arm is
    damped and then depolarized.
    """
    dp, qp = channel_params(x, L, water, sys, damping_model=damping_model,
                            temperature=temperature)
    rho = apply_bipartite(bell_phi_plus(), damping_kraus_single(dp.p_A, dp.xi),
                          damping_kraus_single(dp.p_B, dp.xi))
    return depolarized_state(rho, qp)


def _expectation(rho, observable: np.ndarray) -> float:
    value = complex(np.trace(np.asarray(rho) @ observable))
    if abs(value.imag) > 1e-9:
        raise InvalidStateError(f"expectation has imaginary residue {value.imag:.3g}")
    return value.real


def correlation_xx(rho: DensityMatrix4) -> float:
    """<sigma_x (x) sigma_x>, the diagonal-basis correlation."""
    return _expectation(rho, XX)


def correlation_zz(rho: DensityMatrix4) -> float:
    """<sigma_z (x) sigma_z>, the rectilinear-basis correlation."""
    return _expectation(rho, ZZ)


def p_kraus(corr_xx: float) -> float:
    """Probability that the channel flips the diagonal-basis parity."""
    if not -1 <= corr_xx <= 1:
        raise DomainError(f"correlation must lie in [-1, 1], got {corr_xx}")
    return (1 - corr_xx) / 2


def e_sig(e_det: float, p_kraus: float) -> float:
    """Error probability of a true coincidence: channel flip XOR detector flip."""
    for name, value in (("e_det", e_det), ("p_kraus", p_kraus)):
        if not 0 <= value <= 1:
            raise DomainError(f"{name} must lie in [0, 1], got {value}")
    return e_det + (1 - 2 * e_det) * p_kraus


def qber_bbm92_kraus(x: float, L: float, water: WaterProfile, sys: SystemConfig, *,
                     approx: bool = False, damping_model: str = "transmittance",
                     temperature: float = DEFAULT_TEMPERATURE) -> QberResult:
    """BBM92 QBER with true-coincidence errors driven by channel decoherence."""
    rho = channel_pipeline(x, L, water, sys, damping_model=damping_model,
                           temperature=temperature)
    corr = correlation_xx(rho)
    link = link_budget(x, L, water, sys)
    gain = gain_bbm92(link.y0, link.eta_A, link.eta_B, sys.mu, approx=approx)
    return qber_bbm92(gain, e_sig(sys.e_det, p_kraus(corr)), corr_xx=corr)


def visibility_to_depolarization(V_in: float, V_out: float) -> float:
    """Single-arm depolarization probability q = 3/4 (1 - V_out/V_in)."""
    if not 0 < V_out <= V_in:
        raise DomainError(f"need 0 < V_out <= V_in, got V_in={V_in}, V_out={V_out}")
    return 0.75 * (1 - V_out / V_in)


def depolarization_coefficient_from_visibility(V_in: float, V_out: float, L: float) -> float:
    """Linear depolarization coefficient (1/m) from correlations before and after ``L`` metres."""
    if not L > 0:
        raise DomainError(f"path length must be positive, got {L}")
    q = visibility_to_depolarization(V_in, V_out)
    return -math.log1p(-q) / L

