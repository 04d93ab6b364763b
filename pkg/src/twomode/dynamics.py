"""Closed-form dynamics of two modes under rotating-wave (up-conversion) coupling.

Everything here is written in the interaction picture: the free rotations
``exp(-i omega_a t)``, ``exp(-i omega_b t)`` are dropped and the only time
variable is the dimensionless slow time ``tau = omega t`` with
``omega = sqrt(Omega**2 + 4 lambda**2) / 2`` (``tau = lambda t`` on
resonance).  Scalar observables are unchanged by the dropped phases.

Functions accept scalar or array ``tau`` wherever the formula is elementwise.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DetuningNotSupported, NullState, RWCValidityWarning, UnsupportedPhase
from .fock import CatSpec, DensityMatrix, TwoModeKet, cat_ket, coherent_ket, tensor_product

PHASE_TOL = 1e-12
DETUNING_TOL = 1e-12


def _near_angle(angle, target, tol=PHASE_TOL):
    d = (angle - target) % (2 * math.pi)
    return min(d, 2 * math.pi - d) <= tol


@dataclass(frozen=True)
class ModeCoupling:
    """Mode frequencies, pump frequency, coupling strength and pump phase.

    All frequencies share one (arbitrary) unit; the CLI measures them in
    units of ``lam``.
    """

    omega_a: float
    omega_b: float
    nu: float
    lam: float
    phi: float = math.pi / 2

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("coupling strength lam must be positive")
        slowest = min(self.omega_a, self.omega_b)
        if self.lam >= 0.1 * slowest or abs(self.detuning) >= 0.1 * slowest:
            warnings.warn(
                "rotating-wave coupling needs lam, |Omega| << omega_a, omega_b",
                RWCValidityWarning,
                stacklevel=3,
            )

    @classmethod
    def resonant(cls, lam=1.0, phi=math.pi / 2, detuning=0.0, omega_a=1e3, omega_b=6e2):
        """Coupling with the pump tuned to give the requested detuning."""
        return cls(omega_a, omega_b, omega_a - omega_b - detuning, lam, phi)

    @property
    def detuning(self) -> float:
        return self.omega_a - self.omega_b - self.nu


@dataclass(frozen=True)
class DerivedParams:
    Omega: float
    chi: float
    omega_slow: float


def derived_coupling(c: ModeCoupling) -> DerivedParams:
    Omega = c.detuning
    omega = math.sqrt(Omega**2 + 4.0 * c.lam**2) / 2.0
    return DerivedParams(Omega, Omega / (2.0 * omega), omega)


@dataclass(frozen=True)
class EvolutionCoeffs:
    tau: float
    u1: complex
    u2: complex
    v1: complex
    v2: complex


def evolution_coeffs(tau, chi: float, phi: float) -> EvolutionCoeffs:
    """Heisenberg mixing coefficients.

    ``a~(tau) = u1 a + v1 b`` and ``b~(tau) = u2 b + v2 a``.
    """
    if not abs(chi) < 1:
        raise ValueError("|chi| must be below 1")
    tau = np.asarray(tau, dtype=float)
    rot = np.exp(1j * chi * tau)
    u1 = rot * (np.cos(tau) - 1j * chi * np.sin(tau))
    v1 = -1j * math.sqrt(1.0 - chi**2) * np.exp(1j * (chi * tau + phi)) * np.sin(tau)
    if tau.ndim == 0:
        u1, v1, tau = complex(u1), complex(v1), float(tau)
    return EvolutionCoeffs(tau, u1, np.conj(u1), v1, -np.conj(v1))


@dataclass(frozen=True)
class ZLabels:
    z1: complex
    z2: complex
    z3: complex
    z4: complex


def z_labels(coeffs: EvolutionCoeffs, alpha: complex, beta: complex) -> ZLabels:
    c = coeffs
    return ZLabels(
        c.u1 * alpha + c.v1 * beta,
        c.u1 * alpha - c.v1 * beta,
        c.v2 * alpha + c.u2 * beta,
        c.v2 * alpha - c.u2 * beta,
    )


@dataclass(frozen=True)
class Scenario:
    """Cat state in mode A, coherent state ``beta`` in mode B, and the coupling."""

    cat: CatSpec
    beta: complex
    coupling: ModeCoupling = field(default_factory=ModeCoupling.resonant)

    def __post_init__(self):
        object.__setattr__(self, "beta", complex(self.beta))

    @classmethod
    def build(cls, alpha, Phi=0.0, beta="balanced", phi=math.pi / 2, detuning=0.0, lam=1.0):
        """Convenience constructor.

        ``beta="balanced"`` picks the intensity that freezes both mean
        energies, with the same phase as ``alpha``.
        """
        alpha = complex(alpha)
        if isinstance(beta, str):
            if beta != "balanced":
                raise ValueError(f"unknown beta mode {beta!r}")
            mag = math.sqrt(balanced_intensity(alpha, Phi))
            beta = mag * np.exp(1j * np.angle(alpha)) if alpha != 0 else mag
        coupling = ModeCoupling.resonant(lam=lam, phi=phi, detuning=detuning)
        return cls(CatSpec(alpha, Phi), complex(beta), coupling)

    @property
    def alpha(self) -> complex:
        return self.cat.alpha

    @property
    def derived(self) -> DerivedParams:
        return derived_coupling(self.coupling)

    def coeffs(self, tau) -> EvolutionCoeffs:
        return evolution_coeffs(tau, self.derived.chi, self.coupling.phi)

    def labels(self, tau) -> ZLabels:
        return z_labels(self.coeffs(tau), self.alpha, self.beta)


def _require_resonant(s: Scenario):
    if abs(s.coupling.detuning) > DETUNING_TOL:
        raise DetuningNotSupported(
            f"closed form holds only at zero detuning (Omega={s.coupling.detuning})"
        )


def _require_exchange_pump(s: Scenario):
    _require_resonant(s)
    if not _near_angle(s.coupling.phi, math.pi / 2):
        raise UnsupportedPhase(f"closed form needs pump phase pi/2, got {s.coupling.phi}")


def joint_state(s: Scenario, tau: float, n_max: int) -> TwoModeKet:
    """``(|z1, z3> + exp(i Phi) |-z2, -z4>) / N`` in a truncated Fock basis."""
    z = s.labels(tau)
    first = tensor_product(coherent_ket(z.z1, n_max), coherent_ket(z.z3, n_max))
    second = tensor_product(coherent_ket(-z.z2, n_max), coherent_ket(-z.z4, n_max))
    amps = (first.amps + np.exp(1j * s.cat.Phi) * second.amps) / s.cat.normalization
    tail = max(0.0, 1.0 - float(np.vdot(amps, amps).real))
    return TwoModeKet(amps, tail)


def initial_state(s: Scenario, n_max: int) -> TwoModeKet:
    return tensor_product(cat_ket(s.cat, n_max), coherent_ket(s.beta, n_max))


def exchanged_state(s: Scenario, n_max: int) -> TwoModeKet:
    """The initial state with the two modes' roles swapped."""
    return tensor_product(coherent_ket(s.beta, n_max), cat_ket(s.cat, n_max))


def reduced_state_closed(s: Scenario, tau: float, n_max: int) -> DensityMatrix:
    """Mode-A reduced state assembled from its four coherent dyads.

    The dyad ``|z1><-z2|`` comes from the bra of the second branch and
    carries ``exp(-i Phi) <-z4|z3>``, i.e.
    ``exp(-|alpha|^2 (1 - cos 2tau)) exp(-i Phi) exp(-2i Im(u2 v2* alpha* beta))``.
    """
    _require_resonant(s)
    c = s.coeffs(tau)
    z = z_labels(c, s.alpha, s.beta)
    x = abs(s.alpha) ** 2
    weight = (
        math.exp(-x * (1.0 - math.cos(2.0 * tau)))
        * np.exp(-1j * s.cat.Phi)
        * np.exp(-2j * (c.u2 * np.conj(c.v2) * np.conj(s.alpha) * s.beta).imag)
    )
    k1 = coherent_ket(z.z1, n_max).amps
    k2 = coherent_ket(-z.z2, n_max).amps
    rho = np.outer(k1, k1.conj()) + np.outer(k2, k2.conj())
    coh = weight * np.outer(k1, k2.conj())
    rho = (rho + coh + coh.conj().T) / s.cat.normalization**2
    return DensityMatrix(rho)


def entropy_closed_form(s: Scenario, tau):
    """Linear entropy ``1 - Tr rho_A^2`` of either mode (they are equal).

    The purity depends on the cat parameters and on ``tau`` only; ``beta``
    and the pump phase drop out because the overlap of the two branches of
    the joint state is conserved.
    """
    _require_resonant(s)
    x = abs(s.alpha) ** 2
    Phi = s.cat.Phi
    c2 = np.cos(2.0 * np.asarray(tau, dtype=float))
    bracket = (
        1.0
        + np.exp(-2.0 * x * (1.0 + c2))
        + np.exp(-2.0 * x * (1.0 - c2))
        + 4.0 * math.cos(Phi) * math.exp(-2.0 * x)
        + math.exp(-4.0 * x) * math.cos(2.0 * Phi)
    )
    return 1.0 - 2.0 * bracket / s.cat.normalization**4


def entropy_with_phase_term(s: Scenario, tau):
    """Entropy with an extra ``Im(alpha beta*)`` phase in the last term.

    Agrees with :func:`entropy_closed_form` only when ``Im(alpha beta*) = 0``
    and is wrong otherwise; kept as a negative control.
    """
    _require_resonant(s)
    x = abs(s.alpha) ** 2
    Phi = s.cat.Phi
    tau = np.asarray(tau, dtype=float)
    c2 = np.cos(2.0 * tau)
    im = (s.alpha * np.conj(s.beta)).imag
    bracket = (
        1.0
        + np.exp(-2.0 * x * (1.0 + c2))
        + np.exp(-2.0 * x * (1.0 - c2))
        + 4.0 * math.cos(Phi) * math.exp(-2.0 * x)
        + math.exp(-4.0 * x) * np.cos(2.0 * Phi + 2.0 * np.sin(2.0 * tau) * im)
    )
    return 1.0 - 2.0 * bracket / s.cat.normalization**4


def mean_excitations(s: Scenario, tau):
    """Mean photon numbers ``(n_a, n_b)``; energies are ``hbar omega_{a,b}`` times these.

    The interference term carries ``Re(exp(i phi) alpha* beta)``, which is
    ``Im(alpha beta*)`` for the pump phase ``phi = pi/2``.
    """
    _require_resonant(s)
    x = abs(s.alpha) ** 2
    b = abs(s.beta) ** 2
    Phi = s.cat.Phi
    tau = np.asarray(tau, dtype=float)
    damp = math.exp(-2.0 * x)
    cos2, sin2 = np.cos(tau) ** 2, np.sin(tau) ** 2
    cross = (np.exp(1j * s.coupling.phi) * np.conj(s.alpha) * s.beta).real
    pref = 2.0 / s.cat.normalization**2
    interference = cross * np.sin(2.0 * tau) * math.sin(Phi) * damp
    n_a = pref * (x * cos2 * (1 - math.cos(Phi) * damp) + b * sin2 * (1 + math.cos(Phi) * damp) + interference)
    n_b = pref * (x * sin2 * (1 - math.cos(Phi) * damp) + b * cos2 * (1 + math.cos(Phi) * damp) - interference)
    return n_a, n_b


def total_excitations(s: Scenario) -> float:
    """Conserved ``<n_A + n_B>``."""
    x = abs(s.alpha) ** 2
    damp = math.cos(s.cat.Phi) * math.exp(-2.0 * x)
    return 2.0 / s.cat.normalization**2 * (x * (1 - damp) + abs(s.beta) ** 2 * (1 + damp))


def balanced_intensity(alpha: complex, Phi: float) -> float:
    """``|beta|^2`` that makes both mean energies constant in time."""
    x = abs(alpha) ** 2
    damp = math.cos(Phi) * math.exp(-2.0 * x)
    if _near_angle(Phi, math.pi) and x < 1e-8:
        raise NullState("odd cat of (nearly) vacuum amplitude has no balanced partner")
    den = 1.0 + damp
    if den <= 1e-12:
        raise NullState("balanced-intensity denominator vanishes")
    return x * (1.0 - damp) / den


def _parity_sign(Phi):
    if _near_angle(Phi, 0.0):
        return 1.0
    if _near_angle(Phi, math.pi):
        return -1.0
    raise UnsupportedPhase(f"variance closed form needs Phi in {{0, pi}}, got {Phi}")


def variance_closed_form(s: Scenario, tau, mode="A"):
    """Photon-number variance of one mode for even or odd cats.

    Even and odd cats are eigenstates of ``a**2`` with eigenvalue
    ``alpha**2`` and have zero odd moments, so the fourth-order moment of
    ``u a + v b`` reduces to a handful of terms.  Valid for any ``beta``
    and pump phase at zero detuning.
    """
    _require_resonant(s)
    sign = _parity_sign(s.cat.Phi)
    x = abs(s.alpha) ** 2
    b = abs(s.beta) ** 2
    damp = math.exp(-2.0 * x)
    r = (1.0 - sign * damp) / (1.0 + sign * damp)
    c = s.coeffs(tau)
    if mode == "A":
        ca, cb = c.u1, c.v1
    elif mode == "B":
        ca, cb = c.v2, c.u2
    else:
        raise ValueError("mode must be 'A' or 'B'")
    pa, pb = np.abs(ca) ** 2, np.abs(cb) ** 2
    mean = pa * x * r + pb * b
    pair = np.conj(ca) ** 2 * cb**2 * np.conj(s.alpha) ** 2 * s.beta**2
    fourth = pa**2 * x**2 + 4.0 * pa * pb * x * r * b + pb**2 * b**2 + 2.0 * pair.real
    return fourth + mean - mean**2


def variance_uncorrected(s: Scenario, tau):
    """A shorter mode-A variance expression, kept as a negative control.

    It matches the exact variance at ``tau = 0`` only; at ``tau = pi/2``
    it returns 0 where mode A is a coherent state of variance ``|beta|^2``.
    """
    _require_resonant(s)
    sign = _parity_sign(s.cat.Phi)
    x = abs(s.alpha) ** 2
    damp = math.exp(-2.0 * x)
    r = (1.0 - sign * damp) / (1.0 + sign * damp)
    tau = np.asarray(tau, dtype=float)
    c, sn = np.cos(tau), np.sin(tau)
    return x**2 * (c**4 - (1 - sn**4) * r**2) + x * c**2 * r * (1 + 4 * x * r * sn**2)


def exchange_functional_closed(s: Scenario, tau):
    """Exchange functional from its closed form (zero detuning, pump phase pi/2)."""
    _require_exchange_pump(s)
    x = abs(s.alpha) ** 2
    b = abs(s.beta) ** 2
    Phi = s.cat.Phi
    tau = np.asarray(tau, dtype=float)
    c, sn = np.cos(tau), np.sin(tau)
    z = s.labels(tau)
    ab = s.alpha * np.conj(s.beta)
    re, im = ab.real, ab.imag
    shift = Phi - 2.0 * c * im
    braces = (
        np.exp(2 * c * re) * np.cosh(2 * (s.alpha * np.conj(z.z3)).real)
        + np.exp(-2 * c * re) * np.cosh(2 * (s.alpha * np.conj(z.z4)).real)
        + np.exp(-2 * sn * x)
        + 4 * np.cosh(2 * c * re) * np.cos(shift)
        + np.exp(2 * sn * x) * np.cos(2 * shift)
    )
    return 2.0 * np.exp(-2.0 * (x + b * (1.0 - sn))) / s.cat.normalization**4 * braces


def exchange_functional_overlap(s: Scenario, tau: float, n_max: int) -> float:
    """``|<exchanged|joint(tau)>|^2`` normalized by both squared norms."""
    psi = joint_state(s, tau, n_max)
    ref = exchanged_state(s, n_max)
    amp = np.vdot(ref.amps, psi.amps)
    return float(abs(amp) ** 2 / (psi.norm2 * ref.norm2))


def exchange_at_half_period(alpha: complex, Phi: float) -> float:
    """Value the exchange functional takes at ``tau = pi/2 (mod 2 pi)``."""
    damp = math.exp(-2.0 * abs(alpha) ** 2)
    return ((math.cos(Phi) + damp) / (1.0 + math.cos(Phi) * damp)) ** 2


def exchange_at_three_half_period(beta: complex) -> float:
    """Value at ``tau = 3 pi/2 (mod 2 pi)``, independent of the cat."""
    return math.exp(-4.0 * abs(beta) ** 2)


@dataclass(frozen=True)
class ExchangeSchedule:
    """Recurrence and exchange times in slow time and in real time.

    ``recurrence_phases[n-1]`` holds the factors ``(exp(i n pi (1+chi)),
    exp(i n pi (1-chi)))`` picked up by modes A and B at ``tau_n = n pi``.
    ``exact_recurrence_taus`` lists the ``tau_n`` at which both factors are 1.
    """

    omega_slow: float
    chi: float
    recurrence_taus: list
    recurrence_phases: list
    exact_recurrence_taus: list
    exchange_taus: list = field(default_factory=list)
    exchange_phases: list = field(default_factory=list)
    exchange_note: str = ""

    @property
    def exact_recurrence(self) -> bool:
        return bool(self.exact_recurrence_taus)

    def to_json(self) -> dict:
        def cplx(z):
            return [float(np.real(z)), float(np.imag(z))]

        return {
            "units": "tau is the slow time omega*t; t is in units of 1/lambda",
            "omega_slow": self.omega_slow,
            "chi": self.chi,
            "recurrence": [
                {"n": n, "tau": tau, "t": tau / self.omega_slow, "phase_a": cplx(pa), "phase_b": cplx(pb)}
                for n, (tau, (pa, pb)) in enumerate(zip(self.recurrence_taus, self.recurrence_phases), 1)
            ],
            "exact_recurrence": self.exact_recurrence,
            "exact_recurrence_taus": self.exact_recurrence_taus,
            "exchange": [
                {"n": n, "tau": tau, "t": tau / self.omega_slow, "theta": th, "delta": de}
                for n, (tau, (th, de)) in enumerate(zip(self.exchange_taus, self.exchange_phases), 1)
            ],
            "exchange_note": self.exchange_note,
        }


def special_times(s: Scenario, n_terms: int) -> ExchangeSchedule:
    if n_terms < 1:
        raise ValueError("n_terms must be at least 1")
    d = s.derived
    chi = d.chi
    rec_taus, rec_phases, exact = [], [], []
    for n in range(1, n_terms + 1):
        pa = np.exp(1j * n * math.pi * (1 + chi))
        pb = np.exp(1j * n * math.pi * (1 - chi))
        rec_taus.append(n * math.pi)
        rec_phases.append((complex(pa), complex(pb)))
        if abs(pa - 1) < 1e-9 and abs(pb - 1) < 1e-9:
            exact.append(n * math.pi)
    resonant = abs(s.coupling.detuning) <= DETUNING_TOL
    pump_ok = _near_angle(s.coupling.phi, math.pi / 2)
    ex_taus, ex_phases, note = [], [], ""
    if resonant and pump_ok:
        for n in range(1, n_terms + 1):
            ex_taus.append((n - 0.5) * math.pi)
            ex_phases.append(((n + 1) * math.pi, n * math.pi))
    elif not resonant:
        note = "no exchange: modes swap only at zero detuning"
    else:
        note = "no exchange schedule: the swap phases assume pump phase pi/2"
    return ExchangeSchedule(d.omega_slow, chi, rec_taus, rec_phases, exact, ex_taus, ex_phases, note)
