"""Brute-force reference dynamics in the truncated two-mode Fock basis.

The resonant generator ``H / (hbar lambda) = e^{i phi} a^dag b + e^{-i phi} a b^dag``
conserves the total excitation number, so it is block diagonal in the
sectors ``n_a + n_b = k``.  Each block is tridiagonal; after removing the
pump phase with a diagonal gauge it is real symmetric and is diagonalized
once.  ``U(tau) = V exp(-i Lambda tau) V^dag`` is then exact at any ``tau``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import dynamics as dyn
from .errors import DetuningNotSupported, DimensionMismatch, TruncationTooLarge
from .fock import (
    DEFAULT_EPSILON,
    MAX_TRUNCATION,
    TwoModeKet,
    choose_joint_truncation,
    partial_trace,
    purity_and_linear_entropy,
)

GUARD_LEVELS = 4


@dataclass(frozen=True)
class LadderMatrices:
    n_max: int
    annihilate: np.ndarray
    number: np.ndarray


def ladder(n_max: int) -> LadderMatrices:
    n = np.arange(n_max + 1, dtype=float)
    a = np.diag(np.sqrt(n[1:]), 1)
    return LadderMatrices(n_max, a, np.diag(n))


@dataclass(frozen=True)
class _Sector:
    rows: np.ndarray  # n_a of each basis state in the sector
    cols: np.ndarray  # n_b
    gauge: np.ndarray  # exp(i phi j), j = position along the sector
    vectors: np.ndarray  # real orthogonal eigenvectors of the gauged block
    values: np.ndarray


@dataclass(frozen=True)
class PropagatorBundle:
    """Eigendecomposition of the resonant generator on a rectangular box."""

    phi: float
    n_max_a: int
    n_max_b: int
    sectors: tuple = field(repr=False)

    @property
    def shape(self):
        return (self.n_max_a + 1, self.n_max_b + 1)

    def hamiltonian(self) -> np.ndarray:
        """Dense ``H / (hbar lambda)`` on the flattened box (index ``n_a * d_b + n_b``)."""
        la, lb = ladder(self.n_max_a), ladder(self.n_max_b)
        a = np.kron(la.annihilate, np.eye(self.n_max_b + 1))
        b = np.kron(np.eye(self.n_max_a + 1), lb.annihilate)
        h = np.exp(1j * self.phi) * a.T @ b
        return h + h.conj().T

    def unitary(self, tau: float) -> np.ndarray:
        """Dense ``U(tau)`` assembled from the sector blocks."""
        da, db = self.shape
        u = np.zeros((da * db, da * db), dtype=complex)
        for sec in self.sectors:
            idx = sec.rows * db + sec.cols
            block = (sec.gauge[:, None] * sec.vectors) * np.exp(-1j * sec.values * tau)
            block = block @ (sec.vectors.T * sec.gauge.conj()[None, :])
            u[np.ix_(idx, idx)] = block
        return u

    def total_number(self) -> np.ndarray:
        da, db = self.shape
        return np.add.outer(np.arange(da), np.arange(db)).astype(float)


def rwc_hamiltonian(phi: float, n_max_a: int, n_max_b: int, ceiling: int = MAX_TRUNCATION) -> PropagatorBundle:
    if n_max_a < 0 or n_max_b < 0:
        raise ValueError("truncations must be non-negative")
    if max(n_max_a, n_max_b) > ceiling:
        raise TruncationTooLarge(f"truncation above the ceiling {ceiling}")
    sectors = []
    for k in range(n_max_a + n_max_b + 1):
        lo, hi = max(0, k - n_max_b), min(k, n_max_a)
        rows = np.arange(lo, hi + 1)
        cols = k - rows
        j = np.arange(rows.size)
        gauge = np.exp(1j * phi * j)
        if rows.size == 1:
            vectors, values = np.ones((1, 1)), np.zeros(1)
        else:
            # <n_a+1, n_b-1| a^dag b |n_a, n_b> = sqrt(n_a+1) sqrt(n_b)
            off = np.sqrt(rows[:-1] + 1.0) * np.sqrt(cols[:-1].astype(float))
            values, vectors = eigh_tridiagonal(np.zeros(rows.size), off)
        sectors.append(_Sector(rows, cols, gauge, vectors, values))
    return PropagatorBundle(float(phi), n_max_a, n_max_b, tuple(sectors))


def evolve(state: TwoModeKet, bundle: PropagatorBundle, tau: float) -> TwoModeKet:
    if state.amps.shape != bundle.shape:
        raise DimensionMismatch(f"state shape {state.amps.shape} != propagator shape {bundle.shape}")
    out = np.zeros(bundle.shape, dtype=complex)
    m = state.amps
    for sec in bundle.sectors:
        c = sec.vectors.T @ (sec.gauge.conj() * m[sec.rows, sec.cols])
        out[sec.rows, sec.cols] = sec.gauge * (sec.vectors @ (np.exp(-1j * sec.values * tau) * c))
    return TwoModeKet(out, state.tail_mass)


@dataclass(frozen=True)
class ObservableRecord:
    tau: float
    entropy_a: float
    entropy_b: float
    n_a: float
    n_b: float
    var_a: float
    var_b: float
    exchange_e: float
    total_n: float


FIELDS = tuple(ObservableRecord.__dataclass_fields__)


def oracle_truncation(s: dyn.Scenario, epsilon: float = DEFAULT_EPSILON, guard: int = GUARD_LEVELS) -> int:
    return choose_joint_truncation(s.cat, s.beta, epsilon, guard=guard)


def _moments(p):
    n = np.arange(p.size, dtype=float)
    mean = float(p @ n)
    return mean, float(p @ (n * n)) - mean * mean


def record(tau: float, psi: TwoModeKet, exchanged: TwoModeKet) -> ObservableRecord:
    norm2 = psi.norm2
    p = np.abs(psi.amps) ** 2 / norm2
    n_a, var_a = _moments(p.sum(axis=1))
    n_b, var_b = _moments(p.sum(axis=0))
    _, s_a = purity_and_linear_entropy(partial_trace(psi, "A"))
    _, s_b = purity_and_linear_entropy(partial_trace(psi, "B"))
    e = abs(np.vdot(exchanged.amps, psi.amps)) ** 2 / (norm2 * exchanged.norm2)
    total = float(np.sum(p * np.add.outer(np.arange(p.shape[0]), np.arange(p.shape[1]))))
    return ObservableRecord(float(tau), s_a, s_b, n_a, n_b, var_a, var_b, float(e), total)


class Oracle:
    """Propagator, initial state and exchanged reference for one scenario."""

    def __init__(self, s: dyn.Scenario, n_max: int | None = None, epsilon: float = DEFAULT_EPSILON):
        if abs(s.coupling.detuning) > dyn.DETUNING_TOL:
            raise DetuningNotSupported("the brute-force propagator is built for zero detuning")
        self.scenario = s
        self.n_max = oracle_truncation(s, epsilon) if n_max is None else n_max
        self.bundle = rwc_hamiltonian(s.coupling.phi, self.n_max, self.n_max)
        self.initial = dyn.initial_state(s, self.n_max)
        self.exchanged = dyn.exchanged_state(s, self.n_max)

    def state(self, tau: float) -> TwoModeKet:
        return evolve(self.initial, self.bundle, tau)

    def observe(self, taus: Sequence[float]) -> list[ObservableRecord]:
        return [record(t, self.state(t), self.exchanged) for t in taus]


def observe_grid(s: dyn.Scenario, taus: Sequence[float], n_max: int | None = None) -> list[ObservableRecord]:
    return Oracle(s, n_max).observe(taus)


def integrate_heisenberg(chi: float, phi: float, tau_max: float, step: float = math.pi / 4096):
    """Fixed-step RK4 integration of the interaction-picture Heisenberg equations.

    Integrates ``d a~/dtau = -i sqrt(1-chi^2) e^{i(2 chi tau + phi)} b~`` and its
    partner for the coefficient rows of ``a~`` and ``b~`` on ``(a(0), b(0))``.
    Returns ``taus`` and an array ``(len(taus), 4)`` holding
    ``(u1, v1, v2, u2)`` along the trajectory.
    """
    g = math.sqrt(1.0 - chi**2)

    def rhs(t, y):
        ph = np.exp(1j * (2.0 * chi * t + phi))
        # y = [a~ on a, a~ on b, b~ on a, b~ on b]
        return -1j * g * np.array([ph * y[2], ph * y[3], y[0] / ph, y[1] / ph])

    n_steps = int(round(tau_max / step))
    h = tau_max / n_steps
    y = np.array([1, 0, 0, 1], dtype=complex)
    out = np.empty((n_steps + 1, 4), dtype=complex)
    out[0] = y
    t = 0.0
    for i in range(n_steps):
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = (i + 1) * h
        out[i + 1] = y
    return np.linspace(0.0, tau_max, n_steps + 1), out


@dataclass
class Check:
    name: str
    tolerance: float
    deviation: float
    worst_tau: float | None = None
    comparison: str = "<="

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.deviation):
            return False
        if self.comparison == "<":
            return self.deviation < self.tolerance
        if self.comparison == ">":
            return self.deviation > self.tolerance
        return self.deviation <= self.tolerance

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "tolerance": self.tolerance,
            "comparison": self.comparison,
            "deviation": float(self.deviation),
            "worst_tau": self.worst_tau,
            "passed": self.passed,
        }


@dataclass
class VerificationReport:
    label: str
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, tolerance, deviation, worst_tau=None, comparison="<="):
        self.checks.append(Check(name, tolerance, float(deviation), worst_tau, comparison))

    def to_json(self) -> dict:
        return {"label": self.label, "passed": self.passed, "checks": [c.to_json() for c in self.checks]}


def _mean_a(s, t):
    return dyn.mean_excitations(s, t)[0]


def _mean_b(s, t):
    return dyn.mean_excitations(s, t)[1]


DEFAULT_ANALYTIC: Mapping[str, Callable] = {
    "entropy_a": dyn.entropy_closed_form,
    "n_a": _mean_a,
    "n_b": _mean_b,
    "var_a": lambda s, t: dyn.variance_closed_form(s, t, "A"),
    "var_b": lambda s, t: dyn.variance_closed_form(s, t, "B"),
    "exchange_e": dyn.exchange_functional_closed,
}

DEFAULT_TOLERANCES = {
    "entropy_a": 1e-8,
    "n_a": 1e-8,
    "n_b": 1e-8,
    "var_a": 1e-8,
    "var_b": 1e-8,
    "exchange_e": 1e-8,
    "entropy_symmetry": 1e-10,
    "total_n_drift": 1e-12,
}


def _applicable(name, s):
    if name in ("var_a", "var_b"):
        return dyn._near_angle(s.cat.Phi, 0.0) or dyn._near_angle(s.cat.Phi, math.pi)
    if name == "exchange_e":
        return dyn._near_angle(s.coupling.phi, math.pi / 2)
    return True


def verify_against_analytic(
    s: dyn.Scenario,
    taus: Sequence[float],
    tolerances: Mapping[str, float] | None = None,
    analytic: Mapping[str, Callable] | None = None,
    records: Sequence[ObservableRecord] | None = None,
    label: str = "",
) -> VerificationReport:
    """Compare every applicable closed form with the oracle on a tau grid.

    ``analytic`` overrides individual closed forms (used for negative
    controls).  Failures are recorded in the report, never raised.
    """
    if abs(s.coupling.detuning) > dyn.DETUNING_TOL:
        raise DetuningNotSupported("verification runs at zero detuning only")
    tol = dict(DEFAULT_TOLERANCES, **(tolerances or {}))
    forms = dict(DEFAULT_ANALYTIC, **(analytic or {}))
    taus = np.asarray(taus, dtype=float)
    if records is None:
        records = observe_grid(s, taus)
    report = VerificationReport(label)
    for name, form in forms.items():
        if not _applicable(name, s):
            continue
        closed = np.array([form(s, t) for t in taus], dtype=float)
        observed = np.array([getattr(r, name) for r in records])
        dev = np.abs(closed - observed)
        worst = int(np.argmax(dev))
        report.add(f"{name}: closed form vs oracle", tol[name], dev[worst], float(taus[worst]))
    sym = np.array([abs(r.entropy_a - r.entropy_b) for r in records])
    report.add("entropy_a == entropy_b", tol["entropy_symmetry"], sym.max(), float(taus[int(np.argmax(sym))]))
    total = np.array([r.total_n for r in records])
    drift = np.abs(total - total[0])
    report.add("total excitation number conserved", tol["total_n_drift"], drift.max(), float(taus[int(np.argmax(drift))]))
    return report
