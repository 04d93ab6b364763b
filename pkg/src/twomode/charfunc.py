"""Normal-ordered characteristic functions of the two-mode state.

The dynamics only enter through the mapped parameters ``(eta_bar,
zeta_bar)``; the closed form below is checked against a direct trace in the
truncated Fock basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .dynamics import EvolutionCoeffs, Scenario
from .errors import DimensionMismatch, TruncationTooSmall
from .fock import DensityMatrix, TwoModeKet

MAX_PARAM = 3.0


@dataclass(frozen=True)
class CharPoint:
    eta: complex
    zeta: complex
    eta_bar: complex
    zeta_bar: complex
    chi_value: complex


def bar_parameters(eta: complex, zeta: complex, coeffs: EvolutionCoeffs):
    c = coeffs
    eta_bar = eta * np.conj(c.u1) + zeta * np.conj(c.v2)
    zeta_bar = eta * np.conj(c.v1) + zeta * np.conj(c.u2)
    return complex(eta_bar), complex(zeta_bar)


def chi_N_closed(s: Scenario, tau: float, eta: complex, zeta: complex) -> complex:
    """Four-exponential closed form for a cat (x) coherent initial state."""
    z = s.labels(tau)
    Phi = s.cat.Phi
    ec, zc = np.conj(eta), np.conj(zeta)
    z1c, z2c, z3c, z4c = (np.conj(w) for w in (z.z1, z.z2, z.z3, z.z4))
    direct = np.exp(eta * z1c - ec * z.z1 + zeta * z3c - zc * z.z3) + np.exp(
        -eta * z2c + ec * z.z2 - zeta * z4c + zc * z.z4
    )
    cross = np.exp(1j * Phi) * np.exp(eta * z1c + ec * z.z2 + zeta * z3c + zc * z.z4) + np.exp(
        -1j * Phi
    ) * np.exp(-eta * z2c - ec * z.z1 - zeta * z4c - zc * z.z3)
    damp = math.exp(-2.0 * abs(s.alpha) ** 2)
    return complex((direct + damp * cross) / s.cat.normalization**2)


def chi_S_closed(s: Scenario, tau: float, eta: complex, zeta: complex) -> complex:
    """Symmetric-order characteristic function, derived from the normal one."""
    return chi_N_closed(s, tau, eta, zeta) * math.exp(-(abs(eta) ** 2 + abs(zeta) ** 2) / 2.0)


def cat_chi_N(alpha: complex, Phi: float, normalization: float, eta: complex) -> complex:
    """Single-mode normal characteristic function of a cat state."""
    a, ac, ec = alpha, np.conj(alpha), np.conj(eta)
    damp = math.exp(-2.0 * abs(alpha) ** 2)
    val = (
        np.exp(eta * ac - ec * a)
        + np.exp(-eta * ac + ec * a)
        + damp * (np.exp(1j * Phi) * np.exp(eta * ac + ec * a) + np.exp(-1j * Phi) * np.exp(-eta * ac - ec * a))
    )
    return complex(val / normalization**2)


def coherent_chi_N(beta: complex, zeta: complex) -> complex:
    return complex(np.exp(zeta * np.conj(beta) - np.conj(zeta) * beta))


def chi_N_factorized(s: Scenario, tau: float, eta: complex, zeta: complex) -> complex:
    """Product of the initial single-mode functions at the mapped parameters."""
    eta_bar, zeta_bar = bar_parameters(eta, zeta, s.coeffs(tau))
    return cat_chi_N(s.alpha, s.cat.Phi, s.cat.normalization, eta_bar) * coherent_chi_N(s.beta, zeta_bar)


def char_point(s: Scenario, tau: float, eta: complex, zeta: complex) -> CharPoint:
    eta_bar, zeta_bar = bar_parameters(eta, zeta, s.coeffs(tau))
    return CharPoint(eta, zeta, eta_bar, zeta_bar, chi_N_closed(s, tau, eta, zeta))


def _normal_displacement(param, dim):
    # truncated exp(p a^dag) exp(-p* a); both factors are exact polynomials
    # of nilpotent matrices, so no truncation error enters here
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    return expm(param * a.conj().T) @ expm(-np.conj(param) * a)


def _check_params(eta, zeta, max_param):
    if abs(eta) > max_param or abs(zeta) > max_param:
        raise TruncationTooSmall(
            f"|eta|, |zeta| must not exceed {max_param} at this truncation "
            f"(got {abs(eta):.3g}, {abs(zeta):.3g})"
        )


def chi_N_numeric(
    state: DensityMatrix | TwoModeKet, eta: complex, zeta: complex, max_param: float = MAX_PARAM
) -> complex:
    """``Tr[rho exp(eta a^dag) exp(-eta* a) exp(zeta b^dag) exp(-zeta* b)]``."""
    _check_params(eta, zeta, max_param)
    if isinstance(state, TwoModeKet):
        da, db = state.amps.shape
        m = state.amps
        op_a = _normal_displacement(eta, da)
        op_b = _normal_displacement(zeta, db)
        return complex(np.sum(m.conj() * (op_a @ m @ op_b.T)))
    if len(state.dims) != 2:
        raise DimensionMismatch("chi_N_numeric needs a two-mode density matrix")
    da, db = state.dims
    op = np.kron(_normal_displacement(eta, da), _normal_displacement(zeta, db))
    return complex(np.sum(state.entries * op.T))


def square_grid(extent: float = 1.5, points: int = 5) -> np.ndarray:
    """Complex grid ``x + i y`` with ``x, y`` in ``[-extent, extent]``."""
    axis = np.linspace(-extent, extent, points)
    return (axis[None, :] + 1j * axis[:, None]).ravel()
