import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twomode import dynamics as dyn
from twomode import fock
from twomode.errors import DetuningNotSupported, RWCValidityWarning, UnsupportedPhase

N_MAX = 40

amplitudes = st.complex_numbers(max_magnitude=1.6, allow_nan=False, allow_infinity=False)
times = st.floats(0, 4 * math.pi)
phases = st.floats(0, 2 * math.pi)


def build(alpha, Phi=0.0, beta="balanced", phi=math.pi / 2, detuning=0.0):
    return dyn.Scenario.build(alpha, Phi, beta, phi, detuning)


def safe_cat(alpha, Phi):
    return abs(alpha) > 0.3 or math.cos(Phi) > -0.5


# ---------------------------------------------------------------- coefficients


def test_coefficients_at_origin():
    c = dyn.evolution_coeffs(0.0, 0.4, 1.0)
    assert (c.u1, c.v1, c.u2, c.v2) == (1, 0, 1, 0)


def test_resonant_coefficients_reduce_to_rotation():
    taus = np.linspace(0, 6, 50)
    c = dyn.evolution_coeffs(taus, 0.0, 0.3)
    np.testing.assert_allclose(c.u1, np.cos(taus), atol=1e-15)
    np.testing.assert_allclose(c.v1, -1j * np.exp(0.3j) * np.sin(taus), atol=1e-15)


@given(times, st.floats(-0.99, 0.99), phases)
def test_coefficients_form_a_unitary(tau, chi, phi):
    c = dyn.evolution_coeffs(tau, chi, phi)
    m = np.array([[c.u1, c.v1], [c.v2, c.u2]])
    np.testing.assert_allclose(m @ m.conj().T, np.eye(2), atol=1e-12)


def test_chi_must_be_subunit():
    with pytest.raises(ValueError):
        dyn.evolution_coeffs(1.0, 1.0, 0.0)


@given(times, st.floats(-0.9, 0.9), phases, amplitudes, amplitudes)
def test_labels_conserve_norm(tau, chi, phi, alpha, beta):
    z = dyn.z_labels(dyn.evolution_coeffs(tau, chi, phi), alpha, beta)
    total = abs(alpha) ** 2 + abs(beta) ** 2
    assert abs(z.z1) ** 2 + abs(z.z3) ** 2 == pytest.approx(total, abs=1e-12)
    assert abs(z.z2) ** 2 + abs(z.z4) ** 2 == pytest.approx(total, abs=1e-12)


# ---------------------------------------------------------------- coupling


def test_coupling_derived_parameters():
    c = dyn.ModeCoupling.resonant(lam=1.0, detuning=1 / math.sqrt(2))
    d = dyn.derived_coupling(c)
    assert d.chi == pytest.approx(1 / 3)
    assert d.omega_slow == pytest.approx(math.sqrt(0.5 + 4) / 2)


def test_rwc_validity_warning():
    with pytest.warns(RWCValidityWarning):
        dyn.ModeCoupling(10.0, 6.0, 4.0, 2.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        dyn.ModeCoupling.resonant()


def test_balanced_build_matches_cat_mean():
    s = build(math.sqrt(2))
    assert abs(s.beta) ** 2 == pytest.approx(2 * math.tanh(2))
    assert np.angle(s.beta) == pytest.approx(0.0)


def test_unknown_beta_mode():
    with pytest.raises(ValueError):
        build(1.0, beta="loud")


# ---------------------------------------------------------------- states


def test_joint_state_starts_at_initial_state():
    s = build(1.2 + 0.3j, 0.7, 0.5 - 0.2j)
    np.testing.assert_allclose(dyn.joint_state(s, 0.0, N_MAX).amps, dyn.initial_state(s, N_MAX).amps, atol=1e-14)


def test_joint_state_is_exchanged_state_at_quarter_period():
    s = build(1.0, 0.0)
    psi = dyn.joint_state(s, math.pi / 2, N_MAX)
    ref = dyn.exchanged_state(s, N_MAX)
    assert abs(fock.overlap(ref, psi)) ** 2 == pytest.approx(1, abs=1e-12)


@given(amplitudes, phases, amplitudes, times, phases)
@settings(max_examples=40, deadline=None)
def test_reduced_state_matches_partial_trace(alpha, Phi, beta, tau, phi):
    if not safe_cat(alpha, Phi):
        return
    s = build(alpha, Phi, beta, phi)
    rho = dyn.reduced_state_closed(s, tau, N_MAX)
    traced = fock.partial_trace(dyn.joint_state(s, tau, N_MAX), "A")
    np.testing.assert_allclose(rho.entries, traced.entries, atol=1e-10)


# ---------------------------------------------------------------- entropy


def test_entropy_at_quarter_of_unit_even_cat():
    s = build(1.0, 0.0)
    assert dyn.entropy_closed_form(s, math.pi / 4) == pytest.approx(0.2900128292, abs=1e-10)


def test_entropy_zeros():
    s = build(1.0, math.pi / 2)
    taus = np.arange(9) * math.pi / 2
    np.testing.assert_allclose(dyn.entropy_closed_form(s, taus), 0, atol=1e-12)


@given(amplitudes, phases, amplitudes, times, phases)
@settings(max_examples=40, deadline=None)
def test_entropy_matches_reduced_state(alpha, Phi, beta, tau, phi):
    if not safe_cat(alpha, Phi):
        return
    s = build(alpha, Phi, beta, phi)
    rho = fock.partial_trace(dyn.joint_state(s, tau, N_MAX), "A")
    assert dyn.entropy_closed_form(s, tau) == pytest.approx(fock.purity_and_linear_entropy(rho)[1], abs=1e-10)


def test_phase_term_in_alternative_entropy_expression_is_spurious():
    s = build(1.0, math.pi / 2, 0.8j)
    tau = 0.6
    rho = fock.partial_trace(dyn.joint_state(s, tau, N_MAX), "A")
    exact = fock.purity_and_linear_entropy(rho)[1]
    assert dyn.entropy_closed_form(s, tau) == pytest.approx(exact, abs=1e-12)
    assert abs(dyn.entropy_with_phase_term(s, tau) - exact) > 1e-3
    real = build(1.0, math.pi / 2, 0.8)
    assert dyn.entropy_with_phase_term(real, tau) == pytest.approx(dyn.entropy_closed_form(real, tau), abs=1e-15)


# ---------------------------------------------------------------- photon numbers


@given(amplitudes, phases, amplitudes, times, phases)
@settings(max_examples=40, deadline=None)
def test_mean_excitations_match_state(alpha, Phi, beta, tau, phi):
    if not safe_cat(alpha, Phi):
        return
    s = build(alpha, Phi, beta, phi)
    psi = dyn.joint_state(s, tau, N_MAX)
    n_a, n_b = dyn.mean_excitations(s, tau)
    assert n_a == pytest.approx(fock.number_statistics(psi, "A")[0], abs=1e-10)
    assert n_b == pytest.approx(fock.number_statistics(psi, "B")[0], abs=1e-10)
    assert n_a + n_b == pytest.approx(dyn.total_excitations(s), abs=1e-12)


@pytest.mark.parametrize("Phi", [0.0, math.pi / 2, math.pi, 2.0])
def test_balanced_intensity_freezes_energies(Phi):
    s = build(1.3 * np.exp(0.4j), Phi)
    taus = np.linspace(0, 2 * math.pi, 101)
    n_a, n_b = dyn.mean_excitations(s, taus)
    assert np.ptp(n_a) < 1e-12
    assert np.ptp(n_b) < 1e-12


@given(amplitudes, amplitudes, times, phases, st.sampled_from([0.0, math.pi]))
@settings(max_examples=40, deadline=None)
def test_variance_matches_state(alpha, beta, tau, phi, Phi):
    if not safe_cat(alpha, Phi):
        return
    s = build(alpha, Phi, beta, phi)
    psi = dyn.joint_state(s, tau, N_MAX)
    assert dyn.variance_closed_form(s, tau, "A") == pytest.approx(fock.number_statistics(psi, "A")[1], abs=1e-9)
    assert dyn.variance_closed_form(s, tau, "B") == pytest.approx(fock.number_statistics(psi, "B")[1], abs=1e-9)


def test_variance_quarter_period_shift():
    s = build(math.sqrt(5), 0.0)
    taus = np.linspace(0, 2 * math.pi, 201)
    np.testing.assert_allclose(
        dyn.variance_closed_form(s, taus, "B"), dyn.variance_closed_form(s, taus + math.pi / 2, "A"), atol=1e-10
    )


def test_alternative_variance_expression_fails_at_exchange():
    s = build(1.0, 0.0)
    assert dyn.variance_uncorrected(s, 0.0) == pytest.approx(dyn.variance_closed_form(s, 0.0), abs=1e-14)
    assert dyn.variance_uncorrected(s, math.pi / 2) == pytest.approx(0.0, abs=1e-14)
    assert dyn.variance_closed_form(s, math.pi / 2) == pytest.approx(abs(s.beta) ** 2, abs=1e-14)


def test_variance_needs_definite_parity():
    with pytest.raises(UnsupportedPhase):
        dyn.variance_closed_form(build(1.0, math.pi / 2), 0.3)


# ---------------------------------------------------------------- exchange


@given(amplitudes, phases, amplitudes, times)
@settings(max_examples=40, deadline=None)
def test_exchange_closed_form_matches_overlap(alpha, Phi, beta, tau):
    if not safe_cat(alpha, Phi):
        return
    s = build(alpha, Phi, beta)
    assert dyn.exchange_functional_closed(s, tau) == pytest.approx(
        dyn.exchange_functional_overlap(s, tau, N_MAX), abs=1e-10
    )


@pytest.mark.parametrize("Phi", np.linspace(0, 2 * math.pi, 7))
def test_exchange_plateaus(Phi):
    s = build(math.sqrt(2), Phi, 0.9)
    assert dyn.exchange_functional_closed(s, math.pi / 2) == pytest.approx(
        dyn.exchange_at_half_period(s.alpha, Phi), abs=1e-12
    )
    assert dyn.exchange_functional_closed(s, 1.5 * math.pi) == pytest.approx(math.exp(-4 * 0.81), abs=1e-12)


def test_exchange_closed_form_domain():
    with pytest.raises(UnsupportedPhase):
        dyn.exchange_functional_closed(build(1.0, phi=0.3), 1.0)
    with pytest.raises(DetuningNotSupported):
        dyn.exchange_functional_closed(build(1.0, detuning=0.5), 1.0)
    with pytest.raises(DetuningNotSupported):
        dyn.entropy_closed_form(build(1.0, detuning=0.5), 1.0)


# ---------------------------------------------------------------- schedule


def test_resonant_schedule():
    sched = dyn.special_times(build(1.0), 4)
    assert sched.recurrence_taus[0] == pytest.approx(math.pi)
    assert sched.exchange_taus[0] == pytest.approx(math.pi / 2)
    assert sched.recurrence_taus[0] == pytest.approx(2 * sched.exchange_taus[0])
    assert sched.exact_recurrence_taus == pytest.approx([2 * math.pi, 4 * math.pi])


def test_schedule_without_exchange_pump():
    sched = dyn.special_times(build(1.0, phi=1.0), 3)
    assert sched.exchange_taus == []
    assert "pi/2" in sched.exchange_note


def test_rational_chi_recurrence():
    s = build(1.0, detuning=1 / math.sqrt(2))
    sched = dyn.special_times(s, 6)
    assert s.derived.chi == pytest.approx(1 / 3)
    assert sched.exact_recurrence
    assert sched.exact_recurrence_taus == pytest.approx([3 * math.pi, 6 * math.pi])
    assert sched.exchange_taus == []
    data = sched.to_json()
    assert data["recurrence"][2]["t"] == pytest.approx(3 * math.pi / s.derived.omega_slow)


def test_irrational_chi_never_recurs_exactly():
    sched = dyn.special_times(build(1.0, detuning=1.0), 20)
    assert not sched.exact_recurrence
