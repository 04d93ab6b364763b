import math

import numpy as np
import pytest
from scipy.linalg import expm

from twomode import dynamics as dyn
from twomode import fock
from twomode import oracle as orc
from twomode.errors import DetuningNotSupported, DimensionMismatch

from conftest import random_ket


def test_ladder():
    lad = orc.ladder(4)
    np.testing.assert_allclose(np.diag(lad.number), np.arange(5))
    np.testing.assert_allclose(lad.annihilate.conj().T @ lad.annihilate, lad.number, atol=1e-14)


def test_generator_matches_dense_construction():
    bundle = orc.rwc_hamiltonian(0.7, 5, 4)
    a = np.kron(orc.ladder(5).annihilate, np.eye(5))
    b = np.kron(np.eye(6), orc.ladder(4).annihilate)
    h = np.exp(0.7j) * a.conj().T @ b + np.exp(-0.7j) * a @ b.conj().T
    np.testing.assert_allclose(bundle.hamiltonian(), h, atol=1e-13)
    np.testing.assert_allclose(bundle.unitary(1.3), expm(-1j * 1.3 * h), atol=1e-12)


def test_generator_commutes_with_total_number():
    bundle = orc.rwc_hamiltonian(0.3, 6, 6)
    h, n = bundle.hamiltonian(), np.diag(bundle.total_number().ravel())
    np.testing.assert_allclose(h @ n - n @ h, 0, atol=1e-13)


@pytest.mark.parametrize("tau", [0.0, 0.37, math.pi, 11.0])
def test_propagator_is_unitary(tau):
    u = orc.rwc_hamiltonian(math.pi / 2, 7, 7).unitary(tau)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(64), atol=1e-12)


def test_semigroup(rng):
    bundle = orc.rwc_hamiltonian(1.1, 6, 6)
    psi = random_ket(rng, (7, 7))
    once = orc.evolve(psi, bundle, 0.9)
    twice = orc.evolve(orc.evolve(psi, bundle, 0.4), bundle, 0.5)
    np.testing.assert_allclose(once.amps, twice.amps, atol=1e-12)
    back = orc.evolve(once, bundle, -0.9)
    np.testing.assert_allclose(back.amps, psi.amps, atol=1e-12)


def test_evolve_rejects_wrong_shape(rng):
    with pytest.raises(DimensionMismatch):
        orc.evolve(random_ket(rng, (3, 4)), orc.rwc_hamiltonian(0.0, 3, 3), 1.0)


@pytest.mark.parametrize("phi", [math.pi / 2, 0.0, 2.2])
def test_oracle_reproduces_analytic_joint_state(phi):
    s = dyn.Scenario.build(1.0 + 0.5j, 0.4, 0.6 - 0.2j, phi)
    oracle = orc.Oracle(s)
    for tau in (0.3, 1.9, 5.0):
        analytic = dyn.joint_state(s, tau, oracle.n_max)
        assert abs(fock.overlap(analytic, oracle.state(tau))) == pytest.approx(1, abs=1e-11)


def test_rk4_heisenberg_integration():
    taus, y = orc.integrate_heisenberg(0.3, 0.5, 2 * math.pi)
    c = dyn.evolution_coeffs(taus, 0.3, 0.5)
    np.testing.assert_allclose(y, np.stack([c.u1, c.v1, c.v2, c.u2], axis=1), atol=1e-9)


def test_verify_passes_for_unit_scenarios(unit_scenario):
    taus = np.linspace(0, 2 * math.pi, 129)
    report = orc.verify_against_analytic(unit_scenario, taus)
    assert report.passed, report.to_json()
    names = [c.name for c in report.checks]
    assert any(n.startswith("exchange_e") for n in names)


def test_negative_control_sign_flipped_entropy():
    s = dyn.Scenario.build(1.0, 0.0)
    taus = np.linspace(0, math.pi, 65)
    bad = {"entropy_a": lambda sc, t: -dyn.entropy_closed_form(sc, t)}
    report = orc.verify_against_analytic(s, taus, analytic=bad)
    failed = [c.name for c in report.checks if not c.passed]
    assert failed == ["entropy_a: closed form vs oracle"]
    assert not report.passed


def test_negative_control_alternative_variance():
    s = dyn.Scenario.build(1.0, 0.0)
    taus = np.linspace(0, math.pi, 65)
    report = orc.verify_against_analytic(s, taus, analytic={"var_a": dyn.variance_uncorrected})
    check = next(c for c in report.checks if c.name.startswith("var_a"))
    assert not check.passed
    assert check.deviation > 0.5


def test_verify_requires_resonance():
    with pytest.raises(DetuningNotSupported):
        orc.verify_against_analytic(dyn.Scenario.build(1.0, detuning=0.2), [0.0])


@pytest.mark.parametrize("alpha2", [1.0, 5.0])
def test_doubling_truncation_is_stable(alpha2):
    s = dyn.Scenario.build(math.sqrt(alpha2), 0.0)
    base = orc.Oracle(s)
    taus = [0.4, 1.3, 2.9]
    coarse = base.observe(taus)
    fine = orc.Oracle(s, n_max=2 * base.n_max).observe(taus)
    for a, b in zip(coarse, fine):
        for name in ("entropy_a", "n_a", "n_b", "var_a", "var_b", "exchange_e"):
            assert abs(getattr(a, name) - getattr(b, name)) < 1e-9, name


def test_truncation_accounts_for_both_modes():
    s = dyn.Scenario.build(math.sqrt(5), 0.0)
    n = orc.oracle_truncation(s)
    assert n == 43
    assert n > fock.choose_truncation([s.cat, s.beta]) + orc.GUARD_LEVELS


def test_report_serialization():
    rep = orc.VerificationReport("x")
    rep.add("a", 1e-8, 2e-9, 0.5)
    rep.add("b", 0.2, 0.1, comparison=">")
    data = rep.to_json()
    assert [c["passed"] for c in data["checks"]] == [True, False]
    assert data["passed"] is False
