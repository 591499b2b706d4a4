import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from spinllg import oracle
from spinllg.analysis import block_envelope
from spinllg.core import ModelParams
from spinllg.errors import SizeError

from .conftest import two_spin_ops


@pytest.fixture(scope="module")
def ops():
    return oracle.build_spin_operators()


# ---- spin algebra ------------------------------------------------------------

def test_spin_operators_match_independent_build(ops):
    S1, S2 = two_spin_ops()
    np.testing.assert_allclose(ops.S1, np.array(S1), atol=0)
    np.testing.assert_allclose(ops.S2, np.array(S2), atol=0)


@pytest.mark.parametrize("which", ["S1", "S2", "S"])
def test_su2_commutators(ops, which):
    V = getattr(ops, which)
    for a in range(3):
        for b in range(3):
            lhs = V[a] @ V[b] - V[b] @ V[a]
            rhs = 1j * np.einsum("c,cij->ij", oracle.LEVI_CIVITA[a, b], V)
            np.testing.assert_allclose(lhs, rhs, atol=1e-15)


def test_casimir(ops):
    np.testing.assert_allclose(oracle.op_dot(ops.S1, ops.S1), 0.75 * np.eye(4), atol=1e-15)


def test_identity_report_passes():
    report = oracle.verify_identities()
    assert report.passed and len(report.checks) == 4
    assert all(c.residual <= 1e-12 for c in report.checks)
    assert "PASS" in report.format() and "FAIL" not in report.format()


def test_identity_report_fails_with_negative_tolerance():
    assert not oracle.verify_identities(tolerance=-1.0).passed


def test_m_squared_on_singlet_and_triplet(ops):
    singlet = np.array([0, 1, -1, 0]) / math.sqrt(2)
    triplet = np.array([1, 0, 0, 0], dtype=float)
    mm = oracle.op_dot(ops.m, ops.m)
    assert np.real(singlet @ mm @ singlet) == pytest.approx(0.75, abs=1e-15)
    assert np.real(triplet @ mm @ triplet) == pytest.approx(0.25, abs=1e-15)


# ---- bath --------------------------------------------------------------------

def test_bath_midpoint_example(ref_params):
    bath = oracle.discretize_bath(ref_params, 2)
    np.testing.assert_allclose(bath.frequencies, [50, 150])
    np.testing.assert_allclose(bath.couplings ** 2, [40, 120], rtol=1e-14)
    assert bath.hilbert_dim == 256


@given(st.integers(1, 12), st.floats(1e-4, 0.5), st.floats(1.0, 500.0))
def test_bath_total_coupling_is_invariant(n, eta, wc):
    p = ModelParams(eta=eta, omega_c=wc)
    total = np.sum(oracle.discretize_bath(p, n).couplings ** 2)
    assert total == pytest.approx(eta * wc ** 2 / 2, rel=1e-12)


def test_bath_rejects_negative():
    with pytest.raises(ValueError):
        oracle.discretize_bath(ModelParams(), -1)


def test_bath_annihilator_commutators():
    bath = oracle.discretize_bath(ModelParams(), 1, n_max=2)
    b = oracle.bath_annihilators(bath)
    assert len(b) == 3
    # [b_q, b_r^dag] = delta_qr away from the truncation edge: check on vacuum
    vac = np.zeros(bath.dim)
    vac[0] = 1
    for q in range(3):
        for r in range(3):
            c = b[q] @ b[r].conj().T - b[r].conj().T @ b[q]
            assert np.vdot(vac, c @ vac).real == pytest.approx(float(q == r))


# ---- Hamiltonian -------------------------------------------------------------

def test_spin_only_spectrum(ref_params):
    H = oracle.build_hamiltonian(ref_params, oracle.discretize_bath(ref_params, 0))
    np.testing.assert_allclose(np.linalg.eigvalsh(H), [-1.75, -0.75, 0.25, 2.25], atol=1e-14)


def test_hamiltonian_hermitian(ref_params):
    H = oracle.build_hamiltonian(ref_params, oracle.discretize_bath(ref_params, 2))
    assert H.shape == (256, 256)
    np.testing.assert_allclose(H, H.conj().T, atol=0)


def test_size_cap(ref_params):
    with pytest.raises(SizeError):
        oracle.build_hamiltonian(ref_params, oracle.discretize_bath(ref_params, 4),
                                 max_dim=4096)
    with pytest.raises(SizeError):
        oracle.simulate(ref_params, 0.7, 0.3, [0.0], n_modes=2, max_dim=100)


@pytest.mark.parametrize("J,eps", [(1.0, 2.0), (1.0, 0.5), (2.0, -1.0), (0.0, 1.0)])
def test_h0_spectrum_matches_diagonalization(J, eps):
    p = ModelParams(J=J, eps=eps)
    H = oracle.build_hamiltonian(p, oracle.discretize_bath(p, 0))
    levels = oracle.h0_spectrum(J, eps)
    np.testing.assert_allclose([lv.energy for lv in levels], np.linalg.eigvalsh(H), atol=1e-14)


def test_h0_spectrum_labels():
    levels = oracle.h0_spectrum(1.0, 2.0)
    assert (levels[0].total_spin, levels[0].Sz) == (1, -1)
    assert levels[0].energy == pytest.approx(-1.75)
    assert (levels[1].total_spin, levels[1].Sz) == (0, 0)


# ---- states and evolution ----------------------------------------------------

def test_initial_state_expectations(ops, ref_params):
    bath = oracle.discretize_bath(ref_params, 2)
    psi = oracle.initial_state(0.7, 0.3, bath)
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-15)
    my = oracle.expectation(oracle.embed_spin(ops.m[1], bath), psi)
    sx = oracle.expectation(oracle.embed_spin(ops.S[0], bath), psi)
    assert my == pytest.approx(-0.2497027, abs=1e-7)
    assert sx == pytest.approx(0.7241379, abs=1e-7)


def test_initial_state_domain():
    with pytest.raises(ValueError):
        oracle.initial_state(0.0, 0.3, oracle.discretize_bath(ModelParams(), 0))


def test_expectation_examples(ops):
    down = np.zeros(4)
    down[3] = 1
    assert oracle.expectation(np.eye(4), down) == 1.0
    assert oracle.expectation(ops.S[2], down) == pytest.approx(-1.0)


def test_expectation_rejects_non_hermitian():
    with pytest.raises(ValueError):
        oracle.expectation(np.array([[0, 1], [0, 0]]), np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        oracle.evolve(np.array([[0, 1], [0, 0]]), np.array([1.0, 0.0]), [0.0, 1.0])


def test_evolve_matches_matrix_exponential():
    p = ModelParams(eta=0.05, omega_c=4.0, h=0.3)
    bath = oracle.discretize_bath(p, 1)
    H = oracle.build_hamiltonian(p, bath)
    psi0 = oracle.initial_state(0.7, 0.3, bath)
    times = [0.0, 0.37, 2.5]
    states = oracle.evolve(H, psi0, times)
    np.testing.assert_array_equal(states[0], psi0)
    for t, psi in zip(times, states):
        np.testing.assert_allclose(psi, expm(-1j * H * t) @ psi0, atol=1e-12)


def test_spin_only_run_keeps_Sz(ref_params):
    res = oracle.simulate(ref_params, 0.7, 0.3, np.linspace(0, 20, 201), n_modes=0)
    np.testing.assert_allclose(res.S[:, 2], res.S[0, 2], atol=1e-12)
    assert not res.truncation_flagged
    assert res.occupations.shape == (201, 0)


@pytest.fixture(scope="module")
def bath_run(ref_params):
    times = np.arange(0, 4001) * 0.05
    return oracle.simulate(ref_params, 0.7, 0.3, times, n_modes=2, n_max=1)


def test_norm_and_energy_conserved(bath_run):
    assert np.max(np.abs(bath_run.norm - 1)) <= 1e-10
    assert np.max(np.abs(bath_run.energy - bath_run.energy[0])) <= 1e-10


def test_initial_values_match_mean_field(bath_run):
    np.testing.assert_allclose(bath_run.S[0], [0.7241379, 0, 0], atol=1e-7)
    np.testing.assert_allclose(bath_run.m[0], [0, -0.2497027, 0], atol=1e-7)


def test_weakly_coupled_bath_stays_in_truncation(bath_run):
    assert bath_run.occupations.shape[1] == 6
    assert np.max(bath_run.occupations) < 0.5
    assert not bath_run.truncation_flagged


def test_transverse_envelope_not_growing(bath_run):
    s_perp = np.hypot(bath_run.S[:, 0], bath_run.S[:, 1])
    blocks = block_envelope(bath_run.t, s_perp, 20)
    assert np.all(blocks[1:] <= blocks[0] + 1e-9)
    assert blocks[-1] < blocks[0]


def test_truncation_flag_triggers():
    res = oracle.OracleResult(t=np.zeros(1), S=np.zeros((1, 3)), m=np.zeros((1, 3)),
                              energy=np.zeros(1), norm=np.ones(1),
                              occupations=np.array([[0.6, 0.1, 0.0]]),
                              bath=oracle.discretize_bath(ModelParams(), 1, n_max=1))
    assert res.truncation_flagged


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_oracle_initial_expectations_agree_with_mean_field(a, b):
    from spinllg.semiclassical import initial_expectations
    res = oracle.simulate(ModelParams(), a, b, [0.0], n_modes=0)
    S, m = initial_expectations(a, b)
    np.testing.assert_allclose(res.S[0], S, atol=1e-13)
    np.testing.assert_allclose(res.m[0], m, atol=1e-13)
