import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinllg import semiclassical as sc
from spinllg.core import ModelParams, alpha_of_t, cross
from spinllg.errors import StiffnessError
from spinllg.semiclassical import IntegratorConfig, SemiclassicalState

from .conftest import two_spin_ops


def brute_force_expectations(a, b):
    """Expectations of S and m = S2 x S1 from explicit 4x4 matrices."""
    S1, S2 = two_spin_ops()
    u = np.array([a, 1 - a]) / math.hypot(a, 1 - a)
    v = np.array([b, 1 - b]) / math.hypot(b, 1 - b)
    psi = np.kron(u, v)
    m = [S2[1] @ S1[2] - S2[2] @ S1[1],
         S2[2] @ S1[0] - S2[0] @ S1[2],
         S2[0] @ S1[1] - S2[1] @ S1[0]]
    S = np.array([np.real(psi.conj() @ (S1[i] + S2[i]) @ psi) for i in range(3)])
    mm = np.array([np.real(psi.conj() @ m[i] @ psi) for i in range(3)])
    return S, mm


# ---- initial expectations ----------------------------------------------------

def test_initial_expectations_reference_values():
    S, m = sc.initial_expectations(0.7, 0.3)
    np.testing.assert_allclose(S, [0.72, 0, 0], atol=5e-3)
    np.testing.assert_allclose(m, [0, -0.25, 0], atol=5e-3)
    np.testing.assert_allclose(S, [0.7241379, 0, 0], atol=1e-7)
    np.testing.assert_allclose(m, [0, -0.2497027, 0], atol=1e-7)


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_initial_expectations_match_brute_force(a, b):
    S, m = sc.initial_expectations(a, b)
    S_bf, m_bf = brute_force_expectations(a, b)
    np.testing.assert_allclose(S, S_bf, atol=1e-12)
    np.testing.assert_allclose(m, m_bf, atol=1e-12)
    assert S[1] == 0.0 and m[0] == 0.0 and m[2] == 0.0


def test_initial_expectations_parallel_spins():
    S, m = sc.initial_expectations(0.5, 0.5)
    np.testing.assert_allclose(S, [1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(m, [0, 0, 0], atol=1e-15)


@pytest.mark.parametrize("a,b", [(0.0, 0.3), (1.0, 0.3), (0.7, 1.2), (0.7, -0.1)])
def test_initial_expectations_domain(a, b):
    with pytest.raises(ValueError):
        sc.initial_expectations(a, b)


# ---- rates -------------------------------------------------------------------

STATE = SemiclassicalState(0.37, np.array([0.5, -0.2, 0.4]), np.array([0.1, 0.15, -0.05]))
S0 = np.array([0.7, 0.0, 0.1])


def test_rates_without_damping():
    p = ModelParams(eta=0.0, h=0.4)
    dS, dm = sc.rates(STATE, S0, p)
    np.testing.assert_allclose(dS, cross(p.B0, STATE.S), atol=1e-15)
    np.testing.assert_allclose(dm, cross(p.B0, STATE.m) - p.J * cross(STATE.m, STATE.S),
                               atol=1e-15)


def test_memory_term_vanishes_at_start(ref_params):
    S, m = sc.initial_expectations(0.7, 0.3)
    state = SemiclassicalState(0.0, S, m)
    dS, _ = sc.rates(state, S, ref_params)
    # alpha(0) = 0 and S x S0 = 0, so only precession survives
    np.testing.assert_allclose(dS, cross(ref_params.B0, S), atol=1e-16)


def test_decoupling_point_removes_exchange_term():
    p = ModelParams(J=1.0, omega_c=200.0, eta=1.0 / 400)
    assert p.m_coupling == 0.0
    p_other = ModelParams(J=3.0, omega_c=200.0, eta=1.0 / 400)
    _, dm = sc.rates(STATE, S0, p)
    _, dm_other = sc.rates(STATE, S0, p_other)
    np.testing.assert_allclose(dm_other - dm, -2.0 * cross(STATE.m, STATE.S), atol=1e-15)


comp = st.floats(-1, 1, allow_nan=False)
vec = st.tuples(comp, comp, comp).map(np.array)


@settings(max_examples=200)
@given(st.floats(0, 50), vec, vec, vec, st.floats(0, 0.05))
def test_rates_are_orthogonal_and_solve_implicit_term(t, S, m, s0, eta):
    p = ModelParams(eta=eta, h=0.3)
    state = SemiclassicalState(t, S, m)
    dS, dm = sc.rates(state, s0, p)
    assert abs(dS @ S) <= 1e-12 * np.linalg.norm(dS) * np.linalg.norm(S) + 1e-300
    assert abs(dm @ m) <= 1e-12 * np.linalg.norm(dm) * np.linalg.norm(m) + 1e-300
    c = 2 * alpha_of_t(t, p)
    from spinllg.core import memory_coefficient
    r = cross(p.B0, S) - 2 * memory_coefficient(t, p) * cross(S, s0)
    np.testing.assert_allclose(dS + c * cross(S, dS), r, rtol=1e-12,
                               atol=1e-12 * np.linalg.norm(r) + 1e-300)


def test_stationary_states_are_field_aligned(ref_params):
    for sign in (1.0, -1.0):
        S = np.array([0.0, 0.0, sign * 0.7241])
        state = SemiclassicalState(150.0, S, np.array([0.2, 0.1, 0.0]))
        # memory term ~ eta/t is O(1e-5) at t=150 and vanishes for S || S0
        dS, _ = sc.rates(state, S, ref_params)
        assert np.linalg.norm(dS) <= 1e-10


# ---- effective field ---------------------------------------------------------

def test_effective_field_at_decoupling_is_bare_field():
    p = ModelParams(J=1.0, omega_c=200.0, eta=1 / 400)
    np.testing.assert_array_equal(sc.effective_field_m([0.3, 0.4, -0.5], p), p.B0)


def test_effective_field_reference_stationary(ref_params):
    B = sc.effective_field_m([0, 0, -0.7241], ref_params)
    np.testing.assert_allclose(B, [0, 0, 3.59302], atol=1e-5)
    assert 2 * math.pi / np.linalg.norm(B) == pytest.approx(1.7487, abs=1e-3)


def test_effective_field_zero_spin(ref_params):
    np.testing.assert_array_equal(sc.effective_field_m([0, 0, 0], ref_params), ref_params.B0)


def test_m_precesses_about_effective_field_when_S_stationary(ref_params):
    S = np.array([0, 0, -0.7241])
    m = np.array([0.2, 0.05, 0.01])
    t = 1e4
    dS, dm = sc.rates(SemiclassicalState(t, S, m), S, ref_params)
    np.testing.assert_array_equal(dS, [0, 0, 0])
    # residual memory kernel ~ eta/t still couples m to S0 = S
    from spinllg.core import memory_coefficient
    mem = -2 * memory_coefficient(t, ref_params) * cross(m, S)
    expected = cross(sc.effective_field_m(S, ref_params), m) + mem
    np.testing.assert_allclose(dm, expected, atol=1e-14)


# ---- step --------------------------------------------------------------------

def test_step_pure_precession_keeps_length():
    p = ModelParams(eta=0.0)
    S, m = sc.initial_expectations(0.7, 0.3)
    cfg = IntegratorConfig()
    state = SemiclassicalState(0.0, S, m)
    tol = max(cfg.abs_tol, cfg.rel_tol * np.linalg.norm(S))
    for _ in range(20):
        new, dt, err, dt_next = sc.step(state, S, p, cfg, dt=0.05)
        assert err <= 1.0 and dt > 0
        assert abs(np.linalg.norm(new.S) - np.linalg.norm(state.S)) <= 10 * tol
        state = new


def test_step_damped_accepted_steps_keep_length(ref_params):
    S, m = sc.initial_expectations(0.7, 0.3)
    cfg = IntegratorConfig()
    state = SemiclassicalState(0.0, S, m)
    dt = None
    tol = cfg.rel_tol * np.linalg.norm(S)
    for _ in range(200):
        new, used, err, dt = sc.step(state, S, ref_params, cfg, dt=dt)
        assert used <= cfg.resolved_dt_max(ref_params)
        assert abs(np.linalg.norm(new.S) - np.linalg.norm(state.S)) <= 10 * tol
        state = new
    assert state.t > 0


def test_step_underflow_raises(monkeypatch, ref_params):
    monkeypatch.setattr(sc.kernels, "attempt",
                        lambda t, y, k1, dt, *a: (y, k1, 1e30))
    S, m = sc.initial_expectations(0.7, 0.3)
    with pytest.raises(StiffnessError):
        sc.step(SemiclassicalState(0.0, S, m), S, ref_params, IntegratorConfig())


def test_integrate_stiffness_error(monkeypatch, ref_params):
    cfg = IntegratorConfig(rel_tol=1e-30, abs_tol=1e-40, t_end=1.0, sample_interval=0.5)
    with pytest.raises(StiffnessError):
        sc.integrate(0.7, 0.3, ref_params, cfg)


# ---- integrator config -------------------------------------------------------

def test_config_defaults_and_dt_max(ref_params):
    cfg = IntegratorConfig()
    assert (cfg.rel_tol, cfg.abs_tol, cfg.sample_interval, cfg.t_end) == (1e-10, 1e-12, 0.01, 200)
    assert cfg.resolved_dt_max(ref_params) == pytest.approx(0.25 * 2 * math.pi / 200)
    assert IntegratorConfig(dt_max=0.1).resolved_dt_max(ref_params) == 0.1


@pytest.mark.parametrize("kwargs", [dict(rel_tol=0.0), dict(t_end=-1.0),
                                    dict(sample_interval=300.0), dict(dt_max=1e-14),
                                    dict(abs_tol=float("nan"))])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        IntegratorConfig(**kwargs)


def test_sample_times_cover_end():
    ts = IntegratorConfig(t_end=1.0, sample_interval=0.3).sample_times()
    np.testing.assert_allclose(ts, [0, 0.3, 0.6, 0.9, 1.0])
    ts = IntegratorConfig(t_end=200.0, sample_interval=0.01).sample_times()
    assert len(ts) == 20001 and ts[0] == 0.0 and ts[-1] == 200.0
    assert np.all(np.diff(ts) > 0)


# ---- integrate ---------------------------------------------------------------

def test_trajectory_shape_and_first_sample(ref_traj):
    S, m = sc.initial_expectations(0.7, 0.3)
    assert ref_traj.t[0] == 0.0
    np.testing.assert_array_equal(ref_traj.S[0], S)
    np.testing.assert_array_equal(ref_traj.m[0], m)
    assert np.all(np.diff(ref_traj.t) > 0)
    np.testing.assert_allclose(np.diff(ref_traj.t), 0.01, atol=1e-9)
    assert ref_traj.t[-1] == 200.0


def test_norms_conserved(ref_traj):
    assert np.max(np.abs(ref_traj.S_norm - ref_traj.S_norm[0])) <= 1e-6
    assert np.max(np.abs(ref_traj.m_norm - ref_traj.m_norm[0])) <= 1e-6


def test_alpha_column(ref_traj):
    assert ref_traj.alpha[0] == 0.0
    assert ref_traj.alpha[-1] == pytest.approx(math.pi * 0.008 / 2, abs=1e-6)


def test_relaxes_antiparallel_to_field(ref_traj):
    S_end = ref_traj.S[-1]
    np.testing.assert_allclose(S_end, [0, 0, -0.7241379], atol=2e-3)


def test_deterministic(ref_params):
    cfg = IntegratorConfig(t_end=20.0)
    a = sc.integrate(0.7, 0.3, ref_params, cfg)
    b = sc.integrate(0.7, 0.3, ref_params, cfg)
    assert np.array_equal(a.S, b.S) and np.array_equal(a.m, b.m)
    assert a.n_accepted == b.n_accepted


def rotation_about_z(S0, omega, t):
    c, s = np.cos(omega * t), np.sin(omega * t)
    return np.column_stack([c * S0[0] - s * S0[1], s * S0[0] + c * S0[1],
                            np.full_like(t, S0[2])])


def test_undamped_run_is_rigid_precession():
    p = ModelParams(eta=0.0)
    traj = sc.integrate(0.7, 0.3, p, IntegratorConfig(t_end=50.0))
    exact = rotation_about_z(traj.S[0], 2.0, traj.t)
    assert np.max(np.abs(traj.S - exact)) <= 1e-8


def test_integrate_from_arbitrary_state(ref_params):
    traj = sc.integrate_from([0, 0.5, 0], [0.1, 0, 0], ref_params,
                             IntegratorConfig(t_end=1.0, sample_interval=0.1))
    assert len(traj) == 11
    with pytest.raises(ValueError):
        sc.integrate_from([0, np.nan, 0], [0.1, 0, 0], ref_params)
