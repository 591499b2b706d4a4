"""Mean-field integration of the damped total-spin and composite-spin equations.

Expectation values are factorized (``<S x dS/dt> -> <S> x d<S>/dt`` and the
same for every other operator product) and the boson part of the effective
field is dropped, so ``B(t) = B0``.  What remains is a 6-dimensional ODE

    dS/dt = B0 x S - 2 mem(t) S x S0 - 2 alpha(t) S x dS/dt
    dm/dt = B0 x m - (J - 2 eta omega_c) m x S - 2 mem(t) m x S0
            - 2 alpha(t) m x dS/dt

with ``mem(t) = eta sin(omega_c t)/t`` and ``alpha(t) = eta Si(omega_c t)``.
The implicit Gilbert term is solved exactly at every evaluation.  Every term
is a cross product with the evolving vector, so ``|S|`` and ``|m|`` are
conserved up to integration error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .backend import kernels
from .core import (ModelParams, Vec3, alpha_of_t, cross, memory_coefficient,
                   solve_damped_rate, vec3)
from .errors import StiffnessError


@dataclass(frozen=True)
class SemiclassicalState:
    t: float
    S: Vec3
    m: Vec3

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.S, self.m])


@dataclass(frozen=True)
class IntegratorConfig:
    """Adaptive Dormand-Prince settings.

    ``dt_max=None`` resolves the memory kernel with a quarter of its period,
    ``0.25 * 2 pi / omega_c``.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    dt_init: float = 1e-4
    dt_max: Optional[float] = None
    t_end: float = 200.0
    sample_interval: float = 0.01

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "dt_init", "dt_max", "t_end", "sample_interval"):
            value = getattr(self, name)
            if value is None and name == "dt_max":
                continue
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value}")
        for name in ("dt_init", "dt_max"):
            value = getattr(self, name)
            if value is not None and value < kernels.DT_MIN:
                raise ValueError(f"{name} must be >= {kernels.DT_MIN:g}, got {value}")
        if self.sample_interval > self.t_end:
            raise ValueError(
                f"sample_interval ({self.sample_interval}) exceeds t_end ({self.t_end})")

    def resolved_dt_max(self, p: ModelParams) -> float:
        if self.dt_max is not None:
            return self.dt_max
        return 0.25 * 2.0 * math.pi / p.omega_c

    def sample_times(self) -> np.ndarray:
        n = int(math.floor(self.t_end / self.sample_interval + 1e-9))
        times = np.arange(n + 1) * self.sample_interval
        if self.t_end - times[-1] > 1e-9 * self.t_end:
            times = np.append(times, self.t_end)
        else:
            times[-1] = min(times[-1], self.t_end)
        return times


@dataclass
class Trajectory:
    """Time-ordered samples of ``<S>`` and ``<m>``."""

    t: np.ndarray
    S: np.ndarray
    m: np.ndarray
    params: Optional[ModelParams] = None
    n_accepted: int = 0
    n_rejected: int = 0
    _alpha: Optional[np.ndarray] = field(default=None, repr=False)

    def __len__(self):
        return len(self.t)

    @property
    def S_norm(self) -> np.ndarray:
        return np.linalg.norm(self.S, axis=1)

    @property
    def m_norm(self) -> np.ndarray:
        return np.linalg.norm(self.m, axis=1)

    @property
    def alpha(self) -> np.ndarray:
        if self._alpha is None:
            if self.params is None:
                self._alpha = np.full(len(self.t), np.nan)
            else:
                self._alpha = np.array([alpha_of_t(t, self.params) for t in self.t])
        return self._alpha

    def state(self, i: int) -> SemiclassicalState:
        return SemiclassicalState(float(self.t[i]), self.S[i].copy(), self.m[i].copy())


def _bloch(a: float) -> Vec3:
    # <sigma>/2 for the normalized spinor (a, 1 - a), real amplitudes
    n2 = a * a + (1.0 - a) ** 2
    return np.array([a * (1.0 - a) / n2, 0.0, 0.5 * (a * a - (1.0 - a) ** 2) / n2])


def initial_expectations(a: float, b: float) -> tuple[Vec3, Vec3]:
    """``<S>`` and ``<m> = <S2 x S1>`` for the product state of two real spinors.

    Spin 1 is ``a|up> + (1-a)|down>``, spin 2 is ``b|up> + (1-b)|down>``, each
    normalized.  On a product state ``<S2 x S1> = <S2> x <S1>`` exactly.
    """
    for name, value in (("a", a), ("b", b)):
        if not (0.0 < value < 1.0):
            raise ValueError(f"{name} must lie strictly inside (0, 1), got {value}")
    s1 = _bloch(a)
    s2 = _bloch(b)
    return s1 + s2, cross(s2, s1)


def rates(state: SemiclassicalState, S0, p: ModelParams) -> tuple[Vec3, Vec3]:
    """Right-hand side of the coupled mean-field equations at ``state``."""
    S, m, t = state.S, state.m, state.t
    B0 = p.B0
    mem2 = 2.0 * memory_coefficient(t, p)
    c = 2.0 * alpha_of_t(t, p)
    r = cross(B0, S) - mem2 * cross(S, S0)
    dS = solve_damped_rate(S, r, c)
    dm = cross(B0, m) - p.m_coupling * cross(m, S) - mem2 * cross(m, S0) - c * cross(m, dS)
    return dS, dm


def effective_field_m(S, p: ModelParams) -> Vec3:
    """Precession axis ``B0 + (J - 2 eta omega_c) S`` of ``m`` once ``S`` is stationary."""
    return p.B0 + p.m_coupling * np.asarray(S, dtype=float)


def _kernel_params(p: ModelParams) -> tuple:
    return (p.J, p.eta, p.omega_c, p.h, 0.0, p.eps)


def step(state: SemiclassicalState, S0, p: ModelParams, config: IntegratorConfig,
         dt: Optional[float] = None):
    """Advance one accepted adaptive step.

    Trial steps are rejected and retried with a smaller ``dt`` until the
    embedded error estimate is within tolerance.  Returns ``(new_state,
    dt_used, error_estimate, dt_next)``.
    """
    dt_max = config.resolved_dt_max(p)
    dt = min(config.dt_init if dt is None else dt, dt_max)
    y = tuple(state.as_array())
    S0 = tuple(float(v) for v in S0)
    kp = _kernel_params(p)
    k1 = kernels.rates(state.t, y, S0, kp)
    while True:
        y_new, _, err = kernels.attempt(state.t, y, k1, dt, S0, kp,
                                        config.rel_tol, config.abs_tol)
        if err <= 1.0:
            new = SemiclassicalState(state.t + dt, np.array(y_new[:3]), np.array(y_new[3:]))
            return new, dt, err, min(kernels.next_dt(dt, err), dt_max)
        dt = kernels.next_dt(dt, err)
        if dt < kernels.DT_MIN:
            raise StiffnessError(f"step size underflow ({dt:.3e}) at t={state.t}")


def integrate(a: float, b: float, p: ModelParams,
              config: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Integrate from the product state ``(a, b)`` and sample every ``sample_interval``."""
    S0, m0 = initial_expectations(a, b)
    return integrate_from(S0, m0, p, config)


def integrate_from(S0, m0, p: ModelParams,
                   config: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    S0 = vec3(S0)
    m0 = vec3(m0)
    times = config.sample_times()
    out, n_acc, n_rej, status, t_fail = kernels.integrate(
        np.concatenate([S0, m0]), S0, _kernel_params(p), config.rel_tol, config.abs_tol,
        config.dt_init, config.resolved_dt_max(p), times)
    if status != kernels.OK:
        raise StiffnessError(f"step size underflow at t={t_fail:.6g}")
    return Trajectory(t=times, S=out[:, :3].copy(), m=out[:, 3:].copy(), params=p,
                      n_accepted=int(n_acc), n_rejected=int(n_rej))
