"""Model parameters and the special functions of the damping kernel.

Conventions: hbar = 1, energies in units of the Heisenberg coupling J (J = 1
is the baseline), times in inverse energy units.  A ``Vec3`` is a float numpy
array of shape ``(3,)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Vec3 = np.ndarray

# Si(x) branch point between the power series and the auxiliary functions.
_SI_SERIES_MAX = 4.0
_CF_EPS = 1e-16
_CF_MAXITER = 200


def vec3(x, y=None, z=None) -> Vec3:
    """Build a finite 3-vector from three scalars or one length-3 sequence."""
    if y is None and z is None:
        v = np.array(x, dtype=float).reshape(-1)
    else:
        v = np.array([x, y, z], dtype=float)
    if v.shape != (3,):
        raise ValueError(f"Vec3 needs exactly 3 components, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"Vec3 components must be finite, got {v}")
    return v


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of one two-qubit spin-boson run.

    ``J`` Heisenberg coupling, ``eta`` Ohmic coefficient, ``omega_c`` bath
    cutoff, ``h`` transverse field and ``eps`` qubit splitting.  The static
    field is ``B0 = (h, 0, eps)``.
    """

    J: float = 1.0
    eta: float = 0.008
    omega_c: float = 200.0
    h: float = 0.0
    eps: float = 2.0

    def __post_init__(self):
        for name in ("J", "eta", "omega_c", "h", "eps"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        if self.J < 0:
            raise ValueError(f"J must be >= 0, got {self.J}")
        if self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if self.omega_c <= 0:
            raise ValueError(f"omega_c must be > 0, got {self.omega_c}")

    @property
    def B0(self) -> Vec3:
        return np.array([self.h, 0.0, self.eps])

    @property
    def m_coupling(self) -> float:
        """Coefficient ``J - 2*eta*omega_c`` of the composite-spin exchange term."""
        return self.J - 2.0 * self.eta * self.omega_c


def cross(u, v) -> Vec3:
    """Right-handed cross product of two 3-vectors."""
    return np.array([
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ], dtype=float)


def _si_series(x: float) -> float:
    # sum_k (-1)^k x^(2k+1) / ((2k+1) (2k+1)!)
    x2 = x * x
    term = x
    total = x
    k = 0
    while True:
        k += 1
        term *= -x2 / ((2 * k) * (2 * k + 1))
        contrib = term / (2 * k + 1)
        total += contrib
        if abs(contrib) <= 1e-17 * abs(total):
            return total


def _si_auxiliary(x: float) -> float:
    """Si(x) for x > 4 through the auxiliary functions f and g.

    ``e^{ix} E1(ix) = f(x) - i g(x)`` is evaluated with the continued fraction
    ``1/(z+1- 1/(z+3- 4/(z+5- ...)))``, z = ix (modified Lentz), and
    ``Si(x) = pi/2 + Im E1(ix)``.
    """
    b = complex(1.0, x)
    c = 1.0 / 1e-300
    d = 1.0 / b
    h = d
    for i in range(1, _CF_MAXITER):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta.real - 1.0) + abs(delta.imag) < _CF_EPS:
            break
    else:
        raise ArithmeticError(f"sine integral continued fraction did not converge at x={x}")
    # E1(ix) = -Ci(x) + i (Si(x) - pi/2)
    e1 = h * complex(math.cos(x), -math.sin(x))
    return math.pi / 2 + e1.imag


def sine_integral(x: float) -> float:
    """Si(x) = integral_0^x sin(t)/t dt for x >= 0, absolute error below 1e-10."""
    if x < 0 or math.isnan(x):
        raise ValueError(f"sine_integral is defined here for x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.pi / 2
    if x <= _SI_SERIES_MAX:
        return _si_series(x)
    return _si_auxiliary(x)


def alpha_of_t(t: float, p: ModelParams) -> float:
    """Time-dependent Gilbert coefficient eta * Si(omega_c t); tends to pi*eta/2."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return p.eta * sine_integral(p.omega_c * t)


def memory_coefficient(t: float, p: ModelParams) -> float:
    """Initial-state memory kernel eta * sin(omega_c t) / t, equal to eta*omega_c at t = 0."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0.0:
        return p.eta * p.omega_c
    return p.eta * math.sin(p.omega_c * t) / t


def solve_damped_rate(S, r, c: float) -> Vec3:
    """Solve ``x + c * (S x x) = r`` for x.

    The system matrix ``I + c [S]_x`` has determinant ``1 + c^2 |S|^2 >= 1``
    so the closed-form inverse always exists.
    """
    S = np.asarray(S, dtype=float)
    r = np.asarray(r, dtype=float)
    Sxr = cross(S, r)
    denom = 1.0 + c * c * float(S @ S)
    return (r - c * Sxr + (c * c * float(S @ r)) * S) / denom
