"""Exact dense-matrix dynamics of two spins coupled to a truncated Ohmic bath.

Hilbert space layout: ``spin1 (x) spin2 (x) bath``, spin basis ``|up>, |down>``
with ``|up>`` the +1/2 eigenstate of ``S^z``.  Each bath mode ``j`` carries
three oscillators, one per spin component ``alpha``, ordered ``(j, alpha)``
with ``alpha`` fastest.  The Hamiltonian is

    H = sum_{j,alpha} w_j n_{j,alpha} + B0 . S + J S1 . S2
        + sum_{j,alpha} nu_j (b_{j,alpha} + b_{j,alpha}^dag) S^alpha

with real couplings ``nu_j^2 = eta w_j dw`` from midpoint sampling of the
Ohmic density ``eta * w`` on ``(0, omega_c]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .core import ModelParams
from .errors import NumericalError, SizeError

DEFAULT_MAX_DIM = 4096

_SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
_SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
_I2 = np.eye(2, dtype=complex)


def _levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for i, j, k in itertools.permutations(range(3)):
        eps[i, j, k] = np.linalg.det(np.eye(3)[[i, j, k]])
    return eps


LEVI_CIVITA = _levi_civita()


def op_cross(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Operator cross product ``(A x B)^a = eps_abc A^b B^c`` (order kept)."""
    return np.einsum("abc,bij,cjk->aik", LEVI_CIVITA, A, B)


def op_dot(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.einsum("aij,ajk->ik", A, B)


@dataclass(frozen=True)
class SpinOperators:
    """Vector operators on the 4-dimensional two-spin space, each shaped ``(3, 4, 4)``."""

    S1: np.ndarray
    S2: np.ndarray
    S: np.ndarray
    m: np.ndarray


def build_spin_operators() -> SpinOperators:
    single = (_SX, _SY, _SZ)
    S1 = np.array([np.kron(s, _I2) for s in single])
    S2 = np.array([np.kron(_I2, s) for s in single])
    return SpinOperators(S1=S1, S2=S2, S=S1 + S2, m=op_cross(S2, S1))


@dataclass(frozen=True)
class BathDiscretization:
    n_modes: int
    n_max: int
    frequencies: np.ndarray
    couplings: np.ndarray

    @property
    def n_oscillators(self) -> int:
        return 3 * self.n_modes

    @property
    def dim(self) -> int:
        return (self.n_max + 1) ** self.n_oscillators

    @property
    def hilbert_dim(self) -> int:
        return 4 * self.dim


def discretize_bath(p: ModelParams, n_modes: int, n_max: int = 1) -> BathDiscretization:
    """Midpoint sampling of the Ohmic spectral density on ``(0, omega_c]``.

    ``sum_j nu_j^2 = eta omega_c^2 / 2`` holds exactly for every ``n_modes``.
    """
    if n_modes < 0 or n_max < 0:
        raise ValueError(f"n_modes and n_max must be >= 0, got {n_modes}, {n_max}")
    if n_modes == 0:
        return BathDiscretization(0, n_max, np.empty(0), np.empty(0))
    dw = p.omega_c / n_modes
    w = (np.arange(1, n_modes + 1) - 0.5) * dw
    return BathDiscretization(n_modes, n_max, w, np.sqrt(p.eta * w * dw))


def _ladder(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1).astype(complex)


def bath_annihilators(bath: BathDiscretization) -> list[np.ndarray]:
    """``b_{j,alpha}`` on the bath factor alone, in ``(j, alpha)`` order."""
    d = bath.n_max + 1
    a = _ladder(bath.n_max)
    eye = np.eye(d, dtype=complex)
    ops = []
    for q in range(bath.n_oscillators):
        factors = [eye] * bath.n_oscillators
        factors[q] = a
        ops.append(reduce(np.kron, factors, np.eye(1, dtype=complex)))
    return ops


def embed_spin(op4: np.ndarray, bath: BathDiscretization) -> np.ndarray:
    """Lift a two-spin operator (or stack of them) to the full space."""
    eye = np.eye(bath.dim, dtype=complex)
    if op4.ndim == 3:
        return np.array([np.kron(o, eye) for o in op4])
    return np.kron(op4, eye)


def embed_bath(opb: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(4, dtype=complex), opb)


def _check_dim(bath: BathDiscretization, max_dim: int):
    if bath.hilbert_dim > max_dim:
        raise SizeError(f"Hilbert dimension {bath.hilbert_dim} exceeds cap {max_dim}")


def build_hamiltonian(p: ModelParams, bath: BathDiscretization,
                      max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    _check_dim(bath, max_dim)
    ops = build_spin_operators()
    H_spin = np.einsum("a,aij->ij", p.B0.astype(complex), ops.S) + p.J * op_dot(ops.S1, ops.S2)
    H = embed_spin(H_spin, bath)
    if bath.n_modes:
        b_ops = bath_annihilators(bath)
        Hb = np.zeros((bath.dim, bath.dim), dtype=complex)
        for q, b in enumerate(b_ops):
            j, alpha = divmod(q, 3)
            Hb += bath.frequencies[j] * (b.conj().T @ b)
            x = bath.couplings[j] * (b + b.conj().T)
            H += np.kron(ops.S[alpha], x)
        H += embed_bath(Hb)
    return H


def _spinor(a: float) -> np.ndarray:
    v = np.array([a, 1.0 - a], dtype=complex)
    return v / np.linalg.norm(v)


def initial_state(a: float, b: float, bath: BathDiscretization) -> np.ndarray:
    """Normalized product of the two spinors and the bath vacuum."""
    for name, value in (("a", a), ("b", b)):
        if not (0.0 < value < 1.0):
            raise ValueError(f"{name} must lie strictly inside (0, 1), got {value}")
    vac = np.zeros(bath.dim, dtype=complex)
    vac[0] = 1.0
    psi = np.kron(np.kron(_spinor(a), _spinor(b)), vac)
    return psi / np.linalg.norm(psi)


def _hermitian_residual(op: np.ndarray) -> float:
    return float(np.max(np.abs(op - op.conj().T))) if op.size else 0.0


def evolve(H: np.ndarray, psi0: np.ndarray, times) -> np.ndarray:
    """States ``exp(-iHt) psi0`` for every ``t`` in ``times``, shape ``(len(times), D)``."""
    if _hermitian_residual(H) > 1e-12 * max(1.0, float(np.max(np.abs(H)))):
        raise ValueError("evolve needs a Hermitian Hamiltonian")
    try:
        energies, vecs = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    times = np.asarray(times, dtype=float)
    coeffs = vecs.conj().T @ psi0
    phases = np.exp(-1j * np.outer(times, energies))
    states = (phases * coeffs) @ vecs.T
    # exact at t = 0 rather than round-tripped through the eigenbasis
    states[times == 0.0] = psi0
    return states


def expectation(op: np.ndarray, psi: np.ndarray) -> float:
    if _hermitian_residual(op) > 1e-12:
        raise ValueError("expectation needs a Hermitian operator")
    val = np.vdot(psi, op @ psi)
    if abs(val.imag) > 1e-10:
        raise ArithmeticError(f"imaginary residue {val.imag:.3e} in expectation value")
    return float(val.real)


def expectation_series(op: np.ndarray, states: np.ndarray) -> np.ndarray:
    """``<psi_t|op|psi_t>`` for each row of ``states``."""
    vals = np.einsum("ti,ti->t", states.conj(), states @ op.T)
    if np.max(np.abs(vals.imag), initial=0.0) > 1e-10:
        raise ArithmeticError("imaginary residue above 1e-10 in expectation values")
    return vals.real


@dataclass(frozen=True)
class Level:
    energy: float
    total_spin: int
    Sz: int


def h0_spectrum(J: float, eps: float) -> list[Level]:
    """Closed-form levels of ``J S1.S2 + eps S^z``, ascending in energy."""
    levels = [Level(-0.75 * J, 0, 0)]
    levels += [Level(0.25 * J + eps * sz, 1, sz) for sz in (-1, 0, 1)]
    return sorted(levels, key=lambda lv: (lv.energy, lv.total_spin, lv.Sz))


@dataclass
class IdentityCheck:
    name: str
    residual: float
    passed: bool


@dataclass
class IdentityReport:
    tolerance: float
    checks: list[IdentityCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def format(self) -> str:
        lines = [f"tolerance {self.tolerance:.3e}"]
        for c in self.checks:
            lines.append(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  residual={c.residual:.3e}")
        return "\n".join(lines) + "\n"


def verify_identities(tolerance: float = 1e-12) -> IdentityReport:
    """Check the operator identities behind the equations of motion on 4x4 matrices."""
    ops = build_spin_operators()
    exchange = op_dot(ops.S1, ops.S2)
    eye = np.eye(4)

    def comm(a, b):
        return a @ b - b @ a

    residuals = {
        "[S^a, S1.S2] = 0": max(np.max(np.abs(comm(ops.S[a], exchange))) for a in range(3)),
        "m x S - S x m = S1 - S2": np.max(np.abs(
            op_cross(ops.m, ops.S) - op_cross(ops.S, ops.m) - (ops.S1 - ops.S2))),
        "m.m = 3/4 - S.S/4": np.max(np.abs(
            op_dot(ops.m, ops.m) - (0.75 * eye - op_dot(ops.S, ops.S) / 4))),
        "S2 x S1 = eps_abc S1^c S2^b": np.max(np.abs(
            ops.m - np.einsum("abc,cij,bjk->aik", LEVI_CIVITA, ops.S1, ops.S2))),
    }
    report = IdentityReport(tolerance)
    for name, res in residuals.items():
        report.checks.append(IdentityCheck(name, float(res), bool(res <= tolerance)))
    return report


@dataclass
class OracleResult:
    t: np.ndarray
    S: np.ndarray
    m: np.ndarray
    energy: np.ndarray
    norm: np.ndarray
    occupations: np.ndarray
    bath: BathDiscretization

    @property
    def truncation_flagged(self) -> bool:
        """True if any oscillator's mean occupation exceeded half the cutoff."""
        if self.occupations.size == 0:
            return False
        return bool(np.max(self.occupations) > 0.5 * self.bath.n_max)


def simulate(p: ModelParams, a: float, b: float, times, n_modes: int = 2, n_max: int = 1,
             max_dim: int = DEFAULT_MAX_DIM) -> OracleResult:
    """Exact evolution from the product state, recording spin and bath observables."""
    bath = discretize_bath(p, n_modes, n_max)
    H = build_hamiltonian(p, bath, max_dim)
    psi0 = initial_state(a, b, bath)
    times = np.asarray(times, dtype=float)
    states = evolve(H, psi0, times)
    ops = build_spin_operators()
    S = np.column_stack([expectation_series(o, states) for o in embed_spin(ops.S, bath)])
    m = np.column_stack([expectation_series(o, states) for o in embed_spin(ops.m, bath)])
    occ = [expectation_series(embed_bath(b.conj().T @ b), states)
           for b in bath_annihilators(bath)]
    occupations = np.column_stack(occ) if occ else np.empty((len(times), 0))
    return OracleResult(
        t=times, S=S, m=m,
        energy=expectation_series(H, states),
        norm=np.linalg.norm(states, axis=1),
        occupations=occupations, bath=bath)
