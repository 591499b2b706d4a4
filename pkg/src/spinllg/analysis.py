"""Relaxation and oscillation metrics extracted from trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Vec3
from .errors import DegenerateInputError, PreconditionError, WindowError
from .semiclassical import Trajectory

# envelope fit range, as e-folds below the initial transverse amplitude
FIT_UPPER_EFOLDS = 1.0
FIT_LOWER_EFOLDS = 6.0
MIN_DECAY_EFOLDS = 2.0
# a window counts as stationary once the misalignment of S with the field
# has dropped by this many e-folds from its largest earlier value
STATIONARY_EFOLDS = 5.0


@dataclass
class RelaxationFit:
    T1: float
    S_stationary: Vec3
    residual: float
    window: tuple[float, float]


@dataclass
class OscillationMetrics:
    frequency: float
    phase_xy: float
    persistence_ratio: float


def _field_axis(traj: Trajectory) -> np.ndarray:
    if traj.params is not None:
        B0 = traj.params.B0
        n = np.linalg.norm(B0)
        if n > 0:
            return B0 / n
    return np.array([0.0, 0.0, 1.0])


def transverse_amplitude(traj: Trajectory) -> np.ndarray:
    """Length of the component of S perpendicular to the static field."""
    axis = _field_axis(traj)
    along = traj.S @ axis
    perp = traj.S - np.outer(along, axis)
    return np.linalg.norm(perp, axis=1)


def upper_envelope(t: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Samples that are not exceeded by any later sample.

    For a decaying oscillation these are the successive maxima; for a signal
    that already decays monotonically every sample is kept.
    """
    suffix_max = np.maximum.accumulate(x[::-1])[::-1]
    keep = x >= suffix_max
    return t[keep], x[keep]


def fit_T1(traj: Trajectory) -> RelaxationFit:
    """E-folding time of the decay of S's transverse envelope.

    Log-linear least squares over the part of the envelope between
    ``e^-1`` and ``e^-6`` of its initial value.
    """
    s_perp = transverse_amplitude(traj)
    t_env, env = upper_envelope(traj.t, s_perp)
    peak = env[0]
    if peak <= 0 or env[-1] > peak * math.exp(-MIN_DECAY_EFOLDS):
        raise WindowError(
            f"transverse amplitude decays by less than e^{MIN_DECAY_EFOLDS:g} "
            f"over t <= {traj.t[-1]:g}")
    hi = peak * math.exp(-FIT_UPPER_EFOLDS)
    lo = peak * math.exp(-FIT_LOWER_EFOLDS)
    sel = (env <= hi) & (env >= lo)
    if np.count_nonzero(sel) < 3:
        raise WindowError("fewer than 3 envelope points in the fit range")
    tt, yy = t_env[sel], np.log(env[sel])
    slope, intercept = np.polyfit(tt, yy, 1)
    if slope >= 0:
        raise WindowError("envelope does not decay inside the fit range")
    resid = yy - (slope * tt + intercept)
    n_tail = max(1, int(math.ceil(0.1 * len(traj.t))))
    return RelaxationFit(
        T1=-1.0 / slope,
        S_stationary=traj.S[-n_tail:].mean(axis=0),
        residual=float(np.sqrt(np.mean(resid ** 2))),
        window=(float(tt[0]), float(tt[-1])),
    )


def t1_formula(eta: float, eps: float, S_norm: float) -> float:
    """Closed-form relaxation scale ``(1 + pi^2 eta^2 S^2) / (2 pi eta |eps| S)``."""
    if eta <= 0 or eps == 0 or S_norm <= 0:
        raise ValueError(f"need eta > 0, eps != 0, S_norm > 0; got {eta}, {eps}, {S_norm}")
    return (1.0 + (math.pi * eta * S_norm) ** 2) / (2.0 * math.pi * eta * abs(eps) * S_norm)


def _misalignment(traj: Trajectory) -> np.ndarray:
    axis = _field_axis(traj)
    norms = traj.S_norm
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = np.abs(traj.S @ axis) / norms
    return np.where(norms > 0, 1.0 - cos, 0.0)


def is_stationary(traj: Trajectory, t: float) -> bool:
    """Whether S has relaxed onto the field axis by time ``t``."""
    if traj.params is None or not np.any(traj.params.B0):
        return True
    mis = _misalignment(traj)
    upto = traj.t <= t
    if not np.any(upto):
        return False
    worst = mis[upto].max()
    current = mis[upto][-1]
    return bool(current <= worst * math.exp(-STATIONARY_EFOLDS))


def _dominant_frequency(t: np.ndarray, x: np.ndarray, pad: int = 8) -> tuple[float, float]:
    n = len(x)
    dt = t[1] - t[0]
    w = np.hanning(n)
    nfft = pad * (1 << int(math.ceil(math.log2(n))))
    power = np.abs(np.fft.rfft(x * w, nfft)) ** 2
    power[0] = 0.0
    k = int(np.argmax(power))
    floor = float(np.median(power[1:]))
    if power[k] <= 0 or power[k] < 100.0 * floor:
        raise DegenerateInputError("no spectral peak above the noise floor")
    delta = 0.0
    if 0 < k < len(power) - 1:
        # parabolic interpolation on log power
        ym, y0, yp = np.log(power[k - 1:k + 2] + 1e-300)
        den = ym - 2 * y0 + yp
        if den != 0:
            delta = 0.5 * (ym - yp) / den
    freq = 2.0 * math.pi * (k + delta) / (nfft * dt)
    return freq, float(power[k])


def oscillation_metrics(traj: Trajectory, window: tuple[float, float]) -> OscillationMetrics:
    """Frequency, x-y phase and amplitude persistence of ``m`` inside ``window``.

    The phase is that of the complex amplitude of ``m^x`` relative to ``m^y`` at
    the dominant frequency, wrapped to ``(-pi, pi]``: ``+pi/2`` means ``m^x``
    leads, as for counter-clockwise precession about +z.
    """
    t_lo, t_hi = window
    if not (t_lo < t_hi) or t_lo < traj.t[0] or t_hi > traj.t[-1] + 1e-9:
        raise PreconditionError(f"window {window} outside trajectory [{traj.t[0]}, {traj.t[-1]}]")
    if not is_stationary(traj, t_lo):
        raise PreconditionError(f"S is not yet stationary at t={t_lo:g}")
    sel = (traj.t >= t_lo - 1e-9) & (traj.t <= t_hi + 1e-9)
    t = traj.t[sel]
    if len(t) < 16:
        raise PreconditionError("fewer than 16 samples inside the window")
    steps = np.diff(t)
    if np.max(np.abs(steps - steps[0])) > 1e-6 * steps[0]:
        raise PreconditionError("window is not uniformly sampled")
    mx = traj.m[sel, 0]
    my = traj.m[sel, 1]
    x = mx - mx.mean()
    y = my - my.mean()
    scale = max(np.max(np.abs(mx)), np.max(np.abs(my)), np.finfo(float).tiny)
    if np.max(np.abs(x)) <= 1e-12 * scale:
        raise DegenerateInputError("m^x is constant inside the window")
    freq, _ = _dominant_frequency(t, x)
    w = np.hanning(len(t))
    phasor = np.exp(-1j * freq * (t - t[0]))
    ax = np.sum(w * x * phasor)
    ay = np.sum(w * y * phasor)
    if abs(ay) == 0:
        raise DegenerateInputError("m^y has no component at the dominant frequency")
    phase = float(np.angle(ax / ay))
    if phase <= -math.pi:
        phase += 2 * math.pi
    half = len(mx) // 2
    rms_early = math.sqrt(np.mean(mx[:half] ** 2))
    rms_late = math.sqrt(np.mean(mx[half:] ** 2))
    if rms_early == 0:
        raise DegenerateInputError("m^x vanishes in the first half of the window")
    return OscillationMetrics(freq, phase, rms_late / rms_early)


def classify_ground_state(J: float, eps: float) -> str:
    """``singlet``, ``triplet_Szm1`` or ``degenerate`` from the two lowest closed-form levels."""
    if J <= 0:
        raise ValueError(f"J must be > 0, got {J}")
    diff = (0.25 * J - eps) - (-0.75 * J)
    if abs(diff) <= 1e-12 * J:
        return "degenerate"
    return "triplet_Szm1" if diff < 0 else "singlet"


def block_envelope(t: np.ndarray, x: np.ndarray, n_blocks: int) -> np.ndarray:
    """Maximum of ``x`` over each of ``n_blocks`` equal-length time blocks."""
    n = len(x) // n_blocks
    if n == 0:
        raise ValueError("more blocks than samples")
    return x[: n * n_blocks].reshape(n_blocks, n).max(axis=1)
