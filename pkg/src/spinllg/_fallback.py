"""Pure-Python kernels for the mean-field equations of motion.

Mirrors ``_kernels.pyx`` line for line; used when the compiled extension is
unavailable or ``SPINLLG_PURE=1`` is set.  State vectors are plain 6-tuples
``(Sx, Sy, Sz, mx, my, mz)`` and ``params`` is ``(J, eta, omega_c, Bx, By, Bz)``.
"""

import math

import numpy as np

from .core import sine_integral

# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                          22 / 525, -1 / 40)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
DT_MIN = 1e-12

OK = 0
STIFF = 1


def rates(t, y, S0, params):
    J, eta, omega_c, bx, by, bz = params
    sx, sy, sz, mx, my, mz = y
    s0x, s0y, s0z = S0

    if eta == 0.0:
        mem = 0.0
        al2 = 0.0
    else:
        if t == 0.0:
            mem = eta * omega_c
        else:
            mem = eta * math.sin(omega_c * t) / t
        al2 = 2.0 * eta * sine_integral(omega_c * t)
    mem2 = 2.0 * mem
    k = J - 2.0 * eta * omega_c

    # r = B0 x S - 2 mem (S x S0)
    rx = (by * sz - bz * sy) - mem2 * (sy * s0z - sz * s0y)
    ry = (bz * sx - bx * sz) - mem2 * (sz * s0x - sx * s0z)
    rz = (bx * sy - by * sx) - mem2 * (sx * s0y - sy * s0x)

    # dS/dt from dS/dt + c S x dS/dt = r, c = 2 alpha
    sxr_x = sy * rz - sz * ry
    sxr_y = sz * rx - sx * rz
    sxr_z = sx * ry - sy * rx
    c2 = al2 * al2
    sr = sx * rx + sy * ry + sz * rz
    inv = 1.0 / (1.0 + c2 * (sx * sx + sy * sy + sz * sz))
    dsx = (rx - al2 * sxr_x + c2 * sr * sx) * inv
    dsy = (ry - al2 * sxr_y + c2 * sr * sy) * inv
    dsz = (rz - al2 * sxr_z + c2 * sr * sz) * inv

    # dm/dt = B0 x m - k (m x S) - 2 mem (m x S0) - 2 alpha (m x dS/dt)
    dmx = ((by * mz - bz * my) - k * (my * sz - mz * sy)
           - mem2 * (my * s0z - mz * s0y) - al2 * (my * dsz - mz * dsy))
    dmy = ((bz * mx - bx * mz) - k * (mz * sx - mx * sz)
           - mem2 * (mz * s0x - mx * s0z) - al2 * (mz * dsx - mx * dsz))
    dmz = ((bx * my - by * mx) - k * (mx * sy - my * sx)
           - mem2 * (mx * s0y - my * s0x) - al2 * (mx * dsy - my * dsx))
    return (dsx, dsy, dsz, dmx, dmy, dmz)


def _axpy(y, h, coeffs, ks):
    out = list(y)
    for c, kv in zip(coeffs, ks):
        if c != 0.0:
            hc = h * c
            for i in range(6):
                out[i] += hc * kv[i]
    return tuple(out)


def attempt(t, y, k1, dt, S0, params, rel_tol, abs_tol):
    """One trial Dormand-Prince step; returns ``(y_new, k7, err_norm)``.

    ``k1`` is the rate at ``(t, y)``; ``k7`` the rate at the new point (FSAL).
    The error norm is the largest per-component ratio of the embedded error
    estimate to ``max(abs_tol, rel_tol * |v|)`` where ``v`` is the 3-vector
    (S or m) the component belongs to.
    """
    k2 = rates(t + C2 * dt, _axpy(y, dt, (A21,), (k1,)), S0, params)
    k3 = rates(t + C3 * dt, _axpy(y, dt, (A31, A32), (k1, k2)), S0, params)
    k4 = rates(t + C4 * dt, _axpy(y, dt, (A41, A42, A43), (k1, k2, k3)), S0, params)
    k5 = rates(t + C5 * dt, _axpy(y, dt, (A51, A52, A53, A54), (k1, k2, k3, k4)),
               S0, params)
    k6 = rates(t + dt, _axpy(y, dt, (A61, A62, A63, A64, A65), (k1, k2, k3, k4, k5)),
               S0, params)
    y_new = _axpy(y, dt, (B1, 0.0, B3, B4, B5, B6), (k1, k2, k3, k4, k5, k6))
    k7 = rates(t + dt, y_new, S0, params)

    err = 0.0
    for block in (0, 3):
        n_old = math.sqrt(sum(y[i] * y[i] for i in range(block, block + 3)))
        n_new = math.sqrt(sum(y_new[i] * y_new[i] for i in range(block, block + 3)))
        scale = max(abs_tol, rel_tol * max(n_old, n_new))
        for i in range(block, block + 3):
            e = dt * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                      + E6 * k6[i] + E7 * k7[i])
            err = max(err, abs(e) / scale)
    return y_new, k7, err


def next_dt(dt, err):
    if err == 0.0:
        factor = MAX_FACTOR
    else:
        factor = min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err ** -0.2))
    return dt * factor


def integrate(y0, S0, params, rel_tol, abs_tol, dt_init, dt_max, sample_times):
    """Adaptive integration recording the state at each of ``sample_times``.

    ``sample_times[0]`` must be the start time.  Steps are clipped to land
    exactly on every sample time.  Returns ``(samples, n_accepted,
    n_rejected, status, t_fail)``.
    """
    n = len(sample_times)
    out = np.empty((n, 6))
    y = tuple(float(v) for v in y0)
    S0 = tuple(float(v) for v in S0)
    params = tuple(float(v) for v in params)
    out[0] = y
    t = float(sample_times[0])
    k1 = rates(t, y, S0, params)
    dt = min(dt_init, dt_max)
    n_acc = n_rej = 0
    for j in range(1, n):
        t_next = float(sample_times[j])
        while t < t_next:
            clipped = t + dt >= t_next
            h = t_next - t if clipped else dt
            y_new, k7, err = attempt(t, y, k1, h, S0, params, rel_tol, abs_tol)
            if err <= 1.0:
                t = t_next if clipped else t + h
                y, k1 = y_new, k7
                n_acc += 1
                # a clipped step says little about the step size the dynamics allow
                if not clipped:
                    dt = min(next_dt(h, err), dt_max)
            else:
                n_rej += 1
                dt = next_dt(h, err)
                if dt < DT_MIN:
                    return out[:j], n_acc, n_rej, STIFF, t
        out[j] = y
    return out, n_acc, n_rej, OK, t
