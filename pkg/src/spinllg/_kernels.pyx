# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the mean-field equations of motion.

Same algorithms and same operation order as ``_fallback.py``.
"""

from libc.math cimport sin, cos, sqrt, fabs, M_PI

import numpy as np

cdef double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176
cdef double A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784
cdef double B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200
cdef double E6 = 22.0 / 525, E7 = -1.0 / 40

cdef double SAFETY = 0.9, MIN_FACTOR = 0.2, MAX_FACTOR = 5.0
cdef double _DT_MIN = 1e-12
DT_MIN = _DT_MIN

cdef enum:
    _OK = 0
    _STIFF = 1

OK = _OK
STIFF = _STIFF


cdef double _si(double x) nogil:
    cdef double x2, term, total, contrib, a
    cdef double complex b, c, d, h, delta
    cdef int k, i
    if x == 0.0:
        return 0.0
    if x <= 4.0:
        x2 = x * x
        term = x
        total = x
        k = 0
        while True:
            k += 1
            term *= -x2 / ((2 * k) * (2 * k + 1))
            contrib = term / (2 * k + 1)
            total += contrib
            if fabs(contrib) <= 1e-17 * fabs(total):
                return total
    # modified Lentz on the continued fraction of e^{ix} E1(ix)
    b = x * 1j + 1.0
    c = 1e300
    d = 1.0 / b
    h = d
    for i in range(1, 200):
        a = -<double>(i * i)
        b = b + 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h = h * delta
        if fabs(delta.real - 1.0) + fabs(delta.imag) < 1e-16:
            break
    # Im[h e^{-ix}] = Si(x) - pi/2
    return M_PI / 2 + (h.imag * cos(x) - h.real * sin(x))


def sine_integral(double x):
    if x < 0 or x != x:
        raise ValueError(f"sine_integral is defined here for x >= 0, got {x}")
    return _si(x)


cdef void _rates(double t, const double* y, const double* s0, const double* p,
                 double* out) nogil:
    cdef double J = p[0], eta = p[1], omega_c = p[2], bx = p[3], by = p[4], bz = p[5]
    cdef double sx = y[0], sy = y[1], sz = y[2], mx = y[3], my = y[4], mz = y[5]
    cdef double s0x = s0[0], s0y = s0[1], s0z = s0[2]
    cdef double mem, al2, mem2, k, rx, ry, rz, sxr_x, sxr_y, sxr_z, c2, sr, inv
    cdef double dsx, dsy, dsz

    if eta == 0.0:
        mem = 0.0
        al2 = 0.0
    else:
        if t == 0.0:
            mem = eta * omega_c
        else:
            mem = eta * sin(omega_c * t) / t
        al2 = 2.0 * eta * _si(omega_c * t)
    mem2 = 2.0 * mem
    k = J - 2.0 * eta * omega_c

    rx = (by * sz - bz * sy) - mem2 * (sy * s0z - sz * s0y)
    ry = (bz * sx - bx * sz) - mem2 * (sz * s0x - sx * s0z)
    rz = (bx * sy - by * sx) - mem2 * (sx * s0y - sy * s0x)

    sxr_x = sy * rz - sz * ry
    sxr_y = sz * rx - sx * rz
    sxr_z = sx * ry - sy * rx
    c2 = al2 * al2
    sr = sx * rx + sy * ry + sz * rz
    inv = 1.0 / (1.0 + c2 * (sx * sx + sy * sy + sz * sz))
    dsx = (rx - al2 * sxr_x + c2 * sr * sx) * inv
    dsy = (ry - al2 * sxr_y + c2 * sr * sy) * inv
    dsz = (rz - al2 * sxr_z + c2 * sr * sz) * inv

    out[0] = dsx
    out[1] = dsy
    out[2] = dsz
    out[3] = ((by * mz - bz * my) - k * (my * sz - mz * sy)
              - mem2 * (my * s0z - mz * s0y) - al2 * (my * dsz - mz * dsy))
    out[4] = ((bz * mx - bx * mz) - k * (mz * sx - mx * sz)
              - mem2 * (mz * s0x - mx * s0z) - al2 * (mz * dsx - mx * dsz))
    out[5] = ((bx * my - by * mx) - k * (mx * sy - my * sx)
              - mem2 * (mx * s0y - my * s0x) - al2 * (mx * dsy - my * dsx))


def rates(double t, y, S0, params):
    cdef double yy[6]
    cdef double ss[3]
    cdef double pp[6]
    cdef double out[6]
    cdef int i
    for i in range(6):
        yy[i] = y[i]
        pp[i] = params[i]
    for i in range(3):
        ss[i] = S0[i]
    _rates(t, yy, ss, pp, out)
    return (out[0], out[1], out[2], out[3], out[4], out[5])


cdef double _attempt(double t, const double* y, const double* k1, double dt,
                     const double* s0, const double* p, double rel_tol, double abs_tol,
                     double* y_new, double* k7) nogil:
    cdef double k2[6]
    cdef double k3[6]
    cdef double k4[6]
    cdef double k5[6]
    cdef double k6[6]
    cdef double tmp[6]
    cdef int i, block
    cdef double err = 0.0, n_old, n_new, scale, e

    for i in range(6):
        tmp[i] = y[i] + dt * A21 * k1[i]
    _rates(t + C2 * dt, tmp, s0, p, k2)
    for i in range(6):
        tmp[i] = y[i] + dt * A31 * k1[i] + dt * A32 * k2[i]
    _rates(t + C3 * dt, tmp, s0, p, k3)
    for i in range(6):
        tmp[i] = y[i] + dt * A41 * k1[i] + dt * A42 * k2[i] + dt * A43 * k3[i]
    _rates(t + C4 * dt, tmp, s0, p, k4)
    for i in range(6):
        tmp[i] = (y[i] + dt * A51 * k1[i] + dt * A52 * k2[i] + dt * A53 * k3[i]
                  + dt * A54 * k4[i])
    _rates(t + C5 * dt, tmp, s0, p, k5)
    for i in range(6):
        tmp[i] = (y[i] + dt * A61 * k1[i] + dt * A62 * k2[i] + dt * A63 * k3[i]
                  + dt * A64 * k4[i] + dt * A65 * k5[i])
    _rates(t + dt, tmp, s0, p, k6)
    for i in range(6):
        y_new[i] = (y[i] + dt * B1 * k1[i] + dt * B3 * k3[i] + dt * B4 * k4[i]
                    + dt * B5 * k5[i] + dt * B6 * k6[i])
    _rates(t + dt, y_new, s0, p, k7)

    for block in range(0, 6, 3):
        n_old = sqrt(y[block] * y[block] + y[block + 1] * y[block + 1]
                     + y[block + 2] * y[block + 2])
        n_new = sqrt(y_new[block] * y_new[block] + y_new[block + 1] * y_new[block + 1]
                     + y_new[block + 2] * y_new[block + 2])
        scale = rel_tol * (n_old if n_old > n_new else n_new)
        if scale < abs_tol:
            scale = abs_tol
        for i in range(block, block + 3):
            e = dt * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                      + E6 * k6[i] + E7 * k7[i])
            e = fabs(e) / scale
            if e > err:
                err = e
    return err


cdef inline double _next_dt(double dt, double err) nogil:
    cdef double factor
    if err == 0.0:
        factor = MAX_FACTOR
    else:
        factor = SAFETY * err ** -0.2
        if factor < MIN_FACTOR:
            factor = MIN_FACTOR
        if factor > MAX_FACTOR:
            factor = MAX_FACTOR
    return dt * factor


def attempt(double t, y, k1, double dt, S0, params, double rel_tol, double abs_tol):
    cdef double yy[6]
    cdef double kk[6]
    cdef double ss[3]
    cdef double pp[6]
    cdef double y_new[6]
    cdef double k7[6]
    cdef int i
    for i in range(6):
        yy[i] = y[i]
        kk[i] = k1[i]
        pp[i] = params[i]
    for i in range(3):
        ss[i] = S0[i]
    err = _attempt(t, yy, kk, dt, ss, pp, rel_tol, abs_tol, y_new, k7)
    return (tuple(y_new[i] for i in range(6)), tuple(k7[i] for i in range(6)), err)


def next_dt(double dt, double err):
    return _next_dt(dt, err)


def integrate(y0, S0, params, double rel_tol, double abs_tol, double dt_init,
              double dt_max, sample_times):
    cdef double[::1] ts = np.ascontiguousarray(sample_times, dtype=np.float64)
    cdef Py_ssize_t n = ts.shape[0]
    out_arr = np.empty((n, 6))
    cdef double[:, ::1] out = out_arr
    cdef double y[6]
    cdef double k1[6]
    cdef double y_new[6]
    cdef double k7[6]
    cdef double ss[3]
    cdef double pp[6]
    cdef double t, t_next, dt, h, err
    cdef Py_ssize_t j
    cdef int i, status = _OK
    cdef bint clipped
    cdef long n_acc = 0, n_rej = 0

    for i in range(6):
        y[i] = y0[i]
        pp[i] = params[i]
        out[0, i] = y[i]
    for i in range(3):
        ss[i] = S0[i]
    t = ts[0]
    _rates(t, y, ss, pp, k1)
    dt = dt_init if dt_init < dt_max else dt_max

    with nogil:
        for j in range(1, n):
            t_next = ts[j]
            while t < t_next:
                clipped = t + dt >= t_next
                h = t_next - t if clipped else dt
                err = _attempt(t, y, k1, h, ss, pp, rel_tol, abs_tol, y_new, k7)
                if err <= 1.0:
                    t = t_next if clipped else t + h
                    for i in range(6):
                        y[i] = y_new[i]
                        k1[i] = k7[i]
                    n_acc += 1
                    if not clipped:
                        dt = _next_dt(h, err)
                        if dt > dt_max:
                            dt = dt_max
                else:
                    n_rej += 1
                    dt = _next_dt(h, err)
                    if dt < _DT_MIN:
                        status = _STIFF
                        break
            if status != _OK:
                break
            for i in range(6):
                out[j, i] = y[i]
    if status != _OK:
        return out_arr[:j], n_acc, n_rej, status, t
    return out_arr, n_acc, n_rej, status, t
