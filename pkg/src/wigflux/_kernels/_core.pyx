# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; semantics mirror _core_py exactly."""

from libc.math cimport log, M_PI


def fp_rhs(double[:, ::1] w, double[:, ::1] dw,
           double[:, ::1] fx, double[:, ::1] fy,
           double[::1] xs, double[::1] ys, double h,
           double vxx, double vxy, double vyx, double vyy,
           double vx0, double vy0,
           double dxx, double dxy, double dyy, double deph):
    cdef Py_ssize_t npad = w.shape[0]
    cdef Py_ssize_t i, j
    cdef double inv2h = 0.5 / h
    cdef double gx, gy, g, x, y
    with nogil:
        for i in range(1, npad - 1):
            x = xs[i]
            for j in range(1, npad - 1):
                y = ys[j]
                gx = (w[i + 1, j] - w[i - 1, j]) * inv2h
                gy = (w[i, j + 1] - w[i, j - 1]) * inv2h
                g = x * gy - y * gx
                fx[i - 1, j - 1] = (vxx * x + vxy * y + vx0) * w[i, j] \
                    - dxx * gx - dxy * gy + deph * y * g
                fy[i - 1, j - 1] = (vyx * x + vyy * y + vy0) * w[i, j] \
                    - dxy * gx - dyy * gy - deph * x * g
        for i in range(2, npad - 2):
            for j in range(2, npad - 2):
                dw[i, j] = -((fx[i, j - 1] - fx[i - 2, j - 1]) * inv2h
                             + (fy[i - 1, j] - fy[i - 1, j - 2]) * inv2h)


def ou_paths(double complex[:, ::1] a, double complex[:, ::1] z,
             double complex[::1] eta_dt, double complex u, double amp):
    # four interleaved recurrences hide the complex-multiply latency
    cdef Py_ssize_t n_paths = a.shape[0]
    cdef Py_ssize_t n_steps = z.shape[1]
    cdef Py_ssize_t p = 0, k
    cdef double complex e
    with nogil:
        while p + 4 <= n_paths:
            for k in range(n_steps):
                e = eta_dt[k]
                a[p, k + 1] = a[p, k] * u + e + amp * z[p, k]
                a[p + 1, k + 1] = a[p + 1, k] * u + e + amp * z[p + 1, k]
                a[p + 2, k + 1] = a[p + 2, k] * u + e + amp * z[p + 2, k]
                a[p + 3, k + 1] = a[p + 3, k] * u + e + amp * z[p + 3, k]
            p += 4
        while p < n_paths:
            for k in range(n_steps):
                a[p, k + 1] = a[p, k] * u + eta_dt[k] + amp * z[p, k]
            p += 1


def dephasing_paths(double complex[:, ::1] a, double[:, ::1] z,
                    double complex drift, double amp):
    cdef Py_ssize_t n_paths = a.shape[0]
    cdef Py_ssize_t n_steps = z.shape[1]
    cdef Py_ssize_t p = 0, k
    cdef double complex jamp = 1j * amp
    with nogil:
        while p + 4 <= n_paths:
            for k in range(n_steps):
                a[p, k + 1] = drift * a[p, k] \
                    + jamp * a[p, k].conjugate() * z[p, k]
                a[p + 1, k + 1] = drift * a[p + 1, k] \
                    + jamp * a[p + 1, k].conjugate() * z[p + 1, k]
                a[p + 2, k + 1] = drift * a[p + 2, k] \
                    + jamp * a[p + 2, k].conjugate() * z[p + 2, k]
                a[p + 3, k + 1] = drift * a[p + 3, k] \
                    + jamp * a[p + 3, k].conjugate() * z[p + 3, k]
            p += 4
        while p < n_paths:
            for k in range(n_steps):
                a[p, k + 1] = drift * a[p, k] \
                    + jamp * a[p, k].conjugate() * z[p, k]
            p += 1


cdef inline double _log_wigner(double complex alpha, double complex mu,
                               double s, double complex m,
                               double inv_det, double log_norm) nogil:
    cdef double dr = alpha.real - mu.real
    cdef double di = alpha.imag - mu.imag
    cdef double quad = s * (dr * dr + di * di) \
        - m.real * (dr * dr - di * di) - m.imag * 2.0 * dr * di
    return log_norm - quad * inv_det


def sigma_accumulate(double complex[:, ::1] a, double complex[::1] mu,
                     double[::1] s, double complex[::1] m,
                     double kfac, double[::1] out):
    import numpy as np
    cdef Py_ssize_t n_paths = a.shape[0]
    cdef Py_ssize_t n_times = a.shape[1]
    cdef Py_ssize_t p, k
    cdef double det, lw_prev, lw_next, abs2_prev, abs2_next, total
    cdef double complex nxt
    inv_det_arr = np.empty(n_times)
    log_norm_arr = np.empty(n_times)
    cdef double[::1] inv_det = inv_det_arr
    cdef double[::1] log_norm = log_norm_arr
    for k in range(n_times):
        det = s[k] * s[k] - (m[k].real * m[k].real + m[k].imag * m[k].imag)
        inv_det[k] = 1.0 / det
        log_norm[k] = -log(M_PI) - 0.5 * log(det)
    with nogil:
        for p in range(n_paths):
            lw_prev = _log_wigner(a[p, 0], mu[0], s[0], m[0],
                                  inv_det[0], log_norm[0])
            abs2_prev = a[p, 0].real * a[p, 0].real \
                + a[p, 0].imag * a[p, 0].imag
            total = 0.0
            for k in range(1, n_times):
                nxt = a[p, k]
                abs2_next = nxt.real * nxt.real + nxt.imag * nxt.imag
                lw_next = _log_wigner(nxt, mu[k], s[k], m[k],
                                      inv_det[k], log_norm[k])
                total += lw_prev - lw_next + kfac * (abs2_prev - abs2_next)
                lw_prev = lw_next
                abs2_prev = abs2_next
            out[p] = total
