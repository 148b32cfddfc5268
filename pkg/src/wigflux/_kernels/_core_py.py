"""Numpy reference implementations of the hot kernels.

Semantics must stay identical to the compiled versions in _core.pyx; the
test suite compares the two backends element by element.
"""

import math

import numpy as np

_LOG_PI = math.log(math.pi)


def fp_rhs(w, dw, fx, fy, xs, ys, h,
           vxx, vxy, vyx, vyy, vx0, vy0, dxx, dxy, dyy, deph):
    """-div F of the phase-space continuity equation, central differences.

    w and dw are (n+4, n+4) with two ghost layers held at zero; fx and fy
    are (n+2, n+2) workspaces; xs, ys are the padded cell-center
    coordinates. Only the interior n x n block of dw is written.
    """
    inv2h = 0.5 / h
    gx = (w[2:, 1:-1] - w[:-2, 1:-1]) * inv2h
    gy = (w[1:-1, 2:] - w[1:-1, :-2]) * inv2h
    wc = w[1:-1, 1:-1]
    x = xs[1:-1][:, None]
    y = ys[1:-1][None, :]
    fx[:] = (vxx * x + vxy * y + vx0) * wc - dxx * gx - dxy * gy
    fy[:] = (vyx * x + vyy * y + vy0) * wc - dxy * gx - dyy * gy
    if deph != 0.0:
        g = x * gy - y * gx
        fx += deph * y * g
        fy -= deph * x * g
    dw[2:-2, 2:-2] = -((fx[2:, 1:-1] - fx[:-2, 1:-1]) * inv2h
                       + (fy[1:-1, 2:] - fy[1:-1, :-2]) * inv2h)


def ou_paths(a, z, eta_dt, u, amp):
    """March damped-oscillator paths: a[:, k+1] = u a[:, k] + eta_dt[k] + amp z[:, k]."""
    for k in range(z.shape[1]):
        a[:, k + 1] = a[:, k] * u + eta_dt[k] + amp * z[:, k]


def dephasing_paths(a, z, drift, amp):
    """March dephasing paths: a[:, k+1] = drift a[:, k] + i amp conj(a[:, k]) z[:, k]."""
    for k in range(z.shape[1]):
        a[:, k + 1] = drift * a[:, k] + 1j * amp * np.conj(a[:, k]) * z[:, k]


def _log_wigner(pts, mu, s, m):
    det = s * s - (m.real * m.real + m.imag * m.imag)
    d = pts - mu
    quad = s * (d.real ** 2 + d.imag ** 2) - (m * np.conj(d) ** 2).real
    return -_LOG_PI - 0.5 * math.log(det) - quad / det


def sigma_accumulate(a, mu, s, m, kfac, out):
    """Per-path entropy functional along stored paths.

    Each step contributes ln W(A_k, t_k) - ln W(A_{k+1}, t_{k+1}) plus
    kfac (|A_k|^2 - |A_{k+1}|^2); the Gaussian moments of the evolving
    ensemble at the grid times are given by mu, s, m. The state terms
    telescope, so the sum equals the boundary expression
    ln W(A_0, t_0) - ln W(A_K, t_K) + kfac (|A_0|^2 - |A_K|^2).
    """
    lw_prev = _log_wigner(a[:, 0], mu[0], s[0], m[0])
    abs2_prev = a[:, 0].real ** 2 + a[:, 0].imag ** 2
    out[:] = 0.0
    for k in range(1, a.shape[1]):
        nxt = a[:, k]
        abs2_next = nxt.real ** 2 + nxt.imag ** 2
        lw_next = _log_wigner(nxt, mu[k], s[k], m[k])
        out += lw_prev - lw_next + kfac * (abs2_prev - abs2_next)
        lw_prev = lw_next
        abs2_prev = abs2_next
