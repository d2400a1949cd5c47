"""Pure-numpy reference implementations of the compiled kernels.

Used when the extension is unavailable (or QME_BACKEND=python) and as the
semantic reference the compiled module is tested against.
"""

from __future__ import annotations

import numpy as np


class DenseStepper:
    """d(rho)/dt = -i[H, rho] - (W rho + rho W^+)
    + sum_k (Xh_k rho Yh_k + h.c.) + sum_k (Xs_k rho Ys_k)."""

    def __init__(self, h, w, xh, yh, xs, ys):
        self.h = np.ascontiguousarray(h, dtype=complex)
        self.n = self.h.shape[0]
        self.w = None if w is None else np.ascontiguousarray(w, dtype=complex)
        self.xh = None if xh is None or not len(xh) else np.ascontiguousarray(xh, dtype=complex)
        self.yh = None if yh is None or not len(yh) else np.ascontiguousarray(yh, dtype=complex)
        self.xs = None if xs is None or not len(xs) else np.ascontiguousarray(xs, dtype=complex)
        self.ys = None if ys is None or not len(ys) else np.ascontiguousarray(ys, dtype=complex)

    def apply(self, rho):
        m = -1j * (self.h @ rho)
        out = m + m.conj().T
        if self.w is not None:
            m = -(self.w @ rho)
            out += m + m.conj().T
        if self.xh is not None:
            m = (self.xh @ rho) @ self.yh
            s = m.sum(axis=0)
            out += s + s.conj().T
        if self.xs is not None:
            out += ((self.xs @ rho) @ self.ys).sum(axis=0)
        return out

    def step_power_series(self, rho, dt, eps, max_terms):
        rho = np.array(rho, dtype=complex, copy=True)
        d = rho.copy()
        for m in range(1, max_terms + 1):
            d = (dt / m) * self.apply(d)
            rho += d
            if np.linalg.norm(d) < eps:
                return m, rho
        return -1, rho


def volterra_run(f1, f2, phase, dt, nsteps, mem):
    """Reference predictor-corrector trapezoid Volterra solver."""
    f1 = np.ascontiguousarray(f1, dtype=complex)
    f2 = np.ascontiguousarray(f2, dtype=complex)
    phase = np.ascontiguousarray(phase, dtype=complex)
    L = min(nsteps, mem)
    f1r = np.ascontiguousarray(f1[1:L + 1][::-1])
    f2r = np.ascontiguousarray(f2[1:L + 1][::-1])
    c1 = np.zeros(nsteps + 1, dtype=complex)
    c2 = np.zeros(nsteps + 1, dtype=complex)
    c1[0] = 1.0
    g1 = 0j
    g2 = 0j
    for n in range(nsteps):
        fn1 = -g1 - phase[n] * g2
        fn2 = -g2 - np.conj(phase[n]) * g1
        c1p = c1[n] + dt * fn1
        c2p = c2[n] + dt * fn2
        J = min(n + 1, L)
        s1 = np.dot(f1r[L - J:], c1[n + 1 - J:n + 1]) - 0.5 * f1[J] * c1[n + 1 - J]
        s2 = np.dot(f2r[L - J:], c2[n + 1 - J:n + 1]) - 0.5 * f2[J] * c2[n + 1 - J]
        g1p = dt * (0.5 * f1[0] * c1p + s1)
        g2p = dt * (0.5 * f2[0] * c2p + s2)
        fp1 = -g1p - phase[n + 1] * g2p
        fp2 = -g2p - np.conj(phase[n + 1]) * g1p
        c1[n + 1] = c1[n] + 0.5 * dt * (fn1 + fp1)
        c2[n + 1] = c2[n] + 0.5 * dt * (fn2 + fp2)
        g1 = dt * (0.5 * f1[0] * c1[n + 1] + s1)
        g2 = dt * (0.5 * f2[0] * c2[n + 1] + s2)
    return c1, c2
