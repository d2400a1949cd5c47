"""Scalar kernels: dissipative G, unitary H, detuning f, their
coarse-grained and dynamically coarse-grained forms, and the trace-norm
ratio scan of the coarse-grained detuning vs geometric-mean kernels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import bath as bmod
from .bath import BathModel

_FD_REL = 1e-6  # |w - w'| below this (times omega_c) -> derivative branch


def sinc(x):
    """sin(x)/x with a series branch near zero."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    out = np.empty_like(x)
    xs = x[small]
    out[small] = 1.0 - xs * xs / 6.0 + xs**4 / 120.0
    xb = x[~small]
    out[~small] = np.sin(xb) / xb
    return float(out) if x.ndim == 0 else out


@dataclass(frozen=True)
class KernelGrid:
    """Sampled two-frequency kernel K(w_i, w_j)."""

    omegas: np.ndarray
    values: np.ndarray


def dissipative_kernel(bath: BathModel, w, wp):
    """G(w, w') = [gamma(w)+gamma(w')]/2 - i[S(w') - S(w)] = Gamma(w) + Gamma(w')*."""
    g = bmod.spectral_density(bath, w)
    gp = bmod.spectral_density(bath, wp)
    s = bmod.principal_density(bath, w)
    sp = bmod.principal_density(bath, wp)
    return 0.5 * (g + gp) - 1j * (sp - s)


def unitary_kernel(bath: BathModel, w, wp):
    """H(w, w') = [S(w) + S(w') + i(gamma(w)-gamma(w'))/2] / 2."""
    g = bmod.spectral_density(bath, w)
    gp = bmod.spectral_density(bath, wp)
    s = bmod.principal_density(bath, w)
    sp = bmod.principal_density(bath, wp)
    return 0.5 * (s + sp + 0.5j * (g - gp))


def geometric_mean(bath: BathModel, w, wp):
    g = bmod.spectral_density(bath, w)
    gp = bmod.spectral_density(bath, wp)
    return np.sqrt(g * gp)


def detuning_function(bath: BathModel, w, wp):
    """f(w, w') = [sqrt(gamma) - sqrt(gamma')]^2 / 2 + i[S(w) - S(w')].

    The exact remainder of swapping the arithmetic mean of spectral
    densities for the geometric one; vanishes at w = w'.
    """
    g = bmod.spectral_density(bath, w)
    gp = bmod.spectral_density(bath, wp)
    s = bmod.principal_density(bath, w)
    sp = bmod.principal_density(bath, wp)
    return 0.5 * (np.sqrt(g) - np.sqrt(gp)) ** 2 + 1j * (s - sp)


def cg_kernels(bath: BathModel, w, wp, T0):
    """Coarse-grained geometric mean and detuning: both sinc-suppressed."""
    if T0 < 0:
        raise ValueError("coarse-graining time must be nonnegative")
    win = sinc(0.5 * (np.asarray(w) - np.asarray(wp)) * T0)
    return geometric_mean(bath, w, wp) * win, detuning_function(bath, w, wp) * win


def cg_dissipative_kernel(bath: BathModel, w, wp, T0):
    """G(w,w') sinc((w-w') T0 / 2); the coarse-grained Redfield kernel."""
    win = sinc(0.5 * (np.asarray(w) - np.asarray(wp)) * T0)
    return dissipative_kernel(bath, w, wp) * win


def cg_unitary_kernel(bath: BathModel, w, wp, T0):
    win = sinc(0.5 * (np.asarray(w) - np.asarray(wp)) * T0)
    return unitary_kernel(bath, w, wp) * win


def norm_ratio_scan(bath: BathModel, t0_values, omega_max=None, count=201):
    """Trace-norm ratio |f~|_1 / |g~|_1 on a uniform frequency grid.

    Constant at small T0, crossing over to ~1/T0 beyond the bath
    correlation time.  Returns a list of (T0, ratio) pairs.
    """
    if omega_max is None:
        omega_max = 3.0 * bath.omega_c
    ws = np.linspace(-omega_max, omega_max, count)
    gmat = geometric_mean(bath, ws[:, None], ws[None, :])
    fmat = detuning_function(bath, ws[:, None], ws[None, :])
    rows = []
    for t0 in t0_values:
        win = sinc(0.5 * (ws[:, None] - ws[None, :]) * t0)
        fn = np.linalg.svd(fmat * win, compute_uv=False).sum()
        gn = np.linalg.svd(gmat * win, compute_uv=False).sum()
        rows.append((float(t0), float(fn / gn)))
    return rows


def _td_density_values(bath: BathModel, w, tau, tol):
    """(gamma_tau, S_tau) on an arbitrary array, de-duplicated."""
    w = np.asarray(w, dtype=float)
    flat = np.round(w.ravel(), 13)
    uniq, inv = np.unique(flat, return_inverse=True)
    if bath.kind == bmod.OHMIC_EXP:
        vals = bmod.half_fourier(bath, uniq, tau, tol)
        vals = np.atleast_1d(vals)
    else:
        vals = np.array([bmod.half_fourier(bath, x, tau, tol) for x in uniq])
    g = 2.0 * vals.real
    s = vals.imag
    return g[inv].reshape(w.shape), s[inv].reshape(w.shape)


def dcg_kernels(bath: BathModel, w, wp, tau, tol=1e-10):
    """Dissipative and unitary kernels of the dynamically coarse-grained
    equation, via the single-variable finite-time densities.

    G_dc = e^{-i(w-w') tau/2} { [gamma_tau(w)+gamma_tau(w')]/2 sinc(d)
                                - [S_tau(w')-S_tau(w)]/(d) cos(d) },
    H_dc = e^{+i(w-w') tau/2} { [S_tau(w)+S_tau(w')]/2 sinc(d)
                                + [gamma_tau(w')-gamma_tau(w)]/(4 d) cos(d) },
    with d = (w'-w) tau / 2; the diagonal takes the derivative limit.
    Accepts broadcastable w, w' (single-variable values are evaluated on the
    input shapes, never on the broadcast product).
    """
    if tau <= 0:
        raise ValueError("coarse-graining time tau must be positive")
    scalar = np.ndim(w) == 0 and np.ndim(wp) == 0
    w = np.atleast_1d(np.asarray(w, dtype=float))
    wp = np.atleast_1d(np.asarray(wp, dtype=float))
    gw, sw = _td_density_values(bath, w, tau, tol)
    gwp, swp = _td_density_values(bath, wp, tau, tol)
    d = 0.5 * (wp - w) * tau
    near = np.abs(wp - w) < _FD_REL * bath.omega_c
    with np.errstate(divide="ignore", invalid="ignore"):
        dsafe = np.where(near, 1.0, d)
        quot_s = np.where(near, 0.0, (swp - sw) / dsafe)
        quot_g = np.where(near, 0.0, (gwp - gw) / dsafe)
    if np.any(near):
        # removable singularity: analytic derivative of the finite-time
        # densities at the center frequency
        shape = near.shape
        wa = 0.5 * (np.broadcast_to(w, shape)[near] + np.broadcast_to(wp, shape)[near])
        flat = np.round(wa.ravel(), 13)
        uniq, inv = np.unique(flat, return_inverse=True)
        dgam = np.empty(uniq.size, dtype=complex)
        for i, x in enumerate(uniq):
            dgam[i] = bmod.half_fourier_domega(bath, x, tau, tol)
        dvals = dgam[inv].reshape(wa.shape)
        quot_s = np.asarray(quot_s)
        quot_g = np.asarray(quot_g)
        quot_s[near] = (2.0 / tau) * dvals.imag
        quot_g[near] = (2.0 / tau) * (2.0 * dvals.real)
    g_dc = np.exp(-1j * (w - wp) * tau / 2.0) * (
        0.5 * (gw + gwp) * sinc(d) - quot_s * np.cos(d)
    )
    h_dc = np.exp(1j * (w - wp) * tau / 2.0) * (
        0.5 * (sw + swp) * sinc(d) + 0.25 * quot_g * np.cos(d)
    )
    if scalar:
        return complex(g_dc.reshape(-1)[0]), complex(h_dc.reshape(-1)[0])
    return g_dc, h_dc


def dcg_dissipative_quad(bath: BathModel, w, wp, tau, tol=1e-9):
    """Brute-force double-sinc quadrature of the DCG dissipative kernel.

    Test oracle: (tau/2pi) e^{-i(w-w') tau/2}
                 int gamma(W) sinc((W-w)tau/2) sinc((W-w')tau/2) dW.
    """

    def f(W):
        return (
            bmod.spectral_density(bath, W)
            * sinc(0.5 * (W - w) * tau)
            * sinc(0.5 * (W - wp) * tau)
        )

    upper = 50.0 * bath.omega_c + 10.0 * max(abs(w), abs(wp), 1.0 / tau)
    pts = sorted({abs(w), abs(wp)})
    val, _ = quad(f, 0.0, upper, limit=4000, epsabs=tol, epsrel=tol, points=pts)
    return tau / (2.0 * np.pi) * np.exp(-0.5j * (w - wp) * tau) * val


def dcg_grid(bath: BathModel, omegas, tau, tol=1e-10) -> KernelGrid:
    """Sampled DCG dissipative kernel; PSD as a Gram matrix on any grid."""
    ws = np.asarray(omegas, dtype=float)
    vals, _ = dcg_kernels(bath, ws[:, None], ws[None, :], tau, tol)
    return KernelGrid(omegas=ws, values=vals)
