"""Derived quantities: trace distance, purity, negativity, relaxation
rate and exponential width fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonPositiveData


def trace_distance(rho1, rho2):
    """(1/2) sum of singular values of rho1 - rho2."""
    rho1 = np.asarray(rho1)
    rho2 = np.asarray(rho2)
    if rho1.shape != rho2.shape:
        raise DimensionMismatch(f"{rho1.shape} vs {rho2.shape}")
    # Hermitian difference: singular values = |eigenvalues|
    return 0.5 * float(np.abs(np.linalg.eigvalsh(rho1 - rho2)).sum())


def trace_norm(mat):
    return float(np.linalg.svd(np.asarray(mat), compute_uv=False).sum())


def purity(rho):
    rho = np.asarray(rho)
    return float(np.einsum("ij,ji->", rho, rho).real)


def negativity_sum(rho, cutoff=-1e-12):
    """Sum of the negative eigenvalues (a nonpositive diagnostic)."""
    eig = np.linalg.eigvalsh(np.asarray(rho))
    neg = eig[eig < cutoff]
    return float(neg.sum()) if neg.size else 0.0


def relaxation_rate(form, rho, h0_diag):
    """1/tau_r = trace norm of the interaction-picture time derivative.

    Computed from the generator (not finite differences): rotating with the
    bare H0 leaves || L(rho) + i[H0, rho] ||_1 invariant.
    """
    h0 = np.asarray(h0_diag, dtype=float)
    drho = form.apply(rho) + 1j * (h0[:, None] - h0[None, :]) * rho
    return trace_norm(drho)


@dataclass(frozen=True)
class FitResult:
    rate: float
    amplitude: float
    residual: float  # rms of the log-residuals over the fit window


def fit_exponential(t, y, window=(0.9, 0.1)) -> FitResult:
    """Least-squares line fit of ln y; rate = -slope.

    The fit window keeps the samples where y has decayed to between
    window[0] and window[1] of its initial value (the whole series if the
    decay never reaches the window).
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape:
        raise DimensionMismatch("t and y must have equal length")
    y0 = y[0]
    if y0 <= 0:
        raise NonPositiveData("initial value must be positive")
    hi, lo = window[0] * y0, window[1] * y0
    sel = (y <= hi) & (y >= lo)
    if sel.sum() < 2:
        sel = np.ones_like(y, dtype=bool)
    ts, ys = t[sel], y[sel]
    if (ys <= 0).any():
        raise NonPositiveData("fit window contains nonpositive samples")
    ly = np.log(ys)
    slope, intercept = np.polyfit(ts, ly, 1)
    resid = float(np.sqrt(np.mean((ly - (slope * ts + intercept)) ** 2)))
    return FitResult(rate=-float(slope), amplitude=float(np.exp(intercept)), residual=resid)
