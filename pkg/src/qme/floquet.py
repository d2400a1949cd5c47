"""Floquet extension: monodromy and quasi-energies, FFT-based filtered
operators in the Floquet basis, and the driven completely positive
geometric-mean equation.

The system Hamiltonian is periodic, H(t + T) = H(t).  States are written
as e^{-i eps_phi t} |u_phi(t)>; operators expressed on the |u_phi(t)>
frame become periodic matrices whose discrete Fourier components are
weighted by the bath transform at the shifted frequencies
m' w_p + eps_phi - eps_xi.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import bath as bmod
from .backend import DenseStepper
from .bath import BathModel
from .errors import SpectralLeakage, UnitarityLoss
from .generators import lamb_shift

DEFAULT_MONODROMY_STEPS = 1 << 18


@dataclass
class FloquetBasis:
    """One-period propagator eigendata plus sampled basis frames."""

    period: float
    quasi_energies: np.ndarray
    monodromy: np.ndarray
    frames: np.ndarray        # (M, N, N): columns are |u_phi(t_m)>
    frame_times: np.ndarray

    @property
    def omega_p(self):
        return 2.0 * np.pi / self.period

    @property
    def m_frames(self):
        return self.frames.shape[0]


def monodromy(h_of_t, period, n_steps=DEFAULT_MONODROMY_STEPS, m_frames=1024,
              tol=1e-11) -> FloquetBasis:
    """RK4 integration of dU/dt = -i H(t) U over one period.

    Stores the Floquet frames at m_frames uniform times; raises
    UnitarityLoss if the trace-norm defect of U U^+ exceeds tol.
    """
    if n_steps % m_frames:
        raise ValueError("n_steps must be a multiple of m_frames")
    h0 = np.asarray(h_of_t(0.0))
    dim = h0.shape[0]
    dt = period / n_steps
    U = np.eye(dim, dtype=complex)
    stride = n_steps // m_frames
    snaps = np.empty((m_frames, dim, dim), dtype=complex)
    for k in range(n_steps):
        if k % stride == 0:
            snaps[k // stride] = U
        t = k * dt
        k1 = -1j * (h_of_t(t) @ U)
        k2 = -1j * (h_of_t(t + 0.5 * dt) @ (U + 0.5 * dt * k1))
        k3 = -1j * (h_of_t(t + 0.5 * dt) @ (U + 0.5 * dt * k2))
        k4 = -1j * (h_of_t(t + dt) @ (U + dt * k3))
        U = U + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    defect = np.abs(np.linalg.svd(U @ U.conj().T - np.eye(dim), compute_uv=False)).sum()
    if defect > tol:
        raise UnitarityLoss(f"|| U U^+ - 1 ||_1 = {defect:.2e} > {tol:g}")
    # quasi-energies from the unitary Schur form (diagonal for normal U)
    T, Z = scipy.linalg.schur(U, output="complex")
    phases = np.diag(T)
    eps = np.angle(phases) * (-1.0 / period)
    wp = 2.0 * np.pi / period
    eps = np.where(eps <= -wp / 2.0, eps + wp, eps)  # principal (-wp/2, wp/2]
    order = np.argsort(eps, kind="stable")
    eps = eps[order]
    Z = Z[:, order]
    times = np.arange(m_frames) * (period / m_frames)
    frames = np.einsum("mij,jk->mik", snaps, Z) * np.exp(
        1j * eps[None, None, :] * times[:, None, None]
    )
    return FloquetBasis(
        period=period,
        quasi_energies=eps,
        monodromy=U,
        frames=frames,
        frame_times=times,
    )


def to_floquet_frames(basis: FloquetBasis, op):
    """A(t_m) = F(t_m)^+ A F(t_m) on every frame."""
    F = basis.frames
    return np.einsum("mji,jk,mkl->mil", F.conj(), np.asarray(op, dtype=complex), F)


def from_floquet(basis: FloquetBasis, rho, frame_index):
    """Rotate a Floquet-frame density matrix back to the lab frame."""
    F = basis.frames[frame_index % basis.m_frames]
    return F @ rho @ F.conj().T


def _shifted_frequencies(basis: FloquetBasis):
    M = basis.m_frames
    kp = np.fft.fftfreq(M, d=1.0 / M)  # m' = 0, 1, ..., M/2-1, -M/2, ...
    eps = basis.quasi_energies
    return kp[:, None, None] * basis.omega_p + (eps[None, :, None] - eps[None, None, :])


def _leakage_check(spec):
    M = spec.shape[0]
    zero = np.abs(spec[0]).max()
    half = np.abs(spec[M // 2]).max()
    if zero > 0 and half > 1e-10 * zero:
        warnings.warn(
            f"FFT weight at the half frequency is {half / zero:.2e} of the "
            "zero-frequency weight; increase the frame count",
            SpectralLeakage,
        )


def floquet_filtered(frames_op, basis: FloquetBasis, bath: BathModel):
    """A_f(t) = IFFT{ Gamma*_m o FFT[A(t)] }.

    The mask conjugation mirrors the static filtered operator A o Gamma*
    (the static limit is asserted in the tests).
    """
    spec = np.fft.fft(frames_op, axis=0)
    _leakage_check(spec)
    freqs = _shifted_frequencies(basis)
    mask = 0.5 * bmod.spectral_density(bath, freqs) + 1j * bmod.principal_density(bath, freqs)
    return np.fft.ifft(spec * np.conj(mask), axis=0)


def floquet_sqrt_sd(frames_op, basis: FloquetBasis, bath: BathModel):
    """L(t) = IFFT{ sqrt(gamma_m) o FFT[A(t)] }; the mask is real and
    nonnegative at zero temperature."""
    spec = np.fft.fft(frames_op, axis=0)
    freqs = _shifted_frequencies(basis)
    mask = np.sqrt(bmod.spectral_density(bath, freqs))
    return np.fft.ifft(spec * mask, axis=0)


class FloquetGameForm:
    """Per-frame GKSL generator: H(t) = diag(eps) + H_L(t),
    L_k(t) = A_k(t) o sqrt(gamma); buffers refreshed by frame index."""

    time_dependent = True

    def __init__(self, basis: FloquetBasis, coupling_ops, bath: BathModel):
        self.basis = basis
        self.bath = bath
        M = basis.m_frames
        dim = basis.frames.shape[1]
        k = len(coupling_ops)
        self.dim = dim
        self.name = "floquet-game"
        heff = np.broadcast_to(np.diag(basis.quasi_energies).astype(complex), (M, dim, dim)).copy()
        dsum = np.zeros((M, dim, dim), dtype=complex)
        self.l_frames = np.empty((k, M, dim, dim), dtype=complex)
        for idx, op in enumerate(coupling_ops):
            frames_op = to_floquet_frames(basis, op)
            af = floquet_filtered(frames_op, basis, bath)
            hl = -0.5j * (
                np.einsum("mij,mkj->mik", frames_op, af.conj())
                - np.einsum("mij,mkj->mik", af, frames_op.conj())
            )
            heff += 0.5 * (hl + np.conj(np.swapaxes(hl, 1, 2)))
            L = floquet_sqrt_sd(frames_op, basis, bath)
            self.l_frames[idx] = L
            dsum += np.einsum("mij,mkj->mik", L, L.conj())
        self.h_frames = heff
        self.w_frames = 0.5 * dsum
        # persistent buffers the stepper points at; independent copies, the
        # frame tables must never be written through them
        self.h = np.array(self.h_frames[0], copy=True, order="C")
        self.w = np.array(self.w_frames[0], copy=True, order="C")
        self.xs = np.ascontiguousarray(np.conj(np.swapaxes(self.l_frames[:, 0], 1, 2)))
        self.ys = np.array(self.l_frames[:, 0], copy=True, order="C")
        self._stepper = None
        self._frame = 0

    @property
    def stepper(self):
        if self._stepper is None:
            self._stepper = DenseStepper(self.h, self.w, None, None, self.xs, self.ys)
        return self._stepper

    def frame_of(self, t):
        M = self.basis.m_frames
        pos = t / self.basis.period * M
        idx = int(round(pos)) % M
        if abs(pos - round(pos)) > 1e-6:
            raise ValueError(
                f"t={t} is not on the frame grid; step with dt = j * T/{M}"
            )
        return idx

    def refresh(self, t):
        idx = self.frame_of(t)
        if idx == self._frame:
            return
        self._frame = idx
        self.h[...] = self.h_frames[idx]
        self.w[...] = self.w_frames[idx]
        self.xs[...] = np.conj(np.swapaxes(self.l_frames[:, idx], 1, 2))
        self.ys[...] = self.l_frames[:, idx]

    def apply(self, rho, t):
        self.refresh(t)
        return self.stepper.apply(rho)

    def prepare(self, times):  # grid already tabulated
        return None


def smoothed_square_wave(ramp_frac=0.05):
    """Periodic switching shape: high for roughly half the period, zero for
    the other half, with smooth (C-infinity) transitions of 10-90% width
    ~ramp_frac so the Fourier content decays exponentially.

    h(phase) = [1 + tanh(cos(2 pi phase) / w)] / 2, w = ramp_frac / 0.35.
    """
    w = float(ramp_frac) / 0.35

    def h(phase):
        out = 0.5 * (1.0 + np.tanh(np.cos(2.0 * np.pi * np.asarray(phase)) / w))
        return out if np.ndim(phase) else float(out)

    return h


def driven_chain_hamiltonian(h0_trunc, sx_trunc, amplitude, period, shape=None):
    """H(t) = H0 - amplitude * S_x * h(t/T) on the truncated basis."""
    shape = shape or smoothed_square_wave()
    h0 = np.asarray(h0_trunc, dtype=complex)
    sx = np.asarray(sx_trunc, dtype=complex)

    def h_of_t(t):
        return h0 - amplitude * shape(t / period) * sx

    return h_of_t


def floquet_game_generator(basis: FloquetBasis, coupling: "object", bath=None) -> FloquetGameForm:
    """Build the driven GKSL form from a CouplingSet (or a plain list of
    operators plus a bath)."""
    if bath is None:
        ops, bath = list(coupling.ops), coupling.baths[0]
    else:
        ops = list(coupling)
    return FloquetGameForm(basis, ops, bath)
