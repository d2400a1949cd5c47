"""Master-equation generators.

Every equation here acts on the density matrix through one of two runtime
shapes, both consumed by the propagator:

* `DenseForm`    -- d(rho)/dt = -i[H, rho] - (W rho + rho W^+)
                    + sum_k (X_k rho Y_k + h.c.) + sum_k (Xs_k rho Ys_k),
  covering Redfield (both the bare four-term and the renormalized kernel
  writing), GAME, PERLind and ULE, and their time-dependent-coefficient
  versions;

* `SuperopForm`  -- same H and W terms, but the gain is a linear map on
  vec(rho), kept sparse for the frequency-matched equations (RWA, PRWA)
  and dense for the sinc-convolved kernels (coarse-grained Redfield, DCG)
  whose two-frequency kernels do not separate into filtered operators.

All operators live in the system eigenbasis; Bohr-frequency masks are
evaluated once at construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import bath as bmod
from .backend import DenseStepper
from .bath import BathModel
from .errors import DimensionMismatch, EmptySpectrum, TooLarge
from .hilbert import EigenSystem
from .kernels import sinc

DEG_TOL = 1e-9  # relative tolerance for Bohr-frequency degeneracy matching
SUPEROP_MAX_DIM = 80  # dense N^2 x N^2 gain beyond this is refused


@dataclass(frozen=True)
class CouplingSet:
    """System-side coupling operators with their (uncorrelated) baths.

    ops       : operators in the eigenbasis
    baths     : one BathModel per operator
    hermitian : per-op flag; False couples through the A, A^+ pair with a
                single half-range correlation (the V-type emitter case)
    """

    ops: tuple
    baths: tuple
    hermitian: tuple

    @classmethod
    def build(cls, ops, baths, hermitian=None):
        ops = tuple(np.ascontiguousarray(a, dtype=complex) for a in ops)
        if isinstance(baths, BathModel):
            baths = (baths,) * len(ops)
        baths = tuple(baths)
        if hermitian is None:
            hermitian = tuple(
                bool(np.abs(a - a.conj().T).max() <= 1e-12 * max(np.abs(a).max(), 1e-300))
                for a in ops
            )
        else:
            hermitian = tuple(bool(h) for h in hermitian)
        if not (len(ops) == len(baths) == len(hermitian)):
            raise DimensionMismatch("ops, baths and flags must have equal length")
        return cls(ops=ops, baths=baths, hermitian=hermitian)

    def dim(self):
        return self.ops[0].shape[0]


# ---------------------------------------------------------------------------
# runtime forms


class DenseForm:
    """Filtered-operator style generator with a compiled fast path."""

    def __init__(self, h, w, xh, yh, xs, ys, name=""):
        self.h = np.ascontiguousarray(h, dtype=complex)
        self.w = None if w is None else np.ascontiguousarray(w, dtype=complex)
        self.xh = None if xh is None or not len(xh) else np.ascontiguousarray(xh, dtype=complex)
        self.yh = None if yh is None or not len(yh) else np.ascontiguousarray(yh, dtype=complex)
        self.xs = None if xs is None or not len(xs) else np.ascontiguousarray(xs, dtype=complex)
        self.ys = None if ys is None or not len(ys) else np.ascontiguousarray(ys, dtype=complex)
        self.name = name
        self.dim = self.h.shape[0]
        self._stepper = None

    @property
    def stepper(self):
        if self._stepper is None:
            self._stepper = DenseStepper(self.h, self.w, self.xh, self.yh, self.xs, self.ys)
        return self._stepper

    def apply(self, rho):
        return self.stepper.apply(rho)

    def step_power_series(self, rho, dt, eps, max_terms=200):
        return self.stepper.step_power_series(rho, dt, eps, max_terms)


class SuperopForm:
    """Generator whose gain term is an explicit map on vec(rho)."""

    def __init__(self, h, w, gain, name=""):
        self.h = np.ascontiguousarray(h, dtype=complex)
        self.w = None if w is None else np.ascontiguousarray(w, dtype=complex)
        self.gain = gain
        self.name = name
        self.dim = self.h.shape[0]

    def apply(self, rho):
        m = -1j * (self.h @ rho)
        out = m + m.conj().T
        if self.w is not None:
            m = -(self.w @ rho)
            out += m + m.conj().T
        if self.gain is not None:
            out += (self.gain @ rho.reshape(-1)).reshape(self.dim, self.dim)
        return out

    def step_power_series(self, rho, dt, eps, max_terms=200):
        rho = np.array(rho, dtype=complex, copy=True)
        d = rho.copy()
        for m in range(1, max_terms + 1):
            d = (dt / m) * self.apply(d)
            rho += d
            if np.linalg.norm(d) < eps:
                return m, rho
        return -1, rho


# ---------------------------------------------------------------------------
# Bohr-frequency masks


def gamma_mask(bath: BathModel, bohr):
    return bmod.spectral_density(bath, bohr)


def s_mask(bath: BathModel, bohr):
    return bmod.principal_density(bath, bohr)


def big_gamma_mask(bath: BathModel, bohr, t=np.inf):
    """Gamma(t) evaluated entrywise at the Bohr frequencies, de-duplicated."""
    if t is None or t == np.inf:
        return 0.5 * gamma_mask(bath, bohr) + 1j * s_mask(bath, bohr)
    flat = np.round(np.asarray(bohr, dtype=float).ravel(), 13)
    uniq, inv = np.unique(flat, return_inverse=True)
    if bath.kind == bmod.OHMIC_EXP:
        vals = bmod.half_fourier(bath, uniq, t)
    else:
        vals = np.array([bmod.half_fourier(bath, w, t) for w in uniq])
    return vals[inv].reshape(np.shape(bohr))


def filtered_operator(A, es: EigenSystem, bath: BathModel, t=np.inf):
    """A_f = A o Gamma*(t) with Gamma(t)_nm = Gamma_t(w_nm)."""
    A = np.asarray(A)
    if A.shape != (es.dim, es.dim):
        raise DimensionMismatch("operator does not match the eigensystem")
    return A * np.conj(big_gamma_mask(bath, es.bohr, t))


# ---------------------------------------------------------------------------
# Lamb shifts


def lamb_shift(coupling: CouplingSet, es: EigenSystem, variant="redfield", **kw):
    """Bath-induced Hermitian renormalization Sum_i K(w_ni, w_mi) A_ni A*_mi.

    variant: redfield | rwa | ule | dcg (tau=) | tdc (t=) | cg (T0=)
    """
    if variant == "redfield":
        return _lamb_filtered(coupling, es, t=np.inf)
    if variant == "tdc":
        return _lamb_filtered(coupling, es, t=kw["t"])
    if variant == "rwa":
        return _lamb_rwa(coupling, es)
    if variant == "ule":
        return _lamb_ule(coupling, es, tol=kw.get("tol", 1e-8))
    if variant == "dcg":
        return _lamb_kernel3(coupling, es, _dcg_unitary_eval(kw["tau"]))
    if variant == "cg":
        return _lamb_kernel3(coupling, es, _cg_unitary_eval(kw["T0"]))
    raise ValueError(f"unknown Lamb-shift variant {variant!r}")


def _lamb_filtered(coupling, es, t):
    """-(i/2) sum_k (A A_f^+ - A_f A^+); the implicit Redfield renormalization."""
    n = es.dim
    out = np.zeros((n, n), dtype=complex)
    for A, bath in zip(coupling.ops, coupling.baths):
        Af = filtered_operator(A, es, bath, t)
        out += -0.5j * (A @ Af.conj().T - Af @ A.conj().T)
    return 0.5 * (out + out.conj().T)


def _degeneracy_mask(es: EigenSystem):
    scale = max(np.abs(es.bohr).max(), 1.0)
    return (np.abs(es.bohr) < DEG_TOL * scale).astype(float)


def _lamb_rwa(coupling, es):
    """Frequency-matched kernel: only degenerate (n, m) pairs survive."""
    mask = _degeneracy_mask(es)
    n = es.dim
    out = np.zeros((n, n), dtype=complex)
    for A, bath in zip(coupling.ops, coupling.baths):
        sm = s_mask(bath, es.bohr)
        out += ((A * sm) @ A.conj().T) * mask
    return 0.5 * (out + out.conj().T)


def _ule_kernel_value(bath, a, b, tol):
    """-(1/2pi) PV int dW/W sqrt(gamma(W+a) gamma(W+b)) for a != b."""
    from scipy.integrate import quad

    def f(W):
        return np.sqrt(
            bmod.spectral_density(bath, W + a) * bmod.spectral_density(bath, W + b)
        )

    cap = 50.0 * bath.omega_c
    val = 0.0
    if a > 0 and b > 0:
        # subtract-the-singularity on a symmetric window around the pole
        eps_w = 0.9 * min(a, b, cap)
        f0 = f(0.0)
        val += quad(
            lambda W: (f(W) - f0) / W, -eps_w, eps_w,
            limit=200, epsabs=tol, epsrel=1e-8, points=[0.0],
        )[0]
        val += quad(lambda W: f(W) / W, eps_w, cap, limit=200, epsabs=tol)[0]
    else:
        lo = -min(a, b)  # support boundary: both arguments must be positive
        if lo < cap:
            val += quad(lambda W: f(W) / W, max(lo, 1e-14), cap, limit=200, epsabs=tol)[0]
    return -val / (2.0 * np.pi)


def _lamb_ule(coupling, es, tol=1e-8):
    """Principal-value kernel -(1/2pi) PV int dW/W sqrt(gamma(W+w) gamma(W+w')).

    One numerical integral per distinct frequency pair, cached across all
    operators sharing a bath; the diagonal w = w' uses the Kramers-Kronig
    closed form S(w).
    """
    n = es.dim
    out = np.zeros((n, n), dtype=complex)
    groups = {}
    for A, bath in zip(coupling.ops, coupling.baths):
        groups.setdefault((bath.kind, bath.g, bath.omega_c), (bath, []))[1].append(A)
    for bath, ops in groups.values():
        cache = {}

        def kern(w, wp):
            if abs(w - wp) <= DEG_TOL * max(abs(w), abs(wp), 1.0):
                return bmod.principal_density(bath, 0.5 * (w + wp))
            key = (round(min(w, wp), 12), round(max(w, wp), 12))
            if key not in cache:
                cache[key] = _ule_kernel_value(bath, key[0], key[1], tol)
            return cache[key]

        for A in ops:
            scale = max(np.abs(A).max(), 1e-300)
            nz = np.abs(A) > 1e-12 * scale
            for i in range(n):
                rows = np.where(nz[:, i])[0]  # n with A_ni != 0
                if rows.size == 0:
                    continue
                vals = A[rows, i]
                kmat = np.empty((rows.size, rows.size))
                for ai in range(rows.size):
                    for bi in range(ai, rows.size):
                        k = kern(es.bohr[rows[ai], i], es.bohr[rows[bi], i])
                        kmat[ai, bi] = k
                        kmat[bi, ai] = k
                np.add.at(
                    out, (rows[:, None], rows[None, :]),
                    kmat * (vals[:, None] * np.conj(vals)[None, :]),
                )
    return 0.5 * (out + out.conj().T)


def _dcg_unitary_eval(tau):
    def ev(bath, W1, W2):
        from .kernels import dcg_kernels

        _, h = dcg_kernels(bath, W1, W2, tau)
        return h

    return ev


def _cg_unitary_eval(T0):
    def ev(bath, W1, W2):
        from .kernels import cg_unitary_kernel

        return cg_unitary_kernel(bath, W1, W2, T0)

    return ev


def _lamb_kernel3(coupling, es, kernel_eval):
    """General two-frequency kernel contracted over the rank-3 Bohr tensor."""
    n = es.dim
    if n > 200:
        raise TooLarge("rank-3 Lamb-shift tensor would not fit in memory")
    W1 = np.broadcast_to(es.bohr[:, None, :], (n, n, n))  # w_{ni}
    W2 = np.broadcast_to(es.bohr[None, :, :], (n, n, n))  # w_{mi}
    out = np.zeros((n, n), dtype=complex)
    for A, bath in zip(coupling.ops, coupling.baths):
        K3 = kernel_eval(bath, np.ascontiguousarray(W1), np.ascontiguousarray(W2))
        out += np.einsum("ni,mi,nmi->nm", A, A.conj(), K3)
    return 0.5 * (out + out.conj().T)


# ---------------------------------------------------------------------------
# Redfield and GAME


@dataclass(frozen=True)
class RedfieldForm:
    """Bare Hamiltonian plus (A, A_f) pairs; not completely positive."""

    h0: np.ndarray
    pairs: tuple
    name: str = "redfield"

    def runtime(self, mode="bare") -> DenseForm:
        """mode='bare': four-term writing with H0; mode='renormalized':
        the algebraically identical kernel writing with H0 + H_L."""
        As = [a for a, _ in self.pairs]
        Afs = [af for _, af in self.pairs]
        xh = np.stack([af.conj().T for af in Afs])
        yh = np.stack(As)
        if mode == "bare":
            w = sum(a @ af.conj().T for a, af in self.pairs)
            return DenseForm(self.h0, w, xh, yh, None, None, name=self.name)
        if mode != "renormalized":
            raise ValueError("mode must be 'bare' or 'renormalized'")
        hl = np.zeros_like(self.h0)
        w = np.zeros_like(np.asarray(self.h0, dtype=complex))
        for a, af in self.pairs:
            hl = hl + (-0.5j) * (a @ af.conj().T - af @ a.conj().T)
            w = w + 0.5 * (af @ a.conj().T + a @ af.conj().T)
        return DenseForm(self.h0 + hl, w, xh, yh, None, None, name=self.name)


@dataclass(frozen=True)
class LindbladForm:
    """Renormalized Hamiltonian plus generator matrices (GKSL structure)."""

    h_eff: np.ndarray
    lindblad_ops: tuple
    name: str = "lindblad"

    def runtime(self) -> DenseForm:
        ls = [np.asarray(l, dtype=complex) for l in self.lindblad_ops]
        w = 0.5 * sum(l @ l.conj().T for l in ls)
        xs = np.stack([l.conj().T for l in ls])
        ys = np.stack(ls)
        return DenseForm(self.h_eff, w, None, None, xs, ys, name=self.name)


def redfield_generator(coupling: CouplingSet, es: EigenSystem, t=np.inf, name=None) -> RedfieldForm:
    """Asymptotic (t=inf) or finite-t filtered-operator Redfield equation."""
    h0 = np.diag(es.energies).astype(complex)
    pairs = tuple(
        (A, filtered_operator(A, es, bath, t))
        for A, bath in zip(coupling.ops, coupling.baths)
    )
    return RedfieldForm(h0=h0, pairs=pairs, name=name or "redfield")


def game_generator(coupling: CouplingSet, es: EigenSystem, t=np.inf, h_eff=None,
                   name=None) -> LindbladForm:
    """Geometric-arithmetic master equation: L_k = A_k o sqrt(gamma).

    h_eff defaults to H0 plus the implicit Redfield renormalization (its
    finite-t version in TDC mode, where sqrt of a transiently negative
    gamma_t is taken on the principal branch).
    """
    if h_eff is None:
        h_eff = np.diag(es.energies) + lamb_shift(
            coupling, es, "redfield" if t == np.inf else "tdc", t=t
        )
    ls = []
    for A, bath in zip(coupling.ops, coupling.baths):
        gm = 2.0 * np.real(big_gamma_mask(bath, es.bohr, t))
        ls.append(A * np.sqrt(gm.astype(complex)))
    return LindbladForm(h_eff=np.asarray(h_eff, dtype=complex), lindblad_ops=tuple(ls),
                        name=name or ("game" if t == np.inf else "tdc-game"))


def perlind_generator(coupling, es, rwa_lamb=False, name=None) -> LindbladForm:
    """GAME dissipator without the implicit Lamb shift (optionally with the
    frequency-matched one bolted on)."""
    h_eff = np.diag(es.energies).astype(complex)
    if rwa_lamb:
        h_eff = h_eff + lamb_shift(coupling, es, "rwa")
    g = game_generator(coupling, es, h_eff=h_eff)
    return LindbladForm(h_eff=h_eff, lindblad_ops=g.lindblad_ops,
                        name=name or ("perlind+rwa-ls" if rwa_lamb else "perlind"))


def ule_generator(coupling, es, tol=1e-8, name=None) -> LindbladForm:
    """Same sqrt-SD dissipator with the principal-value-integral Lamb shift."""
    h_eff = np.diag(es.energies) + lamb_shift(coupling, es, "ule", tol=tol)
    g = game_generator(coupling, es, h_eff=h_eff)
    return LindbladForm(h_eff=h_eff, lindblad_ops=g.lindblad_ops, name=name or "ule")


# ---------------------------------------------------------------------------
# frequency-matched equations (RWA, PRWA) via a sparse gain superoperator


def _frequency_classes(bohr):
    """Cluster all Bohr frequencies; returns (class_id matrix, class means)."""
    flat = np.asarray(bohr, dtype=float).ravel()
    order = np.argsort(flat, kind="stable")
    scale = max(np.abs(flat).max(), 1.0)
    tol = DEG_TOL * scale
    cid = np.empty(flat.size, dtype=np.int64)
    means = []
    current = 0
    anchor = None
    acc, cnt = 0.0, 0
    for idx in order:
        v = flat[idx]
        if anchor is None or v - anchor > tol:
            if cnt:
                means.append(acc / cnt)
            current = len(means)
            acc, cnt = 0.0, 0
            anchor = v
        cid[idx] = current
        acc += v
        cnt += 1
    if cnt:
        means.append(acc / cnt)
    return cid.reshape(np.shape(bohr)), np.asarray(means)


def _uniform_bins(bohr, n_bins):
    flat = np.asarray(bohr, dtype=float).ravel()
    if flat.size == 0:
        raise EmptySpectrum("no Bohr frequencies to bin")
    lo, hi = flat.min(), flat.max()
    if hi <= lo:
        return np.zeros(np.shape(bohr), dtype=np.int64), np.array([lo])
    width = (hi - lo) / n_bins
    ids = np.minimum(((flat - lo) / width).astype(np.int64), n_bins - 1)
    means = np.array([flat[ids == b].mean() if (ids == b).any() else lo + (b + 0.5) * width
                      for b in range(n_bins)])
    return ids.reshape(np.shape(bohr)), means


def _group_slices(keys):
    """Slices of equal-key runs after a stable sort; yields (order, bounds)."""
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    bounds = np.flatnonzero(np.r_[True, sorted_keys[1:] != sorted_keys[:-1], True])
    return order, bounds


def _binned_lindblad_superop(coupling, es, class_ids, class_freqs):
    """Sparse gain sum_c (A o M_c sqrt(g_c))^+ rho (A o M_c sqrt(g_c)) plus the
    matching loss matrix, one generator per (op, frequency class)."""
    n = es.dim
    rows, cols, data = [], [], []
    loss = np.zeros((n, n), dtype=complex)
    for A, bath in zip(coupling.ops, coupling.baths):
        wts = np.sqrt(bmod.spectral_density(bath, class_freqs))
        L = A * wts[class_ids]
        nz_i, nz_j = np.nonzero(np.abs(L) > 1e-15 * max(np.abs(L).max(), 1e-300))
        if nz_i.size == 0:
            continue
        cvals = class_ids[nz_i, nz_j]
        lvals = L[nz_i, nz_j]
        order, bounds = _group_slices(cvals)
        for a, b in zip(bounds[:-1], bounds[1:]):
            sel = order[a:b]
            ii, nn, lv = nz_i[sel], nz_j[sel], lvals[sel]
            # gain rows (n,m), cols (i,j): conj(L_in) L_jm
            rows.append((nn[:, None] * n + nn[None, :]).ravel())
            cols.append((ii[:, None] * n + ii[None, :]).ravel())
            data.append((np.conj(lv)[:, None] * lv[None, :]).ravel())
        # loss D = sum_c L_c L_c^+: entries pair within one class AND column
        pair_key = cvals * n + nz_j
        order, bounds = _group_slices(pair_key)
        for a, b in zip(bounds[:-1], bounds[1:]):
            sel = order[a:b]
            ii, lv = nz_i[sel], lvals[sel]
            np.add.at(loss, (ii[:, None], ii[None, :]), lv[:, None] * np.conj(lv)[None, :])
    if rows:
        gain = sp.coo_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n * n, n * n),
        ).tocsr()
    else:
        gain = sp.csr_matrix((n * n, n * n), dtype=complex)
    return gain, loss


def rwa_generator(coupling, es, name=None) -> SuperopForm:
    """Davies-Lindblad equation: one generator per exact frequency class."""
    cid, means = _frequency_classes(es.bohr)
    gain, loss = _binned_lindblad_superop(coupling, es, cid, means)
    h_eff = np.diag(es.energies) + lamb_shift(coupling, es, "rwa")
    return SuperopForm(h_eff, 0.5 * loss, gain, name=name or "rwa")


def prwa_generator(coupling, es, n_bins, name=None) -> SuperopForm:
    """Partial RWA: uniform frequency bins, flat spectral density per bin,
    full (unbinned) Redfield Lamb shift."""
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    cid, means = _uniform_bins(es.bohr, n_bins)
    gain, loss = _binned_lindblad_superop(coupling, es, cid, means)
    h_eff = np.diag(es.energies) + lamb_shift(coupling, es, "redfield")
    return SuperopForm(h_eff, 0.5 * loss, gain, name=name or f"prwa({n_bins})")


# ---------------------------------------------------------------------------
# sinc-convolved kernels (CG-Redfield, DCG) via a dense gain superoperator


def _kernel_gain_and_loss(coupling, es, kernel_eval):
    """Dense gain superop S[(n,m),(i,j)] = sum_k A*_in A_jm K(w_in, w_jm)
    and the loss matrix W_K[i,m] = sum_kj A_ij A*_mj K(w_mj, w_ij)."""
    n = es.dim
    if n > SUPEROP_MAX_DIM:
        raise TooLarge(
            f"dense gain superoperator needs N <= {SUPEROP_MAX_DIM}, got {n}"
        )
    bohr = es.bohr
    Wa = -bohr  # Wa[n, i] = w_{ i n } = E_i - E_n
    gain = np.zeros((n * n, n * n), dtype=complex)
    loss = np.zeros((n, n), dtype=complex)
    cache = {}
    for A, bath in zip(coupling.ops, coupling.baths):
        key = (bath.kind, bath.g, bath.omega_c)
        if key not in cache:
            # K4[n,m,i,j] = K(w_in, w_jm); K2[i,m,j] = K(w_mj, w_ij)
            K4 = kernel_eval(bath, Wa[:, None, :, None], Wa[None, :, None, :])
            K2 = kernel_eval(bath, bohr[None, :, :], bohr[:, None, :])
            cache[key] = (K4, K2)
        K4, K2 = cache[key]
        P = A.conj().T  # P[n, i] = A*_in
        Q = A.T         # Q[m, j] = A_jm
        gain += np.einsum("ni,mj,nmij->nmij", P, Q, K4).reshape(n * n, n * n)
        loss += np.einsum("ij,mj,imj->im", A, A.conj(), K2)
    return gain, loss


def _dcg_dissipative_eval(tau):
    def ev(bath, W1, W2):
        from .kernels import dcg_kernels

        g, _ = dcg_kernels(bath, W1, W2, tau)
        return g

    return ev


def _cg_dissipative_eval(T0):
    def ev(bath, W1, W2):
        from .kernels import cg_dissipative_kernel

        return cg_dissipative_kernel(bath, W1, W2, T0)

    return ev


def cg_redfield_generator(coupling, es, T0, name=None) -> SuperopForm:
    """Coarse-grained Redfield: G sinc kernel + sinc-weighted Lamb shift."""
    if T0 < 0:
        raise ValueError("T0 must be nonnegative")
    gain, loss = _kernel_gain_and_loss(coupling, es, _cg_dissipative_eval(T0))
    h_eff = np.diag(es.energies) + lamb_shift(coupling, es, "cg", T0=T0)
    return SuperopForm(h_eff, 0.5 * loss.conj().T, gain, name=name or f"cg-redfield({T0})")


def dcg_generator(coupling, es, tau, name=None) -> SuperopForm:
    """Dynamically coarse-grained equation: positive-semidefinite sinc-convolved
    kernel, finite-time densities, O(N^2) coefficient evaluations."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    gain, loss = _kernel_gain_and_loss(coupling, es, _dcg_dissipative_eval(tau))
    h_eff = np.diag(es.energies) + lamb_shift(coupling, es, "dcg", tau=tau)
    return SuperopForm(h_eff, 0.5 * loss.conj().T, gain, name=name or f"dcg({tau})")


# ---------------------------------------------------------------------------
# time-dependent-coefficient forms


class TdcForm:
    """Time-dependent-coefficient generator with in-place mask refresh.

    kind='redfield' keeps the bare H0 and refreshes the filtered operators;
    kind='game' refreshes the Lamb shift and sqrt(gamma_t) generators.
    Coefficient tables are precomputed on the stage-time grid when the
    exponential-cutoff closed form is available.
    """

    def __init__(self, coupling: CouplingSet, es: EigenSystem, kind: str):
        if kind not in ("redfield", "game"):
            raise ValueError(kind)
        self.kind = kind
        self.coupling = coupling
        self.es = es
        n = es.dim
        k = len(coupling.ops)
        self.name = "tdc-" + kind
        self.dim = n
        self.h = np.ascontiguousarray(np.diag(es.energies), dtype=complex)
        self.w = np.zeros((n, n), dtype=complex)
        self.xh = np.zeros((k, n, n), dtype=complex) if kind == "redfield" else None
        self.yh = np.stack(coupling.ops) if kind == "redfield" else None
        self.xs = np.zeros((k, n, n), dtype=complex) if kind == "game" else None
        self.ys = np.zeros((k, n, n), dtype=complex) if kind == "game" else None
        self._stepper = None
        self._t = None
        # distinct Bohr values for the coefficient lookup
        flat = np.round(es.bohr.ravel(), 13)
        self._uniq, self._inv = np.unique(flat, return_inverse=True)
        self._grid_t = None
        self._grid_vals = None  # per bath: (n_uniq, n_times)

    @property
    def stepper(self):
        if self._stepper is None:
            self._stepper = DenseStepper(self.h, self.w, self.xh, self.yh, self.xs, self.ys)
        return self._stepper

    def prepare(self, times):
        """Tabulate Gamma_t on the stage-time grid (fast for the
        exponential-cutoff closed form, quadrature otherwise)."""
        times = np.asarray(times, dtype=float)
        self._grid_vals = {}
        for bath in set(self.coupling.baths):
            tab = np.empty((self._uniq.size, times.size), dtype=complex)
            for i, w in enumerate(self._uniq):
                if bath.kind == bmod.OHMIC_EXP:
                    tab[i] = _gamma_t_ohmic_over_times(bath, w, times)
                else:
                    tab[i] = np.array([bmod.half_fourier(bath, w, t) for t in times])
            self._grid_vals[(bath.kind, bath.g, bath.omega_c)] = tab
        self._grid_t = times

    def _gamma_matrix(self, bath, t):
        if self._grid_t is not None:
            idx = int(np.searchsorted(self._grid_t, t))
            idx = min(max(idx - 1, 0), self._grid_t.size - 1)
            for j in (idx, idx + 1):
                if j < self._grid_t.size and abs(self._grid_t[j] - t) <= 1e-9 * max(abs(t), 1.0):
                    col = self._grid_vals[(bath.kind, bath.g, bath.omega_c)][:, j]
                    return col[self._inv].reshape(self.es.bohr.shape)
        return big_gamma_mask(bath, self.es.bohr, t)

    def refresh(self, t):
        """Write the coefficients at time t into the stepper's buffers."""
        if self._t is not None and t == self._t:
            return
        self._t = t
        n = self.dim
        es = self.es
        if self.kind == "redfield":
            w_acc = np.zeros((n, n), dtype=complex)
            for k, (A, bath) in enumerate(zip(self.coupling.ops, self.coupling.baths)):
                Af = A * np.conj(self._gamma_matrix(bath, t))
                self.xh[k][...] = Af.conj().T
                w_acc += A @ Af.conj().T
            self.w[...] = w_acc
        else:
            hl = np.zeros((n, n), dtype=complex)
            w_acc = np.zeros((n, n), dtype=complex)
            for k, (A, bath) in enumerate(zip(self.coupling.ops, self.coupling.baths)):
                gm = self._gamma_matrix(bath, t)
                Af = A * np.conj(gm)
                hl += -0.5j * (A @ Af.conj().T - Af @ A.conj().T)
                L = A * np.sqrt((2.0 * gm.real).astype(complex))
                self.xs[k][...] = L.conj().T
                self.ys[k][...] = L
                w_acc += 0.5 * (L @ L.conj().T)
            self.h[...] = np.diag(es.energies) + 0.5 * (hl + hl.conj().T)
            self.w[...] = w_acc

    def apply(self, rho, t):
        self.refresh(t)
        return self.stepper.apply(rho)


def _gamma_t_ohmic_over_times(bath, w, times):
    """Closed-form Gamma_t(w) for one frequency, vectorized over times."""
    from .special import ei, ei_complex

    g, wc = bath.g, bath.omega_c
    times = np.asarray(times, dtype=float)
    out = np.empty(times.size, dtype=complex)
    tz = times == 0.0
    out[tz] = 0.0
    ts = times[~tz]
    if ts.size:
        if w == 0.0:
            zt = wc * ts
            out[~tz] = g * wc * zt * (1.0 - 1j * zt) / (1.0 + zt * zt)
        else:
            x = w / wc
            bracket = (
                float(ei(x))
                - ei_complex(x + 1j * w * ts)
                - 1j * np.pi * (1.0 if x < 0 else 0.0)
            )
            out[~tz] = -1j * g * wc * (
                1.0 - np.exp(1j * w * ts) / (1.0 + 1j * wc * ts) - x * np.exp(-x) * bracket
            )
    return out


def tdc_redfield_generator(coupling, es) -> TdcForm:
    return TdcForm(coupling, es, "redfield")


def tdc_game_generator(coupling, es) -> TdcForm:
    return TdcForm(coupling, es, "game")
