# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: dense master-equation right-hand sides, the
power-series stepper, and the Volterra trapezoid convolution.

Semantics are identical to qme._purepy; the pure-Python module is the
reference implementation and the equivalence is asserted in the tests.
"""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport zdotu, zgemm

cnp.import_array()

ctypedef double complex zdouble


cdef void _gemm_nn(zdouble alpha, zdouble* a, zdouble* b, zdouble beta,
                   zdouble* c, int n) noexcept nogil:
    # C-order matrices: compute C = alpha * A @ B + beta * C by passing the
    # operands swapped to Fortran-order BLAS.
    cdef char tn = b'N'
    zgemm(&tn, &tn, &n, &n, &n, &alpha, b, &n, a, &n, &beta, c, &n)


cdef void _add_adjoint(zdouble* m, zdouble* out, int n) noexcept nogil:
    # out += m + m^dagger
    cdef int i, j
    for i in range(n):
        for j in range(n):
            out[i * n + j] += m[i * n + j] + m[j * n + i].conjugate()


cdef void _add(zdouble* m, zdouble* out, int n) noexcept nogil:
    cdef int i
    for i in range(n * n):
        out[i] += m[i]


cdef double _fro_norm(zdouble* m, int n) noexcept nogil:
    cdef double acc = 0.0
    cdef int i
    for i in range(n * n):
        acc += m[i].real * m[i].real + m[i].imag * m[i].imag
    return acc ** 0.5


cdef class DenseStepper:
    """Applies d(rho)/dt = -i[H, rho] - (W rho + rho W^+)
    + sum_k (Xh_k rho Yh_k + h.c.) + sum_k (Xs_k rho Ys_k)
    and steps the power series of exp(L dt)."""

    cdef object _keep
    cdef zdouble* h
    cdef zdouble* w
    cdef zdouble* xh
    cdef zdouble* yh
    cdef zdouble* xs
    cdef zdouble* ys
    cdef zdouble* bd   # power-series direction
    cdef zdouble* bu   # power-series RHS output
    cdef zdouble* bt   # temp 1
    cdef zdouble* bv   # temp 2
    cdef int n, kh, ks

    def __init__(self, h, w, xh, yh, xs, ys):
        arrays = []

        def keep(a, shape):
            a = np.ascontiguousarray(a, dtype=np.complex128).reshape(shape)
            arrays.append(a)
            return a

        n = np.asarray(h).shape[0]
        self.n = n
        self.kh = 0 if xh is None else len(xh)
        self.ks = 0 if xs is None else len(xs)
        hh = keep(h, (n, n))
        ww = keep(w, (n, n)) if w is not None else None
        xha = keep(xh, (self.kh, n, n)) if self.kh else None
        yha = keep(yh, (self.kh, n, n)) if self.kh else None
        xsa = keep(xs, (self.ks, n, n)) if self.ks else None
        ysa = keep(ys, (self.ks, n, n)) if self.ks else None
        bufs = [np.empty((n, n), dtype=np.complex128) for _ in range(4)]
        arrays.extend(bufs)
        self._keep = arrays
        self.h = <zdouble*> cnp.PyArray_DATA(<cnp.ndarray> hh)
        self.w = <zdouble*> cnp.PyArray_DATA(<cnp.ndarray> ww) if ww is not None else NULL
        self.xh = <zdouble*> cnp.PyArray_DATA(<cnp.ndarray> xha) if xha is not None else NULL
        self.yh = <zdouble*> cnp.PyArray_DATA(<cnp.ndarray> yha) if yha is not None else NULL
        self.xs = <zdouble*> cnp.PyArray_DATA(<cnp.ndarray> xsa) if xsa is not None else NULL
        self.ys = <zdouble*> cnp.PyArray_DATA(<cnp.ndarray> ysa) if ysa is not None else NULL
        self.bd = <zdouble*> cnp.PyArray_DATA(<cnp.ndarray> bufs[0])
        self.bu = <zdouble*> cnp.PyArray_DATA(<cnp.ndarray> bufs[1])
        self.bt = <zdouble*> cnp.PyArray_DATA(<cnp.ndarray> bufs[2])
        self.bv = <zdouble*> cnp.PyArray_DATA(<cnp.ndarray> bufs[3])

    cdef void _rhs(self, zdouble* rho, zdouble* out) noexcept nogil:
        # out must not alias rho, bt or bv
        cdef int n = self.n
        cdef int nn = n * n
        cdef int k, i
        cdef zdouble mi = -1j
        cdef zdouble one = 1.0
        cdef zdouble zero = 0.0
        for i in range(nn):
            out[i] = 0.0
        _gemm_nn(mi, self.h, rho, zero, self.bt, n)
        _add_adjoint(self.bt, out, n)
        if self.w != NULL:
            _gemm_nn(-one, self.w, rho, zero, self.bt, n)
            _add_adjoint(self.bt, out, n)
        for k in range(self.kh):
            _gemm_nn(one, self.xh + k * nn, rho, zero, self.bt, n)
            _gemm_nn(one, self.bt, self.yh + k * nn, zero, self.bv, n)
            _add_adjoint(self.bv, out, n)
        for k in range(self.ks):
            _gemm_nn(one, self.xs + k * nn, rho, zero, self.bt, n)
            _gemm_nn(one, self.bt, self.ys + k * nn, zero, self.bv, n)
            _add(self.bv, out, n)

    def apply(self, rho):
        cdef cnp.ndarray r = np.ascontiguousarray(rho, dtype=np.complex128)
        cdef cnp.ndarray out = np.empty((self.n, self.n), dtype=np.complex128)
        self._rhs(<zdouble*> cnp.PyArray_DATA(r), <zdouble*> cnp.PyArray_DATA(out))
        return out

    def step_power_series(self, rho, double dt, double eps, int max_terms):
        """One step of rho <- sum_m (dt L)^m rho / m!; returns (terms, rho')
        with terms = -1 if the series failed to reach eps within max_terms."""
        cdef cnp.ndarray r = np.array(rho, dtype=np.complex128, copy=True, order="C")
        cdef zdouble* rp = <zdouble*> cnp.PyArray_DATA(r)
        cdef zdouble* d = self.bd
        cdef zdouble* u = self.bu
        cdef int nn = self.n * self.n
        cdef int m, i
        cdef double scale
        cdef int used = -1
        with nogil:
            for i in range(nn):
                d[i] = rp[i]
            for m in range(1, max_terms + 1):
                self._rhs(d, u)
                scale = dt / m
                for i in range(nn):
                    d[i] = scale * u[i]
                    rp[i] = rp[i] + d[i]
                if _fro_norm(d, self.n) < eps:
                    used = m
                    break
        return used, r


def volterra_run(f1, f2, phase, double dt, int nsteps, int mem):
    """Predictor-corrector trapezoid solution of the two-amplitude
    Volterra system; returns (c1, c2) on the time grid.

    f1, f2 : kernel samples f(j dt), length >= min(nsteps, mem) + 1
    phase  : e^{i w12 t_n}, length nsteps + 1
    mem    : convolution memory in steps (kernel support truncation)
    """
    cdef cnp.ndarray[zdouble, ndim=1] f1a = np.ascontiguousarray(f1, dtype=np.complex128)
    cdef cnp.ndarray[zdouble, ndim=1] f2a = np.ascontiguousarray(f2, dtype=np.complex128)
    cdef cnp.ndarray[zdouble, ndim=1] ph = np.ascontiguousarray(phase, dtype=np.complex128)
    cdef int L = min(nsteps, mem)
    # reversed kernels f[L], f[L-1], ..., f[1] so the dot runs on unit strides
    cdef cnp.ndarray[zdouble, ndim=1] f1r = np.ascontiguousarray(f1a[1:L + 1][::-1])
    cdef cnp.ndarray[zdouble, ndim=1] f2r = np.ascontiguousarray(f2a[1:L + 1][::-1])
    cdef cnp.ndarray[zdouble, ndim=1] c1 = np.zeros(nsteps + 1, dtype=np.complex128)
    cdef cnp.ndarray[zdouble, ndim=1] c2 = np.zeros(nsteps + 1, dtype=np.complex128)
    c1[0] = 1.0
    cdef zdouble g1 = 0.0, g2 = 0.0
    cdef zdouble s1, s2, c1p, c2p, g1p, g2p, fn1, fn2, fp1, fp2
    cdef zdouble f10 = f1a[0], f20 = f2a[0]
    cdef int n, J, one_int = 1
    cdef zdouble* c1p_ = &c1[0]
    cdef zdouble* c2p_ = &c2[0]
    cdef zdouble* f1r_ = &f1r[0]
    cdef zdouble* f2r_ = &f2r[0]
    with nogil:
        for n in range(nsteps):
            fn1 = -g1 - ph[n] * g2
            fn2 = -g2 - ph[n].conjugate() * g1
            c1p = c1[n] + dt * fn1
            c2p = c2[n] + dt * fn2
            J = n + 1 if n + 1 < L else L
            # S = sum_{j=1..J} f[j] c[n+1-j], with the trapezoid half-weight
            # applied to the oldest retained sample
            s1 = zdotu(&J, f1r_ + (L - J), &one_int, c1p_ + (n + 1 - J), &one_int)
            s2 = zdotu(&J, f2r_ + (L - J), &one_int, c2p_ + (n + 1 - J), &one_int)
            s1 = s1 - 0.5 * f1a[J] * c1[n + 1 - J]
            s2 = s2 - 0.5 * f2a[J] * c2[n + 1 - J]
            g1p = dt * (0.5 * f10 * c1p + s1)
            g2p = dt * (0.5 * f20 * c2p + s2)
            fp1 = -g1p - ph[n + 1] * g2p
            fp2 = -g2p - ph[n + 1].conjugate() * g1p
            c1[n + 1] = c1[n] + 0.5 * dt * (fn1 + fp1)
            c2[n + 1] = c2[n] + 0.5 * dt * (fn2 + fp2)
            g1 = dt * (0.5 * f10 * c1[n + 1] + s1)
            g2 = dt * (0.5 * f20 * c2[n + 1] + s2)
    return np.asarray(c1), np.asarray(c2)
