# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops; see ``_kernels_py`` for the reference implementation."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, cos, sin

cnp.import_array()


cdef inline double complex _cexp(double complex z) nogil:
    cdef double r = exp(z.real)
    return r * cos(z.imag) + 1j * r * sin(z.imag)


cdef void _fill_block(double complex alpha, int L, double complex[:, ::1] D) nogil:
    cdef int m, n
    cdef double complex ac = alpha.conjugate()
    D[0, 0] = exp(-0.5 * (alpha.real * alpha.real + alpha.imag * alpha.imag))
    for m in range(1, L):
        D[m, 0] = alpha * D[m - 1, 0] / sqrt(<double>m)
    for n in range(1, L):
        D[0, n] = -ac * D[0, n - 1] / sqrt(<double>n)
        for m in range(1, L):
            D[m, n] = (sqrt(<double>m) * D[m - 1, n - 1] - ac * D[m, n - 1]) / sqrt(<double>n)


def displacement_block(double complex alpha, int L):
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.empty((L, L), dtype=np.complex128)
    cdef double complex[:, ::1] D = out
    with nogil:
        _fill_block(alpha, L, D)
    return out


def weyl_trace_grid(F, a, b):
    cdef const double complex[:, ::1] Fv = np.ascontiguousarray(F, dtype=np.complex128)
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef int L = Fv.shape[0]
    cdef Py_ssize_t k, npts = av.shape[0]
    cdef int m, n
    cdef double complex acc
    cdef double s2 = sqrt(2.0)
    out = np.empty(npts, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef double complex[:, ::1] D = np.empty((L, L), dtype=np.complex128)
    with nogil:
        for k in range(npts):
            _fill_block((-bv[k] + 1j * av[k]) / s2, L, D)
            acc = 0
            for m in range(L):
                for n in range(L):
                    acc = acc + Fv[n, m] * D[m, n]
            ov[k] = acc
    return out


def translate_trace_grid(F, G, a, b):
    cdef const double complex[:, ::1] Fv = np.ascontiguousarray(F, dtype=np.complex128)
    cdef const double complex[:, ::1] Gv = np.ascontiguousarray(G, dtype=np.complex128)
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef int L = Fv.shape[0]
    cdef Py_ssize_t k, npts = av.shape[0]
    cdef int i, j, p, q
    cdef double complex acc, inner
    cdef double s2 = sqrt(2.0)
    out = np.empty(npts, dtype=np.complex128)
    cdef double complex[::1] ov = out
    cdef double complex[:, ::1] D = np.empty((L, L), dtype=np.complex128)
    cdef double complex[:, ::1] GD = np.empty((L, L), dtype=np.complex128)
    with nogil:
        for k in range(npts):
            _fill_block((-bv[k] + 1j * av[k]) / s2, L, D)
            # GD = G @ D
            for p in range(L):
                for i in range(L):
                    inner = 0
                    for q in range(L):
                        inner = inner + Gv[p, q] * D[q, i]
                    GD[p, i] = inner
            # tr(F D^H G D) = sum_{i,j} F[i,j] * sum_p conj(D[p,j]) GD[p,i]
            acc = 0
            for i in range(L):
                for j in range(L):
                    inner = 0
                    for p in range(L):
                        inner = inner + D[p, j].conjugate() * GD[p, i]
                    acc = acc + Fv[i, j] * inner
            ov[k] = acc
    return out


def gaussian_gram(points, mean, cov, form):
    cdef const double[:, ::1] X = np.ascontiguousarray(points, dtype=np.float64)
    cdef const double[::1] m = np.ascontiguousarray(mean, dtype=np.float64)
    cdef const double[:, ::1] A = np.ascontiguousarray(cov, dtype=np.float64)
    cdef const double[:, ::1] S = np.ascontiguousarray(form, dtype=np.float64)
    cdef Py_ssize_t K = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t k, l, i, j
    cdef double quad, lin, tw, di
    out = np.empty((K, K), dtype=np.complex128)
    cdef double complex[:, ::1] M = out
    with nogil:
        for k in range(K):
            for l in range(K):
                quad = 0.0
                lin = 0.0
                tw = 0.0
                for i in range(d):
                    di = X[l, i] - X[k, i]
                    lin = lin + m[i] * di
                    for j in range(d):
                        quad = quad + di * A[i, j] * (X[l, j] - X[k, j])
                        tw = tw + X[k, i] * S[i, j] * X[l, j]
                M[k, l] = _cexp(-0.5 * quad + 1j * (lin - 0.5 * tw))
    return out
