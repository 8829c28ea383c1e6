# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Same signatures and semantics as ``_pykernels``."""
import numpy as np

cimport cython
from libc.stdlib cimport malloc, free

ctypedef double complex cplx

cdef double PIVOT_TOL = 1e-12


cdef inline double abs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


def offdiag_energy(const cplx[:, :, ::1] G):
    cdef Py_ssize_t T = G.shape[0], K = G.shape[1]
    out = np.zeros((T, K), dtype=np.float64)
    cdef double[:, ::1] e = out
    cdef Py_ssize_t t, i, j
    with nogil:
        for t in range(T):
            for i in range(K):
                for j in range(K):
                    if i != j:
                        e[t, j] += abs2(G[t, i, j])
    return out


def tridiag_inverse(const cplx[:, :, ::1] D):
    cdef Py_ssize_t T = D.shape[0], K = D.shape[1]
    out = np.zeros((T, K, K), dtype=np.complex128)
    okarr = np.ones(T, dtype=np.bool_)
    cdef cplx[:, :, ::1] X = out
    cdef unsigned char[::1] ok = okarr.view(np.uint8)
    cdef Py_ssize_t t, i, j
    cdef cplx piv, low
    cdef cplx *cp = <cplx *> malloc(K * sizeof(cplx))
    if cp == NULL:
        raise MemoryError()
    try:
        with nogil:
            for t in range(T):
                for i in range(K):
                    X[t, i, i] = 1.0
                piv = D[t, 0, 0]
                if abs2(piv) < PIVOT_TOL * PIVOT_TOL:
                    ok[t] = 0
                    continue
                cp[0] = D[t, 0, 1] / piv if K > 1 else 0
                for j in range(K):
                    X[t, 0, j] = X[t, 0, j] / piv
                for i in range(1, K):
                    low = D[t, i, i - 1]
                    piv = D[t, i, i] - low * cp[i - 1]
                    if abs2(piv) < PIVOT_TOL * PIVOT_TOL:
                        ok[t] = 0
                        break
                    cp[i] = D[t, i, i + 1] / piv if i < K - 1 else 0
                    for j in range(K):
                        X[t, i, j] = (X[t, i, j] - low * X[t, i - 1, j]) / piv
                if not ok[t]:
                    continue
                for i in range(K - 2, -1, -1):
                    for j in range(K):
                        X[t, i, j] = X[t, i, j] - cp[i] * X[t, i + 1, j]
    finally:
        free(cp)
    return out, okarr


def first_order_matrix(const cplx[:, :, ::1] G, const cplx[:, :, ::1] Dinv):
    cdef Py_ssize_t T = G.shape[0], K = G.shape[1]
    out = np.empty((T, K, K), dtype=np.complex128)
    cdef cplx[:, :, ::1] P = out
    cdef Py_ssize_t t, i, j, n
    cdef cplx acc
    cdef cplx *tmp = <cplx *> malloc(K * K * sizeof(cplx))
    if tmp == NULL:
        raise MemoryError()
    try:
        with nogil:
            for t in range(T):
                # tmp = Dinv G
                for i in range(K):
                    for j in range(K):
                        acc = 0
                        for n in range(K):
                            acc = acc + Dinv[t, i, n] * G[t, n, j]
                        tmp[i * K + j] = acc
                # P = 2 Dinv - tmp Dinv
                for i in range(K):
                    for j in range(K):
                        acc = 0
                        for n in range(K):
                            acc = acc + tmp[i * K + n] * Dinv[t, n, j]
                        P[t, i, j] = 2.0 * Dinv[t, i, j] - acc
    finally:
        free(tmp)
    return out


def precoder_stats(const cplx[:, :, ::1] G, const cplx[:, :, ::1] P):
    cdef Py_ssize_t T = G.shape[0], K = G.shape[1]
    power_arr = np.empty(T, dtype=np.float64)
    sig_arr = np.empty((T, K), dtype=np.float64)
    intf_arr = np.empty((T, K), dtype=np.float64)
    cdef double[::1] power = power_arr
    cdef double[:, ::1] sig = sig_arr
    cdef double[:, ::1] intf = intf_arr
    cdef Py_ssize_t t, i, j, n
    cdef cplx f
    cdef double pw, it
    with nogil:
        for t in range(T):
            pw = 0.0
            for i in range(K):
                it = 0.0
                for j in range(K):
                    f = 0
                    for n in range(K):
                        f = f + G[t, i, n] * P[t, n, j]
                    # Re(conj(P_ij) F_ij)
                    pw = pw + P[t, i, j].real * f.real + P[t, i, j].imag * f.imag
                    if i == j:
                        sig[t, i] = abs2(f)
                    else:
                        it = it + abs2(f)
                intf[t, i] = it
            power[t] = pw
    return power_arr, sig_arr, intf_arr
