# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; same signatures as ``nfdof._kernels_py``."""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport sqrt, cos, sin, M_PI

cnp.import_array()


def fresnel_matrix(const double[:, ::1] points, const double[::1] u,
                   const double[::1] r, double lam, int num_threads=1):
    cdef Py_ssize_t K = r.shape[0], M = points.shape[0], k, m
    cdef double[::1] lin = np.empty(M)
    cdef double[::1] quad = np.empty(M)
    cdef double a, n2, phase, amp, c = 2.0 * M_PI / lam
    for m in range(M):
        a = u[0] * points[m, 0] + u[1] * points[m, 1] + u[2] * points[m, 2]
        n2 = points[m, 0] * points[m, 0] + points[m, 1] * points[m, 1] + points[m, 2] * points[m, 2]
        lin[m] = a
        quad[m] = n2 - a * a if n2 > a * a else 0.0
    out = np.empty((K, M), dtype=np.complex128)
    cdef double complex[:, ::1] H = out
    for k in prange(K, nogil=True, num_threads=num_threads, schedule="static"):
        amp = 1.0 / r[k]
        for m in range(M):
            phase = c * (lin[m] - quad[m] / (2.0 * r[k]))
            H[k, m].real = amp * cos(phase)
            H[k, m].imag = amp * sin(phase)
    return out


def exact_matrix(const double[:, ::1] points, const double[:, ::1] q,
                 double lam, int num_threads=1):
    cdef Py_ssize_t K = q.shape[0], M = points.shape[0], k, m
    cdef double dx, dy, dz, d, phase, c = 2.0 * M_PI / lam
    cdef int bad = 0
    out = np.empty((K, M), dtype=np.complex128)
    cdef double complex[:, ::1] H = out
    for k in prange(K, nogil=True, num_threads=num_threads, schedule="static"):
        for m in range(M):
            dx = q[k, 0] - points[m, 0]
            dy = q[k, 1] - points[m, 1]
            dz = q[k, 2] - points[m, 2]
            d = sqrt(dx * dx + dy * dy + dz * dz)
            if d == 0.0:
                bad += 1
                H[k, m] = 0
            else:
                phase = -c * d
                H[k, m].real = cos(phase) / d
                H[k, m].imag = sin(phase) / d
    if bad:
        raise ZeroDivisionError("zero propagation distance")
    return out


def kernel_lags(const double[::1] rho2, const double[::1] w,
                const double[::1] lags, double lam, int num_threads=1):
    cdef Py_ssize_t N = lags.shape[0], M = rho2.shape[0], n, m
    cdef double re, im, phase, c = M_PI / lam
    out = np.empty(N, dtype=np.complex128)
    cdef double complex[::1] g = out
    for n in prange(N, nogil=True, num_threads=num_threads, schedule="static"):
        re = 0.0
        im = 0.0
        for m in range(M):
            phase = -c * rho2[m] * lags[n]
            re = re + w[m] * cos(phase)
            im = im + w[m] * sin(phase)
        g[n].real = re
        g[n].imag = im
    return out


def sinc_convolve(const double[::1] g0, double dxi, int num_threads=1):
    cdef Py_ssize_t N = g0.shape[0], i, j
    cdef double acc, x, wj
    out = np.empty(N)
    cdef double[::1] g = out
    for i in prange(N, nogil=True, num_threads=num_threads, schedule="static"):
        acc = 0.0
        for j in range(N):
            if g0[j] == 0.0:
                continue
            wj = dxi
            if j == 0 or j == N - 1:
                wj = 0.5 * dxi
            x = 2.0 * (i - j) * dxi
            if x == 0.0:
                acc = acc + wj * g0[j]
            else:
                acc = acc + wj * g0[j] * sin(M_PI * x) / (M_PI * x)
        g[i] = acc
    return out
