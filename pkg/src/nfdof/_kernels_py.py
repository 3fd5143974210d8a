"""Numpy implementations of the hot loops (fallback for ``nfdof._kernels``)."""
import numpy as np


def fresnel_matrix(points, u, r, lam, num_threads=1):
    lin = points @ u
    quad = np.maximum(np.einsum("ij,ij->i", points, points) - lin**2, 0.0)
    phase = (2 * np.pi / lam) * (lin[None, :] - quad[None, :] / (2.0 * r[:, None]))
    return np.exp(1j * phase) / r[:, None]


def exact_matrix(points, q, lam, num_threads=1):
    d = np.sqrt(((q[:, None, :] - points[None, :, :]) ** 2).sum(axis=2))
    if np.any(d == 0.0):
        raise ZeroDivisionError("zero propagation distance")
    return np.exp(-2j * np.pi / lam * d) / d


def kernel_lags(rho2, w, lags, lam, num_threads=1, chunk=64):
    out = np.empty(len(lags), dtype=np.complex128)
    for s in range(0, len(lags), chunk):
        phase = (-np.pi / lam) * np.outer(lags[s:s + chunk], rho2)
        out[s:s + chunk] = np.exp(1j * phase) @ w
    return out


def sinc_convolve(g0, dxi, num_threads=1):
    n = len(g0)
    w = np.full(n, dxi)
    w[0] = w[-1] = dxi / 2
    idx = np.arange(n)
    S = np.sinc(2.0 * (idx[:, None] - idx[None, :]) * dxi)
    return S @ (w * g0)
