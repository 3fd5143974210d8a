"""Eigenvalue spectra of the channel correlation operator and its Fourier picture.

The correlation kernel between two receive points at inverse distances
``t`` and ``t'`` depends only on ``t - t'``:

    g(dt) = sum_m w_m exp(-j pi |p_m|^2 dt / lambda)

Its scaled Fourier transform is the weighted histogram ``g0`` of
``xi_m = -|p_m|^2 T / (2 lambda)`` smoothed by ``sinc(2 xi)``; the width of
its main lobe predicts the number of dominant eigenvalues.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.linalg import blas, toeplitz
from scipy.signal import fftconvolve

from . import kernels
from .channel import ChannelMatrix
from .geometry import (
    Direction,
    ExtremeDistances,
    ReceiveArray,
    SampledAperture,
    sample_receive_array,
)
from .io import write_csv

__all__ = [
    "EigenSpectrum",
    "InverseDistanceGrid",
    "SpectrumProfile",
    "gram_matrix",
    "weighted_eigenvalues",
    "gram_eigenvalues",
    "transform_to_inverse_distance",
    "convolution_kernel_g",
    "inverse_distance_kernel",
    "t_domain_eigenvalues",
    "omega_interval",
    "default_xi_grid",
    "g0_spectrum",
    "convolve_sinc",
    "measured_bandwidth",
]

# Relative size of the anti-Hermitian part tolerated in a Gram matrix.
HERMITIAN_TOL = 1e-10
DIRECT_CONVOLUTION_LIMIT = 4096


@dataclass(frozen=True, eq=False)
class EigenSpectrum:
    """Eigenvalues sorted in descending order, negatives clamped to zero."""

    values: np.ndarray
    imag_residue: float = 0.0

    @property
    def lambda1(self) -> float:
        return float(self.values[0]) if len(self.values) else 0.0

    @property
    def normalized(self) -> np.ndarray:
        l1 = self.lambda1
        return self.values / l1 if l1 > 0 else np.zeros_like(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def to_csv(self, path, meta=None) -> Path:
        rows = zip(range(1, len(self.values) + 1), self.values, self.normalized)
        return write_csv(path, ["index", "eigenvalue", "normalized"], rows, meta)


def _spectrum(values: np.ndarray, imag_residue: float = 0.0) -> EigenSpectrum:
    v = np.sort(np.asarray(values, dtype=float))[::-1]
    return EigenSpectrum(np.maximum(v, 0.0), imag_residue)


@dataclass(frozen=True, eq=False)
class InverseDistanceGrid:
    t: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("inverse-distance grid needs a positive span")

    @property
    def t_min(self) -> float:
        return float(self.t.min())

    @property
    def t_max(self) -> float:
        return float(self.t.max())

    @property
    def T(self) -> float:
        return self.t_max - self.t_min

    @property
    def is_uniform(self) -> bool:
        d = np.diff(self.t)
        return bool(np.allclose(d, d[0], rtol=1e-9, atol=0.0))


# ---------------------------------------------------------------------------
# Gram matrices and eigenvalues
# ---------------------------------------------------------------------------


def gram_matrix(H: ChannelMatrix) -> np.ndarray:
    """``D^1/2 H W H^H D^1/2`` with tx weights ``W`` and rx measure ``D``."""
    if not np.isfinite(H.entries).all():
        raise FloatingPointError("non-finite channel entries")
    A = H.entries * np.sqrt(H.tx_weights)[None, :]
    A *= np.sqrt(H.rx_weights)[:, None]
    A = np.asfortranarray(A)
    G = blas.zherk(1.0, A, lower=0, trans=0)
    G = np.triu(G) + np.triu(G, 1).conj().T
    return G


def weighted_eigenvalues(kernel: np.ndarray, weights: np.ndarray) -> EigenSpectrum:
    """Eigenvalues of the Nystrom matrix ``D^1/2 K D^1/2`` of a Hermitian kernel."""
    kernel = np.asarray(kernel)
    if not np.isfinite(kernel).all():
        raise FloatingPointError("non-finite kernel entries")
    s = np.sqrt(np.asarray(weights, dtype=float))
    G = s[:, None] * kernel * s[None, :]
    return _hermitian_eigenvalues(G)


def _hermitian_eigenvalues(G: np.ndarray) -> EigenSpectrum:
    anti = np.abs(G - G.conj().T).max() / 2
    Gh = (G + G.conj().T) / 2
    w = np.linalg.eigvalsh(Gh)
    l1 = max(float(w[-1]), 0.0)
    if anti > HERMITIAN_TOL * max(l1, np.finfo(float).tiny):
        raise FloatingPointError(f"Gram matrix is not Hermitian (residue {anti:.3e})")
    return _spectrum(w, float(anti))


def gram_eigenvalues(H: ChannelMatrix) -> EigenSpectrum:
    """Eigenvalues of the discretized correlation operator over the receive span."""
    return _hermitian_eigenvalues(gram_matrix(H))


def transform_to_inverse_distance(H: ChannelMatrix) -> tuple[np.ndarray, InverseDistanceGrid]:
    """Kernel ``g(t, t') = v(1/t, 1/t') / (t t')`` on the samples' ``t = 1/r`` grid.

    ``v`` is the tx-weighted correlation ``H W H^H``.  The grid weights are
    the receive measure mapped by ``dt = dr / r**2``, so that
    ``weighted_eigenvalues(g, grid.weights)`` equals ``gram_eigenvalues(H)``.
    """
    r = H.rx_radii
    A = H.entries * np.sqrt(H.tx_weights)[None, :]
    v = A @ A.conj().T
    g = v * np.outer(r, r)
    t = 1.0 / r
    order = np.argsort(t)
    g = g[np.ix_(order, order)]
    grid = InverseDistanceGrid(t[order], (H.rx_weights / r**2)[order])
    return g, grid


def _rho2(aperture: SampledAperture, direction: Direction | None) -> np.ndarray:
    rho2 = aperture.norms2
    if direction is not None:
        rho2 = np.maximum(rho2 - (aperture.points @ direction.u) ** 2, 0.0)
    return rho2


def convolution_kernel_g(
    aperture: SampledAperture,
    dt,
    wavelength: float,
    T: float | None = None,
    direction: Direction | None = None,
):
    """``g(dt) = sum_m w_m exp(-j pi rho_m^2 dt / lambda)``; zero for ``|dt| > T``.

    ``rho_m`` is ``|p_m|``, or the projected norm when ``direction`` is given.
    """
    scalar = np.ndim(dt) == 0
    dt = np.atleast_1d(np.asarray(dt, dtype=float))
    g = kernels.kernel_lags(_rho2(aperture, direction), aperture.weights, dt, wavelength)
    if T is not None:
        g = np.where(np.abs(dt) <= T * (1 + 1e-12), g, 0.0)
    return complex(g[0]) if scalar else g


def inverse_distance_kernel(
    aperture: SampledAperture,
    t: np.ndarray,
    wavelength: float,
    direction: Direction | None = None,
) -> np.ndarray:
    """Matrix ``g(t_k - t_k')``; built from ``2K - 1`` lags on a uniform grid."""
    t = np.asarray(t, dtype=float)
    d = np.diff(t)
    if len(t) > 1 and np.allclose(d, d[0], rtol=1e-9, atol=0.0):
        lags = np.arange(len(t)) * d[0]
        col = convolution_kernel_g(aperture, lags, wavelength, direction=direction)
        # g(t_k - t_0) down the first column; g(-dt) = conj(g(dt)) along the row
        return toeplitz(col, col.conj())
    dt = (t[:, None] - t[None, :]).ravel()
    return convolution_kernel_g(aperture, dt, wavelength, direction=direction).reshape(len(t), len(t))


def t_domain_eigenvalues(
    aperture: SampledAperture, array: ReceiveArray, wavelength: float, projected: bool = True
) -> EigenSpectrum:
    """Eigenvalues of the inverse-distance operator with its own ``dt`` quadrature."""
    samples = sample_receive_array(array)
    order = np.argsort(samples.t)
    t, w = samples.t[order], samples.t_weights[order]
    direction = array.direction if projected else None
    return weighted_eigenvalues(inverse_distance_kernel(aperture, t, wavelength, direction), w)


# ---------------------------------------------------------------------------
# Fourier picture
# ---------------------------------------------------------------------------


def omega_interval(p_min: float, p_max: float, T: float, wavelength: float) -> tuple[float, float]:
    """Main lobe ``[-p_max^2 T / (2 lambda), -p_min^2 T / (2 lambda)]``."""
    return (-p_max**2 * T / (2 * wavelength), -p_min**2 * T / (2 * wavelength))


def default_xi_grid(omega: tuple[float, float], dxi: float = 0.05, margin: float = 20.0) -> np.ndarray:
    """Uniform grid on multiples of ``dxi`` covering ``omega`` plus ``margin``."""
    lo = int(np.floor((omega[0] - margin) / dxi))
    hi = int(np.ceil((omega[1] + margin) / dxi))
    return np.arange(lo, hi + 1) * dxi


@dataclass(frozen=True, eq=False)
class SpectrumProfile:
    xi: np.ndarray
    g0: np.ndarray
    omega: tuple[float, float]
    g: np.ndarray | None = None

    @property
    def dxi(self) -> float:
        return float(self.xi[1] - self.xi[0])

    @property
    def omega_width(self) -> float:
        return self.omega[1] - self.omega[0]

    def to_csv(self, path, meta=None) -> Path:
        g = np.zeros(len(self.xi), dtype=complex) if self.g is None else np.asarray(self.g, dtype=complex)
        rows = zip(self.xi, self.g0, g.real, g.imag)
        return write_csv(path, ["xi", "g0", "g_real", "g_imag"], rows, meta)


def _check_uniform(xi: np.ndarray) -> float:
    xi = np.asarray(xi, dtype=float)
    if xi.ndim != 1 or len(xi) < 2:
        raise ValueError("xi grid needs at least two points")
    d = np.diff(xi)
    if not (d[0] > 0 and np.allclose(d, d[0], rtol=1e-9, atol=0.0)):
        raise ValueError("xi grid must be uniform and increasing")
    return float(d[0])


def g0_spectrum(
    aperture: SampledAperture,
    array: ReceiveArray,
    wavelength: float,
    xi_grid=None,
    extremes: ExtremeDistances | None = None,
    dxi: float = 0.05,
    margin: float = 20.0,
) -> SpectrumProfile:
    """Weighted histogram density of ``xi_m = -rho_m^2 T / (2 lambda)``.

    ``rho_m`` is the norm projected orthogonally to the array direction.
    Point masses falling outside ``xi_grid`` are dropped.  ``extremes``
    fixes the analytic main lobe; by default it is taken from the samples.
    """
    T = array.T
    rho2 = _rho2(aperture, array.direction)
    if extremes is None:
        extremes = ExtremeDistances(float(np.sqrt(rho2.min())), float(np.sqrt(rho2.max())))
    omega = omega_interval(extremes.p_min, extremes.p_max, T, wavelength)
    xi = default_xi_grid(omega, dxi, margin) if xi_grid is None else np.asarray(xi_grid, dtype=float)
    step = _check_uniform(xi)
    pos = -rho2 * T / (2 * wavelength)
    idx = np.rint((pos - xi[0]) / step).astype(np.int64)
    ok = (idx >= 0) & (idx < len(xi))
    mass = np.bincount(idx[ok], weights=aperture.weights[ok], minlength=len(xi))
    return SpectrumProfile(xi, mass / step, omega)


def convolve_sinc(profile: SpectrumProfile, margin: float = 10.0, method: str = "auto") -> SpectrumProfile:
    """Fill ``g = g0 * sinc(2 xi)`` (trapezoidal rule on the xi grid).

    Direct summation below 4096 bins, FFT convolution above (``method``
    may force either).  The grid must extend ``margin`` beyond the main lobe.
    """
    xi, g0 = profile.xi, np.asarray(profile.g0, dtype=float)
    step = _check_uniform(xi)
    lo, hi = profile.omega
    if xi[0] > lo - margin + step / 2 or xi[-1] < hi + margin - step / 2:
        raise ValueError("insufficient grid margin around the main lobe")
    n = len(xi)
    if method == "auto":
        method = "direct" if n < DIRECT_CONVOLUTION_LIMIT else "fft"
    if method == "direct":
        g = kernels.sinc_convolve(g0, step)
    elif method == "fft":
        w = np.full(n, step)
        w[0] = w[-1] = step / 2
        s = np.sinc(2.0 * np.arange(-(n - 1), n) * step)
        g = fftconvolve(w * g0, s, mode="full")[n - 1 : 2 * n - 1]
    else:
        raise ValueError(f"unknown convolution method {method!r}")
    if not np.isfinite(g).all():
        raise FloatingPointError("non-finite spectrum")
    return replace(profile, g=g)


def measured_bandwidth(profile: SpectrumProfile, level: float = 0.5) -> float:
    """Measure of ``{xi : |g(xi)| >= level * max |g|}`` in xi units."""
    if profile.g is None:
        raise ValueError("spectrum has no sinc-convolved part; call convolve_sinc first")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    a = np.abs(profile.g)
    peak = a.max()
    if peak == 0:
        raise ValueError("all-zero spectrum")
    return float(np.count_nonzero(a >= level * peak) * profile.dxi)
