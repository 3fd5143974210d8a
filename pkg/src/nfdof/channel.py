"""Line-of-sight channel coefficients and matrices."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import Direction, ReceiveArray, ReceiveSamples, SampledAperture

__all__ = [
    "ChannelModel",
    "ChannelMatrix",
    "exact_coefficient",
    "fresnel_coefficient",
    "build_channel_matrix",
    "max_phase_error",
    "phase_error_terms",
]

MODELS = ("exact", "fresnel")


@dataclass(frozen=True)
class ChannelModel:
    variant: str
    wavelength: float

    def __post_init__(self):
        if self.variant not in MODELS:
            raise ValueError(f"unknown channel model {self.variant!r}")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """K x M channel matrix plus the quadrature weights of both sides.

    ``rx_weights`` is the receive measure in ``r`` (meters); the
    eigenvalues of the weighted Gram matrix then discretize the
    correlation operator over ``[r_min, r_max]``.
    """

    entries: np.ndarray
    rx_radii: np.ndarray
    rx_weights: np.ndarray
    tx_weights: np.ndarray
    model: ChannelModel

    def __post_init__(self):
        K, M = self.entries.shape
        if len(self.rx_radii) != K or len(self.rx_weights) != K or len(self.tx_weights) != M:
            raise ValueError("channel matrix dimensions do not match the sample lists")

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def exact_coefficient(p, q, wavelength: float) -> complex:
    """``exp(-j 2pi |p - q| / lambda) / |p - q|``."""
    d = float(np.linalg.norm(np.asarray(q, dtype=float) - np.asarray(p, dtype=float)))
    if d == 0.0:
        raise ZeroDivisionError("zero propagation distance")
    return complex(np.exp(-2j * np.pi * d / wavelength) / d)


def fresnel_coefficient(p, direction: Direction, r: float, wavelength: float) -> complex:
    """Fresnel-approximated coefficient with the common ``exp(-j 2pi r / lambda)`` removed.

    Amplitude ``1/r``; phase ``(2pi/lambda) (u.p - (|p|^2 - (u.p)^2) / (2 r))``.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    p = np.asarray(p, dtype=float)
    a = float(direction.u @ p)
    quad = max(float(p @ p) - a * a, 0.0)
    phase = 2 * math.pi / wavelength * (a - quad / (2 * r))
    return complex(np.exp(1j * phase) / r)


def build_channel_matrix(
    aperture: SampledAperture, samples: ReceiveSamples, model: ChannelModel
) -> ChannelMatrix:
    if len(aperture) == 0 or len(samples) == 0:
        raise ValueError("empty sample set")
    if model.variant == "fresnel":
        H = kernels.fresnel_matrix(aperture.points, samples.direction.u, samples.r, model.wavelength)
    else:
        H = kernels.exact_matrix(aperture.points, samples.q, model.wavelength)
    if not np.isfinite(H).all():
        raise FloatingPointError("non-finite channel coefficients")
    return ChannelMatrix(H, samples.r.copy(), samples.r_weights.copy(), aperture.weights.copy(), model)


def phase_error_terms(aperture: SampledAperture, direction: Direction, r: float, wavelength: float) -> np.ndarray:
    """Third-order Fresnel phase term per aperture point at distance ``r``."""
    u = direction.u
    a = aperture.points @ u
    quad = np.maximum(aperture.norms2 - a**2, 0.0)
    return (2 * np.pi / wavelength) * np.abs(a) * quad / (2 * r**2)


def max_phase_error(aperture: SampledAperture, array: ReceiveArray, wavelength: float) -> float:
    """Largest neglected third-order phase over the aperture, at ``r_min``."""
    return float(phase_error_terms(aperture, array.direction, array.r_min, wavelength).max())
