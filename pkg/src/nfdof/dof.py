"""Closed-form DoF predictions and dominant-eigenvalue counts.

Every prediction is the total measure of a union of main-lobe intervals on
the scaled-frequency axis; the sinc-sidelobe ``O(1)`` term is reported as 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import ApertureRegion, Direction, ExtremeDistances, extreme_distances
from .spectral import EigenSpectrum, omega_interval

__all__ = [
    "DofPrediction",
    "DominantCount",
    "interval_union",
    "dof_broadside",
    "dof_projected",
    "dof_modular",
    "dof_region",
    "dof_hole_fraction",
    "dof_vs_rmin",
    "dof_upper_limit",
    "rayleigh_distance",
    "rayleigh_bound",
    "count_dominant",
    "DEFAULT_EPSILON",
]

DEFAULT_EPSILON = 0.01
_MERGE_RTOL = 1e-12


@dataclass(frozen=True)
class DofPrediction:
    value: float
    omega_intervals: tuple = ()
    formula: str = ""
    params: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "formula": self.formula,
            "value": self.value,
            "intervals": [list(iv) for iv in self.omega_intervals],
            "params": dict(self.params),
        }


@dataclass(frozen=True)
class DominantCount:
    count: int
    epsilon: float
    sensitivity: dict

    def to_record(self) -> dict:
        return {
            "count": self.count,
            "epsilon": self.epsilon,
            "sensitivity": {format(k, "g"): v for k, v in self.sensitivity.items()},
        }


def interval_union(intervals: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """Sort-and-merge union; touching endpoints (1e-12 relative) are merged."""
    ivs = sorted((float(a), float(b)) for a, b in intervals if b > a)
    merged: list[list[float]] = []
    for a, b in ivs:
        if merged:
            last = merged[-1]
            scale = max(abs(last[1]), abs(a), 1e-300)
            if a <= last[1] + _MERGE_RTOL * scale:
                last[1] = max(last[1], b)
                continue
        merged.append([a, b])
    return [(a, b) for a, b in merged]


def _union_measure(intervals) -> float:
    return float(sum(b - a for a, b in intervals))


def _check_span(r_min: float, r_max: float, wavelength: float):
    if not r_min > 0:
        raise ValueError("r_min must be positive")
    if r_max < r_min:
        raise ValueError("r_max must not be below r_min")
    if not wavelength > 0:
        raise ValueError("wavelength must be positive")


def dof_broadside(p_min: float, p_max: float, r_min: float, r_max: float, wavelength: float) -> DofPrediction:
    """``(p_max^2 - p_min^2) / (2 lambda) * (1/r_min - 1/r_max)``."""
    if not 0 <= p_min <= p_max:
        raise ValueError("extreme distances must satisfy 0 <= p_min <= p_max")
    _check_span(r_min, r_max, wavelength)
    T = 1.0 / r_min - 1.0 / r_max
    value = (p_max**2 - p_min**2) / (2 * wavelength) * T
    omega = omega_interval(p_min, p_max, T, wavelength)
    return DofPrediction(
        value,
        (omega,),
        "broadside",
        {"p_min": p_min, "p_max": p_max, "r_min": r_min, "r_max": r_max, "wavelength": wavelength},
    )


def dof_projected(
    region: ApertureRegion, direction: Direction, r_min: float, r_max: float, wavelength: float
) -> DofPrediction:
    """Broadside formula applied to the extremes of the projected aperture."""
    ext = extreme_distances(region, direction)
    pred = dof_broadside(ext.p_min, ext.p_max, r_min, r_max, wavelength)
    params = dict(pred.params, phi=direction.phi, theta=direction.theta)
    return DofPrediction(pred.value, pred.omega_intervals, "projected", params)


def dof_modular(
    modules: Sequence[ExtremeDistances], r_min: float, r_max: float, wavelength: float
) -> DofPrediction:
    """Measure of the union of the per-module main lobes."""
    _check_span(r_min, r_max, wavelength)
    T = 1.0 / r_min - 1.0 / r_max
    # merge on the -rho^2 axis, then scale; one module reproduces dof_broadside bit for bit
    union = interval_union([(-m.p_max**2, -m.p_min**2) for m in modules])
    scale = T / (2 * wavelength)
    return DofPrediction(
        _union_measure(union) / (2 * wavelength) * T,
        tuple((a * scale, b * scale) for a, b in union),
        "modular",
        {
            "modules": [[m.p_min, m.p_max] for m in modules],
            "r_min": r_min,
            "r_max": r_max,
            "wavelength": wavelength,
        },
    )


def dof_region(
    region: ApertureRegion, direction: Direction, r_min: float, r_max: float, wavelength: float
) -> DofPrediction:
    """Prediction for any region: lobe union over modules, projected when off broadside."""
    per = extreme_distances(region, direction, per_module=True)
    if len(per) > 1:
        pred = dof_modular(per, r_min, r_max, wavelength)
        return DofPrediction(pred.value, pred.omega_intervals, pred.formula, dict(pred.params, phi=direction.phi, theta=direction.theta))
    if np.allclose(direction.u, [0.0, 1.0, 0.0], atol=1e-12):
        ext = per[0]
        return dof_broadside(ext.p_min, ext.p_max, r_min, r_max, wavelength)
    return dof_projected(region, direction, r_min, r_max, wavelength)


def dof_hole_fraction(L: float, alpha: float, r_min: float, r_max: float, wavelength: float) -> DofPrediction:
    """Array on ``[-L, L]`` with a centered hole ``(-alpha L, alpha L)``."""
    if not 0 <= alpha < 1:
        raise ValueError("hole fraction alpha must lie in [0, 1)")
    if not L > 0:
        raise ValueError("L must be positive")
    _check_span(r_min, r_max, wavelength)
    T = 1.0 / r_min - 1.0 / r_max
    value = L**2 * (1 - alpha**2) / (2 * wavelength) * T
    omega = omega_interval(alpha * L, L, T, wavelength)
    return DofPrediction(
        value,
        (omega,),
        "hole_fraction",
        {"L": L, "alpha": alpha, "r_min": r_min, "r_max": r_max, "wavelength": wavelength},
    )


def dof_vs_rmin(p_min: float, p_max: float, L_array: float, r_min: float, wavelength: float) -> float:
    """DoF of a receive array of fixed length ``L_array`` starting at ``r_min``."""
    if not (r_min > 0 and L_array >= 0 and wavelength > 0):
        raise ValueError("r_min and wavelength must be positive, L_array non-negative")
    return (p_max**2 - p_min**2) / (2 * wavelength) * L_array / (r_min * (r_min + L_array))


def dof_upper_limit(p_min: float, p_max: float, r_min: float, wavelength: float) -> float:
    """Limit of :func:`dof_vs_rmin` for an unbounded receive array."""
    return (p_max**2 - p_min**2) / (2 * wavelength) / r_min


def rayleigh_distance(D: float, wavelength: float) -> float:
    return 2 * D**2 / wavelength


def rayleigh_bound(D: float, r_min: float, wavelength: float) -> float:
    """``(r_Ray / 16) / r_min`` for a centered aperture of size ``D``."""
    if not (D > 0 and r_min > 0 and wavelength > 0):
        raise ValueError("D, r_min and wavelength must be positive")
    return rayleigh_distance(D, wavelength) / 16 / r_min


def count_dominant(spectrum, epsilon: float = DEFAULT_EPSILON) -> DominantCount:
    """Number of eigenvalues at or above ``epsilon * lambda_1``.

    The counts at ``epsilon / 10`` and ``epsilon * 10`` are reported as a
    check on how sharp the knee of the spectrum is.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    values = spectrum.values if isinstance(spectrum, EigenSpectrum) else np.asarray(spectrum, dtype=float)
    if len(values) == 0:
        raise ValueError("empty spectrum")
    values = np.sort(values)[::-1]
    l1 = values[0]

    def n(eps):
        return int(np.count_nonzero(values >= eps * l1)) if l1 > 0 else 0

    return DominantCount(n(epsilon), epsilon, {epsilon / 10: n(epsilon / 10), epsilon * 10: n(epsilon * 10)})
