"""Transmit apertures, receive arrays and their sampling.

Apertures live in the xz-plane (``y = 0``).  A region is a union of disjoint
modules; each module is a set of additive primitives minus a set of
subtractive primitives (holes).  All lengths are in meters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "Direction",
    "Rectangle",
    "Disk",
    "Annulus",
    "Segment",
    "Point",
    "Module",
    "ApertureRegion",
    "SampledAperture",
    "ReceiveArray",
    "ReceiveSamples",
    "ExtremeDistances",
    "DegenerateApertureError",
    "direction_vector",
    "broadside",
    "sample_aperture",
    "extreme_distances",
    "sampled_extremes",
    "project_aperture",
    "projection_form",
    "sample_receive_array",
]

# Sub-samples per axis in the fallback search for an inside point of a cut cell.
_SUBSAMPLES = 8
# Gauss-Legendre nodes per x-piece when integrating the coverage of cut cells.
_GAUSS_NODES = 8
# Points per closed boundary loop in the candidate search of extreme_distances.
_BOUNDARY_POINTS = 8192
# Relative slack so that points computed on an outline count as on it.
_EDGE_TOL = 1e-12


class DegenerateApertureError(ValueError):
    """Raised when an aperture has no sampled support."""


@dataclass(frozen=True)
class Direction:
    """Receive-array direction given by azimuth ``phi`` and elevation ``theta``."""

    phi: float
    theta: float

    @property
    def u(self) -> np.ndarray:
        c = math.cos(self.theta)
        return np.array([math.cos(self.phi) * c, math.sin(self.phi) * c, math.sin(self.theta)])


def direction_vector(phi: float, theta: float) -> Direction:
    if not (math.isfinite(phi) and math.isfinite(theta)):
        raise ValueError("phi and theta must be finite")
    return Direction(float(phi), float(theta))


def broadside() -> Direction:
    """Direction orthogonal to the aperture plane, ``u = [0, 1, 0]``."""
    return Direction(math.pi / 2, 0.0)


def projection_form(direction: Direction | None) -> np.ndarray:
    """2x2 matrix ``M`` with ``x^T M x = ||p||^2 - (u^T p)^2`` for ``p = [x0, 0, x1]``."""
    if direction is None:
        return np.eye(2)
    u = direction.u
    v = np.array([u[0], u[2]])
    return np.eye(2) - np.outer(v, v)


def _qnorm(xz: np.ndarray, form: np.ndarray) -> np.ndarray:
    """Quadratic-form norm ``sqrt(x^T M x)`` of (N, 2) points."""
    q = np.einsum("ni,ij,nj->n", xz, form, xz)
    return np.sqrt(np.maximum(q, 0.0))


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------


def _segment_qmin(a: np.ndarray, b: np.ndarray, form: np.ndarray) -> tuple[float, np.ndarray]:
    """Minimum of ``x^T M x`` over the segment from ``a`` to ``b``."""
    d = b - a
    dd = d @ form @ d
    if dd <= 0.0:
        s = 0.0
    else:
        s = float(np.clip(-(a @ form @ d) / dd, 0.0, 1.0))
    p = a + s * d
    return float(np.sqrt(max(p @ form @ p, 0.0))), p


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle ``[x0, x1] x [z0, z1]`` in the xz-plane."""

    x0: float
    x1: float
    z0: float
    z1: float
    hole: bool = False

    def __post_init__(self):
        if not (self.x1 >= self.x0 and self.z1 >= self.z0):
            raise ValueError("rectangle bounds must satisfy x0 <= x1 and z0 <= z1")

    @classmethod
    def centered(cls, width: float, height: float, center=(0.0, 0.0), hole: bool = False) -> "Rectangle":
        cx, cz = center
        return cls(cx - width / 2, cx + width / 2, cz - height / 2, cz + height / 2, hole)

    dim = 2

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.z1 - self.z0)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return self.x0, self.x1, self.z0, self.z1

    @property
    def centroid(self) -> tuple[float, float]:
        return (self.x0 + self.x1) / 2, (self.z0 + self.z1) / 2

    def contains(self, x, z):
        return (x >= self.x0) & (x <= self.x1) & (z >= self.z0) & (z <= self.z1)

    def interior(self, x, z):
        tol = _EDGE_TOL * max(abs(self.x0), abs(self.x1), abs(self.z0), abs(self.z1), 1.0)
        return (x > self.x0 + tol) & (x < self.x1 - tol) & (z > self.z0 + tol) & (z < self.z1 - tol)

    def _corners(self) -> np.ndarray:
        return np.array(
            [[self.x0, self.z0], [self.x1, self.z0], [self.x1, self.z1], [self.x0, self.z1]]
        )

    def extremes(self, form: np.ndarray) -> tuple[float, float, np.ndarray, np.ndarray]:
        corners = self._corners()
        norms = _qnorm(corners, form)
        imax = int(np.argmax(norms))
        if self.contains(0.0, 0.0):
            pmin, amin = 0.0, np.zeros(2)
        else:
            best = [_segment_qmin(corners[i], corners[(i + 1) % 4], form) for i in range(4)]
            pmin, amin = min(best, key=lambda item: item[0])
        return pmin, float(norms[imax]), amin, corners[imax]

    @property
    def breaks(self) -> tuple:
        return self.x0, self.x1

    def chords(self, x):
        """Covered z-intervals on the vertical line at ``x``, shape (N, 1) each."""
        on = (x >= self.x0) & (x <= self.x1)
        return np.where(on, self.z0, 0.0)[:, None], np.where(on, self.z1, 0.0)[:, None]

    def crosses(self, ax0, ax1, az0, az1):
        """Conservative test: does the outline meet the cell ``[ax0, ax1] x [az0, az1]``?"""
        meets = (ax1 >= self.x0) & (ax0 <= self.x1) & (az1 >= self.z0) & (az0 <= self.z1)
        within = (ax0 > self.x0) & (ax1 < self.x1) & (az0 > self.z0) & (az1 < self.z1)
        return meets & ~within

    def boundary(self, n: int) -> np.ndarray:
        corners = self._corners()
        per_edge = max(n // 4, 2)
        s = np.linspace(0.0, 1.0, per_edge, endpoint=False)
        edges = [corners[i] + s[:, None] * (corners[(i + 1) % 4] - corners[i]) for i in range(4)]
        return np.vstack(edges)


@dataclass(frozen=True)
class Disk:
    cx: float
    cz: float
    radius: float
    hole: bool = False

    def __post_init__(self):
        if not self.radius >= 0:
            raise ValueError("disk radius must be non-negative")

    dim = 2

    @property
    def area(self) -> float:
        return math.pi * self.radius**2

    @property
    def bounds(self):
        r = self.radius
        return self.cx - r, self.cx + r, self.cz - r, self.cz + r

    @property
    def centroid(self):
        return self.cx, self.cz

    def contains(self, x, z):
        return (x - self.cx) ** 2 + (z - self.cz) ** 2 <= self.radius**2

    def interior(self, x, z):
        return (x - self.cx) ** 2 + (z - self.cz) ** 2 < self.radius**2 * (1 - _EDGE_TOL)

    @property
    def breaks(self) -> tuple:
        return self.cx - self.radius, self.cx + self.radius

    def chords(self, x):
        lo, hi = _circle_chord(x - self.cx, self.radius)
        return (self.cz + lo)[:, None], (self.cz + hi)[:, None]

    def crosses(self, ax0, ax1, az0, az1):
        return _circle_crosses(self.cx, self.cz, self.radius, ax0, ax1, az0, az1)

    def boundary(self, n: int) -> np.ndarray:
        a = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        return np.column_stack([self.cx + self.radius * np.cos(a), self.cz + self.radius * np.sin(a)])

    def extremes(self, form: np.ndarray):
        return _round_extremes(self, [self.radius], form, origin_inside=bool(self.contains(0.0, 0.0)))


@dataclass(frozen=True)
class Annulus:
    cx: float
    cz: float
    inner: float
    outer: float
    hole: bool = False

    def __post_init__(self):
        if not 0 <= self.inner <= self.outer:
            raise ValueError("annulus radii must satisfy 0 <= inner <= outer")

    dim = 2

    @property
    def area(self) -> float:
        return math.pi * (self.outer**2 - self.inner**2)

    @property
    def bounds(self):
        r = self.outer
        return self.cx - r, self.cx + r, self.cz - r, self.cz + r

    @property
    def centroid(self):
        return self.cx, self.cz

    def contains(self, x, z):
        d2 = (x - self.cx) ** 2 + (z - self.cz) ** 2
        return (d2 >= self.inner**2) & (d2 <= self.outer**2)

    def interior(self, x, z):
        d2 = (x - self.cx) ** 2 + (z - self.cz) ** 2
        return (d2 > self.inner**2 * (1 + _EDGE_TOL)) & (d2 < self.outer**2 * (1 - _EDGE_TOL))

    @property
    def breaks(self) -> tuple:
        return self.cx - self.outer, self.cx - self.inner, self.cx + self.inner, self.cx + self.outer

    def chords(self, x):
        dx = x - self.cx
        olo, ohi = _circle_chord(dx, self.outer)
        ilo, ihi = _circle_chord(dx, self.inner)
        # [-so, -si] and [si, so]; ilo = ihi = 0 off the inner circle
        lo = np.column_stack([olo, ihi]) + self.cz
        hi = np.column_stack([ilo, ohi]) + self.cz
        return lo, hi

    def crosses(self, ax0, ax1, az0, az1):
        return _circle_crosses(self.cx, self.cz, self.outer, ax0, ax1, az0, az1) | _circle_crosses(
            self.cx, self.cz, self.inner, ax0, ax1, az0, az1
        )

    def boundary(self, n: int) -> np.ndarray:
        a = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        c, s = np.cos(a), np.sin(a)
        return np.vstack(
            [
                np.column_stack([self.cx + self.outer * c, self.cz + self.outer * s]),
                np.column_stack([self.cx + self.inner * c, self.cz + self.inner * s]),
            ]
        )

    def extremes(self, form: np.ndarray):
        return _round_extremes(
            self, [self.inner, self.outer], form, origin_inside=bool(self.contains(0.0, 0.0))
        )


def _circle_chord(dx, r):
    """Half-chord ``[-s, s]`` of a circle of radius ``r`` at offset ``dx``; empty as (0, 0)."""
    s2 = r * r - dx * dx
    s = np.sqrt(np.maximum(s2, 0.0))
    on = s2 >= 0
    return np.where(on, -s, 0.0), np.where(on, s, 0.0)


def _circle_crosses(cx, cz, r, ax0, ax1, az0, az1):
    near = np.hypot(np.maximum(np.maximum(ax0 - cx, cx - ax1), 0.0), np.maximum(np.maximum(az0 - cz, cz - az1), 0.0))
    far = np.hypot(np.maximum(np.abs(ax0 - cx), np.abs(ax1 - cx)), np.maximum(np.abs(az0 - cz), np.abs(az1 - cz)))
    return (near <= r) & (r <= far)


def _round_extremes(prim, radii, form, origin_inside):
    """Extremes of the form-norm over a disk or annulus.

    With the identity form the result is analytic; otherwise the circle(s)
    are scanned densely and refined with a golden-section search.
    """
    cx, cz = prim.cx, prim.cz
    c = math.hypot(cx, cz)
    if np.allclose(form, np.eye(2)):
        r_out = radii[-1]
        unit = np.array([cx, cz]) / c if c > 0 else np.array([1.0, 0.0])
        pmax = c + r_out
        amax = np.array([cx, cz]) + r_out * unit
        if origin_inside:
            return 0.0, pmax, np.zeros(2), amax
        if len(radii) == 2 and c < radii[0]:
            r_in = radii[0]
            pmin = r_in - c
            amin = np.array([cx, cz]) - r_in * unit
        else:
            pmin = c - r_out
            amin = np.array([cx, cz]) - r_out * unit
        return pmin, pmax, amin, amax

    best_min, best_max = (math.inf, None), (-math.inf, None)
    for r in radii:
        def f(a, r=r):
            return _qnorm(np.array([[cx + r * np.cos(a), cz + r * np.sin(a)]]), form)[0]

        a = np.linspace(0.0, 2 * np.pi, 4096, endpoint=False)
        pts = np.column_stack([cx + r * np.cos(a), cz + r * np.sin(a)])
        v = _qnorm(pts, form)
        step = a[1] - a[0]
        for sign, idx in ((1.0, int(np.argmin(v))), (-1.0, int(np.argmax(v)))):
            a_opt = _golden(lambda x: sign * f(x), a[idx] - step, a[idx] + step)
            p = np.array([cx + r * math.cos(a_opt), cz + r * math.sin(a_opt)])
            val = f(a_opt)
            if sign > 0 and val < best_min[0]:
                best_min = (val, p)
            if sign < 0 and val > best_max[0]:
                best_max = (val, p)
    if origin_inside:
        best_min = (0.0, np.zeros(2))
    else:
        # a rank-deficient form vanishes on a line through the origin; any
        # line meeting the outer disk also meets the ring of an annulus
        w, vecs = np.linalg.eigh(form)
        if w[0] <= 1e-15:
            null = vecs[:, 0]
            center = np.array([cx, cz])
            foot = null * (center @ null)
            d = float(np.linalg.norm(center - foot))
            r_out = radii[-1]
            if d <= r_out:
                half = math.sqrt(max(r_out * r_out - d * d, 0.0))
                best_min = (0.0, foot + half * null)
    return best_min[0], best_max[0], best_min[1], best_max[1]


def _golden(f, lo, hi, iters=80):
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (a + b) / 2


@dataclass(frozen=True)
class Segment:
    """Line segment from ``(x0, z0)`` to ``(x1, z1)`` in the xz-plane."""

    x0: float
    z0: float
    x1: float
    z1: float
    hole: bool = False

    dim = 1

    @classmethod
    def along_x(cls, a: float, b: float, hole: bool = False) -> "Segment":
        return cls(a, 0.0, b, 0.0, hole)

    @property
    def length(self) -> float:
        return math.hypot(self.x1 - self.x0, self.z1 - self.z0)

    area = 0.0

    @property
    def bounds(self):
        return min(self.x0, self.x1), max(self.x0, self.x1), min(self.z0, self.z1), max(self.z0, self.z1)

    @property
    def centroid(self):
        return (self.x0 + self.x1) / 2, (self.z0 + self.z1) / 2

    def _param(self, x, z):
        d = np.array([self.x1 - self.x0, self.z1 - self.z0])
        L2 = d @ d
        s = ((x - self.x0) * d[0] + (z - self.z0) * d[1]) / L2 if L2 > 0 else 0.0 * x
        off = np.hypot(x - (self.x0 + s * d[0]), z - (self.z0 + s * d[1]))
        return s, off

    def contains(self, x, z, tol=1e-9):
        s, off = self._param(x, z)
        scale = max(self.length, 1.0)
        return (s >= -tol) & (s <= 1 + tol) & (off <= tol * scale)

    def interior(self, x, z, tol=1e-9):
        s, off = self._param(x, z)
        scale = max(self.length, 1.0)
        return (s > tol) & (s < 1 - tol) & (off <= tol * scale)

    def boundary(self, n: int) -> np.ndarray:
        s = np.linspace(0.0, 1.0, n)
        return np.column_stack([self.x0 + s * (self.x1 - self.x0), self.z0 + s * (self.z1 - self.z0)])

    def extremes(self, form: np.ndarray):
        a, b = np.array([self.x0, self.z0]), np.array([self.x1, self.z1])
        ends = np.vstack([a, b])
        norms = _qnorm(ends, form)
        imax = int(np.argmax(norms))
        pmin, amin = _segment_qmin(a, b, form)
        return pmin, float(norms[imax]), amin, ends[imax]


@dataclass(frozen=True)
class Point:
    """Point source; ``weight`` is its quadrature weight."""

    x: float
    z: float
    weight: float = 1.0
    hole: bool = False

    dim = 0
    area = 0.0

    @property
    def bounds(self):
        return self.x, self.x, self.z, self.z

    @property
    def centroid(self):
        return self.x, self.z

    def contains(self, x, z, tol=1e-12):
        return (np.abs(x - self.x) <= tol) & (np.abs(z - self.z) <= tol)

    def interior(self, x, z):
        return np.zeros(np.shape(x), dtype=bool)

    def boundary(self, n: int) -> np.ndarray:
        return np.array([[self.x, self.z]])

    def extremes(self, form: np.ndarray):
        p = np.array([self.x, self.z])
        d = float(_qnorm(p[None, :], form)[0])
        return d, d, p, p


Primitive = Rectangle | Disk | Annulus | Segment | Point


@dataclass(frozen=True)
class Module:
    """One connected sub-aperture: additive primitives minus holes."""

    primitives: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))
        if not self.additive:
            raise ValueError("a module needs at least one additive primitive")
        dims = {p.dim for p in self.additive}
        if len(dims) > 1:
            raise ValueError("a module cannot mix points, segments and planar primitives")

    @property
    def additive(self) -> tuple:
        return tuple(p for p in self.primitives if not p.hole)

    @property
    def holes(self) -> tuple:
        return tuple(p for p in self.primitives if p.hole)

    @property
    def dim(self) -> int:
        return self.additive[0].dim

    @property
    def nominal_area(self) -> float:
        """Additive area minus hole area; exact when holes are disjoint and inside."""
        return sum(p.area for p in self.additive) - sum(p.area for p in self.holes)

    def contains(self, x, z):
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        inside = np.zeros(np.broadcast(x, z).shape, dtype=bool)
        for p in self.additive:
            inside |= p.contains(x, z)
        for p in self.holes:
            inside &= ~p.interior(x, z)
        return inside


@dataclass(frozen=True)
class ApertureRegion:
    """Transmit aperture as a union of pairwise-disjoint modules."""

    modules: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "modules", tuple(self.modules))
        if not self.modules:
            raise ValueError("an aperture region needs at least one module")

    @classmethod
    def single(cls, *primitives) -> "ApertureRegion":
        return cls((Module(primitives),))

    @classmethod
    def from_modules(cls, *modules: Sequence) -> "ApertureRegion":
        return cls(tuple(Module(tuple(m)) for m in modules))

    def contains(self, x, z):
        out = np.zeros(np.broadcast(np.asarray(x), np.asarray(z)).shape, dtype=bool)
        for m in self.modules:
            out |= m.contains(x, z)
        return out


@dataclass(frozen=True, eq=False)
class SampledAperture:
    """Quadrature point cloud: (M, 3) points and per-point weights."""

    points: np.ndarray
    weights: np.ndarray
    spacing: float
    module_index: np.ndarray = field(default=None)

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=float).reshape(-1, 3)
        w = np.ascontiguousarray(self.weights, dtype=float).reshape(-1)
        if pts.shape[0] != w.shape[0]:
            raise ValueError("points and weights differ in length")
        mi = self.module_index
        mi = np.zeros(len(w), dtype=int) if mi is None else np.asarray(mi, dtype=int)
        for arr in (pts, w, mi):
            arr.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "module_index", mi)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def area(self) -> float:
        return float(self.weights.sum())

    @property
    def norms2(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.points, self.points)

    def module(self, n: int) -> "SampledAperture":
        sel = self.module_index == n
        return SampledAperture(self.points[sel], self.weights[sel], self.spacing, self.module_index[sel])


@dataclass(frozen=True)
class ExtremeDistances:
    p_min: float
    p_max: float

    def __post_init__(self):
        if not 0 <= self.p_min <= self.p_max:
            raise ValueError("extreme distances must satisfy 0 <= p_min <= p_max")


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _line_coverage(module: Module, x, za, zb):
    """Covered length and first z-moment of the module on vertical lines.

    Line ``i`` is ``{x[i]} x [za[i], zb[i]]``.  Exact for rectangle, disk
    and annulus outlines: events are swept in z with one counter for
    additive intervals and one for holes.
    """
    pos, da, dh = [], [], []
    for prim in module.primitives:
        if not hasattr(prim, "chords"):
            continue  # points and segments have no area
        lo, hi = prim.chords(x)
        lo = np.clip(lo, za[:, None], zb[:, None])
        hi = np.clip(np.maximum(hi, lo), za[:, None], zb[:, None])
        one = np.ones_like(lo)
        pos += [lo, hi]
        if prim.hole:
            da += [0 * one, 0 * one]
            dh += [one, -one]
        else:
            da += [one, -one]
            dh += [0 * one, 0 * one]
    P, A, Hc = (np.concatenate(v, axis=1) for v in (pos, da, dh))
    order = np.argsort(P, axis=1, kind="stable")
    P = np.take_along_axis(P, order, axis=1)
    ca = np.cumsum(np.take_along_axis(A, order, axis=1), axis=1)[:, :-1]
    ch = np.cumsum(np.take_along_axis(Hc, order, axis=1), axis=1)[:, :-1]
    on = (ca > 0) & (ch <= 0)
    length = ((P[:, 1:] - P[:, :-1]) * on).sum(axis=1)
    moment = ((P[:, 1:] ** 2 - P[:, :-1] ** 2) * on).sum(axis=1) / 2
    return length, moment


def _covered_cells(module: Module, X0, Z0, h):
    """Covered area and centroid of cells ``[X0, X0 + h] x [Z0, Z0 + h]``.

    Vertical-line coverage is integrated in x by Gauss-Legendre rules split
    at every primitive's x-breakpoints, so straight vertical edges are exact.
    """
    bk = np.array([b for p in module.primitives if hasattr(p, "breaks") for b in p.breaks])
    nodes, gw = np.polynomial.legendre.leggauss(_GAUSS_NODES)
    X1 = X0 + h
    edges = np.sort(np.column_stack([X0, X1, np.clip(bk[None, :], X0[:, None], X1[:, None])]), axis=1)
    a, b = edges[:, :-1], edges[:, 1:]
    half = (b - a) / 2
    xn = (a + half)[..., None] + half[..., None] * nodes  # (cells, pieces, nodes)
    wn = half[..., None] * gw
    shape = xn.shape
    za = np.broadcast_to(Z0[:, None, None], shape).ravel()
    length, moment = _line_coverage(module, xn.ravel(), za, za + h)
    length, moment = length.reshape(shape), moment.reshape(shape)
    area = (wn * length).sum(axis=(1, 2))
    safe = np.where(area > 0, area, 1.0)
    mx = (wn * xn * length).sum(axis=(1, 2)) / safe
    mz = (wn * moment).sum(axis=(1, 2)) / safe
    return area, mx, mz


def _nearest_inside(module: Module, X0, Z0, h, mx, mz):
    """Sub-grid point inside each cell closest to ``(mx, mz)``."""
    n = _SUBSAMPLES
    off = (np.arange(n) + 0.5) / n
    ox, oz = (g.ravel() for g in np.meshgrid(off, off, indexing="ij"))
    bx = X0[:, None] + ox[None, :] * h
    bz = Z0[:, None] + oz[None, :] * h
    inside = module.contains(bx, bz)
    d2 = np.where(inside, (bx - mx[:, None]) ** 2 + (bz - mz[:, None]) ** 2, np.inf)
    j = np.argmin(d2, axis=1)
    rows = np.arange(len(X0))
    ok = np.isfinite(d2[rows, j])
    return np.where(ok, bx[rows, j], mx), np.where(ok, bz[rows, j], mz)


def _sample_planar(module: Module, h: float) -> tuple[np.ndarray, np.ndarray]:
    x0 = min(p.bounds[0] for p in module.additive)
    x1 = max(p.bounds[1] for p in module.additive)
    z0 = min(p.bounds[2] for p in module.additive)
    z1 = max(p.bounds[3] for p in module.additive)
    # cells [i h, (i + 1) h] of a lattice anchored at the origin
    ix = np.arange(math.floor(x0 / h), math.ceil(x1 / h))
    iz = np.arange(math.floor(z0 / h), math.ceil(z1 / h))
    if ix.size == 0 or iz.size == 0:
        return np.empty((0, 2)), np.empty(0)
    IX, IZ = (g.ravel() for g in np.meshgrid(ix, iz, indexing="ij"))
    X0, Z0 = IX * h, IZ * h

    cut = np.zeros(len(X0), dtype=bool)
    for p in module.primitives:
        if hasattr(p, "crosses"):
            cut |= p.crosses(X0, X0 + h, Z0, Z0 + h)
    full = ~cut & module.contains(X0 + h / 2, Z0 + h / 2)

    xs, zs, ws = [X0[full] + h / 2], [Z0[full] + h / 2], [np.full(int(full.sum()), h * h)]
    if cut.any():
        cx0, cz0 = X0[cut], Z0[cut]
        area, mx, mz = _covered_cells(module, cx0, cz0, h)
        keep = area > _EDGE_TOL * h * h
        cx0, cz0, area, mx, mz = cx0[keep], cz0[keep], area[keep], mx[keep], mz[keep]
        # the centroid of a non-convex covered part may fall outside the region
        bad = ~module.contains(mx, mz)
        if bad.any():
            mx[bad], mz[bad] = _nearest_inside(module, cx0[bad], cz0[bad], h, mx[bad], mz[bad])
        xs.append(mx)
        zs.append(mz)
        ws.append(np.minimum(area, h * h))

    return np.column_stack([np.concatenate(xs), np.concatenate(zs)]), np.concatenate(ws)


def _sample_linear(module: Module, h: float) -> tuple[np.ndarray, np.ndarray]:
    pts, ws = [], []
    for seg in module.additive:
        L = seg.length
        n = max(int(round(L / h)), 1)
        s = np.linspace(0.0, 1.0, n + 1)
        w = np.full(n + 1, L / n)
        w[0] = w[-1] = L / (2 * n)
        pts.append(np.column_stack([seg.x0 + s * (seg.x1 - seg.x0), seg.z0 + s * (seg.z1 - seg.z0)]))
        ws.append(w)
    xz = np.vstack(pts)
    w = np.concatenate(ws)
    keep = np.ones(len(w), dtype=bool)
    for hole in module.holes:
        keep &= ~hole.interior(xz[:, 0], xz[:, 1])
    return xz[keep], w[keep]


def _sample_points(module: Module) -> tuple[np.ndarray, np.ndarray]:
    xz = np.array([[p.x, p.z] for p in module.additive])
    w = np.array([p.weight for p in module.additive])
    return xz, w


def sample_aperture(region: ApertureRegion, spacing: float, wavelength: float | None = None) -> SampledAperture:
    """Midpoint-rule point cloud over ``region``.

    Interior cells of a lattice with pitch ``spacing`` contribute their
    center with weight ``spacing**2``.  Cells cut by a boundary contribute
    the centroid of their covered part, weighted by the covered area.  Segments are sampled at their own
    pitch with trapezoidal weights.  Modules whose area is below
    ``(wavelength / 4)**2`` (``(spacing / 2)**2`` when no wavelength is
    given) collapse to a point source at their centroid.

    Points are ordered lexicographically by x, then z.
    """
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    tiny = (wavelength / 4) ** 2 if wavelength else (spacing / 2) ** 2

    all_xz, all_w, all_idx = [], [], []
    for n, module in enumerate(region.modules):
        if module.dim == 0:
            xz, w = _sample_points(module)
        elif module.dim == 1:
            xz, w = _sample_linear(module, spacing)
        else:
            area = module.nominal_area
            if area <= 0:
                raise DegenerateApertureError("degenerate aperture")
            if area < tiny:
                c = np.mean([p.centroid for p in module.additive], axis=0)
                xz, w = c[None, :], np.array([area])
            else:
                xz, w = _sample_planar(module, spacing)
        if len(w) == 0:
            raise DegenerateApertureError("degenerate aperture")
        all_xz.append(xz)
        all_w.append(w)
        all_idx.append(np.full(len(w), n))

    xz = np.vstack(all_xz)
    w = np.concatenate(all_w)
    idx = np.concatenate(all_idx)
    order = np.lexsort((xz[:, 1], xz[:, 0]))
    xz, w, idx = xz[order], w[order], idx[order]
    pts = np.column_stack([xz[:, 0], np.zeros(len(w)), xz[:, 1]])
    return SampledAperture(pts, w, float(spacing), idx)


# ---------------------------------------------------------------------------
# extreme distances and projection
# ---------------------------------------------------------------------------


def _module_extremes(module: Module, form: np.ndarray) -> tuple[float, float]:
    cands = []
    for p in module.additive:
        pmin, pmax, amin, amax = p.extremes(form)
        cands.extend([amin, amax])
        if module.holes:
            cands.append(p.boundary(_BOUNDARY_POINTS))
    for hole in module.holes:
        cands.append(hole.boundary(_BOUNDARY_POINTS))
        # analytic nearest and farthest points of the hole outline
        if isinstance(hole, (Disk, Annulus, Rectangle, Segment)):
            _, _, amin, amax = hole.extremes(form)
            cands.extend([amin, amax])
    pts = np.vstack([np.atleast_2d(c) for c in cands])
    if module.holes:
        # hole outlines whose nearest point sits at the origin give no usable candidate
        pts = pts[module.contains(pts[:, 0], pts[:, 1])]
    if len(pts) == 0:
        raise DegenerateApertureError("degenerate aperture")
    d = _qnorm(pts, form)
    pmin = float(d.min())
    pmax = float(d.max())
    if module.dim == 2 and not module.holes:
        # additive primitives only: their analytic extremes are exact
        vals = [p.extremes(form) for p in module.additive]
        pmin = min(v[0] for v in vals)
        pmax = max(v[1] for v in vals)
    return pmin, pmax


def extreme_distances(
    region: ApertureRegion, direction: Direction | None = None, per_module: bool = False
):
    """Nearest and farthest distance from the origin to ``region``.

    With ``direction`` the distances are those of the projected aperture,
    ``||p||^2 - (u^T p)^2``.  Extremes come from the analytic extremes of
    each primitive, plus points on the hole outlines when holes are present
    (outlines scanned at 8192 points per loop; analytic nearest/farthest
    outline points are always included).

    Returns one ``ExtremeDistances`` or, with ``per_module``, a list.
    """
    form = projection_form(direction)
    per = [_module_extremes(m, form) for m in region.modules]
    if per_module:
        return [ExtremeDistances(a, b) for a, b in per]
    return ExtremeDistances(min(a for a, _ in per), max(b for _, b in per))


def sampled_extremes(aperture: SampledAperture) -> ExtremeDistances:
    d = np.sqrt(aperture.norms2)
    return ExtremeDistances(float(d.min()), float(d.max()))


def project_aperture(aperture: SampledAperture, direction: Direction) -> SampledAperture:
    """Map every point onto the plane orthogonal to ``direction``: ``(I - u u^T) p``."""
    u = direction.u
    pts = aperture.points - np.outer(aperture.points @ u, u)
    return SampledAperture(pts, aperture.weights, aperture.spacing, aperture.module_index)


# ---------------------------------------------------------------------------
# receive array
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReceiveArray:
    direction: Direction
    r_min: float
    r_max: float
    count: int = 256
    sampling_mode: str = "inverse_r"

    def __post_init__(self):
        if not (0 < self.r_min < self.r_max):
            raise ValueError("receive array requires 0 < r_min < r_max")
        if int(self.count) != self.count or self.count < 2:
            raise ValueError("receive array needs count >= 2")
        if self.sampling_mode not in ("inverse_r", "uniform_r"):
            raise ValueError(f"unknown sampling mode {self.sampling_mode!r}")

    @property
    def T(self) -> float:
        """Length of the inverse-distance interval, ``1/r_min - 1/r_max``."""
        return 1.0 / self.r_min - 1.0 / self.r_max


@dataclass(frozen=True, eq=False)
class ReceiveSamples:
    """Receive sample positions and their quadrature weights.

    ``t_weights`` integrate over ``t = 1/r``; ``r_weights`` are the same
    measure expressed in ``r`` (``dr = dt / t**2``).
    """

    r: np.ndarray
    q: np.ndarray
    t: np.ndarray
    t_weights: np.ndarray
    r_weights: np.ndarray
    direction: Direction

    def __len__(self) -> int:
        return len(self.r)

    def __iter__(self) -> Iterator[tuple[float, np.ndarray]]:
        return iter(zip(self.r, self.q))


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    dx = np.diff(x)
    w = np.zeros_like(x)
    w[:-1] += dx / 2
    w[1:] += dx / 2
    return w


def sample_receive_array(array: ReceiveArray) -> ReceiveSamples:
    """Samples along ``q = r u``; the default places ``t = 1/r`` uniformly."""
    K = int(array.count)
    if array.sampling_mode == "inverse_r":
        t = np.linspace(1.0 / array.r_max, 1.0 / array.r_min, K)
        t_w = _trapezoid_weights(t)
        r = 1.0 / t
        r_w = t_w / t**2
    else:
        r = np.linspace(array.r_min, array.r_max, K)
        r_w = _trapezoid_weights(r)
        t = 1.0 / r
        t_w = r_w * t**2
    q = np.outer(r, array.direction.u)
    return ReceiveSamples(r, q, t, t_w, r_w, array.direction)
