"""Randomized invariants (hypothesis, 100+ examples each)."""
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from nfdof import (
    Annulus,
    ApertureRegion,
    Direction,
    Disk,
    ExtremeDistances,
    ReceiveArray,
    Rectangle,
    SampledAperture,
    Segment,
    convolution_kernel_g,
    count_dominant,
    dof_broadside,
    dof_hole_fraction,
    dof_modular,
    dof_projected,
    extreme_distances,
    interval_union,
    inverse_distance_kernel,
    max_phase_error,
    project_aperture,
    sample_aperture,
    t_domain_eigenvalues,
)

EXAMPLES = settings(max_examples=100, deadline=None)

angles = st.floats(-math.pi, math.pi, allow_nan=False)
directions = st.builds(Direction, angles, st.floats(-math.pi / 2, math.pi / 2))
coord = st.floats(-50, 50, allow_nan=False)


@st.composite
def point_clouds(draw, n_max=40):
    n = draw(st.integers(1, n_max))
    xz = draw(st.lists(st.tuples(coord, coord), min_size=n, max_size=n))
    w = draw(st.lists(st.floats(0.01, 2.0), min_size=n, max_size=n))
    pts = np.array([[x, 0.0, z] for x, z in xz])
    return SampledAperture(pts, np.array(w), 0.5)


@st.composite
def primitives(draw):
    kind = draw(st.sampled_from(["rectangle", "disk", "annulus"]))
    cx, cz = draw(st.floats(-30, 30)), draw(st.floats(-30, 30))
    if kind == "rectangle":
        w, h = draw(st.floats(3, 40)), draw(st.floats(3, 40))
        return Rectangle.centered(w, h, (cx, cz)), w * h
    if kind == "disk":
        r = draw(st.floats(3, 25))
        return Disk(cx, cz, r), math.pi * r * r
    a = draw(st.floats(2, 15))
    b = a + draw(st.floats(2, 15))
    return Annulus(cx, cz, a, b), math.pi * (b * b - a * a)


@st.composite
def spans(draw):
    r_min = draw(st.floats(10, 1000))
    r_max = r_min * draw(st.floats(1.01, 20))
    return r_min, r_max


@st.composite
def extremes(draw):
    a = draw(st.floats(0, 100))
    return a, a + draw(st.floats(0, 100))


intervals = st.lists(
    st.tuples(st.floats(-100, 100), st.floats(0, 50)).map(lambda t: (t[0], t[0] + t[1])), min_size=1, max_size=8
)


# geometry -------------------------------------------------------------------


@EXAMPLES
@given(point_clouds(), directions)
def test_projection_idempotent(ap, d):
    once = project_aperture(ap, d)
    twice = project_aperture(once, d)
    np.testing.assert_allclose(twice.points, once.points, atol=1e-12 * max(1.0, np.abs(ap.points).max()))
    np.testing.assert_array_equal(once.weights, ap.weights)


@EXAMPLES
@given(point_clouds(), directions)
def test_projection_norm_identity(ap, d):
    proj = project_aperture(ap, d)
    up = ap.points @ d.u
    lhs = proj.norms2 + up**2
    np.testing.assert_allclose(lhs, ap.norms2, rtol=1e-10, atol=1e-10)


@EXAMPLES
@given(primitives(), directions)
def test_projected_extremes_shrink(prim, d):
    region = ApertureRegion.single(prim[0])
    plain = extreme_distances(region)
    proj = extreme_distances(region, d)
    assert proj.p_max <= plain.p_max * (1 + 1e-9)
    assert proj.p_min <= plain.p_min * (1 + 1e-9) + 1e-9


@EXAMPLES
@given(primitives())
def test_area_conservation(prim):
    shape, area = prim
    ap = sample_aperture(ApertureRegion.single(shape), 0.5, 1.0)
    assert abs(ap.area - area) / area <= 5e-3


@EXAMPLES
@given(primitives(), st.floats(0.0, 30.0))
def test_sampled_points_within_extremes(prim, offset):
    region = ApertureRegion.single(prim[0])
    ap = sample_aperture(region, 0.5, 1.0)
    ext = extreme_distances(region)
    n = np.sqrt(ap.norms2)
    assert n.max() <= ext.p_max + 1e-9 and n.min() >= ext.p_min - 1e-9


# channel / spectral ----------------------------------------------------------


@EXAMPLES
@given(point_clouds(), directions, st.floats(50, 5000))
def test_phase_error_inverse_square(ap, d, r):
    a = max_phase_error(ap, ReceiveArray(d, r, 10 * r), 1.0)
    b = max_phase_error(ap, ReceiveArray(d, 2 * r, 20 * r), 1.0)
    assert a == pytest.approx(4 * b, rel=1e-12, abs=1e-300)


@EXAMPLES
@given(point_clouds(), st.floats(1e-5, 1e-2))
def test_kernel_conjugate_symmetry(ap, dt):
    g = convolution_kernel_g(ap, [dt, -dt], 1.0)
    assert abs(g[1] - np.conj(g[0])) <= 1e-12 * ap.weights.sum()


@EXAMPLES
@given(point_clouds(n_max=25), spans(), st.integers(2, 24), directions)
def test_kernel_toeplitz_hermitian(ap, span, K, d):
    t = np.linspace(1 / span[1], 1 / span[0], K)
    g = inverse_distance_kernel(ap, t, 1.0, d)
    scale = ap.weights.sum()
    assert np.abs(g - g.conj().T).max() <= 1e-10 * scale
    for k in range(K):
        diag = np.diagonal(g, k)
        assert np.abs(diag - diag[0]).max() <= 1e-10 * scale


@EXAMPLES
@given(point_clouds(n_max=25), spans(), st.integers(2, 24), directions)
def test_trace_identity(ap, span, K, d):
    array = ReceiveArray(d, span[0], span[1], K)
    s = t_domain_eigenvalues(ap, array, 1.0)
    assert s.values.sum() == pytest.approx(array.T * ap.weights.sum(), rel=1e-8)


@EXAMPLES
@given(st.lists(st.floats(0, 10), min_size=1, max_size=30), st.floats(1e-3, 0.5))
def test_count_sensitivity_ordering(vals, eps):
    assume(max(vals) > 0)
    c = count_dominant(vals, eps)
    assert c.sensitivity[eps * 10] <= c.count <= c.sensitivity[eps / 10]


# dof ----------------------------------------------------------------------


@EXAMPLES
@given(extremes(), spans(), st.floats(0.001, 0.2))
def test_broadside_monotonicity(ext, span, h):
    p_min, p_max = ext
    r_min, r_max = span
    assume(p_max >= 1.0 and p_max - p_min >= 0.01 * p_max)

    def f(a, b, c, d):
        return dof_broadside(a, b, c, d, 1.0).value

    base = f(p_min, p_max, r_min, r_max)
    # finite-difference steps that stay inside the valid domain
    assert f(p_min, p_max * (1 + h), r_min, r_max) > base
    assert f(p_min, p_max, r_min, r_max * (1 + h)) > base
    assert f(p_min, p_max, r_min + h * (r_max - r_min) / 2, r_max) < base
    assert f(p_min + h * (p_max - p_min) / 2, p_max, r_min, r_max) < base


@EXAMPLES
@given(extremes(), spans())
def test_modular_single_is_broadside(ext, span):
    a = dof_modular([ExtremeDistances(*ext)], *span, 1.0).value
    b = dof_broadside(*ext, *span, 1.0).value
    assert a == b


@EXAMPLES
@given(st.lists(extremes(), min_size=1, max_size=6), spans())
def test_modular_union_bound(exts, span):
    mods = [ExtremeDistances(*e) for e in exts]
    pred = dof_modular(mods, *span, 1.0)
    parts = [dof_broadside(*e, *span, 1.0).value for e in exts]
    assert pred.value <= sum(parts) * (1 + 1e-12) + 1e-12
    ivs = sorted(iv for iv in (((-b * b), (-a * a)) for a, b in exts) if iv[1] > iv[0])
    disjoint = all(x[1] < y[0] for x, y in zip(ivs, ivs[1:]))
    if disjoint:
        assert pred.value == pytest.approx(sum(parts), rel=1e-12, abs=1e-12)


@EXAMPLES
@given(st.floats(1, 200), st.floats(0, 0.99), spans())
def test_hole_fraction_is_modular(L, alpha, span):
    a = dof_hole_fraction(L, alpha, *span, 1.0).value
    b = dof_modular([ExtremeDistances(alpha * L, L)] * 2, *span, 1.0).value
    assert abs(a - b) <= 1e-12 * max(a, 1e-300)


@EXAMPLES
@given(primitives(), directions, spans())
def test_projection_dominance(prim, d, span):
    region = ApertureRegion.single(prim[0])
    ext = extreme_distances(region)
    proj = dof_projected(region, d, *span, 1.0).value
    # projecting can move p_min towards zero, so compare with the (0, p_max) bound
    assert proj <= dof_broadside(0.0, ext.p_max, *span, 1.0).value * (1 + 1e-9)


@EXAMPLES
@given(extremes(), spans())
def test_equal_extremes_equal_prediction(ext, span):
    a, b = ext
    assume(b - a > 1.0 and a > 0.5)
    ring = ApertureRegion.single(Annulus(0, 0, a, b))
    holed = ApertureRegion.single(Disk(0, 0, b), Disk(0, 0, a, hole=True))
    square = ApertureRegion.single(Disk(0, 0, b), Rectangle.centered(2 * a, 2 * a, hole=True))
    preds = []
    for region in (ring, holed, square):
        e = extreme_distances(region)
        assert (e.p_min, e.p_max) == pytest.approx((a, b), rel=1e-9)
        preds.append(dof_broadside(a, b, *span, 1.0).value)
    assert preds[0] == preds[1] == preds[2]


# interval union algebra ---------------------------------------------------------


def _measure(ivs):
    return sum(b - a for a, b in ivs)


@EXAMPLES
@given(intervals)
def test_union_sorted_disjoint(ivs):
    u = interval_union(ivs)
    assert all(a < b for a, b in u)
    assert all(x[1] < y[0] for x, y in zip(u, u[1:]))


@EXAMPLES
@given(intervals)
def test_union_idempotent_and_order_free(ivs):
    u = interval_union(ivs)
    assert interval_union(u) == u
    assert interval_union(list(reversed(ivs))) == u
    assert interval_union(ivs + ivs) == u


@EXAMPLES
@given(intervals)
def test_union_measure_bounds(ivs):
    u = interval_union(ivs)
    m = _measure(u)
    assert max(b - a for a, b in ivs) - 1e-9 <= m <= _measure(ivs) + 1e-9


@EXAMPLES
@given(intervals, st.floats(-100, 150))
def test_union_membership(ivs, x):
    inside = any(a <= x <= b for a, b in ivs if b > a)
    u = interval_union(ivs)
    in_union = any(a <= x <= b for a, b in u)
    if inside:
        assert in_union
    elif in_union:
        # only a merged hairline gap (1e-12 relative) may add points
        assert any(a < x < b for a, b in u)
        assert _measure(u) <= _measure(ivs) + 1e-9


@EXAMPLES
@given(intervals, intervals)
def test_union_associative(a, b):
    assert interval_union(interval_union(a) + interval_union(b)) == interval_union(a + b)
