import math

import numpy as np
import pytest

from nfdof import (
    ApertureRegion,
    ChannelModel,
    Point,
    ReceiveArray,
    Segment,
    broadside,
    build_channel_matrix,
    exact_coefficient,
    fresnel_coefficient,
    max_phase_error,
    sample_aperture,
    sample_receive_array,
)

from conftest import off_broadside


def test_exact_unit_distance():
    assert exact_coefficient([0, 0, 0], [0, 1, 0], 1.0) == pytest.approx(1 + 0j, abs=1e-12)


def test_exact_half_wavelength():
    assert exact_coefficient([0, 0, 0], [0, 0.5, 0], 1.0) == pytest.approx(-2 + 0j, abs=1e-12)


def test_exact_coincident_points():
    with pytest.raises(ZeroDivisionError, match="zero propagation distance"):
        exact_coefficient([1, 0, 2], [1, 0, 2], 1.0)


def test_exact_reciprocal_magnitude(rng):
    for _ in range(50):
        p, q = rng.normal(size=3) * 10, rng.normal(size=3) * 10
        h = exact_coefficient(p, q, 0.37)
        assert abs(h) * np.linalg.norm(p - q) == pytest.approx(1.0, abs=1e-12)


def test_fresnel_broadside_example():
    h = fresnel_coefficient([1, 0, 0], broadside(), 100.0, 1.0)
    assert abs(h) == pytest.approx(0.01)
    assert np.angle(h) == pytest.approx(-math.pi / 100)


def test_fresnel_origin_element():
    h = fresnel_coefficient([0, 0, 0], off_broadside(30, 10), 50.0, 1.0)
    assert h == pytest.approx(1 / 50 + 0j)


def test_fresnel_collinear_cancellation():
    d = off_broadside(0.0)  # u = x axis
    h = fresnel_coefficient([0.3, 0, 0], d, 10.0, 1.0)
    assert h == pytest.approx(np.exp(1j * 2 * math.pi * 0.3) / 10)


def test_fresnel_rejects_nonpositive_r():
    with pytest.raises(ValueError):
        fresnel_coefficient([0, 0, 0], broadside(), 0.0, 1.0)


def test_model_validation():
    with pytest.raises(ValueError):
        ChannelModel("ray", 1.0)
    with pytest.raises(ValueError):
        ChannelModel("exact", 0.0)


@pytest.mark.parametrize("variant", ["exact", "fresnel"])
def test_matrix_matches_coefficients(variant):
    region = ApertureRegion.single(Segment.along_x(-3, 3))
    ap = sample_aperture(region, 0.5, 1.0)
    d = off_broadside(70, 5)
    rx = sample_receive_array(ReceiveArray(d, 20, 80, 7))
    H = build_channel_matrix(ap, rx, ChannelModel(variant, 1.0))
    assert H.shape == (7, len(ap))
    for k in (0, 3, 6):
        for m in (0, 5, len(ap) - 1):
            p = ap.points[m]
            want = exact_coefficient(p, rx.q[k], 1.0) if variant == "exact" else fresnel_coefficient(p, d, rx.r[k], 1.0)
            assert H.entries[k, m] == pytest.approx(want, rel=1e-12, abs=1e-15)


def test_single_tx_point_rank_one():
    ap = sample_aperture(ApertureRegion.single(Point(1.0, 2.0)), 0.5, 1.0)
    rx = sample_receive_array(ReceiveArray(broadside(), 10, 100, 16))
    H = build_channel_matrix(ap, rx, ChannelModel("exact", 1.0))
    assert np.linalg.matrix_rank(H.entries) == 1


def test_fresnel_rows_constant_magnitude(square_hole_aperture):
    rx = sample_receive_array(ReceiveArray(broadside(), 200, 2000, 8))
    H = build_channel_matrix(square_hole_aperture, rx, ChannelModel("fresnel", 1.0))
    np.testing.assert_allclose(np.abs(H.entries), np.broadcast_to(1 / rx.r[:, None], H.shape), rtol=1e-12)


def test_exact_matrix_coincident_point():
    # receive arrays start at r_min > 0, so reach the kernel directly
    from nfdof import kernels

    with pytest.raises(ZeroDivisionError, match="zero propagation distance"):
        kernels.exact_matrix(np.zeros((1, 3)), np.zeros((1, 3)), 1.0)


@pytest.fixture(scope="module")
def tilted_segment():
    return sample_aperture(ApertureRegion.single(Segment.along_x(-100, 100)), 0.5, 1.0)


def test_phase_error_broadside_zero(square_hole_aperture):
    assert max_phase_error(square_hole_aperture, ReceiveArray(broadside(), 200, 2000), 1.0) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("r_min, target", [(1400, math.pi / 8), (700, math.pi / 2)])
def test_phase_error_tilted_segment(tilted_segment, r_min, target):
    e = max_phase_error(tilted_segment, ReceiveArray(off_broadside(75), r_min, 10 * r_min), 1.0)
    assert abs(e - target) / target <= 0.05


def test_phase_error_inverse_square(tilted_segment):
    a = max_phase_error(tilted_segment, ReceiveArray(off_broadside(75), 500, 5000), 1.0)
    b = max_phase_error(tilted_segment, ReceiveArray(off_broadside(75), 1000, 5000), 1.0)
    assert a / b == pytest.approx(4.0, rel=1e-12)


def test_exact_vs_fresnel_phase_tilted_segment(tilted_segment):
    d = off_broadside(75)
    rx = sample_receive_array(ReceiveArray(d, 1400, 14000, 64))
    He = build_channel_matrix(tilted_segment, rx, ChannelModel("exact", 1.0)).entries
    Hf = build_channel_matrix(tilted_segment, rx, ChannelModel("fresnel", 1.0)).entries
    diff = np.angle(He * np.exp(2j * np.pi * rx.r)[:, None] * np.conj(Hf))
    assert np.abs(diff).max() <= math.pi / 8 * 1.05
