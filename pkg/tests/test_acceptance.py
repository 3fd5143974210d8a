"""Acceptance suite: one test and one PASS/FAIL line per criterion.

Run on its own with ``pytest tests/test_acceptance.py -s`` or
``python tests/test_acceptance.py``; the lines are also repeated in the
terminal summary of any pytest run that includes this file.
"""
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from nfdof import (
    Annulus,
    ApertureRegion,
    ChannelModel,
    Disk,
    ReceiveArray,
    Rectangle,
    Segment,
    broadside,
    build_channel_matrix,
    convolve_sinc,
    count_dominant,
    dof_broadside,
    dof_hole_fraction,
    dof_region,
    extreme_distances,
    g0_spectrum,
    gram_eigenvalues,
    max_phase_error,
    measured_bandwidth,
    project_aperture,
    sample_aperture,
    sample_receive_array,
    t_domain_eigenvalues,
)

from conftest import eigenspectrum, off_broadside, report, square_with_hole

EPS = 0.01


def test_criterion_1_square_hole_reproduction():
    t0 = time.perf_counter()
    region = square_with_hole()
    ext = extreme_distances(region)
    pred = dof_broadside(ext.p_min, ext.p_max, 200, 2000, 1.0).value
    c = count_dominant(eigenspectrum(region, K=256, spacing=0.5), EPS)
    runtime = time.perf_counter() - t0
    ok = abs(pred - 14.4) <= 1e-9 and 12 <= c.count <= 16 and runtime <= 300
    report(
        "criterion 1",
        ok,
        f"closed form {pred:.6g} (14.4), count {c.count} in [12, 16], runtime {runtime:.2f}s (<= 300s)",
    )
    assert ok


def test_criterion_2_shape_invariance():
    shapes = {
        "square minus disk": square_with_hole(),
        "annulus": ApertureRegion.single(Annulus(0, 0, 60, 100)),
        "disk minus square": ApertureRegion.single(Disk(0, 0, 100), Rectangle.centered(120, 120, hole=True)),
    }
    counts, ext_ok = {}, True
    for name, region in shapes.items():
        e = extreme_distances(region)
        ext_ok &= abs(e.p_min - 60) <= 1e-9 and abs(e.p_max - 100) <= 1e-9
        counts[name] = count_dominant(eigenspectrum(region), EPS).count
    spread = max(counts.values()) - min(counts.values())
    ok = ext_ok and spread <= 1
    detail = ", ".join(f"{k} {v}" for k, v in counts.items())
    report("criterion 2", ok, f"extremes (60, 100) for all: {ext_ok}; counts {detail}; spread {spread} (<= 1)")
    assert ok


def test_criterion_3_spectrum():
    region = square_with_hole()
    ap = sample_aperture(region, 0.5, 1.0)
    array = ReceiveArray(broadside(), 200, 2000)
    prof = convolve_sinc(g0_spectrum(ap, array, 1.0, extremes=extreme_distances(region)))
    lo, hi = prof.omega
    support = prof.xi[prof.g0 > 0]
    support_ok = support.min() >= lo - prof.dxi and support.max() <= hi + prof.dxi
    width = measured_bandwidth(prof, 0.5)
    width_ok = abs(width - 14.4) <= 1.5
    ok = support_ok and width_ok and abs(lo + 22.5) < 1e-9 and abs(hi + 8.1) < 1e-9
    report(
        "criterion 3",
        ok,
        f"Omega [{lo:.4g}, {hi:.4g}], g0 support [{support.min():.4g}, {support.max():.4g}] within one bin: {support_ok}; "
        f"half-level width {width:.4g} vs 14.4 +- 1.5: {width_ok}",
    )
    assert ok


def test_criterion_4_inverse_distance_equivalence():
    region = square_with_hole()
    ap = sample_aperture(region, 0.5, 1.0)
    array = ReceiveArray(broadside(), 200, 2000, 128)
    H = build_channel_matrix(ap, sample_receive_array(array), ChannelModel("fresnel", 1.0))
    r_side = gram_eigenvalues(H).values[:14]
    t_side = t_domain_eigenvalues(ap, array, 1.0).values[:14]
    rel = np.abs(r_side - t_side) / r_side
    ok = rel.max() <= 0.01
    report("criterion 4", ok, f"top-14 max relative difference {rel.max():.3e} (<= 1e-2) at K=128")
    assert ok


def test_criterion_5_projection_equivalence():
    region = ApertureRegion.single(Rectangle.centered(150, 50))
    d = off_broadside(60.0, 0.0)
    ap = sample_aperture(region, 0.5, 1.0)
    rx = sample_receive_array(ReceiveArray(d, 400, 4000, 256))
    model = ChannelModel("fresnel", 1.0)
    a = gram_eigenvalues(build_channel_matrix(ap, rx, model))
    b = gram_eigenvalues(build_channel_matrix(project_aperture(ap, d), rx, model))
    ca, cb = count_dominant(a, EPS).count, count_dominant(b, EPS).count
    n = max(ca, cb)
    rel = np.abs(a.values[:n] - b.values[:n]) / a.values[:n]
    ok = ca == cb and rel.max() <= 0.02
    report("criterion 5", ok, f"counts {ca} vs {cb}; dominant eigenvalues max relative difference {rel.max():.3e} (<= 2e-2)")
    assert ok


def test_criterion_6_fresnel_error():
    region = ApertureRegion.single(Segment.along_x(-100, 100))
    d = off_broadside(75.0)
    ap = sample_aperture(region, 0.5, 1.0)
    e1400 = max_phase_error(ap, ReceiveArray(d, 1400, 14000), 1.0)
    e700 = max_phase_error(ap, ReceiveArray(d, 700, 7000), 1.0)
    phase_ok = abs(e1400 / (math.pi / 8) - 1) <= 0.05 and abs(e700 / (math.pi / 2) - 1) <= 0.05
    parts, counts_ok = [], True
    for r_min in (200, 300):
        ce = count_dominant(eigenspectrum(region, d, r_min, 2000, model="exact"), EPS).count
        cf = count_dominant(eigenspectrum(region, d, r_min, 2000, model="fresnel"), EPS).count
        diff = abs(ce - cf) / ce
        counts_ok &= diff <= 0.10
        parts.append(f"r_min={r_min}: exact {ce}, fresnel {cf} ({100 * diff:.1f}%)")
    ok = phase_ok and counts_ok
    report(
        "criterion 6",
        ok,
        f"phase error {e1400:.4f} (pi/8={math.pi / 8:.4f}), {e700:.4f} (pi/2={math.pi / 2:.4f}); " + "; ".join(parts),
    )
    assert ok


def test_criterion_7_modular_superposition():
    sym = ApertureRegion.from_modules([Segment.along_x(40, 100)], [Segment.along_x(-100, -40)])
    cen = ApertureRegion.single(Segment.along_x(-60, 60))
    array = ReceiveArray(broadside(), 200, 2000)

    ap = sample_aperture(sym, 0.5, 1.0)
    whole = convolve_sinc(g0_spectrum(ap, array, 1.0))
    total = sum(convolve_sinc(g0_spectrum(ap.module(n), array, 1.0, xi_grid=whole.xi)).g for n in range(2))
    resid = np.abs(total - whole.g).max() / np.abs(whole.g).max()

    p_sym = dof_region(sym, broadside(), 200, 2000, 1.0).value
    p_cen = dof_region(cen, broadside(), 200, 2000, 1.0).value
    c_sym = count_dominant(eigenspectrum(sym), EPS).count
    c_cen = count_dominant(eigenspectrum(cen), EPS).count
    checks = {
        "superposition": resid <= 1e-10,
        "predictions": abs(p_sym - 18.9) <= 1e-9 and abs(p_cen - 8.1) <= 1e-9,
        "modular count 19+-2": abs(c_sym - 19) <= 2,
        "centered count 8+-2": abs(c_cen - 8) <= 2,
        "ordering": c_sym > c_cen,
    }
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    report(
        "criterion 7",
        ok,
        f"residual {resid:.2e}; predictions {p_sym:.4g} / {p_cen:.4g}; counts {c_sym} / {c_cen}"
        + (f"; failed: {', '.join(failed)}" if failed else ""),
    )
    assert ok


def test_criterion_8_hole_fraction():
    L = 100.0
    full = dof_hole_fraction(L, 0.0, 200, 2000, 1.0).value
    holed = dof_hole_fraction(L, 0.3, 200, 2000, 1.0).value
    ratio = holed / full
    c_full = count_dominant(eigenspectrum(ApertureRegion.single(Segment.along_x(-L, L))), EPS).count
    c_hole = count_dominant(
        eigenspectrum(ApertureRegion.from_modules([Segment.along_x(0.3 * L, L)], [Segment.along_x(-L, -0.3 * L)])), EPS
    ).count
    emp = c_hole / c_full
    ok = abs(ratio - 0.91) <= 1e-12 and abs(emp - 0.91) <= 0.05
    report("criterion 8", ok, f"prediction ratio {ratio:.15g}; counts {c_hole}/{c_full} = {emp:.4f} (0.91 +- 0.05)")
    assert ok


def test_criterion_9_property_suite():
    from test_properties import EXAMPLES

    here = Path(__file__).parent
    t0 = time.perf_counter()
    res = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", str(here / "test_properties.py")],
        capture_output=True,
        text=True,
        cwd=here.parent,
    )
    runtime = time.perf_counter() - t0
    tail = res.stdout.strip().splitlines()[-1] if res.stdout.strip() else res.stderr.strip()[-200:]
    ok = res.returncode == 0 and EXAMPLES.max_examples >= 100 and runtime <= 600
    report("criterion 9", ok, f"{tail}; {EXAMPLES.max_examples} examples per property; runtime {runtime:.1f}s (<= 600s)")
    assert ok, res.stdout[-3000:]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
