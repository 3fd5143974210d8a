import math

import numpy as np
import pytest

from nfdof import (
    ApertureRegion,
    ChannelModel,
    Direction,
    Disk,
    ReceiveArray,
    Rectangle,
    build_channel_matrix,
    broadside,
    gram_eigenvalues,
    sample_aperture,
    sample_receive_array,
)

LAM = 1.0

# one line per acceptance criterion, filled in by test_acceptance
ACCEPTANCE: dict[str, str] = {}


def report(key: str, ok: bool, detail: str):
    ACCEPTANCE[key] = f"{'PASS' if ok else 'FAIL'}  {key}: {detail}"
    print(ACCEPTANCE[key])
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[1])):
        terminalreporter.write_line(ACCEPTANCE[key])


def square_with_hole(lam=LAM, half_diag=100.0, hole=60.0) -> ApertureRegion:
    side = 2 * half_diag / math.sqrt(2) * lam
    return ApertureRegion.single(Rectangle.centered(side, side), Disk(0.0, 0.0, hole * lam, hole=True))


def eigenspectrum(region, direction=None, r_min=200.0, r_max=2000.0, K=256, spacing=0.5, model="exact", lam=LAM):
    """Full pipeline: sample, channel, Gram eigenvalues (lengths in wavelengths)."""
    direction = direction or broadside()
    ap = sample_aperture(region, spacing * lam, lam)
    rx = sample_receive_array(ReceiveArray(direction, r_min * lam, r_max * lam, K))
    H = build_channel_matrix(ap, rx, ChannelModel(model, lam))
    return gram_eigenvalues(H)


@pytest.fixture(scope="session")
def square_hole_region():
    return square_with_hole()


@pytest.fixture(scope="session")
def square_hole_aperture(square_hole_region):
    return sample_aperture(square_hole_region, 0.5 * LAM, LAM)


@pytest.fixture(scope="session")
def square_hole_array():
    return ReceiveArray(broadside(), 200 * LAM, 2000 * LAM, 256)


@pytest.fixture(scope="session")
def square_hole_spectrum(square_hole_region):
    return eigenspectrum(square_hole_region)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def off_broadside(phi_deg, theta_deg=0.0) -> Direction:
    return Direction(math.radians(phi_deg), math.radians(theta_deg))
