import numpy as np
import pytest

import toklink as tk

# one line per acceptance criterion, echoed after the test summary so the
# verdicts stay visible under pytest's output capture
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def default_table():
    return tk.default_bler_table()


@pytest.fixture(scope="session")
def base_profile(default_table):
    return tk.LinkProfile(
        snr_db=6.0, bandwidth_hz=350e3, bler_table=default_table
    )


def make_geometry(t=4, h=8, w=8, d_t=4, d_s=16):
    return tk.Geometry(
        frames=t * d_t, height=h * d_s, width=w * d_s, d_t=d_t, d_s=d_s
    )


def make_jittered_grid(seed, geometry, codebook_size=64000, jitter=512):
    """Reference slice uniform, later slices within +/-jitter of it, so the
    diff magnitude is bounded and small b_delta round-trips exactly."""
    rng = np.random.default_rng(seed)
    base = rng.integers(0, codebook_size, size=(geometry.h, geometry.w))
    if geometry.t > 1:
        offs = rng.integers(
            -jitter, jitter + 1,
            size=(geometry.t - 1, geometry.h, geometry.w),
        )
        rest = np.clip(base[None] + offs, 0, codebook_size - 1)
        idx = np.concatenate([base[None], rest])
    else:
        idx = base[None]
    return tk.TokenGrid(
        codebook_size=codebook_size, geometry=geometry, indices=idx
    )


def make_random_mask(seed, t, h, w, rho=0.3, theta=0.3, first_all_intended=False):
    rng = np.random.default_rng(seed)
    m = (rng.random((t, h, w)) < rho).astype(np.uint8)
    if first_all_intended:
        m[0] = 1
    return tk.SemanticTokenMask(mask=m, theta=theta)


@pytest.fixture
def geometry():
    return make_geometry()


@pytest.fixture
def grid(geometry):
    return make_jittered_grid(3, geometry)


@pytest.fixture
def mask(geometry):
    return make_random_mask(11, geometry.t, geometry.h, geometry.w)
