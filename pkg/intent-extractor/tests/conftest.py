import numpy as np
import pytest

from intent_extractor import HeatmapGrid, MockBackend, normalize_scores

# one line per acceptance criterion, echoed after the test summary so the
# verdicts stay visible under pytest's output capture
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


def make_heatmap(raw, patch_size=32) -> HeatmapGrid:
    raw = np.asarray(raw, dtype=np.float64)
    return HeatmapGrid(
        raw=raw, normalized=normalize_scores(raw), patch_size=patch_size
    )


@pytest.fixture
def two_level_backend():
    """3x3 grid: center patch matches the text exactly, rest orthogonal."""
    dim = 4
    patches = np.zeros((3, 3, dim))
    patches[..., 1] = 1.0
    patches[1, 1] = 0.0
    patches[1, 1, 0] = 1.0
    text = np.zeros(dim)
    text[0] = 1.0
    return MockBackend(patches, text)
