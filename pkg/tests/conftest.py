import numpy as np
import pytest

from omnipl import FrequencyGrid, UcaGeometry, make_gaussian, make_isotropic

GRID = FrequencyGrid(28e9, 30e9, 1001)
GEOM = UcaGeometry(240, 0.15)
DTAU = 1.0 / (GRID.num_points * GRID.step)  # delay bin without zero padding

_ACCEPTANCE = []


def record(criterion: int, ok: bool, detail: str) -> None:
    _ACCEPTANCE.append((criterion, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def iso():
    return make_isotropic()


@pytest.fixture
def horn():
    return make_gaussian(40.0)


def on_grid(bins):
    return np.asarray(bins, dtype=float) * DTAU
