import numpy as np
import pytest

from bioheat_homog.cell_static import PhysicalParams
from bioheat_homog.geometry import InclusionSpec, build_unit_cell

SQUARE = InclusionSpec(center=(0.5, 0.5), halfwidth=(0.25, 0.25))


def square_cell(n=32, d=2):
    spec = InclusionSpec(center=(0.5,) * d, halfwidth=(0.25,) * d)
    return build_unit_cell(spec, n, d)


@pytest.fixture
def unit_params():
    return PhysicalParams(alpha=1.0, alpha_b=1.0, gamma=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record ``(label, passed, detail)`` for the end-of-run acceptance summary."""

    def record(label, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}"
        print(line)
        _CRITERIA.append((label, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in sorted(_CRITERIA):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
