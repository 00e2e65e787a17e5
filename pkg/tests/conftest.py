import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dirichlet_atlas import make_preset  # noqa: E402
from dirichlet_atlas.verify import analyse_window  # noqa: E402
from dirichlet_atlas.window import GridWindow  # noqa: E402


@pytest.fixture(scope="session")
def zeta():
    return make_preset("zeta")


@pytest.fixture(scope="session")
def zeta_window():
    return GridWindow(-4, 4, 0, 30)


@pytest.fixture(scope="session")
def zeta_analysis(zeta, zeta_window):
    """(curves_f, curves_fp, zeros_f, zeros_fp, strips) for zeta on [-4, 4] x [0, 30]."""
    return analyse_window(zeta, zeta_window)


@pytest.fixture(scope="session")
def zeta_wide():
    """Analysis of zeta on [-4, 6] x [0, 40]: three complete strips."""
    spec = make_preset("zeta")
    w = GridWindow(-4, 6, 0, 40)
    return spec, w, analyse_window(spec, w)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE = []


def record_criterion(number: int, ok: bool, detail: str) -> str:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append((number, line))
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
