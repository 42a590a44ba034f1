import numpy as np
import pytest

from corrcomb import demo_bg1969

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20251015)


@pytest.fixture(scope="session")
def bg1969():
    return demo_bg1969()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def write_spf_csv(path, panel, survey_shift=1, column="UNEMP2"):
    """Write ``panel`` in SPF layout, survey quarter = origin + ``survey_shift``."""
    rows = sorted(((o + survey_shift, fid, v) for (fid, o), v in panel.entries.items()),
                  key=lambda r: (r[0], r[1]))
    with open(path, "w") as fh:
        fh.write(f"YEAR,QUARTER,ID,INDUSTRY,{column}\n")
        for q, fid, v in rows:
            fh.write(f"{q.year},{q.period},{fid},1,{v!r}\n")


def write_actuals_csv(path, actuals):
    with open(path, "w") as fh:
        fh.write("DATE,VALUE\n")
        for q, v in actuals.items():
            fh.write(f"{q},{v!r}\n")


@pytest.fixture
def synthetic_files(tmp_path):
    from corrcomb.simulate import puzzle_panel
    panel, actuals = puzzle_panel(90, 3, 0.5, np.random.default_rng(99))
    spf, act = tmp_path / "spf.csv", tmp_path / "actuals.csv"
    write_spf_csv(spf, panel)
    write_actuals_csv(act, actuals)
    return spf, act, panel, actuals
