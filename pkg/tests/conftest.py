import pytest

from wavestab.action import Numerics, action_jet_ek, action_jet_qkdv
from wavestab.models import make_builtin
from wavestab.profile import WaveParamsEK, WaveParamsQ

KDV_POINT = WaveParamsQ(-1000.0, -60.0, 60.0)
NLS_POINT = WaveParamsEK(2.5, -3.0, 1.0, 0.0)


@pytest.fixture(scope="session")
def kdv():
    return make_builtin("kdv3")


@pytest.fixture(scope="session")
def nls():
    return make_builtin("nls-capillarity")


@pytest.fixture(scope="session")
def kdv_jet(kdv):
    return action_jet_qkdv(kdv, KDV_POINT, Numerics(delta_nu=0.005, relative_step=False))


@pytest.fixture(scope="session")
def nls_jet(nls):
    return action_jet_ek(nls, NLS_POINT, Numerics(delta_nu=1e-5, relative_step=False))


ACCEPTANCE_LINES: list[str] = []


def record(criterion: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
