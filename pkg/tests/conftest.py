import numpy as np
import pytest

from spinllg import semiclassical
from spinllg.core import ModelParams

REFERENCE_PARAMS = ModelParams(J=1.0, eta=0.008, omega_c=200.0, h=0.0, eps=2.0)


@pytest.fixture(scope="session")
def ref_params():
    return REFERENCE_PARAMS


@pytest.fixture(scope="session")
def ref_traj():
    """The reference run: a=0.7, b=0.3, t_end=200, rel_tol=1e-10."""
    return semiclassical.integrate(0.7, 0.3, REFERENCE_PARAMS, semiclassical.IntegratorConfig())


def two_spin_ops():
    """Independent 4x4 spin matrices, spin 1 as the left tensor factor."""
    sx = np.array([[0, 1], [1, 0]]) / 2
    sy = np.array([[0, -1j], [1j, 0]]) / 2
    sz = np.array([[1, 0], [0, -1]]) / 2
    eye = np.eye(2)
    S1 = [np.kron(s, eye) for s in (sx, sy, sz)]
    S2 = [np.kron(eye, s) for s in (sx, sy, sz)]
    return S1, S2


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if getattr(rep, "when", None) != "call":
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                lines.append((props["criterion"], "PASS" if rep.passed else "FAIL",
                              props.get("detail", "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for num, status, detail in sorted(lines):
            terminalreporter.write_line(f"[{status}] criterion {num:2d}: {detail}")
