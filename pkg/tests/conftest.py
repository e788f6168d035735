import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from risnf import SystemConfig  # noqa: E402


@pytest.fixture
def system():
    return SystemConfig(3e9)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def assert_hermitian_psd(R, herm_tol=1e-12, psd_tol=1e-10):
    """Shared PSD check: Hermitian to ``herm_tol`` relative, spectrum above ``-psd_tol * top``."""
    A = np.asarray(getattr(R, "entries", R))
    scale = np.abs(A).max()
    assert np.abs(A - A.conj().T).max() <= herm_tol * scale
    w = np.linalg.eigvalsh(0.5 * (A + A.conj().T))
    assert w[0] >= -psd_tol * w[-1]


# ---------------------------------------------------------------- acceptance report
#
# Tests tagged ``@pytest.mark.acceptance(n, title)`` get one PASS/FAIL line each
# in the terminal summary. A test may attach the measured quantity with
# ``request.node.user_properties.append(("measured", text))``.

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    n, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        measured = dict(item.user_properties).get("measured", "")
        if rep.skipped:
            status = "SKIP"
        else:
            status = "PASS" if rep.passed else "FAIL"
        _ACCEPTANCE[n] = (status, title, measured)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        status, title, measured = _ACCEPTANCE[n]
        line = f"criterion {n:2d}: {status}  {title}"
        if measured:
            line += f"  [{measured}]"
        tr.write_line(line)
