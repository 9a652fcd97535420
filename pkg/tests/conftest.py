import sys

import numpy as np
import pytest
from hypothesis import settings

from teeur.ensembles import SeededSource

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture
def source(request):
    return SeededSource(1234, request.node.name)


def random_unitary(source, d):
    q, r = np.linalg.qr(source.complex_normal((d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))[None, :]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
