import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pdqsign.rng import substream  # noqa: E402

_ACCEPTANCE = []


def record_acceptance(label, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    _ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture
def rng(request):
    """Per-test deterministic generator keyed by the test name."""
    return substream(20240611, request.node.name)


def random_signs(rng, n, p):
    y = rng.standard_normal((n, p))
    return y / np.linalg.norm(y, axis=1, keepdims=True)


def random_K(rng, p):
    from pdqsign.statistic import KMatrices

    a = rng.standard_normal((p, p))
    b = rng.standard_normal((p, p))
    return KMatrices(np.eye(p) + 0.2 * (a + a.T), np.eye(p) + 0.2 * (b + b.T),
                     2 * np.eye(p) + 0.3 * rng.standard_normal((p, p)))
