import math
import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@pytest.fixture(scope="session")
def worked_system():
    """Full 2-shift, base 3, golden rotation, F = x_s + x_u + 0.2 cos 2 pi t."""
    from skewspectra import Cocycle, EmbeddingSpec, SkewSystem, TransitionMatrix, linear_cos

    return SkewSystem(TransitionMatrix.full(2), EmbeddingSpec.default(2, 3), Cocycle.rotation(GOLDEN),
                      linear_cos(1.0, 1.0, 0.2, 0.0))


@pytest.fixture(scope="session")
def worked_report(worked_system):
    from skewspectra import validate_membership_R

    return validate_membership_R(worked_system, depth=6)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
