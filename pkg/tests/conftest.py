import json
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("paramarg", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("paramarg")

ORACLES = json.loads((Path(__file__).parent / "oracles" / "derived.json").read_text())


def cval(pair):
    return complex(pair[0], pair[1])


@pytest.fixture(scope="session")
def oracle():
    return ORACLES


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
