import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from onforms.pair import OutputPair

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_orthogonal(n, rng):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def random_stable_pair(n, d, rng, rho=0.9):
    A = rng.standard_normal((n, n))
    A *= rho / np.max(np.abs(np.linalg.eigvals(A)))
    return OutputPair(A, rng.standard_normal((d, n)))


def random_on_pair(n, d, rng, rho=0.9):
    from onforms.normal_form import to_output_normal
    return to_output_normal(random_stable_pair(n, d, rng, rho))[0]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = next((m for name, m in list(sys.modules.items())
                if name.endswith("test_acceptance")
                and hasattr(m, "summary_lines")), None)
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
