import numpy as np
import pytest
from hypothesis import settings

# Fixed example sequence so a run is reproducible; the example database still
# replays any failure found.
settings.register_profile("repro", derandomize=True)
settings.load_profile("repro")

from opcontrol.snapshots import SnapshotSet


def random_stable(rng, d, radius=0.9):
    A = rng.standard_normal((d, d))
    return radius * A / np.max(np.abs(np.linalg.eigvals(A)))


def linear_data(rng, A, m, B=None, p=0, dt=0.1, w_scale=1.0):
    """Exact linear data; known-B if ``B`` is None, else ``x+ = A x + B v``."""
    d = A.shape[0]
    X = np.empty((d, m))
    X[:, 0] = rng.standard_normal(d)
    U = rng.standard_normal((p if B is not None else d, m)) * w_scale
    for k in range(m - 1):
        drive = B @ U[:, k] if B is not None else U[:, k] * dt
        X[:, k + 1] = A @ X[:, k] + drive
    if B is not None:
        return SnapshotSet(dt=dt, X_minus=X[:, :-1], X_plus=X[:, 1:], V_c=U[:, :-1])
    return SnapshotSet(dt=dt, X_minus=X[:, :-1], X_plus=X[:, 1:], W=U[:, :-1])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# One line per acceptance criterion, repeated in the terminal summary so the
# verdicts show up even when pytest captures output.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
