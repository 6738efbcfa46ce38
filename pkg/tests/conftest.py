import numpy as np
import pytest

from qsigma_manager.returns import SegmentStep, TrajectorySegment


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False, help='run slow reproduction tests')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='need --runslow option to run')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


def random_segment(rng: np.random.Generator, sigmas=None, length=None, terminated=None,
                   gamma=None) -> TrajectorySegment:
    """
    # Consistent random segment: each step's q_current is the previous step's q_next
    # sigmas: per-step sigma_next values (random when None)
    """
    length = length or int(rng.integers(1, 8))
    if terminated is None:
        terminated = bool(rng.random() < 0.3)
    gamma = float(rng.uniform(0.0, 1.0)) if gamma is None else gamma
    if sigmas is None:
        sigmas = rng.uniform(0.0, 1.0, size=length)
    q_current = float(rng.normal())
    steps = []
    for k in range(length):
        last = k == length - 1
        terminal = terminated and last
        mu = float(rng.uniform(0.05, 1.0))
        q_next = 0.0 if terminal else float(rng.normal())
        steps.append(SegmentStep(
            reward=float(rng.normal()),
            q_current=q_current,
            q_next=q_next,
            v_next=0.0 if terminal else float(rng.normal()),
            sigma_next=float(sigmas[k]),
            pi_next=float(rng.uniform(0.0, 1.0)),
            mu_next=mu,
            terminal=terminal,
        ))
        q_current = q_next
    return TrajectorySegment(steps, gamma)


@pytest.fixture
def np_rng():
    return np.random.default_rng(12345)
