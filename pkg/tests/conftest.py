import pytest

from robsched import kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile (or no-op) the accelerated kernels once so timing-sensitive
    # tests never pay the first-call cost
    kernels.warmup()
