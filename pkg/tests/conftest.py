import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from cutbench.kernels import warm_up


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile the jit kernels once so per-test timings stay honest
    warm_up()
