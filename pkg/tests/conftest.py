import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from livewire import kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # JIT compile once so timed tests measure compute, not compilation
    kernels.warmup()
