import pytest

from cachecycle import builtin_kernels, load_bundled_machine

from helpers import MACHINE_NAMES


@pytest.fixture(scope="session")
def machines():
    return {name: load_bundled_machine(name) for name in MACHINE_NAMES}


@pytest.fixture(scope="session")
def kernels():
    return {k.name: k for k in builtin_kernels()}
