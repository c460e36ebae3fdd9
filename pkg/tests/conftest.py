import pytest

from itpn import fixture


@pytest.fixture(scope="session")
def fig1():
    return fixture()
