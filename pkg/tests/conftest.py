import pytest

from lfmra import FieldParams

from helpers import haar_instance, p3_uniform_instance


@pytest.fixture(scope="session")
def gf2():
    return FieldParams.create(2, 1)


@pytest.fixture(scope="session")
def gf3():
    return FieldParams.create(3, 1)


@pytest.fixture(scope="session")
def gf4():
    return FieldParams.create(2, 2)


@pytest.fixture(scope="session")
def gf9():
    return FieldParams.create(3, 2)


@pytest.fixture(scope="session")
def haar():
    return haar_instance()


@pytest.fixture(scope="session")
def p3_uniform():
    return p3_uniform_instance()
