import pytest

from padic_ialpha import NumericContext


@pytest.fixture
def ctx2():
    return NumericContext(2)


@pytest.fixture
def ctx3():
    return NumericContext(3)


@pytest.fixture
def exact2():
    return NumericContext(2, exact=True)


@pytest.fixture
def exact3():
    return NumericContext(3, exact=True)
