import pytest

from cantorqc import build_packing, derive_params


@pytest.fixture(scope="session")
def packing7():
    return build_packing(7)


@pytest.fixture(scope="session")
def params7(packing7):
    return derive_params(1.0, 2.0, packing7)


@pytest.fixture(scope="session")
def params7_k1(packing7):
    return derive_params(1.0, 1.0, packing7)


@pytest.fixture(scope="session")
def packing100():
    return build_packing(100)


@pytest.fixture(scope="session")
def params100(packing100):
    return derive_params(1.0, 2.0, packing100)


@pytest.fixture(scope="session")
def params13():
    return derive_params(1.0, 2.0, build_packing(13))
