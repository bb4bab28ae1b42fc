import pytest

from padicorb.localfield import LocalFieldCtx, QuadExt


@pytest.fixture(scope="session")
def ctx3():
    return LocalFieldCtx(3)


@pytest.fixture(scope="session")
def ctx5():
    return LocalFieldCtx(5)


@pytest.fixture(scope="session")
def ext3i(ctx3):
    return QuadExt(ctx3, "inert")


@pytest.fixture(scope="session")
def ext3s(ctx3):
    return QuadExt(ctx3, "split")
