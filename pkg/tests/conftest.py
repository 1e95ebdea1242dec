import pytest

from tailfit import GevParams

# Fit reported for the 400-observation cloud write campaign; standard errors
# in the same order (loc, scale, shape).
FIGURE_PARAMS = GevParams(11.1679, 0.2120, -0.00105)
FIGURE_STDERR = (0.0140, 0.0101, 0.0415)


@pytest.fixture(scope="session")
def figure_params() -> GevParams:
    return FIGURE_PARAMS


@pytest.fixture(scope="session")
def figure_stderr() -> tuple:
    return FIGURE_STDERR
