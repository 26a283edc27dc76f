import pytest

from conelet.filter_design import (
    FilterParams,
    feasibility_envelope,
    halfband_power,
    spectral_factorize,
)
from conelet.frame_certification import FeasibleParamSet
from conelet.shearlet_transform import build_system

# allowed excess of the numeric frame bound ratio over the certified one
FRAME_RATIO_SLACK = 1.25


@pytest.fixture(scope="session")
def haar():
    return spectral_factorize(halfband_power(FilterParams(1, 1)))


@pytest.fixture(scope="session")
def db2():
    return spectral_factorize(halfband_power(FilterParams(2, 2)))


@pytest.fixture(scope="session")
def db4():
    return spectral_factorize(halfband_power(FilterParams(4, 4)))


@pytest.fixture(scope="session")
def poly_39_18():
    return halfband_power(FilterParams(39, 18))


@pytest.fixture(scope="session")
def filter_39_18(poly_39_18):
    return spectral_factorize(poly_39_18)


@pytest.fixture(scope="session")
def envelope_39_27():
    return feasibility_envelope(FilterParams(39, 18, 27))


@pytest.fixture(scope="session")
def envelope_39_15():
    return feasibility_envelope(FilterParams(39, 18, 15))


@pytest.fixture(scope="session")
def system_64():
    # c1 u = 1/2 leaves every subband undecimated, so S is diagonal in frequency
    return build_system(FilterParams(39, 18), FeasibleParamSet(c=(0.5, 0.1)), size=64)


@pytest.fixture(scope="session")
def system_64_decimated():
    return build_system(FilterParams(39, 18), FeasibleParamSet(c=(2.0, 2.0)), size=64)


@pytest.fixture(scope="session")
def system_128():
    return build_system(FilterParams(39, 18), FeasibleParamSet(c=(1.0, 1.0)), size=128)


@pytest.fixture(scope="session")
def system_128_dense():
    return build_system(FilterParams(39, 18), FeasibleParamSet(c=(0.5, 0.1)), size=128)


@pytest.fixture(scope="session")
def frame_ratio_slack():
    return FRAME_RATIO_SLACK
