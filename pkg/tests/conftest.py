import warnings

import pytest

from adtopt import bundled_config_path, load_config


def _scenario(name):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return load_config(bundled_config_path(name)).scenario


@pytest.fixture(scope="session")
def uni():
    return _scenario("univariate")


@pytest.fixture(scope="session")
def gg():
    return _scenario("gamma_gamma")


@pytest.fixture(scope="session")
def gl():
    return _scenario("gamma_lmem")


@pytest.fixture(scope="session", params=["univariate", "gamma_gamma", "gamma_lmem"])
def any_scenario(request):
    return _scenario(request.param)
