import pytest

from eventchains import validate_config


@pytest.fixture(scope="session")
def default_n2():
    return validate_config({"n_nodes": 2})


@pytest.fixture(scope="session")
def default_n3():
    return validate_config({"n_nodes": 3})


@pytest.fixture(scope="session")
def tiny_w24():
    # W=[2,4], two stages, two attempts: small enough for the exact oracle
    return validate_config({"n_nodes": 2, "mac_min_be": 1, "mac_max_be": 2,
                            "mac_max_csma_backoffs": 1, "mac_max_frame_retries": 1})
