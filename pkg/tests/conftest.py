import os

import pytest

from mcc.languages import calc_engine, calc_unconstrained_engine, imp_engine

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
MODELS = os.path.join(REPO, "models")


@pytest.fixture(scope="session")
def calc():
    return calc_engine()


@pytest.fixture(scope="session")
def calc_unconstrained():
    return calc_unconstrained_engine()


@pytest.fixture(scope="session")
def imp():
    return imp_engine()


@pytest.fixture(scope="session")
def cylinder_source():
    with open(os.path.join(MODELS, "cylinder.imp"), encoding="utf-8") as fh:
        return fh.read()


def model_path(name):
    return os.path.join(MODELS, name)
