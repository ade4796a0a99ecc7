import random

import pytest


def pytest_addoption(parser):
    parser.addoption("--seed", type=int, default=12345, help="seed for randomized tests")


@pytest.fixture
def rng(request) -> random.Random:
    return random.Random(request.config.getoption("--seed"))
