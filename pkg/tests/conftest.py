import numpy as np
import pytest

from floralperc import rng


@pytest.fixture
def grng():
    return rng.stream(20240601)


def stream(*path):
    return rng.stream(987123, *path)
