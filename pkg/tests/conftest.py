import numpy as np
import pytest

from app.geometry.annulus import Annulus, Norm


@pytest.fixture
def gen():
    return np.random.default_rng(12345)


@pytest.fixture
def round_annulus():
    return Annulus(norm=Norm.ROUND, r=1.0, eps=0.5)


@pytest.fixture
def square_annulus():
    return Annulus(norm=Norm.SQUARE, r=1.0, eps=0.5)
