import numpy as np
import pytest

import hscyl


@pytest.fixture(scope="session")
def const32() -> hscyl.SharpConstant:
    return hscyl.sharp_constant_K(3, 2)


@pytest.fixture(scope="session")
def extremal32(const32):
    params = hscyl.ExtremalParams(n=3, k=2, lam=1.0)
    return hscyl.extremal_profile(params, const32)


@pytest.fixture(scope="session")
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
