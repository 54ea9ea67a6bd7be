"""Shared fixtures: one domain, cached grids and pencils per contrast."""

import numpy as np
import pytest

import iteig


@pytest.fixture(scope="session")
def domain():
    return iteig.Domain1D(0.0, 1.0, 0.2)


@pytest.fixture(scope="session")
def grid_cache(domain):
    cache = {}

    def get(n):
        if n not in cache:
            cache[n] = iteig.build_grid(domain, n)
        return cache[n]

    return get


@pytest.fixture(scope="session")
def pencil_cache(domain, grid_cache):
    cache = {}

    def get(n, m_value=8.0):
        key = (n, complex(m_value))
        if key not in cache:
            contrast = iteig.Contrast.constant(m_value, domain)
            cache[key] = iteig.build_pencil(grid_cache(n), contrast)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def cutoff(domain):
    return iteig.make_cutoff(domain)


@pytest.fixture(scope="session")
def grid48(grid_cache):
    return grid_cache(48)


@pytest.fixture(scope="session")
def grid64(grid_cache):
    return grid_cache(64)


@pytest.fixture(scope="session")
def pencil3_64(pencil_cache):
    # constant index 3 (m = 8): parity-forced eigenvalues at -j^2 pi^2
    return pencil_cache(64, 8.0)


@pytest.fixture(scope="session")
def pencil2_64(pencil_cache):
    # constant index 2 (m = 3): oracle roots at k = 2 pi j
    return pencil_cache(64, 3.0)
