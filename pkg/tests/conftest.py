import functools

import pytest

from troprank.constructions import library_lookup


@functools.lru_cache(maxsize=None)
def built(name, **params):
    case = library_lookup(name, **params)
    G, series = case.build(0)
    return case, G, series


@pytest.fixture
def canonical3():
    return built("canonical", m=3)
