import pytest

from cmforge.catalog import load_catalog
from cmforge.classfield import verify_instance
from cmforge.cmmodel import shimura_construct
from cmforge.picocycle import FullL

_cache = {}


def _memo(key, build):
    if key not in _cache:
        _cache[key] = build()
    return _cache[key]


@pytest.fixture(scope="session")
def catalog():
    return {e.label: e for e in load_catalog()}


@pytest.fixture(scope="session")
def instance(catalog):
    return lambda label: _memo(("inst", label), lambda: verify_instance(catalog[label]))


@pytest.fixture(scope="session")
def construction(instance):
    return lambda label, e=-1: _memo(("con", label, e), lambda: shimura_construct(instance(label), e=e))


@pytest.fixture(scope="session")
def full(instance):
    return lambda label: _memo(("full", label), lambda: FullL(instance(label)))
