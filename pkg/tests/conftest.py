import pytest

from pathflux.config.config import config
from pathflux.model.scm import Dataset, DiscreteScm, JointLaw
from pathflux.repos.builtin_scms import t0, t1
from pathflux.repos.scm_repo import scm_cache
from pathflux.services.calculators.enumeration import enumerate_joint
from pathflux.services.calculators.sampling import sample


@pytest.fixture(autouse=True)
def clear_caches():
    config.cache_clear()
    scm_cache.clear()
    yield
    config.cache_clear()


@pytest.fixture(scope="session")
def scm_t0() -> DiscreteScm:
    return t0()


@pytest.fixture(scope="session")
def scm_t1() -> DiscreteScm:
    return t1()


@pytest.fixture(scope="session")
def law_t1(scm_t1) -> JointLaw:
    return enumerate_joint(scm_t1)


@pytest.fixture(scope="session")
def data_t1(scm_t1) -> Dataset:
    return sample(scm_t1, 4000, seed=1)
