import numpy as np
import pytest
from hamcrest import assert_that, is_, less_than

from pathflux.common.errors import ConfigError
from pathflux.services.calculators.sampling import sample


def test_same_seed_gives_identical_datasets(scm_t0):
    first = sample(scm_t0, 4, seed=7)
    second = sample(scm_t0, 4, seed=7)

    for left, right in zip((*first.columns(), first.y), (*second.columns(), second.y), strict=True):
        np.testing.assert_array_equal(left, right)


def test_draws_do_not_depend_on_worker_count(scm_t1):
    serial = sample(scm_t1, 1000, seed=3, block_size=128, threads=1)
    parallel = sample(scm_t1, 1000, seed=3, block_size=128, threads=4)

    np.testing.assert_array_equal(serial.cell_index(), parallel.cell_index())
    np.testing.assert_array_equal(serial.y, parallel.y)


def test_fair_coin_treatment(scm_t0):
    data = sample(scm_t0, 100_000, seed=1)

    assert_that(abs(float(data.a.mean()) - 0.5), less_than(0.01))
    np.testing.assert_array_equal(data.y, data.a)


def test_cell_frequencies_approach_the_joint_law(scm_t1, law_t1):
    data = sample(scm_t1, 100_000, seed=1)

    frequencies = np.bincount(data.cell_index(), minlength=16) / data.n

    assert_that(float(np.abs(frequencies - law_t1.prob.ravel()).max()), less_than(0.01))


def test_sample_needs_rows(scm_t0):
    with pytest.raises(ConfigError):
        sample(scm_t0, 0, seed=1)


def test_cardinalities_come_from_the_model(scm_t1):
    assert_that(sample(scm_t1, 3, seed=2).cards, is_(scm_t1.cards))
