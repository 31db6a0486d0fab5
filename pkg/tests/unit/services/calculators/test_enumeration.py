import numpy as np
import pytest
from hamcrest import assert_that, close_to, is_

from pathflux.common.errors import CapacityError
from pathflux.config.constants import JOINT_MASS_TOLERANCE
from pathflux.model.experiment import RandomScmSpec
from pathflux.model.scm import NoisePmfs
from pathflux.services.calculators.enumeration import (
    derived_conditionals,
    enumerate_joint,
    joint_from_conditionals,
    structural_z_law,
    w_marginal,
)
from pathflux.services.calculators.random_scm import random_scm
from tests.fixtures.builders.model.scm import scm_with


def test_identity_chain(scm_t0):
    law = enumerate_joint(scm_t0)

    assert_that(float(law.prob[0, 1, 0, 0]), close_to(0.5, 1e-15))
    assert_that(float(law.mean_y[0, 1, 0, 0]), close_to(1.0, 1e-15))
    assert_that(law.covariance_ay(), close_to(0.25, 1e-15))


def test_binary_chain_cells_match_hand_enumeration(law_t1):
    # W=0 w.p. .6, A=W w.p. .7, Z=A w.p. .9, M=(Z or A and W) w.p. .8
    assert_that(float(law_t1.prob[0, 0, 0, 0]), close_to(0.6 * 0.7 * 0.9 * 0.8, 1e-15))
    assert_that(float(law_t1.prob[1, 1, 0, 1]), close_to(0.4 * 0.7 * 0.1 * 0.8, 1e-15))
    assert_that(float(law_t1.prob[1, 0, 1, 0]), close_to(0.4 * 0.3 * 0.1 * 0.2, 1e-15))
    # Y at (w=1, a=1, z=1, m=1) = 1 + .5 + 2 + .5 - 1 + U_Y
    assert_that(float(law_t1.mean_y[1, 1, 1, 1]), close_to(3.0 + 0.3, 1e-12))
    assert_that(law_t1.total_mass, close_to(1.0, 1e-12))


def test_outcome_pmf_is_conditional_on_the_cell(law_t1):
    np.testing.assert_allclose(law_t1.y_pmf.sum(axis=-1), 1.0, atol=1e-12)
    np.testing.assert_allclose(law_t1.y_pmf @ law_t1.y_support, law_t1.mean_y, atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_random_models_conserve_mass_and_refactorize(seed):
    # Given:
    scm = random_scm(seed, RandomScmSpec())

    # When:
    law = enumerate_joint(scm)
    eta = derived_conditionals(law)

    # Then:
    assert_that(law.total_mass, close_to(1.0, JOINT_MASS_TOLERANCE))
    np.testing.assert_allclose(joint_from_conditionals(eta, w_marginal(law)), law.prob, atol=1e-12)


def test_derived_conditionals_read_off_the_law(scm_t0, law_t1):
    assert_that(float(derived_conditionals(enumerate_joint(scm_t0)).p_a[0, 1]), close_to(0.5, 1e-15))
    p_z = derived_conditionals(law_t1).p_z
    np.testing.assert_allclose(p_z[:, 1, 1], [0.9, 0.9], atol=1e-12)
    np.testing.assert_allclose(p_z[:, 0, 1], [0.1, 0.1], atol=1e-12)


def test_unobserved_parents_are_undefined(scm_t0):
    # Given: A is always 0
    degenerate = scm_with(scm_t0, noise=NoisePmfs(u_w=[1.0], u_a=[1.0, 0.0], u_z=[1.0], u_m=[1.0], u_y=[1.0]))

    # When:
    eta = derived_conditionals(enumerate_joint(degenerate))

    # Then:
    assert np.all(np.isnan(eta.p_z[0, 1]))
    assert_that(bool(eta.defined_p_z[0, 0]), is_(True))
    assert np.isnan(eta.m_hat[0, 1, 0, 0])


def test_structural_z_law_covers_unobserved_treatment(scm_t1):
    z_law = structural_z_law(scm_t1)

    np.testing.assert_allclose(z_law[:, 1, :], [[0.1, 0.9], [0.1, 0.9]])


def test_noise_grid_beyond_budget_is_refused(scm_t1):
    with pytest.raises(CapacityError, match="exceeding the budget of 8"):
        enumerate_joint(scm_t1, cell_budget=8)
