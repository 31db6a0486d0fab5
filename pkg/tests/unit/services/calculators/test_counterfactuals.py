import math

import numpy as np
import pytest
from hamcrest import assert_that, close_to, has_entries, is_

from pathflux.common.errors import CapacityError, DomainError, UnsupportedModelError
from pathflux.model.experiment import RandomScmSpec
from pathflux.model.targets import S0, S1_0, S2_1, S2_2, S4, TargetId, Weight, ZUnderlineMode
from pathflux.services.calculators.counterfactuals import (
    ContrastKind,
    ctf_law,
    oracle_ate_decomposition,
    oracle_conditional_means,
    oracle_contrast,
    oracle_path_decomposition,
    oracle_tau,
    oracle_total_influence,
)
from pathflux.services.calculators.random_scm import random_scm
from tests.fixtures.builders.model.scm import ternary_treatment_scm
from tests.fixtures.matchers.estimates import is_additive


def test_identity_chain_influence_is_all_direct(scm_t0):
    decomposition = oracle_path_decomposition(scm_t0)

    assert_that(decomposition.theta, close_to(0.25, 1e-15))
    assert_that(decomposition.theta_p1, close_to(0.25, 1e-15))
    for value in (decomposition.theta_p2, decomposition.theta_p3, decomposition.theta_p4):
        assert_that(value, close_to(0.0, 1e-15))
    assert_that(decomposition.sum_check, is_(True))


def test_binary_chain_decomposition_is_additive(scm_t1):
    decomposition = oracle_path_decomposition(scm_t1)

    assert_that(decomposition.sum_check, is_(True))
    assert_that(decomposition, is_additive(1e-12))
    assert decomposition.theta > 0


def test_observed_target_is_the_observed_outcome(scm_t1, law_t1):
    # E[A Y] straight from the joint law
    a_levels = np.arange(2.0)[None, :, None, None]
    expected = float(np.sum(law_t1.prob * np.nan_to_num(law_t1.mean_y) * a_levels))

    assert_that(oracle_tau(scm_t1, S0, Weight.IDENTITY), close_to(expected, 1e-12))


def test_removing_all_paths_leaves_outcome_independent_of_treatment_given_w(scm_t0):
    # Y_{S4} = A_ is independent of A
    means = oracle_conditional_means(scm_t0, S4)

    np.testing.assert_allclose(means, [0.5, 0.5], atol=1e-15)


def test_counterfactual_laws_are_probabilities(scm_t1):
    for t in TargetId.all():
        law = ctf_law(scm_t1, t)
        assert_that(float(law.joint.sum()), close_to(1.0, 1e-12))
        np.testing.assert_allclose(law.p_a, [0.6 * 0.7 + 0.4 * 0.3, 0.6 * 0.3 + 0.4 * 0.7], atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_emulated_and_removed_mediator_draws_give_the_same_law(seed):
    scm = random_scm(seed, RandomScmSpec())

    _, emulated, removed = ctf_law(scm, S2_1).aligned_with(ctf_law(scm, S2_2))

    np.testing.assert_allclose(emulated, removed, atol=1e-12)


def test_marginal_mode_changes_only_removal_targets(scm_t1):
    coupled = oracle_tau(scm_t1, S1_0, Weight.IDENTITY, ZUnderlineMode.coupled)
    marginal = oracle_tau(scm_t1, S1_0, Weight.IDENTITY, ZUnderlineMode.marginal)

    assert_that(marginal, close_to(coupled, 1e-15))
    assert_that(oracle_path_decomposition(scm_t1, ZUnderlineMode.marginal).sum_check, is_(True))


def test_total_influence_splits_the_covariance(scm_t0, scm_t1):
    for scm in (scm_t0, scm_t1):
        total = oracle_total_influence(scm)
        assert_that(total.total_covariance_check, is_(True))
        assert_that(total.theta + total.tau_conf, close_to(total.cov_ay, 1e-12))
        assert_that(total.theta, close_to(oracle_path_decomposition(scm).theta, 1e-12))


def test_identity_chain_residual_curve(scm_t0):
    # E[Y - E(Y | W) | A = a] = a - 1/2
    total = oracle_total_influence(scm_t0)

    assert_that(total.f_curve, has_entries({0: close_to(-0.5, 1e-15), 1: close_to(0.5, 1e-15)}))


def test_identity_chain_effect_is_all_direct(scm_t0):
    ate = oracle_ate_decomposition(scm_t0)

    assert_that(ate.psi, close_to(1.0, 1e-15))
    assert_that(ate.psi_p1, close_to(1.0, 1e-15))
    assert_that(math.fsum(abs(v) for v in (ate.psi_p2, ate.psi_p3, ate.psi_p4, ate.psi_p2_or_p3)), close_to(0, 1e-15))
    assert_that(ate.sum_check, is_(True))


def test_binary_chain_effect_decomposition_is_additive(scm_t1):
    ate = oracle_ate_decomposition(scm_t1)

    assert_that(ate.sum_check, is_(True))
    assert_that(ate, is_additive(1e-12))


def test_effect_decomposition_needs_binary_treatment():
    with pytest.raises(UnsupportedModelError, match="binary A"):
        oracle_ate_decomposition(ternary_treatment_scm())


def test_ternary_treatment_covariance_is_its_variance():
    decomposition = oracle_path_decomposition(ternary_treatment_scm())

    assert_that(decomposition.theta, close_to(2 / 3, 1e-12))
    assert_that(decomposition.theta_p1, close_to(2 / 3, 1e-12))


def test_contrasts(scm_t0):
    assert_that(oracle_contrast(scm_t0, S0, S4, ContrastKind.covariance), close_to(0.25, 1e-15))
    assert_that(oracle_contrast(scm_t0, S0, S4, ContrastKind.mean_diff), close_to(0.0, 1e-15))
    assert_that(oracle_contrast(scm_t0, S0, S0, ContrastKind.kl), close_to(0.0, 1e-15))


def test_kl_needs_matching_supports(scm_t0):
    # Y = A puts no mass on (A=1, Y=0), which Y_{S4} does
    with pytest.raises(DomainError):
        oracle_contrast(scm_t0, S0, S4, ContrastKind.kl)


def test_enumeration_grid_beyond_budget_is_refused(scm_t1):
    with pytest.raises(CapacityError):
        ctf_law(scm_t1, TargetId(1, 1), cell_budget=40)
