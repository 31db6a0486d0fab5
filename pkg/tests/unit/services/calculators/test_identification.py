import numpy as np
import pytest
from hamcrest import assert_that, close_to, is_

from pathflux.common.errors import IdentificationError, UnsupportedModelError
from pathflux.model.experiment import RandomScmSpec
from pathflux.model.nuisance import NuisanceSet, WMarginal
from pathflux.model.targets import S0, S1_0, TargetId, Weight
from pathflux.services.calculators.counterfactuals import (
    oracle_ate_decomposition,
    oracle_conditional_means,
    oracle_tau,
)
from pathflux.services.calculators.enumeration import derived_conditionals, enumerate_joint, w_marginal
from pathflux.services.calculators.identification import (
    check_ate_overlap,
    identify_ate_components,
    identify_conditional_mean,
    identify_tau,
    identify_total,
)
from pathflux.services.calculators.random_scm import random_scm
from tests.fixtures.builders.model.scm import ternary_treatment_scm


def _exact(scm):
    law = enumerate_joint(scm)
    return derived_conditionals(law), w_marginal(law)


def _diagonal_eta() -> NuisanceSet:
    """Z copies A, so m_hat is known only where z == a."""
    nan = np.nan
    return NuisanceSet(
        m_hat=np.array([[[[1.0], [nan]], [[nan], [3.0]]]]),
        p_m=np.ones((1, 2, 2, 1)),
        p_z=np.array([[[1.0, 0.0], [0.0, 1.0]]]),
        p_a=np.array([[0.5, 0.5]]),
    )


@pytest.mark.parametrize("f", [Weight.IDENTITY, Weight.UNIT, Weight.indicator(0)], ids=str)
def test_plug_in_matches_enumeration_on_binary_chain(scm_t1, f):
    eta, wm = _exact(scm_t1)

    for t in TargetId.all():
        assert_that(identify_tau(eta, wm, t, f), close_to(oracle_tau(scm_t1, t, f), 1e-10))


@pytest.mark.parametrize("seed", range(5))
def test_plug_in_matches_enumeration_on_random_models(seed):
    scm = random_scm(seed, RandomScmSpec())
    eta, wm = _exact(scm)

    for t in TargetId.all():
        assert_that(identify_tau(eta, wm, t, Weight.IDENTITY), close_to(oracle_tau(scm, t, Weight.IDENTITY), 1e-10))


def test_total_target_averages_the_regression_over_w(scm_t1, law_t1):
    eta, wm = _exact(scm_t1)
    regression = eta.regression_given_w()
    a_given_w = eta.p_a @ np.arange(2.0)

    assert_that(identify_total(eta, wm, Weight.IDENTITY), close_to(float(wm.probs @ (a_given_w * regression)), 1e-12))


def test_conditional_means(scm_t1):
    eta, wm = _exact(scm_t1)

    for t in TargetId.all():
        means = oracle_conditional_means(scm_t1, t)
        for a in (0, 1):
            assert_that(identify_conditional_mean(eta, wm, t, a), close_to(means[a], 1e-10))


def test_conditional_mean_of_absent_level_is_undefined():
    eta = NuisanceSet(
        m_hat=np.zeros((1, 2, 1, 1)),
        p_m=np.ones((1, 2, 1, 1)),
        p_z=np.ones((1, 2, 1)),
        p_a=np.array([[1.0, 0.0]]),
    )

    with pytest.raises(IdentificationError, match="A=1"):
        identify_conditional_mean(eta, WMarginal.uniform(1), S0, 1)


def test_observed_target_needs_only_observed_cells():
    assert_that(identify_tau(_diagonal_eta(), WMarginal.uniform(1), S0, Weight.IDENTITY), close_to(1.5, 1e-15))


def test_cross_world_target_reports_the_missing_cell():
    with pytest.raises(IdentificationError) as excinfo:
        identify_tau(_diagonal_eta(), WMarginal.uniform(1), S1_0, Weight.IDENTITY)

    assert_that(excinfo.value.cell, is_({"w": 0, "a": 0, "z": 1, "m": 0}))


def test_effect_components_match_enumeration(scm_t1):
    eta, wm = _exact(scm_t1)
    plug_in = identify_ate_components(eta, wm)
    oracle = oracle_ate_decomposition(scm_t1)

    assert_that(plug_in.sum_check, is_(True))
    for name, value in oracle.model_dump(exclude={"means", "sum_check"}).items():
        assert_that(getattr(plug_in, name), close_to(value, 1e-10))


def test_effect_needs_binary_treatment():
    eta, wm = _exact(ternary_treatment_scm())

    with pytest.raises(UnsupportedModelError):
        check_ate_overlap(eta, wm)


def test_effect_needs_both_levels_in_every_stratum():
    eta = NuisanceSet(
        m_hat=np.zeros((2, 2, 1, 1)),
        p_m=np.ones((2, 2, 1, 1)),
        p_z=np.ones((2, 2, 1)),
        p_a=np.array([[0.5, 0.5], [1.0, 0.0]]),
    )

    with pytest.raises(IdentificationError) as excinfo:
        check_ate_overlap(eta, WMarginal.uniform(2))

    assert_that(excinfo.value.cell, is_({"w": 1, "a": 1}))
