import numpy as np
import pytest
from hamcrest import assert_that, close_to, less_than

from pathflux.common.errors import TruncationError
from pathflux.model.experiment import RandomScmSpec
from pathflux.model.nuisance import NuisanceSet
from pathflux.model.scm import JointLaw
from pathflux.model.targets import GRADIENT_TARGETS, S0, S1_0, S1_1, S2_1, S2_2, S3_2, TargetId, Weight
from pathflux.services.calculators.enumeration import derived_conditionals, enumerate_joint, w_marginal
from pathflux.services.calculators.gradients import (
    covariance_if,
    delta_method_gradient,
    eif_uncentered,
    gradient_tables,
    h_tables,
    population_mean,
    vonmises_remainder,
)
from pathflux.services.calculators.identification import identify_tau, target_functional
from pathflux.services.calculators.nuisance_fitting import perturb
from pathflux.services.calculators.random_scm import random_scm

TARGETS = [S0, S2_2, *(TargetId(j, k) for j, k in GRADIENT_TARGETS)]
WEIGHTS = [Weight.IDENTITY, Weight.UNIT]
MIXED_BIAS_TARGETS = [S1_0, S1_1]
RANDOM_SEEDS = [3, 5, 8, 13]


@pytest.fixture(scope="module")
def eta_t1(law_t1) -> NuisanceSet:
    return derived_conditionals(law_t1)


@pytest.fixture(scope="module")
def direction() -> NuisanceSet:
    spec = RandomScmSpec(card_w=2, card_a=2, card_z=2, card_m=2)
    return derived_conditionals(enumerate_joint(random_scm(7, spec)))


@pytest.mark.parametrize("t", TARGETS, ids=str)
@pytest.mark.parametrize("f", WEIGHTS, ids=str)
def test_closed_forms_agree_with_delta_method(data_t1, eta_t1, t, f):
    closed = eif_uncentered(data_t1, eta_t1, gradient_tables(eta_t1, t, f))
    generic = eif_uncentered(data_t1, eta_t1, delta_method_gradient(target_functional(t, f, 2), eta_t1))

    np.testing.assert_allclose(closed, generic, atol=1e-10)


@pytest.mark.parametrize("t", TARGETS, ids=str)
@pytest.mark.parametrize("f", WEIGHTS, ids=str)
def test_gradient_averages_to_the_target_under_the_truth(law_t1, eta_t1, t, f):
    wm = w_marginal(law_t1)
    tables = gradient_tables(eta_t1, t, f)

    assert_that(population_mean(law_t1, eta_t1, tables), close_to(identify_tau(eta_t1, wm, t, f), 1e-10))


def _random_law(seed: int) -> JointLaw:
    return enumerate_joint(random_scm(seed, RandomScmSpec(card_a=2, max_card=3)))


@pytest.mark.parametrize("seed", RANDOM_SEEDS)
@pytest.mark.parametrize("t", TARGETS, ids=str)
@pytest.mark.parametrize("f", WEIGHTS, ids=str)
def test_gradient_averages_to_the_target_on_random_models(seed, t, f):
    # Given:
    law = _random_law(seed)
    eta, wm = derived_conditionals(law), w_marginal(law)

    # When:
    tables = gradient_tables(eta, t, f)

    # Then:
    assert_that(population_mean(law, eta, tables), close_to(identify_tau(eta, wm, t, f), 1e-10))


@pytest.mark.parametrize("seed", RANDOM_SEEDS)
@pytest.mark.parametrize("t", TARGETS, ids=str)
@pytest.mark.parametrize("f", WEIGHTS, ids=str)
def test_closed_forms_agree_with_delta_method_on_random_models(seed, t, f):
    # Given:
    law = _random_law(seed)
    eta = derived_conditionals(law)
    charged = law.prob > 0

    # When:
    closed = gradient_tables(eta, t, f)
    generic = delta_method_gradient(target_functional(t, f, eta.cards.card_a), eta)

    # Then:
    np.testing.assert_allclose(closed.coef[charged], generic.coef[charged], atol=1e-10)
    np.testing.assert_allclose(closed.offset[charged], generic.offset[charged], atol=1e-10)


def test_removal_and_emulation_share_a_gradient(eta_t1):
    removed = gradient_tables(eta_t1, S2_2, Weight.IDENTITY)
    emulated = gradient_tables(eta_t1, S2_1, Weight.IDENTITY)

    np.testing.assert_array_equal(removed.coef, emulated.coef)
    np.testing.assert_array_equal(removed.offset, emulated.offset)


def test_observed_target_gradient_is_f_times_y(data_t1, eta_t1):
    values = eif_uncentered(data_t1, eta_t1, gradient_tables(eta_t1, S0, Weight.IDENTITY))

    np.testing.assert_allclose(values, data_t1.a * data_t1.y, atol=1e-12)


def test_indicator_weight_is_accepted(eta_t1):
    tables = gradient_tables(eta_t1, S3_2, Weight.indicator(1))

    assert tables.coef.shape == (2, 2, 2, 2)


@pytest.mark.parametrize("t", [TargetId(j, k) for j, k in GRADIENT_TARGETS], ids=str)
@pytest.mark.parametrize("f", WEIGHTS, ids=str)
def test_remainder_is_second_order(law_t1, eta_t1, direction, t, f):
    wm = w_marginal(law_t1)

    def scaled(eps: float) -> float:
        return abs(vonmises_remainder(law_t1, eta_t1, perturb(eta_t1, direction, eps), wm, t, f)) / eps**2

    # a first-order remainder would grow tenfold here
    assert_that(scaled(1e-4), less_than(2 * scaled(1e-3) + 1e-6))


@pytest.mark.parametrize("t", MIXED_BIAS_TARGETS, ids=str)
@pytest.mark.parametrize("f", WEIGHTS, ids=str)
def test_remainder_vanishes_when_only_the_regression_is_wrong(law_t1, eta_t1, direction, t, f):
    wm = w_marginal(law_t1)
    moved = perturb(eta_t1, direction, 0.3)
    eta_g = NuisanceSet(m_hat=moved.m_hat, p_m=eta_t1.p_m, p_z=eta_t1.p_z, p_a=eta_t1.p_a)

    assert_that(abs(vonmises_remainder(law_t1, eta_t1, eta_g, wm, t, f)), less_than(1e-10))


def test_denominator_below_floor_names_the_row(data_t1, eta_t1):
    p_a = eta_t1.p_a.copy()
    p_a[data_t1.w[0], :] = 0.5
    p_a[data_t1.w[0], data_t1.a[0]] = 1e-6
    p_a[data_t1.w[0], 1 - data_t1.a[0]] = 1 - 1e-6
    eta = NuisanceSet(m_hat=eta_t1.m_hat, p_m=eta_t1.p_m, p_z=eta_t1.p_z, p_a=p_a)

    with pytest.raises(TruncationError, match="at row 0"):
        eif_uncentered(data_t1, eta, gradient_tables(eta, S0, Weight.IDENTITY), floor=1e-3)


def test_covariance_influence_is_centred():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 2, size=500).astype(np.float64)
    y = rng.normal(size=500)
    phi_a, phi_1 = a * y, y

    values = covariance_if(phi_a, phi_1, phi_a.mean(), phi_1.mean(), a, a.mean())

    assert_that(float(values.mean()), close_to(0.0, 1e-12))


def test_h_tables_weight_the_treatment_pmf(eta_t1):
    # Given: A = W xor U_A with P(U_A = 1) = .3
    # When:
    treated = h_tables(eta_t1, Weight.IDENTITY)
    unit = h_tables(eta_t1, Weight.UNIT)

    # Then:
    assert np.allclose(treated.h4_0, [0.3, 0.7], atol=1e-12)
    assert np.allclose(unit.h4_0, 1.0, atol=1e-12)
    assert np.allclose(unit.h2_1.sum(axis=1), 1.0, atol=1e-12)
