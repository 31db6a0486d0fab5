"""Plug-in identification of counterfactual means from observed-data nuisances.

Each target tau = E[f(A) Y_S] is a multilinear functional of eta. Letters follow
``functional``: a is the observed treatment, b the independent draw A_, z the observed
mediator Z, y an emulation or removal draw of Z. For the effect decomposition, c and d are
fixed at the treatment levels 1 and 0.
"""

import logging
import math

import numpy as np

from pathflux.common.errors import IdentificationError, UnsupportedModelError
from pathflux.model.nuisance import NuisanceSet, WMarginal
from pathflux.model.reports import AteDecomposition, AteMeans
from pathflux.model.scm import FloatArray
from pathflux.model.targets import S4, TargetId, Weight
from pathflux.services.calculators.functional import Factor, MultilinearFunctional, const, mh, pa, pm, pz

logger = logging.getLogger(__name__)

_SHARED_21 = (pa("wb"), pz("wbz"), pz("way"), pm("waym"), mh("wbzm"))

# Factors beyond p_a(a | w) f(a), which every target carries.
TARGET_FACTORS: dict[TargetId, tuple[Factor, ...]] = {
    TargetId(0, 0): (pz("waz"), pm("wazm"), mh("wazm")),
    TargetId(1, 0): (pa("wb"), pz("waz"), pm("wazm"), mh("wbzm")),
    TargetId(1, 1): (pa("wb"), pz("waz"), pz("way"), pm("waym"), mh("wbzm")),
    TargetId(2, 1): _SHARED_21,
    TargetId(2, 2): _SHARED_21,
    TargetId(3, 2): (pa("wb"), pz("wbz"), pz("wby"), pm("waym"), mh("wbzm")),
    TargetId(3, 0): (pa("wb"), pz("wbz"), pm("wazm"), mh("wbzm")),
    TargetId(4, 0): (pa("wb"), pz("wbz"), pm("wbzm"), mh("wbzm")),
}

# Effect-decomposition means as factors over the level-1 letter c and level-0 letter d.
_ATE_FACTORS: dict[str, tuple[Factor, ...]] = {
    "s0": (pz("wcz"), pm("wczm"), mh("wczm")),
    "s1": (pz("wcz"), pm("wczm"), mh("wdzm")),
    "s1_prime": (pz("wcz"), pz("wcy"), pm("wcym"), mh("wdzm")),
    "s2_prime": (pz("wdz"), pz("wcy"), pm("wcym"), mh("wdzm")),
    "s2_double_prime": (pz("wdz"), pz("wcy"), pm("wcym"), mh("wdzm")),
    "s3_double_prime": (pz("wdz"), pz("wdy"), pm("wcym"), mh("wdzm")),
    "s3": (pz("wdz"), pm("wczm"), mh("wdzm")),
    "s4": (pz("wdz"), pm("wdzm"), mh("wdzm")),
}


def target_functional(t: TargetId, f: Weight, card_a: int) -> MultilinearFunctional:
    return MultilinearFunctional(f"tau{t}[{f}]", (pa("wa"), const("a", f.values(card_a)), *TARGET_FACTORS[t]))


def ate_functionals() -> dict[str, MultilinearFunctional]:
    levels = np.eye(2)
    functionals = {}
    for name, factors in _ATE_FACTORS.items():
        letters = "".join(f.subscripts for f in factors)
        constants = [const(letter, levels[level]) for letter, level in (("c", 1), ("d", 0)) if letter in letters]
        functionals[name] = MultilinearFunctional(f"E[{name}]", (*constants, *factors))
    return functionals


def identify_tau(eta: NuisanceSet, wm: WMarginal, t: TargetId, f: Weight) -> float:
    functional = target_functional(t, f, eta.cards.card_a)
    functional.check_overlap(eta, wm)
    return functional.value(eta, wm)


def identify_total(eta: NuisanceSet, wm: WMarginal, f: Weight) -> float:
    """E[f(A) E(Y | W)], the covariance-free part of the total influence."""
    return identify_tau(eta, wm, S4, f)


def identify_conditional_mean(eta: NuisanceSet, wm: WMarginal, t: TargetId, a: int) -> float:
    """E[Y_S | A = a], with dP(w | a) taken from wm and p_a by Bayes rule."""
    p_level = math.fsum(wm.probs * np.nan_to_num(eta.p_a[:, a]))
    if p_level <= 0:
        msg = f"A={a} has no mass, so E[Y_S | A={a}] is undefined"
        raise IdentificationError(msg, cell={"a": a})
    return identify_tau(eta, wm, t, Weight.indicator(a)) / p_level


def check_ate_overlap(eta: NuisanceSet, wm: WMarginal) -> None:
    if eta.cards.card_a != 2:  # noqa: PLR2004
        msg = f"the effect decomposition needs a binary A, got {eta.cards.card_a} levels"
        raise UnsupportedModelError(msg)
    p_a: FloatArray = eta.p_a
    lacking = (wm.probs[:, None] > 0) & ~(np.nan_to_num(p_a) > 0)
    if np.any(lacking):
        w, a = (int(k) for k in np.argwhere(lacking)[0])
        msg = "both treatment levels need positive probability"
        raise IdentificationError(msg, cell={"w": w, "a": a})


def identify_ate_components(eta: NuisanceSet, wm: WMarginal) -> AteDecomposition:
    check_ate_overlap(eta, wm)
    means = {}
    for name, functional in ate_functionals().items():
        functional.check_overlap(eta, wm)
        means[name] = functional.value(eta, wm)
    logger.debug("plug-in effect means", extra=means)
    return AteDecomposition.from_means(AteMeans[float](**means))
