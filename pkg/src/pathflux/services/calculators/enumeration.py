"""Exact pushforward of the noise product measure through an SCM's structural tables."""

import logging

import numpy as np
from cachetools import LRUCache, cached
from cachetools.keys import hashkey

from pathflux.common.errors import CapacityError
from pathflux.config.constants import DEFAULT_CELL_BUDGET
from pathflux.model.nuisance import NuisanceSet, WMarginal
from pathflux.model.scm import DiscreteScm, FloatArray, JointLaw

logger = logging.getLogger(__name__)


def check_budget(cells: int, cell_budget: int, what: str) -> None:
    if cells > cell_budget:
        msg = f"{what} has {cells} cells, exceeding the budget of {cell_budget}"
        raise CapacityError(msg)


@cached(
    cache=LRUCache(maxsize=128),
    key=lambda scm, cell_budget=DEFAULT_CELL_BUDGET: hashkey(scm.fingerprint, cell_budget),
)
def enumerate_joint(scm: DiscreteScm, cell_budget: int = DEFAULT_CELL_BUDGET) -> JointLaw:
    t = scm.tables
    check_budget(t.noise_grid_size, cell_budget, "noise grid")
    k_w, k_a, k_z, k_m = t.p_uw.size, t.p_ua.size, t.p_uz.size, t.p_um.size

    w = t.f_w[:, None, None, None]
    a = t.f_a[w, np.arange(k_a)[None, :, None, None]]
    z = t.f_z[a, w, np.arange(k_z)[None, None, :, None]]
    m = t.f_m[z, a, w, np.arange(k_m)[None, None, None, :]]
    grid_shape = (k_w, k_a, k_z, k_m)
    weight = np.einsum("i,j,k,l->ijkl", t.p_uw, t.p_ua, t.p_uz, t.p_um)

    shape = scm.cards.shape
    cells = int(np.prod(shape))
    cell = np.ravel_multi_index(tuple(np.broadcast_to(v, grid_shape) for v in (w, a, z, m)), shape)
    prob = np.bincount(cell.ravel(), weights=weight.ravel(), minlength=cells)

    y = t.f_y[m, z, a, w, :]  # grid_shape + (k_y,)
    y_weight = weight[..., None] * t.p_uy
    y_cell = np.broadcast_to(cell[..., None], y.shape).ravel()
    y_sum = np.bincount(y_cell, weights=(y_weight * y).ravel(), minlength=cells)

    y_support, y_code = np.unique(y.ravel(), return_inverse=True)
    y_mass = np.bincount(
        y_cell * y_support.size + y_code, weights=y_weight.ravel(), minlength=cells * y_support.size
    ).reshape(cells, y_support.size)

    with np.errstate(invalid="ignore", divide="ignore"):
        mean_y = np.where(prob > 0, y_sum / prob, np.nan)
        y_pmf = np.where(prob[:, None] > 0, y_mass / prob[:, None], np.nan)

    law = JointLaw(
        prob=prob.reshape(shape),
        mean_y=mean_y.reshape(shape),
        y_support=y_support,
        y_pmf=y_pmf.reshape((*shape, y_support.size)),
    )
    logger.debug("joint law enumerated", extra={"scm": scm.name, "cells": cells, "mass": law.total_mass})
    return law


def derived_conditionals(law: JointLaw) -> NuisanceSet:
    """Exact eta read off a joint law; conditionals of zero-mass parents are NaN (undefined)."""
    p_waz = law.prob.sum(axis=3)
    p_wa = p_waz.sum(axis=2)
    p_w = p_wa.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        p_a = p_wa / p_w[:, None]
        p_z = p_waz / p_wa[..., None]
        p_m = law.prob / p_waz[..., None]
    return NuisanceSet(m_hat=law.mean_y.copy(), p_m=p_m, p_z=p_z, p_a=p_a)


def w_marginal(law: JointLaw) -> WMarginal:
    return WMarginal(law.marginal_w())


def joint_from_conditionals(eta: NuisanceSet, wm: WMarginal) -> FloatArray:
    """p(w) p(a|w) p(z|a,w) p(m|z,a,w) with undefined factors counted as zero mass."""
    return np.einsum(
        "w,wa,waz,wazm->wazm",
        wm.probs,
        np.nan_to_num(eta.p_a),
        np.nan_to_num(eta.p_z),
        np.nan_to_num(eta.p_m),
    )


def structural_z_law(scm: DiscreteScm) -> FloatArray:
    """P(Z(a) = z | W = w) as [w, a, z]; defined for every (a, w) whether or not it is observed."""
    t = scm.tables
    one_hot = np.eye(scm.card_z)[t.f_z]  # [a, w, u_z, z]
    return np.einsum("awuz,u->waz", one_hot, t.p_uz)
