"""Fold plans and fold-wise nuisance estimates for the one-step estimators."""

import logging
from itertools import product

import numpy as np
from sklearn.linear_model import Ridge
from sklearn.model_selection import KFold
from sklearn.pipeline import Pipeline
from sklearn.preprocessing import OneHotEncoder, PolynomialFeatures

from pathflux.common.errors import ConfigError
from pathflux.common.rng import derived_seed
from pathflux.model.nuisance import FoldPlan, NuisanceConfig, NuisanceSet, RegressionKind
from pathflux.model.scm import Cardinalities, Dataset, FloatArray

logger = logging.getLogger(__name__)

FOLD_STREAM = 0


def make_folds(n: int, folds: int, seed: int) -> FoldPlan:
    if not 2 <= folds <= n:  # noqa: PLR2004
        msg = f"cannot split {n} rows into {folds} folds"
        raise ConfigError(msg)
    splitter = KFold(n_splits=folds, shuffle=True, random_state=derived_seed(seed, FOLD_STREAM))
    assignment = np.empty(n, dtype=np.int64)
    for v, (_, rows) in enumerate(splitter.split(np.zeros(n))):
        assignment[rows] = v
    return FoldPlan(folds=folds, seed=seed, assignment=assignment.tolist())


def smoothed_pmf(counts: FloatArray, alpha: float, epsilon: float) -> FloatArray:
    """Laplace-smoothed conditional pmfs along the last axis, floored at epsilon and renormalized."""
    card = counts.shape[-1]
    total = counts.sum(axis=-1, keepdims=True)
    denominator = total + alpha * card
    with np.errstate(invalid="ignore", divide="ignore"):
        pmf = np.where(denominator > 0, (counts + alpha) / denominator, 1.0 / card)
    return truncate(pmf, epsilon)


def truncate(pmf: FloatArray, epsilon: float) -> FloatArray:
    card = pmf.shape[-1]
    excess = np.clip(pmf, epsilon, None) - epsilon
    spare = excess.sum(axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        spread = np.where(spare > 0, excess / spare, 1.0 / card)
    return epsilon + spread * (1.0 - card * epsilon)


def fit_nuisance(train: Dataset, cfg: NuisanceConfig) -> NuisanceSet:
    """Smoothed, truncated pmfs plus an outcome regression defined on every (w, a, z, m) cell."""
    cards = train.cards
    cfg.check_cards(cards)
    cells = int(np.prod(cards.shape))
    counts = np.bincount(train.cell_index(), minlength=cells).astype(np.float64).reshape(cards.shape)

    p_m = smoothed_pmf(counts, cfg.alpha, cfg.epsilon)
    p_z = smoothed_pmf(counts.sum(axis=3), cfg.alpha, cfg.epsilon)
    p_a = smoothed_pmf(counts.sum(axis=(2, 3)), cfg.alpha, cfg.epsilon)

    match cfg.regression.kind:
        case RegressionKind.cell_mean:
            m_hat = _cell_means(train, counts)
        case RegressionKind.ridge_onehot:
            m_hat = _ridge_onehot(train, cfg.regression.penalty)

    logger.debug(
        "nuisance fitted",
        extra={"n": train.n, "regression": cfg.regression.kind, "empty_cells": int((counts == 0).sum())},
    )
    return NuisanceSet(m_hat=m_hat, p_m=p_m, p_z=p_z, p_a=p_a)


def _cell_means(train: Dataset, counts: FloatArray) -> FloatArray:
    """Within-cell means of y; empty cells fall back to the parent cell without m, then z, then a."""
    sums = np.bincount(train.cell_index(), weights=train.y, minlength=counts.size).reshape(counts.shape)
    m_hat = np.full(counts.shape, float(train.y.mean()))
    # Coarsest first, so finer nonempty levels overwrite.
    for axes in ((1, 2, 3), (2, 3), (3,), ()):
        level_counts = counts.sum(axis=axes, keepdims=True)
        level_sums = sums.sum(axis=axes, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            level_means = np.broadcast_to(level_sums / level_counts, counts.shape)
        filled = np.broadcast_to(level_counts > 0, counts.shape)
        m_hat = np.where(filled, level_means, m_hat)
    return m_hat


def _grid(cards: Cardinalities) -> np.ndarray:
    return np.array(list(product(*(range(k) for k in cards.shape))), dtype=np.int64)


def _ridge_onehot(train: Dataset, penalty: float) -> FloatArray:
    cards = train.cards
    model = Pipeline(
        [
            ("onehot", OneHotEncoder(categories=[list(range(k)) for k in cards.shape], sparse_output=False)),
            ("interactions", PolynomialFeatures(degree=2, interaction_only=True, include_bias=False)),
            ("ridge", Ridge(alpha=penalty)),
        ]
    )
    model.fit(np.column_stack(train.columns()), train.y)
    return model.predict(_grid(cards)).reshape(cards.shape)


def perturb(eta: NuisanceSet, direction: NuisanceSet, eps: float) -> NuisanceSet:
    """Move every table a fraction eps of the way toward direction; pmfs are renormalized."""
    if not 0.0 <= eps <= 1.0:
        msg = f"perturbation size {eps} outside [0, 1]"
        raise ConfigError(msg)

    def mix(mine: FloatArray, theirs: FloatArray) -> FloatArray:
        return (1.0 - eps) * mine + eps * theirs

    def mix_pmf(mine: FloatArray, theirs: FloatArray) -> FloatArray:
        mixed = mix(mine, theirs)
        return mixed / mixed.sum(axis=-1, keepdims=True)

    return NuisanceSet(
        m_hat=mix(eta.m_hat, direction.m_hat),
        p_m=mix_pmf(eta.p_m, direction.p_m),
        p_z=mix_pmf(eta.p_z, direction.p_z),
        p_a=mix_pmf(eta.p_a, direction.p_a),
    )
