from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum
from typing import Self

import numpy as np
from pydantic import BaseModel, Field, NonNegativeFloat, PositiveFloat, model_validator

from pathflux.common.errors import ConfigError
from pathflux.config.constants import (
    DEFAULT_ALPHA,
    DEFAULT_EPSILON,
    DEFAULT_FOLDS,
    DEFAULT_RIDGE_LAMBDA,
    NUISANCE_PMF_TOLERANCE,
    WMARGINAL_TOLERANCE,
)
from pathflux.model.scm import Cardinalities, FloatArray, IntArray


class RegressionKind(StrEnum):
    cell_mean = "cell_mean"
    ridge_onehot = "ridge_onehot"


class RegressionConfig(BaseModel):
    kind: RegressionKind = RegressionKind.cell_mean
    penalty: PositiveFloat = Field(default=DEFAULT_RIDGE_LAMBDA, alias="lambda")

    model_config = {"populate_by_name": True, "extra": "forbid", "frozen": True}


class NuisanceConfig(BaseModel):
    alpha: NonNegativeFloat = DEFAULT_ALPHA
    epsilon: float = Field(default=DEFAULT_EPSILON, gt=0.0, lt=1.0)
    regression: RegressionConfig = RegressionConfig()

    model_config = {"extra": "forbid", "frozen": True}

    def check_cards(self, cards: Cardinalities) -> None:
        """Truncation at epsilon must leave room for every level of each conditional pmf."""
        widest = max(cards.card_a, cards.card_z, cards.card_m)
        if self.epsilon * widest > 1.0:
            msg = f"epsilon={self.epsilon} too large for a conditional with {widest} levels"
            raise ConfigError(msg)


@dataclass(frozen=True)
class NuisanceSet:
    """eta = (m_hat, p_m, p_z, p_a) on the (w, a, z, m) grid. NaN marks an undefined cell.

    p_a[w, a] = p(a | w); p_z[w, a, z] = p(z | a, w); p_m[w, a, z, m] = p(m | z, a, w);
    m_hat[w, a, z, m] = E[Y | m, z, a, w].
    """

    m_hat: FloatArray
    p_m: FloatArray
    p_z: FloatArray
    p_a: FloatArray

    def __post_init__(self) -> None:
        for name, table, axis_count in (("p_a", self.p_a, 2), ("p_z", self.p_z, 3), ("p_m", self.p_m, 4)):
            if table.ndim != axis_count:
                msg = f"{name} must have {axis_count} axes, got {table.ndim}"
                raise ConfigError(msg)
            defined = ~np.isnan(table).any(axis=-1)
            sums = table.sum(axis=-1)
            if np.any(table[defined] < 0) or np.any(np.abs(sums[defined] - 1.0) > NUISANCE_PMF_TOLERANCE):
                msg = f"{name} has a conditional pmf that does not sum to 1"
                raise ConfigError(msg)

    @property
    def cards(self) -> Cardinalities:
        return Cardinalities(*self.p_m.shape)

    @property
    def defined_p_z(self) -> np.ndarray:
        return ~np.isnan(self.p_z).any(axis=-1)

    def regression_given_w(self) -> FloatArray:
        """E(Y | w) implied by eta."""
        return np.einsum("wa,waz,wazm,wazm->w", self.p_a, self.p_z, self.p_m, self.m_hat)

    def min_probability(self) -> float:
        return float(min(np.nanmin(self.p_a), np.nanmin(self.p_z), np.nanmin(self.p_m)))


@dataclass(frozen=True)
class WMarginal:
    probs: FloatArray

    def __post_init__(self) -> None:
        if np.any(self.probs < 0) or abs(float(self.probs.sum()) - 1.0) > WMARGINAL_TOLERANCE:
            msg = "W marginal must be a probability vector"
            raise ConfigError(msg)

    @classmethod
    def uniform(cls, card_w: int) -> Self:
        return cls(np.full(card_w, 1.0 / card_w))


class FoldPlan(BaseModel):
    """Assignment of each row to one of V prediction folds (0-based fold labels)."""

    folds: int = Field(default=DEFAULT_FOLDS, ge=2)
    seed: int = 0
    assignment: list[int]

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def check_partition(self) -> Self:
        sizes = np.bincount(np.asarray(self.assignment, dtype=np.int64), minlength=self.folds)
        if sizes.size != self.folds or sizes.min() == 0 or sizes.max() - sizes.min() > 1:
            msg = f"fold sizes {sizes.tolist()} do not form a balanced partition into {self.folds} folds"
            raise ValueError(msg)
        return self

    @property
    def n(self) -> int:
        return len(self.assignment)

    def fold_rows(self, v: int) -> IntArray:
        return np.flatnonzero(np.asarray(self.assignment) == v)

    def training_rows(self, v: int) -> IntArray:
        return np.flatnonzero(np.asarray(self.assignment) != v)

    def sizes(self) -> list[int]:
        return np.bincount(np.asarray(self.assignment, dtype=np.int64), minlength=self.folds).tolist()
