from typing import Self

from pydantic import BaseModel, Field, NonNegativeFloat, PositiveInt, model_validator

from pathflux.config.constants import DEFAULT_ALPHA, DEFAULT_CI_LEVEL, DEFAULT_EPSILON, DEFAULT_FOLDS
from pathflux.model.nuisance import NuisanceConfig, RegressionConfig
from pathflux.model.scm import Cardinalities


class CardinalitySpec(BaseModel):
    """Declared code ranges; columns are otherwise sized by their largest observed code."""

    w: PositiveInt
    a: PositiveInt
    z: PositiveInt
    m: PositiveInt

    model_config = {"extra": "forbid", "frozen": True}

    def cards(self) -> Cardinalities:
        return Cardinalities(self.w, self.a, self.z, self.m)


class RunConfig(BaseModel):
    """Settings of an estimation run, read from the ``--config`` JSON file."""

    folds: int = Field(default=DEFAULT_FOLDS, ge=2)
    alpha: NonNegativeFloat = DEFAULT_ALPHA
    epsilon: float = Field(default=DEFAULT_EPSILON, gt=0.0, lt=1.0)
    regression: RegressionConfig = RegressionConfig()
    seed: int = 0
    ci_level: float = Field(default=DEFAULT_CI_LEVEL, gt=0.0, lt=1.0)
    w_columns: list[str] | None = None
    cardinalities: CardinalitySpec | None = None

    model_config = {"extra": "forbid", "frozen": True}

    @model_validator(mode="after")
    def check_w_columns(self) -> Self:
        if self.w_columns is not None and (not self.w_columns or len(set(self.w_columns)) != len(self.w_columns)):
            msg = "w_columns must list distinct column names"
            raise ValueError(msg)
        return self

    @property
    def nuisance(self) -> NuisanceConfig:
        return NuisanceConfig(alpha=self.alpha, epsilon=self.epsilon, regression=self.regression)
