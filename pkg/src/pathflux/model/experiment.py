from __future__ import annotations

from enum import StrEnum
from pathlib import Path
from typing import Any, Literal, Self

from pydantic import BaseModel, Field, PositiveInt, model_validator

from pathflux.config.constants import VONMISES_EPS_GRID
from pathflux.model.run_config import RunConfig
from pathflux.model.targets import ZUnderlineMode

PATHS = ("P1", "P2", "P3", "P4")
MONOTONE_SCOPES = ("total", *PATHS)


class ExperimentKind(StrEnum):
    identification = "identification"
    law_equality = "law_equality"
    additivity = "additivity"
    sharp_null = "sharp_null"
    prop_zero = "prop_zero"
    monotonicity = "monotonicity"
    vonmises = "vonmises"
    coverage = "coverage"
    clt_scaling = "clt_scaling"


class ConstraintKind(StrEnum):
    none = "none"
    drop_path = "drop_path"
    degenerate_z = "degenerate_z"
    monotone = "monotone"


class ScmConstraint(BaseModel):
    """Structural restriction honoured by the random SCM generator."""

    kind: ConstraintKind = ConstraintKind.none
    path: str | None = None

    model_config = {"extra": "forbid", "frozen": True}

    @model_validator(mode="after")
    def check_path(self) -> Self:
        match self.kind:
            case ConstraintKind.drop_path if self.path not in PATHS:
                msg = f"drop_path needs one of {PATHS}, got {self.path!r}"
                raise ValueError(msg)
            case ConstraintKind.monotone if self.path not in MONOTONE_SCOPES:
                msg = f"monotone needs one of {MONOTONE_SCOPES}, got {self.path!r}"
                raise ValueError(msg)
            case ConstraintKind.none | ConstraintKind.degenerate_z if self.path is not None:
                msg = f"{self.kind} takes no path"
                raise ValueError(msg)
        return self


class RandomScmSpec(BaseModel):
    """Cardinalities left unset are drawn from 1..max_card (A from 2..max_card)."""

    card_w: PositiveInt | None = None
    card_a: PositiveInt | None = None
    card_z: PositiveInt | None = None
    card_m: PositiveInt | None = None
    max_card: PositiveInt = 3
    noise_support: PositiveInt = 4

    model_config = {"extra": "forbid", "frozen": True}

    @model_validator(mode="after")
    def check_support(self) -> Self:
        fixed = [c for c in (self.card_w, self.card_a, self.card_z, self.card_m) if c is not None]
        widest = max([self.max_card, *fixed])
        if self.noise_support < widest:
            msg = f"noise_support={self.noise_support} cannot reach all {widest} levels of a variable"
            raise ValueError(msg)
        return self


class ScmSource(BaseModel):
    """Exactly one of a builtin name, an SCM JSON file, or a random generator."""

    builtin: str | None = None
    file: Path | None = None
    random: RandomScmSpec | None = None
    constraint: ScmConstraint = ScmConstraint()

    model_config = {"extra": "forbid", "frozen": True}

    @model_validator(mode="after")
    def check_one(self) -> Self:
        given = [s for s in (self.builtin, self.file, self.random) if s is not None]
        if len(given) != 1:
            msg = "scm source needs exactly one of builtin, file or random"
            raise ValueError(msg)
        if self.random is None and self.constraint.kind is not ConstraintKind.none:
            msg = "structural constraints apply to random SCMs only"
            raise ValueError(msg)
        return self


class ExperimentSpec(BaseModel):
    kind: ExperimentKind
    scm: ScmSource
    path: str | None = None
    target: str | None = None
    replications: PositiveInt = 1
    n: list[PositiveInt] = Field(default_factory=list)
    eps_grid: list[float] = Field(default_factory=lambda: list(VONMISES_EPS_GRID))
    seed: int = 0
    tolerance: float | None = None
    include_ate: bool = False
    mode: ZUnderlineMode = ZUnderlineMode.coupled
    config: RunConfig = RunConfig()
    coverage_bounds: tuple[float, float] = (0.90, 0.99)
    rmse_ratio_bounds: tuple[float, float] = (1.6, 2.5)
    min_slope: float = 1.8

    model_config = {"extra": "forbid", "frozen": True}

    @model_validator(mode="after")
    def check_grid(self) -> Self:
        if any(b <= a for a, b in zip(self.n, self.n[1:], strict=False)):
            msg = f"n grid {self.n} must be increasing"
            raise ValueError(msg)
        if any(not 0.0 < e <= 1.0 for e in self.eps_grid):
            msg = "perturbation sizes must lie in (0, 1]"
            raise ValueError(msg)
        if self.kind in (ExperimentKind.coverage, ExperimentKind.clt_scaling) and not self.n:
            msg = f"{self.kind} needs a sample size grid n"
            raise ValueError(msg)
        if self.kind is ExperimentKind.clt_scaling and len(self.n) < 2:  # noqa: PLR2004
            msg = "clt_scaling needs at least two sample sizes"
            raise ValueError(msg)
        if self.kind is ExperimentKind.vonmises and len(set(self.eps_grid)) < 2:  # noqa: PLR2004
            msg = "vonmises needs at least two distinct perturbation sizes"
            raise ValueError(msg)
        return self


Verdict = Literal["pass", "fail"]


class ExperimentReport(BaseModel):
    kind: ExperimentKind
    verdict: Verdict
    tolerance: float | None = None
    metrics: dict[str, Any] = Field(default_factory=dict)
    replications: list[dict[str, Any]] = Field(default_factory=list)
    failures: list[str] = Field(default_factory=list)

    model_config = {"frozen": True}

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"
