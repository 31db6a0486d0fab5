from __future__ import annotations

import math
from typing import Generic, Self, TypeVar

from pydantic import BaseModel, Field, NonNegativeFloat, model_validator

from pathflux.config.constants import ADDITIVITY_TOLERANCE, DEFAULT_CI_LEVEL
from pathflux.model.targets import PathName, ZUnderlineMode


class EstimateReport(BaseModel):
    """A point estimate with its Wald interval and cross-fitting context."""

    point: float
    se: NonNegativeFloat
    ci_lo: float
    ci_hi: float
    n: int
    folds: int
    fold_points: list[float] = Field(default_factory=list)
    level: float = DEFAULT_CI_LEVEL

    model_config = {"frozen": True}

    @model_validator(mode="after")
    def check_interval(self) -> Self:
        if not self.ci_lo <= self.point <= self.ci_hi:
            msg = f"interval [{self.ci_lo}, {self.ci_hi}] does not contain the point {self.point}"
            raise ValueError(msg)
        return self

    def covers(self, value: float) -> bool:
        return self.ci_lo <= value <= self.ci_hi


class DecompositionReport(BaseModel):
    """Estimated path decomposition of the total causal influence theta = Cov(A, Y - Y_{S_4})."""

    theta: EstimateReport
    theta_p1: EstimateReport
    theta_p2: EstimateReport
    theta_p3: EstimateReport
    theta_p4: EstimateReport
    theta_p2_or_p3: EstimateReport

    model_config = {"frozen": True}

    def components(self) -> dict[PathName, EstimateReport]:
        return {
            PathName.p1: self.theta_p1,
            PathName.p2: self.theta_p2,
            PathName.p3: self.theta_p3,
            PathName.p4: self.theta_p4,
            PathName.p2_or_p3: self.theta_p2_or_p3,
        }

    def additivity_gap(self) -> float:
        return self.theta.point - sum(c.point for c in self.components().values())


class PathDecomposition(BaseModel):
    """Exact or plug-in covariance decomposition of theta."""

    theta: float
    theta_p1: float
    theta_p2: float
    theta_p3: float
    theta_p4: float
    theta_p2_or_p3: float
    sum_check: bool

    model_config = {"frozen": True}

    def components(self) -> dict[PathName, float]:
        return {
            PathName.p1: self.theta_p1,
            PathName.p2: self.theta_p2,
            PathName.p3: self.theta_p3,
            PathName.p4: self.theta_p4,
            PathName.p2_or_p3: self.theta_p2_or_p3,
        }


T = TypeVar("T")


class AteMeans(BaseModel, Generic[T]):
    """The counterfactual means behind the average-treatment-effect decomposition."""

    s0: T
    s1: T
    s1_prime: T
    s2_prime: T
    s2_double_prime: T
    s3_double_prime: T
    s3: T
    s4: T

    model_config = {"frozen": True}


# Signed terms of each effect contrast over the fields of AteMeans.
ATE_CONTRASTS: dict[str, tuple[tuple[int, str], ...]] = {
    "psi": ((1, "s0"), (-1, "s4")),
    "psi_p1": ((1, "s0"), (-1, "s1")),
    "psi_p2": ((1, "s1_prime"), (-1, "s2_prime")),
    "psi_p3": ((1, "s2_double_prime"), (-1, "s3_double_prime")),
    "psi_p4": ((1, "s3"), (-1, "s4")),
    "psi_p2_or_p3": (
        (1, "s1"),
        (-1, "s1_prime"),
        (1, "s2_prime"),
        (-1, "s2_double_prime"),
        (1, "s3_double_prime"),
        (-1, "s3"),
    ),
}


class AteReport(BaseModel):
    psi: EstimateReport
    psi_p1: EstimateReport
    psi_p2: EstimateReport
    psi_p3: EstimateReport
    psi_p4: EstimateReport
    psi_p2_or_p3: EstimateReport
    means: AteMeans[EstimateReport]

    model_config = {"frozen": True}

    def components(self) -> dict[PathName, EstimateReport]:
        return {
            PathName.p1: self.psi_p1,
            PathName.p2: self.psi_p2,
            PathName.p3: self.psi_p3,
            PathName.p4: self.psi_p4,
            PathName.p2_or_p3: self.psi_p2_or_p3,
        }

    def additivity_gap(self) -> float:
        return self.psi.point - sum(c.point for c in self.components().values())


class AteDecomposition(BaseModel):
    """Exact or plug-in effect decomposition psi = E[Y(1)] - E[Y(0)] with its counterfactual means."""

    psi: float
    psi_p1: float
    psi_p2: float
    psi_p3: float
    psi_p4: float
    psi_p2_or_p3: float
    means: AteMeans[float]
    sum_check: bool

    model_config = {"frozen": True}

    def components(self) -> dict[PathName, float]:
        return {
            PathName.p1: self.psi_p1,
            PathName.p2: self.psi_p2,
            PathName.p3: self.psi_p3,
            PathName.p4: self.psi_p4,
            PathName.p2_or_p3: self.psi_p2_or_p3,
        }

    @classmethod
    def from_means(cls, means: AteMeans[float]) -> AteDecomposition:
        values = means.model_dump()
        contrasts = {
            name: math.fsum(sign * values[field] for sign, field in terms) for name, terms in ATE_CONTRASTS.items()
        }
        gap = contrasts["psi"] - math.fsum(v for k, v in contrasts.items() if k != "psi")
        return cls(**contrasts, means=means, sum_check=abs(gap) <= ADDITIVITY_TOLERANCE)


class TotalInfluenceReport(BaseModel):
    theta: EstimateReport
    tau_conf: EstimateReport
    f_curve: dict[int, EstimateReport]

    model_config = {"frozen": True}


class TotalInfluence(BaseModel):
    theta: float
    tau_conf: float
    f_curve: dict[int, float]
    cov_ay: float
    total_covariance_check: bool

    model_config = {"frozen": True}


class OracleResult(BaseModel):
    """Everything the oracle reports for one SCM."""

    mode: ZUnderlineMode
    decomposition: PathDecomposition
    total: TotalInfluence
    ate: AteDecomposition | None = None

    model_config = {"frozen": True}


class EstimationResult(BaseModel):
    decomposition: DecompositionReport
    total: TotalInfluenceReport
    ate: AteReport | None = None

    model_config = {"frozen": True}
