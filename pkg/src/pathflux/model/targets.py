from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum
from typing import ClassVar

import numpy as np
import numpy.typing as npt

from pathflux.common.errors import ConfigError

VALID_TARGETS: frozenset[tuple[int, int]] = frozenset({(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (3, 2), (3, 0), (4, 0)})
GRADIENT_TARGETS: tuple[tuple[int, int], ...] = ((1, 0), (1, 1), (2, 1), (3, 2), (3, 0), (4, 0))


@dataclass(frozen=True, order=True)
class TargetId:
    """Counterfactual Y_{S_j}^{(k)}: information removed along S_j, edge-emulation variant k."""

    j: int
    k: int

    def __post_init__(self) -> None:
        if (self.j, self.k) not in VALID_TARGETS:
            msg = f"({self.j},{self.k}) is not a valid (j,k) target pair"
            raise ConfigError(msg)

    def __str__(self) -> str:
        return f"S{self.j}^{self.k}"

    @property
    def key(self) -> str:
        return f"{self.j},{self.k}"

    @classmethod
    def parse(cls, raw: str | tuple[int, int] | list[int]) -> TargetId:
        if isinstance(raw, str):
            parts = raw.replace("(", "").replace(")", "").split(",")
            try:
                j, k = (int(p) for p in parts)
            except ValueError as e:
                msg = f"cannot read target {raw!r}; expected 'j,k'"
                raise ConfigError(msg) from e
            return cls(j, k)
        j, k = raw
        return cls(int(j), int(k))

    @classmethod
    def all(cls) -> list[TargetId]:
        return [cls(j, k) for j, k in sorted(VALID_TARGETS)]


S0 = TargetId(0, 0)
S1_0 = TargetId(1, 0)
S1_1 = TargetId(1, 1)
S2_1 = TargetId(2, 1)
S2_2 = TargetId(2, 2)
S3_2 = TargetId(3, 2)
S3_0 = TargetId(3, 0)
S4 = TargetId(4, 0)


class WeightKind(StrEnum):
    identity = "identity"
    unit = "unit"
    indicator = "indicator"


@dataclass(frozen=True)
class Weight:
    """The weight f(a) of a target tau = E[f(A) Y_S]."""

    kind: WeightKind
    level: int | None = None

    IDENTITY: ClassVar[Weight]
    UNIT: ClassVar[Weight]

    def __post_init__(self) -> None:
        if (self.kind is WeightKind.indicator) != (self.level is not None):
            msg = "an indicator weight needs a level and only an indicator weight takes one"
            raise ConfigError(msg)

    def __str__(self) -> str:
        return f"1(a={self.level})" if self.kind is WeightKind.indicator else self.kind.value

    @classmethod
    def indicator(cls, level: int) -> Weight:
        return cls(WeightKind.indicator, level)

    def values(self, card_a: int) -> npt.NDArray[np.float64]:
        """f evaluated at every level of A."""
        levels = np.arange(card_a, dtype=np.float64)
        match self.kind:
            case WeightKind.identity:
                return levels
            case WeightKind.unit:
                return np.ones(card_a)
            case WeightKind.indicator:
                return (levels == self.level).astype(np.float64)


Weight.IDENTITY = Weight(WeightKind.identity)
Weight.UNIT = Weight(WeightKind.unit)


@dataclass(frozen=True)
class GradientTarget:
    t: TargetId
    f: Weight

    def __post_init__(self) -> None:
        if (self.t.j, self.t.k) not in GRADIENT_TARGETS:
            msg = f"no canonical gradient for target {self.t}; supported: {GRADIENT_TARGETS}"
            raise ConfigError(msg)


class PathName(StrEnum):
    p1 = "P1"
    p2 = "P2"
    p3 = "P3"
    p4 = "P4"
    p2_or_p3 = "P2vP3"


class ZUnderlineMode(StrEnum):
    """How the edge-removal draw Z_{A_} is generated in enumeration.

    ``coupled`` draws it from p(z | A_, W) with the same A_ used elsewhere in the counterfactual;
    ``marginal`` draws it from p(z | W).
    """

    coupled = "coupled"
    marginal = "marginal"


# Positive/negative target pairs of each covariance contrast; P2vP3 carries six signed terms.
PATH_CONTRASTS: dict[PathName, tuple[tuple[int, TargetId], ...]] = {
    PathName.p1: ((1, S0), (-1, S1_0)),
    PathName.p2: ((1, S1_1), (-1, S2_1)),
    PathName.p3: ((1, S2_2), (-1, S3_2)),
    PathName.p4: ((1, S3_0), (-1, S4)),
    PathName.p2_or_p3: ((1, S1_0), (-1, S1_1), (1, S2_1), (-1, S2_2), (1, S3_2), (-1, S3_0)),
}
TOTAL_CONTRAST: tuple[tuple[int, TargetId], ...] = ((1, S0), (-1, S4))
