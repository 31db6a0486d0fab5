from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import NewType

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, Field, PositiveInt

from pathflux.common.errors import DatasetValidationError

ScmName = NewType("ScmName", str)
Fingerprint = NewType("Fingerprint", str)

IntArray = npt.NDArray[np.int64]
FloatArray = npt.NDArray[np.float64]

VARIABLES = ("w", "a", "z", "m")


class NoisePmfs(BaseModel):
    """Probability vectors of the five mutually independent exogenous noise terms."""

    u_w: list[float]
    u_a: list[float]
    u_z: list[float]
    u_m: list[float]
    u_y: list[float]

    model_config = {"frozen": True, "extra": "forbid"}

    def items(self) -> list[tuple[str, list[float]]]:
        return [("u_w", self.u_w), ("u_a", self.u_a), ("u_z", self.u_z), ("u_m", self.u_m), ("u_y", self.u_y)]


@dataclass(frozen=True)
class ScmTables:
    """Numpy views of a validated SCM. Structural tables keep the documented argument order."""

    p_uw: FloatArray
    p_ua: FloatArray
    p_uz: FloatArray
    p_um: FloatArray
    p_uy: FloatArray
    f_w: IntArray  # [u_w]
    f_a: IntArray  # [w, u_a]
    f_z: IntArray  # [a, w, u_z]
    f_m: IntArray  # [z, a, w, u_m]
    f_y: FloatArray  # [m, z, a, w, u_y]

    def noise_list(self) -> list[FloatArray]:
        return [self.p_uw, self.p_ua, self.p_uz, self.p_um, self.p_uy]

    @property
    def noise_grid_size(self) -> int:
        return int(self.p_uw.size * self.p_ua.size * self.p_uz.size * self.p_um.size * self.p_uy.size)


class DiscreteScm(BaseModel):
    """A finite structural causal model W -> A -> Z -> M -> Y with product exogenous noise.

    Tables are nested lists indexed in argument order: ``f_a[w][u_a]``, ``f_z[a][w][u_z]``,
    ``f_m[z][a][w][u_m]`` and ``f_y[m][z][a][w][u_y]``. Structural validity is checked by
    ``pathflux.services.calculators.scm_validation.validate``; the model itself only parses.
    """

    name: ScmName | None = None
    card_w: PositiveInt
    card_a: PositiveInt
    card_z: PositiveInt
    card_m: PositiveInt
    noise: NoisePmfs
    f_w: list[int]
    f_a: list[list[int]]
    f_z: list[list[list[int]]]
    f_m: list[list[list[list[int]]]]
    f_y: list[list[list[list[list[float]]]]] = Field(repr=False)

    model_config = {"frozen": True, "extra": "forbid"}

    @property
    def cards(self) -> Cardinalities:
        return Cardinalities(self.card_w, self.card_a, self.card_z, self.card_m)

    @cached_property
    def tables(self) -> ScmTables:
        return ScmTables(
            p_uw=np.asarray(self.noise.u_w, dtype=np.float64),
            p_ua=np.asarray(self.noise.u_a, dtype=np.float64),
            p_uz=np.asarray(self.noise.u_z, dtype=np.float64),
            p_um=np.asarray(self.noise.u_m, dtype=np.float64),
            p_uy=np.asarray(self.noise.u_y, dtype=np.float64),
            f_w=np.asarray(self.f_w, dtype=np.int64),
            f_a=np.asarray(self.f_a, dtype=np.int64),
            f_z=np.asarray(self.f_z, dtype=np.int64),
            f_m=np.asarray(self.f_m, dtype=np.int64),
            f_y=np.asarray(self.f_y, dtype=np.float64),
        )

    @cached_property
    def fingerprint(self) -> Fingerprint:
        return Fingerprint(hashlib.sha256(self.model_dump_json(exclude={"name"}).encode()).hexdigest())

    @classmethod
    def from_tables(cls, tables: ScmTables, name: str | None = None) -> DiscreteScm:
        return cls(
            name=ScmName(name) if name else None,
            card_w=tables.f_a.shape[0],
            card_a=tables.f_z.shape[0],
            card_z=tables.f_m.shape[0],
            card_m=tables.f_y.shape[0],
            noise=NoisePmfs(
                u_w=tables.p_uw.tolist(),
                u_a=tables.p_ua.tolist(),
                u_z=tables.p_uz.tolist(),
                u_m=tables.p_um.tolist(),
                u_y=tables.p_uy.tolist(),
            ),
            f_w=tables.f_w.tolist(),
            f_a=tables.f_a.tolist(),
            f_z=tables.f_z.tolist(),
            f_m=tables.f_m.tolist(),
            f_y=tables.f_y.tolist(),
        )


@dataclass(frozen=True)
class Cardinalities:
    card_w: int
    card_a: int
    card_z: int
    card_m: int

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.card_w, self.card_a, self.card_z, self.card_m)


@dataclass(frozen=True)
class JointLaw:
    """Exact observed-data law implied by an SCM. Arrays use axis order (w, a, z, m).

    ``mean_y`` is NaN on cells of zero probability; ``y_pmf[..., k]`` is P(Y = y_support[k] | cell).
    """

    prob: FloatArray
    mean_y: FloatArray
    y_support: FloatArray
    y_pmf: FloatArray

    @property
    def cards(self) -> Cardinalities:
        return Cardinalities(*self.prob.shape)

    @property
    def total_mass(self) -> float:
        return float(self.prob.sum())

    def marginal_w(self) -> FloatArray:
        return self.prob.sum(axis=(1, 2, 3))

    def covariance_ay(self) -> float:
        a_levels = np.arange(self.prob.shape[1], dtype=np.float64)
        p_a = self.prob.sum(axis=(0, 2, 3))
        e_a = float(p_a @ a_levels)
        e_y = float(np.nansum(self.prob * self.mean_y))
        e_ay = float(np.nansum(self.prob * self.mean_y * a_levels[None, :, None, None]))
        return e_ay - e_a * e_y


@dataclass(frozen=True)
class Dataset:
    """n i.i.d. rows of (w, a, z, m, y) with integer-coded discrete columns."""

    w: IntArray
    a: IntArray
    z: IntArray
    m: IntArray
    y: FloatArray
    cards: Cardinalities
    codebook: dict[int, tuple[object, ...]] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        n = len(self.y)
        if n < 1:
            msg = "dataset has no rows"
            raise DatasetValidationError(msg)
        for name, column, card in zip(VARIABLES, self.columns(), self.cards.shape, strict=True):
            if len(column) != n:
                msg = f"column {name} has {len(column)} values, expected {n}"
                raise DatasetValidationError(msg)
            bad = np.flatnonzero((column < 0) | (column >= card))
            if bad.size:
                row = int(bad[0])
                msg = f"{name}={int(column[row])} outside 0..{card - 1}"
                raise DatasetValidationError(msg, row=row)
        if not np.all(np.isfinite(self.y)):
            row = int(np.flatnonzero(~np.isfinite(self.y))[0])
            msg = "y is not a finite number"
            raise DatasetValidationError(msg, row=row)

    @property
    def n(self) -> int:
        return len(self.y)

    def columns(self) -> tuple[IntArray, IntArray, IntArray, IntArray]:
        return (self.w, self.a, self.z, self.m)

    def cell_index(self) -> IntArray:
        """Flat index of each row's (w, a, z, m) cell."""
        return np.ravel_multi_index(self.columns(), self.cards.shape)

    def take(self, rows: IntArray) -> Dataset:
        return Dataset(
            w=self.w[rows],
            a=self.a[rows],
            z=self.z[rows],
            m=self.m[rows],
            y=self.y[rows],
            cards=self.cards,
            codebook=self.codebook,
        )

    @classmethod
    def from_columns(
        cls,
        w: npt.ArrayLike,
        a: npt.ArrayLike,
        z: npt.ArrayLike,
        m: npt.ArrayLike,
        y: npt.ArrayLike,
        cards: Cardinalities | None = None,
        codebook: dict[int, tuple[object, ...]] | None = None,
    ) -> Dataset:
        columns = [np.asarray(c, dtype=np.int64) for c in (w, a, z, m)]
        if cards is None:
            cards = Cardinalities(*(int(c.max()) + 1 if c.size and c.max() >= 0 else 1 for c in columns))
        return cls(*columns, y=np.asarray(y, dtype=np.float64), cards=cards, codebook=codebook)


@dataclass(frozen=True)
class CtfLaw:
    """Joint law of (A, Y_S): ``joint[a, k] = P(A = a, Y_S = y_support[k])``."""

    y_support: FloatArray
    joint: FloatArray

    @property
    def p_a(self) -> FloatArray:
        return self.joint.sum(axis=1)

    def conditional(self) -> FloatArray:
        """P(Y_S = y_k | A = a); rows of levels with P(A = a) = 0 are NaN."""
        p_a = self.p_a
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(p_a[:, None] > 0, self.joint / p_a[:, None], np.nan)

    def conditional_means(self) -> FloatArray:
        return self.conditional() @ self.y_support

    def expectation(self, f_values: FloatArray) -> float:
        """E[f(A) Y_S]."""
        return float(f_values @ self.joint @ self.y_support)

    def aligned_with(self, other: CtfLaw) -> tuple[FloatArray, FloatArray, FloatArray]:
        """Both joints re-expressed on the union of the two outcome supports."""
        support = np.union1d(self.y_support, other.y_support)
        mine = np.zeros((self.joint.shape[0], support.size))
        theirs = np.zeros((other.joint.shape[0], support.size))
        mine[:, np.searchsorted(support, self.y_support)] = self.joint
        theirs[:, np.searchsorted(support, other.y_support)] = other.joint
        return support, mine, theirs
