"""Multilinear plug-in functionals of eta = (p_a, p_z, p_m, m_hat) on a discrete (w, a, z, m) grid.

A functional is a list of factors, each a nuisance table (or constant vector) with einsum
subscripts; its value is sum_w wm(w) * einsum(factors -> w). The same description drives
evaluation, overlap checking and the delta-method canonical gradient.

Subscript letters: w for W; a, b, c, d range over levels of A; z, y over levels of Z; m over M.
Nuisance factors always start with w and name their axes in table order (w, a, z, m).
"""

import math
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np

from pathflux.common.errors import ConfigError, IdentificationError
from pathflux.model.nuisance import NuisanceSet, WMarginal
from pathflux.model.scm import VARIABLES, FloatArray


class FactorKind(StrEnum):
    p_a = "p_a"
    p_z = "p_z"
    p_m = "p_m"
    m_hat = "m_hat"
    constant = "constant"


_TABLE_RANK = {FactorKind.p_a: 2, FactorKind.p_z: 3, FactorKind.p_m: 4, FactorKind.m_hat: 4}


@dataclass(frozen=True)
class Factor:
    kind: FactorKind
    subscripts: str
    values: FloatArray | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind is FactorKind.constant:
            if self.values is None or self.values.ndim != len(self.subscripts):
                msg = f"constant factor {self.subscripts!r} needs values of matching rank"
                raise ConfigError(msg)
        elif len(self.subscripts) != _TABLE_RANK[self.kind] or self.subscripts[0] != "w":
            msg = f"{self.kind} factor cannot take subscripts {self.subscripts!r}"
            raise ConfigError(msg)

    def table(self, eta: NuisanceSet) -> FloatArray:
        match self.kind:
            case FactorKind.p_a:
                return eta.p_a
            case FactorKind.p_z:
                return eta.p_z
            case FactorKind.p_m:
                return eta.p_m
            case FactorKind.m_hat:
                return eta.m_hat
            case FactorKind.constant:
                return self.values

    def support(self, eta: NuisanceSet) -> FloatArray:
        """Indicator of where this factor can carry mass; regressions count everywhere."""
        match self.kind:
            case FactorKind.m_hat:
                return np.ones_like(eta.m_hat)
            case FactorKind.constant:
                return np.abs(self.values)
            case _:
                table = self.table(eta)
                return (np.nan_to_num(table) > 0).astype(np.float64)


def pa(subscripts: str) -> Factor:
    return Factor(FactorKind.p_a, subscripts)


def pz(subscripts: str) -> Factor:
    return Factor(FactorKind.p_z, subscripts)


def pm(subscripts: str) -> Factor:
    return Factor(FactorKind.p_m, subscripts)


def mh(subscripts: str) -> Factor:
    return Factor(FactorKind.m_hat, subscripts)


def const(subscripts: str, values: FloatArray) -> Factor:
    return Factor(FactorKind.constant, subscripts, np.asarray(values, dtype=np.float64))


@dataclass(frozen=True)
class GradientTables:
    """Uncentered gradient affine in Y per cell: phi_bar = coef * (y - m_hat) + offset, on the (w, a, z, m) grid."""

    coef: FloatArray
    offset: FloatArray

    def __add__(self, other: "GradientTables") -> "GradientTables":
        return GradientTables(self.coef + other.coef, self.offset + other.offset)


@dataclass(frozen=True)
class MultilinearFunctional:
    name: str
    factors: tuple[Factor, ...]

    def _einsum(self, tables: list[FloatArray], output: str, skip: int | None = None) -> FloatArray:
        """Contract every factor but ``skip`` onto ``output``; output axes no remaining factor carries are constant."""
        subscripts = [f.subscripts for i, f in enumerate(self.factors) if i != skip]
        operands = [t for i, t in enumerate(tables) if i != skip]
        carried = "".join(letter for letter in output if any(letter in s for s in subscripts))
        if subscripts:
            result = np.einsum(",".join(subscripts) + "->" + carried, *operands, optimize=True)
        else:
            result = np.ones(())
        if carried == output:
            return result
        sizes = {
            letter: n
            for factor, table in zip(self.factors, tables, strict=True)
            for letter, n in zip(factor.subscripts, table.shape, strict=True)
        }
        expanded = result[tuple(slice(None) if letter in carried else None for letter in output)]
        return np.broadcast_to(expanded, tuple(sizes[letter] for letter in output)).copy()

    def _tables(self, eta: NuisanceSet) -> list[FloatArray]:
        return [np.nan_to_num(f.table(eta)) for f in self.factors]

    def per_w(self, eta: NuisanceSet) -> FloatArray:
        return self._einsum(self._tables(eta), "w")

    def value(self, eta: NuisanceSet, wm: WMarginal) -> float:
        return math.fsum(wm.probs * self.per_w(eta))

    def check_overlap(self, eta: NuisanceSet, wm: WMarginal) -> None:
        """Raise if a nuisance cell the functional puts weight on is undefined."""
        supports = [*(f.support(eta) for f in self.factors), (wm.probs > 0).astype(np.float64)]
        letters = [*(f.subscripts for f in self.factors), "w"]
        for i, factor in enumerate(self.factors):
            if factor.kind is FactorKind.constant:
                continue
            others = [s for j, s in enumerate(supports) if j != i]
            inputs = ",".join(s for j, s in enumerate(letters) if j != i)
            needed = np.einsum(inputs + "->" + factor.subscripts, *others, optimize=True)
            table = factor.table(eta)
            undefined = np.isnan(table) & (needed > 0)
            if np.any(undefined):
                index = tuple(int(k) for k in np.argwhere(undefined)[0])
                cell = dict(zip(VARIABLES, index, strict=False))
                msg = f"{self.name} needs {factor.kind}, which is undefined"
                raise IdentificationError(msg, cell=cell)

    def gradient(self, eta: NuisanceSet) -> GradientTables:
        """Canonical gradient in the saturated model, by the delta method applied factor by factor."""
        tables = self._tables(eta)
        cards = eta.cards
        p_a = np.nan_to_num(eta.p_a)
        p_az = p_a[..., None] * np.nan_to_num(eta.p_z)
        p_azm = p_az[..., None] * np.nan_to_num(eta.p_m)
        g = self._einsum(tables, "w")

        coef = np.zeros(cards.shape)
        offset = np.broadcast_to(g[:, None, None, None], cards.shape).copy()
        for i, factor in enumerate(self.factors):
            if factor.kind is FactorKind.constant:
                continue
            d = self._einsum(tables, factor.subscripts, skip=i)
            table = tables[i]
            match factor.kind:
                case FactorKind.p_a:
                    offset += (d - np.sum(d * table, axis=-1, keepdims=True))[:, :, None, None]
                case FactorKind.p_z:
                    centered = d - np.sum(d * table, axis=-1, keepdims=True)
                    offset += ratio(centered, p_a[..., None])[..., None]
                case FactorKind.p_m:
                    centered = d - np.sum(d * table, axis=-1, keepdims=True)
                    offset += ratio(centered, p_az[..., None])
                case FactorKind.m_hat:
                    coef += ratio(d, p_azm)
        return GradientTables(coef=coef, offset=offset)


def ratio(numerator: FloatArray, denominator: FloatArray) -> FloatArray:
    """numerator / denominator with zero where the denominator vanishes (cells of no mass)."""
    numerator, denominator = np.broadcast_arrays(numerator, denominator)
    return np.divide(numerator, denominator, out=np.zeros(numerator.shape), where=denominator > 0)
