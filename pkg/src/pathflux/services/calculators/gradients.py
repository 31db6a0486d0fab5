"""Uncentered canonical gradients of the counterfactual means tau = E[f(A) Y_S].

Each gradient is affine in y within a cell: phi_bar(x) = coef[w,a,z,m] (y - m_hat[w,a,z,m]) + offset[w,a,z,m].
Branches below are the closed forms; ``delta_method_gradient`` gives the same tables for any
multilinear functional and serves as their cross-check.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from functools import cached_property
from typing import ClassVar

import numpy as np

from pathflux.common.errors import TruncationError
from pathflux.config.constants import EXACT_DENOMINATOR_FLOOR
from pathflux.model.nuisance import NuisanceSet, WMarginal
from pathflux.model.scm import Dataset, FloatArray, JointLaw
from pathflux.model.targets import S0, S2_1, S2_2, GradientTarget, TargetId, Weight
from pathflux.services.calculators.functional import GradientTables, MultilinearFunctional, ratio
from pathflux.services.calculators.identification import target_functional

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HFunctions:
    """f-weighted pmf integrals over the actual treatment, per gradient target."""

    h1_0: FloatArray  # [w, z, m]
    h1_1: FloatArray  # [w, z, m]
    h2_1: FloatArray  # [w, m]
    h3_2: FloatArray  # [w, a', m]
    h3_0: FloatArray  # [w, z, m]
    h4_0: FloatArray  # [w]


@dataclass(frozen=True)
class _Parts:
    """Nuisance tables with undefined cells zeroed, and the products the branches share."""

    p_a: FloatArray
    p_z: FloatArray
    p_m: FloatArray
    m_hat: FloatArray
    f: FloatArray

    @classmethod
    def of(cls, eta: NuisanceSet, f: Weight) -> "_Parts":
        return cls(
            p_a=np.nan_to_num(eta.p_a),
            p_z=np.nan_to_num(eta.p_z),
            p_m=np.nan_to_num(eta.p_m),
            m_hat=np.nan_to_num(eta.m_hat),
            f=f.values(eta.cards.card_a),
        )

    @cached_property
    def f_cell(self) -> FloatArray:
        return self.f[None, :, None, None]

    @cached_property
    def fpa(self) -> FloatArray:
        return self.f[None, :] * self.p_a

    @cached_property
    def q_m(self) -> FloatArray:
        """p(m | a, w) as [w, a, m]."""
        return np.einsum("way,waym->wam", self.p_z, self.p_m)

    @cached_property
    def m_bar(self) -> FloatArray:
        """sum_b p_a(b | w) m_hat(w, b, z, m), as [w, z, m]."""
        return np.einsum("wb,wbzm->wzm", self.p_a, self.m_hat)

    @cached_property
    def p_zm(self) -> FloatArray:
        return self.p_z[..., None] * self.p_m

    @cached_property
    def h(self) -> HFunctions:
        return HFunctions(
            h1_0=np.einsum("wa,waz,wazm->wzm", self.fpa, self.p_z, self.p_m),
            h1_1=np.einsum("wa,waz,wam->wzm", self.fpa, self.p_z, self.q_m),
            h2_1=np.einsum("wa,wam->wm", self.fpa, self.q_m),
            h3_2=np.einsum("wa,waym,wby->wbm", self.fpa, self.p_m, self.p_z),
            h3_0=np.einsum("wa,wazm->wzm", self.fpa, self.p_m),
            h4_0=self.fpa.sum(axis=1),
        )


def _cell(values: FloatArray, axes: str) -> FloatArray:
    """Broadcast a table whose axes are a subset of 'wazm' (in that order) onto the cell grid."""
    shape = [values.shape[axes.index(letter)] if letter in axes else 1 for letter in "wazm"]
    return values.reshape(shape)


_Branch = Callable[[_Parts], GradientTables]


class GradientRegistry:
    """Closed-form gradient branches, registered per target."""

    registry: ClassVar[dict[TargetId, _Branch]] = {}

    @staticmethod
    def register(j: int, k: int) -> Callable[[_Branch], _Branch]:
        def decorator(branch: _Branch) -> _Branch:
            GradientRegistry.registry[TargetId(j, k)] = branch
            return branch

        return decorator

    @staticmethod
    def get(t: TargetId) -> _Branch:
        if t == S2_2:
            t = S2_1
        if branch := GradientRegistry.registry.get(t):
            return branch
        msg = f"no gradient branch for {t}"
        raise NotImplementedError(msg)


@GradientRegistry.register(0, 0)
def _observed(e: _Parts) -> GradientTables:
    coef = np.broadcast_to(e.f_cell, e.m_hat.shape).copy()
    return GradientTables(coef=coef, offset=e.f_cell * e.m_hat)


@GradientRegistry.register(1, 0)
def _phi_1_0(e: _Parts) -> GradientTables:
    h = e.h.h1_0
    kappa = np.einsum("wzm,wbzm->wb", h, e.m_hat)
    g = np.einsum("wb,wb->w", e.p_a, kappa)
    coef = ratio(_cell(h, "wzm"), e.p_zm)
    offset = e.f_cell * _cell(e.m_bar, "wzm") + _cell(kappa, "wa") - _cell(g, "w")
    return GradientTables(coef=coef, offset=offset)


@GradientRegistry.register(1, 1)
def _phi_1_1(e: _Parts) -> GradientTables:
    h = e.h.h1_1
    kappa = np.einsum("wzm,wbzm->wb", h, e.m_hat)
    g = np.einsum("wb,wb->w", e.p_a, kappa)
    lam = np.einsum("waz,wzm->wam", e.p_z, e.m_bar)
    rho = np.einsum("wam,wzm->waz", e.q_m, e.m_bar)
    g_a = np.einsum("waz,waz->wa", e.p_z, rho)
    coef = ratio(_cell(h, "wzm"), e.p_zm)
    offset = (
        e.f_cell * (_cell(lam, "wam") + _cell(rho, "waz") - _cell(g_a, "wa")) + _cell(kappa, "wa") - _cell(g, "w")
    )
    return GradientTables(coef=coef, offset=offset)


@GradientRegistry.register(2, 1)
def _phi_2_1(e: _Parts) -> GradientTables:
    h = e.h.h2_1
    r = np.einsum("wb,wbz,wbzm->wm", e.p_a, e.p_z, e.m_hat)
    t = np.einsum("wm,wbzm->wbz", h, e.m_hat)
    g = np.einsum("wm,wm->w", h, r)
    coef = ratio(_cell(h, "wm"), e.p_m)
    offset = e.f_cell * _cell(r, "wm") + _cell(t, "waz") - _cell(g, "w")
    return GradientTables(coef=coef, offset=offset)


@GradientRegistry.register(3, 2)
def _phi_3_2(e: _Parts) -> GradientTables:
    h32, h30 = e.h.h3_2, e.h.h3_0
    lam = np.einsum("wbz,wbzm->wbm", e.p_z, e.m_hat)
    u = np.einsum("wb,wby,wbm->wym", e.p_a, e.p_z, lam)
    v_removed = np.einsum("wbm,wbzm->wbz", h32, e.m_hat)
    v_emulated = np.einsum("wym,wbm->wby", h30, lam)
    w_bar = np.einsum("wbm,wbm->wb", h32, lam)
    x = np.einsum("waym,wym->wa", e.p_m, u)
    g = np.einsum("wa,wa->w", e.fpa, x)
    u_centre = np.einsum("wazm,wzm->waz", e.p_m, u)
    coef = ratio(_cell(h32, "wam"), e.p_m)
    offset = (
        ratio(e.f_cell * (_cell(u, "wzm") - _cell(u_centre, "waz")), _cell(e.p_z, "waz"))
        + _cell(v_removed, "waz")
        + _cell(v_emulated, "waz")
        - _cell(w_bar, "wa")
        + e.f_cell * _cell(x, "wa")
        - _cell(g, "w")
    )
    return GradientTables(coef=coef, offset=offset)


@GradientRegistry.register(3, 0)
def _phi_3_0(e: _Parts) -> GradientTables:
    h = e.h.h3_0
    u = np.einsum("wb,wbz,wbzm->wzm", e.p_a, e.p_z, e.m_hat)
    u_centre = np.einsum("wazm,wzm->waz", e.p_m, u)
    v = np.einsum("wzm,wbzm->wbz", h, e.m_hat)
    x = np.einsum("wazm,wzm->wa", e.p_m, u)
    g = np.einsum("wa,wa->w", e.fpa, x)
    coef = ratio(_cell(h, "wzm"), e.p_m)
    # The ratio term enters with a minus sign: u is centred at its p_m mean.
    offset = (
        ratio(e.f_cell * (_cell(u, "wzm") - _cell(u_centre, "waz")), _cell(e.p_z, "waz"))
        + _cell(v, "waz")
        + e.f_cell * _cell(x, "wa")
        - _cell(g, "w")
    )
    return GradientTables(coef=coef, offset=offset)


@GradientRegistry.register(4, 0)
def _phi_4_0(e: _Parts) -> GradientTables:
    h = _cell(e.h.h4_0, "w")
    e_y_w = _cell(np.einsum("wb,wbz,wbzm,wbzm->w", e.p_a, e.p_z, e.p_m, e.m_hat), "w")
    coef = np.broadcast_to(h, e.m_hat.shape).copy()
    offset = h * (e.m_hat - e_y_w) + e.f_cell * e_y_w
    return GradientTables(coef=coef, offset=offset)


def h_tables(eta: NuisanceSet, f: Weight) -> HFunctions:
    return _Parts.of(eta, f).h


def gradient_tables(eta: NuisanceSet, t: TargetId, f: Weight) -> GradientTables:
    """Gradient of tau_t[f]; (0,0) is the observed mean E[f(A) Y] and (2,2) shares the (2,1) formula."""
    if t != S0:
        GradientTarget(S2_1 if t == S2_2 else t, f)
    return GradientRegistry.get(t)(_Parts.of(eta, f))


def delta_method_gradient(functional: MultilinearFunctional, eta: NuisanceSet) -> GradientTables:
    return functional.gradient(eta)


def eif_uncentered(
    data: Dataset, eta: NuisanceSet, tables: GradientTables, floor: float = EXACT_DENOMINATOR_FLOOR
) -> FloatArray:
    """phi_bar at every row of data, after checking the ratio denominators at the observed cells."""
    w, a, z, m = data.columns()
    for name, denominator in (("p_a", eta.p_a[w, a]), ("p_z", eta.p_z[w, a, z]), ("p_m", eta.p_m[w, a, z, m])):
        low = ~(denominator >= floor)
        if np.any(low):
            row = int(np.flatnonzero(low)[0])
            msg = f"{name}={denominator[row]:.3g} below the floor {floor:g} at row {row}, cell (w,a,z,m)="
            msg += f"({w[row]},{a[row]},{z[row]},{m[row]})"
            raise TruncationError(msg)
    m_hat = eta.m_hat[w, a, z, m]
    return tables.coef[w, a, z, m] * (data.y - m_hat) + tables.offset[w, a, z, m]


def covariance_if(
    phi_a: FloatArray, phi_1: FloatArray, tau_a: float, tau_1: float, a: FloatArray, mu_a: float
) -> FloatArray:
    """Influence values of tau_A - mu_A tau_1 given those of tau_A, tau_1 and mu_A = E[A]."""
    return (phi_a - tau_a) - mu_a * (phi_1 - tau_1) - tau_1 * (a - mu_a)


def population_mean(law: JointLaw, eta: NuisanceSet, tables: GradientTables) -> float:
    """E_P[phi_bar(X; eta)] under the exact law P, using E(Y | cell) in place of y."""
    charged = law.prob > 0
    residual = np.where(charged, np.nan_to_num(law.mean_y) - np.nan_to_num(eta.m_hat), 0.0)
    values = tables.coef * residual + tables.offset
    return float(np.sum(np.where(charged, law.prob * values, 0.0)))


def vonmises_remainder(
    law: JointLaw, eta_p: NuisanceSet, eta_g: NuisanceSet, wm: WMarginal, t: TargetId, f: Weight
) -> float:
    """tau(G) - tau(P) + E_P[phi(X; G)], which equals E_P[phi_bar(X; G)] - tau(P)."""
    tau_p = target_functional(t, f, eta_p.cards.card_a).value(eta_p, wm)
    return population_mean(law, eta_g, gradient_tables(eta_g, t, f)) - tau_p
