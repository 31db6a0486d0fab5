"""Exact laws of information-transfer counterfactuals and the oracle decompositions built on them.

Enumeration runs over the noise grid (u_w, u_a, u_z, u_m, u_y) augmented with the auxiliary draws
A_ ~ p(a | W), Z_A ~ p(z | A, W) and Z_{A_} (see ``ZUnderlineMode``). Auxiliary draws a target does
not use collapse to a single coordinate of weight one.
"""

import logging
import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from scipy.special import rel_entr

from pathflux.common.errors import DomainError, UnsupportedModelError
from pathflux.config.constants import ADDITIVITY_TOLERANCE, DEFAULT_CELL_BUDGET
from pathflux.model.reports import AteDecomposition, AteMeans, PathDecomposition, TotalInfluence
from pathflux.model.scm import CtfLaw, DiscreteScm, FloatArray, IntArray
from pathflux.model.targets import (
    PATH_CONTRASTS,
    S0,
    S4,
    TOTAL_CONTRAST,
    PathName,
    TargetId,
    Weight,
    ZUnderlineMode,
)
from pathflux.services.calculators.enumeration import (
    check_budget,
    derived_conditionals,
    enumerate_joint,
    structural_z_law,
)

logger = logging.getLogger(__name__)

TOTAL_COVARIANCE_TOLERANCE = 1e-10

_GRID_AXES = 8  # u_w, u_a, u_z, u_m, u_y, A_, Z_A, Z_{A_}


class ContrastKind(StrEnum):
    mean_diff = "mean_diff"
    covariance = "covariance"
    kl = "kl"


@dataclass(frozen=True)
class _Grid:
    """Broadcastable coordinates of one enumeration. Every array has ``_GRID_AXES`` dimensions."""

    scm: DiscreteScm
    w: IntArray
    a: IntArray
    a_bar: IntArray
    z_emulated: IntArray
    z_removed: IntArray
    u_z: IntArray
    u_m: IntArray
    u_y: IntArray
    weight: FloatArray

    def z_of(self, a: IntArray) -> IntArray:
        return self.scm.tables.f_z[a, self.w, self.u_z]

    def m_of(self, a: IntArray, z: IntArray) -> IntArray:
        return self.scm.tables.f_m[z, a, self.w, self.u_m]

    def y_of(self, a: IntArray, z: IntArray, m: IntArray) -> FloatArray:
        return self.scm.tables.f_y[m, z, a, self.w, self.u_y]


# Each target: the structural evaluation plus which auxiliary draws it consumes.
_CounterfactualFn = Callable[[_Grid], FloatArray]
_TARGETS: dict[TargetId, tuple[_CounterfactualFn, bool, bool, bool]] = {
    TargetId(0, 0): (lambda g: g.y_of(g.a, g.z_of(g.a), g.m_of(g.a, g.z_of(g.a))), False, False, False),
    TargetId(1, 0): (lambda g: g.y_of(g.a_bar, g.z_of(g.a), g.m_of(g.a, g.z_of(g.a))), True, False, False),
    TargetId(1, 1): (lambda g: g.y_of(g.a_bar, g.z_of(g.a), g.m_of(g.a, g.z_emulated)), True, True, False),
    TargetId(2, 1): (lambda g: g.y_of(g.a_bar, g.z_of(g.a_bar), g.m_of(g.a, g.z_emulated)), True, True, False),
    TargetId(2, 2): (lambda g: g.y_of(g.a_bar, g.z_removed, g.m_of(g.a, g.z_of(g.a))), True, False, True),
    TargetId(3, 2): (lambda g: g.y_of(g.a_bar, g.z_removed, g.m_of(g.a, g.z_of(g.a_bar))), True, False, True),
    TargetId(3, 0): (lambda g: g.y_of(g.a_bar, g.z_of(g.a_bar), g.m_of(g.a, g.z_of(g.a_bar))), True, False, False),
    TargetId(4, 0): (
        lambda g: g.y_of(g.a_bar, g.z_of(g.a_bar), g.m_of(g.a_bar, g.z_of(g.a_bar))),
        True,
        False,
        False,
    ),
}


def _on_axis(values: np.ndarray, axis: int, ndim: int = _GRID_AXES) -> np.ndarray:
    shape = [1] * ndim
    shape[axis] = values.size
    return values.reshape(shape)


def _build_grid(
    scm: DiscreteScm, *, use_a_bar: bool, use_z_emulated: bool, use_z_removed: bool, mode: ZUnderlineMode
) -> _Grid:
    t = scm.tables
    eta = derived_conditionals(enumerate_joint(scm))
    p_a = np.nan_to_num(eta.p_a)
    p_z = np.nan_to_num(eta.p_z)

    u_w, u_a, u_z, u_m, u_y = (_on_axis(np.arange(p.size), i) for i, p in enumerate(t.noise_list()))
    w = t.f_w[u_w]
    a = t.f_a[w, u_a]
    single = np.zeros(1, dtype=np.int64)
    a_bar = _on_axis(np.arange(scm.card_a) if use_a_bar else single, 5)
    z_emulated = _on_axis(np.arange(scm.card_z) if use_z_emulated else single, 6)
    z_removed = _on_axis(np.arange(scm.card_z) if use_z_removed else single, 7)

    weight = np.ones([1] * _GRID_AXES)
    for axis, pmf in enumerate(t.noise_list()):
        weight = weight * _on_axis(pmf, axis)
    if use_a_bar:
        weight = weight * p_a[w, a_bar]
    if use_z_emulated:
        weight = weight * p_z[w, a, z_emulated]
    if use_z_removed:
        if mode is ZUnderlineMode.coupled:
            weight = weight * p_z[w, a_bar, z_removed]
        else:
            p_z_given_w = np.einsum("wa,waz->wz", p_a, p_z)
            weight = weight * p_z_given_w[w, z_removed]

    return _Grid(
        scm=scm,
        w=w,
        a=a,
        a_bar=a_bar,
        z_emulated=z_emulated,
        z_removed=z_removed,
        u_z=u_z,
        u_m=u_m,
        u_y=u_y,
        weight=weight,
    )


def ctf_law(
    scm: DiscreteScm,
    t: TargetId,
    mode: ZUnderlineMode = ZUnderlineMode.coupled,
    cell_budget: int = DEFAULT_CELL_BUDGET,
) -> CtfLaw:
    evaluate, use_a_bar, use_z_emulated, use_z_removed = _TARGETS[t]
    aux_cells = (scm.card_a if use_a_bar else 1) * (scm.card_z if use_z_emulated else 1)
    aux_cells *= scm.card_z if use_z_removed else 1
    check_budget(scm.tables.noise_grid_size, cell_budget, "noise grid")
    check_budget(scm.tables.noise_grid_size * aux_cells, cell_budget, f"enumeration grid of {t}")

    grid = _build_grid(
        scm, use_a_bar=use_a_bar, use_z_emulated=use_z_emulated, use_z_removed=use_z_removed, mode=mode
    )
    y = evaluate(grid)
    shape = np.broadcast_shapes(y.shape, grid.a.shape, grid.weight.shape)
    y = np.broadcast_to(y, shape).ravel()
    a = np.broadcast_to(grid.a, shape).ravel()
    weight = np.broadcast_to(grid.weight, shape).ravel()
    charged = weight > 0
    y, a, weight = y[charged], a[charged], weight[charged]

    support, code = np.unique(y, return_inverse=True)
    joint = np.bincount(a * support.size + code, weights=weight, minlength=scm.card_a * support.size)
    return CtfLaw(y_support=support, joint=joint.reshape(scm.card_a, support.size))


def oracle_tau(
    scm: DiscreteScm,
    t: TargetId,
    f: Weight,
    mode: ZUnderlineMode = ZUnderlineMode.coupled,
    cell_budget: int = DEFAULT_CELL_BUDGET,
) -> float:
    return ctf_law(scm, t, mode, cell_budget).expectation(f.values(scm.card_a))


def oracle_conditional_means(
    scm: DiscreteScm, t: TargetId, mode: ZUnderlineMode = ZUnderlineMode.coupled
) -> FloatArray:
    return ctf_law(scm, t, mode).conditional_means()


def target_laws(
    scm: DiscreteScm,
    mode: ZUnderlineMode = ZUnderlineMode.coupled,
    cell_budget: int = DEFAULT_CELL_BUDGET,
    threads: int = 1,
) -> dict[TargetId, CtfLaw]:
    targets = TargetId.all()
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        laws = list(pool.map(lambda t: ctf_law(scm, t, mode, cell_budget), targets))
    return dict(zip(targets, laws, strict=True))


def _covariances(scm: DiscreteScm, laws: dict[TargetId, CtfLaw]) -> dict[TargetId, float]:
    identity = Weight.IDENTITY.values(scm.card_a)
    unit = Weight.UNIT.values(scm.card_a)
    mu_a = float(laws[S0].p_a @ identity)
    return {t: law.expectation(identity) - mu_a * law.expectation(unit) for t, law in laws.items()}


def _contrast(covariances: dict[TargetId, float], terms: tuple[tuple[int, TargetId], ...]) -> float:
    return math.fsum(sign * covariances[t] for sign, t in terms)


def oracle_path_decomposition(
    scm: DiscreteScm,
    mode: ZUnderlineMode = ZUnderlineMode.coupled,
    cell_budget: int = DEFAULT_CELL_BUDGET,
    threads: int = 1,
) -> PathDecomposition:
    covariances = _covariances(scm, target_laws(scm, mode, cell_budget, threads))
    paths = {path: _contrast(covariances, terms) for path, terms in PATH_CONTRASTS.items()}
    theta = _contrast(covariances, TOTAL_CONTRAST)
    gap = theta - math.fsum(paths.values())
    logger.info("oracle path decomposition", extra={"scm": scm.name, "theta": theta, "gap": gap})
    return PathDecomposition(
        theta=theta,
        theta_p1=paths[PathName.p1],
        theta_p2=paths[PathName.p2],
        theta_p3=paths[PathName.p3],
        theta_p4=paths[PathName.p4],
        theta_p2_or_p3=paths[PathName.p2_or_p3],
        sum_check=abs(gap) <= ADDITIVITY_TOLERANCE,
    )


def oracle_total_influence(scm: DiscreteScm, cell_budget: int = DEFAULT_CELL_BUDGET) -> TotalInfluence:
    law = enumerate_joint(scm, cell_budget)
    prob = law.prob
    mean_y = np.nan_to_num(law.mean_y)
    a_levels = np.arange(scm.card_a, dtype=np.float64)

    p_w = prob.sum(axis=(1, 2, 3))
    observed_w = p_w > 0
    safe_p_w = np.where(observed_w, p_w, 1.0)
    e_y_w = np.einsum("wazm,wazm->w", prob, mean_y) / safe_p_w
    e_a_w = np.einsum("wazm,a->w", prob, a_levels) / safe_p_w
    e_y = float(p_w @ e_y_w)
    e_a = float(p_w @ e_a_w)

    residual_a = a_levels[None, :, None, None] - e_a_w[:, None, None, None]
    residual_y = mean_y - e_y_w[:, None, None, None]
    theta = float(np.sum(prob * residual_a * residual_y))
    tau_conf = float(np.sum(p_w * (e_a_w - e_a) * (e_y_w - e_y)))

    p_a = prob.sum(axis=(0, 2, 3))
    residual_mass = np.einsum("wazm,wazm->a", prob, residual_y)
    f_curve = {a: float(residual_mass[a] / p_a[a]) for a in range(scm.card_a) if p_a[a] > 0}

    cov_ay = law.covariance_ay()
    return TotalInfluence(
        theta=theta,
        tau_conf=tau_conf,
        f_curve=f_curve,
        cov_ay=cov_ay,
        total_covariance_check=abs(theta + tau_conf - cov_ay) <= TOTAL_COVARIANCE_TOLERANCE,
    )


def oracle_ate_decomposition(scm: DiscreteScm, cell_budget: int = DEFAULT_CELL_BUDGET) -> AteDecomposition:
    """Exact psi = E[Y(1)] - E[Y(0)] and its path components, with Z_1, Z_0 drawn from the law of Z(a) | W."""
    if scm.card_a != 2:  # noqa: PLR2004
        msg = f"the effect decomposition needs a binary A, this model has {scm.card_a} levels"
        raise UnsupportedModelError(msg)
    t = scm.tables
    check_budget(t.noise_grid_size // t.p_ua.size * scm.card_z**2, cell_budget, "effect enumeration grid")

    noise = (t.p_uw, t.p_uz, t.p_um, t.p_uy)
    u_w, u_z, u_m, u_y = (_on_axis(np.arange(p.size), i, 6) for i, p in enumerate(noise))
    z_1 = _on_axis(np.arange(scm.card_z), 4, 6)
    z_0 = _on_axis(np.arange(scm.card_z), 5, 6)
    w = t.f_w[u_w]
    z_law = structural_z_law(scm)

    weight = np.ones([1] * 6)
    for axis, pmf in enumerate(noise):
        weight = weight * _on_axis(pmf, axis, 6)
    weight = weight * z_law[w, 1, z_1] * z_law[w, 0, z_0]

    def z_of(a: int) -> IntArray:
        return t.f_z[a, w, u_z]

    def m_of(a: int, z: IntArray) -> IntArray:
        return t.f_m[z, a, w, u_m]

    def mean_of(a: int, z: IntArray, m: IntArray) -> float:
        y = t.f_y[m, z, a, w, u_y]
        return float(np.sum(np.broadcast_to(weight, np.broadcast_shapes(weight.shape, y.shape)) * y))

    means = AteMeans[float](
        s0=mean_of(1, z_of(1), m_of(1, z_of(1))),
        s1=mean_of(0, z_of(1), m_of(1, z_of(1))),
        s1_prime=mean_of(0, z_of(1), m_of(1, z_1)),
        s2_prime=mean_of(0, z_of(0), m_of(1, z_1)),
        s2_double_prime=mean_of(0, z_0, m_of(1, z_of(1))),
        s3_double_prime=mean_of(0, z_0, m_of(1, z_of(0))),
        s3=mean_of(0, z_of(0), m_of(1, z_of(0))),
        s4=mean_of(0, z_of(0), m_of(0, z_of(0))),
    )
    return AteDecomposition.from_means(means)


def oracle_contrast(
    scm: DiscreteScm,
    t1: TargetId,
    t2: TargetId,
    kind: ContrastKind,
    mode: ZUnderlineMode = ZUnderlineMode.coupled,
) -> float:
    first, second = ctf_law(scm, t1, mode), ctf_law(scm, t2, mode)
    identity = Weight.IDENTITY.values(scm.card_a)
    unit = Weight.UNIT.values(scm.card_a)
    match kind:
        case ContrastKind.mean_diff:
            return first.expectation(unit) - second.expectation(unit)
        case ContrastKind.covariance:
            mu_a = float(first.p_a @ identity)
            return (
                first.expectation(identity)
                - second.expectation(identity)
                - mu_a * (first.expectation(unit) - second.expectation(unit))
            )
        case ContrastKind.kl:
            _, p, q = first.aligned_with(second)
            if np.any((p > 0) != (q > 0)):
                msg = f"laws of {t1} and {t2} are not mutually absolutely continuous"
                raise DomainError(msg)
            return float(np.sum(rel_entr(p, q)))
