"""Seeded generator of random discrete SCMs, optionally honouring a structural constraint.

Every table row is surjective onto its variable's levels and every noise pmf mixes a
Dirichlet(1) draw half-and-half with the uniform, so all observed conditionals are positive
unless a constraint breaks that.
"""

import logging

import numpy as np

from pathflux.common.rng import rng_stream
from pathflux.model.experiment import ConstraintKind, RandomScmSpec, ScmConstraint
from pathflux.model.scm import DiscreteScm, FloatArray, IntArray, ScmTables

logger = logging.getLogger(__name__)

RANDOM_SCM_STREAM = 1

# Axes of (f_z, f_m, f_y) sorted for each monotone scope; f_z[a,w,u], f_m[z,a,w,u], f_y[m,z,a,w,u].
MONOTONE_AXES: dict[str, tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]] = {
    "total": ((0,), (0, 1), (0, 1, 2)),
    "P1": ((), (), (2,)),
    "P2": ((0,), (), (1,)),
    "P3": ((0,), (0,), (0,)),
    "P4": ((), (1,), (0,)),
}


def _noise_pmf(rng: np.random.Generator, k: int) -> FloatArray:
    return 0.5 * rng.dirichlet(np.ones(k)) + 0.5 / k


def _surjective_rows(rng: np.random.Generator, shape: tuple[int, ...], k: int, card: int) -> IntArray:
    """Rows of length k over 0..card-1, each hitting every level."""
    rows = np.empty((*shape, k), dtype=np.int64)
    for index in np.ndindex(*shape):
        row = np.concatenate([rng.permutation(card), rng.integers(0, card, size=k - card)])
        rows[index] = rng.permutation(row)
    return rows


def _cards(rng: np.random.Generator, spec: RandomScmSpec, constraint: ScmConstraint) -> tuple[int, int, int, int]:
    def draw(fixed: int | None, low: int) -> int:
        return fixed if fixed is not None else int(rng.integers(low, max(low, spec.max_card) + 1))

    card_w = draw(spec.card_w, 1)
    card_a = draw(spec.card_a, 2)
    card_z = 1 if constraint.kind is ConstraintKind.degenerate_z else draw(spec.card_z, 1)
    card_m = draw(spec.card_m, 1)
    return card_w, card_a, card_z, card_m


def random_scm(seed: int, spec: RandomScmSpec, constraint: ScmConstraint | None = None) -> DiscreteScm:
    constraint = constraint or ScmConstraint()
    rng = rng_stream(seed, RANDOM_SCM_STREAM)
    card_w, card_a, card_z, card_m = _cards(rng, spec, constraint)

    def support(card: int) -> int:
        return int(rng.integers(card, max(card, spec.noise_support) + 1))

    k_w, k_a, k_z, k_m = support(card_w), support(card_a), support(card_z), support(card_m)
    k_y = int(rng.integers(1, spec.noise_support + 1))

    f_w = _surjective_rows(rng, (), k_w, card_w)
    f_a = _surjective_rows(rng, (card_w,), k_a, card_a)
    f_z = _surjective_rows(rng, (card_a, card_w), k_z, card_z)
    f_m = _surjective_rows(rng, (card_z, card_a, card_w), k_m, card_m)
    f_y = rng.normal(size=(card_m, card_z, card_a, card_w, k_y))
    f_z, f_m, f_y = _constrain(constraint, f_z, f_m, f_y)

    tables = ScmTables(
        p_uw=_noise_pmf(rng, k_w),
        p_ua=_noise_pmf(rng, k_a),
        p_uz=_noise_pmf(rng, k_z),
        p_um=_noise_pmf(rng, k_m),
        p_uy=_noise_pmf(rng, k_y),
        f_w=f_w,
        f_a=f_a,
        f_z=f_z,
        f_m=f_m,
        f_y=f_y,
    )
    logger.debug(
        "random scm drawn",
        extra={"seed": seed, "cards": (card_w, card_a, card_z, card_m), "constraint": constraint.kind},
    )
    return DiscreteScm.from_tables(tables, name=f"random-{seed}")


def _constrain(
    constraint: ScmConstraint, f_z: IntArray, f_m: IntArray, f_y: FloatArray
) -> tuple[IntArray, IntArray, FloatArray]:
    match constraint.kind:
        case ConstraintKind.drop_path:
            # Make the function on the path's first edge ignore its A (or Z) argument.
            match constraint.path:
                case "P1":
                    f_y = np.broadcast_to(f_y[:, :, :1], f_y.shape).copy()
                case "P2":
                    f_z = np.broadcast_to(f_z[:1], f_z.shape).copy()
                case "P3":
                    f_m = np.broadcast_to(f_m[:1], f_m.shape).copy()
                case "P4":
                    f_m = np.broadcast_to(f_m[:, :1], f_m.shape).copy()
        case ConstraintKind.monotone:
            z_axes, m_axes, y_axes = MONOTONE_AXES[constraint.path or "total"]
            for axis in z_axes:
                f_z = np.sort(f_z, axis=axis)
            for axis in m_axes:
                f_m = np.sort(f_m, axis=axis)
            for axis in y_axes:
                f_y = np.sort(f_y, axis=axis)
        case ConstraintKind.none | ConstraintKind.degenerate_z:
            pass
    return f_z, f_m, f_y
