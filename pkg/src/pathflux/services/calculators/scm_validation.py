"""Structural checks of a DiscreteScm, reporting the first violated invariant with its location."""

import logging
import math
from collections.abc import Iterator, Sequence
from typing import Any

from pathflux.common.errors import ScmValidationError
from pathflux.config.constants import NOISE_PMF_TOLERANCE
from pathflux.model.scm import DiscreteScm

logger = logging.getLogger(__name__)


def validate(scm: DiscreteScm) -> None:
    for name, pmf in scm.noise.items():
        _check_pmf(name, pmf)

    k_w, k_a, k_z, k_m, k_y = (len(pmf) for _, pmf in scm.noise.items())
    _check_table("f_w", scm.f_w, (k_w,), scm.card_w)
    _check_table("f_a", scm.f_a, (scm.card_w, k_a), scm.card_a)
    _check_table("f_z", scm.f_z, (scm.card_a, scm.card_w, k_z), scm.card_z)
    _check_table("f_m", scm.f_m, (scm.card_z, scm.card_a, scm.card_w, k_m), scm.card_m)
    _check_table("f_y", scm.f_y, (scm.card_m, scm.card_z, scm.card_a, scm.card_w, k_y), None)
    logger.debug("scm valid", extra={"scm": scm.name, "noise_grid": k_w * k_a * k_z * k_m * k_y})


def _check_pmf(name: str, pmf: Sequence[float]) -> None:
    if not pmf:
        msg = "pmf has empty support"
        raise ScmValidationError(msg, ("noise", name))
    for i, p in enumerate(pmf):
        if not math.isfinite(p) or p < 0:
            msg = f"pmf entry {p} is negative or not finite"
            raise ScmValidationError(msg, ("noise", name, i))
    total = math.fsum(pmf)
    if abs(total - 1.0) > NOISE_PMF_TOLERANCE:
        msg = f"pmf sums to {round(total, 12):g}"
        raise ScmValidationError(msg, ("noise", name))


def _check_table(name: str, table: Any, shape: tuple[int, ...], card: int | None) -> None:  # noqa: ANN401
    for index, value in _walk(name, table, shape, ()):
        if card is None:
            if not math.isfinite(value):
                msg = f"output {value} is not a finite real"
                raise ScmValidationError(msg, (name, *index))
        elif not 0 <= value < card:
            msg = f"output {value} outside 0..{card - 1}"
            raise ScmValidationError(msg, (name, *index))


def _walk(
    name: str, node: Any, shape: tuple[int, ...], index: tuple[int, ...]  # noqa: ANN401
) -> Iterator[tuple[tuple[int, ...], Any]]:
    if not shape:
        yield index, node
        return
    if not isinstance(node, list) or len(node) != shape[0]:
        found = len(node) if isinstance(node, list) else "a scalar"
        msg = f"table not total: expected {shape[0]} entries, found {found}"
        raise ScmValidationError(msg, (name, *index))
    for i, child in enumerate(node):
        yield from _walk(name, child, shape[1:], (*index, i))
