import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from pathflux.common.errors import ConfigError
from pathflux.common.rng import rng_stream
from pathflux.config.constants import DEFAULT_SAMPLE_BLOCK
from pathflux.model.scm import Dataset, DiscreteScm, FloatArray, IntArray

logger = logging.getLogger(__name__)


def sample(
    scm: DiscreteScm, n: int, seed: int, *, block_size: int = DEFAULT_SAMPLE_BLOCK, threads: int = 1
) -> Dataset:
    """Draw n i.i.d. rows. Block b of ``block_size`` rows uses stream (seed, b), so output ignores ``threads``."""
    if n < 1:
        msg = f"cannot sample {n} rows"
        raise ConfigError(msg)
    starts = list(range(0, n, block_size))

    def draw(block: int) -> tuple[IntArray, IntArray, IntArray, IntArray, FloatArray]:
        size = min(block_size, n - starts[block])
        return _draw_block(scm, size, rng_stream(seed, block))

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        blocks = list(pool.map(draw, range(len(starts))))

    w, a, z, m, y = (np.concatenate(parts) for parts in zip(*blocks, strict=True))
    logger.info("sampled dataset", extra={"scm": scm.name, "n": n, "seed": seed, "blocks": len(starts)})
    return Dataset(w=w, a=a, z=z, m=m, y=y, cards=scm.cards)


def _draw_block(
    scm: DiscreteScm, size: int, rng: np.random.Generator
) -> tuple[IntArray, IntArray, IntArray, IntArray, FloatArray]:
    t = scm.tables
    u_w = rng.choice(t.p_uw.size, size=size, p=t.p_uw)
    u_a = rng.choice(t.p_ua.size, size=size, p=t.p_ua)
    u_z = rng.choice(t.p_uz.size, size=size, p=t.p_uz)
    u_m = rng.choice(t.p_um.size, size=size, p=t.p_um)
    u_y = rng.choice(t.p_uy.size, size=size, p=t.p_uy)

    w = t.f_w[u_w]
    a = t.f_a[w, u_a]
    z = t.f_z[a, w, u_z]
    m = t.f_m[z, a, w, u_m]
    y = t.f_y[m, z, a, w, u_y]
    return w, a, z, m, y
