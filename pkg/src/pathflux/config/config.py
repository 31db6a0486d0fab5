import logging
import os
from functools import cache
from typing import Any, NewType

from pathflux.config.constants import DEFAULT_CELL_BUDGET, DEFAULT_SAMPLE_BLOCK

LOG_LEVEL = logging.getLevelNamesMapping().get(os.getenv("LOG_LEVEL", ""), logging.WARNING)

ThreadCount = NewType("ThreadCount", int)
CellBudget = NewType("CellBudget", int)
BlockSize = NewType("BlockSize", int)


def _positive_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(float(raw))
    except ValueError:
        return default
    return value if value >= 1 else default


@cache
def config() -> dict[str, Any]:
    threads = ThreadCount(_positive_int("PATHFLUX_THREADS", os.cpu_count() or 1))
    cell_budget = CellBudget(_positive_int("PATHFLUX_CELL_BUDGET", DEFAULT_CELL_BUDGET))
    sample_block = BlockSize(_positive_int("PATHFLUX_SAMPLE_BLOCK", DEFAULT_SAMPLE_BLOCK))
    log_level = LOG_LEVEL

    return {
        "threads": threads,
        "cell_budget": cell_budget,
        "sample_block": sample_block,
        "log_level": log_level,
    }
