import logging
import uuid
from collections.abc import Callable, Sequence
from contextvars import ContextVar
from functools import wraps
from typing import Any

from pythonjsonlogger.json import JsonFormatter

from pathflux.config.config import LOG_LEVEL

run_id_context_var: ContextVar[str | None] = ContextVar("run_id", default=None)

LOG_FORMAT = "%(asctime)s %(levelname)-8s %(name)s %(module)s.py:%(funcName)s():%(lineno)d %(message)s"


def with_run_id() -> Callable:
    """Bind a fresh run id to every log record emitted while the wrapped command runs."""

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:  # noqa: ANN401
            token = run_id_context_var.set(uuid.uuid4().hex[:12])
            try:
                return func(*args, **kwargs)
            finally:
                run_id_context_var.reset(token)

        return wrapper

    return decorator


def current_run_id() -> str | None:
    return run_id_context_var.get()


class EnrichedJsonFormatter(JsonFormatter):
    def add_fields(
        self,
        log_data: dict[str, Any],
        record: logging.LogRecord,
        message_dict: dict[str, Any],
    ) -> None:
        log_data["run_id"] = run_id_context_var.get() or "-"
        super().add_fields(log_data, record, message_dict)


def init_logging(
    level: int = LOG_LEVEL, quieten: Sequence[str] = ("asyncio", "matplotlib", "numexpr", "urllib3")
) -> None:
    formatter = EnrichedJsonFormatter(LOG_FORMAT)
    handler = logging.StreamHandler()
    handler.setFormatter(formatter)

    logging.root.handlers = []  # Remove default handlers
    logging.root.setLevel(level)
    logging.root.addHandler(handler)

    for q in quieten:
        logging.getLogger(q).setLevel(logging.WARNING)
