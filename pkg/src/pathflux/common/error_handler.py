import logging
import sys
import traceback

from pydantic import ValidationError

from pathflux.common.errors import ExitCode, PathfluxError

logger = logging.getLogger(__name__)


def refine_error(e: ValidationError) -> str:
    """Return a short message listing every validation failure with its location."""
    lines = [f"validation error: {len(e.errors())} problem(s)"]
    for err in e.errors():
        loc = ".".join(str(x) for x in err["loc"])
        lines.append(f"{loc} : {err['msg']} [type={err['type']}]")
    return "\n".join(lines)


def handle_exception(e: BaseException) -> ExitCode:
    if isinstance(e, ValidationError):
        message = refine_error(e)
        logger.warning("input validation failed", extra={"errors": e.errors(include_url=False)})
        code = ExitCode.INPUT_ERROR
    elif isinstance(e, PathfluxError):
        message = f"{type(e).__name__}: {e}"
        logger.warning("command failed", extra={"error": type(e).__name__, "detail": str(e)})
        code = e.exit_code
    else:
        full_traceback = "".join(traceback.format_exception(e))
        logger.exception("Unexpected Exception", exc_info=e)
        message = f"An unexpected error occurred: {full_traceback}"
        code = ExitCode.FAILED

    sys.stderr.write(f"{message}\n")
    return code
