import logging
import sys
from pathlib import Path

from wireup import service

logger = logging.getLogger(__name__)


@service
class ReportRepo:
    def write(self, text: str, out: Path | None) -> None:
        """Write a rendered report to ``out``, or to stdout when no path is given."""
        if out is None:
            sys.stdout.write(text)
            return
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        logger.info("report written", extra={"path": str(out), "bytes": len(text)})
