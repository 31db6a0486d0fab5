import logging
from pathlib import Path

from wireup import service

from pathflux.common.errors import NotFoundError
from pathflux.model.experiment import ExperimentSpec
from pathflux.model.run_config import RunConfig

logger = logging.getLogger(__name__)


def _read(path: Path, what: str) -> str:
    if not path.is_file():
        msg = f"{what} file {str(path)!r} not found"
        raise NotFoundError(msg)
    return path.read_text(encoding="utf-8")


@service
class SpecRepo:
    def run_config(self, path: Path | None) -> RunConfig:
        if path is None:
            return RunConfig()
        return RunConfig.model_validate_json(_read(path, "config"))

    def experiment(self, path: Path) -> ExperimentSpec:
        """Read an experiment spec; an SCM file it names is resolved against the spec's own directory."""
        spec = ExperimentSpec.model_validate_json(_read(path, "experiment spec"))
        if spec.scm.file is not None and not spec.scm.file.is_absolute():
            source = spec.scm.model_copy(update={"file": path.parent / spec.scm.file})
            spec = spec.model_copy(update={"scm": source})
        logger.info("experiment spec read", extra={"path": str(path), "kind": spec.kind})
        return spec
