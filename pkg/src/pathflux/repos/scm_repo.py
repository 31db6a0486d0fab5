import logging
from pathlib import Path

from cachetools import LRUCache
from wireup import service

from pathflux.common.errors import NotFoundError
from pathflux.model.scm import DiscreteScm, ScmName
from pathflux.repos.builtin_scms import BUILTINS

logger = logging.getLogger(__name__)

scm_cache: LRUCache[str, DiscreteScm] = LRUCache(maxsize=32)


@service
class ScmRepo:
    """Loads SCMs by builtin name or from JSON files."""

    def get(self, source: str | Path) -> DiscreteScm:
        key = str(source)
        if (cached := scm_cache.get(key)) is not None:
            return cached
        if key in BUILTINS:
            scm = BUILTINS[key]()
        else:
            scm = self.load(Path(source))
        scm_cache[key] = scm
        return scm

    def load(self, path: Path) -> DiscreteScm:
        if not path.is_file():
            msg = f"no builtin SCM or SCM file named {str(path)!r}; builtins are {sorted(BUILTINS)}"
            raise NotFoundError(msg)
        scm = DiscreteScm.model_validate_json(path.read_text(encoding="utf-8"))
        logger.info("scm loaded", extra={"path": str(path), "cards": scm.cards.shape})
        return scm if scm.name else scm.model_copy(update={"name": ScmName(path.stem)})

    def save(self, scm: DiscreteScm, path: Path) -> None:
        path.write_text(scm.model_dump_json(indent=2, exclude_none=True) + "\n", encoding="utf-8")
