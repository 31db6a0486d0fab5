import logging
import time
from pathlib import Path
from typing import Annotated

from wireup import Inject, service

from pathflux.config.config import ThreadCount
from pathflux.model.reports import EstimationResult
from pathflux.model.run_config import RunConfig
from pathflux.model.scm import Dataset
from pathflux.repos import DatasetRepo
from pathflux.services.calculators import onestep

logger = logging.getLogger(__name__)


@service
class EstimationService:
    def __init__(self, dataset_repo: DatasetRepo, threads: Annotated[ThreadCount, Inject(param="threads")]) -> None:
        super().__init__()
        self.dataset_repo = dataset_repo
        self.threads = threads

    def load(self, path: Path, cfg: RunConfig) -> Dataset:
        return self.dataset_repo.read(path, cfg)

    def estimate(self, data: Dataset, cfg: RunConfig, *, include_ate: bool = False) -> EstimationResult:
        """Decompose theta and psi from one shared cross-fit of the nuisances."""
        started = time.perf_counter()
        fit = onestep.cross_fit(data, cfg, self.threads)
        decomposition = onestep.decompose_paths(data, cfg, fit=fit)
        total = onestep.total_influence(data, cfg, fit=fit)
        ate = onestep.decompose_ate(data, cfg, fit=fit) if include_ate else None
        logger.info(
            "estimation finished",
            extra={"n": data.n, "folds": cfg.folds, "seconds": round(time.perf_counter() - started, 3)},
        )
        return EstimationResult(decomposition=decomposition, total=total, ate=ate)
