import logging
from pathlib import Path
from typing import Annotated

from wireup import Inject, service

from pathflux.config.config import BlockSize, ThreadCount
from pathflux.model.scm import Dataset, DiscreteScm
from pathflux.repos import DatasetRepo, ScmRepo
from pathflux.services.calculators.sampling import sample
from pathflux.services.calculators.scm_validation import validate

logger = logging.getLogger(__name__)


@service
class SimulationService:
    def __init__(
        self,
        scm_repo: ScmRepo,
        dataset_repo: DatasetRepo,
        block_size: Annotated[BlockSize, Inject(param="sample_block")],
        threads: Annotated[ThreadCount, Inject(param="threads")],
    ) -> None:
        super().__init__()
        self.scm_repo = scm_repo
        self.dataset_repo = dataset_repo
        self.block_size = block_size
        self.threads = threads

    def load(self, source: str | Path) -> DiscreteScm:
        scm = self.scm_repo.get(source)
        validate(scm)
        return scm

    def simulate(self, scm: DiscreteScm, n: int, seed: int, out: Path) -> Dataset:
        data = sample(scm, n, seed, block_size=self.block_size, threads=self.threads)
        self.dataset_repo.write(data, out)
        return data
