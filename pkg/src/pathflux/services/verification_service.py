import logging
from pathlib import Path
from typing import Annotated

from wireup import Inject, service

from pathflux.common.rng import derived_seed
from pathflux.config.config import ThreadCount
from pathflux.model.experiment import ExperimentReport, ExperimentSpec, ScmSource
from pathflux.model.scm import DiscreteScm
from pathflux.repos import ScmRepo, SpecRepo
from pathflux.services.calculators.experiments import ScmSupplier, run_experiment
from pathflux.services.calculators.random_scm import random_scm
from pathflux.services.calculators.scm_validation import validate

logger = logging.getLogger(__name__)


@service
class VerificationService:
    def __init__(
        self,
        scm_repo: ScmRepo,
        spec_repo: SpecRepo,
        threads: Annotated[ThreadCount, Inject(param="threads")],
    ) -> None:
        super().__init__()
        self.scm_repo = scm_repo
        self.spec_repo = spec_repo
        self.threads = threads

    def load(self, path: Path) -> ExperimentSpec:
        return self.spec_repo.experiment(path)

    def supplier(self, spec: ExperimentSpec) -> ScmSupplier:
        """SCM for each replication: a fresh random draw per replication, otherwise the named model."""
        source: ScmSource = spec.scm
        if source.random is not None:
            generator = source.random

            def draw(rep: int) -> DiscreteScm:
                scm = random_scm(derived_seed(spec.seed, rep), generator, source.constraint)
                validate(scm)
                return scm

            return draw
        fixed = self.scm_repo.get(source.builtin or source.file or "")
        validate(fixed)
        return lambda _rep: fixed

    def verify(self, spec: ExperimentSpec) -> ExperimentReport:
        report = run_experiment(spec, self.supplier(spec), self.threads)
        if not report.passed:
            logger.warning("experiment failed", extra={"kind": spec.kind, "failures": report.failures[:5]})
        return report
