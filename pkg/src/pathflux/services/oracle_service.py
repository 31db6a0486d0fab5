import logging
from pathlib import Path
from typing import Annotated

from wireup import Inject, service

from pathflux.config.config import CellBudget, ThreadCount
from pathflux.model.reports import OracleResult
from pathflux.model.scm import DiscreteScm
from pathflux.model.targets import ZUnderlineMode
from pathflux.repos import ScmRepo
from pathflux.services.calculators import counterfactuals
from pathflux.services.calculators.scm_validation import validate

logger = logging.getLogger(__name__)


@service
class OracleService:
    """Exact decompositions of a known SCM by enumeration."""

    def __init__(
        self,
        scm_repo: ScmRepo,
        cell_budget: Annotated[CellBudget, Inject(param="cell_budget")],
        threads: Annotated[ThreadCount, Inject(param="threads")],
    ) -> None:
        super().__init__()
        self.scm_repo = scm_repo
        self.cell_budget = cell_budget
        self.threads = threads

    def load(self, source: str | Path) -> DiscreteScm:
        scm = self.scm_repo.get(source)
        validate(scm)
        return scm

    def decompose(self, scm: DiscreteScm, mode: ZUnderlineMode, *, include_ate: bool = False) -> OracleResult:
        decomposition = counterfactuals.oracle_path_decomposition(scm, mode, self.cell_budget, self.threads)
        total = counterfactuals.oracle_total_influence(scm, self.cell_budget)
        ate = counterfactuals.oracle_ate_decomposition(scm, self.cell_budget) if include_ate else None
        logger.info(
            "oracle computed",
            extra={"scm": scm.name, "mode": mode, "theta": decomposition.theta, "sum_check": decomposition.sum_check},
        )
        return OracleResult(mode=mode, decomposition=decomposition, total=total, ate=ate)
