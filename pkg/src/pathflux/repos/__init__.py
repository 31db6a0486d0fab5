from .dataset_repo import DatasetRepo
from .report_repo import ReportRepo
from .scm_repo import ScmRepo
from .spec_repo import SpecRepo

__all__ = ["DatasetRepo", "ReportRepo", "ScmRepo", "SpecRepo"]
