from .estimation_service import EstimationService
from .oracle_service import OracleService
from .simulation_service import SimulationService
from .verification_service import VerificationService

__all__ = ["EstimationService", "OracleService", "SimulationService", "VerificationService"]
