from typing import Literal

SCHEMA_VERSION = 1

DEFAULT_FOLDS = 5
DEFAULT_ALPHA = 0.5
DEFAULT_EPSILON = 1e-3
DEFAULT_RIDGE_LAMBDA = 1.0
DEFAULT_CI_LEVEL = 0.95
Z_95 = 1.959964

DEFAULT_CELL_BUDGET = 10**8
DEFAULT_SAMPLE_BLOCK = 65_536

NOISE_PMF_TOLERANCE = 1e-12
JOINT_MASS_TOLERANCE = 1e-10
ADDITIVITY_TOLERANCE = 1e-12
NUISANCE_PMF_TOLERANCE = 1e-9
WMARGINAL_TOLERANCE = 1e-9
EXACT_DENOMINATOR_FLOOR = 1e-12

VONMISES_EPS_GRID = (1e-3, 5e-4, 2.5e-4, 1.25e-4)

OUTPUT_FORMATS = Literal["json", "table"]

