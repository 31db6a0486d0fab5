from random import randint

from polyfactory import Use
from polyfactory.factories.pydantic_factory import ModelFactory

from pathflux.model.experiment import RandomScmSpec
from pathflux.model.nuisance import RegressionConfig
from pathflux.model.run_config import RunConfig


class RunConfigFactory(ModelFactory[RunConfig]):
    folds = 2
    alpha = 0.5
    epsilon = 1e-3
    regression = RegressionConfig()
    seed = Use(randint, 0, 2**31 - 1)
    ci_level = 0.95
    w_columns = None
    cardinalities = None


class RandomScmSpecFactory(ModelFactory[RandomScmSpec]):
    card_w = None
    card_a = None
    card_z = None
    card_m = None
    max_card = 3
    noise_support = 4
