"""Cross-fitted one-step estimators and their Wald intervals.

Every estimate in a run shares one nuisance fit per fold. Points are means of uncentered
gradient values; contrasts are formed from those means and their influence values combine
linearly, so the decompositions add up exactly.
"""

import logging
import math
from collections.abc import Callable, Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from pathflux.common.errors import ConfigError, IdentificationError, UnsupportedModelError
from pathflux.config.constants import DEFAULT_CI_LEVEL, Z_95
from pathflux.model.nuisance import FoldPlan, NuisanceSet
from pathflux.model.reports import (
    ATE_CONTRASTS,
    AteMeans,
    AteReport,
    DecompositionReport,
    EstimateReport,
    TotalInfluenceReport,
)
from pathflux.model.run_config import RunConfig
from pathflux.model.scm import Dataset, FloatArray, IntArray
from pathflux.model.targets import PATH_CONTRASTS, S4, TOTAL_CONTRAST, TargetId, Weight
from pathflux.services.calculators.functional import GradientTables
from pathflux.services.calculators.gradients import (
    covariance_if,
    delta_method_gradient,
    eif_uncentered,
    gradient_tables,
)
from pathflux.services.calculators.identification import ate_functionals
from pathflux.services.calculators.nuisance_fitting import fit_nuisance, make_folds

logger = logging.getLogger(__name__)

_PATH_FIELDS = {"P1": "theta_p1", "P2": "theta_p2", "P3": "theta_p3", "P4": "theta_p4", "P2vP3": "theta_p2_or_p3"}


def z_quantile(level: float) -> float:
    return Z_95 if level == DEFAULT_CI_LEVEL else float(norm.ppf(0.5 + level / 2.0))


@dataclass(frozen=True)
class CrossFit:
    """Data, its fold plan, and the nuisances fitted on each fold's training rows."""

    data: Dataset
    plan: FoldPlan
    etas: tuple[NuisanceSet, ...]
    floor: float

    def phi(self, tables_of: Callable[[NuisanceSet], GradientTables]) -> FloatArray:
        """Uncentered gradient at every row, each row scored with the nuisances of its own fold."""
        values = np.empty(self.data.n)
        for v, eta in enumerate(self.etas):
            rows = self.plan.fold_rows(v)
            values[rows] = eif_uncentered(self.data.take(rows), eta, tables_of(eta), self.floor)
        return values

    def fold_row_sets(self) -> list[IntArray]:
        return [self.plan.fold_rows(v) for v in range(self.plan.folds)]


def cross_fit(data: Dataset, cfg: RunConfig, threads: int = 1) -> CrossFit:
    if data.n < 2 * cfg.folds:
        msg = f"{data.n} rows are too few for {cfg.folds} folds; need at least {2 * cfg.folds}"
        raise ConfigError(msg)
    plan = make_folds(data.n, cfg.folds, cfg.seed)
    nuisance = cfg.nuisance

    def fit(v: int) -> NuisanceSet:
        train = data.take(plan.training_rows(v))
        missing = np.setdiff1d(np.arange(data.cards.card_a), train.a)
        if missing.size:
            msg = f"training rows lack treatment level(s) {missing.tolist()}"
            raise IdentificationError(msg, fold=v)
        return fit_nuisance(train, nuisance)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        etas = tuple(pool.map(fit, range(cfg.folds)))
    logger.info("nuisances cross-fitted", extra={"n": data.n, "folds": cfg.folds, "seed": cfg.seed})
    return CrossFit(data=data, plan=plan, etas=etas, floor=nuisance.epsilon)


@dataclass(frozen=True)
class _Linearized:
    """A point estimate with its per-row influence values."""

    point: float
    influence: FloatArray


def _mean(values: FloatArray) -> _Linearized:
    point = float(np.mean(values))
    return _Linearized(point, values - point)


def _combine(terms: list[tuple[float, _Linearized]]) -> _Linearized:
    point = math.fsum(sign * term.point for sign, term in terms)
    influence = np.sum([sign * term.influence for sign, term in terms], axis=0)
    return _Linearized(point, influence)


def _report(full: _Linearized, fold_points: list[float], folds: int, level: float) -> EstimateReport:
    n = full.influence.size
    se = float(np.std(full.influence, ddof=1) / math.sqrt(n))
    half_width = z_quantile(level) * se
    return EstimateReport(
        point=full.point,
        se=se,
        ci_lo=full.point - half_width,
        ci_hi=full.point + half_width,
        n=n,
        folds=folds,
        fold_points=fold_points,
        level=level,
    )


def _reports(
    statistic: Callable[[IntArray], Mapping[str, _Linearized]], fit: CrossFit, level: float
) -> dict[str, EstimateReport]:
    """Evaluate a family of statistics on all rows and on each fold, then report each."""
    full = statistic(np.arange(fit.data.n))
    per_fold = [statistic(rows) for rows in fit.fold_row_sets()]
    return {
        name: _report(value, [fold[name].point for fold in per_fold], fit.plan.folds, level)
        for name, value in full.items()
    }


def estimate_tau(
    data: Dataset, t: TargetId, f: Weight, cfg: RunConfig, threads: int = 1, *, fit: CrossFit | None = None
) -> EstimateReport:
    fit = fit or cross_fit(data, cfg, threads)
    phi = fit.phi(lambda eta: gradient_tables(eta, t, f))
    reports = _reports(lambda rows: {"tau": _mean(phi[rows])}, fit, cfg.ci_level)
    logger.info("target estimated", extra={"target": str(t), "weight": str(f), "point": reports["tau"].point})
    return reports["tau"]


def _covariance_terms(
    phi_identity: Mapping[TargetId, FloatArray], phi_unit: Mapping[TargetId, FloatArray], a: FloatArray
) -> Callable[[IntArray], dict[str, _Linearized]]:
    def statistic(rows: IntArray) -> dict[str, _Linearized]:
        mu_a = float(np.mean(a[rows]))
        covariances = {}
        for t in phi_identity:
            tau_a, tau_1 = _mean(phi_identity[t][rows]), _mean(phi_unit[t][rows])
            influence = covariance_if(
                phi_identity[t][rows], phi_unit[t][rows], tau_a.point, tau_1.point, a[rows], mu_a
            )
            covariances[t] = _Linearized(tau_a.point - mu_a * tau_1.point, influence)
        out = {"theta": _combine([(sign, covariances[t]) for sign, t in TOTAL_CONTRAST])}
        for path, terms in PATH_CONTRASTS.items():
            out[_PATH_FIELDS[path]] = _combine([(sign, covariances[t]) for sign, t in terms])
        return out

    return statistic


def decompose_paths(
    data: Dataset, cfg: RunConfig, threads: int = 1, *, fit: CrossFit | None = None
) -> DecompositionReport:
    fit = fit or cross_fit(data, cfg, threads)
    phi_identity = {t: fit.phi(lambda eta, t=t: gradient_tables(eta, t, Weight.IDENTITY)) for t in TargetId.all()}
    phi_unit = {t: fit.phi(lambda eta, t=t: gradient_tables(eta, t, Weight.UNIT)) for t in TargetId.all()}
    a = data.a.astype(np.float64)
    reports = _reports(_covariance_terms(phi_identity, phi_unit, a), fit, cfg.ci_level)
    report = DecompositionReport(**reports)
    logger.info("paths decomposed", extra={"theta": report.theta.point, "gap": report.additivity_gap()})
    return report


def decompose_ate(data: Dataset, cfg: RunConfig, threads: int = 1, *, fit: CrossFit | None = None) -> AteReport:
    if data.cards.card_a != 2:  # noqa: PLR2004
        msg = f"the effect decomposition needs a binary A, the data has {data.cards.card_a} levels"
        raise UnsupportedModelError(msg)
    fit = fit or cross_fit(data, cfg, threads)
    phi = {
        name: fit.phi(lambda eta, functional=functional: delta_method_gradient(functional, eta))
        for name, functional in ate_functionals().items()
    }

    def statistic(rows: IntArray) -> dict[str, _Linearized]:
        means = {name: _mean(values[rows]) for name, values in phi.items()}
        contrasts = {
            name: _combine([(sign, means[field]) for sign, field in terms]) for name, terms in ATE_CONTRASTS.items()
        }
        return {**{f"mean_{k}": v for k, v in means.items()}, **contrasts}

    reports = _reports(statistic, fit, cfg.ci_level)
    means = AteMeans[EstimateReport](**{name: reports.pop(f"mean_{name}") for name in phi})
    report = AteReport(**reports, means=means)
    logger.info("effect decomposed", extra={"psi": report.psi.point, "gap": report.additivity_gap()})
    return report


def total_influence(
    data: Dataset, cfg: RunConfig, threads: int = 1, *, fit: CrossFit | None = None
) -> TotalInfluenceReport:
    """theta = E Cov(A, Y | W), tau = Cov(E(A | W), E(Y | W)) and f(a) = E[Y - E(Y | W) | A = a]."""
    fit = fit or cross_fit(data, cfg, threads)
    a, y = data.a.astype(np.float64), data.y
    phi_total = fit.phi(lambda eta: gradient_tables(eta, S4, Weight.IDENTITY))
    levels = range(data.cards.card_a)
    indicators = {level: (data.a == level).astype(np.float64) for level in levels}
    phi_levels = {
        level: fit.phi(lambda eta, level=level: gradient_tables(eta, S4, Weight.indicator(level))) for level in levels
    }

    def statistic(rows: IntArray) -> dict[str, _Linearized]:
        observed, confounded = _mean(a[rows] * y[rows]), _mean(phi_total[rows])
        mu_a, mu_y = _mean(a[rows]), _mean(y[rows])
        out = {
            "theta": _combine([(1, observed), (-1, confounded)]),
            "tau_conf": _Linearized(
                confounded.point - mu_a.point * mu_y.point,
                confounded.influence - mu_y.point * mu_a.influence - mu_a.point * mu_y.influence,
            ),
        }
        for level in levels:
            share = _mean(indicators[level][rows])
            if share.point <= 0:
                continue
            weighted = _mean(indicators[level][rows] * y[rows])
            numerator = _combine([(1, weighted), (-1, _mean(phi_levels[level][rows]))])
            point = numerator.point / share.point
            out[f"f_{level}"] = _Linearized(point, (numerator.influence - point * share.influence) / share.point)
        return out

    full_levels = [level for level in levels if indicators[level].any()]
    fold_levels = {level for rows in fit.fold_row_sets() for level in levels if not indicators[level][rows].any()}
    if fold_levels & set(full_levels):
        msg = f"treatment level(s) {sorted(fold_levels)} absent from a prediction fold"
        raise IdentificationError(msg)
    reports = _reports(statistic, fit, cfg.ci_level)
    f_curve = {level: reports.pop(f"f_{level}") for level in full_levels}
    return TotalInfluenceReport(theta=reports["theta"], tau_conf=reports["tau_conf"], f_curve=f_curve)
