"""Runners that turn the identification, decomposition and inference properties into checks.

Each runner takes the spec, a source of SCMs indexed by replication and a worker cap, and
returns a report whose verdict depends only on the spec.
"""

import logging
import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from typing import Any, ClassVar

import numpy as np
from scipy.stats import linregress

from pathflux.common.errors import ConfigError
from pathflux.common.rng import derived_seed
from pathflux.config.constants import ADDITIVITY_TOLERANCE
from pathflux.model.experiment import ExperimentKind, ExperimentReport, ExperimentSpec, RandomScmSpec
from pathflux.model.nuisance import NuisanceSet
from pathflux.model.scm import DiscreteScm
from pathflux.model.targets import GRADIENT_TARGETS, S2_1, S2_2, PathName, TargetId, Weight
from pathflux.services.calculators.counterfactuals import (
    ctf_law,
    oracle_ate_decomposition,
    oracle_path_decomposition,
    oracle_tau,
)
from pathflux.services.calculators.enumeration import derived_conditionals, enumerate_joint, w_marginal
from pathflux.services.calculators.gradients import vonmises_remainder
from pathflux.services.calculators.identification import identify_tau
from pathflux.services.calculators.nuisance_fitting import perturb
from pathflux.services.calculators.onestep import decompose_paths
from pathflux.services.calculators.random_scm import random_scm
from pathflux.services.calculators.sampling import sample

logger = logging.getLogger(__name__)

SAMPLE_STREAM = 2
FOLD_STREAM = 3
DIRECTION_STREAM = 4
NEGLIGIBLE_REMAINDER = 1e-14
MIXED_BIAS_TARGETS = (TargetId(1, 0), TargetId(1, 1))
MIXED_BIAS_STEP = 0.5
SCALED_REMAINDER_GROWTH = 2.0

DEFAULT_TOLERANCES = {
    ExperimentKind.identification: 1e-10,
    ExperimentKind.law_equality: 1e-12,
    ExperimentKind.additivity: ADDITIVITY_TOLERANCE,
    ExperimentKind.sharp_null: 1e-12,
    ExperimentKind.prop_zero: 1e-12,
    ExperimentKind.monotonicity: 1e-12,
    ExperimentKind.vonmises: 1e-10,
}

_PATH_FIELDS = {
    "P1": ("theta_p1", "psi_p1"),
    "P2": ("theta_p2", "psi_p2"),
    "P3": ("theta_p3", "psi_p3"),
    "P4": ("theta_p4", "psi_p4"),
    "P2vP3": ("theta_p2_or_p3", "psi_p2_or_p3"),
}

ScmSupplier = Callable[[int], DiscreteScm]
Runner = Callable[[ExperimentSpec, ScmSupplier, int], ExperimentReport]


class RunnerRegistry:
    """Experiment runners, registered per kind."""

    registry: ClassVar[dict[ExperimentKind, Runner]] = {}

    @staticmethod
    def register(kind: ExperimentKind) -> Callable[[Runner], Runner]:
        def decorator(runner: Runner) -> Runner:
            RunnerRegistry.registry[kind] = runner
            return runner

        return decorator

    @staticmethod
    def get(kind: ExperimentKind) -> Runner:
        if runner := RunnerRegistry.registry.get(kind):
            return runner
        msg = f"{kind} not implemented"
        raise NotImplementedError(msg)


def run_experiment(spec: ExperimentSpec, scms: ScmSupplier, threads: int = 1) -> ExperimentReport:
    report = RunnerRegistry.get(spec.kind)(spec, scms, threads)
    logger.info(
        "experiment finished",
        extra={"kind": spec.kind, "verdict": report.verdict, "replications": spec.replications},
    )
    return report


def _replicate(spec: ExperimentSpec, threads: int, one: Callable[[int], dict[str, Any]]) -> list[dict[str, Any]]:
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(one, range(spec.replications)))


def _tolerance(spec: ExperimentSpec) -> float:
    return spec.tolerance if spec.tolerance is not None else DEFAULT_TOLERANCES[spec.kind]


def _verdict(
    spec: ExperimentSpec, rows: list[dict[str, Any]], failures: list[str], metrics: dict[str, Any] | None = None
) -> ExperimentReport:
    return ExperimentReport(
        kind=spec.kind,
        verdict="fail" if failures else "pass",
        tolerance=spec.tolerance if spec.tolerance is not None else DEFAULT_TOLERANCES.get(spec.kind),
        metrics=metrics or {},
        replications=rows,
        failures=failures,
    )


def _path_of(spec: ExperimentSpec, default: str | None = None) -> str:
    path = spec.path or spec.scm.constraint.path or default
    if path is None:
        msg = f"{spec.kind} needs a path, either in the spec or in the scm constraint"
        raise ConfigError(msg)
    return path


@RunnerRegistry.register(ExperimentKind.identification)
def _identification(spec: ExperimentSpec, scms: ScmSupplier, threads: int) -> ExperimentReport:
    tolerance = _tolerance(spec)

    def one(rep: int) -> dict[str, Any]:
        scm = scms(rep)
        law = enumerate_joint(scm)
        eta, wm = derived_conditionals(law), w_marginal(law)
        errors = [
            abs(identify_tau(eta, wm, t, f) - oracle_tau(scm, t, f, spec.mode))
            for t in TargetId.all()
            for f in (Weight.IDENTITY, Weight.UNIT)
        ]
        return {"replication": rep, "scm": scm.fingerprint[:12], "max_error": max(errors)}

    rows = _replicate(spec, threads, one)
    failures = [
        f"replication {r['replication']}: error {r['max_error']:.3g}" for r in rows if r["max_error"] > tolerance
    ]
    return _verdict(spec, rows, failures, {"max_error": max(r["max_error"] for r in rows)})


@RunnerRegistry.register(ExperimentKind.law_equality)
def _law_equality(spec: ExperimentSpec, scms: ScmSupplier, threads: int) -> ExperimentReport:
    tolerance = _tolerance(spec)

    def one(rep: int) -> dict[str, Any]:
        scm = scms(rep)
        _, emulated, removed = ctf_law(scm, S2_1, spec.mode).aligned_with(ctf_law(scm, S2_2, spec.mode))
        difference = float(np.abs(emulated - removed).max())
        return {"replication": rep, "scm": scm.fingerprint[:12], "max_difference": difference}

    rows = _replicate(spec, threads, one)
    failures = [
        f"replication {r['replication']}: laws differ by {r['max_difference']:.3g}"
        for r in rows
        if r["max_difference"] > tolerance
    ]
    return _verdict(spec, rows, failures, {"max_difference": max(r["max_difference"] for r in rows)})


def _estimation_seed(spec: ExperimentSpec, *stream: int) -> dict[str, int]:
    return {"seed": derived_seed(spec.seed, FOLD_STREAM, *stream)}


@RunnerRegistry.register(ExperimentKind.additivity)
def _additivity(spec: ExperimentSpec, scms: ScmSupplier, threads: int) -> ExperimentReport:
    tolerance = _tolerance(spec)

    def one(rep: int) -> dict[str, Any]:
        scm = scms(rep)
        oracle = oracle_path_decomposition(scm, spec.mode)
        row: dict[str, Any] = {
            "replication": rep,
            "oracle_gap": abs(oracle.theta - math.fsum(oracle.components().values())),
        }
        if spec.include_ate and scm.card_a == 2:  # noqa: PLR2004
            ate = oracle_ate_decomposition(scm)
            row["oracle_ate_gap"] = abs(ate.psi - math.fsum(ate.components().values()))
        if spec.n:
            data = sample(scm, spec.n[0], derived_seed(spec.seed, SAMPLE_STREAM, rep))
            cfg = spec.config.model_copy(update=_estimation_seed(spec, rep))
            row["estimator_gap"] = abs(decompose_paths(data, cfg).additivity_gap())
        return row

    rows = _replicate(spec, threads, one)
    failures = [
        f"replication {r['replication']}: {name}={value:.3g}"
        for r in rows
        for name, value in r.items()
        if name.endswith("gap") and value > tolerance
    ]
    return _verdict(spec, rows, failures)


def _null_check(spec: ExperimentSpec, scms: ScmSupplier, threads: int, path: str) -> ExperimentReport:
    tolerance = _tolerance(spec)
    theta_field, psi_field = _PATH_FIELDS[path]

    def one(rep: int) -> dict[str, Any]:
        scm = scms(rep)
        row: dict[str, Any] = {
            "replication": rep,
            "scm": scm.fingerprint[:12],
            theta_field: getattr(oracle_path_decomposition(scm, spec.mode), theta_field),
        }
        if spec.include_ate and scm.card_a == 2:  # noqa: PLR2004
            row[psi_field] = getattr(oracle_ate_decomposition(scm), psi_field)
        return row

    rows = _replicate(spec, threads, one)
    failures = [
        f"replication {r['replication']}: {name}={r[name]:.3g}"
        for r in rows
        for name in (theta_field, psi_field)
        if name in r and abs(r[name]) > tolerance
    ]
    largest = max(abs(r[name]) for r in rows for name in (theta_field, psi_field) if name in r)
    return _verdict(spec, rows, failures, {"largest_magnitude": largest})


@RunnerRegistry.register(ExperimentKind.sharp_null)
def _sharp_null(spec: ExperimentSpec, scms: ScmSupplier, threads: int) -> ExperimentReport:
    return _null_check(spec, scms, threads, _path_of(spec))


@RunnerRegistry.register(ExperimentKind.prop_zero)
def _prop_zero(spec: ExperimentSpec, scms: ScmSupplier, threads: int) -> ExperimentReport:
    return _null_check(spec, scms, threads, PathName.p2_or_p3.value)


@RunnerRegistry.register(ExperimentKind.monotonicity)
def _monotonicity(spec: ExperimentSpec, scms: ScmSupplier, threads: int) -> ExperimentReport:
    tolerance = _tolerance(spec)
    scope = _path_of(spec, default="total")
    checked = ["theta", *(_PATH_FIELDS[p][0] for p in ("P1", "P2", "P3", "P4"))] if scope == "total" else [
        _PATH_FIELDS[scope][0]
    ]

    def one(rep: int) -> dict[str, Any]:
        scm = scms(rep)
        oracle = oracle_path_decomposition(scm, spec.mode)
        return {"replication": rep, "scm": scm.fingerprint[:12], **{name: getattr(oracle, name) for name in checked}}

    rows = _replicate(spec, threads, one)
    failures = [
        f"replication {r['replication']}: {name}={r[name]:.3g} is negative"
        for r in rows
        for name in checked
        if r[name] < -tolerance
    ]
    return _verdict(spec, rows, failures, {"smallest": min(r[name] for r in rows for name in checked)})


def _exact_nuisances(scm: DiscreteScm) -> NuisanceSet:
    return derived_conditionals(enumerate_joint(scm))


@RunnerRegistry.register(ExperimentKind.vonmises)
def _vonmises(spec: ExperimentSpec, scms: ScmSupplier, threads: int) -> ExperimentReport:
    """Second-order decay of the first-order remainder along a path from P towards another law G."""
    tolerance = _tolerance(spec)
    scm = scms(0)
    law = enumerate_joint(scm)
    eta_p, wm = derived_conditionals(law), w_marginal(law)
    cards = scm.cards
    direction_spec = RandomScmSpec(
        card_w=cards.card_w,
        card_a=cards.card_a,
        card_z=cards.card_z,
        card_m=cards.card_m,
        noise_support=max(4, *cards.shape),
    )
    eta_g = _exact_nuisances(random_scm(derived_seed(spec.seed, DIRECTION_STREAM), direction_spec))
    targets = [TargetId.parse(spec.target)] if spec.target else [TargetId(j, k) for j, k in GRADIENT_TARGETS]
    eps = np.asarray(spec.eps_grid)

    def one(case: tuple[TargetId, Weight]) -> dict[str, Any]:
        t, f = case
        remainders = [abs(vonmises_remainder(law, eta_p, perturb(eta_p, eta_g, e), wm, t, f)) for e in eps]
        row: dict[str, Any] = {
            "target": t.key,
            "weight": str(f),
            "remainders": remainders,
            "scaled": [r / e**2 for r, e in zip(remainders, spec.eps_grid, strict=True)],
        }
        if max(remainders) < NEGLIGIBLE_REMAINDER:
            row["slope"] = None
        else:
            row["slope"] = float(linregress(np.log(eps), np.log(np.maximum(remainders, NEGLIGIBLE_REMAINDER))).slope)
        if t in MIXED_BIAS_TARGETS:
            row["mixed_bias"] = abs(
                vonmises_remainder(law, eta_p, _outcome_only(eta_p, eta_g, MIXED_BIAS_STEP), wm, t, f)
            )
        return row

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(pool.map(one, [(t, f) for t in targets for f in (Weight.IDENTITY, Weight.UNIT)]))
    failures = [
        f"{r['target']} {r['weight']}: slope {r['slope']:.3f}" for r in rows if not _second_order(r, spec)
    ]
    failures += [
        f"{r['target']} {r['weight']}: mixed bias {r['mixed_bias']:.3g}"
        for r in rows
        if r.get("mixed_bias", 0.0) > tolerance
    ]
    return _verdict(spec, rows, failures, {"min_slope": spec.min_slope})


def _second_order(row: dict[str, Any], spec: ExperimentSpec) -> bool:
    """Slope at least min_slope, or R(eps) / eps^2 not growing as eps shrinks."""
    if row["slope"] is None or row["slope"] >= spec.min_slope:
        return True
    by_eps = dict(zip(spec.eps_grid, row["scaled"], strict=True))
    return by_eps[min(by_eps)] <= SCALED_REMAINDER_GROWTH * by_eps[max(by_eps)]


def _outcome_only(eta: NuisanceSet, direction: NuisanceSet, eps: float) -> NuisanceSet:
    """Move only the outcome regression towards direction; every pmf stays exact."""
    moved = perturb(eta, direction, eps)
    return NuisanceSet(m_hat=moved.m_hat, p_m=eta.p_m, p_z=eta.p_z, p_a=eta.p_a)


def _oracle_values(scm: DiscreteScm, spec: ExperimentSpec) -> dict[str, float]:
    oracle = oracle_path_decomposition(scm, spec.mode)
    return {"theta": oracle.theta, **{fields[0]: getattr(oracle, fields[0]) for fields in _PATH_FIELDS.values()}}


@RunnerRegistry.register(ExperimentKind.coverage)
def _coverage(spec: ExperimentSpec, scms: ScmSupplier, threads: int) -> ExperimentReport:
    n = spec.n[0]
    low, high = spec.coverage_bounds

    def one(rep: int) -> dict[str, Any]:
        scm = scms(rep)
        truth = _oracle_values(scm, spec)
        data = sample(scm, n, derived_seed(spec.seed, SAMPLE_STREAM, rep))
        report = decompose_paths(data, spec.config.model_copy(update=_estimation_seed(spec, rep)))
        estimates = {"theta": report.theta, **{name: getattr(report, name) for name in truth if name != "theta"}}
        return {
            "replication": rep,
            "covered": {name: estimates[name].covers(value) for name, value in truth.items()},
            "gap": abs(report.additivity_gap()),
        }

    rows = _replicate(spec, threads, one)
    rates = {name: float(np.mean([r["covered"][name] for r in rows])) for name in rows[0]["covered"]}
    failures = [
        f"{name}: coverage {rate:.3f} outside [{low}, {high}]"
        for name, rate in rates.items()
        if not low <= rate <= high
    ]
    failures += [
        f"replication {r['replication']}: additivity gap {r['gap']:.3g}"
        for r in rows
        if r["gap"] > ADDITIVITY_TOLERANCE
    ]
    return _verdict(spec, rows, failures, {"coverage": rates, "n": n})


@RunnerRegistry.register(ExperimentKind.clt_scaling)
def _clt_scaling(spec: ExperimentSpec, scms: ScmSupplier, threads: int) -> ExperimentReport:
    low, high = spec.rmse_ratio_bounds

    def one(rep: int) -> dict[str, Any]:
        scm = scms(rep)
        truth = oracle_path_decomposition(scm, spec.mode).theta
        errors = []
        for i, n in enumerate(spec.n):
            data = sample(scm, n, derived_seed(spec.seed, SAMPLE_STREAM, rep, i))
            report = decompose_paths(data, spec.config.model_copy(update=_estimation_seed(spec, rep, i)))
            errors.append(report.theta.point - truth)
        return {"replication": rep, "errors": errors}

    rows = _replicate(spec, threads, one)
    errors = np.array([r["errors"] for r in rows])
    rmse = np.sqrt(np.mean(errors**2, axis=0))
    ratios = (rmse[:-1] / rmse[1:]).tolist()
    failures = [
        f"rmse ratio n={spec.n[i]}->{spec.n[i + 1]}: {ratio:.3f} outside [{low}, {high}]"
        for i, ratio in enumerate(ratios)
        if not low <= ratio <= high
    ]
    return _verdict(spec, rows, failures, {"n": spec.n, "rmse": rmse.tolist(), "ratios": ratios})
