import json

from brunns.matchers.data import json_matching as is_json_that
from hamcrest import assert_that, close_to, contains_string, equal_to, has_entries, has_key, is_, not_

from pathflux.model.experiment import ExperimentKind, ExperimentReport
from pathflux.model.reports import OracleResult
from pathflux.model.targets import ZUnderlineMode
from pathflux.services.calculators.counterfactuals import (
    oracle_ate_decomposition,
    oracle_path_decomposition,
    oracle_total_influence,
)
from pathflux.views import envelope, experiment_table, oracle_table, render
from pathflux.views.report_views import render_table


def _oracle_t0(scm_t0, *, with_ate: bool) -> OracleResult:
    return OracleResult(
        mode=ZUnderlineMode.coupled,
        decomposition=oracle_path_decomposition(scm_t0),
        total=oracle_total_influence(scm_t0),
        ate=oracle_ate_decomposition(scm_t0) if with_ate else None,
    )


def test_table_aligns_first_column_left_and_the_rest_right():
    table = render_table(("Metric", "Value"), [("kind", "coverage"), ("n", "5")])

    assert_that(
        table,
        equal_to("Metric     Value\n------  --------\nkind    coverage\nn              5\n"),
    )


def test_envelope_wraps_result_with_provenance(scm_t0):
    document = envelope("oracle", {"command": "oracle", "threads": 1}, _oracle_t0(scm_t0, with_ate=False))

    assert_that(
        document,
        has_entries(
            schema_version=1,
            kind="oracle",
            provenance=has_entries(command="oracle", threads=1, version=not_(None)),
            result=has_entries(mode="coupled", decomposition=has_entries(theta=close_to(0.25, 1e-15), sum_check=True)),
        ),
    )


def test_json_rendering_is_parseable(scm_t0):
    result = _oracle_t0(scm_t0, with_ate=True)
    document = envelope("oracle", {"command": "oracle"}, result)

    text = render(document, oracle_table(result), "json")

    assert text.endswith("\n")
    assert_that(text, is_json_that(has_entries(result=has_entries(ate=has_entries(psi=close_to(1.0, 1e-15))))))
    assert_that(json.loads(text)["result"]["total"]["f_curve"], has_key("0"))


def test_oracle_table_lists_paths_and_checks(scm_t0):
    result = _oracle_t0(scm_t0, with_ate=True)

    table = render({}, oracle_table(result), "table")

    for expected in ("theta_P1", "0.250000", "sum_check", "true", "psi_P2vP3", "E[Y_s0]", "ate_sum_check", "f(a=1)"):
        assert_that(table, contains_string(expected))


def test_oracle_table_without_effect_rows(scm_t0):
    assert_that(oracle_table(_oracle_t0(scm_t0, with_ate=False)), not_(contains_string("psi")))


def test_experiment_table_shows_failures():
    report = ExperimentReport(
        kind=ExperimentKind.sharp_null,
        verdict="fail",
        tolerance=1e-12,
        metrics={"largest_magnitude": 0.125},
        failures=["replication 0: theta_p1=0.125"],
    )

    table = experiment_table(report)

    for expected in ("sharp_null", "fail", "1e-12", "largest_magnitude", "0.125", "replication 0: theta_p1=0.125"):
        assert_that(table, contains_string(expected))
    assert_that(table.splitlines()[0].split(), is_(["Metric", "Value"]))
