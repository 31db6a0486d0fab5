import json
from pathlib import Path

import pytest
from hamcrest import assert_that, equal_to, is_
from pydantic import ValidationError

from pathflux.common.errors import NotFoundError
from pathflux.model.experiment import ExperimentKind
from pathflux.model.run_config import RunConfig
from pathflux.repos.spec_repo import SpecRepo


@pytest.fixture
def repo() -> SpecRepo:
    return SpecRepo()


def test_no_config_file_gives_defaults(repo):
    assert_that(repo.run_config(None), equal_to(RunConfig()))


def test_config_file(repo, tmp_path: Path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"folds": 3, "regression": {"kind": "ridge_onehot", "lambda": 0.5}}), encoding="utf-8")

    cfg = repo.run_config(path)

    assert_that(cfg.folds, is_(3))
    assert_that(cfg.regression.penalty, is_(0.5))


def test_config_rejects_unknown_keys(repo, tmp_path: Path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"fold": 3}), encoding="utf-8")

    with pytest.raises(ValidationError):
        repo.run_config(path)


def test_missing_config_file(repo, tmp_path: Path):
    with pytest.raises(NotFoundError, match="config file"):
        repo.run_config(tmp_path / "run.json")


def test_relative_scm_file_resolves_against_the_spec(repo, tmp_path: Path):
    folder = tmp_path / "specs"
    folder.mkdir()
    path = folder / "id.json"
    path.write_text(json.dumps({"kind": "identification", "scm": {"file": "models/m.json"}}), encoding="utf-8")

    spec = repo.experiment(path)

    assert_that(spec.kind, is_(ExperimentKind.identification))
    assert_that(spec.scm.file, equal_to(folder / "models" / "m.json"))


def test_builtin_spec_is_unchanged(repo, tmp_path: Path):
    path = tmp_path / "id.json"
    path.write_text(json.dumps({"kind": "law_equality", "scm": {"builtin": "t1"}, "replications": 2}), encoding="utf-8")

    spec = repo.experiment(path)

    assert_that(spec.scm.builtin, equal_to("t1"))
    assert_that(spec.replications, is_(2))


SHIPPED_SPECS = sorted((Path(__file__).parents[3] / "experiments").glob("*.json"))


@pytest.mark.parametrize("path", SHIPPED_SPECS, ids=lambda p: p.stem)
def test_shipped_experiment_specs_are_valid(repo, path: Path):
    spec = repo.experiment(path)

    assert spec.kind in ExperimentKind
