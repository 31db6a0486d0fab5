from pathlib import Path

import pytest
from hamcrest import assert_that, equal_to, is_, same_instance
from pydantic import ValidationError

from pathflux.common.errors import NotFoundError
from pathflux.repos.scm_repo import ScmRepo


@pytest.fixture
def repo() -> ScmRepo:
    return ScmRepo()


def test_builtins_are_cached(repo):
    first = repo.get("t1")

    assert_that(repo.get("t1"), same_instance(first))
    assert_that(first.name, equal_to("t1"))


def test_saved_model_loads_back_named_after_its_file(repo, tmp_path: Path, scm_t1):
    path = tmp_path / "chain.json"
    repo.save(scm_t1.model_copy(update={"name": None}), path)

    loaded = repo.get(str(path))

    assert_that(loaded.name, equal_to("chain"))
    assert_that(loaded.fingerprint, equal_to(scm_t1.fingerprint))


def test_unknown_source(repo, tmp_path: Path):
    with pytest.raises(NotFoundError, match="builtins are"):
        repo.get(str(tmp_path / "nope.json"))


def test_malformed_file(repo, tmp_path: Path):
    path = tmp_path / "bad.json"
    path.write_text('{"card_w": 0}', encoding="utf-8")

    with pytest.raises(ValidationError):
        repo.get(str(path))


def test_name_in_file_wins(repo, tmp_path: Path, scm_t0):
    path = tmp_path / "other.json"
    repo.save(scm_t0, path)

    assert_that(repo.load(path).name, is_("t0"))
