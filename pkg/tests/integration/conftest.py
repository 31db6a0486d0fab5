import json
import logging
from collections.abc import Callable, Generator
from pathlib import Path
from typing import Any

import pytest

from pathflux.app import main
from pathflux.repos import ScmRepo
from tests.fixtures.builders.model.scm import ternary_treatment_scm


@pytest.fixture(autouse=True)
def restore_root_handlers() -> Generator[None]:
    handlers, level = list(logging.root.handlers), logging.root.level
    yield
    logging.root.handlers = handlers
    logging.root.setLevel(level)


@pytest.fixture
def run_cli(capsys) -> Callable[..., tuple[int, str, str]]:
    def run(*argv: str) -> tuple[int, str, str]:
        code = main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return run


@pytest.fixture
def write_json(tmp_path: Path) -> Callable[[str, dict[str, Any]], Path]:
    def write(name: str, content: dict[str, Any]) -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(content), encoding="utf-8")
        return path

    return write


@pytest.fixture
def ternary_scm_file(tmp_path: Path) -> Path:
    path = tmp_path / "ternary.json"
    ScmRepo().save(ternary_treatment_scm(), path)
    return path
