import pytest
from hamcrest import assert_that, contains_string, equal_to, is_
from pydantic import BaseModel, PositiveInt, ValidationError

from pathflux.common.error_handler import handle_exception, refine_error
from pathflux.common.errors import (
    CapacityError,
    ConfigError,
    DatasetValidationError,
    ExitCode,
    IdentificationError,
    ScmValidationError,
    TruncationError,
)


class Settings(BaseModel):
    folds: PositiveInt


def test_scm_validation_error_names_its_location():
    error = ScmValidationError("table not total", ("f_z", 1, 0))

    assert_that(str(error), is_("f_z.1.0: table not total"))
    assert_that(error.exit_code, is_(ExitCode.INPUT_ERROR))


def test_dataset_validation_error_names_its_row():
    error = DatasetValidationError("a=7 outside 0..1", row=12)

    assert_that(str(error), is_("row 12: a=7 outside 0..1"))


def test_identification_error_names_cell_and_fold():
    error = IdentificationError("p_a undefined", cell={"w": 1, "a": 0}, fold=3)

    assert_that(str(error), is_("p_a undefined at w=1, a=0 in fold 3"))
    assert_that(error.exit_code, is_(ExitCode.NUMERICAL_GUARD))


@pytest.mark.parametrize(
    ("error", "expected"),
    [
        (ConfigError("bad folds"), ExitCode.INPUT_ERROR),
        (ScmValidationError("pmf sums to 1.1", ("noise", "u_a")), ExitCode.INPUT_ERROR),
        (TruncationError("p_m below the floor"), ExitCode.NUMERICAL_GUARD),
        (CapacityError("grid too large"), ExitCode.NUMERICAL_GUARD),
        (RuntimeError("boom"), ExitCode.FAILED),
    ],
)
def test_handle_exception_maps_errors_to_exit_codes(error, expected, capsys):
    # When:
    code = handle_exception(error)

    # Then:
    assert_that(code, is_(expected))
    assert_that(capsys.readouterr().err, contains_string(str(error)))


def test_handle_exception_refines_validation_errors(capsys):
    # Given:
    with pytest.raises(ValidationError) as caught:
        Settings.model_validate({"folds": 0})

    # When:
    code = handle_exception(caught.value)

    # Then:
    assert_that(code, is_(ExitCode.INPUT_ERROR))
    assert_that(capsys.readouterr().err, contains_string("folds : Input should be greater than 0"))
    assert_that(refine_error(caught.value).splitlines()[0], equal_to("validation error: 1 problem(s)"))
