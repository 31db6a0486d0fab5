from typing import Any

from hamcrest.core.base_matcher import BaseMatcher
from hamcrest.core.description import Description
from hamcrest.core.matcher import Matcher

from pathflux.model.reports import EstimateReport


class EstimateNearMatcher(BaseMatcher[EstimateReport]):
    def __init__(self, value: float, ses: float) -> None:
        self.value = value
        self.ses = ses

    def _matches(self, item: Any) -> bool:  # noqa: ANN401
        return isinstance(item, EstimateReport) and abs(item.point - self.value) <= self.ses * max(item.se, 1e-12)

    def describe_to(self, description: Description) -> None:
        description.append_text(f"an estimate within {self.ses} standard errors of {self.value}")

    def describe_mismatch(self, item: Any, mismatch_description: Description) -> None:  # noqa: ANN401
        mismatch_description.append_text(f"was {item.point} with se {item.se}")


class AdditiveMatcher(BaseMatcher[Any]):
    """Matches any decomposition whose total equals the sum of its components."""

    def __init__(self, tolerance: float) -> None:
        self.tolerance = tolerance

    def _matches(self, item: Any) -> bool:  # noqa: ANN401
        return abs(self._gap(item)) <= self.tolerance

    @staticmethod
    def _gap(item: Any) -> float:  # noqa: ANN401
        if hasattr(item, "additivity_gap"):
            return item.additivity_gap()
        total = item.theta if hasattr(item, "theta") else item.psi
        return total - sum(item.components().values())

    def describe_to(self, description: Description) -> None:
        description.append_text(f"a decomposition additive within {self.tolerance:g}")

    def describe_mismatch(self, item: Any, mismatch_description: Description) -> None:  # noqa: ANN401
        mismatch_description.append_text(f"had gap {self._gap(item):.3g}")


def is_estimate_near(value: float, ses: float = 5.0) -> Matcher[EstimateReport]:
    return EstimateNearMatcher(value, ses)


def is_additive(tolerance: float = 1e-12) -> Matcher[Any]:
    return AdditiveMatcher(tolerance)
