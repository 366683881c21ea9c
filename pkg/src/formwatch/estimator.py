"""Estimator-style facade over the learn-then-classify core.

Mirrors the scikit-learn conventions (fit/predict, get_params and
set_params, trailing-underscore fitted attributes) so the detector
drops into pipelines, cross-validation-style harnesses and other
tooling that duck-types estimators. Fitting learns an application
structure from crawled pages; predicting maps captured requests to
their overall status label.
"""
from __future__ import annotations

from typing import Iterable, Sequence

from .capture import FormRequest
from .classify import ClassifiedRequest, classify
from .crawler import extract_forms, group_by_destination
from .model import ApplicationStructure, validate_structure

__all__ = ["NotFittedError", "FormAnomalyDetector"]


class NotFittedError(ValueError, AttributeError):
    """Raised when predict is called before fit."""


class FormAnomalyDetector:
    """Classify form submissions against a learned form structure.

    Parameters
    ----------
    allow_missing_referer:
        When true, requests without a referer skip the source-page
        check instead of being flagged as coming from an invalid source.

    Attributes
    ----------
    structure_:
        The learned ``ApplicationStructure`` after ``fit``.
    """

    def __init__(self, allow_missing_referer: bool = False):
        self.allow_missing_referer = allow_missing_referer

    # -- sklearn parameter protocol ---------------------------------------

    def get_params(self, deep: bool = True) -> dict:
        return {"allow_missing_referer": self.allow_missing_referer}

    def set_params(self, **params) -> "FormAnomalyDetector":
        for key, value in params.items():
            if key not in self.get_params():
                raise ValueError(f"unknown parameter {key!r} for FormAnomalyDetector")
            setattr(self, key, value)
        return self

    # -- fitting -----------------------------------------------------------

    def fit(
        self,
        X: ApplicationStructure | Iterable[tuple[str, str]],
        y: None = None,
    ) -> "FormAnomalyDetector":
        """Learn the structure from an ApplicationStructure or (url, html) pages."""
        if isinstance(X, ApplicationStructure):
            structure = X
        else:
            pages = list(X)
            if not pages:
                raise ValueError("fit needs at least one (url, html) page or a structure")
            forms = []
            for url, html in pages:
                forms.extend(extract_forms(html, url))
            structure = ApplicationStructure(
                base_url=pages[0][0],
                crawled_at="",
                groups=tuple(group_by_destination(forms)),
            )
        violations = validate_structure(structure)
        if violations:
            raise ValueError(
                f"cannot fit on an invalid structure: {'; '.join(violations)}"
            )
        self.structure_ = structure
        return self

    def _check_fitted(self) -> ApplicationStructure:
        structure = getattr(self, "structure_", None)
        if structure is None:
            raise NotFittedError(
                "this FormAnomalyDetector instance is not fitted yet;"
                " call fit with a structure or crawled pages first"
            )
        return structure

    # -- prediction ----------------------------------------------------------

    def classify(self, X: Sequence[FormRequest]) -> list[ClassifiedRequest]:
        """Full three-level verdicts, one per request."""
        structure = self._check_fitted()
        return [
            classify(request, structure, allow_missing_referer=self.allow_missing_referer)
            for request in X
        ]

    def predict(self, X: Sequence[FormRequest]) -> list[str]:
        """Overall status label per request: normal/deep-anomaly/violation."""
        return [item.overall.value for item in self.classify(X)]
