from __future__ import annotations

import pytest

from formwatch.estimator import FormAnomalyDetector, NotFittedError
from formwatch.model import ApplicationStructure

from helpers import conforming_request, make_control, make_form, make_request, make_structure

LOGIN_PAGE = """
<html><body>
<form action="/wp-login.php" method="post">
  <input type="text" name="log">
  <input type="password" name="pwd">
  <input type="hidden" name="testcookie" value="1">
</form>
</body></html>
"""


class TestFit:
    def test_fit_on_pages_learns_structure(self):
        detector = FormAnomalyDetector().fit([("http://h/login.html", LOGIN_PAGE)])
        assert isinstance(detector.structure_, ApplicationStructure)
        assert len(detector.structure_.groups) == 1
        form = detector.structure_.groups[0].forms[0]
        assert [c.name for c in form.controls] == ["log", "pwd", "testcookie"]

    def test_fit_on_prebuilt_structure(self):
        structure = make_structure(make_form((make_control("a", 0),)))
        detector = FormAnomalyDetector().fit(structure)
        assert detector.structure_ is structure

    def test_fit_returns_self_for_chaining(self):
        detector = FormAnomalyDetector()
        assert detector.fit([("http://h/p", LOGIN_PAGE)]) is detector

    def test_fit_without_pages_rejected(self):
        with pytest.raises(ValueError):
            FormAnomalyDetector().fit([])


class TestPredict:
    def test_labels_for_normal_and_tampered(self):
        form = make_form((make_control("a", 0),))
        detector = FormAnomalyDetector().fit(make_structure(form))
        good = conforming_request(form)
        bad = make_request((), destination="http://elsewhere.example/x")
        assert detector.predict([good, bad]) == ["normal", "violation"]

    def test_classify_exposes_full_verdicts(self):
        form = make_form((make_control("a", 0),))
        detector = FormAnomalyDetector().fit(make_structure(form))
        [result] = detector.classify([conforming_request(form)])
        assert result.l1.matched_form_id == form.form_id

    def test_predict_before_fit_raises_not_fitted(self):
        with pytest.raises(NotFittedError):
            FormAnomalyDetector().predict([])

    def test_allow_missing_referer_parameter_threads_through(self):
        form = make_form((make_control("a", 0),))
        structure = make_structure(form)
        request = make_request((("a", "1"),), referer=None)
        strict = FormAnomalyDetector().fit(structure)
        relaxed = FormAnomalyDetector(allow_missing_referer=True).fit(structure)
        assert strict.predict([request]) == ["violation"]
        assert relaxed.predict([request]) == ["normal"]


class TestParams:
    def test_get_params(self):
        assert FormAnomalyDetector().get_params() == {"allow_missing_referer": False}

    def test_set_params_round_trip(self):
        detector = FormAnomalyDetector().set_params(allow_missing_referer=True)
        assert detector.get_params() == {"allow_missing_referer": True}

    def test_unknown_param_rejected(self):
        with pytest.raises(ValueError):
            FormAnomalyDetector().set_params(bogus=1)

    def test_composes_with_sklearn_clone(self):
        base = pytest.importorskip("sklearn.base")
        detector = FormAnomalyDetector(allow_missing_referer=True)
        cloned = base.clone(detector)
        assert isinstance(cloned, FormAnomalyDetector)
        assert cloned.get_params() == detector.get_params()
        assert not hasattr(cloned, "structure_")
