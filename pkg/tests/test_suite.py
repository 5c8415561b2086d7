import json

import numpy as np
import pytest

from lcricci.suite import (
    CHECKS,
    METRIC_SETS,
    SCHEMA,
    SUITES,
    SuiteConfig,
    SuiteError,
    checks_for,
    render_table,
    report_json,
    resolve_metrics,
    run_suite,
    sample_points,
    strip_timestamp,
)


def test_every_check_belongs_to_a_suite():
    assert {c.suite for c in CHECKS} <= set(SUITES)
    assert len({c.check_id for c in CHECKS}) == len(CHECKS)


def test_checks_for():
    assert len(checks_for("all")) == len(CHECKS)
    assert [c.check_id for c in checks_for("key.lc_ricci")] == ["key.lc_ricci"]
    with pytest.raises(SuiteError):
        checks_for("no-such-suite")


def test_sampling_is_keyed_by_seed_and_metric():
    a = sample_points("hopfp:n=2", 10, 0)
    b = sample_points("hopfp:n=2", 10, 0)
    c = sample_points("hopfp:n=2", 10, 1)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    r = np.linalg.norm(sample_points("hopf0:n=3", 500, 0), axis=1)
    assert r.min() >= 0.6 and r.max() <= 1.4


def test_config_validation():
    with pytest.raises(SuiteError):
        SuiteConfig("key-identity", ("flat:n=2",), points=0)
    with pytest.raises(SuiteError):
        SuiteConfig("key-identity", ("flat:n=2",), tolerance=-1.0)
    with pytest.raises(SuiteError):
        SuiteConfig("key-identity", ("flat:n=2",), mode="symbolic")
    with pytest.raises(SuiteError):
        SuiteConfig("key-identity", ())


def test_resolve_metrics():
    assert resolve_metrics(["flat:n=2"], "hopf") == ["flat:n=2"] + METRIC_SETS["hopf"]
    with pytest.raises(SuiteError):
        resolve_metrics(None, "nope")


def test_report_structure():
    report = run_suite(SuiteConfig("key-identity", ("hopfp:n=2", "flat:n=2"), points=5))
    assert report["schema"] == SCHEMA
    assert report["overall_pass"]
    rec = report["checks"][0]
    for key in ("check_id", "metric", "points_evaluated", "max_residual", "mean_residual",
                "tolerance", "pass", "anchor"):
        assert key in rec
    assert "timestamp" in report["environment"]
    assert set(report["coverage"]) == {c.check_id for c in checks_for("key-identity")}
    json.loads(report_json(report))
    assert "key.lc_ricci" in render_table(report)


def test_not_applicable_checks_are_excluded():
    report = run_suite(SuiteConfig("hopf-closed-forms", ("flat:n=2", "hopfp:n=2"), points=3))
    statuses = {r["metric"]: r["status"] for r in report["checks"]}
    assert statuses["flat:n=2"] == "not-applicable"
    assert report["overall_pass"]


def test_suite_with_no_applicable_check_is_an_error():
    with pytest.raises(SuiteError):
        run_suite(SuiteConfig("inoue-curvature", ("flat:n=2",), points=3))


def test_failure_is_reported():
    report = run_suite(SuiteConfig("key-identity", ("hopfp:n=2",), points=3, tolerance=1e-30))
    assert not report["overall_pass"]
    assert report["summary"]["failed"] > 0


def test_tolerance_override_applies_everywhere():
    report = run_suite(SuiteConfig("kahler-degeneracy", ("fs:n=2",), points=3, tolerance=0.5))
    assert all(r["tolerance"] == 0.5 for r in report["checks"])


def test_determinism_excluding_timestamp():
    config = SuiteConfig("hopf-closed-forms", tuple(METRIC_SETS["hopf"]), points=4, seed=3)
    a = report_json(strip_timestamp(run_suite(config)))
    b = report_json(strip_timestamp(run_suite(config)))
    assert a == b


@pytest.mark.parametrize("suite", [s for s in SUITES if s != "integral-identities"])
def test_each_suite_passes_on_default_set(suite):
    metrics = tuple(m for m in METRIC_SETS["default"] + METRIC_SETS["lemma"])
    report = run_suite(SuiteConfig(suite, metrics, points=8))
    failed = [(r["check_id"], r["metric"], r["max_residual"]) for r in report["checks"]
              if r["pass"] is False]
    assert not failed


def test_integral_suite_passes():
    report = run_suite(SuiteConfig("integral-identities", ("hopf0:n=2", "hopfp:n=2"), points=1))
    assert report["overall_pass"], [r for r in report["checks"] if r["pass"] is False]


def test_fd_mode_passes_key_suite():
    report = run_suite(SuiteConfig("key-identity", ("hopfp:n=2", "conformal(hopf0:n=2; f=sin(x1))"),
                                   points=8, mode="fd"))
    assert report["overall_pass"]
