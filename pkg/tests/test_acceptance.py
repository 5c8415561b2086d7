"""Acceptance criteria, each run at its stated tolerance.

Every test appends one ``criterion N: PASS|FAIL ...`` line that is printed
in the terminal summary, then asserts.
"""

import time

import numpy as np

from lcricci.curvature import line_bundle_ricci
from lcricci.quadrature import grid_refine_study, lcflat_check, total_scalar_check
from lcricci.suite import (
    METRIC_SETS,
    SUITES,
    SuiteConfig,
    report_json,
    run_suite,
    strip_timestamp,
)

SWEEP = tuple(METRIC_SETS["sweep"])
FULL = tuple(METRIC_SETS["default"])


def record(log, number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    log.append(line)
    print(line)
    return ok


def worst(check_id, metrics, tol, points=100, mode="analytic"):
    """Run one check at the criterion's tolerance; return (all passed, max residual)."""
    report = run_suite(SuiteConfig(check_id, metrics, points=points, tolerance=tol, mode=mode),
                       timestamp=False)
    recs = [r for r in report["checks"] if r["status"] != "not-applicable"]
    ok = bool(recs) and all(r["status"] == "ok" and r["pass"] for r in recs)
    residuals = [r["max_residual"] for r in recs if r["max_residual"] is not None]
    return ok, max(residuals) if len(residuals) == len(recs) else float("inf")


def test_criterion_1_lc_ricci_flatness(acceptance_log):
    start = time.perf_counter()
    metrics = ("hopfp:n=2", "hopfp:n=3")
    ok_a, res_a = worst("hopf.lc_ricci_flat", metrics, 1e-6)
    ok_f, res_f = worst("hopf.lc_ricci_flat", metrics, 1e-4, mode="fd")
    elapsed = time.perf_counter() - start
    ok = ok_a and ok_f and elapsed <= 10
    assert record(acceptance_log, 1, ok, f"max |ric_LC| analytic {res_a:.2e} (<= 1e-6), "
                  f"fd {res_f:.2e} (<= 1e-4), {elapsed:.1f} s (<= 10 s)")


def test_criterion_2_ricci_relation(acceptance_log):
    start = time.perf_counter()
    ok, res = worst("key.lc_ricci", SWEEP, 1e-5)
    elapsed = time.perf_counter() - start
    ok = ok and elapsed <= 60
    assert record(acceptance_log, 2, ok, f"max residual {res:.2e} (<= 1e-5) over {len(SWEEP)} "
                  f"metrics x 100 points, {elapsed:.1f} s (<= 60 s)")


def test_criterion_3_scalar_relation(acceptance_log):
    ok1, r1 = worst("key2.scalar_relation", SWEEP, 1e-5)
    ok2, r2 = worst("key2.inner_symmetry", SWEEP, 1e-5)
    assert record(acceptance_log, 3, ok1 and ok2,
                  f"scalar relation {r1:.2e}, inner-product symmetry {r2:.2e} (<= 1e-5)")


def test_criterion_4_adjoint_routes(acceptance_log):
    ok1, r1 = worst("key11.routes", FULL, 1e-6)
    ok2, r2 = worst("hopf.dbar_star_closed_form", ("hopfp:n=2", "hopfp:n=3"), 1e-6)
    assert record(acceptance_log, 4, ok1 and ok2,
                  f"route difference {r1:.2e}, hopf-perturbed vs -n sqrt(-1) d log|z|^2 "
                  f"{r2:.2e} (<= 1e-6)")


def test_criterion_5_conformal_change(acceptance_log):
    lemma = tuple(METRIC_SETS["lemma"])
    ok1, r1 = worst("lemma.dbar_star", lemma, 1e-5)
    ok2, r2 = worst("lemma.ddbar_dbar_star", lemma, 1e-4)
    assert record(acceptance_log, 5, ok1 and ok2,
                  f"dbar^* formula {r1:.2e} (<= 1e-5), dbar dbar^* formula {r2:.2e} (<= 1e-4), "
                  f"5 factors on flat and hopf-standard")


def test_criterion_6_kahler_degeneracy(acceptance_log):
    metrics = ("flat:n=2", "fs:n=2")
    ok1, r1 = worst("kahler.gamma_mixed", metrics, 1e-8)
    ok2, r2 = worst("kahler.lc_equals_chern", metrics, 1e-6)
    assert record(acceptance_log, 6, ok1 and ok2,
                  f"max |Gamma mixed| {r1:.2e} (<= 1e-8), |ric_LC - Ric| {r2:.2e} (<= 1e-6)")


def test_criterion_7_chern_ricci_routes(acceptance_log):
    ok, res = worst("key.chern_ricci_routes", FULL, 1e-6)
    assert record(acceptance_log, 7, ok, f"trace vs log det route {res:.2e} (<= 1e-6)")


def test_criterion_8_integral_identities(acceptance_log):
    start = time.perf_counter()
    totals = [total_scalar_check(m, resolution=8) for m in ("hopf0:n=2", "hopfp:n=2")]
    lcflat = lcflat_check("hopfp:n=2", resolution=8, gauduchon_tol=1e-6)
    studies = [grid_refine_study(m, "scalar", resolution=4) for m in ("hopf0:n=2", "hopfp:n=2")]
    studies.append(grid_refine_study("hopfp:n=2", "dbar_star_norm", resolution=4))
    elapsed = time.perf_counter() - start
    total_res = max(t["relative_residual"] for t in totals)
    ok = (total_res <= 1e-3 and lcflat["precondition"] and lcflat["relative_residual"] <= 1e-3
          and all(s.certified for s in studies) and elapsed <= 120)
    assert record(acceptance_log, 8, ok,
                  f"total scalar {total_res:.2e}, LCflat {lcflat['relative_residual']:.2e} "
                  f"(<= 1e-3), Gauduchon at nodes {lcflat['gauduchon_max_residual']:.1e} "
                  f"(<= 1e-6), refinement certified {all(s.certified for s in studies)}, "
                  f"{elapsed:.1f} s (<= 120 s)")


def test_criterion_9_inoue_weight(acceptance_log):
    at_i = line_bundle_ricci("y1^2", [1j, 0]).coeff
    err_i = max(abs(at_i[0, 0] + 0.5), float(np.max(np.abs(at_i[[0, 1, 1], [1, 0, 1]]))))
    rng = np.random.default_rng(9)
    w = rng.uniform(-1, 1, 20) + 1j * rng.uniform(0.5, 2.0, 20)
    prof = line_bundle_ricci("y1^2", np.stack([w, np.zeros(20)], axis=1)).coeff[:, 0, 0]
    err_p = float(np.max(np.abs(prof + 1 / (2 * w.imag ** 2))))
    ok = err_i <= 1e-8 and err_p <= 1e-8
    assert record(acceptance_log, 9, ok,
                  f"coefficient at w=i off by {err_i:.2e}, profile at 20 points {err_p:.2e} "
                  f"(<= 1e-8)")


def _config(suite):
    if suite == "integral-identities":
        return SuiteConfig(suite, tuple(METRIC_SETS["hopf"]), points=1, seed=5)
    metrics = tuple(METRIC_SETS["default"] + METRIC_SETS["lemma"])
    return SuiteConfig(suite, metrics, points=6, seed=5)


def test_criterion_10_determinism(acceptance_log):
    differing = []
    for suite in SUITES:
        config = _config(suite)
        a = report_json(strip_timestamp(run_suite(config)))
        b = report_json(strip_timestamp(run_suite(config)))
        if a.encode() != b.encode():
            differing.append(suite)
    assert record(acceptance_log, 10, not differing,
                  f"{len(SUITES) - len(differing)}/{len(SUITES)} suites byte-identical on re-run"
                  + (f"; differing: {', '.join(differing)}" if differing else ""))
