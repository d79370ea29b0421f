"""Acceptance criteria at their stated tolerances.

Each test records one PASS/FAIL line, printed in the pytest summary; run this
file directly to get the nine lines without pytest.
"""
import os
import time
from math import comb

import numpy as np
import pytest

from llgen import analytic, levelstats, otoc, spectral, verify
from llgen.gates import MODELS, GateEnsembleSpec, GateSource
from llgen.llg import LLGOperator

LINES = []


def report(number, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
    LINES.append(line)
    print(line)
    assert passed, line


def test_criterion_1_three_routes_agree():
    start = time.time()
    worst_bf = worst_right = 0.0
    for arrangement in ("Invariant", "SpatialTemporalRandom"):
        for model in MODELS:
            src = GateSource(GateEnsembleSpec(model, 2, seed=0, arrangement=arrangement))
            for w in (1, 2, 3):
                for tau in (1, 2, 3):
                    cl, cr, cb = otoc.triple_check(src, w, tau)
                    worst_bf = max(worst_bf, abs(cl - cb))
                    worst_right = max(worst_right, abs(cl - cr))
    elapsed = time.time() - start
    ok = worst_bf < 1e-9 and worst_right < 1e-9 and elapsed < 300
    report(1, ok, f"max|left-brute|={worst_bf:.1e} max|left-right|={worst_right:.1e} in {elapsed:.0f}s "
                  "(limits 1e-9, 300s)")


def test_criterion_2_averaged_spectrum():
    worst, mult_ok = 0.0, True
    for q in (2, 3):
        for w in range(1, 9):
            vals = np.sort(analytic.averaged_spectrum_exact(q, w))
            r = q / (q * q + 1.0)
            want = np.sort(np.concatenate([[r**n if n % 2 == 0 else q * r**n] * comb(w, n) for n in range(w + 1)]))
            worst = max(worst, float(np.abs(vals - want).max()))
            clusters = spectral.cluster_eigenvalues(vals, 1e-9)
            for n in range(w + 1):
                eps = r**n if n % 2 == 0 else q * r**n
                mult_ok &= spectral.multiplicity(clusters, eps, 1e-9) == comb(w, n)
    report(2, worst < 1e-10 and mult_ok, f"max eigenvalue error {worst:.1e} (limit 1e-10), multiplicities "
                                          f"{'match' if mult_ok else 'differ'}")


def test_criterion_3_z2_universality():
    worst = 0.0
    for model in ("3PM", "HRM"):
        src = GateSource(GateEnsembleSpec(model, 2, seed=0))
        z1 = spectral.subleading_eigenvalue(LLGOperator(src, 1))
        for w in (2, 3):
            worst = max(worst, abs(spectral.subleading_eigenvalue(LLGOperator(src, w)) - z1))
    report(3, worst < 1e-4, f"max|z2(w)-z2(1)| = {worst:.1e} (limit 1e-4)")


def test_criterion_4_tail_exponents():
    parts, ok = [], True
    for q in (2, 3):
        z2 = q * q / (q * q + 1.0)
        for w in (3, 4):
            _, logs = analytic.averaged_otoc_log_series(q, w, 4000)
            fit = spectral.tail_fit(np.arange(1, 4001), logs)
            good = abs(fit.phi - (w - 1)) <= 0.3 and abs(fit.z2 - z2) <= 0.02
            ok &= good
            parts.append(f"avg q={q} w={w} phi={fit.phi:.2f} z2={fit.z2:.4f}")
    taus, _, logs = otoc.left_log_series(GateSource(GateEnsembleSpec("XYZc", 2, seed=0)), 3, 400)
    fit = spectral.tail_fit(taus, logs)
    ok &= abs(fit.phi - 4) <= 0.5
    parts.append(f"XYZc w=3 phi={fit.phi:.2f}")
    report(4, ok, "; ".join(parts) + " (phi = w-1 +-0.3, z2 +-0.02; XYZc 4 +-0.5)")


@pytest.mark.skipif(not os.environ.get("LLGEN_LONG"), reason="set LLGEN_LONG=1 for the width-5 fit")
def test_criterion_4_optional_width_five():
    taus, _, logs = otoc.left_log_series(GateSource(GateEnsembleSpec("3PM", 2, seed=0)), 5, 800)
    fit = spectral.tail_fit(taus, logs)
    print(f"optional 3PM w=5: phi={fit.phi:.2f} (target 4 +-0.5)")
    assert abs(fit.phi - 4) <= 0.5


def test_criterion_5_special_cases():
    du_err, loc_plateau, loc_zero = 0.0, 0.0, 0.0
    du = GateSource(GateEnsembleSpec("DU", 2, seed=0))
    loc = GateSource(GateEnsembleSpec("Localized", 2, seed=0))
    for w in range(1, 5):
        op_du = LLGOperator(du, w, mode="F")
        op_loc = LLGOperator(loc, w, mode="F")
        for tau in range(1, 7):
            du_err = max(du_err, abs(spectral.leading_singular_triplet(op_du, tau).value / 2**w - 1))
            val = spectral.leading_singular_triplet(op_loc, tau).value
            if tau < w:
                loc_plateau = max(loc_plateau, abs(val / 2**w - 1))
            else:
                loc_zero = max(loc_zero, val)
    ok = du_err < 1e-6 and loc_plateau < 1e-6 and loc_zero < 1e-9
    report(5, ok, f"DU rel err {du_err:.1e}; localized plateau rel err {loc_plateau:.1e}, "
                  f"late-time value {loc_zero:.1e} (limits 1e-6, 1e-9)")


def test_criterion_6_butterfly_cone():
    q, w = 2, 30
    ratios = {}
    for tau in range(3 * w, 5 * w + 1):
        ratios[tau] = analytic.hrm_leading_sv_exact(q, w, tau) / (q**w * analytic.f_tau(w / tau, tau, q))
    worst_tau = max(ratios, key=lambda t: abs(ratios[t] - 1))
    ridge = analytic.ridge_tau(q, w, range(1, 10 * w)) / w
    ok = all(0.9 <= r <= 1.1 for r in ratios.values()) and abs(ridge - q * q) <= 0.1 * q * q
    report(6, ok, f"ratio range [{min(ratios.values()):.3f}, {max(ratios.values()):.3f}] worst at "
                  f"tau/w={worst_tau / w:.2f} (limit [0.9, 1.1]); ridge tau/w={ridge:.2f} (4 +-0.4)")


def test_criterion_7_lsva():
    op, left, right = otoc.averaged_problem(2)(4)
    v = right.astype(complex)
    worst = 0.0
    for tau in range(1, 61):
        v = op.apply(v)
        if tau >= 12:
            exact = -(left @ v)
            approx, _ = otoc.lsva(op, left, right, tau)
            worst = max(worst, abs(exact - approx) / abs(exact))
    _, trip = otoc.lsva(op, left, right, 60)
    var = otoc.variational_lsva(op, left, right, 60, exact=trip)
    report(7, worst < 0.05 and var.overlap > 0.99,
           f"max rel err for 12<=tau<=60 {worst:.4f} (limit 0.05); variational overlap at tau=60 "
           f"{var.overlap:.4f} (limit 0.99)")


def test_criterion_8_level_statistics():
    n_sites = 12
    sources = [GateSource(GateEnsembleSpec("3PM", 2, seed=s)) for s in range(5)]
    s3 = levelstats.pooled_spacings(sources, n_sites, [dict(momentum=1)])
    rng = np.random.default_rng(0)
    ref = levelstats.sample_matrix_power_ensemble("CUE", 2, len(s3) // len(sources), 30, rng)
    ks_cue = levelstats.ks_distance(s3, ref)
    ks_poi = levelstats.ks_distance(s3, "expon")
    xyz_sectors = [dict(momentum=m, zparity=z, xparity=x) for m in (1, 2) for z in (1, -1) for x in (1, -1)]
    sx = levelstats.pooled_spacings([GateSource(GateEnsembleSpec("XYZc", 2, seed=0))], n_sites, xyz_sectors)
    ks_xyz = levelstats.ks_distance(sx, "expon")
    ref_poi = levelstats.ks_distance(ref, "expon")
    ok = ks_cue < 0.08 and ks_poi > 0.2 and ks_xyz < 0.08
    report(8, ok, f"3PM KS to CUE^2 {ks_cue:.3f} (<0.08), to Poisson {ks_poi:.3f} (>0.2; CUE^2 itself is "
                  f"{ref_poi:.3f} from Poisson); XYZc KS to Poisson {ks_xyz:.3f} (<0.08)")


def test_criterion_9_property_suite():
    checks = []
    for q in (2, 3):
        checks += verify.property_suite(q, 3, 100)
    failed = [c.line() for c in checks if not c.passed]
    report(9, not failed, f"{len(checks) - len(failed)}/{len(checks)} invariant checks pass" +
           (f"; first failure: {failed[0]}" if failed else ""))


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_") and "optional" not in name:
            try:
                fn()
            except AssertionError:
                pass
