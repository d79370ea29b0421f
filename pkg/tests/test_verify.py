import numpy as np

from llgen import spectral, verify
from llgen.gates import GateEnsembleSpec, GateSource
from llgen.llg import LLGOperator


def test_property_suite_small_widths():
    checks = verify.property_suite(2, 2, 20)
    assert all(c.passed for c in checks), [c.line() for c in checks if not c.passed]


def test_fixed_points_every_model():
    checks = verify.fixed_points_all_models(2, 2)
    assert len(checks) == 14 and all(c.passed for c in checks)


def test_norm_grows_with_width():
    norms = verify.norm_profile(GateSource(GateEnsembleSpec("HRM", 2, seed=0)), 4)
    assert np.all(np.diff(norms) >= -1e-8)
    assert all(1.0 <= n <= 2.0 + 1e-9 for n in norms)


def test_plateau_before_the_light_cone_is_crossed():
    q, w = 2, 5
    op = LLGOperator(GateSource(GateEnsembleSpec("HRM", q, seed=0)), w, mode="F")
    for tau in (1, 2, 4):
        val = spectral.leading_singular_triplet(op, tau, tol=1e-4).value
        assert q**w / 2 <= val <= 2 * q**w


def test_check_line_format():
    line = verify.Check("demo", False, 0.5, 0.1).line()
    assert line.startswith("FAIL demo: 5.000e-01")
