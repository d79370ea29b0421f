import numpy as np
import pytest

from llgen import otoc
from llgen.analytic import AveragedHRMOperator, averaged_otoc_series
from llgen.errors import BadParams, DimensionGuard
from llgen.gates import GateEnsembleSpec, GateSource
from llgen.replica import pauli_from_label


def test_coordinates_roundtrip():
    for w in range(1, 5):
        for tau in range(1, 5):
            assert otoc.light_cone_coords(*otoc.circuit_coords(w, tau)) == (w, tau)
    with pytest.raises(BadParams):
        otoc.light_cone_coords(1, 2)


@pytest.mark.parametrize("model,q", [("RPM", 3), ("HRM", 2), ("Localized", 2)])
def test_three_routes_agree(model, q):
    src = GateSource(GateEnsembleSpec(model, q, seed=5, arrangement="random"))
    if q ** (2 * 3 + 2) > otoc.BRUTE_LIMIT:
        w, tau = 2, 1
    else:
        w, tau = 2, 2
    cl, cr, cb = otoc.triple_check(src, w, tau)
    assert abs(cl - cr) < 1e-9 and abs(cl - cb) < 1e-9


def test_generic_probes_agree():
    src = GateSource(GateEnsembleSpec("HRM", 2, seed=9))
    a, b = pauli_from_label(1, 2), pauli_from_label(3, 2)
    cl, cr, cb = otoc.triple_check(src, 2, 2, a, b)
    assert abs(cl - cr) < 1e-9 and abs(cl - cb) < 1e-9


def test_bruteforce_is_chain_length_independent():
    src = GateSource(GateEnsembleSpec("HRM", 2, seed=3))
    assert otoc.otoc_bruteforce(src, 0, 2, doubling=True) == pytest.approx(otoc.otoc_bruteforce(src, 0, 2), abs=1e-12)


def test_outside_light_cone_vanishes():
    src = GateSource(GateEnsembleSpec("HRM", 2, seed=3))
    assert otoc.otoc_bruteforce(src, 9, 2) == 0


def test_identity_residual_reported():
    src = GateSource(GateEnsembleSpec("XYZc", 2, seed=0))
    series = otoc.otoc_llg_left(src, 2, 4)
    assert len(series.points) == 4
    assert max(p.err_abs for p in series.points) < 1e-10


def test_averaged_operator_reproduces_averaged_series():
    q, w = 2, 3
    op = AveragedHRMOperator(q, w, "F")
    left, right = op.boundary()
    v = right.astype(complex)
    ref = averaged_otoc_series(q, w, 6)
    for tau in range(1, 7):
        v = op.apply(v)
        assert -(left @ v).real == pytest.approx(ref[tau - 1], rel=1e-10)


def test_lsva_improves_with_depth():
    make = otoc.averaged_problem(2)
    points = otoc.butterfly_scan(make, 3, 30, w_min=3)
    rel = [p.error / abs(p.exact) for p in points]
    assert rel[-1] < 0.02 and rel[-1] < rel[5]


def test_right_lsva_needs_width_three():
    with pytest.raises(BadParams):
        otoc.lsva_right(GateSource(GateEnsembleSpec("HRM", 2)), 2, 1)


def test_variational_overlap_bounded():
    op = AveragedHRMOperator(2, 3, "F")
    left, right = op.boundary()
    _, trip = otoc.lsva(op, left, right, 20)
    var = otoc.variational_lsva(op, left, right, 20, exact=trip)
    assert 0.9 < var.overlap <= 1 + 1e-12
    assert var.singular_value <= trip.value * (1 + 1e-8)


def test_memory_guard():
    with pytest.raises(DimensionGuard):
        otoc.check_memory(2, 12)


def test_ensemble_average_stderr():
    spec = GateEnsembleSpec("HRM", 2, arrangement="random")
    stat = otoc.ensemble_average(lambda s: otoc.otoc_llg_left(GateSource(s), 1, 2).values().real, spec, range(4))
    assert stat.count == 4 and stat.mean.shape == (2,) and np.all(stat.stderr >= 0)
