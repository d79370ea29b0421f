from math import comb

import numpy as np
import pytest

from llgen import analytic
from llgen.errors import TooLarge
from llgen.gates import GateEnsembleSpec, GateSource
from llgen.llg import LLGOperator
from llgen.replica import one_state, zero_state
from llgen.spectral import leading_singular_triplet


@pytest.mark.parametrize("q", [2, 3, 5])
def test_m_tensor_from_weingarten(q):
    assert np.allclose(analytic.m_tensor(q), analytic.m_tensor_from_weingarten(q))


def test_weingarten_two_copies():
    n = 4
    assert analytic.weingarten(0, 0, n) == pytest.approx(1 / (n * n - 1))
    assert analytic.weingarten(0, 1, n) == pytest.approx(-1 / (n * (n * n - 1)))


def test_haar_average_matches_sampling():
    q, n = 2, 1000
    c = np.array([1.0, 0.5])
    acc = np.zeros(q**4, dtype=complex)
    for s in range(n):
        op = LLGOperator(GateSource(GateEnsembleSpec("HRM", q, seed=s)), 1)
        acc += op.apply(zero_state(q) + 0.5 * one_state(q), step=1)
    out = analytic.averaged_apply(c, q, 1)
    pred = out[0] * zero_state(q) + out[1] * one_state(q)
    assert np.abs(acc / n - pred).max() < 0.02


@pytest.mark.parametrize("q", [2, 3])
@pytest.mark.parametrize("w", [1, 2, 5])
def test_averaged_spectrum_closed_form(q, w):
    vals = np.sort(analytic.averaged_spectrum_exact(q, w))
    want = np.sort(np.concatenate([[e] * m for e, m in analytic.hrm_eigenvalues(q, w)]))
    assert sum(m for _, m in analytic.hrm_eigenvalues(q, w)) == 2**w
    assert np.abs(vals - want).max() < 1e-10
    assert [m for _, m in analytic.hrm_eigenvalues(q, w)] == [comb(w, n) for n in range(w + 1)]


def test_transpose_consistency():
    q, w = 3, 3
    rng = np.random.default_rng(0)
    x, y = rng.standard_normal(2**w), rng.standard_normal(2**w)
    lhs = x @ analytic.averaged_apply(y, q, w)
    rhs = analytic.averaged_apply_transpose(x, q, w) @ y
    assert lhs == pytest.approx(rhs)


def test_orthonormal_operator_preserves_singular_values():
    q, w, tau = 2, 3, 5
    op = analytic.AveragedHRMOperator(q, w, "F")
    f = np.linalg.matrix_power(op.dense(), tau)
    direct = np.linalg.svd(f, compute_uv=False)[0]
    assert leading_singular_triplet(op, tau).value == pytest.approx(direct, rel=1e-8)


def test_dense_guard():
    with pytest.raises(TooLarge):
        analytic.AveragedHRMOperator(2, 13).dense()


@pytest.mark.parametrize("w,tau", [(3, 2), (4, 7), (5, 12)])
def test_leading_sv_three_ways(w, tau):
    q = 2
    dense = np.linalg.svd(np.linalg.matrix_power(analytic.AveragedHRMOperator(q, w, "F").dense(), tau),
                          compute_uv=False)[0]
    assert analytic.hrm_leading_sv_restricted(q, w, tau) == pytest.approx(dense, rel=1e-8)
    # the closed form drops a rank-one correction, so it only tracks the dense value
    assert analytic.hrm_leading_sv_exact(q, w, tau) == pytest.approx(dense, rel=0.05)
    assert np.all(analytic.chi_R_power(q, w, tau) <= analytic.chi_vector(q, w) * (1 + 1e-12))


def test_exact_leading_sv_large_width_is_finite():
    val = analytic.hrm_leading_sv_exact(2, 30, 120)
    assert np.isfinite(val) and 0 < val < 2**30


def test_front_integral_limits():
    q = 2
    # widths far ahead of the front keep the full plateau, far behind it nothing
    assert analytic.f_tau(0.9, 400, q) == pytest.approx(1.0, abs=1e-3)
    assert analytic.f_tau(0.05, 400, q) < 1e-6


def test_ridge_near_q_squared():
    q, w = 2, 30
    ridge = analytic.ridge_tau(q, w, range(1, 200))
    assert abs(ridge / w - q * q) < 0.1 * q * q


def test_du_closed_form_matches_numerics():
    src = GateSource(GateEnsembleSpec("DU", 2, seed=1))
    op = LLGOperator(src, 2, mode="F")
    for tau in (1, 3):
        assert leading_singular_triplet(op, tau).value == pytest.approx(analytic.du_closed_form(2, 2, tau)[2], rel=1e-8)


def test_localized_closed_form_matches_numerics():
    src = GateSource(GateEnsembleSpec("Localized", 3))
    op = LLGOperator(src, 2, mode="F")
    f, norm = analytic.localized_closed_form(3, 2, 1)
    assert np.linalg.svd(f, compute_uv=False)[0] == pytest.approx(norm)
    assert leading_singular_triplet(op, 1).value == pytest.approx(norm, rel=1e-8)
    assert leading_singular_triplet(op, 2).value < 1e-9
