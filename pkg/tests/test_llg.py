import numpy as np
import pytest

from llgen.errors import DimensionMismatch, TooLarge
from llgen.gates import GateEnsembleSpec, GateSource
from llgen.llg import (
    LEFT,
    RIGHT,
    LLGOperator,
    _sweep,
    _sweep_dense,
    from_binary,
    power_apply,
    reduce_check,
    to_binary,
)
from llgen.replica import one_state, zero_state


@pytest.fixture(scope="module")
def hrm3():
    return GateSource(GateEnsembleSpec("HRM", 3, seed=4))


def _rand(dim, n=3, seed=0):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))


@pytest.mark.parametrize("w", [1, 2])
def test_factored_sweep_matches_dense_sweep(hrm3, w):
    op = LLGOperator(hrm3, w)
    q = 3
    v = _rand(op.dim)
    gates = op.gates(1)
    a = _sweep(v, gates, q, zero_state(q), one_state(q), (0, 1), (2, 3), True)
    b = _sweep_dense(v, gates, q, zero_state(q), one_state(q), (0, 1), (2, 3), True)
    assert np.abs(a - b).max() < 1e-12


@pytest.mark.parametrize("direction", [LEFT, RIGHT])
def test_dense_matches_matrix_free(direction):
    src = GateSource(GateEnsembleSpec("RPM", 2, seed=1, arrangement="random"))
    op = LLGOperator(src, 2, direction)
    v = _rand(op.dim, 2)
    assert np.abs(op.dense(step=3) @ v.T - op.apply(v, step=3).T).max() < 1e-12


def test_transpose_is_bilinear_transpose(hrm3):
    op = LLGOperator(hrm3, 2, mode="F")
    x, y = _rand(op.dim, 1, 1)[0], _rand(op.dim, 1, 2)[0]
    assert abs(x @ op.apply(y, step=1) - op.apply_transpose(x, step=1) @ y) < 1e-10


def test_fixed_points_and_f_mode(hrm3):
    op = LLGOperator(hrm3, 2)
    assert np.linalg.norm(op.apply(op.right_fixed, step=1) - op.right_fixed) < 1e-10
    f = op.with_mode("F")
    assert np.linalg.norm(f.apply(op.right_fixed, step=1)) < 1e-10


def test_reducibility(hrm3):
    op = LLGOperator(hrm3, 3, RIGHT)
    psi = _rand(81, 1, 3)[0]
    assert max(reduce_check(op, 2, psi)) < 1e-10


def test_power_apply_uses_consecutive_steps():
    src = GateSource(GateEnsembleSpec("HRM", 2, seed=2, arrangement="random"))
    op = LLGOperator(src, 2)
    v = _rand(op.dim, 1)[0]
    manual = op.apply(op.apply(v, step=2), step=3)
    assert np.allclose(power_apply(op, v, 2, first_step=2), manual)


def test_guards(hrm3):
    with pytest.raises(TooLarge):
        LLGOperator(hrm3, 3).dense()
    with pytest.raises(DimensionMismatch):
        LLGOperator(hrm3, 1).apply(np.ones(5))


def test_binary_roundtrip():
    v = _rand(16, 1)[0]
    data = to_binary(v)
    assert len(data) == 16 * 16
    assert np.array_equal(from_binary(data), v)
