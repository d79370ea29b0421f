import numpy as np
import pytest

from llgen.errors import BadParams, ConfigError, WrongQ
from llgen.gates import (
    MODELS,
    GateEnsembleSpec,
    GateSource,
    check_dual_unitary,
    sample_coe,
    sample_cue,
)
from llgen.replica import (
    commutator_sum,
    generalized_pauli,
    make_pair_state,
    one_state,
    overlap_table,
    replicate_gate,
    zero_state,
)


@pytest.mark.parametrize("model", MODELS)
def test_gates_are_unitary(model):
    src = GateSource(GateEnsembleSpec(model, 2, seed=3, arrangement="SpatialTemporalRandom"))
    for pos in [(1, 0), (2, 1), (5, -3)]:
        u = src(*pos)
        assert np.abs(u.conj().T @ u - np.eye(4)).max() < 1e-12


def test_invariant_arrangement_repeats_one_gate():
    src = GateSource(GateEnsembleSpec("HRM", 3, seed=1))
    assert np.array_equal(src(1, 0), src(4, -3))


def test_random_arrangement_is_position_dependent_and_reproducible():
    spec = GateEnsembleSpec("HRM", 2, seed=7, arrangement="random")
    a, b = GateSource(spec), GateSource(spec)
    assert not np.allclose(a(1, 0), a(2, 1))
    assert np.array_equal(a(3, 1), b(3, 1))


def test_dual_unitary_model_passes_reshuffle_check():
    ok, res = check_dual_unitary(GateSource(GateEnsembleSpec("DU", 2, seed=5))(1, 0), 2)
    assert ok and res < 1e-12
    ok, _ = check_dual_unitary(GateSource(GateEnsembleSpec("HRM", 2, seed=5))(1, 0), 2)
    assert not ok


def test_config_errors():
    with pytest.raises(WrongQ):
        GateEnsembleSpec("XYZc", 3)
    with pytest.raises(ConfigError):
        GateEnsembleSpec("nonsense", 2)
    with pytest.raises(BadParams):
        GateEnsembleSpec("RPM", 2, {"eps": -1.0})


def test_spec_config_roundtrip():
    spec = GateEnsembleSpec("RPM", 3, {"eps": 0.25}, seed=11, arrangement="random")
    assert GateEnsembleSpec.from_config(spec.to_config()) == spec


def test_haar_samplers():
    rng = np.random.default_rng(0)
    u = sample_cue(6, rng)
    assert np.abs(u.conj().T @ u - np.eye(6)).max() < 1e-12
    s = sample_coe(6, rng)
    assert np.abs(s - s.T).max() < 1e-12
    # first moment of |U_11|^2 is 1/n
    draws = [abs(sample_cue(4, rng)[0, 0]) ** 2 for _ in range(4000)]
    assert abs(np.mean(draws) - 0.25) < 0.02


@pytest.mark.parametrize("q", [2, 3, 4])
def test_pair_state_overlaps(q):
    assert np.allclose(overlap_table(q), [[q, 1], [1, q]])
    assert np.isclose(np.vdot(zero_state(q), zero_state(q)), q)
    assert np.isclose(np.vdot(zero_state(q), one_state(q)), 1)


def test_pair_state_of_probes_matches_identity_case():
    q = 3
    eye = np.eye(q)
    assert np.allclose(make_pair_state(0, eye, eye, q).vector, zero_state(q))


@pytest.mark.parametrize("q", [2, 3])
def test_pauli_commutator_identity(q):
    for nu in range(1, q * q):
        assert abs(commutator_sum(nu, q) - 2 * q**3) < 1e-9
    x = generalized_pauli(1, 0, q)
    assert np.allclose(np.linalg.matrix_power(x, q), np.eye(q))


def test_replicated_gate_fixes_pair_states():
    q = 2
    u = GateSource(GateEnsembleSpec("HRM", q, seed=2))(1, 0)
    big = replicate_gate(u, q)
    for state in (zero_state(q), one_state(q)):
        pair = np.kron(state, state)
        assert np.linalg.norm(big @ pair - pair) < 1e-10
