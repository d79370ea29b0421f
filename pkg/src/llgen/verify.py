"""Invariant checks shared by the ``verify`` command and the test suite."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .gates import QUBIT_ONLY, MODELS, GateEnsembleSpec, GateSource
from .llg import LEFT, RIGHT, LLGOperator, product_power, reduce_check
from .replica import commutator_sum, overlap_table
from .spectral import arnoldi_dominant, leading_singular_triplet

DENSE_EIG_LIMIT = 256
CHUNK_ELEMENTS = 1 << 24


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    limit: float

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.value:.3e} (limit {self.limit:.1e})"


def random_vectors(n: int, dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _chunks(op, n):
    size = max(1, CHUNK_ELEMENTS // (op.q ** (4 * op.w + 2)))
    return [slice(i, min(n, i + size)) for i in range(0, n, size)]


def check_overlaps(q: int) -> Check:
    expected = np.array([[q, 1], [1, q]])
    err = float(np.abs(overlap_table(q) - expected).max())
    return Check(f"overlap table q={q}", err < 1e-12, err, 1e-12)


def check_pauli(q: int) -> Check:
    err = max(abs(commutator_sum(nu, q) - 2 * q**3) for nu in range(1, q * q))
    return Check(f"Pauli commutator sums q={q}", err < 1e-9, err, 1e-9)


def check_fixed_points(op: LLGOperator) -> Check:
    r1 = np.linalg.norm(op.apply(op.right_fixed, step=1) - op.right_fixed)
    r2 = np.linalg.norm(op.apply_transpose(op.left_fixed, step=1) - op.left_fixed)
    r3 = abs(op.left_fixed @ op.right_fixed - 1)
    err = float(max(r1, r2, r3))
    return Check(f"fixed points {op.direction} q={op.q} w={op.w}", err < 1e-10, err, 1e-10)


def check_norm_bound(op: LLGOperator, n_vectors: int = 100, seed: int = 0) -> Check:
    v = random_vectors(n_vectors, op.dim, seed)
    worst = 0.0
    for sl in _chunks(op, n_vectors):
        out = op.apply(v[sl], step=1)
        worst = max(worst, float(np.linalg.norm(out, axis=1).max()))
    return Check(f"norm bound {op.direction} q={op.q} w={op.w}", worst <= op.q + 1e-9, worst, op.q + 1e-9)


def check_adjoint(op: LLGOperator, n_vectors: int = 100, seed: int = 1) -> Check:
    x = random_vectors(n_vectors, op.dim, seed)
    y = random_vectors(n_vectors, op.dim, seed + 1)
    worst = 0.0
    for sl in _chunks(op, n_vectors):
        lhs = np.einsum("ni,ni->n", x[sl].conj(), op.apply(y[sl], step=1))
        rhs = np.einsum("ni,ni->n", op.apply_adjoint(x[sl], step=1).conj(), y[sl])
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return Check(f"adjointness {op.direction} q={op.q} w={op.w}", worst < 1e-12, worst, 1e-12)


def largest_eigen_modulus(op: LLGOperator) -> float:
    if op.dim <= DENSE_EIG_LIMIT:
        return float(np.abs(np.linalg.eigvals(op.dense())).max())
    res = arnoldi_dominant(lambda v: op.apply(v, step=1), op.dim, krylov_dim=40, tol=1e-10, max_restarts=100)
    return float(abs(res.dominant_ritz))


def check_eigen_moduli(op: LLGOperator) -> Check:
    top = largest_eigen_modulus(op)
    return Check(f"eigenvalue moduli {op.direction} q={op.q} w={op.w}", top <= 1 + 1e-9, top, 1 + 1e-9)


def check_reducibility(op: LLGOperator, seed: int = 2) -> Check:
    worst = 0.0
    rng = np.random.default_rng(seed)
    for m in range(1, op.w):
        small = op.site_dim ** (op.w - m)
        psi = rng.standard_normal(small) + 1j * rng.standard_normal(small)
        psi /= np.linalg.norm(psi)
        worst = max(worst, *reduce_check(op, m, psi))
    return Check(f"reducibility {op.direction} q={op.q} w={op.w}", worst < 1e-10, worst, 1e-10)


def models_for(q: int) -> List[str]:
    return [m for m in MODELS if q == 2 or m not in QUBIT_ONLY]


def property_suite(q: int, w_max: int = 3, n_vectors: int = 100, model: str = "HRM", seed: int = 0,
                   log: Optional[Callable[[str], None]] = None) -> List[Check]:
    """Overlap, Pauli, fixed-point, norm, spectrum, reducibility and adjointness checks."""
    checks = [check_overlaps(q), check_pauli(q)]
    src = GateSource(GateEnsembleSpec(model, q, seed=seed))
    for w in range(1, w_max + 1):
        for direction in (LEFT, RIGHT):
            op = LLGOperator(src, w, direction)
            checks.append(check_fixed_points(op))
            checks.append(check_norm_bound(op, n_vectors))
            checks.append(check_adjoint(op, n_vectors))
            if direction == LEFT:
                checks.append(check_eigen_moduli(op))
            if w > 1:
                checks.append(check_reducibility(op))
            if log:
                for c in checks[-4:]:
                    log(c.line())
    return checks


def fixed_points_all_models(q: int, w_max: int = 4) -> List[Check]:
    out = []
    for model in models_for(q):
        src = GateSource(GateEnsembleSpec(model, q, seed=0))
        for w in range(1, w_max + 1):
            out.append(check_fixed_points(LLGOperator(src, w)))
    return out


def operator_norm(op: LLGOperator, tol: float = 1e-8) -> float:
    return leading_singular_triplet(op.with_mode("T"), 1, tol=tol, max_iter=5000).value


def norm_profile(src: GateSource, w_max: int = 4) -> List[float]:
    """Estimated ||T_w|| for w = 1..w_max."""
    return [operator_norm(LLGOperator(src, w)) for w in range(1, w_max + 1)]
