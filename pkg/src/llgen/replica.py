"""Four-copy replicated site space, pair states and the generalized Pauli basis.

Copies are ordered (ket1, bra1, ket2, bra2); a replicated site has dimension
q**4 with flat index ((a*q + b)*q + c)*q + d.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch


@dataclass(frozen=True)
class PairState:
    kind: int
    q: int
    vector: np.ndarray

    def overlap(self, other: "PairState") -> complex:
        """Bilinear overlap; pair-state components are real for identity decorations."""
        return complex(self.vector @ other.vector)


def _check_op(op, q: int) -> np.ndarray:
    if op is None:
        return np.eye(q, dtype=complex)
    op = np.asarray(op, dtype=complex)
    if op.shape != (q, q):
        raise DimensionMismatch(f"decoration must be {q}x{q}, got {op.shape}")
    return op


def make_pair_state(kind: int, sigma=None, mu=None, q: int = 2) -> PairState:
    """Pair state with operators inserted on its two bonds.

    kind 0 pairs copies (1,2) and (3,4): entry [a,b,c,d] = sigma[b,a] mu[d,c] / sqrt(q).
    kind 1 pairs copies (2,3) and (4,1): entry [a,b,c,d] = sigma[a,d] mu[c,b] / sqrt(q).
    """
    s = _check_op(sigma, q)
    m = _check_op(mu, q)
    if kind == 0:
        t = np.einsum("ba,dc->abcd", s, m)
    elif kind == 1:
        t = np.einsum("ad,cb->abcd", s, m)
    else:
        raise ValueError("pair-state kind must be 0 or 1")
    return PairState(kind, q, t.reshape(q**4) / np.sqrt(q))


def zero_state(q: int) -> np.ndarray:
    return make_pair_state(0, q=q).vector


def one_state(q: int) -> np.ndarray:
    return make_pair_state(1, q=q).vector


def product_state(site_vectors) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for v in site_vectors:
        out = np.kron(out, v)
    return out


def overlap_table(q: int) -> np.ndarray:
    """Matrix of <i|j> for i, j in {0, 1}."""
    basis = [zero_state(q), one_state(q)]
    return np.array([[np.vdot(a, b) for b in basis] for a in basis])


def replicate_gate(u, q: Optional[int] = None) -> np.ndarray:
    """u (x) u* (x) u (x) u* as a q^8 x q^8 matrix.

    Row index is (left replicated site, right replicated site), each in the
    copy-major flat convention of this module; columns likewise.
    """
    u = np.asarray(getattr(u, "matrix", u), dtype=complex)
    if q is None:
        q = int(round(np.sqrt(u.shape[0])))
    g = u.reshape(q, q, q, q)  # [row a, row b, col a, col b]
    gc = g.conj()
    t = np.einsum("AEae,BFbf,CGcg,DHdh->ABCDEFGHabcdefgh", g, gc, g, gc, optimize=True)
    n = q**8
    return t.reshape(n, n)


def generalized_pauli(j: int, k: int, q: int) -> np.ndarray:
    """sum_m omega^(j m) |m+k><m| with omega = exp(2 pi i / q)."""
    if not (0 <= j < q and 0 <= k < q):
        raise ValueError(f"labels must lie in [0, {q}), got ({j}, {k})")
    omega = np.exp(2j * np.pi / q)
    out = np.zeros((q, q), dtype=complex)
    for m in range(q):
        out[(m + k) % q, m] = omega ** (j * m)
    return out


def pauli_from_label(mu: int, q: int) -> np.ndarray:
    return generalized_pauli(mu % q, mu // q, q)


def default_probe(q: int) -> np.ndarray:
    """sigma_z at q = 2, the clock matrix otherwise."""
    return generalized_pauli(1, 0, q)


def commutator_sum(nu: int, q: int) -> float:
    """sum over mu = 1..q^2-1 of the squared Frobenius norm of [sigma^mu, sigma^nu]."""
    b = pauli_from_label(nu, q)
    total = 0.0
    for mu in range(1, q * q):
        a = pauli_from_label(mu, q)
        c = a @ b - b @ a
        total += float(np.sum(np.abs(c) ** 2))
    return total
