"""Matrix-free light-like generators on replicated vectors.

Light-cone coordinates: the gate at (u, v) sits in circuit layer ``u + v`` on
the bond starting at site ``u - v``. A left-moving generator sweeps the gates
u = 0..w-1 of one light-like step v; a right-moving generator sweeps the gates
v = 1..tau of one slice u.

Vectors are site-major (site 0 slowest) with local dimension q**4. A leading
batch axis is supported: arrays of shape (n_batch, q**(4*w)) are mapped row by
row, which is how dense materialization stays cheap.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .errors import DimensionMismatch, TooLarge
from .gates import GateSource
from .replica import make_pair_state, one_state, zero_state

DENSE_LIMIT = 4096
BATCH_ELEMENTS = 1 << 22

LEFT = "left"
RIGHT = "right"


def _leg_matrix(gate, q, in_legs, out_legs):
    """Gate as a q^2 x q^2 map from the legs ``in_legs`` to ``out_legs``."""
    g4 = gate.reshape(q, q, q, q)
    return g4.transpose(tuple(out_legs) + tuple(in_legs)).reshape(q * q, q * q)


def _to_copy_major(vecs, q, n):
    """(nb, site-major) -> (nb, copy0 block, ..., copy3 block), each block q^n."""
    nb = vecs.shape[0]
    x = vecs.reshape((nb,) + (q,) * (4 * n))
    order = [0] + [1 + 4 * k + c for c in range(4) for k in range(n)]
    return x.transpose(order).reshape(nb, q**n, q**n, q**n, q**n)


def _to_site_major(x, q, n):
    nb = x.shape[0]
    x = x.reshape((nb,) + (q,) * (4 * n))
    order = [0] + [1 + c * n + k for k in range(n) for c in range(4)]
    return x.transpose(order).reshape(nb, q ** (4 * n))


def _sweep_dense(vecs, gates, q, start_vec, end_vec, in_legs, out_legs, forward):
    """Run a chain of replicated gates over a batch of vectors (any boundary vectors).

    Internally each of the four copies is stored as its own block of n + 1
    q-level legs, so every gate update is a small matmul on two adjacent legs.
    ``start_vec`` enters as the extra leg at the sweep origin, ``end_vec``
    closes the leg left over at the other end.
    """
    nb, n = vecs.shape[0], len(gates)
    v = _to_copy_major(vecs, q, n)
    s4 = start_vec.reshape(q, q, q, q)
    e4 = end_vec.reshape(q, q, q, q)
    if forward:
        x = np.einsum("abcd,nwxyz->nawbxcydz", s4, v)
        order = range(n)
    else:
        x = np.einsum("abcd,nwxyz->nwaxbyczd", s4, v)
        order = range(n - 1, -1, -1)
    block = q ** (n + 1)
    for k in order:
        m = _leg_matrix(gates[k], q, in_legs, out_legs)
        mats = (m, m.conj(), m, m.conj())
        for c in range(4):
            pre = nb * block**c * q**k
            post = q ** (n - 1 - k) * block ** (3 - c)
            x = np.matmul(mats[c], x.reshape(pre, q * q, post))
    if forward:
        x = x.reshape(nb, q**n, q, q**n, q, q**n, q, q**n, q)
        out = np.einsum("nwaxbyczd,abcd->nwxyz", x, e4, optimize=True)
    else:
        x = x.reshape(nb, q, q**n, q, q**n, q, q**n, q, q**n)
        out = np.einsum("nawbxcydz,abcd->nwxyz", x, e4, optimize=True)
    return _to_site_major(out, q, n)


def _chain_matrix(gates, q, in_legs, out_legs, forward):
    """Single-copy chain as a tensor [sites out, carry out, carry in, sites in]."""
    n = len(gates)
    dim = q ** (n + 1)
    x = np.eye(dim, dtype=complex)
    for k in range(n) if forward else range(n - 1, -1, -1):
        m = _leg_matrix(gates[k], q, in_legs, out_legs)
        x = np.matmul(m, x.reshape(dim * q**k, q * q, q ** (n - 1 - k)))
    if forward:
        t = x.reshape(q, q**n, q**n, q)
    else:
        t = x.reshape(q**n, q, q, q**n).transpose(1, 0, 3, 2)
    return np.ascontiguousarray(t.transpose(2, 3, 0, 1))


_PAIRINGS = (((0, 1), (2, 3)), ((0, 3), (1, 2)))


def _pair_factors(vec, q):
    """Split a four-copy boundary vector into two bond matrices, or None."""
    t = vec.reshape(q, q, q, q)
    for pairing in _PAIRINGS:
        mat = t.transpose(pairing[0] + pairing[1]).reshape(q * q, q * q)
        u, s, vh = np.linalg.svd(mat)
        if s[0] > 0 and s[1] <= 1e-12 * s[0]:
            return pairing, (u[:, 0] * s[0]).reshape(q, q), vh[0].reshape(q, q)
    return None


def _contract(cur_lab, cur, lab, op, keep):
    out = "".join(dict.fromkeys(c for c in cur_lab + lab if c in keep))
    return out, np.einsum(f"{cur_lab},{lab}->{out}", cur, op, optimize=True)


def _sweep(vecs, gates, q, start_vec, end_vec, in_legs, out_legs, forward):
    """Run a chain of replicated gates over a batch of vectors.

    The four copies only meet in the two boundary vectors, which are pair
    states and hence products of two bond matrices. Each copy is therefore a
    q^(n+1) chain matrix, and the copies are absorbed one at a time while at
    most two boundary legs stay open. Other boundary vectors use the dense sweep.
    """
    start = _pair_factors(start_vec, q)
    end = _pair_factors(end_vec, q)
    if start is None or end is None:
        return _sweep_dense(vecs, gates, q, start_vec, end_vec, in_legs, out_legs, forward)
    n = len(gates)
    m = _chain_matrix(gates, q, in_legs, out_legs, forward)
    mc = m.conj()
    factors = []
    for names, (pairing, f1, f2) in (("abcd", start), ("ABCD", end)):
        factors.append((names[pairing[0][0]] + names[pairing[0][1]], f1))
        factors.append((names[pairing[1][0]] + names[pairing[1][1]], f2))
    pending = [("oAai", m), ("pBbj", mc), ("rCck", m), ("sDdl", mc)]
    final = "noprs"
    lab, cur = "nijkl", _to_copy_major(vecs, q, n)
    while pending:
        op_lab, op = pending.pop(0)
        keep = "".join(l for l, _ in pending + factors) + final
        lab, cur = _contract(lab, cur, op_lab, op, keep)
        # absorb boundary factors as soon as they touch an open leg
        touching = [f for f in factors if set(f[0]) & set(lab)]
        while touching:
            f = touching[0]
            factors.remove(f)
            keep = "".join(l for l, _ in pending + factors) + final
            lab, cur = _contract(lab, cur, f[0], f[1], keep)
            touching = [f for f in factors if set(f[0]) & set(lab)]
    cur = np.einsum(f"{lab}->{final}", cur)
    return _to_site_major(cur, q, n)


def left_transfer(vecs, gates, q, head=None, tail=None, transpose=False):
    """One left-moving step: inputs on upper-right legs, outputs on lower-left legs.

    ``head`` is paired with the upper-left leg of the first gate and ``tail``
    with the lower-right leg of the last gate (defaults |0>, |1>).
    """
    head = zero_state(q) if head is None else head
    tail = one_state(q) if tail is None else tail
    if transpose:
        return _sweep(vecs, gates, q, tail, head, (2, 3), (0, 1), forward=False)
    return _sweep(vecs, gates, q, head, tail, (0, 1), (2, 3), forward=True)


def right_transfer(vecs, gates, q, top=None, bottom=None, transpose=False):
    """One right-moving slice: inputs on lower-right legs, outputs on upper-left legs.

    ``top`` closes the upper-right leg of the first gate, ``bottom`` the
    lower-left leg of the last one.
    """
    top = zero_state(q) if top is None else top
    bottom = one_state(q) if bottom is None else bottom
    if transpose:
        return _sweep(vecs, gates, q, top, bottom, (1, 0), (3, 2), forward=True)
    return _sweep(vecs, gates, q, bottom, top, (3, 2), (1, 0), forward=False)


def product_power(site_vec: np.ndarray, n: int) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for _ in range(n):
        out = np.kron(out, site_vec)
    return out


class LLGOperator:
    """Light-like generator T (or F = T minus its unit-eigenvalue projector part).

    For invariant circuits ``apply`` is pure. With a random gate stream each call
    without an explicit ``step`` consumes the gates of the next light-like step.
    """

    def __init__(
        self,
        source: GateSource,
        w: int,
        direction: str = LEFT,
        mode: str = "T",
        first_step: int = 1,
    ):
        if w < 1:
            raise ValueError("w must be >= 1")
        if direction not in (LEFT, RIGHT):
            raise ValueError(f"direction must be {LEFT!r} or {RIGHT!r}")
        if mode not in ("T", "F"):
            raise ValueError("mode must be 'T' or 'F'")
        self.source = source
        self.q = source.q
        self.w = w
        self.direction = direction
        self.mode = mode
        self.step = first_step
        self.site_dim = self.q**4
        self.dim = self.site_dim**w
        zero, one = zero_state(self.q), one_state(self.q)
        self.zero_site, self.one_site = zero, one
        # right and left unit-eigenvalue vectors
        if direction == LEFT:
            self.right_fixed = product_power(zero, w)
            self.left_fixed = product_power(one, w)
        else:
            self.right_fixed = product_power(one, w)
            self.left_fixed = product_power(zero, w)

    @property
    def invariant(self) -> bool:
        return self.source.invariant

    def with_mode(self, mode: str) -> "LLGOperator":
        return LLGOperator(self.source, self.w, self.direction, mode, self.step)

    def gates(self, step: int) -> list:
        if self.direction == LEFT:
            return [self.source(u + step, u - step) for u in range(self.w)]
        return [self.source(step + v, step - v) for v in range(1, self.w + 1)]

    def _take_step(self, step: Optional[int]) -> int:
        if step is None:
            step = self.step
            self.step += 1
        return step

    def _as_batch(self, v):
        v = np.asarray(v, dtype=complex)
        single = v.ndim == 1
        b = v[None, :] if single else v
        if b.shape[-1] != self.dim:
            raise DimensionMismatch(f"expected vectors of length {self.dim}, got {b.shape[-1]}")
        return b, single

    def _transfer(self, b, step, transpose):
        gates = self.gates(step)
        if self.direction == LEFT:
            return left_transfer(b, gates, self.q, transpose=transpose)
        return right_transfer(b, gates, self.q, transpose=transpose)

    def apply(self, v, step: Optional[int] = None) -> np.ndarray:
        b, single = self._as_batch(v)
        out = self._transfer(b, self._take_step(step), transpose=False)
        if self.mode == "F":
            out = out - np.outer(b @ self.left_fixed, self.right_fixed)
        return out[0] if single else out

    def apply_transpose(self, v, step: Optional[int] = None) -> np.ndarray:
        """Bilinear transpose: (x . T v) == (T^t x . v)."""
        b, single = self._as_batch(v)
        out = self._transfer(b, self._take_step(step), transpose=True)
        if self.mode == "F":
            out = out - np.outer(b @ self.right_fixed, self.left_fixed)
        return out[0] if single else out

    def apply_adjoint(self, v, step: Optional[int] = None) -> np.ndarray:
        return np.conj(self.apply_transpose(np.conj(v), step))

    def dense(self, step: int = 1, limit: int = DENSE_LIMIT) -> np.ndarray:
        """Materialize the operator column by column."""
        if self.dim > limit:
            raise TooLarge(f"dense LLG of dimension {self.dim} exceeds guard {limit}")
        chunk = max(1, BATCH_ELEMENTS // (self.dim * self.site_dim))
        out = np.empty((self.dim, self.dim), dtype=complex)
        for start in range(0, self.dim, chunk):
            stop = min(self.dim, start + chunk)
            basis = np.zeros((stop - start, self.dim), dtype=complex)
            basis[np.arange(stop - start), np.arange(start, stop)] = 1.0
            out[:, start:stop] = self.apply(basis, step=step).T
        return out


def power_apply(op, v, tau: int, first_step: int = 1) -> np.ndarray:
    """op^tau v, consuming steps first_step..first_step+tau-1 in circuit order."""
    for s in range(first_step, first_step + tau):
        v = op.apply(v, step=s)
    return v


def power_apply_adjoint(op, v, tau: int, first_step: int = 1) -> np.ndarray:
    for s in range(first_step + tau - 1, first_step - 1, -1):
        v = op.apply_adjoint(v, step=s)
    return v


def left_boundary_states(q: int, w: int, probe_a, probe_b=None):
    """Initial |R_w> and final <L_w| of the left-moving OTOC contraction.

    probe_a is the evolved operator, probe_b the static one; the decorations
    follow the generic-probe correlator tr[A^dag B^dag A B].
    """
    probe_b = probe_a if probe_b is None else probe_b
    a = np.asarray(probe_a, dtype=complex)
    b = np.asarray(probe_b, dtype=complex)
    top = make_pair_state(0, a.conj().T, a, q).vector
    bottom = make_pair_state(1, b.conj().T, b, q).vector
    right = np.kron(top, product_power(zero_state(q), w - 1))
    left = np.kron(product_power(one_state(q), w - 1), bottom)
    return left, right


def reduce_check(op: LLGOperator, m: int, psi: np.ndarray):
    """Residuals of the reducibility identities of F_w for invariant circuits.

    Returns (ket residual, bra residual) for
    F_w (|0^m> (x) psi) = |0^m> (x) F_{w-m} psi and the transposed statement
    with <1^m| attached on the far side.
    """
    w = op.w
    if not 1 <= m < w:
        raise ValueError("need 1 <= m < w")
    small = LLGOperator(op.source, w - m, op.direction, "F")
    if psi.shape[-1] != small.dim:
        raise DimensionMismatch("psi must live on w - m sites")
    big = op.with_mode("F")
    if op.direction == LEFT:
        pad_ket, pad_bra = product_power(op.zero_site, m), product_power(op.one_site, m)
        ket_in = np.kron(pad_ket, psi)
        ket_ref = np.kron(pad_ket, small.apply(psi, step=1))
        bra_in = np.kron(psi, pad_bra)
        bra_ref = np.kron(small.apply_transpose(psi, step=1), pad_bra)
    else:
        pad_ket, pad_bra = product_power(op.one_site, m), product_power(op.zero_site, m)
        ket_in = np.kron(psi, pad_ket)
        ket_ref = np.kron(small.apply(psi, step=1), pad_ket)
        bra_in = np.kron(pad_bra, psi)
        bra_ref = np.kron(pad_bra, small.apply_transpose(psi, step=1))
    r_ket = np.linalg.norm(big.apply(ket_in, step=1) - ket_ref)
    r_bra = np.linalg.norm(big.apply_transpose(bra_in, step=1) - bra_ref)
    return float(r_ket), float(r_bra)


def to_binary(v: np.ndarray) -> bytes:
    """Little-endian float64 interleaved (re, im)."""
    return np.asarray(v, dtype="<c16").tobytes()


def from_binary(data: bytes) -> np.ndarray:
    return np.frombuffer(data, dtype="<c16").astype(complex)
