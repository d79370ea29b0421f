"""Dense Heisenberg evolution on an open brick-wall chain (small chains only)."""
from __future__ import annotations

import numpy as np

from .errors import LightConeClipped, TooLarge

BRUTE_LIMIT = 2**14


def _left_mul(m: np.ndarray, g: np.ndarray, pos: int, n_sites: int, q: int) -> np.ndarray:
    """(1 (x) g (x) 1) m with g on chain positions pos, pos+1."""
    rows = m.shape[0]
    x = m.reshape(q**pos, q * q, (rows // q ** (pos + 2)) * m.shape[1])
    return np.einsum("ij,ajb->aib", g, x, optimize=True).reshape(m.shape)


def _right_mul(m: np.ndarray, g: np.ndarray, pos: int, n_sites: int, q: int) -> np.ndarray:
    """m (1 (x) g (x) 1)."""
    cols = m.shape[1]
    x = m.reshape(m.shape[0] * q**pos, q * q, cols // q ** (pos + 2))
    return np.einsum("aib,ij->ajb", x, g, optimize=True).reshape(m.shape)


def embed_site(op: np.ndarray, pos: int, n_sites: int, q: int) -> np.ndarray:
    return np.kron(np.kron(np.eye(q**pos), op), np.eye(q ** (n_sites - pos - 1)))


def heisenberg_operator(gate_at, probe: np.ndarray, t: int, first_label: int, n_sites: int, q: int):
    """U^dag (probe at site label 0) U with U = layer(1) layer(2) ... layer(t).

    Layer s holds gates on bonds (i, i+1) with i = s mod 2, for every bond
    inside the chain; ``gate_at(s, i)`` supplies them. Gates that do not
    touch the current support cancel, so the operator is only stored on its
    support. Returns (matrix, lowest label of the support).
    """
    last_label = first_label + n_sites - 1
    lo = hi = 0
    a = np.asarray(probe, dtype=complex)
    for s in range(1, t + 1):
        bonds = [
            i for i in range(lo - 1, hi + 1)
            if (i - s) % 2 == 0 and first_label <= i and i + 1 <= last_label
        ]
        if not bonds:
            continue
        new_lo, new_hi = min(lo, bonds[0]), max(hi, bonds[-1] + 1)
        a = np.kron(np.kron(np.eye(q ** (lo - new_lo)), a), np.eye(q ** (new_hi - hi)))
        lo, hi = new_lo, new_hi
        n = hi - lo + 1
        for i in bonds:
            g = gate_at(s, i)
            a = _left_mul(a, g.conj().T, i - lo, n, q)
            a = _right_mul(a, g, i - lo, n, q)
    return a, lo


def bruteforce_otoc(gate_at, q: int, x: int, t: int, probe_a, probe_b=None, n_sites=None) -> complex:
    """1 - tr[A^dag B^dag A B] / q^L with A the evolved probe at site 0, B the static one at x."""
    n_sites = 2 * t + 2 if n_sites is None else n_sites
    if q**n_sites > BRUTE_LIMIT:
        raise TooLarge(f"q^L = {q**n_sites} exceeds the brute-force guard {BRUTE_LIMIT}")
    if n_sites < 2 * t + 2 and not (t == 0 and n_sites >= 2):
        raise LightConeClipped(f"chain of {n_sites} sites is too short for t = {t}")
    first_label = -(n_sites // 2)
    if not (first_label <= x < first_label + n_sites):
        raise LightConeClipped(f"site {x} is outside the chain")
    probe_b = probe_a if probe_b is None else probe_b
    a, lo = heisenberg_operator(gate_at, np.asarray(probe_a, dtype=complex), t, first_label, n_sites, q)
    n = a.shape[0]
    span = int(round(np.log(n) / np.log(q)))
    pos = x - lo
    if not 0 <= pos < span:
        # B sits where A acts as the identity: the two commute
        return 0j
    b = np.asarray(probe_b, dtype=complex)
    ab = np.einsum("aib,ij->ajb", a.reshape(n * q**pos, q, -1), b).reshape(n, n)
    ba = np.einsum("ij,ajb->aib", b, a.reshape(q**pos, q, -1)).reshape(n, n)
    # tr[A^dag B^dag A B] = sum conj(BA)_ij (AB)_ij; sites outside the support contribute q each
    tr = np.vdot(ba, ab)
    return 1.0 - tr / n
