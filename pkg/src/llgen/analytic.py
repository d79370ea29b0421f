"""Closed-form results for the Haar-averaged random circuit and special gate families.

The averaged generator acts on pair-state coefficients: a vector ``c`` of
length 2^w stands for sum_i c[i] |i_1 ... i_w> with |0>, |1> the pair states
(site 1 is the most significant bit).
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import List, Tuple

import numpy as np
from scipy import integrate
from scipy.special import gammaln, logsumexp

from .errors import QuadratureFailure, TooLarge

AVERAGED_DENSE_LIMIT = 2**12


def weingarten(i: int, j: int, n: int) -> float:
    """Two-copy Weingarten function on the permutations {identity, swap} of U(n)."""
    if n < 2:
        raise ValueError("Weingarten function needs N >= 2")
    if i == j:
        return 1.0 / (n * n - 1)
    return -1.0 / (n * (n * n - 1))


def subleading_z2(q: int) -> float:
    return q * q / (q * q + 1.0)


def pair_gram(q: int) -> np.ndarray:
    """<i|j> for the single-site pair states."""
    return np.array([[q, 1.0], [1.0, q]])


def m_tensor(q: int) -> np.ndarray:
    """Averaged gate tensor M[i1, i2, j1, j2] (upper pair i1 i2, lower pair j1 j2)."""
    r = q / (q * q + 1.0)
    m = np.zeros((2, 2, 2, 2))
    m[0, 0, 0, 0] = m[1, 1, 1, 1] = 1.0
    m[0, 0, 0, 1] = m[0, 0, 1, 0] = m[1, 1, 0, 1] = m[1, 1, 1, 0] = r
    return m


def m_tensor_from_weingarten(q: int) -> np.ndarray:
    """The same tensor assembled from Weingarten weights and pair-state overlaps."""
    gram = pair_gram(q)
    n = q * q
    m = np.zeros((2, 2, 2, 2))
    for i in range(2):
        for j1 in range(2):
            for j2 in range(2):
                m[i, i, j1, j2] = sum(
                    gram[j1, k] * gram[j2, k] * n * weingarten(i, k, n) for k in range(2)
                )
    return m


def averaged_apply(c: np.ndarray, q: int, w: int) -> np.ndarray:
    """Averaged generator on coefficient vectors; accepts (..., 2^w) batches.

    Entry (i, j) is prod_k M[i_k, i_k, i_{k-1}, j_k] times q when i_w = 1,
    with i_0 = 0. Applied site by site in O(w 2^w).
    """
    m = m_tensor(q)
    # mm[a, i, j] = M[i, i, a, j]: the previous output index a acts as the bond
    mm = np.einsum("iiaj->aij", m)
    c = np.asarray(c)
    if not np.iscomplexobj(c):
        c = c.astype(float)
    lead = c.shape[:-1]
    nb = int(np.prod(lead)) if lead else 1
    x = c.reshape(nb, 1, 2, 2 ** (w - 1))
    x = np.einsum("ij,nbjr->nbir", mm[0], x)
    for k in range(1, w):
        # layout (batch, outputs so far..., last output, j_k, rest)
        x = x.reshape(nb, 2 ** (k - 1), 2, 2, 2 ** (w - k - 1))
        x = np.einsum("aij,npajr->npair", mm, x)
    x = x.reshape(nb, 2 ** (w - 1), 2)
    x = x * np.array([1.0, q])
    return x.reshape(lead + (2**w,))


def averaged_apply_transpose(c: np.ndarray, q: int, w: int) -> np.ndarray:
    m = m_tensor(q)
    mm = np.einsum("iiaj->aij", m)
    c = np.asarray(c)
    if not np.iscomplexobj(c):
        c = c.astype(float)
    lead = c.shape[:-1]
    nb = int(np.prod(lead)) if lead else 1
    x = c.reshape(nb, 2 ** (w - 1), 2) * np.array([1.0, q])
    for k in range(w - 1, 0, -1):
        x = x.reshape(nb, 2 ** (k - 1), 2, 2, 2 ** (w - k - 1))
        x = np.einsum("aij,npair->npajr", mm, x)
    x = x.reshape(nb, 2, 2 ** (w - 1))
    x = np.einsum("ij,nir->njr", mm[0], x)
    return x.reshape(lead + (2**w,))


def averaged_llg(q: int, w: int) -> np.ndarray:
    """Dense 2^w averaged generator on pair-state coefficients."""
    if 2**w > AVERAGED_DENSE_LIMIT:
        raise TooLarge(f"dense averaged generator needs 2^{w} > {AVERAGED_DENSE_LIMIT}")
    return averaged_apply(np.eye(2**w), q, w).T


def triangular_order(w: int) -> List[int]:
    """Basis permutation making the averaged generator upper triangular.

    Built recursively: the first half is (0, order_{w-1}), the second half is
    (1, bitwise complement of order_{w-1}). Returned as flat indices.
    """
    order = [0, 1]
    for n in range(2, w + 1):
        full = (1 << (n - 1)) - 1
        order = order + [(1 << (n - 1)) | (full ^ m) for m in order]
    return order[: 2**w]


def hrm_eigenvalues(q: int, w: int) -> List[Tuple[float, int]]:
    """Exact spectrum of the averaged generator as (eigenvalue, multiplicity).

    n counts domain walls, n = 0..w, and the multiplicities C(w, n) fill all
    2^w dimensions.
    """
    r = q / (q * q + 1.0)
    out = []
    for n in range(w + 1):
        eps = r**n if n % 2 == 0 else q * r**n
        out.append((eps, comb(w, n)))
    return out


def averaged_spectrum_exact(q: int, w: int, check: bool = True) -> np.ndarray:
    """Eigenvalues read off the triangularized dense generator."""
    t = averaged_llg(q, w)
    order = triangular_order(w)
    tt = t[np.ix_(order, order)]
    if check and np.any(np.tril(tt, -1) != 0.0):
        raise ArithmeticError("reordered averaged generator is not upper triangular")
    return np.diag(tt).copy()


@dataclass(frozen=True)
class AveragedBoundary:
    """OTOC boundary data in coefficient space: C = 1 - left . T^tau right."""

    left: np.ndarray
    right: np.ndarray


def averaged_boundary(q: int, w: int) -> AveragedBoundary:
    """Boundary vectors for traceless unitary probes.

    The decorated initial state projects onto the pair span with coefficients
    g^{-1} (0, 1); the decorated final state overlaps |0>, |1> as (1, 0).
    """
    g_inv = np.linalg.inv(pair_gram(q))
    first = g_inv @ np.array([0.0, 1.0])
    right = first
    for _ in range(w - 1):
        right = np.kron(right, [1.0, 0.0])
    left = np.ones(1)
    for _ in range(w - 1):
        left = np.kron(left, [1.0, q])
    left = np.kron(left, [1.0, 0.0])
    return AveragedBoundary(left, right)


def _gram_root(q: int, power: float) -> np.ndarray:
    vals, vecs = np.linalg.eigh(pair_gram(q))
    return (vecs * vals**power) @ vecs.T


def kron_power(m: np.ndarray, w: int) -> np.ndarray:
    out = np.ones((1, 1))
    for _ in range(w):
        out = np.kron(out, m)
    return out


def _kron_apply(mats, x):
    """Apply a Kronecker product of 2x2 matrices site by site on (..., 2^w)."""
    lead = x.shape[:-1]
    w = len(mats)
    y = x.reshape(lead + (2,) * w)
    nl = len(lead)
    for k, m in enumerate(mats):
        y = np.moveaxis(np.tensordot(m, y, axes=([1], [nl + k])), 0, nl + k)
    return y.reshape(lead + (2**w,))


class AveragedHRMOperator:
    """Averaged generator in an orthonormal basis of the pair-state span.

    Coordinates y = G^{1/2} c, so singular values are those of the physical
    operator. Shares the apply/adjoint interface of the replicated generators.
    """

    direction = "left"

    def __init__(self, q: int, w: int, mode: str = "T"):
        self.q, self.w, self.mode = q, w, mode
        self.site_dim = 2
        self.dim = 2**w
        self.step = 1
        self._half = _gram_root(q, 0.5)
        self._half_inv = _gram_root(q, -0.5)
        self.zero_site = self._half @ np.array([1.0, 0.0])
        self.one_site = self._half @ np.array([0.0, 1.0])
        self.right_fixed = kron_power(self.zero_site[:, None], w)[:, 0]
        self.left_fixed = kron_power(self.one_site[:, None], w)[:, 0]
        self.invariant = True

    def with_mode(self, mode: str) -> "AveragedHRMOperator":
        return AveragedHRMOperator(self.q, self.w, mode)

    def apply(self, v, step=None):
        v = np.asarray(v)
        c = _kron_apply([self._half_inv] * self.w, v)
        y = _kron_apply([self._half] * self.w, averaged_apply(c, self.q, self.w))
        if self.mode == "F":
            y = y - (v @ self.left_fixed)[..., None] * self.right_fixed
        return y

    def apply_transpose(self, v, step=None):
        v = np.asarray(v)
        c = _kron_apply([self._half] * self.w, v)
        y = _kron_apply([self._half_inv] * self.w, averaged_apply_transpose(c, self.q, self.w))
        if self.mode == "F":
            y = y - (v @ self.right_fixed)[..., None] * self.left_fixed
        return y

    def apply_adjoint(self, v, step=None):
        return np.conj(self.apply_transpose(np.conj(v)))

    def dense(self, step: int = 1, limit: int = AVERAGED_DENSE_LIMIT) -> np.ndarray:
        if self.dim > limit:
            raise TooLarge("averaged generator too large for dense mode")
        return self.apply(np.eye(self.dim)).T

    def boundary(self):
        """(left bra, right ket) in orthonormal coordinates."""
        b = averaged_boundary(self.q, self.w)
        right = _kron_apply([self._half] * self.w, b.right)
        left = _kron_apply([self._half_inv] * self.w, b.left)
        return left, right


def averaged_otoc_series(q: int, w: int, tau_max: int) -> np.ndarray:
    """Exact ensemble-averaged OTOC C(w, tau) for tau = 1..tau_max."""
    b = averaged_boundary(q, w)
    out = np.empty(tau_max)
    v = b.right
    for t in range(tau_max):
        v = averaged_apply(v, q, w)
        out[t] = 1.0 - b.left @ v
    return out


def averaged_otoc_log_series(q: int, w: int, tau_max: int):
    """(sign, log|C|) for tau = 1..tau_max using F powers with running renormalization.

    C = -left . F^tau right, which stays accurate long after C drops below
    double-precision resolution of 1 - left . T^tau right.
    """
    b = averaged_boundary(q, w)
    ones = np.ones(1)
    for _ in range(w):
        ones = np.kron(ones, [1.0, q])
    zero = np.zeros(2**w)
    zero[0] = 1.0
    v = b.right.copy()
    log_scale = 0.0
    signs = np.empty(tau_max)
    logs = np.empty(tau_max)
    for t in range(tau_max):
        v = averaged_apply(v, q, w) - zero * (ones @ v)
        n = np.linalg.norm(v)
        v /= n
        log_scale += np.log(n)
        val = -(b.left @ v)
        signs[t] = np.sign(val)
        logs[t] = log_scale + np.log(abs(val)) if val != 0 else -np.inf
    return signs, logs


@dataclass(frozen=True)
class RestrictedLLG:
    q: int
    w: int
    matrix: np.ndarray
    chi: np.ndarray

    @property
    def fixed_row(self) -> np.ndarray:
        return np.append(self.chi, 1.0)


def chi_vector(q: int, w: int) -> np.ndarray:
    """[chi(w), ..., chi(1)] with chi(j) = q^(j-1) sqrt(q^2 - 1)."""
    j = np.arange(w, 0, -1)
    return q ** (j - 1.0) * np.sqrt(q * q - 1.0)


def _decay_block(q: int, w: int) -> np.ndarray:
    z2 = subleading_z2(q)
    r = q / (q * q + 1.0)
    block = np.zeros((w, w))
    for m in range(w):
        for n in range(w - m):
            block[m + n, m] = z2 * r**n
    return block


def restricted_Tprime(q: int, w: int) -> RestrictedLLG:
    """Generator restricted to span{|0^m 1^(w-m)>}, lower triangular, size w+1."""
    chi = chi_vector(q, w)
    block = _decay_block(q, w)
    t = np.zeros((w + 1, w + 1))
    t[:w, :w] = block
    t[w, :w] = chi - chi @ block
    t[w, w] = 1.0
    return RestrictedLLG(q, w, t, chi)


def restricted_basis(q: int, w: int) -> np.ndarray:
    """Coefficient vectors of the orthonormal basis e_0..e_w (columns)."""
    zero, one = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    v = q * one - zero
    norm = q ** (w / 2) * np.sqrt(q * q - 1.0)
    cols = []
    for m in range(w):
        vec = np.ones(1)
        for _ in range(m):
            vec = np.kron(vec, zero)
        vec = np.kron(vec, v)
        for _ in range(w - m - 1):
            vec = np.kron(vec, one)
        cols.append(vec / norm)
    vec = np.ones(1)
    for _ in range(w):
        vec = np.kron(vec, zero)
    cols.append(vec / q ** (w / 2))
    return np.array(cols).T


def log_binomial(n: float, k: float) -> float:
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def chi_R_power(q: int, w: int, tau: int) -> np.ndarray:
    """Components of chi R^tau, summed in the log domain."""
    z2 = subleading_z2(q)
    ks = np.arange(w)
    log_terms = gammaln(tau + ks) - gammaln(ks + 1) - gammaln(tau) + ks * np.log1p(-z2)
    log_terms = log_terms + tau * np.log(z2)
    chi = chi_vector(q, w)
    out = np.empty(w)
    for m in range(w):
        out[m] = chi[m] * np.exp(logsumexp(log_terms[: w - m]))
    return out


def hrm_leading_sv_exact(q: int, w: int, tau: int) -> float:
    """Norm of chi R^tau: the leading singular value on the restricted subspace up to a rank-one term."""
    return float(np.linalg.norm(chi_R_power(q, w, tau)))


def hrm_leading_sv_restricted(q: int, w: int, tau: int) -> float:
    """Largest singular value of F'^tau computed directly (moderate w only)."""
    t = restricted_Tprime(q, w).matrix.copy()
    t[w, :] = 0.0
    t[w, :w] = -(restricted_Tprime(q, w).chi @ _decay_block(q, w))
    p = np.linalg.matrix_power(t, tau)
    return float(np.linalg.svd(p, compute_uv=False)[0])


def butterfly_velocity(q: int) -> float:
    return (q * q - 1.0) / (q * q + 1.0)


def front_width(t: float, q: int) -> float:
    return 2.0 * q * np.sqrt(t) / (q * q + 1.0)


def f_tau_integrand(wp, tau: float, q: int):
    """Gaussian density of the front position along the light-like direction.

    Peaks at wp = tau / q^2, i.e. on the ray tau / w = q^2.
    """
    z2 = subleading_z2(q)
    wp = np.asarray(wp, dtype=float)
    var = z2 * (1 - z2) * (tau + wp)
    return np.sqrt(z2 / (2 * np.pi * (1 - z2) * (tau + wp))) * np.exp(
        -((z2 * wp - (1 - z2) * tau) ** 2) / (2 * var)
    )


def f_tau(x: float, tau: float, q: int, rtol: float = 1e-8) -> float:
    """Integral of the front density over [0, x tau]."""
    if x <= 0 or tau < 1:
        raise ValueError("need x > 0 and tau >= 1")
    upper = x * tau
    peak = tau / q**2
    points = [peak] if 0 < peak < upper else None
    val, err = integrate.quad(
        f_tau_integrand, 0.0, upper, args=(tau, q), epsrel=rtol, epsabs=0.0, points=points, limit=200
    )
    if not np.isfinite(val) or err > max(1e-6 * abs(val), 1e-14):
        raise QuadratureFailure(f"quadrature error {err:.2e} for value {val:.6e}")
    return float(val)


def ridge_tau(q: int, w: int, tau_grid) -> float:
    """tau where the leading singular value falls to half of q^w (linear interpolation)."""
    target = 0.5 * q**w
    vals = np.array([hrm_leading_sv_exact(q, w, int(t)) for t in tau_grid])
    taus = np.asarray(tau_grid, dtype=float)
    idx = np.nonzero((vals[:-1] >= target) & (vals[1:] < target))[0]
    if idx.size == 0:
        raise ValueError("half-maximum crossing not bracketed by tau_grid")
    i = idx[0]
    frac = (vals[i] - target) / (vals[i] - vals[i + 1])
    return float(taus[i] + frac * (taus[i + 1] - taus[i]))


def du_closed_form(q: int, w: int, tau: int):
    """Dual-unitary generators on the orthonormalized span of |0^w>, |1^w>.

    Returns (T^tau, F^tau, ||F^tau||).
    """
    t = np.eye(2)
    f = np.array([[0.0, -np.sqrt(q ** (2 * w) - 1.0)], [0.0, 1.0]])
    return t, f, float(q**w)


def localized_T(q: int, w: int) -> np.ndarray:
    """One localized step on e_0..e_w: q-fold shift, then the leak into e_w."""
    t = np.zeros((w + 1, w + 1))
    for m in range(w - 1):
        t[m + 1, m] = q
    t[w, w - 1] = np.sqrt(q * q - 1.0)
    t[w, w] = 1.0
    return t


def localized_closed_form(q: int, w: int, tau: int):
    """Localized-gate F^tau on the basis e_0..e_w, and its norm."""
    f = np.linalg.matrix_power(localized_T(q, w), tau)
    f[w, :] -= np.append(chi_vector(q, w), 1.0)
    norm = float(q**w) if tau < w else 0.0
    return f, norm
