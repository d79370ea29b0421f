"""Eigen- and singular-value analysis of light-like generators."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InsufficientTail, NoConvergence, TooLarge
from .llg import DENSE_LIMIT, power_apply, power_apply_adjoint

DELTA_CLUSTER = 1e-7


@dataclass
class SingularTriplet:
    value: float
    left: np.ndarray
    right: np.ndarray
    iterations: int
    residual: float
    converged: bool = True


def start_vector(dim: int, seed: int = 0, noise: float = 1e-2) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = np.ones(dim, dtype=complex) + noise * (rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
    return v / np.linalg.norm(v)


def leading_singular_triplet(
    op,
    tau: int,
    tol: float = 1e-10,
    max_iter: int = 2000,
    seed: int = 0,
    v0: Optional[np.ndarray] = None,
    first_step: int = 1,
    raise_on_fail: bool = True,
    zero_tol: float = 1e-12,
) -> SingularTriplet:
    """Power iteration on (F^tau)^dag F^tau.

    ``op`` should be in F mode. Steps first_step..first_step+tau-1 are used for
    every sweep, so random circuits keep one fixed realization of F^tau.
    An estimate that stays below ``zero_tol`` for three sweeps is returned as
    a numerically vanishing power.
    """
    if tau < 1:
        raise ValueError("tau must be >= 1")
    v = start_vector(op.dim, seed) if v0 is None else np.asarray(v0, dtype=complex) / np.linalg.norm(v0)
    lam_old = None
    u = np.zeros_like(v)
    tiny = 0
    for it in range(1, max_iter + 1):
        u = power_apply(op, v, tau, first_step)
        lam = float(np.linalg.norm(u))
        if lam < 1e-300:
            return SingularTriplet(0.0, u, v, it, 0.0)
        tiny = tiny + 1 if lam < zero_tol else 0
        if tiny >= 3:
            return SingularTriplet(lam, u / lam, v, it, 0.0)
        u = u / lam
        x = power_apply_adjoint(op, u, tau, first_step)
        residual = float(np.linalg.norm(x - lam * v)) / lam
        nx = np.linalg.norm(x)
        if lam_old is not None and abs(lam - lam_old) < tol * lam and residual < max(1e3 * tol, 1e-6):
            return SingularTriplet(lam, u, v, it, residual)
        lam_old = lam
        v = x / nx
    best = SingularTriplet(lam, u, v, max_iter, residual, converged=False)
    if raise_on_fail:
        raise NoConvergence(f"power iteration did not converge in {max_iter} sweeps", best)
    return best


# ---------------------------------------------------------------- clustering


def cluster_eigenvalues(values: Sequence[complex], delta: float = DELTA_CLUSTER) -> List[Tuple[complex, int]]:
    """Union-find clustering on |z_i - z_j| < delta; representative is the cluster mean."""
    z = np.asarray(values, dtype=complex)
    n = len(z)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    order = np.argsort(z.real)
    for a in range(n):
        i = order[a]
        for b in range(a + 1, n):
            j = order[b]
            if z[j].real - z[i].real >= delta:
                break
            if abs(z[i] - z[j]) < delta:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups: Dict[int, List[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    clusters = [(complex(np.mean(z[idx])), len(idx)) for idx in groups.values()]
    clusters.sort(key=lambda c: (-abs(c[0]), c[0].real, c[0].imag))
    return clusters


def multiplicity(clusters, z: complex, delta: float = DELTA_CLUSTER) -> int:
    return sum(m for rep, m in clusters if abs(rep - z) < delta)


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    clusters: List[Tuple[complex, int]]
    z2: complex
    alpha: Optional[float] = None
    phi: Optional[float] = None
    z2_fit: Optional[float] = None
    meta: Dict[str, object] = field(default_factory=dict)

    def to_json(self) -> str:
        def pair(z):
            return [float(np.real(z)), float(np.imag(z))]

        return json.dumps(
            {
                "eigenvalues": [pair(z) for z in self.eigenvalues],
                "clusters": [{"value": pair(z), "multiplicity": m} for z, m in self.clusters],
                "z2": pair(self.z2),
                "alpha": self.alpha,
                "phi": self.phi,
                "z2_fit": self.z2_fit,
                "meta": self.meta,
            },
            indent=1,
        )

    def to_csv_rows(self) -> List[List[object]]:
        return [[float(z.real), float(z.imag), m] for z, m in self.clusters]


def canonical(z: complex) -> complex:
    """Pick the member of a conjugate pair with non-negative imaginary part."""
    z = complex(z)
    return z.conjugate() if z.imag < 0 else z


def _dominant(values: np.ndarray) -> complex:
    mod = np.abs(values)
    top = np.max(mod)
    cand = values[mod > top - 1e-12 * max(top, 1.0)]
    # deterministic choice among equal-modulus values
    cand = sorted(cand, key=lambda z: (-z.imag >= 0, -z.real))
    return canonical(cand[0])


def eigen_spectrum(op, mode: str = "F", delta: float = DELTA_CLUSTER, limit: int = DENSE_LIMIT) -> SpectrumReport:
    """Dense eigendecomposition with clustering; z2 is the leading eigenvalue of F."""
    if op.dim > limit:
        raise TooLarge(f"dense spectrum of dimension {op.dim} exceeds guard {limit}")
    t = op.with_mode("T").dense()
    f = t - np.outer(op.right_fixed, op.left_fixed)
    mat = t if mode == "T" else f
    vals = np.linalg.eigvals(mat)
    z2 = _dominant(np.linalg.eigvals(f))
    norm_t = np.linalg.norm(t, 2)
    alpha = float(np.log(norm_t) / np.log(op.q))
    return SpectrumReport(vals, cluster_eigenvalues(vals, delta), z2, alpha, meta={"mode": mode, "w": op.w})


# ---------------------------------------------------------------- Arnoldi


@dataclass
class ArnoldiResult:
    value: complex
    dominant_ritz: complex
    cluster_size: int
    ritz_values: np.ndarray
    residual: float
    restarts: int
    matvecs: int


def ritz_cluster(ritz: np.ndarray, center: complex, max_radius: float = 1e-2, jump: float = 20.0) -> np.ndarray:
    """Indices of the tight group of Ritz values around ``center``.

    A defective eigenvalue shows up as several Ritz values spread on a small
    circle through ``center``. Candidates within ``max_radius`` are sorted by
    distance and the group is cut at the largest jump (at least ``jump``-fold)
    in that sequence; without such a jump only ``center`` is returned.
    """
    d = np.abs(ritz - center)
    order = np.argsort(d)
    ds = np.append(d[order], np.inf)
    n = int(np.sum(ds < max_radius))
    if n <= 1:
        return order[:1]
    ratios = ds[2 : n + 1] / np.maximum(ds[1:n], 1e-300)
    c = int(np.argmax(ratios))
    if ratios[c] < jump:
        return order[:1]
    return order[: c + 2]


def _expand(matvec, basis, h, start, stop):
    """Arnoldi steps start..stop-1: MGS plus one reorthogonalization pass."""
    count = 0
    for j in range(start, stop):
        x = matvec(basis[j])
        count += 1
        for _ in range(2):
            for i in range(j + 1):
                c = np.vdot(basis[i], x)
                h[i, j] += c
                x = x - c * basis[i]
        nrm = np.linalg.norm(x)
        h[j + 1, j] = nrm
        if nrm < 1e-14 * max(1.0, np.abs(h[: j + 1, j]).max()):
            return j + 1, count, True
        basis[j + 1] = x / nrm
    return stop, count, False


def arnoldi_dominant(
    matvec,
    dim: int,
    krylov_dim: int = 60,
    tol: float = 1e-12,
    max_restarts: int = 300,
    v0: Optional[np.ndarray] = None,
    seed: int = 0,
    keep: int = 24,
    stall_tol: float = 1e-11,
    patience: int = 8,
) -> ArnoldiResult:
    """Largest-modulus eigenvalue via Arnoldi with Krylov-Schur thick restarts.

    The basis grows to ``krylov_dim`` vectors, then the Schur vectors of the
    ``keep`` largest Ritz values are retained. Convergence is declared when
    the residual of the whole Ritz group around the dominant value is below
    ``tol`` times the projected norm; the reported value is the group mean,
    which stays accurate when the eigenvalue is defective.

    When a defective cluster sits next to a second, nearly coincident one the
    group residual can plateau. The iteration then also stops once the group
    mean has moved by less than ``stall_tol`` (relative) for ``patience``
    consecutive restarts.
    """
    from scipy.linalg import schur

    m = min(krylov_dim, dim)
    keep = max(1, min(keep, m - 2)) if m > 2 else 1
    v = start_vector(dim, seed) if v0 is None else np.asarray(v0, dtype=complex)
    basis = np.zeros((m + 1, dim), dtype=complex)
    h = np.zeros((m + 1, m), dtype=complex)
    basis[0] = v / np.linalg.norm(v)
    kept, matvecs = 0, 0
    theta, res, ritz = 0j, np.inf, np.zeros(0)
    steady = 0
    for restart in range(1, max_restarts + 1):
        size, count, invariant = _expand(matvec, basis, h, kept, m)
        matvecs += count
        hk = h[:size, :size]
        vals = np.linalg.eigvals(hk)
        thr = np.sort(np.abs(vals))[::-1][min(keep, size) - 1]
        t, z, sdim = schur(hk, output="complex", sort=lambda x: abs(x) >= thr * (1 - 1e-12))
        ritz = np.diag(t)
        b = h[size, size - 1] * z[size - 1, :] if not invariant else np.zeros(size, dtype=complex)
        dom = int(np.argmax(np.abs(ritz)))
        group = ritz_cluster(ritz, ritz[dom])
        previous, theta = theta, complex(np.mean(ritz[group]))
        steady = steady + 1 if abs(theta - previous) <= stall_tol * max(abs(theta), 1e-300) else 0
        scale = max(np.linalg.norm(hk, 2), 1e-300)
        res = float(np.linalg.norm(b[group]))
        if invariant or res <= tol * scale or steady >= patience:
            return ArnoldiResult(theta, complex(ritz[dom]), len(group), ritz, res, restart, matvecs)
        kept = max(sdim, len(group))
        kept = min(kept, size - 1)
        new_basis = z[:, :kept].T @ basis[:size]
        basis[:kept] = new_basis
        basis[kept] = basis[size]
        h[:] = 0
        h[:kept, :kept] = t[:kept, :kept]
        h[kept, :kept] = b[:kept]
    raise NoConvergence(
        f"Arnoldi did not converge after {max_restarts} restarts (residual {res:.2e})",
        ArnoldiResult(theta, theta, 0, ritz, res, max_restarts, matvecs),
    )


def subleading_eigenvalue(op, krylov_dim: int = 60, tol: float = 1e-12, seed: int = 0, **kw) -> complex:
    """Leading eigenvalue of F_w: dense for a single site, Arnoldi otherwise.

    Requires an invariant circuit (the operator must not change between applies).
    """
    f = op.with_mode("F")
    if f.w == 1:
        vals = np.linalg.eigvals(f.dense())
        return _dominant(vals)
    res = arnoldi_dominant(lambda x: f.apply(x, step=1), f.dim, krylov_dim, tol, seed=seed, **kw)
    return canonical(res.value)


# ---------------------------------------------------------------- recursion


@dataclass
class RecursionEntry:
    z: complex
    a_w: int
    a_w1: int
    a_w2: int
    new_block: int
    in_previous: bool
    consistent: bool
    borderline: bool


def recursion_check(
    clusters_w2, clusters_w1, clusters_w, z: complex, delta: float = DELTA_CLUSTER
) -> RecursionEntry:
    """Second difference a(z,w) - 2a(z,w-1) + a(z,w-2) of algebraic multiplicities.

    Pass ``None`` or an empty list for width 0. ``consistent`` is False when
    the value is nonzero although z is already an eigenvalue at width w-1.
    """
    a2 = multiplicity(clusters_w2 or [], z, delta)
    a1 = multiplicity(clusters_w1 or [], z, delta)
    a0 = multiplicity(clusters_w or [], z, delta)
    new = a0 - 2 * a1 + a2
    in_prev = a1 > 0
    border = any(delta <= abs(rep - z) < 10 * delta for rep, _ in (clusters_w or []))
    return RecursionEntry(z, a0, a1, a2, new, in_prev, (new == 0) or not in_prev, border)


def recursion_table(spectra: Sequence[Sequence[Tuple[complex, int]]], delta: float = DELTA_CLUSTER):
    """Recursion entries for every eigenvalue of the widest spectrum.

    ``spectra[k]`` holds the clusters of width k + 1; the zero eigenvalue that F
    inherits from removing the fixed point is skipped.
    """
    table = []
    w = len(spectra)
    full = [[]] + list(spectra)
    for rep, _ in spectra[-1]:
        if abs(rep) < delta:
            continue
        table.append(recursion_check(full[w - 2], full[w - 1], full[w], rep, delta))
    return table


# ---------------------------------------------------------------- tail fit


@dataclass
class TailFit:
    z2: float
    phi: float
    const: float
    start: int
    stop: int
    rms: float


def _fit(tau, logc):
    a = np.column_stack([np.log(tau), tau, np.ones_like(tau)])
    coef, *_ = np.linalg.lstsq(a, logc, rcond=None)
    resid = logc - a @ coef
    return coef, float(np.sqrt(np.mean(resid**2)))


def tail_fit(
    tau: Sequence[float],
    log_abs_c: Sequence[float],
    max_rms: float = 0.05,
    min_points: int = 8,
    tau_min: Optional[float] = None,
    n_starts: int = 200,
) -> TailFit:
    """Fit log|C| = phi log(tau) + tau log(z2) + const on the longest clean suffix.

    Candidate windows start at up to ``n_starts`` evenly spaced points and all
    end at the last sample; the earliest start whose RMS residual is below
    ``max_rms`` wins. ``tau_min`` removes early points before the search.
    """
    tau = np.asarray(tau, dtype=float)
    y = np.asarray(log_abs_c, dtype=float)
    ok = np.isfinite(y)
    if tau_min is not None:
        ok &= tau >= tau_min
    tau, y = tau[ok], y[ok]
    n = len(tau)
    if n < min_points:
        raise InsufficientTail(f"only {n} usable points; need {min_points}")
    starts = np.unique(np.linspace(0, n - min_points, min(n_starts, n - min_points + 1)).astype(int))
    for s in starts:
        coef, rms = _fit(tau[s:], y[s:])
        if rms < max_rms:
            return TailFit(float(np.exp(coef[1])), float(coef[0]), float(coef[2]), int(tau[s]), int(tau[-1]), rms)
    coef, rms = _fit(tau[starts[-1]:], y[starts[-1]:])
    raise InsufficientTail(f"no window reaches residual {max_rms} (best {rms:.3f})")
