"""Level-spacing statistics of two-layer Floquet operators on periodic chains.

Symmetry sectors are built from orbit bases of the two-site translation; any
further involutions are resolved by diagonalizing their projection onto the
sector. Spacings are taken between sorted eigenphases, wrap-around included,
and normalized to unit mean (circular ensembles have flat density, so no
unfolding is applied).
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

from .bruteforce import _left_mul
from .errors import NotSymmetric, TooLarge
from .gates import GateSource, sample_coe, sample_cue

FLOQUET_LIMIT = 2**14
COMMUTE_TOL = 1e-8
HIST_EDGES = np.round(np.arange(0.0, 4.0 + 1e-9, 0.1), 10)


def _digits(q: int, n_sites: int) -> np.ndarray:
    """(q^L, L) table of site levels, site 0 most significant."""
    idx = np.arange(q**n_sites)
    return np.stack([(idx // q ** (n_sites - 1 - k)) % q for k in range(n_sites)], axis=1)


def translation_permutation(q: int, n_sites: int, shift: int = 1) -> np.ndarray:
    """perm[i] = index of the state obtained by moving every site j to j + shift."""
    d = _digits(q, n_sites)
    moved = np.roll(d, shift, axis=1)
    weights = q ** np.arange(n_sites - 1, -1, -1)
    return moved @ weights


def _layer(gate_at, layer: int, q: int, n_sites: int) -> np.ndarray:
    """Gates on bonds (0,1), (2,3), ... as one dense kron product."""
    out = np.ones((1, 1), dtype=complex)
    for k in range(0, n_sites, 2):
        out = np.kron(out, gate_at(layer, k))
    return out


def build_floquet(source: GateSource, n_sites: int) -> np.ndarray:
    """One period (two brick layers) on a periodic chain: odd bonds act first.

    The odd layer is the even layer conjugated by a one-site translation, so
    the wrap-around bond (L-1, 0) keeps site L-1 as its left leg.
    """
    q = source.q
    if n_sites % 2 or n_sites < 2:
        raise ValueError("chain length must be even and >= 2")
    dim = q**n_sites
    if dim > FLOQUET_LIMIT:
        raise TooLarge(f"q^L = {dim} exceeds {FLOQUET_LIMIT}")
    perm = translation_permutation(q, n_sites, 1)
    inv = np.argsort(perm)
    shifted = _layer(lambda s, k: source(s, k + 1), 1, q, n_sites)
    # T U T^dag with (T psi)[perm[i]] = psi[i]
    out = shifted[np.ix_(inv, inv)]
    for k in range(0, n_sites, 2):
        out = _left_mul(out, source(2, k), k, n_sites, q)
    return out


@dataclass
class Symmetry:
    """Unitary involution acting on column blocks."""

    name: str
    apply: Callable[[np.ndarray], np.ndarray]
    optional: bool = False


def z_parity(n_sites: int) -> Symmetry:
    sign = (-1.0) ** _digits(2, n_sites).sum(axis=1)
    return Symmetry("Zparity", lambda x: sign[:, None] * x)


def x_parity(n_sites: int, optional: bool = True) -> Symmetry:
    flip = (2**n_sites - 1) - np.arange(2**n_sites)
    return Symmetry("Xparity", lambda x: x[flip], optional)


def commutation_residual(f: np.ndarray, sym: Symmetry, n_vectors: int = 3, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((f.shape[0], n_vectors)) + 1j * rng.standard_normal((f.shape[0], n_vectors))
    v /= np.linalg.norm(v, axis=0)
    return float(np.linalg.norm(f @ sym.apply(v) - sym.apply(f @ v)))


def momentum_basis(q: int, n_sites: int, m: int, mask: Optional[np.ndarray] = None) -> np.ndarray:
    """Orthonormal columns spanning the T_2 eigenspace with eigenvalue exp(2 pi i m / (L/2)).

    ``mask`` restricts representatives to a translation-invariant subset of
    basis states (a diagonal symmetry sector).
    """
    n_cells = n_sites // 2
    perm = translation_permutation(q, n_sites, 2)
    dim = q**n_sites
    seen = np.zeros(dim, dtype=bool)
    cols = []
    for r in range(dim):
        if seen[r] or (mask is not None and not mask[r]):
            continue
        orbit = [r]
        s = perm[r]
        while s != r:
            orbit.append(s)
            s = perm[s]
        seen[orbit] = True
        p = len(orbit)
        if (m * p) % n_cells:
            continue
        col = np.zeros(dim, dtype=complex)
        phases = np.exp(-2j * np.pi * m * np.arange(p) / n_cells)
        col[orbit] = phases / np.sqrt(p)
        cols.append(col)
    return np.array(cols).T if cols else np.zeros((dim, 0), dtype=complex)


def momentum_projector(q: int, n_sites: int, m: int) -> np.ndarray:
    """Dense (1/N) sum_j exp(-2 pi i m j / N) T_2^j; small chains only."""
    n_cells = n_sites // 2
    perm = translation_permutation(q, n_sites, 2)
    dim = q**n_sites
    t2 = np.zeros((dim, dim))
    t2[perm, np.arange(dim)] = 1.0
    out = np.zeros((dim, dim), dtype=complex)
    power = np.eye(dim)
    for j in range(n_cells):
        out += np.exp(-2j * np.pi * m * j / n_cells) * power
        power = t2 @ power
    return out / n_cells


def _split(basis: np.ndarray, sym: Symmetry, sign: int) -> np.ndarray:
    s = basis.conj().T @ sym.apply(basis)
    s = 0.5 * (s + s.conj().T)
    vals, vecs = np.linalg.eigh(s)
    keep = np.abs(vals - sign) < 1e-6
    return basis @ vecs[:, keep]


@dataclass
class FloquetSpectrum:
    n_sites: int
    sector: Dict[str, int]
    phases: np.ndarray
    spacings: np.ndarray
    skipped: List[str] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.phases)


def unit_spacings(phases: np.ndarray) -> np.ndarray:
    """Consecutive gaps of sorted phases on the circle, scaled to unit mean."""
    th = np.sort(np.mod(phases, 2 * np.pi))
    gaps = np.diff(np.append(th, th[0] + 2 * np.pi))
    return gaps / gaps.mean()


def sector_spacings(
    f: np.ndarray,
    q: int,
    n_sites: int,
    momentum: int = 1,
    symmetries: Sequence[Symmetry] = (),
    signs: Optional[Sequence[int]] = None,
    diagonal_mask: Optional[np.ndarray] = None,
) -> FloquetSpectrum:
    """Eigenphase spacings of ``f`` inside one symmetry sector.

    A declared symmetry must commute with ``f``; a failing optional one is
    skipped with a warning, a failing required one raises NotSymmetric.
    """
    signs = [1] * len(symmetries) if signs is None else list(signs)
    perm = translation_permutation(q, n_sites, 2)
    t2 = Symmetry("T2", lambda x: x[np.argsort(perm)])
    r = commutation_residual(f, t2)
    if r > COMMUTE_TOL:
        raise NotSymmetric(f"Floquet operator breaks two-site translation (residual {r:.2e})")
    basis = momentum_basis(q, n_sites, momentum, diagonal_mask)
    sector = {"momentum": momentum}
    skipped = []
    for sym, sign in zip(symmetries, signs):
        r = commutation_residual(f, sym)
        if r > COMMUTE_TOL:
            if sym.optional:
                warnings.warn(f"{sym.name} does not commute with the Floquet operator ({r:.1e}); not resolved")
                skipped.append(sym.name)
                continue
            raise NotSymmetric(f"{sym.name} does not commute (residual {r:.2e})")
        basis = _split(basis, sym, sign)
        sector[sym.name] = sign
    block = basis.conj().T @ (f @ basis)
    phases = np.angle(np.linalg.eigvals(block))
    return FloquetSpectrum(n_sites, sector, np.sort(np.mod(phases, 2 * np.pi)), unit_spacings(phases), skipped)


def z_parity_mask(n_sites: int, sign: int) -> np.ndarray:
    return (-1) ** _digits(2, n_sites).sum(axis=1) == sign


# ---------------------------------------------------------------- reference ensembles


def sample_matrix_power_ensemble(kind: str, n_power: int, dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Pooled unit-mean spacings of S^n for S drawn from CUE or COE.

    Eigenphases of S^n are n times those of S, so S^n is never formed.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    draw = {"CUE": sample_cue, "COE": sample_coe}[kind.upper()]
    out = []
    for _ in range(count):
        th = np.angle(np.linalg.eigvals(draw(dim, rng)))
        out.append(unit_spacings(n_power * th))
    return np.concatenate(out)


def ks_distance(sample: np.ndarray, reference) -> float:
    """Two-sample KS when ``reference`` is an array, one-sample against a scipy name otherwise."""
    if isinstance(reference, str):
        return float(stats.kstest(sample, reference).statistic)
    return float(stats.ks_2samp(sample, reference).statistic)


def histogram(spacings: np.ndarray):
    """(left edges, right edges, density) with bin width 0.1 on [0, 4]."""
    counts, edges = np.histogram(spacings, bins=HIST_EDGES)
    density = counts / (len(spacings) * 0.1)
    return edges[:-1], edges[1:], density


def ks_summary(samples: Dict[str, np.ndarray], references: Dict[str, object]) -> str:
    out = {}
    for name, s in samples.items():
        out[name] = {ref: ks_distance(s, r) for ref, r in references.items()}
        out[name]["count"] = int(len(s))
    return json.dumps(out, indent=2, sort_keys=True)


# ---------------------------------------------------------------- model drivers


def pooled_spacings(sources: Sequence[GateSource], n_sites: int, sectors: Sequence[dict]) -> np.ndarray:
    """Spacings pooled over realizations and sectors.

    Each sector dict holds ``momentum`` and optionally ``zparity`` and
    ``xparity`` (qubit chains only).
    """
    out = []
    for src in sources:
        f = build_floquet(src, n_sites)
        for sec in sectors:
            mask = z_parity_mask(n_sites, sec["zparity"]) if "zparity" in sec else None
            syms, signs = [], []
            if "xparity" in sec:
                syms.append(x_parity(n_sites))
                signs.append(sec["xparity"])
            spec = sector_spacings(f, src.q, n_sites, sec["momentum"], syms, signs, mask)
            out.append(spec.spacings)
    return np.concatenate(out)
