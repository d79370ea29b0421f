"""Two-site gate models and circular-ensemble samplers.

Gate matrices are q^2 x q^2 with row/column index ``q * level_a + level_b``
where ``a`` is the left site of the bond.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import BadParams, ConfigError, WrongQ

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

MODELS = ("XYZc", "HRM", "RPM", "3PM", "Z2COE", "DU", "Localized")
ARRANGEMENTS = ("Invariant", "SpatialTemporalRandom")
QUBIT_ONLY = ("XYZc", "3PM", "Z2COE", "DU")

_MODEL_ALIASES = {m.lower(): m for m in MODELS}
_MODEL_ALIASES.update({"z2-coe": "Z2COE", "z2_coe": "Z2COE", "loc": "Localized", "xyz": "XYZc"})
_ARRANGEMENT_ALIASES = {
    "invariant": "Invariant",
    "inv": "Invariant",
    "spatialtemporalrandom": "SpatialTemporalRandom",
    "random": "SpatialTemporalRandom",
}

DEFAULT_PARAMS = {
    "XYZc": {"ax": 0.3, "ay": 0.4, "az": 0.5},
    "3PM": {"ax": 0.3, "ay": 0.4, "az": 0.5},
    "DU": {"az": 0.5},
    "RPM": {"eps": 1.0},
}


def sample_cue(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random n x n unitary (Ginibre QR with the diagonal phase fix)."""
    if n < 1:
        raise BadParams(f"matrix dimension must be >= 1, got {n}")
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    qmat, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return qmat * (d / np.abs(d))


def sample_coe(n: int, rng: np.random.Generator) -> np.ndarray:
    """Circular orthogonal ensemble sample W^T W."""
    w = sample_cue(n, rng)
    return w.T @ w


def xyz_gate(ax: float, ay: float, az: float) -> np.ndarray:
    """exp(i (ax XX + ay YY + az ZZ)), exact via the Bell basis.

    The three Pauli products commute and are diagonal on Bell states, with
    eigenvalue triples (XX, YY, ZZ) listed next to each state below.
    """
    s = 1 / np.sqrt(2.0)
    bell = np.array(
        [
            [s, 0, 0, s],   # Phi+ : (+1, -1, +1)
            [s, 0, 0, -s],  # Phi- : (-1, +1, +1)
            [0, s, s, 0],   # Psi+ : (+1, +1, -1)
            [0, s, -s, 0],  # Psi- : (-1, -1, -1)
        ],
        dtype=complex,
    ).T
    signs = np.array([[1, -1, 1], [-1, 1, 1], [1, 1, -1], [-1, -1, -1]], dtype=float)
    phases = np.exp(1j * signs @ np.array([ax, ay, az], dtype=float))
    return (bell * phases) @ bell.conj().T


def swap_gate(q: int) -> np.ndarray:
    u = np.zeros((q * q, q * q), dtype=complex)
    for a in range(q):
        for b in range(q):
            u[b * q + a, a * q + b] = 1.0
    return u


@dataclass(frozen=True)
class UnitaryGate:
    q: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.shape != (self.q * self.q, self.q * self.q):
            raise BadParams(f"gate must be {self.q**2}x{self.q**2}, got {self.matrix.shape}")

    def unitarity_residual(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


@dataclass(frozen=True)
class GateEnsembleSpec:
    model: str
    q: int = 2
    params: Dict[str, float] = field(default_factory=dict)
    seed: int = 0
    arrangement: str = "Invariant"

    def __post_init__(self):
        model = _MODEL_ALIASES.get(str(self.model).lower())
        if model is None:
            raise ConfigError(f"unknown model {self.model!r}; choose from {MODELS}")
        arrangement = _ARRANGEMENT_ALIASES.get(str(self.arrangement).lower())
        if arrangement is None:
            raise ConfigError(f"unknown arrangement {self.arrangement!r}")
        object.__setattr__(self, "model", model)
        object.__setattr__(self, "arrangement", arrangement)
        merged = dict(DEFAULT_PARAMS.get(model, {}))
        merged.update(self.params or {})
        object.__setattr__(self, "params", merged)
        if self.q < 2:
            raise WrongQ(f"q must be >= 2, got {self.q}")
        if model in QUBIT_ONLY and self.q != 2:
            raise WrongQ(f"model {model} requires q = 2")
        if model == "RPM" and merged["eps"] < 0:
            raise BadParams("RPM variance eps must be non-negative")

    @property
    def invariant(self) -> bool:
        return self.arrangement == "Invariant"

    def with_seed(self, seed: int) -> "GateEnsembleSpec":
        return GateEnsembleSpec(self.model, self.q, dict(self.params), seed, self.arrangement)

    def to_config(self) -> Dict[str, str]:
        params = ",".join(f"{k}:{v!r}" for k, v in sorted(self.params.items()))
        return {
            "model": self.model,
            "q": str(self.q),
            "params": params,
            "seed": str(self.seed),
            "arrangement": self.arrangement,
        }

    @classmethod
    def from_config(cls, cfg: Dict[str, str]) -> "GateEnsembleSpec":
        if "model" not in cfg:
            raise ConfigError("model spec needs a 'model' key")
        params = {}
        raw = cfg.get("params", "")
        for item in filter(None, (p.strip() for p in raw.split(","))):
            try:
                key, value = item.split(":")
                params[key.strip()] = float(value)
            except ValueError as exc:
                raise ConfigError(f"bad params entry {item!r}") from exc
        try:
            q = int(cfg.get("q", 2))
            seed = int(cfg.get("seed", 0))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return cls(cfg["model"], q, params, seed, cfg.get("arrangement", "Invariant"))


def _zigzag(n: int) -> int:
    return 2 * n if n >= 0 else -2 * n - 1


def position_rng(seed: int, layer: int, site: int) -> np.random.Generator:
    """Independent stream for one circuit position, insensitive to build order."""
    entropy = [seed & 0xFFFFFFFFFFFFFFFF, _zigzag(layer), _zigzag(site)]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def _dressed(core: np.ndarray, rng: np.random.Generator, q: int) -> np.ndarray:
    pre = np.kron(sample_cue(q, rng), sample_cue(q, rng))
    post = np.kron(sample_cue(q, rng), sample_cue(q, rng))
    return pre @ core @ post


def _draw(spec: GateEnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    q, p = spec.q, spec.params
    model = spec.model
    if model == "XYZc":
        return xyz_gate(p["ax"], p["ay"], p["az"])
    if model == "3PM":
        return _dressed(xyz_gate(p["ax"], p["ay"], p["az"]), rng, q)
    if model == "DU":
        return _dressed(xyz_gate(np.pi / 4, np.pi / 4, p["az"]), rng, q)
    if model == "HRM":
        return sample_cue(q * q, rng)
    if model == "Localized":
        return np.kron(sample_cue(q, rng), sample_cue(q, rng))
    if model == "RPM":
        # draw the dressings first so the phase layer uses a fixed slot of the stream
        pre = np.kron(sample_cue(q, rng), sample_cue(q, rng))
        post = np.kron(sample_cue(q, rng), sample_cue(q, rng))
        phi = rng.normal(0.0, np.sqrt(p["eps"]), size=q * q)
        return pre @ (np.exp(1j * phi)[:, None] * post)
    if model == "Z2COE":
        outer = sample_coe(2, rng)
        inner = sample_coe(2, rng)
        u = np.zeros((4, 4), dtype=complex)
        u[np.ix_([0, 3], [0, 3])] = outer
        u[np.ix_([1, 2], [1, 2])] = inner
        return u
    raise ConfigError(f"unhandled model {model}")


def build_gate(spec: GateEnsembleSpec, position: Tuple[int, int] = (0, 0)) -> UnitaryGate:
    """Gate at circuit position (layer, site); invariant circuits ignore the position."""
    if spec.invariant:
        rng = np.random.default_rng(np.random.SeedSequence([spec.seed & 0xFFFFFFFFFFFFFFFF]))
    else:
        layer, site = position
        rng = position_rng(spec.seed, layer, site)
    return UnitaryGate(spec.q, _draw(spec, rng))


def check_dual_unitary(u, q: Optional[int] = None, tol: float = 1e-12) -> Tuple[bool, float]:
    """Reshuffle (a,b;c,d) -> (a,c;b,d) and test unitarity of the result."""
    if isinstance(u, UnitaryGate):
        q, m = u.q, u.matrix
    else:
        m = np.asarray(u)
        q = q or int(round(np.sqrt(m.shape[0])))
    t = m.reshape(q, q, q, q).transpose(0, 2, 1, 3).reshape(q * q, q * q)
    residual = float(np.max(np.abs(t.conj().T @ t - np.eye(q * q))))
    return residual < tol, residual


class GateSource:
    """Gate lookup by circuit position with caching; one shared gate when invariant."""

    def __init__(self, spec: GateEnsembleSpec, gate: Optional[np.ndarray] = None):
        self.spec = spec
        self.q = spec.q
        self._fixed = gate if gate is not None else (build_gate(spec).matrix if spec.invariant else None)
        self._cache: Dict[Tuple[int, int], np.ndarray] = {}

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, q: int) -> "GateSource":
        spec = GateEnsembleSpec("HRM", q)
        return cls(spec, np.asarray(matrix, dtype=complex))

    @property
    def invariant(self) -> bool:
        return self._fixed is not None

    def __call__(self, layer: int, site: int) -> np.ndarray:
        if self._fixed is not None:
            return self._fixed
        key = (layer, site)
        g = self._cache.get(key)
        if g is None:
            g = build_gate(self.spec, key).matrix
            self._cache[key] = g
        return g
