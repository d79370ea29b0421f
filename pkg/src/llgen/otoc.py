"""OTOC evaluation: left- and right-moving generators, dense Heisenberg evolution,
leading-singular-value approximation and the product-state variational ansatz.

Coordinates: a light-like point (w, tau) sits at x = w - tau - 1, t = w + tau - 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .bruteforce import BRUTE_LIMIT, bruteforce_otoc
from .errors import BadParams, DimensionGuard, NoConvergence, NumericalError
from .gates import GateEnsembleSpec, GateSource
from .llg import (
    LEFT,
    RIGHT,
    LLGOperator,
    left_boundary_states,
    power_apply,
    power_apply_adjoint,
    product_power,
    right_transfer,
)
from .replica import default_probe, make_pair_state, one_state, zero_state
from .spectral import SingularTriplet, leading_singular_triplet

CSV_COLUMNS = ("model", "seed", "q", "w", "tau", "x", "t", "method", "C_re", "C_im", "err_abs")

# bytes allowed for one apply; a sweep keeps a few arrays of q^(4w+2) complex numbers
MEMORY_BUDGET = 2 * 1024**3

Source = Union[GateEnsembleSpec, GateSource]


def circuit_coords(w: int, tau: int) -> Tuple[int, int]:
    return w - tau - 1, w + tau - 1


def light_cone_coords(x: int, t: int) -> Tuple[int, int]:
    if (t + x) % 2:
        raise BadParams(f"(x, t) = ({x}, {t}) has no integer light-cone coordinates")
    return (t + x) // 2 + 1, (t - x) // 2


def check_memory(q: int, w: int, budget: int = MEMORY_BUDGET) -> None:
    need = 3 * 16 * q ** (4 * w + 2)
    if need > budget:
        raise DimensionGuard(f"width {w} at q={q} needs about {need / 1024**3:.1f} GiB per sweep")


def as_source(src: Source) -> GateSource:
    return src if isinstance(src, GateSource) else GateSource(src)


def _probes(q, probe_a, probe_b):
    a = default_probe(q) if probe_a is None else np.asarray(probe_a, dtype=complex)
    b = a if probe_b is None else np.asarray(probe_b, dtype=complex)
    return a, b


@dataclass
class OtocPoint:
    w: int
    tau: int
    value: complex
    method: str
    err_abs: float = float("nan")

    @property
    def x(self) -> int:
        return circuit_coords(self.w, self.tau)[0]

    @property
    def t(self) -> int:
        return circuit_coords(self.w, self.tau)[1]


@dataclass
class OtocSeries:
    model: str
    q: int
    seed: int
    probe: str = "default"
    points: List[OtocPoint] = field(default_factory=list)

    def add(self, w, tau, value, method, err_abs=float("nan")) -> None:
        self.points.append(OtocPoint(w, tau, complex(value), method, float(err_abs)))

    def values(self, method: Optional[str] = None) -> np.ndarray:
        return np.array([p.value for p in self.points if method is None or p.method == method])

    def rows(self) -> List[list]:
        return [
            [self.model, self.seed, self.q, p.w, p.tau, p.x, p.t, p.method, p.value.real, p.value.imag, p.err_abs]
            for p in self.points
        ]


def _series_for(src: GateSource) -> OtocSeries:
    return OtocSeries(src.spec.model, src.q, src.spec.seed)


# ---------------------------------------------------------------- exact routes


def otoc_llg_left(src: Source, w: int, tau_max: int, probe_a=None, probe_b=None) -> OtocSeries:
    """C(w, tau) for tau = 1..tau_max from powers of the left-moving generator.

    Both 1 - <L|T^tau|R> and -<L|F^tau|R> are propagated; the F value is
    reported and their difference is stored as ``err_abs``.
    """
    src = as_source(src)
    q = src.q
    check_memory(q, w)
    a, b = _probes(q, probe_a, probe_b)
    left, right = left_boundary_states(q, w, a, b)
    t_op = LLGOperator(src, w, LEFT, "T")
    f_op = t_op.with_mode("F")
    series = _series_for(src)
    vt, vf = right, right
    for tau in range(1, tau_max + 1):
        vt = t_op.apply(vt, step=tau)
        vf = f_op.apply(vf, step=tau)
        c_t = 1.0 - left @ vt
        c_f = -(left @ vf)
        series.add(w, tau, c_f, "left", abs(c_t - c_f))
    return series


def right_boundary_states(q: int, tau: int, src: GateSource, w: int, probe_a, probe_b):
    """(L~, R~) of the right-moving contraction; they absorb the first and last slices."""
    a, b = _probes(q, probe_a, probe_b)
    top = make_pair_state(0, a.conj().T, a, q).vector
    bottom = make_pair_state(1, b.conj().T, b, q).vector
    op = LLGOperator(src, tau, RIGHT)
    r = right_transfer(product_power(one_state(q), tau)[None], op.gates(w - 1), q, bottom=bottom)[0]
    l = right_transfer(product_power(zero_state(q), tau)[None], op.gates(0), q, top=top, transpose=True)[0]
    return l, r


def otoc_llg_right(src: Source, w: int, tau: int, probe_a=None, probe_b=None) -> complex:
    """1 - <L~|T_R^(w-2)|R~>, the slices u = w-2 .. 1 applied in that order.

    At w = 1 the single slice carries both probes.
    """
    if w < 1:
        raise BadParams("w must be >= 1")
    src = as_source(src)
    check_memory(src.q, tau)
    if w == 1:
        q = src.q
        a, b = _probes(q, probe_a, probe_b)
        top = make_pair_state(0, a.conj().T, a, q).vector
        bottom = make_pair_state(1, b.conj().T, b, q).vector
        gates = LLGOperator(src, tau, RIGHT).gates(0)
        r = right_transfer(product_power(one_state(q), tau)[None], gates, q, top=top, bottom=bottom)[0]
        return complex(1.0 - product_power(zero_state(q), tau) @ r)
    left, right = right_boundary_states(src.q, tau, src, w, probe_a, probe_b)
    op = LLGOperator(src, tau, RIGHT)
    v = right
    for u in range(w - 2, 0, -1):
        v = op.apply(v, step=u)
    return complex(1.0 - left @ v)


def otoc_bruteforce(
    src: Source, x: int, t: int, probe_a=None, probe_b=None, n_sites: Optional[int] = None, doubling: bool = False
) -> complex:
    """Dense Heisenberg evolution on an open chain centred on the evolved probe.

    With ``doubling`` the value is recomputed on a chain two sites longer (when
    that fits the size guard) and a mismatch above 1e-10 raises.
    """
    src = as_source(src)
    q = src.q
    a, b = _probes(q, probe_a, probe_b)
    n = 2 * t + 2 if n_sites is None else n_sites
    first = -(n // 2)
    if not first <= x < first + n and abs(x) > t:
        # the static probe lies outside the causal cone of the evolved one
        return 0j
    value = bruteforce_otoc(src, q, x, t, a, b, n)
    if doubling and q ** (n + 2) <= BRUTE_LIMIT:
        again = bruteforce_otoc(src, q, x, t, a, b, n + 2)
        if abs(again - value) > 1e-10:
            raise NumericalError(f"boundary leakage: {abs(again - value):.2e} between L={n} and L={n + 2}")
    return complex(value)


def triple_check(src: Source, w: int, tau: int, probe_a=None, probe_b=None) -> Tuple[complex, complex, complex]:
    """(left, right, brute force) at one light-like point."""
    src = as_source(src)
    c_left = otoc_llg_left(src, w, tau, probe_a, probe_b).points[-1].value
    c_right = otoc_llg_right(src, w, tau, probe_a, probe_b)
    x, t = circuit_coords(w, tau)
    c_bf = otoc_bruteforce(src, x, t, probe_a, probe_b)
    return c_left, c_right, c_bf


# ---------------------------------------------------------------- tail data


def log_series(op, left: np.ndarray, right: np.ndarray, tau_max: int, first_step: int = 1):
    """(tau, sign-or-phase, log|C|) with C = -<left|F^tau|right>, renormalizing as it goes.

    ``op`` must be in F mode. Works for replicated and averaged generators.
    """
    v = np.asarray(right, dtype=complex)
    log_scale = 0.0
    taus = np.arange(1, tau_max + 1)
    phase = np.empty(tau_max, dtype=complex)
    logs = np.empty(tau_max)
    for k, tau in enumerate(taus):
        v = op.apply(v, step=first_step + tau - 1)
        n = np.linalg.norm(v)
        if n == 0:
            phase[k:], logs[k:] = 0, -np.inf
            break
        v = v / n
        log_scale += math.log(n)
        val = -(left @ v)
        phase[k] = val / abs(val) if val != 0 else 0
        logs[k] = log_scale + math.log(abs(val)) if val != 0 else -np.inf
    return taus, phase, logs


def left_log_series(src: Source, w: int, tau_max: int, probe_a=None, probe_b=None):
    src = as_source(src)
    check_memory(src.q, w)
    a, b = _probes(src.q, probe_a, probe_b)
    left, right = left_boundary_states(src.q, w, a, b)
    return log_series(LLGOperator(src, w, LEFT, "F"), left, right, tau_max)


# ---------------------------------------------------------------- LSVA


def lsva_from_triplet(trip: SingularTriplet, left: np.ndarray, right: np.ndarray) -> complex:
    """-lambda <L|u><v|R> for F^tau ~ lambda |u><v|."""
    return complex(-trip.value * (left @ trip.left) * np.vdot(trip.right, right))


def lsva(op, left, right, tau: int, first_step: int = 1, **kw) -> Tuple[complex, SingularTriplet]:
    f = op.with_mode("F")
    trip = leading_singular_triplet(f, tau, first_step=first_step, **kw)
    return lsva_from_triplet(trip, left, right), trip


def lsva_left(src: Source, w: int, tau: int, probe_a=None, probe_b=None, **kw):
    src = as_source(src)
    check_memory(src.q, w)
    a, b = _probes(src.q, probe_a, probe_b)
    left, right = left_boundary_states(src.q, w, a, b)
    return lsva(LLGOperator(src, w, LEFT, "F"), left, right, tau, **kw)


def lsva_right(src: Source, w: int, tau: int, probe_a=None, probe_b=None, **kw):
    """LSVA of the right-moving form, using F_R^(w-2) between L~ and R~ (needs w >= 3).

    The slices are applied in the order w-2 .. 1, so the triplet is computed on
    a reversed step labelling of the same product.
    """
    if w < 3:
        raise BadParams("right-moving LSVA needs w >= 3")
    src = as_source(src)
    check_memory(src.q, tau)
    left, right = right_boundary_states(src.q, tau, src, w, probe_a, probe_b)
    op = _ReversedSteps(LLGOperator(src, tau, RIGHT, "F"), w - 1)
    return lsva(op, left, right, w - 2)


class _ReversedSteps:
    """View of an operator where step s means the original step ``offset - s``."""

    def __init__(self, op, offset: int):
        self.op, self.offset = op, offset
        self.dim = op.dim

    def with_mode(self, mode):
        return _ReversedSteps(self.op.with_mode(mode), self.offset)

    def apply(self, v, step=1):
        return self.op.apply(v, step=self.offset - step)

    def apply_adjoint(self, v, step=1):
        return self.op.apply_adjoint(v, step=self.offset - step)


# ---------------------------------------------------------------- variational ansatz


@dataclass
class VariationalResult:
    value: complex
    singular_value: float
    left: np.ndarray
    right: np.ndarray
    sweeps: int
    overlap: Optional[float] = None


def _unit(v):
    return v / np.linalg.norm(v)


def variational_lsva(
    op,
    left: np.ndarray,
    right: np.ndarray,
    tau: int,
    max_sweeps: int = 500,
    tol: float = 1e-8,
    exact: Optional[SingularTriplet] = None,
    seed: int = 0,
    first_step: int = 1,
) -> VariationalResult:
    """Product-state ansatz for the leading singular pair of F^tau.

    Left vector |0^(w-1)> (x) |a>, right vector |b> (x) |1^(w-1)>; a and b are
    updated alternately, each update being the exact optimum with the other
    one held fixed. Stops when the singular-value estimate moves by less than
    ``tol`` (relative).
    """
    w = op.w
    if w < 2:
        raise BadParams("variational ansatz needs w >= 2")
    f = op.with_mode("F")
    d = op.site_dim
    zero_pad = _unit(product_power(op.zero_site, w - 1))
    one_pad = _unit(product_power(op.one_site, w - 1))
    rng = np.random.default_rng(seed)
    b = _unit(rng.standard_normal(d) + 1j * rng.standard_normal(d))
    est_old = None
    for sweep in range(1, max_sweeps + 1):
        y = power_apply(f, np.kron(b, one_pad), tau, first_step)
        a = zero_pad.conj() @ y.reshape(-1, d)
        a_norm = np.linalg.norm(a)
        if a_norm == 0:
            a = np.zeros(d, dtype=complex)
            a[0] = 1.0
            est = 0.0
        else:
            a = a / a_norm
        z = power_apply_adjoint(f, np.kron(zero_pad, a), tau, first_step)
        b = z.reshape(d, -1) @ one_pad.conj()
        est = float(np.linalg.norm(b))
        if est == 0:
            break
        b = b / est
        if est_old is not None and abs(est - est_old) <= tol * est:
            break
        est_old = est
    else:
        raise NoConvergence(f"variational sweeps did not settle in {max_sweeps}", est)
    lam_l = np.kron(zero_pad, a)
    lam_r = np.kron(b, one_pad)
    value = complex(-est * (left @ lam_l) * np.vdot(lam_r, right))
    overlap = None
    if exact is not None:
        overlap = float(abs(np.vdot(lam_l, exact.left)) * abs(np.vdot(exact.right, lam_r)))
    return VariationalResult(value, est, lam_l, lam_r, sweep, overlap)


# ---------------------------------------------------------------- scans and ensembles


@dataclass
class ScanPoint:
    w: int
    tau: int
    exact: complex
    lsva: complex

    @property
    def error(self) -> float:
        return abs(self.exact - self.lsva)


def butterfly_scan(make_problem: Callable, w_max: int, tau_max: int, w_min: int = 1, **kw) -> List[ScanPoint]:
    """Grid of exact C and LSVA for w = w_min..w_max, tau = 1..tau_max.

    ``make_problem(w)`` returns (F-mode operator, left, right).
    """
    out = []
    for w in range(w_min, w_max + 1):
        op, left, right = make_problem(w)
        v = np.asarray(right, dtype=complex)
        for tau in range(1, tau_max + 1):
            v = op.apply(v, step=tau)
            exact = complex(-(left @ v))
            approx, _ = lsva(op, left, right, tau, **kw)
            out.append(ScanPoint(w, tau, exact, approx))
    return out


def circuit_problem(src: Source, probe_a=None, probe_b=None):
    src = as_source(src)
    a, b = _probes(src.q, probe_a, probe_b)

    def make(w):
        check_memory(src.q, w)
        left, right = left_boundary_states(src.q, w, a, b)
        return LLGOperator(src, w, LEFT, "F"), left, right

    return make


def averaged_problem(q: int):
    from .analytic import AveragedHRMOperator

    def make(w):
        op = AveragedHRMOperator(q, w, "F")
        left, right = op.boundary()
        return op, left, right

    return make


@dataclass
class EnsembleStat:
    mean: np.ndarray
    stderr: np.ndarray
    count: int


def ensemble_average(fn: Callable[[GateEnsembleSpec], np.ndarray], spec: GateEnsembleSpec, seeds: Iterable[int]) -> EnsembleStat:
    """Mean and standard error of ``fn`` over realizations, in seed order."""
    samples = np.array([np.asarray(fn(spec.with_seed(s))) for s in seeds])
    n = len(samples)
    mean = samples.mean(axis=0)
    err = samples.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros_like(mean, dtype=float)
    return EnsembleStat(mean, err, n)
