"""Command-line driver.

Every subcommand writes its results (CSV with a provenance line, plus JSON
where useful) and a gnuplot script into the output directory. Exit codes:
0 success, 2 configuration error, 3 numerical failure, 4 resource guard.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import analytic, levelstats, otoc, output, spectral, verify
from .bruteforce import BRUTE_LIMIT
from .errors import ConfigError, DimensionMismatch, LLGenError, NumericalError, ResourceGuard, TooLarge
from .gates import GateEnsembleSpec, GateSource
from .llg import DENSE_LIMIT, LEFT, LLGOperator, left_boundary_states
from .replica import pauli_from_label

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_RESOURCE = 0, 2, 3, 4

COMMANDS = ("otoc", "lsva", "variational", "spectrum", "tailfit", "avg-hrm", "special", "levelstats", "verify")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# ---------------------------------------------------------------- configuration


def read_config(path: str) -> Dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment; dashes and underscores are interchangeable."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value file; command-line flags take precedence")
    p.add_argument("--out", help=f"output directory (else ${output.OUT_DIR_ENV}, else config, else ./{output.DEFAULT_OUT_DIR})")
    p.add_argument("--threads", type=int, default=1, help="concurrent jobs; 1 gives bit-reproducible output")
    p.add_argument("--model", default="HRM")
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-seeds", type=int, default=1, help="realizations averaged (seeds seed..seed+n-1)")
    p.add_argument("--arrangement", default="Invariant", help="Invariant or SpatialTemporalRandom")
    p.add_argument("--params", default="", help="model parameters as k:v,k:v")
    p.add_argument("--probe-a", type=int, default=None, help="generalized Pauli label of the evolved probe")
    p.add_argument("--probe-b", type=int, default=None, help="label of the static probe (defaults to probe-a)")
    p.add_argument("--averaged", action="store_true", help="use the ensemble-averaged HRM generator")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="llgen", description="Light-like generators and OTOCs of brick-wall circuits")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("otoc", help="grid of C(w, tau) by left, right and brute-force routes")
    _common(p)
    p.add_argument("--w-max", type=int, default=3)
    p.add_argument("--tau-max", type=int, default=3)
    p.add_argument("--methods", default="left,right,bruteforce")

    p = sub.add_parser("lsva", help="exact C against the leading-singular-value approximation")
    _common(p)
    p.add_argument("--w", type=int, default=4)
    p.add_argument("--tau-max", type=int, default=24)
    p.add_argument("--right-tau-max", type=int, default=3, help="largest tau for the right-moving LSVA")
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("variational", help="product-state ansatz for the leading singular pair")
    _common(p)
    p.add_argument("--w", type=int, default=4)
    p.add_argument("--tau-max", type=int, default=60)
    p.add_argument("--tau-step", type=int, default=4)
    p.add_argument("--max-sweeps", type=int, default=500)

    p = sub.add_parser("spectrum", help="dense spectra, clustering and the multiplicity recursion")
    _common(p)
    p.add_argument("--w-max", type=int, default=2)
    p.add_argument("--delta", type=float, default=spectral.DELTA_CLUSTER)

    p = sub.add_parser("tailfit", help="fit log|C| = phi log tau + tau log z2 + c on the tail")
    _common(p)
    p.add_argument("--w", type=int, default=3)
    p.add_argument("--tau-max", type=int, default=400)
    p.add_argument("--tau-min", type=float, default=None)
    p.add_argument("--max-rms", type=float, default=0.05)

    p = sub.add_parser("avg-hrm", help="averaged-HRM oracles and the butterfly-cone curve")
    _common(p)
    p.add_argument("--w", type=int, default=30)
    p.add_argument("--tau-max", type=int, default=160)
    p.add_argument("--spectrum-w-max", type=int, default=8)

    p = sub.add_parser("special", help="dual-unitary and localized closed forms against numerics")
    _common(p)
    p.add_argument("--w-max", type=int, default=4)
    p.add_argument("--tau-max", type=int, default=6)

    p = sub.add_parser("levelstats", help="Floquet level spacings against circular ensembles")
    _common(p)
    p.add_argument("--L", type=int, default=12, dest="chain_length")
    p.add_argument("--momentum", type=int, default=1)
    p.add_argument("--ensemble", default="CUE")
    p.add_argument("--power", type=int, default=2)
    p.add_argument("--ref-count", type=int, default=20)

    p = sub.add_parser("verify", help="run the invariant suite")
    _common(p)
    p.add_argument("--w-max", type=int, default=3)
    p.add_argument("--n-vectors", type=int, default=100)
    return parser


def parse(argv: Sequence[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(cfg) - known - {"command"})
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg.pop("command", None)
        config_out = cfg.pop("out", None)
        sub.set_defaults(**{k: _coerce(sub, k, v) for k, v in cfg.items()})
        args = parser.parse_args(argv)
        args.config_out = config_out
    else:
        args.config_out = None
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    if args.n_seeds < 1:
        raise ConfigError("--n-seeds must be >= 1")
    return args


def _coerce(sub, dest, value):
    for action in sub._actions:
        if action.dest == dest:
            if isinstance(action, argparse._StoreTrueAction):
                return value.lower() in ("1", "true", "yes", "on")
            if action.type is not None:
                try:
                    return action.type(value)
                except ValueError as exc:
                    raise ConfigError(f"bad value for {dest}: {value}") from exc
    return value


# ---------------------------------------------------------------- helpers


def _spec(args, seed=None) -> GateEnsembleSpec:
    params = {}
    if args.params:
        for item in args.params.split(","):
            if ":" not in item:
                raise ConfigError(f"bad parameter entry {item!r}")
            k, v = item.split(":", 1)
            try:
                params[k.strip()] = float(v)
            except ValueError as exc:
                raise ConfigError(f"bad parameter value {item!r}") from exc
    return GateEnsembleSpec(args.model, args.q, params, args.seed if seed is None else seed, args.arrangement)


def _seeds(args) -> List[int]:
    return list(range(args.seed, args.seed + args.n_seeds))


def _probes(args):
    def get(label):
        if label is None:
            return None
        if not 0 <= label < args.q**2:
            raise ConfigError(f"probe label must lie in [0, {args.q**2})")
        return pauli_from_label(label, args.q)

    return get(args.probe_a), get(args.probe_b)


def _config_dict(args) -> Dict[str, object]:
    return {k: v for k, v in vars(args).items() if k not in ("threads", "out", "config_out")}


def _map(args, fn, items):
    if args.threads == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=args.threads) as pool:
        return list(pool.map(fn, items))


class Run:
    def __init__(self, args):
        self.args = args
        self.out = output.resolve_out_dir(args.out, args.config_out)
        self.config = _config_dict(args)
        self.written: List[Path] = []

    def csv(self, name, header, rows):
        self.written.append(output.write_csv(self.out / name, header, rows, self.config))

    def json(self, name, payload):
        self.written.append(output.write_json(self.out / name, payload, self.config))

    def plot(self, name, csv_name, title, plots, xlabel, ylabel, logscale="", extra=()):
        self.written.append(output.write_gnuplot(self.out / name, csv_name, title, plots, xlabel, ylabel, logscale, extra))


def _averaged_problem(args, w):
    op = analytic.AveragedHRMOperator(args.q, w, "F")
    left, right = op.boundary()
    return op, left, right


def _circuit_problem(args, w, seed=None):
    src = GateSource(_spec(args, seed))
    a, b = _probes(args)
    otoc.check_memory(args.q, w)
    left, right = left_boundary_states(args.q, w, *otoc._probes(args.q, a, b))
    return LLGOperator(src, w, LEFT, "F"), left, right


def _problem(args, w, seed=None):
    return _averaged_problem(args, w) if args.averaged else _circuit_problem(args, w, seed)


# ---------------------------------------------------------------- subcommands


def cmd_otoc(args, run: Run) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = set(methods) - {"left", "right", "bruteforce"}
    if bad:
        raise ConfigError(f"unknown methods: {', '.join(sorted(bad))}")
    _spec(args)
    otoc.check_memory(args.q, args.w_max)
    if "right" in methods:
        otoc.check_memory(args.q, args.tau_max)
    if "bruteforce" in methods:
        t_max = args.w_max + args.tau_max - 1
        if args.q ** (2 * t_max + 2) > BRUTE_LIMIT:
            raise TooLarge(f"brute force at t={t_max} needs q^{2 * t_max + 2} > {BRUTE_LIMIT}")
    a, b = _probes(args)

    def job(seed):
        src = GateSource(_spec(args, seed))
        rows = []
        for w in range(1, args.w_max + 1):
            series = otoc.otoc_llg_left(src, w, args.tau_max, a, b)
            for p in series.points:
                rows.append([src.spec.model, seed, args.q, w, p.tau, p.x, p.t, "left", p.value.real, p.value.imag, p.err_abs])
                if "right" in methods:
                    c = otoc.otoc_llg_right(src, w, p.tau, a, b)
                    rows.append([src.spec.model, seed, args.q, w, p.tau, p.x, p.t, "right", c.real, c.imag, abs(c - p.value)])
                if "bruteforce" in methods:
                    c = otoc.otoc_bruteforce(src, p.x, p.t, a, b)
                    rows.append([src.spec.model, seed, args.q, w, p.tau, p.x, p.t, "bruteforce", c.real, c.imag, abs(c - p.value)])
        return rows

    per_seed = _map(args, job, _seeds(args))
    rows = [r for chunk in per_seed for r in chunk]
    if args.n_seeds > 1:
        left_rows = [np.array([r[8] + 1j * r[9] for r in chunk if r[7] == "left"]) for chunk in per_seed]
        stack = np.array(left_rows)
        mean = stack.mean(axis=0)
        err = stack.std(axis=0, ddof=1) / np.sqrt(len(stack))
        for r, m, e in zip([r for r in per_seed[0] if r[7] == "left"], mean, err):
            rows.append([r[0], "mean", args.q, r[3], r[4], r[5], r[6], "left-mean", m.real, m.imag, float(np.abs(e))])
    worst = max((r[10] for r in rows if r[7] in ("right", "bruteforce")), default=0.0)
    run.csv("otoc.csv", otoc.CSV_COLUMNS, rows)
    run.plot("otoc.gp", "otoc.csv", f"OTOC {args.model} q={args.q}",
             [f"data using 'tau':(strcol('method') eq 'left' && column('w') == {w} ? column('C_re') : NaN) "
              f"with linespoints title 'w={w}'" for w in range(1, args.w_max + 1)], "tau", "C")
    print(f"otoc: {len(rows)} rows, largest route mismatch {worst:.2e}")
    return EXIT_OK


def cmd_lsva(args, run: Run) -> int:
    op, left, right = _problem(args, args.w)
    v = np.asarray(right, dtype=complex)
    rows = []
    a, b = _probes(args)
    for tau in range(1, args.tau_max + 1):
        v = op.apply(v, step=tau)
        exact = complex(-(left @ v))
        approx, trip = otoc.lsva(op, left, right, tau, tol=args.tol)
        c_right = float("nan")
        if not args.averaged and args.w >= 3 and tau <= args.right_tau_max:
            c_right = otoc.lsva_right(GateSource(_spec(args)), args.w, tau, a, b, tol=args.tol)[0].real
        rel = abs(exact - approx) / abs(exact) if exact != 0 else float("nan")
        rows.append([args.w, tau, exact.real, approx.real, c_right, trip.value, rel])
    run.csv("lsva.csv", ["w", "tau", "C_exact", "C_lsva_left", "C_lsva_right", "lambda", "rel_err"], rows)
    run.plot("lsva.gp", "lsva.csv", f"LSVA w={args.w}",
             ["data using 'tau':'C_exact' with points", "data using 'tau':'C_lsva_left' with lines",
              "data using 'tau':'C_lsva_right' with lines"], "tau", "C")
    print(f"lsva: final relative error {rows[-1][-1]:.3e}")
    return EXIT_OK


def cmd_variational(args, run: Run) -> int:
    op, left, right = _problem(args, args.w)
    rows = []
    for tau in range(args.tau_step, args.tau_max + 1, args.tau_step):
        exact = complex(-(left @ _power(op, right, tau)))
        approx, trip = otoc.lsva(op, left, right, tau)
        var = otoc.variational_lsva(op, left, right, tau, max_sweeps=args.max_sweeps, exact=trip)
        rows.append([args.w, tau, exact.real, approx.real, var.value.real, var.overlap, var.sweeps])
    run.csv("variational.csv", ["w", "tau", "C_exact", "C_lsva", "C_variational", "overlap", "sweeps"], rows)
    run.plot("variational.gp", "variational.csv", f"variational ansatz w={args.w}",
             ["data using 'tau':'C_exact' with points", "data using 'tau':'C_variational' with lines",
              "data using 'tau':'overlap' axes x1y2 with lines"], "tau", "C", extra=["set y2tics"])
    print(f"variational: overlap at tau={rows[-1][1]} is {rows[-1][5]:.5f}")
    return EXIT_OK


def _power(op, v, tau):
    v = np.asarray(v, dtype=complex)
    for s in range(1, tau + 1):
        v = op.apply(v, step=s)
    return v


def _averaged_report(q: int, w: int, delta: float) -> spectral.SpectrumReport:
    # the averaged generator is defective, so a dense eig would split its
    # multiplets by ~eps^(1/k); the triangular diagonal is exact
    vals = analytic.averaged_spectrum_exact(q, w).astype(complex)
    vals[np.argmin(np.abs(vals - 1.0))] = 0.0
    norm = np.linalg.norm(analytic.AveragedHRMOperator(q, w).dense(), 2)
    return spectral.SpectrumReport(vals, spectral.cluster_eigenvalues(vals, delta), complex(np.abs(vals).max()),
                                   float(np.log(norm) / np.log(q)), meta={"mode": "F", "w": w})


def cmd_spectrum(args, run: Run) -> int:
    site = 2 if args.averaged else args.q**4
    limit = analytic.AVERAGED_DENSE_LIMIT if args.averaged else DENSE_LIMIT
    if site**args.w_max > limit:
        raise TooLarge(f"dense spectrum at w={args.w_max} has dimension {site**args.w_max} > {limit}")
    clusters, rows, reports = [], [], {}
    for w in range(1, args.w_max + 1):
        if args.averaged:
            rep = _averaged_report(args.q, w, args.delta)
        else:
            op = LLGOperator(GateSource(_spec(args)), w)
            rep = spectral.eigen_spectrum(op, mode="F", delta=args.delta)
        clusters.append(rep.clusters)
        reports[str(w)] = {"z2": rep.z2, "alpha": rep.alpha, "clusters": [[c, m] for c, m in rep.clusters]}
        rows.extend([w, z.real, z.imag, m] for z, m in rep.clusters)
    table = spectral.recursion_table(clusters, args.delta)
    reports["recursion"] = [
        {"z": e.z, "a_w": e.a_w, "a_w1": e.a_w1, "a_w2": e.a_w2, "second_difference": e.new_block,
         "in_previous": e.in_previous, "consistent": e.consistent, "borderline": e.borderline}
        for e in table
    ]
    run.json("spectrum.json", reports)
    run.csv("spectrum.csv", ["w", "re", "im", "multiplicity"], rows)
    run.plot("spectrum.gp", "spectrum.csv", "spectrum of F_w",
             [f"data using 're':(column('w') == {w} ? column('im') : NaN) with points title 'w={w}'"
              for w in range(1, args.w_max + 1)], "Re z", "Im z",
             extra=["set parametric", "set size ratio -1"])
    print(f"spectrum: z2 = {reports[str(args.w_max)]['z2']}")
    return EXIT_OK


def cmd_tailfit(args, run: Run) -> int:
    if args.averaged:
        op, left, right = _averaged_problem(args, args.w)
        taus, phase, logs = otoc.log_series(op, left, right, args.tau_max)
    else:
        a, b = _probes(args)
        taus, phase, logs = otoc.left_log_series(GateSource(_spec(args)), args.w, args.tau_max, a, b)
    fit = spectral.tail_fit(taus, logs, max_rms=args.max_rms, tau_min=args.tau_min)
    sens = []
    for start in (fit.start, 2 * fit.start, 4 * fit.start, args.tau_max // 4, args.tau_max // 2):
        try:
            f = spectral.tail_fit(taus, logs, max_rms=args.max_rms, tau_min=start)
            sens.append({"tau_min": start, "phi": f.phi, "z2": f.z2, "rms": f.rms})
        except LLGenError:
            continue
    run.csv("tailfit.csv", ["tau", "log_abs_C", "phase_re", "phase_im"],
            [[int(t), float(l), p.real, p.imag] for t, l, p in zip(taus, logs, phase)])
    run.json("tailfit.json", {"w": args.w, "phi": fit.phi, "z2": fit.z2, "const": fit.const, "window": [fit.start, fit.stop],
                              "rms": fit.rms, "sensitivity": sens})
    run.plot("tailfit.gp", "tailfit.csv", f"tail of log|C| at w={args.w}",
             ["data using 'tau':'log_abs_C' with lines",
              f"{fit.phi}*log(x) + x*log({fit.z2}) + {fit.const} title 'fit'"], "tau", "log|C|")
    print(f"tailfit: phi = {fit.phi:.3f}, z2 = {fit.z2:.5f}, window [{fit.start}, {fit.stop}]")
    return EXIT_OK


def cmd_avg_hrm(args, run: Run) -> int:
    q, w = args.q, args.w
    spec_err = {}
    for ww in range(1, args.spectrum_w_max + 1):
        got = np.sort(analytic.averaged_spectrum_exact(q, ww))
        want = np.sort(np.concatenate([[e] * m for e, m in analytic.hrm_eigenvalues(q, ww)]))
        spec_err[str(ww)] = float(np.abs(got - want).max())
    rows = []
    for tau in range(1, args.tau_max + 1):
        lam = analytic.hrm_leading_sv_exact(q, w, tau)
        approx = q**w * analytic.f_tau(w / tau, tau, q)
        rows.append([tau, tau / w, lam, approx, lam / approx if approx else float("nan")])
    ridge = analytic.ridge_tau(q, w, range(1, args.tau_max + 1))
    run.csv("avg_hrm.csv", ["tau", "tau_over_w", "lambda_exact", "lambda_front", "ratio"], rows)
    run.json("avg_hrm.json", {"spectrum_max_error": spec_err, "ridge_tau": ridge, "ridge_ratio": ridge / w,
                              "q_squared": q * q, "z2": analytic.subleading_z2(q)})
    run.plot("avg_hrm.gp", "avg_hrm.csv", f"leading singular value, w={w}, q={q}",
             [f"data using 'tau_over_w':(column('lambda_exact')/{q}**{w}) with lines title 'exact'",
              f"data using 'tau_over_w':(column('lambda_front')/{q}**{w}) with lines title 'front integral'"],
             "tau / w", "lambda / q^w", extra=[f"set arrow from {q * q}, graph 0 to {q * q}, graph 1 nohead"])
    print(f"avg-hrm: ridge at tau/w = {ridge / w:.3f}; worst spectrum error {max(spec_err.values()):.2e}")
    return EXIT_OK


def cmd_special(args, run: Run) -> int:
    rows = []
    q = args.q
    for model in ("DU", "Localized"):
        if model == "DU" and q != 2:
            continue
        src = GateSource(GateEnsembleSpec(model, q, seed=args.seed))
        for w in range(1, args.w_max + 1):
            otoc.check_memory(q, w)
            op = LLGOperator(src, w, LEFT, "F")
            for tau in range(1, args.tau_max + 1):
                numeric = spectral.leading_singular_triplet(op, tau).value
                if model == "DU":
                    closed = analytic.du_closed_form(q, w, tau)[2]
                else:
                    closed = analytic.localized_closed_form(q, w, tau)[1]
                rows.append([model, w, tau, numeric, closed, abs(numeric - closed)])
    run.csv("special.csv", ["model", "w", "tau", "sv_numeric", "sv_closed", "abs_err"], rows)
    run.plot("special.gp", "special.csv", "leading singular value of F^tau",
             ["data using 'tau':(strcol('model') eq 'DU' ? column('sv_numeric') : NaN) with points title 'DU'",
              "data using 'tau':(strcol('model') eq 'Localized' ? column('sv_numeric') : NaN) with points title 'localized'"],
             "tau", "lambda", logscale="y")
    worst = max(r[5] / max(r[4], 1.0) for r in rows)
    print(f"special: worst scaled deviation {worst:.2e}")
    return EXIT_OK


def _sectors(model: str, n_sites: int, momentum: int):
    if model == "XYZc":
        cells = n_sites // 2
        # momenta strictly between 0 and pi: each pairs with its conjugate
        moms = list(range(1, (cells + 1) // 2)) or [momentum]
        return [dict(momentum=m, zparity=z, xparity=x) for m in moms for z in (1, -1) for x in (1, -1)]
    if model == "Z2COE":
        return [dict(momentum=momentum, zparity=1)]
    return [dict(momentum=momentum)]


def cmd_levelstats(args, run: Run) -> int:
    n_sites = args.chain_length
    if args.q**n_sites > levelstats.FLOQUET_LIMIT:
        raise TooLarge(f"q^L = {args.q**n_sites} exceeds {levelstats.FLOQUET_LIMIT}")
    spec = _spec(args)
    if not spec.invariant:
        raise ConfigError("level statistics need a space-time translation invariant circuit")
    sectors = _sectors(spec.model, n_sites, args.momentum)
    chunks = _map(args, lambda s: levelstats.pooled_spacings([GateSource(spec.with_seed(s))], n_sites, sectors),
                  _seeds(args))
    spacings = np.concatenate(chunks)
    sector_dim = max(2, len(spacings) // (len(chunks) * len(sectors)))
    rng = np.random.default_rng(args.seed)
    ref = levelstats.sample_matrix_power_ensemble(args.ensemble, args.power, sector_dim, args.ref_count, rng)
    ref_name = f"{args.ensemble.upper()}^{args.power}"
    left, right, dens = levelstats.histogram(spacings)
    _, _, dens_ref = levelstats.histogram(ref)
    poisson = [np.exp(-l) - np.exp(-r) for l, r in zip(left, right)]
    rows = [[l, r, d, dr, p / 0.1] for l, r, d, dr, p in zip(left, right, dens, dens_ref, poisson)]
    run.csv("levelstats.csv", ["bin_left", "bin_right", "density", "density_ref", "density_poisson"], rows)
    summary = {
        "model": spec.model, "L": n_sites, "seeds": _seeds(args), "sectors": sectors, "count": int(len(spacings)),
        "reference": ref_name, "reference_dim": sector_dim, "reference_count": int(len(ref)),
        f"ks_{ref_name}": levelstats.ks_distance(spacings, ref),
        "ks_poisson": levelstats.ks_distance(spacings, "expon"),
        "ks_reference_vs_poisson": levelstats.ks_distance(ref, "expon"),
    }
    run.json("levelstats.json", summary)
    run.plot("levelstats.gp", "levelstats.csv", f"spacing distribution {spec.model} L={n_sites}",
             ["data using (($1+$2)/2):'density' with boxes title 'model'",
              "data using (($1+$2)/2):'density_ref' with lines title 'reference'",
              "data using (($1+$2)/2):'density_poisson' with lines title 'Poisson'"], "s", "P(s)",
             extra=["set boxwidth 0.1", "set style fill transparent solid 0.4"])
    print(f"levelstats: {len(spacings)} spacings, KS to {ref_name} {summary[f'ks_{ref_name}']:.3f}, "
          f"KS to Poisson {summary['ks_poisson']:.3f}")
    return EXIT_OK


def cmd_verify(args, run: Run) -> int:
    lines = []
    checks = verify.property_suite(args.q, args.w_max, args.n_vectors, seed=args.seed)
    checks += verify.fixed_points_all_models(args.q, min(args.w_max, 4))
    worst = 0.0
    for model in verify.models_for(args.q):
        src = GateSource(GateEnsembleSpec(model, args.q, seed=args.seed))
        for w in range(2, args.w_max + 1):
            for tau in range(1, args.w_max + 1):
                if args.q ** (2 * (w + tau - 1) + 2) > BRUTE_LIMIT:
                    continue
                cl, cr, cb = otoc.triple_check(src, w, tau)
                worst = max(worst, abs(cl - cr), abs(cl - cb))
    checks.append(verify.Check(f"left = right = brute force q={args.q}", worst < 1e-9, worst, 1e-9))
    for c in checks:
        lines.append(c.line())
        print(c.line())
    run.json("verify.json", [{"name": c.name, "passed": c.passed, "value": c.value, "limit": c.limit} for c in checks])
    failed = [c for c in checks if not c.passed]
    print(f"verify: {len(checks) - len(failed)}/{len(checks)} passed")
    return EXIT_OK if not failed else EXIT_NUMERICAL


HANDLERS = {
    "otoc": cmd_otoc, "lsva": cmd_lsva, "variational": cmd_variational, "spectrum": cmd_spectrum,
    "tailfit": cmd_tailfit, "avg-hrm": cmd_avg_hrm, "special": cmd_special, "levelstats": cmd_levelstats,
    "verify": cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse(argv)
        run = Run(args)
        return HANDLERS[args.command](args, run)
    except (ConfigError, DimensionMismatch) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceGuard as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericalError as exc:
        cmd = argv[0] if argv else "?"
        print(f"numerical failure in {cmd}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
