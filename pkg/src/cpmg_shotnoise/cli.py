"""Command-line interface: ``cpmg-shotnoise <command> ...``.

Commands
--------
rates      analytic rate curves on an f_s grid
simulate   Monte-Carlo or master-equation coherence traces and rates
fit        joint population/pedestal fit of rate datasets
calibrate  population-vs-power line from spin-echo rates
synth      seeded synthetic rate datasets
compare    relative deviation between two rate files

Exit codes: 0 success, 2 configuration error, 3 convergence failure,
4 input/output error.  The worker-thread count is read from
``CPMG_SHOTNOISE_THREADS``.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import analytic, fitting, io, lindblad, trajectory
from .analytic import SolverError
from .config import Formula, RunConfig, load_config
from .core import (ConfigurationError, CpmgSchedule, DomainError, PulseShape, RateCurve,
                   ResonatorQubitParams, interpulse_period)
from .io import DataFormatError

log = logging.getLogger("cpmg_shotnoise")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4


def _timestamp() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _params_dict(p: ResonatorQubitParams) -> dict:
    return {"kappa_per_s": p.kappa, "chi_rad_per_s": p.chi, "delta_omega_d_rad_per_s": p.delta_omega_d}


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.model_copy(update={"seed": args.seed})
    return cfg


# --------------------------------------------------------------------------
# rates
# --------------------------------------------------------------------------

def _formula_rates(formula: Formula, f_s: np.ndarray, n: float, params: ResonatorQubitParams) -> np.ndarray:
    dt = interpulse_period(f_s)
    resonant = params.with_detuning(0.0)
    if formula is Formula.THERMAL:
        return np.asarray(analytic.gamma_thermal(dt, n, resonant), dtype=float)
    if formula is Formula.THERMAL_MODERATE:
        if n == 0:
            return np.zeros_like(dt)
        return np.array([analytic.gamma_thermal_moderate(d, n, resonant).gamma for d in dt])
    if formula is Formula.THERMAL_FILTERFUNCTION:
        return np.asarray(analytic.gamma_filterfunction(dt, n, resonant, analytic.NoiseKind.THERMAL), dtype=float)
    if formula is Formula.COHERENT:
        return np.asarray(analytic.gamma_coherent(dt, n, resonant), dtype=float)
    if formula is Formula.COHERENT_DETUNED:
        F = (n * params.kappa / 4) ** 0.5
        return np.asarray(analytic.gamma_coherent_detuned(dt, F, params.delta_omega_d, params), dtype=float)
    return np.asarray(analytic.gamma_filterfunction(dt, n, resonant, analytic.NoiseKind.COHERENT_RESONANT),
                      dtype=float)


def cmd_rates(args) -> int:
    """One CSV per formula and population; coherent_detuned reads the population as 4|F|^2/kappa."""
    cfg = _load(args)
    params = cfg.params.build()
    f_s = cfg.require_grid()
    pops = cfg.rates.populations
    if pops is None:
        pops = [cfg.drive.n_coh if cfg.drive.kind == "coherent" else cfg.drive.n_th]
    out = Path(args.output)
    files, results = [], []
    for formula in cfg.rates.formulas:
        for i, n in enumerate(pops):
            name = f"{formula.value}.csv" if len(pops) == 1 else f"{formula.value}_{i}.csv"
            results.append((out / name, _formula_rates(formula, f_s, n, params)))
            files.append({"file": name, "formula": formula.value, "population": n})
    for path, g in results:
        io.write_rate_csv(path, f_s, g)
    io.write_json(out / "rates_meta.json", {"command": "rates", "files": files, "params": _params_dict(params),
                                            "created": _timestamp()})
    return EXIT_OK


# --------------------------------------------------------------------------
# simulate
# --------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = _load(args)
    params = cfg.params.build()
    drive = cfg.drive.build(params)
    f_s = cfg.require_grid()
    sim = cfg.simulate
    tau = sim.pulse_duration_ns * 1e-9
    if sim.route == "mc" and tau > 0:
        raise ConfigurationError("the mc route uses instantaneous pulses; set pulse_duration_ns: 0")
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(f_s))
    out = Path(args.output)
    gammas, sigmas, traces, meta = [], [], [], []
    for f, ss in zip(f_s, seeds):
        dt = 0.5 / f
        if tau >= dt:
            raise ConfigurationError(f"pulse duration {tau:g} s is not shorter than dt = {dt:g} s at f_s = {f:g} Hz")
        n_values = None if sim.n_values is None else np.asarray(sim.n_values)
        if sim.route == "mc":
            seed = int(ss.generate_state(1, np.uint64)[0])
            est, trace = trajectory.simulate_rate(params, drive, dt, n_values=n_values,
                                                  ensemble_size=sim.ensemble_size, seed=seed,
                                                  per=sim.steps_per_scale)
        else:
            seed = None
            shape = PulseShape.RAISED_COSINE if tau > 0 else PulseShape.INSTANTANEOUS
            est, trace = lindblad.rate_from_lindblad(params, drive, CpmgSchedule(1, dt, tau, shape),
                                                     lindblad.FockConfig(sim.n_fock), n_values,
                                                     return_trace=True)
        gammas.append(est.gamma)
        sigmas.append(est.sigma)
        name = f"trace_{len(traces):03d}.csv"
        traces.append((out / name, trace))
        meta.append({"file": name, "f_s_hz": float(f), "seed": seed, "gamma_per_s": est.gamma,
                     "sigma_per_s": est.sigma})
    for path, trace in traces:
        io.write_trace_csv(path, trace)
    io.write_dataset_csv(out / "rates.csv", RateCurve(f_s, gammas, np.nan_to_num(sigmas), sim.route))
    io.write_json(out / "simulate_meta.json", {"command": "simulate", "route": sim.route, "seed": cfg.seed,
                                               "ensemble_size": sim.ensemble_size, "pulse_duration_s": tau,
                                               "traces": meta, "params": _params_dict(params),
                                               "created": _timestamp()})
    return EXIT_OK


# --------------------------------------------------------------------------
# fit / calibrate / synth / compare
# --------------------------------------------------------------------------

def _params_from_args(args) -> tuple[ResonatorQubitParams, RunConfig | None]:
    if args.config:
        cfg = load_config(args.config)
        return cfg.params.build(), cfg
    if args.kappa_inv_ns is None or args.two_chi_mhz is None:
        raise ConfigurationError("give --config or both --kappa-inv-ns and --two-chi-mhz")
    return ResonatorQubitParams.from_lab_units(args.kappa_inv_ns, args.two_chi_mhz, args.detuning_mhz), None


def cmd_fit(args) -> int:
    params, cfg = _params_from_args(args)
    fc = cfg.fit if cfg is not None else None
    model_kind = args.model or (fc.model if fc else "thermal")
    shared = not args.separate_pedestals if args.separate_pedestals else (fc.shared_pedestal if fc else True)
    ambient = args.ambient_thermal or (fc.ambient_thermal if fc else False)
    weighted = {"auto": None, "yes": True, "no": False}[args.weighted or (fc.weighted if fc else "auto")]
    fixed = fc.fixed_pedestal_per_s if fc else None
    datasets = [io.read_dataset(p) for p in args.datasets]
    model = fitting.FitModelSpec(model_kind, params, shared, ambient, fixed)
    report = fitting.fit_rate_curves(datasets, model, weighted=weighted)
    doc = report.to_dict()
    doc["params"] = _params_dict(params)
    doc["inputs"] = [str(p) for p in args.datasets]
    if args.output:
        io.write_json(args.output, doc)
    else:
        sys.stdout.write(io.dumps_json(doc))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    params, cfg = _params_from_args(args)
    kind = args.kind or (cfg.calibrate.kind if cfg else "thermal")
    pairs = io.read_calibration_csv(args.data)
    result = fitting.calibrate_population_vs_power(pairs, kind, params)
    doc = result.to_dict()
    if args.output:
        io.write_json(args.output, doc)
    else:
        sys.stdout.write(io.dumps_json(doc))
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = _load(args)
    if cfg.synth is None:
        raise ConfigurationError("synth needs a 'synth' section")
    params = cfg.params.build()
    f_s = cfg.require_grid()
    sc = cfg.synth
    model = fitting.FitModelSpec(sc.model, params if sc.model == "coherent_detuned" else params.with_detuning(0.0))
    out = Path(args.output)
    curves = [fitting.synthesize_rate_curve(model, n, sc.pedestal_per_s, f_s, sc.sigma_per_s,
                                            seed=[cfg.seed, i], rel_sigma=sc.rel_sigma, label=f"synth_{i}")
              for i, n in enumerate(sc.populations)]
    for c in curves:
        io.write_dataset_csv(out / f"{c.label}.csv", c)
    io.write_json(out / "synth_meta.json", {"command": "synth", "seed": cfg.seed, "model": sc.model,
                                            "populations": sc.populations, "pedestal_per_s": sc.pedestal_per_s,
                                            "sigma_per_s": sc.sigma_per_s, "rel_sigma": sc.rel_sigma,
                                            "files": [f"{c.label}.csv" for c in curves],
                                            "params": _params_dict(params), "created": _timestamp()})
    return EXIT_OK


def _read_any_rates(path) -> tuple[np.ndarray, np.ndarray]:
    try:
        return io.read_rate_csv(path)
    except DataFormatError:
        c = io.read_dataset(path)
        return c.f_s, c.gamma2


def compare_rates(path_a, path_b, rtol_f: float = 1e-9) -> dict:
    """Join two rate files on f_s and summarise |a - b| / |b|."""
    fa, ga = _read_any_rates(path_a)
    fb, gb = _read_any_rates(path_b)
    ia, ib = [], []
    for i, f in enumerate(fa):
        j = np.flatnonzero(np.abs(fb - f) <= rtol_f * f)
        if j.size:
            ia.append(i)
            ib.append(int(j[0]))
    if not ia:
        raise DataFormatError("the two files share no f_s values")
    a, b = ga[ia], gb[ib]
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(b != 0, np.abs(a - b) / np.abs(b), np.where(a == b, 0.0, np.inf))
    k = int(np.argmax(rel))
    return {"n_common": len(ia), "max_rel_dev": float(rel.max()), "mean_rel_dev": float(rel.mean()),
            "max_abs_dev_per_s": float(np.max(np.abs(a - b))), "f_s_at_max_hz": float(fa[ia[k]])}


def cmd_compare(args) -> int:
    summary = compare_rates(args.a, args.b)
    sys.stdout.write(io.dumps_json(summary))
    if args.max_rel is not None and summary["max_rel_dev"] > args.max_rel:
        log.error("max relative deviation %.3g exceeds %.3g", summary["max_rel_dev"], args.max_rel)
        return EXIT_FAIL
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cpmg-shotnoise", description="Photon shot-noise dephasing under CPMG.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp, out_default):
        sp.add_argument("config", help="YAML run configuration")
        sp.add_argument("-o", "--output", default=out_default, help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="override the configuration seed")

    with_config(sub.add_parser("rates", help="analytic rate curves"), "rates_out")
    with_config(sub.add_parser("simulate", help="trajectory or master-equation simulation"), "simulate_out")
    with_config(sub.add_parser("synth", help="synthetic rate datasets"), "synth_out")

    def with_params(sp):
        sp.add_argument("--config", help="YAML configuration providing params (and defaults)")
        sp.add_argument("--kappa-inv-ns", type=float)
        sp.add_argument("--two-chi-mhz", type=float)
        sp.add_argument("--detuning-mhz", type=float, default=0.0)
        sp.add_argument("-o", "--output", help="output JSON (default: stdout)")

    fp = sub.add_parser("fit", help="fit rate datasets")
    fp.add_argument("datasets", nargs="+", help="CSV or JSON datasets")
    with_params(fp)
    fp.add_argument("--model", choices=["thermal", "coherent", "coherent_detuned"])
    fp.add_argument("--separate-pedestals", action="store_true", help="one pedestal per dataset")
    fp.add_argument("--ambient-thermal", action="store_true", help="shared ambient thermal population")
    fp.add_argument("--weighted", choices=["auto", "yes", "no"])

    cp = sub.add_parser("calibrate", help="population vs drive power")
    cp.add_argument("data", help="CSV with columns power,gamma_per_s")
    with_params(cp)
    cp.add_argument("--kind", choices=["thermal", "coherent"])

    mp = sub.add_parser("compare", help="compare two rate files")
    mp.add_argument("a")
    mp.add_argument("b")
    mp.add_argument("--max-rel", type=float, help="exit 1 if the max relative deviation exceeds this")
    return p


COMMANDS = {"rates": cmd_rates, "simulate": cmd_simulate, "fit": cmd_fit, "calibrate": cmd_calibrate,
            "synth": cmd_synth, "compare": cmd_compare}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (fitting.ConvergenceError, SolverError) as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        best = getattr(exc, "best", None)
        if best is not None:
            print(f"best point found: {json.dumps(np.asarray(best).tolist())}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (DataFormatError, fitting.RankDeficiencyError, trajectory.InsufficientDataError, OSError) as exc:
        print(f"input/output error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
