"""Command-line interface.

Every subcommand writes a CSV table (to ``--out`` or stdout) and, with
``--report``, a JSON envelope echoing the configuration. Exit codes: 0 ok,
2 usage error, 3 domain/data error, 4 non-convergence.
"""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import core, emerging, final_size, inference, structured, surveillance
from . import io as eio
from .errors import ConvergenceError, DomainError, EmptyPosteriorError, SchemaError

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_CONVERGENCE = 0, 2, 3, 4


class UsageError(Exception):
    pass


# argument helpers ----------------------------------------------------------

def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _matrix(text):
    rows = [_floats(r) for r in text.split(";")]
    if len({len(r) for r in rows}) != 1:
        raise argparse.ArgumentTypeError("matrix rows differ in length")
    return np.array(rows)


def _window(text):
    if text == "all":
        return "all"
    try:
        a, b = text.split(":")
        return float(a), float(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b, got {text!r}") from None


def _prior(text):
    try:
        return inference.Prior.parse(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _gen_dist(text):
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "exponential":
            return emerging.GenerationTimeDist.exponential(float(rest))
        if kind == "fixed":
            return emerging.GenerationTimeDist.fixed(float(rest))
        if kind == "gamma":
            shape, rate = _floats(rest)
            return emerging.GenerationTimeDist.gamma(shape, rate)
        if kind == "empirical":
            return emerging.GenerationTimeDist.empirical(np.loadtxt(rest, ndmin=1))
    except (ValueError, OSError) as exc:
        raise argparse.ArgumentTypeError(f"bad generation-time spec {text!r}: {exc}") from None
    raise argparse.ArgumentTypeError(
        f"unknown generation-time kind {kind!r}; use exponential:rate, fixed:T, gamma:shape,rate or empirical:FILE")


def _emit(args, header, rows, comments=()):
    text = eio.csv_text(header, rows, comments)
    if args.out and args.out != "-":
        eio.atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


def _report(args, payload):
    if getattr(args, "report", None):
        cfg = {k: _jsonable(v) for k, v in vars(args).items()
               if k not in ("func", "report", "out") and not k.startswith("_")}
        env = eio.ResultEnvelope(args.command, cfg, payload, wall_clock=args._elapsed())
        env.write(args.report)


def _jsonable(v):
    if hasattr(v, "__dataclass_fields__"):
        return {k: _jsonable(getattr(v, k)) for k in v.__dataclass_fields__ if not callable(getattr(v, k))}
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    return v


def _estimate_rows(name, est: final_size.Estimate):
    return (name, est.point, est.se, est.formula_id)


# subcommands ---------------------------------------------------------------

def cmd_simulate(args):
    if args.model == "gse":
        p = core.GseParams(args.lam, args.gamma, args.n, infectious_period=args.infectious_period,
                           latent_rate=args.latent_rate)
    elif args.model == "reed-frost":
        if args.p is None:
            raise UsageError("--p is required for the reed-frost model")
        p = core.ReedFrostParams(args.n, args.p, args.i0)
    else:
        if args.households is None or args.household_size is None:
            raise UsageError("--households and --household-size are required for the household model")
        p = structured.HouseholdParams(args.lambda_h, args.lambda_g, args.gamma,
                                       (args.household_size,) * args.households)
    if args.replicates:
        if args.model == "reed-frost":
            raise UsageError("--replicates is available for continuous-time models only")
        summ = core.replicate(p, args.replicates, args.seed, cutoff_fraction=args.major_cutoff)
        n = p.n
        _emit(args, ("replicate", "final_size", "major"),
              ((k, z, core.classify_major(int(z), n, args.major_cutoff)) for k, z in enumerate(summ.final_sizes)))
        _report(args, {"major_fraction": summ.major_fraction, "mean_final_size": float(np.mean(summ.final_sizes))})
        return
    if args.model == "reed-frost":
        sizes = core.simulate_reed_frost(p, args.seed)
        _emit(args, ("generation", "infected"), enumerate(sizes))
        _report(args, {"final_size": int(sum(sizes))})
        return
    log = core.simulate(p, args.seed)
    text = eio.event_log_csv(log)
    if args.out and args.out != "-":
        eio.atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    _report(args, {"final_size": core.final_size(log), "events": len(log)})


def cmd_estimate(args):
    rows = []
    if args.input:
        for schema in ("final-size", "sample"):
            try:
                obs_list = eio.ingest_csv(args.input, schema)
                break
            except SchemaError as exc:
                if "does not match schema" not in str(exc):
                    raise
        else:
            raise SchemaError(f"{args.input}: header matches neither n,Z[,n_immune] nor n,m,Z_m", line=1)
    elif args.z is not None and args.n is not None:
        if args.m is not None:
            obs_list = [final_size.SampleObservation(args.n, args.m, args.z)]
        else:
            obs_list = [final_size.FinalSizeObservation(args.n, args.z, args.immune)]
    else:
        raise UsageError("give --n and --z (optionally --m or --immune), or --input")
    for obs in obs_list:
        if isinstance(obs, final_size.SampleObservation):
            rows.append(_estimate_rows("R0", final_size.estimate_r0_sample(obs, args.cv)))
            rows.append(_estimate_rows("vc", final_size.estimate_vc_sample(obs, args.cv)))
        else:
            rows.append(_estimate_rows("R0", final_size.estimate_r0_final_size(obs, args.cv)))
            rows.append(_estimate_rows("vc", final_size.estimate_vc_final_size(obs, args.cv)))
    _emit(args, ("parameter", "point", "se", "formula_id"), rows)
    _report(args, {"rows": rows})


def _parse_free(text):
    slots = []
    for item in text.split(";"):
        name, _, idx = item.partition(":")
        name = name.strip()
        if name == "lam":
            i, j = (int(v) for v in idx.split(","))
            slots.append(("lam", (i, j)))
        elif name == "gamma":
            slots.append(("gamma", int(idx)))
        else:
            raise UsageError(f"free slot {item!r} must be lam:i,j or gamma:i")
    return slots


def cmd_multitype(args):
    k = len(args.pi)
    gamma = args.gamma if args.gamma is not None else [1.0] * k
    cfg = final_size.MultitypeConfig(args.pi, args.lambda_matrix, gamma)
    if args.tau_obs is not None:
        if args.free is None:
            raise UsageError("--free is required with --tau-obs")
        res = final_size.multitype_calibrate(args.tau_obs, template=cfg, free=_parse_free(args.free))
        rows = [(f"{nm}[{idx if isinstance(idx, int) else ','.join(map(str, idx))}]", v)
                for (nm, idx), v in zip(res.free, res.params)]
        rows.append(("R0", res.r0))
        _emit(args, ("quantity", "value"), rows)
        _report(args, {"residual": res.residual, "r0": res.r0})
        return
    tau = final_size.multitype_final_size_solve(cfg)
    r0 = final_size.ngm_r0(cfg)
    rows = [(f"tau[{i}]", t) for i, t in enumerate(tau)] + [("R0", r0)]
    _emit(args, ("quantity", "value"), rows)
    _report(args, {"tau": list(map(float, tau)), "r0": r0})


def cmd_household(args):
    data = eio.ingest_csv(args.events, "household-events", sizes_path=args.sizes, t_obs=args.t_obs)
    fit = structured.household_mle(data)
    rows = [_estimate_rows("lambda_H", fit.lam_h), _estimate_rows("lambda_G", fit.lam_g)]
    _emit(args, ("parameter", "point", "se", "formula_id"), rows)
    _report(args, {"loglik": fit.loglik, "boundary": list(fit.boundary), "covariance": fit.covariance})


def cmd_patches(args):
    if args.initial is None or len(args.initial) != 4:
        raise UsageError("--initial needs S1,I1,S2,I2")
    p = structured.PatchParams(args.lam, args.gamma, args.m_move, args.n, tuple(args.initial))
    traj = structured.simulate_two_patch(p, args.t_end, args.dt)
    arr = traj.as_array()
    every = max(1, args.every)
    rows = (tuple(r) for r in arr[::every])
    _emit(args, ("t", "S1", "I1", "R1", "S2", "I2", "R2"), rows)
    _report(args, {"steps": len(arr) - 1})


def cmd_growth_rate(args):
    counts = eio.ingest_csv(args.input, "incidence")
    series = emerging.IncidenceSeries(counts, args.period)
    window = None
    if args.window is not None:
        if args.window == "all":
            window = None
        else:
            window = (int(args.window[0]), int(args.window[1]) + 1)
    est = emerging.estimate_growth_rate(series, window, method=args.method)
    _emit(args, ("parameter", "point", "se", "formula_id"), [("r", est.r, est.se, f"growth-{est.method}")])
    _report(args, {"r": est.r, "se": est.se})


def cmd_euler_lotka(args):
    g = args.gen_dist
    if (args.r0 is None) == (args.r is None):
        raise UsageError("give exactly one of --r0 or --r")
    if args.r0 is not None:
        r = emerging.euler_lotka_r(args.r0, g)
        rows = [("R0", args.r0), ("r", r)]
    else:
        r0 = emerging.r0_from_growth(args.r, g)
        rows = [("r", args.r), ("R0", r0)]
    _emit(args, ("quantity", "value"), rows)
    _report(args, dict(rows))


def cmd_intervals(args):
    if args.input:
        log = eio.ingest_csv(args.input, "event-log")
    else:
        if args.seed is None:
            raise UsageError("--seed is required when simulating")
        log = core.simulate_gse(core.GseParams(args.lam, args.gamma, args.n), args.seed)
    offsets = None
    if args.onset_gamma is not None:
        shape, rate = args.onset_gamma
        if args.seed is None:
            raise UsageError("--seed is required for random onset offsets")
        offsets = lambda rng, size: rng.gamma(shape, 1.0 / rate, size)  # noqa: E731
    iv = emerging.extract_intervals(log, onset_offsets=offsets, window=args.window,
                                    seed=None if args.seed is None else (args.seed, 1))
    _emit(args, ("kind", "value"), iv.rows())
    _report(args, {"window": list(iv.window), "n_forward": len(iv.forward), "n_backward": len(iv.backward)})


def cmd_abc(args):
    summaries = tuple(args.summaries.split(","))
    bad = [s for s in summaries if s not in inference.SUMMARY_NAMES]
    if bad:
        raise UsageError(f"unknown summaries {bad}; choose from {inference.SUMMARY_NAMES}")
    if len(args.observed) != len(summaries):
        raise UsageError("--observed needs one value per summary")
    if args.model == "reed-frost":
        if summaries != ("final_size",):
            raise UsageError("the reed-frost model supports the final_size summary only")
        prior = inference.PriorSpec(p=args.prior_p)
        n, i0 = args.n, args.i0

        def sim(theta, rng):
            return [float(sum(core.simulate_reed_frost(core.ReedFrostParams(n, float(theta[0]), i0), rng)))]
    else:
        prior = inference.PriorSpec({"lambda": args.prior_lambda, "gamma": args.prior_gamma})
        sim = inference.gse_summary_simulator(args.n, summaries)
    cfg = inference.AbcConfig(summaries, args.epsilon, args.draws, args.pilot)
    sample = inference.abc_rejection(sim, args.observed, prior, cfg, args.seed)
    _emit(args, ("draw",) + sample.names, ((k,) + tuple(r) for k, r in enumerate(sample.draws.tolist())))
    _report(args, {"acceptance": sample.acceptance, "scale": sample.diagnostics["scale"], "seed": args.seed})


def cmd_da_mcmc(args):
    rem = eio.ingest_csv(args.removals, "removal-times")
    prior = inference.PriorSpec({"lambda": args.prior_lambda, "gamma": args.prior_gamma})
    if args.index_time is None and args.time_origin is None:
        raise UsageError("give --index-time or --time-origin")
    sample = inference.da_mcmc_gse(rem, args.n, prior, args.iterations, args.seed,
                                   index_time=args.index_time, time_origin=args.time_origin,
                                   burn_in=args.burn_in)
    _emit(args, ("draw",) + sample.names, ((k,) + tuple(r) for k, r in enumerate(sample.draws.tolist())))
    summ = inference.posterior_summary(sample)
    _report(args, {
        "acceptance": sample.acceptance,
        "invalid_proposals": sample.invalid_proposals,
        "ess": {s.name: s.ess for s in summ},
        "mean": {s.name: s.mean for s in summ},
        "interval": {s.name: [s.lower, s.upper] for s in summ},
        "seed": args.seed,
    })


def _unit_series(panel, unit):
    units = panel.units or tuple(str(i) for i in range(panel.m))
    if unit is None:
        if panel.m != 1:
            raise UsageError("--unit is required for multi-unit panels")
        return panel.y[0]
    if unit not in units:
        raise DomainError(f"unit {unit!r} not in panel")
    return panel.y[units.index(unit)]


def cmd_surveil(args):
    panel = eio.ingest_csv(args.panel, "panel")
    y = _unit_series(panel, args.unit)
    cfg = surveillance.FarringtonConfig(args.b, args.w_half, args.q, args.min_total, args.period)
    res = surveillance.run_detector(y, cfg, start=args.start)
    _emit(args, ("s", "y_s", "mu_s", "g_s", "alarm"), res.rows())
    _report(args, {"alarm_time": res.alarm_time, "formula_id": surveillance.FARRINGTON_FORMULA_ID})


def _ee_inputs(args):
    panel = eio.ingest_csv(args.panel, "panel")
    if args.weights:
        w = eio.weights_matrix(eio.ingest_csv(args.weights, "weights"), panel.units)
        panel = surveillance.CountPanel(panel.y, panel.week, panel.year, w, panel.units)
    spec = surveillance.EEModelSpec(S=args.harmonics, include_ar=not args.no_ar,
                                    include_neighbor=args.neighbor, shared_alpha=not args.unit_alpha,
                                    shared_nu=not args.unit_nu, period=args.period, lag=args.lag)
    return panel, spec


def cmd_ee_fit(args):
    panel, spec = _ee_inputs(args)
    fit = surveillance.ee_fit(panel, spec)
    rows = []
    for j, name in enumerate(fit.names):
        lo, hi = fit.interval(name)
        rows.append((name, fit.estimates[j], fit.se[j], lo, hi))
    _emit(args, ("parameter", "estimate", "se", "lower", "upper"), rows)
    _report(args, fit.report())


def cmd_score(args):
    if args.panel is None:
        if args.mean is None or args.y is None:
            raise UsageError("give --panel, or --mean and --y (optionally --phi)")
        pred = surveillance.NegBinPredictive(args.mean, args.phi)
        s = surveillance.log_score(pred, args.y)
        _emit(args, ("y", "mean", "phi", "log_score"), [(args.y, args.mean, args.phi, s)])
        _report(args, {"log_score": s})
        return
    panel, spec = _ee_inputs(args)
    t_train = args.train if args.train is not None else panel.T // 2
    if not spec.first_t() + 3 <= t_train < panel.T:
        raise DomainError("--train must leave data on both sides of the split")
    train = surveillance.CountPanel(panel.y[:, :t_train], weights=panel.weights)
    fit = surveillance.ee_fit(train, spec)
    rows = []
    units = panel.units or tuple(str(i) for i in range(panel.m))
    for t in range(t_train, panel.T):
        for i, pred in enumerate(surveillance.ee_predict_one_step(fit, panel, t)):
            y = int(panel.y[i, t])
            rows.append((units[i], t, y, pred.mean, surveillance.log_score(pred, y)))
    _emit(args, ("unit", "t", "y", "mean", "log_score"), rows)
    _report(args, {"mean_log_score": float(np.mean([r[-1] for r in rows])), "fit": fit.report()})


# parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="epistoch", description="Stochastic epidemic simulation and inference.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, seed=False, seed_required=False):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--out", help="output CSV path (default stdout)")
        p.add_argument("--report", help="write a JSON result envelope here")
        if seed:
            p.add_argument("--seed", type=int, required=seed_required, help="master seed (required)")
        p.set_defaults(func=func)
        return p

    p = add("simulate", cmd_simulate, "simulate an outbreak and print its event log", seed=True, seed_required=True)
    p.add_argument("--model", choices=("gse", "reed-frost", "household"), default="gse")
    p.add_argument("--lambda", dest="lam", type=float, default=1.5)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--infectious-period", choices=("exponential", "fixed"), default="exponential")
    p.add_argument("--latent-rate", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--i0", type=int, default=1)
    p.add_argument("--lambda-h", type=float, default=1.0)
    p.add_argument("--lambda-g", type=float, default=1.0)
    p.add_argument("--households", type=int)
    p.add_argument("--household-size", type=int)
    p.add_argument("--replicates", type=int, default=0)
    p.add_argument("--major-cutoff", type=float, default=core.DEFAULT_MAJOR_CUTOFF)

    p = add("estimate", cmd_estimate, "R0 and critical vaccination coverage from final size")
    p.add_argument("--n", type=int)
    p.add_argument("--z", type=int, help="final size (or infected count in the sample with --m)")
    p.add_argument("--m", type=int, help="sample size")
    p.add_argument("--immune", type=int, default=0, help="initially immune individuals")
    p.add_argument("--cv", type=float, default=1.0, help="coefficient of variation of the infectious period")
    p.add_argument("--input", help="CSV with n,Z[,n_immune] or n,m,Z_m")

    p = add("multitype", cmd_multitype, "multitype final size and R0, or calibration to observed fractions")
    p.add_argument("--pi", type=_floats, required=True)
    p.add_argument("--lambda-matrix", type=_matrix, required=True, help="rows separated by ';'")
    p.add_argument("--gamma", type=_floats)
    p.add_argument("--tau-obs", type=_floats)
    p.add_argument("--free", help="e.g. 'lam:0,0;lam:1,1' or 'gamma:0;gamma:1'")

    p = add("household", cmd_household, "maximum-likelihood household and global transmission rates")
    p.add_argument("--events", required=True)
    p.add_argument("--sizes", required=True)
    p.add_argument("--t-obs", type=float)

    p = add("patches", cmd_patches, "integrate the two-patch SIR system")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--m", dest="m_move", type=float, required=True)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--initial", type=_floats, help="S1,I1,S2,I2")
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--every", type=int, default=1, help="write every k-th step")

    p = add("growth-rate", cmd_growth_rate, "exponential growth rate from an incidence series")
    p.add_argument("--input", required=True, help="CSV period,count")
    p.add_argument("--window", type=_window, help="inclusive period-index range a:b")
    p.add_argument("--period", type=float, default=1.0, help="length of one period in time units")
    p.add_argument("--method", choices=("poisson", "loglinear"), default="poisson")

    p = add("euler-lotka", cmd_euler_lotka, "convert between R0 and the growth rate r")
    p.add_argument("--gen-dist", type=_gen_dist, required=True)
    p.add_argument("--r0", type=float)
    p.add_argument("--r", type=float)

    p = add("intervals", cmd_intervals, "forward, serial and backward intervals", seed=True)
    p.add_argument("--input", help="event-log CSV (otherwise simulate)")
    p.add_argument("--lambda", dest="lam", type=float, default=2.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--window", type=_window)
    p.add_argument("--onset-gamma", type=_floats, help="shape,rate of gamma onset offsets")

    p = add("abc", cmd_abc, "ABC rejection sampling", seed=True, seed_required=True)
    p.add_argument("--model", choices=("gse", "reed-frost"), default="gse")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--i0", type=int, default=1)
    p.add_argument("--observed", type=_floats, required=True)
    p.add_argument("--summaries", default="final_size")
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--draws", type=int, default=10000)
    p.add_argument("--pilot", type=int, default=200)
    p.add_argument("--prior-lambda", type=_prior, default=inference.Prior.gamma(1.0, 1.0))
    p.add_argument("--prior-gamma", type=_prior, default=inference.Prior.gamma(1.0, 1.0))
    p.add_argument("--prior-p", type=_prior, default=inference.Prior.uniform(0.0, 1.0))

    p = add("da-mcmc", cmd_da_mcmc, "data-augmented MCMC from removal times", seed=True, seed_required=True)
    p.add_argument("--removals", required=True, help="CSV with a time column")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--iterations", type=int, default=10000)
    p.add_argument("--burn-in", type=float, default=0.2)
    p.add_argument("--index-time", type=float)
    p.add_argument("--time-origin", type=float)
    p.add_argument("--prior-lambda", type=_prior, default=inference.Prior.gamma(1.0, 1.0))
    p.add_argument("--prior-gamma", type=_prior, default=inference.Prior.gamma(1.0, 1.0))

    p = add("surveil", cmd_surveil, "Farrington-type outbreak detection for one unit")
    p.add_argument("--panel", required=True)
    p.add_argument("--unit")
    p.add_argument("--b", type=int, default=5)
    p.add_argument("--w-half", type=int, default=3)
    p.add_argument("--q", type=float, default=0.995)
    p.add_argument("--min-total", type=int, default=5)
    p.add_argument("--period", type=int, default=52)
    p.add_argument("--start", type=int)

    for name, func, text in (("ee-fit", cmd_ee_fit, "fit the endemic-epidemic panel model"),
                             ("score", cmd_score, "logarithmic scores of one-step predictions")):
        p = add(name, func, text)
        p.add_argument("--panel", required=(name == "ee-fit"))
        p.add_argument("--weights")
        p.add_argument("--harmonics", type=int, default=0)
        p.add_argument("--no-ar", action="store_true")
        p.add_argument("--neighbor", action="store_true")
        p.add_argument("--unit-alpha", action="store_true")
        p.add_argument("--unit-nu", action="store_true")
        p.add_argument("--period", type=int, default=52)
        p.add_argument("--lag", type=int, default=1)
        if name == "score":
            p.add_argument("--train", type=int, help="periods used for fitting")
            p.add_argument("--mean", type=float)
            p.add_argument("--phi", type=float, default=0.0)
            p.add_argument("--y", type=int)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    t0 = time.perf_counter()
    args._elapsed = lambda: time.perf_counter() - t0
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"epistoch {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        # reader closed stdout early (e.g. piped into head)
        sys.stderr.close()
        return EXIT_OK
    except OSError as exc:
        print(f"epistoch {args.command}: cannot access {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, SchemaError, EmptyPosteriorError) as exc:
        print(f"epistoch {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        print(f"epistoch {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
