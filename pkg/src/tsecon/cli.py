"""Command-line front end: reproducible estimation runs from CSV inputs.

Ten subcommands cover the analysis surface: correlogram, arima, armax,
varma, var, adf, coint, garch, kalman, evaluate. Each run is deterministic
given its arguments (--seed pins the simulation commands), prints its
primary output to stdout, and with --out also writes that output plus
gnuplot-ready plot-data files into a directory.

Exit status: 0 when the requested computation succeeded, 1 on a domain,
numerical, or convergence failure, 2 on bad usage. A rejected diagnostic
(failed normality, say) is a result, not an error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from . import render as R
from .arima import ArimaSpec, fit_arima, fit_armax, forecast_arima, residual_report
from .diagnostics import acf, arch_lm, doornik_hansen, frequency_distribution, ljung_box
from .errors import DomainError, FitError, TseconError
from .feval import evaluate_forecast
from .kalman import arma_to_state_space, diffuse_initialization, kalman_filter
from .optimize import Objective, covariance_hessian, maximize
from .series import Period, SampleRange, TimeSeries, diff, ldiff_scaled, load_csv
from .unitroot import DETERMINISTIC_CASES, adf_test, engle_granger
from .varsystem import (
    fevd,
    fit_var,
    fit_varma_two_step,
    forecast_var,
    granger_f_tests,
    impulse_response,
    portmanteau,
    select_lag_order,
)
from .volatility import DISTRIBUTIONS, VARIANTS, GarchSpec, compare_models, fit_garch

_FORMATS = ("text", "json", "csv")


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


# ---------------------------------------------------------------------------
# shared plumbing

def _add_common(p: argparse.ArgumentParser, n_series: str = "one") -> None:
    p.add_argument("--data", action="append", metavar="CSV",
                   help="input CSV; repeat for multi-series commands"
                        if n_series != "one" else "input CSV")
    p.add_argument("--var", action="append", metavar="NAME",
                   help="series column name; repeatable")
    p.add_argument("--sample", metavar="FROM:TO",
                   help="estimation range, e.g. 1980:1:2006:1")
    p.add_argument("--forecast", metavar="FROM:TO",
                   help="forecast range, e.g. 2006:2:2013:1")
    p.add_argument("--format", choices=_FORMATS, default="text")
    p.add_argument("--out", metavar="DIR",
                   help="directory for output and plot-data files")
    p.add_argument("--max-lag", type=_positive_int, default=None,
                   metavar="K")
    p.add_argument("--seed", type=int, default=None,
                   help="RNG seed for the simulation paths")


def _load_series(args) -> list:
    """Pair up --data and --var values: a single CSV serves every --var;
    otherwise files and names are matched positionally."""
    paths = args.data
    names = args.var
    if not paths or not names:
        raise DomainError("this run needs --data and --var")
    if len(paths) not in (1, len(names)):
        raise DomainError(
            f"{len(names)} --var names need 1 or {len(names)} --data files")
    out = []
    for i, name in enumerate(names):
        path = paths[0] if len(paths) == 1 else paths[i]
        out.append(load_csv(path, "date", name))
    return out


def _parse_range(text: Optional[str]) -> Optional[SampleRange]:
    return SampleRange.parse(text) if text else None


def _forecast_horizon(sample: SampleRange, fc: SampleRange) -> int:
    """Periods from the end of the estimation sample through the end of
    the forecast range; the forecast range must lie after the sample."""
    if fc.start.ordinal <= sample.end.ordinal:
        raise DomainError("forecast range must start after the estimation "
                          f"sample (sample ends {sample.end}, forecast "
                          f"starts {fc.start})")
    return fc.end.ordinal - sample.end.ordinal


def _maybe_diff(series: TimeSeries, order: int) -> TimeSeries:
    return diff(series, order) if order > 0 else series


def _transform(series: TimeSeries, how: str) -> TimeSeries:
    if how == "none":
        return series
    if how == "diff":
        return diff(series)
    if how == "ldiff100":
        return ldiff_scaled(series, 100.0)
    raise DomainError(f"unknown transform {how!r}")


def _emit(args, text: str, json_payload, csv_table=None,
          plot_writer=None) -> int:
    """Print the requested format; with --out, persist it and the plot data."""
    if args.format == "text":
        primary, ext = text, "txt"
    elif args.format == "json":
        primary, ext = R.emit_json(json_payload), "json"
    else:
        if csv_table is None:
            raise DomainError(
                f"the {args.command} command has no CSV form; "
                "use --format text or json")
        primary, ext = R.table_to_csv(*csv_table), "csv"
    sys.stdout.write(primary if primary.endswith("\n") else primary + "\n")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"{args.command}.{ext}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(primary)
        if plot_writer is not None:
            plot_writer(args.out)
    return 0


def _parse_order(text: str, n: int, label: str) -> tuple:
    parts = text.split(",")
    if len(parts) != n or not all(s.strip().lstrip("-").isdigit() for s in parts):
        raise DomainError(f"--{label} expects {n} comma-separated integers, "
                          f"got {text!r}")
    return tuple(int(s) for s in parts)


def _battery(fit, lb_lag: int = 4):
    """Residual screening battery: normality, Ljung-Box, ARCH-LM."""
    resid = fit.residuals
    fitted = fit.spec.p + fit.spec.q
    return (doornik_hansen(resid),
            ljung_box(resid, lb_lag, fitted_params=fitted),
            arch_lm(resid, lb_lag))


# ---------------------------------------------------------------------------
# correlogram

def _cmd_correlogram(args) -> int:
    series = _load_series(args)[0]
    rng = _parse_range(args.sample)
    if rng is not None:
        series = series.slice(rng)
    series = _maybe_diff(series, args.diff)
    max_lag = args.max_lag if args.max_lag is not None else 20
    if max_lag < 1:
        raise DomainError("--max-lag must be at least 1")
    rows = acf(series, max_lag)
    text = R.render_correlogram(series.name, rows, len(series))
    payload = {"command": "correlogram", "series": series.name,
               "nobs": len(series), "max_lag": max_lag, "rows": rows}
    table = (("lag", "acf", "pacf", "q_stat", "p_value"),
             [(r.lag, r.acf, r.pacf, r.q_stat, r.p_value) for r in rows])

    def plots(outdir):
        lags = [r.lag for r in rows]
        R.write_xy(os.path.join(outdir, "acf.dat"), lags,
                   [r.acf for r in rows])
        R.write_xy(os.path.join(outdir, "pacf.dat"), lags,
                   [r.pacf for r in rows])

    return _emit(args, text, payload, table, plots)


# ---------------------------------------------------------------------------
# arima / armax

def _fit_and_report(series, spec, rng, args, exog=None):
    fit = (fit_armax if exog is not None else fit_arima)(
        series, spec, sample=rng)
    norm, lb, lm = _battery(fit)
    text_parts = [R.render_arima(fit), "Residual diagnostics", ""]
    for t in (norm, lb, lm):
        text_parts.append("  " + R.render_test(t))
    payload = {"command": args.command, "fit": fit,
               "diagnostics": {"normality": norm, "ljung_box": lb,
                               "arch_lm": lm}}
    fc_points = None
    evaluation = None
    fc_rng = _parse_range(args.forecast)
    if fc_rng is not None:
        fc_points = forecast_arima(fit, _forecast_horizon(fit.sample, fc_rng))
        fc_points = [p for p in fc_points
                     if p.period.ordinal >= fc_rng.start.ordinal]
        label = "z(0.025) = 1.96"
        text_parts.append("")
        text_parts.append(R.render_forecast_table(
            series.name, fc_points, actual=series, quantile_label=label))
        payload["forecast"] = fc_points
        try:
            actual = series.slice(fc_rng)
            fc_ts = TimeSeries(fc_points[0].period,
                               [p.point for p in fc_points], name="forecast")
            pre = series.slice(SampleRange(fc_rng.start - 1, fc_rng.start - 1))
            evaluation = evaluate_forecast(actual, fc_ts, pre)
            text_parts.append(R.render_evaluation(evaluation))
            payload["evaluation"] = evaluation
        except TseconError:
            pass  # no actuals over the forecast range: table only
    return fit, fc_points, "\n".join(text_parts), payload


def _screen_mode(series, orders, rng, args) -> int:
    specs = [ArimaSpec(p, d, q, include_const=not args.no_const)
             for p, d, q in orders]

    def one(spec):
        fit = fit_arima(series, spec, sample=rng)
        return (f"ARIMA({spec.p},{spec.d},{spec.q})", *_battery(fit))

    with ThreadPoolExecutor(max_workers=min(4, len(specs))) as pool:
        rows = list(pool.map(one, specs))
    text = R.render_screening(rows, level=args.level)
    payload = {"command": args.command, "screening": [
        {"label": lab, "normality": n, "ljung_box": lb, "arch_lm": lm,
         "passed": bool(all(t.p_value > args.level for t in (n, lb, lm)))}
        for lab, n, lb, lm in rows]}
    table = (("model", "normality", "normality_p", "ljung_box",
              "ljung_box_p", "arch_lm", "arch_lm_p"),
             [(lab, n.statistic, n.p_value, lb.statistic, lb.p_value,
               lm.statistic, lm.p_value) for lab, n, lb, lm in rows])
    return _emit(args, text, payload, table)


def _cmd_arima(args) -> int:
    series = _load_series(args)[0]
    rng = _parse_range(args.sample)
    if args.screen:
        orders = [_parse_order(s, 3, "screen") for s in
                  args.screen.split(";") if s.strip()]
        if not orders:
            raise DomainError("--screen needs at least one p,d,q triple")
        return _screen_mode(series, orders, rng, args)
    p, d, q = _parse_order(args.order, 3, "order")
    spec = ArimaSpec(p, d, q, include_const=not args.no_const)
    fit, fc, text, payload = _fit_and_report(series, spec, rng, args)
    table = (("name", "coefficient", "std_error", "z", "p_value"),
             list(zip(fit.coeff_names, fit.coefficients, fit.std_errors,
                      fit.z_stats, fit.p_values)))

    def plots(outdir):
        rep = residual_report(fit)
        R.write_xy(os.path.join(outdir, "residuals.dat"),
                   [r[0] for r in rep], [r[3] for r in rep])
        R.write_xy(os.path.join(outdir, "fitted.dat"),
                   [r[0] for r in rep], [r[2] for r in rep])
        if fc:
            R.write_banded(os.path.join(outdir, "forecast.dat"),
                           [x.period for x in fc], [x.point for x in fc],
                           [x.lower for x in fc], [x.upper for x in fc])

    return _emit(args, text, payload, table, plots)


def _cmd_armax(args) -> int:
    all_series = _load_series(args)
    if len(all_series) < 2:
        raise DomainError("armax needs the dependent --var plus at least "
                          "one exogenous --var")
    series, exogs = all_series[0], all_series[1:]
    rng = _parse_range(args.sample)
    p, d, q = _parse_order(args.order, 3, "order")
    exogs = [_maybe_diff(x, args.diff_exog) for x in exogs]
    spec = ArimaSpec(p, d, q, include_const=not args.no_const,
                     exog=tuple(exogs), exog_names=tuple(x.name for x in exogs))
    fit, fc, text, payload = _fit_and_report(series, spec, rng, args,
                                             exog=exogs)
    table = (("name", "coefficient", "std_error", "z", "p_value"),
             list(zip(fit.coeff_names, fit.coefficients, fit.std_errors,
                      fit.z_stats, fit.p_values)))

    def plots(outdir):
        rep = residual_report(fit)
        R.write_xy(os.path.join(outdir, "residuals.dat"),
                   [r[0] for r in rep], [r[3] for r in rep])

    return _emit(args, text, payload, table, plots)


# ---------------------------------------------------------------------------
# varma / var

def _cmd_varma(args) -> int:
    raw = _load_series(args)
    if len(raw) != 2:
        raise DomainError("varma expects exactly two --var series")
    rng = _parse_range(args.sample)
    if rng is not None:
        # keep one pre-sample level so differencing stays inside the range
        lead = SampleRange(rng.start - 1, rng.end)
        raw = [s.slice(lead) for s in raw]
    dseries = [diff(s) for s in raw]
    p, d, q = _parse_order(args.resid_order, 3, "resid-order")
    spec = ArimaSpec(p, d, q)

    def one(series):
        return fit_arima(series, spec, sample=rng)

    with ThreadPoolExecutor(max_workers=2) as pool:
        fits = list(pool.map(one, raw))
    vm = fit_varma_two_step(dseries, [f.residuals for f in fits],
                            ma_lags=args.ma_lags)
    text = R.render_varma(vm)
    payload = {"command": "varma", "residual_order": [p, d, q],
               "ma_lags": args.ma_lags, "fit": vm}
    eq_rows = []
    for eq in vm.equations:
        for row in zip(eq.coeff_names, eq.coefficients, eq.std_errors,
                       eq.t_stats, eq.p_values):
            eq_rows.append((eq.name,) + row)
    table = (("equation", "name", "coefficient", "std_error", "t", "p_value"),
             eq_rows)
    return _emit(args, text, payload, table)


def _cmd_var(args) -> int:
    raw = _load_series(args)
    if len(raw) < 2:
        raise DomainError("var expects at least two --var series")
    rng = _parse_range(args.sample)
    if rng is not None:
        lead = SampleRange(rng.start - 1, rng.end)
        raw = [s.slice(lead) for s in raw]
    data = [diff(s) for s in raw] if not args.no_diff else raw

    parts = []
    payload = {"command": "var", "lag_order": args.lags}
    if args.max_lag:
        sel = select_lag_order(data, max_lag=args.max_lag)
        parts.append(R.render_lag_selection(sel, args.max_lag))
        payload["lag_selection"] = sel
    fit = fit_var(data, p=args.lags)
    pm_lags = max(fit.lag_order + 1, fit.nobs // 4)
    pm = portmanteau(fit, pm_lags)
    gr = granger_f_tests(fit)
    parts.append(R.render_var(fit, pm, gr))
    payload.update({"fit": fit, "portmanteau": pm, "granger": gr})

    horizon = args.horizon
    irf_tables = impulse_response(fit, horizon)
    fevd_tables = fevd(fit, horizon)
    stable = all(r < 1.0 for r in _var_moduli(fit))
    if not stable:
        parts.append("warning: VAR is not stable (a companion root lies on "
                     "or outside the unit circle)\n")
    if stable or args.force_irf:
        parts.append(R.render_irf(irf_tables, fit.variable_names))
        parts.append(R.render_fevd(fevd_tables, fit.variable_names))
        payload["irf"] = irf_tables
        payload["fevd"] = fevd_tables

    forecasts = None
    fc_rng = _parse_range(args.forecast)
    if fc_rng is not None:
        forecasts = forecast_var(fit, _forecast_horizon(fit.sample, fc_rng))
        forecasts = {k: [p for p in v
                         if p.period.ordinal >= fc_rng.start.ordinal]
                     for k, v in forecasts.items()}
        dfree = fit.nobs - fit.n_regressors
        from scipy import stats as _st
        tq = float(_st.t.ppf(0.975, dfree))
        label = f"t({dfree}, 0.025) = {tq:.3f}"
        for name in fit.variable_names:
            parts.append(R.render_forecast_table(
                name, forecasts[name], actual=None, quantile_label=label))
        payload["forecast"] = forecasts

    text = "\n".join(parts)
    irf_rows = []
    for t in irf_tables:
        for h, v in enumerate(t.values, 1):
            irf_rows.append((t.shock_variable, t.response_variable, h,
                             float(v)))
    table = (("shock", "response", "period", "value"), irf_rows)

    def plots(outdir):
        for t in irf_tables:
            name = f"irf_{t.shock_variable}_{t.response_variable}.dat"
            R.write_xy(os.path.join(outdir, name),
                       range(1, len(t.values) + 1), t.values)
        for tab in fevd_tables:
            path = os.path.join(outdir, f"fevd_{tab.variable}.dat")
            with open(path, "w", encoding="utf-8") as fh:
                for h, se, shares in tab.rows:
                    cells = " ".join(f"{s:.6f}" for s in shares)
                    fh.write(f"{h} {se:.6f} {cells}\n")
        if forecasts:
            for name, pts in forecasts.items():
                R.write_banded(os.path.join(outdir, f"forecast_{name}.dat"),
                               [x.period for x in pts],
                               [x.point for x in pts],
                               [x.lower for x in pts],
                               [x.upper for x in pts])

    return _emit(args, text, payload, table, plots)


def _var_moduli(fit):
    from .varsystem import stability_roots
    return [abs(r) for r in stability_roots(fit)]


# ---------------------------------------------------------------------------
# adf / coint

def _cmd_adf(args) -> int:
    series = _load_series(args)[0]
    rng = _parse_range(args.sample)
    if rng is not None:
        lead = SampleRange(rng.start - args.diff, rng.end)
        series = series.slice(lead)
    series = _maybe_diff(series, args.diff)
    max_lag = args.max_lag if args.max_lag is not None else 4
    selection = "fixed" if args.fixed_lag else "modified_aic"
    k = args.fixed_lag if args.fixed_lag is not None else max_lag
    res = adf_test(series, max_lag=k, deterministic=args.det,
                   lag_selection=selection)
    text = R.render_adf(res)
    payload = {"command": "adf", "result": res}
    table = (("series", "lags", "nobs", "a_minus_1", "tau", "p_value"),
             [(res.series_name, res.lags_used, res.nobs,
               res.coefficient_minus_one, res.tau_statistic, res.p_value)])
    return _emit(args, text, payload, table)


def _cmd_coint(args) -> int:
    raw = _load_series(args)
    if len(raw) != 2:
        raise DomainError("coint expects exactly two --var series")
    rng = _parse_range(args.sample)
    if rng is not None:
        lead = SampleRange(rng.start - args.diff, rng.end)
        raw = [s.slice(lead) for s in raw]
    y, x = (_maybe_diff(s, args.diff) for s in raw)
    max_lag = args.max_lag if args.max_lag is not None else 4
    rep = engle_granger(y, x, max_lag=max_lag, level=args.level)
    text = R.render_cointegration(rep)
    payload = {"command": "coint", "report": rep}
    table = (("step", "tau_or_t", "p_value"),
             [("1:" + rep.step1.series_name, rep.step1.tau_statistic,
               rep.step1.p_value),
              ("2:" + rep.step2.series_name, rep.step2.tau_statistic,
               rep.step2.p_value),
              ("4:uhat", rep.step4.tau_statistic, rep.step4.p_value)])

    def plots(outdir):
        resid = rep.step3.residuals
        R.write_xy(os.path.join(outdir, "uhat.dat"), resid.periods(),
                   resid.values)

    return _emit(args, text, payload, table, plots)


# ---------------------------------------------------------------------------
# garch

def _garch_variant(name: str) -> str:
    v = name.replace("-", "_").upper()
    if v not in VARIANTS:
        raise DomainError(f"unknown variant {name!r}; choose from "
                          f"{', '.join(VARIANTS)}")
    return v


def _simulated_garch_path(t_len: int, seed: int) -> TimeSeries:
    """Seeded GARCH(1,1) path with a constant mean, for determinism checks."""
    rng = np.random.default_rng(seed)
    omega, alpha, beta, const = 0.1, 0.1, 0.8, 0.5
    burn = 200
    n = t_len + burn
    z = rng.standard_normal(n)
    h = np.empty(n)
    e = np.empty(n)
    h[0] = omega / (1.0 - alpha - beta)
    e[0] = math.sqrt(h[0]) * z[0]
    for i in range(1, n):
        h[i] = omega + alpha * e[i - 1] ** 2 + beta * h[i - 1]
        e[i] = math.sqrt(h[i]) * z[i]
    return TimeSeries(Period(1980, 1), const + e[burn:], name="simulated")


def _cmd_garch(args) -> int:
    rng = _parse_range(args.sample)
    if args.simulate:
        if args.seed is None:
            raise DomainError("--simulate needs --seed for a reproducible "
                              "path")
        series = _simulated_garch_path(args.simulate, args.seed)
    else:
        series = _transform(_load_series(args)[0], args.transform)

    if args.compare:
        variants = ([_garch_variant(v) for v in args.variants.split(",")]
                    if args.variants else list(VARIANTS))
        dists = (args.dists.split(",") if args.dists
                 else list(DISTRIBUTIONS))
        specs = []
        for v in variants:
            for dname in dists:
                specs.append(GarchSpec(
                    v, garch_order=0 if v == "ARCH" else 1,
                    mean=args.mean, distribution=dname))
        rows = compare_models(series, specs, sample=rng,
                              likelihood=args.likelihood)
        text = R.render_comparison(rows)
        payload = {"command": "garch", "comparison": rows}
        table = (("model", "distribution", "aic", "bic", "hqc",
                  "all_significant", "converged"),
                 [(r.label, r.distribution, r.aic, r.bic, r.hqc,
                   r.all_significant, r.converged) for r in rows])
        return _emit(args, text, payload, table)

    variant = _garch_variant(args.variant)
    a_ord, g_ord = _parse_order(args.order, 2, "order")
    spec = GarchSpec(variant, arch_order=a_ord, garch_order=g_ord,
                     mean=args.mean, distribution=args.dist)
    fit = fit_garch(series, spec, sample=rng, likelihood=args.likelihood)
    text = R.render_garch(fit)
    payload = {"command": "garch", "fit": fit}
    table = (("name", "coefficient", "std_error", "z", "p_value"),
             list(zip(fit.coeff_names, fit.coefficients, fit.std_errors,
                      fit.z_stats, fit.p_values)))

    def plots(outdir):
        resid = fit.mean_residuals
        sd = np.sqrt(fit.conditional_variances)
        periods = fit.sample.periods()[-len(resid):]
        R.write_banded(os.path.join(outdir, "conditional_sd.dat"), periods,
                       resid, -1.96 * sd, 1.96 * sd)

    return _emit(args, text, payload, table, plots)


# ---------------------------------------------------------------------------
# kalman (state-space ARMA maximum likelihood)

def fit_kalman_arma(series: TimeSeries, p: int, q: int,
                    include_const: bool = False,
                    sample: Optional[SampleRange] = None,
                    start_sigma: float = 1.0):
    """Exact-ML ARMA(p,q) through the state-space filter.

    The optimizer works on ln(sigma) so the innovation s.d. stays positive;
    reported standard errors come from the natural-space Hessian. Returns
    (names, estimates, std_errors, z, p_values, loglik, aic, bic, hqc, T).

    An ARMA likelihood with an MA part has mirror maxima related by
    theta -> 1/theta, sigma -> sigma*|theta|; which chart the optimizer
    lands in depends on the start. The default start (all coefficients 0,
    sigma 1) is kept because it is the conventional scripted protocol for
    this model; pass start_sigma to probe the other basin.
    """
    if p < 0 or q < 0 or p + q == 0:
        raise DomainError("need at least one ARMA coefficient")
    work = series.slice(sample) if sample is not None else series
    y = np.asarray(work.values, dtype=float)
    t_len = y.size
    if t_len < p + q + 2:
        raise DomainError("not enough observations for the requested order")

    n_mean = 1 if include_const else 0

    def split(vec):
        mu = vec[0] if include_const else 0.0
        phi = vec[n_mean:n_mean + p]
        theta = vec[n_mean + p:n_mean + p + q]
        sigma = vec[-1]
        return mu, phi, theta, sigma

    def natural_ll(vec):
        mu, phi, theta, sigma = split(vec)
        if sigma <= 0.0:
            return -np.inf
        try:
            model = diffuse_initialization(
                arma_to_state_space(phi, theta, sigma))
        except TseconError:
            return -np.inf
        try:
            out = kalman_filter(model, y - mu)
        except TseconError:
            return -np.inf
        return out.loglik_total, out.loglik_per_obs

    def opt_ll(vec):
        nat = np.array(vec, dtype=float)
        nat[-1] = math.exp(nat[-1])  # ln-sigma internal coordinate
        return natural_ll(nat)

    if start_sigma <= 0.0:
        raise DomainError("start_sigma must be positive")
    dim = n_mean + p + q + 1
    start = np.zeros(dim)
    if include_const:
        start[0] = float(np.mean(y))
    start[-1] = math.log(start_sigma)
    res = maximize(Objective(dim, opt_ll), start)
    if not res.converged:
        retry = maximize(Objective(dim, opt_ll), res.params,
                         max_iterations=800)
        if retry.converged or retry.loglik >= res.loglik:
            res = retry
    if not res.converged:
        raise FitError(f"state-space ML did not converge "
                       f"(gradient norm {res.gradient_norm:.3g})")

    nat = res.params.copy()
    nat[-1] = math.exp(nat[-1])
    cov = covariance_hessian(Objective(dim, natural_ll), nat)
    ses = np.sqrt(np.diag(cov))
    zs = nat / ses
    pv = np.array([math.erfc(abs(z) / math.sqrt(2.0)) for z in zs])

    names = (["mu"] if include_const else [])
    names += [f"phi_{i}" for i in range(1, p + 1)]
    names += [f"theta_{j}" for j in range(1, q + 1)]
    names += ["sigma"]
    k = dim
    ll = res.loglik
    aic = -2.0 * ll + 2.0 * k
    bic = -2.0 * ll + k * math.log(t_len)
    hqc = -2.0 * ll + 2.0 * k * math.log(math.log(t_len))
    return (names, nat, ses, zs, pv, ll, aic, bic, hqc, t_len, work)


def _cmd_kalman(args) -> int:
    series = _load_series(args)[0]
    rng = _parse_range(args.sample)
    if rng is not None and args.diff:
        lead = SampleRange(rng.start - args.diff, rng.end)
        series = series.slice(lead)
    series = _maybe_diff(series, args.diff)
    p, q = _parse_order(args.order, 2, "order")
    (names, est, ses, zs, pv, ll, aic, bic, hqc, t_len, work) = \
        fit_kalman_arma(series, p, q, include_const=args.const, sample=rng,
                        start_sigma=args.start_sigma)
    title = (f"Model: ML (state-space ARMA), using observations "
             f"{work.range.start.year}:{work.range.start.quarter}-"
             f"{work.range.end.year}:{work.range.end.quarter} (T = {t_len})")
    text = R.render_ml_block(title, names, est, ses, zs, pv, ll, aic, bic,
                             hqc)
    payload = {"command": "kalman", "names": names, "estimates": est,
               "std_errors": ses, "z": zs, "p_values": pv, "loglik": ll,
               "aic": aic, "bic": bic, "hqc": hqc, "nobs": t_len}
    table = (("name", "estimate", "std_error", "z", "p_value"),
             list(zip(names, est, ses, zs, pv)))
    return _emit(args, text, payload, table)


# ---------------------------------------------------------------------------
# evaluate

def _cmd_evaluate(args) -> int:
    if len(args.var) != 2:
        raise DomainError("evaluate expects --var ACTUAL --var FORECAST")
    actual, forecast = _load_series(args)
    rng = _parse_range(args.sample)
    pre = None
    if rng is not None:
        try:
            pre = actual.slice(SampleRange(rng.start - 1, rng.start - 1))
        except TseconError:
            pre = None
        actual = actual.slice(rng)
        forecast = forecast.slice(rng)
    ev = evaluate_forecast(actual, forecast, pre)
    text = R.render_evaluation(ev)
    payload = {"command": "evaluate", "evaluation": ev}
    table = (("statistic", "value"),
             [("me", ev.me), ("mse", ev.mse), ("rmse", ev.rmse),
              ("mae", ev.mae), ("mpe", ev.mpe), ("mape", ev.mape),
              ("theil_u", ev.theil_u), ("um", ev.um), ("ur", ev.ur),
              ("ud", ev.ud)])
    return _emit(args, text, payload, table)


# ---------------------------------------------------------------------------
# parser assembly

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tsecon",
        description="Quarterly time-series model estimation, testing, and "
                    "forecast evaluation from CSV inputs.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("correlogram", help="ACF/PACF table with Ljung-Box Q")
    _add_common(p)
    p.add_argument("--diff", type=int, default=0, metavar="N",
                   help="difference the series N times first")
    p.set_defaults(func=_cmd_correlogram)

    p = sub.add_parser("arima", help="ARIMA estimation, diagnostics, "
                                     "forecasting")
    _add_common(p)
    p.add_argument("--order", default="1,1,1", metavar="P,D,Q")
    p.add_argument("--no-const", action="store_true")
    p.add_argument("--screen", metavar="P,D,Q;P,D,Q;...",
                   help="diagnostic screening over model orders")
    p.add_argument("--level", type=float, default=0.02,
                   help="screening significance level")
    p.set_defaults(func=_cmd_arima)

    p = sub.add_parser("armax", help="ARMA with exogenous regressors")
    _add_common(p, "many")
    p.add_argument("--order", default="1,1,1", metavar="P,D,Q")
    p.add_argument("--no-const", action="store_true")
    p.add_argument("--diff-exog", type=int, default=0, metavar="N",
                   help="difference the exogenous series N times")
    p.set_defaults(func=_cmd_armax)

    p = sub.add_parser("varma", help="two-step VARMA on differenced series")
    _add_common(p, "many")
    p.add_argument("--ma-lags", type=int, default=2, choices=(1, 2))
    p.add_argument("--resid-order", default="1,1,2", metavar="P,D,Q",
                   help="ARIMA order for the residual-source fits")
    p.set_defaults(func=_cmd_varma)

    p = sub.add_parser("var", help="VAR estimation with IRF and FEVD")
    _add_common(p, "many")
    p.add_argument("--lags", type=int, default=1)
    p.add_argument("--horizon", type=int, default=20)
    p.add_argument("--no-diff", action="store_true",
                   help="model the series in levels")
    p.add_argument("--force-irf", action="store_true",
                   help="emit IRF even for an unstable system")
    p.set_defaults(func=_cmd_var)

    p = sub.add_parser("adf", help="augmented Dickey-Fuller unit-root test")
    _add_common(p)
    p.add_argument("--det", default="constant",
                   choices=DETERMINISTIC_CASES + ("nc", "c", "ct"))
    p.add_argument("--diff", type=int, default=0, metavar="N")
    p.add_argument("--fixed-lag", type=int, default=None, metavar="K",
                   help="skip lag selection and use exactly K lags")
    p.set_defaults(func=_cmd_adf)

    p = sub.add_parser("coint", help="Engle-Granger two-variable "
                                     "cointegration test")
    _add_common(p, "many")
    p.add_argument("--diff", type=int, default=0, metavar="N")
    p.add_argument("--level", type=float, default=0.05)
    p.set_defaults(func=_cmd_coint)

    p = sub.add_parser("garch", help="conditional-variance model family")
    _add_common(p)
    p.add_argument("--variant", default="GARCH")
    p.add_argument("--order", default="1,1", metavar="A,B")
    p.add_argument("--mean", default="constant",
                   choices=("constant", "in_mean"))
    p.add_argument("--dist", default="normal", choices=DISTRIBUTIONS)
    p.add_argument("--likelihood", default=None,
                   choices=("full", "paper_compat"),
                   help="per-observation likelihood convention")
    p.add_argument("--transform", default="none",
                   choices=("none", "diff", "ldiff100"),
                   help="pre-transform applied to the input series")
    p.add_argument("--compare", action="store_true",
                   help="goodness-of-fit matrix over variants x "
                        "distributions")
    p.add_argument("--variants", metavar="V1,V2,...",
                   help="variants for --compare (default: all)")
    p.add_argument("--dists", metavar="D1,D2,...",
                   help="distributions for --compare (default: all)")
    p.add_argument("--simulate", type=int, default=None, metavar="T",
                   help="fit a seeded simulated path instead of CSV data")
    p.set_defaults(func=_cmd_garch)

    p = sub.add_parser("kalman", help="state-space ARMA maximum likelihood")
    _add_common(p)
    p.add_argument("--order", default="1,1", metavar="P,Q")
    p.add_argument("--diff", type=int, default=0, metavar="N")
    p.add_argument("--const", action="store_true",
                   help="estimate a mean term")
    p.add_argument("--start-sigma", type=float, default=1.0,
                   help="innovation-s.d. start value for the optimizer")
    p.set_defaults(func=_cmd_kalman)

    p = sub.add_parser("evaluate", help="forecast accuracy statistics")
    _add_common(p, "many")
    p.set_defaults(func=_cmd_evaluate)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None:
        np.random.seed(args.seed % (2**32))
    try:
        return args.func(args)
    except TseconError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
