"""Plain-text blocks, JSON payloads, CSV tables, and plot-data files.

The text renderers mirror the console layout of the reference econometrics
package so results can be eyeballed against published output: coefficient
tables with significance stars, paired summary-statistic lines, unit-root
blocks, equation-system blocks, goodness-of-fit matrices.

Everything here is pure string and file assembly; no estimation happens.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from typing import Iterable, Optional, Sequence

import numpy as np

from .diagnostics import CorrelogramRow, FrequencyBin, TestResult
from .feval import ForecastEvaluation
from .series import Period, SampleRange, TimeSeries
from .unitroot import AdfResult, CointegratingRegression, CointegrationReport
from .volatility import ComparisonRow, GarchFit

__all__ = [
    "significance_stars",
    "render_correlogram",
    "render_test",
    "render_screening",
    "render_arima",
    "render_residual_table",
    "render_forecast_table",
    "render_evaluation",
    "render_lag_selection",
    "render_var",
    "render_varma",
    "render_irf",
    "render_fevd",
    "render_adf",
    "render_cointegration",
    "render_garch",
    "render_comparison",
    "render_ml_block",
    "render_frequency_distribution",
    "to_jsonable",
    "emit_json",
    "table_to_csv",
    "write_xy",
    "write_banded",
]

_DIST_LABELS = {
    "normal": "Normal",
    "student_t": "t",
    "ged": "GED",
    "skew_t": "Skewed t",
    "skew_ged": "Skewed GED",
}


# ---------------------------------------------------------------------------
# small formatting helpers

def significance_stars(p: float) -> str:
    """Conventional marks: *** below 1%, ** below 5%, * below 10%."""
    if p is None or not math.isfinite(p):
        return ""
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.10:
        return "*"
    return ""


def _g(x: float, digits: int = 6) -> str:
    if x is None or not math.isfinite(x):
        return "NA"
    return f"{x:.{digits}g}"


def _fixed(x: float) -> str:
    """Summary-statistic format: seven significant digits, zeros kept."""
    if x is None or not math.isfinite(x):
        return "NA"
    return f"{x:#.7g}"


def _pv(p: float) -> str:
    if p is None or not math.isfinite(p):
        return "NA"
    if p < 1e-5:
        return "<0.00001"
    return f"{p:.5f}"


def _colon(p: Period) -> str:
    return f"{p.year}:{p.quarter}"


def _sample_label(rng: SampleRange, nobs: int) -> str:
    return f"{_colon(rng.start)}-{_colon(rng.end)} (T = {nobs})"


def _year_frac(p: Period) -> float:
    return p.year + (p.quarter - 1) / 4.0


def _coeff_table(names: Sequence[str], coefs, ses, stats_col, pvals,
                 stat_label: str = "z") -> str:
    """Aligned coefficient table with a trailing star column."""
    rows = []
    for name, b, s, z, p in zip(names, coefs, ses, stats_col, pvals):
        rows.append((name, _g(b), _g(s), f"{z:.4f}" if math.isfinite(z) else "NA",
                     _pv(p), significance_stars(p)))
    w_name = max(len("  "), max((len(r[0]) for r in rows), default=0)) + 2
    w_num = [max(len(h), max((len(r[i + 1]) for r in rows), default=0))
             for i, h in enumerate(("coefficient", "std. error", stat_label,
                                    "p-value"))]
    head = ("  " + " " * w_name
            + f"{'coefficient':>{w_num[0]}}   {'std. error':>{w_num[1]}}   "
            + f"{stat_label:>{w_num[2]}}   {'p-value':>{w_num[3]}}")
    rule = "  " + "-" * (len(head) - 2)
    out = [head, rule]
    for r in rows:
        line = (f"  {r[0]:<{w_name}}{r[1]:>{w_num[0]}}   {r[2]:>{w_num[1]}}   "
                f"{r[3]:>{w_num[2]}}   {r[4]:>{w_num[3]}}")
        if r[5]:
            line += f"  {r[5]}"
        out.append(line)
    return "\n".join(out)


def _stat_pairs(pairs: Sequence[tuple]) -> str:
    """Two summary statistics per line, label/value columns aligned."""
    labels = [p[0] for p in pairs]
    w_label = max(len(s) for s in labels)
    vals = [_fixed(p[1]) for p in pairs]
    w_val = max(len(v) for v in vals)
    lines = []
    for i in range(0, len(pairs), 2):
        chunk = []
        for j in (i, i + 1):
            if j < len(pairs):
                chunk.append(f"{labels[j]:<{w_label}}  {vals[j]:>{w_val}}")
        lines.append("   ".join(chunk))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# correlogram / diagnostic tests

def render_correlogram(name: str, rows: Sequence[CorrelogramRow],
                       nobs: int) -> str:
    """Correlogram table: lag, ACF, PACF, Ljung-Box Q, chi-square p-value."""
    out = [f"Autocorrelation function for {name}", ""]
    out.append(f"  LAG      ACF          PACF         Q-stat. [p-value]")
    band = math.sqrt(nobs)
    for r in rows:
        def mark(value: float) -> str:
            z = abs(value) * band
            p = math.erfc(z / math.sqrt(2.0))
            return significance_stars(p)
        out.append(
            f"  {r.lag:>3}   {r.acf:>7.4f} {mark(r.acf):<3}  "
            f"{r.pacf:>7.4f} {mark(r.pacf):<3}  "
            f"{r.q_stat:>9.4f}  [{r.p_value:.3f}]")
    out.append("")
    return "\n".join(out)


def render_test(t: TestResult) -> str:
    if isinstance(t.df, tuple):
        df = f", df = ({t.df[0]}, {t.df[1]})"
    else:
        df = f", df = {t.df}" if t.df is not None else ""
    return f"{t.name} = {_g(t.statistic)}{df} [{t.p_value:.4f}]"


def render_screening(rows: Sequence[tuple], level: float = 0.02) -> str:
    """Model-screening table: one row per candidate, three test columns
    (normality, Ljung-Box, ARCH-LM) as 'stat (p)' with a verdict column.

    rows: (label, TestResult, TestResult, TestResult)
    """
    headers = ("Model", "Normality (chi^2)", "Ljung-Box Q", "ARCH LM",
               "verdict")
    cells = []
    for label, norm, lb, lm in rows:
        def cell(t: TestResult) -> str:
            return f"{_g(t.statistic)} ({_g(t.p_value)})"
        passed = all(t.p_value > level for t in (norm, lb, lm))
        cells.append((label, cell(norm), cell(lb), cell(lm),
                      "pass" if passed else "fail"))
    widths = [max(len(headers[i]), max(len(c[i]) for c in cells))
              for i in range(5)]
    out = ["  ".join(f"{headers[i]:<{widths[i]}}" for i in range(5))]
    for c in cells:
        out.append("  ".join(f"{c[i]:<{widths[i]}}" for i in range(5)))
    out.append("")
    out.append(f"significance level for all three tests: {level:g}")
    out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# ARIMA / ARMAX

def _roots_block(fit) -> str:
    lines = [f"  {'':<10}{'Real':>10}  {'Imaginary':>10}  {'Modulus':>10}  "
             f"{'Frequency':>10}"]
    rule = "  " + "-" * (len(lines[0]) - 2)
    lines.append(rule)
    for label, roots in (("AR", fit.roots_ar), ("MA", fit.roots_ma)):
        if not roots:
            continue
        lines.append(f"  {label}")
        for i, r in enumerate(roots, 1):
            lines.append(
                f"   Root {i:>2}  {r.real:>10.4f}  {r.imaginary:>10.4f}  "
                f"{r.modulus:>10.4f}  {r.frequency:>10.4f}")
    lines.append(rule)
    return "\n".join(lines)


def render_arima(fit) -> str:
    """Estimation block for an ARIMA or ARMAX fit."""
    spec = fit.spec
    kind = "ARMAX" if spec.exog_names else "ARIMA"
    title = (f"Model: {kind}({spec.p},{spec.d},{spec.q}), using observations "
             f"{_sample_label(fit.sample, fit.nobs)}")
    # the engine differences internally and renames (d_X, d2_X); undo that
    # prefix so the label reads "(1-L) X" like the source series
    dep = fit.dependent_name
    if spec.d == 1 and dep.startswith("d_"):
        dep = dep[2:]
    elif spec.d > 1 and dep.startswith(f"d{spec.d}_"):
        dep = dep[len(f"d{spec.d}_"):]
    if spec.d == 1:
        dep = f"(1-L) {dep}"
    elif spec.d > 1:
        dep = f"(1-L)^{spec.d} {dep}"
    out = [title, f"Dependent variable: {dep}",
           "Standard errors based on Hessian", ""]
    out.append(_coeff_table(fit.coeff_names, fit.coefficients, fit.std_errors,
                            fit.z_stats, fit.p_values, stat_label="z"))
    out.append("")
    out.append(_stat_pairs([
        ("Mean dependent var", fit.mean_dependent),
        ("S.D. dependent var", fit.sd_dependent),
        ("Mean of innovations", fit.mean_innovations),
        ("S.D. of innovations", fit.sd_innovations),
        ("Log-likelihood", fit.loglik),
        ("Akaike criterion", fit.aic),
        ("Schwarz criterion", fit.bic),
        ("Hannan-Quinn", fit.hqc),
    ]))
    if fit.roots_ar or fit.roots_ma:
        out.append("")
        out.append(_roots_block(fit))
    out.append("")
    return "\n".join(out)


def render_residual_table(fit, report: Sequence[tuple]) -> str:
    """Actual/fitted/residual rows on the level scale, extreme rows starred."""
    out = [f"Estimation range: {_colon(fit.sample.start)} - "
           f"{_colon(fit.sample.end)}",
           f"Standard error of residuals = {_g(fit.sd_innovations)}", "",
           f"  {'':<8}{fit.dependent_name:>12}  {'fitted':>12}  "
           f"{'residual':>12}"]
    for per, actual, fitted, resid, flagged in report:
        star = "  *" if flagged else ""
        out.append(f"  {_colon(per):<8}{actual:>12.6g}  {fitted:>12.6g}  "
                   f"{resid:>12.6g}{star}")
    out.append("")
    out.append("Note: * denotes a residual in excess of 2.5 standard errors")
    out.append("")
    return "\n".join(out)


def render_forecast_table(name: str, points: Sequence, actual=None,
                          confidence: float = 0.95,
                          quantile_label: str = "z(0.025) = 1.96") -> str:
    """Forecast rows with interval bounds; actual column shows 'undefined'
    where no observed value exists."""
    pct = int(round(confidence * 100))
    g6 = lambda x: f"{x:#.6g}"
    out = [f"For {pct}% confidence intervals, {quantile_label}", "",
           f"  {'Obs':<8}{name:>12}  {'prediction':>12}  {'std. error':>12}"
           f"  {pct}% interval"]
    for fp in points:
        if actual is not None:
            try:
                obs = g6(actual.value_at(fp.period))
            except Exception:
                obs = "undefined"
        else:
            obs = "undefined"
        out.append(
            f"  {_colon(fp.period):<8}{obs:>12}  {g6(fp.point):>12}  "
            f"{g6(fp.std_error):>12}  ({g6(fp.lower)}, {g6(fp.upper)})")
    out.append("")
    return "\n".join(out)


def render_evaluation(ev: ForecastEvaluation) -> str:
    rows = [
        ("Mean Error", ev.me),
        ("Mean Squared Error", ev.mse),
        ("Root Mean Squared Error", ev.rmse),
        ("Mean Absolute Error", ev.mae),
        ("Mean Percentage Error", ev.mpe),
        ("Mean Absolute Percentage Error", ev.mape),
        ("Theil's U", ev.theil_u),
        ("Bias proportion, UM", ev.um),
        ("Regression proportion, UR", ev.ur),
        ("Disturbance proportion, UD", ev.ud),
    ]
    w = max(len(r[0]) for r in rows)
    out = ["Forecast evaluation statistics", ""]
    for label, v in rows:
        out.append(f"  {label:<{w}}  {v:>12.5g}")
    if ev.perfect:
        out.append("")
        out.append("  (forecast matches the actuals exactly)")
    out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# VAR / VARMA

def render_lag_selection(rows: Sequence, max_lag: int) -> str:
    out = [f"VAR system, maximum lag order {max_lag}", "",
           "The asterisks below indicate the best (that is, minimized) values",
           "of the respective information criteria, AIC = Akaike criterion,",
           "BIC = Schwarz Bayesian criterion and HQC = Hannan-Quinn criterion.",
           "",
           f"  {'lags':>4}  {'loglik':>12}  {'p(LR)':>8}  {'AIC':>11}  "
           f"{'BIC':>11}  {'HQC':>11}"]
    for r in rows:
        lr = f"{r.lr_pvalue:.5f}" if r.lr_pvalue is not None else ""
        out.append(
            f"  {r.lag:>4}  {r.loglik:>12.5f}  {lr:>8}  "
            f"{r.aic:>10.6f}{'*' if r.aic_min else ' '}  "
            f"{r.bic:>10.6f}{'*' if r.bic_min else ' '}  "
            f"{r.hqc:>10.6f}{'*' if r.hqc_min else ' '}")
    out.append("")
    return "\n".join(out)


def _var_equation_block(eq, label: str) -> str:
    out = [f"Equation {label}: {eq.name}", ""]
    out.append(_coeff_table(eq.coeff_names, eq.coefficients, eq.std_errors,
                            eq.t_stats, eq.p_values, stat_label="t-ratio"))
    out.append("")
    pairs = [
        ("Mean dependent var", eq.mean_dependent),
        ("S.D. dependent var", eq.sd_dependent),
        ("Sum squared resid", eq.ssr),
        ("S.E. of regression", eq.ser),
        ("R-squared", eq.r_squared),
        ("Adjusted R-squared", eq.adj_r_squared),
    ]
    if getattr(eq, "f_stat", None) is not None:
        pairs += [("F-statistic", eq.f_stat), ("P-value(F)", eq.f_pvalue)]
    pairs += [("rho", eq.rho), ("Durbin-Watson", eq.durbin_watson)]
    out.append(_stat_pairs(pairs))
    return "\n".join(out)


def render_var(fit, portmanteau_test: Optional[TestResult] = None,
               granger: Optional[Sequence[TestResult]] = None) -> str:
    out = [f"VAR system, lag order {fit.lag_order}",
           f"OLS estimates, observations {_sample_label(fit.sample, fit.nobs)}",
           f"Log-likelihood = {fit.loglik:.5f}",
           f"Determinant of covariance matrix = {_g(fit.det_sigma_ml, 8)}",
           f"AIC = {fit.aic:.4f}",
           f"BIC = {fit.bic:.4f}",
           f"HQC = {fit.hqc:.4f}"]
    if portmanteau_test is not None:
        label = portmanteau_test.name.replace("Portmanteau ", "")
        out.append(
            f"Portmanteau test: {label} = "
            f"{portmanteau_test.statistic:.2f}, df = {portmanteau_test.df} "
            f"[{portmanteau_test.p_value:.4f}]")
    for i, eq in enumerate(fit.equations, 1):
        out.append("")
        out.append(_var_equation_block(eq, str(i)))
        if granger:
            block = [t for t in granger if t.name.endswith(f"in eq {eq.name}")]
            if block:
                out.append("")
                out.append("F-tests of zero restrictions:")
                for t in block:
                    var = t.name.split(" in eq ")[0].replace("all lags of ", "")
                    out.append(
                        f"  All lags of {var:<12} F({t.df[0]}, {t.df[1]}) = "
                        f"{_g(t.statistic, 5):>10} [{t.p_value:.4f}]")
    out.append("")
    return "\n".join(out)


def render_varma(fit) -> str:
    out = ["Equation system, Ordinary Least Squares"]
    for i, eq in enumerate(fit.equations, 1):
        out.append("")
        out.append(f"Equation {i}: OLS, using observations "
                   f"{_sample_label(fit.sample, fit.nobs)}")
        out.append(f"Dependent variable: {eq.name}")
        out.append("")
        out.append(_coeff_table(eq.coeff_names, eq.coefficients,
                                eq.std_errors, eq.t_stats, eq.p_values,
                                stat_label="t-ratio"))
        out.append("")
        out.append(_stat_pairs([
            ("Mean dependent var", eq.mean_dependent),
            ("S.D. dependent var", eq.sd_dependent),
            ("Sum squared resid", eq.ssr),
            ("S.E. of regression", eq.ser),
            ("R-squared", eq.r_squared),
            ("Adjusted R-squared", eq.adj_r_squared),
        ]))
    out.append("")
    out.append("Cross-equation VCV for residuals")
    out.append("(correlations above the diagonal)")
    out.append("")
    n = len(fit.variable_names)
    for i in range(n):
        cells = []
        for j in range(n):
            if j > i:
                cells.append(f"({fit.correlations[i, j]:.3f})")
            else:
                cells.append(_g(fit.sigma_ml[i, j], 5))
        out.append("  " + "  ".join(f"{c:>12}" for c in cells))
    out.append("")
    out.append(f"log determinant = {_g(fit.log_det_sigma)}")
    out.append("")
    out.append("Breusch-Pagan test for diagonal covariance matrix:")
    bp = fit.breusch_pagan
    out.append(f"  Chi-square({bp.df}) = {_g(bp.statistic)} "
               f"[{bp.p_value:.4f}]")
    out.append("")
    return "\n".join(out)


def render_irf(tables: Sequence, variable_names: Sequence[str]) -> str:
    """One block per shock: period column plus one response column per
    variable, in a one-standard-error Cholesky scaling."""
    out = []
    for shock in variable_names:
        cols = [t for t in tables if t.shock_variable == shock]
        if not cols:
            continue
        by_resp = {t.response_variable: t.values for t in cols}
        out.append(f"Responses to a one-standard error shock in {shock}")
        out.append("")
        head = f"  {'period':>6}"
        for name in variable_names:
            head += f"  {name:>14}"
        out.append(head)
        horizon = len(cols[0].values)
        for h in range(horizon):
            line = f"  {h + 1:>6}"
            for name in variable_names:
                line += f"  {_g(float(by_resp[name][h]), 5):>14}"
            out.append(line)
        out.append("")
    return "\n".join(out)


def render_fevd(tables: Sequence, variable_names: Sequence[str]) -> str:
    """Variance-decomposition block per variable: forecast standard error
    and percentage shares, rows summing to 100."""
    out = []
    for tab in tables:
        out.append(f"Decomposition of variance for {tab.variable}")
        out.append("")
        head = f"  {'period':>6}  {'std. error':>12}"
        for name in variable_names:
            head += f"  {name:>12}"
        out.append(head)
        out.append("  " + "-" * (len(head) - 2))
        for h, se, shares in tab.rows:
            line = f"  {h:>6}  {se:>12.4f}"
            for share in shares:
                line += f"  {share:>12.4f}"
            out.append(line)
        out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# unit roots / cointegration

_DET_TITLES = {
    "none": "test without constant",
    "constant": "test with constant",
    "constant+trend": "test with constant and trend",
}
_DET_MODELS = {
    "none": "(1-L)y = (a-1)*y(-1) + ... + e",
    "constant": "(1-L)y = b0 + (a-1)*y(-1) + ... + e",
    "constant+trend": "(1-L)y = b0 + b1*t + (a-1)*y(-1) + ... + e",
}
_TAU_NAMES = {"none": "tau_nc", "constant": "tau_c",
              "constant+trend": "tau_ct"}


def render_adf(res: AdfResult) -> str:
    k = res.lags_used
    name = res.series_name
    out = [f"{'Augmented ' if k > 0 else ''}Dickey-Fuller test for {name}"]
    if k == 1:
        out.append(f"including one lag of (1-L){name}")
    elif k > 1:
        out.append(f"including {k} lags of (1-L){name}")
    if res.selection == "modified_aic":
        out.append(f"(max was {res.max_lag}, criterion modified AIC)")
    out.append(f"sample size {res.nobs}")
    out.append("unit-root null hypothesis: a = 1")
    out.append("")
    out.append(f"  {_DET_TITLES[res.deterministic]}")
    out.append(f"  model: {_DET_MODELS[res.deterministic]}")
    out.append(f"  1st-order autocorrelation coeff. for e: "
               f"{res.first_order_resid_autocorr:.3f}")
    if res.lagged_diff_F is not None:
        f = res.lagged_diff_F
        out.append(f"  lagged differences: F({f.df[0]}, {f.df[1]}) = "
                   f"{_g(f.statistic, 4)} [{f.p_value:.4f}]")
    out.append(f"  estimated value of (a - 1): "
               f"{_g(res.coefficient_minus_one)}")
    out.append(f"  test statistic: {_TAU_NAMES[res.surface]}"
               f"({res.n_variables}) = {_g(res.tau_statistic)}")
    out.append(f"  asymptotic p-value {_g(res.p_value, 4)}")
    out.append("")
    return "\n".join(out)


def render_ols(reg: CointegratingRegression) -> str:
    out = [f"OLS, using observations {_sample_label(reg.sample, reg.nobs)}",
           f"Dependent variable: {reg.dependent_name}", ""]
    out.append(_coeff_table(reg.regressor_names, reg.coefficients,
                            reg.std_errors, reg.t_stats, reg.p_values,
                            stat_label="t-ratio"))
    out.append("")
    out.append(_stat_pairs([
        ("Mean dependent var", reg.mean_dependent),
        ("S.D. dependent var", reg.sd_dependent),
        ("Sum squared resid", reg.ssr),
        ("S.E. of regression", reg.ser),
        ("R-squared", reg.r_squared),
        ("Adjusted R-squared", reg.adj_r_squared),
        ("Log-likelihood", reg.loglik),
        ("Akaike criterion", reg.aic),
        ("Schwarz criterion", reg.bic),
        ("Hannan-Quinn", reg.hqc),
        ("rho", reg.rho),
        ("Durbin-Watson", reg.durbin_watson),
    ]))
    out.append("")
    return "\n".join(out)


def render_cointegration(rep: CointegrationReport) -> str:
    y = rep.step3.dependent_name
    x = rep.step3.regressor_names[-1]
    out = ["Engle-Granger cointegration test",
           f"significance level: {rep.level:g}", "",
           f"Step 1: testing for a unit root in {y}", "",
           render_adf(rep.step1),
           f"Step 2: testing for a unit root in {x}", "",
           render_adf(rep.step2),
           "Step 3: cointegrating regression", "",
           "Cointegrating regression -",
           render_ols(rep.step3),
           "Step 4: testing for a unit root in uhat", "",
           render_adf(rep.step4)]
    out.append("There is evidence for a cointegrating relationship if:")
    out.append("(a) The unit-root hypothesis is not rejected for the "
                "individual variables, and")
    out.append("(b) the unit-root hypothesis is rejected for the residuals "
                "(uhat) from the")
    out.append("    cointegrating regression.")
    out.append("")
    verdict = ("cointegrated" if rep.conclusion == "cointegrated"
               else "not cointegrated")
    out.append(f"Conclusion: {verdict} at the {rep.level:g} level.")
    out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# volatility models

def render_garch(fit: GarchFit) -> str:
    spec = fit.spec
    dist = _DIST_LABELS[spec.distribution]
    out = [f"Model: {spec.label} ({dist})",
           f"Dependent variable: {fit.dependent_name}",
           f"Sample: {_sample_label(fit.sample, fit.nobs)}, "
           f"VCV method: Hessian", ""]
    mean_names = ("theta",) if spec.mean == "in_mean" else ("const",)
    n_mean = len(mean_names)
    out.append("Conditional mean equation")
    out.append("")
    out.append(_coeff_table(fit.coeff_names[:n_mean],
                            fit.coefficients[:n_mean],
                            fit.std_errors[:n_mean], fit.z_stats[:n_mean],
                            fit.p_values[:n_mean]))
    out.append("")
    out.append("Conditional variance equation")
    out.append("")
    out.append(_coeff_table(fit.coeff_names[n_mean:],
                            fit.coefficients[n_mean:],
                            fit.std_errors[n_mean:], fit.z_stats[n_mean:],
                            fit.p_values[n_mean:]))
    if fit.gjr_alternative is not None:
        # second table restates the variance equation with the news term
        # written as alpha*(|e| - gamma*e)^2; omega and beta carry over
        alt = fit.gjr_alternative
        names, vals, ses = ["omega"], [fit.coefficient("omega")], []
        iw = list(fit.coeff_names).index("omega")
        ses.append(fit.std_errors[iw])
        names += ["alpha", "gamma"]
        vals += [alt["alpha"], alt["gamma"]]
        ses += [alt.get("alpha_se", math.nan), alt.get("gamma_se", math.nan)]
        if "beta_1" in fit.coeff_names:
            ib = list(fit.coeff_names).index("beta_1")
            names.append("beta")
            vals.append(fit.coefficients[ib])
            ses.append(fit.std_errors[ib])
        zs = [v / s if s and s > 0 else math.nan
              for v, s in zip(vals, ses)]
        ps = [math.erfc(abs(z) / math.sqrt(2.0)) if math.isfinite(z)
              else math.nan for z in zs]
        out.append("")
        out.append("(alt. parametrization)")
        out.append("")
        out.append(_coeff_table(names, vals, ses, zs, ps))
    out.append("")
    out.append(f"Llik: {fit.loglik:>12.5f}   AIC: {fit.aic:>12.5f}")
    out.append(f"BIC:  {fit.bic:>12.5f}   HQC: {fit.hqc:>12.5f}")
    if fit.unconditional_variance is not None:
        out.append("")
        out.append(f"Unconditional error variance = "
                   f"{_g(fit.unconditional_variance)}")
    out.append("")
    return "\n".join(out)


def render_comparison(rows: Sequence[ComparisonRow]) -> str:
    """Goodness-of-fit matrix. All-normal inputs give a flat table; mixed
    distributions are grouped under their model label."""
    def fmt(v: float) -> str:
        return f"{v:.4f}" if math.isfinite(v) else "N/A"

    all_normal = all(r.distribution == "normal" for r in rows)
    out = ["Goodness-of-fit comparison", ""]
    head = f"  {'Model':<24}{'AIC':>12}  {'BIC':>12}  {'HQC':>12}"
    out.append(head)
    out.append("  " + "-" * (len(head) - 2))
    if all_normal:
        for r in rows:
            label = r.label + ("*" if r.all_significant else "")
            out.append(f"  {label:<24}{fmt(r.aic):>12}  {fmt(r.bic):>12}  "
                       f"{fmt(r.hqc):>12}")
    else:
        seen = []
        for r in rows:
            if r.label not in seen:
                seen.append(r.label)
        by_label = {lab: [r for r in rows if r.label == lab] for lab in seen}
        for lab in seen:
            out.append(f"  {lab}")
            for r in by_label[lab]:
                dist = _DIST_LABELS[r.distribution]
                dist += "*" if r.all_significant else ""
                out.append(f"    {dist:<22}{fmt(r.aic):>12}  {fmt(r.bic):>12}"
                           f"  {fmt(r.hqc):>12}")
    out.append("")
    out.append("* all coefficients individually significant at the 5% level")
    if any(not r.converged for r in rows):
        out.append("N/A: estimation failed for that model/distribution")
    out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# generic ML block (state-space ARMA)

def render_ml_block(title: str, names: Sequence[str], estimates, std_errors,
                    z_stats, p_values, loglik: float, aic: float, bic: float,
                    hqc: float) -> str:
    out = [title, "Standard errors based on Hessian", ""]
    out.append(_coeff_table(names, estimates, std_errors, z_stats, p_values,
                            stat_label="z"))
    out.append("")
    out.append(_stat_pairs([
        ("Log-likelihood", loglik),
        ("Akaike criterion", aic),
        ("Schwarz criterion", bic),
        ("Hannan-Quinn", hqc),
    ]))
    out.append("")
    return "\n".join(out)


def render_frequency_distribution(name: str, bins: Sequence[FrequencyBin],
                                  mean: float, sd: float,
                                  normality: Optional[TestResult] = None
                                  ) -> str:
    out = [f"Frequency distribution for {name}",
           f"number of bins = {len(bins)}, mean = {_g(mean)}, "
           f"sd = {_g(sd)}", "",
           f"  {'interval':>24}  {'midpt':>10}  {'frequency':>9}  "
           f"{'rel.':>7}  {'cum.':>7}"]
    total = sum(b.count for b in bins)
    for i, b in enumerate(bins):
        if i == 0:
            interval = f"< {_g(b.upper, 5)}"
        elif i == len(bins) - 1:
            interval = f">= {_g(b.lower, 5)}"
        else:
            interval = f"{_g(b.lower, 5)} - {_g(b.upper, 5)}"
        stars = "*" * int(round(36.0 * b.count / total)) if total else ""
        line = (f"  {interval:>24}  {_g(b.midpoint, 5):>10}  {b.count:>9}  "
                f"{b.relative:>6.2f}%  {b.cumulative:>6.2f}%")
        if stars:
            line += f"  {stars}"
        out.append(line)
    if normality is not None:
        out.append("")
        out.append("Test for null hypothesis of normal distribution:")
        out.append(f"  Chi-square({normality.df}) = "
                   f"{_g(normality.statistic, 5)} with p-value "
                   f"{normality.p_value:.5f}")
    out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# JSON / CSV / plot files

def to_jsonable(obj):
    """Recursive conversion to JSON-safe structures: dataclasses become
    objects, numpy scalars/arrays become numbers/lists, periods and ranges
    become their string form, NaN/inf become null."""
    if obj is None or isinstance(obj, (bool, str, int)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return to_jsonable(float(obj))
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (Period, SampleRange)):
        return str(obj)
    if isinstance(obj, TimeSeries):
        return {"name": obj.name, "start": str(obj.start),
                "values": [to_jsonable(float(v)) for v in obj.values]}
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name))
                for f in dataclasses.fields(obj) if f.repr}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    return str(obj)


def emit_json(obj, **extra) -> str:
    payload = to_jsonable(obj)
    if extra:
        if not isinstance(payload, dict):
            payload = {"result": payload}
        payload.update({k: to_jsonable(v) for k, v in extra.items()})
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def table_to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def write_xy(path, xs, ys) -> None:
    """Two-column whitespace-separated plot data; quarterly periods are
    written as decimal years."""
    with open(path, "w", encoding="utf-8") as fh:
        for x, y in zip(xs, ys):
            xv = _year_frac(x) if isinstance(x, Period) else float(x)
            fh.write(f"{xv:.4f} {float(y):.10g}\n")


def write_banded(path, xs, ys, lo, hi) -> None:
    """Four-column (x, y, lower, upper) plot data for fan/band figures."""
    with open(path, "w", encoding="utf-8") as fh:
        for x, y, a, b in zip(xs, ys, lo, hi):
            xv = _year_frac(x) if isinstance(x, Period) else float(x)
            fh.write(f"{xv:.4f} {float(y):.10g} {float(a):.10g} "
                     f"{float(b):.10g}\n")
