"""VAR(p) estimation and structural analysis, plus a two-step VARMA fit.

Equation-by-equation OLS on common regressors (equivalent to joint GLS
here), Gaussian system likelihood with the 1/T residual covariance,
orthogonalized impulse responses through a lower Cholesky factor, and
iterated multi-step forecasting.  The two-step VARMA treats lagged
residuals from univariate ARMA fits as fixed regressors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .arima import ForecastPoint
from .diagnostics import TestResult, breusch_pagan_diagonal
from .errors import DomainError, NumericalError
from .series import SampleRange, TimeSeries

__all__ = [
    "VarEquation",
    "VarFit",
    "LagOrderRow",
    "IrfTable",
    "FevdTable",
    "VarmaEquation",
    "VarmaFit",
    "select_lag_order",
    "fit_var",
    "granger_f_tests",
    "stability_roots",
    "impulse_response",
    "fevd",
    "forecast_var",
    "portmanteau",
    "fit_varma_two_step",
]

_LN2PI = math.log(2.0 * math.pi)


def _aligned_matrix(data) -> tuple[np.ndarray, list, object]:
    if len(data) < 2:
        raise DomainError("need at least two series")
    start = data[0].start
    n_obs = len(data[0].values)
    for s in data[1:]:
        if s.start != start or len(s.values) != n_obs:
            raise DomainError("series must be aligned on a common sample")
    mat = np.column_stack([s.values for s in data])
    names = [s.name or f"v{i+1}" for i, s in enumerate(data)]
    return mat, names, start


def _lagged_design(mat: np.ndarray, p: int, offset: int, include_const: bool):
    """Regressor matrix for rows offset..T-1: const then lags 1..p
    (variables fastest)."""
    t_all, n = mat.shape
    rows = t_all - offset
    cols = []
    if include_const:
        cols.append(np.ones(rows))
    for lag in range(1, p + 1):
        for j in range(n):
            cols.append(mat[offset - lag : t_all - lag, j])
    x = np.column_stack(cols) if cols else np.empty((rows, 0))
    return x, mat[offset:]


@dataclass(frozen=True)
class VarEquation:
    name: str
    coeff_names: list
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    ssr: float
    ser: float
    r_squared: float
    adj_r_squared: float
    f_stat: float
    f_pvalue: float
    rho: float
    durbin_watson: float
    mean_dependent: float
    sd_dependent: float


@dataclass
class VarFit:
    lag_order: int
    variable_names: list
    coeff_names: list
    coefficients: np.ndarray  # k x n, column per equation
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    residuals: np.ndarray  # T x n
    sigma_ml: np.ndarray
    sigma_ols: np.ndarray
    equations: list
    loglik: float
    det_sigma_ml: float
    aic: float
    bic: float
    hqc: float
    nobs: int
    n_regressors: int
    include_const: bool
    sample: SampleRange
    data_tail: np.ndarray = field(repr=False, default=None)  # last p rows
    xtx_inv: np.ndarray = field(repr=False, default=None)

    @property
    def n_vars(self) -> int:
        return len(self.variable_names)

    def coefficient_covariance(self, eq_index: int) -> np.ndarray:
        """OLS covariance of one equation's coefficient vector."""
        return self.sigma_ols[eq_index, eq_index] * self.xtx_inv

    def lag_matrices(self) -> list:
        """A_1..A_p, each n x n with A[i,j] = effect of variable j's lag
        on equation i."""
        n, p = self.n_vars, self.lag_order
        base = 1 if self.include_const else 0
        out = []
        for lag in range(p):
            block = self.coefficients[base + lag * n : base + (lag + 1) * n, :]
            out.append(block.T.copy())
        return out

    @property
    def const_vector(self) -> np.ndarray:
        if not self.include_const:
            return np.zeros(self.n_vars)
        return self.coefficients[0, :].copy()


def fit_var(data, p: int, include_const: bool = True) -> VarFit:
    """OLS VAR(p) on aligned series; the estimation rows start p periods
    into the common sample."""
    if p < 1:
        raise DomainError("lag order must be >= 1")
    mat, names, start = _aligned_matrix(data)
    t_all, n = mat.shape
    k = (1 if include_const else 0) + n * p
    if t_all - p <= k + 1:
        raise DomainError(f"sample of {t_all} too short for VAR({p})")
    x, y = _lagged_design(mat, p, p, include_const)
    t_len = y.shape[0]
    xtx = x.T @ x
    try:
        xtx_inv = np.linalg.inv(xtx)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("singular regressor matrix in VAR") from exc
    bmat = xtx_inv @ (x.T @ y)
    u = y - x @ bmat
    sigma_ml = (u.T @ u) / t_len
    sigma_ols = (u.T @ u) / (t_len - k)

    coeff_names = []
    if include_const:
        coeff_names.append("const")
    for lag in range(1, p + 1):
        coeff_names.extend(f"{nm}_{lag}" for nm in names)

    se = np.sqrt(np.outer(np.diag(xtx_inv), np.diag(sigma_ols)))
    with np.errstate(invalid="ignore", divide="ignore"):
        tstats = bmat / se
    pvals = 2.0 * stats.t.sf(np.abs(tstats), t_len - k)

    equations = []
    for j in range(n):
        uj = u[:, j]
        yj = y[:, j]
        ssr = float(uj @ uj)
        tss = float(((yj - yj.mean()) ** 2).sum())
        r2 = 1.0 - ssr / tss if tss > 0 else 0.0
        n_slope = k - (1 if include_const else 0)
        adj = 1.0 - (1.0 - r2) * (t_len - 1) / (t_len - k)
        if n_slope > 0 and r2 < 1.0:
            fstat = (r2 / n_slope) / ((1.0 - r2) / (t_len - k))
            fp = float(stats.f.sf(fstat, n_slope, t_len - k))
        else:
            fstat, fp = math.nan, math.nan
        denom = float(uj[:-1] @ uj[:-1])
        rho = float(uj[1:] @ uj[:-1]) / denom if denom > 0 else 0.0
        dw = float(((uj[1:] - uj[:-1]) ** 2).sum() / (uj @ uj)) if ssr > 0 else 0.0
        equations.append(VarEquation(
            name=names[j],
            coeff_names=list(coeff_names),
            coefficients=bmat[:, j].copy(),
            std_errors=se[:, j].copy(),
            t_stats=tstats[:, j].copy(),
            p_values=pvals[:, j].copy(),
            ssr=ssr,
            ser=math.sqrt(ssr / (t_len - k)),
            r_squared=r2,
            adj_r_squared=adj,
            f_stat=fstat,
            f_pvalue=fp,
            rho=rho,
            durbin_watson=dw,
            mean_dependent=float(yj.mean()),
            sd_dependent=float(yj.std(ddof=1)),
        ))

    sign, logdet = np.linalg.slogdet(sigma_ml)
    if sign <= 0:
        raise NumericalError("residual covariance is not positive definite")
    ll = -0.5 * t_len * (n * _LN2PI + logdet + n)
    big_k = n * k
    aic = (-2.0 * ll + 2.0 * big_k) / t_len
    bic = (-2.0 * ll + big_k * math.log(t_len)) / t_len
    hqc = (-2.0 * ll + 2.0 * big_k * math.log(math.log(t_len))) / t_len

    sample = SampleRange(start + p, start + (t_all - 1))
    return VarFit(
        lag_order=p,
        variable_names=names,
        coeff_names=coeff_names,
        coefficients=bmat,
        std_errors=se,
        t_stats=tstats,
        p_values=pvals,
        residuals=u,
        sigma_ml=sigma_ml,
        sigma_ols=sigma_ols,
        equations=equations,
        loglik=ll,
        det_sigma_ml=float(math.exp(logdet)),
        aic=aic,
        bic=bic,
        hqc=hqc,
        nobs=t_len,
        n_regressors=k,
        include_const=include_const,
        sample=sample,
        data_tail=mat[-p:].copy(),
        xtx_inv=xtx_inv,
    )


@dataclass(frozen=True)
class LagOrderRow:
    lag: int
    loglik: float
    lr_pvalue: float | None
    aic: float
    bic: float
    hqc: float
    aic_min: bool = False
    bic_min: bool = False
    hqc_min: bool = False


def select_lag_order(data, max_lag: int, include_const: bool = True) -> list:
    """Criteria table over lag orders 1..max_lag on the common sample
    fixed by max_lag; LR tests compare adjacent orders."""
    if max_lag < 1:
        raise DomainError("max_lag must be >= 1")
    mat, _, _ = _aligned_matrix(data)
    t_all, n = mat.shape
    if t_all - max_lag <= (1 if include_const else 0) + n * max_lag + 1:
        raise DomainError("sample too short for the requested maximum lag")

    lls = []
    for lag in range(max_lag + 1):
        x, y = _lagged_design(mat, lag, max_lag, include_const)
        t_len = y.shape[0]
        if x.shape[1]:
            coef, *_ = np.linalg.lstsq(x, y, rcond=None)
            u = y - x @ coef
        else:
            u = y.copy()
        sig = (u.T @ u) / t_len
        sign, logdet = np.linalg.slogdet(sig)
        if sign <= 0:
            raise NumericalError(f"singular covariance at lag {lag}")
        lls.append(-0.5 * t_len * (n * _LN2PI + logdet + n))

    rows = []
    for lag in range(1, max_lag + 1):
        k = (1 if include_const else 0) + n * lag
        big_k = n * k
        ll = lls[lag]
        aic = (-2.0 * ll + 2.0 * big_k) / t_len
        bic = (-2.0 * ll + big_k * math.log(t_len)) / t_len
        hqc = (-2.0 * ll + 2.0 * big_k * math.log(math.log(t_len))) / t_len
        if lag == 1:
            lrp = None
        else:
            lr = 2.0 * (ll - lls[lag - 1])
            lrp = float(stats.chi2.sf(lr, n * n))
        rows.append([lag, ll, lrp, aic, bic, hqc])

    aics = [r[3] for r in rows]
    bics = [r[4] for r in rows]
    hqcs = [r[5] for r in rows]
    out = []
    for r in rows:
        out.append(LagOrderRow(
            lag=r[0], loglik=r[1], lr_pvalue=r[2],
            aic=r[3], bic=r[4], hqc=r[5],
            aic_min=r[3] == min(aics),
            bic_min=r[4] == min(bics),
            hqc_min=r[5] == min(hqcs),
        ))
    return out


def granger_f_tests(fit: VarFit) -> list:
    """Zero-restriction F-tests: in each equation, all lags of each
    variable jointly."""
    n, p, k = fit.n_vars, fit.lag_order, fit.n_regressors
    t_len = fit.nobs
    base = 1 if fit.include_const else 0
    results = []
    for eq_idx in range(n):
        eq = fit.equations[eq_idx]
        for var_idx in range(n):
            sel = [base + lag * n + var_idx for lag in range(p)]
            b = eq.coefficients[sel]
            # Wald form with the per-equation OLS covariance
            cov = fit.coefficient_covariance(eq_idx)[np.ix_(sel, sel)]
            try:
                fstat = float(b @ np.linalg.solve(cov, b)) / p
            except np.linalg.LinAlgError:
                fstat = math.nan
            pv = float(stats.f.sf(fstat, p, t_len - k)) if math.isfinite(fstat) else math.nan
            results.append(TestResult(
                name=(f"all lags of {fit.variable_names[var_idx]} "
                      f"in eq {eq.name}"),
                statistic=fstat,
                df=(p, t_len - k),
                p_value=pv,
                null_hypothesis=(f"lags of {fit.variable_names[var_idx]} "
                                 f"do not enter the {eq.name} equation"),
            ))
    return results


def stability_roots(fit: VarFit) -> list:
    """Moduli of the companion-matrix eigenvalues (stable iff all < 1)."""
    n, p = fit.n_vars, fit.lag_order
    comp = np.zeros((n * p, n * p))
    mats = fit.lag_matrices()
    for i, a in enumerate(mats):
        comp[:n, i * n : (i + 1) * n] = a
    if p > 1:
        comp[n:, : n * (p - 1)] = np.eye(n * (p - 1))
    eigs = np.linalg.eigvals(comp)
    return sorted((float(abs(e)) for e in eigs), reverse=True)


def _ma_matrices(fit: VarFit, horizon: int) -> list:
    """Psi_0..Psi_{horizon-1} of the VMA representation."""
    n = fit.n_vars
    mats = fit.lag_matrices()
    psis = [np.eye(n)]
    for h in range(1, horizon):
        acc = np.zeros((n, n))
        for j, a in enumerate(mats, start=1):
            if h - j >= 0:
                acc += a @ psis[h - j]
        psis.append(acc)
    return psis


def _chol_lower(fit: VarFit, ordering) -> tuple[np.ndarray, list]:
    names = fit.variable_names
    if ordering is None:
        order = list(range(fit.n_vars))
    else:
        order = [names.index(v) if isinstance(v, str) else int(v)
                 for v in ordering]
        if sorted(order) != list(range(fit.n_vars)):
            raise DomainError("ordering must be a permutation of the variables")
    perm = np.array(order)
    sig = fit.sigma_ml[np.ix_(perm, perm)]
    try:
        chol = np.linalg.cholesky(sig)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("residual covariance not positive definite") from exc
    # undo the permutation so rows/columns are in original variable order
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    p_full = chol[np.ix_(inv, inv)]
    return p_full, [names[i] for i in order]


@dataclass(frozen=True)
class IrfTable:
    shock_variable: str
    response_variable: str
    values: np.ndarray  # index 0 = period 1 (impact)


def impulse_response(fit: VarFit, horizon: int, ordering=None) -> list:
    """Responses to one-standard-error orthogonalized shocks; period 1 is
    the impact period (the Cholesky column itself)."""
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    pmat, _ = _chol_lower(fit, ordering)
    psis = _ma_matrices(fit, horizon)
    tables = []
    for shock in range(fit.n_vars):
        shock_col = pmat[:, shock]
        resp = np.array([psi @ shock_col for psi in psis])  # horizon x n
        for var in range(fit.n_vars):
            tables.append(IrfTable(
                shock_variable=fit.variable_names[shock],
                response_variable=fit.variable_names[var],
                values=resp[:, var].copy(),
            ))
    return tables


@dataclass(frozen=True)
class FevdTable:
    variable: str
    rows: list  # (period, std_error, shares tuple in %)


def fevd(fit: VarFit, horizon: int, ordering=None) -> list:
    """Forecast-error variance decomposition; shares are percentages that
    sum to 100 in every row."""
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    pmat, _ = _chol_lower(fit, ordering)
    psis = _ma_matrices(fit, horizon)
    n = fit.n_vars
    acc = np.zeros((n, n))  # [variable, shock] cumulative squared responses
    tables = [[] for _ in range(n)]
    for h, psi in enumerate(psis, start=1):
        theta = psi @ pmat
        acc += theta**2
        total = acc.sum(axis=1)
        for var in range(n):
            shares = tuple(100.0 * acc[var] / total[var])
            tables[var].append((h, math.sqrt(total[var]), shares))
    return [FevdTable(fit.variable_names[v], tables[v]) for v in range(n)]


def forecast_var(fit: VarFit, horizon: int, confidence: float = 0.95) -> dict:
    """Iterated point forecasts with Student-t interval bands; returns
    {variable: [ForecastPoint, ...]}."""
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    if not 0.0 < confidence < 1.0:
        raise DomainError("confidence must lie in (0,1)")
    n, p = fit.n_vars, fit.lag_order
    mats = fit.lag_matrices()
    c = fit.const_vector
    hist = [fit.data_tail[-(j + 1)].copy() for j in range(p)]  # hist[0]=t, ...
    points = np.empty((horizon, n))
    for h in range(horizon):
        nxt = c.copy()
        for j, a in enumerate(mats):
            nxt += a @ hist[j]
        points[h] = nxt
        hist = [nxt] + hist[:-1]

    psis = _ma_matrices(fit, horizon)
    mse_diag = np.zeros(n)
    ses = np.empty((horizon, n))
    for h, psi in enumerate(psis):
        term = psi @ fit.sigma_ml @ psi.T
        mse_diag += np.diag(term)
        ses[h] = np.sqrt(mse_diag)

    tq = float(stats.t.ppf(0.5 + confidence / 2.0, fit.nobs - fit.n_regressors))
    out = {}
    for var in range(n):
        rows = []
        for h in range(horizon):
            per = fit.sample.end + (h + 1)
            pt, se = float(points[h, var]), float(ses[h, var])
            rows.append(ForecastPoint(per, pt, se, pt - tq * se, pt + tq * se))
        out[fit.variable_names[var]] = rows
    return out


def portmanteau(fit: VarFit, lags: int) -> TestResult:
    """Multivariate Ljung-Box on the residual autocovariance matrices;
    df = n^2 (lags - p)."""
    if lags <= fit.lag_order:
        raise DomainError("lags must exceed the VAR order")
    u = fit.residuals
    t_len, n = u.shape
    if lags >= t_len:
        raise DomainError("lags must be smaller than the sample")
    um = u - u.mean(axis=0)
    c0 = (um.T @ um) / t_len
    c0_inv = np.linalg.inv(c0)
    stat = 0.0
    for j in range(1, lags + 1):
        cj = (um[j:].T @ um[:-j]) / t_len
        stat += float(np.trace(cj.T @ c0_inv @ cj @ c0_inv)) / (t_len - j)
    stat *= t_len * (t_len + 2.0)
    df = n * n * (lags - fit.lag_order)
    return TestResult(
        name=f"Portmanteau LB({lags})",
        statistic=stat,
        df=df,
        p_value=float(stats.chi2.sf(stat, df)),
        null_hypothesis="no residual autocorrelation up to the given order",
    )


# --- two-step VARMA -------------------------------------------------------

@dataclass(frozen=True)
class VarmaEquation:
    name: str
    coeff_names: list
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    ssr: float
    ser: float
    r_squared: float
    adj_r_squared: float
    mean_dependent: float
    sd_dependent: float
    rho: float
    durbin_watson: float


@dataclass
class VarmaFit:
    ma_lags: int
    variable_names: list
    equations: list
    residuals: np.ndarray
    sigma_ml: np.ndarray
    correlations: np.ndarray
    log_det_sigma: float
    breusch_pagan: TestResult
    nobs: int
    sample: SampleRange


def fit_varma_two_step(data, residual_sources, ma_lags: int = 1) -> VarmaFit:
    """Second step of the two-step VARMA estimator: OLS of each series on
    a constant, both series lagged once, and 1..ma_lags lags of both
    univariate ARMA residual series.

    ``residual_sources`` supplies those residuals, one per variable:
    ArimaFit objects or residual TimeSeries aligned with ``data``.
    """
    if ma_lags not in (1, 2):
        raise DomainError("ma_lags must be 1 or 2")
    mat, names, start = _aligned_matrix(data)
    resid_series = []
    for src in residual_sources:
        ser = src.residuals if hasattr(src, "residuals") else src
        resid_series.append(ser)
    rmat, rnames, rstart = _aligned_matrix(resid_series)
    if rstart != start or rmat.shape[0] != mat.shape[0]:
        raise DomainError("residual series must align with the data sample")

    t_all, n = mat.shape
    offset = ma_lags if ma_lags > 1 else 1
    rows = t_all - offset
    cols = [np.ones(rows)]
    coeff_names = ["const"]
    for j in range(n):
        cols.append(mat[offset - 1 : t_all - 1, j])
        coeff_names.append(f"{names[j]}_1")
    short = ["a", "b", "c", "d"]
    for lag in range(1, ma_lags + 1):
        for j in range(n):
            cols.append(rmat[offset - lag : t_all - lag, j])
            coeff_names.append(f"{short[j]}_{lag}")
    x = np.column_stack(cols)
    y = mat[offset:]
    t_len = rows
    k = x.shape[1]
    xtx_inv = np.linalg.inv(x.T @ x)
    bmat = xtx_inv @ (x.T @ y)
    u = y - x @ bmat
    sigma = (u.T @ u) / t_len

    equations = []
    for j in range(n):
        uj = u[:, j]
        yj = y[:, j]
        ssr = float(uj @ uj)
        tss = float(((yj - yj.mean()) ** 2).sum())
        r2 = 1.0 - ssr / tss if tss > 0 else 0.0
        adj = 1.0 - (1.0 - r2) * (t_len - 1) / (t_len - k)
        sig2 = ssr / (t_len - k)
        se = np.sqrt(sig2 * np.diag(xtx_inv))
        tstat = bmat[:, j] / se
        pv = 2.0 * stats.t.sf(np.abs(tstat), t_len - k)
        denom = float(uj[:-1] @ uj[:-1])
        equations.append(VarmaEquation(
            name=names[j],
            coeff_names=list(coeff_names),
            coefficients=bmat[:, j].copy(),
            std_errors=se,
            t_stats=tstat,
            p_values=pv,
            ssr=ssr,
            ser=math.sqrt(sig2),
            r_squared=r2,
            adj_r_squared=adj,
            mean_dependent=float(yj.mean()),
            sd_dependent=float(yj.std(ddof=1)),
            rho=float(uj[1:] @ uj[:-1]) / denom if denom > 0 else 0.0,
            durbin_watson=float(((uj[1:] - uj[:-1]) ** 2).sum() / ssr) if ssr else 0.0,
        ))

    d = np.sqrt(np.diag(sigma))
    corr = sigma / np.outer(d, d)
    sign, logdet = np.linalg.slogdet(sigma)
    if sign <= 0:
        raise NumericalError("residual covariance not positive definite")
    bp = breusch_pagan_diagonal(u)
    sample = SampleRange(start + offset, start + (t_all - 1))
    return VarmaFit(
        ma_lags=ma_lags,
        variable_names=names,
        equations=equations,
        residuals=u,
        sigma_ml=sigma,
        correlations=corr,
        log_det_sigma=float(logdet),
        breusch_pagan=bp,
        nobs=t_len,
        sample=sample,
    )
