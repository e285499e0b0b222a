"""ARIMA(p,d,q) and regression-with-ARMA-errors estimation by exact ML.

The mean equation is written on the d-times differenced scale,

    w_t = const + x_t' beta + u_t,        u_t ~ ARMA(p, q),

and the Gaussian likelihood of u is evaluated exactly through the Kalman
filter with stationary initialization.  Exogenous regressors enter
contemporaneously and are taken as given (the caller differences them if
the model calls for it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FitError, NumericalError
from .kalman import arma_to_state_space, diffuse_initialization, kalman_filter
from .optimize import Objective, covariance_hessian, maximize, std_errors_from
from .series import SampleRange, TimeSeries, diff

__all__ = [
    "ArimaSpec",
    "ArimaFit",
    "PolyRoot",
    "ForecastPoint",
    "fit_arima",
    "fit_armax",
    "lag_polynomial_roots",
    "forecast_arima",
    "residual_report",
]

_SQRT2 = math.sqrt(2.0)


def _two_sided_p(z: float) -> float:
    if not math.isfinite(z):
        return math.nan
    return math.erfc(abs(z) / _SQRT2)


def _normal_quantile(prob: float) -> float:
    """Inverse standard normal CDF (Acklam rational approximation,
    refined by one Halley step; |error| < 1e-13 on (0,1))."""
    if not 0.0 < prob < 1.0:
        raise DomainError(f"quantile probability must lie in (0,1), got {prob}")
    a = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
         1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
    b = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
         6.680131188771972e01, -1.328068155288572e01)
    c = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
         -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
    d = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
         3.754408661907416e00)
    plow = 0.02425
    if prob < plow:
        qv = math.sqrt(-2.0 * math.log(prob))
        x = (((((c[0] * qv + c[1]) * qv + c[2]) * qv + c[3]) * qv + c[4]) * qv + c[5]) / \
            ((((d[0] * qv + d[1]) * qv + d[2]) * qv + d[3]) * qv + 1.0)
    elif prob <= 1.0 - plow:
        qv = prob - 0.5
        r = qv * qv
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * qv / \
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    else:
        qv = math.sqrt(-2.0 * math.log(1.0 - prob))
        x = -(((((c[0] * qv + c[1]) * qv + c[2]) * qv + c[3]) * qv + c[4]) * qv + c[5]) / \
            ((((d[0] * qv + d[1]) * qv + d[2]) * qv + d[3]) * qv + 1.0)
    # Halley refinement against the exact CDF (erfc)
    e = 0.5 * math.erfc(-x / _SQRT2) - prob
    u = e * math.sqrt(2.0 * math.pi) * math.exp(x * x / 2.0)
    return x - u / (1.0 + x * u / 2.0)


@dataclass(frozen=True)
class ArimaSpec:
    """Model orders plus the deterministic/exogenous part of the mean."""

    p: int
    d: int
    q: int
    include_const: bool = True
    exog: tuple = ()
    exog_names: tuple = ()

    def __post_init__(self):
        if min(self.p, self.d, self.q) < 0:
            raise DomainError("orders must be nonnegative")
        if self.d > 2:
            raise DomainError(f"differencing order {self.d} > 2 not supported")
        if self.p + self.q < 1 and not self.exog:
            raise DomainError("need p+q >= 1 or at least one exogenous regressor")
        if self.exog and not self.exog_names:
            object.__setattr__(
                self, "exog_names",
                tuple(s.name or f"x{i+1}" for i, s in enumerate(self.exog)),
            )


@dataclass(frozen=True)
class PolyRoot:
    real: float
    imaginary: float
    modulus: float
    frequency: float


@dataclass(frozen=True)
class ForecastPoint:
    period: object
    point: float
    std_error: float
    lower: float
    upper: float


@dataclass
class ArimaFit:
    spec: ArimaSpec
    sample: SampleRange
    dependent_name: str
    nobs: int
    coeff_names: list
    coefficients: np.ndarray
    std_errors: np.ndarray
    z_stats: np.ndarray
    p_values: np.ndarray
    sigma: float
    loglik: float
    k: int
    aic: float
    bic: float
    hqc: float
    mean_innovations: float
    sd_innovations: float
    mean_dependent: float
    sd_dependent: float
    residuals: TimeSeries
    fitted: TimeSeries
    roots_ar: list
    roots_ma: list
    converged: bool
    n_function_evals: int
    covariance: np.ndarray | None
    level: TimeSeries = field(repr=False, default=None)

    @property
    def const(self) -> float:
        return float(self.coefficients[0]) if self.spec.include_const else 0.0

    @property
    def phi(self) -> np.ndarray:
        i0 = 1 if self.spec.include_const else 0
        return np.asarray(self.coefficients[i0 : i0 + self.spec.p])

    @property
    def theta(self) -> np.ndarray:
        i0 = (1 if self.spec.include_const else 0) + self.spec.p
        return np.asarray(self.coefficients[i0 : i0 + self.spec.q])

    @property
    def beta(self) -> np.ndarray:
        i0 = (1 if self.spec.include_const else 0) + self.spec.p + self.spec.q
        return np.asarray(self.coefficients[i0:])


def _roots_ascending(coeffs: np.ndarray) -> list:
    """Roots of 1 + c_1 z + ... + c_m z^m, sorted by frequency."""
    c = np.asarray(coeffs, float)
    if c.size == 0 or np.all(c == 0.0):
        return []
    poly = np.concatenate(([1.0], c))
    roots = np.roots(poly[::-1])
    out = []
    for z in roots:
        re, im = float(z.real), float(z.imag)
        out.append(PolyRoot(re, im, math.hypot(re, im),
                            math.atan2(im, re) / (2.0 * math.pi)))
    out.sort(key=lambda r: (r.frequency, r.real))
    return out


def lag_polynomial_roots(fit: ArimaFit):
    """(AR roots, MA roots) of 1 - phi(z) and 1 + theta(z)."""
    ar = _roots_ascending(-fit.phi) if fit.spec.p else []
    ma = _roots_ascending(fit.theta) if fit.spec.q else []
    return ar, ma


def _companion_radius(phi: np.ndarray) -> float:
    p = phi.size
    if p == 0:
        return 0.0
    if p == 1:
        return abs(float(phi[0]))
    comp = np.zeros((p, p))
    comp[0] = phi
    comp[1:, :-1] = np.eye(p - 1)
    return float(np.max(np.abs(np.linalg.eigvals(comp))))


def _yule_walker(e: np.ndarray, p: int):
    """AR(p) start values from the biased autocovariances; returns
    (phi, innovation variance)."""
    t_len = e.size
    em = e - e.mean()
    cov = np.array([float(em[: t_len - j] @ em[j:]) / t_len for j in range(p + 1)])
    if p == 0 or cov[0] <= 0:
        return np.zeros(p), max(float(np.var(e)), 1e-12)
    toep = np.empty((p, p))
    for i in range(p):
        for j in range(p):
            toep[i, j] = cov[abs(i - j)]
    try:
        phi = np.linalg.solve(toep, cov[1 : p + 1])
    except np.linalg.LinAlgError:
        phi = np.zeros(p)
    for _ in range(30):
        if _companion_radius(phi) < 0.97:
            break
        phi = phi * 0.9
    sig2 = float(cov[0] - phi @ cov[1 : p + 1])
    if not np.isfinite(sig2) or sig2 <= 0:
        sig2 = float(cov[0])
    return phi, sig2


def _design(est: TimeSeries, spec: ArimaSpec):
    """Exogenous columns aligned to the estimation periods.  Identically
    zero columns are dropped from estimation (their coefficient is pinned
    at zero); remaining collinearity is an error."""
    t_len = len(est.values)
    cols = []
    for s, name in zip(spec.exog, spec.exog_names):
        try:
            vals = np.array([s.value_at(per) for per in est.periods()])
        except (KeyError, IndexError) as exc:
            raise DomainError(
                f"exogenous series {name!r} does not cover the sample"
            ) from exc
        cols.append(vals)
    xmat = np.column_stack(cols) if cols else np.empty((t_len, 0))
    active = np.array([np.any(xmat[:, j] != 0.0) for j in range(xmat.shape[1])],
                      dtype=bool)
    check = xmat[:, active]
    if spec.include_const:
        check = np.column_stack([np.ones(t_len), check])
    if check.shape[1] and np.linalg.matrix_rank(check) < check.shape[1]:
        raise NumericalError("collinear exogenous regressors")
    return xmat, active


def _loglik_builder(y: np.ndarray, xmat: np.ndarray, active: np.ndarray,
                    spec: ArimaSpec, log_sigma: bool):
    p, q = spec.p, spec.q
    has_const = spec.include_const
    n_active = int(active.sum())
    xact = xmat[:, active]

    def fn(params):
        i = 0
        const = params[0] if has_const else 0.0
        i += 1 if has_const else 0
        phi = np.asarray(params[i : i + p], float)
        i += p
        theta = np.asarray(params[i : i + q], float)
        i += q
        beta = np.asarray(params[i : i + n_active], float)
        s_par = params[-1]
        if log_sigma:
            if abs(s_par) > 30.0:
                return -np.inf
            sigma = math.exp(s_par)
        else:
            sigma = float(s_par)
            if sigma <= 0.0:
                return -np.inf
        if p and _companion_radius(phi) >= 1.0 - 1e-9:
            return -np.inf
        offset = const + (xact @ beta if n_active else 0.0)
        try:
            model = diffuse_initialization(arma_to_state_space(phi, theta, sigma))
            out = kalman_filter(model, y - offset)
        except (DomainError, NumericalError):
            return -np.inf
        return out.loglik_total, out.loglik_per_obs

    dim = (1 if has_const else 0) + p + q + n_active + 1
    return Objective(dim, fn), n_active


def _start_values(y: np.ndarray, xmat: np.ndarray, active: np.ndarray,
                  spec: ArimaSpec):
    t_len = y.size
    xact = xmat[:, active]
    n_active = xact.shape[1]
    design = []
    if spec.include_const:
        design.append(np.ones(t_len))
    if n_active:
        design.append(xact)
    if design:
        dm = np.column_stack(design)
        coef, *_ = np.linalg.lstsq(dm, y, rcond=None)
        resid = y - dm @ coef
    else:
        coef = np.empty(0)
        resid = y.copy()
    phi0, sig2 = _yule_walker(resid, spec.p) if spec.p else (np.zeros(0),
                                              max(float(np.var(resid)), 1e-12))
    start = []
    j = 0
    if spec.include_const:
        start.append(float(coef[0]))
        j = 1
    start.extend(phi0.tolist())
    start.extend([0.0] * spec.q)
    start.extend(coef[j:].tolist())
    start.append(0.5 * math.log(sig2))
    return np.array(start)


def fit_arima(series: TimeSeries, spec: ArimaSpec,
              sample: SampleRange | None = None) -> ArimaFit:
    """Exact-ML fit of the differenced-scale mean equation with ARMA errors.

    Standard errors come from the numerical Hessian of the likelihood in
    the natural (untransformed) parameters at the optimum; the criteria
    count the innovation variance as an estimated parameter.
    """
    work = diff(series, spec.d) if spec.d else series
    est = work.slice(sample) if sample is not None else work
    t_len = len(est.values)
    min_len = spec.d + spec.p + spec.q + len(spec.exog) + 3
    if t_len < min_len:
        raise DomainError(f"sample of {t_len} too short for this model")
    y = est.values
    xmat, active = _design(est, spec)
    n_active = int(active.sum())

    obj, _ = _loglik_builder(y, xmat, active, spec, log_sigma=True)
    start = _start_values(y, xmat, active, spec)
    res = maximize(obj, start)
    if not res.converged:
        # restart from a deliberately bland point before giving up
        bland = start.copy()
        i0 = 1 if spec.include_const else 0
        bland[i0 : i0 + spec.p + spec.q] = 0.0
        res2 = maximize(obj, bland)
        if res2.loglik > res.loglik:
            res = res2
    if not res.converged:
        raise FitError("ARIMA likelihood maximization did not converge",
                       trace=res.trace)

    pars = res.params.copy()
    sigma = math.exp(pars[-1])
    raw = pars.copy()
    raw[-1] = sigma

    raw_obj, _ = _loglik_builder(y, xmat, active, spec, log_sigma=False)
    cov_full = None
    try:
        cov_full = covariance_hessian(raw_obj, raw)
        se_all = std_errors_from(cov_full)
    except NumericalError:
        se_all = np.full(raw.size, np.nan)

    # scatter active-exog estimates back into the declared order
    n_exog = len(spec.exog)
    n_mean = (1 if spec.include_const else 0) + spec.p + spec.q
    coeffs = np.zeros(n_mean + n_exog)
    ses = np.full(n_mean + n_exog, np.nan)
    coeffs[:n_mean] = raw[:n_mean]
    ses[:n_mean] = se_all[:n_mean]
    pos = n_mean
    for j in range(n_exog):
        if active[j]:
            coeffs[n_mean + j] = raw[pos]
            ses[n_mean + j] = se_all[pos]
            pos += 1

    names = []
    if spec.include_const:
        names.append("const")
    names.extend(f"phi_{i+1}" for i in range(spec.p))
    names.extend(f"theta_{i+1}" for i in range(spec.q))
    names.extend(spec.exog_names)

    with np.errstate(invalid="ignore", divide="ignore"):
        zs = coeffs / ses
    pv = np.array([_two_sided_p(z) for z in zs])

    # one-step prediction errors at the optimum
    offset = coeffs[0] if spec.include_const else 0.0
    if n_active:
        offset = offset + xmat[:, active] @ coeffs[n_mean:][active]
    i0 = 1 if spec.include_const else 0
    phi = raw[i0 : i0 + spec.p]
    theta = raw[i0 + spec.p : i0 + spec.p + spec.q]
    model = diffuse_initialization(arma_to_state_space(phi, theta, sigma))
    out = kalman_filter(model, y - offset)
    v = out.prediction_errors[:, 0]

    k = n_mean + n_exog + 1
    ll = res.loglik
    aic = -2.0 * ll + 2.0 * k
    bic = -2.0 * ll + k * math.log(t_len)
    hqc = -2.0 * ll + 2.0 * k * math.log(math.log(t_len))

    fit = ArimaFit(
        spec=spec,
        sample=est.range,
        dependent_name=est.name,
        nobs=t_len,
        coeff_names=names,
        coefficients=coeffs,
        std_errors=ses,
        z_stats=zs,
        p_values=pv,
        sigma=sigma,
        loglik=ll,
        k=k,
        aic=aic,
        bic=bic,
        hqc=hqc,
        mean_innovations=float(v.mean()),
        sd_innovations=sigma,
        mean_dependent=float(y.mean()),
        sd_dependent=float(y.std(ddof=1)),
        residuals=TimeSeries(est.start, v, name="uhat"),
        fitted=TimeSeries(est.start, y - v, name="yhat"),
        roots_ar=_roots_ascending(-phi) if spec.p else [],
        roots_ma=_roots_ascending(theta) if spec.q else [],
        converged=res.converged,
        n_function_evals=res.n_function_evals,
        covariance=cov_full,
        level=series,
    )
    return fit


def fit_armax(series: TimeSeries, spec: ArimaSpec,
              sample: SampleRange | None = None) -> ArimaFit:
    """fit_arima with a nonempty exogenous block; kept as a named entry
    point because the two are reported differently downstream."""
    if not spec.exog:
        raise DomainError("ARMAX requires at least one exogenous series")
    return fit_arima(series, spec, sample)


def _psi_weights(phi: np.ndarray, theta: np.ndarray, n: int) -> np.ndarray:
    p, q = phi.size, theta.size
    psi = np.zeros(n)
    psi[0] = 1.0
    for j in range(1, n):
        acc = theta[j - 1] if j <= q else 0.0
        for i in range(1, min(j, p) + 1):
            acc += phi[i - 1] * psi[j - i]
        psi[j] = acc
    return psi


def forecast_arima(fit: ArimaFit, horizon: int,
                   confidence: float = 0.95) -> list:
    """Dynamic level-scale forecasts with interval bands.

    The point path integrates the differenced-scale conditional mean
    (final filtered state pushed through the transition); the standard
    errors accumulate the psi-weights of the integrated representation,
    so the one-step value equals the innovation standard deviation.
    """
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    if not 0.0 < confidence < 1.0:
        raise DomainError("confidence must lie in (0,1)")
    spec = fit.spec
    zval = _normal_quantile(0.5 + confidence / 2.0)

    # rebuild the filter state at the estimates
    phi, theta, sigma = fit.phi, fit.theta, fit.sigma
    dy = fit.fitted.values + fit.residuals.values
    model = diffuse_initialization(arma_to_state_space(phi, theta, sigma))
    n_mean = (1 if spec.include_const else 0) + spec.p + spec.q
    beta = fit.coefficients[n_mean:]
    offs = np.full(dy.size, fit.const)
    if beta.size:
        for j, s in enumerate(spec.exog):
            vals = np.array([s.value_at(per) for per in fit.residuals.periods()])
            offs += beta[j] * vals
    out = kalman_filter(model, dy - offs)
    a_final = out.filtered_states[-1]

    big_f = model.F
    h_vec = model.H[:, 0]
    last = fit.sample.end

    # future mean offsets (exogenous values must exist through the horizon)
    future = np.full(horizon, fit.const)
    if beta.size:
        for j, s in enumerate(spec.exog):
            for h in range(horizon):
                per = last + (h + 1)
                try:
                    future[h] += beta[j] * s.value_at(per)
                except (KeyError, IndexError):
                    raise DomainError(
                        f"exogenous series {spec.exog_names[j]!r} does not "
                        f"cover forecast period {per}"
                    ) from None

    means_d = np.empty(horizon)
    state = a_final.copy()
    for h in range(horizon):
        state = big_f @ state
        means_d[h] = future[h] + float(h_vec @ state)

    # integrate the point path d times using the level tail
    path = means_d.copy()
    for order in range(spec.d):
        # last value of the (d-order-1)-times differenced series at sample end
        tail = diff(fit.level, spec.d - order - 1) if spec.d - order - 1 else fit.level
        seed = tail.value_at(last)
        path = seed + np.cumsum(path)

    psi = _psi_weights(phi, theta, horizon)
    for _ in range(spec.d):
        psi = np.cumsum(psi)
    se = sigma * np.sqrt(np.cumsum(psi**2))

    rows = []
    for h in range(horizon):
        per = last + (h + 1)
        rows.append(ForecastPoint(per, float(path[h]), float(se[h]),
                                  float(path[h] - zval * se[h]),
                                  float(path[h] + zval * se[h])))
    return rows


def residual_report(fit: ArimaFit, threshold_sd: float = 2.5) -> list:
    """Per-period (period, actual, fitted, residual, flagged) on the level
    scale; flags mark residuals exceeding threshold_sd innovation SDs."""
    rows = []
    cut = threshold_sd * fit.sd_innovations
    for per, resid in zip(fit.residuals.periods(), fit.residuals.values):
        actual = fit.level.value_at(per)
        rows.append((per, float(actual), float(actual - resid), float(resid),
                     bool(abs(resid) > cut)))
    return rows
