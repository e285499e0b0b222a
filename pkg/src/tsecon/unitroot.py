"""Augmented Dickey-Fuller testing and Engle-Granger cointegration.

The ADF regression is Delta(y)_t on deterministic terms, y_{t-1} and k
lagged differences.  Lag order is either fixed or chosen by the Ng-Perron
modified AIC over a common estimation sample whose start is pinned by
``max_lag``, so every candidate (and the final regression) uses the same
observations.  P-values come from the MacKinnon (1996) response surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .diagnostics import TestResult
from .errors import DomainError, NumericalError
from .series import SampleRange, TimeSeries

__all__ = [
    "AdfResult",
    "CointegratingRegression",
    "CointegrationReport",
    "adf_test",
    "engle_granger",
    "mackinnon_pvalue",
]

DETERMINISTIC_CASES = ("none", "constant", "constant+trend")

_DET_ALIASES = {
    "none": "none",
    "nc": "none",
    "n": "none",
    "constant": "constant",
    "c": "constant",
    "const": "constant",
    "constant+trend": "constant+trend",
    "ct": "constant+trend",
    "trend": "constant+trend",
}


def _canon_det(deterministic: str) -> str:
    key = str(deterministic).strip().lower()
    if key not in _DET_ALIASES:
        raise DomainError(
            f"unsupported deterministic case {deterministic!r}; "
            f"expected one of {DETERMINISTIC_CASES}"
        )
    return _DET_ALIASES[key]


# ---------------------------------------------------------------------------
# MacKinnon (1996) response-surface tables, asymptotic (N = 1..6 variables).
# Rows are indexed by N-1.  The quadratic branch applies at or below
# tau_star, the cubic branch above it; outside [tau_min, tau_max] the
# p-value saturates.

_TAU_STAR = {
    "none": [-1.04, -1.53, -2.68, -3.09, -3.07, -3.77],
    "constant": [-1.61, -2.62, -3.13, -3.47, -3.78, -3.93],
    "constant+trend": [-2.89, -3.19, -3.50, -3.65, -3.80, -4.36],
}
_TAU_MIN = {
    "none": [-19.04, -19.62, -21.21, -23.25, -21.63, -25.74],
    "constant": [-18.83, -18.86, -23.48, -28.07, -25.96, -23.27],
    "constant+trend": [-16.18, -21.15, -25.37, -26.63, -26.53, -26.18],
}
_TAU_MAX = {
    "none": [math.inf, 1.51, 0.86, 0.88, 1.05, 1.24],
    "constant": [2.74, 0.92, 0.55, 0.61, 0.79, 1.00],
    "constant+trend": [0.70, 0.63, 0.71, 0.93, 1.19, 1.42],
}

# Quadratic (small-p) coefficients; scale [1, 1, 1e-2].
_SMALL_P = {
    "none": [
        [0.6344, 1.2378, 3.2496],
        [1.9129, 1.3857, 3.5322],
        [2.7648, 1.4502, 3.4186],
        [3.4336, 1.4835, 3.1900],
        [4.0999, 1.5533, 3.5900],
        [4.5388, 1.5344, 2.9807],
    ],
    "constant": [
        [2.1659, 1.4412, 3.8269],
        [2.9200, 1.5012, 3.9796],
        [3.4699, 1.4856, 3.1640],
        [3.9673, 1.4777, 2.6315],
        [4.5509, 1.5338, 2.9545],
        [5.1399, 1.6036, 3.4445],
    ],
    "constant+trend": [
        [3.2512, 1.6047, 4.9588],
        [3.6646, 1.5419, 3.6448],
        [4.0983, 1.5173, 2.9898],
        [4.5844, 1.5338, 2.8796],
        [5.0722, 1.5634, 2.9472],
        [5.5300, 1.5914, 3.0392],
    ],
}
_SMALL_SCALE = (1.0, 1.0, 1e-2)

# Cubic (large-p) coefficients; scale [1, 1e-1, 1e-1, 1e-2].
_LARGE_P = {
    "none": [
        [0.4797, 9.3557, -0.6999, 3.3066],
        [1.5578, 8.5580, -2.0830, -3.3549],
        [2.2268, 6.8093, -3.2362, -5.4448],
        [2.7654, 6.4502, -3.0811, -4.4946],
        [3.2684, 6.8051, -2.6778, -3.4972],
        [3.7268, 7.1670, -2.3648, -2.8288],
    ],
    "constant": [
        [1.7339, 9.3202, -1.2745, -1.0368],
        [2.1945, 6.4695, -2.9198, -4.2377],
        [2.5893, 4.5168, -3.6529, -5.0074],
        [3.0387, 4.5452, -3.3666, -4.1921],
        [3.5049, 5.2098, -2.9158, -3.3468],
        [3.9489, 5.8933, -2.5359, -2.7210],
    ],
    "constant+trend": [
        [2.5261, 6.1654, -3.7956, -6.0285],
        [2.8500, 5.2720, -3.6622, -5.1695],
        [3.2210, 5.2550, -3.2685, -4.1501],
        [3.6520, 5.9758, -2.7483, -3.2081],
        [4.0712, 6.6428, -2.3464, -2.5460],
        [4.4735, 7.1757, -2.0681, -2.1196],
    ],
}
_LARGE_SCALE = (1.0, 1e-1, 1e-1, 1e-2)

_P_FLOOR = 1e-6
_P_CEIL = 1.0 - 1e-6


def mackinnon_pvalue(tau: float, deterministic: str, n_variables: int) -> float:
    """Asymptotic p-value of a (co)integration tau statistic.

    ``n_variables`` selects the tau_c(N) family: 1 for a univariate unit-root
    test, 2..6 for residuals of a cointegrating regression with N variables.
    The result is clamped to [1e-6, 1 - 1e-6].
    """
    det = _canon_det(deterministic)
    if not 1 <= int(n_variables) <= 6:
        raise DomainError(f"n_variables must be in 1..6, got {n_variables}")
    i = int(n_variables) - 1
    tau = float(tau)
    if not math.isfinite(tau):
        raise DomainError("tau statistic must be finite")
    if tau > _TAU_MAX[det][i]:
        return _P_CEIL
    if tau < _TAU_MIN[det][i]:
        return _P_FLOOR
    if tau <= _TAU_STAR[det][i]:
        coefs = [c * s for c, s in zip(_SMALL_P[det][i], _SMALL_SCALE)]
    else:
        coefs = [c * s for c, s in zip(_LARGE_P[det][i], _LARGE_SCALE)]
    z = 0.0
    for c in reversed(coefs):
        z = z * tau + c
    p = 0.5 * math.erfc(-z / math.sqrt(2.0))
    return min(max(p, _P_FLOOR), _P_CEIL)


# ---------------------------------------------------------------------------
# ADF machinery


@dataclass(frozen=True)
class AdfResult:
    """One augmented Dickey-Fuller test."""

    series_name: str
    lags_used: int
    max_lag: int
    selection: str  # "fixed" or "modified_aic"
    coefficient_minus_one: float
    tau_statistic: float
    p_value: float
    deterministic: str
    n_variables: int
    first_order_resid_autocorr: float
    lagged_diff_F: Optional[TestResult]
    nobs: int
    surface: str  # deterministic case of the p-value surface

    def rejects(self, level: float = 0.05) -> bool:
        return self.p_value < level


class _AdfRegression:
    # one OLS pass on the common sample fixed by max_lag
    __slots__ = ("beta", "resid", "tau", "a_minus_1", "se", "nobs",
                 "ssr", "n_det", "k")

    def __init__(self, y: np.ndarray, k: int, max_lag: int, det: str):
        dy = np.diff(y)
        rows = np.arange(max_lag, dy.size)
        t_eff = rows.size
        cols = []
        if det in ("constant", "constant+trend"):
            cols.append(np.ones(t_eff))
        if det == "constant+trend":
            cols.append(np.arange(1.0, t_eff + 1.0))
        n_det = len(cols)
        cols.append(y[rows])  # y_{t-1}: index t-1 in levels == row index in dy
        for j in range(1, k + 1):
            cols.append(dy[rows - j])
        x = np.column_stack(cols)
        if np.linalg.matrix_rank(x) < x.shape[1]:
            raise NumericalError(
                "degenerate Dickey-Fuller regression: collinear design "
                f"(series {t_eff} obs, {k} lagged differences)"
            )
        target = dy[rows]
        beta, _, _, _ = np.linalg.lstsq(x, target, rcond=None)
        resid = target - x @ beta
        ssr = float(resid @ resid)
        dof = t_eff - x.shape[1]
        if dof <= 0:
            raise DomainError("not enough observations for the lag order")
        s2 = ssr / dof
        xtx_inv = np.linalg.inv(x.T @ x)
        se = np.sqrt(np.maximum(s2 * np.diag(xtx_inv), 0.0))
        iy = n_det
        self.beta = beta
        self.resid = resid
        self.a_minus_1 = float(beta[iy])
        self.se = se
        self.tau = float(beta[iy] / se[iy]) if se[iy] > 0 else math.nan
        self.nobs = t_eff
        self.ssr = ssr
        self.n_det = n_det
        self.k = k


def _resid_rho(e: np.ndarray) -> float:
    """Slope of e_t on e_{t-1} without intercept."""
    denom = float(e[:-1] @ e[:-1])
    if denom <= 0.0:
        return 0.0
    return float(e[1:] @ e[:-1]) / denom


def _lagged_diff_f(full: _AdfRegression, y: np.ndarray, max_lag: int,
                   det: str) -> Optional[TestResult]:
    k = full.k
    if k < 1:
        return None
    restricted = _AdfRegression(y, 0, max_lag, det)
    dof = full.nobs - (full.n_det + 1 + k)
    num = (restricted.ssr - full.ssr) / k
    den = full.ssr / dof
    if den <= 0.0:
        return None
    f = num / den
    p = float(stats.f.sf(f, k, dof))
    return TestResult(
        name="lagged differences",
        statistic=float(f),
        df=(k, dof),
        p_value=p,
        null_hypothesis="all lagged-difference coefficients are zero",
    )


def _maic(reg: _AdfRegression, ylag: np.ndarray) -> float:
    # Ng-Perron modified AIC on the common sample: the penalty adds
    # b0^2 * sum(y_{t-1}^2) / s2 to the lag count, with s2 = SSR/T.
    t_eff = reg.nobs
    s2 = reg.ssr / t_eff
    tau_term = reg.a_minus_1 ** 2 * float(ylag @ ylag) / s2
    return math.log(s2) + 2.0 * (tau_term + reg.k) / t_eff


def adf_test(
    series: TimeSeries,
    max_lag: int,
    deterministic: str = "constant",
    lag_selection: str = "modified_aic",
    n_variables: int = 1,
    surface: Optional[str] = None,
) -> AdfResult:
    """Augmented Dickey-Fuller unit-root test.

    With ``lag_selection="modified_aic"`` the lag count k is picked from
    1..max_lag by the Ng-Perron modified AIC; all candidate regressions and
    the final one share the sample implied by ``max_lag``.  With ``"fixed"``
    the regression uses exactly ``max_lag`` lagged differences.

    ``surface`` overrides the deterministic case of the MacKinnon p-value
    surface (used by the cointegration step 4, which fits no constant but
    reads the constant surface).
    """
    det = _canon_det(deterministic)
    if lag_selection not in ("fixed", "modified_aic"):
        raise DomainError(
            f"lag_selection must be 'fixed' or 'modified_aic', got {lag_selection!r}"
        )
    max_lag = int(max_lag)
    if max_lag < 0:
        raise DomainError("max_lag must be >= 0")
    y = np.asarray(series.values, dtype=float)
    n_det = {"none": 0, "constant": 1, "constant+trend": 2}[det]
    # common sample must leave room for the widest candidate regression
    needed = max_lag + 2 + (n_det + 1 + max_lag)
    if y.size < needed:
        raise DomainError(
            f"series too short for ADF with max_lag={max_lag}: "
            f"{y.size} obs, need at least {needed}"
        )

    if lag_selection == "fixed" or max_lag == 0:
        k = max_lag
        reg = _AdfRegression(y, k, max_lag, det)
    else:
        dy = np.diff(y)
        rows = np.arange(max_lag, dy.size)
        ylag = y[rows]
        best_k, best_crit = 1, math.inf
        for k in range(1, max_lag + 1):
            cand = _AdfRegression(y, k, max_lag, det)
            crit = _maic(cand, ylag)
            if crit < best_crit:
                best_k, best_crit = k, crit
        k = best_k
        reg = _AdfRegression(y, k, max_lag, det)

    surf = _canon_det(surface) if surface is not None else det
    if surf == "none":
        # no surface is published for the no-deterministics case with N>1
        surf_for_p = "none"
    else:
        surf_for_p = surf
    p = mackinnon_pvalue(reg.tau, surf_for_p, n_variables)
    # joint F on the lagged-difference block is only informative with
    # two or more lags; with one it duplicates the single t-ratio
    f_test = _lagged_diff_f(reg, y, max_lag, det) if k >= 2 else None
    return AdfResult(
        series_name=series.name or "y",
        lags_used=k,
        max_lag=max_lag,
        selection=lag_selection,
        coefficient_minus_one=reg.a_minus_1,
        tau_statistic=reg.tau,
        p_value=p,
        deterministic=det,
        n_variables=int(n_variables),
        first_order_resid_autocorr=_resid_rho(reg.resid),
        lagged_diff_F=f_test,
        nobs=reg.nobs,
        surface=surf_for_p,
    )


# ---------------------------------------------------------------------------
# Engle-Granger


@dataclass(frozen=True)
class CointegratingRegression:
    """OLS of y on a constant and x over the full aligned sample."""

    dependent_name: str
    regressor_names: tuple
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    nobs: int
    mean_dependent: float
    sd_dependent: float
    ssr: float
    ser: float
    r_squared: float
    adj_r_squared: float
    loglik: float
    aic: float
    bic: float
    hqc: float
    rho: float
    durbin_watson: float
    residuals: TimeSeries
    sample: SampleRange


@dataclass(frozen=True)
class CointegrationReport:
    step1: AdfResult
    step2: AdfResult
    step3: CointegratingRegression
    step4: AdfResult
    conclusion: str  # "cointegrated" or "not_cointegrated"
    level: float


def _align(y: TimeSeries, x: TimeSeries) -> SampleRange:
    start = max(y.start, x.start)
    end = min(y.start + (len(y) - 1), x.start + (len(x) - 1))
    if end - start + 1 < 3:
        raise DomainError("series do not overlap enough for cointegration")
    return SampleRange(start, end)


def _cointegrating_ols(y: TimeSeries, x: TimeSeries,
                       rng: SampleRange) -> CointegratingRegression:
    ys = y.slice(rng)
    xs = x.slice(rng)
    yv = np.asarray(ys.values, dtype=float)
    xv = np.asarray(xs.values, dtype=float)
    t = yv.size
    design = np.column_stack([np.ones(t), xv])
    if np.linalg.matrix_rank(design) < 2:
        raise NumericalError(
            "degenerate cointegrating regression: regressor has no variation"
        )
    beta, _, _, _ = np.linalg.lstsq(design, yv, rcond=None)
    resid = yv - design @ beta
    ssr = float(resid @ resid)
    kreg = 2
    dof = t - kreg
    s2 = ssr / dof
    xtx_inv = np.linalg.inv(design.T @ design)
    se = np.sqrt(s2 * np.diag(xtx_inv))
    tstats = beta / se
    pvals = 2.0 * stats.t.sf(np.abs(tstats), dof)
    tss = float(((yv - yv.mean()) ** 2).sum())
    r2 = 1.0 - ssr / tss if tss > 0 else math.nan
    adj = 1.0 - (1.0 - r2) * (t - 1) / dof if tss > 0 else math.nan
    ll = -0.5 * t * (1.0 + math.log(2.0 * math.pi) + math.log(ssr / t))
    aic = -2.0 * ll + 2.0 * kreg
    bic = -2.0 * ll + kreg * math.log(t)
    hqc = -2.0 * ll + 2.0 * kreg * math.log(math.log(t))
    dw = float(((resid[1:] - resid[:-1]) ** 2).sum() / ssr) if ssr > 0 else math.nan
    return CointegratingRegression(
        dependent_name=ys.name or "y",
        regressor_names=("const", xs.name or "x"),
        coefficients=beta,
        std_errors=se,
        t_stats=tstats,
        p_values=pvals,
        nobs=t,
        mean_dependent=float(yv.mean()),
        sd_dependent=float(yv.std(ddof=1)),
        ssr=ssr,
        ser=math.sqrt(s2),
        r_squared=r2,
        adj_r_squared=adj,
        loglik=ll,
        aic=aic,
        bic=bic,
        hqc=hqc,
        rho=_resid_rho(resid),
        durbin_watson=dw,
        residuals=TimeSeries(rng.start, resid, name="uhat"),
        sample=rng,
    )


def engle_granger(
    y: TimeSeries,
    x: TimeSeries,
    max_lag: int,
    level: float = 0.05,
) -> CointegrationReport:
    """Four-step Engle-Granger cointegration test.

    Steps 1 and 2 run ADF (constant case) on each series; step 3 is the
    cointegrating OLS of y on x; step 4 runs ADF on the residuals without
    a deterministic term but with the two-variable constant surface.
    Cointegration requires the unit root to survive steps 1 and 2 and be
    rejected in step 4, all at ``level``.
    """
    if not 0.0 < level < 1.0:
        raise DomainError(f"significance level must be in (0,1), got {level}")
    rng = _align(y, x)
    step1 = adf_test(y.slice(rng), max_lag, "constant", "modified_aic")
    step2 = adf_test(x.slice(rng), max_lag, "constant", "modified_aic")
    step3 = _cointegrating_ols(y, x, rng)
    uhat = step3.residuals
    if float(np.max(np.abs(uhat.values))) == 0.0:
        raise NumericalError(
            "degenerate cointegrating regression: residuals are identically zero"
        )
    step4 = adf_test(
        uhat, max_lag, "none", "modified_aic",
        n_variables=2, surface="constant",
    )
    cointegrated = (
        step1.p_value > level
        and step2.p_value > level
        and step4.p_value < level
    )
    return CointegrationReport(
        step1=step1,
        step2=step2,
        step3=step3,
        step4=step4,
        conclusion="cointegrated" if cointegrated else "not_cointegrated",
        level=float(level),
    )
