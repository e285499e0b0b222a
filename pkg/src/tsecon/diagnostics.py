"""Diagnostic battery: correlograms and residual tests.

All autocovariances use the biased 1/T divisor about the sample mean;
that convention is what reproduces standard econometrics-package
Q-statistics digit for digit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import DomainError, NumericalError
from .series import TimeSeries


@dataclass(frozen=True)
class TestResult:
    """One diagnostic test: statistic, reference distribution, p-value."""

    name: str
    statistic: float
    df: object  # int, or (df1, df2) for F
    p_value: float
    null_hypothesis: str
    details: dict = field(default_factory=dict)

    def __str__(self) -> str:
        return f"{self.name}: stat={self.statistic:.6g} df={self.df} p={self.p_value:.4g}"


@dataclass(frozen=True)
class CorrelogramRow:
    lag: int
    acf: float
    pacf: float
    q_stat: float
    p_value: float
    acf_significant: bool
    pacf_significant: bool

    @property
    def significance(self) -> str:
        return "***" if self.acf_significant else ""



def _as_values(x) -> np.ndarray:
    """Accept a TimeSeries or any 1-d sequence."""
    if isinstance(x, TimeSeries):
        return x.values
    return np.asarray(x, float)

def _autocorrelations(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased (1/T) autocorrelations r_1..r_max_lag about the mean."""
    t = x.size
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom <= 0.0:
        raise NumericalError("zero-variance series in autocorrelation")
    return np.array(
        [float(xc[k:] @ xc[:-k]) / denom for k in range(1, max_lag + 1)]
    )


def _ljung_box_stats(r: np.ndarray, t: int) -> np.ndarray:
    """Cumulative Q'_k = T(T+2) sum_{j<=k} r_j^2/(T-j)."""
    j = np.arange(1, r.size + 1)
    return t * (t + 2.0) * np.cumsum(r**2 / (t - j))


def _durbin_levinson(r: np.ndarray) -> np.ndarray:
    """PACF from the autocorrelation sequence r_1..r_m."""
    m = r.size
    pacf = np.empty(m)
    phi = np.zeros((m + 1, m + 1))
    pacf[0] = phi[1, 1] = r[0]
    for k in range(2, m + 1):
        num = r[k - 1] - np.dot(phi[k - 1, 1:k], r[k - 2 :: -1][: k - 1])
        den = 1.0 - np.dot(phi[k - 1, 1:k], r[: k - 1])
        phi[k, k] = num / den if den != 0.0 else 0.0
        for j in range(1, k):
            phi[k, j] = phi[k - 1, j] - phi[k, k] * phi[k - 1, k - j]
        pacf[k - 1] = phi[k, k]
    return pacf


def acf(series: TimeSeries, max_lag: int) -> list[CorrelogramRow]:
    """Correlogram rows: ACF, PACF, Ljung-Box Q, chi-square(k) p-value."""
    t = len(series)
    if t < 4:
        raise DomainError("need at least 4 observations for a correlogram")
    if max_lag < 1 or max_lag >= t:
        raise DomainError(f"max_lag must be in 1..{t - 1}, got {max_lag}")
    r = _autocorrelations(_as_values(series), max_lag)
    q = _ljung_box_stats(r, t)
    pv = stats.chi2.sf(q, np.arange(1, max_lag + 1))
    pc = _durbin_levinson(r)
    band = 1.96 / np.sqrt(t)
    return [
        CorrelogramRow(
            lag=k + 1,
            acf=float(r[k]),
            pacf=float(pc[k]),
            q_stat=float(q[k]),
            p_value=float(pv[k]),
            acf_significant=bool(abs(r[k]) > band),
            pacf_significant=bool(abs(pc[k]) > band),
        )
        for k in range(max_lag)
    ]


def pacf(series: TimeSeries, max_lag: int) -> list[float]:
    t = len(series)
    if t < 4:
        raise DomainError("need at least 4 observations")
    if max_lag < 1 or max_lag >= t:
        raise DomainError(f"max_lag must be in 1..{t - 1}, got {max_lag}")
    return [float(v) for v in _durbin_levinson(_autocorrelations(_as_values(series), max_lag))]


def ljung_box(residuals: TimeSeries, lag: int, fitted_params: int = 0) -> TestResult:
    """Ljung-Box Q' on residuals; df = lag - fitted_params."""
    t = len(residuals)
    if lag <= fitted_params:
        raise DomainError(
            f"lag ({lag}) must exceed the number of fitted ARMA parameters "
            f"({fitted_params}); df would be non-positive"
        )
    if t <= lag:
        raise DomainError(f"series length {t} must exceed lag {lag}")
    x = _as_values(residuals)
    if np.allclose(x, x[0]):
        q = 0.0
    else:
        q = float(_ljung_box_stats(_autocorrelations(x, lag), t)[-1])
    df = lag - fitted_params
    return TestResult(
        name=f"Ljung-Box Q'({lag})",
        statistic=q,
        df=df,
        p_value=float(stats.chi2.sf(q, df)),
        null_hypothesis="no autocorrelation up to the given order",
    )


def arch_lm(residuals: TimeSeries, lag_order: int) -> TestResult:
    """LM test for ARCH effects of the given order.

    Auxiliary OLS of e_t^2 on a constant and q own lags; LM = (T-q) R^2.
    The auxiliary coefficient table (alpha_0..alpha_q with t-ratios) is
    returned in ``details``.
    """
    t = len(residuals)
    q = lag_order
    if q < 1:
        raise DomainError("lag_order must be >= 1")
    if t <= 2 * q:
        raise DomainError(f"need more than {2 * q} observations, have {t}")
    e2 = _as_values(residuals) ** 2
    y = e2[q:]
    n = y.size
    x = np.column_stack([np.ones(n)] + [e2[q - j : t - j] for j in range(1, q + 1)])
    coef, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
    if rank < x.shape[1]:
        raise NumericalError("degenerate regressor matrix in ARCH-LM auxiliary OLS")
    resid = y - x @ coef
    ssr = float(resid @ resid)
    tss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ssr / tss if tss > 0 else 0.0
    lm = n * r2
    dof = n - (q + 1)
    sigma2 = ssr / dof
    xtx_inv = np.linalg.inv(x.T @ x)
    se = np.sqrt(sigma2 * np.diag(xtx_inv))
    tr = coef / se
    pv = 2.0 * stats.t.sf(np.abs(tr), dof)
    return TestResult(
        name=f"ARCH LM({q})",
        statistic=float(lm),
        df=q,
        p_value=float(stats.chi2.sf(lm, q)),
        null_hypothesis="no ARCH effect is present",
        details={
            "alpha": coef.tolist(),
            "std_error": se.tolist(),
            "t_ratio": tr.tolist(),
            "p_value": pv.tolist(),
            "aux_nobs": int(n),
        },
    )


def _cbrt(x: float) -> float:
    return float(np.cbrt(x))


def _dh_z1(skew: float, n: int) -> float:
    """D'Agostino transformed skewness."""
    beta = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) / (
        (n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0)
    )
    w2 = -1.0 + np.sqrt(2.0 * (beta - 1.0))
    delta = 1.0 / np.sqrt(np.log(np.sqrt(w2)))
    y = skew * np.sqrt((w2 - 1.0) * (n + 1.0) * (n + 3.0) / (12.0 * (n - 2.0)))
    return float(delta * np.log(y + np.sqrt(y * y + 1.0)))


def _dh_z2(skew: float, kurt: float, n: int) -> float:
    """Gamma-approximation transformed kurtosis (conditional on skewness)."""
    b1 = skew * skew
    d = (n - 3.0) * (n + 1.0) * (n * n + 15.0 * n - 4.0)
    a = (n - 2.0) * (n + 5.0) * (n + 7.0) * (n * n + 27.0 * n - 70.0) / (6.0 * d)
    c = (n - 7.0) * (n + 5.0) * (n + 7.0) * (n * n + 2.0 * n - 5.0) / (6.0 * d)
    k = (n + 5.0) * (n + 7.0) * (n**3 + 37.0 * n * n + 11.0 * n - 313.0) / (12.0 * d)
    alpha = a + b1 * c
    chi = (kurt - 1.0 - b1) * 2.0 * k
    return float(
        (_cbrt(chi / (2.0 * alpha)) - 1.0 + 1.0 / (9.0 * alpha)) * np.sqrt(9.0 * alpha)
    )


def _moments(x: np.ndarray) -> tuple[float, float]:
    """(skewness, kurtosis) with 1/n moment divisors."""
    xc = x - x.mean()
    m2 = float((xc**2).mean())
    if m2 <= 0.0:
        raise NumericalError("zero variance in normality test input")
    m3 = float((xc**3).mean())
    m4 = float((xc**4).mean())
    return m3 / m2**1.5, m4 / m2**2


def doornik_hansen(residuals) -> TestResult:
    """Doornik-Hansen omnibus normality test.

    Accepts one TimeSeries (univariate, chi-square(2)) or a sequence of n
    equal-length series (multivariate, chi-square(2n)); the multivariate
    form orthogonalizes through the correlation-matrix eigendecomposition.
    """
    if isinstance(residuals, TimeSeries):
        columns = [_as_values(residuals)]
    else:
        columns = [s.values if isinstance(s, TimeSeries) else np.asarray(s, float) for s in residuals]
    n_series = len(columns)
    t = columns[0].size
    if any(c.size != t for c in columns):
        raise DomainError("all series must have equal length")
    if t < 8:
        raise DomainError("need at least 8 observations")

    x = np.column_stack(columns)
    xc = x - x.mean(axis=0)
    sd = np.sqrt((xc**2).mean(axis=0))
    if np.any(sd <= 0):
        raise NumericalError("zero-variance column in normality test")
    xs = xc / sd
    if n_series > 1:
        corr = (xs.T @ xs) / t
        eigval, eigvec = np.linalg.eigh(corr)
        if np.min(eigval) <= 1e-12:
            raise NumericalError(
                "singular correlation matrix in multivariate normality test",
                detail=eigval.tolist(),
            )
        y = xs @ eigvec @ np.diag(eigval**-0.5) @ eigvec.T
        eigenvalues = eigval.tolist()
    else:
        y = xs
        eigenvalues = None

    stat = 0.0
    for j in range(n_series):
        skew, kurt = _moments(y[:, j])
        stat += _dh_z1(skew, t) ** 2 + _dh_z2(skew, kurt, t) ** 2
    df = 2 * n_series
    details = {}
    if eigenvalues is not None:
        details["eigenvalues"] = eigenvalues
    return TestResult(
        name="Doornik-Hansen",
        statistic=float(stat),
        df=df,
        p_value=float(stats.chi2.sf(stat, df)),
        null_hypothesis="normal distribution",
        details=details,
    )


def breusch_pagan_diagonal(residual_matrix: np.ndarray) -> TestResult:
    """LM test that the system residual covariance matrix is diagonal.

    LM = T * sum of squared below-diagonal residual correlations,
    chi-square with n(n-1)/2 degrees of freedom.
    """
    r = np.asarray(residual_matrix, float)
    if r.ndim != 2 or r.shape[1] < 2:
        raise DomainError("need a T x n residual matrix with n >= 2")
    t, n = r.shape
    if t <= n:
        raise DomainError("need more observations than equations")
    sd = r.std(axis=0)
    if np.any(sd <= 0):
        raise NumericalError("zero-variance residual column")
    c = np.corrcoef(r, rowvar=False)
    iu = np.triu_indices(n, k=1)
    lm = float(t * np.sum(c[iu] ** 2))
    df = n * (n - 1) // 2
    return TestResult(
        name="Breusch-Pagan diagonal covariance",
        statistic=lm,
        df=df,
        p_value=float(stats.chi2.sf(lm, df)),
        null_hypothesis="the error covariance matrix is diagonal",
        details={"correlations": c[iu].tolist()},
    )


@dataclass(frozen=True)
class FrequencyBin:
    lower: float | None  # None marks the open left tail
    upper: float | None  # None marks the open right tail
    midpoint: float
    count: int
    relative: float  # percent
    cumulative: float  # percent


def frequency_distribution(series: TimeSeries, bins: int) -> list[FrequencyBin]:
    """Equal-width histogram with midpoints anchored at the sample min/max.

    Bin midpoints run from min to max in (bins-1) equal steps; edges sit
    half a width to each side, and the two extreme bins are open-ended.
    """
    if bins < 2:
        raise DomainError("need at least 2 bins")
    x = _as_values(series)
    lo, hi = float(x.min()), float(x.max())
    if hi <= lo:
        raise DomainError("constant series has no spread to bin")
    width = (hi - lo) / (bins - 1)
    mids = lo + width * np.arange(bins)
    edges = mids[:-1] + width / 2.0
    idx = np.searchsorted(edges, x, side="left")
    counts = np.bincount(idx, minlength=bins)
    t = x.size
    out = []
    cum = 0.0
    for b in range(bins):
        cum += 100.0 * counts[b] / t
        out.append(
            FrequencyBin(
                lower=None if b == 0 else float(edges[b - 1]),
                upper=None if b == bins - 1 else float(edges[b]),
                midpoint=float(mids[b]),
                count=int(counts[b]),
                relative=100.0 * counts[b] / t,
                cumulative=cum,
            )
        )
    return out
