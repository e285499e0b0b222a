"""Conditional-heteroskedasticity family: ARCH, GARCH, in-mean variants,
Taylor-Schwert, GJR, TARCH, NARCH, APARCH and EGARCH.

All variants share one quasi-ML engine.  The variance recursion runs on a
transformed scale (h, sqrt(h), h^delta, h^(delta/2) or ln h depending on the
variant) so each update is linear and the hot loop stays tiny.  Innovations
may be normal, Student-t, GED, or their Fernandez-Steel skewed versions,
always standardized to unit variance.

Two likelihood conventions are exposed: "full" carries the -0.5*ln(2*pi)
constant per observation; "paper_compat" drops it, matching hand-rolled
Gaussian kernels of the form -0.5*(ln h + e^2/h).  In-mean fits default to
the latter, everything else to the former.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from ._accel import maybe_jit
from .errors import DomainError, FitError, NumericalError
from .optimize import Objective, covariance_hessian, maximize, std_errors_from
from .series import SampleRange, TimeSeries

__all__ = [
    "VARIANTS",
    "DISTRIBUTIONS",
    "GarchSpec",
    "GarchFit",
    "ComparisonRow",
    "fit_garch",
    "compare_models",
    "loglik_contribution",
    "unconditional_variance",
    "expected_abs_innovation",
]

VARIANTS = (
    "ARCH", "GARCH", "TS_GARCH", "GJR", "TARCH", "NARCH", "APARCH", "EGARCH",
)
DISTRIBUTIONS = ("normal", "student_t", "ged", "skew_t", "skew_ged")
MEANS = ("constant", "in_mean")

_LN_2PI = math.log(2.0 * math.pi)
_ASYMMETRIC = ("TS_GARCH", "GJR", "TARCH", "NARCH", "APARCH", "EGARCH")


@dataclass(frozen=True)
class GarchSpec:
    """Which variance recursion, mean equation and innovation density."""

    variant: str
    arch_order: int = 1
    garch_order: int = 1
    mean: str = "constant"
    distribution: str = "normal"

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise DomainError(f"unknown variant {self.variant!r}")
        if self.mean not in MEANS:
            raise DomainError(f"mean must be one of {MEANS}")
        if self.distribution not in DISTRIBUTIONS:
            raise DomainError(f"unknown distribution {self.distribution!r}")
        p, q = int(self.arch_order), int(self.garch_order)
        if p < 1 or q < 0:
            raise DomainError("need arch_order >= 1 and garch_order >= 0")
        if self.variant == "ARCH" and q != 0:
            raise DomainError("ARCH takes garch_order 0")
        if self.variant in _ASYMMETRIC and (p != 1 or q > 1):
            raise DomainError(
                f"{self.variant} supports orders (1,0) or (1,1) only"
            )
        if self.mean == "in_mean" and self.variant not in ("ARCH", "GARCH"):
            raise DomainError("in-mean is defined for ARCH and GARCH only")

    @property
    def label(self) -> str:
        base = self.variant.replace("_", "-")
        if self.mean == "in_mean":
            base += "-M"
        if self.garch_order > 0:
            return f"{base}({self.arch_order},{self.garch_order})"
        return f"{base}({self.arch_order})"

    def parameter_names(self) -> list:
        names = ["const"] if self.mean == "constant" else ["theta"]
        names.append("omega")
        names += [f"alpha_{i}" for i in range(1, self.arch_order + 1)]
        if self.variant in ("GJR", "TARCH", "APARCH", "EGARCH"):
            names.append("gamma")
        names += [f"beta_{j}" for j in range(1, self.garch_order + 1)]
        if self.variant in ("NARCH", "APARCH"):
            names.append("delta")
        if self.distribution in ("student_t", "skew_t"):
            names.append("nu")
        elif self.distribution in ("ged", "skew_ged"):
            names.append("shape")
        if self.distribution in ("skew_t", "skew_ged"):
            names.append("skew")
        return names


# ---------------------------------------------------------------------------
# recursion kernels


@maybe_jit
def _recurse_linear(news, alphas, betas, omega, pre_news, pre_scale, out):
    t_len = news.shape[0]
    p = alphas.shape[0]
    q = betas.shape[0]
    for t in range(t_len):
        s = omega
        for i in range(p):
            idx = t - 1 - i
            s += alphas[i] * (news[idx] if idx >= 0 else pre_news)
        for j in range(q):
            jdx = t - 1 - j
            s += betas[j] * (out[jdx] if jdx >= 0 else pre_scale)
        out[t] = s


@maybe_jit
def _recurse_in_mean(y, theta, alphas, betas, omega, h0, h_out, e_out):
    t_len = y.shape[0]
    p = alphas.shape[0]
    q = betas.shape[0]
    for t in range(t_len):
        s = omega
        for i in range(p):
            idx = t - 1 - i
            s += alphas[i] * (e_out[idx] * e_out[idx] if idx >= 0 else h0)
        for j in range(q):
            jdx = t - 1 - j
            s += betas[j] * (h_out[jdx] if jdx >= 0 else h0)
        h_out[t] = s
        e_out[t] = y[t] - theta * s


@maybe_jit
def _recurse_egarch(e, omega, alpha, gamma, beta_arr, ez, lnh0, out):
    t_len = e.shape[0]
    q = beta_arr.shape[0]
    for t in range(t_len):
        s = omega
        if t == 0:
            # presample innovation term is taken at its zero expectation
            for j in range(q):
                s += beta_arr[j] * lnh0
        else:
            hprev = math.exp(out[t - 1])
            z = e[t - 1] / math.sqrt(hprev) if hprev > 0.0 else 0.0
            s += alpha * (abs(z) - ez) + gamma * z
            for j in range(q):
                jdx = t - 1 - j
                s += beta_arr[j] * (out[jdx] if jdx >= 0 else lnh0)
        out[t] = s


# ---------------------------------------------------------------------------
# innovation densities (standardized to unit variance)


def _check_shape(distribution: str, shape, skew) -> None:
    if distribution in ("student_t", "skew_t"):
        if shape is None or shape <= 2.0:
            raise DomainError("Student-t needs nu > 2")
    if distribution in ("ged", "skew_ged"):
        if shape is None or shape <= 0.0:
            raise DomainError("GED needs shape > 0")
    if distribution in ("skew_t", "skew_ged"):
        if skew is None or skew <= 0.0:
            raise DomainError("skew parameter must be > 0")


def _base_logpdf(distribution: str, z: np.ndarray, shape) -> np.ndarray:
    if distribution == "normal":
        return -0.5 * _LN_2PI - 0.5 * z * z
    if distribution == "student_t":
        nu = float(shape)
        c = (
            gammaln((nu + 1.0) / 2.0)
            - gammaln(nu / 2.0)
            - 0.5 * math.log((nu - 2.0) * math.pi)
        )
        return c - 0.5 * (nu + 1.0) * np.log1p(z * z / (nu - 2.0))
    if distribution == "ged":
        s = float(shape)
        lam = math.sqrt(
            2.0 ** (-2.0 / s) * math.exp(gammaln(1.0 / s) - gammaln(3.0 / s))
        )
        c = (
            math.log(s)
            - math.log(lam)
            - (1.0 + 1.0 / s) * math.log(2.0)
            - gammaln(1.0 / s)
        )
        return c - 0.5 * np.abs(z / lam) ** s
    raise DomainError(f"no base density for {distribution!r}")


def _base_abs_mean(distribution: str, shape) -> float:
    """E|Z| of the standardized symmetric base density."""
    if distribution == "normal":
        return math.sqrt(2.0 / math.pi)
    if distribution == "student_t":
        nu = float(shape)
        return (
            2.0
            * math.sqrt(nu - 2.0)
            * math.exp(gammaln((nu + 1.0) / 2.0) - gammaln(nu / 2.0))
            / (math.sqrt(math.pi) * (nu - 1.0))
        )
    if distribution == "ged":
        s = float(shape)
        lam = math.sqrt(
            2.0 ** (-2.0 / s) * math.exp(gammaln(1.0 / s) - gammaln(3.0 / s))
        )
        return lam * 2.0 ** (1.0 / s) * math.exp(
            gammaln(2.0 / s) - gammaln(1.0 / s)
        )
    raise DomainError(f"no absolute moment for {distribution!r}")


def _skew_pieces(base: str, shape, skew: float):
    """Mean/sd of the raw Fernandez-Steel transform of a unit-variance base."""
    xi = float(skew)
    m1 = _base_abs_mean(base, shape)
    mu = m1 * (xi - 1.0 / xi)
    var = (xi * xi + 1.0 / (xi * xi) - 1.0) - mu * mu
    if var <= 0.0:
        raise NumericalError("skew transform collapsed to zero variance")
    return mu, math.sqrt(var)


def _dist_logpdf(distribution: str, z: np.ndarray, shape, skew) -> np.ndarray:
    _check_shape(distribution, shape, skew)
    if distribution in ("normal", "student_t", "ged"):
        return _base_logpdf(distribution, z, shape)
    base = "student_t" if distribution == "skew_t" else "ged"
    xi = float(skew)
    mu, sd = _skew_pieces(base, shape, xi)
    u = sd * np.asarray(z, float) + mu
    scaled = np.where(u >= 0.0, u / xi, u * xi)
    return (
        math.log(2.0 / (xi + 1.0 / xi))
        + math.log(sd)
        + _base_logpdf(base, scaled, shape)
    )


def expected_abs_innovation(distribution: str, shape=None, skew=None) -> float:
    """E|z| under the standardized innovation density (EGARCH constant)."""
    _check_shape(distribution, shape, skew)
    if distribution in ("normal", "student_t", "ged"):
        return _base_abs_mean(distribution, shape)

    def integrand(z: float) -> float:
        return abs(z) * math.exp(
            float(_dist_logpdf(distribution, np.array([z]), shape, skew)[0])
        )

    val, _ = integrate.quad(integrand, -np.inf, np.inf, limit=200)
    return float(val)


def loglik_contribution(
    distribution: str,
    z: float,
    h: float,
    shape=None,
    skew=None,
    convention: str = "full",
) -> float:
    """Log-likelihood of one observation with standardized residual ``z``
    and conditional variance ``h``."""
    if h <= 0.0:
        raise DomainError("conditional variance must be positive")
    if convention not in ("full", "paper_compat"):
        raise DomainError(f"unknown likelihood convention {convention!r}")
    val = float(_dist_logpdf(distribution, np.array([float(z)]), shape, skew)[0])
    val -= 0.5 * math.log(h)
    if convention == "paper_compat":
        val += 0.5 * _LN_2PI
    return val


# ---------------------------------------------------------------------------
# parameter packing


class _ParamMap:
    """Forward/backward transforms between natural and optimizer space."""

    def __init__(self, spec: GarchSpec):
        self.names = spec.parameter_names()
        codes = []
        for name in self.names:
            if name in ("const", "theta", "gamma"):
                codes.append("id")
            elif name == "nu":
                codes.append("logm2")
            elif name in ("omega",) and spec.variant == "EGARCH":
                codes.append("id")
            elif name.startswith("alpha") and spec.variant == "EGARCH":
                codes.append("id")
            elif name.startswith("beta") and spec.variant == "EGARCH":
                codes.append("id")
            else:
                codes.append("log")
        if spec.variant == "APARCH":
            codes[self.names.index("gamma")] = "tanh"
        self.codes = codes

    def to_opt(self, natural: np.ndarray) -> np.ndarray:
        out = np.empty(len(natural))
        for i, (v, c) in enumerate(zip(natural, self.codes)):
            if c == "id":
                out[i] = v
            elif c == "log":
                out[i] = math.log(v)
            elif c == "logm2":
                out[i] = math.log(v - 2.0)
            else:  # tanh code stores atanh
                out[i] = math.atanh(v)
        return out

    def to_natural(self, opt: np.ndarray) -> np.ndarray:
        out = np.empty(len(opt))
        for i, (v, c) in enumerate(zip(opt, self.codes)):
            if c == "id":
                out[i] = v
            elif c == "log":
                out[i] = math.exp(v)
            elif c == "logm2":
                out[i] = 2.0 + math.exp(v)
            else:
                out[i] = math.tanh(v)
        return out

    def feasible(self, natural: np.ndarray) -> bool:
        for v, c in zip(natural, self.codes):
            if not math.isfinite(v):
                return False
            if c == "log" and v <= 0.0:
                return False
            if c == "logm2" and v <= 2.0:
                return False
            if c == "tanh" and not -1.0 < v < 1.0:
                return False
        return True


def _split_params(spec: GarchSpec, names: Sequence[str], vec: np.ndarray) -> dict:
    vals = dict(zip(names, vec))
    p = spec.arch_order
    q = spec.garch_order
    vals["_alphas"] = np.array(
        [vals[f"alpha_{i}"] for i in range(1, p + 1)], dtype=float
    )
    vals["_betas"] = np.array(
        [vals[f"beta_{j}"] for j in range(1, q + 1)], dtype=float
    )
    return vals


# ---------------------------------------------------------------------------
# the likelihood


def _variance_path(spec: GarchSpec, vals: dict, e: np.ndarray,
                   h_init: float, ez: float) -> Optional[np.ndarray]:
    """Conditional variances for a known residual series; None if infeasible."""
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return _variance_path_inner(spec, vals, e, h_init, ez)


def _variance_path_inner(spec: GarchSpec, vals: dict, e: np.ndarray,
                         h_init: float, ez: float) -> Optional[np.ndarray]:
    t_len = e.size
    omega = vals["omega"]
    alphas = vals["_alphas"]
    betas = vals["_betas"]
    variant = spec.variant
    out = np.empty(t_len)
    if variant in ("ARCH", "GARCH"):
        _recurse_linear(e * e, alphas, betas, omega, h_init, h_init, out)
        h = out
    elif variant == "TS_GARCH":
        root = math.sqrt(h_init)
        _recurse_linear(np.abs(e), alphas, betas, omega, root, root, out)
        if not np.all(out > 0.0):
            return None
        h = out * out
    elif variant == "GJR":
        gamma = vals["gamma"]
        news = (alphas[0] + gamma * (e < 0.0)) * e * e
        pre = (alphas[0] + 0.5 * gamma) * h_init
        _recurse_linear(news, np.ones(1), betas, omega, pre, h_init, out)
        h = out
    elif variant == "TARCH":
        gamma = vals["gamma"]
        root = math.sqrt(h_init)
        news = alphas[0] * np.abs(e) + gamma * np.maximum(-e, 0.0)
        pre = (alphas[0] + 0.5 * gamma) * root
        _recurse_linear(news, np.ones(1), betas, omega, pre, root, out)
        if not np.all(out > 0.0):
            return None
        h = out * out
    elif variant == "NARCH":
        delta = vals["delta"]
        scale0 = h_init ** delta
        news = np.abs(e) ** (2.0 * delta)
        _recurse_linear(news, alphas, betas, omega, scale0, scale0, out)
        if not np.all(out > 0.0):
            return None
        h = out ** (1.0 / delta)
    elif variant == "APARCH":
        gamma = vals["gamma"]
        delta = vals["delta"]
        scale0 = h_init ** (delta / 2.0)
        news = alphas[0] * (np.abs(e) - gamma * e) ** delta
        pre = (
            alphas[0]
            * 0.5
            * ((1.0 - gamma) ** delta + (1.0 + gamma) ** delta)
            * scale0
        )
        _recurse_linear(news, np.ones(1), betas, omega, pre, scale0, out)
        if not np.all(out > 0.0):
            return None
        h = out ** (2.0 / delta)
    elif variant == "EGARCH":
        _recurse_egarch(
            e, omega, alphas[0], vals["gamma"], betas, ez,
            math.log(h_init), out,
        )
        if not np.all(np.abs(out) < 690.0):
            return None
        h = np.exp(out)
    else:  # pragma: no cover
        raise DomainError(f"unhandled variant {variant}")
    if not (np.all(np.isfinite(h)) and np.all(h > 0.0)):
        return None
    return h


def _build_objective(spec: GarchSpec, y: np.ndarray, convention: str):
    names = spec.parameter_names()
    shape_name = None
    if spec.distribution in ("student_t", "skew_t"):
        shape_name = "nu"
    elif spec.distribution in ("ged", "skew_ged"):
        shape_name = "shape"
    needs_ez = spec.variant == "EGARCH"
    ez_cache: dict = {}

    def natural_loglik(vec: np.ndarray):
        vals = _split_params(spec, names, vec)
        shape = vals.get(shape_name) if shape_name else None
        skew = vals.get("skew")
        try:
            _check_shape(spec.distribution, shape, skew)
        except DomainError:
            return -math.inf
        if spec.mean == "constant":
            e = y - vals["const"]
            h_init = float(np.var(e, ddof=1))
        else:
            h_init = float(np.var(y, ddof=1))
        if not h_init > 0.0:
            return -math.inf
        ez = 0.0
        if needs_ez:
            key = (shape, skew)
            if key not in ez_cache:
                try:
                    ez_cache[key] = expected_abs_innovation(
                        spec.distribution, shape, skew
                    )
                except (DomainError, NumericalError):
                    return -math.inf
            ez = ez_cache[key]
        if spec.mean == "in_mean":
            h = np.empty(y.size)
            e = np.empty(y.size)
            _recurse_in_mean(
                y, vals["theta"], vals["_alphas"], vals["_betas"],
                vals["omega"], h_init, h, e,
            )
            if not (np.all(np.isfinite(h)) and np.all(h > 0.0)):
                return -math.inf
        else:
            h = _variance_path(spec, vals, e, h_init, ez)
            if h is None:
                return -math.inf
        z = e / np.sqrt(h)
        try:
            per = _dist_logpdf(spec.distribution, z, shape, skew) - 0.5 * np.log(h)
        except (DomainError, NumericalError):
            return -math.inf
        if convention == "paper_compat":
            per = per + 0.5 * _LN_2PI
        total = float(per.sum())
        if not math.isfinite(total):
            return -math.inf
        return total, per

    return natural_loglik, names


def _start_values(spec: GarchSpec, y: np.ndarray, bland: bool) -> np.ndarray:
    var_y = float(np.var(y, ddof=1))
    alpha0 = 0.05 if bland else 0.1
    beta0 = 0.85 if bland else 0.8
    vals = []
    for name in spec.parameter_names():
        if name == "const":
            vals.append(float(np.mean(y)))
        elif name == "theta":
            vals.append(float(np.mean(y)) / var_y)
        elif name == "omega":
            if spec.variant == "EGARCH":
                vals.append((1.0 - beta0 * spec.garch_order) * math.log(var_y))
            else:
                vals.append(0.1 * var_y)
        elif name.startswith("alpha"):
            vals.append(alpha0 / spec.arch_order)
        elif name.startswith("beta"):
            vals.append(beta0 / max(spec.garch_order, 1))
        elif name == "gamma":
            vals.append(0.0)
        elif name == "delta":
            vals.append(0.5 if spec.variant == "NARCH" else 2.0)
        elif name == "nu":
            vals.append(8.0)
        elif name == "shape":
            vals.append(1.5)
        elif name == "skew":
            vals.append(1.0)
        else:  # pragma: no cover
            raise DomainError(f"no start rule for {name}")
    return np.array(vals)


@dataclass(frozen=True)
class GarchFit:
    """Fitted conditional-heteroskedasticity model."""

    spec: GarchSpec
    sample: SampleRange
    dependent_name: str
    nobs: int
    coeff_names: tuple
    coefficients: np.ndarray
    std_errors: np.ndarray
    z_stats: np.ndarray
    p_values: np.ndarray
    loglik: float
    k: int
    aic: float
    bic: float
    hqc: float
    convention: str
    conditional_variances: TimeSeries
    standardized_residuals: TimeSeries
    persistence: Optional[float]
    unconditional_variance: Optional[float]
    gjr_alternative: Optional[dict]
    converged: bool
    n_function_evals: int
    covariance: Optional[np.ndarray] = field(repr=False, default=None)

    def coefficient(self, name: str) -> float:
        try:
            return float(self.coefficients[self.coeff_names.index(name)])
        except ValueError:
            raise DomainError(f"no coefficient named {name!r}") from None

    @property
    def mean_residuals(self) -> TimeSeries:
        z = np.asarray(self.standardized_residuals.values)
        h = np.asarray(self.conditional_variances.values)
        return TimeSeries(
            self.standardized_residuals.start, z * np.sqrt(h), name="resid"
        )


def _two_sided_p(z: float) -> float:
    if not math.isfinite(z):
        return math.nan
    return math.erfc(abs(z) / math.sqrt(2.0))


def _gjr_alternative(vals: dict, names: Sequence[str],
                     cov: Optional[np.ndarray]) -> Optional[dict]:
    alpha = vals["alpha_1"]
    gamma = vals["gamma"]
    csum = alpha + gamma
    if alpha <= 0.0 or csum <= 0.0:
        return None
    r = math.sqrt(csum / alpha)
    gstar = (r - 1.0) / (r + 1.0)
    astar = alpha / (1.0 - gstar) ** 2

    out = {"alpha": astar, "gamma": gstar}
    if cov is not None:
        ia = names.index("alpha_1")
        ig = names.index("gamma")
        sub = np.array(
            [[cov[ia, ia], cov[ia, ig]], [cov[ig, ia], cov[ig, ig]]]
        )

        def transform(a: float, g: float):
            rr = math.sqrt((a + g) / a)
            gs = (rr - 1.0) / (rr + 1.0)
            return np.array([a / (1.0 - gs) ** 2, gs])

        eps = 1e-6
        jac = np.empty((2, 2))
        base = transform(alpha, gamma)
        jac[:, 0] = (transform(alpha + eps, gamma) - base) / eps
        jac[:, 1] = (transform(alpha, gamma + eps) - base) / eps
        var = jac @ sub @ jac.T
        d = np.diag(var)
        if np.all(np.isfinite(d)) and np.all(d >= 0.0):
            out["alpha_se"] = math.sqrt(d[0])
            out["gamma_se"] = math.sqrt(d[1])
    return out


def fit_garch(
    series: TimeSeries,
    spec: GarchSpec,
    sample: Optional[SampleRange] = None,
    likelihood: Optional[str] = None,
) -> GarchFit:
    """Quasi-ML fit of ``spec`` over ``sample`` (default: whole series).

    ``likelihood`` overrides the convention: "full" or "paper_compat";
    in-mean specs default to "paper_compat", all others to "full".
    """
    est = series.slice(sample) if sample is not None else series
    y = np.asarray(est.values, dtype=float)
    if y.size < 50:
        raise DomainError(
            f"need at least 50 observations to fit a variance model, got {y.size}"
        )
    convention = likelihood
    if convention is None:
        convention = "paper_compat" if spec.mean == "in_mean" else "full"
    if convention not in ("full", "paper_compat"):
        raise DomainError(f"unknown likelihood convention {convention!r}")

    natural_fn, names = _build_objective(spec, y, convention)
    pmap = _ParamMap(spec)

    def opt_fn(x: np.ndarray):
        return natural_fn(pmap.to_natural(x))

    result = None
    for bland in (False, True):
        x0 = pmap.to_opt(_start_values(spec, y, bland))
        obj = Objective(len(names), opt_fn)
        res = maximize(obj, x0)
        if (
            result is None
            or (res.converged and not result.converged)
            or (res.converged == result.converged
                and res.loglik > result.loglik + 1e-9)
        ):
            result = res
        if result.converged:
            break
    if not result.converged:
        raise FitError(
            f"{spec.label} did not converge in {result.iterations} iterations "
            f"(gradient norm {result.gradient_norm:.3g})"
        )

    natural = pmap.to_natural(result.params)
    vals = _split_params(spec, names, natural)

    def raw_fn(vec: np.ndarray):
        if not pmap.feasible(vec):
            return -math.inf
        return natural_fn(vec)

    cov = None
    try:
        cov = covariance_hessian(Objective(len(names), raw_fn), natural)
    except NumericalError:
        cov = None
    se = std_errors_from(cov) if cov is not None else np.full(len(names), np.nan)
    zs = np.where(se > 0, natural / se, np.nan)
    ps = np.array([_two_sided_p(z) for z in zs])

    out = natural_fn(natural)
    total, _ = out
    shape_name = None
    if spec.distribution in ("student_t", "skew_t"):
        shape_name = "nu"
    elif spec.distribution in ("ged", "skew_ged"):
        shape_name = "shape"
    shape = vals.get(shape_name) if shape_name else None
    skew = vals.get("skew")
    ez = (
        expected_abs_innovation(spec.distribution, shape, skew)
        if spec.variant == "EGARCH"
        else 0.0
    )
    if spec.mean == "in_mean":
        h = np.empty(y.size)
        e = np.empty(y.size)
        _recurse_in_mean(
            y, vals["theta"], vals["_alphas"], vals["_betas"],
            vals["omega"], float(np.var(y, ddof=1)), h, e,
        )
    else:
        e = y - vals["const"]
        h = _variance_path(spec, vals, e, float(np.var(e, ddof=1)), ez)
        if h is None:
            raise NumericalError("variance path infeasible at the optimum")

    native = (
        spec.variant in ("ARCH", "GARCH")
        and spec.mean == "constant"
        and spec.distribution == "normal"
    )
    k = len(names) + (1 if native else 0)
    t_len = y.size
    aic = -2.0 * total + 2.0 * k
    bic = -2.0 * total + k * math.log(t_len)
    hqc = -2.0 * total + 2.0 * k * math.log(math.log(t_len))

    persistence = None
    uncond = None
    if spec.variant in ("ARCH", "GARCH"):
        persistence = float(vals["_alphas"].sum() + vals["_betas"].sum())
        uncond = linear_unconditional_variance(
            float(vals["omega"]), persistence)
    gjr_alt = (
        _gjr_alternative(vals, names, cov) if spec.variant == "GJR" else None
    )

    rng = SampleRange(est.start, est.start + (t_len - 1))
    return GarchFit(
        spec=spec,
        sample=rng,
        dependent_name=est.name or "y",
        nobs=t_len,
        coeff_names=tuple(names),
        coefficients=natural,
        std_errors=se,
        z_stats=zs,
        p_values=ps,
        loglik=total,
        k=k,
        aic=aic,
        bic=bic,
        hqc=hqc,
        convention=convention,
        conditional_variances=TimeSeries(est.start, h, name="h"),
        standardized_residuals=TimeSeries(
            est.start, e / np.sqrt(h), name="z"
        ),
        persistence=persistence,
        unconditional_variance=uncond,
        gjr_alternative=gjr_alt,
        converged=result.converged,
        n_function_evals=result.n_function_evals,
        covariance=cov,
    )


def linear_unconditional_variance(omega: float,
                                  persistence: float) -> Optional[float]:
    """omega / (1 - persistence), or None on or past the IGARCH boundary."""
    if persistence >= 1.0:
        return None
    return float(omega / (1.0 - persistence))


def unconditional_variance(fit: GarchFit) -> Optional[float]:
    """omega / (1 - persistence) for ARCH/GARCH when persistence < 1."""
    return fit.unconditional_variance


@dataclass(frozen=True)
class ComparisonRow:
    label: str
    distribution: str
    aic: float
    bic: float
    hqc: float
    all_significant: bool
    converged: bool
    loglik: float = math.nan
    error: Optional[str] = None


def compare_models(
    series: TimeSeries,
    specs: Sequence[GarchSpec],
    sample: Optional[SampleRange] = None,
    likelihood: Optional[str] = None,
    max_workers: int = 4,
) -> list:
    """Fit every spec independently and tabulate information criteria.

    Failed fits become N/A rows (NaN criteria, converged False) rather than
    raising; rows keep the order of ``specs``.
    """
    if len(specs) < 2:
        raise DomainError("need at least two specs to compare")

    def one(spec: GarchSpec) -> ComparisonRow:
        try:
            fit = fit_garch(series, spec, sample, likelihood)
        except (DomainError, FitError, NumericalError) as exc:
            return ComparisonRow(
                label=spec.label,
                distribution=spec.distribution,
                aic=math.nan,
                bic=math.nan,
                hqc=math.nan,
                all_significant=False,
                converged=False,
                error=str(exc),
            )
        sig = bool(
            np.all(np.isfinite(fit.p_values)) and np.all(fit.p_values < 0.05)
        )
        return ComparisonRow(
            label=spec.label,
            distribution=spec.distribution,
            aic=fit.aic,
            bic=fit.bic,
            hqc=fit.hqc,
            all_significant=sig,
            converged=True,
            loglik=fit.loglik,
        )

    workers = max(1, min(max_workers, len(specs)))
    if workers == 1:
        return [one(s) for s in specs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, specs))
