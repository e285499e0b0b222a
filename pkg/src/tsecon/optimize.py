"""Quasi-Newton maximum-likelihood engine.

BFGS ascent with central-difference gradients; covariance estimators from
the numerical Hessian or the outer product of per-observation gradients.
The optimizer is unconstrained: callers keep parameters feasible through
transforms (log for variances, tanh for bounded shapes) and must return a
non-finite value outside the feasible region, which is treated as a
rejected step, never an exception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalError

_EPS = float(np.finfo(float).eps)
_GRAD_STEP = _EPS ** (1.0 / 3.0)
_HESS_STEP = _EPS ** (1.0 / 4.0)


class Objective:
    """A log-likelihood to maximize.

    ``fn(params)`` returns either a float (total log-likelihood) or a pair
    ``(total, per_observation_vector)``. Non-finite totals mark infeasible
    points.
    """

    def __init__(self, dimension: int, fn) -> None:
        self.dimension = int(dimension)
        self._fn = fn
        self.n_evals = 0

    def value(self, x: np.ndarray) -> float:
        self.n_evals += 1
        out = self._fn(np.asarray(x, float))
        if isinstance(out, tuple):
            out = out[0]
        out = float(out)
        return out if math.isfinite(out) else -math.inf

    def per_obs(self, x: np.ndarray):
        self.n_evals += 1
        out = self._fn(np.asarray(x, float))
        if not isinstance(out, tuple) or out[1] is None:
            return None
        return np.asarray(out[1], float)


@dataclass
class OptimResult:
    params: np.ndarray
    loglik: float
    converged: bool
    iterations: int
    gradient_norm: float
    n_function_evals: int
    n_gradient_evals: int
    covariance: np.ndarray | None = None
    std_errors: np.ndarray | None = None
    trace: list = field(default_factory=list)


def _gradient(obj: Objective, x: np.ndarray, f0: float) -> np.ndarray:
    n = x.size
    g = np.empty(n)
    for i in range(n):
        h = _GRAD_STEP * max(abs(x[i]), 1.0)
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        fp = obj.value(xp)
        fm = obj.value(xm)
        if math.isinf(fp) and math.isinf(fm):
            g[i] = 0.0
        elif math.isinf(fp):
            g[i] = (f0 - fm) / h
        elif math.isinf(fm):
            g[i] = (fp - f0) / h
        else:
            g[i] = (fp - fm) / (2.0 * h)
    return g


def maximize(
    obj: Objective,
    start,
    tolerance: float = 1e-10,
    max_iterations: int = 500,
    trace_sink=None,
) -> OptimResult:
    """BFGS ascent from ``start``; returns the best point found even when
    convergence is not reached (``converged`` flags it)."""
    x = np.asarray(start, float).copy()
    if x.size != obj.dimension:
        raise DomainError(
            f"start has {x.size} entries, objective expects {obj.dimension}"
        )
    f = obj.value(x)
    if not math.isfinite(f):
        raise DomainError("objective is not finite at the starting point")

    n = x.size
    hinv = np.eye(n)
    hinv_scaled = False  # Shanno-Phua scaling applied after the first step
    g = _gradient(obj, x, f)
    n_grad = 1
    best_x, best_f = x.copy(), f
    converged = False
    stall = 0
    it = 0

    def log(msg):
        if trace_sink is not None:
            trace_sink(msg)

    for it in range(1, max_iterations + 1):
        gnorm = float(np.max(np.abs(g))) if g.size else 0.0
        if gnorm <= 1e-6 * (1.0 + abs(f)):
            converged = True
            break

        d = hinv @ g
        if float(d @ g) <= 0.0:
            hinv = np.eye(n)
            hinv_scaled = False
            d = g.copy()
        slope = float(d @ g)

        # backtracking line search with one expansion pass; the first trial
        # step is capped so a wildly scaled start cannot fling the iterate
        dmax = float(np.max(np.abs(d)))
        alpha = 1.0 if dmax <= 1.0 + np.max(np.abs(x)) else (1.0 + np.max(np.abs(x))) / dmax
        f_new = obj.value(x + alpha * d)
        armijo = lambda a, fv: fv >= f + 1e-4 * a * slope
        if armijo(alpha, f_new):
            for _ in range(40):
                f_try = obj.value(x + 2.0 * alpha * d)
                if math.isfinite(f_try) and f_try > f_new:
                    alpha *= 2.0
                    f_new = f_try
                else:
                    break
        else:
            ok = False
            while alpha > 1e-15:
                alpha *= 0.5
                f_new = obj.value(x + alpha * d)
                if armijo(alpha, f_new):
                    ok = True
                    break
            if not ok:
                # no ascent along d; restart once with steepest direction
                if not np.allclose(hinv, np.eye(n)):
                    hinv = np.eye(n)
                    hinv_scaled = False
                    continue
                gnorm = float(np.max(np.abs(g)))
                converged = gnorm <= 1e-4 * (1.0 + abs(f))
                log(f"iter {it}: line search exhausted, |g|={gnorm:.3e}")
                break

        x_new = x + alpha * d
        g_new = _gradient(obj, x_new, f_new)
        n_grad += 1

        s = x_new - x
        yk = g - g_new  # gradient *decrease*, matches minimization of -f
        sy = float(s @ yk)
        if sy > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(yk) + 1e-300):
            if not hinv_scaled:
                hinv = (sy / float(yk @ yk)) * np.eye(n)
                hinv_scaled = True
            rho = 1.0 / sy
            i_mat = np.eye(n)
            left = i_mat - rho * np.outer(s, yk)
            hinv = left @ hinv @ left.T + rho * np.outer(s, s)

        improved = f_new - f
        x, f, g = x_new, f_new, g_new
        if f > best_f:
            best_x, best_f = x.copy(), f
        log(f"iter {it}: loglik {f:.8f} step {alpha:g}")

        if abs(improved) <= tolerance * (abs(f) + tolerance):
            stall += 1
            if stall >= 2:
                gnorm = float(np.max(np.abs(g)))
                converged = gnorm <= 1e-4 * (1.0 + abs(f))
                break
        else:
            stall = 0

    gnorm = float(np.max(np.abs(g)))
    if f < best_f:
        x, f = best_x, best_f
    return OptimResult(
        params=x,
        loglik=f,
        converged=converged,
        iterations=it,
        gradient_norm=gnorm,
        n_function_evals=obj.n_evals,
        n_gradient_evals=n_grad,
    )


def hessian(obj: Objective, at) -> np.ndarray:
    """Central-difference Hessian of the total log-likelihood."""
    x = np.asarray(at, float)
    n = x.size
    h = _HESS_STEP * np.maximum(np.abs(x), 1.0)
    hess = np.empty((n, n))
    f0 = obj.value(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h[i]
        hess[i, i] = (obj.value(x + ei) - 2.0 * f0 + obj.value(x - ei)) / h[i] ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h[j]
            fpp = obj.value(x + ei + ej)
            fpm = obj.value(x + ei - ej)
            fmp = obj.value(x - ei + ej)
            fmm = obj.value(x - ei - ej)
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j])
    if not np.all(np.isfinite(hess)):
        raise NumericalError("non-finite Hessian entries", detail=hess)
    return 0.5 * (hess + hess.T)


def covariance_hessian(obj: Objective, at) -> np.ndarray:
    """Covariance = -inverse(numerical Hessian); requires negative definiteness."""
    hess = hessian(obj, at)
    eigvals = np.linalg.eigvalsh(hess)
    if np.max(eigvals) >= 0.0:
        raise NumericalError(
            "Hessian is not negative definite at the evaluation point",
            detail=eigvals.tolist(),
        )
    cov = -np.linalg.inv(hess)
    return 0.5 * (cov + cov.T)


def covariance_opg(obj: Objective, at) -> np.ndarray:
    """Covariance from the outer product of per-observation gradients."""
    x = np.asarray(at, float)
    n = x.size
    base = obj.per_obs(x)
    if base is None:
        raise DomainError("objective does not supply per-observation log-likelihoods")
    t = base.size
    scores = np.empty((t, n))
    for i in range(n):
        h = _GRAD_STEP * max(abs(x[i]), 1.0)
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        lp = obj.per_obs(xp)
        lm = obj.per_obs(xm)
        if lp is None or lm is None:
            raise NumericalError("per-observation likelihood unavailable near point")
        scores[:, i] = (lp - lm) / (2.0 * h)
    opg = scores.T @ scores
    try:
        cov = np.linalg.inv(opg)
    except np.linalg.LinAlgError:
        raise NumericalError("singular OPG matrix", detail=opg) from None
    if not np.all(np.isfinite(cov)):
        raise NumericalError("singular OPG matrix", detail=opg)
    return 0.5 * (cov + cov.T)


def std_errors_from(cov: np.ndarray) -> np.ndarray:
    d = np.diag(cov).copy()
    d[d < 0] = np.nan
    return np.sqrt(d)
