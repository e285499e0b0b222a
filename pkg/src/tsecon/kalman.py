"""Linear-Gaussian state space: filter recursion and ARMA mapping.

State equation xi_{t+1} = F xi_t + v_t, Var v = Q; observation
y_t = A'x_t + H'xi_t + w_t, Var w = R. The univariate filter loop is the
package's hottest kernel and runs under numba when available.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._accel import maybe_jit
from .errors import DomainError, NumericalError

_LN2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class StateSpaceModel:
    F: np.ndarray  # r x r transition
    H: np.ndarray  # r x n observation loading
    Q: np.ndarray  # r x r state noise covariance
    R: np.ndarray  # n x n observation noise covariance
    A: np.ndarray | None = None  # k x n exogenous loading
    initial_state: np.ndarray | None = None
    initial_covariance: np.ndarray | None = None

    @property
    def r(self) -> int:
        return self.F.shape[0]

    @property
    def n(self) -> int:
        return self.H.shape[1]

    def validated(self) -> "StateSpaceModel":
        F = np.atleast_2d(np.asarray(self.F, float))
        H = np.asarray(self.H, float)
        if H.ndim == 1:
            H = H[:, None]
        Q = np.atleast_2d(np.asarray(self.Q, float))
        R = np.atleast_2d(np.asarray(self.R, float))
        r, n = H.shape
        if F.shape != (r, r) or Q.shape != (r, r) or R.shape != (n, n):
            raise DomainError(
                f"inconsistent state-space dimensions: F{F.shape} H{H.shape} "
                f"Q{Q.shape} R{R.shape}"
            )
        a0 = (
            np.zeros(r)
            if self.initial_state is None
            else np.asarray(self.initial_state, float).reshape(r)
        )
        p0 = (
            np.zeros((r, r))
            if self.initial_covariance is None
            else np.asarray(self.initial_covariance, float).reshape(r, r)
        )
        return StateSpaceModel(F, H, Q, R, self.A, a0, p0)


@dataclass(frozen=True)
class FilterOutput:
    loglik_total: float
    loglik_per_obs: np.ndarray
    filtered_states: np.ndarray
    prediction_errors: np.ndarray
    prediction_error_variances: np.ndarray


def _filter_univariate_py(y, offset, F, h, Q, r_var, a0, P0):
    """Scalar-observation Kalman recursion. Returns error index on failure."""
    t_len = y.shape[0]
    r = F.shape[0]
    ll = np.zeros(t_len)
    verr = np.zeros(t_len)
    svar = np.zeros(t_len)
    states = np.zeros((t_len, r))
    a = a0.copy()
    P = P0.copy()
    eye = np.eye(r)
    fail = -1
    for t in range(t_len):
        s = h @ P @ h + r_var
        if not np.isfinite(s) or s <= 0.0:
            fail = t
            break
        v = y[t] - offset[t] - h @ a
        ll[t] = -0.5 * (_LN2PI + np.log(s) + v * v / s)
        k = (P @ h) / s
        a = a + k * v
        ikh = eye - np.outer(k, h)
        P = ikh @ P @ ikh.T + r_var * np.outer(k, k)
        verr[t] = v
        svar[t] = s
        states[t] = a
        a = F @ a
        P = F @ P @ F.T + Q
    return ll, verr, svar, states, fail


_filter_univariate = maybe_jit(_filter_univariate_py)


def kalman_filter(model: StateSpaceModel, observations, exog=None) -> FilterOutput:
    """Run the filter; per-observation Gaussian prediction-error loglik.

    ``exog`` is a T x k regressor matrix matched to model.A; when A is a
    1 x n loading and exog is omitted, a column of ones is implied (pure
    intercept).
    """
    m = model.validated()
    y = np.asarray(observations, float)
    if y.ndim == 1:
        y2 = y[:, None]
    else:
        y2 = y
    t_len, n = y2.shape
    if n != m.n:
        raise DomainError(f"observations have {n} columns, model expects {m.n}")

    if m.A is not None:
        a_mat = np.atleast_2d(np.asarray(m.A, float))
        if exog is None:
            if a_mat.shape[0] != 1:
                raise DomainError("model has exogenous loadings but no exog given")
            x_mat = np.ones((t_len, 1))
        else:
            x_mat = np.asarray(exog, float).reshape(t_len, a_mat.shape[0])
        offset = x_mat @ a_mat  # T x n
    else:
        offset = np.zeros((t_len, n))

    if n == 1:
        ll, verr, svar, states, fail = _filter_univariate(
            y2[:, 0].copy(),
            offset[:, 0].copy(),
            m.F,
            m.H[:, 0].copy(),
            m.Q,
            float(m.R[0, 0]),
            m.initial_state,
            m.initial_covariance,
        )
        if fail >= 0:
            raise NumericalError(
                f"prediction-error variance not positive at observation {fail}"
            )
        return FilterOutput(
            loglik_total=float(ll.sum()),
            loglik_per_obs=ll,
            filtered_states=states,
            prediction_errors=verr[:, None],
            prediction_error_variances=svar.reshape(t_len, 1, 1),
        )

    # general multivariate path (small systems; dense solves)
    a = m.initial_state.copy()
    P = m.initial_covariance.copy()
    eye = np.eye(m.r)
    ll = np.zeros(t_len)
    verr = np.zeros((t_len, n))
    svar = np.zeros((t_len, n, n))
    states = np.zeros((t_len, m.r))
    for t in range(t_len):
        s = m.H.T @ P @ m.H + m.R
        sign, logdet = np.linalg.slogdet(s)
        if sign <= 0 or not np.isfinite(logdet):
            raise NumericalError(f"singular prediction-error variance at {t}")
        v = y2[t] - offset[t] - m.H.T @ a
        siv = np.linalg.solve(s, v)
        ll[t] = -0.5 * (n * _LN2PI + logdet + float(v @ siv))
        k = P @ m.H @ np.linalg.inv(s)
        a = a + k @ v
        ikh = eye - k @ m.H.T
        P = ikh @ P @ ikh.T + k @ m.R @ k.T
        verr[t] = v
        svar[t] = s
        states[t] = a
        a = m.F @ a
        P = m.F @ P @ m.F.T + m.Q
    return FilterOutput(
        loglik_total=float(ll.sum()),
        loglik_per_obs=ll,
        filtered_states=states,
        prediction_errors=verr,
        prediction_error_variances=svar,
    )


def arma_to_state_space(
    phi,
    theta,
    sigma: float,
    include_const: bool = False,
    const: float = 0.0,
) -> StateSpaceModel:
    """Map ARMA(p,q) to state-space form with r = max(p, q+1).

    Transition stacks the latent AR recursion (companion form); the
    observation loading carries (1, theta_1, ..). A constant becomes a
    pure-intercept exogenous loading, i.e. the filter sees y_t - const.
    """
    phi = np.atleast_1d(np.asarray(phi, float)) if phi is not None else np.zeros(0)
    theta = np.atleast_1d(np.asarray(theta, float)) if theta is not None else np.zeros(0)
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    p, q = phi.size, theta.size
    r = max(p, q + 1)
    F = np.zeros((r, r))
    F[0, :p] = phi
    if r > 1:
        F[1:, :-1] += np.eye(r - 1)
    h = np.zeros((r, 1))
    h[0, 0] = 1.0
    h[1 : q + 1, 0] = theta
    Q = np.zeros((r, r))
    Q[0, 0] = sigma * sigma
    R = np.zeros((1, 1))
    A = np.array([[const]]) if include_const else None
    return StateSpaceModel(F, h, Q, R, A=A)


def diffuse_initialization(model: StateSpaceModel) -> StateSpaceModel:
    """Stationary initialization: zero state, covariance from the Lyapunov
    equation P = F P F' + Q solved by vectorization."""
    m = model.validated()
    eigs = np.linalg.eigvals(m.F)
    radius = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    if radius >= 1.0 - 1e-12:
        raise DomainError(
            f"transition matrix has spectral radius {radius:.6f} >= 1; "
            "supply explicit initialization"
        )
    r = m.r
    lhs = np.eye(r * r) - np.kron(m.F, m.F)
    p_vec = np.linalg.solve(lhs, m.Q.reshape(-1))
    P0 = p_vec.reshape(r, r)
    P0 = 0.5 * (P0 + P0.T)
    return replace(m, initial_state=np.zeros(r), initial_covariance=P0)
