"""Out-of-sample forecast accuracy statistics.

Errors are actual minus forecast.  Theil's U is the U2 form: the RMS of
relative forecast errors over the RMS of relative naive (no-change)
errors, both scaled by the lagged actual.  Pairs are formed within the
evaluation window only (the first forecast period has no in-window lag
and is excluded from U); this convention was pinned empirically against
reference output.  The MSE decomposition uses population (1/N) moments,
which is what makes the three proportions sum to one identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .series import TimeSeries

__all__ = ["ForecastEvaluation", "evaluate_forecast"]


@dataclass(frozen=True)
class ForecastEvaluation:
    me: float
    mse: float
    rmse: float
    mae: float
    mpe: float
    mape: float
    theil_u: float
    um: float
    ur: float
    ud: float
    nobs: int
    perfect: bool = False


def evaluate_forecast(actual: TimeSeries, forecast: TimeSeries,
                      pre_sample_last_actuals=None) -> ForecastEvaluation:
    """Accuracy statistics over an aligned evaluation window.

    ``pre_sample_last_actuals`` is accepted for interface stability (a
    seeded-U variant would need the last actual before the window) but
    the pinned U convention pairs consecutive in-window observations, so
    it does not enter any reported number.
    """
    if actual.start != forecast.start or len(actual.values) != len(forecast.values):
        raise DomainError("actual and forecast windows must be aligned")
    y = actual.values
    f = forecast.values
    n = y.size
    if n < 2:
        raise DomainError("evaluation window must contain at least 2 points")

    err = y - f
    me = float(err.mean())
    mse = float((err**2).mean())
    rmse = math.sqrt(mse)
    mae = float(np.abs(err).mean())

    if np.any(y == 0.0):
        raise DomainError("zero actuals: percentage measures undefined")
    mpe = float((100.0 * err / y).mean())
    mape = float((100.0 * np.abs(err) / y).mean())

    num = float((((f[1:] - y[1:]) / y[:-1]) ** 2).sum())
    den = float((((y[1:] - y[:-1]) / y[:-1]) ** 2).sum())
    theil = math.sqrt(num / den) if den > 0 else math.inf

    if mse == 0.0:
        return ForecastEvaluation(me, mse, rmse, mae, mpe, mape, 0.0,
                                  0.0, 0.0, 0.0, n, perfect=True)

    sy = float(y.std())
    sf = float(f.std())
    if sy > 0 and sf > 0:
        r = float(np.corrcoef(f, y)[0, 1])
    else:
        r = 0.0
    um = (f.mean() - y.mean()) ** 2 / mse
    ur = (sf - r * sy) ** 2 / mse
    ud = (1.0 - r * r) * sy * sy / mse
    return ForecastEvaluation(me, mse, rmse, mae, mpe, mape, theil,
                              float(um), float(ur), float(ud), n)
