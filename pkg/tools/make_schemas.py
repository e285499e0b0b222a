"""Regenerate the JSON schemas shipped under tsecon/schemas.

Each CLI command's --format json payload has one schema file.  Shared
structures (test results, series, forecast points, ...) are inlined per
file so every schema validates standalone.
"""
from __future__ import annotations

import copy
import json
import os

NUM = {"type": ["number", "null"]}
INT = {"type": "integer"}
STR = {"type": "string"}
BOOL = {"type": "boolean"}


def arr(items) -> dict:
    return {"type": "array", "items": copy.deepcopy(items)}


def obj(props: dict, required=None, extra=False) -> dict:
    return {
        "type": "object",
        "properties": copy.deepcopy(props),
        "required": sorted(required if required is not None else props),
        "additionalProperties": extra,
    }


NUMS = arr(NUM)
STRS = arr(STR)
MATRIX = arr(NUMS)

TEST = obj({
    "name": STR,
    "statistic": NUM,
    "p_value": NUM,
    "df": {"oneOf": [INT, {"type": "array", "items": INT,
                           "minItems": 2, "maxItems": 2}, {"type": "null"}]},
    "null_hypothesis": STR,
    "details": {"type": "object"},
}, required=["name", "statistic", "p_value"])

NULLABLE_TEST = {"oneOf": [copy.deepcopy(TEST), {"type": "null"}]}

SERIES = obj({"name": STR, "start": STR, "values": NUMS})

FORECAST_POINT = obj({
    "period": STR, "point": NUM, "std_error": NUM,
    "lower": NUM, "upper": NUM,
})

EVALUATION = obj({
    "me": NUM, "mse": NUM, "rmse": NUM, "mae": NUM, "mpe": NUM,
    "mape": NUM, "theil_u": NUM, "um": NUM, "ur": NUM, "ud": NUM,
    "nobs": INT, "perfect": BOOL,
})

ROOT = obj({"real": NUM, "imaginary": NUM, "modulus": NUM,
            "frequency": NUM})

ARIMA_SPEC = obj({
    "p": INT, "d": INT, "q": INT, "include_const": BOOL,
    "exog": arr(SERIES), "exog_names": STRS,
})

ARIMA_FIT = obj({
    "spec": ARIMA_SPEC,
    "sample": STR,
    "dependent_name": STR,
    "nobs": INT,
    "coeff_names": STRS,
    "coefficients": NUMS,
    "std_errors": NUMS,
    "z_stats": NUMS,
    "p_values": NUMS,
    "sigma": NUM,
    "loglik": NUM,
    "k": INT,
    "aic": NUM,
    "bic": NUM,
    "hqc": NUM,
    "mean_innovations": NUM,
    "sd_innovations": NUM,
    "mean_dependent": NUM,
    "sd_dependent": NUM,
    "residuals": SERIES,
    "fitted": SERIES,
    "roots_ar": arr(ROOT),
    "roots_ma": arr(ROOT),
    "converged": BOOL,
    "n_function_evals": INT,
    "covariance": MATRIX,
})

ADF_RESULT = obj({
    "series_name": STR,
    "lags_used": INT,
    "max_lag": INT,
    "selection": STR,
    "coefficient_minus_one": NUM,
    "tau_statistic": NUM,
    "p_value": NUM,
    "deterministic": STR,
    "n_variables": INT,
    "first_order_resid_autocorr": NUM,
    "lagged_diff_F": NULLABLE_TEST,
    "nobs": INT,
    "surface": STR,
})

OLS_FIT = obj({
    "dependent_name": STR,
    "regressor_names": STRS,
    "coefficients": NUMS,
    "std_errors": NUMS,
    "t_stats": NUMS,
    "p_values": NUMS,
    "nobs": INT,
    "sample": STR,
    "mean_dependent": NUM,
    "sd_dependent": NUM,
    "ssr": NUM,
    "ser": NUM,
    "r_squared": NUM,
    "adj_r_squared": NUM,
    "loglik": NUM,
    "aic": NUM,
    "bic": NUM,
    "hqc": NUM,
    "rho": NUM,
    "durbin_watson": NUM,
    "residuals": SERIES,
})

EQUATION = obj({
    "name": STR,
    "coeff_names": STRS,
    "coefficients": NUMS,
    "std_errors": NUMS,
    "t_stats": NUMS,
    "p_values": NUMS,
    "mean_dependent": NUM,
    "sd_dependent": NUM,
    "ssr": NUM,
    "ser": NUM,
    "r_squared": NUM,
    "adj_r_squared": NUM,
    "rho": NUM,
    "durbin_watson": NUM,
    "f_stat": NUM,
    "f_pvalue": NUM,
}, required=["name", "coeff_names", "coefficients", "std_errors",
             "t_stats", "p_values"])

VAR_FIT = obj({
    "variable_names": STRS,
    "lag_order": INT,
    "include_const": BOOL,
    "nobs": INT,
    "sample": STR,
    "coeff_names": STRS,
    "coefficients": MATRIX,
    "std_errors": MATRIX,
    "t_stats": MATRIX,
    "p_values": MATRIX,
    "residuals": MATRIX,
    "sigma_ml": MATRIX,
    "sigma_ols": MATRIX,
    "det_sigma_ml": NUM,
    "loglik": NUM,
    "aic": NUM,
    "bic": NUM,
    "hqc": NUM,
    "n_regressors": INT,
    "equations": arr(EQUATION),
})

VARMA_FIT = obj({
    "ma_lags": INT,
    "variable_names": STRS,
    "equations": arr(EQUATION),
    "residuals": MATRIX,
    "sigma_ml": MATRIX,
    "correlations": MATRIX,
    "log_det_sigma": NUM,
    "breusch_pagan": TEST,
    "nobs": INT,
    "sample": STR,
})

LAG_ROW = obj({
    "lag": INT, "loglik": NUM, "lr_pvalue": NUM,
    "aic": NUM, "bic": NUM, "hqc": NUM,
    "aic_min": BOOL, "bic_min": BOOL, "hqc_min": BOOL,
})

IRF_TABLE = obj({
    "shock_variable": STR, "response_variable": STR, "values": NUMS,
})

FEVD_TABLE = obj({
    "variable": STR,
    "rows": arr({
        "type": "array",
        "prefixItems": [INT, NUM, NUMS],
        "items": False,
    }),
})

GARCH_SPEC = obj({
    "variant": STR, "arch_order": INT, "garch_order": INT,
    "mean": STR, "distribution": STR,
})

GARCH_FIT = obj({
    "spec": GARCH_SPEC,
    "sample": STR,
    "dependent_name": STR,
    "nobs": INT,
    "coeff_names": STRS,
    "coefficients": NUMS,
    "std_errors": NUMS,
    "z_stats": NUMS,
    "p_values": NUMS,
    "loglik": NUM,
    "k": INT,
    "aic": NUM,
    "bic": NUM,
    "hqc": NUM,
    "convention": STR,
    "persistence": NUM,
    "unconditional_variance": NUM,
    "conditional_variances": SERIES,
    "standardized_residuals": SERIES,
    "gjr_alternative": {"oneOf": [
        obj({"alpha": NUM, "gamma": NUM, "alpha_se": NUM,
             "gamma_se": NUM}, required=["alpha", "gamma"]),
        {"type": "null"},
    ]},
    "converged": BOOL,
    "n_function_evals": INT,
})

COMPARISON_ROW = obj({
    "label": STR,
    "distribution": STR,
    "loglik": NUM,
    "aic": NUM,
    "bic": NUM,
    "hqc": NUM,
    "all_significant": BOOL,
    "converged": BOOL,
    "error": {"type": ["string", "null"]},
})

CORRELOGRAM_ROW = obj({
    "lag": INT, "acf": NUM, "pacf": NUM, "q_stat": NUM, "p_value": NUM,
    "acf_significant": BOOL, "pacf_significant": BOOL,
})


def envelope(command, props: dict, required=None) -> dict:
    cmd = ({"const": command} if isinstance(command, str)
           else {"enum": list(command)})
    body = {"command": {"type": "string", **cmd}}
    body.update(props)
    out = obj(body, required=["command"] + sorted(required if required
                                                  is not None else props))
    out["$schema"] = "https://json-schema.org/draft/2020-12/schema"
    name = command if isinstance(command, str) else command[0]
    out["$id"] = f"https://tsecon.invalid/schemas/{name}.json"
    out["title"] = f"tsecon {name} --format json payload"
    return out


SCHEMAS = {
    "correlogram": envelope("correlogram", {
        "series": STR,
        "nobs": INT,
        "max_lag": INT,
        "rows": arr(CORRELOGRAM_ROW),
    }),
    "arima": envelope(("arima", "armax"), {
        "fit": ARIMA_FIT,
        "diagnostics": obj({"normality": TEST, "ljung_box": TEST,
                            "arch_lm": TEST}),
        "forecast": arr(FORECAST_POINT),
        "evaluation": EVALUATION,
        "screening": arr(obj({
            "label": STR, "normality": TEST, "ljung_box": TEST,
            "arch_lm": TEST, "passed": BOOL,
        })),
    }, required=[]),
    "varma": envelope("varma", {
        "residual_order": {"type": "array", "items": INT,
                           "minItems": 3, "maxItems": 3},
        "ma_lags": INT,
        "fit": VARMA_FIT,
    }),
    "var": envelope("var", {
        "lag_order": INT,
        "lag_selection": arr(LAG_ROW),
        "fit": VAR_FIT,
        "portmanteau": TEST,
        "granger": arr(TEST),
        "irf": arr(IRF_TABLE),
        "fevd": arr(FEVD_TABLE),
        "forecast": {"type": "object",
                     "additionalProperties": arr(FORECAST_POINT)},
    }, required=["lag_order", "fit", "portmanteau", "granger"]),
    "adf": envelope("adf", {"result": ADF_RESULT}),
    "coint": envelope("coint", {
        "report": obj({
            "step1": ADF_RESULT,
            "step2": ADF_RESULT,
            "step3": OLS_FIT,
            "step4": ADF_RESULT,
            "level": NUM,
            "conclusion": STR,
        }),
    }),
    "garch": {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "$id": "https://tsecon.invalid/schemas/garch.json",
        "title": "tsecon garch --format json payload",
        "oneOf": [
            obj({"command": {"type": "string", "const": "garch"},
                 "fit": GARCH_FIT}),
            obj({"command": {"type": "string", "const": "garch"},
                 "comparison": arr(COMPARISON_ROW)}),
        ],
    },
    "kalman": envelope("kalman", {
        "names": STRS,
        "estimates": NUMS,
        "std_errors": NUMS,
        "z": NUMS,
        "p_values": NUMS,
        "loglik": NUM,
        "aic": NUM,
        "bic": NUM,
        "hqc": NUM,
        "nobs": INT,
    }),
    "evaluate": envelope("evaluate", {"evaluation": EVALUATION}),
}


def main() -> None:
    here = os.path.dirname(os.path.abspath(__file__))
    dest = os.path.join(here, os.pardir, "src", "tsecon", "schemas")
    for name, schema in SCHEMAS.items():
        path = os.path.join(dest, f"{name}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(schema, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {os.path.relpath(path, os.path.join(here, os.pardir))}")


if __name__ == "__main__":
    main()
