"""Rolling one-day Value-at-Risk by three methods.

* ``hs``: empirical quantile of the trailing raw-return window.
* ``garch_n``: conditional volatility times the normal quantile.
* ``fhs``: conditional volatility times the empirical quantile of the
  trailing standardized residuals.

Forecast for index t only ever looks at indices < t (the volatility at t is
the filtered value, which depends on returns up to t-1). VaR values are kept
signed: a 5% VaR is a negative return quantile.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .data import ReturnSeries, window
from .errors import AlignmentError, ConfigError, DataError
from .garch import GarchFit
from .mathstat import empirical_quantile, norm_inv_cdf

METHOD_HS = "hs"
METHOD_GARCH_N = "garch_n"
METHOD_FHS = "fhs"
METHODS = (METHOD_HS, METHOD_GARCH_N, METHOD_FHS)


@dataclass(frozen=True)
class VarConfig:
    level: float = 0.05
    window: int = 200
    method: str = METHOD_HS

    def __post_init__(self):
        if not 0.0 < self.level < 0.5:
            raise ConfigError(f"level must lie in (0, 0.5), got {self.level}")
        if self.window < 20:
            raise ConfigError(f"window must be >= 20, got {self.window}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class VarSeries:
    """Per-date VaR forecasts aligned with the realized returns they judge.

    The series starts at index ``window`` of the source sample; the first
    window observations have no forecast.
    """

    dates: tuple[date, ...]
    realized: np.ndarray
    var: np.ndarray
    method: str
    level: float

    def __len__(self) -> int:
        return len(self.var)


def hs_var(series: ReturnSeries, t: int, cfg: VarConfig) -> float:
    """Historical-simulation VaR at index t: window quantile of raw returns."""
    return empirical_quantile(window(series, t, cfg.window), cfg.level)


def garch_normal_var(sigma_t: float, p: float) -> float:
    """Conditionally normal VaR sigma_t * Phi^-1(p)."""
    if sigma_t <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma_t}")
    return sigma_t * norm_inv_cdf(p)


def fhs_var(sigma_t: float, z_window, p: float) -> float:
    """Filtered historical simulation VaR sigma_t * quantile of residuals."""
    if sigma_t <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma_t}")
    return sigma_t * empirical_quantile(z_window, p)


def rolling_var(series: ReturnSeries, fit: GarchFit | None,
                cfg: VarConfig) -> VarSeries:
    """VaR forecasts for indices m..T-1, each using only indices < t.

    ``fit`` may be None for the HS method; the GARCH methods require a fit
    filtered on exactly this series (same length).
    """
    m = cfg.window
    total = len(series)
    if total <= m:
        raise DataError(f"series of length {total} too short for window {m}")
    if cfg.method in (METHOD_GARCH_N, METHOD_FHS):
        if fit is None:
            raise AlignmentError(f"method {cfg.method!r} needs a GARCH fit")
        if fit.n_obs != total:
            raise AlignmentError(
                f"fit covers {fit.n_obs} observations, series has {total}"
            )

    out = np.empty(total - m)
    if cfg.method == METHOD_HS:
        for t in range(m, total):
            out[t - m] = hs_var(series, t, cfg)
    elif cfg.method == METHOD_GARCH_N:
        z_p = norm_inv_cdf(cfg.level)
        out[:] = fit.sigma[m:] * z_p
    else:
        for t in range(m, total):
            out[t - m] = fhs_var(fit.sigma[t], fit.z[t - m:t], cfg.level)

    return VarSeries(
        dates=series.dates[m:],
        realized=series.returns[m:].copy(),
        var=out,
        method=cfg.method,
        level=cfg.level,
    )


def write_var_csv(columns: list[VarSeries], path) -> None:
    """Date/return/VaR table, one VaR column per method (Table-style layout)."""
    if not columns:
        raise ValueError("no VaR series to write")
    first = columns[0]
    for other in columns[1:]:
        if other.dates != first.dates:
            raise AlignmentError("VaR series do not share a date index")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "return"] + [f"var_{c.method}" for c in columns])
        for i, when in enumerate(first.dates):
            row = [when.isoformat(), repr(float(first.realized[i]))]
            row += [repr(float(c.var[i])) for c in columns]
            writer.writerow(row)
