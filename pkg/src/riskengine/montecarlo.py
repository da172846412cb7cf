"""Multi-day Monte Carlo VaR and expected shortfall under GARCH dynamics.

Each path starts from the one-step-ahead variance implied by the last
in-sample return and filtered variance, then alternates draw / accumulate /
variance-update for ``horizon`` steps. Innovations are either standard
normal or bootstrap draws (with replacement) from the fitted standardized
residuals.

Determinism contract: all innovations are drawn up front, in one canonical
order, from a counter-based generator keyed by the seed. Worker threads only
ever consume disjoint, pre-drawn path blocks, so the output is bit-identical
for a given (fit, config) no matter how many threads run.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, TailTooSmallError
from .garch import GarchFit, GarchParams, next_variance

INNOVATION_NORMAL = "normal"
INNOVATION_FHS = "fhs"
_BLOCK = 65536  # paths per worker block; fixed so chunking never moves draws


@dataclass(frozen=True)
class McConfig:
    seed: int
    n_paths: int = 1000
    horizon: int = 5
    level: float = 0.01
    innovation: str = INNOVATION_NORMAL

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be a 64-bit unsigned int, got {self.seed}")
        if self.n_paths < 100:
            raise ConfigError(f"need at least 100 paths, got {self.n_paths}")
        if not 1 <= self.horizon <= 250:
            raise ConfigError(f"horizon must lie in 1..250, got {self.horizon}")
        if not 0.0 < self.level < 0.5:
            raise ConfigError(f"level must lie in (0, 0.5), got {self.level}")
        if self.innovation not in (INNOVATION_NORMAL, INNOVATION_FHS):
            raise ConfigError(f"unknown innovation kind {self.innovation!r}")


@dataclass(frozen=True)
class TermStructure:
    """Cumulative-return VaR/ES per horizon step, both signed quantities."""

    var: np.ndarray
    es: np.ndarray
    level: float
    n_paths: int
    config: McConfig | None = None

    @property
    def horizon(self) -> int:
        return len(self.var)

    def to_dict(self) -> dict:
        out = {
            "level": self.level,
            "n_paths": self.n_paths,
            "horizon": self.horizon,
            "var": [float(v) for v in self.var],
            "es": [float(e) for e in self.es],
        }
        if self.config is not None:
            out["seed"] = self.config.seed
            out["innovation"] = self.config.innovation
        return out


def _thread_count() -> int:
    raw = os.environ.get("RISK_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"RISK_THREADS must be an integer, got {raw!r}") from None


def _simulate_block(out, innov, params: GarchParams, v_start: float,
                    lo: int, hi: int) -> None:
    v = np.full(hi - lo, v_start)
    cum = np.zeros(hi - lo)
    for h in range(out.shape[1]):
        r = np.sqrt(v) * innov[lo:hi, h]
        cum = cum + r
        out[lo:hi, h] = cum
        v = params.omega + params.alpha * r * r + params.beta * v


def simulate_cumulative(fit: GarchFit, cfg: McConfig) -> np.ndarray:
    """Matrix [n_paths, horizon] of cumulative returns through each step."""
    if len(fit.z) == 0 or len(fit.sigma) == 0:
        raise DataError("empty residual pool for bootstrap innovations")
    params = fit.params
    last_r = float(fit.sigma[-1] * fit.z[-1])
    v_start = next_variance(params, last_r, float(fit.sigma[-1] ** 2))

    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    shape = (cfg.n_paths, cfg.horizon)
    if cfg.innovation == INNOVATION_NORMAL:
        innov = rng.standard_normal(shape)
    else:
        pool = np.asarray(fit.z, dtype=float)
        innov = pool[rng.integers(0, pool.size, size=shape)]

    out = np.empty(shape)
    bounds = [(lo, min(lo + _BLOCK, cfg.n_paths))
              for lo in range(0, cfg.n_paths, _BLOCK)]
    workers = min(_thread_count(), len(bounds))
    if workers == 1:
        for lo, hi in bounds:
            _simulate_block(out, innov, params, v_start, lo, hi)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool_exec:
            futures = [
                pool_exec.submit(_simulate_block, out, innov, params,
                                 v_start, lo, hi)
                for lo, hi in bounds
            ]
            for future in futures:
                future.result()
    return out


def term_structure(cum: np.ndarray, p: float) -> TermStructure:
    """Per-horizon empirical VaR and tail-mean ES of a cumulative matrix.

    VaR is the k-th smallest cumulative return with k = ceil(p*n); ES is the
    mean of those k values, so ES <= VaR by construction.
    """
    cum = np.asarray(cum, dtype=float)
    n_paths, horizon = cum.shape
    if n_paths * p < 5.0:
        raise TailTooSmallError(
            f"{n_paths} paths at level {p} leave fewer than 5 tail paths"
        )
    k = max(1, math.ceil(p * n_paths - 1e-9))
    var = np.empty(horizon)
    es = np.empty(horizon)
    for h in range(horizon):
        tail = np.partition(cum[:, h], k - 1)[:k]
        var[h] = tail.max()
        es[h] = tail.mean()
    return TermStructure(var=var, es=es, level=p, n_paths=n_paths)


def run_mc(fit: GarchFit, cfg: McConfig) -> TermStructure:
    """Simulate and reduce in one call, echoing the config for reproducibility."""
    ts = term_structure(simulate_cumulative(fit, cfg), cfg.level)
    return replace(ts, config=cfg)


def simulate_garch_returns(params: GarchParams, n_obs: int, seed: int,
                           innovation: str = INNOVATION_NORMAL,
                           t_dof: float = 5.0) -> np.ndarray:
    """Synthetic return path following the variance recursion.

    Student-t innovations are rescaled to unit variance so omega keeps its
    meaning across innovation choices. Starts at the unconditional variance.
    """
    if n_obs < 1:
        raise ConfigError(f"need at least one observation, got {n_obs}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    if innovation == INNOVATION_NORMAL:
        z = rng.standard_normal(n_obs)
    elif innovation == "student_t":
        if t_dof <= 2.0:
            raise ConfigError(f"t_dof must exceed 2, got {t_dof}")
        z = rng.standard_t(t_dof, n_obs) * math.sqrt((t_dof - 2.0) / t_dof)
    else:
        raise ConfigError(f"unknown innovation kind {innovation!r}")
    r = np.empty(n_obs)
    v = params.unconditional_variance
    for t in range(n_obs):
        r[t] = math.sqrt(v) * z[t]
        v = next_variance(params, r[t], v)
    return r


def write_term_csv(ts: TermStructure, path) -> None:
    """horizon/var/es rows; values are signed cumulative-return quantiles."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["horizon", "var", "es"])
        for h in range(ts.horizon):
            writer.writerow([h + 1, repr(float(ts.var[h])), repr(float(ts.es[h]))])


def write_term_json(ts: TermStructure, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(ts.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
