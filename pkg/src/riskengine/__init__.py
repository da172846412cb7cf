"""Market-risk engine: VaR/ES estimation, backtesting and connectedness."""

__version__ = "0.1.0"

from .backtest import (
    BreachSeries,
    CoverageReport,
    TransitionCounts,
    breach_frequency,
    breaches,
    evaluate,
    lr_conditional,
    lr_independence,
    lr_unconditional,
    transition_counts,
)
from .connectedness import (
    ConnectednessTable,
    VarModel,
    connectedness_table,
    fit_var,
    gfevd,
    indices,
    ma_coefficients,
    normalize_rows,
)
from .data import (
    CsvSchema,
    MultiSeries,
    ReturnSeries,
    load_csv,
    load_multi_csv,
    to_log_returns,
    window,
    write_csv,
)
from .garch import GarchFit, GarchParams, filter, fit, loglik, next_variance
from .mathstat import (
    QQPoints,
    chi2_sf,
    empirical_quantile,
    norm_cdf,
    norm_inv_cdf,
    normal_es,
    qq_points,
)
from .montecarlo import (
    McConfig,
    TermStructure,
    run_mc,
    simulate_cumulative,
    simulate_garch_returns,
    term_structure,
)
from .var_engine import (
    VarConfig,
    VarSeries,
    fhs_var,
    garch_normal_var,
    hs_var,
    rolling_var,
)
