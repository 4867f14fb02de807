"""Ordinal-pattern analysis of univariate time series.

Pattern extraction and contrasts, permutation-entropy serial-dependence
tests with exact null models, process generators including the
coin-tossing order, and exact machinery for stationary random orders.
"""

__version__ = "0.1.0"

from .contrasts import (
    ContrastVector,
    PatternDistribution,
    contrast_fractions,
    contrast_vector,
    contrast_vs_delay,
    pattern_frequencies,
    pythagoras_check,
    relative_contributions,
    sliding_contrast,
    uniform_distribution,
    random_walk_distribution,
)
from .entropy import EntropyReport, permutation_entropy, taylor_entropy, z_statistic
from .errors import (
    AllWindowsTied,
    ConstraintViolation,
    DegenerateAtWhiteNoise,
    NonStationaryInput,
    OrdpatError,
    ParseError,
    SeriesTooShort,
    SizeLimit,
    TieError,
    UnknownTable,
    WrongLength,
    ZeroDenominator,
)
from .nulls import (
    ContrastMoments,
    EigenStructure,
    NullModel,
    QuantileTable,
    TestReport,
    batch_test,
    contrast_moments,
    contrast_test,
    eigen_structure,
    entropy_test,
    null_covariance,
    reference_quantile_table,
    simulate_entropy_deviations,
    simulate_quantiles,
)
from .orders import (
    OrderHistogram,
    OrderInterval,
    PatternMeasure,
    check_consistency,
    check_stationarity,
    coin_tossing_measure,
    extend_to,
    histogram,
    interval_of,
    markov_extension,
    parse_measure,
    restrict,
    serialize_measure,
    uniform_measure,
)
from .patterns import (
    Pattern,
    WindowSpec,
    extract_patterns,
    invert_pattern,
    pattern_of_window,
    reverse_pattern,
)
from .processes import (
    GibbsReport,
    OrderPrefix,
    ProcessSpec,
    ar1_contrasts,
    coin_tossing_distribution,
    coin_tossing_distribution_delayed,
    coin_tossing_prefix,
    generate,
    gibbs_check,
    u_energy,
)
from .reproduce import ReproReport, run_reproduction
