"""Time-tolerant evaluation of point anomaly detectors on sequential data."""

from .errors import (
    AlignmentError,
    AnomevalError,
    ConfigError,
    DegenerateDataError,
    DomainError,
    MatrixSideError,
    OrderError,
    ParseError,
)
from .scoring import ScoreSeries, StaLtaConfig, sliding_mean, sta_lta_score
from .seqdata import (
    EventSeries,
    IngestReport,
    InputSeries,
    TimeGrid,
    load_events,
    load_series,
    write_series,
)
from .significance import (
    FitDiagnostics,
    NullDistribution,
    NullPair,
    PermutationPlan,
    SimulatedMeasures,
    binomial_cdf,
    binomial_fit_diagnostics,
    ecdf,
    mc_pvalue,
    permute_events,
    simulate_measures,
    simulate_null,
)
from .toleval import (
    GROUND_TOLERANT,
    PREDICTION_TOLERANT,
    UNDEFINED,
    PredictionSeries,
    SweepCell,
    SweepResult,
    Threshold,
    TolerantConfusionMatrix,
    confusion_ground_tolerant,
    confusion_prediction_tolerant,
    dilate,
    precision_tolerant,
    predict,
    prediction_matrix,
    recall_tolerant,
    resolve_threshold,
    sweep,
)

__version__ = "0.1.0"
