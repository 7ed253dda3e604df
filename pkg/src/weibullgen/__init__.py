"""Lifetime modeling with Weibull generalizations for maintenance planning."""

__version__ = "0.1.0"

from .distributions import (
    EPWParams,
    EWParams,
    Family,
    FamilyParams,
    GGParams,
    GWParams,
    MOWParams,
    cdf,
    hazard,
    log_pdf,
    make_params,
    pdf,
    quantile,
    survival,
)
from .errors import (
    ConvergenceError,
    DegenerateSampleError,
    DomainError,
    InputError,
    NoAdmissibleModelError,
    ParameterError,
    SingularInformationError,
    SupportError,
    WeibullGenError,
)
from .estimation import FitResult, OptimizerConfig, Sample, fit_mle, log_likelihood, observed_information, score
from .prediction import MaintenancePlan, predict_maintenance
from .resampling import BootstrapConfig, BootstrapResult, bootstrap_fit
from .selection import (
    GofResult,
    SelectionReport,
    TttCurve,
    aic,
    aicc,
    goodness_of_fit,
    ks_pvalue,
    ks_statistic,
    select_best,
    ttt_transform,
)
from .data_io import Report, load_csv, load_embedded, read_report, write_plot, write_report
