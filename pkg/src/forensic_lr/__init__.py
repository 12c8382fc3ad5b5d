"""Fully Bayesian forensic likelihood ratios for binary-locus profiles."""

from .beta import (
    HALDANE,
    JEFFREYS,
    LAPLACE,
    BetaParams,
    NamedPrior,
    PriorTag,
    StructureParams,
    beta_mean_var,
    from_structure,
    log_beta_fn,
    to_structure,
)
from .errors import (
    DomainError,
    ForensicLRError,
    IndeterminateLimitError,
    OracleError,
    ValidationError,
)
from .inference import (
    CaseInput,
    HaldanePosterior,
    Hypothesis,
    LrReport,
    ModelParams,
    defence_likelihood,
    haldane_lr,
    locus_lr,
    plugin_lr,
    posterior_odds,
    posterior_update,
    predictive_pair,
    predictive_single,
    profile_probability,
    prosecution_likelihood,
    total_lr,
)
from .profiles import Database, LocusCounts, LocusMatch, Profile, match_mask, summarize

__version__ = "0.1.0"
