"""Replication success: sceptical Bayes factors, competing criteria and their operating characteristics."""

from .normal_model import (
    BayesFactorValue,
    ReplicationPair,
    StudySummary,
    bf_0s,
    bf_sa,
    derive_pair,
    min_bf,
    q_statistic,
    replication_bf,
    sceptical_bf,
    sceptical_p,
    sufficiently_sceptical_g,
    two_trials,
)
from .io_cli import analyze, fisher_transform, load_studies

__version__ = "0.1.0"

__all__ = [
    "BayesFactorValue",
    "ReplicationPair",
    "StudySummary",
    "analyze",
    "bf_0s",
    "bf_sa",
    "derive_pair",
    "fisher_transform",
    "load_studies",
    "min_bf",
    "q_statistic",
    "replication_bf",
    "sceptical_bf",
    "sceptical_p",
    "sufficiently_sceptical_g",
    "two_trials",
]
