"""Analytical performance engine for the 802.15.4 unslotted CSMA/CA.

Enumerates the probabilistic outcomes of N event-driven nodes contending
for the channel (exactly, or pruned below a probability threshold),
derives delivery ratio / latency / energy, and ships two independent
oracles: a Monte-Carlo simulator and an exhaustive joint enumerator.
"""

from .chains import FAILURE, SUCCESS, Chain, Event, NodeComposition, make_event
from .engine import (
    CondCcaTable,
    EccResult,
    ResidualProbs,
    composition_prob,
    cond_cca_table,
    infeasible_set,
    initial_events,
    next_event_probs,
    no_txs_prob,
    residual_probs,
    run_ecc,
)
from .errors import (
    BudgetExceeded,
    ConfigError,
    EmptyChainSet,
    GridMisaligned,
    InvalidComposition,
    MissingKey,
    NormalizationViolation,
    OutOfRange,
    TreeTooLarge,
)
from .exact import ExactDistribution, enumerate_exact
from .metrics import MetricsReport, chain_energy, compute_metrics
from .params import DerivedModel, EnergyParams, MacParams, TimingParams, validate_config
from .schedule import StateIndex, lambda_set, omega_set
from .sim import SimReport, simulate

__version__ = "0.1.0"

__all__ = [
    "Chain", "Event", "NodeComposition", "SUCCESS", "FAILURE", "make_event",
    "CondCcaTable", "EccResult", "ResidualProbs", "composition_prob",
    "cond_cca_table", "infeasible_set", "initial_events", "next_event_probs",
    "no_txs_prob", "residual_probs", "run_ecc",
    "BudgetExceeded", "ConfigError", "EmptyChainSet", "GridMisaligned",
    "InvalidComposition", "MissingKey", "NormalizationViolation", "OutOfRange",
    "TreeTooLarge",
    "ExactDistribution", "enumerate_exact",
    "MetricsReport", "chain_energy", "compute_metrics",
    "DerivedModel", "EnergyParams", "MacParams", "TimingParams", "validate_config",
    "StateIndex", "lambda_set", "omega_set",
    "SimReport", "simulate",
    "__version__",
]
