"""Weakly private information retrieval toolkit.

Probabilistic PIR query structures, information-leakage metrics, the
closed-form leakage/download-cost tradeoff with an independent numeric
verification route, and an end-to-end protocol simulator.
"""

from .errors import (
    ConvergenceError,
    CostRangeError,
    DecodeError,
    DistributionError,
    ParameterError,
    SupportViolationError,
    UndefinedNormalizationError,
    WpirError,
)
from .leakage import (
    KL,
    MAX_ORDER,
    RenyiOrder,
    as_order,
    empirical_distribution,
    eps_privacy,
    maximal_leakage,
    mutual_information_leakage,
    normalized_renyi,
    renyi_divergence,
    renyi_entropy,
    total_variation,
    uniform_distribution,
)
from .optimizer import (
    CostProfile,
    CrossoverResult,
    KktReport,
    OptimalSolution,
    OracleConfig,
    OracleResult,
    TradeoffPoint,
    capacity,
    feasible_cost_range,
    find_crossover,
    high_cost_mass,
    kkt_check,
    numeric_oracle,
    optimal_distribution,
    perfect_privacy_cost,
    points_to_csv,
    points_to_json,
    sweep_tradeoff,
    tradeoff_leakage,
)
from .protocol import (
    Answer,
    MessageStore,
    RetrievalTranscript,
    SimulationReport,
    answer_query,
    decode,
    random_store,
    retrieve,
    simulate,
    verify_decodability,
)
from .schemes import (
    QueryElement,
    QueryOption,
    QueryStructure,
    SchemeKind,
    SchemeParams,
    SymbolRef,
    build_structure,
    canonical_query,
    per_db_query_distribution,
    structure_from_json,
    structure_to_json,
)

__version__ = "0.1.0"
