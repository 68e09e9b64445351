"""Randomness-beacon laboratory.

Implements the classic XOR commit-and-reveal beacon with balance-
weighted proposer selection, reproduces the last-revealer grinding
bias, and measures a threshold-secret-sharing variant where withheld
reveals are recovered by the other proposers.
"""

from .field import (
    ELEMENT_BYTES,
    FIELD_256,
    FieldElement,
    Polynomial,
    PRIME_256,
    PrimeField,
    SharePoint,
    fe_add,
    fe_inv,
    fe_mul,
    interpolate_at_zero,
    poly_eval,
)
from .shamir import (
    CorruptShares,
    InsufficientShares,
    Secret,
    SssConfig,
    decode_share,
    encode_share,
    recover,
    secrecy_probe,
    split,
)
from .randao import (
    DOMAIN_BEACON_PROPOSER,
    DOMAIN_RANDAO,
    MAX_EFFECTIVE_BALANCE,
    SECONDS_PER_SLOT,
    SLOTS_PER_EPOCH,
    EpochState,
    ProtocolError,
    Reveal,
    SelectionError,
    Validator,
    advance_pipeline,
    compute_reveal,
    derive_seed,
    genesis_seed,
    mix_reveals,
    select_proposers,
    xor32,
)
from .adversary import (
    AttackerProfile,
    AttackOutcome,
    DEFAULT_STRATEGY_CAP,
    Strategy,
    StrategyCapExceeded,
    best_strategy,
    enumerate_strategies,
    evaluate_strategy,
    tail_decision_slots,
)
from .threshold_randao import (
    ENVELOPE_WIRE_BYTES,
    RecoveryOutcome,
    RevealPhaseState,
    SecurityCase,
    ShareEnvelope,
    adversary_flip_set,
    apply_flip_strategy,
    best_flip_strategy,
    classify_security_case,
    decode_envelope,
    distribute_shares,
    encode_envelope,
    evaluate_flip_strategy,
    recover_all,
    run_reveal_phase,
    share_index,
)
from .scenario import ConfigError, ScenarioConfig, load_grid, load_scenario
from .harness import (
    EmitError,
    MetricsReport,
    emit,
    run_classic,
    run_scenario,
    run_sss,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "AttackOutcome",
    "AttackerProfile",
    "ConfigError",
    "CorruptShares",
    "DEFAULT_STRATEGY_CAP",
    "DOMAIN_BEACON_PROPOSER",
    "DOMAIN_RANDAO",
    "ELEMENT_BYTES",
    "ENVELOPE_WIRE_BYTES",
    "EmitError",
    "EpochState",
    "FIELD_256",
    "FieldElement",
    "InsufficientShares",
    "MAX_EFFECTIVE_BALANCE",
    "MetricsReport",
    "PRIME_256",
    "Polynomial",
    "PrimeField",
    "ProtocolError",
    "RecoveryOutcome",
    "Reveal",
    "RevealPhaseState",
    "ScenarioConfig",
    "Secret",
    "SecurityCase",
    "SelectionError",
    "SECONDS_PER_SLOT",
    "SLOTS_PER_EPOCH",
    "ShareEnvelope",
    "SharePoint",
    "SssConfig",
    "Strategy",
    "StrategyCapExceeded",
    "Validator",
    "advance_pipeline",
    "adversary_flip_set",
    "apply_flip_strategy",
    "best_flip_strategy",
    "best_strategy",
    "classify_security_case",
    "compute_reveal",
    "decode_envelope",
    "decode_share",
    "derive_seed",
    "distribute_shares",
    "emit",
    "encode_envelope",
    "encode_share",
    "enumerate_strategies",
    "evaluate_flip_strategy",
    "evaluate_strategy",
    "fe_add",
    "fe_inv",
    "fe_mul",
    "genesis_seed",
    "interpolate_at_zero",
    "load_grid",
    "load_scenario",
    "mix_reveals",
    "poly_eval",
    "recover",
    "recover_all",
    "run_classic",
    "run_reveal_phase",
    "run_scenario",
    "run_sss",
    "secrecy_probe",
    "select_proposers",
    "share_index",
    "split",
    "sweep",
    "tail_decision_slots",
    "xor32",
]
