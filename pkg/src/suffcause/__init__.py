"""Sufficient-cause analysis of binary causal DAGs with an exact oracle."""

from .causes import (
    CoCause,
    CoCauseKind,
    Conjunction,
    EventSpace,
    Literal,
    Representation,
    canonical_representation,
    conj,
    enumerate_msc_over_events,
    is_determinative,
    is_minimal_sufficient,
    is_nonredundant,
    is_sufficient,
    reduce_to_minimal,
    reduce_to_nonredundant,
)
from .covsign import (
    CovFact,
    CovQuantity,
    Flag,
    Relation,
    RepFacts,
    SignConclusion,
    TransferPremises,
    check_transfer_premises_direct,
    check_transfer_premises_shared,
    expectation_monotone_premise,
    facts_from_scm,
    pair_conclusions,
    pair_conclusions_signed,
    transfer_sign,
)
from .expansion import (
    ExpandedDag,
    expand,
    expanded_distribution,
    stratum_conditioning_set,
    stratum_independent,
)
from .graph import (
    Dag,
    GraphError,
    Path,
    can_marginalize,
    common_causes,
    d_separated,
    directed_paths,
    find_unblocked_path,
    marginalize,
    path_blocked,
)
from .modelfile import Assertion, Model, ModelError, load_model, parse_model, serialize_model
from .oracle import (
    ConditioningError,
    GenerationError,
    InstanceConstraints,
    conditional_covariance,
    conditional_independent,
    random_instance,
    verify_claim,
)
from .scm import (
    DEFAULT_WORLD_BUDGET,
    BudgetExceededError,
    ExactDistribution,
    ResponseTable,
    Scm,
    complement_parent,
    config_index,
    dedupe_states,
    eval_node,
    joint_distribution,
    state_column,
    substitute,
)
from .signs import (
    Sign,
    detect_monotonic_effect,
    is_constant_in,
    monotonic_effect_via_canonical,
    monotonically_associated,
    path_sign,
    qualitative_cov_sign,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
