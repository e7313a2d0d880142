"""Interpret finite stochastic input/output machines as goal-directed agents.

The library decides when a policy (a stochastic machine from sensor values
to actions) is optimal for a goal-bearing environment, updates attributed
beliefs by value-laden or plain Bayesian filtering, constructs environments
that uniquely specify deterministic policies, and demonstrates how both
stories bend under bounded rationality.
"""

from .bounded import (
    AmdReport,
    ConstrainedClass,
    ExplicitFiniteSet,
    KState,
    MemorylessStochastic,
    check_bellman_failure_amd,
    enumerate_k_state_deterministic,
    memoryless_machine,
    optimize_in_class,
    splice_closure_counterexample,
)
from .env import (
    CoupledChain,
    TeleoEnvironment,
    build_environment,
    couple,
    doomed_states,
    env_output_alphabet,
    success_probability,
    success_probability_within,
    top_mass,
)
from .errors import (
    AlphabetMismatch,
    BadDistribution,
    BadSensorDist,
    BudgetExceeded,
    ImpossibleOutput,
    ImpossibleTrajectory,
    LengthMismatch,
    MissingTransition,
    NotDecidable,
    NotDeterministic,
    StateCapExceeded,
    TeleoError,
    UnknownSymbol,
    UnreachableState,
    UnsupportedClass,
    ValidationError,
    ZeroProbabilityEvidence,
)
from .filtering import (
    Belief,
    BeliefEnvironment,
    BeliefRootedEnvironment,
    bayes_filter,
    belief_rooted,
    filter_trace,
    materialize,
    truncate,
    value_laden_filter,
)
from .machine import (
    Alphabet,
    Machine,
    TrajectorySpec,
    behaviorally_equivalent,
    build_machine,
    canonical_key,
    evolve,
    evolve_seq,
    is_deterministic,
    minimize,
    output_sequence_probability,
    splice,
)
from .optimality import (
    FilteringEntry,
    FilteringReport,
    ValueInterval,
    Verdict,
    check_filtering_theorem,
    check_optimal,
    is_t_decidable,
    optimal_value_bounds,
    synthesize_optimal_policy,
)
from .oracles import SimEstimate, brute_force_optimal, enumerate_histories, simulate
from .plans import PlanTree, enumerate_plan_trees, plan_count, plan_to_machine, plan_value
from .specify import UniqueOptimalityResult, decompose_stochastic, specify, verify_unique_optimality

__version__ = "0.1.0"
