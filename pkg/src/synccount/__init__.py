"""Self-stabilizing Byzantine-tolerant synchronous counting.

Library layout:

* counters: the counter abstraction, the single-node counter and the
  modulus-reduced view;
* boosting: the resilience-boosting construction (blocks, leader voting)
  and its phase-king overlay;
* phase_king: the rotating-king instruction sets as pure round functions;
* schedule: plan builders (base, fixed block count, adaptive phases),
  exact prediction of (N, F, T, S), realization;
* sim / engine: scalar reference simulator with a Byzantine adversary
  catalog, and the equality-tested vectorized batch runner;
* pulling: the sampled (pulling-model) variant plus threshold statistics;
* cli: the declarative experiment driver (plan / run / stats / replay).
"""

from .counters import (CounterAlgorithm, DivisibilityError, InvalidModulusError,
                       ModViewCounter, NodeId, TrivialCounter, ceil_log2,
                       mod_view, stabilization_bound, state_bits, trivial_counter)
from .phase_king import (INF, DomainError, PhaseKingRegisters, TallyVector,
                         exec_I0, exec_I1, exec_I2, exec_instruction, inc,
                         instruction_index)
from .boosting import (BoostedCounter, BoostedState, BoostParamError,
                       BoostParams, CompositionError, LeaderView, block_pointer,
                       boost, decode_counter, leader_view, majority,
                       validate_boost_params)
from .schedule import (Plan, PlanLayer, adaptive_plan, base_plan, fixed_k_plan,
                       plan_report, predict, realize, stack_layer)
from .sim import (ADVERSARY_KINDS, Adversary, ConfigurationError,
                  StabilizationReport, Trace, detect_from_outputs,
                  detect_stabilization, enumerate_initial_states, make_adversary,
                  run)
from .engine import BatchResult, random_init_batch, run_batch
from .pulling import (PulledCounter, PullTrace, SampledTally, SamplingConfig,
                      SamplingGuardError, ThresholdStats, default_sample_count,
                      pulled_boost, sample_pool, sampled_majority,
                      sampled_phase_tally, threshold_stats)

__version__ = "0.1.0"
