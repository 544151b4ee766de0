"""Quasi-probability circuit cutting with a noisy-simulation benchmark harness."""
from .circuit import (
    Circuit, Gate, brickwork_circuit, circuit_from_text, circuit_to_text,
    ghz_circuit, interaction_graph, qft_circuit, random_circuit,
    strip_measurements,
)
from .cutfind import (
    CutBudget, PresetConfig, ScoreWeights, StrategyOutcome, auto_select,
    feasibility_check, fitv3_select,
)
from .errors import (
    BasisMismatchError, ConfigError, CutbenchError, DimensionError,
    EmptyComparisonError, InvalidArgumentError, InvalidPlanError,
    InvalidWidthError, NoDecompositionError, RequiresSamplingError,
    WidthViolationError,
)
from .harness import (
    RunRecord, SweepConfig, delta_mae, mae, run_one, run_sweep, summarize,
    win_rate,
)
from .observables import (
    Observable, PauliString, ghz_stabilizers, ideal_expectation,
    observable_from_text, observable_to_text, z_magnetization,
)
from .qpd import (
    CutPlan, Exact, GateCut, QpdBasis, QpdTerm, Sampled, Subexperiment,
    WireCut, estimate_expectations_exact, estimate_overhead, gate_cut_basis,
    generate_subexperiments, make_cut_plan, reconstruct_expectation,
    wire_cut_basis,
)
from .simulator import (
    Counts, NoiseProfile, expectation_from_counts, make_rng, run_shots,
    simulate_exact,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
