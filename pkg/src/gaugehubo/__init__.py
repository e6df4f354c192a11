"""Gauge-graph solvers for high-order unconstrained binary optimization."""

from .annealers import (
    AnnealerParams,
    SampleResult,
    SaSchedule,
    gauge_penalty,
    gauge_step,
    glqa_run,
    lqa_cost,
    lqa_grad,
    lqa_run,
    sa_run,
)
from .bench import ExperimentConfig, ExperimentReport, run_experiment, scaling_sweep, tts
from .errors import (
    ConsistencyError,
    DimensionError,
    DivergenceError,
    GaugeHuboError,
    GenerationError,
    MappingError,
    ParseError,
    SizeGuardError,
)
from .graphs import (
    GaugeOperator,
    GGraph,
    HuboGraph,
    Plaquette,
    build_dual,
    build_hubo_graph,
    find_efficient_cycles,
    gen_four_regular_dual,
    gen_torus_lattice,
    map_polynomial,
    parse_ggraph,
    serialize_ggraph,
)
from .hubo import (
    HuboPolynomial,
    Term,
    brute_force_minimum,
    evaluate,
    parse_instance,
    serialize_instance,
)
from .quantumsim import (
    QuantumState,
    SweepReport,
    adiabatic_sweep,
    apply_hamiltonian,
    exact_ground,
    expectation,
    gauge_measure,
    plus_state,
    product_state,
)

__version__ = "0.1.0"
