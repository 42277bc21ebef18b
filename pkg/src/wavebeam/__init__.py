"""Exponential integrators for semilinear damped wave and beam equations.

The linear part of the semi-discretized system is propagated exactly: the
symmetric spatial operator is diagonalized once, the 2n-by-2n system matrix
splits into n independent 2x2 mode blocks, and exp/phi functions of those
blocks have closed forms in all three discriminant regimes.
"""

from .discretize import (
    BEAM,
    WAVE,
    GridOperator,
    ProblemSpec,
    Profile,
    StateVector,
    apply_nonlinearity,
    build_beam_operator,
    build_operator,
    build_wave_operator,
    grid_points,
    initial_state,
    sample_profile,
)
from .eigen import (
    SpectralFactorization,
    factorize,
    factorize_cached,
    load_cache,
    save_cache,
)
from .integrators import (
    SchemeTableau,
    SolveResult,
    SolveStats,
    build_tableau,
    merged_damping_solve,
    rk4_baseline_solve,
    rk4_step,
    solve,
    step,
)
from .modefuncs import (
    COMPLEX_PAIR,
    DOUBLE_ROOT,
    K_MAX,
    REAL_DISTINCT,
    Block2x2,
    ModeParams,
    classify_mode,
    exp_block,
    mode_matrix,
    phi_block,
    scalar_phi,
    scalar_phi_deriv,
)
from .oracles import (
    ExperimentPreset,
    assemble_dense_A,
    block_oracle_suite,
    dense_expm,
    dense_phi,
    discrete_l2_error,
    load_preset,
    observed_order,
)
from .propagator import (
    BlockPropagator,
    apply_phi,
    apply_undamped_reference,
    build_propagator,
    invert_positions,
    permutation_positions,
    permute,
)

__version__ = "0.1.0"
