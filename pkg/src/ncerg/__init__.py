"""Subsequential weighted ergodic averages on finite direct sums of matrix algebras."""

__version__ = "0.1.0"

from .algebra import (
    AlgebraMismatch,
    AlgebraSpec,
    OperatorElement,
    Projection,
    SpectralDecomposition,
    absolute_value,
    ginibre,
    haar_unitary,
    measure_ball_membership,
    operator_norm,
    random_positive,
    random_self_adjoint,
    schatten_norm,
    self_adjoint_defect,
    spectral_decomposition,
    spectral_projection,
    trace,
)
from .averages import (
    AverageStream,
    average,
    average_stream,
    averages_at,
    theorem31_gap,
    transfer_identity_check,
)
from .convergence import (
    BuemProbeResult,
    ConvergenceReport,
    LimitInstance,
    Witness,
    au_report,
    au_report_from_terms,
    buem_gamma,
    buem_probe,
    coboundary_decomposition,
    find_witness,
    geometric_grid,
    limit_check,
    witness_sup,
)
from .ds import (
    BlockConditionalExpectation,
    Composition,
    DSOperator,
    DSReport,
    FixedSpaceProjector,
    LinearMapHook,
    MixedUnitary,
    PermutationConjugation,
    UnitaryConjugation,
    fixed_space_projector,
    identity_operator,
    operator_from_json,
    scaling_hook,
    verify_ds_plus,
)
from .linalg import EigensolverError, jacobi_eigh, singular_values
from .sequences import (
    Apparatus,
    ArithmeticProgression,
    Blocks,
    ComplementOfSparse,
    Explicit,
    Full,
    IntervalBlocks,
    RotationReturnTimes,
    SequenceExhausted,
    SubsequenceSpec,
    block_sequence,
    counting_function,
    density_one_complement,
    evens,
    example_blocks,
    lower_density_estimate,
    partial_density,
    partial_densities,
    run_decomposition,
    sequence_from_json,
    sup_ratio,
    uniform_sequence_from_rotation,
)
from .weights import (
    Constant,
    ExplicitWeights,
    Indicator,
    Product,
    TrigPoly,
    TrigPolyPlusDecay,
    TrigPolynomial,
    WeightSequence,
    besicovich_certificate,
    besicovich_deviation,
    correlation_estimate,
    derive_weights,
    eval_trig_poly,
    trig_poly_stream,
    weights_from_json,
)
