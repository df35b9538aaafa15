"""Numerical workbench for constrained row contractions on truncated Fock spaces."""

from .words import (
    IDENTITY_WORD,
    TruncatedFock,
    Word,
    creation_matrix,
    enumerate_words,
    flip_unitary,
    left_creation_tuple,
    right_creation_tuple,
    word_operator,
)
from .ideals import (
    ConstrainedSubspace,
    NcPolynomial,
    build_constrained_subspace,
    commutator_generators,
    constrained_shifts,
    cyclic_span_check,
    evaluate_polynomial,
    q_commutator_generators,
    word_length_generators,
)
from .contractions import (
    PurityResult,
    RowContraction,
    check_constraints,
    cp_apply,
    purity,
    spectral_radius,
    validate,
)
from .poisson import (
    PoissonKernel,
    constrained_poisson_kernel,
    intertwining_check,
    kernel_gram,
    poisson_kernel,
    poisson_transform,
)
from .charfn import (
    MultiAnalyticOperator,
    assemble,
    characteristic_coefficients,
    constrained_characteristic,
    point_evaluate,
    unitary_invariance_check,
    verify_factorization,
)
from .dilation import (
    DilationBlocks,
    WoldSplit,
    build_dilation,
    dilation_index,
    maximal_constrained_piece,
    model_space,
    shift_multiplicity,
    verify_dilation,
    wold_decompose,
)
from .invariants import (
    ArvesonReport,
    CurvatureReport,
    SymmetricTruncation,
    arveson_curvature,
    curvature_phi,
    curvature_theta,
    euler_phi,
)
from .interpolation import (
    FeasibilityResult,
    PickProblem,
    kernel_vector,
    pick_feasible,
    pick_matrix,
    variety_membership,
)
from . import errors

__version__ = "0.1.0"
