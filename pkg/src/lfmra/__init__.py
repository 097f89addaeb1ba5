"""Orthogonal step scaling functions on Laurent-series local fields.

The package builds multiresolution scaling functions from labeled trees
over GF(p^s): a tree fixes a digraph on label windows, a mask-square
table spreads unit mass along that digraph, an array fixed-point
iteration certifies shift orthonormality, and the resulting step
function is verified in both frequency and time domains, together with
its two-scale refinement relation.
"""

__version__ = "0.1.0"

from .errors import (
    ConstraintViolation,
    InternalConsistencyError,
    LfmraError,
    NonConvergenceError,
    NoSolutionError,
    ParameterError,
    StructureError,
    WindowOverflowError,
)
from .galois import (
    FieldParams,
    GFElem,
    gf_add,
    gf_enumerate,
    gf_from_index,
    gf_index,
    gf_modulus,
    gf_mul,
    gf_neg,
    gf_sub,
)
from .localfield import (
    LaurentElem,
    ShiftSet,
    basis_vector,
    dilate,
    lf_add,
    lf_mul,
    lf_neg,
    lf_norm,
    lf_sub,
    lf_zero,
    scalar_mul,
    shift_set,
)
from .characters import (
    CharacterWindow,
    annihilator_contains,
    char_dilate,
    char_eval,
    char_eval_exponent,
    char_inv,
    char_mul,
    char_pow,
    rademacher,
    root_of_unity,
    trivial_character,
)
from .validtree import (
    MaskDigraph,
    Tree,
    ValidationReport,
    WindowTree,
    build_digraph,
    build_window_tree,
    generate_tree,
    validate_tree,
)
from .maskdyn import (
    FixedPointResult,
    LambdaArray,
    LemmaReport,
    StateArray,
    assign_lambda,
    init_state,
    iterate_to_fixed_point,
    step_dynamics,
    validate_lambda_table,
    verify_level_lemmas,
)
from .scalefn import (
    FreqStepFunction,
    MaskFunction,
    RefinementCoeffs,
    TimeStepFunction,
    build_phi_hat,
    check_limit_condition,
    check_orthonormality_freq,
    check_orthonormality_time,
    check_refinement,
    forward_transform,
    inverse_transform,
    inverse_transform_direct,
    l2_norm_sq,
    mask_from_lambda,
    orthonormality_sums_nested,
    reconstruct_mask,
    refinement_coeffs,
)
from .pipeline import (
    PipelineConfig,
    PipelineResult,
    StageError,
    load_config_file,
    report_json_dict,
    run_pipeline,
)
