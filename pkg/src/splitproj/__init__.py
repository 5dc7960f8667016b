"""Splitting schemes for best approximation onto intersections of subspaces.

The package builds the Ryu, Malitsky-Tam, Campoy and relaxed-POCS operators
as explicit matrices for subspace problems, runs their relaxed fixed-point
iterations, computes sharp lower and upper bounds on their linear rates, and
ships a CLI for reproducible seeded experiments.
"""

from .iteration import (
    IterationTrace,
    NonFiniteIterateError,
    StopRule,
    estimate_rate,
    iterate,
    iterate_affine,
    relax,
    save_trace_csv,
)
from .linalg import (
    EigenvalueError,
    block_matrix,
    eigenvalues,
    load_matrix,
    matmul,
    operator_norm,
    parse_matrix,
    pseudo_inverse,
    save_matrix,
    spectral_radius,
    split_blocks,
    symmetric_eig,
)
from .rates import (
    RateBounds,
    POCS_COMPOSITION_LAMBDA,
    pocs_three_lines_eigenvalues,
    pocs_three_lines_norm,
    pocs_three_lines_radius,
    rate_bounds,
)
from .schemes import (
    KINDS,
    AffineConjugation,
    InconsistentAffineError,
    ResolventOracle,
    SplittingScheme,
    affine_intersection_point,
    affine_resolvent,
    apply_generic_step,
    build_affine,
    build_campoy,
    build_mt,
    build_pocs,
    build_ryu,
    build_scheme,
    dump_scheme,
    subspace_resolvent,
)
from .subspaces import (
    AffineSubspace,
    Subspace,
    complement,
    diagonal_subspace,
    from_basis,
    from_projector,
    full_space,
    intersect,
    intersect_all,
    intersection_via_nullspace,
    load_subspace,
    product_subspace,
    range_subspace,
    span_sum,
    zero_space,
)
from .instances import (
    InstanceRecord,
    random_instance,
    random_instances,
    random_start,
    three_lines,
)
from .experiments import (
    CsvTable,
    ExperimentConfig,
    SolveResult,
    run_exp1,
    run_exp2,
    run_exp3,
    run_solve,
    run_three_lines,
)

__version__ = "0.1.0"
