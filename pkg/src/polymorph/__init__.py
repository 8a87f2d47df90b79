"""Polymorphisms, Markov operators and zero-diagonal couplings on finite and symbolic spaces."""

from .coupling import CouplingMatrix, Infeasible, block_builder, feasibility_check, solve_coupling
from .finite_space import (
    FiniteSpace,
    Partition,
    SizeLimitError,
    classify,
    conditional_weights,
    discrete_partition,
    enumerate_partitions,
    join,
    meet,
    trivial_partition,
)
from .markov_op import (
    AxiomViolation,
    MarkovMatrix,
    adjoint,
    antiisomorphism_check,
    axioms_check,
    intertwining_residual,
    is_isometric_partition,
    isometric_subalgebra_scan,
    kernel_of,
    operator_of,
    product_convergence_report,
)
from .polymorph_core import (
    PointMeasure,
    Polymorphism,
    compose,
    conjugate,
    convex_combination,
    convolve,
    density_check,
    entropy_rate_estimate,
    factor,
    from_transitions,
    identity,
    is_associated,
    is_ergodic,
    is_fixed_partition,
    is_invariant_partition,
    is_nondegenerate,
    is_prime,
    mixing_report,
    permutation,
    power,
    sample_markov_chain,
    weak_distance,
    zero,
)

__version__ = "0.1.0"
