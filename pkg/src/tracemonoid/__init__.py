"""Trace monoids: cliques, Möbius polynomials, Bernoulli measures and speedup."""

from .errors import TraceMonoidError
from .markov import (
    ChainSpec,
    SampleRun,
    build_chain,
    empirical_cylinder,
    sample_prefix,
    speedup_exact,
    speedup_montecarlo,
    stationary,
)
from .measures import (
    Valuation,
    ValuationReport,
    boundary_identity_residual,
    cf_prefix_probability,
    classify_valuation,
    complete_valuation,
    cylinder_probability,
    uniform_valuation,
)
from .mobius import (
    MobiusPolynomial,
    count_traces,
    extended_transform,
    mobius_eval,
    mobius_inverse,
    mobius_polynomial,
    mobius_transform,
    smallest_root,
)
from .monoid import (
    IndependencePair,
    Trace,
    cf_admissible,
    concat,
    cut,
    dominating_set,
    enumerate_cliques,
    enumerate_traces,
    hat_trace,
    is_irreducible,
    leq,
    link_alphabet,
    mirror,
    normal_form,
    parallel,
    parse_pair,
    residual,
)

__version__ = "0.1.0"
