"""Valuations, their Möbius classification, and exact cylinder probabilities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import (
    DegenerateCoefficient,
    NonPositiveSolution,
    NotAdmissible,
    NotMobius,
    ParseError,
    Reducible,
    ValidationError,
)
from .mobius import (
    clique_weight,
    mobius_eval,
    mobius_polynomial,
    mobius_transform,
    smallest_root,
    valuation_table,
)
from .monoid import (
    Clique,
    IndependencePair,
    Trace,
    cf_admissible,
    concat,
    enumerate_cliques,
    is_clique,
    is_irreducible,
)

H0_TOL = 1e-10
POSITIVITY_TOL = 1e-12
DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class Valuation:
    """Characteristic numbers ``p[i] > 0`` for each letter index ``i``.

    The valuation of a trace is the product of the numbers of its letters.
    """

    p: tuple[float, ...]

    def __post_init__(self):
        p = tuple(float(x) for x in self.p)
        for i, x in enumerate(p):
            if not math.isfinite(x) or x <= 0.0:
                raise ValidationError(f"characteristic number {i} must be positive, got {x!r}")
        object.__setattr__(self, "p", p)

    @classmethod
    def from_mapping(cls, m: IndependencePair, values: Mapping[str, float]) -> "Valuation":
        missing = [name for name in m.letters if name not in values]
        if missing:
            raise ValidationError(f"no value for letters {missing}")
        extra = [name for name in values if name not in m.letters]
        if extra:
            raise ValidationError(f"undeclared letters {extra}")
        return cls(tuple(values[name] for name in m.letters))

    @classmethod
    def constant(cls, m: IndependencePair, x: float) -> "Valuation":
        return cls((x,) * m.n)

    def of_clique(self, c: Clique) -> float:
        return clique_weight(self.p, c)

    def of_trace(self, u: Trace) -> float:
        out = 1.0
        for c in u.cliques:
            out *= clique_weight(self.p, c)
        return out

    def as_dict(self, m: IndependencePair) -> dict[str, float]:
        return dict(zip(m.letters, self.p))


def parse_assignments(text: str) -> dict[str, float]:
    """Read ``a=0.5,b=0.5`` into a name -> value mapping."""
    out = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        name, sep, value = item.partition("=")
        if not sep:
            raise ParseError(f"expected name=value, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise ParseError(f"not a number: {value!r}") from None
    return out


def parse_valuation(m: IndependencePair, text: str) -> Valuation:
    if text.strip() == "uniform":
        return uniform_valuation(m)
    return Valuation.from_mapping(m, parse_assignments(text))


def format_valuation(m: IndependencePair, v: Valuation, digits: int = 12) -> str:
    return ",".join(f"{name}={x:.{digits}g}" for name, x in zip(m.letters, v.p))


@dataclass
class ValuationReport:
    h0: float
    h_pos: dict = field(default_factory=dict)
    is_mobius: bool = False
    violations: list = field(default_factory=list)


def classify_valuation(m: IndependencePair, v: Valuation, tol: float = H0_TOL,
                       pos_tol: float = POSITIVITY_TOL) -> ValuationReport:
    """Möbius test on the transform: ``h(0) = 0`` and ``h(c) > 0`` elsewhere."""
    h = mobius_transform(m, valuation_table(m, v))
    h0 = h[0]
    violations = []
    if abs(h0) > tol:
        violations.append((0, h0))
    h_pos = {c: x for c, x in h.items() if c}
    violations += [(c, x) for c, x in h_pos.items() if x < pos_tol]
    return ValuationReport(h0=h0, h_pos=h_pos, is_mobius=not violations, violations=violations)


def classify_by_links(m: IndependencePair, v: Valuation, tol: float = H0_TOL,
                      pos_tol: float = POSITIVITY_TOL) -> bool:
    """Same test, phrased on link polynomials: the full Möbius polynomial
    vanishes at ``p`` and each non-empty clique's link polynomial is positive."""
    if abs(mobius_eval(m, v, 0)) > tol:
        return False
    return all(mobius_eval(m, v, c) * v.of_clique(c) >= pos_tol for c in enumerate_cliques(m)[1:])


def require_mobius(m: IndependencePair, v: Valuation) -> ValuationReport:
    report = classify_valuation(m, v)
    if not report.is_mobius:
        shown = ", ".join(f"h({m.clique_str(c)})={x:.6g}" for c, x in report.violations[:4])
        raise NotMobius(f"valuation is not Möbius: {shown}")
    return report


def uniform_valuation(m: IndependencePair) -> Valuation:
    """Every letter weighted by the smallest root of the Möbius polynomial."""
    if not is_irreducible(m):
        raise Reducible("the uniform measure is only constructed for irreducible monoids")
    return Valuation.constant(m, smallest_root(mobius_polynomial(m)))


def complete_valuation(m: IndependencePair, fixed: Mapping[str, float], free: str) -> Valuation:
    """Solve ``h(0) = 0`` for the characteristic number of ``free``.

    ``h(0)`` is affine in ``p_free``: ``A p_free + B`` with ``A`` summing over
    cliques containing ``free`` and ``B`` over the others.
    """
    k = m.index(free)
    if free in fixed:
        raise ValidationError(f"letter {free!r} is both fixed and free")
    p = [1.0] * m.n
    for name, x in fixed.items():
        p[m.index(name)] = float(x)
    missing = [name for name in m.letters if name != free and name not in fixed]
    if missing:
        raise ValidationError(f"no value for letters {missing}")
    for name, x in fixed.items():
        if not x > 0:
            raise ValidationError(f"value for {name!r} must be positive")
    bit = 1 << k
    a_terms, b_terms = [], []
    for c in enumerate_cliques(m):
        sign = (-1) ** c.bit_count()
        if c & bit:
            a_terms.append(sign * clique_weight(p, c & ~bit))
        else:
            b_terms.append(sign * clique_weight(p, c))
    a, b = math.fsum(a_terms), math.fsum(b_terms)
    if abs(a) < DEGENERATE_TOL:
        raise DegenerateCoefficient(f"coefficient of {free!r} vanishes ({a:.3g})")
    x = -b / a
    if not x > 0:
        raise NonPositiveSolution(f"solution {free}={x:.6g} is not positive")
    p[k] = x
    return Valuation(tuple(p))


def cylinder_probability(m: IndependencePair, v: Valuation, u: Trace, enforce: bool = True) -> float:
    """Probability that a random infinite trace starts with ``u``."""
    if enforce:
        require_mobius(m, v)
    return v.of_trace(u)


def cf_prefix_probability(m: IndependencePair, v: Valuation, cliques: Sequence[Clique],
                          enforce: bool = True) -> float:
    """Probability that the first layers of a random infinite trace are ``cliques``."""
    cliques = list(cliques)
    for k, c in enumerate(cliques):
        if not c or not is_clique(m, c) or c & ~m.full_mask:
            raise NotAdmissible(f"entry {k} is not a non-empty clique", k)
        if k and not cf_admissible(m, cliques[k - 1], c):
            raise NotAdmissible(
                f"{m.clique_str(cliques[k - 1])} -> {m.clique_str(c)} is not admissible (index {k})", k)
    if enforce:
        require_mobius(m, v)
    if not cliques:
        return 1.0
    out = 1.0
    for c in cliques[:-1]:
        out *= v.of_clique(c)
    return out * v.of_clique(cliques[-1]) * mobius_eval(m, v, cliques[-1])


def boundary_identity_residual(m: IndependencePair, v: Valuation, u: Trace) -> float:
    """``sum over cliques c of (-1)^|c| f(u.c)``; zero exactly when ``h(0) = 0``."""
    terms = []
    for c in enumerate_cliques(m):
        terms.append((-1) ** c.bit_count() * v.of_trace(concat(m, u, Trace((c,) if c else ()))))
    return math.fsum(terms)
