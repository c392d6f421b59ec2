"""Möbius polynomials, the Möbius transform on cliques, and trace counting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyTrace, NoRootInUnitInterval, ValidationError
from .monoid import (
    Clique,
    IndependencePair,
    Trace,
    bits,
    enumerate_cliques,
    link_cliques,
)

CliqueTable = dict  # Clique -> float, defined on every clique of the monoid

SCAN_STEPS = 1024
BISECT_TOL = 1e-14
ROOT_MODULUS_TOL = 1e-9


@dataclass(frozen=True)
class MobiusPolynomial:
    """Integer coefficients ``a_0..a_K``; ``a_j`` is ``(-1)^j`` times the number
    of cliques of size ``j``."""

    coeffs: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = 0.0 * x
        for a in reversed(self.coeffs):
            acc = acc * x + a
        return acc

    def __str__(self):
        terms = []
        for j, a in enumerate(self.coeffs):
            if a == 0:
                continue
            sign = "-" if a < 0 else "+"
            mag = abs(a)
            if j == 0:
                body = str(mag)
            else:
                power = "X" if j == 1 else f"X^{j}"
                body = power if mag == 1 else f"{mag}{power}"
            terms.append((sign, body))
        if not terms:
            return "0"
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out

    def roots(self) -> np.ndarray:
        """All complex roots (companion-matrix eigenvalues)."""
        return np.roots(list(reversed(self.coeffs)))


def mobius_polynomial(m: IndependencePair) -> MobiusPolynomial:
    counts: list[int] = []
    for c in enumerate_cliques(m):
        k = c.bit_count()
        while len(counts) <= k:
            counts.append(0)
        counts[k] += 1
    return MobiusPolynomial(tuple((-1) ** j * n for j, n in enumerate(counts)))


def weights(p) -> tuple[float, ...]:
    """Characteristic numbers indexed by letter; accepts a Valuation or a sequence."""
    return tuple(float(x) for x in getattr(p, "p", p))


def clique_weight(p: Sequence[float], c: Clique) -> float:
    out = 1.0
    for i in bits(c):
        out *= p[i]
    return out


def trace_weight(p: Sequence[float], u: Trace) -> float:
    out = 1.0
    for c in u.cliques:
        out *= clique_weight(p, c)
    return out


def mobius_eval(m: IndependencePair, p, c: Clique = 0) -> float:
    """Multivariate Möbius polynomial of the link of ``c`` at ``p``.

    With ``c = 0`` this is the Möbius polynomial of ``m`` itself.
    """
    p = weights(p)
    return math.fsum((-1) ** d.bit_count() * clique_weight(p, d) for d in link_cliques(m, c))


def _check_table(m: IndependencePair, table: Mapping[Clique, float]) -> list[Clique]:
    cliques = list(enumerate_cliques(m))
    if set(table) != set(cliques):
        raise ValidationError("clique table must be defined on exactly the cliques of the monoid")
    return cliques


def _superset_sums(m: IndependencePair, table: Mapping[Clique, float], sign: int) -> CliqueTable:
    # sum over supersets, one letter at a time; cliques are closed under subsets
    cliques = _check_table(m, table)
    out = {c: float(table[c]) for c in cliques}
    for i in range(m.n):
        bit = 1 << i
        for c in cliques:
            if not c & bit and (c | bit) in out:
                out[c] += sign * out[c | bit]
    return out


def mobius_transform(m: IndependencePair, f: Mapping[Clique, float]) -> CliqueTable:
    """``h(c) = sum over cliques c' >= c of (-1)^(|c'|-|c|) f(c')``."""
    return _superset_sums(m, f, -1)


def mobius_inverse(m: IndependencePair, h: Mapping[Clique, float]) -> CliqueTable:
    """``f(c) = sum over cliques c' >= c of h(c')``."""
    return _superset_sums(m, h, 1)


def valuation_table(m: IndependencePair, p) -> CliqueTable:
    p = weights(p)
    return {c: clique_weight(p, c) for c in enumerate_cliques(m)}


def clique_transform(m: IndependencePair, p, c: Clique) -> float:
    """Möbius transform of a valuation at one clique, via the link polynomial."""
    p = weights(p)
    return clique_weight(p, c) * mobius_eval(m, p, c)


def extended_transform(m: IndependencePair, p, u: Trace) -> float:
    """``f(v) h(c)`` where ``c`` is the last layer of ``u`` and ``u = v.c``."""
    if not u.cliques:
        raise EmptyTrace("extended transform is defined on non-empty traces")
    p = weights(p)
    head = 1.0
    for c in u.cliques[:-1]:
        head *= clique_weight(p, c)
    return head * clique_transform(m, p, u.cliques[-1])


def count_traces(m: IndependencePair, k_max: int) -> list[int]:
    """Number of traces of each length ``0..k_max``.

    Uses ``sum_j a_j lambda_{n-j} = 0`` for ``n >= 1``, read off from the
    inverse of the Möbius polynomial; exact integer arithmetic throughout.
    """
    a = mobius_polynomial(m).coeffs
    lam = [1]
    for n in range(1, k_max + 1):
        lam.append(-sum(a[j] * lam[n - j] for j in range(1, min(n, len(a) - 1) + 1)))
    return lam[: k_max + 1]


def smallest_root(poly: MobiusPolynomial, certify: bool = False) -> float:
    """Smallest positive root of the Möbius polynomial, located in ``(0, 1]``.

    A uniform scan finds the first grid point where the polynomial stops being
    positive, and bisection refines the bracket.  With ``certify`` the
    companion-matrix roots are computed and the returned root must be the
    unique root of smallest modulus.
    """
    if poly.degree < 1:
        raise NoRootInUnitInterval("constant Möbius polynomial (empty alphabet)")
    lo, hi = 0.0, None
    for k in range(1, SCAN_STEPS + 1):
        x = k / SCAN_STEPS
        value = poly(x)
        if value == 0.0:
            root = x
            break
        if value < 0.0:
            hi = x
            break
        lo = x
    else:
        raise NoRootInUnitInterval(f"{poly} has no sign change on (0, 1]")
    if hi is not None:
        while hi - lo > BISECT_TOL:
            mid = 0.5 * (lo + hi)
            if poly(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        root = 0.5 * (lo + hi)
    if certify:
        certify_smallest_root(poly, root)
    return root


def certify_smallest_root(poly: MobiusPolynomial, root: float) -> None:
    """Raise ``AssertionError`` unless ``root`` strictly minimizes the modulus."""
    moduli = sorted(abs(z) for z in poly.roots())
    if not moduli or abs(moduli[0] - root) > ROOT_MODULUS_TOL:
        raise AssertionError(f"root {root!r} is not the root of smallest modulus {moduli}")
    if len(moduli) > 1 and moduli[1] - moduli[0] <= ROOT_MODULUS_TOL:
        raise AssertionError(f"root of smallest modulus is not unique: {moduli[:2]}")


def link_values(m: IndependencePair, p) -> dict[Clique, float]:
    """Link polynomial value at ``p`` for every clique."""
    p = weights(p)
    return {c: mobius_eval(m, p, c) for c in enumerate_cliques(m)}

