import itertools
import math
import random

import numpy as np
import pytest

from tracemonoid.errors import NotMobius, Reducible
from tracemonoid.markov import (
    RNG_ALGORITHM,
    build_chain,
    derive_seed,
    empirical_cylinder,
    empirical_prefix_frequencies,
    format_sample_run,
    sample_prefix,
    sample_states,
    speedup_exact,
    speedup_montecarlo,
    stationary,
)
from tracemonoid.measures import Valuation, cf_prefix_probability, complete_valuation, uniform_valuation
from tracemonoid.mobius import mobius_transform, valuation_table
from tracemonoid.monoid import (
    UNIT,
    IndependencePair,
    cf_admissible,
    is_strongly_connected,
    max_clique_size,
    nonempty_cliques,
    normal_form,
)

from conftest import free_monoid, make_m1, make_m2, random_irreducible_pairs
from oracles import stationary_by_eigenvector

SQRT5 = math.sqrt(5.0)
P0_M1 = (3 - SQRT5) / 2
RHO_M1 = 5 * (7 - SQRT5) / 22
RHO_M2 = (29 - SQRT5) / 22


def m1_matrix(a, b, c):
    return np.array([
        [a, 0, 1 - a, 0],
        [0, b, 1 - b, 0],
        [a - a * b, b - a * b, c, a * b],
        [a - a * b, b - a * b, c, a * b],
    ])


def sequences(m, n):
    """All admissible sequences of ``n`` non-empty cliques."""
    states = nonempty_cliques(m)
    out = [[c] for c in states]
    for _ in range(n - 1):
        out = [s + [d] for s in out for d in states if cf_admissible(m, s[-1], d)]
    return out


def test_chain_m1_generic(m1):
    rng = random.Random(0)
    for _ in range(20):
        a, b = rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)
        v = complete_valuation(m1, {"a": a, "b": b}, "c")
        chain = build_chain(m1, v)
        assert [m1.clique_str(c) for c in chain.states] == ["a", "b", "c", "a.b"]
        np.testing.assert_allclose(chain.transition, m1_matrix(*v.p), atol=1e-12, rtol=0)
        np.testing.assert_allclose(chain.g, [1 - b, 1 - a, 1, 1], atol=1e-12)


def test_chain_m1_uniform_rows(m1):
    chain = build_chain(m1, uniform_valuation(m1))
    p = P0_M1
    assert 2 * p * (1 - p) + p + p * p == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(chain.transition, m1_matrix(p, p, p), atol=1e-12)


def test_chain_free_monoid():
    m = free_monoid(3)
    chain = build_chain(m, uniform_valuation(m))
    np.testing.assert_allclose(chain.transition, np.full((3, 3), 1 / 3), atol=1e-12)
    np.testing.assert_allclose(chain.g, 1.0, atol=1e-12)


def test_chain_requires_mobius(m1):
    with pytest.raises(NotMobius):
        build_chain(m1, Valuation((0.5, 0.5, 0.5)))


@pytest.mark.parametrize("m", [make_m1(), make_m2()] + random_irreducible_pairs(10, seed=31), ids=str)
def test_chain_invariants(m):
    v = uniform_valuation(m)
    chain = build_chain(m, v)
    P = chain.transition
    assert (P >= 0).all()
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)
    assert chain.initial.sum() == pytest.approx(1.0, abs=1e-12)
    h = mobius_transform(m, valuation_table(m, v))
    for i, c in enumerate(chain.states):
        assert chain.g[i] * v.of_clique(c) == pytest.approx(h[c], abs=1e-12)
        for j, d in enumerate(chain.states):
            if not cf_admissible(m, c, d):
                assert P[i, j] == 0.0
    support = {c: [d for j, d in enumerate(chain.states) if P[i, j] > 0] for i, c in enumerate(chain.states)}
    assert is_strongly_connected(support)
    assert all(P[i, i] > 0 for i in range(len(chain.states)))
    assert not chain.transition.flags.writeable


def test_stationary_free():
    m = free_monoid(2)
    np.testing.assert_allclose(stationary(build_chain(m, uniform_valuation(m))), [0.5, 0.5], atol=1e-12)


@pytest.mark.parametrize("m", [make_m1(), make_m2()] + random_irreducible_pairs(10, seed=41), ids=str)
def test_stationary_matches_eigenvector(m):
    chain = build_chain(m, uniform_valuation(m))
    pi = stationary(chain)
    assert (pi >= 0).all() and pi.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(pi @ chain.transition - pi)) <= 1e-12
    np.testing.assert_allclose(pi, stationary_by_eigenvector(chain.transition), atol=1e-10)


def test_stationary_mean_sizes(m1, m2):
    for m, rho in ((m1, RHO_M1), (m2, RHO_M2)):
        chain = build_chain(m, uniform_valuation(m))
        assert stationary(chain) @ chain.sizes == pytest.approx(rho, abs=1e-12)


def test_speedup_exact(m1, m2):
    rho, gamma = speedup_exact(m1, uniform_valuation(m1))
    assert rho == pytest.approx(RHO_M1, abs=1e-12) and gamma == pytest.approx((7 + SQRT5) / 10, abs=1e-12)
    rho, gamma = speedup_exact(m2, uniform_valuation(m2))
    assert rho == pytest.approx(RHO_M2, abs=1e-12) and gamma == pytest.approx((29 + SQRT5) / 38, abs=1e-12)
    assert speedup_exact(free_monoid(4), uniform_valuation(free_monoid(4))) == pytest.approx((1.0, 1.0))
    with pytest.raises(Reducible):
        speedup_exact(IndependencePair.from_pairs("ab", [("a", "b")]), Valuation((0.5, 0.5)), enforce=False)


def test_speedup_bounds_random():
    for m in random_irreducible_pairs(10, seed=51):
        rho, gamma = speedup_exact(m, uniform_valuation(m))
        assert 1.0 <= rho <= max_clique_size(m)


def test_h_is_not_stationary(m1):
    chain = build_chain(m1, uniform_valuation(m1))
    h = chain.initial
    assert np.max(np.abs(h @ chain.transition - h)) > 1e-6


@pytest.mark.parametrize("make", [make_m1, make_m2])
def test_chain_reproduces_prefix_law(make):
    m = make()
    for v in (uniform_valuation(m),):
        chain = build_chain(m, v)
        for n in range(1, 5):
            for seq in sequences(m, n):
                assert chain.path_probability(seq) == pytest.approx(cf_prefix_probability(m, v, seq, enforce=False),
                                                                    abs=1e-12)


def test_chain_reproduces_prefix_law_generic(m1):
    v = complete_valuation(m1, {"a": 0.3, "b": 0.6}, "c")
    chain = build_chain(m1, v)
    for n in range(1, 5):
        for seq in sequences(m1, n):
            assert chain.path_probability(seq) == pytest.approx(cf_prefix_probability(m1, v, seq), abs=1e-12)


# -- sampling ------------------------------------------------------------------


def test_sample_prefix_basics(m1):
    chain = build_chain(m1, uniform_valuation(m1))
    assert sample_prefix(chain, 0, 5).trace == UNIT
    run = sample_prefix(chain, 50, 123)
    assert run.algorithm == RNG_ALGORITHM == "PCG64"
    assert run.trace.height == 50 == run.steps
    assert run.trace.length == sum(c.bit_count() for c in run.cliques)
    assert all(cf_admissible(m1, x, y) for x, y in zip(run.cliques, run.cliques[1:]))
    assert sample_prefix(chain, 50, 123) == run
    assert sample_prefix(chain, 50, 124) != run


def test_sample_prefix_golden_free_monoid():
    # pinned PCG64 stream: the fair two-letter chain with seed 20240601
    m = IndependencePair.from_pairs("ab", [])
    chain = build_chain(m, uniform_valuation(m))
    assert m.word_str(sample_prefix(chain, 4, 20240601).trace) == "bbab"


def test_sample_states_matches_sequential(m2):
    chain = build_chain(m2, uniform_valuation(m2))
    run = sample_prefix(chain, 30, 77)
    rows = sample_states(chain, 30, 1, 77)
    assert tuple(chain.states[i] for i in rows[0]) == run.cliques


def test_first_clique_frequency_over_seeds(m1):
    chain = build_chain(m1, uniform_valuation(m1))
    c = m1.clique("c")
    n = 10 ** 5
    hits = sum(sample_prefix(chain, 1, seed).cliques[0] == c for seed in range(n))
    p = P0_M1
    assert abs(hits / n - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_derive_seed():
    assert derive_seed(1, 0) != derive_seed(1, 1)
    assert derive_seed(1, 0) == derive_seed(1, 0)
    assert 0 <= derive_seed(2 ** 64 - 1, 5) < 2 ** 64


def test_speedup_montecarlo(m2):
    chain = build_chain(m2, uniform_valuation(m2))
    rho = speedup_montecarlo(chain, 10 ** 6, seed=2024)
    assert abs(rho - 1.2165) <= 0.01
    free = free_monoid(3)
    assert speedup_montecarlo(build_chain(free, uniform_valuation(free)), 1000, 1) == 1.0


def test_speedup_montecarlo_chains_and_workers(m1):
    chain = build_chain(m1, uniform_valuation(m1))
    serial = speedup_montecarlo(chain, 20000, 9, chains=4, workers=1)
    threaded = speedup_montecarlo(chain, 20000, 9, chains=4, workers=4)
    assert serial == threaded
    for seed in range(20):
        assert 1.0 <= speedup_montecarlo(chain, 100, seed) <= 2.0


def test_empirical_cylinder(m1):
    u = uniform_valuation(m1)
    chain = build_chain(m1, u)
    n = 10 ** 5
    p = P0_M1
    est = empirical_cylinder(chain, m1, normal_form(m1, "a"), n, seed=5)
    assert abs(est - p) <= 3 * math.sqrt(p * (1 - p) / n)
    assert empirical_cylinder(chain, m1, UNIT, n, seed=5) == 1.0
    v = Valuation((0.5, 0.5, 0.25))
    chain = build_chain(m1, v)
    est = empirical_cylinder(chain, m1, normal_form(m1, "ab"), n, seed=6)
    assert abs(est - 0.25) <= 3 * math.sqrt(0.25 * 0.75 / n)


def test_exact_law_agreement_m1(m1):
    v = uniform_valuation(m1)
    chain = build_chain(m1, v)
    runs = 2 * 10 ** 5
    freq = empirical_prefix_frequencies(chain, 3, runs, seed=99)
    for seq in sequences(m1, 3):
        p = cf_prefix_probability(m1, v, seq)
        sigma = math.sqrt(p * (1 - p) / runs)
        assert abs(freq.get(tuple(seq), 0.0) - p) <= 4 * sigma
    assert set(freq) <= {tuple(s) for s in sequences(m1, 3)}


def test_format_sample_run(m1):
    chain = build_chain(m1, uniform_valuation(m1))
    run = sample_prefix(chain, 3, 1)
    lines = format_sample_run(m1, run).splitlines()
    assert len(lines) == 4
    for k, line in enumerate(lines[:3], start=1):
        idx, clique = line.split("\t")
        assert int(idx) == k and m1.parse_clique(clique) == run.cliques[k - 1]
    assert lines[3].startswith("# rng=PCG64 seed=1 steps=3 ")
    assert f"length={run.trace.length}" in lines[3] and "height=3" in lines[3]
