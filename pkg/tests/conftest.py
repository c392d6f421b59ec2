import itertools
import random

import pytest

from tracemonoid.monoid import IndependencePair, is_irreducible

M1_LETTERS = ("a", "b", "c")
M1_PAIRS = [("a", "b")]
# dependence is the pentagon a1-a2-a3-a4-a5-a1, so independence is its complement
M2_LETTERS = ("a1", "a2", "a3", "a4", "a5")
M2_PAIRS = [("a1", "a3"), ("a1", "a4"), ("a2", "a4"), ("a2", "a5"), ("a3", "a5")]


def make_m1():
    return IndependencePair.from_pairs(M1_LETTERS, M1_PAIRS)


def make_m2():
    return IndependencePair.from_pairs(M2_LETTERS, M2_PAIRS)


def free_monoid(n):
    return IndependencePair.from_pairs([f"x{i}" for i in range(n)], [])


def random_pair(rng, n, density=0.5):
    letters = [f"l{i}" for i in range(n)]
    pairs = [p for p in itertools.combinations(letters, 2) if rng.random() < density]
    return IndependencePair.from_pairs(letters, pairs)


def random_irreducible_pairs(count, seed, max_letters=6):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        m = random_pair(rng, rng.randint(2, max_letters), rng.uniform(0.2, 0.7))
        if is_irreducible(m):
            out.append(m)
    return out


@pytest.fixture
def m1():
    return make_m1()


@pytest.fixture
def m2():
    return make_m2()


# one line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_RESULTS, key=lambda s: int(s.split("]")[0].split("[")[1])):
            terminalreporter.write_line(line)
