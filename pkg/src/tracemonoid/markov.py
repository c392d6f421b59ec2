"""Markov chain on non-empty cliques realizing a Bernoulli measure.

Sampling is reproducible: every random stream comes from numpy's ``PCG64``
bit generator seeded with a 64-bit integer, and independent sub-streams are
derived with :func:`derive_seed`.  Categorical draws use inverse-CDF lookup on
cumulative sums fixed at build time, so equal seeds give equal runs.
"""

from __future__ import annotations

from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import Reducible, SolveFailure, ValidationError, ZeroNormalization
from .measures import Valuation, require_mobius
from .mobius import mobius_transform, valuation_table
from .monoid import IndependencePair, Trace, cf_admissible, is_irreducible, leq, nonempty_cliques

RNG_ALGORITHM = "PCG64"
STATIONARY_TOL = 1e-12
POWER_TOL = 1e-13
POWER_MAX_ITER = 10 ** 6
BATCH_ROWS = 8192


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(_check_seed(seed)))


def derive_seed(seed: int, index: int) -> int:
    """Seed of the ``index``-th independent sub-stream of ``seed``.

    Defined as the first 64-bit word of ``SeedSequence(seed, spawn_key=(index,))``.
    """
    ss = np.random.SeedSequence(_check_seed(seed), spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def _check_seed(seed) -> int:
    seed = int(seed)
    if not 0 <= seed < 2 ** 64:
        raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def _cdf(weights: np.ndarray) -> np.ndarray:
    total = weights.sum()
    cdf = np.cumsum(weights) / total
    # pin the tail to 1 so rounding can never select past the last positive state
    positive = np.flatnonzero(weights > 0)
    cdf[positive[-1]:] = 1.0
    return cdf


@dataclass(frozen=True, eq=False)
class ChainSpec:
    states: tuple[int, ...]
    initial: np.ndarray
    transition: np.ndarray
    g: np.ndarray
    sizes: np.ndarray = field(init=False)
    initial_cdf: np.ndarray = field(init=False, repr=False)
    transition_cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        sizes = np.array([c.bit_count() for c in self.states], dtype=np.int64)
        initial_cdf = _cdf(self.initial)
        transition_cdf = np.vstack([_cdf(row) for row in self.transition])
        for name, value in (("sizes", sizes), ("initial_cdf", initial_cdf), ("transition_cdf", transition_cdf)):
            object.__setattr__(self, name, value)
        for arr in (self.initial, self.transition, self.g, sizes, initial_cdf, transition_cdf):
            arr.setflags(write=False)
        object.__setattr__(self, "_initial_list", initial_cdf.tolist())
        object.__setattr__(self, "_rows", transition_cdf.tolist())

    def index(self, c: int) -> int:
        return self.states.index(c)

    def path_probability(self, cliques) -> float:
        """``initial(c1) * P[c1][c2] * ...`` for a sequence of states."""
        idx = [self.index(c) for c in cliques]
        if not idx:
            return 1.0
        out = float(self.initial[idx[0]])
        for a, b in zip(idx, idx[1:]):
            out *= float(self.transition[a, b])
        return out


@dataclass(frozen=True)
class SampleRun:
    seed: int
    cliques: tuple[int, ...]
    trace: Trace
    steps: int
    algorithm: str = RNG_ALGORITHM


def build_chain(m: IndependencePair, v: Valuation, enforce: bool = True) -> ChainSpec:
    """Initial law ``h`` on non-empty cliques and ``P[c][c'] = h(c') / g(c)``
    for admissible ``c -> c'``, where ``g(c)`` sums ``h`` over successors."""
    if enforce:
        require_mobius(m, v)
    h = mobius_transform(m, valuation_table(m, v))
    states = nonempty_cliques(m)
    n = len(states)
    hv = np.array([h[c] for c in states])
    adj = np.array([[cf_admissible(m, c, d) for d in states] for c in states], dtype=bool)
    g = np.where(adj, hv[None, :], 0.0).sum(axis=1)
    bad = [m.clique_str(states[i]) for i in range(n) if not g[i] > 0]
    if bad:
        raise ZeroNormalization(f"non-positive normalization at {bad}")
    transition = np.where(adj, hv[None, :] / g[:, None], 0.0)
    return ChainSpec(states=states, initial=hv, transition=transition, g=g)


def _power_iteration(P: np.ndarray) -> np.ndarray:
    pi = np.full(P.shape[0], 1.0 / P.shape[0])
    for _ in range(POWER_MAX_ITER):
        nxt = pi @ P
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - pi)) <= POWER_TOL:
            return nxt
        pi = nxt
    raise SolveFailure("power iteration did not converge")


def stationary(chain: ChainSpec) -> np.ndarray:
    """Probability vector ``pi`` with ``pi P = pi``.

    Solved directly with the last balance equation replaced by ``sum(pi) = 1``;
    power iteration is the fallback when that system is singular.
    """
    P = chain.transition
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        pi = _power_iteration(P)
    if np.max(np.abs(pi @ P - pi)) > STATIONARY_TOL or pi.min() < -STATIONARY_TOL:
        pi = _power_iteration(P)
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    if np.max(np.abs(pi @ P - pi)) > STATIONARY_TOL:
        raise SolveFailure("stationary vector does not meet tolerance")
    return pi


def speedup_exact(m: IndependencePair, v: Valuation, enforce: bool = True) -> tuple[float, float]:
    """Stationary mean clique size ``rho`` and its inverse ``gamma``."""
    if not is_irreducible(m):
        raise Reducible("speedup is defined here for irreducible monoids only")
    chain = build_chain(m, v, enforce=enforce)
    rho = float(stationary(chain) @ chain.sizes)
    return rho, 1.0 / rho


def _walk(chain: ChainSpec, n: int, rng: np.random.Generator) -> list[int]:
    if n <= 0:
        return []
    draws = rng.random(n).tolist()
    rows = chain._rows
    state = bisect_right(chain._initial_list, draws[0])
    path = [state]
    for x in draws[1:]:
        state = bisect_right(rows[state], x)
        path.append(state)
    return path


def sample_prefix(chain: ChainSpec, n: int, seed: int) -> SampleRun:
    """First ``n`` layers of a random infinite trace."""
    if n < 0:
        raise ValidationError("number of steps must be non-negative")
    path = _walk(chain, n, make_rng(seed))
    cliques = tuple(chain.states[i] for i in path)
    return SampleRun(seed=int(seed), cliques=cliques, trace=Trace(cliques), steps=n)


def _mean_size(chain: ChainSpec, n: int, seed: int) -> float:
    sizes = chain.sizes.tolist()
    return sum(sizes[i] for i in _walk(chain, n, make_rng(seed))) / n


def speedup_montecarlo(chain: ChainSpec, n: int, seed: int, chains: int = 1, workers: int = 1) -> float:
    """Ergodic average ``(|C1| + ... + |Cn|) / n``.

    With ``chains > 1`` that many independent runs of ``n`` steps are made on
    the sub-streams ``derive_seed(seed, k)`` and their averages are averaged;
    the result does not depend on ``workers``.
    """
    if n < 1:
        raise ValidationError("number of steps must be positive")
    if chains == 1:
        return _mean_size(chain, n, seed)
    seeds = [derive_seed(seed, k) for k in range(chains)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: _mean_size(chain, n, s), seeds))
    else:
        results = [_mean_size(chain, n, s) for s in seeds]
    return sum(results) / chains


def sample_states(chain: ChainSpec, steps: int, runs: int, seed: int) -> np.ndarray:
    """``runs`` independent prefixes of ``steps`` states, as a state-index array.

    Row ``r`` consumes ``steps`` uniforms in order, so with ``runs=1`` this
    reproduces :func:`sample_prefix` for the same seed.
    """
    rng = make_rng(seed)
    out = np.empty((runs, steps), dtype=np.int64)
    init = chain.initial_cdf
    cdf = chain.transition_cdf
    for start in range(0, runs, BATCH_ROWS):
        stop = min(start + BATCH_ROWS, runs)
        u = rng.random((stop - start, steps))
        if not steps:
            continue
        state = np.searchsorted(init, u[:, 0], side="right")
        out[start:stop, 0] = state
        for k in range(1, steps):
            state = (cdf[state] <= u[:, k, None]).sum(axis=1)
            out[start:stop, k] = state
    return out


def empirical_prefix_frequencies(chain: ChainSpec, steps: int, runs: int, seed: int) -> dict:
    """Relative frequency of each observed sequence of the first ``steps`` cliques."""
    paths = sample_states(chain, steps, runs, seed)
    rows, counts = np.unique(paths, axis=0, return_counts=True)
    return {tuple(chain.states[i] for i in row): c / runs for row, c in zip(rows.tolist(), counts.tolist())}


def empirical_cylinder(chain: ChainSpec, m: IndependencePair, u: Trace, runs: int, seed: int) -> float:
    """Fraction of sampled prefixes ``C1...C_height(u)`` having ``u`` as a prefix."""
    if not u.cliques:
        return 1.0
    if runs < 1:
        raise ValidationError("runs must be positive")
    paths = sample_states(chain, u.height, runs, seed)
    rows, counts = np.unique(paths, axis=0, return_counts=True)
    hits = 0
    for row, count in zip(rows.tolist(), counts.tolist()):
        if leq(m, u, Trace(tuple(chain.states[i] for i in row))):
            hits += count
    return hits / runs


def format_sample_run(m: IndependencePair, run: SampleRun) -> str:
    lines = [f"{k}\t{m.clique_str(c)}" for k, c in enumerate(run.cliques, start=1)]
    length, height = run.trace.length, run.trace.height
    ratio = f"{length / height:.12g}" if height else "nan"
    lines.append(f"# rng={run.algorithm} seed={run.seed} steps={run.steps} "
                 f"length={length} height={height} ratio={ratio}")
    return "\n".join(lines)
