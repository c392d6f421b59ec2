"""Independence pairs, cliques and traces in Cartier-Foata normal form.

Letters are dense indices in declaration order.  A clique is a plain ``int``
bitmask over those indices (bit ``i`` set means letter ``i`` is a member), so
arbitrarily large alphabets are handled by Python's unbounded integers.  A
trace is stored as its Cartier-Foata normal form: a tuple of non-empty
clique masks ``c1 -> c2 -> ... -> cn``.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence, Union

from .errors import CapExceeded, CombinatorialBlowup, NotAPrefix, ParseError, Reducible, ValidationError

Clique = int

CLIQUE_CAP = 2 ** 20
TRACE_LENGTH_CAP = 8
UNIT_SYMBOL = "ε"

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def size(c: Clique) -> int:
    return c.bit_count()


@dataclass(frozen=True)
class IndependencePair:
    """An alphabet together with an irreflexive symmetric independence relation.

    ``independent`` holds unordered pairs of letter names.  The dependence
    relation is the complement, so it is reflexive.  An empty alphabet is
    accepted (it arises as the link of a maximal clique) and describes the
    trivial monoid ``{0}``.
    """

    letters: tuple[str, ...]
    independent: frozenset[frozenset[str]] = frozenset()
    _index: dict = field(init=False, repr=False, compare=False)
    _indep: tuple = field(init=False, repr=False, compare=False)
    _dep: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        letters = tuple(self.letters)
        object.__setattr__(self, "letters", letters)
        index = {}
        for name in letters:
            if not isinstance(name, str) or not _NAME_RE.match(name):
                raise ValidationError(f"invalid letter name {name!r}")
            if name in index:
                raise ValidationError(f"duplicate letter {name!r}")
            index[name] = len(index)
        pairs = set()
        for pair in self.independent:
            pair = frozenset(pair)
            names = sorted(pair)
            if len(names) != 2:
                raise ValidationError(f"pair ({names[0]}, {names[0]}) is not irreflexive")
            for name in names:
                if name not in index:
                    raise ValidationError(f"pair ({names[0]}, {names[1]}) references undeclared letter {name!r}")
            pairs.add(pair)
        object.__setattr__(self, "independent", frozenset(pairs))
        indep = [0] * len(letters)
        for pair in pairs:
            x, y = (index[name] for name in pair)
            indep[x] |= 1 << y
            indep[y] |= 1 << x
        full = (1 << len(letters)) - 1
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_indep", tuple(indep))
        object.__setattr__(self, "_dep", tuple(full & ~mask for mask in indep))

    @classmethod
    def from_pairs(cls, letters: Iterable[str], pairs: Iterable[tuple[str, str]] = ()) -> "IndependencePair":
        return cls(tuple(letters), frozenset(frozenset(p) for p in pairs))

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.letters)) - 1

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ValidationError(f"undeclared letter {name!r}") from None

    def indep_mask(self, i: int) -> int:
        """Letters independent of letter ``i``."""
        return self._indep[i]

    def dep_mask(self, i: int) -> int:
        """Letters dependent on letter ``i`` (``i`` itself included)."""
        return self._dep[i]

    def dependent(self, i: int, j: int) -> bool:
        return bool(self._dep[i] >> j & 1)

    # -- textual forms -------------------------------------------------------

    def clique_str(self, c: Clique) -> str:
        if not c:
            return UNIT_SYMBOL
        return ".".join(self.letters[i] for i in bits(c))

    def clique_names(self, c: Clique) -> list[str]:
        return [self.letters[i] for i in bits(c)]

    def trace_str(self, u: "Trace") -> str:
        if not u.cliques:
            return UNIT_SYMBOL
        return "|".join(self.clique_str(c) for c in u.cliques)

    def word_str(self, u: "Trace") -> str:
        return "".join(self.letters[i] for i in u.letters())

    def clique(self, names: Iterable[Union[str, int]]) -> Clique:
        """Build a clique mask from letter names or indices, checking independence."""
        c = 0
        for item in names:
            i = item if isinstance(item, int) else self.index(item)
            if not 0 <= i < self.n:
                raise ValidationError(f"letter index {i} out of range")
            if c & self._dep[i]:
                raise ValidationError(f"{self.clique_names(c | 1 << i)} is not a clique")
            c |= 1 << i
        return c

    def parse_clique(self, text: str) -> Clique:
        text = text.strip()
        if text in (UNIT_SYMBOL, "", "0"):
            return 0
        return self.clique(part.strip() for part in text.split("."))

    def parse_trace(self, text: str) -> "Trace":
        """Parse the canonical serialization ``a|c|a.b`` (``ε`` for the unit)."""
        text = text.strip()
        if text in (UNIT_SYMBOL, ""):
            return Trace()
        return trace_from_cliques(self, [self.parse_clique(part) for part in text.split("|")])

    def tokenize(self, text: str) -> list[int]:
        """Split a raw word into letter indices.

        Whitespace separates tokens; inside a token letter names are matched
        greedily, longest name first.
        """
        names = sorted(self.letters, key=len, reverse=True)
        out = []
        for token in text.split():
            pos = 0
            while pos < len(token):
                for name in names:
                    if token.startswith(name, pos):
                        out.append(self._index[name])
                        pos += len(name)
                        break
                else:
                    raise ValidationError(f"cannot read a letter at {token[pos:]!r}")
        return out


@dataclass(frozen=True)
class Trace:
    """A trace in Cartier-Foata normal form; equality is equality of forms."""

    cliques: tuple[int, ...] = ()

    @property
    def length(self) -> int:
        return sum(c.bit_count() for c in self.cliques)

    @property
    def height(self) -> int:
        return len(self.cliques)

    def letters(self) -> list[int]:
        """A representative word, reading each layer in declaration order."""
        return [i for c in self.cliques for i in bits(c)]

    def __bool__(self):
        return bool(self.cliques)


UNIT = Trace()


# -- parsing -------------------------------------------------------------------


def parse_pair(text: str) -> IndependencePair:
    letters = None
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, *args = line.split()
        for name in args:
            if not _NAME_RE.match(name):
                raise ParseError(f"invalid letter name {name!r}", lineno)
        if letters is None:
            if keyword != "letters":
                raise ParseError("expected 'letters' declaration first", lineno)
            if not args:
                raise ParseError("'letters' needs at least one letter", lineno)
            seen = set()
            for name in args:
                if name in seen:
                    raise ValidationError(f"duplicate letter {name!r}")
                seen.add(name)
            letters = args
        elif keyword == "letters":
            raise ParseError("'letters' declared twice", lineno)
        elif keyword == "independent":
            if len(args) != 2:
                raise ParseError("'independent' takes exactly two letters", lineno)
            pairs.append(tuple(args))
        else:
            raise ParseError(f"unknown keyword {keyword!r}", lineno)
    if letters is None:
        raise ParseError("missing 'letters' declaration")
    for x, y in pairs:
        if x == y:
            raise ValidationError(f"pair ({x}, {y}) is not irreflexive")
        for name in (x, y):
            if name not in letters:
                raise ValidationError(f"pair ({x}, {y}) references undeclared letter {name!r}")
    return IndependencePair.from_pairs(letters, pairs)


def load_pair(path) -> IndependencePair:
    with open(path, encoding="utf-8") as fh:
        return parse_pair(fh.read())


def _word(m: IndependencePair, word) -> list[int]:
    if isinstance(word, str):
        return m.tokenize(word)
    out = []
    for item in word:
        i = item if isinstance(item, int) else m.index(item)
        if not 0 <= i < m.n:
            raise ValidationError(f"letter index {i} out of range")
        out.append(i)
    return out


# -- structure -----------------------------------------------------------------


def is_irreducible(m: IndependencePair) -> bool:
    """True iff the dependence graph is connected."""
    if m.n == 0:
        return False
    seen = 1
    frontier = 1
    while frontier:
        reach = 0
        for i in bits(frontier):
            reach |= m.dep_mask(i)
        frontier = reach & ~seen
        seen |= reach
    return seen == m.full_mask


@lru_cache(maxsize=64)
def enumerate_cliques(m: IndependencePair, cap: int = CLIQUE_CAP) -> tuple[Clique, ...]:
    """All cliques, the empty one first, ordered by size then member indices."""
    out = [0]

    def extend(c, candidates):
        while candidates:
            low = candidates & -candidates
            candidates ^= low
            d = c | low
            out.append(d)
            if len(out) > cap:
                raise CombinatorialBlowup(f"more than {cap} cliques")
            extend(d, candidates & m.indep_mask(low.bit_length() - 1))

    extend(0, m.full_mask)
    out.sort(key=lambda c: (c.bit_count(), tuple(bits(c))))
    return tuple(out)


def nonempty_cliques(m: IndependencePair, cap: int = CLIQUE_CAP) -> tuple[Clique, ...]:
    return enumerate_cliques(m, cap)[1:]


def max_clique_size(m: IndependencePair) -> int:
    return enumerate_cliques(m)[-1].bit_count()


def is_clique(m: IndependencePair, c: int) -> bool:
    return all(c & m.dep_mask(i) == 1 << i for i in bits(c))


def parallel(m: IndependencePair, c: Clique, d: Clique) -> bool:
    """True iff every letter of ``c`` is independent of every letter of ``d``."""
    for j in bits(d):
        if c & m.dep_mask(j):
            return False
    return True


def parallel_letters(m: IndependencePair, c: Clique) -> int:
    """Mask of the letters parallel to ``c``."""
    mask = m.full_mask
    for i in bits(c):
        mask &= m.indep_mask(i)
    return mask


def link_alphabet(m: IndependencePair, c: Clique) -> IndependencePair:
    keep = parallel_letters(m, c)
    letters = [m.letters[i] for i in bits(keep)]
    pairs = [p for p in m.independent if all(keep >> m.index(x) & 1 for x in p)]
    return IndependencePair(tuple(letters), frozenset(pairs))


def link_cliques(m: IndependencePair, c: Clique) -> list[Clique]:
    """Cliques of the link of ``c``, expressed in the indexing of ``m``."""
    keep = parallel_letters(m, c)
    return [d for d in enumerate_cliques(m) if not d & ~keep]


def cf_admissible(m: IndependencePair, c: Clique, d: Clique) -> bool:
    """True iff every letter of ``d`` depends on some letter of ``c``."""
    for j in bits(d):
        if not c & m.dep_mask(j):
            return False
    return True


def acceptor_graph(m: IndependencePair) -> dict[Clique, list[Clique]]:
    """Successor lists of the admissibility relation on non-empty cliques."""
    states = nonempty_cliques(m)
    return {c: [d for d in states if cf_admissible(m, c, d)] for c in states}


def is_strongly_connected(graph: dict) -> bool:
    nodes = list(graph)
    if not nodes:
        return True
    reverse = {v: [] for v in nodes}
    for v, succ in graph.items():
        for w in succ:
            reverse[w].append(v)
    for adj in (graph, reverse):
        seen = {nodes[0]}
        queue = deque(seen)
        while queue:
            for w in adj[queue.popleft()]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        if len(seen) != len(nodes):
            return False
    return True


# -- traces --------------------------------------------------------------------


def _drop(m: IndependencePair, layers: list[int], i: int) -> None:
    # letter i lands just above the highest layer holding a letter it depends on
    dep = m.dep_mask(i)
    k = len(layers)
    while k and not layers[k - 1] & dep:
        k -= 1
    if k == len(layers):
        layers.append(1 << i)
    else:
        layers[k] |= 1 << i


def normal_form(m: IndependencePair, word) -> Trace:
    """Cartier-Foata normal form of a word (string, names or indices)."""
    layers: list[int] = []
    for i in _word(m, word):
        _drop(m, layers, i)
    return Trace(tuple(layers))


def trace_from_cliques(m: IndependencePair, cliques: Sequence[Clique]) -> Trace:
    """Wrap an already-normal sequence of cliques, checking admissibility."""
    cliques = tuple(cliques)
    for k, c in enumerate(cliques):
        if not c:
            raise ValidationError(f"clique {k} is empty")
        if c & ~m.full_mask or not is_clique(m, c):
            raise ValidationError(f"entry {k} is not a clique")
        if k and not cf_admissible(m, cliques[k - 1], c):
            raise ValidationError(f"cliques {k - 1} -> {k} are not Cartier-Foata admissible")
    return Trace(cliques)


def concat(m: IndependencePair, u: Trace, v: Trace) -> Trace:
    layers = list(u.cliques)
    for c in v.cliques:
        for i in bits(c):
            _drop(m, layers, i)
    return Trace(tuple(layers))


def leq(m: IndependencePair, u: Trace, v: Trace) -> bool:
    """Prefix order, read layer by layer on the normal forms.

    ``u <= v`` iff ``v`` has at least as many layers and each layer ``d_i`` of
    ``v`` is ``c_i`` plus a clique parallel to ``c_i, ..., c_n``.
    """
    n = u.height
    if n > v.height:
        return False
    suffix = 0
    for i in range(n - 1, -1, -1):
        c, d = u.cliques[i], v.cliques[i]
        suffix |= c
        if c & ~d or not parallel(m, suffix, d & ~c):
            return False
    return True


def residual(m: IndependencePair, u: Trace, v: Trace) -> Trace:
    """The unique ``w`` with ``v = u.w``."""
    if not leq(m, u, v):
        raise NotAPrefix(f"{m.trace_str(u)} is not a prefix of {m.trace_str(v)}")
    n = u.height
    rest = [d & ~c for c, d in zip(u.cliques, v.cliques)] + list(v.cliques[n:])
    layers: list[int] = []
    for c in rest:
        for i in bits(c):
            _drop(m, layers, i)
    return Trace(tuple(layers))


def cut(u: Trace, p: int) -> Trace:
    return Trace(u.cliques[:p])


def mirror(m: IndependencePair, u: Trace) -> Trace:
    return normal_form(m, u.letters()[::-1])


def _covering_walk(m: IndependencePair) -> list[int]:
    # repeatedly walk to the nearest unvisited letter along dependence edges
    walk = [0]
    visited = 1
    while visited != m.full_mask:
        start = walk[-1]
        prev = {start: None}
        queue = deque([start])
        target = None
        while queue and target is None:
            x = queue.popleft()
            for y in bits(m.dep_mask(x) & ~(1 << x)):
                if y in prev:
                    continue
                prev[y] = x
                if not visited >> y & 1:
                    target = y
                    break
                queue.append(y)
        path = []
        while target != start:
            path.append(target)
            target = prev[target]
        for y in reversed(path):
            walk.append(y)
            visited |= 1 << y
    return walk


def hat_trace(m: IndependencePair) -> Trace:
    """The trace ``a1...aq...a1`` built on a dependence walk covering every letter."""
    if not is_irreducible(m):
        raise Reducible("hat trace needs an irreducible monoid")
    walk = _covering_walk(m)
    return normal_form(m, walk + walk[-2::-1])


def dominating_set(m: IndependencePair, u: Trace) -> list[Trace]:
    """Traces of the same height as ``u`` that have ``u`` as a prefix."""
    n = u.height
    if not n:
        return [UNIT]
    suffix = [0] * n
    acc = 0
    for i in range(n - 1, -1, -1):
        acc |= u.cliques[i]
        suffix[i] = acc
    options = [[u.cliques[i] | g for g in link_cliques(m, suffix[i])] for i in range(n)]
    out = []

    def walk(i, prefix):
        if i == n:
            out.append(Trace(tuple(prefix)))
            return
        for d in options[i]:
            if not prefix or cf_admissible(m, prefix[-1], d):
                prefix.append(d)
                walk(i + 1, prefix)
                prefix.pop()

    walk(0, [])
    return out


def enumerate_traces(m: IndependencePair, k: int, cap: int = TRACE_LENGTH_CAP) -> list[Trace]:
    """Every trace of length ``k``, by depth-first search over normal forms."""
    if k > cap:
        raise CapExceeded(f"trace length {k} exceeds cap {cap}")
    states = nonempty_cliques(m)
    out = []

    def walk(prefix, remaining):
        if not remaining:
            out.append(Trace(tuple(prefix)))
            return
        for c in states:
            if c.bit_count() <= remaining and (not prefix or cf_admissible(m, prefix[-1], c)):
                prefix.append(c)
                walk(prefix, remaining - c.bit_count())
                prefix.pop()

    walk([], k)
    return out
