"""Finite k-graphs presented by a colored skeleton plus commuting squares.

A k-graph is stored as its 1-skeleton (vertices and edges of k colors)
together with the complete table of commuting squares e∘f = g∘h between
orthogonally colored edges.  Every path then has a unique color-sorted
normal form, which is how morphisms are represented throughout.

Composition order convention: a morphism is an edge sequence
e1, ..., em with s(e_i) = r(e_{i+1}); the rightmost edge is applied
first.  Normal form sorts colors ascending from left to right.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

from .errors import (
    BadSquare,
    DegreeMismatch,
    FactorizationFailure,
    NotBijective,
    NotComposable,
)


class Degree(tuple):
    """Element of N^k: one non-negative count per color."""

    def __new__(cls, entries):
        entries = tuple(int(n) for n in entries)
        if any(n < 0 for n in entries):
            raise ValueError(f"negative entry in degree {entries}")
        return super().__new__(cls, entries)

    def __add__(self, other):
        if len(self) != len(other):
            raise ValueError("degree length mismatch")
        return Degree(a + b for a, b in zip(self, other))

    @classmethod
    def zero(cls, k):
        return cls((0,) * k)

    @classmethod
    def basis(cls, k, color):
        """Standard basis vector for a 1-based color."""
        if not 1 <= color <= k:
            raise ValueError(f"color {color} out of range 1..{k}")
        return cls(tuple(1 if c == color else 0 for c in range(1, k + 1)))

    @property
    def total(self):
        return sum(self)


class Edge(NamedTuple):
    name: str
    color: int
    source: str
    range: str


class Skeleton:
    """Colored directed multigraph underlying a k-graph.

    Vertex and edge ids are opaque strings; all iteration is in
    lexicographic id order so downstream operations are deterministic.
    """

    __slots__ = ("k", "vertices", "edges", "edge_names", "_out", "_in",
                 "_incident", "_hash")

    def __init__(self, k, vertices, edges):
        k = int(k)
        if k < 1:
            raise ValueError("k must be a positive integer")
        self.k = k
        self.vertices = tuple(sorted({str(v) for v in vertices}))
        vset = set(self.vertices)
        table = {}
        for item in edges:
            e = Edge(str(item[0]), int(item[1]), str(item[2]), str(item[3]))
            if e.name in table:
                raise ValueError(f"duplicate edge id {e.name!r}")
            if not 1 <= e.color <= k:
                raise ValueError(f"edge {e.name!r} has color {e.color}, "
                                 f"expected 1..{k}")
            if e.source not in vset or e.range not in vset:
                raise ValueError(f"edge {e.name!r} has undeclared endpoint")
            table[e.name] = e
        self.edges = {name: table[name] for name in sorted(table)}
        self.edge_names = tuple(self.edges)
        out = {}
        inc = {}
        touch = {}
        for e in self.edges.values():
            out.setdefault((e.source, e.color), []).append(e.name)
            inc.setdefault((e.range, e.color), []).append(e.name)
            touch.setdefault(e.source, set()).add(e.name)
            touch.setdefault(e.range, set()).add(e.name)
        self._out = {key: tuple(sorted(names)) for key, names in out.items()}
        self._in = {key: tuple(sorted(names)) for key, names in inc.items()}
        self._incident = {v: tuple(sorted(touch.get(v, ()))) for v in self.vertices}
        self._hash = None

    def edge(self, name):
        return self.edges[name]

    def edges_from(self, v, color=None):
        """Edge names with source v, optionally restricted to one color."""
        if color is not None:
            return self._out.get((v, color), ())
        return tuple(n for c in range(1, self.k + 1)
                     for n in self._out.get((v, c), ()))

    def edges_into(self, v, color=None):
        """Edge names with range v, optionally restricted to one color."""
        if color is not None:
            return self._in.get((v, color), ())
        return tuple(n for c in range(1, self.k + 1)
                     for n in self._in.get((v, c), ()))

    def incident(self, v):
        return self._incident[v]

    def _key(self):
        return (self.k, self.vertices, tuple(self.edges.values()))

    def __eq__(self, other):
        return isinstance(other, Skeleton) and self._key() == other._key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        return (f"Skeleton(k={self.k}, {len(self.vertices)} vertices, "
                f"{len(self.edges)} edges)")


class SquareTable:
    """Commuting-square relations e∘f = g∘h with color(e) < color(f)."""

    __slots__ = ("quads",)

    def __init__(self, quads):
        seen = set()
        for q in quads:
            q = tuple(str(x) for x in q)
            if len(q) != 4:
                raise ValueError(f"square {q} must have four edges")
            seen.add(q)
        self.quads = tuple(sorted(seen))

    def __eq__(self, other):
        return isinstance(other, SquareTable) and self.quads == other.quads

    def __hash__(self):
        return hash(self.quads)

    def __len__(self):
        return len(self.quads)

    def __iter__(self):
        return iter(self.quads)

    def __repr__(self):
        return f"SquareTable({len(self.quads)} squares)"


class Morphism:
    """A path in color-sorted normal form.

    Instances are produced by normal_form, compose, factor and the
    enumeration helpers; the edge tuple is trusted to be composable and
    sorted.  Equality is structural (same parent graph, same edges, same
    source vertex, the latter to separate identities).
    """

    __slots__ = ("graph", "edges", "source", "range", "degree")

    def __init__(self, graph, edges, source):
        self.graph = graph
        self.edges = tuple(edges)
        self.source = source
        sk = graph.skeleton
        self.range = sk.edge(self.edges[0]).range if self.edges else source
        counts = [0] * sk.k
        for name in self.edges:
            counts[sk.edge(name).color - 1] += 1
        self.degree = Degree(counts)

    def is_identity(self):
        return not self.edges

    def key(self):
        """Deterministic sort key within one k-graph."""
        return (self.degree.total, self.edges, self.source)

    def __eq__(self, other):
        return (isinstance(other, Morphism)
                and self.graph == other.graph
                and self.edges == other.edges
                and self.source == other.source)

    def __hash__(self):
        return hash((self.edges, self.source))

    def __len__(self):
        return len(self.edges)

    def __repr__(self):
        inner = " ".join(self.edges) if self.edges else "id"
        return f"<{inner}: {self.source}->{self.range} d={tuple(self.degree)}>"


class KGraph:
    """Validated k-graph: every instance passes the factorization checks.

    Construction runs validate_kgraph's checks: square quadruples are
    structurally sound, each color pair's squares biject composable
    two-edge paths, and every mixed path of total degree up to
    max_check_degree has a unique color-sorted form under square
    rewriting.  Instances are immutable and safe to share.
    """

    __slots__ = ("skeleton", "squares", "_forward", "_backward", "_hash")

    def __init__(self, skeleton, squares, max_check_degree=3):
        if not isinstance(skeleton, Skeleton):
            raise TypeError("skeleton must be a Skeleton")
        if not isinstance(squares, SquareTable):
            squares = SquareTable(squares)
        if max_check_degree < 3:
            raise ValueError("max_check_degree must be at least 3")
        self.skeleton = skeleton
        self.squares = squares
        self._forward, self._backward = _check_squares(skeleton, squares)
        _check_mixed_paths(skeleton, self._forward, self._backward,
                           max_check_degree)
        self._hash = None

    @property
    def k(self):
        return self.skeleton.k

    @property
    def vertices(self):
        return self.skeleton.vertices

    @property
    def edge_names(self):
        return self.skeleton.edge_names

    def edge(self, name):
        return self.skeleton.edge(name)

    def color(self, name):
        return self.skeleton.edge(name).color

    def identity(self, v):
        if v not in self.vertices:
            raise ValueError(f"unknown vertex {v!r}")
        return Morphism(self, (), v)

    def morphism(self, edges, at=None):
        return normal_form(self, edges, at=at)

    def _key(self):
        return (self.skeleton._key(), self.squares.quads)

    def __eq__(self, other):
        return isinstance(other, KGraph) and self._key() == other._key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        return (f"KGraph(k={self.k}, {len(self.vertices)} vertices, "
                f"{len(self.edge_names)} edges, {len(self.squares)} squares)")


def _check_squares(skeleton, squares):
    """Structural and bijectivity checks; returns the two rewrite maps.

    forward maps an in-order pair (e, f) with color(e) < color(f) to its
    partner (g, h); backward is the inverse lookup keyed on (g, h).
    """
    forward = {}
    backward = {}
    for quad in squares.quads:
        e, f, g, h = quad
        for name in quad:
            if name not in skeleton.edges:
                raise BadSquare(quad, f"unknown edge {name!r}")
        E, F, G, H = (skeleton.edge(x) for x in quad)
        if not E.color < F.color:
            raise BadSquare(quad, f"colors must satisfy color({e}) < color({f})")
        if G.color != F.color or H.color != E.color:
            raise BadSquare(quad, "right-hand colors must mirror the left")
        if E.source != F.range:
            raise BadSquare(quad, f"s({e}) != r({f})")
        if G.source != H.range:
            raise BadSquare(quad, f"s({g}) != r({h})")
        if F.source != H.source:
            raise BadSquare(quad, f"s({f}) != s({h})")
        if E.range != G.range:
            raise BadSquare(quad, f"r({e}) != r({g})")
        if (e, f) in forward:
            raise NotBijective((e, f), "matched twice")
        if (g, h) in backward:
            raise NotBijective((g, h), "matched twice")
        forward[(e, f)] = (g, h)
        backward[(g, h)] = (e, f)
    # Completeness: every mixed-color composable pair appears exactly once.
    for a in skeleton.edge_names:
        A = skeleton.edge(a)
        for b in skeleton.edges_from(A.source):
            B = skeleton.edge(b)
            if A.color < B.color and (a, b) not in forward:
                raise NotBijective((a, b), "unmatched")
            if A.color > B.color and (a, b) not in backward:
                raise NotBijective((a, b), "unmatched")
    return forward, backward


def _square_neighbors(colors, forward, backward, path):
    """Paths reachable from `path` by one square move, in position order."""
    for i in range(len(path) - 1):
        a, b = path[i], path[i + 1]
        ca, cb = colors[a], colors[b]
        if ca == cb:
            continue
        pair = forward[(a, b)] if ca < cb else backward[(a, b)]
        yield path[:i] + pair + path[i + 2:]


def _check_mixed_paths(skeleton, forward, backward, max_degree):
    """Unique sorted form for every mixed path of length 3..max_degree."""
    colors = {name: e.color for name, e in skeleton.edges.items()}

    def sorted_colors(path):
        return all(colors[path[i]] <= colors[path[i + 1]]
                   for i in range(len(path) - 1))

    for length in range(3, max_degree + 1):
        seen = set()
        for path in _raw_paths_of_length(skeleton, length):
            if len({colors[x] for x in path}) == 1:
                continue
            if path in seen:
                continue
            component = {path}
            frontier = [path]
            while frontier:
                cur = frontier.pop()
                for nxt in _square_neighbors(colors, forward, backward, cur):
                    if nxt not in component:
                        component.add(nxt)
                        frontier.append(nxt)
            seen |= component
            forms = sorted(p for p in component if sorted_colors(p))
            if len(forms) != 1:
                raise FactorizationFailure(path, forms)


def _raw_paths_of_length(skeleton, length):
    """All composable edge sequences of the given length, DFS order."""
    def extend(path, src):
        if len(path) == length:
            yield tuple(path)
            return
        for nxt in skeleton.edges_into(src):
            path.append(nxt)
            yield from extend(path, skeleton.edge(nxt).source)
            path.pop()

    for first in skeleton.edge_names:
        yield from extend([first], skeleton.edge(first).source)


def validate_kgraph(skeleton, squares, max_check_degree=3):
    """Validate skeleton-plus-squares data and return the KGraph.

    max_check_degree raises the exhaustive path-consistency bound beyond
    the default of 3 for paranoia testing; 3 already forces unique
    factorization in every degree for the presented category.
    """
    return KGraph(skeleton, squares, max_check_degree=max_check_degree)


def _check_composable(skeleton, names):
    for i in range(len(names) - 1):
        if skeleton.edge(names[i]).source != skeleton.edge(names[i + 1]).range:
            raise NotComposable(
                i, f"s({names[i]}) = {skeleton.edge(names[i]).source!r} but "
                   f"r({names[i + 1]}) = {skeleton.edge(names[i + 1]).range!r}")


def _sort_by_color(graph, names):
    """Bubble a composable sequence into ascending color order."""
    colors = graph.skeleton.edges
    out = list(names)
    i = 0
    while i < len(out) - 1:
        a, b = out[i], out[i + 1]
        if colors[a].color > colors[b].color:
            try:
                out[i], out[i + 1] = graph._backward[(a, b)]
            except KeyError:
                raise NotBijective((a, b), "unmatched") from None
            if i:
                i -= 1
        else:
            i += 1
    return tuple(out)


def normal_form(g, path, at=None):
    """Unique color-sorted representative of a raw composable path.

    The empty path needs `at`, the vertex carrying the identity.
    """
    names = [str(x) for x in path]
    if not names:
        if at is None:
            raise ValueError("empty path needs a vertex: normal_form(g, [], at=v)")
        if at not in g.vertices:
            raise ValueError(f"unknown vertex {at!r}")
        return Morphism(g, (), at)
    for name in names:
        if name not in g.skeleton.edges:
            raise ValueError(f"unknown edge {name!r}")
    _check_composable(g.skeleton, names)
    sorted_names = _sort_by_color(g, names)
    return Morphism(g, sorted_names, g.skeleton.edge(sorted_names[-1]).source)


def compose(m1, m2):
    """Normal form of m1∘m2 (m2 applied first); degrees add."""
    if m1.graph != m2.graph:
        raise ValueError("morphisms live in different k-graphs")
    if m1.source != m2.range:
        raise NotComposable(len(m1.edges) - 1 if m1.edges else 0,
                            f"s(left) = {m1.source!r}, r(right) = {m2.range!r}")
    return normal_form(m1.graph, m1.edges + m2.edges, at=m2.source)


def factor(m, n, l):
    """The unique split m = beta∘gamma with d(beta) = n and d(gamma) = l."""
    g = m.graph
    n = Degree(n)
    l = Degree(l)
    if len(n) != g.k or len(l) != g.k:
        raise DegreeMismatch(f"degree length must be {g.k}")
    if n + l != m.degree:
        raise DegreeMismatch(
            f"{tuple(n)} + {tuple(l)} != d(m) = {tuple(m.degree)}")
    colors = g.skeleton.edges
    remaining = list(m.edges)
    beta = []
    for color in range(1, g.k + 1):
        for _ in range(n[color - 1]):
            pos = next(i for i, name in enumerate(remaining)
                       if colors[name].color == color)
            seq = remaining[:pos + 1]
            for j in range(pos, 0, -1):
                seq[j - 1], seq[j] = g._forward[(seq[j - 1], seq[j])]
            beta.append(seq[0])
            remaining = seq[1:] + remaining[pos + 1:]
    gamma = Morphism(g, tuple(remaining), m.source)
    beta_m = Morphism(g, tuple(beta), gamma.range)
    return beta_m, gamma


def morphisms_of_degree(g, v, n, direction="range"):
    """All normal-form morphisms of degree n with endpoint v.

    direction "range" fixes r(m) = v, "source" fixes s(m) = v.  Finite
    because the k-graph is; returned sorted for determinism.
    """
    n = Degree(n)
    if len(n) != g.k:
        raise ValueError(f"degree length must be {g.k}")
    if v not in g.vertices:
        raise ValueError(f"unknown vertex {v!r}")
    if direction not in ("range", "source"):
        raise ValueError("direction must be 'range' or 'source'")
    sk = g.skeleton
    out = []

    if direction == "range":
        def grow(seq, back_source, budget, floor):
            if not any(budget):
                out.append(Morphism(g, tuple(seq), back_source))
                return
            for c in range(floor, g.k + 1):
                if not budget[c - 1]:
                    continue
                budget[c - 1] -= 1
                for name in sk.edges_into(back_source, c):
                    seq.append(name)
                    grow(seq, sk.edge(name).source, budget, c)
                    seq.pop()
                budget[c - 1] += 1
        grow([], v, list(n), 1)
    else:
        def grow(seq, front_range, budget, cap):
            if not any(budget):
                out.append(Morphism(g, tuple(seq), v))
                return
            for c in range(1, cap + 1):
                if not budget[c - 1]:
                    continue
                budget[c - 1] -= 1
                for name in sk.edges_from(front_range, c):
                    seq.insert(0, name)
                    grow(seq, sk.edge(name).range, budget, c)
                    seq.pop(0)
                budget[c - 1] += 1
        grow([], v, list(n), g.k)

    out.sort(key=Morphism.key)
    return tuple(out)


def is_connected(g):
    """True iff the undirected skeleton has a single component."""
    sk = g.skeleton if isinstance(g, KGraph) else g
    if len(sk.vertices) <= 1:
        return True
    start = sk.vertices[0]
    seen = {start}
    frontier = [start]
    while frontier:
        v = frontier.pop()
        for name in sk.incident(v):
            e = sk.edge(name)
            for other in (e.source, e.range):
                if other not in seen:
                    seen.add(other)
                    frontier.append(other)
    return len(seen) == len(sk.vertices)
