"""Fundamental group presentations and cocycles.

The fundamental group at a base vertex is presented on the non-tree
skeleton edges, with one relator per commuting square, after killing a
deterministic BFS spanning tree.  Cocycles assign a group word (or an
integer vector for the built-in free-abelian targets) to every skeleton
edge, subject to the square identities.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import KGraph, Morphism, is_connected
from .errors import NotConnected, TargetMismatch


def _free_reduce(letters):
    out = []
    for g, s in letters:
        if out and out[-1][0] == g and out[-1][1] == -s:
            out.pop()
        else:
            out.append((g, s))
    return tuple(out)


class Word:
    """Freely reduced word over named generators.

    Letters are (generator, sign) pairs with sign +1 or -1, listed in
    product order: the leftmost letter is the leftmost factor.
    """

    __slots__ = ("letters",)

    def __init__(self, letters=()):
        norm = []
        for g, s in letters:
            s = int(s)
            if s not in (1, -1):
                raise ValueError(f"letter sign must be +1 or -1, got {s}")
            norm.append((str(g), s))
        self.letters = _free_reduce(norm)

    @classmethod
    def gen(cls, name, sign=1):
        return cls(((name, sign),))

    @classmethod
    def from_tokens(cls, tokens):
        """Parse tokens of the form g, g^-1, or g^<int>."""
        letters = []
        for tok in tokens:
            if "^" in tok:
                name, _, exp = tok.partition("^")
                exp = int(exp)
            else:
                name, exp = tok, 1
            if not name:
                raise ValueError(f"bad word token {tok!r}")
            sign = 1 if exp > 0 else -1
            letters.extend((name, sign) for _ in range(abs(exp)))
        return cls(letters)

    def tokens(self):
        return [g if s > 0 else f"{g}^-1" for g, s in self.letters]

    def inverse(self):
        return Word(tuple((g, -s) for g, s in reversed(self.letters)))

    def __mul__(self, other):
        return Word(self.letters + other.letters)

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        w = Word()
        for _ in range(n):
            w = w * self
        return w

    def exponents(self, generators):
        """Exponent-sum vector over an ordered generator list."""
        index = {g: i for i, g in enumerate(generators)}
        out = [0] * len(generators)
        for g, s in self.letters:
            out[index[g]] += s
        return tuple(out)

    def __bool__(self):
        return bool(self.letters)

    def __len__(self):
        return len(self.letters)

    def __eq__(self, other):
        return isinstance(other, Word) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def __repr__(self):
        return " ".join(self.tokens()) if self.letters else "1"


@dataclass(frozen=True)
class GroupPresentation:
    generators: tuple
    relators: tuple

    def __post_init__(self):
        gens = tuple(str(g) for g in self.generators)
        if len(set(gens)) != len(gens):
            raise ValueError("duplicate generator names")
        rels = tuple(self.relators)
        gset = set(gens)
        for w in rels:
            for g, _ in w.letters:
                if g not in gset:
                    raise ValueError(f"relator letter {g!r} is not a generator")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "relators", rels)

    def __repr__(self):
        return (f"<{', '.join(self.generators) or '1'} | "
                f"{', '.join(map(repr, self.relators)) or ' '}>")


@dataclass(frozen=True)
class SpanningTree:
    """BFS tree rooted at `base`; words[y] is t_y, a path word from y
    down to the base with edges inverted when crossed against their
    direction (t_base is empty)."""

    base: str
    words: dict
    tree_edges: frozenset
    order: tuple


def spanning_tree(g, x):
    """Deterministic BFS spanning tree of the undirected skeleton.

    Edges are explored in lexicographic id order; raises NotConnected if
    some vertex is unreachable from x.
    """
    sk = g.skeleton
    if x not in g.vertices:
        raise ValueError(f"unknown vertex {x!r}")
    words = {x: Word()}
    tree_edges = set()
    order = [x]
    queue = [x]
    while queue:
        z = queue.pop(0)
        for name in sk.incident(z):
            e = sk.edge(name)
            other = e.range if e.source == z else e.source
            if other == z or other in words:
                continue
            sign = 1 if e.range == other else -1
            words[other] = Word.gen(name, sign) * words[z]
            tree_edges.add(name)
            order.append(other)
            queue.append(other)
    if len(words) != len(g.vertices):
        missing = sorted(set(g.vertices) - set(words))
        raise NotConnected(f"unreachable vertices {missing}")
    return SpanningTree(x, words, frozenset(tree_edges), tuple(order))


def fundamental_group(g, x, eliminate_tree=True):
    """Presentation of the fundamental group at x, plus the edge map rho.

    With the default Tietze elimination, generators are the non-tree
    skeleton edges; rho sends tree edges to the empty word and each
    non-tree edge to its generator.  Each square (e, f, g, h) contributes
    the relator rho(e) rho(f) rho(h)^-1 rho(g)^-1, empty relators
    dropped.  eliminate_tree=False keeps every edge as a generator and
    adds one relator per tree edge instead, for cross-checking.
    """
    tree = spanning_tree(g, x)
    if eliminate_tree:
        gens = tuple(n for n in g.edge_names if n not in tree.tree_edges)
        rho = {n: (Word.gen(n) if n in gens else Word()) for n in g.edge_names}
    else:
        gens = g.edge_names
        rho = {n: Word.gen(n) for n in g.edge_names}
    relators = []
    seen = set()
    for e, f, gg, h in g.squares.quads:
        w = rho[e] * rho[f] * rho[h].inverse() * rho[gg].inverse()
        if w and w not in seen:
            seen.add(w)
            relators.append(w)
    if not eliminate_tree:
        for name in sorted(tree.tree_edges):
            w = Word.gen(name)
            if w not in seen:
                seen.add(w)
                relators.append(w)
    return GroupPresentation(gens, tuple(relators)), rho


@dataclass(frozen=True)
class ZkTarget:
    """Built-in abelian target: Z^k, or a product of cyclic groups when
    moduli are given (modulus 0 keeps that coordinate free)."""

    k: int
    moduli: tuple = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.moduli is not None:
            m = tuple(int(x) for x in self.moduli)
            if len(m) != self.k:
                raise ValueError("moduli length must equal k")
            if any(x < 0 for x in m):
                raise ValueError("moduli must be non-negative")
            object.__setattr__(self, "moduli", m)

    def reduce(self, vec):
        vec = tuple(int(x) for x in vec)
        if len(vec) != self.k:
            raise ValueError(f"vector length must be {self.k}")
        if self.moduli is None:
            return vec
        return tuple(v % m if m else v for v, m in zip(vec, self.moduli))

    def add(self, a, b):
        return self.reduce(tuple(x + y for x, y in zip(a, b)))

    @property
    def zero(self):
        return (0,) * self.k


class Cocycle:
    """Edge-to-group assignment defining a functor into the target.

    Targets: a GroupPresentation (values are Words over its generators),
    a ZkTarget (values are integer vectors), or a concrete finite group
    carrier with multiply/identity (values are element indices).
    """

    __slots__ = ("graph", "target", "values")

    def __init__(self, graph, target, values):
        if set(values) != set(graph.edge_names):
            missing = sorted(set(graph.edge_names) - set(values))
            extra = sorted(set(values) - set(graph.edge_names))
            raise ValueError(f"cocycle must cover every edge exactly "
                             f"(missing {missing}, extra {extra})")
        vals = {}
        if isinstance(target, GroupPresentation):
            gset = set(target.generators)
            for name in graph.edge_names:
                w = values[name]
                if not isinstance(w, Word):
                    raise TypeError(f"value for {name!r} must be a Word")
                if any(g not in gset for g, _ in w.letters):
                    raise ValueError(f"value for {name!r} uses unknown letters")
                vals[name] = w
        elif isinstance(target, ZkTarget):
            for name in graph.edge_names:
                vals[name] = target.reduce(values[name])
        else:
            order = target.order
            for name in graph.edge_names:
                v = int(values[name])
                if not 0 <= v < order:
                    raise ValueError(f"value for {name!r} out of range")
                vals[name] = v
        self.graph = graph
        self.target = target
        self.values = vals

    def value(self, edge_name):
        return self.values[edge_name]

    def eval(self, m):
        """Product of edge values along a morphism, in composition order."""
        if m.graph != self.graph:
            raise ValueError("morphism belongs to a different k-graph")
        if isinstance(self.target, GroupPresentation):
            out = Word()
            for name in m.edges:
                out = out * self.values[name]
            return out
        if isinstance(self.target, ZkTarget):
            out = self.target.zero
            for name in m.edges:
                out = self.target.add(out, self.values[name])
            return out
        out = self.target.identity
        for name in m.edges:
            out = self.target.multiply(out, self.values[name])
        return out

    def __repr__(self):
        return f"Cocycle({self.graph!r} -> {self.target!r})"


def canonical_cocycle(g, x):
    """The spanning-tree cocycle into the fundamental group at x.

    Tree edges carry the empty word and every other edge its own
    generator; functorial by construction since the square relators are
    exactly the imposed identities.
    """
    presentation, rho = fundamental_group(g, x)
    return Cocycle(g, presentation, rho)


def eval_cocycle(c, m):
    """Group value of a morphism under a cocycle."""
    return c.eval(m)


def degree_cocycle(g, moduli=None):
    """The degree functor as a cocycle into Z^k, optionally reduced."""
    target = ZkTarget(g.k, tuple(moduli) if moduli is not None else None)
    values = {}
    for name in g.edge_names:
        color = g.color(name)
        values[name] = tuple(1 if c == color else 0
                             for c in range(1, g.k + 1))
    return Cocycle(g, target, values)


def _realize_value(value, realization):
    if isinstance(value, Word):
        return realization.element_of_word(value)
    return int(value)


def _check_realizable(c, realization):
    target = c.target
    if isinstance(target, GroupPresentation):
        pres = getattr(realization, "presentation", None)
        if pres != target:
            raise TargetMismatch(
                "cocycle targets a different presentation than the realization")
    elif isinstance(target, ZkTarget):
        raise TargetMismatch(
            "integer-vector cocycles are compared directly, not via a realization")
    else:
        if target != realization:
            raise TargetMismatch("cocycle targets a different concrete group")


def cocycle_square_failures(c, realization=None):
    """Squares on which the functor identity fails, in table order.

    Presentation-valued cocycles need a concrete realization; validity in
    a general finitely presented group is undecidable.
    """
    g = c.graph
    bad = []
    if isinstance(c.target, ZkTarget):
        for quad in g.squares.quads:
            e, f, gg, h = quad
            lhs = c.target.add(c.values[e], c.values[f])
            rhs = c.target.add(c.values[gg], c.values[h])
            if lhs != rhs:
                bad.append(quad)
        return bad
    if isinstance(c.target, GroupPresentation):
        if realization is None:
            raise TargetMismatch(
                "checking a presentation-valued cocycle needs a realization")
        _check_realizable(c, realization)
        val = {n: realization.element_of_word(c.values[n])
               for n in g.edge_names}
        mul = realization.multiply
    else:
        realization = c.target
        val = dict(c.values)
        mul = realization.multiply
    for quad in g.squares.quads:
        e, f, gg, h = quad
        if mul(val[e], val[f]) != mul(val[gg], val[h]):
            bad.append(quad)
    return bad


def are_cohomologous(g, c1, c2, realization):
    """Vertex correction tau with tau_x eta(a) = kappa(a) tau_y, or None.

    eta = c1, kappa = c2, both realized in the given finite group.  The
    search fixes tau at one root per undirected component to each group
    element in turn (ascending, so the answer is deterministic),
    propagates along a BFS tree, and checks every remaining edge.
    """
    if c1.graph != g or c2.graph != g:
        raise ValueError("cocycles must live on the given k-graph")
    _check_realizable(c1, realization)
    _check_realizable(c2, realization)
    sk = g.skeleton
    eta = {n: _realize_value(c1.values[n], realization) for n in g.edge_names}
    kappa = {n: _realize_value(c2.values[n], realization) for n in g.edge_names}
    mul = realization.multiply
    inv = realization.inverse

    def propagate_ok(root, root_value, tau):
        tau[root] = root_value
        queue = [root]
        seen_edges = []
        while queue:
            z = queue.pop(0)
            for name in sk.incident(z):
                e = sk.edge(name)
                other = e.range if e.source == z else e.source
                seen_edges.append(name)
                if other in tau:
                    continue
                if e.source == z:
                    # know tau at the source, solve at the range
                    tau[e.range] = mul(kappa[name],
                                       mul(tau[e.source], inv(eta[name])))
                else:
                    tau[e.source] = mul(inv(kappa[name]),
                                        mul(tau[e.range], eta[name]))
                queue.append(other)
        for name in seen_edges:
            e = sk.edge(name)
            lhs = mul(tau[e.range], eta[name])
            rhs = mul(kappa[name], tau[e.source])
            if lhs != rhs:
                return False
        return True

    tau = {}
    remaining = list(g.vertices)
    while remaining:
        root = remaining[0]
        found = False
        for candidate in realization.elements:
            trial = {}
            if propagate_ok(root, candidate, trial):
                tau.update(trial)
                found = True
                break
        if not found:
            return None
        remaining = [v for v in remaining if v not in tau]
    return tau
