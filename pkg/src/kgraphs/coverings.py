"""Covering maps, groupoid actions, and the equivalence between them.

A covering is a color-preserving skeleton morphism that is locally
bijective on edges at every vertex and carries squares to squares; a
groupoid action is a fiber set over each base vertex with one bijection
per skeleton edge, compatible with the squares.  The two constructions
covering_to_action and action_to_covering implement the category
equivalence; fibers of products are tagged onto ids with '@'.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (
    Edge,
    KGraph,
    Skeleton,
    SquareTable,
    is_connected,
    morphisms_of_degree,
)
from .errors import (
    BasepointMismatch,
    NotClosed,
    NotConnected,
    NotFree,
    NotFunctorial,
    NotLocallyInjective,
    NotLocallySurjective,
    NotSurjective,
    SquareBroken,
)
from .fundamental import GroupPresentation, Word, fundamental_group, spanning_tree


class CoveringMap:
    """Validated covering p from one k-graph onto another.

    Construction checks the full definition: a surjective skeleton
    morphism, bijective on each vertex's incoming and outgoing edges of
    every color, carrying squares to squares.  Path-level bijectivity in
    total degree <= 2 is re-derived as a redundant assertion.
    """

    __slots__ = ("domain", "codomain", "vertex_map", "edge_map",
                 "_fibers", "_lift_from", "_lift_into")

    def __init__(self, domain, codomain, vertex_map, edge_map):
        self.domain = domain
        self.codomain = codomain
        self.vertex_map = {str(k): str(v) for k, v in vertex_map.items()}
        self.edge_map = {str(k): str(v) for k, v in edge_map.items()}
        self._validate()
        fibers = {x: [] for x in codomain.vertices}
        for v in domain.vertices:
            fibers[self.vertex_map[v]].append(v)
        self._fibers = {x: tuple(sorted(vs)) for x, vs in fibers.items()}
        self._lift_from = {}
        self._lift_into = {}
        for e in domain.edge_names:
            a = self.edge_map[e]
            rec = domain.edge(e)
            self._lift_from[(a, rec.source)] = e
            self._lift_into[(a, rec.range)] = e

    def _validate(self):
        dom, cod = self.domain, self.codomain
        if set(self.vertex_map) != set(dom.vertices):
            raise NotFunctorial("vertex map must cover every domain vertex")
        if set(self.edge_map) != set(dom.edge_names):
            raise NotFunctorial("edge map must cover every domain edge")
        for v, image in self.vertex_map.items():
            if image not in cod.vertices:
                raise NotFunctorial(f"vertex {v!r} maps to unknown {image!r}")
        for e, image in sorted(self.edge_map.items()):
            if image not in cod.edge_names:
                raise NotFunctorial(f"edge {e!r} maps to unknown {image!r}")
            up, down = dom.edge(e), cod.edge(image)
            if up.color != down.color:
                raise NotFunctorial(f"edge {e!r} changes color")
            if self.vertex_map[up.source] != down.source:
                raise NotFunctorial(f"edge {e!r} breaks sources")
            if self.vertex_map[up.range] != down.range:
                raise NotFunctorial(f"edge {e!r} breaks ranges")
        if set(self.vertex_map.values()) != set(cod.vertices):
            raise NotSurjective("vertex map misses part of the base")
        if set(self.edge_map.values()) != set(cod.edge_names):
            raise NotSurjective("edge map misses part of the base")
        for v in dom.vertices:
            x = self.vertex_map[v]
            for color in range(1, dom.k + 1):
                for kind, mine, theirs in (
                        ("outgoing", dom.skeleton.edges_from(v, color),
                         cod.skeleton.edges_from(x, color)),
                        ("incoming", dom.skeleton.edges_into(v, color),
                         cod.skeleton.edges_into(x, color))):
                    images = [self.edge_map[e] for e in mine]
                    if len(set(images)) != len(images):
                        raise NotLocallyInjective(
                            v, color, f"{kind} edges collapse")
                    if set(images) != set(theirs):
                        raise NotLocallySurjective(
                            v, color, f"{kind} edges miss a lift")
        squares = set(cod.squares.quads)
        for quad in self.domain.squares.quads:
            image = tuple(self.edge_map[e] for e in quad)
            if image not in squares:
                raise SquareBroken(quad)
        self._spot_check_paths()

    def _spot_check_paths(self):
        # redundant: local edge bijectivity already implies this degree by degree
        dom, cod = self.domain, self.codomain
        degrees = []
        for c1 in range(1, dom.k + 1):
            degrees.append(tuple(2 if c == c1 else 0
                                 for c in range(1, dom.k + 1)))
            for c2 in range(c1 + 1, dom.k + 1):
                degrees.append(tuple(1 if c in (c1, c2) else 0
                                     for c in range(1, dom.k + 1)))
        for v in dom.vertices:
            x = self.vertex_map[v]
            for n in degrees:
                for direction in ("source", "range"):
                    ups = morphisms_of_degree(dom, v, n, direction)
                    downs = morphisms_of_degree(cod, x, n, direction)
                    images = {tuple(self.edge_map[e] for e in m.edges)
                              for m in ups}
                    assert images == {m.edges for m in downs}, \
                        f"path bijectivity fails at {v!r}, degree {n}"

    def fiber(self, x):
        return self._fibers[x]

    def lift_from(self, base_edge, source_fiber_vertex):
        """The unique domain edge over base_edge with the given source."""
        return self._lift_from[(base_edge, source_fiber_vertex)]

    def lift_into(self, base_edge, range_fiber_vertex):
        """The unique domain edge over base_edge with the given range."""
        return self._lift_into[(base_edge, range_fiber_vertex)]

    def __repr__(self):
        return (f"CoveringMap({len(self.domain.vertices)} vertices over "
                f"{len(self.codomain.vertices)})")


def check_covering(domain, codomain, vertex_map, edge_map):
    """Validate the data of a covering map and return it."""
    return CoveringMap(domain, codomain, vertex_map, edge_map)


class GroupoidAction:
    """Action of the fundamental groupoid on fibers over the vertices.

    Presented concretely: disjoint fiber sets V_x and, for each skeleton
    edge a, a bijection from the fiber over s(a) to the fiber over r(a);
    the square identities are verified at construction.
    """

    __slots__ = ("base", "fibers", "edge_maps", "_inverse")

    def __init__(self, base, fibers, edge_maps):
        self.base = base
        if set(fibers) != set(base.vertices):
            raise ValueError("fibers must be indexed by the base vertices")
        self.fibers = {x: tuple(sorted(fibers[x], key=str))
                       for x in base.vertices}
        seen = {}
        for x in base.vertices:
            for pt in self.fibers[x]:
                if pt in seen:
                    raise ValueError(f"fiber point {pt!r} appears twice")
                seen[pt] = x
        if set(edge_maps) != set(base.edge_names):
            raise ValueError("edge_maps must be indexed by the base edges")
        self.edge_maps = {}
        self._inverse = {}
        for name in base.edge_names:
            e = base.edge(name)
            src = set(self.fibers[e.source])
            rng = set(self.fibers[e.range])
            bij = dict(edge_maps[name])
            if set(bij) != src or set(bij.values()) != rng or \
                    len(set(bij.values())) != len(bij):
                raise ValueError(
                    f"edge {name!r} must biject the source fiber onto the "
                    f"range fiber")
            self.edge_maps[name] = bij
            self._inverse[name] = {w: v for v, w in bij.items()}
        for quad in base.squares.quads:
            e, f, g, h = quad
            for pt in self.fibers[base.edge(f).source]:
                left = self.edge_maps[e][self.edge_maps[f][pt]]
                right = self.edge_maps[g][self.edge_maps[h][pt]]
                if left != right:
                    raise NotFunctorial(
                        f"square {quad} acts inconsistently at {pt!r}")

    def points(self):
        return tuple(pt for x in self.base.vertices for pt in self.fibers[x])

    def act(self, edge_name, pt):
        return self.edge_maps[edge_name][pt]

    def act_letter(self, letter, pt):
        name, sign = letter
        table = self.edge_maps[name] if sign > 0 else self._inverse[name]
        return table[pt]

    def act_word(self, word, pt):
        """Apply a groupoid word; the rightmost letter acts first."""
        for letter in reversed(word.letters):
            pt = self.act_letter(letter, pt)
        return pt

    def __repr__(self):
        return f"GroupoidAction({len(self.points())} points over {self.base!r})"


def covering_to_action(p):
    """Fibers p^-1(x) with each edge acting by lifting at the source."""
    base = p.codomain
    fibers = {x: p.fiber(x) for x in base.vertices}
    edge_maps = {}
    for name in base.edge_names:
        e = base.edge(name)
        edge_maps[name] = {
            v: p.domain.edge(p.lift_from(name, v)).range
            for v in fibers[e.source]}
    return GroupoidAction(base, fibers, edge_maps)


def action_to_covering(action):
    """The fiber-product covering of the base; ids are tagged 'x@point'."""
    base = action.base
    vid = {}
    for x in base.vertices:
        for pt in action.fibers[x]:
            vid[pt] = f"{x}@{pt}"
    vertices = sorted(vid.values())
    edges = []
    emap = {}
    vmap = {v: x for x in base.vertices for pt in action.fibers[x]
            for v in (f"{x}@{pt}",)}
    for name in base.edge_names:
        e = base.edge(name)
        for pt in action.fibers[e.source]:
            lifted = f"{name}@{pt}"
            edges.append(Edge(lifted, e.color, vid[pt],
                              vid[action.act(name, pt)]))
            emap[lifted] = name
    squares = []
    for quad in base.squares.quads:
        e, f, g, h = quad
        for pt in action.fibers[base.edge(f).source]:
            squares.append((f"{e}@{action.act(f, pt)}", f"{f}@{pt}",
                            f"{g}@{action.act(h, pt)}", f"{h}@{pt}"))
    product = KGraph(Skeleton(base.k, vertices, edges), SquareTable(squares))
    return CoveringMap(product, base, vmap, emap)


def is_transitive(action):
    """True iff one orbit under all edge bijections reaches every point."""
    points = action.points()
    if not points:
        return True
    seen = {points[0]}
    frontier = [points[0]]
    while frontier:
        pt = frontier.pop()
        for name in action.base.edge_names:
            for table in (action.edge_maps[name], action._inverse[name]):
                nxt = table.get(pt)
                if nxt is not None and nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
    return len(seen) == len(points)


@dataclass
class SubgroupData:
    """Stabilizer of a fiber vertex inside the base fundamental group.

    generators are Schreier words over the ambient presentation;
    permutations records how each ambient generator moves the fiber.
    """

    ambient: GroupPresentation
    generators: tuple
    basepoint: str
    fiber: tuple
    permutations: dict
    table: object = None


def stabilizer_subgroup(p, v):
    """Schreier generators of the stabilizer of v under the fiber action.

    The fundamental group of the base at x = p(v) acts on the fiber over
    x through the canonical cocycle: a generator (non-tree edge) a acts
    as the lift of t_{r(a)}^-1 a t_{s(a)}.
    """
    if not is_connected(p.domain):
        raise NotConnected("stabilizers need a connected covering")
    x = p.vertex_map[v]
    base = p.codomain
    tree = spanning_tree(base, x)
    presentation, _ = fundamental_group(base, x)
    action = covering_to_action(p)
    fiber = p.fiber(x)

    perms = {}
    for gen in presentation.generators:
        e = base.edge(gen)
        loop = tree.words[e.range].inverse() * Word.gen(gen) * tree.words[e.source]
        perms[gen] = {pt: action.act_word(loop, pt) for pt in fiber}

    reps = {v: Word()}
    order = [v]
    for pt in order:
        for gen in presentation.generators:
            for table in (perms[gen], {w: u for u, w in perms[gen].items()}):
                nxt = table[pt]
                if nxt not in reps:
                    sign = 1 if table is perms[gen] else -1
                    reps[nxt] = Word.gen(gen, sign) * reps[pt]
                    order.append(nxt)
    generators = []
    seen = set()
    for pt in order:
        for gen in presentation.generators:
            image = perms[gen][pt]
            word = reps[image].inverse() * Word.gen(gen) * reps[pt]
            if word and word not in seen:
                seen.add(word)
                generators.append(word)
    return SubgroupData(ambient=presentation, generators=tuple(generators),
                        basepoint=v, fiber=fiber, permutations=perms)


@dataclass
class CoveringMorphism:
    """Map of coverings over the same base: q o phi = p."""

    domain_covering: CoveringMap
    codomain_covering: CoveringMap
    vertex_map: dict
    edge_map: dict

    @property
    def is_isomorphism(self):
        dom = self.domain_covering.domain
        cod = self.codomain_covering.domain
        return (len(set(self.vertex_map.values())) == len(cod.vertices)
                and len(self.vertex_map) == len(dom.vertices)
                and len(set(self.edge_map.values())) == len(cod.edge_names)
                and len(self.edge_map) == len(dom.edge_names))

    def inverse(self):
        if not self.is_isomorphism:
            raise ValueError("not invertible")
        return CoveringMorphism(
            self.codomain_covering, self.domain_covering,
            {w: v for v, w in self.vertex_map.items()},
            {f: e for e, f in self.edge_map.items()})


def _verify_covering_morphism(p, q, vertex_map, edge_map):
    """Functoriality and compatibility checks shared by constructors."""
    dom = p.domain
    for e in dom.edge_names:
        rec = dom.edge(e)
        img = edge_map[e]
        other = q.domain.edge(img)
        assert other.color == rec.color
        assert vertex_map[rec.source] == other.source
        assert vertex_map[rec.range] == other.range
        assert q.edge_map[img] == p.edge_map[e]
    for v in dom.vertices:
        assert q.vertex_map[vertex_map[v]] == p.vertex_map[v]
    target_squares = set(q.domain.squares.quads)
    for quad in dom.squares.quads:
        image = tuple(edge_map[e] for e in quad)
        assert image in target_squares


def covering_morphism(p, q, v, u):
    """The unique morphism of coverings sending v to u, or None.

    Propagates phi(a.w) = a.phi(w) over the fiber orbit; a contradiction
    anywhere means the stabilizer of v is not contained in that of u and
    no morphism exists.
    """
    if p.codomain != q.codomain:
        raise ValueError("coverings have different bases")
    if v not in p.domain.vertices or u not in q.domain.vertices:
        raise ValueError("unknown fiber vertex")
    if p.vertex_map[v] != q.vertex_map[u]:
        raise BasepointMismatch(
            f"{v!r} sits over {p.vertex_map[v]!r} but {u!r} over "
            f"{q.vertex_map[u]!r}")
    if not is_connected(p.domain):
        raise NotConnected("morphism search needs a connected domain")
    base = p.codomain
    phi = {v: u}
    queue = [v]
    while queue:
        w = queue.pop(0)
        b = p.vertex_map[w]
        for name in base.edge_names:
            e = base.edge(name)
            steps = []
            if e.source == b:
                w2 = p.domain.edge(p.lift_from(name, w)).range
                u2 = q.domain.edge(q.lift_from(name, phi[w])).range
                steps.append((w2, u2))
            if e.range == b:
                w2 = p.domain.edge(p.lift_into(name, w)).source
                u2 = q.domain.edge(q.lift_into(name, phi[w])).source
                steps.append((w2, u2))
            for w2, u2 in steps:
                if w2 in phi:
                    if phi[w2] != u2:
                        return None
                else:
                    phi[w2] = u2
                    queue.append(w2)
    assert len(phi) == len(p.domain.vertices)
    edge_map = {}
    for e in p.domain.edge_names:
        rec = p.domain.edge(e)
        img = q.lift_from(p.edge_map[e], phi[rec.source])
        if q.domain.edge(img).range != phi[rec.range]:
            return None
        edge_map[e] = img
    morphism = CoveringMorphism(p, q, phi, edge_map)
    _verify_covering_morphism(p, q, phi, edge_map)
    return morphism


def are_isomorphic_coverings(p, q):
    """An isomorphism of coverings if one exists, else None.

    Tries the unique morphism onto every fiber vertex over the first base
    vertex and keeps an invertible one.
    """
    if p.codomain != q.codomain:
        raise ValueError("coverings have different bases")
    x = p.codomain.vertices[0]
    v = p.fiber(x)[0]
    for u in q.fiber(x):
        m = covering_morphism(p, q, v, u)
        if m is not None and m.is_isomorphism:
            return m
    return None


class Automorphism:
    """A k-graph automorphism: paired vertex and edge permutations."""

    __slots__ = ("graph", "vertex_map", "edge_map", "_key")

    def __init__(self, graph, vertex_map, edge_map):
        self.graph = graph
        self.vertex_map = {str(k): str(v) for k, v in vertex_map.items()}
        self.edge_map = {str(k): str(v) for k, v in edge_map.items()}
        if sorted(self.vertex_map) != sorted(self.vertex_map.values()) or \
                set(self.vertex_map) != set(graph.vertices):
            raise NotFunctorial("vertex map must permute the vertices")
        if sorted(self.edge_map) != sorted(self.edge_map.values()) or \
                set(self.edge_map) != set(graph.edge_names):
            raise NotFunctorial("edge map must permute the edges")
        for e in graph.edge_names:
            rec, img = graph.edge(e), graph.edge(self.edge_map[e])
            if img.color != rec.color:
                raise NotFunctorial(f"edge {e!r} changes color")
            if img.source != self.vertex_map[rec.source] or \
                    img.range != self.vertex_map[rec.range]:
                raise NotFunctorial(f"edge {e!r} breaks endpoints")
        squares = set(graph.squares.quads)
        for quad in graph.squares.quads:
            image = tuple(self.edge_map[e] for e in quad)
            if image not in squares:
                raise NotFunctorial(f"square {quad} is not preserved")
        self._key = (tuple(sorted(self.vertex_map.items())),
                     tuple(sorted(self.edge_map.items())))

    @classmethod
    def identity(cls, graph):
        return cls(graph, {v: v for v in graph.vertices},
                   {e: e for e in graph.edge_names})

    def is_identity(self):
        return all(k == v for k, v in self.vertex_map.items()) and \
            all(k == v for k, v in self.edge_map.items())

    def then(self, other):
        """Apply self first, then other (right-action composition)."""
        return Automorphism(
            self.graph,
            {v: other.vertex_map[w] for v, w in self.vertex_map.items()},
            {e: other.edge_map[f] for e, f in self.edge_map.items()})

    def inverse(self):
        return Automorphism(
            self.graph,
            {w: v for v, w in self.vertex_map.items()},
            {f: e for e, f in self.edge_map.items()})

    def __eq__(self, other):
        return (isinstance(other, Automorphism)
                and self.graph == other.graph
                and self._key == other._key)

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        moved = sum(1 for k, v in self.vertex_map.items() if k != v)
        return f"Automorphism({moved} vertices moved)"


@dataclass
class DeckGroup:
    """All automorphisms of a covering, with the normality certificate."""

    covering: CoveringMap
    elements: tuple
    transitive: bool

    @property
    def order(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)


def deck_group(p):
    """Deck transformations of a connected covering.

    Searches the unique morphism (p, v) -> (p, u) for every u in the
    fiber over the first base vertex; transitivity of the fiber action
    certifies normality of the stabilizer subgroup.
    """
    if not is_connected(p.domain):
        raise NotConnected("deck groups need a connected covering")
    x = p.codomain.vertices[0]
    fiber = p.fiber(x)
    v = fiber[0]
    autos = []
    for u in fiber:
        m = covering_morphism(p, p, v, u)
        if m is not None and m.is_isomorphism:
            autos.append(Automorphism(p.domain, m.vertex_map, m.edge_map))
    return DeckGroup(covering=p, elements=tuple(autos),
                     transitive=len(autos) == len(fiber))


@dataclass
class QuotientResult:
    kgraph: KGraph
    projection: CoveringMap
    induced: CoveringMap = None


def _check_group(graph, maps):
    maps = list(maps)
    if not maps:
        raise NotClosed("the action must contain at least the identity")
    for m in maps:
        if m.graph != graph:
            raise ValueError("automorphism of a different k-graph")
    keys = {m._key for m in maps}
    if len(keys) != len(maps):
        raise NotClosed("duplicate automorphisms supplied")
    if not any(m.is_identity() for m in maps):
        raise NotClosed("identity automorphism missing")
    index = {m._key: i for i, m in enumerate(maps)}
    for a in maps:
        for b in maps:
            if a.then(b)._key not in index:
                raise NotClosed("composition leaves the supplied list")
    return maps


def quotient(omega, maps, over=None):
    """Quotient k-graph by a finite free action of automorphisms.

    Returns the quotient, the orbit covering omega -> omega/G, and, when
    omega already covers a base G-invariantly through `over`, the induced
    covering omega/G -> base.  Orbit representatives are the
    lexicographically least members, so output ids are deterministic.
    """
    maps = _check_group(omega, maps)
    for m in maps:
        if m.is_identity():
            continue
        for v in omega.vertices:
            if m.vertex_map[v] == v:
                raise NotFree(v)

    vrep = {v: min(m.vertex_map[v] for m in maps) for v in omega.vertices}
    erep = {e: min(m.edge_map[e] for m in maps) for e in omega.edge_names}
    vertices = sorted(set(vrep.values()))
    edges = []
    for name in sorted(set(erep.values())):
        rec = omega.edge(name)
        edges.append(Edge(name, rec.color, vrep[rec.source], vrep[rec.range]))
    squares = {tuple(erep[e] for e in quad) for quad in omega.squares.quads}
    quot = KGraph(Skeleton(omega.k, vertices, edges), SquareTable(squares))
    projection = CoveringMap(omega, quot, vrep, erep)

    induced = None
    if over is not None:
        if over.domain != omega:
            raise ValueError("`over` must cover from the quotiented k-graph")
        for m in maps:
            for v in omega.vertices:
                if over.vertex_map[m.vertex_map[v]] != over.vertex_map[v]:
                    raise NotFunctorial("the action does not preserve `over`")
            for e in omega.edge_names:
                if over.edge_map[m.edge_map[e]] != over.edge_map[e]:
                    raise NotFunctorial("the action does not preserve `over`")
        induced = CoveringMap(
            quot, over.codomain,
            {v: over.vertex_map[v] for v in vertices},
            {e: over.edge_map[e] for e in quot.edge_names})
    return QuotientResult(kgraph=quot, projection=projection, induced=induced)
