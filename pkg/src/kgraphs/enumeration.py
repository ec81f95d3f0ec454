"""Coset enumeration, low-index subgroups, and covering classification.

Coset tables follow the usual right-coset convention: row 0 is the
subgroup, columns alternate generator and inverse, and tracing a word
applies its letters left to right.  Completed tables are standardized:
cosets are numbered in first-encounter order scanning rows with columns
in generator order.
"""

from __future__ import annotations

from .core import is_connected
from .errors import CosetOverflow, NotConnected
from .fundamental import GroupPresentation, Word


class CosetTable:
    """Completed, standardized coset table of a subgroup."""

    __slots__ = ("generators", "table", "complete", "subgroup_generators",
                 "_rep_words")

    def __init__(self, generators, table, complete=True,
                 subgroup_generators=()):
        self.generators = tuple(str(g) for g in generators)
        self.table = tuple(tuple(int(x) for x in row) for row in table)
        ncols = 2 * len(self.generators)
        for row in self.table:
            if len(row) != ncols:
                raise ValueError("row width must be twice the generator count")
        self.complete = bool(complete)
        self.subgroup_generators = tuple(subgroup_generators)
        self._rep_words = None

    @property
    def n(self):
        return len(self.table)

    def col(self, gen, sign=1):
        i = self.generators.index(gen)
        return 2 * i + (0 if sign > 0 else 1)

    def apply(self, coset, gen, sign=1):
        return self.table[coset][self.col(gen, sign)]

    def trace(self, start, word):
        """start * word, applying letters left to right."""
        c = start
        for g, s in word.letters:
            c = self.table[c][self.col(g, s)]
        return c

    def column(self, gen, sign=1):
        """The permutation a generator induces on cosets, as a tuple."""
        x = self.col(gen, sign)
        return tuple(row[x] for row in self.table)

    def rep_words(self):
        """Canonical representative word per coset (first-encounter BFS)."""
        if self._rep_words is None:
            words = {0: Word()}
            order = [0]
            for c in order:
                for x in range(2 * len(self.generators)):
                    t = self.table[c][x]
                    if t not in words:
                        g = self.generators[x // 2]
                        s = 1 if x % 2 == 0 else -1
                        words[t] = words[c] * Word.gen(g, s)
                        order.append(t)
            self._rep_words = tuple(words[c] for c in range(self.n))
        return self._rep_words

    def __eq__(self, other):
        return (isinstance(other, CosetTable)
                and self.generators == other.generators
                and self.table == other.table)

    def __hash__(self):
        return hash((self.generators, self.table))

    def __repr__(self):
        return f"CosetTable({self.n} cosets over {self.generators})"


def _word_cols(word, gen_index):
    cols = []
    for g, s in word.letters:
        i = gen_index[g]
        cols.append(2 * i + (0 if s > 0 else 1))
    return cols


def _standardize_rows(rows, start=0):
    """Renumber cosets in first-encounter order from `start`."""
    n = len(rows)
    ncols = len(rows[0]) if rows else 0
    new = {start: 0}
    order = [start]
    for c in order:
        for x in range(ncols):
            t = rows[c][x]
            if t not in new:
                new[t] = len(order)
                order.append(t)
    if len(order) != n:
        raise ValueError("table is not transitive")
    out = [[0] * ncols for _ in range(n)]
    for c in range(n):
        for x in range(ncols):
            out[new[c]][x] = new[rows[c][x]]
    return tuple(tuple(row) for row in out)


def todd_coxeter(presentation, h_gens=(), max_cosets=10000):
    """Enumerate cosets of the subgroup generated by h_gens.

    HLT strategy: subgroup generators are scanned at coset 0, then every
    live coset scans every relator, with remaining row entries defined
    directly.  Coincidences are merged through a union queue.  Raises
    CosetOverflow as soon as more than max_cosets cosets are live.
    """
    gens = presentation.generators
    gen_index = {g: i for i, g in enumerate(gens)}
    ncols = 2 * len(gens)
    relator_cols = [_word_cols(w, gen_index) for w in presentation.relators if w]
    subgroup_cols = [_word_cols(w, gen_index) for w in h_gens if w]

    table = [[None] * ncols]
    parent = [0]
    live = 1

    def rep(k):
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    def define(a, x):
        nonlocal live
        if live >= max_cosets:
            raise CosetOverflow(max_cosets)
        b = len(table)
        table.append([None] * ncols)
        parent.append(b)
        live += 1
        table[a][x] = b
        table[b][x ^ 1] = a

    def coincidence(a, b):
        nonlocal live
        queue = []

        def merge(i, j):
            nonlocal live
            i, j = rep(i), rep(j)
            if i != j:
                lo, hi = min(i, j), max(i, j)
                parent[hi] = lo
                live -= 1
                queue.append(hi)

        merge(a, b)
        while queue:
            dead = queue.pop(0)
            row = table[dead]
            for x in range(ncols):
                d = row[x]
                if d is None:
                    continue
                # detach the mirror entry, then replay the fact rep(dead)^x = rep(d)
                table[d][x ^ 1] = None
                u, v = rep(dead), rep(d)
                if table[u][x] is not None:
                    merge(v, table[u][x])
                elif table[v][x ^ 1] is not None:
                    merge(u, table[v][x ^ 1])
                else:
                    table[u][x] = v
                    table[v][x ^ 1] = u

    def scan_and_fill(a, cols):
        f, i = a, 0
        b, j = a, len(cols) - 1
        while True:
            while i <= j and table[f][cols[i]] is not None:
                f = table[f][cols[i]]
                i += 1
            if i > j:
                if f != b:
                    coincidence(f, b)
                return
            while j >= i and table[b][cols[j] ^ 1] is not None:
                b = table[b][cols[j] ^ 1]
                j -= 1
            if j < i:
                if f != b:
                    coincidence(f, b)
                return
            if j == i:
                table[f][cols[i]] = b
                table[b][cols[i] ^ 1] = f
                return
            define(f, cols[i])

    for cols in subgroup_cols:
        scan_and_fill(0, cols)
    a = 0
    while a < len(table):
        if rep(a) == a:
            for cols in relator_cols:
                scan_and_fill(a, cols)
                if rep(a) != a:
                    break
            if rep(a) == a:
                for x in range(ncols):
                    if table[a][x] is None:
                        define(a, x)
        a += 1

    alive = [c for c in range(len(table)) if rep(c) == c]
    new = {old: i for i, old in enumerate(alive)}
    rows = [[new[rep(table[c][x])] for x in range(ncols)] for c in alive]
    rows = _standardize_rows(rows)
    result = CosetTable(gens, rows, complete=True,
                        subgroup_generators=tuple(h_gens))
    # closing sanity: relators fix every coset, subgroup generators fix 0
    for w in presentation.relators:
        for c in range(result.n):
            assert result.trace(c, w) == c
    for w in h_gens:
        assert result.trace(0, w) == 0
    return result


_OK, _DEDUCED, _BAD, _GAP = 0, 1, 2, 3


def _scan_partial(rows, a, cols):
    """Relator scan without defining; fills one-entry gaps."""
    f, i = a, 0
    b, j = a, len(cols) - 1
    while True:
        while i <= j and rows[f][cols[i]] is not None:
            f = rows[f][cols[i]]
            i += 1
        if i > j:
            return _OK if f == b else _BAD
        while j >= i and rows[b][cols[j] ^ 1] is not None:
            b = rows[b][cols[j] ^ 1]
            j -= 1
        if j < i:
            return _OK if f == b else _BAD
        if j == i:
            rows[f][cols[i]] = b
            rows[b][cols[i] ^ 1] = f
            return _DEDUCED
        return _GAP


def _propagate(rows, relator_cols):
    changed = True
    while changed:
        changed = False
        for a in range(len(rows)):
            for cols in relator_cols:
                r = _scan_partial(rows, a, cols)
                if r == _BAD:
                    return False
                if r == _DEDUCED:
                    changed = True
    return True


def _all_subgroup_tables(presentation, n):
    """Every standardized coset table with at most n cosets.

    One table per subgroup of index <= n (a table is a transitive
    permutation representation with a basepoint).  Deterministic DFS:
    the first empty slot in row-major order is filled with candidate
    targets ascending, a fresh coset last.
    """
    if n < 1:
        raise ValueError("index bound must be at least 1")
    gens = presentation.generators
    gen_index = {g: i for i, g in enumerate(gens)}
    ncols = 2 * len(gens)
    if ncols == 0:
        return [((),)]
    relator_cols = [_word_cols(w, gen_index) for w in presentation.relators if w]
    results = []

    def first_hole(rows):
        for a, row in enumerate(rows):
            for x in range(ncols):
                if row[x] is None:
                    return a, x
        return None

    def search(rows):
        hole = first_hole(rows)
        if hole is None:
            for cols in relator_cols:
                for a in range(len(rows)):
                    f = a
                    for x in cols:
                        f = rows[f][x]
                    assert f == a
            results.append(tuple(tuple(row) for row in rows))
            return
        a, x = hole
        candidates = [b for b in range(len(rows)) if rows[b][x ^ 1] is None]
        if len(rows) < n:
            candidates.append(len(rows))
        for b in candidates:
            nxt = [row[:] for row in rows]
            if b == len(nxt):
                nxt.append([None] * ncols)
            nxt[a][x] = b
            nxt[b][x ^ 1] = a
            if _propagate(nxt, relator_cols):
                search(nxt)

    search([[None] * ncols])
    return results


def low_index_subgroups(presentation, n):
    """Conjugacy classes of subgroups of index <= n, as coset tables.

    Each class is represented by the lexicographically least standardized
    table among its conjugates (the tables obtained by re-basing at each
    coset), and the list is sorted by (index, table).
    """
    classes = set()
    for rows in _all_subgroup_tables(presentation, n):
        canonical = min(_standardize_rows(rows, start=b)
                        for b in range(len(rows)))
        classes.add(canonical)
    ordered = sorted(classes, key=lambda rows: (len(rows), rows))
    return tuple(CosetTable(presentation.generators, rows) for rows in ordered)


def normalizer_cosets(table):
    """Cosets whose re-based table equals the given standardized table.

    These are the cosets wH with w in the normalizer N(H); their count is
    the order of N(H)/H.
    """
    rows = table.table
    return tuple(b for b in range(table.n)
                 if _standardize_rows(rows, start=b) == rows)


def classify_coverings(g, x, n):
    """All connected coverings of g with at most n sheets, up to iso.

    One covering per conjugacy class of index <= n subgroups of the
    fundamental group at x, realized over the class's coset table via
    the canonical cocycle.  Cross-checks run before returning: the list
    is pairwise non-isomorphic and each entry's Schreier stabilizer acts
    on the fiber exactly as the defining table acts on cosets; a failure
    of either is a bug, not a warning.
    """
    from .coverings import are_isomorphic_coverings, stabilizer_subgroup
    from .skew import cover_from_coset_table

    if not is_connected(g):
        raise NotConnected("classification needs a connected k-graph")
    from .fundamental import canonical_cocycle
    cocycle = canonical_cocycle(g, x)
    tables = low_index_subgroups(cocycle.target, n)
    covers = tuple(cover_from_coset_table(g, cocycle, t) for t in tables)

    for i, p in enumerate(covers):
        assert is_connected(p.domain), "emitted covering must be connected"
        for q in covers[i + 1:]:
            assert are_isomorphic_coverings(p, q) is None, \
                "distinct conjugacy classes produced isomorphic coverings"
    for table, p in zip(tables, covers):
        data = stabilizer_subgroup(p, f"{x}@0")
        for gen, perm in data.permutations.items():
            for i in range(table.n):
                image = table.trace(i, Word.gen(gen, -1))
                assert perm[f"{x}@{i}"] == f"{x}@{image}", \
                    "stabilizer action disagrees with the coset table"
    return covers
