"""Weighted dual graphs of snc-divisors and their exact numerical invariants.

A :class:`WeightedGraph` stores one vertex per irreducible component (its
self-intersection as ``weight`` and its geometric genus) and one edge per
intersection point.  Chains are written in bracket notation
``[a1, ..., an]`` where ``ai = -weight``; the conversion is always explicit.

All arithmetic is done with :class:`int` and :class:`fractions.Fraction`.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

VertexId = Hashable


class Vertex(NamedTuple):
    id: VertexId
    weight: int
    genus: int = 0


def _edge_key(u, v) -> frozenset:
    return frozenset((u, v))


class WeightedGraph:
    """Immutable weighted multigraph without self-loops.

    Vertices keep their insertion order, which is the order used for
    intersection matrices.  Equality ignores that order.
    """

    __slots__ = ("_vertices", "_order", "_edges", "_adj", "_comps")

    def __init__(self, vertices: Iterable = (), edges: Iterable = ()):
        verts: Dict[VertexId, Vertex] = {}
        for v in vertices:
            if not isinstance(v, Vertex):
                v = Vertex(*v)
            if v.id in verts:
                raise ValueError(f"duplicate vertex id {v.id!r}")
            if v.genus < 0:
                raise ValueError(f"negative genus on vertex {v.id!r}")
            verts[v.id] = Vertex(v.id, int(v.weight), int(v.genus))
        edge_list: List[Tuple[VertexId, VertexId]] = []
        adj: Dict[VertexId, List[VertexId]] = {i: [] for i in verts}
        for u, v in edges:
            if u not in verts or v not in verts:
                raise ValueError(f"edge ({u!r}, {v!r}) has a missing endpoint")
            if u == v:
                raise ValueError(f"self-loop at {u!r}")
            edge_list.append((u, v))
            adj[u].append(v)
            adj[v].append(u)
        self._vertices = verts
        self._order = tuple(verts)
        self._edges = tuple(edge_list)
        self._adj = {k: tuple(w) for k, w in adj.items()}
        self._comps = None

    # -- construction helpers -------------------------------------------------
    @classmethod
    def chain(cls, entries: Sequence[int], ids: Optional[Sequence[VertexId]] = None) -> "WeightedGraph":
        """Chain from bracket entries, so ``chain([2, 1])`` has weights -2, -1."""
        entries = list(entries)
        if ids is None:
            ids = list(range(len(entries)))
        if len(ids) != len(entries):
            raise ValueError("ids and entries differ in length")
        verts = [Vertex(i, -int(a)) for i, a in zip(ids, entries)]
        edges = [(ids[k], ids[k + 1]) for k in range(len(ids) - 1)]
        return cls(verts, edges)

    @classmethod
    def star(cls, center_weight: int, arms: Sequence[Sequence[int]], center_genus: int = 0) -> "WeightedGraph":
        """Center vertex ``"c"`` with chain arms given in bracket notation.

        Arm ``k`` has vertex ids ``(k, 0), (k, 1), ...`` starting next to
        the center.
        """
        verts = [Vertex("c", center_weight, center_genus)]
        edges = []
        for k, arm in enumerate(arms):
            prev = "c"
            for j, a in enumerate(arm):
                verts.append(Vertex((k, j), -int(a)))
                edges.append((prev, (k, j)))
                prev = (k, j)
        return cls(verts, edges)

    # -- accessors --------------------------------------------------------------
    @property
    def vertices(self) -> Tuple[Vertex, ...]:
        return tuple(self._vertices[i] for i in self._order)

    @property
    def edges(self) -> Tuple[Tuple[VertexId, VertexId], ...]:
        return self._edges

    def ids(self) -> Tuple[VertexId, ...]:
        return self._order

    def __len__(self):
        return len(self._order)

    def __contains__(self, v):
        return v in self._vertices

    def __iter__(self):
        return iter(self._order)

    def vertex(self, v) -> Vertex:
        try:
            return self._vertices[v]
        except KeyError:
            raise KeyError(f"unknown vertex id {v!r}") from None

    def weight(self, v) -> int:
        return self.vertex(v).weight

    def genus(self, v) -> int:
        return self.vertex(v).genus

    def neighbors(self, v) -> Tuple[VertexId, ...]:
        """Neighbors with repetition for multiple edges."""
        self.vertex(v)
        return self._adj[v]

    def degree(self, v) -> int:
        return len(self.neighbors(v))

    def edge_multiplicity(self, u, v) -> int:
        return self.neighbors(u).count(v)

    # -- equality ---------------------------------------------------------------
    def _key(self):
        edges = Counter(_edge_key(u, v) for u, v in self._edges)
        return (frozenset(self._vertices.values()), frozenset(edges.items()))

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.is_chain():
            return f"WeightedGraph.chain({chain_entries(self)})"
        vs = ", ".join(f"{v.id!r}:{v.weight}" + (f"g{v.genus}" if v.genus else "") for v in self.vertices)
        return f"WeightedGraph({vs}; edges={list(self._edges)})"

    # -- functional updates -----------------------------------------------------
    def with_weight(self, v, weight: int) -> "WeightedGraph":
        old = self.vertex(v)
        verts = [Vertex(x.id, weight, x.genus) if x.id == v else x for x in self.vertices]
        del old
        return WeightedGraph(verts, self._edges)

    def with_weights(self, changes: Mapping) -> "WeightedGraph":
        for v in changes:
            self.vertex(v)
        verts = [Vertex(x.id, changes.get(x.id, x.weight), x.genus) for x in self.vertices]
        return WeightedGraph(verts, self._edges)

    def add_vertex(self, v, weight: int, genus: int = 0) -> "WeightedGraph":
        return WeightedGraph(list(self.vertices) + [Vertex(v, weight, genus)], self._edges)

    def add_edge(self, u, v) -> "WeightedGraph":
        return WeightedGraph(self.vertices, list(self._edges) + [(u, v)])

    def remove_edge(self, u, v) -> "WeightedGraph":
        edges = list(self._edges)
        for k, (a, b) in enumerate(edges):
            if _edge_key(a, b) == _edge_key(u, v):
                del edges[k]
                return WeightedGraph(self.vertices, edges)
        raise KeyError(f"no edge between {u!r} and {v!r}")

    def remove_vertex(self, v) -> "WeightedGraph":
        self.vertex(v)
        verts = [x for x in self.vertices if x.id != v]
        edges = [(a, b) for a, b in self._edges if a != v and b != v]
        return WeightedGraph(verts, edges)

    def subgraph(self, ids: Iterable) -> "WeightedGraph":
        keep = set(ids)
        for v in keep:
            self.vertex(v)
        verts = [x for x in self.vertices if x.id in keep]
        edges = [(a, b) for a, b in self._edges if a in keep and b in keep]
        return WeightedGraph(verts, edges)

    def without(self, ids: Iterable) -> "WeightedGraph":
        drop = set(ids)
        return self.subgraph(v for v in self._order if v not in drop)

    def relabel(self, mapping: Mapping) -> "WeightedGraph":
        f = lambda v: mapping.get(v, v)
        verts = [Vertex(f(x.id), x.weight, x.genus) for x in self.vertices]
        return WeightedGraph(verts, [(f(a), f(b)) for a, b in self._edges])

    def union(self, other: "WeightedGraph") -> "WeightedGraph":
        return WeightedGraph(list(self.vertices) + list(other.vertices), list(self._edges) + list(other.edges))

    # -- topology ---------------------------------------------------------------
    def components(self) -> List[List[VertexId]]:
        if self._comps is None:
            self._comps = self._find_components()
        return [list(c) for c in self._comps]

    def _find_components(self) -> List[List[VertexId]]:
        seen = set()
        comps = []
        order = None
        for s in self._order:
            if s in seen:
                continue
            comp = []
            stack = [s]
            seen.add(s)
            while stack:
                x = stack.pop()
                comp.append(x)
                for y in self._adj[x]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            if len(comp) == len(self._order):
                comps.append(list(self._order))
                continue
            if order is None:
                order = {v: k for k, v in enumerate(self._order)}
            comps.append(sorted(comp, key=order.__getitem__))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def is_forest(self) -> bool:
        return len(self._edges) == len(self._order) - len(self.components())

    def is_tree(self) -> bool:
        return len(self._order) > 0 and self.is_connected() and self.is_forest()

    def first_betti_number(self) -> int:
        return len(self._edges) - len(self._order) + len(self.components())

    def is_chain(self) -> bool:
        """Connected, nonempty, linear."""
        if not self._order or not self.is_tree():
            return False
        return all(len(self._adj[v]) <= 2 for v in self._order)

    def chain_order(self, start=None) -> List[VertexId]:
        """Vertex ids of a chain read from ``start`` (default: first tip in insertion order)."""
        if not self.is_chain():
            raise ValueError("graph is not a chain")
        if start is None:
            start = next(v for v in self._order if len(self._adj[v]) <= 1)
        elif len(self._adj[start]) > 1:
            raise ValueError(f"{start!r} is not a tip of the chain")
        out = [start]
        prev = None
        cur = start
        while True:
            nxt = [y for y in self._adj[cur] if y != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            out.append(cur)
        return out


def chain_entries(g: WeightedGraph, start=None) -> List[int]:
    """Bracket entries of a chain graph, read from ``start``."""
    return [-g.weight(v) for v in g.chain_order(start)]


@dataclass(frozen=True)
class Chain:
    """Ordered chain ``[a1, ..., an]`` with ``ai = -weight`` of the i-th vertex."""

    entries: Tuple[int, ...]

    def __init__(self, entries: Iterable[int]):
        object.__setattr__(self, "entries", tuple(int(a) for a in entries))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, k):
        return self.entries[k]

    def reversed(self) -> "Chain":
        return Chain(self.entries[::-1])

    def is_admissible(self) -> bool:
        return all(a >= 2 for a in self.entries)

    def to_graph(self, ids=None) -> WeightedGraph:
        return WeightedGraph.chain(self.entries, ids)

    def __repr__(self):
        return "[" + ",".join(str(a) for a in self.entries) + "]"


def as_chain(c) -> Chain:
    if isinstance(c, Chain):
        return c
    if isinstance(c, WeightedGraph):
        return Chain(chain_entries(c))
    return Chain(c)


# -- linear algebra -------------------------------------------------------------

def intersection_matrix(g: WeightedGraph) -> List[List[int]]:
    """Intersection matrix in insertion order: weights on the diagonal, edge counts off it."""
    ids = g.ids()
    index = {v: k for k, v in enumerate(ids)}
    n = len(ids)
    q = [[0] * n for _ in range(n)]
    for k, v in enumerate(ids):
        q[k][k] = g.weight(v)
    for u, v in g.edges:
        q[index[u]][index[v]] += 1
        q[index[v]][index[u]] += 1
    return q


def bareiss_determinant(m: Sequence[Sequence[int]]) -> int:
    """Fraction-free Gaussian elimination with row pivoting; exact for integers."""
    a = [list(row) for row in m]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def leading_minors(m: Sequence[Sequence[int]]) -> List[int]:
    """All leading principal minors, computed by Bareiss elimination without pivoting.

    After a zero pivot the remaining minors are computed directly.
    """
    n = len(m)
    a = [list(row) for row in m]
    out = []
    prev = 1
    for k in range(n):
        piv = a[k][k]
        out.append(piv)
        if piv == 0:
            out.extend(bareiss_determinant([row[: j + 1] for row in m[: j + 1]]) for j in range(k + 1, n))
            return out
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * piv - a[i][k] * a[k][j]) // prev
        prev = piv
    return out


def discriminant(g: WeightedGraph) -> int:
    """``det(-Q(g))``, equal to 1 for the empty graph."""
    q = intersection_matrix(g)
    return bareiss_determinant([[-x for x in row] for row in q])


def chain_discriminant(entries: Sequence[int]) -> int:
    """Continuant recursion for a chain in bracket notation."""
    prev, cur = 0, 1
    for a in entries:
        prev, cur = cur, a * cur - prev
    return cur


def is_negative_definite(g: WeightedGraph) -> bool:
    """Sylvester's test on ``-Q(g)`` in insertion order."""
    q = intersection_matrix(g)
    return all(x > 0 for x in leading_minors([[-x for x in row] for row in q]))


def solve_rational(a: Sequence[Sequence], b: Sequence) -> List[Fraction]:
    """Solve ``a x = b`` exactly; raises ``ValueError`` when ``a`` is singular."""
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(a, b)]
    for k in range(n):
        piv = next((r for r in range(k, n) if m[r][k] != 0), None)
        if piv is None:
            raise ValueError("singular linear system")
        m[k], m[piv] = m[piv], m[k]
        for r in range(n):
            if r != k and m[r][k] != 0:
                f = m[r][k] / m[k][k]
                m[r] = [x - f * y for x, y in zip(m[r], m[k])]
    return [m[k][n] / m[k][k] for k in range(n)]


# -- structure ----------------------------------------------------------------

def branching_number(g: WeightedGraph, v) -> int:
    return g.degree(v)


def is_admissible_vertex(g: WeightedGraph, v) -> bool:
    return g.weight(v) <= -2 and g.genus(v) == 0


def is_admissible_chain(g: WeightedGraph) -> bool:
    return g.is_chain() and all(is_admissible_vertex(g, v) for v in g)


def e_invariant(c) -> Fraction:
    """``d(c - c1) / d(c)`` for a nonempty admissible chain read from its first entry."""
    c = as_chain(c)
    if not len(c):
        raise ValueError("e is undefined for the empty chain")
    if not c.is_admissible():
        raise ValueError(f"chain {c} is not admissible")
    return Fraction(chain_discriminant(c.entries[1:]), chain_discriminant(c.entries))


def tilde_e(c) -> Fraction:
    return e_invariant(as_chain(c).reversed())


def e_invariant_raw(c) -> Tuple[int, int]:
    """Unreduced ``(d(c - c1), d(c))``; for chains these are already coprime."""
    c = as_chain(c)
    return chain_discriminant(c.entries[1:]), chain_discriminant(c.entries)


def maximal_admissible_twigs(g: WeightedGraph) -> List[List[VertexId]]:
    """Maximal admissible twigs, each listed tip first.

    A twig starts at a tip of ``g`` and runs along degree-2 vertices; it is
    admissible when its vertices are rational with weight at most -2.
    Components that are admissible chains are rejected because their
    orientation is not determined.
    """
    if not g.is_forest():
        raise ValueError("graph is not a forest")
    twigs = []
    for comp in g.components():
        sub = g.subgraph(comp)
        if is_admissible_chain(sub):
            raise ValueError("an admissible chain component has no preferred tip")
        for tip in comp:
            if g.degree(tip) != 1 or not is_admissible_vertex(g, tip):
                continue
            twig = [tip]
            prev, cur = None, tip
            while True:
                nxt = [y for y in g.neighbors(cur) if y != prev]
                if len(nxt) != 1:
                    break
                y = nxt[0]
                if g.degree(y) != 2 or not is_admissible_vertex(g, y):
                    break
                twig.append(y)
                prev, cur = cur, y
            twigs.append(twig)
    return twigs


def e_sum_over_twigs(g: WeightedGraph) -> Fraction:
    total = Fraction(0)
    for twig in maximal_admissible_twigs(g):
        total += e_invariant([-g.weight(v) for v in twig])
    return total


# -- divisors -------------------------------------------------------------------

@dataclass(frozen=True)
class MultiDivisor:
    """Rational combination of the components of ``graph``."""

    graph: WeightedGraph
    coefficients: Mapping = field(default_factory=dict)

    def __post_init__(self):
        coeffs = {k: Fraction(v) for k, v in dict(self.coefficients).items()}
        for k in coeffs:
            self.graph.vertex(k)
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def reduced(cls, g: WeightedGraph) -> "MultiDivisor":
        return cls(g, {v: 1 for v in g})

    def coefficient(self, v) -> Fraction:
        return self.coefficients.get(v, Fraction(0))

    def __add__(self, other: "MultiDivisor") -> "MultiDivisor":
        keys = set(self.coefficients) | set(other.coefficients)
        return MultiDivisor(self.graph, {k: self.coefficient(k) + other.coefficient(k) for k in keys})

    def dot_vertex(self, v) -> Fraction:
        """Intersection number with the component ``v``."""
        g = self.graph
        s = self.coefficient(v) * g.weight(v)
        for y in g.neighbors(v):
            s += self.coefficient(y)
        return s

    def dot(self, other: "MultiDivisor") -> Fraction:
        return sum((c * other.dot_vertex(v) for v, c in self.coefficients.items()), Fraction(0))

    def canonical_degree(self) -> Fraction:
        """``K . D`` by adjunction, ``K . T = 2 g(T) - 2 - T^2``."""
        g = self.graph
        return sum((c * (2 * g.genus(v) - 2 - g.weight(v)) for v, c in self.coefficients.items()), Fraction(0))


def canonical_dot(g: WeightedGraph, v) -> int:
    return 2 * g.genus(v) - 2 - g.weight(v)


def arithmetic_genus(d: MultiDivisor) -> Fraction:
    """``p_a(D) = (D.K + D.D)/2 + 1``."""
    return (d.canonical_degree() + d.dot(d)) / 2 + 1


def bark(g: WeightedGraph, support: Iterable) -> MultiDivisor:
    """Solve ``(K + D - Bk) . Di = 0`` for ``Di`` in ``support``, ``D`` the reduced divisor of ``g``."""
    sup = [v for v in g.ids() if v in set(support)]
    missing = set(support) - set(sup)
    if missing:
        raise KeyError(f"unknown vertex ids {sorted(map(repr, missing))}")
    index = {v: k for k, v in enumerate(sup)}
    n = len(sup)
    a = [[0] * n for _ in range(n)]
    rhs = []
    for i, v in enumerate(sup):
        a[i][i] = g.weight(v)
        for y in g.neighbors(v):
            if y in index:
                a[i][index[y]] += 1
        # (K + D) . Dv = 2g - 2 + degree
        rhs.append(2 * g.genus(v) - 2 + g.degree(v))
    try:
        x = solve_rational(a, rhs)
    except ValueError:
        raise ValueError("bark system is singular; support is not admissible") from None
    return MultiDivisor(g, dict(zip(sup, x)))


def twig_bark(g: WeightedGraph) -> MultiDivisor:
    support = [v for twig in maximal_admissible_twigs(g) for v in twig]
    return bark(g, support)


# -- singularity descriptors -------------------------------------------------------

@dataclass(frozen=True)
class SingularityType:
    kind: str  # CYCLIC, FORK or NON_QUOTIENT
    order: Optional[int] = None
    fork_type: Optional[Tuple[int, int, int]] = None
    topologically_rational: bool = True

    def label(self) -> str:
        if self.kind == "CYCLIC":
            return f"CYCLIC({self.order})"
        if self.kind == "FORK":
            return "FORK(" + ",".join(map(str, self.fork_type)) + f"; {self.order})"
        return "NON_QUOTIENT"


def is_topologically_rational(g: WeightedGraph) -> bool:
    return g.is_tree() and all(g.genus(v) == 0 for v in g)


def fork_twigs(g: WeightedGraph):
    """``(center, [twig, twig, twig])`` for a tree with one branching vertex of degree 3.

    Twigs are listed tip first.  Returns ``None`` for other shapes.
    """
    if not g.is_tree():
        return None
    branching = [v for v in g if g.degree(v) >= 3]
    if len(branching) != 1 or g.degree(branching[0]) != 3:
        return None
    center = branching[0]
    twigs = []
    for start in g.neighbors(center):
        arm = [start]
        prev, cur = center, start
        while True:
            nxt = [y for y in g.neighbors(cur) if y != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            arm.append(cur)
        twigs.append(arm[::-1])
    return center, twigs


def classify_singularity(g: WeightedGraph) -> SingularityType:
    """Quotient-type classification of a resolution graph.

    Admissible chains are cyclic of order ``d(g)``; admissible forks whose
    twig discriminants form a Platonic triple are non-cyclic quotients.
    """
    if not g.is_connected() or not len(g):
        raise ValueError("graph must be connected and nonempty")
    if not is_negative_definite(g):
        raise ValueError("graph is not negative definite")
    top = is_topologically_rational(g)
    d = discriminant(g)
    if not top:
        return SingularityType("NON_QUOTIENT", topologically_rational=False)
    if is_admissible_chain(g):
        return SingularityType("CYCLIC", order=d)
    shape = fork_twigs(g)
    if shape is not None:
        center, twigs = shape
        if all(is_admissible_vertex(g, v) for t in twigs for v in t):
            ds = tuple(sorted(discriminant(g.subgraph(t)) for t in twigs))
            if sum(Fraction(1, x) for x in ds) > 1:
                return SingularityType("FORK", order=d, fork_type=ds)
    return SingularityType("NON_QUOTIENT", topologically_rational=top)


def characteristic_polynomial(m: Sequence[Sequence[int]]) -> List[int]:
    """Coefficients of ``det(x I - m)``, leading coefficient first (Faddeev-LeVerrier).

    For an integer matrix every division by ``k`` is exact, so the
    recursion stays in integers.
    """
    n = len(m)
    coeffs = [1]
    a = [[int(x) for x in row] for row in m]
    mk = [[int(i == j) for j in range(n)] for i in range(n)]
    cols = range(n)
    for k in range(1, n + 1):
        am = [[sum(row[t] * mk[t][j] for t in cols) for j in cols] for row in a]
        tr = sum(am[i][i] for i in cols)
        assert tr % k == 0
        c = -tr // k
        coeffs.append(c)
        for i in cols:
            am[i][i] += c
        mk = am
    return coeffs


def inertia(g: WeightedGraph) -> Tuple[int, int, int]:
    """``(positive, negative, zero)`` eigenvalue counts of the intersection form.

    The characteristic polynomial of a symmetric matrix has only real roots,
    so Descartes' rule of signs counts the positive ones exactly.
    """
    q = intersection_matrix(g)
    n = len(q)
    coeffs = characteristic_polynomial(q)
    zero = 0
    while coeffs and coeffs[-1] == 0 and zero < n:
        coeffs.pop()
        zero += 1

    def changes(cs):
        signs = [c > 0 for c in cs if c != 0]
        return sum(1 for s, t in zip(signs, signs[1:]) if s != t)

    pos = changes(coeffs)
    return pos, n - pos - zero, zero


def hirzebruch_jung(p: int, q: int) -> List[int]:
    """Entries of ``p/q = a1 - 1/(a2 - 1/(...))`` with all ``ai >= 2``; needs ``0 < q < p`` coprime.

    The chain ``c`` returned has ``d(c) = p`` and ``d(c - c1) = q``, so
    ``e(c) = q/p``.
    """
    from math import gcd

    if not (0 < q < p) or gcd(p, q) != 1:
        raise ValueError(f"need coprime 0 < q < p, got p={p}, q={q}")
    out = []
    while q:
        a = -(-p // q)
        out.append(a)
        p, q = q, a * q - p
    return out
