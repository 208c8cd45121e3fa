"""Blowups, blowdowns, elementary transformations and boundary normal forms."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Hashable, List, Optional, Sequence, Tuple

from .graph import Vertex, WeightedGraph, chain_entries, hirzebruch_jung, inertia

SPROUTING = "SPROUTING"
SUBDIVISIONAL = "SUBDIVISIONAL"


class Center(Enum):
    OUTER = "OUTER"

    def __repr__(self):
        return "OUTER"


OUTER = Center.OUTER


class StandardizationError(ValueError):
    pass


@dataclass(frozen=True)
class BlowupStep:
    """A blowup of a point on one component (sprouting) or on an edge (subdivisional).

    ``target`` is a vertex id for sprouting steps and a pair of ids for
    subdivisional ones.
    """

    kind: str
    target: Hashable
    created: Hashable = None

    def __post_init__(self):
        if self.kind not in (SPROUTING, SUBDIVISIONAL):
            raise ValueError(f"unknown blowup kind {self.kind!r}")
        if self.kind == SUBDIVISIONAL:
            t = tuple(self.target)
            if len(t) != 2:
                raise ValueError("a subdivisional step needs an edge")
            object.__setattr__(self, "target", t)

    @classmethod
    def sprouting(cls, v, created=None):
        return cls(SPROUTING, v, created)

    @classmethod
    def subdivisional(cls, u, v, created=None):
        return cls(SUBDIVISIONAL, (u, v), created)

    def centers(self) -> Tuple:
        return (self.target,) if self.kind == SPROUTING else tuple(self.target)


def fresh_id(g: WeightedGraph, prefix="x"):
    for k in itertools.count():
        cand = f"{prefix}{k}"
        if cand not in g:
            return cand


def blowup(g: WeightedGraph, step: BlowupStep) -> WeightedGraph:
    new = step.created if step.created is not None else fresh_id(g)
    if new in g:
        raise ValueError(f"created id {new!r} already present")
    if step.kind == SPROUTING:
        v = step.target
        g.vertex(v)
        verts = [Vertex(x.id, x.weight - 1, x.genus) if x.id == v else x for x in g.vertices]
        return WeightedGraph(verts + [Vertex(new, -1)], list(g.edges) + [(v, new)])
    u, v = step.target
    if g.edge_multiplicity(u, v) == 0:
        raise ValueError(f"no edge between {u!r} and {v!r}")
    verts = [Vertex(x.id, x.weight - 1, x.genus) if x.id in (u, v) else x for x in g.vertices]
    edges = list(g.edges)
    pair = {u, v}
    k = next(k for k, (a, b) in enumerate(edges) if {a, b} == pair)
    del edges[k]
    return WeightedGraph(verts + [Vertex(new, -1)], edges + [(u, new), (new, v)])


def is_contractible(g: WeightedGraph, v) -> bool:
    if g.weight(v) != -1 or g.genus(v) != 0:
        return False
    nb = g.neighbors(v)
    return len(nb) <= 1 or (len(nb) == 2 and nb[0] != nb[1])


def blowdown(g: WeightedGraph, v) -> WeightedGraph:
    if not is_contractible(g, v):
        raise ValueError(f"vertex {v!r} is not a contractible (-1)-vertex")
    nb = g.neighbors(v)
    verts = [Vertex(x.id, x.weight + 1, x.genus) if x.id in nb else x for x in g.vertices if x.id != v]
    edges = [(a, b) for a, b in g.edges if a != v and b != v]
    if len(nb) == 2:
        edges.append((nb[0], nb[1]))
    return WeightedGraph(verts, edges)


# -- elementary transformations ----------------------------------------------------

@dataclass(frozen=True)
class ElementaryTransformation:
    """Blow up a point of a non-branching 0-vertex and contract its proper transform.

    ``center`` is a neighbor id (the point where the zero meets it) or
    ``OUTER`` for a general point, allowed only when the zero has at most
    one neighbor.  The new 0-vertex inherits the id of the old one.
    """

    zero_vertex: Hashable
    center: Hashable = OUTER

    @property
    def inner(self) -> bool:
        return self.center is not OUTER


def _check_transform(g: WeightedGraph, t: ElementaryTransformation):
    L = t.zero_vertex
    if g.weight(L) != 0 or g.genus(L) != 0:
        raise ValueError(f"vertex {L!r} is not a rational 0-vertex")
    nb = g.neighbors(L)
    if len(nb) >= 3:
        raise ValueError(f"vertex {L!r} is branching")
    if len(set(nb)) != len(nb):
        raise ValueError(f"vertex {L!r} meets a neighbor twice")
    if t.center is OUTER:
        if len(nb) == 2:
            raise ValueError("an outer center needs a zero with at most one neighbor")
    elif t.center not in nb:
        raise ValueError(f"center {t.center!r} is not a neighbor of {L!r}")


def elementary_transform(g: WeightedGraph, t: ElementaryTransformation) -> WeightedGraph:
    """Blow up a point of the 0-vertex ``L`` and contract the proper transform of ``L``.

    The new (-1)-curve takes over the role of ``L``, so the net effect on
    weights is: the center loses 1 and the other neighbor of ``L`` gains 1.
    """
    _check_transform(g, t)
    L = t.zero_vertex
    nb = g.neighbors(L)
    changes = {}
    if t.center is not OUTER:
        changes[t.center] = g.weight(t.center) - 1
    for y in nb:
        if y != t.center:
            changes[y] = g.weight(y) + 1
    return g.with_weights(changes)


def inverse_transform(g: WeightedGraph, t: ElementaryTransformation) -> ElementaryTransformation:
    """The transformation undoing ``t``; ``g`` is the graph ``t`` was applied to."""
    nb = g.neighbors(t.zero_vertex)
    if t.center is OUTER:
        return ElementaryTransformation(t.zero_vertex, nb[0] if nb else OUTER)
    others = [y for y in nb if y != t.center]
    return ElementaryTransformation(t.zero_vertex, others[0] if others else OUTER)


@dataclass(frozen=True)
class Flow:
    steps: Tuple[ElementaryTransformation, ...] = ()

    def __init__(self, steps=()):
        object.__setattr__(self, "steps", tuple(steps))

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def is_trivial(self):
        return not self.steps


def apply_flow(g: WeightedGraph, flow) -> WeightedGraph:
    for t in flow:
        g = elementary_transform(g, t)
    return g


# -- segments and normal-form predicates ---------------------------------------------

def _require_forest(g: WeightedGraph):
    if not g.is_forest():
        raise ValueError("NON_FOREST: graph contains a cycle")


def segments(g: WeightedGraph) -> List[List]:
    """Segments listed as ordered id lists.

    A segment is a component of what remains after deleting branching and
    positive-genus vertices.  Segments with exactly one free end list it
    first; otherwise the end with the earlier insertion index comes first.
    """
    _require_forest(g)
    outside = {v for v in g if g.degree(v) >= 3 or g.genus(v) > 0}
    rest = g.without(outside)
    order = {v: k for k, v in enumerate(g.ids())}
    out = []
    for comp in rest.components():
        sub = rest.subgraph(comp)
        tips = [v for v in comp if sub.degree(v) <= 1]
        free = [v for v in tips if g.degree(v) <= 1]
        if len(comp) == 1:
            out.append(comp)
            continue
        start = min(tips, key=order.__getitem__)
        if len(free) == 1:
            start = free[0]
        out.append(sub.chain_order(start))
    return out


def outside_vertices(g: WeightedGraph):
    return [v for v in g if g.degree(v) >= 3 or g.genus(v) > 0]


def _brackets(g, seq):
    return [-g.weight(v) for v in seq]


def _is_standard_sequence(b: Sequence[int]) -> bool:
    b = list(b)
    if b in ([0], [0, 0, 0]):
        return True
    for s in (b, b[::-1]):
        if s and all(a >= 2 for a in s):
            return True
        if len(s) >= 2 and s[0] == 0 and s[1] == 0 and all(a >= 2 for a in s[2:]):
            return True
    return False


def _is_lone_one(g, comp_ids):
    return len(comp_ids) == 1 and g.weight(comp_ids[0]) == -1 and g.genus(comp_ids[0]) == 0


def is_balanced(g: WeightedGraph) -> bool:
    _require_forest(g)
    for comp in g.components():
        if _is_lone_one(g, comp) and g.degree(comp[0]) == 0:
            continue
        sub = g.subgraph(comp)
        for seg in segments(sub):
            if not all(a == 0 or a >= 2 for a in _brackets(g, seg)):
                return False
    return True


def is_standard(g: WeightedGraph) -> bool:
    _require_forest(g)
    for comp in g.components():
        if _is_lone_one(g, comp):
            continue
        sub = g.subgraph(comp)
        for seg in segments(sub):
            if not _is_standard_sequence(_brackets(g, seg)):
                return False
    return True


def is_strongly_balanced(g: WeightedGraph) -> bool:
    if not is_standard(g):
        return False
    odd = [seg for seg in segments(g) if _brackets(g, seg) in ([0], [0, 0, 0])]
    if not odd:
        return True
    for seg in odd:
        segset = set(seg)
        for v in seg:
            if any(y not in segset and g.weight(y) == 0 for y in g.neighbors(v)):
                return True
    return False


# -- standardization -----------------------------------------------------------------

@dataclass
class Standardization:
    """Result of :func:`standardize`.

    ``flow`` lists the elementary transformations in order; ``operations``
    is the full log, which also contains the blowups and blowdowns needed
    when the input is not flow-equivalent to a standard graph of the same
    size.  Unpacks as ``(graph, flow)``.
    """

    graph: WeightedGraph
    flow: Flow
    operations: List[tuple] = field(default_factory=list)

    @property
    def blowdowns(self) -> List:
        return [op[1] for op in self.operations if op[0] == "blowdown"]

    @property
    def blowups(self) -> List:
        return [op[1] for op in self.operations if op[0] == "blowup"]

    def __iter__(self):
        yield self.graph
        yield self.flow


class _Run:
    def __init__(self, g):
        self.g = g
        self.ops: List[tuple] = []

    def et(self, zero, center):
        t = ElementaryTransformation(zero, center)
        self.g = elementary_transform(self.g, t)
        self.ops.append(("transform", t))

    def down(self, v):
        self.g = blowdown(self.g, v)
        self.ops.append(("blowdown", v))

    def up(self, step):
        new = fresh_id(self.g, "s")
        step = BlowupStep(step.kind, step.target, new)
        self.g = blowup(self.g, step)
        self.ops.append(("blowup", step))


def _ends(g, seq):
    """Neighbors of the segment ends lying outside the segment, as (left, right)."""
    segset = set(seq)
    if len(seq) == 1:
        outs = [y for y in g.neighbors(seq[0]) if y not in segset]
        if len(outs) == 2:
            return outs[0], outs[1]
        return None, (outs[0] if outs else None)
    lo = [y for y in g.neighbors(seq[0]) if y not in segset]
    ro = [y for y in g.neighbors(seq[-1]) if y not in segset]
    return (lo[0] if lo else None), (ro[0] if ro else None)


def _segment_step(run: _Run, seq) -> bool:
    """One reduction step on a nonstandard segment.

    Returns ``True`` when the vertex set changed (a blowup or blowdown), in
    which case segments must be recomputed.
    """
    g = run.g
    b = _brackets(g, seq)
    lo, ro = _ends(g, seq)

    def left(i):
        return seq[i - 1] if i > 0 else lo

    def right(i):
        return seq[i + 1] if i + 1 < len(seq) else ro

    zeros = [i for i, x in enumerate(b) if x == 0]
    if zeros:
        i = zeros[0]
        if i > 0:
            # move the bracket left of the zero across it
            if b[i - 1] > 0:
                run.et(seq[i], right(i) if right(i) is not None else OUTER)
            else:
                run.et(seq[i], left(i))
            return False
        if len(seq) == 1:
            raise StandardizationError("isolated zero segment is already standard")
        if b[1] != 0:
            if lo is None:
                run.et(seq[0], OUTER if b[1] > 0 else seq[1])
            else:
                run.et(seq[0], lo if b[1] > 0 else seq[1])
            return False
        for j in range(2, len(seq)):
            if b[j] == 1 and is_contractible(g, seq[j]):
                run.down(seq[j])
                return True
            if b[j] < 2:
                raise StandardizationError(
                    f"segment {b} cannot be normalized: entry {b[j]} after a zero pair"
                )
        raise StandardizationError(f"segment {b} is stuck")
    neg = [i for i, x in enumerate(b) if x < 0]
    if neg:
        i = neg[0]
        v = seq[i]
        if g.degree(v) == 0:
            run.up(BlowupStep.sprouting(v))
        else:
            nbr = seq[i + 1] if i + 1 < len(seq) else (seq[i - 1] if i > 0 else None)
            if nbr is None:
                nbr = g.neighbors(v)[0]
            run.up(BlowupStep.subdivisional(v, nbr))
        return True
    for j, x in enumerate(b):
        if x == 1 and is_contractible(g, seq[j]):
            run.down(seq[j])
            return True
    raise StandardizationError(f"segment {b} cannot be normalized")


def _is_segment_standard(g, seq, comp_ids):
    return _is_lone_one(g, comp_ids) or _is_standard_sequence(_brackets(g, seq))


def _standardize_component(g: WeightedGraph, comp_ids, start, max_steps):
    """Reduce one component; ``start`` fixes the reading direction of a chain component."""
    run = _Run(g)
    chain_mode = g.subgraph(comp_ids).is_chain() and not any(g.genus(v) for v in comp_ids)
    anchor = start
    for _ in range(max_steps):
        comp = _component_of(run.g, comp_ids, anchor)
        if not comp:
            return run
        sub = run.g.subgraph(comp)
        if chain_mode and sub.is_chain():
            tip = anchor if anchor in comp and sub.degree(anchor) <= 1 else None
            segs = [sub.chain_order(tip)]
            if tip is None:
                anchor = segs[0][0]
        else:
            segs = segments(sub)
        bad = [s for s in segs if not _is_segment_standard(run.g, s, comp)]
        if not bad:
            return run
        _segment_step(run, bad[0])
    raise StandardizationError("standardization did not terminate")


def _component_of(g, original_ids, anchor):
    """Current component descending from ``original_ids`` (ids survive flows)."""
    alive = [v for v in original_ids if v in g]
    seeds = [anchor] if anchor in g else []
    seeds += alive
    if not seeds:
        # every original vertex was blown down; pick up created vertices
        return []
    for comp in g.components():
        if seeds[0] in comp:
            return comp
    return []


def check_hodge_index(g: WeightedGraph):
    pos, _, _ = inertia(g)
    if pos > 1:
        raise StandardizationError(
            f"HODGE_INDEX: intersection form has {pos} positive eigenvalues; not a boundary"
        )


def _orient_tail(run: _Run):
    """Reverse the tail of a standard chain ``[0,0,a1,...,an]`` when that makes it smaller."""
    g = run.g
    if len(g) < 3 or not g.is_chain():
        return
    order = g.chain_order()
    for seq in (order, order[::-1]):
        b = _brackets(g, seq)
        if b[0] == 0 and b[1] == 0 and all(a >= 2 for a in b[2:]):
            if b[2:][::-1] < b[2:]:
                h, flow = reversion(g, seq)
                run.g = h
                run.ops.extend(("transform", t) for t in flow)
            return


def canonical_sequence(b: Sequence[int]) -> Tuple[int, ...]:
    b = tuple(b)
    return min(b, b[::-1])


def standardize(g: WeightedGraph, max_steps: int = 100000) -> Standardization:
    """Reduce a boundary forest to a standard one.

    Zeros are swept toward a free tip of their segment and paired there,
    the entries after a zero pair are made admissible by contracting
    (-1)-vertices, and negative entries without a zero to absorb them are
    raised by blowups.  A chain component is reduced in both reading
    directions and the lexicographically smaller result is kept, which
    makes the output independent of vertex order.
    """
    _require_forest(g)
    for comp in g.components():
        check_hodge_index(g.subgraph(comp))
    ops: List[tuple] = []
    result = WeightedGraph()
    for comp in g.components():
        sub = g.subgraph(comp)
        if sub.is_chain() and not any(sub.genus(v) for v in comp):
            order = sub.chain_order()
            best = None
            for start in (order[0], order[-1]):
                run = _standardize_component(sub, comp, start, max_steps)
                _orient_tail(run)
                comp_now = [v for v in run.g]
                key = canonical_sequence(chain_entries(run.g)) if comp_now else ()
                if best is None or key < best[0]:
                    best = (key, run)
            run = best[1]
        else:
            run = _standardize_component(sub, comp, None, max_steps)
        ops.extend(run.ops)
        result = result.union(run.g)
    flow = Flow(op[1] for op in ops if op[0] == "transform")
    return Standardization(result, flow, ops)


def standard_chain_for_class(d: int, q: int) -> Tuple[int, ...]:
    """Standard chain with chain-matrix invariant ``(d, q mod d)``.

    For a chain ``a`` let ``M(a)`` be the product of ``[[ai, -1], [1, 0]]``;
    ``d`` is its top-left entry (the discriminant) and ``q`` its lower-left
    entry.  Both are preserved, ``q`` modulo ``d``, by flows, blowups and
    blowdowns keeping the reading direction.
    """
    if d >= 2:
        return tuple(hirzebruch_jung(d, q % d))
    if d == 1:
        return (1,)
    if d == -1:
        return (0, 0)
    if d <= -2:
        return (0, 0) + tuple(hirzebruch_jung(-d, (-q) % (-d)))
    return (0,) if q == 1 else (0, 0, 0)


def chain_matrix(entries: Sequence[int]):
    m = ((1, 0), (0, 1))
    for a in entries:
        (p, r), (s, t) = m
        m = ((p * a + r, -p), (s * a + t, -s))
    return m


def chain_class(entries: Sequence[int]) -> Tuple[int, int]:
    (d, _), (q, _) = chain_matrix(entries)
    if d != 0:
        q %= abs(d)
    return d, q


# -- reversion --------------------------------------------------------------------

def reversion(g: WeightedGraph, segment: Sequence) -> Tuple[WeightedGraph, Flow]:
    """Move the zero pair of a segment ``[0, 0, a1, ..., an]`` to its other end.

    The flow is inner for the segment and is recorded even when the
    resulting weights coincide with the input.
    """
    seq = list(segment)
    b = _brackets(g, seq)
    if len(seq) < 2 or b[0] != 0 or b[1] != 0 or any(a == 0 for a in b[2:]):
        raise ValueError(f"segment {b} is not of shape [0,0,a1,...,an] with nonzero ai")
    if any(g.degree(v) > 2 or g.genus(v) > 0 for v in seq):
        raise ValueError("segment contains a branching or irrational vertex")
    for k in range(1, len(seq) - 1):
        if seq[k + 1] not in g.neighbors(seq[k]) or seq[k - 1] not in g.neighbors(seq[k]):
            raise ValueError("ids do not form a path")
    steps = []
    for k in range(2, len(seq)):
        # the zero pair sits at k-2, k-1; push the entry at k over to k-2
        z = seq[k - 1]
        a = -g.weight(seq[k])
        center = seq[k - 2] if a > 0 else seq[k]
        for _ in range(abs(a)):
            t = ElementaryTransformation(z, center)
            g = elementary_transform(g, t)
            steps.append(t)
    return g, Flow(steps)
