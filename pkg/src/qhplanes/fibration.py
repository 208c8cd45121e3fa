"""Fibers of P1-rulings as weighted trees with multiplicities."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

from .birational import SPROUTING, SUBDIVISIONAL, BlowupStep, blowdown, blowup, is_contractible
from .graph import (
    Chain,
    MultiDivisor,
    WeightedGraph,
    arithmetic_genus,
    as_chain,
    chain_discriminant,
    e_invariant,
    hirzebruch_jung,
    intersection_matrix,
    tilde_e,
)

TAG_D = "D"
TAG_E = "E"
TAG_S0 = "S0"
TAGS = (TAG_D, TAG_E, TAG_S0)


@dataclass(frozen=True)
class FiberTree:
    graph: WeightedGraph
    multiplicity: Mapping
    history: Tuple[BlowupStep, ...] = ()
    root: Hashable = 0

    def mu(self, v) -> int:
        return self.multiplicity[v]

    def minus_one_vertices(self) -> List:
        return [v for v in self.graph if self.graph.weight(v) == -1]

    def divisor(self) -> MultiDivisor:
        return MultiDivisor(self.graph, dict(self.multiplicity))

    def creation_order(self) -> List:
        return [self.root] + [s.created for s in self.history]

    def is_smooth(self) -> bool:
        return len(self.graph) == 1


def fiber_from_history(history: Sequence[BlowupStep], root: Hashable = 0) -> FiberTree:
    """Blow up a smooth 0-curve ``root`` following ``history``.

    A sprouting step on ``v`` gives the new curve multiplicity ``mu(v)``; a
    subdivisional step on ``{u, v}`` gives ``mu(u) + mu(v)``.  Steps
    without a ``created`` id get the next free integer.
    """
    g = WeightedGraph([(root, 0)])
    mu = {root: 1}
    steps = []
    counter = 1
    for step in history:
        created = step.created
        if created is None:
            while counter in g:
                counter += 1
            created = counter
        step = BlowupStep(step.kind, step.target, created)
        for c in step.centers():
            if c not in g:
                raise ValueError(f"illegal step {step}: unknown vertex {c!r}")
        g = blowup(g, step)
        if step.kind == SPROUTING:
            mu[created] = mu[step.target]
        else:
            u, v = step.target
            mu[created] = mu[u] + mu[v]
        steps.append(step)
    return FiberTree(g, mu, tuple(steps), root)


# -- validation ---------------------------------------------------------------------

@dataclass
class FiberReport:
    """Per-clause outcome; ``None`` marks a clause that does not apply."""

    clauses: Dict[str, Optional[bool]] = field(default_factory=dict)
    notes: Dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v is not False for v in self.clauses.values())

    def failures(self) -> List[str]:
        return [k for k, v in self.clauses.items() if v is False]


def kernel_defect(f: FiberTree) -> List[int]:
    """``Q . mu``; zero for a genuine fiber."""
    q = intersection_matrix(f.graph)
    ids = f.graph.ids()
    m = [f.multiplicity[v] for v in ids]
    return [sum(a * b for a, b in zip(row, m)) for row in q]


def branches(f: FiberTree) -> List[List]:
    """Branch decomposition relative to the stored creation order.

    Requires a unique (-1)-vertex ``C``.  With ``B1, ..., Bn`` the branching
    vertices in creation order and ``B(n+1) = C``, branch ``i`` consists of
    the vertices not in earlier branches created no later than ``Bi``.
    """
    order = f.creation_order()
    rank = {v: k for k, v in enumerate(order)}
    ones = f.minus_one_vertices()
    if len(ones) != 1:
        raise ValueError("branches need a unique (-1)-vertex")
    g = f.graph
    marks = sorted((v for v in g if g.degree(v) >= 3), key=rank.__getitem__) + ones
    used = set()
    out = []
    for b in marks:
        part = [v for v in order if v not in used and rank[v] <= rank[b]]
        used.update(part)
        out.append(part)
    return out


def _is_minus_two_fork_22n(g: WeightedGraph) -> bool:
    if any(g.weight(v) != -2 for v in g) or not g.is_tree():
        return False
    br = [v for v in g if g.degree(v) >= 3]
    if len(br) != 1 or g.degree(br[0]) != 3:
        return False
    short = 0
    for y in g.neighbors(br[0]):
        if g.degree(y) == 1:
            short += 1
    return short >= 2 and all(g.degree(v) <= 2 for v in g if v != br[0])


def validate_fiber(f: FiberTree) -> FiberReport:
    g = f.graph
    rep = FiberReport()
    c = rep.clauses
    c["rational_snc_tree"] = g.is_tree() and all(g.genus(v) == 0 for v in g)
    c["kernel_vector"] = all(x == 0 for x in kernel_defect(f))
    c["arithmetic_genus_zero"] = arithmetic_genus(f.divisor()) == 0
    c["positive_multiplicities"] = all(f.multiplicity.get(v, 0) > 0 for v in g)
    ones = f.minus_one_vertices()
    if f.is_smooth():
        c["has_minus_one_curve"] = g.weight(g.ids()[0]) == 0
    else:
        c["has_minus_one_curve"] = bool(ones)
    c["minus_one_meets_at_most_two"] = all(g.degree(v) <= 2 for v in ones)
    unique = len(ones) == 1 and not f.is_smooth()
    for key in (
        "unique_minus_one_multiplicity_gt_1",
        "exactly_two_multiplicity_one",
        "multiplicity_one_are_tips",
        "multiplicity_one_in_first_branch",
        "multiplicity_two_shape",
        "non_reduced_component_is_chain",
    ):
        c[key] = None
    if not unique:
        return rep
    C = ones[0]
    mult_one = [v for v in g if f.multiplicity[v] == 1]
    c["unique_minus_one_multiplicity_gt_1"] = f.multiplicity[C] > 1
    c["exactly_two_multiplicity_one"] = len(mult_one) == 2
    c["multiplicity_one_are_tips"] = all(g.degree(v) == 1 for v in mult_one)
    if f.history or f.is_smooth():
        first = set(branches(f)[0])
        c["multiplicity_one_in_first_branch"] = all(v in first for v in mult_one)
    else:
        rep.notes["multiplicity_one_in_first_branch"] = "no history; branch order unknown"
    if f.multiplicity[C] == 2:
        rest = g.remove_vertex(C)
        is_212 = sorted(-g.weight(v) for v in g) == [1, 2, 2] and g.is_chain() and g.degree(C) == 2
        tip_ok = g.degree(C) == 1 and (
            (rest.is_chain() and [-rest.weight(v) for v in rest] == [2, 2, 2]) or _is_minus_two_fork_22n(rest)
        )
        c["multiplicity_two_shape"] = is_212 or tip_ok
    if any(g.degree(v) >= 3 for v in g):
        rest = g.remove_vertex(C)
        ok = True
        for comp in rest.components():
            if all(f.multiplicity[v] > 1 for v in comp):
                ok = ok and rest.subgraph(comp).is_chain()
        c["non_reduced_component_is_chain"] = ok
    return rep


def contraction_history(g: WeightedGraph, prefer: Sequence = ()) -> Tuple[Hashable, List[BlowupStep]]:
    """Recover a blowup history of a fiber tree by contracting (-1)-vertices.

    Returns the surviving root and the steps in creation order.  When
    several (-1)-vertices are available, the one listed latest in
    ``prefer`` (then in insertion order) is contracted first.
    """
    rank = {v: k for k, v in enumerate(prefer)}
    undo = []
    cur = g
    while len(cur) > 1:
        cands = [v for v in cur if is_contractible(cur, v)]
        if not cands:
            raise ValueError("graph does not contract to a smooth fiber")
        pos = {v: k for k, v in enumerate(cur.ids())}
        v = max(cands, key=lambda x: (rank.get(x, -1), pos[x]))
        nb = cur.neighbors(v)
        if len(nb) == 2:
            undo.append(BlowupStep.subdivisional(nb[0], nb[1], v))
        elif len(nb) == 1:
            undo.append(BlowupStep.sprouting(nb[0], v))
        else:
            raise ValueError("isolated (-1)-vertex")
        cur = blowdown(cur, v)
    root = cur.ids()[0]
    if cur.weight(root) != 0:
        raise ValueError("contraction ends in a curve of nonzero weight")
    return root, undo[::-1]


# -- columnar fibers ----------------------------------------------------------------

def adjoint_chain(a) -> Chain:
    """The admissible chain ``b`` with ``d(b) = d(a)`` and ``e(b) = 1 - e(a)``.

    Both chains are read from the end adjacent to the (-1)-curve.
    """
    a = as_chain(a)
    if not len(a) or not a.is_admissible():
        raise ValueError(f"chain {a} is not admissible")
    d = chain_discriminant(a.entries)
    x = chain_discriminant(a.entries[1:])
    return Chain(hirzebruch_jung(d, d - x))


@dataclass(frozen=True)
class ColumnarFiber:
    """Chain fiber ``An ... A1 C B1 ... Bm`` with a unique (-1)-curve ``C``.

    ``A`` and ``B`` are stored from the end touching ``C``; ``a_ids`` and
    ``b_ids`` follow the same order.  ``A`` is the side whose far tip is
    met by the section carried along with the exceptional locus.
    """

    A: Chain
    B: Chain
    mu: int
    fiber: FiberTree
    a_ids: Tuple
    b_ids: Tuple
    c_id: Hashable = "C"


def columnar_fiber(a, b=None) -> ColumnarFiber:
    """Columnar fiber with prescribed ``A`` (``B`` defaults to the adjoint of ``A``)."""
    a = as_chain(a)
    b = adjoint_chain(a) if b is None else as_chain(b)
    a_ids = tuple(f"A{i + 1}" for i in range(len(a)))
    b_ids = tuple(f"B{j + 1}" for j in range(len(b)))
    ids = list(a_ids[::-1]) + ["C"] + list(b_ids)
    entries = list(a.entries[::-1]) + [1] + list(b.entries)
    g = WeightedGraph.chain(entries, ids)
    root, hist = contraction_history(g, prefer=ids)
    f = fiber_from_history(hist, root)
    if f.graph != g:
        raise ValueError(f"chains {a} and {b} do not form a columnar fiber")
    mu = f.multiplicity["C"]
    return ColumnarFiber(a, b, mu, f, a_ids, b_ids)


def columnar_from_tilde_e(q) -> ColumnarFiber:
    """Columnar fiber whose A-side chain has ``tilde_e(A) = q``.

    Read from its far tip, ``A`` is the Hirzebruch-Jung expansion of
    ``p/r`` where ``q = r/p``; ``B`` is the adjoint chain and the
    multiplicity of ``C`` is ``p``.
    """
    q = Fraction(q)
    if not (0 < q < 1):
        raise ValueError(f"tilde e must lie in (0,1), got {q}")
    far_first = hirzebruch_jung(q.denominator, q.numerator)
    col = columnar_fiber(far_first[::-1])
    assert tilde_e(col.A) == q and col.mu == q.denominator
    return col


# -- rulings -------------------------------------------------------------------------

@dataclass(frozen=True)
class TaggedFiber:
    fiber: FiberTree
    tags: Mapping

    def __post_init__(self):
        ids = set(self.fiber.graph.ids())
        if set(self.tags) != ids:
            raise ValueError("tags must cover exactly the fiber's vertices")
        bad = {t for t in self.tags.values() if t not in TAGS}
        if bad:
            raise ValueError(f"unknown tags {bad}")

    def sigma(self) -> int:
        return sum(1 for t in self.tags.values() if t == TAG_S0)

    def in_boundary(self) -> bool:
        return all(t == TAG_D for t in self.tags.values())


@dataclass(frozen=True)
class RulingDescriptor:
    h: int
    nu: int
    fibers: Tuple[TaggedFiber, ...] = ()
    base_genus: int = 0

    def sigma_sum(self) -> int:
        return sum(tf.sigma() - 1 for tf in self.fibers if not tf.in_boundary())


def fujita_count(r: RulingDescriptor, b2_total: int, b2_boundary: int) -> int:
    """Fujita's count computed from the tags and from Betti numbers; they must agree."""
    lhs = r.sigma_sum()
    rhs = r.h + r.nu + b2_total - b2_boundary - 2
    if lhs != rhs:
        raise ValueError(f"FUJITA_MISMATCH: tags give {lhs}, Betti numbers give {rhs}")
    return lhs
