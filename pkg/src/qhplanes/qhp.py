"""Surface constructions over P1-ruled models, Q-acyclicity checks and invariants.

A model is assembled by :class:`RuledModelBuilder`: horizontal curves plus
fibers, each fiber grown from a smooth 0-curve by blowups.  Fiber vertices
get global ids ``"<fiber>:<local id>"``.  Every vertex is then tagged as
part of the boundary ``D``, the exceptional locus ``E`` of the resolution,
or the smooth locus ``S0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from math import isqrt
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

from .birational import (
    SPROUTING,
    SUBDIVISIONAL,
    BlowupStep,
    blowdown,
    blowup,
    is_contractible,
    standardize,
    StandardizationError,
)
from .fibration import (
    TAG_D,
    TAG_E,
    TAG_S0,
    ColumnarFiber,
    FiberTree,
    RulingDescriptor,
    TaggedFiber,
    columnar_from_tilde_e,
    fiber_from_history,
    fujita_count,
)
from .graph import (
    MultiDivisor,
    WeightedGraph,
    arithmetic_genus,
    classify_singularity,
    discriminant,
    is_negative_definite,
    tilde_e,
)

AFFINE_RULED = "AFFINE_RULED"
NONEXTENDABLE = "NONEXTENDABLE"
TWISTED = "TWISTED"
UNTWISTED_C1 = "UNTWISTED_C1"
UNTWISTED_P1 = "UNTWISTED_P1"
HAND = "HAND"
KINDS = (AFFINE_RULED, NONEXTENDABLE, TWISTED, UNTWISTED_C1, UNTWISTED_P1)
CSTAR_KINDS = (TWISTED, UNTWISTED_C1, UNTWISTED_P1)

F0_LABELS = ("A.i", "A.ii", "A.iii", "A.iv", "A.v", "B.i", "B.ii", "B.iii", "C", "NONE")

NEG_INFINITY = "-inf"
UNDEFINED = "UNDEFINED"
UNDECIDED = "UNDECIDED"
RATIONAL = "RATIONAL"
NOT_RATIONAL = "NOT_RATIONAL"


class ConstructionError(ValueError):
    """Violated construction rule; ``clause`` names the rule."""

    def __init__(self, clause: str, message: str = ""):
        self.clause = clause
        super().__init__(f"{clause}: {message}" if message else clause)


# -- generic builder -----------------------------------------------------------------

def gid(fiber: str, local) -> str:
    return f"{fiber}:{local}"


@dataclass
class _FiberState:
    name: str
    root: Hashable
    local_ids: List
    mu: Dict
    world_history: List[BlowupStep] = field(default_factory=list)
    global_history: List[BlowupStep] = field(default_factory=list)
    in_boundary: bool = False


class RuledModelBuilder:
    """Incremental P1-ruled surface: horizontal curves and fibers with multiplicities."""

    def __init__(self, b2_initial: int = 2):
        self.g = WeightedGraph()
        self.horizontals: List[str] = []
        self.fibers: Dict[str, _FiberState] = {}
        self.b2 = b2_initial
        self.local_of: Dict[str, Tuple[str, Hashable]] = {}

    def add_horizontal(self, hid: str, weight: int, genus: int = 0):
        self.g = self.g.add_vertex(hid, weight, genus)
        self.horizontals.append(hid)

    def add_fiber(self, name: str, meets: Mapping[str, int], root=0, in_boundary=False):
        v = gid(name, root)
        self.g = self.g.add_vertex(v, 0)
        self.local_of[v] = (name, root)
        for h, count in meets.items():
            for _ in range(count):
                self.g = self.g.add_edge(h, v)
        self.fibers[name] = _FiberState(name, root, [root], {root: 1}, in_boundary=in_boundary)

    def _resolve(self, st: _FiberState, x):
        if x in self.horizontals:
            return x, True
        if x not in st.mu:
            raise ConstructionError("ILLEGAL_STEP", f"{x!r} is not a vertex of fiber {st.name}")
        return gid(st.name, x), False

    def next_local(self, name):
        st = self.fibers[name]
        k = 0
        while k in st.mu:
            k += 1
        return k

    def blow(self, name: str, kind: str, target, created=None):
        """Apply one blowup; targets are local ids of the fiber or horizontal ids."""
        st = self.fibers[name]
        if created is None:
            created = self.next_local(name)
        if created in st.mu:
            raise ConstructionError("ILLEGAL_STEP", f"id {created!r} already used in fiber {name}")
        new = gid(name, created)
        self.local_of[new] = (name, created)
        if kind == SPROUTING:
            v, horiz = self._resolve(st, target)
            if horiz:
                raise ConstructionError("ILLEGAL_STEP", "a sprouting center must lie on a fiber component")
            self.g = blowup(self.g, BlowupStep(SPROUTING, v, new))
            st.mu[created] = st.mu[target]
            world = BlowupStep(SPROUTING, target, created)
        elif kind == SUBDIVISIONAL:
            u, v = tuple(target)
            gu, hu = self._resolve(st, u)
            gv, hv = self._resolve(st, v)
            if hu and hv:
                raise ConstructionError("ILLEGAL_STEP", "both centers horizontal")
            if self.g.edge_multiplicity(gu, gv) == 0:
                raise ConstructionError("ILLEGAL_STEP", f"{u!r} and {v!r} do not meet")
            self.g = blowup(self.g, BlowupStep(SUBDIVISIONAL, (gu, gv), new))
            st.mu[created] = (0 if hu else st.mu[u]) + (0 if hv else st.mu[v])
            if hu or hv:
                world = BlowupStep(SPROUTING, v if hu else u, created)
            else:
                world = BlowupStep(SUBDIVISIONAL, (u, v), created)
        else:
            raise ConstructionError("ILLEGAL_STEP", f"unknown blowup kind {kind!r}")
        st.local_ids.append(created)
        st.world_history.append(world)
        st.global_history.append(BlowupStep(kind, target, created))
        self.b2 += 1
        return created

    def apply_history(self, name, steps):
        out = []
        for s in steps:
            out.append(self.blow(name, s.kind, s.target, s.created))
        return out

    def fiber_tree(self, name) -> FiberTree:
        st = self.fibers[name]
        f = fiber_from_history(st.world_history, st.root)
        mapping = {x: gid(name, x) for x in f.graph}
        g = f.graph.relabel(mapping)
        expected = self.g.subgraph([gid(name, x) for x in st.local_ids])
        if g != expected:
            raise ConstructionError("INTERNAL", f"fiber {name} bookkeeping mismatch")
        mu = {mapping[x]: m for x, m in f.multiplicity.items()}
        return FiberTree(g, mu, tuple(f.history), mapping[st.root])

    def fiber_vertices(self, name) -> List[str]:
        st = self.fibers[name]
        return [gid(name, x) for x in st.local_ids]


# -- models -------------------------------------------------------------------------

@dataclass
class SurfaceModel:
    kind: str
    boundary: WeightedGraph
    exceptional: WeightedGraph
    ruling: Optional[RulingDescriptor]
    surface: Optional[WeightedGraph] = None
    tags: Dict[str, str] = field(default_factory=dict)
    b2_surface: Optional[int] = None
    f0_type: str = "NONE"
    eta_trivial: Optional[bool] = None
    horizontal: Dict[str, Tuple[int, int]] = field(default_factory=dict)
    params: Dict = field(default_factory=dict)
    n: int = 0
    columnar_mu: Tuple[int, ...] = ()
    mu: Optional[int] = None
    mu_tilde: Optional[int] = None
    mu_disjoint: Optional[int] = None
    fiber_data: List[Dict] = field(default_factory=list)
    kodaira_S0_hint: Optional[object] = None
    logarithmic_hint: Optional[bool] = None
    exceptional_plane: bool = False

    @classmethod
    def hand(cls, boundary, exceptional=None, kodaira_S0=None, logarithmic=None, exceptional_plane=False):
        """Model entered as a bare ``(D, E)`` pair; ruling-dependent invariants are undecided."""
        return cls(
            HAND,
            boundary,
            exceptional if exceptional is not None else WeightedGraph(),
            None,
            kodaira_S0_hint=kodaira_S0,
            logarithmic_hint=logarithmic,
            exceptional_plane=exceptional_plane,
        )

    @property
    def h(self):
        return self.ruling.h if self.ruling else None

    @property
    def nu(self):
        return self.ruling.nu if self.ruling else None


def _finish(builder: RuledModelBuilder, kind, s0, h, nu, base_genus=0, strict=True, anchors=None, **extra) -> SurfaceModel:
    g = builder.g
    anchors = list(anchors or builder.horizontals)
    s0 = list(s0)
    t_graph = g.without(s0)
    comps = t_graph.components()
    with_h = [c for c in comps if any(v in anchors for v in c)]
    if strict and len(with_h) != 1:
        raise ConstructionError("D_DISCONNECTED", "the horizontal curves lie in different components of T")
    d_ids = set(v for c in with_h for v in c)
    order = g.ids()
    D = t_graph.subgraph([v for v in order if v in d_ids])
    E = t_graph.subgraph([v for v in t_graph.ids() if v not in d_ids])
    tags = {}
    for v in g:
        tags[v] = TAG_S0 if v in s0 else (TAG_D if v in d_ids else TAG_E)
    fibers = []
    for name in builder.fibers:
        ft = builder.fiber_tree(name)
        fibers.append(TaggedFiber(ft, {v: tags[v] for v in ft.graph}))
    ruling = RulingDescriptor(h, nu, tuple(fibers), base_genus)
    model = SurfaceModel(
        kind,
        D,
        E,
        ruling,
        surface=g,
        tags=tags,
        b2_surface=builder.b2,
        horizontal={x: (g.weight(x), g.genus(x)) for x in builder.horizontals},
        **extra,
    )
    if strict:
        d = discriminant(D)
        if d == 0:
            raise ConstructionError("D_DEGENERATE", "d(D) = 0, the surface is not Q-acyclic")
    return model


def _as_steps(raw) -> List[BlowupStep]:
    out = []
    for s in raw or ():
        if isinstance(s, BlowupStep):
            out.append(s)
        elif isinstance(s, Mapping):
            out.append(BlowupStep(s["kind"], s["target"], s.get("created")))
        else:
            kind, target, *rest = s
            out.append(BlowupStep(kind, target, rest[0] if rest else None))
    return out


def _add_columnar(builder: RuledModelBuilder, name, col: ColumnarFiber, first_horizontal, other: Mapping):
    """Grow a columnar fiber; its root (far tip of A) keeps meeting ``other``."""
    builder.add_fiber(name, {first_horizontal: 1, **other}, root=col.fiber.root)
    steps = list(col.fiber.history)
    first = steps[0]
    if first.kind != SPROUTING or first.target != col.fiber.root:
        raise ConstructionError("INTERNAL", "columnar history must start by sprouting the root")
    builder.blow(name, SUBDIVISIONAL, (first_horizontal, col.fiber.root), first.created)
    for s in steps[1:]:
        builder.blow(name, s.kind, s.target, s.created)


# -- affine-ruled ---------------------------------------------------------------------

def construct_affine_ruled(specs: Sequence, strict: bool = True) -> SurfaceModel:
    """Affine-ruled model from fiber histories.

    Each spec is a blowup history of a fiber grown from its root ``0``;
    the horizontal section is ``"Dh"`` and the first step must blow up the
    point where the root meets it.
    """
    b = RuledModelBuilder()
    b.add_horizontal("Dh", -1)
    b.add_fiber("Finf", {"Dh": 1}, in_boundary=True)
    if not specs:
        raise ConstructionError("NO_SINGULAR_FIBER", "at least one fiber spec is needed")
    cs = []
    for i, spec in enumerate(specs, start=1):
        steps = _as_steps(spec)
        name = f"F{i}"
        b.add_fiber(name, {"Dh": 1})
        if not steps or steps[0].kind != SUBDIVISIONAL or set(steps[0].target) != {"Dh", 0}:
            raise ConstructionError("FIRST_CENTER_ON_SECTION", f"fiber {name} must start at its point on Dh")
        b.apply_history(name, steps)
        minus = [v for v in b.fiber_vertices(name) if b.g.weight(v) == -1]
        if len(minus) != 1:
            raise ConstructionError("UNIQUE_MINUS_ONE", f"fiber {name} has {len(minus)} (-1)-curves")
        cs.append(minus[0])
    rest = b.g.without(cs)
    fiber_data = []
    for i, c in enumerate(cs, start=1):
        name = f"F{i}"
        part = rest.subgraph([v for v in b.fiber_vertices(name) if v != c])
        comps = part.components()
        dcomp = [k for k in comps if any("Dh" in rest.neighbors(v) for v in k)]
        ecomp = [v for k in comps if k not in dcomp for v in k]
        e_graph = part.subgraph(ecomp)
        if ecomp and not e_graph.is_chain():
            raise ConstructionError("E_NOT_CHAIN", f"exceptional part of fiber {name} is not a chain")
        mu_c = b.fibers[name].mu[b.local_of[c][1]]
        fiber_data.append(
            {
                "name": name,
                "C": c,
                "mu_C": mu_c,
                "d_E": discriminant(e_graph),
                "d_D": discriminant(part.subgraph([v for k in dcomp for v in k])),
                "E": ecomp,
            }
        )
    if strict and all(not fd["E"] for fd in fiber_data):
        raise ConstructionError("SMOOTH_SURFACE", "no fiber has a nonempty exceptional part")
    params = {"fibers": [[_step_doc(s) for s in _as_steps(spec)] for spec in specs]}
    return _finish(b, AFFINE_RULED, cs, 1, 1, strict=strict, fiber_data=fiber_data, params=params, n=len(cs))


def _step_doc(s: BlowupStep):
    t = list(s.target) if s.kind == SUBDIVISIONAL else s.target
    return {"kind": s.kind, "target": t, "created": s.created}


def affine_spec_from_fiber(fiber: WeightedGraph, attach) -> List[BlowupStep]:
    """Blowup history producing ``fiber`` with the section ``Dh`` meeting ``attach``.

    The fiber is contracted with ``attach`` kept until the last two curves,
    so ``attach`` is the curve created by the first blowup on ``Dh``.
    Local ids are kept; the surviving curve becomes the root.
    """
    if attach not in fiber:
        raise ConstructionError("ATTACH_UNKNOWN", f"{attach!r} is not a fiber vertex")
    cur = fiber
    undo = []
    while len(cur) > 2:
        cands = [v for v in cur if v != attach and is_contractible(cur, v)]
        if not cands:
            raise ConstructionError("ATTACH_NOT_REACHABLE", "no contraction order keeps the section on the given curve")
        v = cands[0]
        nb = cur.neighbors(v)
        if len(nb) == 2:
            undo.append(BlowupStep(SUBDIVISIONAL, (nb[0], nb[1]), v))
        elif len(nb) == 1:
            undo.append(BlowupStep(SPROUTING, nb[0], v))
        else:
            raise ConstructionError("NOT_A_FIBER", "isolated (-1)-vertex")
        cur = blowdown(cur, v)
    if len(cur) != 2 or [cur.weight(v) for v in cur] != [-1, -1] or not cur.edge_multiplicity(*cur.ids()):
        raise ConstructionError("NOT_A_FIBER", "the graph does not contract to a smooth fiber with the section on the given curve")
    root = next(v for v in cur if v != attach)
    steps = [BlowupStep(SUBDIVISIONAL, ("Dh", root), attach)] + undo[::-1]
    renamed = {root: 0} if root != 0 else {}
    if renamed:
        if 0 in fiber:
            raise ConstructionError("ROOT_ID", "id 0 is reserved for the root curve")
        steps = [_rename_step(s, renamed) for s in steps]
    return steps


def _rename_step(s: BlowupStep, mapping):
    f = lambda x: mapping.get(x, x)
    if s.kind == SPROUTING:
        return BlowupStep(SPROUTING, f(s.target), f(s.created))
    return BlowupStep(SUBDIVISIONAL, tuple(f(x) for x in s.target), f(s.created))


def h1_group_affine_ruled(m: SurfaceModel) -> List[int]:
    if m.kind != AFFINE_RULED:
        raise ValueError("H1 group formula applies to affine-ruled models only")
    out = []
    for fd in m.fiber_data:
        if fd["mu_C"] % fd["d_E"]:
            raise ValueError(f"INCONSISTENT_MODEL: mu(C)={fd['mu_C']} not divisible by d(E)={fd['d_E']}")
        out.append(fd["mu_C"] // fd["d_E"])
    return out


# -- non-extendable -----------------------------------------------------------------

def construct_nonextendable(N: int, g: int, tilde_es: Sequence, strict: bool = True) -> SurfaceModel:
    """Model over a ruled surface with sections ``Eh`` (weight -N, genus g) and ``Dh`` (weight N)."""
    es = [Fraction(x) for x in tilde_es]
    n = len(es)
    if N < 1:
        raise ConstructionError("N_POSITIVE_REQUIRED", f"N={N}")
    if g < 0:
        raise ConstructionError("GENUS_NONNEGATIVE", f"g={g}")
    if any(not (0 < e < 1) for e in es):
        raise ConstructionError("TILDE_E_RANGE", "each tilde e must lie in (0,1)")
    if sum(es) >= N:
        raise ConstructionError("SUM_TILDE_E_BELOW_N", f"sum of tilde e = {sum(es)} >= N = {N}")
    if g == 0 and n < 3:
        raise ConstructionError("G_POSITIVE_REQUIRED", f"g(B) must be positive when n = {n} < 3")
    b = RuledModelBuilder()
    b.add_horizontal("Eh", -N, g)
    b.add_horizontal("Dh", N, g)
    cs = []
    cols = []
    for i, e in enumerate(es, start=1):
        col = columnar_from_tilde_e(e)
        name = f"F{i}"
        _add_columnar(b, name, col, "Dh", {"Eh": 1})
        cs.append(gid(name, "C"))
        cols.append(col)
    model = _finish(
        b,
        NONEXTENDABLE,
        cs,
        2,
        0,
        base_genus=g,
        strict=strict,
        anchors=["Dh"],
        n=n,
        columnar_mu=tuple(c.mu for c in cols),
        params={"N": N, "g": g, "tilde_e": [_frac(e) for e in es]},
    )
    # exceptional side of each columnar fiber is the A-chain, which touches Eh
    for i, col in enumerate(cols, start=1):
        for a in col.a_ids:
            if model.tags[gid(f"F{i}", a)] != TAG_E:
                raise ConstructionError("INTERNAL", "A-chain expected in the exceptional locus")
    return model


def _tilde_doc(t):
    return None if t in (None, "", "none") else _frac(Fraction(t))


def _frac(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def nonextendable_dE_formula(m: SurfaceModel) -> int:
    """``prod d(Ei) * (N - sum tilde e_i)``, asserted integral."""
    N = m.params["N"]
    es = [Fraction(x) for x in m.params["tilde_e"]]
    prod = 1
    for e in es:
        prod *= e.denominator
    val = prod * (N - sum(es))
    if val.denominator != 1:
        raise AssertionError("d(E) product formula is not integral")
    return int(val)


def alpha_nonextendable(m: SurfaceModel) -> Fraction:
    if m.kind != NONEXTENDABLE:
        raise ValueError("alpha is defined for non-extendable models only")
    return alpha_value(m.params["g"], m.columnar_mu)


def alpha_value(g: int, mus: Sequence[int]) -> Fraction:
    n = len(mus)
    return n - 2 + 2 * g - sum((Fraction(1, x) for x in mus), Fraction(0))


def is_platonic_triple(x1: int, x2: int, x3: int) -> bool:
    if min(x1, x2, x3) < 1:
        raise ValueError("entries must be positive")
    return Fraction(1, x1) + Fraction(1, x2) + Fraction(1, x3) > 1


# -- C*-ruled constructions -----------------------------------------------------------

def _eta_nontrivial(builder, name, steps_created, tags) -> bool:
    st = builder.fibers[name]
    for s in st.global_history:
        if s.created in steps_created and s.kind == SPROUTING:
            if tags[gid(name, s.created)] in (TAG_S0, TAG_E):
                return True
    return False


def construct_cstar(case: str, params: Mapping, strict: bool = True) -> SurfaceModel:
    case = case.upper().replace("-", "_")
    if case == TWISTED:
        return _construct_twisted(params, strict)
    if case == UNTWISTED_C1:
        return _construct_untwisted_c1(params, strict)
    if case == UNTWISTED_P1:
        return _construct_untwisted_p1(params, strict)
    raise ConstructionError("UNKNOWN_CASE", case)


def _columnar_list(params):
    return [Fraction(x) for x in params.get("columnar", ())]


def _construct_twisted(params, strict):
    """2-section ``Dh`` of weight 0 meeting the middles of ``F0~ = [2,1,2]`` and ``Finf = [2,1,2]``.

    ``F0`` has local ids ``0 - 2 - 1`` with middle ``2``; its further
    history may use ``"Dh"`` as a center.
    """
    b = RuledModelBuilder()
    b.add_horizontal("Dh", 0)
    for name, boundary in (("Finf", True), ("F0", False)):
        b.add_fiber(name, {}, in_boundary=boundary)
        b.blow(name, SPROUTING, 0, 1)
        b.blow(name, SUBDIVISIONAL, (0, 1), 2)
        b.g = b.g.add_edge("Dh", gid(name, 2))
    cs = []
    cols = []
    for i, e in enumerate(_columnar_list(params), start=1):
        col = columnar_from_tilde_e(e)
        name = f"F{i}"
        _add_columnar(b, name, col, "Dh", {"Dh": 1})
        cs.append(gid(name, "C"))
        cols.append(col)
    steps = _as_steps(params.get("f0_history"))
    created = b.apply_history("F0", steps)
    c_local = created[-1] if created else 2
    C = gid("F0", c_local)
    if b.g.weight(C) != -1:
        raise ConstructionError("F0_LAST_NOT_MINUS_ONE", "the last created curve of F0 must be a (-1)-curve")
    model = _finish(
        b,
        TWISTED,
        cs + [C],
        1,
        1,
        strict=strict,
        n=len(cols),
        columnar_mu=tuple(c.mu for c in cols),
        params={"columnar": [_frac(e) for e in _columnar_list(params)], "f0_history": [_step_doc(s) for s in steps]},
    )
    f0 = b.fiber_tree("F0")
    model.mu = f0.multiplicity[C]
    eta = _eta_nontrivial(b, "F0", set(created), model.tags)
    model.eta_trivial = not eta
    f0g = f0.graph
    bset = [v for v in f0g if "Dh" in b.g.neighbors(v)]
    b_meet = bset[0] if len(bset) == 1 else None
    b_dot_c = 0 if b_meet is None or b_meet == C else f0g.edge_multiplicity(b_meet, C)
    b_is_tip = b_meet is not None and f0g.degree(b_meet) == 1
    if eta:
        label = "A.v"
    elif f0g.is_chain() and [f0g.weight(v) for v in f0g.chain_order()] == [-2, -1, -2]:
        label = "A.i"
    elif b_meet is not None and not b_is_tip and b_dot_c > 0:
        label = "A.ii"
    elif b_meet is not None and b_dot_c == 0 and b_meet != C and f0g.is_chain():
        label = "A.iii"
    elif b_is_tip:
        label = "A.iv"
    else:
        label = "NONE"
    model.f0_type = label
    return model


def _check_first_step_c1(steps, ct_local):
    if not steps:
        raise ConstructionError("F0_HISTORY_NONEMPTY", "F0 needs a nonempty blowup sequence")
    first = steps[0]
    centers = set(first.centers())
    if centers <= {ct_local, "D2"}:
        raise ConstructionError("F0_FIRST_CENTER", "the first center must lie on D1 or on F0~ minus C~")


def _tilde_f0(b, name, params, first_horizontal, other):
    """Optional columnar fiber ``F0~``; returns the local id of its (-1)-curve (or root)."""
    t = params.get("f0_tilde")
    if t in (None, "", "none"):
        b.add_fiber(name, {first_horizontal: 1, **other}, root=0)
        return 0, None
    col = columnar_from_tilde_e(Fraction(t))
    _add_columnar(b, name, col, first_horizontal, other)
    return "C", col


def _construct_untwisted_c1(params, strict):
    """Sections ``D1`` (weight 1) and ``D2`` (weight -1) joined by the boundary fiber ``Linf``."""
    b = RuledModelBuilder()
    b.add_horizontal("D1", 1)
    b.add_horizontal("D2", -1)
    b.add_fiber("Linf", {"D1": 1, "D2": 1}, in_boundary=True)
    cs = []
    cols = []
    for i, e in enumerate(_columnar_list(params), start=1):
        col = columnar_from_tilde_e(e)
        name = f"F{i}"
        _add_columnar(b, name, col, "D1", {"D2": 1})
        cs.append(gid(name, "C"))
        cols.append(col)
    ct_local, tcol = _tilde_f0(b, "F0", params, "D1", {"D2": 1})
    steps = _as_steps(params.get("f0_history"))
    _check_first_step_c1(steps, ct_local)
    created = b.apply_history("F0", steps)
    C = gid("F0", created[-1])
    Ct = gid("F0", ct_local)
    if b.g.weight(C) != -1:
        raise ConstructionError("F0_LAST_NOT_MINUS_ONE", "the last created curve of F0 must be a (-1)-curve")
    model = _finish(
        b,
        UNTWISTED_C1,
        cs + [C, Ct],
        2,
        1,
        strict=strict,
        n=len(cols),
        columnar_mu=tuple(c.mu for c in cols),
        params={
            "columnar": [_frac(e) for e in _columnar_list(params)],
            "f0_tilde": _tilde_doc(params.get("f0_tilde")),
            "f0_history": [_step_doc(s) for s in steps],
        },
    )
    f0 = b.fiber_tree("F0")
    model.mu = f0.multiplicity[C]
    model.mu_tilde = f0.multiplicity[Ct]
    eta = _eta_nontrivial(b, "F0", set(created), model.tags)
    model.eta_trivial = not eta
    E = model.exceptional
    meets_e = {x: any(y in E for y in b.g.neighbors(x)) for x in (C, Ct)}
    if meets_e[C] != meets_e[Ct]:
        disjoint = C if not meets_e[C] else Ct
    else:
        # neither meets E: the one left in place by the sprouting contraction
        sprouted = {gid("F0", s.created) for s in b.fibers["F0"].global_history if s.kind == SPROUTING}
        disjoint = Ct if C in sprouted else C
    model.mu_disjoint = f0.multiplicity[disjoint]
    if eta:
        model.f0_type = "B.iii"
    elif b.g.weight(C) == -1 and b.g.weight(Ct) == -1:
        model.f0_type = "B.i"
    else:
        model.f0_type = "B.ii"
    return model


def _construct_untwisted_p1(params, strict):
    """Sections ``D2`` (weight -N) and ``D1`` (weight N) of a Hirzebruch surface, no boundary fiber."""
    N = int(params.get("N", 1))
    if N <= 0:
        raise ConstructionError("N_POSITIVE_REQUIRED", f"N={N}")
    b = RuledModelBuilder()
    b.add_horizontal("D1", N)
    b.add_horizontal("D2", -N)
    cs = []
    cols = []
    for i, e in enumerate(_columnar_list(params), start=1):
        col = columnar_from_tilde_e(e)
        name = f"F{i}"
        _add_columnar(b, name, col, "D1", {"D2": 1})
        cs.append(gid(name, "C"))
        cols.append(col)
    b_local, tcol = _tilde_f0(b, "F0", params, "D1", {"D2": 1})
    Bv = gid("F0", b_local)
    pre = b.g.without(cs + [Bv])
    nondeg = False
    for comp in pre.components():
        if any(h in comp for h in ("D1", "D2")) and discriminant(pre.subgraph(comp)) != 0:
            nondeg = True
    if not nondeg:
        raise ConstructionError(
            "D0-COMPONENT-DEGENERATE", "both components containing D1 and D2 have degenerate intersection matrix"
        )
    steps = _as_steps(params.get("f0_history"))
    if not steps:
        raise ConstructionError("F0_HISTORY_NONEMPTY", "F0 needs a nonempty blowup sequence")
    first = steps[0]
    ok = (first.kind == SPROUTING and first.target == b_local) or (
        first.kind == SUBDIVISIONAL and set(first.target) == {b_local, "D2"}
    )
    if not ok:
        raise ConstructionError("F0_FIRST_CENTER", "F0 must start with a sprouting blowup on B for D1 + F0~")
    created = b.apply_history("F0", steps)
    C = gid("F0", created[-1])
    if b.g.weight(C) != -1:
        raise ConstructionError("F0_LAST_NOT_MINUS_ONE", "the last created curve of F0 must be a (-1)-curve")
    model = _finish(
        b,
        UNTWISTED_P1,
        cs + [C],
        2,
        0,
        strict=strict,
        n=len(cols),
        columnar_mu=tuple(c.mu for c in cols),
        params={
            "N": N,
            "columnar": [_frac(e) for e in _columnar_list(params)],
            "f0_tilde": _tilde_doc(params.get("f0_tilde")),
            "f0_history": [_step_doc(s) for s in steps],
        },
    )
    f0 = b.fiber_tree("F0")
    model.mu = f0.multiplicity[C]
    model.eta_trivial = False
    model.f0_type = "C"
    model.horizontal["B"] = (b.g.weight(Bv), 0)
    model.params["_B"] = Bv
    return model


# -- validators -----------------------------------------------------------------------

@dataclass
class ValidatorReport:
    clauses: Dict[str, Optional[bool]] = field(default_factory=dict)
    info: Dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v is not False for v in self.clauses.values())

    def failures(self):
        return [k for k, v in self.clauses.items() if v is False]


def _horizontal_ids(m: SurfaceModel):
    return [x for x in m.horizontal if x in (m.surface or m.boundary)]


def verify_qacyclicity(m: SurfaceModel) -> ValidatorReport:
    rep = ValidatorReport()
    c = rep.clauses
    D, E = m.boundary, m.exceptional
    dD = discriminant(D)
    rep.info["dD"] = dD
    c["det_boundary_nonzero"] = dD != 0
    c["det_boundary_negative"] = dD < 0
    c["exceptional_negative_definite"] = is_negative_definite(E)
    if m.ruling is None:
        c["rational_tree"] = D.is_tree() and all(D.genus(v) == 0 for v in D)
        for k in (
            "unique_noncompact_component",
            "fujita_sigma",
            "fujita_equation",
            "nu_at_most_one",
            "sigma2_fiber_meets_boundary",
            "twig_sum_not_minus_D0_squared",
        ):
            c[k] = None
        return rep
    g = m.surface
    r = m.ruling
    hs = [x for x in m.horizontal if x in D]
    s0 = [v for v, t in m.tags.items() if t == TAG_S0]
    t_graph = g.without(s0)
    comps = [cc for cc in t_graph.components() if any(x in cc for x in hs)]
    c["unique_noncompact_component"] = len(comps) == 1 and set(comps[0]) == set(D.ids())
    if m.kind == NONEXTENDABLE:
        c["rational_tree"] = None
        c["unique_noncompact_component"] = None
        rep.info["not_applicable"] = "E and D contain the positive-genus sections"
    else:
        c["rational_tree"] = D.is_tree() and all(D.genus(v) == 0 for v in D)
    sigma = r.sigma_sum()
    c["fujita_sigma"] = sigma == r.h + r.nu - 2
    try:
        fujita_count(r, m.b2_surface, len(t_graph))
        c["fujita_equation"] = True
    except ValueError:
        c["fujita_equation"] = False
    c["nu_at_most_one"] = r.nu <= 1 and sum(1 for tf in r.fibers if tf.in_boundary()) <= 1
    c["sigma2_fiber_meets_boundary"] = None
    c["twig_sum_not_minus_D0_squared"] = None
    if (r.h, r.nu) == (2, 1):
        ok = True
        for tf in r.fibers:
            if tf.sigma() == 2:
                for v, t in tf.tags.items():
                    if t == TAG_S0 and not any(y in D for y in g.neighbors(v)):
                        ok = False
        c["sigma2_fiber_meets_boundary"] = ok
    if (r.h, r.nu) == (2, 0) and m.kind != NONEXTENDABLE:
        val = _twig_clause(m)
        if val is not None:
            c["twig_sum_not_minus_D0_squared"] = val != 0
            rep.info["twig_clause_value"] = val
    lemma_says_nonzero = all(
        c[k] is not False for k in ("nu_at_most_one", "sigma2_fiber_meets_boundary", "twig_sum_not_minus_D0_squared")
    )
    rep.info["clauses_agree_with_determinant"] = lemma_says_nonzero == (dD != 0)
    return rep


def _twig_clause(m: SurfaceModel):
    """``-D0^2 - sum d(K - a)/d(K)`` over components ``K`` of ``D0~ - D0``.

    ``D0~`` is the component containing ``D0`` of ``D - B`` where ``B``
    separates the two horizontal curves and ``E`` inside ``D + F0``; for
    twigs the summands are their ``tilde e`` values.  Returns ``None`` when
    ``B`` cannot be located.
    """
    g = m.surface
    D = m.boundary
    hs = [x for x in m.horizontal if x in D]
    if len(hs) != 2:
        return None
    d0, d1 = sorted(hs, key=lambda x: g.weight(x))
    f0 = [v for v in g if v.startswith("F0:")]
    union = g.subgraph([v for v in g if v in D or v in f0])
    e_ids = [v for v in union if v in m.exceptional]
    cands = []
    for v in D:
        if v in hs:
            continue
        rest = union.remove_vertex(v)
        comp_of = {}
        for k, comp in enumerate(rest.components()):
            for x in comp:
                comp_of[x] = k
        if comp_of[d0] != comp_of[d1] and all(comp_of[d0] != comp_of[x] for x in e_ids):
            if all(comp_of[d1] != comp_of[x] for x in e_ids) or not e_ids:
                cands.append(v)
    if len(cands) > 1:
        s0 = [v for v in f0 if m.tags.get(v) == TAG_S0]
        cands = [v for v in cands if any(y in s0 for y in g.neighbors(v))]
    if len(cands) != 1:
        return None
    B = cands[0]
    rest = D.remove_vertex(B)
    comp = next(cc for cc in rest.components() if d0 in cc)
    tilde = rest.subgraph(comp)
    others = tilde.remove_vertex(d0)
    total = Fraction(-g.weight(d0))
    for k in others.components():
        kg = others.subgraph(k)
        dk = discriminant(kg)
        if dk == 0:
            return Fraction(discriminant(tilde))
        a = [v for v in k if d0 in tilde.neighbors(v)]
        total -= Fraction(discriminant(kg.without(a)), dk)
    return total


def h1_order(m: SurfaceModel) -> int:
    rep = verify_qacyclicity(m)
    if not rep.passed:
        raise ValueError(f"Q-acyclicity validators failed: {rep.failures()}")
    dD = abs(discriminant(m.boundary))
    dE = abs(discriminant(m.exceptional))
    if dD % dE:
        raise ValueError("INCONSISTENT_MODEL: |d(D)|/|d(E)| is not an integer")
    q = dD // dE
    r = isqrt(q)
    if r * r != q:
        raise ValueError(f"INCONSISTENT_MODEL: |d(D)|/|d(E)| = {q} is not a square")
    return r


# -- Kodaira dimension ---------------------------------------------------------------

def lambda_value(n: int, nu: int, mus: Sequence[int]) -> Fraction:
    return n + nu - 1 - sum((Fraction(1, x) for x in mus), Fraction(0))


def kappa_pair(label: str, lam: Fraction, mu=None, mu_tilde=None, mu_disjoint=None):
    """``(kappa, kappa0)`` for a resolved F0 type."""
    half = Fraction(1, 2)
    if label == "A.i":
        return lam - half, lam - half
    if label == "A.ii":
        return lam - half, lam - Fraction(1, 2 * mu)
    if label == "A.iii":
        return lam - half, lam
    if label == "A.iv":
        return lam - half, lam - Fraction(1, mu)
    if label == "A.v":
        return lam, lam
    if label == "B.i":
        return lam - 1, lam - Fraction(1, min(mu, mu_tilde))
    if label == "B.ii":
        k = lam - Fraction(1, min(mu, mu_tilde))
        return k, k
    if label == "B.iii":
        if mu_disjoint is None:
            raise ValueError("UNDECIDED: the S0-component disjoint from E is not tagged")
        k = lam - Fraction(1, mu_disjoint)
        return k, k
    if label == "C":
        return lam, lam
    raise ValueError(f"F0 type {label!r} does not determine kappa")


def sign_to_dimension(x: Fraction):
    if x < 0:
        return NEG_INFINITY
    return 0 if x == 0 else 1


@dataclass(frozen=True)
class KodairaData:
    lam: Fraction
    kappa: Fraction
    kappa0: Fraction
    kodaira_S: object
    kodaira_S0: object


def kodaira_signs(m: SurfaceModel) -> KodairaData:
    if m.kind not in CSTAR_KINDS:
        raise ValueError("kodaira_signs needs a C*-ruled construction")
    if m.f0_type == "NONE":
        raise ValueError("F0 type unresolved")
    lam = lambda_value(m.n, m.nu, m.columnar_mu)
    k, k0 = kappa_pair(m.f0_type, lam, m.mu, m.mu_tilde, m.mu_disjoint)
    return KodairaData(lam, k, k0, sign_to_dimension(k), sign_to_dimension(k0))


def kodaira_dimensions(m: SurfaceModel):
    """``(kbar S', kbar S0)``, or ``UNDECIDED`` entries when the model lacks the data."""
    if m.kind in CSTAR_KINDS:
        try:
            kd = kodaira_signs(m)
        except ValueError:
            return UNDECIDED, UNDECIDED
        return kd.kodaira_S, kd.kodaira_S0
    if m.kind == NONEXTENDABLE:
        return NEG_INFINITY, sign_to_dimension(alpha_nonextendable(m))
    if m.kind == AFFINE_RULED:
        return NEG_INFINITY, NEG_INFINITY
    return UNDECIDED, (m.kodaira_S0_hint if m.kodaira_S0_hint is not None else UNDECIDED)


def parametric_domain(label: str, max_n: int = 4, max_mu: int = 6):
    """Parameter rows ``(n, mus, extra)`` admissible for an F0 type.

    ``extra`` holds ``mu``, ``mu_tilde`` and ``mu_disjoint`` where the type
    uses them.  Twisted fibers have ``mu >= 2`` and type A.i has ``mu = 2``
    since then ``F0 = [2,1,2]``; in type B.iii the S0-component meeting
    ``E`` has multiplicity at least 2.
    """
    rows = []
    for n in range(max_n + 1):
        for mus in combinations_with_replacement(range(2, max_mu + 1), n):
            if label in ("A.iii", "A.v", "C"):
                rows.append((n, mus, {}))
            elif label == "A.i":
                rows.append((n, mus, {"mu": 2}))
            elif label in ("A.ii", "A.iv"):
                for mu in range(2, max_mu + 1):
                    rows.append((n, mus, {"mu": mu}))
            elif label in ("B.i", "B.ii"):
                for mu in range(1, max_mu + 1):
                    for mt in range(mu, max_mu + 1):
                        rows.append((n, mus, {"mu": mu, "mu_tilde": mt}))
            elif label == "B.iii":
                for mu in range(1, max_mu + 1):
                    for mt in range(2, max_mu + 1):
                        rows.append((n, mus, {"mu_disjoint": mu, "mu_tilde": mt}))
    return rows


def label_nu(label: str) -> int:
    return 0 if label == "C" else 1


def kodaira_table(max_n: int = 4, max_mu: int = 6):
    """All dispatch rows ``(label, n, mus, extra, lambda, kappa, kappa0)``."""
    out = []
    for label in F0_LABELS[:-1]:
        for n, mus, extra in parametric_domain(label, max_n, max_mu):
            lam = lambda_value(n, label_nu(label), mus)
            k, k0 = kappa_pair(label, lam, extra.get("mu"), extra.get("mu_tilde"), extra.get("mu_disjoint"))
            out.append((label, n, mus, extra, lam, k, k0))
    return out


# -- singularities and rationality -------------------------------------------------

def fundamental_cycle(e: WeightedGraph) -> MultiDivisor:
    """Laufer's iteration: start from the reduced cycle, add ``v`` while ``Z . v > 0``."""
    if not e.is_connected() or not len(e):
        raise ValueError("graph must be connected and nonempty")
    if not is_negative_definite(e):
        raise ValueError("graph is not negative definite")
    z = {v: 1 for v in e}
    while True:
        div = MultiDivisor(e, z)
        bad = next((v for v in e if div.dot_vertex(v) > 0), None)
        if bad is None:
            return div
        z[bad] += 1


def is_rational_singularity(e: WeightedGraph) -> str:
    if not is_negative_definite(e):
        raise ValueError("graph is not negative definite")
    if any(e.genus(v) > 0 for v in e) or not e.is_forest():
        return NOT_RATIONAL
    z = fundamental_cycle(e)
    return RATIONAL if arithmetic_genus(z) == 0 else NOT_RATIONAL


def singularities(m: SurfaceModel):
    out = []
    for comp in m.exceptional.components():
        sub = m.exceptional.subgraph(comp)
        try:
            desc = classify_singularity(sub)
            rat = is_rational_singularity(sub)
        except ValueError:
            desc, rat = None, UNDECIDED
        out.append((comp, desc, rat))
    return out


def is_logarithmic(m: SurfaceModel):
    if m.kind == HAND:
        if m.logarithmic_hint is not None:
            return m.logarithmic_hint
        sings = singularities(m)
        if any(d is None for _, d, _ in sings):
            return UNDECIDED
        return all(d.kind != "NON_QUOTIENT" for _, d, _ in sings)
    return all(d is not None and d.kind != "NON_QUOTIENT" for _, d, _ in singularities(m))


# -- ruling and curve counts -------------------------------------------------------

def boundary_pattern(D: WeightedGraph) -> str:
    """Which displayed boundary shape ``D`` has: ``"i"``, ``"ii"``, ``"iii"`` or ``"iv"`` (none)."""
    if not D.is_tree():
        return "iv"
    br = [v for v in D if D.degree(v) >= 3]
    if len(br) != 2 or any(D.degree(v) != 3 for v in br):
        return "iv"
    b1, b2 = br

    def two_tips(b, exclude):
        tips = [y for y in D.neighbors(b) if y not in exclude]
        return len(tips) == 2 and all(D.degree(y) == 1 and D.weight(y) == -2 for y in tips)

    if len(D) == 6 and b2 in D.neighbors(b1):
        if two_tips(b1, {b2}) and two_tips(b2, {b1}):
            w = sorted((D.weight(b1), D.weight(b2)), reverse=True)
            if w[0] == -1 and w[1] == -1:
                return "ii"
            if w[0] == -1 and w[1] <= -2:
                return "i"
    if len(D) == 7:
        mids = [y for y in D.neighbors(b1) if y in D.neighbors(b2)]
        if len(mids) == 1 and D.weight(mids[0]) == 0 and D.degree(mids[0]) == 2:
            if two_tips(b1, {mids[0]}) and two_tips(b2, {mids[0]}):
                return "iii"
    return "iv"


def snc_minimal(D: WeightedGraph) -> WeightedGraph:
    """Contract non-branching (-1)-vertices while the graph stays a tree with more than one vertex."""
    while len(D) > 1:
        v = next((x for x in D if is_contractible(D, x) and D.degree(x) <= 2), None)
        if v is None:
            return D
        D = blowdown(D, v)
    return D


def _boundary_pattern_model(m: SurfaceModel) -> str:
    cands = [m.boundary, snc_minimal(m.boundary)]
    try:
        cands.append(standardize(cands[-1]).graph)
    except (StandardizationError, ValueError):
        pass
    found = [boundary_pattern(x) for x in cands]
    for key in ("iii", "ii", "i"):
        if key in found:
            return key
    return "iv"


def _fork_22k(e: WeightedGraph):
    if not e.is_connected() or not len(e):
        return None
    try:
        desc = classify_singularity(e)
    except ValueError:
        return None
    if desc.kind == "FORK" and desc.fork_type[0] == 2 and desc.fork_type[1] == 2:
        return desc.fork_type[2]
    return None


def count_cstar_rulings(m: SurfaceModel) -> int:
    if m.kind == AFFINE_RULED:
        raise ValueError("affine-ruled surfaces are outside the ruling count theorem")
    if m.exceptional_plane:
        return 0
    _, k0 = kodaira_dimensions(m)
    if k0 == UNDECIDED:
        raise ValueError("insufficient data: Kodaira dimension of the smooth locus is undecided")
    if k0 == 2:
        return 0
    log = is_logarithmic(m)
    if log is False or k0 == 1:
        return 1
    if k0 == NEG_INFINITY:
        k = _fork_22k(m.exceptional)
        if m.kind in CSTAR_KINDS and k is None and not _is_noncyclic_quotient(m.exceptional):
            raise ValueError("affine-ruled surfaces are outside the ruling count theorem")
        if k is None:
            return 1
        return 4 if k == 2 else 2
    pattern = _boundary_pattern_model(m) if m.kind != HAND else boundary_pattern(m.boundary)
    return {"i": 1, "ii": 2, "iii": 3}.get(pattern, 2)


def _is_noncyclic_quotient(e):
    if not e.is_connected() or not len(e):
        return False
    try:
        return classify_singularity(e).kind == "FORK"
    except ValueError:
        return False


def count_contractible_curves(m: SurfaceModel):
    if m.exceptional_plane:
        return 0
    _, k0 = kodaira_dimensions(m)
    if k0 != 0:
        raise ValueError(f"contractible-curve count needs kbar(S0) = 0, got {k0}")
    if is_logarithmic(m) is False:
        return UNDECIDED
    pattern = _boundary_pattern_model(m) if m.kind != HAND else boundary_pattern(m.boundary)
    return {"i": 1, "ii": 2, "iii": 2}.get(pattern, frozenset({1, 2}))


def strongly_balanced_completion_count(m: SurfaceModel) -> int:
    if m.kind == AFFINE_RULED:
        raise ValueError("affine-ruled surfaces are excluded")
    return 2 if m.kind == UNTWISTED_C1 and m.n >= 1 else 1


# -- report -------------------------------------------------------------------------

@dataclass
class InvariantReport:
    kind: str
    dD: int
    dE: int
    h1_order: object
    h1_group: Optional[List[int]]
    lam: Optional[Fraction]
    kappa: Optional[Fraction]
    kappa0: Optional[Fraction]
    alpha: Optional[Fraction]
    kodaira_S: object
    kodaira_S0: object
    singularities: List
    rationality: List[str]
    ruling_count: object
    contractible_count: object
    strongly_balanced_completions: object
    f0_type: str
    validators: ValidatorReport

    @property
    def passed(self) -> bool:
        return self.validators.passed


def analyze(m: SurfaceModel) -> InvariantReport:
    val = verify_qacyclicity(m)
    dD = discriminant(m.boundary)
    dE = discriminant(m.exceptional)
    try:
        h1 = h1_order(m) if val.passed else UNDEFINED
    except ValueError:
        h1 = UNDEFINED
    group = h1_group_affine_ruled(m) if m.kind == AFFINE_RULED else None
    lam = kappa = kappa0 = alpha = None
    if m.kind in CSTAR_KINDS:
        try:
            kd = kodaira_signs(m)
            lam, kappa, kappa0 = kd.lam, kd.kappa, kd.kappa0
        except ValueError:
            pass
    if m.kind == NONEXTENDABLE:
        alpha = alpha_nonextendable(m)
    kS, kS0 = kodaira_dimensions(m)
    sings = singularities(m)

    def attempt(fn):
        try:
            return fn(m)
        except ValueError:
            return UNDECIDED

    r = attempt(count_cstar_rulings)
    ell = attempt(count_contractible_curves) if kS0 == 0 else UNDECIDED
    sb = attempt(strongly_balanced_completion_count)
    return InvariantReport(
        m.kind,
        dD,
        dE,
        h1,
        group,
        lam,
        kappa,
        kappa0,
        alpha,
        kS,
        kS0,
        [d for _, d, _ in sings],
        [x for _, _, x in sings],
        r,
        ell,
        sb,
        m.f0_type,
        val,
    )
