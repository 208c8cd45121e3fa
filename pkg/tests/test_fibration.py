import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from generators import random_history
from qhplanes.birational import BlowupStep, blowdown
from qhplanes.fibration import (
    TAG_D,
    TAG_E,
    TAG_S0,
    FiberTree,
    RulingDescriptor,
    TaggedFiber,
    adjoint_chain,
    branches,
    columnar_fiber,
    columnar_from_tilde_e,
    contraction_history,
    fiber_from_history,
    fujita_count,
    kernel_defect,
    validate_fiber,
)
from qhplanes.graph import WeightedGraph, chain_entries, e_invariant, tilde_e


def fiber_212():
    return fiber_from_history([BlowupStep.sprouting(0, 1), BlowupStep.subdivisional(0, 1, 2)])


def test_empty_history_is_smooth_fiber():
    f = fiber_from_history([])
    assert f.graph == WeightedGraph.chain([0]) and f.multiplicity == {0: 1}
    assert validate_fiber(f).passed


def test_fiber_212():
    f = fiber_212()
    assert chain_entries(f.graph, 0) == [2, 1, 2]
    assert [f.multiplicity[v] for v in f.graph.chain_order(0)] == [1, 2, 1]
    rep = validate_fiber(f)
    assert rep.passed and rep.clauses["multiplicity_two_shape"]


def test_fiber_3122():
    hist = [
        BlowupStep.sprouting(0, 1),
        BlowupStep.subdivisional(0, 1, 2),
        BlowupStep.subdivisional(2, 1, 3),
    ]
    f = fiber_from_history(hist)
    order = f.graph.chain_order(0)
    assert chain_entries(f.graph, 0) == [3, 1, 2, 2] or chain_entries(f.graph, 0)[::-1] == [3, 1, 2, 2]
    if chain_entries(f.graph, 0) != [3, 1, 2, 2]:
        order = order[::-1]
    assert [f.multiplicity[v] for v in order] == [1, 3, 2, 1]
    assert f.multiplicity == oracles.primitive_fiber_multiplicities(f.graph)
    rep = validate_fiber(f)
    assert rep.passed and rep.clauses["unique_minus_one_multiplicity_gt_1"]


def test_illegal_history_step():
    with pytest.raises(ValueError):
        fiber_from_history([BlowupStep.sprouting(5, 1)])


def test_validator_flags_a_fake_fiber():
    g = WeightedGraph.chain([2, 1, 3])
    f = FiberTree(g, {0: 1, 1: 2, 2: 1}, (), 0)
    rep = validate_fiber(f)
    assert not rep.passed and "kernel_vector" in rep.failures()


@given(st.integers(0, 10**6), st.integers(1, 10))
@settings(max_examples=100)
def test_random_fibers_are_valid(seed, length):
    f = fiber_from_history(random_history(random.Random(seed), length))
    assert not any(kernel_defect(f))
    assert validate_fiber(f).passed
    assert f.multiplicity == oracles.primitive_fiber_multiplicities(f.graph)


@given(st.integers(0, 10**6), st.integers(2, 10))
@settings(max_examples=60)
def test_branches_partition_the_fiber(seed, length):
    f = fiber_from_history(random_history(random.Random(seed), length))
    if len(f.minus_one_vertices()) != 1:
        with pytest.raises(ValueError):
            branches(f)
        return
    parts = branches(f)
    flat = [v for p in parts for v in p]
    assert sorted(map(repr, flat)) == sorted(map(repr, f.graph.ids()))


@given(st.integers(0, 10**6), st.integers(1, 9))
@settings(max_examples=60)
def test_contraction_history_regrows_the_fiber(seed, length):
    f = fiber_from_history(random_history(random.Random(seed), length))
    root, hist = contraction_history(f.graph)
    g = fiber_from_history(hist, root)
    assert g.graph == f.graph and g.multiplicity == f.multiplicity


# -- adjoint and columnar fibers ---------------------------------------------------------

@pytest.mark.parametrize("a, b", [((2,), (2,)), ((3,), (2, 2)), ((2, 2, 2), (4,))])
def test_adjoint_examples(a, b):
    assert adjoint_chain(a).entries == b


def test_adjoint_rejects_non_admissible():
    with pytest.raises(ValueError):
        adjoint_chain((1, 2))


@pytest.mark.parametrize("q, mu", [(Fraction(1, 2), 2), (Fraction(1, 3), 3), (Fraction(2, 5), 5)])
def test_columnar_examples(q, mu):
    col = columnar_from_tilde_e(q)
    assert col.mu == mu and tilde_e(col.A) == q
    assert oracles.chain_det(list(col.A.entries)) == oracles.chain_det(list(col.B.entries)) == mu


def test_columnar_half_is_212():
    col = columnar_from_tilde_e(Fraction(1, 2))
    assert col.A.entries == (2,) and col.B.entries == (2,)


def test_columnar_one_third_orientation():
    col = columnar_from_tilde_e(Fraction(1, 3))
    assert {col.A.entries, col.B.entries} == {(2, 2), (3,)}
    assert tilde_e(col.A) == Fraction(1, 3)


@pytest.mark.parametrize("q", [Fraction(0), Fraction(1), Fraction(3, 2), Fraction(-1, 2)])
def test_columnar_rejects_out_of_range(q):
    with pytest.raises(ValueError):
        columnar_from_tilde_e(q)


def test_columnar_rejects_non_adjoint_pair():
    with pytest.raises(ValueError):
        columnar_fiber((2,), (3,))


@given(st.integers(2, 30), st.integers(1, 29))
def test_columnar_contracts_to_smooth_fiber(p, q):
    from math import gcd

    if q >= p or gcd(p, q) != 1:
        return
    col = columnar_from_tilde_e(Fraction(q, p))
    g = col.fiber.graph
    steps = 0
    while len(g) > 1:
        v = next(x for x in g if g.weight(x) == -1)
        g = blowdown(g, v)
        steps += 1
    assert g.weight(g.ids()[0]) == 0 and steps == len(col.fiber.graph) - 1
    assert e_invariant(col.A) + e_invariant(col.B) == 1


# -- Fujita's count --------------------------------------------------------------------

def _tagged(f, tags):
    return TaggedFiber(f, dict(zip(f.graph.ids(), tags)))


def test_fujita_hirzebruch_like():
    r = RulingDescriptor(1, 1, ())
    assert fujita_count(r, 2, 2) == 0


def test_fujita_two_s0_components():
    f = fiber_212()
    tf = TaggedFiber(f, {0: TAG_S0, 1: TAG_D, 2: TAG_S0})
    r = RulingDescriptor(2, 1, (tf,))
    # h + nu + b2(X) - b2(D) - 2 = 2 + 1 + 5 - 5 - 2
    assert fujita_count(r, 5, 5) == 1


def test_fujita_mismatch_raises():
    with pytest.raises(ValueError, match="FUJITA_MISMATCH"):
        fujita_count(RulingDescriptor(1, 1, ()), 3, 2)


def test_boundary_fibers_do_not_count():
    f = fiber_212()
    tf = TaggedFiber(f, {0: TAG_D, 1: TAG_D, 2: TAG_D})
    assert tf.in_boundary() and RulingDescriptor(1, 1, (tf,)).sigma_sum() == 0


def test_tags_must_cover_the_fiber():
    with pytest.raises(ValueError):
        TaggedFiber(fiber_212(), {0: TAG_D})
    with pytest.raises(ValueError):
        TaggedFiber(fiber_212(), {0: TAG_D, 1: "X", 2: TAG_E})
