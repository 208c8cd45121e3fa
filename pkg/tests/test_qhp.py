import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

import oracles
from generators import fractions_with_denominator_at_most
from qhplanes.birational import SPROUTING, SUBDIVISIONAL, BlowupStep
from qhplanes.fibration import columnar_from_tilde_e
from qhplanes.graph import Vertex, WeightedGraph, discriminant
from qhplanes.qhp import (
    AFFINE_RULED,
    NEG_INFINITY,
    NOT_RATIONAL,
    RATIONAL,
    UNDECIDED,
    UNDEFINED,
    UNTWISTED_P1,
    ConstructionError,
    RuledModelBuilder,
    SurfaceModel,
    _add_columnar,
    _finish,
    affine_spec_from_fiber,
    alpha_nonextendable,
    alpha_value,
    analyze,
    boundary_pattern,
    construct_affine_ruled,
    construct_cstar,
    construct_nonextendable,
    count_contractible_curves,
    count_cstar_rulings,
    fundamental_cycle,
    gid,
    h1_group_affine_ruled,
    h1_order,
    is_platonic_triple,
    is_rational_singularity,
    kappa_pair,
    kodaira_dimensions,
    kodaira_signs,
    lambda_value,
    parametric_domain,
    strongly_balanced_completion_count,
    verify_qacyclicity,
)
from qhplanes.graph import arithmetic_genus

S, D = SPROUTING, SUBDIVISIONAL


# -- affine-ruled ----------------------------------------------------------------------

def test_affine_ruled_212():
    spec = affine_spec_from_fiber(WeightedGraph.chain([2, 1, 2], ids=[1, 2, 3]), 1)
    m = construct_affine_ruled([spec])
    r = analyze(m)
    assert (r.dD, r.dE, r.h1_order, r.h1_group) == (-2, 2, 1, [1])
    assert r.passed and m.ruling.h == 1 and m.ruling.nu == 1
    assert oracles.graph_det(m.boundary) == -2


def test_affine_ruled_h1_two():
    hist = [(D, ("Dh", 0), 1), (D, (0, 1), 2), (S, 2, 3), (S, 3, 4), (D, (3, 4), 5)]
    m = construct_affine_ruled([hist])
    assert (discriminant(m.boundary), discriminant(m.exceptional)) == (-8, 2)
    assert h1_order(m) == 2 and h1_group_affine_ruled(m) == [2]
    assert m.fiber_data[0]["mu_C"] == 4


def _fixed_boundary_fibers():
    """The three fiber shapes of the family with fixed boundary."""
    first = WeightedGraph.chain([2, 2, 1, 3], ids=["e2", "e1", "c", "d"])
    second = WeightedGraph.chain([2, 1, 2], ids=["d", "c", "e"])
    third = WeightedGraph(
        [Vertex("d1", -2), Vertex("d2", -2), Vertex("d3", -2), Vertex("c", -1)],
        [("d1", "d2"), ("d2", "d3"), ("d2", "c")],
    )
    return (first, "d"), (second, "d"), (third, "d1")


@pytest.mark.parametrize("branched", [0, 1, 2, 3])
def test_fixed_boundary_family_has_two_torsion(branched):
    (f1, a1), (f2, a2), (f3, a3) = _fixed_boundary_fibers()
    specs = [affine_spec_from_fiber(f1, a1), affine_spec_from_fiber(f2, a2)]
    specs += [affine_spec_from_fiber(f3, a3) for _ in range(branched)]
    m = construct_affine_ruled(specs)
    rep = verify_qacyclicity(m)
    assert rep.passed
    assert h1_group_affine_ruled(m) == [1, 1] + [2] * branched
    assert h1_order(m) == 2 ** branched
    # boundary pieces are [3], [2] and then [2,2,2]
    d_parts = sorted(fd["d_D"] for fd in m.fiber_data)
    assert d_parts == sorted([3, 2] + [4] * branched)
    e_parts = [sorted(-m.surface.weight(v) for v in fd["E"]) for fd in m.fiber_data]
    assert e_parts[:2] == [[2, 2], [2]]


def test_affine_ruled_errors():
    with pytest.raises(ConstructionError) as e:
        construct_affine_ruled([])
    assert e.value.clause == "NO_SINGULAR_FIBER"
    with pytest.raises(ConstructionError) as e:
        construct_affine_ruled([[(S, 0, 1)]])
    assert e.value.clause == "FIRST_CENTER_ON_SECTION"
    with pytest.raises(ConstructionError) as e:
        construct_affine_ruled([[(D, ("Dh", 0), 1), (S, 0, 2)]])
    assert e.value.clause == "UNIQUE_MINUS_ONE"
    with pytest.raises(ConstructionError) as e:
        construct_affine_ruled([[(D, ("Dh", 0), 1)]])
    assert e.value.clause == "UNIQUE_MINUS_ONE"


def test_affine_spec_attach_errors():
    g = WeightedGraph.chain([2, 1, 2], ids=[1, 2, 3])
    with pytest.raises(ConstructionError):
        affine_spec_from_fiber(g, 9)
    with pytest.raises(ConstructionError):
        affine_spec_from_fiber(WeightedGraph.chain([2, 2], ids=[1, 2]), 1)


# -- nonextendable ----------------------------------------------------------------------

def test_nonextendable_three_halves():
    m = construct_nonextendable(3, 0, [Fraction(1, 2)] * 3)
    r = analyze(m)
    assert (r.dD, r.dE, r.h1_order) == (-12, 12, 1)
    assert r.alpha == Fraction(-1, 2) and r.kodaira_S == NEG_INFINITY and r.kodaira_S0 == NEG_INFINITY
    assert r.singularities[0].kind == "FORK" and r.singularities[0].fork_type == (2, 2, 2)
    assert r.ruling_count == 4 and r.passed


def test_nonextendable_genus_one():
    m = construct_nonextendable(1, 1, [])
    assert list(m.exceptional.vertices) == [Vertex("Eh", -1, 1)]
    assert alpha_nonextendable(m) == 0
    assert kodaira_dimensions(m) == (NEG_INFINITY, 0)
    assert (discriminant(m.boundary), discriminant(m.exceptional)) == (-1, 1)
    assert is_rational_singularity(m.exceptional) == NOT_RATIONAL


@pytest.mark.parametrize(
    "args, clause",
    [
        ((1, 0, [Fraction(1, 2)] * 3), "SUM_TILDE_E_BELOW_N"),
        ((0, 1, []), "N_POSITIVE_REQUIRED"),
        ((1, -1, []), "GENUS_NONNEGATIVE"),
        ((2, 1, [Fraction(3, 2)]), "TILDE_E_RANGE"),
        ((2, 0, [Fraction(1, 2)]), "G_POSITIVE_REQUIRED"),
    ],
)
def test_nonextendable_errors(args, clause):
    with pytest.raises(ConstructionError) as e:
        construct_nonextendable(*args)
    assert e.value.clause == clause


POOL = fractions_with_denominator_at_most(6)


@given(st.integers(1, 5), st.integers(0, 2), st.lists(st.sampled_from(POOL), max_size=4))
@settings(max_examples=40, deadline=None)
def test_nonextendable_models_are_q_acyclic_and_contractible(N, g, es):
    if sum(es) >= N or (g == 0 and len(es) < 3):
        return
    m = construct_nonextendable(N, g, es)
    r = analyze(m)
    assert r.passed and r.dD * r.dE < 0 and r.h1_order == 1
    assert r.alpha == alpha_value(g, [e.denominator for e in es])


# -- C*-rulings -------------------------------------------------------------------------

def test_twisted_212_is_type_a_i():
    m = construct_cstar("TWISTED", {})
    kd = kodaira_signs(m)
    assert m.f0_type == "A.i" and kd.kappa == kd.kappa0 == Fraction(-1, 2)
    assert verify_qacyclicity(m).passed


def test_twisted_tip_type_gives_kappa0_zero():
    m = construct_cstar("TWISTED", {"columnar": ["1/2"], "f0_history": [(D, ("Dh", 2))]})
    kd = kodaira_signs(m)
    assert m.f0_type == "A.iv" and m.mu == 2
    assert kd.kappa0 == 0 and kd.kodaira_S0 == 0
    r = analyze(m)
    assert r.passed and r.h1_order == 1


def test_untwisted_c1_examples():
    m = construct_cstar("UNTWISTED_C1", {"f0_history": [(D, ("D1", 0))]})
    assert m.f0_type == "B.i" and verify_qacyclicity(m).passed
    m = construct_cstar("UNTWISTED_C1", {"columnar": ["1/2"], "f0_tilde": "1/2", "f0_history": [(S, "A1")]})
    assert m.f0_type == "B.iii" and m.mu_disjoint == 2
    assert kodaira_signs(m).kappa0 == 0
    assert strongly_balanced_completion_count(m) == 2


def test_untwisted_c1_first_center_rule():
    with pytest.raises(ConstructionError) as e:
        construct_cstar("UNTWISTED_C1", {"f0_history": [(S, 0)]})
    assert e.value.clause == "F0_FIRST_CENTER"
    with pytest.raises(ConstructionError) as e:
        construct_cstar("UNTWISTED_C1", {})
    assert e.value.clause == "F0_HISTORY_NONEMPTY"


def test_untwisted_p1_examples():
    m = construct_cstar("UNTWISTED_P1", {"N": 1, "columnar": ["1/2", "1/3"], "f0_history": [(S, 0)]})
    assert m.f0_type == "C" and kodaira_signs(m).kappa0 == Fraction(1, 6)
    m = construct_cstar("UNTWISTED_P1", {"N": 2, "columnar": ["1/2", "1/2"], "f0_tilde": "1/2", "f0_history": [(S, "C")]})
    r = analyze(m)
    assert (r.kappa0, r.dD, r.dE, r.h1_order) == (0, -16, 1, 4)


def test_untwisted_p1_degenerate():
    with pytest.raises(ConstructionError) as e:
        construct_cstar("UNTWISTED_P1", {"N": 1, "columnar": ["1/2", "1/2"], "f0_history": [(S, 0)]})
    assert e.value.clause == "D0-COMPONENT-DEGENERATE"


def test_unknown_case():
    with pytest.raises(ConstructionError):
        construct_cstar("ELLIPTIC", {})


def _random_cstar(rng):
    case = rng.choice(["TWISTED", "UNTWISTED_C1", "UNTWISTED_P1"])
    params = {"columnar": [str(rng.choice(POOL)) for _ in range(rng.randint(0, 3))]}
    if case == "UNTWISTED_P1":
        params["N"] = rng.randint(1, 3)
    if case != "TWISTED" and rng.random() < 0.5:
        params["f0_tilde"] = str(rng.choice(POOL))
    known = {"TWISTED": [0, 1, 2, "Dh"], "UNTWISTED_C1": [0, "D1", "D2"], "UNTWISTED_P1": [0, "D1", "D2"]}[case]
    if "f0_tilde" in params:
        known = ["C", "A1", "B1", "D1", "D2"]
    hist = []
    nxt = 10
    for _ in range(rng.randint(0 if case == "TWISTED" else 1, 4)):
        if rng.random() < 0.5:
            hist.append((S, rng.choice([k for k in known if k not in ("Dh", "D1", "D2")]), nxt))
        else:
            hist.append((D, tuple(rng.sample(known, 2)), nxt))
        known.append(nxt)
        nxt += 1
    params["f0_history"] = hist
    return case, params


@given(st.integers(0, 10**9))
@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
def test_cstar_clauses_agree_with_determinant(seed):
    case, params = _random_cstar(random.Random(seed))
    try:
        m = construct_cstar(case, params)
    except (ConstructionError, ValueError):
        return
    rep = verify_qacyclicity(m)
    assert rep.info["clauses_agree_with_determinant"]
    assert rep.clauses["fujita_equation"] and rep.clauses["fujita_sigma"]
    if rep.passed:
        r = analyze(m)
        assert r.dD * r.dE < 0
        assert isinstance(r.h1_order, int) and r.h1_order >= 1


# -- validators on hand-built models ----------------------------------------------------

def test_two_boundary_fibers_fail_the_nu_clause():
    b = RuledModelBuilder()
    b.add_horizontal("Dh", -1)
    b.add_fiber("Finf", {"Dh": 1}, in_boundary=True)
    b.add_fiber("Finf2", {"Dh": 1}, in_boundary=True)
    b.add_fiber("F1", {"Dh": 1})
    b.blow("F1", D, ("Dh", 0), 1)
    b.blow("F1", D, (0, 1), 2)
    m = _finish(b, AFFINE_RULED, [gid("F1", 2)], 1, 2, strict=False)
    rep = verify_qacyclicity(m)
    assert rep.clauses["nu_at_most_one"] is False
    assert "nu_at_most_one" in rep.failures()


def test_degenerate_p1_model_fails_twig_clause_and_determinant():
    b = RuledModelBuilder()
    b.add_horizontal("D1", 1)
    b.add_horizontal("D2", -1)
    cs = []
    for i in (1, 2):
        _add_columnar(b, f"F{i}", columnar_from_tilde_e(Fraction(1, 2)), "D1", {"D2": 1})
        cs.append(gid(f"F{i}", "C"))
    b.add_fiber("F0", {"D1": 1, "D2": 1})
    c = b.blow("F0", S, 0)
    m = _finish(b, UNTWISTED_P1, cs + [gid("F0", c)], 2, 0, strict=False, n=2, columnar_mu=(2, 2))
    rep = verify_qacyclicity(m)
    assert rep.info["dD"] == 0 == oracles.graph_det(m.boundary)
    assert rep.clauses["twig_sum_not_minus_D0_squared"] is False
    assert rep.clauses["det_boundary_nonzero"] is False
    assert rep.info["clauses_agree_with_determinant"]
    assert analyze(m).h1_order == UNDEFINED


def test_hand_model_validators():
    m = SurfaceModel.hand(WeightedGraph.chain([1]), WeightedGraph.chain([2]))
    rep = verify_qacyclicity(m)
    assert rep.clauses["rational_tree"] and rep.clauses["nu_at_most_one"] is None
    assert kodaira_dimensions(m) == (UNDECIDED, UNDECIDED)


# -- Kodaira dimension -----------------------------------------------------------------

def test_kodaira_dispatch_examples():
    lam = lambda_value(1, 1, [2])
    assert lam == Fraction(1, 2) and kappa_pair("A.i", lam) == (0, 0)
    assert kappa_pair("B.i", lam, mu=2, mu_tilde=3) == (Fraction(-1, 2), 0)
    assert kappa_pair("C", lambda_value(2, 0, [2, 2])) == (0, 0)
    assert kappa_pair("A.ii", Fraction(1), mu=3) == (Fraction(1, 2), Fraction(5, 6))
    with pytest.raises(ValueError):
        kappa_pair("NONE", lam)
    with pytest.raises(ValueError, match="UNDECIDED"):
        kappa_pair("B.iii", lam)


def test_parametric_domains_cover_every_label():
    for label in ("A.i", "A.ii", "A.iii", "A.iv", "A.v", "B.i", "B.ii", "B.iii", "C"):
        assert parametric_domain(label, 1, 3)


# -- alpha and Platonic triples ----------------------------------------------------------

def test_alpha_examples():
    assert alpha_value(0, (2, 3, 6)) == 0
    assert alpha_value(0, (2, 3, 5)) == Fraction(-1, 30)
    assert alpha_value(1, ()) == 0


def test_platonic_examples():
    assert is_platonic_triple(2, 3, 5)
    assert not is_platonic_triple(2, 3, 6)
    assert is_platonic_triple(1, 7, 9)
    with pytest.raises(ValueError):
        is_platonic_triple(0, 2, 2)


def test_alpha_requires_nonextendable():
    with pytest.raises(ValueError):
        alpha_nonextendable(construct_cstar("TWISTED", {}))


# -- singularities -----------------------------------------------------------------------

def test_fundamental_cycle_examples():
    star = WeightedGraph.star(-3, [[2], [2], [2]])
    z = fundamental_cycle(star)
    assert set(z.coefficients.values()) == {1} and arithmetic_genus(z) == 0
    star = WeightedGraph.star(-1, [[4], [4], [4]])
    z = fundamental_cycle(star)
    assert z.coefficient("c") == 3 and all(z.coefficient((k, 0)) == 1 for k in range(3))
    assert arithmetic_genus(z) == 1
    assert is_rational_singularity(star) == NOT_RATIONAL
    assert fundamental_cycle(WeightedGraph.chain([2])).coefficients == {0: 1}


def test_fundamental_cycle_rejects_indefinite():
    with pytest.raises(ValueError):
        fundamental_cycle(WeightedGraph.chain([2, 1, 2]))


@given(st.lists(st.integers(2, 6), min_size=1, max_size=6))
def test_admissible_chains_are_rational(entries):
    assert is_rational_singularity(WeightedGraph.chain(entries)) == RATIONAL


# -- counts ------------------------------------------------------------------------------

def test_count_edge_cases():
    plane = SurfaceModel.hand(WeightedGraph.chain([1]), exceptional_plane=True)
    assert count_cstar_rulings(plane) == 0 and count_contractible_curves(plane) == 0
    general = SurfaceModel.hand(WeightedGraph.chain([1]), kodaira_S0=2)
    assert count_cstar_rulings(general) == 0
    nonlog = SurfaceModel.hand(WeightedGraph.chain([1]), kodaira_S0=1, logarithmic=False)
    assert count_cstar_rulings(nonlog) == 1
    undecided = SurfaceModel.hand(WeightedGraph.chain([1]))
    with pytest.raises(ValueError):
        count_cstar_rulings(undecided)
    other = SurfaceModel.hand(WeightedGraph.chain([2, 2, 2]), kodaira_S0=0, logarithmic=True)
    assert count_cstar_rulings(other) == 2
    assert count_contractible_curves(other) == frozenset({1, 2})
    nonlog0 = SurfaceModel.hand(WeightedGraph.chain([2, 2]), kodaira_S0=0, logarithmic=False)
    assert count_contractible_curves(nonlog0) == UNDECIDED
    with pytest.raises(ValueError):
        count_contractible_curves(nonlog)


def test_affine_ruled_is_outside_the_ruling_count():
    m = construct_affine_ruled([affine_spec_from_fiber(WeightedGraph.chain([2, 1, 2], ids=[1, 2, 3]), 1)])
    with pytest.raises(ValueError):
        count_cstar_rulings(m)
    assert analyze(m).ruling_count == UNDECIDED


def test_fork_22k_quotient_counts():
    for k, r in ((1, 4), (2, 2), (4, 2)):
        e = WeightedGraph.star(-2, [[2], [2], [2] * k])
        m = SurfaceModel.hand(WeightedGraph.chain([1]), e, kodaira_S0=NEG_INFINITY, logarithmic=True)
        assert count_cstar_rulings(m) == r
    e = WeightedGraph.star(-2, [[2], [3], [3]])
    m = SurfaceModel.hand(WeightedGraph.chain([1]), e, kodaira_S0=NEG_INFINITY, logarithmic=True)
    assert count_cstar_rulings(m) == 1


def test_boundary_pattern_negative_cases():
    assert boundary_pattern(WeightedGraph.chain([2, 2])) == "iv"
    assert boundary_pattern(WeightedGraph.star(-1, [[2], [2], [2]])) == "iv"


def test_strongly_balanced_completion_counts():
    assert strongly_balanced_completion_count(construct_cstar("TWISTED", {})) == 1
    m = construct_cstar("UNTWISTED_C1", {"f0_history": [(D, ("D1", 0))]})
    assert strongly_balanced_completion_count(m) == 1
