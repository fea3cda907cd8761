import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

import oracles as O
from sepcoset_lab.group_model import IDENTITY, HLetter, XLetter, builtin
from sepcoset_lab.relative_graph import (
    PROVEN_INF,
    ExplorationBudget,
    PathRec,
    all_geodesics,
    ball_elements,
    components,
    delta_estimate,
    estimate_C,
    gromov_product,
    isolated_gaps,
    neighbors,
    penetrated_by_all,
    polygon_components,
    rel_distance,
    relative_metric,
    stable_distance,
    visual_metric_chain,
    xh_distance_fn,
)

B = ExplorationBudget()


def labels(model, gs):
    return sorted(tuple(model.format_letter(s) for s in p.labels) for p in gs.paths)


# --- neighbours --------------------------------------------------------------
def test_neighbors_fc(fc):
    got = [fc.format_letter(s) for s, _ in neighbors(fc, IDENTITY, ExplorationBudget(4, 4, 256))]
    assert got == ["x:a", "x:a^-1", "x:b", "x:b^-1", "h:(ab)", "h:(ab)^-1", "h:(ab)^2", "h:(ab)^-2"]


def test_neighbors_fp_and_no_subgroup_letters(fc, fp):
    assert len(neighbors(fp, IDENTITY, B)) == 6
    assert all(isinstance(s, XLetter) for s, _ in neighbors(fc, IDENTITY, ExplorationBudget(1, 0, 256)))


# --- distances and geodesics -------------------------------------------------
def test_distance_examples(fc, fp):
    assert rel_distance(fc, IDENTITY, fc.parse("(ab)^4"), B)[0].value == 1
    assert rel_distance(fp, IDENTITY, fp.parse("aba"), B) == (rel_distance(fp, IDENTITY, fp.parse("aba"), B)[0], True)
    assert stable_distance(fp, IDENTITY, fp.parse("aba"), B) == 3
    g = fc.parse("b^2aba")
    assert stable_distance(fc, g, g, B) == 0


def test_geodesic_examples(fc, fp):
    assert labels(fp, all_geodesics(fp, IDENTITY, fp.parse("aba"), B)) == [("h:a", "h:b", "h:a")]
    assert labels(fc, all_geodesics(fc, IDENTITY, fc.parse("(ab)^3"), B)) == [("h:(ab)^3",)]
    g = fc.parse("ab^-1")
    assert [p.labels for p in all_geodesics(fc, g, g, B).paths] == [()]
    # four geodesics of length 4, confirmed by the tube oracle
    got = labels(fc, all_geodesics(fc, IDENTITY, fc.parse("b^2aba"), B))
    assert got == [("x:b", "x:a^-1", "h:(ab)^2", "x:a"), ("x:b", "x:a^-1", "h:(ab)^3", "x:b^-1"),
                   ("x:b", "x:b", "h:(ab)", "x:a"), ("x:b", "x:b", "h:(ab)^2", "x:b^-1")]


@pytest.mark.parametrize("name,radius", [("fc", 3), ("fp", 4)])
def test_oracle_small_ball(name, radius):
    m = builtin(name)
    G = O.FC() if name == "fc" else O.FP()
    for g in ball_elements(m, radius):
        t = G.from_atoms(g.word)
        d, paths = O.geodesics(G, t, 3)
        assert stable_distance(m, IDENTITY, g, B) == d
        assert labels(m, all_geodesics(m, IDENTITY, g, B)) == sorted(tuple(x[0] for x in p) for p in paths)


# --- components --------------------------------------------------------------
def test_components_examples(fc, fp):
    p = PathRec(IDENTITY, (HLetter(0, 1), HLetter(1, 1), HLetter(0, 1)), True, B)
    cs = components(fp, p)
    assert [fp.format(c.coset.rep) for c in cs] == ["1", "a", "ab"]
    assert [c.lam for c in cs] == [0, 1, 0]
    assert components(fc, PathRec(IDENTITY, (XLetter(0, 1), XLetter(1, 1)), True, B)) == []
    one = components(fc, PathRec(IDENTITY, (HLetter(0, 2), HLetter(0, -1)), False, B))
    assert len(one) == 1 and one[0].exit == fc.parse("ab")


# --- relative metric ---------------------------------------------------------
def test_relative_metric_examples(fc, fp):
    assert relative_metric(fc, 0, IDENTITY, IDENTITY, B)[0].value == 0
    assert relative_metric(fc, 0, IDENTITY, fc.parse("ab"), B) == (relative_metric(fc, 0, IDENTITY, fc.parse("ab"), B)[0], True)
    assert relative_metric(fp, 0, IDENTITY, fp.parse("a"), B)[0] == PROVEN_INF
    # undeclared route: a finite value never appears, only the budget marker
    v, _ = relative_metric(fp, 0, IDENTITY, fp.parse("a"), B, use_declared=False)
    assert not v.finite


@pytest.mark.parametrize("k", [1, 2, 3, 4, -1, -3])
def test_relative_metric_cyclic_is_twice_k(fc, k):
    v, stable = relative_metric(fc, 0, IDENTITY, fc.sub_element(0, k), B)
    assert stable and v.value == 2 * abs(k)
    if abs(k) <= 2:
        assert O.rel_metric(O.FC(), 0, O.FC().power(k), r=3) == 2 * abs(k)


def test_relative_metric_off_coset(fc):
    assert relative_metric(fc, 0, IDENTITY, fc.parse("a"), B)[0] == PROVEN_INF


# --- hyperbolicity helpers ---------------------------------------------------
def test_gromov_examples(fc, fp):
    d = xh_distance_fn(fp, B)
    assert gromov_product(fp.parse("aba"), fp.parse("ab"), IDENTITY, d) == 2
    g = fc.parse("ab^2")
    assert gromov_product(g, g, g, xh_distance_fn(fc, B)) == 0


def test_delta_examples(fc, fp):
    tree = lambda x, y: fc.x_length(fc.mul(fc.inv(x), y))
    pts = ball_elements(fc, 2)[:9]
    assert delta_estimate(pts, tree) == 0
    assert delta_estimate([IDENTITY], tree) == 0
    rng = random.Random(1)
    sample = rng.sample(ball_elements(fp, 4), 8)
    assert delta_estimate(sample, xh_distance_fn(fp, B)) <= 2


def test_visual_metric_two_points(fp):
    x, y = fp.parse("aba"), fp.parse("ab")
    vm = visual_metric_chain([x, y], 0.1, IDENTITY, xh_distance_fn(fp, B), 0)
    assert vm.D[0][0] == 0
    assert vm.D[0][1] == pytest.approx(math.exp(-0.1 * 2))


# --- the constant C ----------------------------------------------------------
def test_estimate_C_free_product_is_zero(fp):
    est = estimate_C(fp, B, n_values=(3,), samples=300, seed=3)
    assert est.C == 0 and est.n_isolated == 0


def test_triangle_with_connected_components(fc):
    # 1 -> (ab)^2 -> (ab)^2 b -> 1: the only geodesic back ends in H again,
    # so the first H-edge is connected to it and contributes nothing
    V = [IDENTITY, fc.parse("(ab)^2"), fc.parse("(ab)^2b")]
    sides = [all_geodesics(fc, V[i], V[(i + 1) % 3], B).paths[0] for i in range(3)]
    assert [iso for _, _, iso in polygon_components(fc, sides)] == [False, False]
    assert isolated_gaps(fc, sides, B) == []


def test_estimate_C_free_cyclic_triangle_value(fc):
    est = estimate_C(fc, B, samples=2000, seed=0)
    assert est.C == 2
    assert est.worst[-1] == 6  # an isolated (ab)^3 edge in a triangle
    assert est.running_max == sorted(est.running_max)


def test_degenerate_polygon(fc):
    g = fc.parse("ab")
    sides = [all_geodesics(fc, g, g, B).paths[0], all_geodesics(fc, g, g, B).paths[0]]
    assert estimate_C(fc, B, polygons=[sides]).C == 0


# --- penetration -------------------------------------------------------------
def test_penetrated_by_all(fc):
    g = fc.parse("b(ab)^3")
    coset = fc.coset_canonical(fc.parse("a^-1"), 0)
    assert penetrated_by_all(fc, IDENTITY, g, coset, B)
    # b^2 H = ba^-1 H is crossed by all four geodesics to b^2aba, H by none
    g = fc.parse("b^2aba")
    assert penetrated_by_all(fc, IDENTITY, g, fc.coset_canonical(fc.parse("b^2"), 0), B)
    assert not penetrated_by_all(fc, IDENTITY, g, fc.coset_canonical(IDENTITY, 0), B)


# --- properties --------------------------------------------------------------
def elements(name, r):
    return st.sampled_from(ball_elements(builtin(name), r))


@given(st.sampled_from(["fc", "fp"]), st.data())
def test_metric_axioms(name, data):
    m = builtin(name)
    f, g, h = (data.draw(elements(name, 4)) for _ in range(3))
    d = lambda x, y: stable_distance(m, x, y, B)
    assert d(f, g) == d(g, f)
    assert d(f, h) <= d(f, g) + d(g, h)
    assert (d(f, g) == 0) == (f == g)
    assert d(m.mul(h, f), m.mul(h, g)) == d(f, g)


@given(st.data())
def test_geodesics_have_distance_length(data):
    fc = builtin("fc")
    f, g = data.draw(elements("fc", 4)), data.draw(elements("fc", 4))
    gs = all_geodesics(fc, f, g, B)
    assert not gs.overflow
    for p in gs.paths:
        assert len(p) == stable_distance(fc, f, g, B) and p.end(fc) == g
