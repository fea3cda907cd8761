import pytest
from hypothesis import given, strategies as st

import oracles as O
from sepcoset_lab.group_model import IDENTITY, HLetter, ModelError, XLetter, builtin
from sepcoset_lab.relative_graph import ExplorationBudget, ball_elements
from sepcoset_lab.rays import (
    SchemeRejected,
    WindowError,
    align_same_limit,
    concat_point,
    convergence_check,
    format_scheme,
    parse_scheme,
    phi_prefix,
    pigeonhole_K,
    ray_sep_cosets,
    ray_truncation,
)

B = ExplorationBudget()
FC_RAY = "period=[h:ab^3, x:a]"
FC_RAY2 = "base=a^-1 prefix=[x:a] period=[h:ab^3, x:a]"
FP_RAY = "period=[h:a, h:b]"
FP_RAY2 = "base=b prefix=[h:b^-1, h:a] period=[h:b, h:a]"


def test_parse_and_format(fc):
    s = parse_scheme(fc, FC_RAY2)
    assert s.prefix == (XLetter(0, 1),) and s.period == (HLetter(0, 3), XLetter(0, 1))
    assert format_scheme(fc, s) == "base=a^-1 prefix=[x:a] period=[h:(ab)^3, x:a]"
    assert parse_scheme(fc, format_scheme(fc, s)) == s
    assert s.shift(3).labels(7) == s.labels(7)
    with pytest.raises(ModelError):
        parse_scheme(fc, "prefix=[x:a]")


def test_non_geodesic_scheme_rejected(fc):
    with pytest.raises(SchemeRejected) as e:
        ray_truncation(fc, parse_scheme(fc, "period=[x:a, x:a^-1]"), 4, B)
    assert e.value.n == 2


def test_ray_records_grow(fc, fp):
    s = parse_scheme(fc, FC_RAY)
    assert [len(ray_sep_cosets(fc, s, d, 5, B)) for d in (2, 4, 6)] == [1, 2, 3]
    assert fc.format(ray_sep_cosets(fc, s, 4, 5, B)[1].coset.rep) == "abababa"
    assert len(ray_sep_cosets(fp, parse_scheme(fp, FP_RAY), 6, 1, B)) == 6


def test_convergence_rows(fc, fp):
    rep = convergence_check(fc, parse_scheme(fc, FC_RAY), [2, 4, 6, 8], 5, B)
    assert rep.rows == [(2, 1, 2, True, True), (4, 2, 3, True, True), (6, 3, 4, True, True), (8, 4, 5, True, True)]
    assert rep.verdict == "diverging"
    rep = convergence_check(fp, parse_scheme(fp, FP_RAY), [2, 4, 6], 1, B)
    assert [r[1:3] for r in rep.rows] == [(2, 2), (4, 4), (6, 6)]
    with pytest.raises(ValueError):
        convergence_check(fp, parse_scheme(fp, FP_RAY), [4, 2], 1, B)


def test_concat_point(fc, fp):
    s = parse_scheme(fc, FC_RAY)
    c = concat_point(fc, s.point(fc, 3), s, B)
    assert c.k == 3 and c.f_values[:5] == [-3, -1, 1, 3, 3]
    c = concat_point(fp, fp.parse("ab^2"), parse_scheme(fp, FP_RAY), B)
    assert c.k == 2 and c.f_values[:4] == [-2, 0, 1, 1]
    assert concat_point(fc, fc.parse("b"), s, B).k == 0


def test_phi_element_is_lexmin(fc):
    got = phi_prefix(fc, fc.parse("b^2aba"), B)
    assert [fc.format_letter(x) for x in got.labels] == ["x:b", "x:a^-1", "h:(ab)^2", "x:a"]
    assert got.certified == 4


def test_phi_scheme_certified_length(fc, fp):
    s = parse_scheme(fc, FC_RAY)
    got = phi_prefix(fc, s, B, D=5, depth=6)
    assert got.labels == s.labels(6) and got.certified == 4
    got = phi_prefix(fp, parse_scheme(fp, FP_RAY), B, D=1, depth=6)
    assert got.certified == 5
    with pytest.raises(ValueError):
        phi_prefix(fc, s, B)


def test_alignment_same_limit(fc, fp):
    al = align_same_limit(fc, parse_scheme(fc, FC_RAY), parse_scheme(fc, FC_RAY2), 5, 6, B, C_hat=2)
    assert len(al) == 3
    assert all(a.entrance_gap.value == 0 and a.exit_gap.value == 0 for a in al)
    al = align_same_limit(fp, parse_scheme(fp, FP_RAY), parse_scheme(fp, FP_RAY2), 1, 6, B)
    assert len(al) == 6


def test_alignment_needs_common_tail(fc):
    other = parse_scheme(fc, "period=[h:ab^3, x:b]")
    with pytest.raises((WindowError, ValueError, SchemeRejected)):
        align_same_limit(fc, parse_scheme(fc, FC_RAY), other, 5, 4, B)


def test_pigeonhole_K(fc, fp):
    r = pigeonhole_K(fc, 16, B)
    assert (r.K, r.counts) == (289, [17])  # |k| <= 8
    assert pigeonhole_K(fc, 2, B).K == 9
    assert pigeonhole_K(fp, 16, B).K == 1
    with pytest.raises(WindowError):
        pigeonhole_K(fc, 16, B, window=5)


@pytest.mark.parametrize("t", range(0, 9))
def test_K_matches_closed_form(fc, t):
    # d^(1, (ab)^k) = 2|k|, so |{k : 2|k| <= t}| = 2 floor(t/2) + 1
    assert pigeonhole_K(fc, t, B).counts == [2 * (t // 2) + 1]


def test_cyclic_gap_oracle():
    G = O.FC()
    assert [O.rel_metric(G, 0, G.power(k), r=3) for k in (-2, -1, 0, 1, 2)] == [4, 2, 0, 2, 4]


@given(st.data())
def test_phi_matches_oracle(data):
    fc = builtin("fc")
    g = data.draw(st.sampled_from(ball_elements(fc, 4)))
    G = O.FC()
    want = O.lexmin(G, G.from_atoms(g.word), 3)
    assert tuple(fc.format_letter(x) for x in phi_prefix(fc, g, B).labels) == tuple(want)
