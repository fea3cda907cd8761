import pytest
from hypothesis import given, strategies as st

import oracles as O
from sepcoset_lab.group_model import (
    IDENTITY,
    HLetter,
    ModelError,
    XLetter,
    builtin,
    load_model,
    load_model_text,
)


def fc_letters():
    x = st.builds(XLetter, st.integers(0, 1), st.sampled_from([1, -1]))
    h = st.builds(HLetter, st.just(0), st.integers(-3, 3).filter(bool))
    return st.lists(st.one_of(x, h), max_size=8)


def fp_letters():
    a = st.builds(HLetter, st.just(0), st.integers(1, 2))
    b = st.builds(HLetter, st.just(1), st.integers(1, 4))
    return st.lists(st.one_of(a, b), max_size=8)


# --- normal forms ------------------------------------------------------------
def test_free_reduction(fc):
    g = fc.normalize([XLetter(0, 1), XLetter(1, 1), XLetter(1, -1), XLetter(0, 1)])
    assert fc.format(g) == "a^2"


def test_factor_cube_is_identity(fp):
    assert fp.normalize([HLetter(0, 1)] * 3) == IDENTITY


def test_subgroup_letter_expands(fc):
    g = fc.normalize([XLetter(0, 1), HLetter(0, 2)])
    assert O.FC().from_atoms(g.word) == "aabab"


def test_mul_inv_examples(fc, fp):
    g = fc.parse("ab")
    assert fc.mul(IDENTITY, g) == g
    assert fc.format(fc.inv(g)) == "b^-1a^-1"
    assert fp.format(fp.mul(fp.parse("ab"), fp.parse("b^4"))) == "a"


def test_subgroup_membership(fc, fp):
    assert fc.subgroup_membership(fc.parse("ababab"), 0) == 3
    assert fc.subgroup_membership(fc.parse("aab"), 0) is None
    assert fc.subgroup_membership(IDENTITY, 0) == 0
    assert fp.subgroup_membership(fp.parse("a^2"), 0) == 2
    assert fp.subgroup_membership(fp.parse("a^2"), 1) is None


def test_coset_canonical(fc, fp):
    assert fc.coset_canonical(IDENTITY, 0).rep == IDENTITY
    assert fc.format(fc.coset_canonical(fc.parse("a(ab)^2"), 0).rep) == "a"
    assert fp.format(fp.coset_canonical(fp.parse("ab"), 1).rep) == "a"


def test_coset_canonical_matches_scan(fc):
    G = O.FC()
    for g in fc_ball(fc, 4):
        w = G.from_atoms(g.word)
        # brute-force shortlex minimum over g (ab)^k, |k| <= |g| + 2
        cands = [G.mul(w, G.power(k)) for k in range(-len(w) - 2, len(w) + 3)]
        best = min(cands, key=lambda s: (len(s), [G.order[c] for c in s]))
        assert G.from_atoms(fc.coset_canonical(g, 0).rep.word) == best


def fc_ball(model, r):
    from sepcoset_lab.relative_graph import ball_elements
    return ball_elements(model, r)


def test_h_enumerate(fc, fp):
    assert fc.h_enumerate(0, 4) == [1, -1, 2, -2]
    assert fc.h_enumerate(0, 0) == []
    assert fp.h_enumerate(0, 1) == [1, 2]
    assert fp.h_enumerate(1, 7) == [1, 2, 3, 4]


def test_h_enumerate_complete(fc):
    G = O.FC()
    for B in range(0, 7):
        brute = {w for w in G.words(B) if w and G.in_sub(w)}
        got = {G.from_atoms(fc.sub_element(0, k).word) for k in fc.h_enumerate(0, B)}
        assert got == brute


def test_x_length(fc, fp):
    assert fc.x_length(IDENTITY) == 0
    assert fc.x_length(fc.parse("aabab")) == 5
    assert fp.x_length(fp.parse("ab")) == 2


def test_letters_roundtrip(fc, fp):
    assert fc.parse_letter("h:ab^-3") == HLetter(0, -3)
    assert fc.format_letter(HLetter(0, -3)) == "h:(ab)^-3"
    assert fc.format_letter(XLetter(0, -1)) == "x:a^-1"
    assert fp.format_letter(HLetter(1, 4)) == "h:b^4"
    with pytest.raises(ValueError):
        fc.parse_letter("a")


# --- model files -------------------------------------------------------------
def test_load_model_file(tmp_path):
    (tmp_path / "z3.csv").write_text("0,1,2\n1,2,0\n2,0,1\n")
    (tmp_path / "m.txt").write_text("[model] kind=free_product factors=table:z3.csv,Z5\n")
    m = load_model(str(tmp_path / "m.txt"))
    fp = builtin("fp")
    assert m.format(m.parse("ab^2a")) == fp.format(fp.parse("ab^2a"))


@pytest.mark.parametrize("text", [
    "kind=free_cyclic",
    "[model] kind=nonsense",
    "[model] kind=free_product factors=Q8",
])
def test_load_model_rejects(text):
    with pytest.raises(ModelError):
        load_model_text(text)


def test_corrupted_table_rejected(tmp_path):
    (tmp_path / "t.csv").write_text("0,1,2\n1,1,0\n2,0,1\n")
    (tmp_path / "m.txt").write_text("[model] kind=free_product factors=table:t.csv\n")
    with pytest.raises(ModelError):
        load_model(str(tmp_path / "m.txt"))


# --- properties --------------------------------------------------------------
@given(fc_letters(), fc_letters())
def test_fc_normalize_is_homomorphism(u, v):
    fc = builtin("fc")
    assert fc.normalize(u + v) == fc.mul(fc.normalize(u), fc.normalize(v))
    back = [fc.letter_inverse(s) for s in reversed(u)]
    assert fc.normalize(u + back) == IDENTITY


@given(fp_letters(), fp_letters(), fp_letters())
def test_fp_associative_with_inverses(u, v, w):
    fp = builtin("fp")
    a, b, c = fp.normalize(u), fp.normalize(v), fp.normalize(w)
    assert fp.mul(fp.mul(a, b), c) == fp.mul(a, fp.mul(b, c))
    assert fp.mul(a, fp.inv(a)) == IDENTITY
    assert fp.parse(fp.format(a)) == a


@given(fc_letters(), st.integers(-4, 4))
def test_coset_canonical_is_congruence(u, k):
    fc = builtin("fc")
    g = fc.normalize(u)
    assert fc.coset_canonical(g, 0) == fc.coset_canonical(fc.mul(g, fc.sub_element(0, k)), 0)
    assert fc.x_length(fc.coset_canonical(g, 0).rep) <= fc.x_length(g)
