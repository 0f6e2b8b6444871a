import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from snaketile.errors import BudgetExceeded, InstanceError, UnsupportedCapability
from snaketile.groups import (AmalgamPresentation, Element, FiniteGroupTable, FiniteMarkedGroup,
                              FreeGroup, HnnNormalForm, LamplighterGroup, PermutationLimitGroup,
                              all_words, ball, cyclic_table, elementary_abelian_table, evaluate,
                              hnn_normal_form, multiply, symmetric_table, word_pi, z_projection)
from snaketile.tower import build_level

LAMP = LamplighterGroup()
PERM = PermutationLimitGroup()
FREE = FreeGroup()
G1 = build_level("lamplighter", 1)


def words_over(letters, max_size=6):
    return st.lists(st.sampled_from(letters), max_size=max_size).map(tuple)


# wreath arithmetic written out independently: lamps as a set, head position
def wreath_eval(word):
    lamps, head = set(), 0
    for x in word:
        if x == "a":
            lamps ^= {head}
        else:
            head += 1 if x == "t" else -1
    return frozenset(lamps), head


# permutations of a window of Z under the right action, letter by letter
def perm_eval(word, window=range(-12, 13)):
    img = {p: p for p in window}
    for x in word:
        for p, q in img.items():
            if x == "a":
                img[p] = {0: 1, 1: 0}.get(q, q)
            else:
                img[p] = q + (1 if x == "t" else -1)
    return tuple(sorted(img.items()))


class TestEvaluate:
    def test_lamplighter_identity(self):
        assert evaluate(LAMP, "").canon == ((), 0)

    def test_lamplighter_conjugated_lamp(self):
        assert evaluate(LAMP, "t a t⁻¹").canon == ((1,), 0)

    def test_two_lamps(self):
        assert evaluate(LAMP, "a t a t^-1").canon == ((0, 1), 0)

    def test_free_reduction(self):
        assert evaluate(FREE, "a t t⁻¹ a").canon == ("a", "a")

    def test_unknown_letter(self):
        with pytest.raises(InstanceError):
            evaluate(FREE, "b")

    def test_multiply_examples(self):
        a = evaluate(LAMP, "a")
        assert (a * a).canon == LAMP.identity()
        assert multiply(FREE, evaluate(FREE, "a t"), evaluate(FREE, "t^-1 a")).canon == ("a", "a")

    def test_mixed_groups_rejected(self):
        with pytest.raises(InstanceError):
            multiply(FREE, evaluate(FREE, "a"), evaluate(LAMP, "a"))

    def test_power_tokens(self):
        assert FREE.gens.parse("a^2 t² a^-1") == ("a", "a", "t", "t", "A")


class TestCanonicalForms:
    @given(words_over(LAMP.letters), words_over(LAMP.letters))
    def test_lamplighter_matches_wreath_oracle(self, u, v):
        same = LAMP.eval_canon(u) == LAMP.eval_canon(v)
        assert same == (wreath_eval(u) == wreath_eval(v))

    @given(words_over(PERM.letters), words_over(PERM.letters))
    def test_permutation_limit_matches_composition(self, u, v):
        same = PERM.eval_canon(u) == PERM.eval_canon(v)
        assert same == (perm_eval(u) == perm_eval(v))

    @pytest.mark.parametrize("G", [FREE, LAMP, PERM, G1.group,
                                   build_level("permutations", 1).group],
                             ids=lambda G: G.name)
    def test_group_axioms(self, G):
        @settings(max_examples=60, deadline=None)
        @given(words_over(G.letters), words_over(G.letters), words_over(G.letters))
        def check(u, v, w):
            x, y, z = (G.eval_canon(s) for s in (u, v, w))
            assert G.eval_canon(u + v) == G.mul(x, y)
            assert G.mul(G.mul(x, y), z) == G.mul(x, G.mul(y, z))
            assert G.mul(x, G.inv(x)) == G.identity()
            assert G.mul(x, G.identity()) == x
            assert G.pi(G.mul(x, y)) == G.pi(x) + G.pi(y)
        check()


class TestHnn:
    def setup_method(self):
        base = G1.presentation
        from snaketile.groups import HnnPresentation
        self.P = HnnPresentation(base.A, base.C, base.emb_minus, base.emb_plus,
                                 names={"a": 1, "b": 2})

    def test_conjugate_left_copy(self):
        assert hnn_normal_form(self.P, "t⁻¹ a t") == HnnNormalForm(2, ())

    def test_stable_letter_cancels(self):
        assert hnn_normal_form(self.P, "t t⁻¹") == HnnNormalForm(0, ())

    def test_pinch_to_identity(self):
        assert hnn_normal_form(self.P, "a t b t⁻¹") == HnnNormalForm(0, ())

    def test_projection_of_conjugate(self):
        assert z_projection(G1.group, G1.group.eval_canon(("T", "a", "t"))) == 0

    @settings(max_examples=80, deadline=None)
    @given(words_over(("a", "b", "t", "T")), words_over(("a", "b", "t", "T")))
    def test_normal_form_of_products(self, u, v):
        P = self.P
        nu, nv = hnn_normal_form(P, u), hnn_normal_form(P, v)
        assert hnn_normal_form(P, u + v) == hnn_normal_form(P, P.nf_word(nu) + P.nf_word(nv))
        assert hnn_normal_form(P, P.nf_word(nu)) == nu

    def test_syllables_use_transversals(self):
        for w in all_words(("a", "b", "t", "T"), 4):
            nf = hnn_normal_form(self.P, w)
            for eps, g in nf.syllables:
                reps = self.P.trans_plus if eps == 1 else self.P.trans_minus
                assert g in reps


class TestAmalgam:
    def test_trivial_amalgam_alternates(self):
        Z2, one = cyclic_table(2), cyclic_table(1)
        P = AmalgamPresentation(Z2, Z2, one, (0,), (0,), {"a": 1}, {"b": 1})
        assert P.C.order == 1
        c, syls = amalgam_nf(P, "a b a")
        assert c == 0 and syls == (("A", 1), ("B", 1), ("A", 1))
        assert amalgam_nf(P, "a a") == (0, ())

    def test_shared_square(self):
        Z4, Z2 = cyclic_table(4), cyclic_table(2)
        P = AmalgamPresentation(Z4, Z4, Z2, (0, 2), (0, 2), {"a": 1}, {"b": 1})
        c, syls = amalgam_nf(P, "a^2 b")
        assert c == 1
        assert len(syls) == 1 and syls[0][0] == "B" and syls[0][1] in P.trans_b
        # a^2 b and b a^2 agree because a^2 = b^2 is central in the amalgam
        assert amalgam_nf(P, "b a^2") == amalgam_nf(P, "a^2 b")


def amalgam_nf(P, w):
    from snaketile.groups import amalgam_normal_form
    return amalgam_normal_form(P, w)


class TestFiniteTables:
    def test_symmetric_right_action(self):
        S3 = symmetric_table(3)
        assert S3.order == 6
        p = S3.labels.index((1, 0, 2))
        q = S3.labels.index((0, 2, 1))
        # first p then q: 0 -> 1 -> 2
        assert S3.labels[S3.mul(p, q)][0] == 2

    def test_elementary_abelian(self):
        V = elementary_abelian_table(2)
        assert all(V.mul(x, x) == 0 for x in range(4))

    def test_non_associative_table_rejected(self):
        with pytest.raises(InstanceError):
            FiniteGroupTable(((0, 1, 2), (1, 0, 2), (2, 2, 0)))

    def test_finite_marked_group(self):
        G = FiniteMarkedGroup(cyclic_table(3), {"x": 1})
        assert G.eval_canon(("x", "x", "x")) == G.identity()


class TestBall:
    def test_lamplighter_radius_one(self):
        b = ball(LAMP, 1)
        assert set(b.words) == {(), ("a",), ("t",), ("T",)}

    def test_radius_zero(self):
        b = ball(FREE, 0)
        assert b.words == ((),) and b.edges == ()

    @pytest.mark.parametrize("r,size", [(1, 5), (2, 17), (3, 53)])
    def test_free_counts(self, r, size):
        assert len(ball(FREE, r).words) == size

    def test_monotone_and_edges_consistent(self):
        for G in (LAMP, G1.group):
            small, big = ball(G, 2), ball(G, 3)
            assert set(small.canons) <= set(big.canons)
            for i, s, j in big.edges:
                assert G.act(big.canons[i], s) == big.canons[j]

    def test_shortlex_order(self):
        b = ball(FREE, 2)
        keys = [FREE.gens.shortlex_key(w) for w in b.words]
        assert keys == sorted(keys)

    def test_budget(self):
        with pytest.raises(BudgetExceeded) as exc:
            ball(FREE, 6, max_vertices=100)
        assert exc.value.info["partial_radius"] < 6

    def test_dot(self):
        dot = ball(LAMP, 1).to_dot()
        assert dot.startswith("digraph") and 'label="t"' in dot

    def test_vertices_are_elements(self):
        assert all(isinstance(v, Element) for v in ball(LAMP, 1).vertices)


class TestProjection:
    def test_identity(self):
        assert z_projection(LAMP, LAMP.identity()) == 0

    def test_letter_weights(self):
        assert word_pi(LAMP, ("t", "a", "t", "a", "t")) == 3

    def test_missing_projection(self):
        G = FiniteMarkedGroup(cyclic_table(2), {"x": 1})
        with pytest.raises(UnsupportedCapability):
            z_projection(G, G.identity())

    def test_stable_length_of_translation(self):
        x = G1.group.eval_canon(("t",))
        G = G1.group
        assert G.tree_length(G.mul(x, x)) - G.tree_length(x) == 1
