import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from src.core.errors import FactorMismatch, LetterRejected
from src.core.types import FactorTag
from src.groups import matrices as mx
from src.groups.alphabet import format_name_word, free_reduce, parse_name_word, reduced_words, shortlex_key
from src.groups.presentations import FactorGroup, SubgroupOracle
from src.groups.words import (
    SequenceSpec,
    alternating_sequence,
    canonical_form,
    coset_representative,
    enumerate_normal_forms,
    is_normal_form,
    make_word,
    normal_form,
    parse_word,
    word_from_json,
    word_to_json,
)
from src.certify import fixtures


class TestAlphabet:
    def test_free_reduce_cancels_adjacent_inverses(self):
        assert free_reduce((1, 2, -2, -1, 3)) == (3,)
        assert free_reduce(()) == ()

    def test_free_reduce_rejects_letter_zero(self):
        with pytest.raises(ValueError):
            free_reduce((1, 0))

    def test_reduced_words_counts_and_order(self):
        words = list(reduced_words(2, 2))
        assert len(words) == 1 + 4 + 12
        assert words[:5] == [(), (1,), (-1,), (2,), (-2,)]
        keys = [shortlex_key(w) for w in words]
        assert keys == sorted(keys)

    def test_parse_and_format_name_words(self):
        assert parse_name_word("a1 b1^-2 x^0") == (("a1", 1), ("b1", -2))
        assert format_name_word((("a1", 1), ("b1", -2))) == "a1 b1^-2"
        with pytest.raises(ValueError):
            parse_name_word("a1 ^2")


class TestAmalgamNormalForm:
    def test_alternating_word_keeps_its_length(self, sl2z):
        nf = normal_form(parse_word(sl2z, "S U S"))
        assert nf.rl == 3
        assert [s.factor for s in nf.syllables] == [FactorTag.A, FactorTag.B, FactorTag.A]
        assert is_normal_form(nf)

    def test_edge_group_syllable_is_absorbed(self, sl2z):
        # U^3 = -I lies in the edge group, so S U^3 S collapses
        nf = normal_form(parse_word(sl2z, "S U^3 S"))
        assert nf.rl == 0
        assert mx.is_identity(nf.matrix(), projective=True)

    def test_to_json_shape(self, sl2z):
        data = normal_form(parse_word(sl2z, "S U")).to_json()
        assert data["rl"] == 2
        assert data["syllables"][0] == {"factor": "A", "word": [1]}

    def test_word_from_json(self, sl2z):
        w = word_from_json(sl2z, [{"factor": "A", "word": [1]}, {"factor": "B", "word": [1, 1]}])
        assert word_to_json(w) == [{"factor": "A", "word": [1]}, {"factor": "B", "word": [1, 1]}]
        assert normal_form(w).rl == 2

    def test_unknown_generator(self, sl2z):
        with pytest.raises(FactorMismatch):
            parse_word(sl2z, "S T")

    def test_canonical_form_identifies_equal_elements(self, sl2z):
        # S^3 U^4 = (-S)(-U) = S U
        left = canonical_form(normal_form(parse_word(sl2z, "S U")))
        right = canonical_form(normal_form(parse_word(sl2z, "S^3 U^4")))
        assert left.key() == right.key()

    def test_enumerated_forms_are_distinct_elements(self, sl2z):
        forms = list(enumerate_normal_forms(sl2z, 3))
        assert all(is_normal_form(nf) for nf in forms)
        keys = {mx.matrix_key(nf.matrix()) for nf in forms}
        assert len(keys) == len(forms)
        assert {nf.rl for nf in forms} == {1, 2, 3}


_sl2z_parts = st.lists(
    st.one_of(
        st.tuples(st.just(FactorTag.A), st.integers(1, 3)),
        st.tuples(st.just(FactorTag.B), st.integers(1, 5)),
    ),
    min_size=0,
    max_size=8,
)


class TestAmalgamOracle:
    @hyp_settings(max_examples=60, deadline=None)
    @given(_sl2z_parts)
    def test_reduction_preserves_the_element(self, parts):
        p = fixtures.sl2z_amalgam()
        w = make_word(p, [(tag, (1,) * k) for tag, k in parts])
        nf = normal_form(w)
        assert mx.matrices_equal(nf.matrix(), w.matrix())
        assert is_normal_form(nf)
        assert normal_form(nf.as_word()).rl == nf.rl

    @hyp_settings(max_examples=60, deadline=None)
    @given(_sl2z_parts)
    def test_positive_length_is_never_central(self, parts):
        p = fixtures.sl2z_amalgam()
        nf = normal_form(make_word(p, [(tag, (1,) * k) for tag, k in parts]))
        if nf.rl >= 1:
            assert not mx.is_identity(nf.matrix(), projective=True)


class TestBritton:
    def test_pinch_into_edge_group(self, bs12):
        nf = normal_form(parse_word(bs12, "f a f^-1"))
        assert nf.rl == 0
        assert mx.matrices_equal(nf.matrix(), parse_word(bs12, "a^2").matrix())

    def test_reverse_pinch(self, bs12):
        assert normal_form(parse_word(bs12, "f^-1 a^2 f")).rl == 0

    def test_no_pinch_outside_image(self, bs12):
        # a is not in <a^2>
        nf = normal_form(parse_word(bs12, "f^-1 a f"))
        assert nf.rl == 2
        assert is_normal_form(nf)

    @hyp_settings(max_examples=60, deadline=None)
    @given(st.lists(st.one_of(st.tuples(st.just("a"), st.integers(-3, 3)),
                              st.tuples(st.just("f"), st.sampled_from([1, -1]))), max_size=7))
    def test_reduction_preserves_the_element(self, parts):
        p = fixtures.bs12_hnn()
        text = " ".join(f"{name}^{k}" for name, k in parts)
        w = parse_word(p, text)
        nf = normal_form(w)
        assert mx.matrices_equal(nf.matrix(), w.matrix())
        assert is_normal_form(nf)
        assert nf.rl <= sum(1 for name, _ in parts if name == "f")


class TestAlternatingSequences:
    def test_explicit_letters(self, sl2z):
        spec = SequenceSpec("A", alphas=[(1,)], betas=[(1,)])
        seq = alternating_sequence(spec, 4, sl2z)
        assert [nf.rl for nf in seq] == [1, 2, 3, 4]
        assert seq[2].key() == normal_form(parse_word(sl2z, "S U S")).key()
        for shorter, longer in zip(seq, seq[1:]):
            assert longer.key()[:len(shorter.key())] == shorter.key()

    def test_type_b_starts_in_b(self, sl2z):
        seq = alternating_sequence(SequenceSpec("B", seed=3), 3, sl2z)
        assert seq[0].syllables[0].factor is FactorTag.B
        assert [nf.rl for nf in seq] == [1, 2, 3]

    def test_edge_group_letter_rejected(self, sl2z):
        # S^2 = -I is in the edge group
        with pytest.raises(LetterRejected):
            alternating_sequence(SequenceSpec("A", alphas=[(1, 1)]), 3, sl2z)

    def test_kind_must_match_presentation(self, bs12):
        with pytest.raises(LetterRejected):
            alternating_sequence(SequenceSpec("A"), 2, bs12)

    def test_hnn_sequence_lengths(self, bs12):
        seq = alternating_sequence(SequenceSpec("HNN", epsilons=[1], seed=1), 4, bs12)
        assert [nf.rl for nf in seq] == [1, 2, 3, 4]
        assert all(is_normal_form(nf) for nf in seq)


class TestCosetRepresentatives:
    @pytest.fixture
    def z6(self):
        return FactorGroup(FactorTag.B, ["U"], [fixtures.sl2z_rep().matrix("U")])

    def test_representative_is_shortlex_first(self, z6):
        u4 = z6.evaluate((1, 1, 1, 1))
        rep, _, _ = coset_representative(z6, SubgroupOracle(z6, [(1, 1, 1)]), u4)
        assert rep == (1,)

    def test_cache_belongs_to_the_oracle(self, z6):
        u4 = z6.evaluate((1, 1, 1, 1))
        # discarded oracles free their ids for reuse by the next ones
        for _ in range(50):
            coset_representative(z6, SubgroupOracle(z6, [(1, 1, 1)]), u4)
        for _ in range(50):
            oracle = SubgroupOracle(z6, [(1, 1)])
            rep, t, _ = coset_representative(z6, oracle, u4)
            assert rep == ()
            assert mx.is_identity(t)
        assert list(oracle.coset_reps.values())[0][0] == ()
