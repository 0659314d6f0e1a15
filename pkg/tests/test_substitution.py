import pytest

from toeplitz_speedup import Alphabet, SAdicSystem, Substitution, classify, compose, power
from toeplitz_speedup.errors import AlphabetMismatch, NonGrowing, NotSeed
from toeplitz_speedup.substitution import (fixed_point_prefix, isomorphism, language_of_length, pair,
                                           render, substitution_language, unpair)


def test_from_dict_and_render(chi):
    assert chi.domain.letters == ("a", "b")
    assert chi.constant_length == 3
    assert render(chi["a"]) == "aab"
    assert render(chi("ab")) == "aababb"


def test_multichar_alphabet_tokenizes():
    alph = Alphabet(("x1", "x2"))
    assert alph.tokenize("x1x2x1") == ("x1", "x2", "x1")
    assert alph.tokenize(["x2"]) == ("x2",)
    with pytest.raises(AlphabetMismatch):
        alph.tokenize("x3")


def test_pair_roundtrip():
    assert unpair(pair("a", 2)) == ("a", 2)
    with pytest.raises(ValueError):
        unpair("a")


def test_power_matches_repeated_composition(chi):
    assert power(chi, 3) == compose(chi, compose(chi, chi))
    assert render(power(chi, 2)["a"]) == "aabaababb"


def test_compose_rejects_mismatched_alphabets(chi):
    other = Substitution.from_dict({"x": "xy", "y": "x"})
    with pytest.raises(AlphabetMismatch):
        compose(chi, other)


def test_properness_flags(chi, doubling):
    assert chi.left_proper and chi.proper
    assert doubling.left_proper and not doubling.proper


def test_classify(chi):
    prof = classify(chi)
    assert prof.primitive == 1 and prof.primitive_decided
    frozen = classify(Substitution.from_dict({"a": "ab", "b": "b"}))
    assert frozen.primitive is None and frozen.primitive_decided


def test_fixed_point_prefix(chi):
    assert render(fixed_point_prefix(chi, "a", 9)) == "aabaababb"
    with pytest.raises(NotSeed):
        fixed_point_prefix(chi, "b", 5)
    with pytest.raises(NonGrowing):
        fixed_point_prefix(Substitution.from_dict({"a": "a", "b": "ab"}), "a", 5)


def test_languages_agree_on_chi(chi):
    for n in range(1, 8):
        assert set(substitution_language(chi, n)) == set(language_of_length(chi, n).words)
    assert len(substitution_language(chi, 2)) == 4


def test_language_of_sadic_system(chi, doubling):
    two = Substitution.from_dict({"a": "aab", "b": "abb"})
    system = SAdicSystem((chi, two), 1, 2)
    assert set(language_of_length(system, 3).words) == set(substitution_language(chi, 3))


def test_isomorphism_finds_renaming(chi):
    swapped = Substitution.from_dict({"b": "bba", "a": "baa"}, domain=("a", "b"))
    f = isomorphism(chi, swapped)
    assert f == {"a": "b", "b": "a"}
    assert isomorphism(chi, Substitution.from_dict({"a": "aba", "b": "abb"})) is None


def test_sadic_windows():
    t1 = Substitution.from_dict({"a": "011", "b": "100"})
    t2 = Substitution.from_dict({"c": "ab", "d": "aa"})
    t3 = Substitution.from_dict({"c": "ccd", "d": "cdd"})
    system = SAdicSystem((t1, t2, t3), 3, 1)
    assert system.theta(5) is t3
    assert system.window(1, 2) == t2
    assert render(system.composition(2)["c"]) == "011100"
    with pytest.raises(AlphabetMismatch):
        SAdicSystem((t1, t3))
