import pytest

from toeplitz_speedup import coincidence_positions, constant_speedup_recode, factor_map_search
from toeplitz_speedup.errors import NoCommonLength, NotConstantLength
from toeplitz_speedup.factors import common_powers, recheck_candidate, render_table
from toeplitz_speedup.substitution import Substitution


def recoded(chi, c, names="letters"):
    return constant_speedup_recode(chi, c, names=names).substitution


def test_coincidences(chi):
    prof = coincidence_positions(chi)
    assert prof.length == 3
    assert sorted(prof.fibers) == [1]
    assert prof.is_coincident(0) and prof.is_coincident(2)
    with pytest.raises(NotConstantLength):
        coincidence_positions(Substitution.from_dict({"a": "ab", "b": "a"}))


def test_common_powers(chi, doubling):
    assert common_powers(chi, chi) == (1, 1)
    assert common_powers(Substitution.from_dict({"a": "abab", "b": "baba"}), doubling) == (1, 2)
    with pytest.raises(NoCommonLength):
        common_powers(chi, doubling)


def test_two_speedup_factors_onto_chi(chi):
    search = factor_map_search(recoded(chi, 2), chi, powers=2, check_length=54)
    at7 = [c for c in search.verified if c.shift == 7]
    assert at7
    cand = at7[0]
    assert cand.preimages() == {"a": ["B", "D"], "b": ["A", "C"]}
    assert recheck_candidate(cand, recoded(chi, 2), chi)
    assert render_table(search).startswith("common length 9")


def test_four_speedup_factors_onto_two(chi):
    search = factor_map_search(recoded(chi, 4, "digits"), recoded(chi, 2), check_length=54)
    maps = [c.preimages() for c in search.verified if c.shift == 1]
    assert {"A": ["5"], "B": ["4", "6", "7"], "C": ["0", "3"], "D": ["1", "2"]} in maps


def test_five_speedup_factors_onto_chi(chi):
    search = factor_map_search(recoded(chi, 5), chi, check_length=54)
    assert any(c.shift == 0 and sorted(c.preimages()["a"]) == ["A", "B", "E", "F", "H"]
               for c in search.verified)


def test_refuted_candidates_carry_witnesses(chi):
    search = factor_map_search(recoded(chi, 2), chi, powers=2, check_length=6, limit=50)
    for cand in search.candidates:
        assert cand.verified or cand.witness is not None
        assert set(cand.as_dict()) >= {"mapping", "shift", "status", "collapsed_fibers"}
