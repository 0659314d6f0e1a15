import pytest

from toeplitz_speedup import (JumpFunction, SAdicSystem, SpeedupSystem, build_kr,
                              construct_toeplitz_speedup, minimality_check, orbit_labeling,
                              simulate_speedup, validate_jump)
from toeplitz_speedup.errors import DuplicateBaseWords, GcdObstruction, LevelTooLow
from toeplitz_speedup.kr import (classify_perm, cycle_notation, lift, next_level_perms, refine_jump,
                                 stable_perm_cycle, tau_substitution)
from toeplitz_speedup.substitution import Substitution, pair, render


def test_towers_are_level_images(chi):
    kr = build_kr(chi, 1)
    assert kr.height == 3
    assert [render(t.base_word) for t in kr.towers] == ["aab", "abb"]
    with pytest.raises(DuplicateBaseWords):
        build_kr(Substitution.from_dict({"a": "ab", "b": "ab"}), 1)


def test_constant_jump_is_valid(chi):
    kr = build_kr(chi, 1)
    assert validate_jump(chi, kr, JumpFunction.constant(kr, 2)).valid


def test_bad_jump_reports_gaps_and_overlaps(chi):
    kr = build_kr(chi, 1)
    v = validate_jump(chi, kr, JumpFunction(1, {"a": (1, 1, 1), "b": (2, 1, 1)}))
    assert not v.valid and v.kinds() == {"Gap", "Overlap"}
    tall = validate_jump(chi, kr, JumpFunction.constant(kr, 3))
    assert tall.kinds() == {"TowerTooShort"}


def test_labeling_of_constant_two(chi):
    sp = SpeedupSystem(SAdicSystem.constant(chi), JumpFunction.constant(build_kr(chi, 2), 2))
    lab = sp.labeling
    assert lab.c == 2
    assert lab.permutations == {"a": (2, 1), "b": (2, 1)}
    assert lab.heights == {"a": (5, 4), "b": (5, 4)}
    assert lab.labels["a"][:4] == (1, 2, 1, 2)


def test_worked_jump(chi_worked):
    _, sp = chi_worked
    assert sp.validation.valid
    assert sp.labeling.permutations == {"a": (2, 1), "b": (2, 1)}
    assert sp.labeling.heights == {"a": (5, 4), "b": (5, 4)}
    assert sp.minimality().outcome == "Minimal"


def test_permutation_helpers(chi):
    assert cycle_notation((1, 2)) == "id"
    assert cycle_notation((2, 3, 1)) == "(1 2 3)"
    assert classify_perm((2, 1, 3)) == "product"
    # chi has odd length, so a transposition on both letters persists
    assert next_level_perms(chi, {"a": (2, 1), "b": (2, 1)}) == {"a": (2, 1), "b": (2, 1)}
    assert stable_perm_cycle(chi, {"a": (2, 1), "b": (1, 2)})[1] == 2


def test_lift_tracks_labels(chi):
    tau = lift(chi, {"a": (2, 1), "b": (2, 1)})
    assert tau[pair("a", 1)] == (pair("a", 1), pair("a", 2), pair("b", 1))
    assert tau.constant_length == 3


def test_tau_substitution_from_labeling(new_non):
    _, sp = new_non
    tau = tau_substitution(sp.base.rules[0], sp.labeling)
    assert len(tau.domain) == 2 * len(sp.base.alphabet(0))


def test_identity_permutations_are_not_minimal(chi):
    from toeplitz_speedup.kr import OrbitLabeling
    lab = OrbitLabeling(1, 2, {}, {}, {"a": (1, 2), "b": (1, 2)}, {})
    assert minimality_check(chi, lab).outcome == "NotMinimal"


def test_refine_jump_preserves_orbits(chi):
    sp = SpeedupSystem(SAdicSystem.constant(chi), JumpFunction.constant(build_kr(chi, 1), 2))
    fine = refine_jump(chi, sp.jump, 3)
    assert fine.level == 3
    sp3 = SpeedupSystem(SAdicSystem.constant(chi), fine)
    assert simulate_speedup(sp, 30).positions == simulate_speedup(sp3, 30).positions


def test_simulation_steps_by_jump(chi):
    sp = SpeedupSystem(SAdicSystem.constant(chi), JumpFunction.constant(build_kr(chi, 2), 2))
    traj = simulate_speedup(sp, 5)
    assert traj.positions == (0, 2, 4, 6, 8, 10)
    assert traj.jump_words[0] == ("a", "a")


def test_construct_speedup(chi, doubling):
    sp = construct_toeplitz_speedup(chi, 2, 2)
    assert validate_jump(sp.base, sp.kr, sp.jump).valid
    assert set(sp.labeling.permutations.values()) == {(2, 1)}
    with pytest.raises(GcdObstruction):
        construct_toeplitz_speedup(doubling, 2, 3)
    with pytest.raises(LevelTooLow):
        construct_toeplitz_speedup(chi, 2, 1)


def test_orbit_labeling_direct_call(chi):
    kr = build_kr(chi, 2)
    lab = orbit_labeling(chi, kr, JumpFunction.constant(kr, 1))
    assert lab.c == 1 and lab.permutations == {"a": (1,), "b": (1,)}
