import pytest

from toeplitz_speedup import period_structure, per_p_window, skeleton, toeplitz_window
from toeplitz_speedup.errors import DivisibilityViolation
from toeplitz_speedup.io import bundled, load_system_spec
from toeplitz_speedup.toeplitz import (OdometerSpec, PeriodStructure, WindowedSequence,
                                       essential_period_check, factorize, level_sequence, odometer_spec,
                                       same_odometer, supernatural, system_odometer)


def test_window_is_fixed_point_prefix(chi):
    x = toeplitz_window(chi, 27)
    assert "".join(x.symbols) == "aabaababbaabaababbaababbabb"


def test_per_p_and_skeleton(chi):
    x = toeplitz_window(chi, 81)
    per = per_p_window(x, 3)
    assert per.forced == {0: "a", 2: "b"} and not per.low_confidence
    assert skeleton(x, 3).render() == "a_b"
    assert per_p_window(WindowedSequence(("a",)), 4).low_confidence


def test_essential_periods(chi):
    x = toeplitz_window(chi, 243)
    assert essential_period_check(x, 3).kind == "Essential"
    assert essential_period_check(x, 9).kind == "Essential"
    assert str(essential_period_check(x, 6)) == "NotEssential(3)"


def test_period_structure_and_odometer(chi):
    ps = period_structure(chi, 3)
    assert ps.periods == (3, 9, 27) and ps.is_valid
    assert system_odometer(chi) == OdometerSpec((), (3,))
    with pytest.raises(DivisibilityViolation):
        odometer_spec(PeriodStructure((4, 6)))


def test_three_level_odometer():
    system = load_system_spec(bundled("three-level.json")).system
    odo = system_odometer(system)
    assert odo.alpha == (3, 2) and odo.tail == (3,)
    assert odo.periods(4) == (3, 6, 18, 54)
    assert supernatural(odo) == {2: 1, 3: float("inf")}


def test_same_odometer_by_supernatural_numbers():
    assert same_odometer(OdometerSpec((2,), (4,)), OdometerSpec((), (2,)))
    assert not same_odometer(OdometerSpec((), (2,)), OdometerSpec((), (6,)))
    assert factorize(360) == {2: 3, 3: 2, 5: 1}


def test_level_sequence_codes_towers(chi):
    assert "".join(level_sequence(chi, 1, 9)) == "aabaababb"
    assert level_sequence(chi, 0, 9) == toeplitz_window(chi, 9).symbols
