import copy
import json

from toeplitz_speedup import (build_presentation, coboundary_check, conjugacy_verdict,
                              constant_speedup_toeplitz_test, same_odometer_report,
                              sufficient_condition_check, toeplitz_semidecision, verify_certificate)
from toeplitz_speedup.decide import Outcome, Presentation, ToeplitzCertificate
from toeplitz_speedup.toeplitz import OdometerSpec, PeriodStructure


def test_gcd_test_outcomes(chi, doubling):
    assert constant_speedup_toeplitz_test(doubling, 3).outcome is Outcome.YES
    no = constant_speedup_toeplitz_test(doubling, 2)
    assert no.outcome is Outcome.NO and no.certificate["first_violation"] == 1
    assert constant_speedup_toeplitz_test(chi, 2).outcome is Outcome.YES
    # a finite prefix without a tail cannot certify Yes
    assert constant_speedup_toeplitz_test(PeriodStructure((3, 9)), 2).outcome is Outcome.UNKNOWN
    assert constant_speedup_toeplitz_test(OdometerSpec((3,), (2, 3)), 5).outcome is Outcome.YES


def test_outcome_exit_codes():
    assert [o.exit_code for o in Outcome] == [0, 1, 2]


def test_sufficient_condition(chi_worked, new_non):
    assert sufficient_condition_check(chi_worked[1].labeling).outcome is Outcome.YES
    v = sufficient_condition_check(new_non[1].labeling)
    assert v.outcome is Outcome.UNKNOWN and v.detail.startswith("hypothesis fails")


def test_new_non_lower_bounds(new_non):
    pres = build_presentation(new_non[1])
    v = toeplitz_semidecision(pres, depth=3)
    cert = v.certificate
    assert v.outcome is Outcome.NO
    assert cert["bounds"] == [24, 96, 384]
    assert cert["certified_ratio"] == 4
    assert verify_certificate(cert) == (True, "replayed")


def test_shallow_run_is_not_a_no(new_non):
    pres = build_presentation(new_non[1])
    assert toeplitz_semidecision(pres, depth=2).outcome is Outcome.UNKNOWN


def test_tampered_certificates_fail(new_non, not_conjugate):
    cert = toeplitz_semidecision(build_presentation(new_non[1]), depth=3).certificate
    bad = copy.deepcopy(cert)
    bad["bounds"][1] = 48
    assert not verify_certificate(bad)[0]
    bad = copy.deepcopy(cert)
    t = next(iter(bad["witnesses"]))
    bad["witnesses"] = {"24": bad["witnesses"][t]}
    assert not verify_certificate(bad)[0]
    good = toeplitz_semidecision(build_presentation(not_conjugate[1]), depth=3).certificate
    assert verify_certificate(good)[0]
    bad = copy.deepcopy(good)
    bad["periods"] = [12, 108, 970]
    assert not verify_certificate(bad)[0]
    bad = copy.deepcopy(good)
    bad["periods"] = [6, 54]
    assert not verify_certificate(bad)[0]


def test_certificates_round_trip_and_are_deterministic(not_conjugate):
    pres = build_presentation(not_conjugate[1])
    a = toeplitz_semidecision(pres, depth=3).certificate
    b = toeplitz_semidecision(build_presentation(not_conjugate[1]), depth=3).certificate
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    text = json.dumps(a, sort_keys=True)
    assert json.dumps(ToeplitzCertificate.from_dict(json.loads(text)).as_dict(), sort_keys=True) == text
    back = Presentation.from_dict(json.loads(json.dumps(pres.as_dict())))
    assert back.phi == pres.phi and back.psi == pres.psi and back.start == pres.start


def test_not_conjugate_engines(not_conjugate):
    spec, sp = not_conjugate
    v = toeplitz_semidecision(build_presentation(sp), depth=3)
    assert v.outcome is Outcome.YES and v.certificate["periods"] == [12, 108, 972]
    rep = same_odometer_report(spec.system, v.certificate)
    assert rep.same is True and rep.speedup == {"2": 2, "3": "inf"}
    cv = conjugacy_verdict(sp)
    assert cv.outcome == "TcNotMinimal" and cv.exit_code == 1


def test_worked_chi_is_conjugate(chi_worked):
    cv = conjugacy_verdict(chi_worked[1])
    assert cv.outcome == "ConjugateToTc" and cv.exit_code == 0


def test_coboundary(chi_worked, new_non):
    rep = coboundary_check(chi_worked[1])
    assert rep.outcome is Outcome.YES and rep.counterexample is None
    assert coboundary_check(new_non[1], level=3).outcome is Outcome.YES


def test_coboundary_budget_exhaustion(new_non):
    rep = coboundary_check(new_non[1], budget=5)
    assert rep.outcome is Outcome.UNKNOWN and rep.counterexample["unvisited"]
