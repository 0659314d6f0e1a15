"""Verdict engines for speedups of Toeplitz flows.

Outcomes are three-valued.  ``Yes`` and ``No`` carry certificates that can
be replayed by :func:`verify_certificate`; ``UnknownAtDepth`` records how far
the search got.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Optional, Union

import numpy as np

from .kr import (OrbitLabeling, SpeedupSystem, classify_perm, cycle_notation, level_perms,
                 lift, refine_jump, simulate_speedup, stable_perm_cycle, tau_window)
from .recode import (chain_blocks, constant_speedup_recode, encode_pair_words, jump_block_encode,
                     letter_names, return_word_recode)
from .substitution import Alphabet, SAdicSystem, Substitution, pair, power
from .toeplitz import (OdometerSpec, PeriodStructure, as_system, level_sequence,
                       odometer_spec, same_odometer, supernatural, system_odometer)


class Outcome(Enum):
    YES = "Yes"
    NO = "No"
    UNKNOWN = "UnknownAtDepth"

    @property
    def exit_code(self) -> int:
        return {"Yes": 0, "No": 1, "UnknownAtDepth": 2}[self.value]


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    depth: int = 0
    certificate: Optional[dict] = None
    detail: str = ""

    def as_dict(self) -> dict:
        return {"outcome": self.outcome.value, "depth": self.depth,
                "detail": self.detail, "certificate": self.certificate}


# ---------------------------------------------------------------- gcd characterization

def constant_speedup_toeplitz_test(odo: Union[OdometerSpec, PeriodStructure, SAdicSystem, Substitution],
                                   c: int) -> Verdict:
    """``T^c`` is Toeplitz iff ``gcd(c, p_k) = 1`` for every ``k``.

    Decided exactly from the ratio prefix and the repeating tail cycle.
    """
    if isinstance(odo, PeriodStructure):
        odo = odometer_spec(odo)
    elif not isinstance(odo, OdometerSpec):
        odo = system_odometer(odo)
    ratios = odo.alpha + odo.tail
    p = 1
    for k, a in enumerate(ratios, start=1):
        p *= a
        g = math.gcd(c, p)
        if g > 1:
            return Verdict(Outcome.NO, k, {"first_violation": k, "p_k": p, "gcd": g},
                           f"gcd(c={c}, p_{k}={p}) = {g}")
    checked = "prefix and tail cycle" if odo.tail else "finite prefix only"
    outcome = Outcome.YES if odo.tail else Outcome.UNKNOWN
    return Verdict(outcome, len(ratios), {"ratios": list(ratios), "checked": checked},
                   f"gcd(c={c}, alpha_i) = 1 on the {checked}")


# ---------------------------------------------------------------- sufficient condition

def sufficient_condition_check(labeling: OrbitLabeling) -> Verdict:
    """Same cyclic exit permutation and same per-label heights in every tower.

    When the hypothesis fails the outcome is ``UnknownAtDepth``: the condition
    is sufficient only.
    """
    perms = set(labeling.permutations.values())
    heights = set(labeling.heights.values())
    cert = {
        "level": labeling.level,
        "c": labeling.c,
        "permutations": {a: cycle_notation(p) for a, p in labeling.permutations.items()},
        "heights": {a: list(h) for a, h in labeling.heights.items()},
    }
    problems = []
    if len(perms) > 1:
        problems.append("exit permutations differ between towers")
    elif labeling.c > 1 and classify_perm(next(iter(perms))) != "cycle":
        problems.append("common exit permutation is not a single cycle")
    if len(heights) > 1:
        problems.append("per-label heights differ between towers")
    if problems:
        return Verdict(Outcome.UNKNOWN, labeling.level, cert, "hypothesis fails: " + "; ".join(problems))
    return Verdict(Outcome.YES, labeling.level, cert, "same cyclic permutation and heights in every tower")


# ---------------------------------------------------------------- presentations

@dataclass(frozen=True)
class Presentation:
    """``y' = Psi(fixed point of phi)`` where ``phi`` acts on return words."""

    phi: Substitution
    psi: Substitution
    g: int
    start: str
    markers: tuple
    level: int
    mode: str

    @property
    def anchor(self) -> str:
        return self.psi[self.start][0]

    def phi_power(self, k: int) -> Substitution:
        return power(self.phi, self.g * k) if k > 0 else None

    def words(self, k: int) -> list:
        """``Psi(phi^(g k)(w))`` for every return word ``w``."""
        if k == 0:
            return [self.psi[w] for w in self.phi.domain]
        sub = self.phi_power(k)
        return [self.psi(sub[w]) for w in self.phi.domain]

    def point(self, min_length: int) -> tuple:
        k = 1
        while True:
            y = self.psi(self.phi_power(k)[self.start])
            if len(y) >= min_length:
                return y
            k += 1

    def as_dict(self) -> dict:
        return {
            "phi": self.phi.as_dict() if self.phi.domain.single_char else
            {a: list(w) for a, w in self.phi.items()},
            "psi": {a: list(w) for a, w in self.psi.items()},
            "g": self.g, "start": self.start, "markers": list(self.markers),
            "level": self.level, "mode": self.mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Presentation":
        phi_map = {a: list(w) if not isinstance(w, str) else list(w) for a, w in d["phi"].items()}
        dom = Alphabet(tuple(d["phi"]))
        phi = Substitution(dom, dom, tuple(tuple(phi_map[a]) for a in dom))
        cod_letters = []
        for w in d["psi"].values():
            for s in w:
                if s not in cod_letters:
                    cod_letters.append(s)
        psi = Substitution(dom, Alphabet(tuple(cod_letters)), tuple(tuple(d["psi"][a]) for a in dom))
        return cls(phi, psi, int(d["g"]), d["start"], tuple(d["markers"]), int(d["level"]), d["mode"])


def _derived(tau: Substitution, candidates, max_power: int = 8):
    last = None
    for markers in candidates:
        try:
            rws = return_word_recode(tau, markers)
        except Exception as exc:  # marker set unusable for this tau
            last = exc
            continue
        for g in range(1, max_power + 1):
            if power(rws.phi, g).left_proper:
                return rws, g
    raise ValueError(f"no marker set gives a left proper derived substitution ({last})")


def block_presentation(speedup: SpeedupSystem, names: str = "letters") -> Optional[Presentation]:
    """Constant-length presentation on ``c``-words of towers, when it exists.

    Needs a level from which every rule is the tail, all towers sharing one
    cyclic exit permutation there, and a tail cycle length coprime to ``c``.
    Each ``c``-word of towers is read along labels ``1, pi(1), pi^2(1), ...``
    so every block starts again on label 1.  Returns ``None`` otherwise.
    """
    base = speedup.base
    c = speedup.c
    K = max(speedup.level, base.tail_from - 1)
    if K > speedup.level:
        speedup = SpeedupSystem(base, refine_jump(base, speedup.jump, K))
    perms = set(speedup.labeling.permutations.values())
    if len(perms) != 1:
        return None
    pi = perms.pop()
    if c > 1 and classify_perm(pi) != "cycle":
        return None
    cycle_sub = base.window(K, K + base.tail_period)
    m = cycle_sub.constant_length
    if m is None or math.gcd(m, c) != 1:
        return None
    rec = constant_speedup_recode(cycle_sub, c, names="w")
    g = next((g for g in range(1, 9) if power(rec.substitution, g).left_proper), None)
    if g is None:
        return None
    keys, rows = [], []
    for w in rec.words:
        row, label = [], 1
        for a in w:
            for block, _ in chain_blocks(speedup, a, label):
                if block not in keys:
                    keys.append(block)
                row.append(keys.index(block))
            label = pi[label - 1]
        rows.append(row)
    labels = letter_names(len(keys), names)
    dom = rec.substitution.domain
    psi = Substitution(dom, Alphabet(tuple(labels)), tuple(tuple(labels[i] for i in r) for r in rows))
    start = power(rec.substitution, g).images[0][0]
    return Presentation(rec.substitution, psi, g, start, tuple(rec.words), K, "blocks")


def build_presentation(speedup: SpeedupSystem, mode: str = "auto",
                       block_mode: str = "by_word", names: str = "letters") -> Presentation:
    """Presentation of a speedup as ``Psi`` applied to a substitutive or S-adic point.

    ``blocks`` uses :func:`block_presentation`.  In substitutive mode the
    lifted substitution of ``theta^g`` is recoded on return words.  In S-adic
    mode the lift of one tail cycle is recoded and each return word is
    expanded down to the jump level before block encoding.  ``auto`` tries
    blocks first.
    """
    base = speedup.base
    if mode in ("auto", "blocks"):
        pres = block_presentation(speedup, names)
        if pres is not None:
            return pres
        if mode == "blocks":
            raise ValueError("no constant-length block presentation for this speedup")
        mode = "substitutive" if base.is_constant else "sadic"
    lab = speedup.labeling
    if mode == "substitutive":
        if not base.is_constant:
            raise ValueError("substitutive mode needs a constant system")
        theta = base.rules[0]
        j0, g0, perms = stable_perm_cycle(theta, lab.permutations)
        if j0:
            speedup = SpeedupSystem(base, refine_jump(base, speedup.jump, speedup.level + j0))
            lab = speedup.labeling
        tau = lift(power(theta, g0), perms)
        first = theta.images[0][0]
        candidates = [(pair(first, 1),),
                      tuple(pair(a, 1) for a in theta.domain if a == first) +
                      tuple(pair(a, 1) for a in theta.domain if a != first)]
        rws, g = _derived(tau, candidates)
        enc = jump_block_encode(speedup, rws, block_mode, names)
        return Presentation(rws.phi, enc.psi, g, rws.names[0], rws.markers, speedup.level, mode)
    N, M = base.tail_from, base.tail_period
    k = speedup.level
    L0 = max(k, N)
    perms0 = level_perms(base, lab, L0)[L0]
    cycle_sub = base.window(L0, L0 + M)
    j0, g0, perms = stable_perm_cycle(cycle_sub, perms0)
    top = L0 + j0 * M
    tail_lift = lift(power(cycle_sub, g0), perms)
    first = base.theta(top + 1).images[0][0]
    candidates = [(pair(first, 1),),
                  tuple(pair(a, 1) for a in base.alphabet(top) if a == first) +
                  tuple(pair(a, 1) for a in base.alphabet(top) if a != first)]
    rws, g = _derived(tail_lift, candidates)
    down = tau_window(base, lab, k, top)
    expanded = [down(w) for w in rws.words]
    enc = encode_pair_words(speedup, rws.phi.domain, expanded, block_mode, names)
    return Presentation(rws.phi, enc.psi, g, rws.names[0], rws.markers, top, mode)


# ---------------------------------------------------------------- semi-decision

@dataclass(frozen=True)
class ToeplitzCertificate:
    kind: str
    presentation: dict
    periods: tuple = ()
    ratio_cycle: Optional[int] = None
    proof: bool = False
    bounds: tuple = ()
    exact: tuple = ()
    witnesses: dict = field(default_factory=dict)
    period_bound: int = 0
    depth: int = 0
    certified_ratio: Optional[int] = None
    frontier: tuple = ()

    def as_dict(self) -> dict:
        d = asdict(self)
        d["periods"] = list(self.periods)
        d["bounds"] = list(self.bounds)
        d["exact"] = list(self.exact)
        d["frontier"] = list(self.frontier)
        d["witnesses"] = {str(t): v for t, v in sorted(self.witnesses.items())}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ToeplitzCertificate":
        d = dict(d)
        d["periods"] = tuple(d.get("periods", ()))
        d["bounds"] = tuple(d.get("bounds", ()))
        d["exact"] = tuple(d.get("exact", ()))
        d["frontier"] = tuple(d.get("frontier", ()))
        d["witnesses"] = {int(t): v for t, v in d.get("witnesses", {}).items()}
        return cls(**d)


def _occurrence_mask(word: tuple, pattern: tuple) -> np.ndarray:
    """``mask[i]`` is true when ``pattern`` starts at ``i`` (truncated matches allowed at the end)."""
    n, q = len(word), len(pattern)
    arr = np.array(word, dtype=object)
    mask = np.ones(n, dtype=bool)
    for j in range(q):
        col = np.ones(n, dtype=bool)
        if j < n:
            col[:n - j] = arr[j:] == pattern[j]
        mask &= col
    return mask


def survivors(mask: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Candidates ``t`` for which every multiple of ``t`` inside the word is marked.

    Each word starts with the anchor, so its origin is the anchored alignment.
    """
    return np.array([bool(mask[::int(t)].all()) for t in candidates], dtype=bool)


def default_period_bound(pres: Presentation) -> int:
    return 4 * len(pres.psi(pres.phi_power(2)[pres.start]))


def _eliminate(pres: Presentation, pattern: tuple, candidates: np.ndarray, depth: int):
    """Intersect candidate sets depth by depth; returns per-depth survivors and witnesses."""
    per_depth, witnesses = [], {}
    cur = candidates
    names = pres.phi.domain.letters
    for k in range(1, depth + 1):
        for name, word in zip(names, pres.words(k)):
            if not len(cur):
                break
            keep = survivors(_occurrence_mask(word, pattern), cur)
            for t in cur[~keep]:
                witnesses[int(t)] = {"depth": k, "word": name}
            cur = cur[keep]
        per_depth.append(cur.copy())
    return per_depth, witnesses


def toeplitz_semidecision(pres: Presentation, depth: int = 3,
                          period_bound: Optional[int] = None, levels: int = 3) -> Verdict:
    """Search for a period structure of ``y'`` or for diverging lower bounds on its first period."""
    B = period_bound or default_period_bound(pres)
    m = pres.phi_power(1).constant_length
    L = pres.psi.constant_length
    if m is not None and L is not None and pres.phi_power(1).left_proper:
        q1 = L if pres.psi.left_proper else L * m
        periods = tuple(q1 * m ** i for i in range(levels))
        cert = ToeplitzCertificate("period_structure", pres.as_dict(), periods, m, True,
                                   period_bound=B, depth=depth)
        ok, msg = _check_periods(pres, periods)
        if not ok:
            raise AssertionError(f"constant-length presentation failed its own check: {msg}")
        return Verdict(Outcome.YES, depth, cert.as_dict(),
                       "constant-length left proper presentation: periods follow from the lengths")
    anchor = (pres.anchor,)
    per_depth, witnesses = _eliminate(pres, anchor, np.arange(1, B + 1), depth)
    bounds = tuple(int(s[0]) if len(s) else B + 1 for s in per_depth)
    exact = tuple(bool(len(s)) for s in per_depth)
    ratio = _divergence(bounds, exact)
    if ratio is not None:
        cert = ToeplitzCertificate("lower_bounds", pres.as_dict(), bounds=bounds, exact=exact,
                                   witnesses=witnesses, period_bound=B, depth=depth,
                                   certified_ratio=ratio)
        return Verdict(Outcome.NO, depth, cert.as_dict(),
                       f"certified divergent lower bound: ratio {ratio} on consecutive depths "
                       "(relies on the inductive self-similarity argument)")
    last = per_depth[-1]
    if len(last) and depth >= 2 and len(per_depth[-2]) and per_depth[-2][0] == last[0]:
        periods = [int(last[0])]
        y = pres.point(4 * B)
        for _ in range(levels - 1):
            q = periods[-1]
            cands = np.arange(2 * q, B + 1, q)
            if not len(cands):
                break
            stage, _ = _eliminate(pres, tuple(y[:q]), cands, depth)
            if not len(stage[-1]):
                break
            periods.append(int(stage[-1][0]))
        cert = ToeplitzCertificate("period_structure", pres.as_dict(), tuple(periods), None, False,
                                   bounds=bounds, exact=exact, period_bound=B, depth=depth)
        return Verdict(Outcome.YES, depth, cert.as_dict(),
                       f"period candidates stable up to depth {depth} (not a proof)")
    cert = ToeplitzCertificate("frontier", pres.as_dict(), bounds=bounds, exact=exact,
                               witnesses=witnesses, period_bound=B, depth=depth,
                               frontier=tuple(int(t) for t in last[:32]))
    return Verdict(Outcome.UNKNOWN, depth, cert.as_dict(), "no stable candidate and no certified divergence")


def _divergence(bounds: tuple, exact: tuple) -> Optional[int]:
    """Integer ratio ``r > 1`` repeated on two consecutive pairs of exactly measured bounds."""
    for i in range(len(bounds) - 2):
        if not (exact[i] and exact[i + 1] and exact[i + 2]):
            continue
        a, b, c = bounds[i:i + 3]
        if b % a == 0 and c % b == 0 and b // a == c // b and b // a > 1:
            return b // a
    return None


def _check_periods(pres: Presentation, periods: tuple):
    y = pres.point(2 * periods[-1] + 1)
    if any(y[i] != y[0] for i in range(0, len(y), periods[0])):
        return False, f"first symbol does not recur every {periods[0]}"
    for prev, q in zip(periods, periods[1:]):
        head = y[:prev]
        for i in range(0, len(y) - prev + 1, q):
            if y[i:i + prev] != head:
                return False, f"prefix of length {prev} does not recur at {i}"
    return True, ""


def verify_certificate(cert: Union[dict, ToeplitzCertificate]) -> tuple:
    """Replay a certificate from its own data; returns ``(ok, message)``."""
    if isinstance(cert, dict):
        cert = ToeplitzCertificate.from_dict(cert)
    pres = Presentation.from_dict(cert.presentation)
    if cert.kind == "period_structure":
        if any(b % a for a, b in zip(cert.periods, cert.periods[1:])):
            return False, "periods do not divide each other"
        return _check_periods(pres, cert.periods)
    words = {k: dict(zip(pres.phi.domain.letters, pres.words(k)))
             for k in range(1, cert.depth + 1)}
    anchor = (pres.anchor,)
    for t, w in cert.witnesses.items():
        word = words[w["depth"]][w["word"]]
        if survivors(_occurrence_mask(word, anchor), np.array([t]))[0]:
            return False, f"candidate {t} survives its witness word"
    per_depth, _ = _eliminate(pres, anchor, np.arange(1, cert.period_bound + 1), cert.depth)
    bounds = tuple(int(s[0]) if len(s) else cert.period_bound + 1 for s in per_depth)
    if bounds != tuple(cert.bounds):
        return False, f"recomputed bounds {bounds} differ from {cert.bounds}"
    if any(b < a for a, b in zip(bounds, bounds[1:])):
        return False, "bounds are not monotone"
    if cert.kind == "lower_bounds":
        exact = tuple(bool(len(s)) for s in per_depth)
        if _divergence(bounds, exact) != cert.certified_ratio:
            return False, "divergence ratio does not replay"
    return True, "replayed"


# ---------------------------------------------------------------- coboundary

@dataclass(frozen=True)
class CoboundaryReport:
    level: int
    outcome: Outcome
    g: dict
    counterexample: Optional[dict]
    steps: int
    returns_checked: int

    def as_dict(self) -> dict:
        return {
            "level": self.level, "outcome": self.outcome.value, "steps": self.steps,
            "returns_checked": self.returns_checked, "counterexample": self.counterexample,
            "g": {f"{a}:{f}": v for (a, f), v in sorted(self.g.items())},
        }


def coboundary_check(speedup: SpeedupSystem, level: Optional[int] = None,
                     budget: int = 200_000, visits: int = 3) -> CoboundaryReport:
    """Build ``g`` along the S-orbit with ``g(next) = g + c - p``; a conflicting value is a counterexample.

    Yes once every floor has been visited ``visits`` times without conflict,
    after re-checking ``p(x, n) = c n`` on every observed first return with
    an independent trajectory.
    """
    if level is not None and level != speedup.level:
        speedup = SpeedupSystem(speedup.base, refine_jump(speedup.base, speedup.jump, level))
    c = speedup.c
    h = speedup.kr.height
    floors = {(a, f) for a in speedup.kr.letters for f in range(h)}
    count = {fl: 0 for fl in floors}
    g = {}
    last = {}
    q, cur, n = 0, 0, 0
    chunk = 4096
    coding = level_sequence(speedup.base, speedup.level, chunk)
    while n < budget:
        idx = q // h
        if idx >= len(coding):
            coding = level_sequence(speedup.base, speedup.level, 2 * len(coding))
        fl = (coding[idx], q % h)
        if fl in g and g[fl] != cur:
            n0, q0 = last[fl]
            ce = {"floor": list(fl), "first_visit": n0, "return_step": n,
                  "n": n - n0, "p_x_n": q - q0, "c_n": c * (n - n0)}
            return CoboundaryReport(speedup.level, Outcome.NO, g, ce, n, 0)
        g[fl] = cur
        last[fl] = (n, q)
        count[fl] += 1
        if all(v >= visits for v in count.values()):
            break
        p = speedup.jump(*fl)
        cur += c - p
        q += p
        n += 1
    if not all(v >= visits for v in count.values()):
        unseen = sorted(fl for fl, v in count.items() if v == 0)
        return CoboundaryReport(speedup.level, Outcome.UNKNOWN, g,
                                {"unvisited": [list(u) for u in unseen[:10]]}, n, 0)
    traj = simulate_speedup(speedup, n + 1)
    seen, checked = {}, 0
    for t, fl in enumerate(traj.floors):
        if fl in seen:
            t0 = seen[fl]
            if traj.positions[t] - traj.positions[t0] != c * (t - t0):
                raise AssertionError(f"first return from step {t0} breaks p(x,n) = cn")
            checked += 1
        seen[fl] = t
    return CoboundaryReport(speedup.level, Outcome.YES, g, None, n, checked)


# ---------------------------------------------------------------- conjugacy and odometers

@dataclass(frozen=True)
class ConjugacyVerdict:
    outcome: str
    sufficient: Verdict
    gcd_test: Verdict
    detail: str

    @property
    def exit_code(self) -> int:
        return {"ConjugateToTc": 0, "TcNotMinimal": 1}.get(self.outcome, 2)

    def as_dict(self) -> dict:
        return {"outcome": self.outcome, "detail": self.detail,
                "sufficient_condition": self.sufficient.as_dict(),
                "gcd_test": self.gcd_test.as_dict()}


def conjugacy_verdict(speedup: SpeedupSystem) -> ConjugacyVerdict:
    lab = speedup.labeling
    suff = sufficient_condition_check(lab)
    gcd = constant_speedup_toeplitz_test(speedup.base, lab.c)
    if gcd.outcome is Outcome.NO:
        return ConjugacyVerdict("TcNotMinimal", suff, gcd,
                                f"T^{lab.c} is not minimal, so no conjugacy to it is possible")
    if suff.outcome is Outcome.YES and gcd.outcome is Outcome.YES:
        return ConjugacyVerdict("ConjugateToTc", suff, gcd,
                                "p - c is an S-coboundary and T^c is minimal")
    return ConjugacyVerdict("Unknown", suff, gcd, "sufficient condition not met")


@dataclass(frozen=True)
class SameOdometerReport:
    same: Optional[bool]
    method: str
    original: dict
    speedup: dict

    def as_dict(self) -> dict:
        return asdict(self)


def _fmt(sn: dict) -> dict:
    return {str(p): ("inf" if e == math.inf else e) for p, e in sorted(sn.items())}


def same_odometer_report(original: Union[OdometerSpec, SAdicSystem, Substitution],
                         cert: Union[dict, ToeplitzCertificate]) -> SameOdometerReport:
    """Compare the original odometer with the one of a certified speedup period structure."""
    if not isinstance(original, OdometerSpec):
        original = system_odometer(original)
    if isinstance(cert, dict):
        cert = ToeplitzCertificate.from_dict(cert)
    if not cert.periods:
        raise ValueError("a period-structure certificate is required")
    sp = odometer_spec(PeriodStructure(cert.periods))
    if cert.ratio_cycle and original.tail:
        spec = OdometerSpec(sp.alpha, (cert.ratio_cycle,))
        same = same_odometer(original, spec)
        return SameOdometerReport(same, "supernatural numbers", _fmt(supernatural(original)),
                                  _fmt(supernatural(spec)))
    ps = original.periods(len(original.alpha) + 4 * max(1, len(original.tail)) + len(cert.periods) * 4) \
        if original.tail else original.periods(len(original.alpha))
    ok = all(any(p % q == 0 for p in ps) for q in cert.periods)
    return SameOdometerReport(True if ok else None, "prefix divisibility (not a proof)",
                              {"periods": list(ps)}, {"periods": list(cert.periods)})
