"""Kakutani-Rokhlin towers, jump functions, orbit labelings and lifted substitutions.

At level ``k`` the towers are indexed by the letters of ``A_k``; the base of
tower ``a`` is the cylinder of ``theta_1 ∘ ... ∘ theta_k(a)`` and every tower
has height ``p_k``.  A jump function assigns a step ``p`` to each floor, and
the speedup moves a point on floor ``f`` to floor ``f + p`` (or across the
tower top into the next tower).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Optional

from .errors import (DuplicateBaseWords, GcdObstruction, InconsistentOrbitNumber,
                     InvalidJump, LandingAmbiguous, LevelTooLow, WindowExhausted)
from .substitution import (Alphabet, SAdicSystem, Substitution, classify, factors,
                           pair, power, wielandt_bound)
from .toeplitz import WindowedSequence, as_system, level_sequence, system_odometer


# ---------------------------------------------------------------- partitions

@dataclass(frozen=True)
class Tower:
    letter: str
    base_word: tuple


@dataclass(frozen=True)
class KRPartition:
    level: int
    towers: tuple
    height: int

    def tower(self, letter) -> Tower:
        for t in self.towers:
            if t.letter == letter:
                return t
        raise KeyError(letter)

    @property
    def letters(self) -> tuple:
        return tuple(t.letter for t in self.towers)

    def common_prefix(self) -> tuple:
        words = [t.base_word for t in self.towers]
        n = 0
        while n < self.height and len({w[n] for w in words}) == 1:
            n += 1
        return words[0][:n]


def build_kr(system, k: int) -> KRPartition:
    if k < 1:
        raise ValueError("levels start at 1")
    system = as_system(system)
    comp = system.composition(k)
    if comp.constant_length is None:
        raise ValueError(f"level {k} towers do not share one height")
    seen = {}
    for a, w in comp.items():
        if w in seen:
            raise DuplicateBaseWords(
                f"towers {seen[w]!r} and {a!r} share the base word at level {k}")
        seen[w] = a
    return KRPartition(k, tuple(Tower(a, w) for a, w in comp.items()), comp.constant_length)


def least_valid_level(system, max_p: int) -> int:
    """Least ``k`` whose towers are taller than ``max_p``."""
    system = as_system(system)
    k, p = 0, 1
    while p <= max_p:
        k += 1
        L = system.level_length(k)
        if L is None:
            raise ValueError(f"theta_{k} is not constant length")
        p *= L
    return max(k, 1)


def two_letter_language(system, k: int) -> frozenset:
    """Exact set of 2-letter words of the level-``k`` coding.

    Solves ``L_j = inner(theta_{j+1}) ∪ factors_2(theta_{j+1}(L_{j+1}))`` by
    least-fixed-point iteration over the periodic tail, then descends.
    """
    system = as_system(system)
    N, M = system.tail_from, system.tail_period

    def step(j, upper):
        th = system.theta(j + 1)
        out = set()
        for w in th.images:
            out |= factors(w, 2)
        for x, y in upper:
            out |= factors(th[x] + th[y], 2)
        return frozenset(out)

    # levels N-1 .. N+M-2 are determined by the cycle of rules theta_N .. theta_{N+M-1}
    cycle = list(range(N - 1, N - 1 + M))
    sets = {j: frozenset() for j in cycle}
    changed = True
    while changed:
        changed = False
        for j in reversed(cycle):
            upper = sets[cycle[0]] if j == cycle[-1] else sets[j + 1]
            new = step(j, upper)
            if new != sets[j]:
                sets[j] = new
                changed = True
    if k >= N - 1:
        return sets[N - 1 + (k - N + 1) % M]
    cur = sets[N - 1]
    for j in range(N - 2, k - 1, -1):
        cur = step(j, cur)
    return cur


# ---------------------------------------------------------------- jump functions

@dataclass(frozen=True)
class JumpFunction:
    """Floor-constant jump data: ``table[tower][floor] = p``."""

    level: int
    table: Mapping

    def __post_init__(self):
        object.__setattr__(self, "table", {a: tuple(int(v) for v in ps)
                                           for a, ps in dict(self.table).items()})
        for a, ps in self.table.items():
            if any(v < 1 for v in ps):
                raise ValueError(f"jump values on tower {a!r} must be positive")

    def __hash__(self):
        return hash((self.level, tuple(sorted(self.table.items()))))

    def __call__(self, tower, floor) -> int:
        return self.table[tower][floor]

    @property
    def max_value(self) -> int:
        return max(max(ps) for ps in self.table.values())

    @classmethod
    def constant(cls, kr: KRPartition, p: int) -> "JumpFunction":
        return cls(kr.level, {a: (p,) * kr.height for a in kr.letters})

    @classmethod
    def from_floors(cls, kr: KRPartition, floors, default: int) -> "JumpFunction":
        table = {a: [default] * kr.height for a in kr.letters}
        for entry in floors:
            a, f, p = entry["tower"], int(entry["floor"]), int(entry["p"])
            if a not in table:
                raise KeyError(f"unknown tower {a!r}")
            if not 0 <= f < kr.height:
                raise IndexError(f"floor {f} outside tower of height {kr.height}")
            table[a][f] = p
        return cls(kr.level, table)

    @classmethod
    def from_cylinders(cls, kr: KRPartition, cylinders, default: int) -> "JumpFunction":
        """Resolve ``{word, offset, p}`` entries: floor ``offset`` of every tower whose base word starts with ``word``."""
        table = {a: [default] * kr.height for a in kr.letters}
        for entry in cylinders:
            word = tuple(entry["word"])
            off, p = int(entry["offset"]), int(entry["p"])
            if len(word) > kr.height:
                raise ValueError(f"cylinder longer than the level-{kr.level} towers")
            if not 0 <= off < kr.height:
                raise IndexError(f"offset {off} outside tower of height {kr.height}")
            hits = [t.letter for t in kr.towers if t.base_word[:len(word)] == word]
            if not hits:
                raise ValueError(f"cylinder {''.join(word)!r} matches no tower base")
            for a in hits:
                table[a][off] = p
        return cls(kr.level, table)

    def floors(self):
        for a, ps in self.table.items():
            for f, p in enumerate(ps):
                yield a, f, p


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str


@dataclass(frozen=True)
class JumpValidation:
    violations: tuple

    @property
    def valid(self) -> bool:
        return not self.violations

    def kinds(self) -> set:
        return {v.kind for v in self.violations}


def validate_jump(system, kr: KRPartition, jump: JumpFunction) -> JumpValidation:
    """Check that the jump data defines a homeomorphism at floor granularity.

    Every floor of the target tower ``b`` is split by the tower ``a`` that
    precedes it.  For each allowed pair ``(a, b)`` every floor of ``b`` must be
    covered exactly once: by an in-tower step within ``b``, or by an exit from
    the top of ``a``.
    """
    out = []
    if jump.level != kr.level:
        out.append(Violation("LevelMismatch", f"jump level {jump.level} != partition level {kr.level}"))
        return JumpValidation(tuple(out))
    h = kr.height
    if set(jump.table) != set(kr.letters) or any(len(ps) != h for ps in jump.table.values()):
        out.append(Violation("Incomplete", "jump table does not cover every floor"))
        return JumpValidation(tuple(out))
    if jump.max_value >= h:
        out.append(Violation("TowerTooShort",
                             f"max p = {jump.max_value} is not below the tower height {h}"))
        return JumpValidation(tuple(out))
    inner = {}
    exits = {}
    for a, f, p in jump.floors():
        if f + p < h:
            inner.setdefault((a, f + p), []).append(f)
        else:
            exits.setdefault((a, f + p - h), []).append(f)
    pairs = sorted(two_letter_language(system, kr.level))
    for a, b in pairs:
        for g in range(h):
            srcs = [(b, f) for f in inner.get((b, g), [])] + \
                   [(a, f) for f in exits.get((a, g), [])]
            if len(srcs) > 1:
                out.append(Violation(
                    "Overlap", f"floor {g} of tower {b!r} after {a!r} is hit by {srcs}"))
            elif not srcs:
                out.append(Violation(
                    "Gap", f"floor {g} of tower {b!r} after {a!r} has no preimage"))
    return JumpValidation(tuple(out))


# ---------------------------------------------------------------- labeling

def _compose_perm(first: tuple, second: tuple) -> tuple:
    """Apply ``first`` then ``second``; permutations map label ``l`` to ``perm[l-1]``."""
    return tuple(second[first[l] - 1] for l in range(len(first)))


def identity_perm(c: int) -> tuple:
    return tuple(range(1, c + 1))


def cycle_notation(perm: tuple) -> str:
    seen, parts = set(), []
    for s in range(1, len(perm) + 1):
        if s in seen:
            continue
        cyc, x = [], s
        while x not in seen:
            seen.add(x)
            cyc.append(x)
            x = perm[x - 1]
        if len(cyc) > 1:
            parts.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(parts) or "id"


def classify_perm(perm: tuple) -> str:
    c = len(perm)
    if perm == identity_perm(c):
        return "identity"
    x, n = 1, 0
    while True:
        x = perm[x - 1]
        n += 1
        if x == 1:
            break
    return "cycle" if n == c else "product"


@dataclass(frozen=True)
class OrbitLabeling:
    level: int
    c: int
    labels: Mapping
    chains: Mapping
    permutations: Mapping
    heights: Mapping

    def __hash__(self):
        return hash((self.level, self.c, tuple(sorted(self.permutations.items()))))

    def label(self, tower, floor) -> int:
        return self.labels[tower][floor]


def orbit_labeling(system, kr: KRPartition, jump: JumpFunction) -> OrbitLabeling:
    """Label floors by S-chains, lowest unlabeled floor first, tower by tower."""
    h = kr.height
    labels, chains, tops = {}, {}, {}
    counts = {}
    for a in kr.letters:
        ps = jump.table[a]
        lab = [0] * h
        ch = []
        for start in range(h):
            if lab[start]:
                continue
            cur = len(ch) + 1
            f, floors = start, []
            while f < h:
                if lab[f]:
                    raise InvalidJump(f"two chains meet at floor {f} of tower {a!r}")
                lab[f] = cur
                floors.append(f)
                f += ps[f]
            ch.append(tuple(floors))
        labels[a] = tuple(lab)
        chains[a] = tuple(ch)
        counts[a] = len(ch)
    if len(set(counts.values())) != 1:
        raise InconsistentOrbitNumber(f"chains per tower differ: {counts}")
    c = next(iter(counts.values()))
    pairs = two_letter_language(system, kr.level)
    perms = {}
    for a in kr.letters:
        ps = jump.table[a]
        img = []
        for l, floors in enumerate(chains[a], start=1):
            top = floors[-1]
            land = top + ps[top] - h
            succ = sorted({y for x, y in pairs if x == a})
            seen = {labels[b][land] for b in succ}
            if len(seen) != 1:
                raise LandingAmbiguous(
                    f"chain {l} of tower {a!r} lands on floor {land} with labels {sorted(seen)}")
            img.append(seen.pop())
        perm = tuple(img)
        if sorted(perm) != list(range(1, c + 1)):
            raise InvalidJump(f"exit map of tower {a!r} is not a permutation: {perm}")
        perms[a] = perm
    heights = {a: tuple(Counter(labels[a])[j] for j in range(1, c + 1)) for a in kr.letters}
    return OrbitLabeling(kr.level, c, labels, chains, perms, heights)


@dataclass(frozen=True)
class PermutationReport:
    tower: str
    permutation: tuple
    notation: str
    kind: str


def tower_permutations(labeling: OrbitLabeling) -> list:
    return [PermutationReport(a, p, cycle_notation(p), classify_perm(p))
            for a, p in labeling.permutations.items()]


def next_level_perms(theta: Substitution, perms: Mapping) -> dict:
    """Permutations one level up: compose along each image of ``theta``."""
    c = len(next(iter(perms.values())))
    out = {}
    for a, w in theta.items():
        cur = identity_perm(c)
        for b in w:
            cur = _compose_perm(cur, perms[b])
        out[a] = cur
    return out


# ---------------------------------------------------------------- lifted substitutions

def lifted_alphabet(alphabet: Alphabet, c: int) -> Alphabet:
    return Alphabet(tuple(pair(a, l) for a in alphabet for l in range(1, c + 1)))


def lift(theta: Substitution, perms: Mapping) -> Substitution:
    """Lift ``theta`` to letter-label pairs; the label flows through ``perms`` of each letter passed."""
    c = len(next(iter(perms.values())))
    dom = lifted_alphabet(theta.domain, c)
    cod = dom if theta.is_endomorphism else lifted_alphabet(theta.codomain, c)
    images = []
    for a in theta.domain:
        for l in range(1, c + 1):
            out, cur = [], l
            for b in theta[a]:
                out.append(pair(b, cur))
                cur = perms[b][cur - 1]
            images.append(tuple(out))
    return Substitution(dom, cod, tuple(images))


def tau_substitution(theta: Substitution, labeling: OrbitLabeling) -> Substitution:
    return lift(theta, labeling.permutations)


def level_perms(system, labeling: OrbitLabeling, upto: int) -> dict:
    """Permutations at every level from the labeling's level to ``upto``."""
    system = as_system(system)
    out = {labeling.level: dict(labeling.permutations)}
    for j in range(labeling.level, upto):
        out[j + 1] = next_level_perms(system.theta(j + 1), out[j])
    return out


def tau_window(system, labeling: OrbitLabeling, l: int, k: int) -> Substitution:
    """Lift of ``theta_{l+1} ∘ ... ∘ theta_k`` with the level-``l`` permutations."""
    if not labeling.level <= l <= k:
        raise ValueError("need labeling level <= l <= k")
    system = as_system(system)
    perms = level_perms(system, labeling, l)[l]
    if l == k:
        c = labeling.c
        alph = lifted_alphabet(system.alphabet(l), c)
        return Substitution(alph, alph, tuple((s,) for s in alph))
    return lift(system.window(l, k), perms)


# ---------------------------------------------------------------- minimality

@dataclass(frozen=True)
class MinimalityVerdict:
    outcome: str
    witness: Optional[dict] = None
    trapped: Optional[tuple] = None
    detail: str = ""

    def __str__(self):
        if self.outcome == "NotMinimal" and self.trapped:
            return f"NotMinimal(trapped labels {list(self.trapped)})"
        return self.outcome


def _label_closure(perms: Mapping, c: int) -> set:
    reach, frontier = {1}, [1]
    while frontier:
        l = frontier.pop()
        for p in perms.values():
            m = p[l - 1]
            if m not in reach:
                reach.add(m)
                frontier.append(m)
    return reach


def stable_perm_cycle(theta: Substitution, perms: Mapping, limit: int = 64):
    """Least ``(j0, g)`` with level ``j0 + g`` permutations equal to level ``j0``, counted from the given level."""
    seq = [dict(perms)]
    for _ in range(limit):
        nxt = next_level_perms(theta, seq[-1])
        for j0, earlier in enumerate(seq):
            if earlier == nxt:
                return j0, len(seq) - j0, seq[j0]
        seq.append(nxt)
    raise ValueError("permutation sequence did not cycle")


def minimality_check(system, labeling: OrbitLabeling, depth: int = 8) -> MinimalityVerdict:
    system = as_system(system)
    c = labeling.c
    reach = _label_closure(labeling.permutations, c)
    if len(reach) < c:
        return MinimalityVerdict("NotMinimal", trapped=tuple(sorted(reach)),
                                 detail="labels reachable from 1 miss some labels")
    if c == 1:
        return MinimalityVerdict("Minimal", {labeling.level: labeling.level + 1},
                                 detail="orbit number 1")
    if system.is_constant:
        theta = system.rules[0]
        j0, g, perms = stable_perm_cycle(theta, labeling.permutations)
        tau = lift(power(theta, g), perms)
        prof = classify(tau)
        level = labeling.level + j0
        if prof.primitive is not None:
            return MinimalityVerdict("Minimal", {level: prof.primitive},
                                     detail=f"lifted substitution of theta^{g} is primitive")
        trapped = _trapped_letters(tau)
        return MinimalityVerdict("NotMinimal", trapped=trapped,
                                 detail=f"lifted substitution of theta^{g} is not primitive "
                                        f"(Wielandt bound {wielandt_bound(len(tau.domain))})")
    perms_by_level = level_perms(system, labeling, labeling.level + 2 * depth + 1)
    witness = {}
    for l in range(labeling.level, labeling.level + depth + 1):
        target = {pair(a, j) for a in system.alphabet(l) for j in range(1, c + 1)}
        found = None
        for k in range(l + 1, l + depth + 1):
            sub = lift(system.window(l, k), perms_by_level[l])
            if all(target <= set(w) for w in sub.images):
                found = k
                break
        if found is None:
            return MinimalityVerdict("UnknownAtDepth", witness,
                                     detail=f"no covering level found for l={l} within depth {depth}")
        witness[l] = found
    return MinimalityVerdict("Minimal", witness, detail="full letter coverage at every checked level")


def _trapped_letters(tau: Substitution) -> tuple:
    """Letters reachable from the first letter; a proper subset witnesses non-primitivity."""
    start = tau.domain.letters[0]
    reach, frontier = {start}, [start]
    while frontier:
        x = frontier.pop()
        for y in tau[x]:
            if y not in reach:
                reach.add(y)
                frontier.append(y)
    return tuple(sorted(reach, key=tau.domain.index.__getitem__))


# ---------------------------------------------------------------- speedup systems

@dataclass(frozen=True)
class SpeedupSystem:
    base: SAdicSystem
    jump: JumpFunction

    def __post_init__(self):
        object.__setattr__(self, "base", as_system(self.base))

    def __hash__(self):
        return hash((self.base, self.jump))

    @cached_property
    def kr(self) -> KRPartition:
        return build_kr(self.base, self.jump.level)

    @cached_property
    def validation(self) -> JumpValidation:
        return validate_jump(self.base, self.kr, self.jump)

    @cached_property
    def labeling(self) -> OrbitLabeling:
        if not self.validation.valid:
            raise InvalidJump("; ".join(v.detail for v in self.validation.violations[:5]))
        return orbit_labeling(self.base, self.kr, self.jump)

    @property
    def level(self) -> int:
        return self.jump.level

    @property
    def c(self) -> int:
        return self.labeling.c

    def minimality(self, depth: int = 8) -> MinimalityVerdict:
        return minimality_check(self.base, self.labeling, depth)


def refine_jump(system, jump: JumpFunction, k: int) -> JumpFunction:
    """Express a level-``M`` jump function on the finer level-``k`` partition."""
    system = as_system(system)
    M = jump.level
    if k < M:
        raise ValueError("can only refine upward")
    if k == M:
        return jump
    pM = build_kr(system, M).height
    win = system.window(M, k)
    table = {}
    for a, w in win.items():
        table[a] = tuple(jump.table[w[f // pM]][f % pM] for f in range(pM * len(w)))
    return JumpFunction(k, table)


def level_stability(system, speedup_or_jump, levels: int = 1) -> dict:
    """Compare composed permutations against labelings recomputed on refined partitions."""
    system = as_system(system)
    jump = speedup_or_jump.jump if isinstance(speedup_or_jump, SpeedupSystem) else speedup_or_jump
    base_lab = orbit_labeling(system, build_kr(system, jump.level), jump)
    composed = level_perms(system, base_lab, jump.level + levels)
    report = {}
    for j in range(jump.level + 1, jump.level + levels + 1):
        fine = refine_jump(system, jump, j)
        lab = orbit_labeling(system, build_kr(system, j), fine)
        report[j] = {
            "composed_matches_refined": lab.permutations == composed[j],
            "equal_to_base_level": lab.permutations == base_lab.permutations,
            "permutations": {a: cycle_notation(p) for a, p in lab.permutations.items()},
        }
    return report


# ---------------------------------------------------------------- simulation

@dataclass(frozen=True)
class Trajectory:
    positions: tuple
    jump_words: tuple
    floors: tuple
    labels: tuple

    @property
    def total(self) -> int:
        return self.positions[-1]


def simulate_speedup(speedup: SpeedupSystem, steps: int,
                     window: Optional[WindowedSequence] = None) -> Trajectory:
    """Follow the S-orbit of the generating point for ``steps`` steps.

    ``q_{t+1} = q_t + p(floor(q_t))`` where the floor of position ``q`` is
    read from the level-``k`` coding.  With an explicit ``window`` the run
    stops with WindowExhausted when it would read beyond it.
    """
    h = speedup.kr.height
    k = speedup.level
    need = steps * speedup.jump.max_value + h
    if window is None:
        x = level_sequence(speedup.base, 0, need)
    else:
        x = window.symbols
    coding = level_sequence(speedup.base, k, max(1, (len(x) + h - 1) // h) + 1)
    labeling = speedup.labeling
    pos, words, floors, labs = [0], [], [], []
    q = 0
    for _ in range(steps):
        tower, f = coding[q // h], q % h
        p = speedup.jump(tower, f)
        if q + p > len(x):
            raise WindowExhausted(f"step from {q} needs {q + p - len(x)} symbols beyond the window")
        words.append(tuple(x[q:q + p]))
        floors.append((tower, f))
        labs.append(labeling.label(tower, f))
        q += p
        pos.append(q)
    return Trajectory(tuple(pos), tuple(words), tuple(floors), tuple(labs))


# ---------------------------------------------------------------- construction

def construct_toeplitz_speedup(system, c: int, M: int) -> SpeedupSystem:
    """Jump function at level ``M`` with every tower labeled ``f mod c + 1`` and exit permutation ``(1 2 ... c)``.

    ``p = c`` below the top ``c`` floors; a top floor ``f`` with label ``l``
    jumps to floor ``l mod c`` of the next tower.
    """
    system = as_system(system)
    if c < 1:
        raise ValueError("orbit number must be positive")
    odo = system_odometer(system)
    bad = [a for a in odo.tail if math.gcd(a, c) > 1]
    if bad:
        raise GcdObstruction(f"gcd(c={c}, tail lengths {list(odo.tail)}) > 1")
    kr = build_kr(system, M)
    h = kr.height
    if c > 1 and h <= 2 * c:
        raise LevelTooLow(f"p_{M} = {h} is not above 2c = {2 * c}")
    pattern = []
    for f in range(h):
        if f < h - c:
            pattern.append(c)
        else:
            d = (f % c + 1) % c
            pattern.append(h - f + d)
    jump = JumpFunction(M, {a: tuple(pattern) for a in kr.letters})
    return SpeedupSystem(system, jump)
