"""Finite-window periodicity analysis, period structures and odometers.

Every window-based result here is an over-approximation of the infinite
notion it mirrors: a residue that looks periodic on a window may fail
further out.  Results carry the window length so callers can say what was
actually verified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import DivisibilityViolation, NotConstantLength
from .substitution import SAdicSystem, Substitution, Word

HOLE = None


@dataclass(frozen=True)
class WindowedSequence:
    symbols: tuple
    base_offset: int = 0
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if not self.symbols:
            raise ValueError("window must be nonempty")

    def __len__(self):
        return len(self.symbols)

    def __getitem__(self, i):
        return self.symbols[i]


def as_system(system) -> SAdicSystem:
    return SAdicSystem.constant(system) if isinstance(system, Substitution) else system


def level_sequence(system, k: int, length: int) -> Word:
    """Prefix of the level-``k`` coding of the generating Toeplitz point.

    Level 0 is the point itself.  The prefix is ``theta_{k+1} ∘ ... ∘ theta_K``
    applied to the common first letter of ``theta_{K+1}``, which is stable in
    ``K`` because every rule is left proper.
    """
    system = as_system(system)
    K = k
    while True:
        nxt = system.theta(K + 1)
        if not nxt.left_proper:
            raise ValueError(f"theta_{K + 1} is not left proper")
        seed = nxt.images[0][0]
        word = system.window(k, K)[seed]
        if len(word) >= length:
            return word[:length]
        K += 1
        if K - k > 64:
            raise ValueError("level sequence does not grow")


def toeplitz_window(system, length: int) -> WindowedSequence:
    return WindowedSequence(level_sequence(system, 0, length), 0,
                            f"prefix of length {length} of the generating point")


@dataclass(frozen=True)
class PerPWindow:
    p: int
    forced: dict
    window: int
    low_confidence: bool


def per_p_window(x: WindowedSequence, p: int) -> PerPWindow:
    """Residues ``r mod p`` where every in-window position carries one symbol."""
    if p < 1:
        raise ValueError("p must be positive")
    forced = {}
    n = len(x)
    for r in range(min(p, n)):
        column = set(x.symbols[r::p])
        if len(column) == 1:
            forced[(r + x.base_offset) % p] = column.pop()
    return PerPWindow(p, forced, n, n < 2 * p)


@dataclass(frozen=True)
class SkeletonWindow:
    p: int
    entries: tuple
    window: int

    def render(self, hole: str = "_") -> str:
        return "".join(hole if e is HOLE else e for e in self.entries)


def skeleton(x: WindowedSequence, p: int) -> SkeletonWindow:
    per = per_p_window(x, p)
    return SkeletonWindow(p, tuple(per.forced.get(r, HOLE) for r in range(p)), len(x))


@dataclass(frozen=True)
class EssentialVerdict:
    kind: str
    q: Optional[int] = None

    def __str__(self):
        return f"NotEssential({self.q})" if self.kind == "NotEssential" else self.kind


def essential_period_check(x: WindowedSequence, p: int) -> EssentialVerdict:
    """Is the ``p``-skeleton periodic with some smaller period?

    Holes compare equal only to holes.
    """
    sk = skeleton(x, p).entries
    if all(e is HOLE for e in sk):
        return EssentialVerdict("HoleEverywhere")
    for q in range(1, p):
        if all(sk[r] == sk[(r + q) % p] for r in range(p)):
            return EssentialVerdict("NotEssential", q)
    return EssentialVerdict("Essential")


@dataclass(frozen=True)
class PeriodStructure:
    periods: tuple
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "periods", tuple(int(p) for p in self.periods))
        if any(p < 1 for p in self.periods):
            raise ValueError("periods must be positive")

    @property
    def is_valid(self) -> bool:
        ps = self.periods
        return all(a < b and b % a == 0 for a, b in zip(ps, ps[1:]))


def period_structure(system, K: int) -> PeriodStructure:
    """``(|theta_1|, |theta_1||theta_2|, ...)`` up to ``K`` terms."""
    system = as_system(system)
    out = []
    p = 1
    for i in range(1, K + 1):
        L = system.level_length(i)
        if L is None:
            raise NotConstantLength(f"theta_{i} is not constant length")
        p *= L
        out.append(p)
    return PeriodStructure(tuple(out), "s-adic lengths")


@dataclass(frozen=True)
class OdometerSpec:
    """Ratio sequence ``alpha``: a finite prefix followed by an optional repeating cycle."""

    alpha: tuple
    tail: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(int(a) for a in self.alpha))
        object.__setattr__(self, "tail", tuple(int(a) for a in self.tail))
        if any(a < 2 for a in self.alpha + self.tail):
            raise ValueError("odometer ratios must be at least 2")

    def ratio(self, i: int) -> int:
        """``alpha_i`` for 1-based ``i``, extended by the tail cycle."""
        if i <= len(self.alpha):
            return self.alpha[i - 1]
        if not self.tail:
            raise IndexError("ratio beyond the known prefix")
        return self.tail[(i - len(self.alpha) - 1) % len(self.tail)]

    def periods(self, K: int) -> tuple:
        out, p = [], 1
        for i in range(1, K + 1):
            p *= self.ratio(i)
            out.append(p)
        return tuple(out)


def odometer_spec(ps: PeriodStructure) -> OdometerSpec:
    if not ps.periods:
        raise ValueError("empty period structure")
    alpha = [ps.periods[0]]
    for a, b in zip(ps.periods, ps.periods[1:]):
        if b % a:
            raise DivisibilityViolation(f"{a} does not divide {b}")
        alpha.append(b // a)
    return OdometerSpec(tuple(alpha))


def system_odometer(system) -> OdometerSpec:
    """Exact ratio data of an eventually periodic constant-length system."""
    system = as_system(system)
    L = len(system.rules)
    lengths = []
    for i in range(1, L + 1):
        length = system.level_length(i)
        if length is None:
            raise NotConstantLength(f"theta_{i} is not constant length")
        lengths.append(length)
    prefix = tuple(lengths[:system.tail_from - 1])
    cycle = tuple(lengths[system.tail_from - 1:system.tail_from - 1 + system.tail_period])
    return OdometerSpec(prefix, cycle)


def factorize(n: int) -> dict:
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def supernatural(odo: OdometerSpec) -> dict:
    """Prime exponents of ``prod alpha_i``; primes in the tail cycle get ``math.inf``."""
    out = {}
    for a in odo.alpha + odo.tail:
        for p, e in factorize(a).items():
            out[p] = out.get(p, 0) + e
    for a in odo.tail:
        for p in factorize(a):
            out[p] = math.inf
    return out


def same_odometer(a: OdometerSpec, b: OdometerSpec) -> bool:
    """Two odometers are conjugate iff their supernatural numbers agree."""
    if not (a.tail and b.tail):
        raise ValueError("both ratio sequences need a repeating tail to compare exactly")
    return supernatural(a) == supernatural(b)
