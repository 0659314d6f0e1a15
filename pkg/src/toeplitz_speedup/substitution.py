"""Substitutions over finite alphabets, S-adic systems and their languages.

Symbols are plain strings so that lifted letters such as ``(a,1)`` and the
c-word letters of a constant speedup are first-class.  Words are tuples of
symbols.  Every object here is immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import AlphabetMismatch, NonGrowing, NotSeed

Symbol = str
Word = tuple


def pair(symbol: Symbol, label) -> Symbol:
    """Canonical rendering of a lifted letter, e.g. ``pair('a', 1) == '(a,1)'``."""
    return f"({symbol},{label})"


def unpair(symbol: Symbol) -> tuple[Symbol, int]:
    """Inverse of :func:`pair`; the label is returned as an int."""
    if not (symbol.startswith("(") and symbol.endswith(")")):
        raise ValueError(f"{symbol!r} is not a lifted letter")
    inner = symbol[1:-1]
    head, _, label = inner.rpartition(",")
    return head, int(label)


@dataclass(frozen=True)
class Alphabet:
    letters: tuple
    index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        letters = tuple(str(a) for a in self.letters)
        if not letters:
            raise ValueError("alphabet must be nonempty")
        if len(set(letters)) != len(letters):
            raise ValueError(f"duplicate symbols in alphabet {letters}")
        if any(a == "" for a in letters):
            raise ValueError("empty symbol in alphabet")
        object.__setattr__(self, "letters", letters)
        object.__setattr__(self, "index", {a: i for i, a in enumerate(letters)})

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __contains__(self, symbol):
        return symbol in self.index

    @property
    def single_char(self) -> bool:
        return all(len(a) == 1 for a in self.letters)

    def tokenize(self, text: Union[str, Sequence[str]]) -> Word:
        """Split ``text`` into symbols by greedy longest match.

        Sequences are taken as already tokenized and only checked.
        """
        if not isinstance(text, str):
            out = tuple(str(s) for s in text)
            bad = [s for s in out if s not in self.index]
            if bad:
                raise AlphabetMismatch(f"symbols {bad} not in alphabet {self.letters}")
            return out
        by_len = sorted(self.letters, key=len, reverse=True)
        out = []
        i = 0
        while i < len(text):
            if text[i].isspace():
                i += 1
                continue
            for a in by_len:
                if text.startswith(a, i):
                    out.append(a)
                    i += len(a)
                    break
            else:
                raise AlphabetMismatch(
                    f"cannot read {text[i:]!r} over alphabet {self.letters}")
        return tuple(out)

    def render(self, word: Word) -> str:
        return "".join(word)

    def sort_key(self, word: Word):
        return tuple(self.index[s] for s in word)

    def sorted(self, words: Iterable[Word]) -> list:
        return sorted(words, key=self.sort_key)


def render(word: Word) -> str:
    return "".join(word)


@dataclass(frozen=True)
class Substitution:
    domain: Alphabet
    codomain: Alphabet
    images: tuple

    def __post_init__(self):
        images = tuple(tuple(w) for w in self.images)
        if len(images) != len(self.domain):
            raise ValueError("one image per domain letter is required")
        for a, w in zip(self.domain, images):
            if not w:
                raise ValueError(f"image of {a!r} is empty")
            bad = [s for s in w if s not in self.codomain]
            if bad:
                raise AlphabetMismatch(
                    f"image of {a!r} uses {bad} outside the codomain {self.codomain.letters}")
        object.__setattr__(self, "images", images)

    @classmethod
    def from_dict(cls, mapping: Mapping, domain=None, codomain=None) -> "Substitution":
        """Build from ``{letter: word}``; words may be strings or symbol lists.

        Without an explicit codomain the symbols of the images are used, in
        order of first appearance; an endomorphism is assumed when the image
        symbols all lie in the domain.
        """
        if domain is None:
            domain = Alphabet(tuple(mapping))
        elif not isinstance(domain, Alphabet):
            domain = Alphabet(tuple(domain))
        if codomain is None:
            raw = {a: mapping[a] for a in domain}
            if all(isinstance(w, str) for w in raw.values()) and domain.single_char:
                seen = []
                for w in raw.values():
                    for ch in w:
                        if ch not in seen:
                            seen.append(ch)
                if all(ch in domain for ch in seen):
                    codomain = domain
                else:
                    codomain = Alphabet(tuple(seen))
            elif all(not isinstance(w, str) for w in raw.values()):
                seen = []
                for w in raw.values():
                    for s in w:
                        if s not in seen:
                            seen.append(s)
                codomain = domain if all(s in domain for s in seen) else Alphabet(tuple(seen))
            else:
                codomain = domain
        elif not isinstance(codomain, Alphabet):
            codomain = Alphabet(tuple(codomain))
        images = tuple(codomain.tokenize(mapping[a]) for a in domain)
        return cls(domain, codomain, images)

    def __getitem__(self, letter) -> Word:
        return self.images[self.domain.index[letter]]

    def __call__(self, word: Iterable) -> Word:
        out = []
        for a in word:
            out.extend(self[a])
        return tuple(out)

    def items(self):
        return zip(self.domain.letters, self.images)

    def as_dict(self) -> dict:
        return {a: render(w) for a, w in self.items()}

    def __str__(self):
        return ", ".join(f"{a}->{render(w)}" for a, w in self.items())

    @property
    def is_endomorphism(self) -> bool:
        return self.domain == self.codomain

    @property
    def lengths(self) -> tuple:
        return tuple(len(w) for w in self.images)

    @property
    def constant_length(self):
        lens = set(self.lengths)
        return lens.pop() if len(lens) == 1 else None

    @property
    def left_proper(self) -> bool:
        return len({w[0] for w in self.images}) == 1

    @property
    def right_proper(self) -> bool:
        return len({w[-1] for w in self.images}) == 1

    @property
    def proper(self) -> bool:
        return self.left_proper and self.right_proper

    def incidence_matrix(self) -> np.ndarray:
        """``M[b, a]`` counts occurrences of codomain letter ``b`` in the image of ``a``."""
        m = np.zeros((len(self.codomain), len(self.domain)), dtype=object)
        for j, w in enumerate(self.images):
            for s in w:
                m[self.codomain.index[s], j] += 1
        return m

    def rename(self, domain_map: Mapping, codomain_map: Mapping = None) -> "Substitution":
        if codomain_map is None:
            codomain_map = domain_map
        dom = Alphabet(tuple(domain_map[a] for a in self.domain))
        cod = dom if self.is_endomorphism and codomain_map is domain_map else \
            Alphabet(tuple(codomain_map[a] for a in self.codomain))
        imgs = tuple(tuple(codomain_map[s] for s in w) for w in self.images)
        return Substitution(dom, cod, imgs)


def identity(alphabet: Alphabet) -> Substitution:
    return Substitution(alphabet, alphabet, tuple((a,) for a in alphabet))


def compose(outer: Substitution, inner: Substitution) -> Substitution:
    """``outer ∘ inner``: apply ``inner`` first, then ``outer`` letterwise."""
    if inner.codomain != outer.domain:
        raise AlphabetMismatch(
            f"cannot compose: inner codomain {inner.codomain.letters} "
            f"!= outer domain {outer.domain.letters}")
    return Substitution(inner.domain, outer.codomain,
                        tuple(outer(w) for w in inner.images))


def power(theta: Substitution, n: int) -> Substitution:
    if not theta.is_endomorphism:
        raise AlphabetMismatch("power needs domain == codomain")
    if n < 1:
        raise ValueError("exponent must be positive")
    result = theta
    for _ in range(n - 1):
        result = compose(theta, result)
    return result


@dataclass(frozen=True)
class SubstitutionProfile:
    constant_length: object
    left_proper: bool
    proper: bool
    primitive: object
    primitive_decided: bool
    aperiodic_hint: bool
    max_exponent: int

    @property
    def primitivity(self) -> str:
        if self.primitive is not None:
            return "primitive"
        return "not primitive" if self.primitive_decided else "not witnessed"

    def as_dict(self) -> dict:
        return {
            "constant_length": self.constant_length,
            "left_proper": self.left_proper,
            "proper": self.proper,
            "primitive_witness": self.primitive,
            "primitivity": self.primitivity,
            "aperiodic_hint": self.aperiodic_hint,
            "max_exponent": self.max_exponent,
        }


def wielandt_bound(n_letters: int) -> int:
    return (n_letters - 1) ** 2 + 1


def primitive_exponent(theta: Substitution, max_exponent: int):
    """Least ``n <= max_exponent`` with ``theta^n(a)`` containing every letter, else None."""
    m = (theta.incidence_matrix() > 0).astype(np.int64)
    cur = m.copy()
    for n in range(1, max_exponent + 1):
        if cur.all():
            return n
        cur = ((m @ cur) > 0).astype(np.int64)
    return None


def classify(theta: Substitution, max_exponent: int = None,
             aperiodic_bound: int = 8) -> SubstitutionProfile:
    """Exact profile of an endomorphism.

    ``max_exponent`` defaults to the Wielandt bound ``(|A|-1)^2 + 1``, at which
    the absence of a witness proves non-primitivity.  ``aperiodic_hint`` is a
    heuristic only: the factor complexity grows strictly up to
    ``aperiodic_bound``.
    """
    if not theta.is_endomorphism:
        raise AlphabetMismatch("classify needs domain == codomain")
    bound = wielandt_bound(len(theta.domain))
    if max_exponent is None:
        max_exponent = bound
    witness = primitive_exponent(theta, max_exponent)
    hint = False
    if witness is not None and min(theta.lengths) >= 2:
        counts = [len(substitution_language(theta, n)) for n in range(1, aperiodic_bound + 1)]
        hint = all(b > a for a, b in zip(counts, counts[1:]))
    return SubstitutionProfile(
        constant_length=theta.constant_length,
        left_proper=theta.left_proper,
        proper=theta.proper,
        primitive=witness,
        primitive_decided=witness is not None or max_exponent >= bound,
        aperiodic_hint=hint,
        max_exponent=max_exponent,
    )


def fixed_point_prefix(theta: Substitution, seed, n: int) -> Word:
    if n <= 0:
        return ()
    img = theta[seed]
    if img[0] != seed:
        raise NotSeed(f"image of {seed!r} does not begin with {seed!r}")
    if n == 1:
        return (seed,)
    w = (seed,)
    while len(w) < n:
        nxt = theta(w)
        if len(nxt) <= len(w):
            raise NonGrowing(f"iterating from {seed!r} stalls at length {len(w)}")
        w = nxt
    return w[:n]


def factors(word: Word, n: int) -> set:
    return {tuple(word[i:i + n]) for i in range(len(word) - n + 1)}


@dataclass(frozen=True)
class SAdicSystem:
    """A sequence ``theta_1, theta_2, ...`` with ``theta_i: A_i -> A_{i-1}*``.

    ``rules`` lists ``theta_1 .. theta_L`` explicitly.  For ``i > L`` the rule
    repeats with period ``tail_period``: ``theta_i = theta_{i - tail_period}``.
    ``tail_from`` is the first level of the repeating block.
    """

    rules: tuple
    tail_from: int = 1
    tail_period: int = 1

    def __post_init__(self):
        rules = tuple(self.rules)
        object.__setattr__(self, "rules", rules)
        if not rules:
            raise ValueError("at least one rule is required")
        L = len(rules)
        if self.tail_period < 1 or not (1 <= self.tail_from <= L):
            raise ValueError("bad tail rule")
        if L - self.tail_period + 1 < self.tail_from:
            raise ValueError("the repeating block must be listed in full")
        for i in range(1, L):
            if rules[i].codomain != rules[i - 1].domain:
                raise AlphabetMismatch(
                    f"theta_{i + 1} codomain does not match theta_{i} domain")
        nxt = rules[L - self.tail_period]
        if nxt.codomain != rules[-1].domain:
            raise AlphabetMismatch("tail rule does not chain with the last listed rule")
        object.__setattr__(self, "_cache", {})

    @classmethod
    def constant(cls, theta: Substitution) -> "SAdicSystem":
        return cls((theta,), 1, 1)

    @property
    def is_constant(self) -> bool:
        return len(self.rules) == 1 and self.tail_period == 1

    def theta(self, i: int) -> Substitution:
        if i < 1:
            raise IndexError("levels start at 1")
        L = len(self.rules)
        while i > L:
            i -= self.tail_period
        return self.rules[i - 1]

    def alphabet(self, i: int) -> Alphabet:
        return self.rules[0].codomain if i == 0 else self.theta(i).domain

    def window(self, l: int, k: int) -> Substitution:
        """``theta_{l+1} ∘ ... ∘ theta_k`` from ``A_k`` to ``A_l*`` (identity when ``l == k``)."""
        if l > k:
            raise ValueError("need l <= k")
        key = (l, k)
        if key not in self._cache:
            if l == k:
                sub = identity(self.alphabet(k))
            elif k == l + 1:
                sub = self.theta(k)
            else:
                sub = compose(self.window(l, k - 1), self.theta(k))
            self._cache[key] = sub
        return self._cache[key]

    def composition(self, k: int) -> Substitution:
        return self.window(0, k)

    def level_length(self, i: int):
        return self.theta(i).constant_length

    def is_constant_length(self, upto: int) -> bool:
        return all(self.level_length(i) is not None for i in range(1, upto + 1))

    def tail_levels(self) -> range:
        return range(self.tail_from, self.tail_from + self.tail_period)


System = Union[Substitution, SAdicSystem]


@dataclass(frozen=True)
class LanguageResult:
    words: tuple
    stabilized: bool
    depth: int

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def __contains__(self, w):
        return tuple(w) in set(self.words)


def language_of_length(system: System, n: int, depth: int = 12,
                       stop_when_stable: bool = True,
                       max_symbols: int = 4_000_000) -> LanguageResult:
    """Length-``n`` factors of ``theta_1 ∘ ... ∘ theta_k(a)`` for all ``a`` and ``k <= depth``.

    Stops early when two consecutive depths give the same set (if
    ``stop_when_stable``) or when the expanded words exceed ``max_symbols``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if isinstance(system, Substitution):
        system = SAdicSystem.constant(system)
    base = system.alphabet(0)
    seen = set()
    stabilized = False
    used = 0
    for k in range(1, depth + 1):
        sub = system.composition(k)
        if sum(sub.lengths) > max_symbols:
            break
        new = set(seen)
        for w in sub.images:
            new |= factors(w, n)
        used = k
        stabilized = new == seen and k > 1
        seen = new
        if stabilized and stop_when_stable:
            break
    return LanguageResult(tuple(base.sorted(seen)), stabilized, used)


@lru_cache(maxsize=None)
def _two_words(theta: Substitution) -> frozenset:
    found = set()
    for w in theta.images:
        found |= factors(w, 2)
    frontier = list(found)
    while frontier:
        x, y = frontier.pop()
        for f in factors(theta[x] + theta[y], 2):
            if f not in found:
                found.add(f)
                frontier.append(f)
    return frozenset(found)


@lru_cache(maxsize=None)
def _exact_language(theta: Substitution, n: int) -> frozenset:
    if n == 1:
        letters = set()
        for w in theta.images:
            letters.update(w)
        return frozenset((a,) for a in letters)
    if n == 2:
        return _two_words(theta)
    shortest = min(theta.lengths)
    m = math.ceil((n - 1) / shortest) + 1
    if m >= n:
        raise NonGrowing("exact language recursion needs images of length >= 2")
    out = set()
    for u in _exact_language(theta, m):
        out |= factors(theta(u), n)
    return frozenset(out)


def substitution_language(theta: Substitution, n: int) -> tuple:
    """Exact length-``n`` language of a primitive endomorphism with images of length >= 2.

    Uses the desubstitution recursion ``L_n = factors_n(theta(L_m))`` rather
    than expanding powers, so long windows stay cheap.
    """
    if not theta.is_endomorphism:
        raise AlphabetMismatch("language recursion needs an endomorphism")
    return tuple(theta.domain.sorted(_exact_language(theta, n)))


def isomorphism(s1: Substitution, s2: Substitution):
    """A letter bijection ``f`` with ``f∘s1 = s2∘f`` (endomorphisms), or None."""
    if not (s1.is_endomorphism and s2.is_endomorphism):
        raise AlphabetMismatch("isomorphism test needs endomorphisms")
    if len(s1.domain) != len(s2.domain) or sorted(s1.lengths) != sorted(s2.lengths):
        return None
    letters = list(s1.domain)

    def extend(mapping: dict):
        stack = list(mapping.items())
        mapping = dict(mapping)
        used = set(mapping.values())
        while stack:
            a, b = stack.pop()
            wa, wb = s1[a], s2[b]
            if len(wa) != len(wb):
                return None
            for x, y in zip(wa, wb):
                if x in mapping:
                    if mapping[x] != y:
                        return None
                else:
                    if y in used:
                        return None
                    mapping[x] = y
                    used.add(y)
                    stack.append((x, y))
        return mapping

    def search(mapping: dict):
        if len(mapping) == len(letters):
            return mapping
        a = next(x for x in letters if x not in mapping)
        for b in s2.domain:
            if b in mapping.values():
                continue
            trial = dict(mapping)
            trial[a] = b
            ext = extend(trial)
            if ext is not None:
                res = search(ext)
                if res is not None:
                    return res
        return None

    return search({})
