"""Recodings that present a speedup as a subshift.

* return words to a set of marked letters give a derived substitution,
* jump blocks rename each S-step by the T-word it consumes,
* c-words give the substitution of the constant speedup ``T^c``.
"""

from __future__ import annotations

import math
import string
import warnings
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .errors import GcdViolation, HorizonTooSmall, InconsistentPath, NotSeed
from .kr import SpeedupSystem
from .substitution import (Alphabet, Substitution, fixed_point_prefix, power,
                           render, substitution_language, unpair)


def letter_names(n: int, style: str = "letters") -> list:
    """``A, B, ...`` (then ``A1, B1, ...``), ``0, 1, ...`` or ``w1, w2, ...``."""
    if style == "digits":
        return [str(i) for i in range(n)]
    if style == "w":
        return [f"w{i}" for i in range(1, n + 1)]
    if style != "letters":
        raise ValueError(f"unknown naming style {style!r}")
    up = string.ascii_uppercase
    return [up[i % 26] + (str(i // 26) if i >= 26 else "") for i in range(n)]


# ---------------------------------------------------------------- return words

@dataclass(frozen=True)
class ReturnWordSystem:
    markers: tuple
    words: tuple
    phi: Substitution
    source: Substitution
    horizon: int

    @property
    def names(self) -> tuple:
        return self.phi.domain.letters

    def word_of(self, name) -> tuple:
        return self.words[self.phi.domain.index[name]]

    def flatten(self, word: Iterable) -> tuple:
        out = []
        for b in word:
            out.extend(self.word_of(b))
        return tuple(out)

    @property
    def left_proper(self) -> bool:
        return self.phi.left_proper


def _split_returns(word: tuple, markers: set) -> list:
    cuts = [i for i, s in enumerate(word) if s in markers]
    return [word[a:b] for a, b in zip(cuts, cuts[1:])], cuts


def return_word_recode(tau: Substitution, markers: Union[str, Iterable[str]],
                       horizon: Optional[int] = None, power_: int = 1,
                       names: str = "w") -> ReturnWordSystem:
    """Derived substitution on return words to ``markers`` in the fixed point of ``tau^power_``.

    The fixed point grows from the first marker, whose image must begin with
    itself; every marker image must begin with a marker.  Return words are
    named by first occurrence.  Without an explicit ``horizon`` the prefix is
    doubled until every image decomposes into known return words.
    """
    if isinstance(markers, str):
        markers = (markers,)
    markers = tuple(markers)
    mset = set(markers)
    sub = power(tau, power_) if power_ > 1 else tau
    seed = markers[0]
    if sub[seed][0] != seed:
        raise NotSeed(f"image of {seed!r} does not begin with {seed!r}")
    for m in markers:
        if sub[m][0] not in mset:
            raise NotSeed(f"image of marker {m!r} does not begin with a marker")
    explicit = horizon is not None
    H = horizon if explicit else 64 * max(sub.lengths)
    while True:
        prefix = fixed_point_prefix(sub, seed, H)
        pieces, _ = _split_returns(prefix, mset)
        order = []
        for w in pieces:
            if w not in order:
                order.append(w)
        index = {w: i for i, w in enumerate(order)}
        try:
            if not order:
                raise HorizonTooSmall(f"marker seen once in a prefix of length {H}")
            images = []
            for w in order:
                parts, cuts = _split_returns(sub(w) + (seed,), mset)
                if cuts[0] != 0:
                    raise InconsistentPath("image of a return word does not begin with a marker")
                row = []
                for piece in parts:
                    if piece not in index:
                        raise HorizonTooSmall(
                            f"return word {render(piece)} not seen in a prefix of length {H}")
                    row.append(index[piece])
                images.append(row)
            break
        except HorizonTooSmall:
            if explicit or H > 1 << 22:
                raise
            H *= 2
    labels = letter_names(len(order), names)
    alph = Alphabet(tuple(labels))
    phi = Substitution(alph, alph, tuple(tuple(labels[i] for i in row) for row in images))
    return ReturnWordSystem(markers, tuple(order), phi, sub, H)


# ---------------------------------------------------------------- jump blocks

@dataclass(frozen=True)
class JumpBlockEncoding:
    mode: str
    blocks: tuple
    psi: Substitution
    injective: bool

    def block_word(self, name) -> tuple:
        key = self.blocks[self.psi.codomain.index[name]]
        return key if self.mode == "by_word" else key[0]


def chain_blocks(speedup: SpeedupSystem, tower: str, label: int) -> list:
    """``(T-word, floor)`` for each S-step of chain ``label`` in ``tower``.

    A step across the tower top reads its tail from the common prefix of
    all tower bases.
    """
    kr = speedup.kr
    base = kr.tower(tower).base_word
    prefix = kr.common_prefix()
    h = kr.height
    out = []
    for f in speedup.labeling.chains[tower][label - 1]:
        p = speedup.jump(tower, f)
        if f + p <= h:
            out.append((base[f:f + p], f))
        else:
            over = f + p - h
            if over > len(prefix):
                raise InconsistentPath(
                    f"step from floor {f} of {tower!r} reaches past the shared tower prefix")
            out.append((base[f:] + prefix[:over], f))
    return out


def jump_block_encode(speedup: SpeedupSystem, rws: ReturnWordSystem,
                      mode: str = "by_word", names: str = "letters") -> JumpBlockEncoding:
    """Encode each return word (over tower-label pairs) as its sequence of jump blocks."""
    return encode_pair_words(speedup, rws.phi.domain, rws.words, mode, names)


def encode_pair_words(speedup: SpeedupSystem, domain: Alphabet, words,
                      mode: str = "by_word", names: str = "letters") -> JumpBlockEncoding:
    """Jump-block encoding of arbitrary words over the level-``k`` tower-label pairs."""
    if mode not in ("by_word", "by_floor"):
        raise ValueError("mode must be by_word or by_floor")
    perms = speedup.labeling.permutations
    keys, rows = [], []
    for w in words:
        row = []
        pairs = [unpair(s) for s in w]
        for (a, l), nxt in zip(pairs, pairs[1:] + [None]):
            if a not in perms:
                raise InconsistentPath(f"letter {a!r} is not a tower at level {speedup.level}")
            if nxt is not None and nxt[1] != perms[a][l - 1]:
                raise InconsistentPath(
                    f"label {nxt[1]} after ({a},{l}) contradicts the exit permutation")
            for word, f in chain_blocks(speedup, a, l):
                key = word if mode == "by_word" else (word, f)
                if key not in keys:
                    keys.append(key)
                row.append(keys.index(key))
        rows.append(row)
    labels = letter_names(len(keys), names)
    cod = Alphabet(tuple(labels))
    psi = Substitution(domain, cod, tuple(tuple(labels[i] for i in r) for r in rows))
    injective = len(set(psi.images)) == len(psi.images)
    if not injective and mode == "by_word":
        warnings.warn("block naming by word is not injective on return words; use by_floor",
                      stacklevel=2)
    return JumpBlockEncoding(mode, tuple(keys), psi, injective)


# ---------------------------------------------------------------- constant speedups

@dataclass(frozen=True)
class ConstantRecoding:
    substitution: Substitution
    words: tuple
    c: int

    def word_of(self, name) -> tuple:
        return self.words[self.substitution.domain.index[name]]

    def least_power(self, proper: bool = False, limit: int = 8):
        """Least ``g`` making the recoded substitution left proper (or proper), or None."""
        for g in range(1, limit + 1):
            sub = power(self.substitution, g)
            if sub.proper if proper else sub.left_proper:
                return g
        return None


def constant_speedup_recode(theta: Substitution, c: int, names: str = "letters") -> ConstantRecoding:
    """Substitution of ``T^c`` on the length-``c`` words of the language, in lexicographic order."""
    L = theta.constant_length
    if L is None:
        raise ValueError("constant_speedup_recode needs a constant-length substitution")
    if c < 1:
        raise ValueError("c must be positive")
    if math.gcd(L, c) > 1:
        raise GcdViolation(f"gcd(|theta|={L}, c={c}) > 1")
    words = substitution_language(theta, c)
    index = {w: i for i, w in enumerate(words)}
    if names == "words":
        labels = [render(w) if theta.domain.single_char else "(" + ",".join(w) + ")" for w in words]
    else:
        labels = letter_names(len(words), names)
    images = []
    for w in words:
        img = theta(w)
        blocks = [img[i:i + c] for i in range(0, len(img), c)]
        images.append(tuple(labels[index[b]] for b in blocks))
    alph = Alphabet(tuple(labels))
    return ConstantRecoding(Substitution(alph, alph, tuple(images)), tuple(words), c)
