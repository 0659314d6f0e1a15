"""Letter-to-letter factor maps between constant-length substitution shifts.

The search aligns the columns of both substitutions (after scaling them to a
common length) under a global shift, enumerates letter maps compatible with
the column contents, and checks each map on a finite window of the language.
A verified candidate is evidence, not a proof of factoring.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import NoCommonLength, NotConstantLength
from .substitution import Substitution, language_of_length, power, render, substitution_language


@dataclass(frozen=True)
class CoincidenceProfile:
    substitution: Substitution
    columns: tuple

    @property
    def length(self) -> int:
        return len(self.columns)

    @property
    def fibers(self) -> dict:
        """Columns holding more than one symbol."""
        return {j: col for j, col in enumerate(self.columns) if len(col) > 1}

    def is_coincident(self, j: int) -> bool:
        return len(self.columns[j]) == 1

    def as_dict(self) -> dict:
        return {"length": self.length,
                "columns": [sorted(col) for col in self.columns],
                "fibers": {str(j): sorted(col) for j, col in self.fibers.items()}}


def coincidence_positions(sigma: Substitution) -> CoincidenceProfile:
    L = sigma.constant_length
    if L is None:
        raise NotConstantLength("coincidence analysis needs a constant-length substitution")
    cols = tuple(frozenset(img[j] for img in sigma.images) for j in range(L))
    return CoincidenceProfile(sigma, cols)


def common_powers(big: Substitution, small: Substitution, max_exponent: int = 8) -> tuple:
    """Least exponents ``(e_big, e_small)`` giving equal lengths."""
    lb, ls = big.constant_length, small.constant_length
    if lb is None or ls is None:
        raise NotConstantLength("both substitutions must have constant length")
    best = None
    for eb in range(1, max_exponent + 1):
        for es in range(1, max_exponent + 1):
            if lb ** eb == ls ** es:
                key = (lb ** eb, eb)
                if best is None or key < best[0]:
                    best = (key, (eb, es))
    if best is None:
        raise NoCommonLength(f"no powers of lengths {lb} and {ls} agree up to exponent {max_exponent}")
    return best[1]


@dataclass(frozen=True)
class FactorCandidate:
    mapping: dict
    shift: int
    check_length: int
    status: str
    witness: Optional[tuple] = None
    collapsed: tuple = ()
    kept: tuple = ()

    @property
    def verified(self) -> bool:
        return self.status == "VerifiedOnLanguage"

    def preimages(self) -> dict:
        out = {}
        for a, b in self.mapping.items():
            out.setdefault(b, []).append(a)
        return out

    def as_dict(self) -> dict:
        return {
            "mapping": dict(self.mapping),
            "preimages": {b: sorted(v) for b, v in sorted(self.preimages().items())},
            "shift": self.shift,
            "check_length": self.check_length,
            "status": self.status,
            "witness": list(self.witness) if self.witness else None,
            "collapsed_fibers": [list(x) for x in self.collapsed],
            "kept_fibers": [list(x) for x in self.kept],
        }


@dataclass(frozen=True)
class FactorSearch:
    big: Substitution
    small: Substitution
    powers: tuple
    length: int
    candidates: tuple = field(default_factory=tuple)

    @property
    def verified(self) -> list:
        return [c for c in self.candidates if c.verified]


def _allowed(big_prof: CoincidenceProfile, big: Substitution, small_prof: CoincidenceProfile,
             shift: int) -> Optional[dict]:
    L = big_prof.length
    allowed = {a: set(small_prof.substitution.domain.letters) for a in big.domain}
    for img in big.images:
        for j, u in enumerate(img):
            allowed[u] &= small_prof.columns[(j + shift) % L]
    if any(not v for v in allowed.values()):
        return None
    return allowed


def _enumerate(allowed: dict, order: list, big_words: list, small_words: set, limit: int):
    """Backtracking over letter maps; a partial map dies once a fully assigned big word leaves the small language."""
    rank = {a: i for i, a in enumerate(order)}
    # each word is checked when its last letter (in search order) is assigned
    by_last = {a: [] for a in order}
    for w in big_words:
        by_last[max(w, key=rank.__getitem__)].append(w)
    out, assign = [], {}

    def rec(i):
        if len(out) >= limit:
            return
        if i == len(order):
            out.append(dict(assign))
            return
        a = order[i]
        for b in sorted(allowed[a]):
            assign[a] = b
            if all(tuple(assign[x] for x in w) in small_words for w in by_last[a]):
                rec(i + 1)
            del assign[a]

    rec(0)
    return out


def factor_map_search(big: Substitution, small: Substitution, max_shift: Optional[int] = None,
                      check_length: Optional[int] = None,
                      powers: Union[None, int, tuple] = None, limit: int = 10_000,
                      prune_length: int = 6) -> FactorSearch:
    """Letter maps ``F`` with ``F(big language) ⊆ small language``, aligned by column shifts.

    Column ``j`` of the scaled big substitution is compared with column
    ``(j + s) mod L`` of the scaled small one; a letter seen in a big column
    may only map into the symbols of the aligned small column.
    """
    if powers is None:
        powers = common_powers(big, small)
    elif isinstance(powers, int):
        powers = (powers, powers)
    pb, ps = power(big, powers[0]), power(small, powers[1])
    L = pb.constant_length
    if L is None or L != ps.constant_length:
        raise NoCommonLength(f"scaled lengths differ: {pb.constant_length} and {ps.constant_length}")
    if check_length is None:
        check_length = 3 * L
    if max_shift is None:
        max_shift = L - 1
    big_prof, small_prof = coincidence_positions(pb), coincidence_positions(ps)
    big_words = [w for n in range(2, prune_length + 1) for w in substitution_language(big, n)]
    small_words = {w for n in range(2, prune_length + 1) for w in substitution_language(small, n)}
    small_letters = set(small.domain.letters)
    seen, cands = set(), []
    for s in range(min(max_shift, L - 1) + 1):
        allowed = _allowed(big_prof, pb, small_prof, s)
        if allowed is None:
            continue
        order = sorted(big.domain.letters, key=lambda a: (len(allowed[a]), big.domain.index[a]))
        for mapping in _enumerate(allowed, order, big_words, small_words, limit):
            if set(mapping.values()) != small_letters:
                continue
            key = (s, tuple(sorted(mapping.items())))
            if key in seen:
                continue
            seen.add(key)
            mapping = {a: mapping[a] for a in big.domain}
            cands.append(_verify(mapping, s, check_length, big, small, big_prof))
    return FactorSearch(big, small, tuple(powers), L, tuple(cands))


def _verify(mapping: dict, shift: int, check_length: int, big: Substitution, small: Substitution,
            big_prof: CoincidenceProfile) -> FactorCandidate:
    n = check_length + shift
    target = set(substitution_language(small, n))
    status, witness = "VerifiedOnLanguage", None
    for u in substitution_language(big, n):
        if tuple(mapping[a] for a in u) not in target:
            status, witness = "Refuted", u
            break
    collapsed, kept = [], []
    for j, col in sorted(big_prof.fibers.items()):
        entry = (j, tuple(sorted(col)))
        (collapsed if len({mapping[a] for a in col}) == 1 else kept).append(entry)
    return FactorCandidate(mapping, shift, check_length, status, witness, tuple(collapsed), tuple(kept))


def recheck_candidate(cand: FactorCandidate, big: Substitution, small: Substitution,
                      depth: int = 12) -> bool:
    """Independent check through :func:`language_of_length` (powers of the substitution)."""
    n = cand.check_length + cand.shift
    big_lang = language_of_length(big, n, depth=depth)
    small_lang = set(language_of_length(small, n, depth=depth).words)
    return all(tuple(cand.mapping[a] for a in u) in small_lang for u in big_lang.words)


def render_table(search: FactorSearch) -> str:
    """Aligned columns of both scaled substitutions, then the candidate maps."""
    pb, ps = power(search.big, search.powers[0]), power(search.small, search.powers[1])
    lines = [f"common length {search.length} (powers {search.powers[0]}, {search.powers[1]})"]
    for cand in search.candidates[:4]:
        s = cand.shift
        lines.append(f"shift {s}: {cand.status}")
        for a, img in ps.items():
            lines.append(f"  small' {a}: {render(img[s:] + img[:s])}")
        for a, img in pb.items():
            lines.append(f"  big    {a}: {render(img)}")
        pre = ", ".join(f"{{{','.join(v)}}}->{b}" for b, v in sorted(cand.preimages().items()))
        lines.append(f"  map: {pre}")
    return "\n".join(lines)
