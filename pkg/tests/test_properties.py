"""Randomized invariants on small substitutions and speedups."""

import itertools
import math

import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from toeplitz_speedup import (JumpFunction, SAdicSystem, Substitution, build_kr, classify, compose,
                              constant_speedup_recode, orbit_labeling, per_p_window, validate_jump)
from toeplitz_speedup.decide import (Presentation, _eliminate, build_presentation,
                                     sufficient_condition_check, toeplitz_semidecision)
from toeplitz_speedup.errors import HorizonTooSmall, SpeedupError
from toeplitz_speedup.kr import construct_toeplitz_speedup, lift
from toeplitz_speedup.recode import return_word_recode
from toeplitz_speedup.substitution import (Alphabet, fixed_point_prefix, language_of_length, pair,
                                           substitution_language)
from toeplitz_speedup.toeplitz import WindowedSequence

MANY = settings(max_examples=1000, deadline=None,
                suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
FEW = settings(max_examples=60, deadline=None,
               suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])

LETTERS = "abcd"


@st.composite
def maps(draw, dom, cod, min_len=1, max_len=3):
    return Substitution.from_dict(
        {a: "".join(draw(st.lists(st.sampled_from(cod), min_size=min_len, max_size=max_len)))
         for a in dom},
        domain=tuple(dom), codomain=tuple(cod))


@st.composite
def constant_length(draw, min_letters=2, max_letters=3, lengths=(2, 3, 4), fixed=True,
                    left_proper=False):
    n = draw(st.integers(min_letters, max_letters))
    letters = LETTERS[:n]
    L = draw(st.sampled_from(lengths))
    images = {}
    for a in letters:
        word = draw(st.lists(st.sampled_from(letters), min_size=L, max_size=L))
        images[a] = "".join(word)
    if fixed or left_proper:
        images["a"] = "a" + images["a"][1:]
    if left_proper:
        images = {a: "a" + w[1:] for a, w in images.items()}
    return Substitution.from_dict(images)


@st.composite
def primitive_constant_length(draw, **kw):
    theta = draw(constant_length(**kw))
    assume(len(set(theta.images)) == len(theta.images))
    assume(classify(theta).primitive is not None)
    return theta


def compose_triple():
    sizes = st.tuples(*[st.integers(1, 3)] * 4)
    return sizes.flatmap(lambda s: st.tuples(
        maps(LETTERS[:s[1]], LETTERS[:s[0]]),
        maps(LETTERS[:s[2]], LETTERS[:s[1]]),
        maps(LETTERS[:s[3]], LETTERS[:s[2]])))


@MANY
@given(compose_triple())
def test_compose_is_associative(triple):
    f, g, h = triple
    assert compose(compose(f, g), h) == compose(f, compose(g, h))


@MANY
@given(primitive_constant_length(), st.integers(1, 5))
def test_language_oracles_agree(theta, n):
    exact = set(substitution_language(theta, n))
    powers = language_of_length(theta, n, depth=16, stop_when_stable=False, max_symbols=20_000)
    x = fixed_point_prefix(theta, "a", 3000)
    scan = {tuple(x[i:i + n]) for i in range(len(x) - n + 1)}
    assert set(powers.words) == exact
    assert scan <= exact
    assert scan == exact


@st.composite
def validated_speedups(draw):
    """Constant jump ``p0`` with a few destination swaps inside each tower."""
    theta = draw(primitive_constant_length(lengths=(2, 3), left_proper=True))
    system = SAdicSystem.constant(theta)
    k = draw(st.integers(1, 3))
    kr = build_kr(system, k)
    h = kr.height
    p0 = draw(st.integers(1, min(3, h - 1)))
    table = {}
    for a in kr.letters:
        dest = [f + p0 for f in range(h)]
        for _ in range(draw(st.integers(0, 2))):
            i = draw(st.integers(0, h - 1))
            j = draw(st.integers(0, h - 1))
            if dest[i] < h and dest[j] < h and dest[j] > i and dest[i] > j:
                dest[i], dest[j] = dest[j], dest[i]
        table[a] = tuple(d - f for f, d in enumerate(dest))
    jump = JumpFunction(k, table)
    assume(jump.max_value < h)
    return system, kr, jump


@MANY
@given(validated_speedups())
def test_labeling_partitions_floors(case):
    system, kr, jump = case
    assert validate_jump(system, kr, jump).valid
    try:
        lab = orbit_labeling(system, kr, jump)
    except SpeedupError:
        # inconsistent orbit numbers or ambiguous landings are reported, not labeled
        return
    for a in kr.letters:
        floors = sorted(f for chain in lab.chains[a] for f in chain)
        assert floors == list(range(kr.height))
        assert sum(lab.heights[a]) == kr.height
        for j, chain in enumerate(lab.chains[a], start=1):
            assert all(lab.labels[a][f] == j for f in chain)
            assert all(g - f == jump(a, f) for f, g in zip(chain, chain[1:]))
        assert sorted(lab.permutations[a]) == list(range(1, lab.c + 1))


@st.composite
def lifted(draw):
    theta = draw(constant_length(lengths=(2, 3)))
    c = draw(st.integers(1, 3))
    perm_list = list(itertools.permutations(range(1, c + 1)))
    perms = {a: draw(st.sampled_from(perm_list)) for a in theta.domain}
    tau = lift(theta, perms)
    assume(classify(tau).primitive is not None)
    return tau


@MANY
@given(lifted())
def test_return_word_length_bookkeeping(tau):
    L = tau.constant_length
    try:
        rws = return_word_recode(tau, pair("a", 1), horizon=20_000)
    except HorizonTooSmall:
        # return times beyond the horizon: too slow to recode in bulk
        assume(False)
    for name in rws.names:
        assert len(rws.flatten(rws.phi[name])) == L * len(rws.word_of(name))
    x = fixed_point_prefix(tau, pair("a", 1), 400)
    y = rws.flatten(fixed_point_prefix(rws.phi, rws.names[0], 60))
    n = min(len(x), len(y))
    assert x[:n] == y[:n]


@MANY
@given(primitive_constant_length(lengths=(2, 3, 4)), st.integers(1, 7))
def test_constant_recode_decimates_fixed_point(theta, c):
    assume(math.gcd(theta.constant_length, c) == 1)
    rec = constant_speedup_recode(theta, c)
    x = fixed_point_prefix(theta, "a", 40 * c)
    start = rec.substitution.domain.letters[rec.words.index(tuple(x[:c]))]
    y = fixed_point_prefix(rec.substitution, start, 40)
    assert [rec.word_of(s)[0] for s in y] == list(x[::c][:len(y)])


@MANY
@given(st.text(alphabet="ab", min_size=1, max_size=40), st.integers(1, 12), st.data())
def test_per_p_window_is_antitone(word, p, data):
    n1 = data.draw(st.integers(1, len(word)))
    short = per_p_window(WindowedSequence(tuple(word[:n1])), p)
    long = per_p_window(WindowedSequence(tuple(word)), p)
    for r, s in long.forced.items():
        if r < n1:
            assert short.forced.get(r) == s


@st.composite
def presentations(draw):
    n = draw(st.integers(2, 3))
    names = "ABC"[:n]
    images = {}
    for a in names:
        tail = draw(st.lists(st.sampled_from(names), min_size=1, max_size=3))
        images[a] = "A" + "".join(tail)
    phi = Substitution.from_dict(images)
    assume(phi.constant_length is None and classify(phi).primitive is not None)
    psi = Substitution.from_dict({a: "x" + "".join(draw(st.lists(st.sampled_from("xy"), max_size=3)))
                                  for a in names}, codomain=("x", "y"))
    return Presentation(phi, psi, 1, "A", tuple(names), 1, "substitutive")


@FEW
@given(presentations())
def test_lower_bounds_are_monotone(pres):
    per_depth, _ = _eliminate(pres, (pres.anchor,), np.arange(1, 201), 3)
    bounds = [int(s[0]) if len(s) else 201 for s in per_depth]
    assert bounds == sorted(bounds)
    for a, b in zip(per_depth, per_depth[1:]):
        assert set(b) <= set(a)


@FEW
@given(primitive_constant_length(lengths=(2, 3)), st.integers(2, 5), st.integers(2, 4))
def test_sufficient_condition_implies_toeplitz(theta, c, M):
    assume(theta.left_proper and math.gcd(theta.constant_length, c) == 1)
    assume(theta.constant_length ** M > 2 * c)
    sp = construct_toeplitz_speedup(theta, c, M)
    assume(validate_jump(sp.base, sp.kr, sp.jump).valid)
    if sufficient_condition_check(sp.labeling).outcome.value == "Yes":
        verdict = toeplitz_semidecision(build_presentation(sp), depth=2)
        assert verdict.outcome.value == "Yes"
