import random

import pytest

from twofst.machines import AB, copier, parity_twoway
from twofst.monoid import (
    accepted_classes,
    accepts_from_class,
    class_language_dfa,
    class_of,
    glue,
    identity_profile,
    is_aperiodic,
    transition_monoid,
)
from twofst.twoway import behaviors, make_twoway, pumped_context_path, simulate
from twofst.words import dfa_accepts

from conftest import words_upto

PATTERNS = {
    "a": r"a+",
    "b": r"b",
    "ab": r"a+b",
    "ba": r"ba+",
    "aba": r"a[ab]*b[ab]*a",
    "abb": r"a[ab]*b[ab]*b",
    "bba": r"b[ab]*b[ab]*a",
    "bb": r"b[ab]*b",
}


def test_monoid_has_nine_elements(doubler_monoid):
    assert len(doubler_monoid.elements) == 9


def test_class_memberships(doubler_monoid):
    m = doubler_monoid
    assert class_of(m, "aa") == class_of(m, "a")
    assert class_of(m, "bab") == class_of(m, "bb")
    assert class_of(m, "bba") == m.element_by_id("bba")


def test_monoid_aperiodic(doubler_monoid):
    rep = is_aperiodic(doubler_monoid)
    assert rep.aperiodic
    assert rep.index == 2


def test_trivial_monoid_index_zero():
    m = transition_monoid(copier())
    rep = is_aperiodic(m)
    assert rep.aperiodic
    assert rep.index <= 1  # single nonidentity element, stabilizes immediately
    one_state = make_twoway(
        ("s",), AB, AB, "s", {"s"},
        {("s", "^"): ("s", "", 1), ("s", "a"): ("s", "", 1), ("s", "b"): ("s", "", 1)},
    )
    rep2 = is_aperiodic(transition_monoid(one_state))
    assert rep2.aperiodic


def test_parity_not_aperiodic():
    m = transition_monoid(parity_twoway())
    rep = is_aperiodic(m)
    assert not rep.aperiodic
    assert rep.witness is not None
    assert m.representatives[rep.witness] == ("a",)


def test_glue_identity_law(doubler_monoid):
    m = doubler_monoid
    for e in m.elements:
        assert glue(m.identity, e) == e == glue(e, m.identity)


def test_glue_agrees_with_direct_behaviors(doubler):
    m = transition_monoid(doubler)
    p_a, p_ab = behaviors(doubler, "a"), behaviors(doubler, "ab")
    assert glue(p_a, p_ab) == behaviors(doubler, "aab")
    for w in words_upto(6):
        assert class_of(m, w) == behaviors(doubler, w), w


def test_glue_loop_gives_undefined_entry():
    # two states bouncing forever between two cells: entering u from the left
    # in state s never leaves uu
    rules = {
        ("s", "^"): ("s", "", 1),
        ("s", "a"): ("t", "", 1),
        ("t", "a"): ("s", "", -1),
        ("s", "b"): ("s", "", 1),
        ("t", "b"): ("t", "", 1),
    }
    t = make_twoway(("s", "t"), AB, AB, "s", {"s"}, rules)
    p = behaviors(t, "a")
    glued = glue(p, p)
    assert "s" not in dict(glued.ll) and "s" not in dict(glued.lr)
    assert simulate(t, "aa").reason == "loop"


def test_lr_star_formula_property(doubler):
    # bh_lr(uv) = bh_lr(u) (bh_ll(v) bh_rr(u))* bh_lr(v), composing left to right
    rng = random.Random(7)
    words = [w for w in words_upto(4)]
    for _ in range(200):
        u, v = rng.choice(words), rng.choice(words)
        pu, pv = behaviors(doubler, u), behaviors(doubler, v)
        lr_u, lr_v = dict(pu.lr), dict(pv.lr)
        ll_v, rr_u = dict(pv.ll), dict(pu.rr)
        expected = {}
        for s in doubler.states:
            cur = lr_u.get(s)
            seen = set()
            while cur is not None and cur in ll_v and cur not in seen:
                seen.add(cur)
                cur = rr_u.get(ll_v[cur])
            if cur is not None and cur in lr_v:
                expected[s] = lr_v[cur]
        assert expected == dict(behaviors(doubler, u + v).lr), (u, v)


def test_morphism_property(doubler_monoid):
    m = doubler_monoid
    rng = random.Random(11)
    words = [w for w in words_upto(3)]
    for _ in range(200):
        u, v = rng.choice(words), rng.choice(words)
        assert class_of(m, u + v) == m.product(class_of(m, u), class_of(m, v))


def test_congruence_property(doubler_monoid):
    m = doubler_monoid
    pairs = [("a", "aa"), ("bab", "bb"), ("aba", "aabaa")]
    contexts = [(x, y) for x in words_upto(2) for y in words_upto(2)]
    for u, v in pairs:
        assert class_of(m, u) == class_of(m, v)
        for x, y in contexts:
            assert class_of(m, x + u + y) == class_of(m, x + v + y), (u, v, x, y)


def test_class_languages_match_patterns(doubler_monoid):
    import re

    m = doubler_monoid
    for rep, pat in PATTERNS.items():
        d = class_language_dfa(m, class_of(m, rep))
        for w in words_upto(6):
            assert dfa_accepts(d, w) == bool(re.fullmatch(pat, w)), (rep, w)


def test_identity_class_language(doubler_monoid):
    d = class_language_dfa(doubler_monoid, doubler_monoid.identity)
    accepted = [w for w in words_upto(4) if dfa_accepts(d, w)]
    assert accepted == [""]


def test_class_language_requires_member(doubler_monoid):
    other = identity_profile(("x", "y"))
    with pytest.raises(ValueError):
        class_language_dfa(doubler_monoid, other)


def test_class_language_counter_free(doubler_monoid):
    from twofst.words import dfa_is_counter_free

    for e in doubler_monoid.elements:
        assert dfa_is_counter_free(class_language_dfa(doubler_monoid, e)).aperiodic


def test_acceptance_from_class(doubler, doubler_monoid):
    m = doubler_monoid
    # the running example is total: every class accepts
    assert len(accepted_classes(m)) == len(m.elements)
    for w in words_upto(5):
        assert accepts_from_class(m, class_of(m, w)) == simulate(doubler, w).defined
    # partial machine: only words ending in b accepted
    rules = {
        ("s", "^"): ("s", "", 1),
        ("s", "a"): ("s", "", 1),
        ("s", "b"): ("t", "", 1),
        ("t", "a"): ("s", "", 0),
        ("t", "b"): ("t", "", 1),
        ("t", "$"): ("t", "", 0),
    }
    t = make_twoway(("s", "t"), AB, AB, "s", {"t"}, rules)
    m2 = transition_monoid(t)
    for w in words_upto(5):
        assert accepts_from_class(m2, class_of(m2, w)) == simulate(t, w).defined, w


def test_contextual_aperiodicity_paths(doubler, doubler_monoid):
    n = is_aperiodic(doubler_monoid).index
    rng = random.Random(13)
    words = [w for w in words_upto(3)]
    checked = 0
    for _ in range(200):
        u = rng.choice([w for w in words if w])
        v, w = rng.choice(words), rng.choice(words)
        p1 = pumped_context_path(doubler, v, u, w, n)
        p2 = pumped_context_path(doubler, v, u, w, n + 1)
        if p1 is None or p2 is None:
            continue
        checked += 1
        assert p1 == p2, (u, v, w)
    assert checked >= 150


def test_product_associative_all_triples(doubler_monoid):
    m = doubler_monoid
    for x in m.elements:
        for y in m.elements:
            xy = m.product(x, y)
            for z in m.elements:
                assert m.product(xy, z) == m.product(x, m.product(y, z))


def test_class_of_aab_matches_direct_profile(doubler, doubler_monoid):
    e = class_of(doubler_monoid, "aab")
    assert e == behaviors(doubler, "aab")
    assert set(e.ll) == {(1, 2), (2, 2)} and set(e.lr) == {(3, 1)}
    assert set(e.rl) == {(1, 2)} and set(e.rr) == {(2, 3), (3, 1)}


def test_morphism_property_length_six(doubler_monoid):
    m = doubler_monoid
    for u in words_upto(3):
        for v in words_upto(3):
            assert class_of(m, u + v) == m.product(class_of(m, u), class_of(m, v))
