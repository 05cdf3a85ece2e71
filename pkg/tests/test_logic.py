import random

import pytest

from twofst.machines import AB, block_doubler, block_doubler_fot, parity_twoway
from twofst.logic import (
    EvalSession,
    Exists,
    FactorClass,
    Forall,
    Le,
    Letter,
    MalformedClassAtom,
    MonoidRegistry,
    Not,
    PrefixClass,
    RegistryError,
    SuffixClass,
    TrueF,
    UnboundVariable,
    certify_star_free,
    compile_to_dfa,
    conj,
    eval_formula,
    free_vars,
    linear_graph_sentence,
    mark_word,
    neg,
    parse_formula,
    show_formula,
    subst_var,
)
from twofst.monoid import class_of, transition_monoid
from twofst.words import dfa_accepts, dfa_is_counter_free

from conftest import random_formula, words_upto


def order_12():
    return block_doubler_fot().order[(1, 2)]


def order_21():
    return block_doubler_fot().order[(2, 1)]


def test_worked_order_formula_values():
    # phi_le^{2,1}(x,y) = exists z x<=z<=y and b(z)
    assert eval_formula(order_21(), "aababb", {"x": 1, "y": 3})
    # phi_le^{1,2}(x,y) at x=2, y=1: x<=y fails but [1,2] is all a
    assert eval_formula(order_12(), "aababb", {"x": 2, "y": 1})
    assert not eval_formula(Letter("a", "x"), "aab", {"x": 3})


def test_eval_errors():
    with pytest.raises(UnboundVariable):
        eval_formula(Letter("a", "x"), "ab", {})
    reg = MonoidRegistry()
    reg.register("M", transition_monoid(block_doubler()))
    with pytest.raises(MalformedClassAtom):
        eval_formula(FactorClass("M", "a", "x", "y"), "ab", {"x": 2, "y": 1}, reg)


def test_empty_word_quantifiers():
    assert not eval_formula(Exists("x", TrueF()), "", {})
    assert eval_formula(Forall("x", Letter("a", "x")), "", {})


def test_marked_context():
    assert eval_formula(Letter("^", "x"), "ab", {"x": 0}, marked=True)
    assert eval_formula(Letter("$", "x"), "ab", {"x": 3}, marked=True)
    assert not eval_formula(Exists("x", Letter("^", "x")), "ab", {})
    assert eval_formula(Exists("x", Letter("^", "x")), "ab", {}, marked=True)


def test_linear_graph_sentence_on_words():
    phi = linear_graph_sentence()
    assert not eval_formula(phi, "", {})
    for w in words_upto(4, min_len=1):
        assert eval_formula(phi, w, {})


def test_registry_certificate(doubler_monoid):
    reg = MonoidRegistry()
    reg.register("M", doubler_monoid)
    with pytest.raises(RegistryError):
        reg.register("P", transition_monoid(parity_twoway()))
    with pytest.raises(RegistryError):
        reg.element("M", "nonsense")


def test_class_atom_soundness(doubler_monoid, registry):
    m = doubler_monoid
    for w in words_upto(4, min_len=1):
        n = len(w)
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                e = class_of(m, w[i - 1 : j])
                atom = FactorClass("M", m.element_id(e), "x", "y")
                assert eval_formula(atom, w, {"x": i, "y": j}, registry), (w, i, j)
        for i in range(1, n + 1):
            pre = class_of(m, w[: i - 1])
            suf = class_of(m, w[i:])
            assert eval_formula(
                PrefixClass("M", m.element_id(pre), "x"), w, {"x": i}, registry
            )
            assert eval_formula(
                SuffixClass("M", m.element_id(suf), "x"), w, {"x": i}, registry
            )


def test_compile_simple_sentence():
    d = compile_to_dfa(Exists("x", Letter("a", "x")), [], AB)
    for w in words_upto(5):
        assert dfa_accepts(d, tuple((c, ()) for c in w)) == ("a" in w)


def test_compile_le_atom():
    d = compile_to_dfa(Le("x", "y"), ["x", "y"], AB)
    for w in words_upto(4, min_len=1):
        for i in range(1, len(w) + 1):
            for j in range(1, len(w) + 1):
                marked = mark_word(w, {"x": i, "y": j}, ["x", "y"])
                assert dfa_accepts(d, marked) == (i <= j), (w, i, j)


def test_compile_eval_agreement_random():
    rng = random.Random(42)
    for trial in range(60):
        phi = random_formula(rng, ["x"], 3)
        d = compile_to_dfa(phi, ["x"], AB)
        for w in words_upto(3, min_len=1):
            for i in range(1, len(w) + 1):
                want = eval_formula(phi, w, {"x": i})
                got = dfa_accepts(d, mark_word(w, {"x": i}, ["x"]))
                assert got == want, (show_formula(phi), w, i)


def test_compile_sentence_language(registry):
    phi = Exists("x", conj([Letter("a", "x"), Forall("y", Le("x", "y"))]))
    d = compile_to_dfa(phi, [], AB)
    for w in words_upto(6):
        want = eval_formula(phi, w, {})
        assert dfa_accepts(d, tuple((c, ()) for c in w)) == want


def test_compile_class_atoms_agree(doubler_monoid, registry):
    phi = conj([Le("x", "y"), FactorClass("M", "ab", "x", "y")])
    d = compile_to_dfa(phi, ["x", "y"], AB, registry)
    for w in words_upto(4, min_len=1):
        for i in range(1, len(w) + 1):
            for j in range(1, len(w) + 1):
                try:
                    want = eval_formula(phi, w, {"x": i, "y": j}, registry)
                except MalformedClassAtom:
                    want = False  # compiled form treats reversed bounds as false
                got = dfa_accepts(d, mark_word(w, {"x": i, "y": j}, ["x", "y"]))
                assert got == want, (w, i, j)


def test_compile_marked_mode(registry):
    phi = Exists("x", Letter("^", "x"))
    d = compile_to_dfa(phi, [], AB, registry, marked=True)
    tape = tuple((s, ()) for s in ("^", "a", "b", "$"))
    assert dfa_accepts(d, tape)
    # shape violations rejected
    assert not dfa_accepts(d, tuple((s, ()) for s in ("a", "$")))


def test_quantifier_duality():
    rng = random.Random(5)
    for _ in range(40):
        body = random_formula(rng, ["x"], 2)
        left = neg(Exists("x", body))
        right = Forall("x", neg(body))
        for w in words_upto(3):
            assert eval_formula(left, w, {}) == eval_formula(right, w, {}), (
                show_formula(body),
                w,
            )


def test_certify_star_free(registry):
    cert = certify_star_free(Exists("x", Letter("a", "x")), [], AB)
    assert cert.star_free and cert.index >= 0
    assert certify_star_free(order_12(), ["x", "y"], AB).star_free
    atom = FactorClass("M", "ab", "x", "y")
    guarded = conj([Le("x", "y"), atom])
    assert certify_star_free(guarded, ["x", "y"], AB, registry).star_free


def test_fo_is_star_free_random():
    rng = random.Random(99)
    for _ in range(40):
        phi = random_formula(rng, [], 3)
        d = compile_to_dfa(phi, [], AB)
        assert dfa_is_counter_free(d).aperiodic, show_formula(phi)


def test_parse_show_roundtrip(registry):
    texts = [
        "(true)",
        "(letter a x)",
        "(le x y)",
        "(class M ab x y)",
        "(pclass M a x)",
        "(sclass M bb x)",
        "(and (letter a x) (le x y))",
        "(or (letter b x) (not (true)))",
        "(exists x (forall y (le x y)))",
    ]
    for text in texts:
        phi = parse_formula(text)
        assert parse_formula(show_formula(phi)) == phi


def test_subst_var_capture():
    phi = Exists("y", Le("x", "y"))
    sub = subst_var(phi, "x", "y")  # must not capture
    assert eval_formula(sub, "ab", {"y": 1}) == eval_formula(
        Exists("z", Le("y", "z")), "ab", {"y": 1}
    )
    assert free_vars(sub) == frozenset({"y"})


def test_session_matches_eval(registry):
    rng = random.Random(3)
    for _ in range(25):
        phi = random_formula(rng, ["x"], 3)
        for w in ["", "a", "ab", "bba"]:
            session = EvalSession(w, registry)
            for i in range(1, len(w) + 1):
                assert session.eval(phi, {"x": i}) == eval_formula(
                    phi, w, {"x": i}, registry
                )
