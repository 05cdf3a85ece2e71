"""Acceptance suite: one test per criterion, each printing a PASS line with
its runtime against the stated budget."""
import random
import re
import time
from contextlib import contextmanager

from twofst import cli
from twofst.machines import (
    AB,
    block_double,
    block_doubler,
    block_doubler_fot,
    copier,
    erase_b_seq,
    parity_twoway,
    reverser,
)
from twofst.logic import (
    FALSE,
    Le,
    Letter,
    MonoidRegistry,
    compile_to_dfa,
    eval_formula,
    linear_graph_sentence,
    mark_word,
)
from twofst.fot import FoTransduction, fot_eval
from twofst.monoid import (
    class_language_dfa,
    class_of,
    glue,
    is_aperiodic,
    transition_monoid,
)
from twofst.translate import compose_seq_2w, fot_to_twoway, twoway_to_fot
from twofst.twoway import behaviors, pumped_context_path, simulate
from twofst.words import dfa_accepts, dfa_is_counter_free, seq_run, show_word

from conftest import data_path, random_formula, words_upto


@contextmanager
def budget(name: str, seconds: float):
    start = time.time()
    yield
    elapsed = time.time() - start
    print(f"{name}: PASS ({elapsed:.2f}s, budget {seconds:.0f}s)")
    assert elapsed < seconds, f"{name} exceeded its {seconds}s budget: {elapsed:.1f}s"


def test_criterion_1_running_example(capsys):
    with budget("criterion 1 (running example I/O)", 1.0):
        code = cli.main(["simulate", data_path("fig1.2wt"), "--input", "aababb"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.strip() == "aabbab"


def test_criterion_2_behaviors(capsys):
    with budget("criterion 2 (behaviors)", 1.0):
        code = cli.main(["behaviors", data_path("fig1.2wt"), "--input", "aab"])
        out = capsys.readouterr().out.strip()
        assert code == 0
        assert out == (
            "bh_ll={(1,2),(2,2)} bh_lr={(3,1)} bh_rl={(1,2)} bh_rr={(2,3),(3,1)}"
        )


def test_criterion_3_transition_monoid(doubler, doubler_monoid):
    with budget("criterion 3 (transition monoid)", 5.0):
        m = doubler_monoid
        assert len(m.elements) == 9
        assert class_of(m, "aa") == class_of(m, "a")
        assert class_of(m, "bab") == class_of(m, "bb")
        assert class_of(m, "bba") == m.element_by_id("bba")
        assert is_aperiodic(m).aperiodic


def test_criterion_4_class_languages(doubler_monoid):
    patterns = {
        "a": r"a+",
        "ab": r"a+b",
        "ba": r"ba+",
        "b": r"b",
        "aba": r"a[ab]*b[ab]*a",
        "abb": r"a[ab]*b[ab]*b",
        "bba": r"b[ab]*b[ab]*a",
        "bb": r"b[ab]*b",
    }
    with budget("criterion 4 (eight class languages)", 10.0):
        for rep, pat in patterns.items():
            d = class_language_dfa(doubler_monoid, class_of(doubler_monoid, rep))
            for w in words_upto(6):
                assert dfa_accepts(d, w) == bool(re.fullmatch(pat, w)), (rep, w)


def test_criterion_5_fot_semantics(doubler_fot):
    with budget("criterion 5 (transduction vs reference)", 30.0):
        count = 0
        for w in words_upto(6, min_len=1):
            res = fot_eval(doubler_fot, w)
            assert res.output == block_double(w), w
            count += 1
        assert count == 126
        assert show_word(fot_eval(doubler_fot, "aababb").output) == "aabbab"


def test_criterion_6_twoway_to_fot(doubler):
    with budget("criterion 6 (machine to transduction)", 60.0):
        registry = MonoidRegistry()
        T = twoway_to_fot(doubler, registry, "M")
        fig = cli.Artifact("2wt", doubler, MonoidRegistry())
        fot = cli.Artifact("fot", T, registry)
        report = cli.check_equiv(fig, fot, 5)
        assert report.verdict == "equivalent-up-to-5", report.show()


def test_criterion_7_fot_to_twoway(doubler_fot):
    with budget("criterion 7 (transduction to machine)", 120.0):
        plain = fot_to_twoway(doubler_fot, None, bound=3)
        left = cli.Artifact("fot", block_doubler_fot(), MonoidRegistry())
        right = cli.Artifact("2wt", plain, MonoidRegistry())
        report = cli.check_equiv(left, right, 4)
        assert report.verdict == "equivalent-up-to-4", report.show()
        assert is_aperiodic(transition_monoid(plain)).aperiodic


def test_criterion_8_composition(doubler, doubler_monoid):
    with budget("criterion 8 (composition)", 60.0):
        comp = compose_seq_2w(erase_b_seq(), doubler)
        for w in words_upto(5):
            mid = seq_run(erase_b_seq(), w)
            want = block_double(mid)
            assert simulate(comp, w).output == want, w
        m = transition_monoid(comp)
        rep = is_aperiodic(m)
        assert rep.aperiodic
        # the source text states two inconsistent index bounds; log the
        # measured index next to both instead of asserting either
        from test_translate import seq_index

        n_a = seq_index(erase_b_seq())
        n_b = is_aperiodic(doubler_monoid).index
        print(
            f"criterion 8: measured index {rep.index},"
            f" bounds 2n_A+n_B+1={2 * n_a + n_b + 1}, n_A+n_B+2={n_a + n_b + 2}"
        )


def test_criterion_9_property_suites(doubler, doubler_monoid):
    rng = random.Random(20240817)
    words = [w for w in words_upto(4)]
    with budget("criterion 9 (property suites)", 300.0):
        # glue vs direct behaviors
        for _ in range(200):
            u, v = rng.choice(words), rng.choice(words)
            assert glue(behaviors(doubler, u), behaviors(doubler, v)) == behaviors(
                doubler, u + v
            ), (u, v)
        # morphism property
        m = doubler_monoid
        for _ in range(200):
            u, v = rng.choice(words), rng.choice(words)
            assert class_of(m, u + v) == m.product(class_of(m, u), class_of(m, v))
        # congruence property
        buckets = {}
        for w in words:
            buckets.setdefault(class_of(m, w), []).append(w)
        equal_pairs = [
            (u, v)
            for group in buckets.values()
            for u in group
            for v in group
            if u != v
        ]
        contexts = [(x, y) for x in words_upto(2) for y in words_upto(2)]
        for _ in range(200):
            u, v = rng.choice(equal_pairs)
            x, y = rng.choice(contexts)
            assert class_of(m, x + u + y) == class_of(m, x + v + y), (u, v, x, y)
        # evaluator agreement + star-free certification of every compiled
        # pure-FO formula
        cases = 0
        formulas = 0
        while cases < 200 or formulas < 40:
            formulas += 1
            phi = random_formula(rng, ["x"], 2)
            d = compile_to_dfa(phi, ["x"], AB)
            assert dfa_is_counter_free(d).aperiodic
            for w in ["a", "ab", "ba", "bab"]:
                for i in range(1, len(w) + 1):
                    want = eval_formula(phi, w, {"x": i})
                    got = dfa_accepts(d, mark_word(w, {"x": i}, ["x"]))
                    assert got == want
                    cases += 1
        # contextual aperiodicity at the measured index
        for machine in (doubler, copier(), reverser()):
            idx = is_aperiodic(transition_monoid(machine)).index
            n = max(idx, 1)
            done = 0
            for _ in range(200):
                u = rng.choice([w for w in words_upto(3) if w])
                v, w = rng.choice(words), rng.choice(words)
                p1 = pumped_context_path(machine, v, u, w, n)
                p2 = pumped_context_path(machine, v, u, w, n + 1)
                if p1 is None or p2 is None:
                    continue
                assert p1 == p2, (u, v, w, n)
                done += 1
            assert done >= 150


def test_criterion_10_negative_controls():
    with budget("criterion 10 (negative controls)", 10.0):
        m = transition_monoid(parity_twoway())
        rep = is_aperiodic(m)
        assert not rep.aperiodic
        assert rep.witness is not None
        assert m.representatives[rep.witness] == ("a",)
        # a transduction with an incomparable pair of nodes is undefined
        T = FoTransduction(
            AB,
            AB,
            linear_graph_sentence(),
            (1,),
            {(1, "a"): Letter("a", "x")},
            {(1, 1): FALSE},
        )
        res = fot_eval(T, "aa")
        assert res.output is None and res.reason == "order-not-linear"
