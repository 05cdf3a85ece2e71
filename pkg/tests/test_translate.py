import pytest

from twofst.machines import (
    AB,
    block_double,
    copier,
    erase_b_seq,
    identity_seq,
    parity_twoway,
    reverser,
)
from twofst.logic import MonoidRegistry
from twofst.monoid import class_of, is_aperiodic, transition_monoid
from twofst.translate import (
    NotAperiodic,
    NotNormalized,
    reach_decision,
    compose_right_seq_2w,
    compose_seq_2w,
    fo_la_to_sf_la,
    fot_to_fo_lookaround,
    fot_to_twoway,
    twoway_to_fot,
)
from twofst.lookaround import simulate_fo_la, simulate_sf_la, check_fo_determinism
from twofst.fot import fot_eval
from twofst.twoway import context_path, simulate, tape_symbol
from twofst.words import dfa_is_counter_free, make_seq, seq_run, show_word

from conftest import words_upto


# ---------------------------------------------------------------------------
# Composition


def test_compose_identity(doubler):
    c = compose_seq_2w(identity_seq(), doubler)
    for w in words_upto(6):
        assert simulate(c, w).output == simulate(doubler, w).output, w


def test_compose_erase_b(doubler):
    c = compose_seq_2w(erase_b_seq(), doubler)
    for w in words_upto(5):
        k = w.count("a")
        assert simulate(c, w).output == tuple("a" * k) + tuple("b" * k), w


def test_compose_undefined_propagates(doubler):
    partial = make_seq((0,), AB, AB, 0, {0}, {(0, "a"): (0, "a")})
    c = compose_seq_2w(partial, doubler)
    for w in words_upto(5):
        mid = seq_run(partial, w)
        want = simulate(doubler, mid).output if mid is not None else None
        assert simulate(c, w).output == want, w


def test_compose_multi_letter_productions(doubler):
    rules = {
        (0, "a"): (1, "ab"),
        (0, "b"): (0, "ba"),
        (1, "a"): (0, ""),
        (1, "b"): (1, "b"),
    }
    seqm = make_seq((0, 1), AB, AB, 0, {0, 1}, rules)
    c = compose_seq_2w(seqm, doubler)
    for w in words_upto(6):
        mid = seq_run(seqm, w)
        want = simulate(doubler, mid).output if mid is not None else None
        assert simulate(c, w).output == want, w


def test_compose_rejecting_final_states(doubler):
    # run exists but ends in a non-final state for odd numbers of a
    rules = {(0, "a"): (1, "a"), (1, "a"): (0, "a"), (0, "b"): (0, "b"), (1, "b"): (1, "b")}
    seqm = make_seq((0, 1), AB, AB, 0, {0}, rules)
    c = compose_seq_2w(seqm, doubler)
    for w in words_upto(5):
        mid = seq_run(seqm, w)
        want = simulate(doubler, mid).output if mid is not None else None
        assert simulate(c, w).output == want, w


def test_compose_requires_normalized(doubler):
    from twofst.machines import double_writer

    with pytest.raises(NotNormalized):
        compose_seq_2w(identity_seq(), double_writer())


def seq_index(t):
    """Aperiodicity index of the one-way machine's input automaton."""
    from twofst.words import Dfa, dfa_is_counter_free

    sink = object()
    states = tuple(t.states) + (sink,)
    delta = {}
    for q in states:
        for a in t.in_alphabet:
            delta[(q, a)] = t.step.get((q, a), sink) if q is not sink else sink
    d = Dfa(states, t.in_alphabet, t.initial, frozenset(t.finals), delta)
    return dfa_is_counter_free(d).index


def test_compose_aperiodicity_and_index_log(doubler, doubler_monoid):
    c = compose_seq_2w(erase_b_seq(), doubler)
    m = transition_monoid(c)
    rep = is_aperiodic(m)
    assert rep.aperiodic
    n_a = seq_index(erase_b_seq())
    n_b = is_aperiodic(doubler_monoid).index
    # the appendix states two inconsistent bounds; log the measured index
    # against both rather than asserting either
    print(
        f"composite index {rep.index}; textual bounds"
        f" 2n_A+n_B+1={2 * n_a + n_b + 1} and n_A+n_B+2={n_a + n_b + 2}"
    )


def test_compose_right_identity(doubler):
    c = compose_right_seq_2w(identity_seq(), doubler)
    for w in words_upto(5):
        assert simulate(c, w).output == simulate(doubler, w).output, w


def test_compose_right_suffix_annotator():
    from twofst.words import Alphabet
    from twofst.twoway import make_twoway

    out_syms = tuple((s, (bit,)) for s in "ab" for bit in (0, 1))
    ann_rules = {
        (0, "a"): (0, (("a", (0,)),)),
        (0, "b"): (1, (("b", (0,)),)),
        (1, "a"): (1, (("a", (1,)),)),
        (1, "b"): (1, (("b", (1,)),)),
    }
    ann = make_seq((0, 1), AB, Alphabet(out_syms), 0, {0, 1}, ann_rules)
    enr = Alphabet(out_syms)
    rules = {("c", "^"): ("c", "", 1)}
    for s in out_syms:
        rules[("c", s)] = ("c", ("a" if s[1][0] else "b",), 1)
    reader = make_twoway(("c",), enr, AB, "c", {"c"}, rules)
    c = compose_right_seq_2w(ann, reader)
    for w in words_upto(5):
        want = tuple("a" if "b" in w[i + 1 :] else "b" for i in range(len(w)))
        assert simulate(c, w).output == want, w


def test_compose_right_aperiodic(doubler):
    c = compose_right_seq_2w(identity_seq(), doubler)
    assert is_aperiodic(transition_monoid(c)).aperiodic


# ---------------------------------------------------------------------------
# reach decisions


def crossing_oracle(t, u, i, j, q, leftward=False):
    """States in which the run from (q, start-of-mid) crosses the watched
    boundary of mid = u[i..j] (1-based, inclusive), by direct simulation."""
    n = len(u)
    pos = i if not leftward else j
    crossings = set()
    seen = set()
    state = q
    while True:
        if pos == n + 1 and state in t.finals:
            break
        if (state, pos) in seen:
            break
        seen.add((state, pos))
        sym = tape_symbol(tuple(u), pos)
        if (state, sym) not in t.step:
            break
        state, move = t.step[(state, sym)]
        prev = pos
        pos += move
        if not leftward and prev == j and pos == j + 1:
            crossings.add(state)
        if leftward and prev == i and pos == i - 1:
            crossings.add(state)
    return crossings


@pytest.mark.parametrize("leftward", [False, True])
def test_reach_decision_oracle_exhaustive(doubler, doubler_monoid, leftward):
    m = doubler_monoid
    seen_triples = {}
    for u in words_upto(5, min_len=1):
        n = len(u)
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                pre = class_of(m, u[: i - 1])
                mid = class_of(m, u[i - 1 : j])
                suf = class_of(m, u[j:])
                for q in doubler.states:
                    got = {
                        q2
                        for q2 in doubler.states
                        if reach_decision(m, (pre, mid, suf), q, q2, leftward)
                    }
                    want = crossing_oracle(doubler, u, i, j, q, leftward)
                    assert got == want, (u, i, j, q, leftward)
                    # class-uniformity: identical triples give identical answers
                    key = (pre, mid, suf, q, leftward)
                    if key in seen_triples:
                        assert seen_triples[key] == frozenset(got)
                    else:
                        seen_triples[key] = frozenset(got)


def test_reach_decision_zero_length(doubler, doubler_monoid):
    m = doubler_monoid
    ident = m.identity
    mid = class_of(m, "a")
    # starting at the single cell of mid in state 1, the run crosses right
    # in state 1 immediately
    assert reach_decision(m, (ident, mid, ident), 1, 1)


def test_reach_decision_on_aab(doubler, doubler_monoid):
    m = doubler_monoid
    triple = (m.identity, class_of(m, "aab"), m.identity)
    got = {q2 for q2 in doubler.states if reach_decision(m, triple, 1, q2)}
    assert got == crossing_oracle(doubler, "aab", 1, 3, 1)


# ---------------------------------------------------------------------------
# two-way -> FOT


def test_twoway_to_fot_copies(doubler):
    reg = MonoidRegistry()
    T = twoway_to_fot(doubler, reg, "M")
    assert len(T.copies) == 3


def test_twoway_to_fot_running_example(doubler):
    reg = MonoidRegistry()
    T = twoway_to_fot(doubler, reg, "M")
    assert show_word(fot_eval(T, "aababb", reg).output) == "aabbab"


def test_twoway_to_fot_equivalence(doubler):
    reg = MonoidRegistry()
    T = twoway_to_fot(doubler, reg, "M")
    for w in words_upto(5, min_len=1):
        got = fot_eval(T, w, reg)
        want = simulate(doubler, w)
        assert got.output == want.output, (w, got.reason)


def test_twoway_to_fot_rejects_periodic():
    reg = MonoidRegistry()
    with pytest.raises(NotAperiodic):
        twoway_to_fot(parity_twoway(), reg)


def test_twoway_to_fot_partial_machine():
    # partial domain: machine accepts only words ending in b
    from twofst.twoway import make_twoway

    rules = {
        ("s", "^"): ("s", "", 1),
        ("s", "a"): ("s", "a", 1),
        ("s", "b"): ("t", "b", 1),
        ("t", "a"): ("s", "a", 1),
        ("t", "b"): ("t", "b", 1),
    }
    t = make_twoway(("s", "t"), AB, AB, "s", {"t"}, rules)
    reg = MonoidRegistry()
    T = twoway_to_fot(t, reg, "M")
    for w in words_upto(5, min_len=1):
        got = fot_eval(T, w, reg)
        want = simulate(t, w)
        assert got.output == want.output, w


# ---------------------------------------------------------------------------
# FOT -> look-around -> star-free -> plain


def test_fot_to_fo_lookaround_example(doubler_fot):
    la = fot_to_fo_lookaround(doubler_fot)
    assert show_word(simulate_fo_la(la, "aababb").output) == "aabbab"
    assert check_fo_determinism(la, 5)
    for w in words_upto(5, min_len=1):
        assert simulate_fo_la(la, w).output == fot_eval(doubler_fot, w).output, w


def test_fo_lookaround_contextual_aperiodicity(doubler_fot):
    la = fot_to_fo_lookaround(doubler_fot)
    samples = [("a", "b", "b"), ("ab", "b", "a"), ("b", "a", "a")]
    for u, v, w in samples:
        for n in (2, 3):
            if len(v + u * (n + 1) + w) > 9:
                continue
            r1 = simulate_fo_la(la, v + u * n + w)
            r2 = simulate_fo_la(la, v + u * (n + 1) + w)
            if r1.output is None or r2.output is None:
                continue
            left = list(range(1, len(v) + 1))
            right1 = [len(v) + n * len(u) + k + 1 for k in range(len(w))]
            right2 = [len(v) + (n + 1) * len(u) + k + 1 for k in range(len(w))]
            p1 = context_path(r1.path, left + right1)
            p2 = context_path(r2.path, left + right2)
            assert p1 == p2, (u, v, w, n)


def test_fo_la_to_sf_la_example(doubler_fot):
    la = fot_to_fo_lookaround(doubler_fot)
    sf = fo_la_to_sf_la(la, None, bound=3)
    assert show_word(simulate_sf_la(sf, "aababb").output) == "aabbab"
    for w in words_upto(5, min_len=1):
        assert simulate_sf_la(sf, w).output == fot_eval(doubler_fot, w).output, w


def test_sf_la_tests_are_star_free(doubler_fot):
    la = fot_to_fo_lookaround(doubler_fot)
    sf = fo_la_to_sf_la(la, None, bound=3)
    for tr in sf.transitions:
        assert dfa_is_counter_free(tr.test.prefix).aperiodic
        assert dfa_is_counter_free(tr.test.suffix).aperiodic


def test_sf_la_paths_refine_jumps(doubler_fot):
    # after erasing walk steps (inserted states), the visit sequence of
    # source states at context positions matches the jump machine's
    la = fot_to_fo_lookaround(doubler_fot)
    sf = fo_la_to_sf_la(la, None, bound=3)
    for w in ["ab", "aab", "ba", "aba"]:
        r_la = simulate_fo_la(la, w)
        r_sf = simulate_sf_la(sf, w)
        if r_la.output is None:
            assert r_sf.output is None
            continue
        keep = set(la.states)
        walked = [(q, p) for (q, p) in r_sf.path if q in keep]
        assert walked == list(r_la.path), w


def test_full_pipeline_example(doubler_fot):
    plain = fot_to_twoway(doubler_fot, None, bound=3)
    assert show_word(simulate(plain, "aababb").output) == "aabbab"
    for w in words_upto(4, min_len=1):
        got = simulate(plain, w)
        want = fot_eval(doubler_fot, w)
        assert got.output == want.output, w
        if want.output is not None:
            assert got.reason != "loop"
    assert is_aperiodic(transition_monoid(plain)).aperiodic


# ---------------------------------------------------------------------------
# Round trips


@pytest.mark.parametrize("machine", [copier, reverser], ids=["copier", "reverser"])
def test_round_trip_small_machines(machine):
    t = machine()
    reg = MonoidRegistry()
    T = twoway_to_fot(t, reg, "M")
    rt = fot_to_twoway(T, reg, bound=3)
    # the empty word is a known boundary case: transduction domains built on
    # the linear-graph sentence exclude it
    for w in words_upto(4, min_len=1):
        assert simulate(rt, w).output == simulate(t, w).output, w


def test_round_trip_third_crafted_machine():
    # single-state eraser: aperiodic, partial productions
    rules = {("e", "^"): ("e", "", 1), ("e", "a"): ("e", "a", 1), ("e", "b"): ("e", "", 1)}
    from twofst.twoway import make_twoway

    t = make_twoway(("e",), AB, AB, "e", {"e"}, rules)
    reg = MonoidRegistry()
    rt = fot_to_twoway(twoway_to_fot(t, reg, "M"), reg, bound=3)
    for w in words_upto(4, min_len=1):
        assert simulate(rt, w).output == simulate(t, w).output, w


@pytest.mark.slow
def test_round_trip_running_example(doubler):
    # measured at roughly 13 minutes: the star-free walk construction has to
    # compile the class-atom order formulas of the generated transduction
    reg = MonoidRegistry()
    T = twoway_to_fot(doubler, reg, "M")
    rt = fot_to_twoway(T, reg, bound=2)
    for w in words_upto(4, min_len=1):
        assert simulate(rt, w).output == simulate(doubler, w).output, w
    assert is_aperiodic(transition_monoid(rt)).aperiodic


@pytest.mark.skip(
    reason="reverse round trip needs twoway_to_fot on a machine with hundreds "
    "of states and a ~90-element monoid; the class-triple enumeration is far "
    "beyond desk scale (see decisions ledger)"
)
def test_reverse_round_trip_example(doubler_fot):
    plain = fot_to_twoway(doubler_fot, None, bound=3)
    reg = MonoidRegistry()
    T2 = twoway_to_fot(plain, reg, "M")
    for w in words_upto(4, min_len=1):
        assert fot_eval(T2, w, reg).output == fot_eval(doubler_fot, w).output, w
