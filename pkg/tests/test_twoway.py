import pytest

from twofst.machines import (
    AB,
    block_double,
    block_doubler,
    copier,
    double_writer,
)
from twofst.twoway import (
    TwoWayError,
    behaviors,
    context_path,
    is_normalized,
    make_twoway,
    merge_equivalent,
    mirror,
    normalize,
    simulate,
    trace_table,
)
from twofst.words import as_word, show_word

from conftest import words_upto


def test_running_example_output():
    r = simulate(block_doubler(), "aababb")
    assert show_word(r.output) == "aabbab"
    assert r.run.accepted
    # accepting runs end on the right endmarker in a final state
    q, pos = r.run.configs[-1]
    assert pos == len("aababb") + 1 and q in block_doubler().finals


@pytest.mark.parametrize("w", ["", "b", "aab", "a", "ba", "abab"])
def test_reference_function_agreement(w):
    assert simulate(block_doubler(), w).output == block_double(w)


def test_reference_agreement_exhaustive():
    t = block_doubler()
    for w in words_upto(7):
        assert simulate(t, w).output == block_double(w), w


def test_simulate_blocked_and_rejected():
    rules = {("s", "^"): ("s", "", 1), ("s", "a"): ("s", "a", 1)}
    t = make_twoway(("s",), AB, AB, "s", set(), rules)
    assert simulate(t, "b").reason == "blocked"
    assert simulate(t, "a").reason == "rejected"  # lands on $ in a non-final state


def test_simulate_loop_detection():
    rules = {
        ("s", "^"): ("s", "", 1),
        ("s", "a"): ("t", "", 1),
        ("t", "a"): ("s", "", -1),
        ("s", "b"): ("s", "", 1),
        ("t", "b"): ("t", "", 1),
        ("t", "$"): ("t", "", 0),
    }
    t = make_twoway(("s", "t"), AB, AB, "s", {"s"}, rules)
    assert simulate(t, "aa").reason == "loop"
    assert simulate(t, "a").reason == "loop"  # 0-move cycle on the endmarker


def test_endmarker_move_validation():
    with pytest.raises(TwoWayError):
        make_twoway(("s",), AB, AB, "s", {"s"}, {("s", "^"): ("s", "", -1)})
    with pytest.raises(TwoWayError):
        make_twoway(("s",), AB, AB, "s", {"s"}, {("s", "$"): ("s", "", 1)})


def test_behaviors_worked_example(doubler):
    p = behaviors(doubler, "aab")
    assert set(p.ll) == {(1, 2), (2, 2)}
    assert set(p.lr) == {(3, 1)}
    assert set(p.rl) == {(1, 2)}
    assert set(p.rr) == {(2, 3), (3, 1)}


def test_behaviors_single_letter(doubler):
    p = behaviors(doubler, "a")
    assert set(p.lr) == {(1, 1), (3, 3)} and set(p.rr) == {(1, 1), (3, 3)}
    assert set(p.ll) == {(2, 2)} and set(p.rl) == {(2, 2)}


def test_behaviors_empty_word(doubler):
    p = behaviors(doubler, "")
    ident = {(q, q) for q in doubler.states}
    assert set(p.lr) == ident and set(p.rl) == ident
    assert not p.ll and not p.rr


def test_behaviors_domain_disjointness(doubler):
    for w in words_upto(5):
        p = behaviors(doubler, w)
        assert p.check_disjoint(), w


def test_context_path_projection(doubler):
    run = simulate(doubler, "aab").run
    path = context_path(run, [2])
    assert path.pairs == ((1, 1), (2, 1), (3, 1))
    full = context_path(run, range(0, 5))
    assert len(full.pairs) == len(run.configs)
    assert context_path(run, []).pairs == ()
    with pytest.raises(ValueError):
        context_path(run, [3, 2])


def test_normalize_splits_productions():
    dw = double_writer()
    nz = normalize(dw)
    assert is_normalized(nz)
    for w in words_upto(6):
        assert simulate(nz, w).output == simulate(dw, w).output, w


def test_normalize_idempotent(doubler):
    assert normalize(doubler) is doubler
    assert len(normalize(doubler).step) == len(doubler.step)
    # producing nothing anywhere is already normal
    cp = copier()
    assert normalize(cp) is cp


def test_mirror_property(doubler):
    m = mirror(doubler)
    for w in words_upto(6):
        got = simulate(m, w[::-1]).output
        assert got == simulate(doubler, w).output, w


def test_mirror_involution(doubler):
    mm = mirror(mirror(doubler))
    for w in words_upto(6):
        assert simulate(mm, w).output == simulate(doubler, w).output, w


def test_mirror_of_copier_is_right_to_left_writer():
    m = mirror(copier())
    for w in words_upto(5):
        assert simulate(m, w[::-1]).output == as_word(w), w


def test_trace_table_layout():
    r = simulate(block_doubler(), "aab")
    table = trace_table(r)
    lines = table.splitlines()
    assert lines[0].split() == ["^", "a", "a", "b", "$"]
    assert lines[1].split() == ["1", "1", "1", "1", "1"]


def test_merge_equivalent_preserves_runs(doubler):
    bloated_rules = {
        (q, a): (r, doubler.out[(q, a)], mv)
        for (q, a), (r, mv) in doubler.step.items()
    }
    # duplicate state 3 as state 4
    for (q, a), (r, out, mv) in list(bloated_rules.items()):
        if q == 3:
            bloated_rules[(4, a)] = (r, out, mv)
    t = make_twoway((1, 2, 3, 4), AB, AB, 1, {3, 4}, bloated_rules)
    merged = merge_equivalent(t)
    assert len(merged.states) == 3
    for w in words_upto(5):
        assert simulate(merged, w).output == simulate(t, w).output
