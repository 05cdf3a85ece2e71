"""Two-way transducers with look-around.

One variant guards transitions with star-free prefix/suffix language tests;
the other guards them with a unary formula and moves the head through a
binary jump formula, both evaluated on the endmarked tape.  Prefix and
suffix in a test are strict and endmarker-free, so a test's three parts
carry disjoint information.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .words import (
    Alphabet,
    Dfa,
    Word,
    as_word,
    dfa_accepts,
    dfa_is_counter_free,
)
from .logic import EvalSession, Formula, MonoidRegistry, free_vars
from .twoway import tape_symbol


class DeterminismViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class SfTest:
    prefix: Dfa
    letter: object
    suffix: Dfa


@dataclass(frozen=True)
class SfTransition:
    src: object
    test: SfTest
    dst: object
    out: Word
    move: int


@dataclass(frozen=True, eq=False)
class SfLookAroundTransducer:
    states: tuple
    in_alphabet: Alphabet
    out_alphabet: Alphabet
    transitions: tuple  # of SfTransition
    initial: object
    finals: frozenset

    def __post_init__(self):
        for tr in self.transitions:
            if tr.move not in (-1, 0, 1):
                raise ValueError(f"illegal move {tr.move!r}")
        for tr in self.transitions:
            for d in (tr.test.prefix, tr.test.suffix):
                report = dfa_is_counter_free(d)
                if not report.aperiodic:
                    raise ValueError("look-around test language is not star-free")


@dataclass(frozen=True)
class FoTransition:
    src: object
    guard: Formula  # free variable x
    dst: object
    out: Word
    jump: Formula  # free variables x, y (x may be unused)


@dataclass(frozen=True, eq=False)
class FoLookAroundTransducer:
    states: tuple
    in_alphabet: Alphabet
    out_alphabet: Alphabet
    transitions: tuple  # of FoTransition
    initial: object
    finals: frozenset

    def __post_init__(self):
        for tr in self.transitions:
            if not free_vars(tr.guard) <= {"x"}:
                raise ValueError("guards use the free variable x")
            if not free_vars(tr.jump) <= {"x", "y"}:
                raise ValueError("jumps use the free variables x, y")


@dataclass(frozen=True)
class LaResult:
    output: Optional[Word]
    path: tuple  # of (state, position)
    reason: Optional[str] = None  # None | blocked | loop | rejected

    @property
    def defined(self) -> bool:
        return self.output is not None


def sf_test_holds(t: SfLookAroundTransducer, test: SfTest, w: Word, pos: int) -> bool:
    """Letter under the head matches; strict prefix and suffix pass the DFAs."""
    if tape_symbol(w, pos) != test.letter:
        return False
    prefix = w[: max(pos - 1, 0)]
    suffix = w[pos:]
    return dfa_accepts(test.prefix, prefix) and dfa_accepts(test.suffix, suffix)


def simulate_sf_la(t: SfLookAroundTransducer, w) -> LaResult:
    w = t.in_alphabet.word(as_word(w))
    last = len(w) + 1
    q, pos = t.initial, 0
    path = [(q, pos)]
    seen = {(q, pos)}
    outputs = []
    while True:
        if pos == last and q in t.finals:
            return LaResult(tuple(s for o in outputs for s in o), tuple(path))
        enabled = [
            tr
            for tr in t.transitions
            if tr.src == q and sf_test_holds(t, tr.test, w, pos)
        ]
        if len(enabled) > 1:
            raise DeterminismViolation(
                f"{len(enabled)} tests fire in state {q!r} at position {pos}"
            )
        if not enabled:
            reason = "rejected" if pos == last else "blocked"
            return LaResult(None, tuple(path), reason)
        tr = enabled[0]
        outputs.append(tr.out)
        q, pos = tr.dst, pos + tr.move
        if not 0 <= pos <= last:
            return LaResult(None, tuple(path), "blocked")
        path.append((q, pos))
        if (q, pos) in seen:
            return LaResult(None, tuple(path), "loop")
        seen.add((q, pos))


def check_sf_determinism(t: SfLookAroundTransducer, max_len: int = 6) -> bool:
    """Tests per state must be exclusive on every position of every word."""
    for w in t.in_alphabet.words_upto(max_len):
        for pos in range(0, len(w) + 2):
            for q in t.states:
                hits = [
                    tr
                    for tr in t.transitions
                    if tr.src == q and sf_test_holds(t, tr.test, w, pos)
                ]
                if len(hits) > 1:
                    return False
    return True


def _jump_targets(tr: FoTransition, w: Word, pos: int, session: EvalSession) -> list:
    n = len(w)
    return [
        j
        for j in range(0, n + 2)
        if session.eval(tr.jump, {"x": pos, "y": j})
    ]


def enabled_fo_transitions(
    t: FoLookAroundTransducer,
    w: Word,
    q,
    pos: int,
    registry: Optional[MonoidRegistry] = None,
    session: Optional[EvalSession] = None,
) -> list:
    """Transitions whose guard holds and whose jump has a target.

    Requiring a target makes the constructed machines deterministic without
    strengthened guards: a successor-following transition is disabled at the
    last node because its jump formula has no model there.
    """
    if session is None:
        session = EvalSession(w, registry, marked=True)
    out = []
    for tr in t.transitions:
        if tr.src != q:
            continue
        if not session.eval(tr.guard, {"x": pos}):
            continue
        targets = _jump_targets(tr, w, pos, session)
        if targets:
            out.append((tr, targets))
    return out


def simulate_fo_la(
    t: FoLookAroundTransducer, w, registry: Optional[MonoidRegistry] = None
) -> LaResult:
    w = t.in_alphabet.word(as_word(w))
    last = len(w) + 1
    q, pos = t.initial, 0
    path = [(q, pos)]
    seen = {(q, pos)}
    outputs = []
    session = EvalSession(w, registry, marked=True)
    while True:
        if pos == last and q in t.finals:
            return LaResult(tuple(s for o in outputs for s in o), tuple(path))
        enabled = enabled_fo_transitions(t, w, q, pos, registry, session)
        if not enabled:
            reason = "rejected" if pos == last else "blocked"
            return LaResult(None, tuple(path), reason)
        if len(enabled) > 1:
            raise DeterminismViolation(
                f"{len(enabled)} transitions enabled in state {q!r} at position {pos}"
            )
        tr, targets = enabled[0]
        if len(targets) > 1:
            raise DeterminismViolation(
                f"jump of {q!r} admits several targets {targets!r} at position {pos}"
            )
        outputs.append(tr.out)
        q, pos = tr.dst, targets[0]
        path.append((q, pos))
        if (q, pos) in seen:
            return LaResult(None, tuple(path), "loop")
        seen.add((q, pos))


def check_fo_determinism(
    t: FoLookAroundTransducer,
    max_len: int = 6,
    registry: Optional[MonoidRegistry] = None,
) -> bool:
    """At most one enabled transition and one jump target everywhere."""
    for w in t.in_alphabet.words_upto(max_len):
        session = EvalSession(w, registry, marked=True)
        for pos in range(0, len(w) + 2):
            for q in t.states:
                enabled = enabled_fo_transitions(t, w, q, pos, registry, session)
                if len(enabled) > 1:
                    return False
                if enabled and len(enabled[0][1]) > 1:
                    return False
    return True
