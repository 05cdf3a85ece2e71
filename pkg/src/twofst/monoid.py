"""Behavior profiles as monoid elements and the transition monoid.

A profile packs the four partial behavior functions of a factor.  Profiles
multiply by gluing: a token walks over the abstract boundary graph of the
two segments, bouncing according to the stored behaviors, with cycle
detection yielding undefined entries.  The same walk engine, generalized to
segment chains with explicit endmarker cells, powers class-based acceptance
and the run-reachability decisions used by the logical translations.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .words import LEFT_MARK, RIGHT_MARK, as_word
from .twoway import TwoWayTransducer, behaviors


@dataclass(frozen=True)
class BehaviorProfile:
    """The four behaviors of a factor, canonically sorted by state index."""

    order: tuple  # the machine's state tuple, fixing the sort order
    ll: tuple
    lr: tuple
    rl: tuple
    rr: tuple

    @staticmethod
    def from_pairs(order, ll, lr, rl, rr) -> "BehaviorProfile":
        pos = {q: i for i, q in enumerate(order)}
        key = lambda pair: pos[pair[0]]
        return BehaviorProfile(
            tuple(order),
            tuple(sorted(ll, key=key)),
            tuple(sorted(lr, key=key)),
            tuple(sorted(rl, key=key)),
            tuple(sorted(rr, key=key)),
        )

    def func(self, part: str) -> dict:
        return dict(getattr(self, part))

    def check_disjoint(self) -> bool:
        left = {p for p, _ in self.ll} & {p for p, _ in self.lr}
        right = {p for p, _ in self.rl} & {p for p, _ in self.rr}
        return not left and not right

    def show(self) -> str:
        def fmt(pairs):
            return "{" + ",".join(f"({p},{q})" for p, q in pairs) + "}"

        return (
            f"ll={fmt(self.ll)} lr={fmt(self.lr)} "
            f"rl={fmt(self.rl)} rr={fmt(self.rr)}"
        )


def identity_profile(order) -> BehaviorProfile:
    ident = tuple((q, q) for q in order)
    return BehaviorProfile(tuple(order), (), ident, ident, ())


# ---------------------------------------------------------------------------
# Segment chains and the boundary walk


class ProfileSeg:
    """A factor known only through its behavior profile."""

    def __init__(self, profile: BehaviorProfile):
        self.ll = dict(profile.ll)
        self.lr = dict(profile.lr)
        self.rl = dict(profile.rl)
        self.rr = dict(profile.rr)

    def run(self, side: str, q):
        if side == "L":
            if q in self.ll:
                return ("exit_left", self.ll[q])
            if q in self.lr:
                return ("exit_right", self.lr[q])
        else:
            if q in self.rl:
                return ("exit_left", self.rl[q])
            if q in self.rr:
                return ("exit_right", self.rr[q])
        return ("dead",)


class MarkSeg:
    """An explicit endmarker cell, stepped by the machine.

    The right endmarker optionally terminates the walk when entered in a
    final state, matching the stop-on-acceptance convention of runs.
    """

    def __init__(self, t: TwoWayTransducer, mark: str, stop_final: bool = False):
        self.t = t
        self.mark = mark
        self.stop_final = stop_final

    def run(self, side: str, q):
        t, mark = self.t, self.mark
        seen = set()
        while True:
            if self.stop_final and mark == RIGHT_MARK and q in t.finals:
                return ("accept", q)
            if q in seen:
                return ("dead",)
            seen.add(q)
            if (q, mark) not in t.step:
                return ("dead",)
            q, move = t.step[(q, mark)]
            if move == -1:
                return ("exit_left", q)
            if move == 1:
                return ("exit_right", q)


class CellSeg:
    """A single letter cell, stepped by the machine to expose 0-move chains."""

    def __init__(self, t: TwoWayTransducer, symbol):
        self.t = t
        self.symbol = symbol

    def run_states(self, q):
        """States visited while the head stays on this cell, plus the exit."""
        t = self.t
        seen = set()
        visited = []
        while True:
            if q in seen:
                return visited, ("dead",)
            seen.add(q)
            visited.append(q)
            if (q, self.symbol) not in t.step:
                return visited, ("dead",)
            q, move = t.step[(q, self.symbol)]
            if move == -1:
                return visited, ("exit_left", q)
            if move == 1:
                return visited, ("exit_right", q)

    def run(self, side: str, q):
        _, outcome = self.run_states(q)
        return outcome


def chain_walk(segments, start_index: int, start_side: str, start_state):
    """Walk a token over a chain of segments.

    Yields the sequence of entry events ``(segment_index, side, state)`` in
    order (the start counts as the first event) and returns the outcome:
    ``("exit_left", q)`` left of the chain, ``("exit_right", q)`` right of
    it, ``("accept", q)``, ``("dead",)`` or ``("loop",)``.
    """
    events = []
    seen = set()
    i, side, q = start_index, start_side, start_state
    while True:
        key = (i, side, q)
        if key in seen:
            return events, ("loop",)
        seen.add(key)
        events.append(key)
        outcome = segments[i].run(side, q)
        kind = outcome[0]
        if kind == "dead":
            return events, ("dead",)
        if kind == "accept":
            return events, outcome
        q = outcome[1]
        if kind == "exit_left":
            if i == 0:
                return events, ("exit_left", q)
            i, side = i - 1, "R"
        else:
            if i == len(segments) - 1:
                return events, ("exit_right", q)
            i, side = i + 1, "L"


def glue(p: BehaviorProfile, q: BehaviorProfile) -> BehaviorProfile:
    """Profile of any concatenation ``uv`` from the profiles of its parts."""
    if p.order != q.order:
        raise ValueError("profiles over different state sets")
    segs = [ProfileSeg(p), ProfileSeg(q)]
    ll, lr, rl, rr = [], [], [], []
    for s in p.order:
        _, outcome = chain_walk(segs, 0, "L", s)
        if outcome[0] == "exit_left":
            ll.append((s, outcome[1]))
        elif outcome[0] == "exit_right":
            lr.append((s, outcome[1]))
        _, outcome = chain_walk(segs, 1, "R", s)
        if outcome[0] == "exit_left":
            rl.append((s, outcome[1]))
        elif outcome[0] == "exit_right":
            rr.append((s, outcome[1]))
    return BehaviorProfile.from_pairs(p.order, ll, lr, rl, rr)


# ---------------------------------------------------------------------------
# Transition monoid


@dataclass(frozen=True, eq=False)
class TransitionMonoid:
    machine: TwoWayTransducer
    elements: tuple  # BehaviorProfile, identity first, then BFS discovery order
    identity: BehaviorProfile
    morphism: dict  # symbol (letters and endmarkers) -> profile
    representatives: dict  # profile -> shortest witness word
    _products: dict = field(default_factory=dict, repr=False)

    def product(self, x: BehaviorProfile, y: BehaviorProfile) -> BehaviorProfile:
        key = (x, y)
        got = self._products.get(key)
        if got is None:
            got = glue(x, y)
            self._products[key] = got
        return got

    def element_id(self, e: BehaviorProfile) -> str:
        from .words import show_word

        rep = self.representatives[e]
        return show_word(rep) if rep else "-"

    def element_by_id(self, name: str) -> BehaviorProfile:
        for e in self.elements:
            if self.element_id(e) == name:
                return e
        raise KeyError(f"no monoid element named {name!r}")

    def class_of_word(self, w) -> BehaviorProfile:
        e = self.identity
        for a in as_word(w):
            e = self.product(e, self.morphism[a])
        return e


def transition_monoid(t: TwoWayTransducer) -> TransitionMonoid:
    """Closure of the letter profiles under gluing, shortest representatives.

    Endmarker profiles are kept on the morphism but excluded from the
    generated element set; words containing endmarkers cannot occur as
    factors of real inputs.
    """
    ident = identity_profile(t.states)
    letter_profiles = {a: behaviors(t, (a,)) for a in t.in_alphabet}
    morphism = dict(letter_profiles)
    morphism[LEFT_MARK] = _mark_profile(t, LEFT_MARK)
    morphism[RIGHT_MARK] = _mark_profile(t, RIGHT_MARK)
    elements = {ident: ()}
    queue = deque([ident])
    while queue:
        e = queue.popleft()
        rep = elements[e]
        for a in t.in_alphabet:
            f = glue(e, letter_profiles[a])
            if f not in elements:
                elements[f] = rep + (a,)
                queue.append(f)
    ordered = tuple(elements)
    return TransitionMonoid(t, ordered, ident, morphism, dict(elements))


def _mark_profile(t: TwoWayTransducer, mark: str) -> BehaviorProfile:
    seg = MarkSeg(t, mark)
    ll, lr, rl, rr = [], [], [], []
    for q in t.states:
        outcome = seg.run("L", q)
        if outcome[0] == "exit_left":
            ll.append((q, outcome[1]))
        elif outcome[0] == "exit_right":
            lr.append((q, outcome[1]))
        outcome = seg.run("R", q)
        if outcome[0] == "exit_left":
            rl.append((q, outcome[1]))
        elif outcome[0] == "exit_right":
            rr.append((q, outcome[1]))
    return BehaviorProfile.from_pairs(t.states, ll, lr, rl, rr)


@dataclass(frozen=True)
class AperiodicityReport:
    aperiodic: bool
    index: Optional[int]
    witness: Optional[BehaviorProfile] = None


def is_aperiodic(m: TransitionMonoid) -> AperiodicityReport:
    """Least global n with x^n = x^(n+1); x^0 is the identity, so the
    trivial monoid has index 0."""
    best = 0
    for e in m.elements:
        powers = [m.identity]
        seen = {m.identity: 0}
        cur = m.identity
        while True:
            cur = m.product(cur, e)
            if cur in seen:
                start = seen[cur]
                period = len(powers) - start
                if period != 1:
                    return AperiodicityReport(False, None, e)
                best = max(best, start)
                break
            seen[cur] = len(powers)
            powers.append(cur)
    return AperiodicityReport(True, best, None)


def class_of(m: TransitionMonoid, w) -> BehaviorProfile:
    w = as_word(w)
    for s in w:
        if s in (LEFT_MARK, RIGHT_MARK):
            raise ValueError("class_of is defined for endmarker-free words")
    return m.class_of_word(w)


def class_language_dfa(m: TransitionMonoid, e: BehaviorProfile):
    """DFA over the input alphabet accepting exactly the class of ``e``."""
    from .words import Dfa

    if e not in m.representatives:
        raise ValueError("element not in monoid")
    t = m.machine
    names = {elem: i for i, elem in enumerate(m.elements)}
    delta = {}
    for elem in m.elements:
        for a in t.in_alphabet:
            delta[(names[elem], a)] = names[m.product(elem, m.morphism[a])]
    return Dfa(
        tuple(range(len(m.elements))),
        t.in_alphabet,
        names[m.identity],
        frozenset({names[e]}),
        delta,
    )


# ---------------------------------------------------------------------------
# Class-based run decisions


def accepts_from_class(m: TransitionMonoid, e: BehaviorProfile) -> bool:
    """Whether words of class ``e`` are accepted, decided from profiles only."""
    t = m.machine
    segs = [
        MarkSeg(t, LEFT_MARK),
        ProfileSeg(e),
        MarkSeg(t, RIGHT_MARK, stop_final=True),
    ]
    _, outcome = chain_walk(segs, 0, "L", t.initial)
    return outcome[0] == "accept"


def accepted_classes(m: TransitionMonoid) -> list:
    return [e for e in m.elements if accepts_from_class(m, e)]


def reach_decision(
    m: TransitionMonoid,
    triple,
    q,
    q2,
    leftward: bool = False,
) -> bool:
    """Boundary-reachability from the classes of a three-way split.

    ``triple = (pre, mid, suf)`` are profiles of a factorization
    ``u = pre mid suf`` of a whole input word.  Forward: does the run over
    ``^ u $`` started at the first position of ``mid`` in state ``q`` at some
    time cross the right boundary of ``mid`` in state ``q2``?  With
    ``leftward`` the walk starts at the last position of ``mid`` and the
    crossings of its left boundary are observed.  Arrivals at any time count,
    not only the first; the walk honors the stop-on-acceptance convention.
    """
    pre, mid, suf = triple
    t = m.machine
    segs = [
        MarkSeg(t, LEFT_MARK),
        ProfileSeg(pre),
        ProfileSeg(mid),
        ProfileSeg(suf),
        MarkSeg(t, RIGHT_MARK, stop_final=True),
    ]
    events, _ = chain_walk(segs, 2, "L" if not leftward else "R", q)
    if leftward:
        return any(i == 1 and side == "R" and s == q2 for (i, side, s) in events)
    return any(i == 3 and side == "L" and s == q2 for (i, side, s) in events)


class _RecordingCell(CellSeg):
    """Cell segment that records every state of its internal 0-move chains."""

    def __init__(self, t, symbol, log):
        super().__init__(t, symbol)
        self.log = log

    def run(self, side, q):
        visited, outcome = self.run_states(q)
        self.log.extend(visited)
        return outcome


def visit_states_at_cell(
    m: TransitionMonoid,
    before: BehaviorProfile,
    cell_symbol,
    after: BehaviorProfile,
    start,
) -> frozenset:
    """States in which the run visits a designated cell.

    The input factors as ``u = before  c  after`` with ``c`` the designated
    cell.  ``start`` selects where the observed run begins: ``("mark",)``
    starts the full run at the left endmarker in the initial state;
    ``("left", q)`` starts at the first position of a *nonempty* ``before``
    in state ``q``; ``("cell", q)`` starts on the cell itself; ``("right",
    q)`` starts at the first position of a *nonempty* ``after`` --- for that
    variant ``after`` must be split off by the caller.  Visits during 0-move
    chains on the cell are included.  The walk stops on acceptance.
    """
    t = m.machine
    log = []
    segs = [
        MarkSeg(t, LEFT_MARK),
        ProfileSeg(before),
        _RecordingCell(t, cell_symbol, log),
        ProfileSeg(after),
        MarkSeg(t, RIGHT_MARK, stop_final=True),
    ]
    kind = start[0]
    if kind == "mark":
        chain_walk(segs, 0, "L", t.initial)
    elif kind == "left":
        chain_walk(segs, 1, "L", start[1])
    elif kind == "cell":
        chain_walk(segs, 2, "L", start[1])
    elif kind == "right":
        chain_walk(segs, 3, "L", start[1])
    else:
        raise ValueError(f"unknown start {start!r}")
    return frozenset(log)


def visit_states_at_cell_from_right_segment(
    m: TransitionMonoid,
    before: BehaviorProfile,
    cell_symbol,
    gap: BehaviorProfile,
    right: BehaviorProfile,
    q,
) -> frozenset:
    """Visits to the cell in ``u = before c gap right`` for the run started
    at the first position of a nonempty ``right`` in state ``q``."""
    t = m.machine
    log = []
    segs = [
        MarkSeg(t, LEFT_MARK),
        ProfileSeg(before),
        _RecordingCell(t, cell_symbol, log),
        ProfileSeg(gap),
        ProfileSeg(right),
        MarkSeg(t, RIGHT_MARK, stop_final=True),
    ]
    chain_walk(segs, 4, "L", q)
    return frozenset(log)
