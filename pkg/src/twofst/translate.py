"""Constructions between the machine and logic models.

* composition of a sequential transducer with a two-way transducer (and the
  right-sequential variant), preserving aperiodicity;
* aperiodic two-way transducer -> FO transduction, with order formulas built
  from class-triple run decisions;
* FO transduction -> FO-look-around machine (successor of the output order);
* FO look-around -> star-free look-around (jumps become stepwise walks);
* star-free look-around -> plain two-way transducer (tests become alphabet
  enrichment bits computed by composed annotator passes).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .words import (
    Alphabet,
    AlphabetError,
    Dfa,
    LEFT_MARK,
    RIGHT_MARK,
    SequentialTransducer,
    Word,
    determinize_nfa,
    dfa_accepts,
    dfa_complement,
    dfa_minimize,
    dfa_universal,
    make_seq,
)
from .twoway import (
    TwoWayTransducer,
    is_normalized,
    make_twoway,
    merge_equivalent,
    mirror,
    normalize,
    simulate,
    trim,
)
from .monoid import (
    BehaviorProfile,
    MarkSeg,
    ProfileSeg,
    TransitionMonoid,
    _RecordingCell,
    accepted_classes,
    chain_walk,
    is_aperiodic,
    reach_decision,
    transition_monoid,
)
from .logic import (
    FALSE,
    Exists,
    FactorClass,
    Forall,
    Formula,
    Le,
    Letter,
    MonoidRegistry,
    PrefixClass,
    SuffixClass,
    compile_to_dfa,
    conj,
    disj,
    implies,
    linear_graph_sentence,
    neg,
    subst_var,
    var_eq,
    var_lt,
)
from .fot import FoTransduction
from .lookaround import (
    FoLookAroundTransducer,
    FoTransition,
    SfLookAroundTransducer,
    SfTest,
    SfTransition,
    check_fo_determinism,
)


class NotAperiodic(RuntimeError):
    pass


class NotNormalized(ValueError):
    pass


class UnsupportedProduction(ValueError):
    """Endmarker transitions of the translated machine must produce nothing."""


class TooManyTests(RuntimeError):
    pass


class DirectionAmbiguity(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Composition: sequential before two-way


def compose_seq_2w(a: SequentialTransducer, b: TwoWayTransducer) -> TwoWayTransducer:
    """Two-way transducer realizing ``w -> b(a(w))``.

    The buffer window always holds the production block of one input letter
    (or an endmarker of the inner tape); hop transients recompute blocks when
    the simulated head leaves the window to the right, and the rewind modes
    rerun the one-way machine backwards on exits to the left, tracking
    candidate states until they merge.
    """
    if a.out_alphabet != b.in_alphabet:
        raise AlphabetError("output alphabet of the sequential machine must feed b")
    if not is_normalized(b):
        raise NotNormalized("normalize the two-way machine first")

    rules = {}
    symbols = tuple(a.in_alphabet) + (LEFT_MARK, RIGHT_MARK)
    # r1: (p, q, left, head, right) -- window = one production block; q is the
    # one-way state before the current input letter
    r0 = ("r1", b.initial, a.initial, (), LEFT_MARK, ())
    finals = set()
    seen = {r0}
    queue = deque([r0])

    def emit(state, x, target, out, move):
        rules[(state, x)] = (target, out, move)
        if target not in seen:
            seen.add(target)
            queue.append(target)

    def pick_pair(rel, true_c, key):
        q1 = next(s for (c, s) in sorted(rel, key=key) if c == true_c)
        q2 = next((s for (c, s) in sorted(rel, key=key) if c != true_c), None)
        return q1, q2

    key = _pair_key(a)

    while queue:
        r = queue.popleft()
        mode = r[0]
        for x in symbols:
            if mode == "r1":
                _, p, q, left, head, right = r
                if head == RIGHT_MARK and p in b.finals:
                    emit(r, x, ("r5", p, q), (), 0)
                    continue
                if (p, head) not in b.step:
                    continue
                p2, d = b.step[(p, head)]
                out = b.out[(p, head)]
                if d == 0:
                    emit(r, x, ("r1", p2, q, left, head, right), out, 0)
                elif d == 1 and right:
                    emit(r, x, ("r1", p2, q, left + (head,), right[0], right[1:]), out, 0)
                elif d == 1:
                    if x == RIGHT_MARK:
                        continue  # the inner head cannot pass the inner end
                    q2 = a.step.get((q, x)) if x != LEFT_MARK else q
                    if q2 is None:
                        continue
                    emit(r, x, ("hr", p2, q2), out, 1)
                elif d == -1 and left:
                    emit(r, x, ("r1", p2, q, left[:-1], left[-1], (head,) + right), out, 0)
                else:
                    if x == LEFT_MARK:
                        continue  # the inner head cannot pass the inner start
                    emit(r, x, ("rw", p2, q), out, -1)
            elif mode == "hr":
                # the inner head moved right out of the window: find the next
                # nonempty block
                _, p, q = r
                if x == LEFT_MARK:
                    continue
                if x == RIGHT_MARK:
                    if q in a.finals:
                        emit(r, x, ("r1", p, q, (), RIGHT_MARK, ()), (), 0)
                    continue
                if (q, x) not in a.step:
                    continue
                g = a.out[(q, x)]
                if g:
                    emit(r, x, ("r1", p, q, (), g[0], g[1:]), (), 0)
                else:
                    emit(r, x, ("hr", p, a.step[(q, x)]), (), 1)
            elif mode == "rw":
                # the inner head moved left out of the window: rebuild the
                # previous nonempty block; q = one-way state after this letter
                _, p, q = r
                if x == LEFT_MARK:
                    if q == a.initial:
                        emit(r, x, ("r1", p, a.initial, (), LEFT_MARK, ()), (), 0)
                    continue
                if x == RIGHT_MARK:
                    continue
                cands = tuple(
                    s for s in a.states if a.step.get((s, x)) == q
                )
                if len(cands) == 1:
                    s = cands[0]
                    g = a.out[(s, x)]
                    if g:
                        emit(r, x, ("r1", p, s, g[:-1], g[-1], ()), (), 0)
                    else:
                        emit(r, x, ("rw", p, s), (), -1)
                elif len(cands) > 1:
                    rel = frozenset((c, c) for c in cands)
                    emit(r, x, ("rel", p, q, rel), (), -1)
            elif mode == "rel":
                # backward candidate tracking; q_target is the state the
                # resolved candidate must step into (for the rerun at the end)
                _, p, q_target, rel = r
                if x == RIGHT_MARK:
                    continue
                if x == LEFT_MARK:
                    true_c = next(
                        (c for (c, s) in sorted(rel, key=key) if s == a.initial), None
                    )
                    if true_c is None:
                        continue
                    q1, q2 = pick_pair(rel, true_c, key)
                    if q2 is None:
                        continue
                    emit(r, x, ("r3", p, q_target, q1, q2), (), 1)
                    continue
                nrel = frozenset(
                    (c, s)
                    for (c, s2) in rel
                    for s in a.states
                    if a.step.get((s, x)) == s2
                )
                remaining = {c for (c, _) in nrel}
                if not remaining:
                    continue
                if len(remaining) == 1:
                    true_c = next(iter(remaining))
                    q1, q2 = pick_pair(rel, true_c, key)
                    if q2 is None:
                        continue
                    emit(r, x, ("r3", p, q_target, q1, q2), (), 1)
                else:
                    emit(r, x, ("rel", p, q_target, nrel), (), -1)
            elif mode == "r3":
                # two concurrent forward runs; they merge exactly at the
                # position whose block must be rebuilt
                _, p, q_target, q1, q2 = r
                if x in (LEFT_MARK, RIGHT_MARK):
                    continue
                if (q1, x) not in a.step or (q2, x) not in a.step:
                    continue
                s1, s2 = a.step[(q1, x)], a.step[(q2, x)]
                if s1 != s2:
                    emit(r, x, ("r3", p, q_target, s1, s2), (), 1)
                else:
                    g = a.out[(q1, x)]
                    if g:
                        emit(r, x, ("r1", p, q1, g[:-1], g[-1], ()), (), 0)
                    else:
                        emit(r, x, ("rw", p, q1), (), -1)
            elif mode == "r5":
                pass  # no transitions: acceptance is decided on arrival

    for r in seen:
        if r[0] == "r5" and r[2] in a.finals:
            finals.add(r)
    states = tuple(seen)
    return trim(
        make_twoway(states, a.in_alphabet, b.out_alphabet, r0, finals, rules)
    )


def _pair_key(a: SequentialTransducer):
    idx = {q: i for i, q in enumerate(a.states)}
    return lambda pair: (idx[pair[0]], idx[pair[1]])


def compose_right_seq_2w(
    a_right: SequentialTransducer, b: TwoWayTransducer
) -> TwoWayTransducer:
    """Compose a right-sequential preprocessor (a sequential transducer run
    on the reversed input, producing the reversed output) with ``b``."""
    return trim(merge_equivalent(mirror(compose_seq_2w(a_right, mirror(normalize(b))))))


# ---------------------------------------------------------------------------
# Aperiodic two-way transducer -> FO transduction


def _visit_states(m, before_profiles, cell_symbol, after_profiles, start):
    """States in which the designated cell is visited by the chosen run.

    The word is ``before... cell after...`` framed by endmarkers; ``start``
    is ``("initial",)`` for the full run from the left endmarker,
    ``("before", i, q)`` / ``("after", i, q)`` to start at the first
    position of that (nonempty) segment, or ``("cell", q)``.  The walk obeys
    the stop-on-acceptance convention; visits during 0-move chains count.
    """
    t = m.machine
    log = []
    segs = (
        [MarkSeg(t, LEFT_MARK)]
        + [ProfileSeg(p) for p in before_profiles]
        + [_RecordingCell(t, cell_symbol, log)]
        + [ProfileSeg(p) for p in after_profiles]
        + [MarkSeg(t, RIGHT_MARK, stop_final=True)]
    )
    cell_index = 1 + len(before_profiles)
    kind = start[0]
    if kind == "initial":
        chain_walk(segs, 0, "L", t.initial)
    elif kind == "before":
        chain_walk(segs, 1 + start[1], "L", start[2])
    elif kind == "cell":
        chain_walk(segs, cell_index, "L", start[1])
    elif kind == "after":
        chain_walk(segs, cell_index + 1 + start[1], "L", start[2])
    else:
        raise ValueError(f"unknown start {start!r}")
    return frozenset(log)


def _succ(u: str, v: str) -> Formula:
    """v is the successor position of u."""
    w = f"{u}{v}w"
    return conj(
        [var_lt(u, v), neg(Exists(w, conj([var_lt(u, w), var_lt(w, v)])))]
    )


@dataclass
class _FotBuilder:
    t: TwoWayTransducer
    m: TransitionMonoid
    name: str

    def __post_init__(self):
        self._visits: dict = {}

    def pre(self, e, var):
        return PrefixClass(self.name, self.m.element_id(e), var)

    def suf(self, e, var):
        return SuffixClass(self.name, self.m.element_id(e), var)

    def fact(self, e, v1, v2):
        return FactorClass(self.name, self.m.element_id(e), v1, v2)

    def elements(self):
        return self.m.elements

    def letters(self):
        return tuple(self.t.in_alphabet)

    def vis(self, before, cell, after, start) -> frozenset:
        key = (tuple(before), cell, tuple(after), start)
        got = self._visits.get(key)
        if got is None:
            got = _visit_states(self.m, before, cell, after, start)
            self._visits[key] = got
        return got


def twoway_to_fot(
    t: TwoWayTransducer,
    registry: MonoidRegistry,
    monoid_name: str = "M",
) -> FoTransduction:
    """FO transduction equivalent to an aperiodic two-way transducer.

    Copies are the (normalized) states; a node ``(q, i)`` exists when the
    accepting run visits ``(q, i)`` and produces a letter there; the order
    formula decides whether the run continued from one visited configuration
    reaches another.  All decisions are disjunctions over class atoms of the
    three (plus the split-off target cell) factors around the positions.
    """
    t = normalize(t)
    for (q, sym), out in t.out.items():
        if sym in (LEFT_MARK, RIGHT_MARK) and out:
            raise UnsupportedProduction(
                "endmarker transitions must not produce output"
            )
    m = transition_monoid(t)
    report = is_aperiodic(m)
    if not report.aperiodic:
        raise NotAperiodic("transition monoid is not aperiodic")
    registry.register(monoid_name, m)
    b = _FotBuilder(t, m, monoid_name)

    letters = b.letters()
    elements = b.elements()

    # --- node formulas: the full run visits (q, x) and produces b there
    pos = {}
    for q in t.states:
        for out_sym in t.out_alphabet:
            sources = [a for a in letters if t.out.get((q, a)) == (out_sym,)]
            disjuncts = []
            for a in sources:
                for e1 in elements:
                    for e3 in elements:
                        if q in b.vis([e1], a, [e3], ("initial",)):
                            disjuncts.append(
                                conj(
                                    [Letter(a, "x"), b.pre(e1, "x"), b.suf(e3, "x")]
                                )
                            )
            if disjuncts:
                pos[(q, out_sym)] = disj(disjuncts)

    # --- order formulas
    order = {}
    for q in t.states:
        for q2 in t.states:
            order[(q, q2)] = _order_formula(b, q, q2)

    # --- domain: linear word whose class is accepting
    dom_disjuncts = []
    for e in accepted_classes(m):
        per_last = []
        for a in letters:
            for e1 in elements:
                if m.product(e1, m.morphism[a]) == e:
                    per_last.append(conj([Letter(a, "x"), b.pre(e1, "x")]))
        if per_last:
            dom_disjuncts.append(
                Exists(
                    "x",
                    conj(
                        [
                            _is_real("x", letters),
                            Forall("z", implies(_is_real("z", letters), Le("z", "x"))),
                            disj(per_last),
                        ]
                    ),
                )
            )
    dom = conj([linear_graph_sentence(), disj(dom_disjuncts)])

    return FoTransduction(
        in_alphabet=t.in_alphabet,
        out_alphabet=t.out_alphabet,
        dom=dom,
        copies=tuple(t.states),
        pos=pos,
        order=order,
    )


def _is_real(var: str, letters) -> Formula:
    return disj([Letter(a, var) for a in letters])


def _order_formula(b: _FotBuilder, q, q2) -> Formula:
    """Does the run continued from (q, x) visit (q2, y)?"""
    m = b.m
    letters = b.letters()
    elements = b.elements()

    # x == y: run started on the cell revisits it
    eq_disjuncts = []
    for e1 in elements:
        for a in letters:
            for e3 in elements:
                if q2 in b.vis([e1], a, [e3], ("cell", q)):
                    eq_disjuncts.append(
                        conj([Letter(a, "x"), b.pre(e1, "x"), b.suf(e3, "x")])
                    )
    part_eq = conj([var_eq("x", "y"), disj(eq_disjuncts)])

    # x < y: factors are pre | gap=u[x..y-1] | target cell | suf
    fwd = []
    for e1 in elements:
        for e2 in elements:
            for a in letters:
                for e3 in elements:
                    if q2 in b.vis([e1, e2], a, [e3], ("before", 1, q)):
                        fwd.append(
                            conj(
                                [
                                    b.pre(e1, "x"),
                                    b.fact(e2, "x", "z"),
                                    Letter(a, "y"),
                                    b.suf(e3, "y"),
                                ]
                            )
                        )
    part_fwd = conj(
        [var_lt("x", "y"), Exists("z", conj([_succ("z", "y"), disj(fwd)]))]
    )

    # y < x: factors are pre | target cell | gap=u[y+1..x-1] | right=u[x..]
    # the right segment's class is recovered from the letter at x and the
    # suffix class strictly after x
    bwd_empty = []  # x == y + 1, empty gap
    bwd_gap = []
    for e1 in elements:
        for a in letters:
            for bx in letters:
                for e5 in elements:
                    e_right = m.product(m.morphism[bx], e5)
                    if q2 in b.vis([e1], a, [m.identity, e_right], ("after", 1, q)):
                        bwd_empty.append(
                            conj(
                                [
                                    b.pre(e1, "y"),
                                    Letter(a, "y"),
                                    Letter(bx, "x"),
                                    b.suf(e5, "x"),
                                ]
                            )
                        )
                    for e2 in elements:
                        if q2 in b.vis([e1], a, [e2, e_right], ("after", 1, q)):
                            bwd_gap.append(
                                conj(
                                    [
                                        b.pre(e1, "y"),
                                        Letter(a, "y"),
                                        b.fact(e2, "z1", "z2"),
                                        Letter(bx, "x"),
                                        b.suf(e5, "x"),
                                    ]
                                )
                            )
    part_bwd = disj(
        [
            conj([_succ("y", "x"), disj(bwd_empty)]),
            conj(
                [
                    var_lt("y", "x"),
                    Exists(
                        "z1",
                        conj(
                            [
                                _succ("y", "z1"),
                                Exists(
                                    "z2",
                                    conj([_succ("z2", "x"), Le("z1", "z2"), disj(bwd_gap)]),
                                ),
                            ]
                        ),
                    ),
                ]
            ),
        ]
    )
    return disj([part_eq, part_fwd, part_bwd])


# ---------------------------------------------------------------------------
# FO transduction -> FO look-around machine


def _apply1(phi: Formula, var: str) -> Formula:
    """Instantiate a one-free-variable formula (over x) at ``var``."""
    return subst_var(phi, "x", var)


def _apply2(phi: Formula, u: str, v: str) -> Formula:
    """Instantiate a two-free-variable formula (over x, y) at ``(u, v)``."""
    tmp1, tmp2 = "ap1_", "ap2_"
    out = subst_var(subst_var(phi, "x", tmp1), "y", tmp2)
    return subst_var(subst_var(out, tmp1, u), tmp2, v)


def fot_to_fo_lookaround(T: FoTransduction) -> FoLookAroundTransducer:
    """Machine whose head follows the output structure of the transduction.

    States are the copies plus fresh initial and final states; the jump
    formulas assert the successor relation of the output order restricted to
    existing nodes, conjoined with the domain formula.
    """
    init, fin = ("init",), ("fin",)
    copies = T.copies

    def star(c, var):
        return _apply1(
            disj([T.pos_formula(c, bsym) for bsym in T.out_alphabet]), var
        )

    def order(c, c2, u, v):
        return _apply2(T.order_formula(c, c2), u, v)

    def successor(c, c2):
        inner = conj(
            [
                implies(star(d, "z"), disj([order(d, c, "z", "x"), order(c2, d, "y", "z")]))
                for d in copies
            ]
        )
        return conj([order(c, c2, "x", "y"), Forall("z", inner)])

    transitions = []
    for c in copies:
        for c2 in copies:
            # a node trivially satisfies the sandwich condition against
            # itself, so same-copy successors must exclude the diagonal
            strict = [neg(var_eq("x", "y"))] if c == c2 else []
            jump = conj(
                [successor(c, c2), star(c, "x"), star(c2, "y"), T.dom] + strict
            )
            for bsym in T.out_alphabet:
                guard = T.pos_formula(c, bsym)
                if guard == FALSE:
                    continue
                transitions.append(FoTransition(c, guard, c2, (bsym,), jump))

    for c in copies:
        first_c = conj(
            [
                star(c, "y"),
                Forall(
                    "x2",
                    conj([implies(star(d, "x2"), order(c, d, "y", "x2")) for d in copies]),
                ),
            ]
        )
        transitions.append(
            FoTransition(init, Letter(LEFT_MARK, "x"), c, (), conj([first_c, T.dom]))
        )

    no_nodes = Forall("z", conj([neg(star(c, "z")) for c in copies]))
    transitions.append(
        FoTransition(
            init,
            Letter(LEFT_MARK, "x"),
            fin,
            (),
            conj([Letter(RIGHT_MARK, "y"), T.dom, no_nodes]),
        )
    )

    for c in copies:
        last_c = conj(
            [
                star(c, "x"),
                Forall(
                    "y2",
                    conj([implies(star(d, "y2"), order(d, c, "y2", "x")) for d in copies]),
                ),
            ]
        )
        for bsym in T.out_alphabet:
            guard = T.pos_formula(c, bsym)
            if guard == FALSE:
                continue
            transitions.append(
                FoTransition(
                    c,
                    conj([_apply1(guard, "x"), last_c, T.dom]),
                    fin,
                    (bsym,),
                    Letter(RIGHT_MARK, "y"),
                )
            )

    return FoLookAroundTransducer(
        states=tuple(copies) + (init, fin),
        in_alphabet=T.in_alphabet,
        out_alphabet=T.out_alphabet,
        transitions=tuple(transitions),
        initial=init,
        finals=frozenset({fin}),
    )


# ---------------------------------------------------------------------------
# FO look-around -> star-free look-around


def _dfa_is_universal(d: Dfa) -> bool:
    return len(d.states) == 1 and d.initial in d.finals


def _dfa_is_empty(d: Dfa) -> bool:
    return not d.finals


def _sub_dfa(alphabet: Alphabet, delta, initial, finals) -> Dfa:
    """Reachable sub-DFA of a total step table, minimized."""
    seen = {initial}
    queue = deque([initial])
    states = [initial]
    sub = {}
    while queue:
        s = queue.popleft()
        for a in alphabet:
            t = delta(s, a)
            sub[(s, a)] = t
            if t not in seen:
                seen.add(t)
                states.append(t)
                queue.append(t)
    return dfa_minimize(
        Dfa(tuple(states), alphabet, initial, frozenset(f for f in finals if f in seen), sub)
    )


class _JumpTables:
    """Decompositions of one compiled guard-and-jump DFA.

    The DFA reads marked tapes ``^ u $`` over ``A x {0,1}^2`` (x bit, y bit);
    everything the walking machine needs is expressed through its states:
    prefix-state languages, per-state suffix acceptance, direction languages,
    the y-in-prefix subset tracking, and suffix acceptance vectors.
    """

    ZERO = (0, 0)
    XB = (1, 0)
    YB = (0, 1)
    XY = (1, 1)

    def __init__(self, d: Dfa, base: Alphabet):
        self.d = d
        self.base = base
        self.after_mark = d.delta[(d.initial, (LEFT_MARK, self.ZERO))]

    def step(self, s, sym, bits):
        return self.d.delta[(s, (sym, bits))]

    def zero(self, s, a):
        return self.step(s, a, self.ZERO)

    def reachable_prefix_states(self):
        seen = {self.after_mark}
        queue = deque([self.after_mark])
        while queue:
            s = queue.popleft()
            for a in self.base:
                t = self.zero(s, a)
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
        return tuple(sorted(seen, key=self.d.states.index))

    def prefix_language(self, s1) -> Dfa:
        return _sub_dfa(
            self.base, self.zero, self.after_mark, frozenset({s1})
        )

    def suffix_accepts_from(self, s) -> Dfa:
        finals = frozenset(
            t for t in self.d.states if self.step(t, RIGHT_MARK, self.ZERO) in self.d.finals
        )
        return _sub_dfa(self.base, self.zero, s, finals)

    def end_vector(self) -> frozenset:
        return frozenset(
            t for t in self.d.states if self.step(t, RIGHT_MARK, self.ZERO) in self.d.finals
        )

    def pre_vector(self, vec: frozenset, a) -> frozenset:
        return frozenset(t for t in self.d.states if self.zero(t, a) in vec)

    def vector_space(self):
        """Suffix-acceptance vectors reachable from the end of the tape."""
        seed = self.end_vector()
        seen = {seed}
        queue = deque([seed])
        while queue:
            v = queue.popleft()
            for a in self.base:
                w = self.pre_vector(v, a)
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return tuple(seen)

    def vector_language(self, vec: frozenset) -> Dfa:
        """Words whose suffix-acceptance vector equals ``vec``.

        Tracked through the action maps of the zero-bit transitions.
        """
        ident = tuple(range(len(self.d.states)))
        idx = {s: i for i, s in enumerate(self.d.states)}
        actions = {
            a: tuple(idx[self.zero(s, a)] for s in self.d.states) for a in self.base
        }
        end = self.end_vector()

        def delta(h, a):
            g = actions[a]
            return tuple(g[i] for i in h)

        def vec_of(h):
            return frozenset(
                s for s in self.d.states if self.d.states[h[idx[s]]] in end
            )

        seen = {ident}
        queue = deque([ident])
        states = [ident]
        sub = {}
        while queue:
            h = queue.popleft()
            for a in self.base:
                g = delta(h, a)
                sub[(h, a)] = g
                if g not in seen:
                    seen.add(g)
                    states.append(g)
                    queue.append(g)
        finals = frozenset(h for h in states if vec_of(h) == vec)
        return dfa_minimize(Dfa(tuple(states), self.base, ident, finals, sub))

    def direction_right_language(self, s2) -> Dfa:
        """Suffixes admitting a later y placement accepted by the jump DFA."""
        F = self.d.finals
        nfa_finals = frozenset(
            [(t, 1) for t in self.d.states if self.step(t, RIGHT_MARK, self.ZERO) in F]
            + [(t, 0) for t in self.d.states if self.step(t, RIGHT_MARK, self.YB) in F]
        )

        def moves(state, a):
            s, flag = state
            out = [(self.zero(s, a), flag)]
            if flag == 0:
                out.append((self.step(s, a, self.YB), 1))
            return out

        return determinize_nfa(self.base, [(s2, 0)], nfa_finals, moves)

    def sigma_tracking(self):
        """Deterministic tracking of (no-y state, y-somewhere state set).

        The y mark may sit on the left endmarker or on any prefix letter.
        """
        start = (
            self.after_mark,
            frozenset({self.step(self.d.initial, LEFT_MARK, self.YB)}),
        )
        seen = {start}
        queue = deque([start])
        states = [start]
        sub = {}
        while queue:
            (s, sig) = queue.popleft()
            for a in self.base:
                t = self.zero(s, a)
                nsig = frozenset(self.zero(u, a) for u in sig) | {
                    self.step(s, a, self.YB)
                }
                nxt = (t, nsig)
                sub[((s, sig), a)] = nxt
                if nxt not in seen:
                    seen.add(nxt)
                    states.append(nxt)
                    queue.append(nxt)
        return tuple(states), sub, start

    def sigma_language(self, states, sub, start, target) -> Dfa:
        return dfa_minimize(
            Dfa(tuple(states), self.base, start, frozenset({target}), dict(sub))
        )


def fo_la_to_sf_la(
    t: FoLookAroundTransducer,
    registry: Optional[MonoidRegistry] = None,
    bound: int = 4,
) -> SfLookAroundTransducer:
    """Replace formula jumps by stepwise walks guarded by star-free tests.

    Every transition's guard and jump are compiled into one DFA over the
    doubly-marked tape; the machine learns the DFA state at the current
    position through a prefix test, decides the jump direction through
    suffix or subset tests, and walks one step at a time, firing a candidate
    test at each position.
    """
    if not check_fo_determinism(t, bound, registry):
        raise DirectionAmbiguity(
            "look-around machine failed the bounded determinism check"
        )
    base = t.in_alphabet
    univ = dfa_universal(base, True)
    transitions = []
    states = list(t.states)

    for ti, tr in enumerate(t.transitions):
        psi_hat = conj([tr.guard, tr.jump])
        d = compile_to_dfa(psi_hat, ["x", "y"], base, registry, marked=True)
        tab = _JumpTables(d, base)
        walk_r = {}
        walk_l = {}

        def walkR(s):
            key = ("walkR", ti, s)
            walk_r[s] = key
            return key

        def walkL(vec):
            key = ("walkL", ti, vec)
            walk_l[vec] = key
            return key

        prefix_states = tab.reachable_prefix_states()
        only_prefix = len(prefix_states) == 1

        def prefix_test(s1):
            return univ if only_prefix else tab.prefix_language(s1)

        sigma_states, sigma_sub, sigma_start = tab.sigma_tracking()
        sigma_reach = sigma_states
        sigma_lang_cache = {}
        vec_lang_cache = {}
        suffix_acc_cache = {}

        def sigma_lang(target):
            if target not in sigma_lang_cache:
                sigma_lang_cache[target] = tab.sigma_language(
                    sigma_states, sigma_sub, sigma_start, target
                )
            return sigma_lang_cache[target]

        def vec_lang(vec):
            if vec not in vec_lang_cache:
                vec_lang_cache[vec] = tab.vector_language(vec)
            return vec_lang_cache[vec]

        def suffix_acc(s):
            if s not in suffix_acc_cache:
                suffix_acc_cache[s] = tab.suffix_accepts_from(s)
            return suffix_acc_cache[s]

        # --- entries at letter positions
        for s1 in prefix_states:
            for a in base:
                # stay: x and y on the same cell
                acc = tab.step(s1, a, tab.XY)
                su = suffix_acc(acc)
                if not _dfa_is_empty(su):
                    transitions.append(
                        SfTransition(
                            tr.src, SfTest(prefix_test(s1), a, su), tr.dst, tr.out, 0
                        )
                    )
                # walk right
                s_at = tab.step(s1, a, tab.XB)
                dir_r = tab.direction_right_language(s_at)
                if not _dfa_is_empty(dir_r):
                    transitions.append(
                        SfTransition(
                            tr.src,
                            SfTest(prefix_test(s1), a, dir_r),
                            walkR(s_at),
                            tr.out,
                            1,
                        )
                    )
        # --- left entries at letter positions, per (sigma, suffix vector)
        vecs = tab.vector_space()
        for (s, sig) in sigma_reach:
            for a in base:
                for vec in vecs:
                    if not any(tab.step(u, a, tab.XB) in vec for u in sig):
                        continue
                    lsig = sigma_lang((s, sig))
                    lvec = vec_lang(vec)
                    if _dfa_is_empty(lsig) or _dfa_is_empty(lvec):
                        continue
                    w_init = frozenset(
                        u for u in tab.d.states if tab.step(u, a, tab.XB) in vec
                    )
                    transitions.append(
                        SfTransition(
                            tr.src, SfTest(lsig, a, lvec), walkL(w_init), tr.out, -1
                        )
                    )
        # --- entries at the left endmarker
        acc0 = tab.step(tab.d.initial, LEFT_MARK, tab.XY)
        su0 = suffix_acc(acc0)
        if not _dfa_is_empty(su0):
            transitions.append(
                SfTransition(tr.src, SfTest(univ, LEFT_MARK, su0), tr.dst, tr.out, 0)
            )
        s_at0 = tab.step(tab.d.initial, LEFT_MARK, tab.XB)
        dir0 = tab.direction_right_language(s_at0)
        if not _dfa_is_empty(dir0):
            transitions.append(
                SfTransition(
                    tr.src, SfTest(univ, LEFT_MARK, dir0), walkR(s_at0), tr.out, 1
                )
            )
        # --- entries at the right endmarker
        for s1 in prefix_states:
            if tab.step(s1, RIGHT_MARK, tab.XY) in tab.d.finals:
                transitions.append(
                    SfTransition(
                        tr.src, SfTest(prefix_test(s1), RIGHT_MARK, univ), tr.dst, tr.out, 0
                    )
                )
        for (s, sig) in sigma_reach:
            if any(tab.step(u, RIGHT_MARK, tab.XB) in tab.d.finals for u in sig):
                lsig = sigma_lang((s, sig))
                if _dfa_is_empty(lsig):
                    continue
                w_init = frozenset(
                    u
                    for u in tab.d.states
                    if tab.step(u, RIGHT_MARK, tab.XB) in tab.d.finals
                )
                transitions.append(
                    SfTransition(
                        tr.src, SfTest(lsig, RIGHT_MARK, univ), walkL(w_init), tr.out, -1
                    )
                )

        # --- walk states (built to closure)
        done_r = set()
        frontier = list(walk_r)
        while frontier:
            s = frontier.pop()
            if s in done_r:
                continue
            done_r.add(s)
            key = ("walkR", ti, s)
            for a in base:
                t_y = tab.step(s, a, tab.YB)
                su = suffix_acc(t_y)
                if not _dfa_is_empty(su):
                    transitions.append(
                        SfTransition(key, SfTest(univ, a, su), tr.dst, (), 0)
                    )
                if not _dfa_is_universal(su):
                    nxt = tab.zero(s, a)
                    transitions.append(
                        SfTransition(
                            key,
                            SfTest(univ, a, dfa_complement(su)),
                            ("walkR", ti, nxt),
                            (),
                            1,
                        )
                    )
                    if nxt not in done_r:
                        frontier.append(nxt)
            if tab.step(s, RIGHT_MARK, tab.YB) in tab.d.finals:
                transitions.append(
                    SfTransition(key, SfTest(univ, RIGHT_MARK, univ), tr.dst, (), 0)
                )
        done_l = set()
        frontier = list(walk_l)
        while frontier:
            vec = frontier.pop()
            if vec in done_l:
                continue
            done_l.add(vec)
            key = ("walkL", ti, vec)
            for s1 in prefix_states:
                for a in base:
                    if tab.step(s1, a, tab.YB) in vec:
                        transitions.append(
                            SfTransition(
                                key, SfTest(prefix_test(s1), a, univ), tr.dst, (), 0
                            )
                        )
            # moving past a cell refines the vector by that letter only, so
            # group the continuation per letter
            for a in base:
                nvec = frozenset(u for u in tab.d.states if tab.zero(u, a) in vec)
                candidates = [s1 for s1 in prefix_states if tab.step(s1, a, tab.YB) in vec]
                others = [s1 for s1 in prefix_states if s1 not in candidates]
                for s1 in others:
                    transitions.append(
                        SfTransition(
                            key,
                            SfTest(prefix_test(s1), a, univ),
                            ("walkL", ti, nvec),
                            (),
                            -1,
                        )
                    )
                if others and nvec not in done_l:
                    frontier.append(nvec)
            if tab.step(tab.d.initial, LEFT_MARK, tab.YB) in vec:
                transitions.append(
                    SfTransition(key, SfTest(univ, LEFT_MARK, univ), tr.dst, (), 0)
                )

        states.extend(("walkR", ti, s) for s in done_r)
        states.extend(("walkL", ti, v) for v in done_l)

    return SfLookAroundTransducer(
        states=tuple(states),
        in_alphabet=base,
        out_alphabet=t.out_alphabet,
        transitions=tuple(transitions),
        initial=t.initial,
        finals=t.finals,
    )


# ---------------------------------------------------------------------------
# Star-free look-around -> plain two-way transducer


def dfa_reverse(d: Dfa) -> Dfa:
    back = {}
    for (q, a), r in d.delta.items():
        back.setdefault((r, a), []).append(q)

    def moves(q, a):
        return back.get((q, a), [])

    return determinize_nfa(d.alphabet, tuple(d.finals), frozenset({d.initial}), moves)


def _dfa_key(d: Dfa):
    dm = dfa_minimize(d)
    return (
        len(dm.states),
        dm.initial,
        tuple(sorted(dm.finals)),
        tuple(sorted(dm.delta.items(), key=lambda kv: (kv[0][0], str(kv[0][1])))),
    )


class _BitTable:
    """Distinct test languages in declaration order; constants folded away."""

    def __init__(self):
        self.entries = []  # (key, dfa, flavor)
        self.index = {}

    def register(self, d: Dfa, flavor: str):
        dm = dfa_minimize(d)
        if _dfa_is_universal(dm):
            return ("const", True)
        if _dfa_is_empty(dm):
            return ("const", False)
        key = (_dfa_key(dm), flavor)
        if key not in self.index:
            self.index[key] = len(self.entries)
            self.entries.append((key, dm, flavor))
        return ("bit", self.index[key])


def sf_la_to_plain(
    t: SfLookAroundTransducer, cap: int = 64
) -> TwoWayTransducer:
    """Eliminate look-around: annotator passes enrich each letter with the
    answers of every distinct test language, then a core machine resolves
    tests locally; the passes are folded in by composition.

    Endmarker tests need whole-word answers, which no strict bit carries;
    the core machine probes the adjacent cell, whose inclusive bits hold
    them, and steps back.
    """
    base = t.in_alphabet
    pre_bits = _BitTable()
    suf_bits = _BitTable()

    # (transition -> resolved test requirements)
    plan = []
    for tr in t.transitions:
        ltr = tr.test.letter
        if ltr == LEFT_MARK:
            pre_req = ("const", dfa_accepts(tr.test.prefix, ()))
            suf_req = suf_bits.register(tr.test.suffix, "incl")
            eps_suf = dfa_accepts(tr.test.suffix, ())
            plan.append((tr, pre_req, suf_req, eps_suf))
        elif ltr == RIGHT_MARK:
            suf_req = ("const", dfa_accepts(tr.test.suffix, ()))
            pre_req = pre_bits.register(tr.test.prefix, "incl")
            eps_pre = dfa_accepts(tr.test.prefix, ())
            plan.append((tr, pre_req, suf_req, eps_pre))
        else:
            pre_req = pre_bits.register(tr.test.prefix, "strict")
            suf_req = suf_bits.register(tr.test.suffix, "strict")
            plan.append((tr, pre_req, suf_req, None))

    n_pre, n_suf = len(pre_bits.entries), len(suf_bits.entries)
    if n_pre + n_suf > cap:
        raise TooManyTests(
            f"{n_pre + n_suf} distinct test languages exceed the cap of {cap}"
        )

    # --- left annotator: tracks all prefix DFAs, one bit per language
    pre_dfas = [d for (_, d, _) in pre_bits.entries]
    pre_flavors = [fl for (_, _, fl) in pre_bits.entries]

    def pre_bit_vector(sigma, a):
        out = []
        for i, d in enumerate(pre_dfas):
            s = sigma[i]
            if pre_flavors[i] == "strict":
                out.append(1 if s in d.finals else 0)
            else:
                out.append(1 if d.delta[(s, a)] in d.finals else 0)
        return tuple(out)

    sigma0 = tuple(d.initial for d in pre_dfas)
    sig_seen = {sigma0}
    sig_queue = deque([sigma0])
    left_rules = {}
    e1_letters = set()
    while sig_queue:
        sigma = sig_queue.popleft()
        for a in base:
            bits = pre_bit_vector(sigma, a)
            nxt = tuple(d.delta[(sigma[i], a)] for i, d in enumerate(pre_dfas))
            left_rules[(sigma, a)] = (nxt, ((a, bits),))
            e1_letters.add((a, bits))
            if nxt not in sig_seen:
                sig_seen.add(nxt)
                sig_queue.append(nxt)
    e1_alpha = Alphabet(tuple(sorted(e1_letters, key=lambda s: (str(s[0]), s[1]))))
    left_ann = make_seq(
        tuple(sig_seen), base, e1_alpha, sigma0, sig_seen, left_rules
    )

    # --- right annotator (runs on the reversed tape): reverse DFAs
    suf_rev = [dfa_reverse(d) for (_, d, _) in suf_bits.entries]
    suf_flavors = [fl for (_, _, fl) in suf_bits.entries]

    def suf_bit_vector(rho, a):
        out = []
        for i, d in enumerate(suf_rev):
            s = rho[i]
            if suf_flavors[i] == "strict":
                out.append(1 if s in d.finals else 0)
            else:
                out.append(1 if d.delta[(s, a)] in d.finals else 0)
        return tuple(out)

    rho0 = tuple(d.initial for d in suf_rev)
    rho_seen = {rho0}
    rho_queue = deque([rho0])
    right_rules = {}
    e2_letters = set()
    while rho_queue:
        rho = rho_queue.popleft()
        for (a, pbits) in e1_alpha:
            sbits = suf_bit_vector(rho, a)
            nxt = tuple(d.delta[(rho[i], a)] for i, d in enumerate(suf_rev))
            out_letter = (a, pbits + sbits)
            right_rules[(rho, (a, pbits))] = (nxt, (out_letter,))
            e2_letters.add(out_letter)
            if nxt not in rho_seen:
                rho_seen.add(nxt)
                rho_queue.append(nxt)
    e2_alpha = Alphabet(tuple(sorted(e2_letters, key=lambda s: (str(s[0]), s[1]))))
    right_ann = make_seq(
        tuple(rho_seen), e1_alpha, e2_alpha, rho0, rho_seen, right_rules
    )

    # --- core machine over fully enriched letters
    def pre_holds(req, bits):
        kind, payload = req
        return payload if kind == "const" else bits[payload] == 1

    def suf_holds(req, bits):
        kind, payload = req
        return payload if kind == "const" else bits[n_pre + payload] == 1

    core_rules = {}
    core_finals = set(t.finals)

    def core_emit(state, sym, target, out, move):
        if (state, sym) in core_rules:
            raise DirectionAmbiguity(
                f"tests of state {state!r} overlap on enriched letter {sym!r}"
            )
        core_rules[(state, sym)] = (target, out, move)

    by_src: dict = {}
    for item in plan:
        by_src.setdefault(item[0].src, []).append(item)

    probe_r = {}
    probe_l = {}
    ret_r = {}
    ret_l = {}
    for src, items in by_src.items():
        letter_items = [it for it in items if it[0].test.letter not in (LEFT_MARK, RIGHT_MARK)]
        lm_items = [it for it in items if it[0].test.letter == LEFT_MARK]
        rm_items = [it for it in items if it[0].test.letter == RIGHT_MARK]
        for e in e2_alpha:
            a, bits = e
            for (tr, pre_req, suf_req, _) in letter_items:
                if tr.test.letter != a:
                    continue
                if pre_holds(pre_req, bits) and suf_holds(suf_req, bits):
                    core_emit(src, e, tr.dst, tr.out, tr.move)
        if lm_items:
            probe = ("probe0", src)
            probe_r[src] = probe
            core_emit(src, LEFT_MARK, probe, (), 1)
            for e in e2_alpha:
                a, bits = e
                hits = [
                    it
                    for it in lm_items
                    if pre_holds(it[1], bits) and suf_holds(it[2], bits)
                ]
                if len(hits) > 1:
                    raise DirectionAmbiguity(
                        f"endmarker tests of {src!r} overlap on {e!r}"
                    )
                if hits:
                    (tr, _, _, _) = hits[0]
                    if tr.move == 1:
                        core_emit(probe, e, tr.dst, tr.out, 0)
                    else:  # move 0: return to the left endmarker
                        ret = ("ret0", tr.dst)
                        ret_r[tr.dst] = ret
                        core_emit(probe, e, ret, tr.out, -1)
            # empty input: the probe lands on the right endmarker
            eps_hits = [it for it in lm_items if pre_holds(it[1], ()) and it[3]]
            if len(eps_hits) > 1:
                raise DirectionAmbiguity(
                    f"endmarker tests of {src!r} overlap on the empty word"
                )
            if eps_hits:
                (tr, _, _, _) = eps_hits[0]
                if tr.move == 1:
                    core_emit(probe, RIGHT_MARK, tr.dst, tr.out, 0)
                else:
                    ret = ("ret0", tr.dst)
                    ret_r[tr.dst] = ret
                    core_emit(probe, RIGHT_MARK, ret, tr.out, -1)
        if rm_items:
            probe = ("probeN", src)
            probe_l[src] = probe
            core_emit(src, RIGHT_MARK, probe, (), -1)
            for e in e2_alpha:
                a, bits = e
                hits = [
                    it
                    for it in rm_items
                    if suf_holds(it[2], bits) and pre_holds(it[1], bits)
                ]
                if len(hits) > 1:
                    raise DirectionAmbiguity(
                        f"endmarker tests of {src!r} overlap on {e!r}"
                    )
                if hits:
                    (tr, _, _, _) = hits[0]
                    if tr.move == -1:
                        core_emit(probe, e, tr.dst, tr.out, 0)
                    else:  # move 0: return to the right endmarker
                        ret = ("retN", tr.dst)
                        ret_l[tr.dst] = ret
                        core_emit(probe, e, ret, tr.out, 1)
            eps_hits = [it for it in rm_items if suf_holds(it[2], ()) and it[3]]
            if len(eps_hits) > 1:
                raise DirectionAmbiguity(
                    f"endmarker tests of {src!r} overlap on the empty word"
                )
            if eps_hits:
                (tr, _, _, _) = eps_hits[0]
                if tr.move == -1:
                    core_emit(probe, LEFT_MARK, tr.dst, tr.out, 0)
                else:
                    ret = ("retN", tr.dst)
                    ret_l[tr.dst] = ret
                    core_emit(probe, LEFT_MARK, ret, tr.out, 1)

    for dst, ret in ret_r.items():
        if dst in probe_r:
            core_emit(ret, LEFT_MARK, probe_r[dst], (), 1)
    for dst, ret in ret_l.items():
        core_finals.discard(ret)
        if dst in t.finals:
            core_finals.add(ret)
        if dst in probe_l:
            core_emit(ret, RIGHT_MARK, probe_l[dst], (), -1)

    core_states = tuple(
        set(t.states)
        | set(probe_r.values())
        | set(probe_l.values())
        | set(ret_r.values())
        | set(ret_l.values())
    )
    core = make_twoway(
        core_states,
        e2_alpha,
        t.out_alphabet,
        t.initial,
        core_finals,
        {k: (v[0], v[1], v[2]) for k, v in core_rules.items()},
    )

    core = merge_equivalent(core)
    m1 = merge_equivalent(trim(compose_right_seq_2w(right_ann, core)))
    m2 = merge_equivalent(trim(compose_seq_2w(left_ann, m1)))
    return trim(m2)


def fot_to_twoway(
    T: FoTransduction,
    registry: Optional[MonoidRegistry] = None,
    bound: int = 4,
    cap: int = 64,
) -> TwoWayTransducer:
    """Full chain: transduction -> FO look-around -> star-free look-around
    -> plain two-way transducer."""
    la = fot_to_fo_lookaround(T)
    sf = fo_la_to_sf_la(la, registry, bound)
    return sf_la_to_plain(sf, cap)
