"""Deterministic two-way transducers: simulation, behaviors, normalization.

The tape for input ``w`` is ``^ w $`` with positions ``0 .. len(w)+1``.  A
run starts at position 0 in the initial state and accepts as soon as it
reaches the right endmarker in a final state; the machine stops there even
if a transition on ``$`` is defined, which keeps acceptance decidable
without look-ahead.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .words import (
    Alphabet,
    LEFT_MARK,
    RIGHT_MARK,
    SymbolNotInAlphabet,
    Word,
    as_word,
)


class TwoWayError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TwoWayTransducer:
    states: tuple
    in_alphabet: Alphabet
    out_alphabet: Alphabet
    initial: object
    finals: frozenset
    step: dict  # (state, symbol) -> (state, move)
    out: dict  # (state, symbol) -> output word

    def __post_init__(self):
        if set(self.step) != set(self.out):
            raise TwoWayError("step and produce must share their domain")
        if self.initial not in self.states:
            raise TwoWayError("initial state missing from state set")
        if not self.finals <= set(self.states):
            raise TwoWayError("final states must be a subset of states")
        for (q, a), (r, move) in self.step.items():
            if move not in (-1, 0, 1):
                raise TwoWayError(f"illegal move {move!r}")
            if a == LEFT_MARK and move == -1:
                raise TwoWayError("move on left endmarker must be 0 or +1")
            if a == RIGHT_MARK and move == 1:
                raise TwoWayError("move on right endmarker must be -1 or 0")

    def state_index(self, q) -> int:
        return self.states.index(q)


def make_twoway(states, in_alphabet, out_alphabet, initial, finals, rules) -> TwoWayTransducer:
    """``rules`` maps (state, symbol) -> (next_state, output, move)."""
    step = {k: (v[0], v[2]) for k, v in rules.items()}
    out = {k: as_word(v[1]) for k, v in rules.items()}
    return TwoWayTransducer(
        tuple(states),
        in_alphabet,
        out_alphabet,
        initial,
        frozenset(finals),
        step,
        out,
    )


@dataclass(frozen=True)
class Run:
    """Configurations of a run and the production of each step.

    ``configs[i+1]`` follows ``configs[i]`` by one transition whose output is
    ``outputs[i]``; positions index the marked tape ``^ w $``.
    """

    word: Word
    configs: tuple  # of (state, position)
    outputs: tuple  # of output words, len == len(configs) - 1
    accepted: bool


@dataclass(frozen=True)
class SimResult:
    output: Optional[Word]
    run: Run
    reason: Optional[str] = None  # None | "blocked" | "loop" | "rejected"

    @property
    def defined(self) -> bool:
        return self.output is not None


def tape_symbol(w: Word, pos: int):
    if pos == 0:
        return LEFT_MARK
    if pos == len(w) + 1:
        return RIGHT_MARK
    return w[pos - 1]


def simulate(t: TwoWayTransducer, w, max_steps: Optional[int] = None) -> SimResult:
    """Run ``t`` on ``w``; loop detection by configuration repetition."""
    w = t.in_alphabet.word(as_word(w))
    last = len(w) + 1
    q, pos = t.initial, 0
    configs = [(q, pos)]
    outputs = []
    seen = {(q, pos)}
    limit = max_steps if max_steps is not None else len(t.states) * (len(w) + 2) + 1
    while True:
        if pos == last and q in t.finals:
            run = Run(w, tuple(configs), tuple(outputs), True)
            return SimResult(tuple(s for o in outputs for s in o), run)
        a = tape_symbol(w, pos)
        if (q, a) not in t.step:
            run = Run(w, tuple(configs), tuple(outputs), False)
            reason = "rejected" if pos == last else "blocked"
            return SimResult(None, run, reason)
        outputs.append(t.out[(q, a)])
        q, move = t.step[(q, a)]
        pos += move
        configs.append((q, pos))
        if (q, pos) in seen or len(configs) > limit + 1:
            run = Run(w, tuple(configs), tuple(outputs), False)
            return SimResult(None, run, "loop")
        seen.add((q, pos))


def trace_table(result: SimResult) -> str:
    """Visit-layer table of a run: row k holds the k-th visit to each cell."""
    w = result.run.word
    cells = [LEFT_MARK] + [str(s) for s in w] + [RIGHT_MARK]
    visits = [[] for _ in cells]
    for (q, pos) in result.run.configs:
        visits[pos].append(str(q))
    depth = max(len(v) for v in visits)
    widths = [max(len(c), max((len(s) for s in visits[i]), default=1)) for i, c in enumerate(cells)]
    lines = ["  ".join(c.rjust(widths[i]) for i, c in enumerate(cells))]
    for r in range(depth):
        row = [(visits[i][r] if r < len(visits[i]) else "").rjust(widths[i]) for i in range(len(cells))]
        lines.append("  ".join(row))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Behaviors of a factor


def behaviors(t: TwoWayTransducer, w):
    """The four behavior functions of ``w`` computed by direct simulation.

    Runs are confined to the factor: they start at its first (last) position
    and end when the head leaves on either side.  Looping or blocking starts
    contribute no pair.  For the empty factor the crossing behaviors are the
    identity and the returning ones are empty.
    """
    from .monoid import BehaviorProfile  # local import to avoid a cycle

    w = as_word(w)
    for s in w:
        if s in (LEFT_MARK, RIGHT_MARK):
            raise TwoWayError("behaviors are defined for endmarker-free factors")
        if s not in t.in_alphabet:
            raise SymbolNotInAlphabet(f"symbol {s!r} not in alphabet")
    order = t.states
    if not w:
        ident = tuple((q, q) for q in order)
        return BehaviorProfile(order, (), ident, ident, ())
    ll, lr, rl, rr = [], [], [], []
    for entry_right in (False, True):
        start_pos = len(w) - 1 if entry_right else 0
        for q0 in order:
            q, pos = q0, start_pos
            seen = set()
            while 0 <= pos < len(w):
                if (q, pos) in seen:
                    q = None  # looping run
                    break
                seen.add((q, pos))
                key = (q, w[pos])
                if key not in t.step:
                    q = None  # blocked run
                    break
                q, move = t.step[key]
                pos += move
            if q is None:
                continue
            if pos < 0:
                (rl if entry_right else ll).append((q0, q))
            else:
                (rr if entry_right else lr).append((q0, q))
    return BehaviorProfile.from_pairs(order, ll, lr, rl, rr)


# ---------------------------------------------------------------------------
# Context paths


@dataclass(frozen=True)
class ContextPath:
    pairs: tuple  # of (state, renamed index), ranks starting at 1


def context_path(run_or_configs, positions) -> ContextPath:
    """Project a run onto ``positions`` (strictly increasing), renaming by rank."""
    configs = run_or_configs.configs if isinstance(run_or_configs, Run) else tuple(run_or_configs)
    index = list(positions)
    if any(index[i] >= index[i + 1] for i in range(len(index) - 1)):
        raise ValueError("positions must be strictly increasing")
    rank = {p: i + 1 for i, p in enumerate(index)}
    pairs = tuple((q, rank[p]) for (q, p) in configs if p in rank)
    return ContextPath(pairs)


def pumped_context_path(t: TwoWayTransducer, v, u, w, n: int) -> Optional[ContextPath]:
    """Context path of ``v u^n w`` on the positions of ``v`` and ``w``.

    Returns None when the run does not halt (loop or block keeps the trace
    incomparable).
    """
    v, u, w = as_word(v), as_word(u), as_word(w)
    word = v + u * n + w
    res = simulate(t, word)
    if res.reason == "loop":
        return None
    left = [i + 1 for i in range(len(v))]
    right = [len(v) + n * len(u) + i + 1 for i in range(len(w))]
    return context_path(res.run, left + right)


# ---------------------------------------------------------------------------
# Normalization and mirroring


def is_normalized(t: TwoWayTransducer) -> bool:
    return all(len(v) <= 1 for v in t.out.values())


def normalize(t: TwoWayTransducer) -> TwoWayTransducer:
    """Split multi-letter productions into chains of single-letter emissions.

    Emission states stay on the current cell (move 0) until the last letter,
    then perform the original move.  Idempotent on already-normalized input.
    """
    if is_normalized(t):
        return t
    rules = {}
    emit_states = {}

    def emit_state(rest, target, move):
        key = ("emit", rest, target, move)
        emit_states[key] = True
        return key

    for (q, a), (r, move) in t.step.items():
        v = t.out[(q, a)]
        if len(v) <= 1:
            rules[(q, a)] = (r, v, move)
        else:
            rules[(q, a)] = (emit_state(v[1:], r, move), (v[0],), 0)
    # emission chains read whatever symbol is under the head; endmarker rows
    # are defined only when the final move is legal there (a chain can sit on
    # an endmarker only if its source transition fired on that endmarker)
    symbols = tuple(t.in_alphabet) + (LEFT_MARK, RIGHT_MARK)
    frontier = list(emit_states)
    while frontier:
        key = frontier.pop()
        _, rest, target, move = key
        for a in symbols:
            if a == LEFT_MARK and move == -1:
                continue
            if a == RIGHT_MARK and move == 1:
                continue
            if len(rest) == 1:
                rules[(key, a)] = (target, rest, move)
            else:
                nxt = ("emit", rest[1:], target, move)
                if nxt not in emit_states:
                    emit_states[nxt] = True
                    frontier.append(nxt)
                rules[(key, a)] = (nxt, rest[:1], 0)
    states = tuple(t.states) + tuple(emit_states)
    return make_twoway(states, t.in_alphabet, t.out_alphabet, t.initial, t.finals, rules)


def mirror(t: TwoWayTransducer) -> TwoWayTransducer:
    """Machine computing ``w -> t(reverse(w))`` with the mirrored run.

    A seek phase walks to the right endmarker (the image of the original left
    endmarker), the simulation runs with moves negated, and a drain phase
    walks back to the right endmarker to accept.
    """
    seek, drain = ("seek",), ("drain",)
    sim = {q: ("sim", q) for q in t.states}
    rules = {}
    rules[(seek, LEFT_MARK)] = (seek, (), 1)
    for a in t.in_alphabet:
        rules[(seek, a)] = (seek, (), 1)
        rules[(drain, a)] = (drain, (), 1)
    rules[(drain, LEFT_MARK)] = (drain, (), 1)
    # arriving at $ in seek mode: fire the original transition on ^
    if (t.initial, LEFT_MARK) in t.step:
        (r, move) = t.step[(t.initial, LEFT_MARK)]
        rules[(seek, RIGHT_MARK)] = (sim[r], t.out[(t.initial, LEFT_MARK)], -move)
    for q in t.states:
        for a in t.in_alphabet:
            if (q, a) in t.step:
                r, move = t.step[(q, a)]
                rules[(sim[q], a)] = (sim[r], t.out[(q, a)], -move)
        # mirrored right endmarker = original left endmarker
        if (q, LEFT_MARK) in t.step:
            r, move = t.step[(q, LEFT_MARK)]
            rules[(sim[q], RIGHT_MARK)] = (sim[r], t.out[(q, LEFT_MARK)], -move)
        # mirrored left endmarker = original right endmarker
        if q in t.finals:
            rules[(sim[q], LEFT_MARK)] = (drain, (), 1)
        elif (q, RIGHT_MARK) in t.step:
            r, move = t.step[(q, RIGHT_MARK)]
            rules[(sim[q], LEFT_MARK)] = (sim[r], t.out[(q, RIGHT_MARK)], -move)
    states = (seek, drain) + tuple(sim.values())
    return make_twoway(
        states, t.in_alphabet, t.out_alphabet, seek, {drain}, rules
    )


def trim(t: TwoWayTransducer) -> TwoWayTransducer:
    """Restrict to states syntactically reachable from the initial state."""
    reach = {t.initial}
    frontier = [t.initial]
    while frontier:
        q = frontier.pop()
        for (p, a), (r, move) in t.step.items():
            if p == q and r not in reach:
                reach.add(r)
                frontier.append(r)
    if len(reach) == len(t.states):
        return t
    states = tuple(q for q in t.states if q in reach)
    rules = {
        (q, a): (r, t.out[(q, a)], move)
        for (q, a), (r, move) in t.step.items()
        if q in reach
    }
    return make_twoway(
        states, t.in_alphabet, t.out_alphabet, t.initial, t.finals & reach, rules
    )


def merge_equivalent(t: TwoWayTransducer) -> TwoWayTransducer:
    """Quotient by the coarsest congruence on states (same finality and,
    blockwise, the same outgoing rows).  Preserves runs exactly."""
    symbols = tuple(t.in_alphabet) + (LEFT_MARK, RIGHT_MARK)
    block = {q: (q in t.finals) for q in t.states}
    nblocks = len(set(block.values()))
    while True:
        sigs = {}
        new = {}
        for q in t.states:
            row = []
            for a in symbols:
                if (q, a) in t.step:
                    r, move = t.step[(q, a)]
                    row.append((block[r], t.out[(q, a)], move))
                else:
                    row.append(None)
            sig = (block[q], tuple(row))
            new[q] = sigs.setdefault(sig, len(sigs))
        block = new
        if len(sigs) == nblocks:
            break
        nblocks = len(sigs)
    if nblocks == len(t.states):
        return t
    rep = {}
    for q in t.states:
        rep.setdefault(block[q], q)
    rename = {q: rep[block[q]] for q in t.states}
    rules = {}
    for (q, a), (r, move) in t.step.items():
        if rename[q] == q:
            rules[(q, a)] = (rename[r], t.out[(q, a)], move)
    states = tuple(rep.values())
    finals = {rename[f] for f in t.finals}
    return make_twoway(
        states, t.in_alphabet, t.out_alphabet, rename[t.initial], finals, rules
    )
