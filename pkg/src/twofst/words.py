"""Alphabets, words, deterministic automata and sequential transducers.

Words are tuples of symbols.  A symbol is either a short printable string
(base alphabets) or a pair ``(base, bits)`` with ``bits`` a tuple of 0/1
(product alphabets used for marked words and enriched tapes).  The helper
:func:`as_word` converts a plain string into a word over one-character
symbols, which keeps fixtures readable.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Optional

LEFT_MARK = "^"
RIGHT_MARK = "$"
MARKS = (LEFT_MARK, RIGHT_MARK)

Symbol = object
Word = tuple


class AlphabetError(ValueError):
    pass


class SymbolNotInAlphabet(ValueError):
    pass


def as_word(w) -> Word:
    """Coerce ``w`` into a word (tuple of symbols)."""
    if isinstance(w, tuple):
        return w
    if isinstance(w, str):
        return tuple(w)
    if isinstance(w, (list, Iterable)):
        return tuple(w)
    raise TypeError(f"cannot interpret {w!r} as a word")


def show_symbol(s: Symbol) -> str:
    if isinstance(s, tuple) and len(s) == 2 and isinstance(s[1], tuple):
        base, bits = s
        return f"{base}:{''.join(str(b) for b in bits)}"
    return str(s)


def show_word(w: Optional[Word]) -> str:
    if w is None:
        return "undefined"
    parts = [show_symbol(s) for s in w]
    if all(len(p) == 1 for p in parts):
        return "".join(parts)
    return " ".join(parts) if parts else ""


def parse_symbol(text: str) -> Symbol:
    """Inverse of :func:`show_symbol` for serialized artifacts."""
    if ":" in text:
        base, bits = text.rsplit(":", 1)
        if bits and all(c in "01" for c in bits):
            return (base, tuple(int(c) for c in bits))
    return text


@dataclass(frozen=True)
class Alphabet:
    """A finite ordered set of symbols; endmarkers are reserved."""

    symbols: tuple

    def __post_init__(self):
        if not self.symbols:
            raise AlphabetError("alphabet must be non-empty")
        if len(set(self.symbols)) != len(self.symbols):
            raise AlphabetError("duplicate symbols in alphabet")
        for m in MARKS:
            if m in self.symbols:
                raise AlphabetError(f"endmarker {m!r} cannot be an alphabet symbol")

    def __contains__(self, s) -> bool:
        return s in self.symbols

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def word(self, text) -> Word:
        w = as_word(text)
        for s in w:
            if s not in self.symbols:
                raise SymbolNotInAlphabet(f"symbol {s!r} not in alphabet")
        return w

    def words_upto(self, max_len: int, min_len: int = 0):
        """All words of length ``min_len..max_len`` in length-lexicographic order."""
        for n in range(min_len, max_len + 1):
            for tup in product(self.symbols, repeat=n):
                yield tup


def alphabet(symbols) -> Alphabet:
    return Alphabet(tuple(symbols))


def marked_alphabet(base: Alphabet, width: int, with_marks: bool = False) -> Alphabet:
    """Product alphabet ``base x {0,1}^width``; bit order is declaration order.

    With ``with_marks`` the endmarker tokens are included as carriers so that
    formulas over marked tapes can place variables on the endmarkers.  The
    marks then appear inside pairs, never as bare symbols, so the reserved
    token invariant still holds.
    """
    bases = tuple(base.symbols) + (MARKS if with_marks else ())
    if width == 0:
        syms = tuple((b, ()) for b in bases)
    else:
        syms = tuple((b, bits) for b in bases for bits in product((0, 1), repeat=width))
    return Alphabet(syms)


# ---------------------------------------------------------------------------
# Deterministic finite automata


@dataclass(frozen=True, eq=False)
class Dfa:
    """Complete DFA; ``delta`` is total over states x alphabet."""

    states: tuple
    alphabet: Alphabet
    initial: object
    finals: frozenset
    delta: dict  # (state, symbol) -> state

    def __post_init__(self):
        if self.initial not in self.states:
            raise ValueError("initial state missing from state set")
        if not self.finals <= set(self.states):
            raise ValueError("final states must be a subset of states")
        for q in self.states:
            for a in self.alphabet:
                if (q, a) not in self.delta:
                    raise ValueError(f"missing transition ({q!r}, {a!r})")

    def step(self, q, a):
        return self.delta[(q, a)]


def make_dfa(states, alphabet_, initial, finals, delta) -> Dfa:
    return Dfa(tuple(states), alphabet_, initial, frozenset(finals), dict(delta))


def dfa_accepts(d: Dfa, w) -> bool:
    q = d.initial
    for a in as_word(w):
        if a not in d.alphabet:
            raise SymbolNotInAlphabet(f"symbol {a!r} not in alphabet")
        q = d.delta[(q, a)]
    return q in d.finals


def dfa_language_upto(d: Dfa, max_len: int, min_len: int = 0):
    return [w for w in d.alphabet.words_upto(max_len, min_len) if dfa_accepts(d, w)]


def _reachable(d: Dfa):
    seen = {d.initial}
    queue = deque([d.initial])
    order = [d.initial]
    while queue:
        q = queue.popleft()
        for a in d.alphabet:
            r = d.delta[(q, a)]
            if r not in seen:
                seen.add(r)
                order.append(r)
                queue.append(r)
    return order


def dfa_minimize(d: Dfa) -> Dfa:
    """Moore partition refinement over the reachable part, then BFS renumber."""
    states = _reachable(d)
    idx = {q: i for i, q in enumerate(states)}
    finals = set(d.finals)
    block = [1 if q in finals else 0 for q in states]
    nblocks = len(set(block))
    while True:
        sigs = {}
        newblock = [0] * len(states)
        for i, q in enumerate(states):
            sig = (block[i],) + tuple(block[idx[d.delta[(q, a)]]] for a in d.alphabet)
            newblock[i] = sigs.setdefault(sig, len(sigs))
        block = newblock
        if len(sigs) == nblocks:
            break
        nblocks = len(sigs)
    accepting_blocks = {block[i] for i, q in enumerate(states) if q in finals}
    # canonical BFS order over blocks
    b_delta = {}
    for i, q in enumerate(states):
        for j, a in enumerate(d.alphabet):
            b_delta[(block[i], a)] = block[idx[d.delta[(q, a)]]]
    start = block[idx[d.initial]]
    rename = {start: 0}
    order = deque([start])
    while order:
        b = order.popleft()
        for a in d.alphabet:
            c = b_delta[(b, a)]
            if c not in rename:
                rename[c] = len(rename)
                order.append(c)
    n = len(rename)
    delta = {
        (rename[b], a): rename[b_delta[(b, a)]]
        for b in rename
        for a in d.alphabet
    }
    finals2 = frozenset(rename[b] for b in accepting_blocks if b in rename)
    return Dfa(tuple(range(n)), d.alphabet, 0, finals2, delta)


def dfa_same_language(d1: Dfa, d2: Dfa) -> bool:
    if d1.alphabet != d2.alphabet:
        return False
    m1, m2 = dfa_minimize(d1), dfa_minimize(d2)
    return m1.states == m2.states and m1.finals == m2.finals and m1.delta == m2.delta


def _product(d1: Dfa, d2: Dfa, keep) -> Dfa:
    if d1.alphabet != d2.alphabet:
        raise AlphabetError("alphabet mismatch")
    init = (d1.initial, d2.initial)
    seen = {init}
    queue = deque([init])
    states = [init]
    delta = {}
    while queue:
        (p, q) = queue.popleft()
        for a in d1.alphabet:
            r = (d1.delta[(p, a)], d2.delta[(q, a)])
            delta[((p, q), a)] = r
            if r not in seen:
                seen.add(r)
                states.append(r)
                queue.append(r)
    finals = frozenset(s for s in states if keep(s[0] in d1.finals, s[1] in d2.finals))
    return dfa_minimize(Dfa(tuple(states), d1.alphabet, init, finals, delta))


def dfa_intersect(d1: Dfa, d2: Dfa) -> Dfa:
    return _product(d1, d2, lambda x, y: x and y)


def dfa_union(d1: Dfa, d2: Dfa) -> Dfa:
    return _product(d1, d2, lambda x, y: x or y)


def dfa_complement(d: Dfa) -> Dfa:
    finals = frozenset(q for q in d.states if q not in d.finals)
    return dfa_minimize(Dfa(d.states, d.alphabet, d.initial, finals, dict(d.delta)))


def determinize_nfa(alphabet_: Alphabet, initials, finals, moves) -> Dfa:
    """Subset construction.  ``moves(state, symbol)`` yields successor states."""
    init = frozenset(initials)
    seen = {init}
    queue = deque([init])
    states = [init]
    delta = {}
    final_set = set()
    while queue:
        s = queue.popleft()
        if s & finals:
            final_set.add(s)
        for a in alphabet_:
            t = frozenset(r for q in s for r in moves(q, a))
            delta[(s, a)] = t
            if t not in seen:
                seen.add(t)
                states.append(t)
                queue.append(t)
    return dfa_minimize(Dfa(tuple(states), alphabet_, init, frozenset(final_set), delta))


def dfa_project_bit(d: Dfa, bit: int) -> Dfa:
    """Erase bit ``bit`` from a product-alphabet DFA (existential projection)."""
    base_syms = []
    for s in d.alphabet:
        if not (isinstance(s, tuple) and len(s) == 2 and isinstance(s[1], tuple)):
            raise AlphabetError("project-bit requires a product alphabet")
        b, bits = s
        if bit >= len(bits):
            raise AlphabetError("bit index out of range")
        t = (b, bits[:bit] + bits[bit + 1 :])
        if t not in base_syms:
            base_syms.append(t)
    target = Alphabet(tuple(base_syms))
    lift = {}
    for s in d.alphabet:
        b, bits = s
        lift.setdefault((b, bits[:bit] + bits[bit + 1 :]), []).append(s)

    def moves(q, a):
        return [d.delta[(q, s)] for s in lift[a]]

    return determinize_nfa(target, [d.initial], frozenset(d.finals), moves)


def dfa_combine(kind: str, *operands) -> Dfa:
    """Set-level algebra on DFAs; ``project-bit`` determinizes internally."""
    if kind == "intersect":
        return dfa_intersect(*operands)
    if kind == "union":
        return dfa_union(*operands)
    if kind == "complement":
        return dfa_complement(*operands)
    if kind == "project-bit":
        return dfa_project_bit(*operands)
    if kind == "determinize":
        return dfa_minimize(*operands)
    raise ValueError(f"unknown combine kind {kind!r}")


def dfa_universal(alphabet_: Alphabet, accept: bool = True) -> Dfa:
    delta = {(0, a): 0 for a in alphabet_}
    return Dfa((0,), alphabet_, 0, frozenset({0} if accept else set()), delta)


def dfa_only_word(alphabet_: Alphabet, w) -> Dfa:
    """DFA accepting exactly the single word ``w``."""
    w = as_word(w)
    n = len(w)
    sink = n + 1
    states = tuple(range(n + 2))
    delta = {}
    for i in range(n + 2):
        for a in alphabet_:
            if i < n and a == w[i]:
                delta[(i, a)] = i + 1
            else:
                delta[(i, a)] = sink
    return dfa_minimize(Dfa(states, alphabet_, 0, frozenset({n}), delta))


# ---------------------------------------------------------------------------
# Counter-freeness


@dataclass(frozen=True)
class CounterFreeReport:
    aperiodic: bool
    index: Optional[int]
    witness: Optional[tuple] = None  # a shortest word whose action has a period


def _function_monoid(states: tuple, actions: dict):
    """Closure of letter actions (tuples of state indices) under composition.

    Returns (elements, rep) where rep maps each element to a shortest word.
    """
    n = len(states)
    identity = tuple(range(n))
    elements = {identity: ()}
    queue = deque([identity])
    gens = list(actions.items())
    while queue:
        f = queue.popleft()
        wf = elements[f]
        for a, g in gens:
            h = tuple(g[i] for i in f)  # first f (left factor), then g
            if h not in elements:
                elements[h] = wf + (a,)
                queue.append(h)
    return elements


def _aperiodicity_index(elements) -> tuple:
    """Least global n with f^n = f^(n+1), or a witness element with a period.

    Convention: f^0 is the identity, so the trivial monoid has index 0.
    """
    n = len(next(iter(elements)))
    identity = tuple(range(n))
    best = 0
    for f in elements:
        powers = [identity]
        seen = {identity: 0}
        cur = identity
        while True:
            cur = tuple(f[i] for i in cur)
            if cur in seen:
                start = seen[cur]
                period = len(powers) - start
                if period != 1:
                    return None, f
                best = max(best, start)
                break
            seen[cur] = len(powers)
            powers.append(cur)
    return best, None


def dfa_is_counter_free(d: Dfa) -> CounterFreeReport:
    """Decide aperiodicity of the transition monoid of ``d``."""
    states = tuple(d.states)
    idx = {q: i for i, q in enumerate(states)}
    actions = {
        a: tuple(idx[d.delta[(q, a)]] for q in states) for a in d.alphabet
    }
    elements = _function_monoid(states, actions)
    index, witness = _aperiodicity_index(elements)
    if witness is not None:
        return CounterFreeReport(False, None, elements[witness])
    return CounterFreeReport(True, index, None)


# ---------------------------------------------------------------------------
# Sequential (one-way deterministic) transducers


@dataclass(frozen=True, eq=False)
class SequentialTransducer:
    """Deterministic one-way transducer with partial step/produce maps."""

    states: tuple
    in_alphabet: Alphabet
    out_alphabet: Alphabet
    initial: object
    finals: frozenset
    step: dict  # (state, symbol) -> state
    out: dict  # (state, symbol) -> output word (tuple)

    def __post_init__(self):
        if set(self.step) != set(self.out):
            raise ValueError("step and produce must share their domain")
        if self.initial not in self.states:
            raise ValueError("initial state missing from state set")

    def max_production(self) -> int:
        return max((len(v) for v in self.out.values()), default=0)


def make_seq(states, in_alphabet, out_alphabet, initial, finals, rules) -> SequentialTransducer:
    """``rules`` maps (state, symbol) -> (next_state, output)."""
    step = {k: v[0] for k, v in rules.items()}
    out = {k: as_word(v[1]) for k, v in rules.items()}
    return SequentialTransducer(
        tuple(states), in_alphabet, out_alphabet, initial, frozenset(finals), step, out
    )


def seq_run(t: SequentialTransducer, w) -> Optional[Word]:
    """Output of the unique run, or None when the run blocks or ends non-final."""
    q = t.initial
    pieces = []
    for a in as_word(w):
        if a not in t.in_alphabet:
            raise SymbolNotInAlphabet(f"symbol {a!r} not in alphabet")
        if (q, a) not in t.step:
            return None
        pieces.append(t.out[(q, a)])
        q = t.step[(q, a)]
    if q not in t.finals:
        return None
    return tuple(s for piece in pieces for s in piece)


def seq_identity(alphabet_: Alphabet) -> SequentialTransducer:
    rules = {(0, a): (0, (a,)) for a in alphabet_}
    return make_seq((0,), alphabet_, alphabet_, 0, {0}, rules)
