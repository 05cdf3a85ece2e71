"""FO[<] formulas over words: letter and order atoms plus monoid-class atoms.

Two evaluation contexts exist.  The plain context quantifies over the
positions ``1..|w|`` of the bare word; the marked context evaluates on the
endmarked tape ``^ w $`` with positions ``0..|w|+1`` and lets letter atoms
test the endmarkers.  Class atoms always measure the real letters only.

Class atoms are backed by a registry of transition monoids that were
certified aperiodic at registration; this is the star-freeness certificate
that replaces explicit class-formula synthesis.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .words import (
    Alphabet,
    Dfa,
    LEFT_MARK,
    RIGHT_MARK,
    as_word,
    dfa_combine,
    dfa_intersect,
    dfa_is_counter_free,
    dfa_minimize,
    dfa_union,
    dfa_complement,
    dfa_universal,
    marked_alphabet,
)
from .monoid import BehaviorProfile, TransitionMonoid, is_aperiodic


class UnboundVariable(ValueError):
    pass


class MalformedClassAtom(ValueError):
    pass


class NonAperiodicCompilation(RuntimeError):
    pass


class RegistryError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Syntax


@dataclass(frozen=True)
class Formula:
    def __and__(self, other):
        return conj([self, other])

    def __or__(self, other):
        return disj([self, other])

    def __invert__(self):
        return neg(self)


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class Letter(Formula):
    symbol: object
    var: str


@dataclass(frozen=True)
class Le(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class FactorClass(Formula):
    monoid: str
    element: str
    left: str
    right: str


@dataclass(frozen=True)
class PrefixClass(Formula):
    monoid: str
    element: str
    var: str


@dataclass(frozen=True)
class SuffixClass(Formula):
    monoid: str
    element: str
    var: str


@dataclass(frozen=True)
class And(Formula):
    args: tuple


@dataclass(frozen=True)
class Or(Formula):
    args: tuple


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


FALSE = Not(TrueF())


def conj(args) -> Formula:
    flat = []
    for a in args:
        if isinstance(a, TrueF):
            continue
        if a == FALSE:
            return FALSE
        if isinstance(a, And):
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return TrueF()
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(args) -> Formula:
    flat = []
    for a in args:
        if a == FALSE:
            continue
        if isinstance(a, TrueF):
            return TrueF()
        if isinstance(a, Or):
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def neg(a: Formula) -> Formula:
    if isinstance(a, Not):
        return a.arg
    if isinstance(a, TrueF):
        return FALSE
    return Not(a)


def implies(a: Formula, b: Formula) -> Formula:
    return disj([neg(a), b])


def var_eq(x: str, y: str) -> Formula:
    return conj([Le(x, y), Le(y, x)])


def var_lt(x: str, y: str) -> Formula:
    return conj([Le(x, y), neg(Le(y, x))])


def is_letter_on(alphabet: Alphabet, x: str) -> Formula:
    """x carries a real letter; relativizes quantifiers on marked tapes."""
    return disj([Letter(a, x) for a in alphabet])


def linear_graph_sentence() -> Formula:
    """Nonempty total order: a first node, a last node, all pairs comparable."""
    return conj(
        [
            Exists("u0", Forall("v0", Le("u0", "v0"))),
            Exists("u0", Forall("v0", Le("v0", "u0"))),
            Forall("u0", Forall("v0", disj([Le("u0", "v0"), Le("v0", "u0")]))),
        ]
    )


def free_vars(phi: Formula) -> frozenset:
    if isinstance(phi, (TrueF,)):
        return frozenset()
    if isinstance(phi, Letter):
        return frozenset({phi.var})
    if isinstance(phi, Le):
        return frozenset({phi.left, phi.right})
    if isinstance(phi, FactorClass):
        return frozenset({phi.left, phi.right})
    if isinstance(phi, (PrefixClass, SuffixClass)):
        return frozenset({phi.var})
    if isinstance(phi, (And, Or)):
        out = frozenset()
        for a in phi.args:
            out |= free_vars(a)
        return out
    if isinstance(phi, Not):
        return free_vars(phi.arg)
    if isinstance(phi, (Exists, Forall)):
        return free_vars(phi.body) - {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def _all_vars(phi: Formula) -> frozenset:
    if isinstance(phi, (Exists, Forall)):
        return _all_vars(phi.body) | {phi.var}
    if isinstance(phi, (And, Or)):
        out = frozenset()
        for a in phi.args:
            out |= _all_vars(a)
        return out
    if isinstance(phi, Not):
        return _all_vars(phi.arg)
    return free_vars(phi)


def subst_var(phi: Formula, old: str, new: str) -> Formula:
    """Replace free occurrences of ``old`` by ``new``, avoiding capture."""
    if old == new:
        return phi
    if isinstance(phi, TrueF):
        return phi
    if isinstance(phi, Letter):
        return Letter(phi.symbol, new if phi.var == old else phi.var)
    if isinstance(phi, Le):
        return Le(
            new if phi.left == old else phi.left,
            new if phi.right == old else phi.right,
        )
    if isinstance(phi, FactorClass):
        return FactorClass(
            phi.monoid,
            phi.element,
            new if phi.left == old else phi.left,
            new if phi.right == old else phi.right,
        )
    if isinstance(phi, PrefixClass):
        return PrefixClass(phi.monoid, phi.element, new if phi.var == old else phi.var)
    if isinstance(phi, SuffixClass):
        return SuffixClass(phi.monoid, phi.element, new if phi.var == old else phi.var)
    if isinstance(phi, And):
        return And(tuple(subst_var(a, old, new) for a in phi.args))
    if isinstance(phi, Or):
        return Or(tuple(subst_var(a, old, new) for a in phi.args))
    if isinstance(phi, Not):
        return Not(subst_var(phi.arg, old, new))
    if isinstance(phi, (Exists, Forall)):
        cls = type(phi)
        if phi.var == old:
            return phi
        if phi.var == new:
            fresh = _fresh_var(phi.var, _all_vars(phi) | {old, new})
            body = subst_var(phi.body, phi.var, fresh)
            return cls(fresh, subst_var(body, old, new))
        return cls(phi.var, subst_var(phi.body, old, new))
    raise TypeError(f"not a formula: {phi!r}")


def _fresh_var(base: str, taken: frozenset) -> str:
    i = 1
    while f"{base}_{i}" in taken:
        i += 1
    return f"{base}_{i}"


# ---------------------------------------------------------------------------
# Monoid registry


class MonoidRegistry:
    """Write-once registry of aperiodicity-certified monoids."""

    def __init__(self):
        self._monoids: dict = {}
        self._by_id: dict = {}
        self._reports: dict = {}

    def register(self, name: str, monoid: TransitionMonoid):
        if name in self._monoids:
            if self._monoids[name] is monoid:
                return self._reports[name]
            raise RegistryError(f"monoid name {name!r} already registered")
        report = is_aperiodic(monoid)
        if not report.aperiodic:
            raise RegistryError(
                f"monoid {name!r} is not aperiodic; class atoms would not be star-free"
            )
        self._monoids[name] = monoid
        self._by_id[name] = {monoid.element_id(e): e for e in monoid.elements}
        self._reports[name] = report
        return report

    def monoid(self, name: str) -> TransitionMonoid:
        if name not in self._monoids:
            raise RegistryError(f"unknown monoid {name!r}")
        return self._monoids[name]

    def element(self, name: str, elem_id: str) -> BehaviorProfile:
        table = self._by_id.get(name)
        if table is None:
            raise RegistryError(f"unknown monoid {name!r}")
        if elem_id not in table:
            raise RegistryError(f"monoid {name!r} has no element {elem_id!r}")
        return table[elem_id]

    def names(self):
        return tuple(self._monoids)


# ---------------------------------------------------------------------------
# Evaluation


class _EvalCtx:
    """Word-level caches: per monoid, classes of prefixes/suffixes/factors."""

    def __init__(self, word, registry: Optional[MonoidRegistry], marked: bool):
        self.word = word
        self.n = len(word)
        self.registry = registry
        self.marked = marked
        self.positions = range(0, self.n + 2) if marked else range(1, self.n + 1)
        self._prefix: dict = {}
        self._suffix: dict = {}
        self._factor: dict = {}

    def symbol_at(self, i: int):
        if self.marked:
            if i == 0:
                return LEFT_MARK
            if i == self.n + 1:
                return RIGHT_MARK
        return self.word[i - 1]

    def _mono(self, name):
        if self.registry is None:
            raise RegistryError("class atom used without a monoid registry")
        return self.registry.monoid(name)

    def _prefixes(self, name):
        if name not in self._prefix:
            m = self._mono(name)
            acc = [m.identity]
            for a in self.word:
                acc.append(m.product(acc[-1], m.morphism[a]))
            self._prefix[name] = acc  # acc[i] = class of word[0:i]
        return self._prefix[name]

    def prefix_class(self, name, i: int) -> BehaviorProfile:
        """Class of the real letters strictly before position ``i``."""
        acc = self._prefixes(name)
        k = min(max(i - 1, 0), self.n)
        return acc[k]

    def suffix_class(self, name, i: int) -> BehaviorProfile:
        """Class of the real letters strictly after position ``i``."""
        if name not in self._suffix:
            m = self._mono(name)
            acc = [m.identity]
            for a in reversed(self.word):
                acc.append(m.product(m.morphism[a], acc[-1]))
            acc.reverse()
            self._suffix[name] = acc  # acc[i] = class of word[i:]
        acc = self._suffix[name]
        k = min(max(i, 0), self.n)
        return acc[k]

    def factor_class(self, name, i: int, j: int) -> BehaviorProfile:
        """Class of the real letters at positions ``i..j`` inclusive."""
        lo, hi = max(i, 1), min(j, self.n)
        if hi < lo:
            return self._mono(name).identity
        key = (name, lo, hi)
        if key not in self._factor:
            m = self._mono(name)
            e = m.identity
            for a in self.word[lo - 1 : hi]:
                e = m.product(e, m.morphism[a])
            self._factor[key] = e
        return self._factor[key]


class EvalSession:
    """Reusable evaluator for one word: caches class folds and the truth of
    every subformula under each restriction of the assignment to its free
    variables.  Formula nodes are memoized by identity, so sharing subtrees
    across formulas (as the generated transductions do) pays off."""

    def __init__(self, w, registry: Optional[MonoidRegistry] = None, marked: bool = False):
        self.ctx = _EvalCtx(as_word(w), registry, marked)
        self._memo: dict = {}
        self._fvars: dict = {}

    def _free(self, phi: Formula):
        got = self._fvars.get(id(phi))
        if got is None:
            got = tuple(sorted(free_vars(phi)))
            self._fvars[id(phi)] = (got, phi)  # keep phi alive for id stability
        else:
            got = got[0]
        return got

    def eval(self, phi: Formula, assignment: Optional[dict] = None) -> bool:
        sigma = assignment or {}
        return self._eval(phi, sigma)

    def _eval(self, phi: Formula, sigma: dict) -> bool:
        fv = self._free(phi)
        key = (id(phi),) + tuple(sigma[v] for v in fv)
        got = self._memo.get(key)
        if got is None:
            got = self._compute(phi, sigma)
            self._memo[key] = got
        return got

    def _compute(self, phi: Formula, sigma: dict) -> bool:
        ctx = self.ctx
        if isinstance(phi, TrueF):
            return True
        if isinstance(phi, Letter):
            return ctx.symbol_at(sigma[phi.var]) == phi.symbol
        if isinstance(phi, Le):
            return sigma[phi.left] <= sigma[phi.right]
        if isinstance(phi, FactorClass):
            i, j = sigma[phi.left], sigma[phi.right]
            if i > j:
                raise MalformedClassAtom(f"factor bounds {i} > {j}")
            return ctx.registry.element(phi.monoid, phi.element) == ctx.factor_class(
                phi.monoid, i, j
            )
        if isinstance(phi, PrefixClass):
            return ctx.registry.element(phi.monoid, phi.element) == ctx.prefix_class(
                phi.monoid, sigma[phi.var]
            )
        if isinstance(phi, SuffixClass):
            return ctx.registry.element(phi.monoid, phi.element) == ctx.suffix_class(
                phi.monoid, sigma[phi.var]
            )
        if isinstance(phi, And):
            return all(self._eval(a, sigma) for a in phi.args)
        if isinstance(phi, Or):
            return any(self._eval(a, sigma) for a in phi.args)
        if isinstance(phi, Not):
            return not self._eval(phi.arg, sigma)
        if isinstance(phi, (Exists, Forall)):
            want = isinstance(phi, Exists)
            sigma2 = dict(sigma)
            for i in ctx.positions:
                sigma2[phi.var] = i
                if self._eval(phi.body, sigma2) == want:
                    return want
            return not want
        raise TypeError(f"not a formula: {phi!r}")


def eval_formula(
    phi: Formula,
    w,
    assignment: Optional[dict] = None,
    registry: Optional[MonoidRegistry] = None,
    marked: bool = False,
    session: Optional[EvalSession] = None,
) -> bool:
    """Standard FO semantics; quantifiers over the context's position range."""
    sigma = dict(assignment or {})
    missing = free_vars(phi) - set(sigma)
    if missing:
        raise UnboundVariable(f"unbound variables: {sorted(missing)}")
    if session is not None:
        return session.eval(phi, sigma)
    ctx = _EvalCtx(as_word(w), registry, marked)
    return _eval(phi, ctx, sigma)


def _eval(phi: Formula, ctx: _EvalCtx, sigma: dict) -> bool:
    if isinstance(phi, TrueF):
        return True
    if isinstance(phi, Letter):
        return ctx.symbol_at(sigma[phi.var]) == phi.symbol
    if isinstance(phi, Le):
        return sigma[phi.left] <= sigma[phi.right]
    if isinstance(phi, FactorClass):
        i, j = sigma[phi.left], sigma[phi.right]
        if i > j:
            raise MalformedClassAtom(f"factor bounds {i} > {j}")
        e = ctx.factor_class(phi.monoid, i, j)
        return ctx.registry.element(phi.monoid, phi.element) == e
    if isinstance(phi, PrefixClass):
        e = ctx.prefix_class(phi.monoid, sigma[phi.var])
        return ctx.registry.element(phi.monoid, phi.element) == e
    if isinstance(phi, SuffixClass):
        e = ctx.suffix_class(phi.monoid, sigma[phi.var])
        return ctx.registry.element(phi.monoid, phi.element) == e
    if isinstance(phi, And):
        return all(_eval(a, ctx, sigma) for a in phi.args)
    if isinstance(phi, Or):
        return any(_eval(a, ctx, sigma) for a in phi.args)
    if isinstance(phi, Not):
        return not _eval(phi.arg, ctx, sigma)
    if isinstance(phi, Exists):
        for i in ctx.positions:
            sigma2 = dict(sigma)
            sigma2[phi.var] = i
            if _eval(phi.body, ctx, sigma2):
                return True
        return False
    if isinstance(phi, Forall):
        for i in ctx.positions:
            sigma2 = dict(sigma)
            sigma2[phi.var] = i
            if not _eval(phi.body, ctx, sigma2):
                return False
        return True
    raise TypeError(f"not a formula: {phi!r}")


# ---------------------------------------------------------------------------
# Compilation to DFAs over marked alphabets


class _Compiler:
    def __init__(self, base: Alphabet, registry: Optional[MonoidRegistry], marked: bool):
        self.base = base
        self.registry = registry
        self.marked = marked
        self.cache: dict = {}

    def carriers(self):
        return tuple(self.base.symbols) + ((LEFT_MARK, RIGHT_MARK) if self.marked else ())

    def alphabet_for(self, nvars: int) -> Alphabet:
        return marked_alphabet(self.base, nvars, with_marks=self.marked)

    def compile(self, phi: Formula, scope: tuple) -> Dfa:
        key = (phi, scope)
        if key in self.cache:
            return self.cache[key]
        d = self._compile(phi, scope)
        self.cache[key] = d
        return d

    def _compile(self, phi: Formula, scope: tuple) -> Dfa:
        alpha = self.alphabet_for(len(scope))
        if isinstance(phi, TrueF):
            return dfa_universal(alpha, True)
        if isinstance(phi, Letter):
            return self._letter(phi, scope, alpha)
        if isinstance(phi, Le):
            return self._le(phi, scope, alpha)
        if isinstance(phi, PrefixClass):
            return self._prefix_class(phi, scope, alpha)
        if isinstance(phi, SuffixClass):
            return self._suffix_class(phi, scope, alpha)
        if isinstance(phi, FactorClass):
            return self._factor_class(phi, scope, alpha)
        if isinstance(phi, And):
            out = self.compile(phi.args[0], scope)
            for a in phi.args[1:]:
                out = dfa_intersect(out, self.compile(a, scope))
            return out
        if isinstance(phi, Or):
            out = self.compile(phi.args[0], scope)
            for a in phi.args[1:]:
                out = dfa_union(out, self.compile(a, scope))
            return out
        if isinstance(phi, Not):
            return dfa_complement(self.compile(phi.arg, scope))
        if isinstance(phi, Exists):
            return self._exists(phi, scope)
        if isinstance(phi, Forall):
            return self._exists(Exists(phi.var, neg(phi.body)), scope, negate=True)
        raise TypeError(f"not a formula: {phi!r}")

    def _exists(self, phi: Exists, scope: tuple, negate: bool = False) -> Dfa:
        var = phi.var
        if var in scope:
            fresh = _fresh_var(var, frozenset(scope) | _all_vars(phi.body))
            return self._exists(Exists(fresh, subst_var(phi.body, var, fresh)), scope, negate)
        inner_scope = scope + (var,)
        body = self.compile(phi.body, inner_scope)
        body = dfa_intersect(body, self._exactly_one(len(inner_scope), len(scope)))
        projected = dfa_combine("project-bit", body, len(scope))
        if negate:
            projected = dfa_complement(projected)
        return projected

    def _exactly_one(self, nvars: int, bit: int) -> Dfa:
        alpha = self.alphabet_for(nvars)
        delta = {}
        for q in (0, 1, 2):
            for s in alpha:
                marked = s[1][bit] == 1
                delta[(q, s)] = min(q + (1 if marked else 0), 2)
        return Dfa((0, 1, 2), alpha, 0, frozenset({1}), delta)

    def _bit(self, scope, var):
        return scope.index(var)

    def _letter(self, phi: Letter, scope, alpha) -> Dfa:
        bit = self._bit(scope, phi.var)
        delta = {}
        for q in (0, 1, 2):
            for s in alpha:
                base, bits = s
                if q == 0 and bits[bit] == 1:
                    delta[(q, s)] = 1 if base == phi.symbol else 2
                else:
                    delta[(q, s)] = q
        return Dfa((0, 1, 2), alpha, 0, frozenset({1}), delta)

    def _le(self, phi: Le, scope, alpha) -> Dfa:
        bx, by = self._bit(scope, phi.left), self._bit(scope, phi.right)
        # 0: neither seen, 1: x first, 2: y first, 3: accept, 4: reject
        delta = {}
        for q in range(5):
            for s in alpha:
                _, bits = s
                x, y = bits[bx] == 1, bits[by] == 1
                if q == 0:
                    nq = 3 if (x and y) else 1 if x else 2 if y else 0
                elif q == 1:
                    nq = 3 if y else 1
                elif q == 2:
                    nq = 4 if x else 2
                else:
                    nq = q
                delta[(q, s)] = nq
        return Dfa(tuple(range(5)), alpha, 0, frozenset({3}), delta)

    def _mono(self, name):
        if self.registry is None:
            raise RegistryError("class atom used without a monoid registry")
        return self.registry.monoid(name)

    def _fold(self, m, e, base):
        if base in (LEFT_MARK, RIGHT_MARK):
            return e
        return m.product(e, m.morphism[base])

    def _prefix_class(self, phi: PrefixClass, scope, alpha) -> Dfa:
        m = self._mono(phi.monoid)
        target = self.registry.element(phi.monoid, phi.element)
        bit = self._bit(scope, phi.var)
        states = [("acc",), ("rej",)] + [("e", e) for e in m.elements]
        delta = {}
        for e in m.elements:
            for s in alpha:
                base, bits = s
                if bits[bit] == 1:
                    delta[(("e", e), s)] = ("acc",) if e == target else ("rej",)
                else:
                    delta[(("e", e), s)] = ("e", self._fold(m, e, base))
        for s in alpha:
            delta[(("acc",), s)] = ("acc",)
            delta[(("rej",), s)] = ("rej",)
        d = Dfa(tuple(states), alpha, ("e", m.identity), frozenset({("acc",)}), delta)
        return dfa_minimize(d)

    def _suffix_class(self, phi: SuffixClass, scope, alpha) -> Dfa:
        m = self._mono(phi.monoid)
        target = self.registry.element(phi.monoid, phi.element)
        bit = self._bit(scope, phi.var)
        states = [("pre",)] + [("e", e) for e in m.elements]
        delta = {}
        for s in alpha:
            base, bits = s
            delta[(("pre",), s)] = ("e", m.identity) if bits[bit] == 1 else ("pre",)
        for e in m.elements:
            for s in alpha:
                base, bits = s
                delta[(("e", e), s)] = ("e", self._fold(m, e, base))
        finals = frozenset({("e", target)})
        d = Dfa(tuple(states), alpha, ("pre",), finals, delta)
        return dfa_minimize(d)

    def _factor_class(self, phi: FactorClass, scope, alpha) -> Dfa:
        m = self._mono(phi.monoid)
        target = self.registry.element(phi.monoid, phi.element)
        bx, by = self._bit(scope, phi.left), self._bit(scope, phi.right)
        ident = m.identity
        states = [("pre",), ("acc",), ("rej",)] + [("e", e) for e in m.elements]
        delta = {}
        for s in alpha:
            base, bits = s
            x, y = bits[bx] == 1, bits[by] == 1
            if x and y:
                single = self._fold(m, ident, base)
                delta[(("pre",), s)] = ("acc",) if single == target else ("rej",)
            elif x:
                delta[(("pre",), s)] = ("e", self._fold(m, ident, base))
            elif y:
                delta[(("pre",), s)] = ("rej",)  # right bound before left: malformed
            else:
                delta[(("pre",), s)] = ("pre",)
        for e in m.elements:
            for s in alpha:
                base, bits = s
                if bits[by] == 1:
                    f = self._fold(m, e, base)
                    delta[(("e", e), s)] = ("acc",) if f == target else ("rej",)
                else:
                    delta[(("e", e), s)] = ("e", self._fold(m, e, base))
        for s in alpha:
            delta[(("acc",), s)] = ("acc",)
            delta[(("rej",), s)] = ("rej",)
        d = Dfa(tuple(states), alpha, ("pre",), frozenset({("acc",)}), delta)
        return dfa_minimize(d)

    def shape_dfa(self, nvars: int) -> Dfa:
        """Marked tapes: a single ^ first, a single $ last, letters between."""
        alpha = self.alphabet_for(nvars)
        # 0: expect ^, 1: inside, 2: after $, 3: reject
        delta = {}
        for q in range(4):
            for s in alpha:
                base, _ = s
                if q == 0:
                    nq = 1 if base == LEFT_MARK else 3
                elif q == 1:
                    nq = 2 if base == RIGHT_MARK else (1 if base != LEFT_MARK else 3)
                elif q == 2:
                    nq = 3
                else:
                    nq = 3
                delta[(q, s)] = nq
        return Dfa(tuple(range(4)), alpha, 0, frozenset({2}), delta)


def compile_to_dfa(
    phi: Formula,
    free_var_order,
    base_alphabet: Alphabet,
    registry: Optional[MonoidRegistry] = None,
    marked: bool = False,
) -> Dfa:
    """DFA over ``base x {0,1}^k`` accepting the validly-marked models of phi.

    Each variable of ``free_var_order`` contributes one bit, in declaration
    order; accepted words mark every variable exactly once and satisfy the
    formula under the induced assignment.  In marked mode the language
    consists of full tapes ``^ w $`` and variables may sit on endmarkers.
    """
    scope = tuple(free_var_order)
    missing = free_vars(phi) - set(scope)
    if missing:
        raise UnboundVariable(f"unbound variables: {sorted(missing)}")
    comp = _Compiler(base_alphabet, registry, marked)
    d = comp.compile(phi, scope)
    for bit in range(len(scope)):
        d = dfa_intersect(d, comp._exactly_one(len(scope), bit))
    if marked:
        d = dfa_intersect(d, comp.shape_dfa(len(scope)))
    return d


def mark_word(w, positions: dict, free_var_order, marked: bool = False):
    """Encode ``w`` with variable marks as a word over the product alphabet."""
    w = as_word(w)
    scope = tuple(free_var_order)
    cells = (
        [LEFT_MARK] + list(w) + [RIGHT_MARK] if marked else list(w)
    )
    offset = 0 if marked else 1
    out = []
    for idx, base in enumerate(cells):
        pos = idx + offset if not marked else idx
        bits = tuple(1 if positions.get(v) == pos else 0 for v in scope)
        out.append((base, bits))
    return tuple(out)


@dataclass(frozen=True)
class StarFreeCertificate:
    star_free: bool
    index: int


def certify_star_free(
    phi: Formula,
    free_var_order,
    base_alphabet: Alphabet,
    registry: Optional[MonoidRegistry] = None,
    marked: bool = False,
) -> StarFreeCertificate:
    """Compile and check counter-freeness; failure signals an internal bug
    or an uncertified class atom."""
    d = compile_to_dfa(phi, free_var_order, base_alphabet, registry, marked)
    report = dfa_is_counter_free(d)
    if not report.aperiodic:
        raise NonAperiodicCompilation(
            "compiled automaton is not counter-free; formula is outside FO"
        )
    return StarFreeCertificate(True, report.index)


# ---------------------------------------------------------------------------
# Concrete syntax (prefix notation)


def show_formula(phi: Formula) -> str:
    if isinstance(phi, TrueF):
        return "(true)"
    if isinstance(phi, Letter):
        return f"(letter {phi.symbol} {phi.var})"
    if isinstance(phi, Le):
        return f"(le {phi.left} {phi.right})"
    if isinstance(phi, FactorClass):
        return f"(class {phi.monoid} {phi.element} {phi.left} {phi.right})"
    if isinstance(phi, PrefixClass):
        return f"(pclass {phi.monoid} {phi.element} {phi.var})"
    if isinstance(phi, SuffixClass):
        return f"(sclass {phi.monoid} {phi.element} {phi.var})"
    if isinstance(phi, And):
        return "(and " + " ".join(show_formula(a) for a in phi.args) + ")"
    if isinstance(phi, Or):
        return "(or " + " ".join(show_formula(a) for a in phi.args) + ")"
    if isinstance(phi, Not):
        return f"(not {show_formula(phi.arg)})"
    if isinstance(phi, Exists):
        return f"(exists {phi.var} {show_formula(phi.body)})"
    if isinstance(phi, Forall):
        return f"(forall {phi.var} {show_formula(phi.body)})"
    raise TypeError(f"not a formula: {phi!r}")


class FormulaSyntaxError(ValueError):
    pass


def _tokenize(text: str):
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _parse_sexpr(tokens, i):
    if tokens[i] != "(":
        raise FormulaSyntaxError(f"expected '(' at token {i}")
    i += 1
    items = []
    while i < len(tokens) and tokens[i] != ")":
        if tokens[i] == "(":
            node, i = _parse_sexpr(tokens, i)
            items.append(node)
        else:
            items.append(tokens[i])
            i += 1
    if i >= len(tokens):
        raise FormulaSyntaxError("unbalanced parentheses")
    return items, i + 1


def parse_formula(text: str) -> Formula:
    tokens = _tokenize(text)
    tree, end = _parse_sexpr(tokens, 0)
    if end != len(tokens):
        raise FormulaSyntaxError("trailing tokens after formula")
    return _tree_to_formula(tree)


def _tree_to_formula(tree) -> Formula:
    if not isinstance(tree, list) or not tree:
        raise FormulaSyntaxError(f"bad node {tree!r}")
    head = tree[0]
    args = tree[1:]

    def need(n):
        if len(args) != n:
            raise FormulaSyntaxError(f"{head} expects {n} arguments, got {len(args)}")

    if head == "true":
        need(0)
        return TrueF()
    if head == "letter":
        need(2)
        from .words import parse_symbol

        return Letter(parse_symbol(args[0]), args[1])
    if head == "le":
        need(2)
        return Le(args[0], args[1])
    if head == "class":
        need(4)
        return FactorClass(args[0], args[1], args[2], args[3])
    if head == "pclass":
        need(3)
        return PrefixClass(args[0], args[1], args[2])
    if head == "sclass":
        need(3)
        return SuffixClass(args[0], args[1], args[2])
    if head == "and":
        return conj([_tree_to_formula(a) for a in args])
    if head == "or":
        return disj([_tree_to_formula(a) for a in args])
    if head == "not":
        need(1)
        return neg(_tree_to_formula(args[0]))
    if head == "exists":
        need(2)
        return Exists(args[0], _tree_to_formula(args[1]))
    if head == "forall":
        need(2)
        return Forall(args[0], _tree_to_formula(args[1]))
    raise FormulaSyntaxError(f"unknown operator {head!r}")
