"""Abstract syntax for the guarded dependent type theory kernel.

Terms and types use named variables and named clocks.  Clocks are context
entries, not values of a type: a clock name is bound either by a context
declaration or by one of the clock binders (clock-lambda, prev, the
clock-quantifier code).  Delayed substitutions appear both in later types
and in next terms, as telescopes of (name, term) bindings where each
binding scopes over the later ones and over the body.

`alpha_key` converts a node to a nameless (de Bruijn level) nested tuple.
It is the single source of truth for alpha equivalence and doubles as the
oracle against which capture-avoiding substitution is tested.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union


# ---------------------------------------------------------------------------
# nodes


class Node:
    __slots__ = ()


class Term(Node):
    __slots__ = ()


class Type(Node):
    __slots__ = ()


Delta = tuple[str, ...]  # clock set annotation, kept sorted and duplicate free


def mkdelta(names: Iterable[str]) -> Delta:
    out = tuple(sorted(set(names)))
    return out


# -- terms ------------------------------------------------------------------


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Ann(Term):
    term: Term
    type: Type


@dataclass(frozen=True)
class Lam(Term):
    var: str
    body: Term


@dataclass(frozen=True)
class App(Term):
    fun: Term
    arg: Term


@dataclass(frozen=True)
class Pair(Term):
    fst: Term
    snd: Term


@dataclass(frozen=True)
class Fst(Term):
    pair: Term


@dataclass(frozen=True)
class Snd(Term):
    pair: Term


@dataclass(frozen=True)
class Star(Term):
    pass


@dataclass(frozen=True)
class BoolLit(Term):
    value: bool


@dataclass(frozen=True)
class NatLit(Term):
    value: int


@dataclass(frozen=True)
class Succ(Term):
    arg: Term


@dataclass(frozen=True)
class FinLit(Term):
    index: int
    modulus: int


@dataclass(frozen=True)
class Binding(Node):
    var: str
    term: Term


@dataclass(frozen=True)
class Next(Term):
    clock: str
    subst: tuple[Binding, ...]
    body: Term


@dataclass(frozen=True)
class Prev(Term):
    clock: str  # bound in body
    body: Term


@dataclass(frozen=True)
class Force(Term):
    arg: Term


@dataclass(frozen=True)
class Fix(Term):
    clock: str  # free: refers to a clock in scope
    var: str  # bound in body, at a later type
    body: Term


@dataclass(frozen=True)
class CLam(Term):
    clock: str  # bound in body
    body: Term


@dataclass(frozen=True)
class CApp(Term):
    fun: Term
    clock: str


@dataclass(frozen=True)
class Refl(Term):
    pass


# -- universe codes (terms whose type is a universe) ------------------------


@dataclass(frozen=True)
class CodeSg(Term):
    delta: Optional[Delta]  # None until resolved by the checker
    var: str
    dom: Term
    cod: Term  # var bound here


@dataclass(frozen=True)
class CodePi(Term):
    delta: Optional[Delta]
    var: str
    dom: Term
    cod: Term


@dataclass(frozen=True)
class CodeAll(Term):
    delta: Optional[Delta]
    clock: str  # bound in body
    body: Term


@dataclass(frozen=True)
class CodeLater(Term):
    clock: str  # free
    body: Term  # a term of later-universe type


@dataclass(frozen=True)
class CodeIn(Term):
    small: Delta
    big: Delta
    body: Term


@dataclass(frozen=True)
class CodeNat(Term):
    delta: Delta


@dataclass(frozen=True)
class CodeUnit(Term):
    delta: Delta


@dataclass(frozen=True)
class CodeBool(Term):
    delta: Delta


@dataclass(frozen=True)
class CodeFin(Term):
    delta: Delta
    modulus: int


# -- types ------------------------------------------------------------------


@dataclass(frozen=True)
class TNat(Type):
    pass


@dataclass(frozen=True)
class TBool(Type):
    pass


@dataclass(frozen=True)
class TUnit(Type):
    pass


@dataclass(frozen=True)
class TFin(Type):
    modulus: int


@dataclass(frozen=True)
class TPi(Type):
    var: str
    dom: Type
    cod: Type


@dataclass(frozen=True)
class TSg(Type):
    var: str
    dom: Type
    cod: Type


@dataclass(frozen=True)
class TLater(Type):
    clock: str  # free
    subst: tuple[Binding, ...]
    body: Type


@dataclass(frozen=True)
class TAll(Type):
    clock: str  # bound in body
    body: Type


@dataclass(frozen=True)
class TId(Type):
    type: Type
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class TUniv(Type):
    delta: Delta


@dataclass(frozen=True)
class TEl(Type):
    code: Term


# ---------------------------------------------------------------------------
# contexts


@dataclass(frozen=True)
class ClockDecl(Node):
    name: str


@dataclass(frozen=True)
class VarDecl(Node):
    name: str
    type: Type


Decl = Union[ClockDecl, VarDecl]


@dataclass(frozen=True)
class Ctx:
    entries: tuple[Decl, ...] = ()

    def extend_var(self, name: str, type_: Type) -> "Ctx":
        return Ctx(self.entries + (VarDecl(name, type_),))

    def extend_clock(self, name: str) -> "Ctx":
        return Ctx(self.entries + (ClockDecl(name),))

    def lookup_var(self, name: str) -> Optional[Type]:
        for entry in reversed(self.entries):
            if isinstance(entry, VarDecl) and entry.name == name:
                return entry.type
        return None

    def has_clock(self, name: str) -> bool:
        return any(
            isinstance(e, ClockDecl) and e.name == name for e in self.entries
        )

    def clocks(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.entries if isinstance(e, ClockDecl))

    def names(self) -> frozenset[str]:
        return frozenset(e.name for e in self.entries)

    def key(self):
        cached = getattr(self, "_key", None)
        if cached is None:
            cached = tuple(
                ("clock", e.name)
                if isinstance(e, ClockDecl)
                else ("var", e.name, alpha_key(e.type))
                for e in self.entries
            )
            object.__setattr__(self, "_key", cached)
        return cached


# ---------------------------------------------------------------------------
# free names


def free_vars(node) -> frozenset[str]:
    acc: set[str] = set()
    _free(node, acc, set(), want_clocks=False)
    return frozenset(acc)


def free_clocks(node) -> frozenset[str]:
    acc: set[str] = set()
    _free(node, acc, set(), want_clocks=True)
    return frozenset(acc)


def _free(node, acc: set, bound: set, want_clocks: bool) -> None:
    if isinstance(node, Var):
        if not want_clocks and node.name not in bound:
            acc.add(node.name)
        return
    if isinstance(node, (Lam,)):
        _free(node.body, acc, bound | ({node.var} if not want_clocks else set()), want_clocks)
        return
    if isinstance(node, (TPi, TSg)):
        _free(node.dom, acc, bound, want_clocks)
        sub = bound | ({node.var} if not want_clocks else set())
        _free(node.cod, acc, sub, want_clocks)
        return
    if isinstance(node, (CodeSg, CodePi)):
        if want_clocks and node.delta:
            acc.update(set(node.delta) - bound)
        _free(node.dom, acc, bound, want_clocks)
        sub = bound | ({node.var} if not want_clocks else set())
        _free(node.cod, acc, sub, want_clocks)
        return
    if isinstance(node, (Next, TLater)):
        # binding terms live in the outer scope; only the body sees the
        # bound variables
        if want_clocks and node.clock not in bound:
            acc.add(node.clock)
        for b in node.subst:
            _free(b.term, acc, bound, want_clocks)
        inner = bound if want_clocks else bound | {b.var for b in node.subst}
        _free(node.body, acc, inner, want_clocks)
        return
    if isinstance(node, (Prev, CLam, TAll)):
        sub = bound | ({node.clock} if want_clocks else set())
        _free(node.body, acc, sub, want_clocks)
        return
    if isinstance(node, Fix):
        if want_clocks and node.clock not in bound:
            acc.add(node.clock)
        sub = bound | ({node.var} if not want_clocks else set())
        _free(node.body, acc, sub, want_clocks)
        return
    if isinstance(node, CodeAll):
        if want_clocks and node.delta:
            acc.update(set(node.delta) - bound)
        sub = bound | ({node.clock} if want_clocks else set())
        _free(node.body, acc, sub, want_clocks)
        return
    if isinstance(node, CodeLater):
        if want_clocks and node.clock not in bound:
            acc.add(node.clock)
        _free(node.body, acc, bound, want_clocks)
        return
    if isinstance(node, CodeIn):
        if want_clocks:
            acc.update((set(node.small) | set(node.big)) - bound)
        _free(node.body, acc, bound, want_clocks)
        return
    if isinstance(node, (CodeNat, CodeUnit, CodeBool, CodeFin)):
        if want_clocks:
            acc.update(set(node.delta) - bound)
        return
    if isinstance(node, TUniv):
        if want_clocks:
            acc.update(set(node.delta) - bound)
        return
    if isinstance(node, CApp):
        _free(node.fun, acc, bound, want_clocks)
        if want_clocks and node.clock not in bound:
            acc.add(node.clock)
        return
    # generic nodes: recurse into Node-valued fields
    for child in _children(node):
        _free(child, acc, bound, want_clocks)


def _children(node):
    if isinstance(node, Ann):
        return (node.term, node.type)
    if isinstance(node, App):
        return (node.fun, node.arg)
    if isinstance(node, Pair):
        return (node.fst, node.snd)
    if isinstance(node, Fst):
        return (node.pair,)
    if isinstance(node, Snd):
        return (node.pair,)
    if isinstance(node, Succ):
        return (node.arg,)
    if isinstance(node, Force):
        return (node.arg,)
    if isinstance(node, TId):
        return (node.type, node.lhs, node.rhs)
    if isinstance(node, TEl):
        return (node.code,)
    return ()


# ---------------------------------------------------------------------------
# alpha keys (nameless form)


_AKEY_CACHE: dict = {}
_AKEY_REFS: list = []


def alpha_key(node, venv: tuple = (), cenv: tuple = ()):
    """Nameless nested-tuple form; equal keys iff alpha equivalent.

    Closed-scope calls are cached by node identity; nodes are immutable and
    keeping a reference pins the identity."""
    if not venv and not cenv:
        hit = _AKEY_CACHE.get(id(node))
        if hit is not None:
            return hit
        key = _alpha_key(node, (), ())
        _AKEY_CACHE[id(node)] = key
        _AKEY_REFS.append(node)
        return key
    return _alpha_key(node, venv, cenv)


def _alpha_key(node, venv: tuple, cenv: tuple):

    def vk(name):
        for i, n in enumerate(reversed(venv)):
            if n == name:
                return ("b", i)
        return ("f", name)

    def ck(name):
        for i, n in enumerate(reversed(cenv)):
            if n == name:
                return ("b", i)
        return ("f", name)

    def dk(delta):
        if delta is None:
            return None
        return tuple(sorted(ck(c) for c in delta))

    t = node
    if isinstance(t, Var):
        return ("var", vk(t.name))
    if isinstance(t, Ann):
        # annotations carry typing information only; equality looks through
        return alpha_key(t.term, venv, cenv)
    if isinstance(t, Lam):
        return ("lam", alpha_key(t.body, venv + (t.var,), cenv))
    if isinstance(t, App):
        return ("app", alpha_key(t.fun, venv, cenv), alpha_key(t.arg, venv, cenv))
    if isinstance(t, Pair):
        return ("pair", alpha_key(t.fst, venv, cenv), alpha_key(t.snd, venv, cenv))
    if isinstance(t, Fst):
        return ("fst", alpha_key(t.pair, venv, cenv))
    if isinstance(t, Snd):
        return ("snd", alpha_key(t.pair, venv, cenv))
    if isinstance(t, Star):
        return ("star",)
    if isinstance(t, BoolLit):
        return ("bool", t.value)
    if isinstance(t, NatLit):
        return ("nat", t.value)
    if isinstance(t, Succ):
        return ("succ", alpha_key(t.arg, venv, cenv))
    if isinstance(t, FinLit):
        return ("fin", t.index, t.modulus)
    if isinstance(t, Next):
        parts = tuple(alpha_key(b.term, venv, cenv) for b in t.subst)
        inner = venv + tuple(b.var for b in t.subst)
        return ("next", ck(t.clock), parts, alpha_key(t.body, inner, cenv))
    if isinstance(t, Prev):
        return ("prev", alpha_key(t.body, venv, cenv + (t.clock,)))
    if isinstance(t, Force):
        return ("force", alpha_key(t.arg, venv, cenv))
    if isinstance(t, Fix):
        return ("fix", ck(t.clock), alpha_key(t.body, venv + (t.var,), cenv))
    if isinstance(t, CLam):
        return ("clam", alpha_key(t.body, venv, cenv + (t.clock,)))
    if isinstance(t, CApp):
        return ("capp", alpha_key(t.fun, venv, cenv), ck(t.clock))
    if isinstance(t, Refl):
        return ("refl",)
    if isinstance(t, CodeSg):
        return (
            "csg",
            dk(t.delta),
            alpha_key(t.dom, venv, cenv),
            alpha_key(t.cod, venv + (t.var,), cenv),
        )
    if isinstance(t, CodePi):
        return (
            "cpi",
            dk(t.delta),
            alpha_key(t.dom, venv, cenv),
            alpha_key(t.cod, venv + (t.var,), cenv),
        )
    if isinstance(t, CodeAll):
        return ("call", dk(t.delta), alpha_key(t.body, venv, cenv + (t.clock,)))
    if isinstance(t, CodeLater):
        return ("clater", ck(t.clock), alpha_key(t.body, venv, cenv))
    if isinstance(t, CodeIn):
        return ("cin", dk(t.small), dk(t.big), alpha_key(t.body, venv, cenv))
    if isinstance(t, CodeNat):
        return ("cnat", dk(t.delta))
    if isinstance(t, CodeUnit):
        return ("cunit", dk(t.delta))
    if isinstance(t, CodeBool):
        return ("cbool", dk(t.delta))
    if isinstance(t, CodeFin):
        return ("cfin", dk(t.delta), t.modulus)
    if isinstance(t, TNat):
        return ("Nat",)
    if isinstance(t, TBool):
        return ("Bool",)
    if isinstance(t, TUnit):
        return ("Unit",)
    if isinstance(t, TFin):
        return ("Fin", t.modulus)
    if isinstance(t, TPi):
        return (
            "Pi",
            alpha_key(t.dom, venv, cenv),
            alpha_key(t.cod, venv + (t.var,), cenv),
        )
    if isinstance(t, TSg):
        return (
            "Sg",
            alpha_key(t.dom, venv, cenv),
            alpha_key(t.cod, venv + (t.var,), cenv),
        )
    if isinstance(t, TLater):
        parts = tuple(alpha_key(b.term, venv, cenv) for b in t.subst)
        inner = venv + tuple(b.var for b in t.subst)
        return ("Later", ck(t.clock), parts, alpha_key(t.body, inner, cenv))
    if isinstance(t, TAll):
        return ("All", alpha_key(t.body, venv, cenv + (t.clock,)))
    if isinstance(t, TId):
        return (
            "Id",
            alpha_key(t.type, venv, cenv),
            alpha_key(t.lhs, venv, cenv),
            alpha_key(t.rhs, venv, cenv),
        )
    if isinstance(t, TUniv):
        return ("U", dk(t.delta))
    if isinstance(t, TEl):
        return ("El", alpha_key(t.code, venv, cenv))
    raise TypeError(f"alpha_key: unknown node {t!r}")


def alpha_eq(a, b) -> bool:
    return alpha_key(a) == alpha_key(b)


# ---------------------------------------------------------------------------
# substitution


def fresh_name(base: str, avoid) -> str:
    if base not in avoid:
        return base
    i = 1
    while f"{base}_{i}" in avoid:
        i += 1
    return f"{base}_{i}"


def subst(node, vsub: dict = None, csub: dict = None):
    """Capture-avoiding simultaneous substitution.

    vsub maps variable names to terms, csub maps clock names to clock names.
    """
    vsub = dict(vsub or {})
    csub = dict(csub or {})
    if not vsub and not csub:
        return node
    danger = set(csub.values())
    for t in vsub.values():
        danger |= free_vars(t)
        danger |= free_clocks(t)
    return _subst(node, vsub, csub, danger)


def _enter_var(name, vsub, csub, danger, scope):
    """Returns (new name, updated vsub) for crossing a variable binder.

    `scope` is the subtree the binder scopes over; a freshened name must not
    collide with its free names either.
    """
    vsub = {k: v for k, v in vsub.items() if k != name}
    if name in danger:
        avoid = danger | set(vsub.keys()) | free_vars(scope)
        new = fresh_name(name, avoid)
        vsub[name] = Var(new)
        return new, vsub
    return name, vsub


def _enter_clock(name, vsub, csub, danger, scope):
    csub = {k: v for k, v in csub.items() if k != name}
    if name in danger:
        avoid = danger | set(csub.keys()) | set(csub.values()) | free_clocks(scope)
        new = fresh_name(name, avoid)
        csub[name] = new
        return new, csub
    return name, csub


def _subst(t, vsub, csub, danger):
    def go(n, vs=None, cs=None):
        return _subst(n, vs if vs is not None else vsub, cs if cs is not None else csub, danger)

    def cl(name):
        return csub.get(name, name)

    def dl(delta):
        if delta is None:
            return None
        return mkdelta(cl(c) for c in delta)

    if isinstance(t, Var):
        return vsub.get(t.name, t)
    if isinstance(t, Ann):
        return Ann(go(t.term), go(t.type))
    if isinstance(t, Lam):
        x, vs = _enter_var(t.var, vsub, csub, danger, t.body)
        return Lam(x, go(t.body, vs=vs))
    if isinstance(t, App):
        return App(go(t.fun), go(t.arg))
    if isinstance(t, Pair):
        return Pair(go(t.fst), go(t.snd))
    if isinstance(t, Fst):
        return Fst(go(t.pair))
    if isinstance(t, Snd):
        return Snd(go(t.pair))
    if isinstance(t, (Star, BoolLit, NatLit, FinLit, Refl)):
        return t
    if isinstance(t, Succ):
        return Succ(go(t.arg))
    if isinstance(t, (Next, TLater)):
        vs = dict(vsub)
        bindings = []
        for b in t.subst:
            term = _subst(b.term, vsub, csub, danger)
            x, vs = _enter_var(b.var, vs, csub, danger, t.body)
            bindings.append(Binding(x, term))
        body = _subst(t.body, vs, csub, danger)
        return type(t)(cl(t.clock), tuple(bindings), body)
    if isinstance(t, Prev):
        k, cs = _enter_clock(t.clock, vsub, csub, danger, t.body)
        return Prev(k, go(t.body, cs=cs))
    if isinstance(t, Force):
        return Force(go(t.arg))
    if isinstance(t, Fix):
        x, vs = _enter_var(t.var, vsub, csub, danger, t.body)
        return Fix(cl(t.clock), x, go(t.body, vs=vs))
    if isinstance(t, CLam):
        k, cs = _enter_clock(t.clock, vsub, csub, danger, t.body)
        return CLam(k, go(t.body, cs=cs))
    if isinstance(t, CApp):
        return CApp(go(t.fun), cl(t.clock))
    if isinstance(t, (CodeSg, CodePi)):
        dom = go(t.dom)
        x, vs = _enter_var(t.var, vsub, csub, danger, t.cod)
        return type(t)(dl(t.delta), x, dom, go(t.cod, vs=vs))
    if isinstance(t, CodeAll):
        k, cs = _enter_clock(t.clock, vsub, csub, danger, t.body)
        return CodeAll(dl(t.delta), k, go(t.body, cs=cs))
    if isinstance(t, CodeLater):
        return CodeLater(cl(t.clock), go(t.body))
    if isinstance(t, CodeIn):
        return CodeIn(dl(t.small), dl(t.big), go(t.body))
    if isinstance(t, CodeNat):
        return CodeNat(dl(t.delta))
    if isinstance(t, CodeUnit):
        return CodeUnit(dl(t.delta))
    if isinstance(t, CodeBool):
        return CodeBool(dl(t.delta))
    if isinstance(t, CodeFin):
        return CodeFin(dl(t.delta), t.modulus)
    if isinstance(t, (TNat, TBool, TUnit, TFin)):
        return t
    if isinstance(t, (TPi, TSg)):
        dom = go(t.dom)
        x, vs = _enter_var(t.var, vsub, csub, danger, t.cod)
        return type(t)(x, dom, go(t.cod, vs=vs))
    if isinstance(t, TAll):
        k, cs = _enter_clock(t.clock, vsub, csub, danger, t.body)
        return TAll(k, go(t.body, cs=cs))
    if isinstance(t, TId):
        return TId(go(t.type), go(t.lhs), go(t.rhs))
    if isinstance(t, TUniv):
        return TUniv(dl(t.delta))
    if isinstance(t, TEl):
        return TEl(go(t.code))
    raise TypeError(f"subst: unknown node {t!r}")


def subst1(node, name: str, term: Term):
    return subst(node, vsub={name: term})


def csubst1(node, clock: str, to: str):
    return subst(node, csub={clock: to})
