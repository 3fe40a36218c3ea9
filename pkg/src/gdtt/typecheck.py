"""Bidirectional type checker with fuel-bounded conversion.

Conversion works on rewritten normal forms: beta/eta, clock beta/eta,
projection laws, the prev/next laws, canonical delayed substitutions
(unused bindings dropped, collapse of next-bindings, canonical ordering),
decoding of universe codes under El, and hoisting of universe inclusions.
Recursive definitions (fix) are unfolded lazily during comparison, bounded
by fuel; running out of fuel yields a distinct "undecided" verdict rather
than a plain failure.

`check`/`infer` return elaborated terms: universe codes get their clock-set
annotations resolved and every checked introduction form that cannot be
inferred (lambda, pair, fix) is wrapped in an annotation, so elaborated
terms are hereditarily inferable.  The evaluator relies on this.
"""

from __future__ import annotations

from typing import Optional, Union

from .syntax import (
    Ann, App, Binding, BoolLit, CApp, CLam, CodeAll, CodeBool, CodeFin,
    CodeIn, CodeLater, CodeNat, CodePi, CodeSg, CodeUnit, Ctx, FinLit, Fix,
    Force, Fst, Lam, NatLit, Next, Pair, Prev, Refl, Snd, Star, Succ, TAll,
    TBool, TEl, TFin, TId, TLater, TNat, TPi, TSg, TUniv, TUnit, Term, Type,
    Var, alpha_eq, alpha_key, csubst1, free_clocks, free_vars, fresh_name,
    mkdelta, subst, subst1,
)


class CheckError(Exception):
    pass


class UndecidedError(CheckError):
    """Conversion ran out of fix-unfolding fuel."""


class _FuelOut(Exception):
    pass


UNDECIDED = "undecided"


def strip_ann(t):
    while isinstance(t, Ann):
        t = t.term
    return t


# ---------------------------------------------------------------------------
# normalization


class _Steps:
    def __init__(self, limit: int):
        self.left = limit

    def spend(self):
        self.left -= 1
        if self.left < 0:
            raise UndecidedError("normalization step limit exceeded")


DEFAULT_STEPS = 200_000


def normalize(node, steps: Optional[_Steps] = None):
    steps = steps if steps is not None else _Steps(DEFAULT_STEPS)
    if isinstance(node, Term):
        return _norm_term(node, steps)
    if isinstance(node, Type):
        return _norm_type(node, steps)
    raise TypeError(f"normalize: not a term or type: {node!r}")


def _norm_term(t, st: _Steps):
    if isinstance(t, (Var, Star, BoolLit, NatLit, FinLit, Refl)):
        return t
    if isinstance(t, Ann):
        return Ann(_norm_term(t.term, st), _norm_type(t.type, st))
    if isinstance(t, Lam):
        body = _norm_term(t.body, st)
        inner = strip_ann(body)
        if (isinstance(inner, App) and isinstance(inner.arg, Var)
                and inner.arg.name == t.var
                and t.var not in free_vars(inner.fun)):
            return inner.fun
        return Lam(t.var, body)
    if isinstance(t, App):
        fun = _norm_term(t.fun, st)
        arg = _norm_term(t.arg, st)
        head = strip_ann(fun)
        if isinstance(head, Lam):
            st.spend()
            return _norm_term(subst1(head.body, head.var, arg), st)
        return App(fun, arg)
    if isinstance(t, Pair):
        fst = _norm_term(t.fst, st)
        snd = _norm_term(t.snd, st)
        sf, ss = strip_ann(fst), strip_ann(snd)
        if (isinstance(sf, Fst) and isinstance(ss, Snd)
                and alpha_eq(sf.pair, ss.pair)):
            return sf.pair
        return Pair(fst, snd)
    if isinstance(t, Fst):
        p = _norm_term(t.pair, st)
        head = strip_ann(p)
        if isinstance(head, Pair):
            st.spend()
            return head.fst
        return Fst(p)
    if isinstance(t, Snd):
        p = _norm_term(t.pair, st)
        head = strip_ann(p)
        if isinstance(head, Pair):
            st.spend()
            return head.snd
        return Snd(p)
    if isinstance(t, Succ):
        a = _norm_term(t.arg, st)
        if isinstance(strip_ann(a), NatLit):
            return NatLit(strip_ann(a).value + 1)
        return Succ(a)
    if isinstance(t, CLam):
        body = _norm_term(t.body, st)
        inner = strip_ann(body)
        if (isinstance(inner, CApp) and inner.clock == t.clock
                and t.clock not in free_clocks(inner.fun)):
            return inner.fun
        return CLam(t.clock, body)
    if isinstance(t, CApp):
        fun = _norm_term(t.fun, st)
        head = strip_ann(fun)
        if isinstance(head, CLam):
            st.spend()
            return _norm_term(csubst1(head.body, head.clock, t.clock), st)
        return CApp(fun, t.clock)
    if isinstance(t, Force):
        arg = _norm_term(t.arg, st)
        k = fresh_name("k", free_clocks(arg))
        st.spend()
        return _norm_term(Prev(k, CApp(arg, k)), st)
    if isinstance(t, Prev):
        body = _norm_term(t.body, st)
        head = strip_ann(body)
        if isinstance(head, Next) and head.clock == t.clock:
            # prev k. next k [xs] u  ==  /\k. u(advance k xs)
            st.spend()
            vsub = {
                b.var: CApp(Prev(t.clock, b.term), t.clock)
                for b in head.subst
            }
            return _norm_term(CLam(t.clock, subst(head.body, vsub=vsub)), st)
        return Prev(t.clock, body)
    if isinstance(t, Next):
        bindings = tuple(
            Binding(b.var, _norm_term(b.term, st)) for b in t.subst
        )
        body = _norm_term(t.body, st)
        red = _canon_delsub(t.clock, bindings, body, st)
        if red is not None:
            return red
        bindings, body = _sorted_delsub(t.clock, bindings, body)
        hb = strip_ann(body)
        # identity law: next k [x <- u] x  ==  u
        if (isinstance(hb, Var) and len(bindings) == 1
                and bindings[0].var == hb.name):
            st.spend()
            return bindings[0].term
        # next k ((prev k'. u) @k)  ==  u[k/k']
        if (not bindings and isinstance(hb, CApp) and hb.clock == t.clock):
            inner = strip_ann(hb.fun)
            if isinstance(inner, Prev):
                st.spend()
                return _norm_term(csubst1(inner.body, inner.clock, t.clock), st)
        # independent next blocks commute; canonical order by clock name
        if isinstance(hb, Next) and hb.clock < t.clock:
            outer_vars = {b.var for b in bindings}
            inner_free = set()
            for b in hb.subst:
                inner_free |= free_vars(b.term)
            if not (outer_vars & inner_free) and hb.clock != t.clock:
                st.spend()
                return _norm_term(
                    Next(hb.clock, hb.subst, Next(t.clock, bindings, hb.body)),
                    st,
                )
        return Next(t.clock, bindings, body)
    if isinstance(t, Fix):
        return Fix(t.clock, t.var, _norm_term(t.body, st))
    if isinstance(t, (CodeSg, CodePi)):
        dom = _norm_term(t.dom, st)
        cod = _norm_term(t.cod, st)
        hd, hc = strip_ann(dom), strip_ann(cod)
        if (isinstance(hd, CodeIn) and isinstance(hc, CodeIn)
                and hd.small == hc.small and hd.big == hc.big
                and (t.delta is None or t.delta == hd.big)):
            st.spend()
            inner = type(t)(hd.small, t.var, hd.body, hc.body)
            return _norm_term(CodeIn(hd.small, hd.big, inner), st)
        return type(t)(t.delta, t.var, dom, cod)
    if isinstance(t, CodeAll):
        body = _norm_term(t.body, st)
        hb = strip_ann(body)
        if (isinstance(hb, CodeIn) and t.clock in hb.small
                and t.clock in hb.big):
            small = mkdelta(set(hb.small) - {t.clock})
            big = mkdelta(set(hb.big) - {t.clock})
            if t.delta is None or t.delta == big:
                st.spend()
                inner = CodeAll(small, t.clock, hb.body)
                return _norm_term(CodeIn(small, big, inner), st)
        return CodeAll(t.delta, t.clock, body)
    if isinstance(t, CodeLater):
        body = _norm_term(t.body, st)
        hb = strip_ann(body)
        if isinstance(hb, Next) and hb.clock == t.clock:
            inner = strip_ann(hb.body)
            if isinstance(inner, CodeIn) and t.clock in inner.small:
                st.spend()
                hoisted = CodeIn(
                    inner.small, inner.big,
                    CodeLater(t.clock, Next(hb.clock, hb.subst, inner.body)),
                )
                return _norm_term(hoisted, st)
        return CodeLater(t.clock, body)
    if isinstance(t, CodeIn):
        body = _norm_term(t.body, st)
        hb = strip_ann(body)
        if isinstance(hb, CodeIn):
            st.spend()
            return _norm_term(CodeIn(hb.small, t.big, hb.body), st)
        if isinstance(hb, CodeNat):
            return CodeNat(t.big)
        if isinstance(hb, CodeUnit):
            return CodeUnit(t.big)
        if isinstance(hb, CodeBool):
            return CodeBool(t.big)
        if isinstance(hb, CodeFin):
            return CodeFin(t.big, hb.modulus)
        if t.small == t.big:
            return body
        return CodeIn(t.small, t.big, body)
    if isinstance(t, (CodeNat, CodeUnit, CodeBool, CodeFin)):
        return t
    raise TypeError(f"_norm_term: unknown node {t!r}")


def _canon_delsub(clock, bindings, body, st):
    """Drop unused bindings and collapse next-bindings.  Returns a fully
    renormalized replacement node body/bindings pair via the caller, or a
    reduced node if a collapse rewrote the body (None means: proceed)."""
    used = free_vars(body)
    kept = tuple(b for b in bindings if b.var in used)
    if len(kept) != len(bindings):
        st.spend()
        return _renorm_delsub(clock, kept, body, st)
    # collapse: a binding whose term is a next under the matching prefix
    for i, b in enumerate(bindings):
        head = strip_ann(b.term)
        if isinstance(head, Next) and head.clock == clock:
            prefix = bindings[:i]
            if len(head.subst) == len(prefix) and all(
                alpha_eq(hb.term, pb.term)
                for hb, pb in zip(head.subst, prefix)
            ):
                st.spend()
                ren = {
                    hb.var: Var(pb.var)
                    for hb, pb in zip(head.subst, prefix)
                }
                inner = subst(head.body, vsub=ren)
                new_body = subst1(body, b.var, inner)
                rest = bindings[:i] + bindings[i + 1:]
                return _renorm_delsub(clock, rest, new_body, st)
    return None


def _renorm_delsub(clock, bindings, body, st):
    if isinstance(body, Type):
        return _norm_type(TLater(clock, bindings, body), st)
    return _norm_term(Next(clock, bindings, body), st)


def _sorted_delsub(clock, bindings, body):
    # binding terms never mention each other's variables, so any ordering is
    # legitimate; sort canonically for comparison
    order = sorted(bindings, key=lambda b: (alpha_key(b.term), b.var))
    return tuple(order), body


def _norm_type(ty, st: _Steps):
    if isinstance(ty, (TNat, TBool, TUnit, TFin, TUniv)):
        return ty
    if isinstance(ty, (TPi, TSg)):
        return type(ty)(ty.var, _norm_type(ty.dom, st), _norm_type(ty.cod, st))
    if isinstance(ty, TAll):
        return TAll(ty.clock, _norm_type(ty.body, st))
    if isinstance(ty, TId):
        return TId(_norm_type(ty.type, st), _norm_term(ty.lhs, st),
                   _norm_term(ty.rhs, st))
    if isinstance(ty, TLater):
        bindings = tuple(
            Binding(b.var, _norm_term(b.term, st)) for b in ty.subst
        )
        body = _norm_type(ty.body, st)
        red = _canon_delsub(ty.clock, bindings, body, st)
        if red is not None:
            return red
        bindings, body = _sorted_delsub(ty.clock, bindings, body)
        if isinstance(body, TId):
            # a later applied to an identity type commutes out
            st.spend()
            return _norm_type(
                TId(
                    TLater(ty.clock, bindings, body.type),
                    Next(ty.clock, bindings, body.lhs),
                    Next(ty.clock, bindings, body.rhs),
                ),
                st,
            )
        # independent later blocks commute; canonical order by clock name
        if isinstance(body, TLater) and body.clock < ty.clock:
            outer_vars = {b.var for b in bindings}
            inner_free = set()
            for b in body.subst:
                inner_free |= free_vars(b.term)
            if not (outer_vars & inner_free):
                st.spend()
                return _norm_type(
                    TLater(body.clock, body.subst,
                           TLater(ty.clock, bindings, body.body)),
                    st,
                )
        return TLater(ty.clock, bindings, body)
    if isinstance(ty, TEl):
        code = _norm_term(ty.code, st)
        head = strip_ann(code)
        if isinstance(head, CodeSg):
            st.spend()
            return _norm_type(
                TSg(head.var, TEl(head.dom), TEl(head.cod)), st)
        if isinstance(head, CodePi):
            st.spend()
            return _norm_type(
                TPi(head.var, TEl(head.dom), TEl(head.cod)), st)
        if isinstance(head, CodeAll):
            st.spend()
            return _norm_type(TAll(head.clock, TEl(head.body)), st)
        if isinstance(head, CodeLater):
            nb = strip_ann(head.body)
            if isinstance(nb, Next) and nb.clock == head.clock:
                st.spend()
                return _norm_type(
                    TLater(head.clock, nb.subst, TEl(nb.body)), st)
            return TEl(code)
        if isinstance(head, CodeIn):
            st.spend()
            return _norm_type(TEl(head.body), st)
        if isinstance(head, CodeNat):
            return TNat()
        if isinstance(head, CodeUnit):
            return TUnit()
        if isinstance(head, CodeBool):
            return TBool()
        if isinstance(head, CodeFin):
            return TFin(head.modulus)
        return TEl(code)
    raise TypeError(f"_norm_type: unknown node {ty!r}")


# ---------------------------------------------------------------------------
# conversion


class Checker:
    def __init__(self, fuel: int = 8, step_limit: int = DEFAULT_STEPS):
        self.fuel = fuel
        self.step_limit = step_limit

    # -- conversion ---------------------------------------------------------

    def convertible(self, ctx: Ctx, a, b) -> Union[bool, str]:
        st = _Steps(self.step_limit)
        try:
            an = normalize(a, st)
            bn = normalize(b, st)
        except UndecidedError:
            return UNDECIDED
        fuel = [self.fuel]
        try:
            return self._conv(ctx, an, bn, fuel, st)
        except (_FuelOut, UndecidedError):
            return UNDECIDED

    def require_convertible(self, ctx, a, b, what="expression"):
        verdict = self.convertible(ctx, a, b)
        if verdict is True:
            return
        if verdict == UNDECIDED:
            raise UndecidedError(
                f"conversion undecided (out of fuel) for {what}")
        from .printer import print_term, print_type
        pr = print_type if isinstance(a, Type) else print_term
        raise CheckError(f"{what} mismatch: {pr(a)} vs {pr(b)}")

    def _conv(self, ctx, a, b, fuel, st) -> bool:
        if alpha_eq(a, b):
            return True
        sa, sb = strip_ann(a), strip_ann(b)
        if not (sa is a and sb is b):
            return self._conv(ctx, sa, sb, fuel, st)

        # eta expansions against non-introductions
        if isinstance(a, Lam) != isinstance(b, Lam):
            lam, other = (a, b) if isinstance(a, Lam) else (b, a)
            expanded = _norm_term(App(other, Var(lam.var)), st)
            return self._conv(ctx, lam.body, expanded, fuel, st)
        if isinstance(a, Pair) != isinstance(b, Pair):
            pair, other = (a, b) if isinstance(a, Pair) else (b, a)
            return self._conv(ctx, pair.fst, _norm_term(Fst(other), st), fuel, st) \
                and self._conv(ctx, pair.snd, _norm_term(Snd(other), st), fuel, st)
        if isinstance(a, CLam) != isinstance(b, CLam):
            clam, other = (a, b) if isinstance(a, CLam) else (b, a)
            expanded = _norm_term(CApp(other, clam.clock), st)
            return self._conv(ctx, clam.body, expanded, fuel, st)

        if type(a) is type(b):
            result = self._conv_same(ctx, a, b, fuel, st)
            if result is not None:
                return result

        # clock irrelevance: t @k1 == t @k2 when the quantified type does
        # not mention its clock
        if isinstance(a, CApp) and isinstance(b, CApp) and a.clock != b.clock:
            if self._conv(ctx, a.fun, b.fun, fuel, st):
                if self._clock_irrelevant(ctx, a.fun) or \
                        self._clock_irrelevant(ctx, b.fun):
                    return True

        # lazily unfold recursive definitions at the head
        ua = _unfold_head(a, fuel, st)
        if ua is not None:
            return self._conv(ctx, ua, b, fuel, st)
        ub = _unfold_head(b, fuel, st)
        if ub is not None:
            return self._conv(ctx, a, ub, fuel, st)
        return False

    def _clock_irrelevant(self, ctx, fun) -> bool:
        try:
            _, ty = self.infer(ctx, fun)
        except CheckError:
            return False
        ty = normalize(ty)
        return isinstance(ty, TAll) and ty.clock not in free_clocks(ty.body)

    def _conv_same(self, ctx, a, b, fuel, st) -> Optional[bool]:
        """Structural comparison for nodes of the same class.  Returns None
        when the node heads differ in a way that head unfolding might fix."""
        conv = lambda x, y: self._conv(ctx, x, y, fuel, st)
        if isinstance(a, Lam):
            z = fresh_name(a.var, free_vars(a.body) | free_vars(b.body))
            return conv(subst1(a.body, a.var, Var(z)),
                        subst1(b.body, b.var, Var(z)))
        if isinstance(a, (CLam, Prev, TAll)):
            z = fresh_name(a.clock, free_clocks(a.body) | free_clocks(b.body))
            return conv(csubst1(a.body, a.clock, z),
                        csubst1(b.body, b.clock, z))
        if isinstance(a, Fix):
            if a.clock != b.clock:
                return None
            z = fresh_name(a.var, free_vars(a.body) | free_vars(b.body))
            return conv(subst1(a.body, a.var, Var(z)),
                        subst1(b.body, b.var, Var(z)))
        if isinstance(a, (TPi, TSg)):
            if not conv(a.dom, b.dom):
                return False
            z = fresh_name(a.var, free_vars(a.cod) | free_vars(b.cod))
            return conv(subst1(a.cod, a.var, Var(z)),
                        subst1(b.cod, b.var, Var(z)))
        if isinstance(a, (CodeSg, CodePi)):
            if a.delta != b.delta:
                return None
            if not conv(a.dom, b.dom):
                return None
            z = fresh_name(a.var, free_vars(a.cod) | free_vars(b.cod))
            return conv(subst1(a.cod, a.var, Var(z)),
                        subst1(b.cod, b.var, Var(z))) or None
        if isinstance(a, CodeAll):
            if a.delta != b.delta:
                return None
            z = fresh_name(a.clock, free_clocks(a.body) | free_clocks(b.body))
            return conv(csubst1(a.body, a.clock, z),
                        csubst1(b.body, b.clock, z))
        if isinstance(a, (Next, TLater)):
            if a.clock != b.clock or len(a.subst) != len(b.subst):
                return None
            for ba, bb in zip(a.subst, b.subst):
                if not conv(ba.term, bb.term):
                    return None
            ren = {bb.var: Var(ba.var) for ba, bb in zip(a.subst, b.subst)}
            return conv(a.body, subst(b.body, vsub=ren))
        if isinstance(a, App):
            return conv(a.fun, b.fun) and conv(a.arg, b.arg) or None
        if isinstance(a, CApp):
            if a.clock == b.clock:
                return conv(a.fun, b.fun) or None
            return None
        if isinstance(a, (Fst, Snd)):
            return conv(a.pair, b.pair) or None
        if isinstance(a, Succ):
            return conv(a.arg, b.arg) or None
        if isinstance(a, Pair):
            return conv(a.fst, b.fst) and conv(a.snd, b.snd)
        if isinstance(a, TId):
            return conv(a.type, b.type) and conv(a.lhs, b.lhs) \
                and conv(a.rhs, b.rhs)
        if isinstance(a, TEl):
            return conv(a.code, b.code) or None
        if isinstance(a, CodeLater):
            if a.clock != b.clock:
                return None
            return conv(a.body, b.body) or None
        if isinstance(a, CodeIn):
            if a.small != b.small or a.big != b.big:
                return None
            return conv(a.body, b.body) or None
        # remaining nodes are compared by plain equality (literals etc.)
        return True if a == b else None


    # -- typing -------------------------------------------------------------

    def _expose(self, ctx, ty, cls, what):
        """Normalize a type and unfold head fixes until it has the requested
        shape."""
        st = _Steps(self.step_limit)
        ty = normalize(ty, st)
        fuel = [self.fuel]
        while not isinstance(ty, cls):
            try:
                step = _unfold_head(ty, fuel, st)
            except _FuelOut:
                raise UndecidedError(
                    f"could not expose {what}: out of unfolding fuel")
            if step is None:
                from .printer import print_type
                raise CheckError(f"expected {what}, found: {print_type(ty)}")
            ty = step
        return ty

    def _bind_clock(self, ctx, clock, *nodes):
        """Alpha-rename a clock binder that would shadow a clock already in
        scope; returns the (possibly fresh) name and the renamed bodies."""
        if not ctx.has_clock(clock):
            return clock, nodes
        avoid = set(ctx.clocks())
        for n in nodes:
            avoid |= free_clocks(n)
        z = fresh_name(clock, avoid)
        return z, tuple(csubst1(n, clock, z) for n in nodes)

    def _check_delta(self, ctx, delta):
        if delta is None:
            raise CheckError("a clock-set annotation is required here")
        d = mkdelta(delta)
        for k in d:
            if not ctx.has_clock(k):
                raise CheckError(f"clock {k} is not in scope")
        return d

    def _elab_delsub(self, ctx, clock, bindings):
        """Elaborate a delayed substitution: each binding term must be a
        later on `clock` whose own delayed substitution re-binds values
        already bound earlier in this telescope."""
        elab: list[Binding] = []
        ctx2 = ctx
        seen = set()
        for b in bindings:
            if b.var in seen:
                raise CheckError(
                    f"duplicate delayed-substitution variable {b.var}")
            seen.add(b.var)
            tm, ty = self.infer(ctx, b.term)
            lt = self._expose(ctx, ty, TLater, "a later type")
            if lt.clock != clock:
                raise CheckError(
                    f"delayed binding on clock {clock} has type on clock "
                    f"{lt.clock}")
            used = set()
            ren = {}
            for lb in lt.subst:
                hit = None
                for ob in elab:
                    if ob.var in used:
                        continue
                    if self.convertible(ctx, lb.term, ob.term) is True:
                        hit = ob
                        break
                if hit is None:
                    raise CheckError(
                        "delayed binding depends on a value not bound "
                        "earlier in the substitution")
                used.add(hit.var)
                ren[lb.var] = Var(hit.var)
            elab.append(Binding(b.var, tm))
            ctx2 = ctx2.extend_var(b.var, subst(lt.body, vsub=ren))
        return tuple(elab), ctx2

    def infer(self, ctx: Ctx, t: Term):
        """Infer a type; returns (elaborated term, type)."""
        if isinstance(t, Var):
            ty = ctx.lookup_var(t.name)
            if ty is None:
                raise CheckError(f"unbound variable {t.name}")
            return t, ty
        if isinstance(t, Ann):
            ty = self.check_type(ctx, t.type)
            tm = self.check(ctx, t.term, ty)
            return (tm if isinstance(tm, Ann) else Ann(tm, ty)), ty
        if isinstance(t, Star):
            return t, TUnit()
        if isinstance(t, BoolLit):
            return t, TBool()
        if isinstance(t, NatLit):
            if t.value < 0:
                raise CheckError("negative numeral")
            return t, TNat()
        if isinstance(t, Succ):
            return Succ(self.check(ctx, t.arg, TNat())), TNat()
        if isinstance(t, FinLit):
            if not 0 <= t.index < t.modulus:
                raise CheckError(
                    f"fin({t.index},{t.modulus}) index out of range")
            return t, TFin(t.modulus)
        if isinstance(t, App):
            fun, fty = self.infer(ctx, t.fun)
            pi = self._expose(ctx, fty, TPi, "a function type")
            arg = self.check(ctx, t.arg, pi.dom)
            return App(fun, arg), subst1(pi.cod, pi.var, arg)
        if isinstance(t, Fst):
            p, pty = self.infer(ctx, t.pair)
            sg = self._expose(ctx, pty, TSg, "a pair type")
            return Fst(p), sg.dom
        if isinstance(t, Snd):
            p, pty = self.infer(ctx, t.pair)
            sg = self._expose(ctx, pty, TSg, "a pair type")
            return Snd(p), subst1(sg.cod, sg.var, Fst(p))
        if isinstance(t, CLam):
            k, (tb,) = self._bind_clock(ctx, t.clock, t.body)
            body, bty = self.infer(ctx.extend_clock(k), tb)
            return CLam(k, body), TAll(k, bty)
        if isinstance(t, CApp):
            if not ctx.has_clock(t.clock):
                raise CheckError(f"clock {t.clock} is not in scope")
            fun, fty = self.infer(ctx, t.fun)
            q = self._expose(ctx, fty, TAll, "a clock quantification")
            return CApp(fun, t.clock), csubst1(q.body, q.clock, t.clock)
        if isinstance(t, Next):
            if not ctx.has_clock(t.clock):
                raise CheckError(f"clock {t.clock} is not in scope")
            elab, ctx2 = self._elab_delsub(ctx, t.clock, t.subst)
            body, bty = self.infer(ctx2, t.body)
            return Next(t.clock, elab, body), TLater(t.clock, elab, bty)
        if isinstance(t, Prev):
            k, (tb,) = self._bind_clock(ctx, t.clock, t.body)
            body, bty = self.infer(ctx.extend_clock(k), tb)
            lt = self._expose(ctx, bty, TLater, "a later type")
            if lt.clock != k:
                raise CheckError(
                    f"prev {k} applied to a later on clock {lt.clock}; "
                    "the body may not mention values on ambient clocks")
            adv = {b.var: CApp(Prev(k, b.term), k) for b in lt.subst}
            return Prev(k, body), TAll(k, subst(lt.body, vsub=adv))
        if isinstance(t, Force):
            fun, fty = self.infer(ctx, t.arg)
            q = self._expose(ctx, fty, TAll, "a clock quantification")
            lt = self._expose(ctx, q.body, TLater, "a later type")
            if lt.clock != q.clock:
                raise CheckError(
                    "force needs a value of type All k. |>k ...")
            adv = {
                b.var: CApp(Prev(q.clock, b.term), q.clock) for b in lt.subst
            }
            return Force(fun), TAll(q.clock, subst(lt.body, vsub=adv))
        if isinstance(t, (CodeSg, CodePi)):
            dom, dty = self.infer(ctx, t.dom)
            u = self._expose(ctx, dty, TUniv, "a universe")
            if t.delta is not None and mkdelta(t.delta) != u.delta:
                raise CheckError(
                    "clock-set annotation does not match the component code")
            cod = self.check(
                ctx.extend_var(t.var, TEl(dom)), t.cod, TUniv(u.delta))
            return type(t)(u.delta, t.var, dom, cod), TUniv(u.delta)
        if isinstance(t, CodeAll):
            k, (tb,) = self._bind_clock(ctx, t.clock, t.body)
            body, bty = self.infer(ctx.extend_clock(k), tb)
            u = self._expose(ctx, bty, TUniv, "a universe")
            if k not in u.delta:
                raise CheckError(
                    f"quantified code must live in a universe containing {k}")
            delta = mkdelta(set(u.delta) - {k})
            if t.delta is not None and mkdelta(t.delta) != delta:
                raise CheckError(
                    "clock-set annotation does not match the component code")
            return CodeAll(delta, k, body), TUniv(delta)
        if isinstance(t, CodeLater):
            if not ctx.has_clock(t.clock):
                raise CheckError(f"clock {t.clock} is not in scope")
            body, bty = self.infer(ctx, t.body)
            lt = self._expose(ctx, bty, TLater, "a later type")
            if lt.clock != t.clock or lt.subst \
                    or not isinstance(lt.body, TUniv):
                raise CheckError(
                    f"Later^ {t.clock} expects a term of type "
                    f"|>{t.clock} U{{...}}")
            if t.clock not in lt.body.delta:
                raise CheckError(
                    f"Later^ code needs {t.clock} in its universe clock set")
            return CodeLater(t.clock, body), TUniv(lt.body.delta)
        if isinstance(t, CodeIn):
            small = self._check_delta(ctx, t.small)
            big = self._check_delta(ctx, t.big)
            if not set(small) <= set(big):
                raise CheckError(
                    "in{...}: source clock set must be contained in target")
            body = self.check(ctx, t.body, TUniv(small))
            return CodeIn(small, big, body), TUniv(big)
        if isinstance(t, (CodeNat, CodeUnit, CodeBool)):
            delta = self._check_delta(ctx, t.delta)
            return type(t)(delta), TUniv(delta)
        if isinstance(t, CodeFin):
            delta = self._check_delta(ctx, t.delta)
            if t.modulus < 0:
                raise CheckError("negative modulus")
            return CodeFin(delta, t.modulus), TUniv(delta)
        kind = type(t).__name__
        raise CheckError(
            f"cannot infer a type for a bare {kind}; add an annotation")

    def check(self, ctx: Ctx, t: Term, expected: Type) -> Term:
        """Check against a type; returns an elaborated, inferable term."""
        exp = normalize(expected)
        if isinstance(t, Lam):
            pi = self._expose(ctx, exp, TPi, "a function type")
            var, body = t.var, t.body
            if var != pi.var and var in free_vars(pi.cod):
                z = fresh_name(
                    var, free_vars(pi.cod) | free_vars(body) | ctx.names())
                body = subst1(body, var, Var(z))
                var = z
            cod = pi.cod if var == pi.var else subst1(pi.cod, pi.var, Var(var))
            body = self.check(ctx.extend_var(var, pi.dom), body, cod)
            return Ann(Lam(var, body), pi)
        if isinstance(t, Pair):
            sg = self._expose(ctx, exp, TSg, "a pair type")
            fst = self.check(ctx, t.fst, sg.dom)
            snd = self.check(ctx, t.snd, subst1(sg.cod, sg.var, fst))
            return Ann(Pair(fst, snd), sg)
        if isinstance(t, Fix):
            if not ctx.has_clock(t.clock):
                raise CheckError(f"clock {t.clock} is not in scope")
            ctx2 = ctx.extend_var(t.var, TLater(t.clock, (), exp))
            body = self.check(ctx2, t.body, exp)
            return Ann(Fix(t.clock, t.var, body), exp)
        if isinstance(t, Refl):
            ident = self._expose(ctx, exp, TId, "an identity type")
            self.require_convertible(
                ctx, ident.lhs, ident.rhs, "identity endpoints")
            return t
        if isinstance(t, CLam):
            q = self._expose(ctx, exp, TAll, "a clock quantification")
            k, (tb,) = self._bind_clock(ctx, t.clock, t.body)
            body_exp = q.body if q.clock == k \
                else csubst1(q.body, q.clock, k)
            body = self.check(ctx.extend_clock(k), tb, body_exp)
            return Ann(CLam(k, body), q)
        if isinstance(t, Next):
            try:
                lt = self._expose(ctx, exp, TLater, "a later type")
            except CheckError:
                lt = None
            if lt is not None and lt.clock == t.clock:
                elab, ctx2 = self._elab_delsub(ctx, t.clock, t.subst)
                ren, used, ok = {}, set(), True
                for eb in lt.subst:
                    hit = None
                    for ob in elab:
                        if ob.var in used:
                            continue
                        if self.convertible(ctx, eb.term, ob.term) is True:
                            hit = ob
                            break
                    if hit is None:
                        ok = False
                        break
                    used.add(hit.var)
                    ren[eb.var] = Var(hit.var)
                if ok:
                    body = self.check(ctx2, t.body, subst(lt.body, vsub=ren))
                    return Ann(Next(t.clock, elab, body), lt)
        if isinstance(t, Ann):
            ty = self.check_type(ctx, t.type)
            tm = self.check(ctx, t.term, ty)
            self.require_convertible(ctx, ty, exp, "annotated type")
            return tm if isinstance(tm, Ann) else Ann(tm, ty)
        tm, ty = self.infer(ctx, t)
        self.require_convertible(ctx, ty, exp, "type")
        return tm

    def check_type(self, ctx: Ctx, ty: Type) -> Type:
        """Check well-formedness of a type; returns the elaborated type."""
        if isinstance(ty, (TNat, TBool, TUnit)):
            return ty
        if isinstance(ty, TFin):
            if ty.modulus < 0:
                raise CheckError("negative modulus")
            return ty
        if isinstance(ty, (TPi, TSg)):
            dom = self.check_type(ctx, ty.dom)
            cod = self.check_type(ctx.extend_var(ty.var, dom), ty.cod)
            return type(ty)(ty.var, dom, cod)
        if isinstance(ty, TAll):
            k, (tb,) = self._bind_clock(ctx, ty.clock, ty.body)
            return TAll(k, self.check_type(ctx.extend_clock(k), tb))
        if isinstance(ty, TLater):
            if not ctx.has_clock(ty.clock):
                raise CheckError(f"clock {ty.clock} is not in scope")
            elab, ctx2 = self._elab_delsub(ctx, ty.clock, ty.subst)
            return TLater(ty.clock, elab, self.check_type(ctx2, ty.body))
        if isinstance(ty, TId):
            base = self.check_type(ctx, ty.type)
            lhs = self.check(ctx, ty.lhs, base)
            rhs = self.check(ctx, ty.rhs, base)
            return TId(base, lhs, rhs)
        if isinstance(ty, TUniv):
            return TUniv(self._check_delta(ctx, ty.delta))
        if isinstance(ty, TEl):
            code, cty = self.infer(ctx, ty.code)
            self._expose(ctx, cty, TUniv, "a universe")
            return TEl(code)
        raise CheckError(f"not a type: {ty!r}")


def check_program(definitions, checker: Optional[Checker] = None,
                  file: str = "<input>"):
    """Check a sequence of top-level definitions.

    Earlier definitions are inlined into later ones, so every result is
    closed.  Returns an ordered mapping name -> (type, term), both
    elaborated.
    """
    from .parser import Diagnostic

    checker = checker if checker is not None else Checker()
    ctx = Ctx()
    out = {}
    sub = {}
    for d in definitions:
        if d.name in out:
            raise Diagnostic(file, d.line, d.col,
                             f"duplicate definition of {d.name}")
        try:
            ty = checker.check_type(ctx, subst(d.type, vsub=sub))
            tm = checker.check(ctx, subst(d.term, vsub=sub), ty)
        except CheckError as exc:
            raise Diagnostic(file, d.line, d.col,
                             f"in {d.name}: {exc}") from exc
        out[d.name] = (ty, tm)
        sub[d.name] = tm if isinstance(tm, Ann) else Ann(tm, ty)
    return out


def _unfold_head(t, fuel, st):
    """Unfold a fix in head position once; None when there is nothing to do."""

    def rebuild(inner, new_inner):
        return new_inner

    # walk the elimination spine down to the head
    spine = []
    cur = t
    pre = t
    while True:
        pre = cur
        cur = strip_ann(cur)
        if isinstance(cur, App):
            spine.append(("app", cur.arg))
            cur = cur.fun
        elif isinstance(cur, CApp):
            spine.append(("capp", cur.clock))
            cur = cur.fun
        elif isinstance(cur, Fst):
            spine.append(("fst", None))
            cur = cur.pair
        elif isinstance(cur, Snd):
            spine.append(("snd", None))
            cur = cur.pair
        elif isinstance(cur, Prev):
            spine.append(("prev", cur.clock))
            cur = cur.body
        elif isinstance(cur, Succ):
            spine.append(("succ", None))
            cur = cur.arg
        elif isinstance(cur, TEl):
            spine.append(("el", None))
            cur = cur.code
        elif isinstance(cur, CodeIn):
            spine.append(("in", (cur.small, cur.big)))
            cur = cur.body
        else:
            break
    if not isinstance(cur, Fix):
        return None
    if fuel[0] <= 0:
        raise _FuelOut()
    fuel[0] -= 1
    # keep the annotation (if any) on the recursive occurrence so the
    # unfolding stays hereditarily inferable
    wrapped = pre if strip_ann(pre) is cur else cur
    unfolded = subst1(cur.body, cur.var, Next(cur.clock, (), wrapped))
    out = unfolded
    for kind, payload in reversed(spine):
        if kind == "app":
            out = App(out, payload)
        elif kind == "capp":
            out = CApp(out, payload)
        elif kind == "fst":
            out = Fst(out)
        elif kind == "snd":
            out = Snd(out)
        elif kind == "prev":
            out = Prev(payload, out)
        elif kind == "succ":
            out = Succ(out)
        elif kind == "el":
            out = TEl(out)
        elif kind == "in":
            out = CodeIn(payload[0], payload[1], out)
    return normalize(out, st)
