"""Executable presheaf semantics over the finite time category.

Every type denotes, at each time object and environment, a finite set of
values; every well-typed term denotes a value.  Two value representations
are provided:

* extensional mode ("ext"): function and clock-quantified values are
  tabulated as finite families indexed by morphisms out of the current
  object (within the truncation), so values are canonical, hashable and
  directly comparable;
* closure mode: functions and clock abstractions are closures evaluated on
  demand, which lets clock application temporarily raise a tick budget past
  the truncation bound.

A `prev`/`force` component at a slot needs an auxiliary object with one
extra clock and one extra budget; in extensional mode slots whose auxiliary
object falls outside the truncation are omitted, producing partial families
(the verifier reports these as capacity skips).  Closure mode computes them
regardless.
"""

from __future__ import annotations

import itertools
import os
from typing import Optional

from .syntax import (
    Ann, App, Binding, BoolLit, CApp, CLam, ClockDecl, CodeAll, CodeBool,
    CodeFin, CodeIn, CodeLater, CodeNat, CodePi, CodeSg, CodeUnit, Ctx,
    FinLit, Fix, Force, Fst, Lam, NatLit, Next, Pair, Prev, Refl, Snd, Star,
    Succ, TAll, TBool, TEl, TFin, TId, TLater, TNat, TPi, TSg, TUniv, TUnit,
    VarDecl, Var, alpha_key, subst1,
)
from .timecat import (
    TimeMorphism, TimeObject, Truncation, add_clock, compose, coproduct,
    fresh_clock, identity, inclusion, restrict_object, tick_morphism,
    tick_target,
)
from .typecheck import Checker, CheckError, normalize, strip_ann
from .universes import UnivElement, build_element


class CapacityError(Exception):
    """A value fell outside the finite observation window."""


STAR = ("star",)
REFL = ("refl",)


class Fam(tuple):
    """A tabulated family value.  Behaves exactly like the underlying
    ("fam", slots) tuple but caches its hash and repr, which dominate the
    cost of value comparison in deeply nested families."""

    def __hash__(self):
        h = self.__dict__.get("_h")
        if h is None:
            h = tuple.__hash__(self)
            self.__dict__["_h"] = h
        return h

    def __repr__(self):
        r = self.__dict__.get("_r")
        if r is None:
            r = tuple.__repr__(self)
            self.__dict__["_r"] = r
        return r


_FAM_INTERN: dict = {}


def _slot_sort_key(item):
    # Slot keys are (morphism, argument).  Morphisms are interned, so their
    # creation sequence number is a process-stable total order; it is only
    # used to pick one canonical slot ordering per interned family.
    mor, arg = item[0]
    return (mor._seq,) + value_sort_key(arg)


def _intern_fam(inner):
    hit = _FAM_INTERN.get(inner)
    if hit is None:
        hit = Fam(("fam", inner))
        hit.__dict__["_seq"] = len(_FAM_INTERN)
        _FAM_INTERN[inner] = hit
    return hit


def make_fam(slots: dict):
    return _intern_fam(tuple(sorted(slots.items(), key=_slot_sort_key)))


def make_fam_sorted(items):
    """Intern a family whose (key, value) items are already in the
    canonical slot order that make_fam would produce."""
    return _intern_fam(tuple(items))


def value_sort_key(v):
    """Process-stable total order on semantic values, used wherever a
    carrier is put into canonical order.  Families order by interning
    sequence number (equal families are the same object, so this is
    consistent); other values by their printed form."""
    if type(v) is int:
        return (0, v, "")
    if type(v) is Fam:
        return (1, v.__dict__["_seq"], "")
    if isinstance(v, tuple) and v and v[0] == "pair":
        return (2, value_sort_key(v[1]), value_sort_key(v[2]))
    return (0, 0, repr(v))


def fam_slots(value) -> dict:
    return dict(value[1])


def is_fam(value) -> bool:
    return isinstance(value, tuple) and value and value[0] == "fam"


# -- closures ----------------------------------------------------------------


class Clo:
    """A function closure: applied by evaluating the body."""

    def __init__(self, var, body, ctx, env, obj, dom):
        self.var, self.body, self.ctx = var, body, ctx
        self.env, self.obj, self.dom = env, obj, dom


class CloC:
    """A clock-abstraction closure: clock application evaluates the body at
    the same object with the clock bound to the applied one."""

    def __init__(self, clock, body, ctx, env, obj):
        self.clock, self.body, self.ctx = clock, body, ctx
        self.env, self.obj = env, obj


class PrevVal:
    """Closure-mode value of a `prev`: clock application computes the body
    at an auxiliary object with one extra tick of budget."""

    def __init__(self, clock, body, lt, ctx, env, obj):
        self.clock, self.body, self.lt = clock, body, lt
        self.ctx, self.env, self.obj = ctx, env, obj

    def capp(self, interp, lam):
        def component(ctxk, yp, envk):
            return interp.eval(ctxk, self.body, yp, envk)

        return interp.pull_back(self.ctx, self.clock, self.lt, self.obj,
                                self.env, lam, component)


class ForceVal:
    """Closure-mode value of a `force`: like PrevVal but the delayed value
    comes from clock-applying an existing quantified value."""

    def __init__(self, inner, clock, lt, ctx, env, obj):
        self.inner, self.clock, self.lt = inner, clock, lt
        self.ctx, self.env, self.obj = ctx, env, obj

    def capp(self, interp, lam):
        def component(ctxk, yp, envk):
            # ctxk ends with the fresh clock entry; its value is envk[-1]
            moved = interp.restrict_value_for(
                self.ctx, self.env, None, self.inner,
                TimeMorphism.make(self.obj, yp,
                                  {c: c for c in self.obj.clocks}),
                quantified=True)
            return interp.capply(moved, envk[-1], yp)

        return interp.pull_back(self.ctx, self.clock, self.lt, self.obj,
                                self.env, lam, component)


CLOSURE_KINDS = (Clo, CloC, PrevVal, ForceVal)


# -- section solver ----------------------------------------------------------


def solve_sections(slot_keys, candidate_fn, constraint_fn):
    """Enumerate all assignments of a value to every slot satisfying the
    given propagation constraints.

    candidate_fn(key) -> iterable of values for that slot.
    constraint_fn(key, value) -> iterable of (other key, forced value).
    Returns a list of dicts.
    """
    def _order(k):
        # Assign slots over the largest objects first: constraints only
        # propagate along elementary steps, which shrink the codomain, so
        # high-budget choices force nearly all lower slots and the search
        # branches only at the top.
        dst = k[0].dst
        weight = sum(b for _, b in dst.ticks) + len(dst.ticks)
        return (-weight, repr(k))

    keys = sorted(set(slot_keys), key=_order)
    candidates = {k: tuple(candidate_fn(k)) for k in keys}
    solutions = []
    cmemo: dict = {}

    def forced(key, value):
        hit = cmemo.get((key, value))
        if hit is None:
            hit = tuple(constraint_fn(key, value))
            cmemo[(key, value)] = hit
        return hit

    def assign(state, key, value):
        """Returns a list of newly assigned keys, or None on conflict."""
        stack = [(key, value)]
        added = []
        while stack:
            k, v = stack.pop()
            if k in state:
                if state[k] != v:
                    for a in added:
                        del state[a]
                    return None
                continue
            if v not in candidates[k]:
                for a in added:
                    del state[a]
                return None
            state[k] = v
            added.append(k)
            stack.extend(forced(k, v))
        return added

    def search(state, idx):
        while idx < len(keys) and keys[idx] in state:
            idx += 1
        if idx == len(keys):
            solutions.append(dict(state))
            return
        key = keys[idx]
        for value in candidates[key]:
            added = assign(state, key, value)
            if added is None:
                continue
            search(state, idx + 1)
            for a in added:
                del state[a]

    search({}, 0)
    return solutions


def solve_equality_sections(slot_keys, candidate_fn, target_fn):
    """Special case of solve_sections where every constraint forces the
    *same* value on the target slot.  Solutions are exactly the assignments
    constant on each connected component of the slot graph, with a value
    every slot of the component admits; no search is needed."""
    keys = list(dict.fromkeys(slot_keys))
    parent = {k: k for k in keys}

    def find(k):
        path = []
        while parent[k] != k:
            path.append(k)
            k = parent[k]
        for p in path:
            parent[p] = k
        return k

    for k in keys:
        rk = find(k)
        for t in target_fn(k):
            rt = find(t)
            if rt != rk:
                parent[rt] = rk
                rk = find(k)

    comps: dict = {}
    root_order = []
    for k in keys:
        r = find(k)
        allowed = comps.get(r)
        if allowed is None:
            comps[r] = dict.fromkeys(candidate_fn(k))
            root_order.append(r)
        else:
            cset = set(candidate_fn(k))
            for v in [v for v in allowed if v not in cset]:
                del allowed[v]

    choices = [tuple(comps[r]) for r in root_order]
    solutions = []
    for combo in itertools.product(*choices):
        chosen = dict(zip(root_order, combo))
        solutions.append({k: chosen[find(k)] for k in keys})
    return solutions


# -- environments ------------------------------------------------------------


def env_clock(ctx: Ctx, env: tuple, name: str) -> int:
    for entry, value in zip(reversed(ctx.entries), reversed(env)):
        if isinstance(entry, ClockDecl) and entry.name == name:
            return value
    raise KeyError(f"clock {name} not bound in the environment")


def env_var(ctx: Ctx, env: tuple, name: str):
    for entry, value in zip(reversed(ctx.entries), reversed(env)):
        if isinstance(entry, VarDecl) and entry.name == name:
            return value
    raise KeyError(f"variable {name} not bound in the environment")


def env_key(env: tuple):
    return tuple(
        v.key() if isinstance(v, UnivElement) else v for v in env
    )


# -- the interpreter ---------------------------------------------------------


# cross-check every shortcut restriction against the slot-by-slot rebuild
_CHECK_ACTIONS = os.environ.get("GDTT_CHECK_ACTIONS") == "1"


class _ChoiceRestrict:
    """Restriction shortcut for families produced by equality solves.

    Such a family is determined by one chosen value per slot-graph
    component.  Connected slots pull back to connected slots along any
    morphism, so the restriction of the family is the already-interned
    family at the target whose choice at each component is the source
    choice at the component its slots pull back into -- a table lookup
    instead of a slot-by-slot rebuild."""

    __slots__ = ("world", "choice", "pins", "bychoice", "reps", "posfn",
                 "perm")

    def __init__(self, world):
        self.world = world
        self.choice: dict = {}    # id(family) -> choice vector
        self.pins: list = []
        self.bychoice: dict = {}  # dst -> {choice vector: family}
        self.reps: dict = {}      # dst -> representative slot per position
        self.posfn: dict = {}     # solved canonical dst -> key -> position
        self.perm: dict = {}      # morphism -> source position per position

    def register(self, dst, fams, combos, reps, posfn):
        self.bychoice[dst] = dict(zip(combos, fams))
        self.reps[dst] = reps
        self.posfn[dst] = posfn
        ch = self.choice
        for f, cb in zip(fams, combos):
            ch[id(f)] = cb
            self.pins.append(f)

    def register_rekeyed(self, dst, pim, src_fams, fams):
        # fams at dst are the rekeys of src_fams (solved at pim.dst), so
        # they share choice vectors; representatives transport along pim
        ch = self.choice
        combos = [ch[id(f)] for f in src_fams]
        self.bychoice[dst] = dict(zip(combos, fams))
        self.reps[dst] = tuple(
            (compose(mu, pim), x) for mu, x in self.reps[pim.dst])
        for g, cb in zip(fams, combos):
            ch[id(g)] = cb
            self.pins.append(g)

    def _pos_of(self, dst, key):
        fn = self.posfn.get(dst)
        if fn is not None:
            return fn(key)
        # transport the slot to the canonical object dst was solved at
        pim, _ = self.world._canon_renaming(dst)
        pinv = TimeMorphism.make(
            pim.dst, dst, {im: c for c, im in pim.mapping})
        return self.posfn[pim.dst]((compose(key[0], pinv), key[1]))

    def restrict(self, value, e):
        cb = self.choice.get(id(value))
        if cb is None:
            return None
        tbl = self.bychoice.get(e.dst)
        if tbl is None:
            return None
        pm = self.perm.get(e)
        if pm is None:
            pm = tuple(self._pos_of(e.src, (compose(mu, e), x))
                       for mu, x in self.reps[e.dst])
            self.perm[e] = pm
        return tbl.get(tuple(cb[p] for p in pm))


class Interp:
    def __init__(self, trunc: Truncation, nat_bound: int = 2,
                 mode: str = "ext", checker: Optional[Checker] = None):
        if mode not in ("ext", "closure"):
            raise ValueError(f"unknown mode {mode!r}")
        self.trunc = trunc
        self.nat_bound = nat_bound
        self.mode = mode
        self.checker = checker if checker is not None else Checker()
        self._mors: dict = {}
        self._eval_memo: dict = {}
        self._carrier_memo: dict = {}
        self._infer_memo: dict = {}
        self._norm_memo: dict = {}
        self._delsub_memo: dict = {}
        self._rfam_memo: dict = {}
        self._rfam_pins: list = []
        self._rfam_groups: dict = {}
        self._rfam_table: dict = {}
        self._morseq_memo: dict = {}
        self._rekey_tables: dict = {}
        self._mor_rename_memo: dict = {}
        self._uid_memo: dict = {}
        self._uid_pins: list = []
        self._uconst_memo: dict = {}
        self._edges_memo: dict = {}
        self._slotcomp_memo: dict = {}
        self._canon_memo: dict = {}
        self._code_memo: dict = {}
        self._rename_memo: dict = {}
        self._rename_pins: list = []

    # -- world protocol (used by universe elements) --

    def mors_from(self, obj: TimeObject):
        cached = self._mors.get(obj)
        if cached is None:
            if self.trunc.contains(obj):
                cached = self.trunc.morphisms_from(obj)
            else:
                cached = tuple(
                    m for dst in self.trunc.objects()
                    for m in self.trunc.hom(obj, dst)
                )
            self._mors[obj] = cached
        return cached

    def elementary_from(self, obj: TimeObject):
        return self.trunc.elementary_from(obj)

    # -- cached syntax services --

    def norm(self, node):
        key = alpha_key(node)
        hit = self._norm_memo.get(key)
        if hit is None:
            hit = normalize(node)
            self._norm_memo[key] = hit
        return hit

    def infer_type(self, ctx: Ctx, t):
        key = (alpha_key(t), ctx.key())
        hit = self._infer_memo.get(key)
        if hit is None:
            _, ty = self.checker.infer(ctx, t)
            hit = self.norm(ty)
            self._infer_memo[key] = hit
        return hit

    def delsub_ctx(self, ctx: Ctx, clock: str, bindings) -> Ctx:
        """Context extended with the telescope bound by a delayed
        substitution."""
        key = (ctx.key(), clock,
               tuple((b.var, alpha_key(b.term)) for b in bindings))
        hit = self._delsub_memo.get(key)
        if hit is None:
            _, hit = self.checker._elab_delsub(ctx, clock, bindings)
            self._delsub_memo[key] = hit
        return hit

    def base_of(self, ctx, env, obj, delta) -> TimeObject:
        return restrict_object(
            obj, {env_clock(ctx, env, k) for k in delta})

    # -- restriction --

    def restrict_env(self, ctx: Ctx, env: tuple,
                     tau: TimeMorphism) -> tuple:
        out = []
        for i, entry in enumerate(ctx.entries):
            if isinstance(entry, ClockDecl):
                out.append(tau(env[i]))
            else:
                prefix = Ctx(ctx.entries[:i])
                out.append(self.restrict_value(
                    prefix, tuple(env[:i]), entry.type, env[i], tau))
        return tuple(out)

    def restrict_value(self, ctx: Ctx, env: tuple, ty, value,
                       tau: TimeMorphism):
        if tau.is_identity():
            return value
        ty = self.norm(ty)
        if isinstance(value, CLOSURE_KINDS):
            return self._restrict_closure(value, tau)
        if isinstance(ty, (TNat, TBool, TUnit, TFin, TId)):
            return value
        if isinstance(ty, TUniv):
            return value.restrict_along(self, tau.src, tau)
        if isinstance(ty, TEl):
            u = self.eval(ctx, ty.code, tau.src, env)
            sigma0 = inclusion(u.base, tau.src)
            try:
                return u.act(self, sigma0, tau)[value]
            except (KeyError, AssertionError) as exc:
                raise CapacityError(
                    f"cannot restrict a universe member along {tau!r}"
                ) from exc
        if isinstance(ty, TSg):
            f, s = value[1], value[2]
            rf = self.restrict_value(ctx, env, ty.dom, f, tau)
            ctx2 = ctx.extend_var(ty.var, ty.dom)
            rs = self.restrict_value(ctx2, env + (f,), ty.cod, s, tau)
            return ("pair", rf, rs)
        if isinstance(ty, (TPi, TAll)):
            return self._restrict_fam(value, tau)
        if isinstance(ty, TLater):
            lam = env_clock(ctx, env, ty.clock)
            image = tau(lam)
            if tau.dst.budget(image) == 0:
                return STAR
            tick = tick_morphism(tau.src, lam)
            ctx2 = self.delsub_ctx(ctx, ty.clock, ty.subst)
            env2 = self.restrict_env(ctx, env, tick) + tuple(
                self.eval(ctx, b.term, tau.src, env) for b in ty.subst
            )
            tau2 = TimeMorphism.make(
                tick.dst, tick_target(tau.dst, image), tau.fn())
            return self.restrict_value(ctx2, env2, ty.body, value, tau2)
        raise CapacityError(f"cannot restrict a value of type {ty!r}")

    def restrict_value_for(self, ctx, env, ty, value, tau, quantified=False):
        """Restrict when only the value's shape matters (closures and
        families carry their own structure)."""
        if isinstance(value, CLOSURE_KINDS):
            return self._restrict_closure(value, tau)
        if is_fam(value):
            return self._restrict_fam(value, tau)
        return self.restrict_value(ctx, env, ty, value, tau)

    def _restrict_closure(self, value, tau: TimeMorphism):
        if isinstance(value, Clo):
            return Clo(value.var, value.body, value.ctx,
                       self.restrict_env(value.ctx, value.env, tau),
                       tau.dst, value.dom)
        if isinstance(value, CloC):
            return CloC(value.clock, value.body, value.ctx,
                        self.restrict_env(value.ctx, value.env, tau),
                        tau.dst)
        if isinstance(value, PrevVal):
            return PrevVal(value.clock, value.body, value.lt, value.ctx,
                           self.restrict_env(value.ctx, value.env, tau),
                           tau.dst)
        return ForceVal(
            self.restrict_value_for(value.ctx, value.env, None,
                                    value.inner, tau, quantified=True),
            value.clock, value.lt, value.ctx,
            self.restrict_env(value.ctx, value.env, tau), tau.dst)

    def _fam_grouped(self, value) -> dict:
        """The family's slots grouped by index morphism, arguments in
        canonical order; memoized by object identity (families are
        interned and immutable)."""
        grouped = self._rfam_groups.get(id(value))
        if grouped is None:
            grouped = {}
            for (mu, arg), val in value[1]:
                grouped.setdefault(mu, []).append((arg, val))
            for pairs in grouped.values():
                pairs.sort(key=lambda p: value_sort_key(p[0]))
            self._rfam_groups[id(value)] = grouped
            self._rfam_pins.append(value)
        return grouped

    def _restrict_fam(self, value, tau: TimeMorphism):
        # Families are immutable tuples, so memoizing by object identity is
        # sound; the pin list keeps cached keys alive.
        key = (id(value), tau)
        hit = self._rfam_memo.get(key)
        if hit is not None:
            return hit
        grouped = self._fam_grouped(value)
        pre = self._rfam_table.get(tau)
        if pre is None:
            rhos = self._mors_seq(tau.dst)
            pre = tuple((rho, compose(rho, tau)) for rho in rhos)
            self._rfam_table[tau] = pre
        # iterating indices by sequence number and arguments in their
        # canonical order emits the slots pre-sorted
        items = []
        for rho, mu in pre:
            hits = grouped.get(mu)
            if hits:
                items += [((rho, arg), val) for arg, val in hits]
        out = make_fam_sorted(items)
        self._rfam_memo[key] = out
        self._rfam_pins.append(value)
        return out

    # -- evaluation --

    def eval(self, ctx: Ctx, t, obj: TimeObject, env: tuple, hint=None):
        if True:
            try:
                key = (alpha_key(t), ctx.key(), obj, env_key(env))
            except TypeError:
                key = None
            if key is not None:
                hit = self._eval_memo.get(key, _MISSING)
                if hit is not _MISSING:
                    if isinstance(hit, CapacityError):
                        raise hit
                    return hit
                try:
                    value = self._eval(ctx, t, obj, env, hint)
                except CapacityError as exc:
                    self._eval_memo[key] = exc
                    raise
                self._eval_memo[key] = value
                return value
        return self._eval(ctx, t, obj, env, hint)

    def _eval(self, ctx, t, obj, env, hint):
        if isinstance(t, Var):
            return env_var(ctx, env, t.name)
        if isinstance(t, Ann):
            return self.eval(ctx, t.term, obj, env, hint=t.type)
        if isinstance(t, Star):
            return STAR
        if isinstance(t, Refl):
            return REFL
        if isinstance(t, BoolLit):
            return ("bool", t.value)
        if isinstance(t, NatLit):
            if t.value > self.nat_bound:
                raise CapacityError(
                    f"numeral {t.value} exceeds the bound {self.nat_bound}")
            return ("nat", t.value)
        if isinstance(t, FinLit):
            return ("fin", t.index)
        if isinstance(t, Succ):
            n = self.eval(ctx, t.arg, obj, env)[1]
            if n + 1 > self.nat_bound:
                raise CapacityError(
                    f"numeral {n + 1} exceeds the bound {self.nat_bound}")
            return ("nat", n + 1)
        if isinstance(t, Lam):
            pi = self._intro_hint(ctx, t, hint, TPi)
            if self.mode == "closure":
                return Clo(t.var, t.body, ctx, env, obj, pi.dom)
            ctx2 = ctx.extend_var(t.var, pi.dom)
            slots = {}
            for sigma in self.mors_from(obj):
                renv = self.restrict_env(ctx, env, sigma)
                for a in self.carrier(ctx, pi.dom, sigma.dst, renv):
                    slots[(sigma, a)] = self.eval(
                        ctx2, t.body, sigma.dst, renv + (a,))
            return make_fam(slots)
        if isinstance(t, App):
            vf = self.eval(ctx, t.fun, obj, env)
            va = self.eval(ctx, t.arg, obj, env)
            return self.apply(vf, va, obj)
        if isinstance(t, Pair):
            sg = self._intro_hint(ctx, t, hint, TSg)
            vf = self.eval(ctx, t.fst, obj, env, hint=sg.dom)
            vs = self.eval(ctx, t.snd, obj, env,
                           hint=subst1(sg.cod, sg.var, t.fst))
            return ("pair", vf, vs)
        if isinstance(t, Fst):
            return self.eval(ctx, t.pair, obj, env)[1]
        if isinstance(t, Snd):
            return self.eval(ctx, t.pair, obj, env)[2]
        if isinstance(t, CLam):
            if self.mode == "closure":
                return CloC(t.clock, t.body, ctx, env, obj)
            ctx2 = ctx.extend_clock(t.clock)
            slots = {}
            for sigma in self.mors_from(obj):
                renv = self.restrict_env(ctx, env, sigma)
                for lam in sorted(sigma.dst.clocks):
                    slots[(sigma, lam)] = self.eval(
                        ctx2, t.body, sigma.dst, renv + (lam,))
            return make_fam(slots)
        if isinstance(t, CApp):
            vf = self.eval(ctx, t.fun, obj, env)
            return self.capply(vf, env_clock(ctx, env, t.clock), obj)
        if isinstance(t, Next):
            lam = env_clock(ctx, env, t.clock)
            if obj.budget(lam) == 0:
                return STAR
            tick = tick_morphism(obj, lam)
            ctx2 = self.delsub_ctx(ctx, t.clock, t.subst)
            env2 = self.restrict_env(ctx, env, tick) + tuple(
                self.eval(ctx, b.term, obj, env) for b in t.subst
            )
            return self.eval(ctx2, t.body, tick.dst, env2)
        if isinstance(t, Fix):
            a = self._intro_hint(ctx, t, hint, None)
            lam = env_clock(ctx, env, t.clock)
            if obj.budget(lam) == 0:
                xval = STAR
            else:
                tick = tick_morphism(obj, lam)
                xval = self.eval(
                    ctx, Ann(t, a), tick.dst,
                    self.restrict_env(ctx, env, tick))
            ctx2 = ctx.extend_var(t.var, TLater(t.clock, (), a))
            return self.eval(ctx2, t.body, obj, env + (xval,), hint=a)
        if isinstance(t, Prev):
            ctxk = ctx.extend_clock(t.clock)
            lt = self.checker._expose(
                ctxk, self.infer_type(ctxk, t.body), TLater, "a later type")
            if self.mode == "closure":
                return PrevVal(t.clock, t.body, lt, ctx, env, obj)
            slots = {}
            for sigma in self.mors_from(obj):
                renv = self.restrict_env(ctx, env, sigma)
                for lam in sorted(sigma.dst.clocks):
                    def component(ck, yp, envk, _t=t):
                        return self.eval(ck, _t.body, yp, envk)
                    try:
                        slots[(sigma, lam)] = self.pull_back(
                            ctx, t.clock, lt, sigma.dst, renv, lam,
                            component)
                    except CapacityError:
                        pass
            return make_fam(slots)
        if isinstance(t, Force):
            q = self.checker._expose(
                ctx, self.infer_type(ctx, t.arg), TAll,
                "a clock quantification")
            ctxk = ctx.extend_clock(q.clock)
            lt = self.checker._expose(
                ctxk, self.norm(q.body), TLater, "a later type")
            vf = self.eval(ctx, t.arg, obj, env)
            if self.mode == "closure":
                return ForceVal(vf, q.clock, lt, ctx, env, obj)
            fslots = fam_slots(vf)
            slots = {}
            for sigma in self.mors_from(obj):
                renv = self.restrict_env(ctx, env, sigma)
                for lam in sorted(sigma.dst.clocks):
                    def component(ck, yp, envk, _sigma=sigma):
                        sigp = TimeMorphism.make(obj, yp, _sigma.fn())
                        if (sigp, envk[-1]) not in fslots:
                            raise CapacityError("slot outside the window")
                        return fslots[(sigp, envk[-1])]
                    try:
                        slots[(sigma, lam)] = self.pull_back(
                            ctx, q.clock, lt, sigma.dst, renv, lam,
                            component)
                    except CapacityError:
                        pass
            return make_fam(slots)
        if isinstance(t, (CodeSg, CodePi, CodeAll, CodeLater, CodeIn,
                          CodeNat, CodeUnit, CodeBool, CodeFin)):
            return self._eval_code(ctx, t, obj, env)
        raise CapacityError(f"cannot evaluate {type(t).__name__}")

    def _intro_hint(self, ctx, t, hint, cls):
        if hint is None:
            raise CheckError(
                f"evaluation needs an annotation on {type(t).__name__}")
        hint = self.norm(hint)
        if cls is not None and not isinstance(hint, cls):
            hint = self.checker._expose(ctx, hint, cls, "an annotation")
        return hint

    # -- elimination --

    def apply(self, vf, va, obj):
        if isinstance(vf, Clo):
            ctx2 = vf.ctx.extend_var(vf.var, vf.dom)
            return self.eval(ctx2, vf.body, vf.obj, vf.env + (va,))
        slots = fam_slots(vf)
        key = (identity(obj), va)
        if key not in slots:
            raise CapacityError("application outside the tabulated window")
        return slots[key]

    def capply(self, vf, lam, obj):
        if isinstance(vf, CloC):
            ctx2 = vf.ctx.extend_clock(vf.clock)
            return self.eval(ctx2, vf.body, vf.obj, vf.env + (lam,))
        if isinstance(vf, (PrevVal, ForceVal)):
            return vf.capp(self, lam)
        slots = fam_slots(vf)
        key = (identity(obj), lam)
        if key not in slots:
            raise CapacityError(
                "clock application outside the tabulated window")
        return slots[key]

    def pull_back(self, ctx, clock, lt: TLater, y: TimeObject, env,
                  lam: int, component_fn):
        """One quantified-value component of a prev/force at (y, lam): the
        delayed body is computed at an auxiliary object with a fresh clock
        carrying one extra tick of budget, and the result is pulled back to
        y by identifying the fresh clock with lam."""
        d = y.budget(lam)
        c = fresh_clock(y.clocks)
        yp = add_clock(y, c, d + 1)
        if self.mode == "ext" and not self.trunc.contains(yp):
            raise CapacityError("auxiliary object outside the truncation")
        incl = TimeMorphism.make(y, yp, {cc: cc for cc in y.clocks})
        envp = self.restrict_env(ctx, env, incl)
        ctxk = ctx.extend_clock(clock)
        envk = envp + (c,)
        vb = component_fn(ctxk, yp, envk)
        tick = tick_morphism(yp, c)
        ctxa = self.delsub_ctx(ctxk, clock, lt.subst)
        enva = self.restrict_env(ctxk, envk, tick) + tuple(
            self.eval(ctxk, b.term, yp, envk) for b in lt.subst
        )
        fn = {cc: cc for cc in y.clocks}
        fn[c] = lam
        rho = TimeMorphism.make(tick.dst, y, fn)
        return self.restrict_value(ctxa, enva, lt.body, vb, rho)

    # -- universe codes --

    def _eval_code(self, ctx, t, obj, env):
        # A code denotes a universe element whose data is indexed by
        # morphisms out of its base, so the value can only depend on the
        # ambient object through the budgets of the clocks reachable from
        # the environment.  Memoizing on that restriction shares the work
        # across all objects that agree on those budgets.
        try:
            akey = alpha_key(t)
            ck = ctx.key()
            named = frozenset(
                env[i] for i, entry in enumerate(ctx.entries)
                if isinstance(entry, ClockDecl))
            visible = restrict_object(obj, named & set(obj.clocks))
        except TypeError:
            return self._eval_code_raw(ctx, t, obj, env)
        if all(isinstance(e, ClockDecl) for e in ctx.entries):
            # Clock-only environment: the construction is equivariant
            # under bijective budget-preserving clock renamings, so
            # evaluate once at a canonical assignment and transport the
            # result by renaming its index data.
            order = sorted(visible.clocks)
            pi = {c: i for i, c in enumerate(order)}
            canon_obj = TimeObject(tuple(
                (pi[c], visible.budget(c)) for c in order))
            env_c = tuple(pi[x] for x in env)
            key = (akey, ck, env_c, canon_obj)
            out = self._code_memo.get(key)
            if out is None:
                out = self._eval_code_raw(ctx, t, canon_obj, env_c)
                self._code_memo[key] = out
            if all(pi[c] == c for c in order):
                return out
            inv = {i: c for c, i in pi.items()}
            rkey = (id(out), tuple(sorted(inv.items())))
            ren = self._rename_memo.get(rkey)
            if ren is None:
                ren = out.rename(inv, self._rekey_tables)
                self._rename_memo[rkey] = ren
                self._rename_pins.append(out)
            return ren
        key = (akey, ck, env_key(env), visible)
        cached = self._code_memo.get(key)
        if cached is not None:
            return cached
        out = self._eval_code_raw(ctx, t, obj, env)
        self._code_memo[key] = out
        return out

    def _eval_code_raw(self, ctx, t, obj, env):
        if isinstance(t, (CodeNat, CodeUnit, CodeBool, CodeFin)):
            base = self.base_of(ctx, env, obj, t.delta)
            if isinstance(t, CodeNat):
                values = tuple(("nat", i)
                               for i in range(self.nat_bound + 1))
            elif isinstance(t, CodeBool):
                values = (("bool", False), ("bool", True))
            elif isinstance(t, CodeUnit):
                values = (STAR,)
            else:
                values = tuple(("fin", i) for i in range(t.modulus))
            return build_element(self, base, lambda sigma: values,
                                 lambda sigma, e, v: v, shared_action=True)
        if isinstance(t, (CodeSg, CodePi)):
            ua = self.eval(ctx, t.dom, obj, env)
            ctx2 = ctx.extend_var(t.var, TEl(t.dom))

            def fiber(v):
                return self.eval(ctx2, t.cod, obj, env + (v,))

            if isinstance(t, CodeSg):
                return self._sigma_code(ua, fiber)
            return self._pi_code(ua, fiber)
        if isinstance(t, CodeAll):
            return self._all_code(ctx, t, obj, env)
        if isinstance(t, CodeLater):
            return self._later_code(ctx, t, obj, env)
        # inclusion between universes
        ub = self.eval(ctx, t.body, obj, env)
        base = self.base_of(ctx, env, obj, t.big)
        j = inclusion(ub.base, base)
        return build_element(
            self, base,
            lambda sigma: ub.component(compose(sigma, j)),
            lambda sigma, e, v: ub.act_elem(compose(sigma, j), e)[v])

    value_key = staticmethod(value_sort_key)

    def _mors_seq(self, obj: TimeObject) -> tuple:
        """Morphisms out of obj in canonical (interning-sequence) order."""
        hit = self._morseq_memo.get(obj)
        if hit is None:
            hit = tuple(sorted(self.mors_from(obj), key=lambda m: m._seq))
            self._morseq_memo[obj] = hit
        return hit

    def edge_table(self, obj: TimeObject) -> dict:
        """For each morphism tau out of obj, the precomposed elementary
        steps ((e o tau, e), ...) out of tau's codomain; this is the edge
        set of every naturality constraint graph rooted at obj."""
        hit = self._edges_memo.get(obj)
        if hit is None:
            hit = {tau: tuple(
                       (compose(step.morphism, tau), step.morphism)
                       for step in self.elementary_from(tau.dst))
                   for tau in self.mors_from(obj)}
            self._edges_memo[obj] = hit
        return hit

    def _tau_components(self, obj: TimeObject):
        """Connected components of the morphisms out of obj under
        postcomposition with elementary steps; morphisms come back in
        canonical (interning-sequence) order.  Shared by every solve whose
        naturality constraints leave the slot argument fixed."""
        hit = self._slotcomp_memo.get(("tau", obj))
        if hit is None:
            steps = self.edge_table(obj)
            taus = list(self._mors_seq(obj))
            index = {t: i for i, t in enumerate(taus)}
            parent = list(range(len(taus)))

            def find(i):
                while parent[i] != i:
                    parent[i] = parent[parent[i]]
                    i = parent[i]
                return i

            for tau in taus:
                a = find(index[tau])
                for comp, _ in steps[tau]:
                    b = find(index[comp])
                    if b != a:
                        parent[b] = a
            comp_of = {tau: find(i) for tau, i in index.items()}
            hit = (taus, comp_of)
            self._slotcomp_memo[("tau", obj)] = hit
        return hit

    def _tau_lam_components(self, obj: TimeObject):
        """Components of the slots (tau, clock of tau's codomain) under
        (tau, lam) -> (e o tau, e(lam)); slots in canonical order."""
        hit = self._slotcomp_memo.get(("tau-lam", obj))
        if hit is None:
            steps = self.edge_table(obj)
            taus = list(self._mors_seq(obj))
            keys = [(tau, lam) for tau in taus
                    for lam in sorted(tau.dst.clocks)]
            index = {k: i for i, k in enumerate(keys)}
            parent = list(range(len(keys)))

            def find(i):
                while parent[i] != i:
                    parent[i] = parent[parent[i]]
                    i = parent[i]
                return i

            for tau, lam in keys:
                a = find(index[(tau, lam)])
                for comp, e in steps[tau]:
                    b = find(index[(comp, e._fn[lam])])
                    if b != a:
                        parent[b] = a
                        a = find(a)
            comp_of = {k: find(i) for k, i in index.items()}
            hit = (keys, comp_of)
            self._slotcomp_memo[("tau-lam", obj)] = hit
        return hit

    def _canon_renaming(self, dst: TimeObject):
        """The budget-sorted renaming of dst onto a canonical object, as
        (renaming morphism, rekey rows) -- rows pair each morphism out of
        dst with the corresponding morphism out of the canonical object,
        sorted so that rekeyed family slots come out in canonical order.
        (None, None) when dst is already canonical."""
        hit = self._canon_memo.get(dst)
        if hit is None:
            order = sorted(dst.clocks, key=lambda c: (dst.budget(c), c))
            pi = {c: i for i, c in enumerate(order)}
            if all(pi[c] == c for c in order):
                hit = (None, None)
            else:
                dst_c = TimeObject(tuple(sorted(
                    (pi[c], dst.budget(c)) for c in order)))
                pim = TimeMorphism.make(dst, dst_c, pi)
                rows = tuple(sorted(
                    ((compose(tau_c, pim), tau_c)
                     for tau_c in self.mors_from(dst_c)),
                    key=lambda p: p[0]._seq))
                hit = (pim, rows)
            self._canon_memo[dst] = hit
        return hit

    def _rekey_fam(self, fam, rows):
        """Transport a family along precomputed rekey rows; emits slots
        pre-sorted."""
        grouped = self._fam_grouped(fam)
        items = []
        for tau_new, tau_c in rows:
            hits = grouped.get(tau_c)
            if hits:
                items += [((tau_new, arg), val) for arg, val in hits]
        return make_fam_sorted(items)

    def _equality_fams(self, keys, comp_fn, candidate_fn):
        """All natural families over canonically ordered slots when every
        constraint forces equal values across a slot-graph component:
        the product, over components, of the values every slot admits.

        Returns (families, choice vectors, representative slot per
        component, component id -> choice position)."""
        cids = [comp_fn(k) for k in keys]
        allowed = {}
        order = []
        reps = []
        # candidate tuples are memoized long-lived objects, so a tuple
        # already intersected for a component can be skipped by identity
        seen: dict = {}
        for k, cid in zip(keys, cids):
            cur = allowed.get(cid)
            if cur is None:
                vs = candidate_fn(k)
                allowed[cid] = dict.fromkeys(vs)
                order.append(cid)
                reps.append(k)
                seen[cid] = {id(vs): vs}
            else:
                vs = candidate_fn(k)
                sc = seen[cid]
                if id(vs) in sc:
                    continue
                sc[id(vs)] = vs
                if not set(vs).issuperset(cur):
                    s = set(vs)
                    for v in [v for v in cur if v not in s]:
                        del cur[v]
        pos = {cid: i for i, cid in enumerate(order)}
        kp = [(k, pos[cid]) for k, cid in zip(keys, cids)]
        fams = []
        combos = []
        for combo in itertools.product(*[tuple(allowed[c]) for c in order]):
            fams.append(make_fam_sorted(
                [(k, combo[p]) for k, p in kp]))
            combos.append(combo)
        return fams, combos, tuple(reps), pos

    def _constant_element(self, u: UnivElement) -> bool:
        """Whether the element has the same carrier at every index and
        identity actions; its members then look the same from every index
        and solves against it depend only on the indexing object."""
        flag = self._uconst_memo.get(id(u))
        if flag is None:
            first = None
            flag = True
            for vs in u.carriers.values():
                if first is None:
                    first = vs
                elif vs != first:
                    flag = False
                    break
            flag = flag and self._identity_actions(u)
            self._uconst_memo[id(u)] = flag
            self._uid_pins.append(u)
        return flag

    def _identity_actions(self, u: UnivElement) -> bool:
        """Whether every stored action of the element is an identity map;
        then restriction of its members along any morphism is the
        identity and naturality constraints degenerate to equalities."""
        flag = self._uid_memo.get(id(u))
        if flag is None:
            flag = all(v is w or v == w
                       for pairs in u.actions.values()
                       for v, w in pairs)
            self._uid_memo[id(u)] = flag
            self._uid_pins.append(u)
        return flag

    def _sigma_code(self, ua, fiber):
        def component(sigma):
            for v in ua.component(sigma):
                for w in fiber(v).component(sigma):
                    yield ("pair", v, w)

        def action(sigma, e, value):
            _, v, w = value
            return ("pair", ua.act_elem(sigma, e)[v],
                    fiber(v).act_elem(sigma, e)[w])

        return build_element(self, ua.base, component, action)

    def _pi_code(self, ua, fiber):
        ua_id = self._identity_actions(ua)
        ua_const = self._constant_element(ua)
        comp_memo: dict = {}

        # when domain and fibers look the same from every index, the solved
        # system depends only on the indexing object
        const = ua_const and all(
            self._constant_element(fiber(v))
            for vs in ua.carriers.values() for v in vs)

        def component_at(sigma):
            memo_key = sigma.dst if const else sigma
            hit = comp_memo.get(memo_key)
            if hit is not None:
                return hit

            if const:
                ccache: dict = {}

                def candidates(key):
                    v = key[1]
                    hit = ccache.get(v)
                    if hit is None:
                        hit = fiber(v).component(compose(key[0], sigma))
                        ccache[v] = hit
                    return hit
            else:
                def candidates(key):
                    tau, v = key
                    return fiber(v).component(compose(tau, sigma))

            taus, tcomp = self._tau_components(sigma.dst)
            skeys = []
            for tau in taus:
                skeys.extend((tau, v)
                             for v in ua.component(compose(tau, sigma)))
            if const or (ua_id and all(
                    self._identity_actions(fiber(v))
                    for v in {v for _, v in skeys})):
                comp_fn = lambda k: (tcomp[k[0]], k[1])
                fams, combos, reps, pos = self._equality_fams(
                    skeys, comp_fn, candidates)
                hit = tuple(fams)
                if const:
                    tracker.register(
                        sigma.dst, fams, combos, reps,
                        lambda key, _p=pos, _c=comp_fn: _p[_c(key)])
                comp_memo[memo_key] = hit
                return hit

            steps = self.edge_table(sigma.dst)

            def constraints(key, w):
                tau, v = key
                idx = compose(tau, sigma)
                out = []
                for comp, e in steps[tau]:
                    v2 = ua.act_elem(idx, e)[v]
                    w2 = fiber(v).act_elem(idx, e)[w]
                    out.append(((comp, v2), w2))
                return out

            hit = tuple(make_fam(sol) for sol in
                        solve_sections(skeys, candidates, constraints))
            comp_memo[memo_key] = hit
            return hit

        outer_memo: dict = {}
        tracker = _ChoiceRestrict(self)

        def component(sigma):
            # components at indices that differ only by a bijective
            # renaming of the codomain are rekeyings of each other:
            # slot (tau, v) of the canonical index corresponds to
            # (tau o pi, v) with the same value
            okey = sigma.dst if const else sigma
            hit = outer_memo.get(okey)
            if hit is None:
                pim, rows = self._canon_renaming(sigma.dst)
                if pim is None:
                    hit = component_at(sigma)
                else:
                    src = component_at(compose(pim, sigma))
                    hit = tuple(self._rekey_fam(f, rows) for f in src)
                    if const and sigma.dst not in tracker.bychoice:
                        tracker.register_rekeyed(sigma.dst, pim, src, hit)
                outer_memo[okey] = hit
            return hit

        def action(sigma, e, value):
            if const:
                g = tracker.restrict(value, e)
                if g is not None:
                    if _CHECK_ACTIONS:
                        assert g is self._restrict_fam(value, e)
                    return g
            return self._restrict_fam(value, e)

        return build_element(self, ua.base, component, action,
                             shared_action=True)

    def _all_code(self, ctx, t, obj, env):
        base = self.base_of(ctx, env, obj, t.delta)
        ctxk = ctx.extend_clock(t.clock)

        inst_memo: dict = {}

        def instance(w: TimeObject, lam: int):
            hit = inst_memo.get((w, lam))
            if hit is None:
                z, inl, inr = coproduct(obj, w)
                to_z = TimeMorphism.make(obj, z, inl)
                envz = self.restrict_env(ctx, env, to_z)
                ua = self.eval(ctxk, t.body, z, envz + (inr[lam],))
                hit = (ua, inr[lam])
                inst_memo[(w, lam)] = hit
            return hit

        def index(sigma, tau, ua, kclock, lam):
            fn = {}
            for c in ua.base.clocks:
                fn[c] = lam if c == kclock else tau(sigma(c))
            return TimeMorphism.make(ua.base, tau.dst, fn)

        comp_memo: dict = {}
        # when every instantiation of the body looks the same from every
        # index, the solved system depends only on the indexing object
        const = all(
            self._constant_element(instance(w, lam)[0])
            for w in self.trunc.objects() for lam in sorted(w.clocks))

        def component_at(sigma):
            memo_key = sigma.dst if const else sigma
            hit = comp_memo.get(memo_key)
            if hit is not None:
                return hit

            if const:
                ccache: dict = {}

                def candidates(key):
                    tau, lam = key
                    ck = (tau.dst, lam)
                    hit = ccache.get(ck)
                    if hit is None:
                        ua, kclock = instance(tau.dst, lam)
                        hit = ua.component(index(sigma, tau, ua, kclock, lam))
                        ccache[ck] = hit
                    return hit
            else:
                def candidates(key):
                    tau, lam = key
                    ua, kclock = instance(tau.dst, lam)
                    return ua.component(index(sigma, tau, ua, kclock, lam))

            skeys, lcomp = self._tau_lam_components(sigma.dst)
            if const or all(self._identity_actions(instance(tau.dst, lam)[0])
                            for tau, lam in skeys):
                fams, combos, reps, pos = self._equality_fams(
                    skeys, lcomp.__getitem__, candidates)
                hit = tuple(fams)
                if const:
                    tracker.register(
                        sigma.dst, fams, combos, reps,
                        lambda key, _p=pos, _c=lcomp: _p[_c[key]])
                comp_memo[memo_key] = hit
                return hit

            steps = self.edge_table(sigma.dst)

            def constraints(key, w):
                tau, lam = key
                ua, kclock = instance(tau.dst, lam)
                m = index(sigma, tau, ua, kclock, lam)
                out = []
                for comp, e in steps[tau]:
                    w2 = ua.act(self, m, e)[w]
                    out.append(((comp, e._fn[lam]), w2))
                return out

            hit = tuple(make_fam(sol) for sol in
                        solve_sections(skeys, candidates, constraints))
            comp_memo[memo_key] = hit
            return hit

        outer_memo: dict = {}
        tracker = _ChoiceRestrict(self)

        def component(sigma):
            # components at indices differing only by a bijective renaming
            # of the codomain are rekeyings of each other
            okey = sigma.dst if const else sigma
            hit = outer_memo.get(okey)
            if hit is None:
                pim, rows = self._canon_renaming(sigma.dst)
                if pim is None:
                    hit = component_at(sigma)
                else:
                    src = component_at(compose(pim, sigma))
                    hit = tuple(self._rekey_fam(f, rows) for f in src)
                    if const and sigma.dst not in tracker.bychoice:
                        tracker.register_rekeyed(sigma.dst, pim, src, hit)
                outer_memo[okey] = hit
            return hit

        def action(sigma, e, value):
            if const:
                g = tracker.restrict(value, e)
                if g is not None:
                    if _CHECK_ACTIONS:
                        assert g is self._restrict_fam(value, e)
                    return g
            return self._restrict_fam(value, e)

        return build_element(self, base, component, action,
                             shared_action=True)

    def _later_code(self, ctx, t, obj, env):
        uty = self.infer_type(ctx, t)
        delta = uty.delta
        lam0 = env_clock(ctx, env, t.clock)
        base = self.base_of(ctx, env, obj, delta)
        inner = self.eval(ctx, t.body, obj, env)

        def ticked(sigma):
            return TimeMorphism.make(
                inner.base, tick_target(sigma.dst, sigma(lam0)), sigma.fn())

        def component(sigma):
            if sigma.dst.budget(sigma(lam0)) == 0:
                return (STAR,)
            return inner.component(ticked(sigma))

        def action(sigma, e, value):
            if e.dst.budget(e(sigma(lam0))) == 0:
                return STAR
            im1 = sigma(lam0)
            etick = TimeMorphism.make(
                tick_target(sigma.dst, im1),
                tick_target(e.dst, e(im1)), e.fn())
            return inner.act(self, ticked(sigma), etick)[value]

        return build_element(self, base, component, action)

    # -- carriers --

    def carrier(self, ctx: Ctx, ty, obj: TimeObject, env: tuple):
        ty = self.norm(ty)
        try:
            key = (alpha_key(ty), ctx.key(), obj, env_key(env))
        except TypeError:
            key = None
        if key is not None and key in self._carrier_memo:
            return self._carrier_memo[key]
        out = self._carrier_canonical(ctx, ty, obj, env)
        if out is None:
            out = tuple(sorted(set(self._carrier(ctx, ty, obj, env)),
                               key=value_sort_key))
        if key is not None:
            self._carrier_memo[key] = out
        return out

    def _carrier_canonical(self, ctx, ty, obj, env):
        """Carrier enumeration is equivariant under budget-preserving
        clock renamings, so for clock-only environments enumerate once at
        a canonical clock assignment and transport the values by renaming
        (returns None when the fast path does not apply)."""
        if self.mode != "ext":
            return None
        if not all(isinstance(e, ClockDecl) for e in ctx.entries):
            return None
        order = sorted(obj.clocks, key=lambda c: (obj.budget(c), c))
        pi = {c: i for i, c in enumerate(order)}
        if all(pi[c] == c for c in order):
            return None
        canon = TimeObject(tuple(sorted(
            (pi[c], obj.budget(c)) for c in order)))
        env_c = tuple(pi[x] for x in env)
        base_vals = self.carrier(ctx, ty, canon, env_c)
        inv = {i: c for c, i in pi.items()}
        renamed = [self._rename_value(v, inv) for v in base_vals]
        return tuple(sorted(renamed, key=value_sort_key))

    def _rename_value(self, v, inv):
        """Transport a value along a budget-preserving renaming of the
        clocks of the object it lives at (family slots are rekeyed by
        renaming the source of their index morphisms; slot contents live
        at the target object and are untouched)."""
        rkey = (id(v), tuple(sorted(inv.items())))
        hit = self._rename_memo.get(rkey)
        if hit is not None:
            return hit
        out = self._rename_value_raw(v, inv)
        self._rename_memo[rkey] = out
        self._rename_pins.append(v)
        return out

    def _rename_value_raw(self, v, inv):
        if is_fam(v):
            rkey = tuple(sorted(inv.items()))
            mcache = self._mor_rename_memo
            slots = {}
            for (sigma, extra), w in fam_slots(v).items():
                mk = (sigma, rkey)
                nsigma = mcache.get(mk)
                if nsigma is None:
                    src = TimeObject(tuple(sorted(
                        (inv[c], b) for c, b in sigma.src.ticks)))
                    nsigma = TimeMorphism.make(
                        src, sigma.dst,
                        {inv[c]: sigma(c) for c in sigma.src.clocks})
                    mcache[mk] = nsigma
                slots[(nsigma, extra)] = w
            return make_fam(slots)
        if isinstance(v, UnivElement):
            return v.rename({c: inv[c] for c in v.base.clocks},
                            self._rekey_tables)
        if isinstance(v, tuple) and v[:1] == ("pair",):
            return ("pair", self._rename_value_raw(v[1], inv),
                    self._rename_value_raw(v[2], inv))
        return v

    def _carrier(self, ctx, ty, obj, env):
        if isinstance(ty, TNat):
            return [("nat", i) for i in range(self.nat_bound + 1)]
        if isinstance(ty, TBool):
            return [("bool", False), ("bool", True)]
        if isinstance(ty, TUnit):
            return [STAR]
        if isinstance(ty, TFin):
            return [("fin", i) for i in range(ty.modulus)]
        if isinstance(ty, TId):
            lhs = self.eval(ctx, ty.lhs, obj, env)
            rhs = self.eval(ctx, ty.rhs, obj, env)
            return [REFL] if lhs == rhs else []
        if isinstance(ty, TSg):
            ctx2 = ctx.extend_var(ty.var, ty.dom)
            return [
                ("pair", v, w)
                for v in self.carrier(ctx, ty.dom, obj, env)
                for w in self.carrier(ctx2, ty.cod, obj, env + (v,))
            ]
        if isinstance(ty, TLater):
            lam = env_clock(ctx, env, ty.clock)
            if obj.budget(lam) == 0:
                return [STAR]
            tick = tick_morphism(obj, lam)
            ctx2 = self.delsub_ctx(ctx, ty.clock, ty.subst)
            env2 = self.restrict_env(ctx, env, tick) + tuple(
                self.eval(ctx, b.term, obj, env) for b in ty.subst
            )
            return self.carrier(ctx2, ty.body, tick.dst, env2)
        if isinstance(ty, TEl):
            u = self.eval(ctx, ty.code, obj, env)
            return u.component(inclusion(u.base, obj))
        if isinstance(ty, TPi):
            return self._pi_carrier(ctx, ty, obj, env)
        if isinstance(ty, TAll):
            return self._all_carrier(ctx, ty, obj, env)
        raise CapacityError(f"carrier of {type(ty).__name__} is not "
                            "enumerated")

    def _ground_type(self, ty) -> bool:
        """Restriction acts as the identity on values of these types, at
        any object and along any morphism."""
        ty = self.norm(ty)
        if isinstance(ty, (TNat, TBool, TUnit, TFin, TId)):
            return True
        if isinstance(ty, TSg):
            return (self._ground_type(ty.dom)
                    and self._ground_type(ty.cod))
        return False

    def _pi_carrier(self, ctx, ty, obj, env):
        ctx2 = ctx.extend_var(ty.var, ty.dom)
        dom_ground = self._ground_type(ty.dom)
        cod_ground = self._ground_type(ty.cod)
        renvs = {}
        steps = self.edge_table(obj)
        for sigma in steps:
            renvs[sigma] = self.restrict_env(ctx, env, sigma)

        def candidates(key):
            sigma, a = key
            return self.carrier(ctx2, ty.cod, sigma.dst,
                                renvs[sigma] + (a,))

        if dom_ground and cod_ground:
            taus, tcomp = self._tau_components(obj)
            skeys = []
            for tau in taus:
                skeys.extend(
                    (tau, a)
                    for a in self.carrier(ctx, ty.dom, tau.dst, renvs[tau]))
            return self._equality_fams(
                skeys, lambda k: (tcomp[k[0]], k[1]), candidates)[0]

        keys = []
        for sigma in steps:
            for a in self.carrier(ctx, ty.dom, sigma.dst, renvs[sigma]):
                keys.append((sigma, a))

        def constraints(key, w):
            sigma, a = key
            renv = renvs[sigma]
            out = []
            for comp, e in steps[sigma]:
                a2 = a if dom_ground else \
                    self.restrict_value(ctx, renv, ty.dom, a, e)
                w2 = w if cod_ground else \
                    self.restrict_value(ctx2, renv + (a,), ty.cod, w, e)
                out.append(((comp, a2), w2))
            return out

        return [make_fam(sol)
                for sol in solve_sections(keys, candidates, constraints)]

    def _all_carrier(self, ctx, ty, obj, env):
        ctx2 = ctx.extend_clock(ty.clock)
        renvs = {}
        steps = self.edge_table(obj)
        for sigma in steps:
            renvs[sigma] = self.restrict_env(ctx, env, sigma)

        def candidates(key):
            sigma, lam = key
            return self.carrier(ctx2, ty.body, sigma.dst,
                                renvs[sigma] + (lam,))

        skeys, lcomp = self._tau_lam_components(obj)
        bnorm = self.norm(ty.body)
        eq = self._ground_type(bnorm)
        if not eq and isinstance(bnorm, TEl):
            # restriction of universe members is the identity whenever the
            # member's element has identity actions
            eq = all(
                self._identity_actions(
                    self.eval(ctx2, bnorm.code, sigma.dst,
                              renvs[sigma] + (lam,)))
                for sigma, lam in skeys)
        if eq:
            return self._equality_fams(skeys, lcomp.__getitem__,
                                       candidates)[0]

        def constraints(key, w):
            sigma, lam = key
            env2 = renvs[sigma] + (lam,)
            return [((comp, e._fn[lam]),
                     self.restrict_value(ctx2, env2, ty.body, w, e))
                    for comp, e in steps[sigma]]

        return [make_fam(sol)
                for sol in solve_sections(skeys, candidates, constraints)]

    # -- tabulation of closure values (for mode comparison) --

    def tabulate(self, ctx, ty, obj, env, value):
        """Convert a closure-mode value into the extensional representation
        (partial where a slot exceeds the window)."""
        ty = self.norm(ty)
        if isinstance(ty, (TNat, TBool, TUnit, TFin, TId, TUniv, TEl)):
            return value
        if isinstance(ty, TSg):
            f, s = value[1], value[2]
            ctx2 = ctx.extend_var(ty.var, ty.dom)
            return ("pair",
                    self.tabulate(ctx, ty.dom, obj, env, f),
                    self.tabulate(ctx2, ty.cod, obj, env + (f,), s))
        if isinstance(ty, TLater):
            lam = env_clock(ctx, env, ty.clock)
            if obj.budget(lam) == 0:
                return STAR
            tick = tick_morphism(obj, lam)
            ctx2 = self.delsub_ctx(ctx, ty.clock, ty.subst)
            env2 = self.restrict_env(ctx, env, tick) + tuple(
                self.eval(ctx, b.term, obj, env) for b in ty.subst
            )
            return self.tabulate(ctx2, ty.body, tick.dst, env2, value)
        if isinstance(ty, TPi):
            ctx2 = ctx.extend_var(ty.var, ty.dom)
            slots = {}
            for sigma in self.mors_from(obj):
                renv = self.restrict_env(ctx, env, sigma)
                moved = self.restrict_value_for(ctx, env, ty, value, sigma)
                for a in self.carrier(ctx, ty.dom, sigma.dst, renv):
                    try:
                        w = self.apply(moved, a, sigma.dst)
                        slots[(sigma, a)] = self.tabulate(
                            ctx2, ty.cod, sigma.dst, renv + (a,), w)
                    except CapacityError:
                        pass
            return make_fam(slots)
        if isinstance(ty, TAll):
            ctx2 = ctx.extend_clock(ty.clock)
            slots = {}
            for sigma in self.mors_from(obj):
                renv = self.restrict_env(ctx, env, sigma)
                moved = self.restrict_value_for(ctx, env, ty, value, sigma)
                for lam in sorted(sigma.dst.clocks):
                    try:
                        w = self.capply(moved, lam, sigma.dst)
                        slots[(sigma, lam)] = self.tabulate(
                            ctx2, ty.body, sigma.dst, renv + (lam,), w)
                    except CapacityError:
                        pass
            return make_fam(slots)
        raise CapacityError(f"cannot tabulate at type {type(ty).__name__}")

    # -- environment enumeration (for the verifier) --

    def environments(self, ctx: Ctx, obj: TimeObject, overrides=None):
        """All environments for a context at an object.  `overrides` maps a
        variable name to an explicit list of values (used for universe-typed
        variables, whose carriers are not enumerated)."""
        overrides = overrides or {}

        def go(i, env):
            if i == len(ctx.entries):
                yield env
                return
            entry = ctx.entries[i]
            if isinstance(entry, ClockDecl):
                for lam in sorted(obj.clocks):
                    yield from go(i + 1, env + (lam,))
                return
            prefix = Ctx(ctx.entries[:i])
            if entry.name in overrides:
                values = [
                    v(self, prefix, obj, env) if callable(v) else v
                    for v in overrides[entry.name]
                ]
            else:
                values = self.carrier(prefix, entry.type, obj, env)
            for v in values:
                yield from go(i + 1, env + (v,))

        yield from go(0, ())


_MISSING = object()


# -- comparison --------------------------------------------------------------


def values_agree(v, w):
    """Compare two values; partial families agree when they coincide on the
    intersection of their domains.  Returns (agree, skipped slot count)."""
    if v is w:
        return True, 0
    if is_fam(v) and is_fam(w):
        sv, sw = fam_slots(v), fam_slots(w)
        skipped = len(set(sv) ^ set(sw))
        ok = True
        for k in set(sv) & set(sw):
            sub_ok, sub_skip = values_agree(sv[k], sw[k])
            ok = ok and sub_ok
            skipped += sub_skip
        return ok, skipped
    if (isinstance(v, tuple) and isinstance(w, tuple)
            and v[:1] == w[:1] == ("pair",)):
        ok1, s1 = values_agree(v[1], w[1])
        ok2, s2 = values_agree(v[2], w[2])
        return ok1 and ok2, s1 + s2
    return v == w, 0
