"""The finite time category indexing the model.

Objects are pairs of a finite set of clocks (small integers) and a tick
budget for each clock.  A morphism maps clocks to clocks so that the budget
of the image never exceeds the budget of the source clock; time passes by
spending budget.  Presheaves on this category (covariant, restriction along
morphisms) carry the denotational semantics.

A truncation bounds the clock universe to {0..K-1} and budgets to N so
every hom set is finite and enumerable.  Morphism actions elsewhere in the
model are stored only along the elementary morphisms produced here (single
ticks, single fresh-clock inclusions, two-clock merges, renamings); a
verified factorization recovers the general action.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional


class TimeObject:
    """Interned: constructing the same ticks tuple yields the same object,
    so equality is (almost always) identity and the hash is precomputed."""

    __slots__ = ("ticks", "clocks", "_h", "_r")
    _intern: dict = {}

    def __new__(cls, ticks) -> "TimeObject":
        ticks = tuple(ticks)
        hit = cls._intern.get(ticks)
        if hit is not None:
            return hit
        self = object.__new__(cls)
        self.ticks = ticks  # sorted (clock, budget)
        self.clocks = frozenset(c for c, _ in ticks)
        self._h = hash(ticks)
        inner = ",".join(f"{c}:{b}" for c, b in ticks)
        self._r = "{" + inner + "}"
        cls._intern[ticks] = self
        return self

    @staticmethod
    def make(budgets: dict) -> "TimeObject":
        return TimeObject(tuple(sorted(budgets.items())))

    def budget(self, clock: int) -> int:
        for c, b in self.ticks:
            if c == clock:
                return b
        raise KeyError(clock)

    def budgets(self) -> dict:
        return dict(self.ticks)

    def __eq__(self, other):
        return self is other or (
            isinstance(other, TimeObject) and self.ticks == other.ticks)

    def __hash__(self):
        return self._h

    def __repr__(self):
        return self._r


EMPTY = TimeObject(())


class TimeMorphism:
    """Interned, like TimeObject."""

    __slots__ = ("src", "dst", "mapping", "_fn", "_h", "_r", "_seq")
    _intern: dict = {}

    def __new__(cls, src: TimeObject, dst: TimeObject,
                mapping) -> "TimeMorphism":
        mapping = tuple(mapping)
        key = (src.ticks, dst.ticks, mapping)
        hit = cls._intern.get(key)
        if hit is not None:
            return hit
        self = object.__new__(cls)
        self._seq = len(cls._intern)
        self.src = src
        self.dst = dst
        self.mapping = mapping  # sorted (source clock, image)
        self._fn = dict(mapping)
        self._h = hash(key)
        inner = ",".join(f"{c}->{im}" for c, im in mapping)
        self._r = f"[{src!r}=>{dst!r}:{inner}]"
        cls._intern[key] = self
        return self

    @staticmethod
    def make(src: TimeObject, dst: TimeObject, fn: dict) -> "TimeMorphism":
        return TimeMorphism(src, dst, tuple(sorted(fn.items())))

    def __call__(self, clock: int) -> int:
        return self._fn[clock]

    def fn(self) -> dict:
        return dict(self.mapping)

    def is_valid(self) -> bool:
        fn = self._fn
        if set(fn.keys()) != self.src.clocks:
            return False
        if not set(fn.values()) <= self.dst.clocks:
            return False
        return all(
            self.dst.budget(im) <= self.src.budget(c) for c, im in self.mapping
        )

    def is_identity(self) -> bool:
        return self.src == self.dst and all(c == im for c, im in self.mapping)

    def __eq__(self, other):
        return self is other or (
            isinstance(other, TimeMorphism)
            and self.mapping == other.mapping
            and self.src == other.src and self.dst == other.dst)

    def __hash__(self):
        return self._h

    def __repr__(self):
        return self._r


@lru_cache(maxsize=None)
def identity(obj: TimeObject) -> TimeMorphism:
    return TimeMorphism.make(obj, obj, {c: c for c in obj.clocks})


@lru_cache(maxsize=None)
def compose(g: TimeMorphism, f: TimeMorphism) -> TimeMorphism:
    """g after f."""
    if f.dst is not g.src and f.dst != g.src:
        raise ValueError(f"compose: {f!r} then {g!r} do not align")
    gf = g._fn
    # f.mapping is already sorted by source clock
    return TimeMorphism(f.src, g.dst,
                        tuple((c, gf[im]) for c, im in f.mapping))


# ---------------------------------------------------------------------------
# basic constructions


def tick_target(obj: TimeObject, clock: int) -> TimeObject:
    """The object one tick of `clock` later (budget decremented)."""
    b = obj.budget(clock)
    if b == 0:
        raise ValueError(f"tick_target: clock {clock} has no budget at {obj}")
    return TimeObject.make({**obj.budgets(), clock: b - 1})


def tick_morphism(obj: TimeObject, clock: int) -> TimeMorphism:
    """Identity-function morphism from obj to its ticked object."""
    return TimeMorphism.make(obj, tick_target(obj, clock),
                             {c: c for c in obj.clocks})


def add_clock(obj: TimeObject, clock: int, budget: int) -> TimeObject:
    if clock in obj.clocks:
        raise ValueError(f"add_clock: {clock} already present in {obj}")
    return TimeObject.make({**obj.budgets(), clock: budget})


def inclusion(sub: TimeObject, sup: TimeObject) -> TimeMorphism:
    if not sub.clocks <= sup.clocks:
        raise ValueError(f"inclusion: {sub} not a subset of {sup}")
    return TimeMorphism.make(sub, sup, {c: c for c in sub.clocks})


def restrict_object(obj: TimeObject, clocks: Iterable[int]) -> TimeObject:
    keep = set(clocks)
    return TimeObject(tuple((c, b) for c, b in obj.ticks if c in keep))


def corestrict(m: TimeMorphism) -> TimeMorphism:
    """m with its codomain cut down to the image."""
    image = restrict_object(m.dst, set(fn for _, fn in m.mapping))
    return TimeMorphism(m.src, image, m.mapping)


def fresh_clock(clocks: Iterable[int]) -> int:
    used = set(clocks)
    i = 0
    while i in used:
        i += 1
    return i


def coproduct(left: TimeObject, right: TimeObject):
    """Coproduct with the left injection literally the identity on clocks.

    Returns (object, inl: dict, inr: dict).  The right summand is shifted
    past the largest left clock so the union is disjoint.
    """
    shift = 1 + max((c for c in left.clocks), default=-1)
    inl = {c: c for c in left.clocks}
    inr = {c: c + shift for c in right.clocks}
    budgets = dict(left.budgets())
    for c, b in right.ticks:
        budgets[c + shift] = b
    return TimeObject.make(budgets), inl, inr


# ---------------------------------------------------------------------------
# elementary morphisms


@dataclass(frozen=True)
class Elementary:
    kind: str  # tick | incl | merge | swap | move
    morphism: TimeMorphism


def elem_tick(obj: TimeObject, clock: int) -> Elementary:
    return Elementary("tick", tick_morphism(obj, clock))


def elem_incl(obj: TimeObject, clock: int, budget: int) -> Elementary:
    dst = add_clock(obj, clock, budget)
    return Elementary("incl", TimeMorphism.make(obj, dst, {c: c for c in obj.clocks}))


def elem_merge(obj: TimeObject, keep: int, drop: int) -> Elementary:
    """Synchronize two clocks: `drop` is mapped onto `keep` (min budget)."""
    budgets = obj.budgets()
    merged = min(budgets[keep], budgets[drop])
    del budgets[drop]
    budgets[keep] = merged
    dst = TimeObject.make(budgets)
    fn = {c: c for c in obj.clocks}
    fn[drop] = keep
    return Elementary("merge", TimeMorphism.make(obj, dst, fn))


def elem_swap(obj: TimeObject, a: int, b: int) -> Elementary:
    budgets = obj.budgets()
    budgets[a], budgets[b] = budgets[b], budgets[a]
    dst = TimeObject.make(budgets)
    fn = {c: c for c in obj.clocks}
    fn[a], fn[b] = b, a
    return Elementary("swap", TimeMorphism.make(obj, dst, fn))


def elem_move(obj: TimeObject, src_clock: int, dst_clock: int) -> Elementary:
    """Rename a single clock to an unused id, keeping its budget."""
    budgets = obj.budgets()
    budgets[dst_clock] = budgets.pop(src_clock)
    dst = TimeObject.make(budgets)
    fn = {c: c for c in obj.clocks}
    fn[src_clock] = dst_clock
    return Elementary("move", TimeMorphism.make(obj, dst, fn))


# ---------------------------------------------------------------------------
# truncation


class Truncation:
    def __init__(self, max_clocks: int, max_budget: int):
        if max_clocks < 1 or max_budget < 0:
            raise ValueError("truncation needs K >= 1 and N >= 0")
        self.K = max_clocks
        self.N = max_budget
        self.universe = tuple(range(max_clocks))
        self._objects: Optional[tuple[TimeObject, ...]] = None
        self._from: dict = {}
        self._elem: dict = {}
        self._factor: dict = {}

    def key(self):
        return (self.K, self.N)

    def contains(self, obj: TimeObject) -> bool:
        return obj.clocks <= set(self.universe) and all(
            0 <= b <= self.N for _, b in obj.ticks
        )

    def objects(self) -> tuple[TimeObject, ...]:
        if self._objects is None:
            objs = []
            for r in range(self.K + 1):
                for clocks in itertools.combinations(self.universe, r):
                    for budgets in itertools.product(range(self.N + 1), repeat=r):
                        objs.append(TimeObject(tuple(zip(clocks, budgets))))
            self._objects = tuple(sorted(objs, key=lambda o: o.ticks))
        return self._objects

    def hom(self, src: TimeObject, dst: TimeObject) -> tuple[TimeMorphism, ...]:
        out = []
        src_clocks = sorted(src.clocks)
        choices = []
        for c in src_clocks:
            allowed = [d for d in sorted(dst.clocks)
                       if dst.budget(d) <= src.budget(c)]
            choices.append(allowed)
        for images in itertools.product(*choices):
            out.append(TimeMorphism.make(src, dst, dict(zip(src_clocks, images))))
        return tuple(out)

    def morphisms_from(self, src: TimeObject) -> tuple[TimeMorphism, ...]:
        cached = self._from.get(src)
        if cached is None:
            out = []
            for dst in self.objects():
                out.extend(self.hom(src, dst))
            cached = tuple(out)
            self._from[src] = cached
        return cached

    def elementary_from(self, obj: TimeObject) -> tuple[Elementary, ...]:
        cached = self._elem.get(obj)
        if cached is None:
            if not self.contains(obj):
                raise ValueError(f"elementary_from: {obj} outside truncation")
            out = []
            clocks = sorted(obj.clocks)
            free = [c for c in self.universe if c not in obj.clocks]
            for c in clocks:
                if obj.budget(c) > 0:
                    out.append(elem_tick(obj, c))
            for c in free:
                for n in range(self.N + 1):
                    out.append(elem_incl(obj, c, n))
            for keep in clocks:
                for drop in clocks:
                    if keep != drop:
                        out.append(elem_merge(obj, keep, drop))
            for a, b in itertools.combinations(clocks, 2):
                out.append(elem_swap(obj, a, b))
            for c in clocks:
                for d in free:
                    out.append(elem_move(obj, c, d))
            cached = tuple(out)
            self._elem[obj] = cached
        return cached

    # -- factorization ------------------------------------------------------

    def factor_elementary(self, m: TimeMorphism) -> tuple[Elementary, ...]:
        """Decompose m into elementary steps; composite is verified."""
        cached = self._factor.get(m)
        if cached is not None:
            return cached
        steps: list[Elementary] = []
        cur = m.src
        fn = m.fn()

        def apply(step: Elementary):
            nonlocal cur, fn
            steps.append(step)
            e = step.morphism
            fn = {e(c): tgt for c, tgt in _regroup(fn, e).items()}
            cur = e.dst

        def _regroup(fn, e):
            # after a merge two sources share an image; targets agree by
            # construction, so keyed regrouping is safe
            return dict(fn)

        # 1. merges, until injective
        while True:
            seen = {}
            clash = None
            for c in sorted(fn):
                if fn[c] in seen:
                    clash = (seen[fn[c]], c)
                    break
                seen[fn[c]] = c
            if clash is None:
                break
            keep, drop = clash
            apply(elem_merge(cur, keep, drop))

        # 2. renamings, until the function is the identity on its domain
        while True:
            pending = sorted(c for c in fn if fn[c] != c)
            if not pending:
                break
            c = pending[0]
            tgt = fn[c]
            if tgt in cur.clocks:
                apply(elem_swap(cur, c, tgt))
            else:
                apply(elem_move(cur, c, tgt))

        # 3. ticks down to destination budgets
        for c in sorted(cur.clocks):
            while cur.budget(c) > m.dst.budget(c):
                apply(elem_tick(cur, c))

        # 4. inclusions of clocks only present in the destination
        for c in sorted(m.dst.clocks - cur.clocks):
            apply(elem_incl(cur, c, m.dst.budget(c)))

        composite = identity(m.src)
        for step in steps:
            composite = compose(step.morphism, composite)
        if composite != m:
            raise AssertionError(f"factorization failed for {m!r}")
        out = tuple(steps)
        self._factor[m] = out
        return out

    def factor_stages(self, m: TimeMorphism):
        """Group the elementary factorization into the four morphism classes:
        synchronization, renaming, budget decrease, inclusion (in composition
        order).  Returns a list of (class name, morphism)."""
        order = ["merge", "rename", "tick", "incl"]
        buckets = {k: [] for k in order}
        for step in self.factor_elementary(m):
            kind = "rename" if step.kind in ("swap", "move") else step.kind
            buckets[kind].append(step.morphism)
        stages = []
        cur = identity(m.src)
        pos = m.src
        for kind in order:
            stage = identity(pos)
            for mor in buckets[kind]:
                stage = compose(mor, stage)
            stages.append((kind, stage))
            pos = stage.dst
            cur = compose(stage, cur)
        if cur != m:
            raise AssertionError(f"stage factorization failed for {m!r}")
        return stages
