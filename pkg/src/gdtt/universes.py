"""Semantic universe elements.

An element of a universe over the clock set Delta at an environment is a
family of carriers indexed by morphisms out of a small base object (the
image of the Delta clocks), together with a functorial action.  The action
is stored only along elementary morphisms out of each index; the action
along an arbitrary morphism is recovered by composing along a verified
elementary factorization, which is faithful by functoriality.  Restricting
a universe element along a morphism of the ambient object reindexes the
carriers along the corestriction of that morphism; in particular inclusions
act as the identity.
"""

from __future__ import annotations

from .timecat import (
    TimeMorphism, TimeObject, compose, corestrict, identity, inclusion,
)


class UnivElement:
    __slots__ = ("base", "carriers", "actions", "_key", "_elem_cache",
                 "_act_cache")

    def __init__(self, base: TimeObject, carriers: dict, actions: dict):
        # carriers: index morphism -> tuple of values (sorted by repr)
        # actions: (index morphism, elementary morphism) -> tuple of
        #          (value, image) pairs
        self.base = base
        self.carriers = carriers
        self.actions = actions
        self._key = None
        self._elem_cache: dict = {}
        self._act_cache: dict = {}

    def component(self, sigma: TimeMorphism):
        try:
            return self.carriers[sigma]
        except KeyError:
            raise KeyError(f"no carrier at index {sigma!r}") from None

    def act_elem(self, sigma: TimeMorphism, e: TimeMorphism) -> dict:
        key = (sigma, e)
        hit = self._elem_cache.get(key)
        if hit is None:
            hit = dict(self.actions[key])
            self._elem_cache[key] = hit
        return hit

    def act(self, world, sigma: TimeMorphism, tau: TimeMorphism) -> dict:
        """Action along an arbitrary morphism out of the index's codomain,
        via elementary factorization.  Returned dicts are cached; treat
        them as read-only."""
        key = (sigma, tau)
        hit = self._act_cache.get(key)
        if hit is not None:
            return hit
        mapping = {v: v for v in self.component(sigma)}
        if not tau.is_identity():
            cur = sigma
            for step in world.trunc.factor_elementary(tau):
                amap = self.act_elem(cur, step.morphism)
                mapping = {v: amap[w] for v, w in mapping.items()}
                cur = compose(step.morphism, cur)
        self._act_cache[key] = mapping
        return mapping

    def restrict_along(self, world, obj: TimeObject,
                       tau: TimeMorphism) -> "UnivElement":
        """Restriction of this element, seen as a value at `obj`, along
        tau: obj -> Z.  Carriers are reindexed through the corestriction of
        tau to the clock image of the base."""
        sbar = corestrict(compose(tau, inclusion(self.base, obj)))
        newbase = sbar.dst
        carriers = {}
        actions = {}
        for sigma in world.mors_from(newbase):
            old = compose(sigma, sbar)
            carriers[sigma] = self.carriers[old]
            for step in world.elementary_from(sigma.dst):
                e = step.morphism
                actions[(sigma, e)] = self.actions[(old, e)]
        return UnivElement(newbase, carriers, actions)

    def rename(self, mapping: dict, table_cache: dict = None
               ) -> "UnivElement":
        """Transport the element along a budget-preserving bijective
        renaming of its base clocks.  Index morphisms are rekeyed through
        the renaming; carrier values are untouched (they never mention
        the base clocks themselves).  Elements over the same base share
        the same index set, so the rekey table can be reused through
        table_cache."""
        newbase = TimeObject(tuple(sorted(
            (mapping[c], b) for c, b in self.base.ticks)))

        tkey = None
        rekeyed = None
        if table_cache is not None:
            tkey = (self.base, tuple(sorted(mapping.items())))
            rekeyed = table_cache.get(tkey)
        if rekeyed is None:
            clocks = self.base.clocks
            rekeyed = {
                sigma: TimeMorphism.make(
                    newbase, sigma.dst,
                    {mapping[c]: sigma(c) for c in clocks})
                for sigma in self.carriers}
            if tkey is not None:
                table_cache[tkey] = rekeyed
        carriers = {rekeyed[s]: vs for s, vs in self.carriers.items()}
        actions = {(rekeyed[s], e): pairs
                   for (s, e), pairs in self.actions.items()}
        return UnivElement(newbase, carriers, actions)

    def key(self):
        if self._key is None:
            self._key = (
                self.base,
                frozenset(self.carriers.items()),
                frozenset(self.actions.items()),
            )
        return self._key

    def __eq__(self, other):
        return (isinstance(other, UnivElement)
                and self.base == other.base
                and self.carriers == other.carriers
                and self.actions == other.actions)

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"<univ elem base={self.base} indices={len(self.carriers)}>"


def build_element(world, base: TimeObject, component_fn,
                  action_fn, shared_action: bool = False) -> UnivElement:
    """Materialize an element from a carrier function and an elementary
    action function.

    component_fn(sigma) -> iterable of values
    action_fn(sigma, elementary morphism, value) -> image value

    With shared_action=True the caller asserts that action_fn ignores its
    index argument, so action rows can be reused between indices with the
    same carrier and target.
    """
    carriers = {}
    cseen: dict = {}
    for sigma in world.mors_from(base):
        vs = tuple(sorted(set(component_fn(sigma)), key=world.value_key))
        carriers[sigma] = cseen.setdefault(vs, vs)
    actions = {}
    pcache: dict = {}
    tsets: dict = {}
    for sigma, values in carriers.items():
        for step in world.elementary_from(sigma.dst):
            e = step.morphism
            target = carriers[compose(e, sigma)]
            if shared_action:
                ck = (id(values), e, id(target))
                hit = pcache.get(ck)
                if hit is not None:
                    actions[(sigma, e)] = hit
                    continue
            tset = tsets.get(id(target))
            if tset is None:
                tset = frozenset(target)
                tsets[id(target)] = tset
            pairs = []
            for v in values:
                w = action_fn(sigma, e, v)
                if w not in tset:
                    raise AssertionError(
                        f"universe action leaves the carrier at "
                        f"{sigma!r} along {e!r}: {v!r} -> {w!r}")
                pairs.append((v, w))
            row = tuple(pairs)
            if shared_action:
                pcache[ck] = row
            actions[(sigma, e)] = row
    return UnivElement(base, carriers, actions)
