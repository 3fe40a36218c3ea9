"""Exhaustive verification of the model over finite truncations.

Each suite enumerates every object and environment of a truncation of the
time category and checks a family of properties by brute force:

* ``eq`` — the judgemental equality rules (beta/eta for functions, pairs
  and clock abstractions, the prev/next and force laws, fixed-point
  unfolding, the delayed-substitution laws, and clock irrelevance), each
  instantiated several ways and compared denotationally on both sides;
* ``universes`` — the universe-code equations (``El`` commuting with the
  code formers, inclusion identity/composition, and inclusions commuting
  with the code formers);
* ``invariance`` — restriction along every fresh-clock inclusion is a
  bijection on every corpus type, stated both directly and as a
  unique-common-preimage (pullback) condition, with the clock presheaf as
  a negative control;
* ``lifting`` — lifting problems against representable probes have
  exactly one filler for every corpus type;
* ``limit`` — the clock-quantifier carrier is the limit of the tick
  chain (the pair of mutually inverse maps is computed element by
  element), and ``force`` is mutually inverse to eta-expansion via
  ``next``;
* ``subst`` — the semantic substitution lemma: evaluating a substituted
  judgement equals evaluating the original in the pushed-forward
  environment;
* ``modes`` — closure-mode evaluation, tabulated, agrees with
  extensional evaluation on the whole example corpus.

Reports are deterministic: checks are emitted sorted by id and timing
fields default to 0 so repeated runs are byte identical.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

from .parser import parse_file, parse_term, parse_type
from .semantics import (
    CapacityError, Interp, fam_slots, is_fam, values_agree,
)
from .syntax import (
    Ann, CApp, ClockDecl, Ctx, Fix, Force, Next, TAll, TLater, Var,
    alpha_key, free_clocks, subst, subst1,
)
from .timecat import (
    TimeMorphism, TimeObject, Truncation, add_clock, fresh_clock, inclusion,
)
from .typecheck import Checker, check_program, normalize, strip_ann

SUITES = ("eq", "universes", "invariance", "lifting", "limit", "subst",
          "modes")

CORPUS = Path(__file__).resolve().parent / "corpus"

EMPTY = TimeObject(())


def _ann(tm, ty):
    return tm if isinstance(tm, Ann) else Ann(tm, ty)


def _canonical_object(obj: TimeObject) -> bool:
    """One representative per budget-preserving clock-renaming class:
    clocks 0..m-1 with budgets sorted ascending."""
    clocks = sorted(obj.clocks)
    if clocks != list(range(len(clocks))):
        return False
    budgets = [obj.budget(c) for c in clocks]
    return budgets == sorted(budgets)


def corpus_files(kind: str):
    return sorted((CORPUS / kind).glob("*.gdtt"))


# -- shared definitions used by equation instances ---------------------------

PRELUDE = """
def Str : All k. U{k} := /\\k. fix k X. Sg^ n : Nat^{k}. Later^ k X
def BStr : All k. U{k} := /\\k. fix k X. Sg^ b : Bool^{k}. Later^ k X
def Str2 : All k. U{k} :=
  /\\k. fix k X. Sg^ n : Nat^{k}. Sg^ b : Bool^{k}. Later^ k X
def zeros : All k. El (Str @k) := /\\k. fix k xs. (0, xs)
def trues : All k. El (BStr @k) := /\\k. fix k xs. (true, xs)
def ghead : All k. El (Str @k) -> Nat := /\\k. \\s. fst s
def gtail : All k. El (Str @k) -> |>k (El (Str @k)) := /\\k. \\s. snd s
def tail : (All k. El (Str @k)) -> All k. El (Str @k) :=
  \\s. force (/\\k. snd (s @k))
def tailp : (All k. El (Str @k)) -> All k. El (Str @k) :=
  \\xs. prev k. snd (xs @k)
"""


# -- equation instance tables ------------------------------------------------
#
# Each rule maps to a list of instances (kind, context, lhs, rhs, type)
# where kind is "term" or "type", the context is a list of (name, decl)
# pairs with decl either "clock" or a type in surface syntax, and the type
# is needed only when the left-hand side is not inferable.

CORE_RULES = {
    "beta": [
        ("term", [("x", "Nat")],
         "(\\y. succ y : Nat -> Nat) x", "succ x", None),
        ("term", [("b", "Bool")],
         "(\\y. (y, 0) : Bool -> (Bool * Nat)) b", "(b, 0)", None),
        ("term", [("k", "clock"), ("x", "|>k Nat")],
         "(\\y. y : (|>k Nat) -> (|>k Nat)) x", "x", None),
        ("term", [("x", "Nat")],
         "(\\y. refl : Pi y : Nat. Id Nat y y) x",
         "(refl : Id Nat x x)", None),
    ],
    "eta": [
        ("term", [("f", "Nat -> Nat")], "\\x. f x", "f", "Nat -> Nat"),
        ("term", [("f", "Bool -> (Nat * Bool)")],
         "\\x. f x", "f", "Bool -> (Nat * Bool)"),
        ("term", [("k", "clock"), ("f", "(|>k Nat) -> Nat")],
         "\\x. f x", "f", "(|>k Nat) -> Nat"),
    ],
    "pair-beta": [
        ("term", [("x", "Nat"), ("b", "Bool")],
         "fst ((x, b) : Nat * Bool)", "x", None),
        ("term", [("x", "Nat"), ("b", "Bool")],
         "snd ((x, b) : Nat * Bool)", "b", None),
        ("term", [("x", "Nat")],
         "snd ((x, refl) : Sg y : Nat. Id Nat y y)",
         "(refl : Id Nat x x)", None),
    ],
    "pair-eta": [
        ("term", [("p", "Nat * Bool")],
         "(fst p, snd p)", "p", "Nat * Bool"),
        ("term", [("p", "Sg y : Bool. Unit")],
         "(fst p, snd p)", "p", "Sg y : Bool. Unit"),
        ("term", [("k", "clock"), ("p", "(|>k Nat) * Nat")],
         "(fst p, snd p)", "p", "(|>k Nat) * Nat"),
    ],
    "clock-beta": [
        ("term", [("k", "clock")],
         "(/\\j. 0 : All j. Nat) @k", "0", None),
        ("term", [("k", "clock"), ("x", "Nat")],
         "(/\\j. x : All j. Nat) @k", "x", None),
        ("term", [("k", "clock")],
         "(/\\j. next j 0 : All j. |>j Nat) @k", "next k 0", "|>k Nat"),
    ],
    "clock-eta": [
        ("term", [("f", "All j. Nat")], "/\\j. f @j", "f", "All j. Nat"),
        ("term", [("f", "All j. Bool")], "/\\j. f @j", "f", "All j. Bool"),
        ("term", [("k", "clock"), ("f", "All j. |>j Bool")],
         "/\\j. f @j", "f", "All j. |>j Bool"),
    ],
    "prev-next": [
        ("term", [], "prev k. next k 1", "/\\k. 1", "All k. Nat"),
        ("term", [],
         "prev k. next k [x <- next k 0] (succ x)",
         "/\\k. succ ((prev k. next k 0) @k)", "All k. Nat"),
        ("term", [], "prev k. next k ((0, true) : Nat * Bool)",
         "/\\k. (0, true)", "All k. (Nat * Bool)"),
    ],
    "force-next": [
        ("term", [],
         "force ((/\\k. next k 0 : All k. |>k Nat))", "/\\k. 0",
         "All k. Nat"),
        ("term", [("x", "Nat")],
         "force ((/\\k. next k x : All k. |>k Nat))", "/\\k. x",
         "All k. Nat"),
        ("term", [("k2", "clock")],
         "force ((/\\k. next k true : All k. |>k Bool))", "/\\k. true",
         "All k. Bool"),
    ],
    "delsub-weaken": [
        ("term", [("k", "clock"), ("t", "|>k Nat")],
         "next k [x <- t] 0", "next k 0", "|>k Nat"),
        ("type", [("k", "clock"), ("t", "|>k Bool")],
         "|>k [x <- t] Nat", "|>k Nat", None),
        ("term", [("k", "clock"), ("t", "|>k Bool")],
         "next k [y <- t] (succ 0)", "next k (succ 0)", "|>k Nat"),
    ],
    "delsub-exchange": [
        ("term", [("k", "clock"), ("t", "|>k Nat"), ("u", "|>k Bool")],
         "next k [x <- t, y <- u] (x, y)",
         "next k [y <- u, x <- t] (x, y)", "|>k (Nat * Bool)"),
        ("type", [("k", "clock"), ("t", "|>k Nat"), ("u", "|>k Bool")],
         "|>k [x <- t, y <- u] (Id Nat x x)",
         "|>k [y <- u, x <- t] (Id Nat x x)", None),
        ("term", [("k", "clock"), ("t", "|>k Nat"), ("u", "|>k Nat")],
         "next k [x <- t, y <- u] x",
         "next k [y <- u, x <- t] x", "|>k Nat"),
    ],
    "delsub-collapse": [
        ("term", [("k", "clock")],
         "next k [x <- next k 0] (succ x)", "next k (succ 0)", "|>k Nat"),
        ("type", [("k", "clock")],
         "|>k [x <- next k 0] (Id Nat x x)", "|>k (Id Nat 0 0)", None),
        ("term", [("k", "clock")],
         "next k [x <- next k 1] (x, x)", "next k (1, 1)",
         "|>k (Nat * Nat)"),
    ],
    "delsub-identity": [
        ("term", [("k", "clock"), ("t", "|>k Nat")],
         "next k [x <- t] x", "t", "|>k Nat"),
        ("term", [("k", "clock")],
         "next k [x <- next k 0] x", "next k 0", "|>k Nat"),
        ("term", [("k", "clock"), ("t", "|>k Bool")],
         "next k [x <- t] x", "t", "|>k Bool"),
    ],
    "delsub-commute": [
        ("term", [("k1", "clock"), ("k2", "clock")],
         "next k1 (next k2 0)", "next k2 (next k1 0)",
         "|>k1 (|>k2 Nat)"),
        ("type", [("k1", "clock"), ("k2", "clock")],
         "|>k1 (|>k2 Bool)", "|>k2 (|>k1 Bool)", None),
        ("term", [("k1", "clock"), ("k2", "clock"), ("t", "|>k1 Nat")],
         "next k1 [x <- t] (next k2 x)",
         "next k2 (next k1 [x <- t] x)", "|>k1 (|>k2 Nat)"),
    ],
}

# The fixed-point rule is generated from annotated fix terms: the right
# hand side is the one-step unfolding computed from the rule itself.
FIX_INSTANCES = [
    ([("k", "clock")], "(fix k x. 0 : Nat)"),
    ([("k", "clock")], "(fix k x. succ 0 : Nat)"),
    ([("k", "clock")], "(fix k xs. (0, xs) : El (Str @k))"),
    ([("k", "clock")], "(fix k xs. (true, xs) : El (BStr @k))"),
    ([("k", "clock")], "(fix k xs. (0, (true, xs)) : El (Str2 @k))"),
    ([("k", "clock")],
     "(fix k X. Sg^ n : Nat^{k}. Later^ k X : U{k})"),
]

# Extra clock-irrelevance instances beyond the ones scanned from the
# corpus (terms of type All k. A with k not free in A).
IRRELEVANCE_EXTRA = [
    ("const", "(/\\k. 2 : All k. Nat)"),
    ("prev-next", "((prev k. next k 1) : All k. Nat)"),
    ("forced", "(force ((/\\k. next k 0 : All k. |>k Nat)) : All k. Nat)"),
    ("head-zeros", "(/\\k. (ghead @k) ((zeros @k)) : All k. Nat)"),
]

# A deliberately corrupted law; the suite passes only if the model
# refutes it with a witness.
MUTATION = ("term", [("x", "Nat"), ("y", "Nat")],
            "fst ((x, y) : Nat * Nat)", "y", None)

UNIV_RULES = {
    "in-id": [
        ("term", [("k", "clock")], "in{k ; k} Nat^{k}", "Nat^{k}", None),
        ("term", [("k", "clock")],
         "in{k ; k} (Sg^ x : Nat^{k}. Bool^{k})",
         "Sg^ x : Nat^{k}. Bool^{k}", "U{k}"),
        ("term", [], "in{ ; } Unit^{}", "Unit^{}", None),
    ],
    "in-comp": [
        ("term", [("k1", "clock"), ("k2", "clock")],
         "in{k1 ; k1,k2} (in{ ; k1} Nat^{})", "in{ ; k1,k2} Nat^{}", None),
        ("term", [("k1", "clock"), ("k2", "clock")],
         "in{k1 ; k1,k2} (in{ ; k1} Bool^{})", "in{ ; k1,k2} Bool^{}",
         None),
        ("term", [("k1", "clock")],
         "in{ ; k1} (in{ ; } Unit^{})", "in{ ; k1} Unit^{}", None),
    ],
    "el-in": [
        ("type", [("k", "clock")],
         "El (in{ ; k} Nat^{})", "El Nat^{}", None),
        ("type", [("k", "clock")],
         "El (in{ ; k} Bool^{})", "El Bool^{}", None),
        ("type", [("k1", "clock"), ("k2", "clock")],
         "El (in{k1 ; k1,k2} (Sg^ x : Nat^{k1}. Unit^{k1}))",
         "El (Sg^ x : Nat^{k1}. Unit^{k1})", None),
    ],
    "el-sigma": [
        ("type", [], "El (Sg^ x : Nat^{}. Bool^{})",
         "Sg x : (El Nat^{}). (El Bool^{})", None),
        ("type", [("k", "clock")], "El (Sg^ x : Bool^{k}. Unit^{k})",
         "Sg x : (El Bool^{k}). (El Unit^{k})", None),
        ("type", [], "El (Sg^ x : Fin^{}(2). Nat^{})",
         "Sg x : (El Fin^{}(2)). (El Nat^{})", None),
    ],
    "el-pi": [
        ("type", [], "El (Pi^ x : Bool^{}. Unit^{})",
         "Pi x : (El Bool^{}). (El Unit^{})", None),
        ("type", [], "El (Pi^ x : Unit^{}. Bool^{})",
         "Pi x : (El Unit^{}). (El Bool^{})", None),
        ("type", [("k", "clock")], "El (Pi^ x : Fin^{k}(2). Fin^{k}(1))",
         "Pi x : (El Fin^{k}(2)). (El Fin^{k}(1))", None),
    ],
    "el-all": [
        ("type", [], "El (All^ k. Nat^{k})", "All k. El Nat^{k}", None),
        ("type", [], "El (All^ k. Bool^{k})", "All k. El Bool^{k}", None),
        ("type", [], "El (All^ k. Fin^{k}(2))", "All k. El Fin^{k}(2)",
         None),
    ],
    "el-later": [
        ("type", [("k", "clock")],
         "El (Later^ k (next k Nat^{k}))", "|>k (El Nat^{k})", None),
        ("type", [("k", "clock")],
         "El (Later^ k (next k Bool^{k}))", "|>k (El Bool^{k})", None),
        ("type", [("k", "clock")],
         "El (Later^ k (next k [X <- next k Unit^{k}] X))",
         "|>k [X <- next k Unit^{k}] (El X)", None),
    ],
    "in-sigma": [
        ("term", [("k", "clock")],
         "in{ ; k} (Sg^ x : Nat^{}. Bool^{})",
         "Sg^{k} x : (in{ ; k} Nat^{}). (in{ ; k} Bool^{})", None),
        ("term", [("k", "clock")],
         "in{ ; k} (Sg^ x : Unit^{}. Fin^{}(2))",
         "Sg^{k} x : (in{ ; k} Unit^{}). (in{ ; k} Fin^{}(2))", None),
        ("term", [("k1", "clock"), ("k2", "clock")],
         "in{k1 ; k1,k2} (Sg^ x : Nat^{k1}. Unit^{k1})",
         "Sg^{k1,k2} x : (in{k1 ; k1,k2} Nat^{k1})."
         " (in{k1 ; k1,k2} Unit^{k1})", None),
    ],
    "in-pi": [
        ("term", [("k", "clock")],
         "in{ ; k} (Pi^ x : Bool^{}. Unit^{})",
         "Pi^{k} x : (in{ ; k} Bool^{}). (in{ ; k} Unit^{})", None),
        ("term", [("k", "clock")],
         "in{ ; k} (Pi^ x : Unit^{}. Bool^{})",
         "Pi^{k} x : (in{ ; k} Unit^{}). (in{ ; k} Bool^{})", None),
        ("term", [("k1", "clock"), ("k2", "clock")],
         "in{k1 ; k1,k2} (Pi^ x : Fin^{k1}(2). Fin^{k1}(1))",
         "Pi^{k1,k2} x : (in{k1 ; k1,k2} Fin^{k1}(2))."
         " (in{k1 ; k1,k2} Fin^{k1}(1))", None),
    ],
    "in-all": [
        ("term", [("k1", "clock")],
         "in{ ; k1} (All^ j. Nat^{j})",
         "All^{k1} j. in{j ; j,k1} Nat^{j}", None),
        ("term", [("k1", "clock")],
         "in{ ; k1} (All^ j. Bool^{j})",
         "All^{k1} j. in{j ; j,k1} Bool^{j}", None),
        ("term", [("k1", "clock"), ("k2", "clock")],
         "in{k1 ; k1,k2} (All^ j. Unit^{j,k1})",
         "All^{k1,k2} j. in{j,k1 ; j,k1,k2} Unit^{j,k1}", None),
    ],
    "in-later": [
        ("term", [("k", "clock"), ("k1", "clock")],
         "in{k ; k,k1} (Later^ k (next k Nat^{k}))",
         "Later^ k (next k (in{k ; k,k1} Nat^{k}))", None),
        ("term", [("k", "clock"), ("k1", "clock")],
         "in{k ; k,k1} (Later^ k (next k Bool^{k}))",
         "Later^ k (next k (in{k ; k,k1} Bool^{k}))", None),
        ("term", [("k", "clock"), ("k1", "clock")],
         "in{k ; k,k1} (Later^ k (next k Unit^{k}))",
         "Later^ k (next k (in{k ; k,k1} Unit^{k}))", None),
    ],
}

# Substitution-lemma instances: (source context, target context, variable
# substitution, clock substitution, kind, subject, optional subject type).
# The judgement lives in the source context; the substitution maps it into
# the target context.
SUBST_INSTANCES = [
    ([("x", "Nat")], [("y", "Nat")], {"x": "succ y"}, {},
     "term", "succ x", None),
    ([("x", "Nat"), ("b", "Bool")], [("p", "Nat * Bool")],
     {"x": "fst p", "b": "snd p"}, {}, "term", "(b, x)", "Bool * Nat"),
    ([("k", "clock")], [("j", "clock")], {}, {"k": "j"},
     "term", "next k 0", "|>k Nat"),
    ([("k", "clock"), ("x", "|>k Nat")], [("k", "clock")],
     {"x": "(next k 1 : |>k Nat)"}, {"k": "k"},
     "term", "next k [y <- x] (succ y)", "|>k Nat"),
    ([("k", "clock"), ("x", "|>k Nat")], [("k", "clock")],
     {"x": "(next k 0 : |>k Nat)"}, {"k": "k"},
     "type", "|>k [y <- x] (Id Nat y y)", None),
    ([("k", "clock"), ("f", "All j. Nat")], [("k", "clock")],
     {"f": "(/\\j. 2 : All j. Nat)"}, {"k": "k"}, "term", "f @k", None),
    ([("k", "clock"), ("s", "El (Str @k)")], [("k", "clock")],
     {"s": "(zeros @k)"}, {"k": "k"}, "term", "fst s", None),
    ([("k", "clock"), ("s", "El (Str @k)")], [("k", "clock")],
     {"s": "(zeros @k)"}, {"k": "k"}, "term", "snd s", None),
    ([("k", "clock"), ("s", "El (Str @k)")], [("k", "clock")],
     {"s": "(zeros @k)"}, {"k": "k"},
     "type", "Id Nat (fst s) (fst s)", None),
    ([("k", "clock"), ("X", "U{k}")], [("k", "clock")],
     {"X": "(Nat^{k} : U{k})"}, {"k": "k"},
     "term", "Later^ k (next k X)", None),
    ([("k", "clock"), ("X", "U{k}")], [("k", "clock")],
     {"X": "(Bool^{k} : U{k})"}, {"k": "k"},
     "term", "Sg^ x : X. Bool^{k}", None),
    ([("k", "clock"), ("X", "U{k}")], [("k", "clock")],
     {"X": "(Fin^{k}(2) : U{k})"}, {"k": "k"},
     "type", "El (Sg^ x : X. Nat^{k})", None),
    ([("k1", "clock"), ("k2", "clock")], [("a", "clock"), ("b", "clock")],
     {}, {"k1": "b", "k2": "a"}, "term", "in{k1 ; k1,k2} Nat^{k1}", None),
    ([("x", "Nat")], [("x", "Nat"), ("b", "Bool")], {"x": "x"}, {},
     "term", "(x, x)", "Nat * Nat"),
    ([("x", "Nat"), ("y", "Nat")], [("z", "Nat")],
     {"x": "z", "y": "z"}, {}, "term", "(x, y)", "Nat * Nat"),
    ([("k", "clock")], [("j", "clock")], {}, {"k": "j"},
     "term", "(fix k xs. (0, xs) : El (Str @k))", None),
    ([("u", "All k. |>k Nat")], [],
     {"u": "(/\\k. next k 2 : All k. |>k Nat)"}, {},
     "term", "prev k. u @k", None),
    ([("u", "All k. |>k Nat")], [],
     {"u": "(/\\k. next k 1 : All k. |>k Nat)"}, {},
     "term", "force u", None),
    ([("x", "Nat")], [("y", "Nat")], {"x": "succ y"}, {},
     "type", "(Id Nat x x) * Bool", None),
    ([("x", "Nat")], [("b", "Bool")],
     {"x": "(fst ((1, b) : Nat * Bool))"}, {},
     "type", "All k. |>k (Id Nat x x)", None),
    ([("x", "Nat")], [("y", "Nat")], {"x": "y"}, {},
     "term", "\\z. (z, x)", "Bool -> (Bool * Nat)"),
    ([("x", "Nat")], [], {"x": "2"}, {},
     "term", "(refl : Id Nat x x)", None),
]

# Clock-quantified types for the limit checks.
LIMIT_TYPES = [
    ("all-nat", "All k. Nat"),
    ("all-bool", "All k. Bool"),
    ("all-pair", "All k. (Nat * Bool)"),
    ("all-later-nat", "All k. |>k Nat"),
    ("all-later-bool", "All k. |>k Bool"),
    ("all-stream", "All k. El (Str @k)"),
]

# Bodies A for the force isomorphism between All k. |>k A and All k. A.
FORCE_TYPES = [
    ("nat", "Nat"),
    ("bool", "Bool"),
    ("pair", "Nat * Bool"),
    ("stream", "El (Str @k)"),
]

# Closed types checked in addition to the corpus types for the
# invariance and lifting suites.
EXTRA_TYPES = [
    ("id-nat", "Id Nat 0 0"),
    ("id-bool", "Id Bool true true"),
]


# -- the clock presheaf (negative control) -----------------------------------


def clock_presheaf_carrier(obj: TimeObject):
    return tuple(sorted(obj.clocks))


def clock_presheaf_restrict(sigma: TimeMorphism, lam: int):
    return sigma(lam)


# -- verifier ----------------------------------------------------------------


class Verifier:
    def __init__(self, trunc=(2, 2), nat_bound=2, fuel=8, timings=False):
        self.trunc_core = tuple(trunc)
        # Universe-code equations quantify over four-clock contexts (the
        # clock-quantifier code doubles the ambient clock set), so they
        # run at K=4 with tick budget 1 unless an even wider truncation
        # was requested.
        if self.trunc_core[0] >= 4:
            self.trunc_univ = self.trunc_core
        else:
            self.trunc_univ = (4, 1)
        self.nat_bound = nat_bound
        self.timings = timings
        self.checker = Checker(fuel=fuel)
        self._interps: dict = {}
        self._prelude = None
        self._corpus_programs = None

    # -- plumbing --

    def interp(self, trunc, nat_bound, mode="ext") -> Interp:
        key = (trunc, nat_bound, mode)
        hit = self._interps.get(key)
        if hit is None:
            hit = Interp(Truncation(*trunc), nat_bound=nat_bound,
                         mode=mode, checker=self.checker)
            self._interps[key] = hit
        return hit

    @property
    def core(self) -> Interp:
        return self.interp(self.trunc_core, self.nat_bound)

    @property
    def univ(self) -> Interp:
        return self.interp(self.trunc_univ, 1)

    def prelude(self):
        if self._prelude is None:
            defs = parse_file(PRELUDE, "<prelude>")
            elab = check_program(defs, self.checker, "<prelude>")
            self._prelude = {
                name: _ann(tm, ty) for name, (ty, tm) in elab.items()
            }
        return self._prelude

    def corpus_programs(self):
        if self._corpus_programs is None:
            progs = []
            for path in corpus_files("positive"):
                defs = parse_file(path.read_text(), str(path))
                elab = check_program(defs, self.checker, str(path))
                progs.append((path.stem, elab))
            self._corpus_programs = progs
        return self._corpus_programs

    def _term(self, src: str):
        return subst(parse_term(src), vsub=self.prelude())

    def _type(self, src: str):
        return subst(parse_type(src), vsub=self.prelude())

    def _ctx(self, entries) -> Ctx:
        ctx = Ctx(())
        for name, decl in entries:
            if decl == "clock":
                ctx = ctx.extend_clock(name)
            else:
                ty = self.checker.check_type(ctx, self._type(decl))
                ctx = ctx.extend_var(name, ty)
        return ctx

    def _check(self, cid, fn):
        started = time.monotonic()
        try:
            status, witness, skipped = fn()
        except CapacityError as exc:
            status, witness, skipped = "skip", {"reason": str(exc)}, 0
        entry = {"id": cid, "status": status, "skipped": skipped,
                 "millis": int((time.monotonic() - started) * 1000)
                 if self.timings else 0}
        if witness is not None:
            entry["witness"] = witness
        return entry

    # -- equation checking --

    def _points(self, interp, ctx):
        for obj in interp.trunc.objects():
            for env in interp.environments(ctx, obj):
                yield obj, env

    def _eq_term(self, interp, ctx, ltm, rtm):
        skipped = 0
        # evaluation is memoized, so repeated points return identical
        # objects; cache the (deep) comparison on identity
        seen: dict = {}
        for obj, env in self._points(interp, ctx):
            try:
                lv = interp.eval(ctx, ltm, obj, env)
                rv = interp.eval(ctx, rtm, obj, env)
            except CapacityError:
                skipped += 1
                continue
            pair = (id(lv), id(rv))
            if pair in seen:
                ok, sk = seen[pair]
            else:
                ok, sk = values_agree(lv, rv)
                seen[pair] = (ok, sk)
            skipped += sk
            if not ok:
                return "fail", {
                    "object": repr(obj), "env": repr(env),
                    "lhs": repr(lv), "rhs": repr(rv),
                }, skipped
        return "pass", None, skipped

    def _eq_type(self, interp, ctx, lty, rty):
        skipped = 0
        for obj, env in self._points(interp, ctx):
            try:
                lc = interp.carrier(ctx, lty, obj, env)
                rc = interp.carrier(ctx, rty, obj, env)
            except CapacityError:
                skipped += 1
                continue
            if lc != rc:
                return "fail", {
                    "object": repr(obj), "env": repr(env),
                    "lhs": repr(lc), "rhs": repr(rc),
                }, skipped
            # carrier-set equality is checked at every point above; the
            # (expensive) restriction-map comparison is checked at one
            # representative per clock-renaming class, which covers every
            # object by equivariance
            if not _canonical_object(obj):
                continue
            for step in interp.elementary_from(obj):
                rho = step.morphism
                for v in lc:
                    try:
                        lr = interp.restrict_value(ctx, env, lty, v, rho)
                        rr = interp.restrict_value(ctx, env, rty, v, rho)
                    except CapacityError:
                        skipped += 1
                        continue
                    ok, sk = values_agree(lr, rr)
                    skipped += sk
                    if not ok:
                        return "fail", {
                            "object": repr(obj), "env": repr(env),
                            "morphism": repr(rho), "element": repr(v),
                            "lhs": repr(lr), "rhs": repr(rr),
                        }, skipped
        return "pass", None, skipped

    def _run_instance(self, interp, inst):
        kind, ctx_spec, lhs, rhs, ty_src = inst
        ctx = self._ctx(ctx_spec)
        if kind == "type":
            lty = self.checker.check_type(ctx, self._type(lhs))
            rty = self.checker.check_type(ctx, self._type(rhs))
            return self._eq_type(interp, ctx, lty, rty)
        lraw, rraw = self._term(lhs), self._term(rhs)
        if ty_src is None:
            ltm, ty = self.checker.infer(ctx, lraw)
        else:
            ty = self.checker.check_type(ctx, self._type(ty_src))
            ltm = self.checker.check(ctx, lraw, ty)
        rtm = self.checker.check(ctx, rraw, ty)
        return self._eq_term(interp, ctx, _ann(ltm, ty), _ann(rtm, ty))

    def _rule_checks(self, prefix, interp, rules):
        checks = []
        for rule in sorted(rules):
            for i, inst in enumerate(rules[rule], start=1):
                checks.append(self._check(
                    f"{prefix}.{rule}.{i}",
                    lambda inst=inst: self._run_instance(interp, inst)))
        return checks

    def _fix_checks(self):
        checks = []
        for i, (ctx_spec, src) in enumerate(FIX_INSTANCES, start=1):
            def run(ctx_spec=ctx_spec, src=src):
                ctx = self._ctx(ctx_spec)
                ltm, ty = self.checker.infer(ctx, self._term(src))
                fix = strip_ann(ltm)
                assert isinstance(fix, Fix)
                unfolded = subst1(fix.body, fix.var,
                                  Next(fix.clock, (), ltm))
                rtm = self.checker.check(ctx, unfolded, ty)
                return self._eq_term(self.core, ctx, _ann(ltm, ty),
                                     _ann(rtm, ty))
            checks.append(self._check(f"eq.fix.{i}", run))
        return checks

    def _irrelevance_instances(self):
        """Closed terms of type All k. A with k not free in A, scanned
        from the corpus plus a fixed extra list."""
        seen = set()
        out = []
        for stem, elab in self.corpus_programs():
            for name, (ty, tm) in elab.items():
                nty = normalize(ty)
                if not isinstance(nty, TAll):
                    continue
                if nty.clock in free_clocks(nty.body):
                    continue
                key = alpha_key(_ann(tm, ty))
                if key in seen:
                    continue
                seen.add(key)
                out.append((f"{stem}.{name}", _ann(tm, ty)))
        for label, src in IRRELEVANCE_EXTRA:
            tm, ty = self.checker.infer(Ctx(()), self._term(src))
            key = alpha_key(_ann(tm, ty))
            if key not in seen:
                seen.add(key)
                out.append((f"extra.{label}", _ann(tm, ty)))
        return out

    def _irrelevance_checks(self):
        ctx = self._ctx([("k1", "clock"), ("k2", "clock")])
        checks = []
        for label, ann in self._irrelevance_instances():
            def run(ann=ann):
                ltm, lty = self.checker.infer(ctx, CApp(ann, "k1"))
                rtm, _ = self.checker.infer(ctx, CApp(ann, "k2"))
                return self._eq_term(self.core, ctx, _ann(ltm, lty),
                                     _ann(rtm, lty))
            checks.append(self._check(f"eq.irrelevance.{label}", run))
        return checks

    def _mutation_check(self):
        def run():
            status, witness, skipped = self._run_instance(self.core,
                                                          MUTATION)
            if status == "fail":
                return "pass", witness, skipped
            return "fail", {"reason":
                            "corrupted law was not refuted"}, skipped
        return self._check("eq.control.mutated-projection", run)

    def suite_eq(self):
        checks = self._rule_checks("eq", self.core, CORE_RULES)
        checks += self._fix_checks()
        checks += self._irrelevance_checks()
        checks.append(self._mutation_check())
        return checks

    def suite_universes(self):
        return self._rule_checks("univ", self.univ, UNIV_RULES)

    # -- invariance ---------------------------------------------------------

    def invariance_types(self):
        """Distinct closed corpus types (plus extras), as (label, type)."""
        seen = set()
        out = []
        for stem, elab in self.corpus_programs():
            for name, (ty, _) in elab.items():
                nty = normalize(ty)
                key = alpha_key(nty)
                if key in seen:
                    continue
                seen.add(key)
                out.append((f"{stem}.{name}", nty))
        for label, src in EXTRA_TYPES:
            nty = normalize(self.checker.check_type(Ctx(()),
                                                    self._type(src)))
            if alpha_key(nty) not in seen:
                seen.add(alpha_key(nty))
                out.append((f"extra.{label}", nty))
        return out

    def _inclusions(self, interp):
        """Fresh-clock inclusions (X, iota) within the truncation."""
        trunc = interp.trunc
        for obj in trunc.objects():
            c = fresh_clock(obj.clocks)
            for n in range(trunc.N + 1):
                sup = add_clock(obj, c, n)
                if trunc.contains(sup):
                    yield obj, inclusion(obj, sup)

    def _bijection(self, carrier_fn, restrict_fn, interp):
        """Check that restriction along every fresh-clock inclusion is a
        bijection; returns (status, witness, skipped)."""
        skipped = 0
        for obj, iota in self._inclusions(interp):
            try:
                lo = carrier_fn(obj)
                hi = carrier_fn(iota.dst)
                images = [restrict_fn(v, iota) for v in lo]
            except CapacityError:
                skipped += 1
                continue
            if len(set(map(repr, images))) != len(lo) \
                    or set(map(repr, images)) != set(map(repr, hi)):
                return "fail", {
                    "object": repr(obj), "inclusion": repr(iota),
                    "carrier": repr(lo), "images": repr(images),
                    "target": repr(hi),
                }, skipped
        return "pass", None, skipped

    def _pullback(self, carrier_fn, restrict_fn, interp):
        """Lemma-style pullback form: elements over two independent fresh
        clocks agreeing at the union come from a unique element below."""
        skipped = 0
        trunc = interp.trunc
        for obj in trunc.objects():
            c = fresh_clock(obj.clocks)
            d = c + 1
            for n in range(trunc.N + 1):
                x1 = add_clock(obj, c, n)
                x2 = add_clock(obj, d, n)
                x12 = add_clock(x1, d, n)
                if not (trunc.contains(x1) and trunc.contains(x12)):
                    continue
                i1, i2 = inclusion(obj, x1), inclusion(obj, x2)
                j1, j2 = inclusion(x1, x12), inclusion(x2, x12)
                try:
                    below = carrier_fn(obj)
                    a1s = carrier_fn(x1)
                    a2s = carrier_fn(x2)
                    pushed = [(v, restrict_fn(v, i1), restrict_fn(v, i2))
                              for v in below]
                except CapacityError:
                    skipped += 1
                    continue
                for a1 in a1s:
                    for a2 in a2s:
                        try:
                            u1 = restrict_fn(a1, j1)
                            u2 = restrict_fn(a2, j2)
                        except CapacityError:
                            skipped += 1
                            continue
                        if repr(u1) != repr(u2):
                            continue
                        pre = [v for v, w1, w2 in pushed
                               if repr(w1) == repr(a1)
                               and repr(w2) == repr(a2)]
                        if len(pre) != 1:
                            return "fail", {
                                "object": repr(obj), "upper1": repr(a1),
                                "upper2": repr(a2),
                                "preimages": repr(pre),
                            }, skipped
        return "pass", None, skipped

    def _type_presheaf(self, interp, ty):
        ctx = Ctx(())

        def carrier_fn(obj):
            return interp.carrier(ctx, ty, obj, ())

        def restrict_fn(v, rho):
            return interp.restrict_value(ctx, (), ty, v, rho)

        return carrier_fn, restrict_fn

    def suite_invariance(self):
        interp = self.interp((2, 1), 1)
        checks = []
        for label, ty in self.invariance_types():
            car, res = self._type_presheaf(interp, ty)
            checks.append(self._check(
                f"invariance.bijection.{label}",
                lambda car=car, res=res: self._bijection(car, res,
                                                         interp)))
            checks.append(self._check(
                f"invariance.pullback.{label}",
                lambda car=car, res=res: self._pullback(car, res,
                                                        interp)))

        def control():
            status, witness, skipped = self._bijection(
                clock_presheaf_carrier, clock_presheaf_restrict, interp)
            if status == "fail":
                return "pass", witness, skipped
            return "fail", {"reason": "clock presheaf passed"}, skipped
        checks.append(self._check("invariance.control.clock-presheaf",
                                  control))
        return checks

    # -- lifting ------------------------------------------------------------

    def _lifting(self, interp, probe, carrier_fn, restrict_fn,
                 expect_unique=True):
        from .semantics import solve_sections
        from .timecat import compose
        keys = []
        for sigma in interp.mors_from(probe):
            for lam in sorted(sigma.dst.clocks):
                keys.append((sigma, lam))
        if not keys:
            return "pass", None, 0

        def candidates(key):
            sigma, lam = key
            return carrier_fn(sigma.dst)

        def constraints(key, v):
            sigma, lam = key
            for step in interp.elementary_from(sigma.dst):
                e = step.morphism
                yield ((compose(e, sigma), e(lam)), restrict_fn(v, e))

        base = carrier_fn(probe)
        found_nonunique = None
        for family in solve_sections(keys, candidates, constraints):
            fillers = [
                a for a in base
                if all(repr(restrict_fn(a, sigma)) == repr(v)
                       for (sigma, lam), v in family.items())
            ]
            if len(fillers) != 1:
                found_nonunique = {
                    "probe": repr(probe),
                    "family": repr(sorted(family.items(), key=repr)),
                    "fillers": repr(fillers),
                }
                if expect_unique:
                    return "fail", found_nonunique, 0
        if expect_unique:
            return "pass", None, 0
        if found_nonunique is not None:
            return "pass", found_nonunique, 0
        return "fail", {"reason": "every family had a unique filler"}, 0

    def suite_lifting(self):
        interp = self.interp((2, 1), 1)
        checks = []
        for label, ty in self.invariance_types():
            car, res = self._type_presheaf(interp, ty)

            def run(car=car, res=res):
                skipped = 0
                for probe in interp.trunc.objects():
                    status, witness, sk = self._lifting(
                        interp, probe, car, res)
                    skipped += sk
                    if status == "fail":
                        return status, witness, skipped
                return "pass", None, skipped
            checks.append(self._check(f"lifting.unique.{label}", run))

        def control():
            for probe in interp.trunc.objects():
                status, witness, _ = self._lifting(
                    interp, probe, clock_presheaf_carrier,
                    clock_presheaf_restrict, expect_unique=False)
                if status == "pass":
                    return "pass", witness, 0
            return "fail", {"reason": "clock presheaf lifted uniquely"}, 0
        checks.append(self._check("lifting.control.clock-presheaf",
                                  control))
        return checks

    # -- limits and force ---------------------------------------------------

    def _limit_check(self, interp, ty):
        """The carrier of a clock quantifier is the limit of the tick
        chain over a fresh clock: the slot-projection map is injective
        and every compatible chain has exactly one preimage."""
        ctx = Ctx(())
        nty = normalize(ty)
        assert isinstance(nty, TAll)
        ctxk = ctx.extend_clock(nty.clock)
        trunc = interp.trunc
        skipped = 0
        for obj in trunc.objects():
            c = fresh_clock(obj.clocks)
            stages = []
            for n in range(trunc.N + 1):
                sup = add_clock(obj, c, n)
                if trunc.contains(sup):
                    stages.append((n, sup))
            if not stages:
                skipped += 1
                continue
            try:
                table = interp.carrier(ctx, nty, obj, ())

                def phi(v):
                    slots = fam_slots(v)
                    return tuple(
                        slots[(inclusion(obj, sup), c)]
                        for n, sup in stages)

                images = [phi(v) for v in table]
            except (CapacityError, KeyError):
                skipped += 1
                continue
            if len(set(map(repr, images))) != len(table):
                return "fail", {
                    "object": repr(obj),
                    "reason": "chain projection not injective",
                }, skipped
            # enumerate all compatible chains and count preimages
            try:
                chains = [()]
                for idx, (n, sup) in enumerate(stages):
                    layer = interp.carrier(ctxk, nty.body, sup, (c,))
                    new = []
                    for chain in chains:
                        for g in layer:
                            if idx > 0:
                                _, lower = stages[idx - 1]
                                down = TimeMorphism.make(
                                    sup, lower,
                                    {cc: cc for cc in sup.clocks})
                                back = interp.restrict_value(
                                    ctxk, (c,), nty.body, g, down)
                                if repr(back) != repr(chain[-1]):
                                    continue
                            new.append(chain + (g,))
                    chains = new
            except CapacityError:
                skipped += 1
                continue
            image_set = {repr(im) for im in images}
            for chain in chains:
                count = sum(1 for im in images if repr(im) == repr(chain))
                if count != 1:
                    return "fail", {
                        "object": repr(obj), "chain": repr(chain),
                        "preimages": count,
                    }, skipped
            if len(chains) != len(table):
                return "fail", {
                    "object": repr(obj),
                    "chains": len(chains), "table": len(table),
                }, skipped
        return "pass", None, skipped

    def _force_check(self, interp, body_src):
        """force and clock-eta-expansion via next are mutually inverse
        between All k. |>k A and All k. A."""
        later_ty = self.checker.check_type(
            Ctx(()), self._type(f"All k. |>k ({body_src})"))
        plain_ty = self.checker.check_type(
            Ctx(()), self._type(f"All k. ({body_src})"))
        ctx_f = Ctx(()).extend_var("x", later_ty)
        ctx_n = Ctx(()).extend_var("y", plain_ty)
        force_tm, force_ty = self.checker.infer(ctx_f, Force(Var("x")))
        nu_raw = parse_term("/\\k. next k (y @k)")
        nu_tm = self.checker.check(ctx_n, subst(nu_raw,
                                                vsub=self.prelude()),
                                   later_ty)
        force_ann = _ann(force_tm, force_ty)
        nu_ann = _ann(nu_tm, later_ty)
        skipped = 0
        for obj in interp.trunc.objects():
            try:
                delayed = interp.carrier(Ctx(()), later_ty, obj, ())
                plain = interp.carrier(Ctx(()), plain_ty, obj, ())
            except CapacityError:
                skipped += 1
                continue
            for v in delayed:
                try:
                    f = interp.eval(ctx_f, force_ann, obj, (v,))
                    back = interp.eval(ctx_n, nu_ann, obj, (f,))
                except CapacityError:
                    skipped += 1
                    continue
                ok, sk = values_agree(back, v)
                skipped += sk
                if not ok:
                    return "fail", {
                        "object": repr(obj), "direction": "nu . force",
                        "element": repr(v), "roundtrip": repr(back),
                    }, skipped
            for w in plain:
                try:
                    d = interp.eval(ctx_n, nu_ann, obj, (w,))
                    back = interp.eval(ctx_f, force_ann, obj, (d,))
                except CapacityError:
                    skipped += 1
                    continue
                ok, sk = values_agree(back, w)
                skipped += sk
                if not ok:
                    return "fail", {
                        "object": repr(obj), "direction": "force . nu",
                        "element": repr(w), "roundtrip": repr(back),
                    }, skipped
        return "pass", None, skipped

    def suite_limit(self):
        checks = []
        for label, src in LIMIT_TYPES:
            ty = self.checker.check_type(Ctx(()), self._type(src))
            checks.append(self._check(
                f"limit.chain.{label}",
                lambda ty=ty: self._limit_check(self.core, ty)))
        # degenerate truncation: with tick budget 0 both sides collapse
        trivial = self.interp((2, 0), self.nat_bound)
        ty0 = self.checker.check_type(Ctx(()), self._type("All k. Nat"))
        checks.append(self._check(
            "limit.chain.trivial-budget",
            lambda: self._limit_check(trivial, ty0)))
        for label, src in FORCE_TYPES:
            checks.append(self._check(
                f"limit.force.{label}",
                lambda src=src: self._force_check(self.core, src)))
        return checks

    # -- substitution -------------------------------------------------------

    def _subst_check(self, inst):
        src_spec, tgt_spec, vsub_src, csub, kind, subject, ty_src = inst
        src_ctx = self._ctx(src_spec)
        tgt_ctx = self._ctx(tgt_spec)
        interp = self.core
        vsub_raw = {name: self._term(s) for name, s in vsub_src.items()}
        # elaborate the substitution against the (substituted) types
        vsub_elab = {}
        for name, raw in vsub_raw.items():
            tm, ty = self.checker.infer(tgt_ctx, raw)
            vsub_elab[name] = _ann(tm, ty)
        subject_raw = (self._type(subject) if kind == "type"
                       else self._term(subject))
        pushed_raw = subst(subject_raw, vsub=vsub_raw, csub=csub)
        if kind == "type":
            orig = self.checker.check_type(src_ctx, subject_raw)
            pushed = self.checker.check_type(tgt_ctx, pushed_raw)
        else:
            if ty_src is None:
                otm, oty = self.checker.infer(src_ctx, subject_raw)
            else:
                oty = self.checker.check_type(src_ctx,
                                              self._type(ty_src))
                otm = self.checker.check(src_ctx, subject_raw, oty)
            orig = _ann(otm, oty)
            pty_raw = subst(oty, vsub=vsub_raw, csub=csub)
            pty = self.checker.check_type(tgt_ctx, pty_raw)
            pushed = _ann(self.checker.check(tgt_ctx, pushed_raw, pty),
                          pty)
        skipped = 0
        for obj in interp.trunc.objects():
            for env in interp.environments(tgt_ctx, obj):
                # push the environment through the substitution
                penv = []
                ok_env = True
                for entry in src_ctx.entries:
                    if isinstance(entry, ClockDecl):
                        name = csub.get(entry.name, entry.name)
                        from .semantics import env_clock
                        penv.append(env_clock(tgt_ctx, env, name))
                        continue
                    rho = vsub_elab.get(entry.name)
                    if rho is None:
                        ok_env = False
                        break
                    try:
                        penv.append(interp.eval(tgt_ctx, rho, obj, env))
                    except CapacityError:
                        ok_env = False
                        break
                if not ok_env:
                    skipped += 1
                    continue
                penv = tuple(penv)
                try:
                    if kind == "type":
                        a = interp.carrier(tgt_ctx, pushed, obj, env)
                        b = interp.carrier(src_ctx, orig, obj, penv)
                        if a != b:
                            return "fail", {
                                "object": repr(obj), "env": repr(env),
                                "substituted": repr(a),
                                "original": repr(b),
                            }, skipped
                    else:
                        a = interp.eval(tgt_ctx, pushed, obj, env)
                        b = interp.eval(src_ctx, orig, obj, penv)
                        ok, sk = values_agree(a, b)
                        skipped += sk
                        if not ok:
                            return "fail", {
                                "object": repr(obj), "env": repr(env),
                                "substituted": repr(a),
                                "original": repr(b),
                            }, skipped
                except CapacityError:
                    skipped += 1
                    continue
        return "pass", None, skipped

    def suite_subst(self):
        return [
            self._check(f"subst.pair.{i:02d}",
                        lambda inst=inst: self._subst_check(inst))
            for i, inst in enumerate(SUBST_INSTANCES, start=1)
        ]

    # -- mode agreement -----------------------------------------------------

    def suite_modes(self):
        ext = self.core
        clo = self.interp(self.trunc_core, self.nat_bound, mode="closure")
        objs = [EMPTY, TimeObject(((0, 1),)), TimeObject(((0, 2),))]
        objs = [o for o in objs if ext.trunc.contains(o)]
        ctx0 = Ctx(())
        checks = []
        for stem, elab in self.corpus_programs():
            def run(elab=elab):
                skipped = 0
                for name, (ty, tm) in elab.items():
                    ann = _ann(tm, ty)
                    for obj in objs:
                        try:
                            cv = clo.eval(ctx0, ann, obj, ())
                            tv = clo.tabulate(ctx0, ty, obj, (), cv)
                            ev = ext.eval(ctx0, ann, obj, ())
                        except CapacityError:
                            skipped += 1
                            continue
                        ok, sk = values_agree(tv, ev)
                        skipped += sk
                        if not ok:
                            return "fail", {
                                "definition": name, "object": repr(obj),
                                "closure": repr(tv), "ext": repr(ev),
                            }, skipped
                return "pass", None, skipped
            checks.append(self._check(f"modes.{stem}", run))
        return checks

    # -- dispatch -----------------------------------------------------------

    def run_suite(self, name: str) -> dict:
        fn = {
            "eq": self.suite_eq,
            "universes": self.suite_universes,
            "invariance": self.suite_invariance,
            "lifting": self.suite_lifting,
            "limit": self.suite_limit,
            "subst": self.suite_subst,
            "modes": self.suite_modes,
        }.get(name)
        if fn is None:
            raise ValueError(f"unknown suite {name!r}")
        checks = sorted(fn(), key=lambda c: c["id"])
        return {"suite": name, "checks": checks}

    def run(self, suite: str = "all") -> dict:
        if suite != "all":
            return self.run_suite(suite)
        checks = []
        for name in SUITES:
            checks.extend(self.run_suite(name)["checks"])
        return {"suite": "all", "checks": sorted(checks,
                                                 key=lambda c: c["id"])}


# -- stream unfolding --------------------------------------------------------


def unfold_stream(ty, tm, steps: int, checker=None, nat_bound=8):
    """Evaluate a stream (or clock-quantified stream) definition in
    closure mode at a single clock with the given tick budget, and
    flatten the nested head/tail pairs into the observable prefix (a list
    of steps+1 head values)."""
    checker = checker or Checker()
    interp = Interp(Truncation(2, steps + 1), nat_bound=nat_bound,
                    mode="closure", checker=checker)
    ctx0 = Ctx(())
    obj = TimeObject(((0, steps),))
    v = interp.eval(ctx0, _ann(tm, ty), obj, ())
    nty = normalize(ty)
    if isinstance(nty, TAll):
        v = interp.capply(v, 0, obj)
    heads = []
    while isinstance(v, tuple) and v and v[0] == "pair":
        heads.append(_plain(v[1]))
        v = v[2]
    return heads


def _plain(v):
    if isinstance(v, tuple) and len(v) == 2 and v[0] in ("nat", "fin"):
        return v[1]
    if isinstance(v, tuple) and len(v) == 2 and v[0] == "bool":
        return bool(v[1])
    return repr(v)


# -- reports -----------------------------------------------------------------


def report_failures(report: dict) -> int:
    return sum(1 for c in report["checks"] if c["status"] == "fail")


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def report_text(report: dict) -> str:
    lines = [f"suite: {report['suite']}"]
    counts = {"pass": 0, "fail": 0, "skip": 0}
    for c in report["checks"]:
        counts[c["status"]] = counts.get(c["status"], 0) + 1
        line = f"  {c['status']:<5} {c['id']}"
        if c.get("skipped"):
            line += f"  (capacity-skipped points: {c['skipped']})"
        lines.append(line)
        if c["status"] == "fail" and "witness" in c:
            lines.append(f"        witness: {c['witness']!r}")
    lines.append(f"{counts['pass']} passed, {counts['fail']} failed, "
                 f"{counts['skip']} skipped")
    return "\n".join(lines) + "\n"
