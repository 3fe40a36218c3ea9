"""Kernel and executable finite presheaf model for a guarded dependent
type theory with multiple clocks.

The package provides:

* an abstract syntax with delayed substitutions and Tarski-style universes
  indexed by finite clock sets (:mod:`gdtt.syntax`);
* a parser and pretty printer for a plain-text surface syntax
  (:mod:`gdtt.parser`, :mod:`gdtt.printer`);
* the finite category of time objects (clock sets with tick budgets) and
  its truncations (:mod:`gdtt.timecat`);
* a bidirectional type checker with fuel-bounded conversion
  (:mod:`gdtt.typecheck`);
* a denotational evaluator over truncations, in closure and extensional
  modes (:mod:`gdtt.semantics`, :mod:`gdtt.universes`);
* a verifier that checks the judgemental equalities, clock irrelevance,
  invariance under clock introduction, limit/force isomorphisms, the
  fixed-point law, substitution lemmas, and mode agreement by exhaustive
  enumeration (:mod:`gdtt.verify`), surfaced by the ``gdtt`` command line
  tool (:mod:`gdtt.cli`).
"""

from .parser import Definition, Diagnostic, parse_file, parse_term, parse_type
from .printer import print_term, print_type
from .semantics import CapacityError, Interp, fam_slots, is_fam, values_agree
from .syntax import Ctx, alpha_eq, free_clocks, free_vars, subst
from .timecat import TimeMorphism, TimeObject, Truncation
from .typecheck import (
    Checker, CheckError, UNDECIDED, UndecidedError, check_program, normalize,
)
from .universes import UnivElement, build_element

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "CheckError", "Checker", "Ctx", "Definition",
    "Diagnostic", "Interp", "TimeMorphism", "TimeObject", "Truncation",
    "UNDECIDED", "UndecidedError", "UnivElement", "alpha_eq",
    "build_element", "check_program", "fam_slots", "free_clocks",
    "free_vars", "is_fam", "normalize", "parse_file", "parse_term",
    "parse_type", "print_term", "print_type", "subst", "values_agree",
    "__version__",
]
