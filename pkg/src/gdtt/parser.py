"""Concrete syntax: lexer and recursive descent parser.

Declarations:   def name : TYPE := TERM
Types:          Pi x : A . B        A -> B       Sg x : A . B      A * B
                All k . A           |>k A        |>k [x <- t, y <- u] A
                Id A t s            Nat Bool Unit Fin(3)
                U{k1,k2}            El t
Terms:          \\x. t   /\\k. t    fix k x. t    prev k. t
                next k t            next k [x <- t] u
                t u      t @k       (t, u)   (t : A)   fst t   snd t
                force t  succ t     star true false 0 1 2  fin(i,m)  refl
Codes:          Sg^ x : a . b    Pi^ x : a . b    All^ k . a    Later^ k a
                in{k1 ; k1,k2} a    Nat^{k}  Unit^{}  Bool^{k}  Fin^{k}(3)
                (an optional {k,...} annotation may follow Sg^/Pi^/All^)

All input is ASCII.  Errors are reported as file:line:col: error: message.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .syntax import (
    Ann, App, Binding, BoolLit, CApp, CLam, CodeAll, CodeBool, CodeFin,
    CodeIn, CodeLater, CodeNat, CodePi, CodeSg, CodeUnit, FinLit, Fix, Force,
    Fst, Lam, NatLit, Next, Pair, Prev, Refl, Snd, Star, Succ, TAll, TBool,
    TEl, TFin, TId, TLater, TNat, TPi, TSg, TUniv, TUnit, Term, Type, Var,
    mkdelta,
)


class Diagnostic(Exception):
    def __init__(self, file: str, line: int, col: int, message: str,
                 severity: str = "error"):
        self.file = file
        self.line = line
        self.col = col
        self.message = message
        self.severity = severity
        super().__init__(str(self))

    def __str__(self):
        return f"{self.file}:{self.line}:{self.col}: {self.severity}: {self.message}"


@dataclass(frozen=True)
class Token:
    kind: str  # ident, num, sym, eof
    text: str
    line: int
    col: int


SYMBOLS = [
    ":=", "->", "<-", "/\\", "|>", "(", ")", "[", "]", "{", "}",
    ".", ",", ":", ";", "*", "\\", "@",
]

CARET_KEYWORDS = {"Sg^", "Pi^", "All^", "Later^", "Nat^", "Unit^", "Bool^", "Fin^"}


def tokenize(text: str, file: str = "<input>") -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "-" and text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("num", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            word = text[i:j]
            if j < n and text[j] == "^" and word + "^" in CARET_KEYWORDS:
                word += "^"
                j += 1
            toks.append(Token("ident", word, line, col))
            col += j - i
            i = j
            continue
        for sym in SYMBOLS:
            if text.startswith(sym, i):
                toks.append(Token("sym", sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise Diagnostic(file, line, col, f"unexpected character {c!r}")
    toks.append(Token("eof", "", line, col))
    return toks


KEYWORDS = {
    "def", "Pi", "Sg", "All", "Id", "Nat", "Bool", "Unit", "Fin", "U", "El",
    "in", "next", "prev", "force", "fix", "succ", "fst", "snd", "refl",
    "star", "true", "false", "fin",
} | CARET_KEYWORDS


@dataclass(frozen=True)
class Definition:
    name: str
    type: Type
    term: Term
    line: int
    col: int


class Parser:
    def __init__(self, text: str, file: str = "<input>"):
        self.file = file
        self.toks = tokenize(text, file)
        self.pos = 0

    # -- token plumbing -----------------------------------------------------

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        raise Diagnostic(self.file, tok.line, tok.col, message)

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def at_sym(self, text: str) -> bool:
        return self.at("sym", text)

    def at_word(self, text: str) -> bool:
        return self.at("ident", text)

    def eat_sym(self, text: str) -> Token:
        if not self.at_sym(text):
            self.fail(f"expected {text!r}")
        return self.next()

    def eat_word(self, text: str) -> Token:
        if not self.at_word(text):
            self.fail(f"expected {text!r}")
        return self.next()

    def ident(self) -> str:
        tok = self.peek()
        if tok.kind != "ident" or tok.text in KEYWORDS:
            self.fail("expected an identifier")
        return self.next().text

    def num(self) -> int:
        if not self.at("num"):
            self.fail("expected a number")
        return int(self.next().text)

    # -- entry points -------------------------------------------------------

    def parse_file(self) -> list[Definition]:
        defs = []
        while not self.at("eof"):
            tok = self.peek()
            self.eat_word("def")
            name = self.ident()
            self.eat_sym(":")
            ty = self.parse_type()
            self.eat_sym(":=")
            tm = self.parse_term()
            defs.append(Definition(name, ty, tm, tok.line, tok.col))
        return defs

    # -- types --------------------------------------------------------------

    def parse_type(self) -> Type:
        if self.at_word("Pi") or self.at_word("Sg"):
            word = self.next().text
            var = self.ident()
            self.eat_sym(":")
            dom = self.parse_type()
            self.eat_sym(".")
            cod = self.parse_type()
            return TPi(var, dom, cod) if word == "Pi" else TSg(var, dom, cod)
        if self.at_word("All"):
            self.next()
            clock = self.ident()
            self.eat_sym(".")
            return TAll(clock, self.parse_type())
        left = self.parse_type_prod()
        if self.at_sym("->"):
            self.next()
            right = self.parse_type()
            return TPi("_", left, right)
        return left

    def parse_type_prod(self) -> Type:
        left = self.parse_type_prefix()
        if self.at_sym("*"):
            self.next()
            right = self.parse_type_prod()
            return TSg("_", left, right)
        return left

    def parse_type_prefix(self) -> Type:
        if self.at_sym("|>"):
            self.next()
            clock = self.ident()
            bindings = self.parse_delayed_bindings()
            body = self.parse_type_prefix()
            return TLater(clock, bindings, body)
        if self.at_word("Id"):
            self.next()
            ty = self.parse_type_atom()
            lhs = self.parse_term_atom()
            rhs = self.parse_term_atom()
            return TId(ty, lhs, rhs)
        return self.parse_type_atom()

    def parse_type_atom(self) -> Type:
        if self.at_word("Nat"):
            self.next()
            return TNat()
        if self.at_word("Bool"):
            self.next()
            return TBool()
        if self.at_word("Unit"):
            self.next()
            return TUnit()
        if self.at_word("Fin"):
            self.next()
            self.eat_sym("(")
            m = self.num()
            self.eat_sym(")")
            return TFin(m)
        if self.at_word("U"):
            self.next()
            return TUniv(self.parse_clock_set())
        if self.at_word("El"):
            self.next()
            return TEl(self.parse_term_atom())
        if self.at_sym("("):
            self.next()
            ty = self.parse_type()
            self.eat_sym(")")
            return ty
        self.fail("expected a type")

    def parse_clock_set(self):
        self.eat_sym("{")
        names = []
        if not self.at_sym("}"):
            names.append(self.ident())
            while self.at_sym(","):
                self.next()
                names.append(self.ident())
        self.eat_sym("}")
        return mkdelta(names)

    def parse_delayed_bindings(self) -> tuple[Binding, ...]:
        if not self.at_sym("["):
            return ()
        self.next()
        bindings = []
        while True:
            var = self.ident()
            self.eat_sym("<-")
            term = self.parse_term()
            bindings.append(Binding(var, term))
            if self.at_sym(","):
                self.next()
                continue
            break
        self.eat_sym("]")
        return tuple(bindings)

    # -- terms --------------------------------------------------------------

    def parse_term(self) -> Term:
        if self.at_sym("\\"):
            self.next()
            var = self.ident()
            self.eat_sym(".")
            return Lam(var, self.parse_term())
        if self.at_sym("/\\"):
            self.next()
            clock = self.ident()
            self.eat_sym(".")
            return CLam(clock, self.parse_term())
        if self.at_word("fix"):
            self.next()
            clock = self.ident()
            var = self.ident()
            self.eat_sym(".")
            return Fix(clock, var, self.parse_term())
        if self.at_word("prev"):
            self.next()
            clock = self.ident()
            self.eat_sym(".")
            return Prev(clock, self.parse_term())
        if self.at_word("next"):
            self.next()
            clock = self.ident()
            bindings = self.parse_delayed_bindings()
            body = self.parse_term_atom()
            return Next(clock, bindings, body)
        if self.at_word("Sg^") or self.at_word("Pi^"):
            word = self.next().text
            delta = self.parse_clock_set() if self.at_sym("{") else None
            var = self.ident()
            self.eat_sym(":")
            dom = self.parse_term()
            self.eat_sym(".")
            cod = self.parse_term()
            cls = CodeSg if word == "Sg^" else CodePi
            return cls(delta, var, dom, cod)
        if self.at_word("All^"):
            self.next()
            delta = self.parse_clock_set() if self.at_sym("{") else None
            clock = self.ident()
            self.eat_sym(".")
            return CodeAll(delta, clock, self.parse_term())
        return self.parse_term_app()

    def parse_term_app(self) -> Term:
        head = self.parse_term_atom()
        while True:
            if self.at_sym("@"):
                self.next()
                head = CApp(head, self.ident())
                continue
            if self._at_term_atom():
                head = App(head, self.parse_term_atom())
                continue
            return head

    def _at_term_atom(self) -> bool:
        tok = self.peek()
        if tok.kind == "num":
            return True
        if tok.kind == "sym":
            return tok.text == "("
        if tok.kind == "ident":
            return tok.text not in (KEYWORDS - {
                "fst", "snd", "force", "succ", "refl", "star", "true",
                "false", "fin", "in", "Later^", "Nat^", "Unit^", "Bool^",
                "Fin^",
            })
        return False

    def parse_term_atom(self) -> Term:
        tok = self.peek()
        if tok.kind == "num":
            self.next()
            return NatLit(int(tok.text))
        if self.at_word("star"):
            self.next()
            return Star()
        if self.at_word("true"):
            self.next()
            return BoolLit(True)
        if self.at_word("false"):
            self.next()
            return BoolLit(False)
        if self.at_word("refl"):
            self.next()
            return Refl()
        if self.at_word("fst"):
            self.next()
            return Fst(self.parse_term_atom())
        if self.at_word("snd"):
            self.next()
            return Snd(self.parse_term_atom())
        if self.at_word("force"):
            self.next()
            return Force(self.parse_term_atom())
        if self.at_word("succ"):
            self.next()
            return Succ(self.parse_term_atom())
        if self.at_word("fin"):
            self.next()
            self.eat_sym("(")
            i = self.num()
            self.eat_sym(",")
            m = self.num()
            self.eat_sym(")")
            return FinLit(i, m)
        if self.at_word("Later^"):
            self.next()
            clock = self.ident()
            return CodeLater(clock, self.parse_term_atom())
        if self.at_word("in"):
            self.next()
            self.eat_sym("{")
            small = []
            if not (self.at_sym(";")):
                small.append(self.ident())
                while self.at_sym(","):
                    self.next()
                    small.append(self.ident())
            self.eat_sym(";")
            big = []
            if not self.at_sym("}"):
                big.append(self.ident())
                while self.at_sym(","):
                    self.next()
                    big.append(self.ident())
            self.eat_sym("}")
            return CodeIn(mkdelta(small), mkdelta(big), self.parse_term_atom())
        if self.at_word("Nat^"):
            self.next()
            return CodeNat(self.parse_clock_set())
        if self.at_word("Unit^"):
            self.next()
            return CodeUnit(self.parse_clock_set())
        if self.at_word("Bool^"):
            self.next()
            return CodeBool(self.parse_clock_set())
        if self.at_word("Fin^"):
            self.next()
            delta = self.parse_clock_set()
            self.eat_sym("(")
            m = self.num()
            self.eat_sym(")")
            return CodeFin(delta, m)
        if self.at_sym("("):
            self.next()
            term = self.parse_term()
            if self.at_sym(","):
                self.next()
                second = self.parse_term()
                self.eat_sym(")")
                return Pair(term, second)
            if self.at_sym(":"):
                self.next()
                ty = self.parse_type()
                self.eat_sym(")")
                return Ann(term, ty)
            self.eat_sym(")")
            return term
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            self.next()
            return Var(tok.text)
        self.fail("expected a term")


def parse_file(text: str, file: str = "<input>") -> list[Definition]:
    return Parser(text, file).parse_file()


def parse_term(text: str, file: str = "<input>") -> Term:
    p = Parser(text, file)
    term = p.parse_term()
    if not p.at("eof"):
        p.fail("trailing input after term")
    return term


def parse_type(text: str, file: str = "<input>") -> Type:
    p = Parser(text, file)
    ty = p.parse_type()
    if not p.at("eof"):
        p.fail("trailing input after type")
    return ty
