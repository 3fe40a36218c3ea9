"""Pretty printer for terms and types.

The output reparses to a structurally identical tree (round-trip property,
tested against randomly generated syntax).
"""

from __future__ import annotations

from .syntax import (
    Ann, App, BoolLit, CApp, CLam, CodeAll, CodeBool, CodeFin, CodeIn,
    CodeLater, CodeNat, CodePi, CodeSg, CodeUnit, FinLit, Fix, Force, Fst,
    Lam, NatLit, Next, Pair, Prev, Refl, Snd, Star, Succ, TAll, TBool, TEl,
    TFin, TId, TLater, TNat, TPi, TSg, TUniv, TUnit, Var,
)


def _clock_set(delta) -> str:
    return "{" + ",".join(delta) + "}"


def _bindings(subst) -> str:
    if not subst:
        return ""
    inner = ", ".join(f"{b.var} <- {print_term(b.term)}" for b in subst)
    return f"[{inner}] "


def print_type(ty, prec: int = 0) -> str:
    # prec levels: 0 top (arrows, binders), 1 product, 2 prefix, 3 atom
    if isinstance(ty, TNat):
        return "Nat"
    if isinstance(ty, TBool):
        return "Bool"
    if isinstance(ty, TUnit):
        return "Unit"
    if isinstance(ty, TFin):
        return f"Fin({ty.modulus})"
    if isinstance(ty, TUniv):
        return "U" + _clock_set(ty.delta)
    if isinstance(ty, TEl):
        return _wrap_type(f"El {print_term(ty.code, 4)}", 3, prec)
    if isinstance(ty, TPi):
        if ty.var == "_":
            s = f"{print_type(ty.dom, 1)} -> {print_type(ty.cod, 0)}"
        else:
            s = f"Pi {ty.var} : {print_type(ty.dom, 0)}. {print_type(ty.cod, 0)}"
        return _wrap_type(s, 0, prec)
    if isinstance(ty, TSg):
        if ty.var == "_":
            s = f"{print_type(ty.dom, 2)} * {print_type(ty.cod, 1)}"
            return _wrap_type(s, 1, prec)
        s = f"Sg {ty.var} : {print_type(ty.dom, 0)}. {print_type(ty.cod, 0)}"
        return _wrap_type(s, 0, prec)
    if isinstance(ty, TAll):
        s = f"All {ty.clock}. {print_type(ty.body, 0)}"
        return _wrap_type(s, 0, prec)
    if isinstance(ty, TLater):
        s = f"|>{ty.clock} {_bindings(ty.subst)}{print_type(ty.body, 2)}"
        return _wrap_type(s, 2, prec)
    if isinstance(ty, TId):
        s = (f"Id {print_type(ty.type, 3)} {print_term(ty.lhs, 4)} "
             f"{print_term(ty.rhs, 4)}")
        return _wrap_type(s, 2, prec)
    raise TypeError(f"print_type: unknown node {ty!r}")


def _wrap_type(s: str, level: int, prec: int) -> str:
    return f"({s})" if level < prec else s


def print_term(tm, prec: int = 0) -> str:
    # prec levels: 0 top (binders), 3 application, 4 atom
    if isinstance(tm, Var):
        return tm.name
    if isinstance(tm, NatLit):
        return str(tm.value)
    if isinstance(tm, BoolLit):
        return "true" if tm.value else "false"
    if isinstance(tm, Star):
        return "star"
    if isinstance(tm, Refl):
        return "refl"
    if isinstance(tm, FinLit):
        return f"fin({tm.index},{tm.modulus})"
    if isinstance(tm, Pair):
        return f"({print_term(tm.fst)}, {print_term(tm.snd)})"
    if isinstance(tm, Ann):
        return f"({print_term(tm.term)} : {print_type(tm.type)})"
    if isinstance(tm, Fst):
        return _wrap(f"fst {print_term(tm.pair, 4)}", 3, prec)
    if isinstance(tm, Snd):
        return _wrap(f"snd {print_term(tm.pair, 4)}", 3, prec)
    if isinstance(tm, Force):
        return _wrap(f"force {print_term(tm.arg, 4)}", 3, prec)
    if isinstance(tm, Succ):
        return _wrap(f"succ {print_term(tm.arg, 4)}", 3, prec)
    if isinstance(tm, Lam):
        return _wrap(f"\\{tm.var}. {print_term(tm.body)}", 0, prec)
    if isinstance(tm, CLam):
        return _wrap(f"/\\{tm.clock}. {print_term(tm.body)}", 0, prec)
    if isinstance(tm, Fix):
        return _wrap(f"fix {tm.clock} {tm.var}. {print_term(tm.body)}", 0, prec)
    if isinstance(tm, Prev):
        return _wrap(f"prev {tm.clock}. {print_term(tm.body)}", 0, prec)
    if isinstance(tm, Next):
        s = f"next {tm.clock} {_bindings(tm.subst)}{print_term(tm.body, 4)}"
        return _wrap(s, 3, prec)
    if isinstance(tm, App):
        return _wrap(f"{print_term(tm.fun, 3)} {print_term(tm.arg, 4)}", 3, prec)
    if isinstance(tm, CApp):
        return _wrap(f"{print_term(tm.fun, 3)} @{tm.clock}", 3, prec)
    if isinstance(tm, CodeSg) or isinstance(tm, CodePi):
        head = "Sg^" if isinstance(tm, CodeSg) else "Pi^"
        ann = _clock_set(tm.delta) if tm.delta is not None else ""
        s = (f"{head}{ann} {tm.var} : {print_term(tm.dom)}. "
             f"{print_term(tm.cod)}")
        return _wrap(s, 0, prec)
    if isinstance(tm, CodeAll):
        ann = _clock_set(tm.delta) if tm.delta is not None else ""
        return _wrap(f"All^{ann} {tm.clock}. {print_term(tm.body)}", 0, prec)
    if isinstance(tm, CodeLater):
        return _wrap(f"Later^ {tm.clock} {print_term(tm.body, 4)}", 3, prec)
    if isinstance(tm, CodeIn):
        s = (f"in{{{','.join(tm.small)} ; {','.join(tm.big)}}} "
             f"{print_term(tm.body, 4)}")
        return _wrap(s, 3, prec)
    if isinstance(tm, CodeNat):
        return "Nat^" + _clock_set(tm.delta)
    if isinstance(tm, CodeUnit):
        return "Unit^" + _clock_set(tm.delta)
    if isinstance(tm, CodeBool):
        return "Bool^" + _clock_set(tm.delta)
    if isinstance(tm, CodeFin):
        return f"Fin^{_clock_set(tm.delta)}({tm.modulus})"
    raise TypeError(f"print_term: unknown node {tm!r}")


def _wrap(s: str, level: int, prec: int) -> str:
    return f"({s})" if level < prec else s
