"""Schönfinkel's combinators and bracket abstraction.

Combinator terms are untyped, application-only terms over the constants
S, C, I, T, Z, U and variables.  The defining equations, applied as
rewrite rules left to right, are::

    I x     = x
    C x y   = x
    T f x y = f y x
    Z f g x = f (g x)
    S f g x = f x (g x)

U (incompatibility) has no rewrite rule; its logical reading is the
definition ``U`` of the connectives packs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import FuelExhausted, KernelError
from .kernel import App, Const, Lam, Term, Var, apply, parse_term, print_term, spine

COMBINATORS = ("S", "C", "I", "T", "Z", "U")
ARITY = {"I": 1, "C": 2, "T": 3, "Z": 3, "S": 3}
DEFAULT_FUEL = 10_000

S, C, I, T, Z, U = (Const(n) for n in COMBINATORS)


@dataclass(frozen=True)
class RewriteRule:
    name: str
    lhs: Term
    rhs: Term


def _rule(name, params, rhs):
    vs = {p: Var(p) for p in params}
    return RewriteRule(name, apply(Const(name), *vs.values()), rhs(*vs.values()))


RULES = (
    _rule("I", "x", lambda x: x),
    _rule("C", "xy", lambda x, y: x),
    _rule("T", "fxy", lambda f, x, y: apply(f, y, x)),
    _rule("Z", "fgx", lambda f, g, x: App(f, App(g, x))),
    _rule("S", "fgx", lambda f, g, x: apply(f, x, App(g, x))),
)


def _from_term(t):
    if isinstance(t, Var):
        return Const(t.name) if t.name in COMBINATORS else t
    if isinstance(t, Const):
        return Const(t.name)
    if isinstance(t, App):
        return App(_from_term(t.fun), _from_term(t.arg))
    raise KernelError("combinator terms contain no lambda abstraction")


def parse_comb(text: str) -> Term:
    """Parse a combinator term; S, C, I, T, Z, U are reserved identifiers."""
    return _from_term(parse_term(text))


def show_comb(t: Term) -> str:
    return print_term(t)


def _contract(name, args):
    if name == "I":
        return args[0]
    if name == "C":
        return args[0]
    if name == "T":
        return apply(args[0], args[2], args[1])
    if name == "Z":
        return App(args[0], App(args[1], args[2]))
    return apply(args[0], args[2], App(args[1], args[2]))


def step(t: Term):
    """One leftmost-outermost rewrite step, or None if ``t`` is normal."""
    head, args = spine(t)
    if isinstance(head, Const) and head.name in ARITY and len(args) >= ARITY[head.name]:
        n = ARITY[head.name]
        return apply(_contract(head.name, args[:n]), *args[n:])
    for k, a in enumerate(args):
        r = step(a)
        if r is not None:
            new = list(args)
            new[k] = r
            return apply(head, *new)
    return None


def combinator_reduce(t: Term, fuel: int = DEFAULT_FUEL) -> Term:
    """Normal form under leftmost-outermost rewriting; raises FuelExhausted."""
    for _ in range(fuel):
        r = step(t)
        if r is None:
            return t
        t = r
    if step(t) is None:
        return t
    raise FuelExhausted(f"combinator reduction exceeded {fuel} steps")


def occurs(x: str, t: Term) -> bool:
    if isinstance(t, Var):
        return t.name == x
    if isinstance(t, App):
        return occurs(x, t.fun) or occurs(x, t.arg)
    return False


def bracket_abstract(t: Term, x) -> Term:
    """``[x] t`` in the basis {S, C}: ``([x] t) x`` reduces to ``t``."""
    name = x.name if isinstance(x, Var) else x
    if isinstance(t, Lam):
        raise KernelError("bracket abstraction applies to combinator terms only")
    if isinstance(t, Var) and t.name == name:
        return apply(S, C, C)
    if not occurs(name, t):
        return App(C, t)
    return apply(S, bracket_abstract(t.fun, name), bracket_abstract(t.arg, name))


def compile_lambda(t: Term) -> Term:
    """Translate a (untyped) lambda term into an {S, C} combinator term."""
    if isinstance(t, Lam):
        return bracket_abstract(compile_lambda(t.body), t.bound)
    if isinstance(t, App):
        return App(compile_lambda(t.fun), compile_lambda(t.arg))
    if isinstance(t, Const):
        return Const(t.name)
    return Var(t.name)
