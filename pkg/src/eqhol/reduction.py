"""Beta/eta normalisation and unfolding of definitions."""

from __future__ import annotations

import sys
from typing import Iterable, Optional

from .errors import FuelExhausted, TheoryError, TypeCheckError, UnifyError
from .kernel import (App, Const, Lam, Term, TyVar, Var, alpha_equal, free_var_names, map_types,
                     subst_type, substitute, term_type_vars, type_vars)
from .typecheck import _letters, elaborate_many, unify

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

DEFAULT_FUEL = 1_000_000

BETA = "beta"
BETA_ETA = "beta-eta"


class _Budget:
    __slots__ = ("left",)

    def __init__(self, fuel):
        self.left = fuel

    def tick(self):
        self.left -= 1
        if self.left < 0:
            raise FuelExhausted("reduction fuel exhausted")


# ---------------------------------------------------------------------------
# Unfolding


def instantiate_definition(defn, ty):
    """Body of ``defn`` at the instance type ``ty`` (or schematic if ``ty`` is None)."""
    if ty is None:
        return defn.body
    apart = {v: TyVar("_u" + v) for v in defn.scheme.vars}
    general = subst_type(defn.scheme.body, apart)
    try:
        s = unify(general, ty, rigid=type_vars(ty))
    except UnifyError as exc:
        raise TypeCheckError(f"{defn.name} used at {ty}, not an instance of "
                             f"{defn.scheme}: {exc}") from None
    full = {v: s.get(apart[v].name, apart[v]) for v in defn.scheme.vars}
    return map_types(defn.body, lambda t: subst_type(t, full))


def unfold(t: Term, env, names: Optional[Iterable[str]] = None, keep: Iterable[str] = ()) -> Term:
    """Replace defined constants by their (type-instantiated) bodies.

    With ``names`` only those definitions are expanded; ``keep`` lists
    definitions that are never expanded.
    """
    defs = env.defs
    if names is None:
        select = set(defs)
    else:
        select = set(names)
        unknown = select - set(defs)
        if unknown:
            raise TheoryError(f"no definition named {', '.join(sorted(unknown))}")
    select -= set(keep)
    cache = {}

    def go(t):
        if isinstance(t, Const):
            if t.name not in select:
                return t
            key = (t.name, t.ty)
            if key not in cache:
                cache[key] = go(instantiate_definition(defs[t.name], t.ty))
            return cache[key]
        if isinstance(t, Var):
            return t
        if isinstance(t, Lam):
            body = go(t.body)
            return t if body is t.body else Lam(t.bound, t.ty, body)
        f = go(t.fun)
        a = go(t.arg)
        return t if (f is t.fun and a is t.arg) else App(f, a)

    return go(t)


# ---------------------------------------------------------------------------
# Normalisation


def _is_eta_redex(lam):
    body = lam.body
    return (isinstance(body, App) and isinstance(body.arg, Var) and body.arg.name == lam.bound
            and lam.bound not in free_var_names(body.fun))


def _nf(t, eta, budget):
    if isinstance(t, (Var, Const)):
        return t
    if isinstance(t, Lam):
        lam = Lam(t.bound, t.ty, _nf(t.body, eta, budget))
        if eta and _is_eta_redex(lam):
            return lam.body.fun
        return lam
    f = _nf(t.fun, eta, budget)
    a = _nf(t.arg, eta, budget)
    if isinstance(f, Lam):
        budget.tick()
        return _nf(substitute(f.body, f.bound, a), eta, budget)
    return App(f, a)


def normalize(t: Term, env=None, mode: str = BETA_ETA, fuel: int = DEFAULT_FUEL) -> Term:
    """Beta (or beta-eta) normal form of ``t``; definitions of ``env`` are unfolded first."""
    if mode not in (BETA, BETA_ETA):
        raise ValueError(f"unknown mode {mode!r}")
    if env is not None:
        t = unfold(t, env)
    try:
        return _nf(t, mode == BETA_ETA, _Budget(fuel))
    except RecursionError:
        raise FuelExhausted("reduction too deep (term is probably not normalising)") from None


def canonical_type_vars(t: Term) -> Term:
    """Rename schematic type variables in order of first occurrence."""
    vs = term_type_vars(t)
    ren = {v: TyVar(n) for v, n in zip(vs, _letters())}
    return map_types(t, lambda ty: subst_type(ty, ren))


def betaeta_equal(t: Term, u: Term, env=None, mode: str = BETA_ETA) -> bool:
    """True iff ``t`` and ``u`` have alpha-equal normal forms.

    When ``env`` is given both terms are elaborated in a shared context and
    must have a common type.
    """
    if env is not None:
        (t, u), _, _ = elaborate_many([t, u], env, same_type=True)
    nt = canonical_type_vars(normalize(t, env, mode))
    nu = canonical_type_vars(normalize(u, env, mode))
    return alpha_equal(nt, nu)


# ---------------------------------------------------------------------------
# Small-step strategies (used to cross-check ``normalize``)


def _step_leftmost_outermost(t):
    if isinstance(t, App):
        if isinstance(t.fun, Lam):
            return substitute(t.fun.body, t.fun.bound, t.arg)
        r = _step_leftmost_outermost(t.fun)
        if r is not None:
            return App(r, t.arg)
        r = _step_leftmost_outermost(t.arg)
        if r is not None:
            return App(t.fun, r)
        return None
    if isinstance(t, Lam):
        r = _step_leftmost_outermost(t.body)
        return None if r is None else Lam(t.bound, t.ty, r)
    return None


def _step_rightmost_innermost(t):
    if isinstance(t, App):
        r = _step_rightmost_innermost(t.arg)
        if r is not None:
            return App(t.fun, r)
        r = _step_rightmost_innermost(t.fun)
        if r is not None:
            return App(r, t.arg)
        if isinstance(t.fun, Lam):
            return substitute(t.fun.body, t.fun.bound, t.arg)
        return None
    if isinstance(t, Lam):
        r = _step_rightmost_innermost(t.body)
        return None if r is None else Lam(t.bound, t.ty, r)
    return None


STRATEGIES = {
    "leftmost-outermost": _step_leftmost_outermost,
    "rightmost-innermost": _step_rightmost_innermost,
}


def reduce_with(t: Term, strategy: str, fuel: int = 100_000) -> Term:
    """Beta normal form reached by repeatedly contracting the redex chosen by ``strategy``."""
    step = STRATEGIES[strategy]
    for _ in range(fuel):
        r = step(t)
        if r is None:
            return t
        t = r
    raise FuelExhausted(f"{strategy} reduction did not terminate within {fuel} steps")


def eta_normal(t: Term) -> Term:
    """Contract every eta-redex (bottom-up)."""
    if isinstance(t, Lam):
        lam = Lam(t.bound, t.ty, eta_normal(t.body))
        return lam.body.fun if _is_eta_redex(lam) else lam
    if isinstance(t, App):
        return App(eta_normal(t.fun), eta_normal(t.arg))
    return t


def has_eta_redex(t: Term) -> bool:
    if isinstance(t, Lam):
        return _is_eta_redex(t) or has_eta_redex(t.body)
    if isinstance(t, App):
        return has_eta_redex(t.fun) or has_eta_redex(t.arg)
    return False


def has_beta_redex(t: Term) -> bool:
    if isinstance(t, Lam):
        return has_beta_redex(t.body)
    if isinstance(t, App):
        return isinstance(t.fun, Lam) or has_beta_redex(t.fun) or has_beta_redex(t.arg)
    return False
