"""Type inference for the simply typed lambda calculus with schematic constants.

Polymorphism enters only through constant schemes: every occurrence of a
constant gets a fresh instance of its scheme.  Type annotations written on
binders or occurrences take part in unification like any other constraint;
schematic variables named in them are ordinary unification variables unless
declared rigid (as happens when checking a definition against a declared
type).
"""

from __future__ import annotations

from typing import Iterable, Mapping, Optional

from .errors import TypeCheckError, UnifyError
from .kernel import (BOOL, App, Arrow, Const, Lam, Signature, Term, TyConst, TypeScheme,
                     TyVar, Var, format_type, map_types, print_term, subst_type,
                     term_type_vars, type_vars)

__all__ = ["TypeScheme", "unify", "apply_subst", "compose", "infer_type", "elaborate",
           "elaborate_many", "instantiate", "normalize_type_vars", "is_instance",
           "check_distinct_instantiation_demo"]

TypeSubst = dict


def apply_subst(s: Mapping, ty):
    """Apply a (possibly triangular) substitution until no bound variable remains."""
    if isinstance(ty, TyVar):
        if ty.name in s:
            res = apply_subst(s, s[ty.name])
            return res
        return ty
    if isinstance(ty, Arrow):
        return Arrow(apply_subst(s, ty.dom), apply_subst(s, ty.cod))
    return ty


def _occurs(name, ty, s):
    ty = apply_subst(s, ty)
    return name in type_vars(ty)


def _bind(name, ty, s, rigid):
    if isinstance(ty, TyVar) and ty.name == name:
        return
    if name in rigid:
        if isinstance(ty, TyVar) and ty.name not in rigid:
            _bind(ty.name, TyVar(name), s, rigid)
            return
        raise UnifyError(f"cannot instantiate rigid type variable '{name} with {format_type(ty)}")
    if _occurs(name, ty, s):
        raise UnifyError(f"occurs check: '{name} occurs in {format_type(apply_subst(s, ty))}")
    s[name] = ty


def _unify_into(a, b, s, rigid=frozenset()):
    a = apply_subst(s, a)
    b = apply_subst(s, b)
    if a == b:
        return
    if isinstance(a, TyVar) and a.name not in rigid:
        _bind(a.name, b, s, rigid)
    elif isinstance(b, TyVar) and b.name not in rigid:
        _bind(b.name, a, s, rigid)
    elif isinstance(a, TyVar):
        _bind(a.name, b, s, rigid)
    elif isinstance(b, TyVar):
        _bind(b.name, a, s, rigid)
    elif isinstance(a, Arrow) and isinstance(b, Arrow):
        _unify_into(a.dom, b.dom, s, rigid)
        _unify_into(a.cod, b.cod, s, rigid)
    else:
        raise UnifyError(f"cannot unify {format_type(a)} with {format_type(b)}")


def compose(s: Mapping) -> dict:
    """Resolve a triangular substitution into an idempotent one."""
    return {k: apply_subst(s, v) for k, v in s.items()}


def unify(a, b, rigid: Iterable[str] = ()) -> dict:
    """Most general unifier of ``a`` and ``b`` as an idempotent substitution."""
    s = {}
    _unify_into(a, b, s, frozenset(rigid))
    return compose(s)


def instantiate(scheme: TypeScheme, fresh) -> object:
    return subst_type(scheme.body, {v: fresh() for v in scheme.vars})


def is_instance(general, specific) -> bool:
    """True iff ``specific`` is a substitution instance of ``general``."""
    apart = {v: TyVar("_g" + v) for v in type_vars(general)}
    try:
        unify(subst_type(general, apart), specific, rigid=type_vars(specific))
    except UnifyError:
        return False
    return True


def normalize_type_vars(ty, names=None):
    """Rename schematic variables to 'a, 'b, ... in order of first occurrence."""
    vs = type_vars(ty)
    if names is None:
        names = _letters()
    ren = {v: TyVar(n) for v, n in zip(vs, names)}
    return subst_type(ty, ren)


def _letters():
    i = 0
    while True:
        q, r = divmod(i, 26)
        yield chr(ord("a") + r) + (str(q) if q else "")
        i += 1


def _lookup_sig(sig):
    return getattr(sig, "signature", sig)


class _Inference:
    def __init__(self, sig: Signature, rigid=frozenset(), avoid=()):
        self.sig = sig
        self.s = {}
        self.rigid = frozenset(rigid)
        self.counter = 0
        self.avoid = set(avoid) | set(rigid)
        self.free = {}

    def fresh(self):
        while True:
            name = f"t{self.counter}"
            self.counter += 1
            if name not in self.avoid:
                return TyVar(name)

    def unify(self, a, b, where):
        try:
            _unify_into(a, b, self.s, self.rigid)
        except UnifyError as exc:
            raise TypeCheckError(f"type error in `{print_term(where)}`: {exc}") from None

    def walk(self, t, bound):
        if isinstance(t, Var):
            if t.name in bound:
                ty = bound[t.name]
            else:
                ty = self.free.get(t.name)
                if ty is None:
                    ty = self.fresh()
                    self.free[t.name] = ty
            if t.ty is not None:
                self.unify(ty, t.ty, t)
            return Var(t.name, ty), ty
        if isinstance(t, Const):
            scheme = self.sig.scheme(t.name)
            if scheme is None:
                raise TypeCheckError(f"unknown constant {t.name}")
            ty = instantiate(scheme, self.fresh)
            if t.ty is not None:
                self.unify(ty, t.ty, t)
            return Const(t.name, ty), ty
        if isinstance(t, Lam):
            dom = t.ty if t.ty is not None else self.fresh()
            inner = dict(bound)
            inner[t.bound] = dom
            body, cod = self.walk(t.body, inner)
            return Lam(t.bound, dom, body), Arrow(dom, cod)
        fun, fty = self.walk(t.fun, bound)
        arg, aty = self.walk(t.arg, bound)
        res = self.fresh()
        self.unify(fty, Arrow(aty, res), t)
        return App(fun, arg), res

    def resolve(self, t):
        s = compose(self.s)
        return map_types(t, lambda ty: apply_subst(s, ty))

    def resolve_type(self, ty):
        return apply_subst(self.s, ty)


def elaborate_many(terms, sig, expected=None, rigid=(), same_type=False):
    """Jointly elaborate ``terms`` sharing one free-variable context.

    Returns the annotated terms and their types.  With ``same_type`` all terms
    are forced to a common type.
    """
    sig = _lookup_sig(sig)
    avoid = set()
    for t in terms:
        avoid.update(term_type_vars(t))
    inf = _Inference(sig, rigid, avoid)
    out = []
    for t in terms:
        out.append(inf.walk(t, {}))
    if expected is not None:
        for t, (_, ty) in zip(terms, out):
            inf.unify(ty, expected, t)
    if same_type and out:
        for t, (_, ty) in zip(terms[1:], out[1:]):
            inf.unify(out[0][1], ty, t)
    free = {n: inf.resolve_type(ty) for n, ty in inf.free.items()}
    return [inf.resolve(e) for e, _ in out], [inf.resolve_type(ty) for _, ty in out], free


def elaborate(t: Term, sig, expected=None, rigid=()):
    """Annotate every variable and constant occurrence of ``t`` with its type."""
    terms, types, _ = elaborate_many([t], sig, expected, rigid)
    return terms[0], types[0]


def infer_type(sig, t: Term):
    """Principal type of ``t`` (free variables are monomorphic)."""
    return elaborate(t, sig)[1]


def default_type_vars(t: Term, keep, default=BOOL) -> Term:
    """Instantiate schematic variables of ``t`` that are not in ``keep``."""
    extra = [v for v in term_type_vars(t) if v not in set(keep)]
    if not extra:
        return t
    s = {v: default for v in extra}
    return map_types(t, lambda ty: subst_type(ty, s))


# ---------------------------------------------------------------------------
# Church-encoding typing demonstration


def _occurrence_types(t, names, acc):
    if isinstance(t, Const):
        if t.name in names:
            acc.setdefault(t.name, []).append(t.ty)
    elif isinstance(t, Lam):
        _occurrence_types(t.body, names, acc)
    elif isinstance(t, App):
        _occurrence_types(t.fun, names, acc)
        _occurrence_types(t.arg, names, acc)
    return acc


def check_distinct_instantiation_demo(env=None) -> dict:
    """Show that the Church booleans receive incompatible types in De Morgan's law.

    Elaborates ``cnot (cand ctrue cfalse)`` and ``cor (cnot ctrue) (cnot cfalse)``
    at a common type and reports the (normalised) type assigned to each
    occurrence of ``ctrue`` and ``cfalse``.
    """
    from .theory import church_env

    env = env or church_env()
    principal = {name: format_type(normalize_type_vars(env.signature.scheme(name).body))
                 for name in ("ctrue", "cfalse", "cand", "cor", "cnot")}
    lhs = env.parse("cnot (cand ctrue cfalse)")
    rhs = env.parse("cor (cnot ctrue) (cnot cfalse)")
    (lhs, rhs), types, _ = elaborate_many([lhs, rhs], env, same_type=True)
    occ = {}
    _occurrence_types(lhs, {"ctrue", "cfalse"}, occ)
    _occurrence_types(rhs, {"ctrue", "cfalse"}, occ)
    distinct = {name: sorted({format_type(normalize_type_vars(ty)) for ty in tys})
                for name, tys in occ.items()}
    return {
        "principal": principal,
        "instance_type": format_type(normalize_type_vars(types[0])),
        "occurrences": {k: [format_type(normalize_type_vars(t)) for t in v] for k, v in occ.items()},
        "distinct": distinct,
        "and_or_same_type": principal["cand"] == principal["cor"],
    }
