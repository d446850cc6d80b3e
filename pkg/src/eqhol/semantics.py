"""Finite standard models: denotation, validity checking and countermodels.

Elements are canonical integers.  A truth value is 0 or 1 (or an algebra
element, see ``bvalued``), an element of a base type of size n is one of
``range(n)``, and a function ``f`` from a domain of size N into a codomain
of size B is the mixed-radix number whose digit k (base B) is ``f(k)``.
Applying ``f`` to ``x`` is therefore ``f // B**x % B``, and the domain of a
function type is just ``range(B**N)`` in lexicographic (little-endian)
order.  A relation ``R : w -> w -> o`` on n worlds has bit ``x*n + y`` set
iff ``R x y``.

Terms are compiled once into Python closures over a flat environment list
(model parameters first, then one slot per λ-binding depth) and then run
for every model and valuation.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .errors import CapExceeded, TheoryError
from .kernel import (BOOL, EQ, App, Arrow, Const, Lam, Term, TyConst, TyVar, Var, format_type,
                     free_vars, print_term, spine, split_arrows, term_type_vars, type_consts)

DEFAULT_CAP = 10 ** 6
DEFAULT_SIZES = (1, 2)


@dataclass(frozen=True)
class Frame:
    base_sizes: Mapping

    def __post_init__(self):
        for b, n in self.base_sizes.items():
            if b == "o":
                raise TheoryError("the size of o is fixed")
            if not isinstance(n, int) or n < 1:
                raise TheoryError(f"base type {b} needs a positive size, got {n!r}")

    def size_of(self, base):
        try:
            return self.base_sizes[base]
        except KeyError:
            raise TheoryError(f"no size given for base type {base}") from None


@dataclass
class Model:
    frame: Frame
    const_interp: dict = field(default_factory=dict)   # (name, type) -> element
    iota_default: dict = field(default_factory=dict)   # base type -> element


# ---------------------------------------------------------------------------
# Domains and primitive operations


class Semantics:
    """Domain sizes and primitive operations for one frame.

    ``alg`` (optional) replaces the two-element truth domain by a finite
    Boolean algebra; ``q`` then maps base types to their equality-degree
    tables.
    """

    def __init__(self, frame: Frame, cap: int = DEFAULT_CAP, alg=None, q: Optional[dict] = None):
        self.frame = frame
        self.cap = cap
        self.alg = alg
        self.q = q or {}
        self.truth = 2 if alg is None else alg.size
        self.top = 1 if alg is None else alg.top
        self._sizes = {}
        self._eqs = {}

    def size(self, ty) -> int:
        s = self._sizes.get(ty)
        if s is None:
            if isinstance(ty, TyConst):
                s = self.truth if ty.name == "o" else self.frame.size_of(ty.name)
            elif isinstance(ty, Arrow):
                s = self.size(ty.cod) ** self.size(ty.dom)
            else:
                raise TheoryError(f"cannot interpret schematic type {format_type(ty)}")
            self._sizes[ty] = s
        return s

    def size_at_most(self, ty, limit) -> int:
        """``min(size(ty), limit + 1)``, without building huge numbers."""
        if not isinstance(ty, Arrow):
            return min(self.size(ty), limit + 1)
        b = self.size_at_most(ty.cod, limit)
        if b <= 1:
            return b
        n = self.size_at_most(ty.dom, limit.bit_length())
        if n > limit.bit_length():
            return limit + 1
        return min(b ** n, limit + 1)

    def domain(self, ty) -> int:
        """Size of the domain of ``ty``, which is about to be enumerated."""
        if isinstance(ty, Arrow):
            # avoid computing astronomically large sizes just to reject them
            b, n = self.size(ty.cod), self.domain(ty.dom)
            if b > 1 and n * b.bit_length() > 4 * self.cap.bit_length() + 64:
                raise CapExceeded(format_type(ty), f"{b}^{n}", self.cap)
        s = self.size(ty)
        if s > self.cap:
            raise CapExceeded(format_type(ty), s, self.cap)
        return s

    def applier(self, cod_size):
        if cod_size & (cod_size - 1) == 0:
            bits = cod_size.bit_length() - 1
            mask = cod_size - 1
            if bits == 1:
                return lambda f, x: (f >> x) & 1
            return lambda f, x: (f >> (bits * x)) & mask
        return lambda f, x: f // cod_size ** x % cod_size

    def apply(self, f, x, fty):
        return self.applier(self.size(fty.cod))(f, x)

    def eq(self, ty):
        """Function computing the truth value of ``a = b`` at type ``ty``."""
        fn = self._eqs.get(ty)
        if fn is not None:
            return fn
        if self.alg is None:
            fn = _crisp_eq
        elif ty == BOOL:
            fn = self.alg.iff
        elif isinstance(ty, TyConst):
            table = self.q.get(ty.name)
            if table is None:
                top = self.top
                fn = lambda a, b: top if a == b else 0
            else:
                fn = lambda a, b, t=table: t[a][b]
        else:
            n = self.domain(ty.dom)
            app = self.applier(self.size(ty.cod))
            inner = self.eq(ty.cod)
            top = self.top

            def fn(f, g):
                acc = top
                for x in range(n):
                    acc &= inner(app(f, x), app(g, x))
                    if not acc:
                        break
                return acc
        self._eqs[ty] = fn
        return fn

    def tabulate(self, ty, fn, arity):
        """Element of ``ty`` whose value on ``x1..xk`` (k = arity) is ``fn(x1, ..., xk)``."""
        def build(t, args):
            if len(args) == arity:
                return fn(*args)
            n = self.domain(t.dom)
            b = self.size(t.cod)
            v = 0
            for x in range(n - 1, -1, -1):
                v = v * b + build(t.cod, args + (x,))
            return v
        return build(ty, ())


def _crisp_eq(a, b):
    return 1 if a == b else 0


# ---------------------------------------------------------------------------
# Compilation


class _Code:
    __slots__ = ("run", "fv", "ty", "value")

    def __init__(self, run, fv, ty, value=None):
        self.run = run
        self.fv = fv
        self.ty = ty
        self.value = value


def _constant(v, ty):
    return _Code(lambda env, v=v: v, frozenset(), ty, v)


class Layout:
    """Assignment of model parameters (constants, free variables, iota defaults) to slots."""

    def __init__(self):
        self.keys = []
        self.index = {}

    def slot(self, key):
        """Environment index of ``key``; parameters live at negative indices."""
        i = self.index.get(key)
        if i is None:
            i = self.index[key] = len(self.keys)
            self.keys.append(key)
        return -(i + 1)

    @staticmethod
    def slot_of(k):
        return -(k + 1)

    def __len__(self):
        return len(self.keys)


class Compiler:
    def __init__(self, sem: Semantics, layout: Layout, iota: Mapping = None):
        self.sem = sem
        self.layout = layout
        self.iota = dict(iota or {})
        self.max_depth = 0
        self._fresh = 0
        self._closed = {}

    # binding depth d uses index d; parameter k uses index -(k + 1)
    def new_env(self, params=()):
        env = [0] * (self.max_depth + 1 + len(self.layout))
        for k, v in enumerate(params):
            env[-(k + 1)] = v
        return env

    def compile(self, t: Term) -> _Code:
        return self._c(t, {}, 0)

    def _slot(self, depth):
        self.max_depth = max(self.max_depth, depth + 1)
        return depth

    def _finish(self, run, fv, ty):
        if not fv:
            return _constant(run(self.new_env()), ty)
        return _Code(run, frozenset(fv), ty)

    def _c(self, t, scope, depth):
        sem = self.sem
        if isinstance(t, Var):
            if t.name in scope:
                i = scope[t.name]
            else:
                if t.ty is None:
                    raise TheoryError(f"variable {t.name} has no type (elaborate first)")
                i = self.layout.slot(("var", t.name, t.ty))
            return _Code(lambda env, i=i: env[i], frozenset((i,)), t.ty)
        if isinstance(t, Const):
            return self._const(t)
        if isinstance(t, Lam):
            return self._lam(t, scope, depth)
        head, args = spine(t)
        if isinstance(head, Lam):
            if self._tabulable(head):
                return self._apply_rest(self._c(head, {}, depth), args, scope, depth)
            return self._let(head, args, scope, depth)
        if isinstance(head, Const) and head.name == EQ and len(args) == 2:
            dom = head.ty.dom
            return self._eq(dom, args[0], scope, args[1], scope, depth)
        if isinstance(head, Const) and head.name in self.iota and len(args) >= 1:
            code = self._iota_app(head, args[0], scope, depth)
            return self._apply_rest(code, args[1:], scope, depth)
        return self._apply_rest(self._c(head, scope, depth), args, scope, depth)

    def _tabulable(self, lam):
        """Closed abstractions with small argument spaces become lookup tables."""
        key = id(lam)
        hit = self._closed.get(key)
        if hit is None:
            hit = self._closed[key] = (lam, _is_closed(lam, self.iota))
        if not hit[1]:
            return False
        work, t = 1, lam
        while isinstance(t, Lam):
            work *= self.sem.size_at_most(t.ty, TABULATE_LIMIT)
            if work > TABULATE_LIMIT:
                return False
            t = t.body
        return True

    def _const(self, t):
        if t.ty is None or term_type_vars(t):
            raise TheoryError(f"constant {t.name} needs a concrete type instance")
        sem = self.sem
        if t.name == EQ:
            e = sem.eq(t.ty.dom)
            return _constant(sem.tabulate(t.ty, e, 2), t.ty)
        if t.name in self.iota:
            if sem.alg is not None:
                raise TheoryError("description operators are not interpreted in algebra-valued models")
            base = self.iota[t.name]
            d = self.layout.slot(("iota", base))

            def run(env):
                default = env[d]
                return sem.tabulate(t.ty, lambda s: _pick(s, default), 1)
            return _Code(run, frozenset((d,)), t.ty)
        i = self.layout.slot(("const", t.name, t.ty))
        return _Code(lambda env, i=i: env[i], frozenset((i,)), t.ty)

    def _iota_app(self, head, arg, scope, depth):
        if self.sem.alg is not None:
            raise TheoryError("description operators are not interpreted in algebra-valued models")
        d = self.layout.slot(("iota", self.iota[head.name]))
        ac = self._c(arg, scope, depth)
        run_a = ac.run

        def run(env):
            return _pick(run_a(env), env[d])
        return self._finish(run, ac.fv | {d}, head.ty.cod)

    def _lam(self, t, scope, depth):
        sem = self.sem
        n = sem.domain(t.ty)
        s = self._slot(depth)
        inner = dict(scope)
        inner[t.bound] = s
        body = self._c(t.body, inner, depth + 1)
        ty = Arrow(t.ty, body.ty)
        b = sem.size(body.ty)
        if not body.fv:
            v = body.value
            # the constant function: digit v repeated n times
            return _constant(v * ((b ** n - 1) // (b - 1)) if b > 1 else 0, ty)
        run_body = body.run
        fv = body.fv - {s}
        if b & (b - 1) == 0:
            bits = b.bit_length() - 1

            def run(env):
                v = 0
                for k in range(n - 1, -1, -1):
                    env[s] = k
                    v = (v << bits) | run_body(env)
                return v
        else:
            def run(env):
                v = 0
                for k in range(n - 1, -1, -1):
                    env[s] = k
                    v = v * b + run_body(env)
                return v
        return self._finish(run, fv, ty)

    def _let(self, head, args, scope, depth):
        codes = [self._c(a, scope, depth) for a in args]
        inner = dict(scope)
        slots = []
        body = head
        d = depth
        used = 0
        while isinstance(body, Lam) and used < len(codes):
            s = self._slot(d)
            inner[body.bound] = s
            slots.append(s)
            body = body.body
            d += 1
            used += 1
        bc = self._c(body, inner, d)
        rest = codes[used:]
        runs = [c.run for c in codes[:used]]
        run_body = bc.run
        fv = set(bc.fv) - set(slots)
        for c in codes[:used]:
            fv |= c.fv
        pairs = list(zip(slots, runs))
        if len(pairs) == 1:
            (s0, r0), = pairs

            def run(env):
                env[s0] = r0(env)
                return run_body(env)
        else:
            def run(env):
                vals = [r(env) for _, r in pairs]
                for (s, _), v in zip(pairs, vals):
                    env[s] = v
                return run_body(env)
        code = self._finish(run, fv, bc.ty)
        return self._apply_codes(code, rest)

    def _apply_rest(self, code, args, scope, depth):
        return self._apply_codes(code, [self._c(a, scope, depth) for a in args])

    def _apply_codes(self, code, arg_codes):
        sem = self.sem
        for ac in arg_codes:
            fty = code.ty
            if not isinstance(fty, Arrow):
                raise TheoryError(f"applying a non-function of type {format_type(fty)}")
            app = sem.applier(sem.size(fty.cod))
            rf, ra = code.run, ac.run
            code = self._finish(lambda env, rf=rf, ra=ra, app=app: app(rf(env), ra(env)),
                                code.fv | ac.fv, fty.cod)
        return code

    def _eq(self, ty, a, sa, b, sb, depth):
        """Code for ``a = b`` at ``ty``; function types are compared pointwise."""
        sem = self.sem
        if isinstance(ty, Arrow) and (isinstance(a, Lam) or isinstance(b, Lam)):
            hoisted = []
            d = depth
            sides = []
            for t, sc in ((a, sa), (b, sb)):
                if isinstance(t, Lam):
                    sides.append((t, sc))
                else:
                    c = self._c(t, sc, depth)
                    h = self._slot(d)
                    d += 1
                    hoisted.append((h, c))
                    sides.append((None, h))
            n = sem.domain(ty.dom)
            x = self._slot(d)
            d += 1
            xname = self._name()
            new_sides = []
            for lam, sc in sides:
                if lam is not None:
                    inner = dict(sc)
                    inner[lam.bound] = x
                    new_sides.append((lam.body, inner))
                else:
                    hname = self._name()
                    new_sides.append((App(Var(hname, ty), Var(xname, ty.dom)),
                                      {hname: sc, xname: x}))
            (ta, ia), (tb, ib) = new_sides
            inner = self._eq(ty.cod, ta, ia, tb, ib, d)
            run_inner = inner.run
            fv = set(inner.fv) - {x} - {h for h, _ in hoisted}
            for _, c in hoisted:
                fv |= c.fv
            pre = [(h, c.run) for h, c in hoisted]
            if sem.alg is None:
                def run(env):
                    for h, r in pre:
                        env[h] = r(env)
                    for k in range(n):
                        env[x] = k
                        if not run_inner(env):
                            return 0
                    return 1
            else:
                top = sem.top

                def run(env):
                    for h, r in pre:
                        env[h] = r(env)
                    acc = top
                    for k in range(n):
                        env[x] = k
                        acc &= run_inner(env)
                        if not acc:
                            break
                    return acc
            return self._finish(run, fv, BOOL)
        ca, cb = self._c(a, sa, depth), self._c(b, sb, depth)
        e = sem.eq(ty)
        ra, rb = ca.run, cb.run
        return self._finish(lambda env: e(ra(env), rb(env)), ca.fv | cb.fv, BOOL)

    def _name(self):
        self._fresh += 1
        return f"\0{self._fresh}"


TABULATE_LIMIT = 1 << 12


def _is_closed(t, iota):
    """No free variables and no constants other than Q (so the denotation is model-independent)."""
    def go(t, bound):
        if isinstance(t, Var):
            return t.name in bound
        if isinstance(t, Const):
            return t.name == EQ
        if isinstance(t, Lam):
            return go(t.body, bound | {t.bound})
        return go(t.fun, bound) and go(t.arg, bound)
    return go(t, frozenset())


def _pick(s, default):
    """Least member of the set ``s`` (a bitmask), else ``default``."""
    if s:
        return (s & -s).bit_length() - 1
    return default


# ---------------------------------------------------------------------------
# Preparing formulas


def _prepare(t, env):
    from .reduction import unfold

    if isinstance(t, str):
        if env is None:
            raise TheoryError("a theory environment is needed to parse terms")
        t = env.term(t)
    if env is not None:
        t = unfold(t, env)
    return t


def _iota_map(env):
    return dict(env.iota) if env is not None else {}


def denote(t, model: Model, valuation: Optional[Mapping] = None, env=None, cap=DEFAULT_CAP,
           sem: Optional[Semantics] = None):
    """Denotation of ``t`` in ``model`` under ``valuation`` (name -> element)."""
    t = _prepare(t, env)
    if term_type_vars(t):
        raise TheoryError("instantiate schematic type variables before evaluating")
    sem = sem or Semantics(model.frame, cap)
    layout = Layout()
    comp = Compiler(sem, layout, _iota_map(env))
    code = comp.compile(t)
    valuation = dict(valuation or {})
    params = []
    for key in layout.keys:
        if key[0] == "var":
            if key[1] not in valuation:
                raise TheoryError(f"no value for free variable {key[1]}")
            params.append(valuation[key[1]])
        elif key[0] == "const":
            v = model.const_interp.get((key[1], key[2]), model.const_interp.get(key[1]))
            if v is None:
                raise TheoryError(f"no interpretation for constant {key[1]}")
            params.append(v)
        else:
            params.append(model.iota_default.get(key[1], 0))
    envl = comp.new_env(params)
    return code.run(envl)


def enumerate_domain(ty, frame: Frame, cap: int = DEFAULT_CAP):
    """All elements of the domain of ``ty`` (canonical order)."""
    return list(range(Semantics(frame, cap).domain(ty)))


def decode(value, ty, sem: Semantics):
    """Structured view of an element: bool, ``(base, index)`` or a dict table."""
    if ty == BOOL and sem.alg is None:
        return bool(value)
    if isinstance(ty, TyConst):
        return value if ty == BOOL else (ty.name, value)
    return {x: decode(sem.apply(value, x, ty), ty.cod, sem) for x in range(sem.domain(ty.dom))}


def function_table(value, ty, sem: Semantics) -> dict:
    """Graph of a function element: argument element -> result element."""
    n = sem.domain(ty.dom)
    app = sem.applier(sem.size(ty.cod))
    return {x: app(value, x) for x in range(n)}


def truth(v) -> bool:
    return v == 1


# ---------------------------------------------------------------------------
# Rendering elements


def render(value, ty, sem: Semantics) -> str:
    if ty == BOOL:
        if sem.alg is None:
            return "T" if value else "F"
        return sem.alg.show(value)
    if isinstance(ty, TyConst):
        return f"e{value}"
    args, res = split_arrows(ty)
    entries = []
    doms = [range(sem.domain(a)) for a in args]
    for combo in itertools.product(*doms):
        v, t = value, ty
        for x in combo:
            v = sem.apply(v, x, t)
            t = t.cod
        key = ",".join(render(x, a, sem) for x, a in zip(combo, args))
        if len(combo) > 1:
            key = f"({key})"
        entries.append(f"{key}->{render(v, res, sem)}")
    return "{ " + ", ".join(entries) + " }"


def _json_value(value, ty, sem):
    if ty == BOOL:
        return bool(value) if sem.alg is None else value
    if isinstance(ty, TyConst):
        return f"e{value}"
    return {render(x, ty.dom, sem): _json_value(sem.apply(value, x, ty), ty.cod, sem)
            for x in range(sem.domain(ty.dom))}


@dataclass
class Countermodel:
    sizes: dict
    constants: list           # (name, type, element)
    iota_defaults: dict       # base -> element
    valuation: list           # (name, type, element)
    sem: Semantics = field(repr=False, compare=False, default=None)

    def format(self) -> str:
        lines = []
        for b in sorted(self.sizes):
            elems = ",".join(f"e{k}" for k in range(self.sizes[b]))
            lines.append(f"base {b} = {{{elems}}}")
        for b in sorted(self.iota_defaults):
            lines.append(f"iota default {b} = e{self.iota_defaults[b]}")
        for name, ty, v in self.constants:
            lines.append(f"const {name} = {render(v, ty, self.sem)}")
        for name, ty, v in self.valuation:
            lines.append(f"var {name} = {render(v, ty, self.sem)}")
        return "\n".join(lines) or "(closed goal: nothing to assign)"

    def to_dict(self) -> dict:
        return {
            "sizes": dict(sorted(self.sizes.items())),
            "iota_defaults": {b: f"e{v}" for b, v in sorted(self.iota_defaults.items())},
            "constants": {f"{n} : {format_type(t)}": _json_value(v, t, self.sem)
                          for n, t, v in self.constants},
            "valuation": {f"{n} : {format_type(t)}": _json_value(v, t, self.sem)
                          for n, t, v in self.valuation},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    def __str__(self):
        return self.format()


@dataclass
class Verdict:
    valid: bool
    countermodel: Optional[Countermodel] = None
    models: int = 0            # models (satisfying the axioms) examined
    assignments: tuple = ()

    def __bool__(self):
        return self.valid


# ---------------------------------------------------------------------------
# Validity


def size_assignments(spec, needed: Iterable[str]) -> list:
    """Normalise a size specification to an ordered list of {base: n} dicts.

    ``spec`` may be a list of dicts, or a dict mapping each base type to an
    int or an iterable of ints (all combinations are taken).  Missing base
    types range over ``DEFAULT_SIZES``.
    """
    needed = sorted(set(needed))
    if spec is None:
        spec = {}
    if isinstance(spec, (list, tuple)):
        out = []
        for d in spec:
            missing = [b for b in needed if b not in d]
            if missing:
                raise TheoryError(f"no size for base type(s) {', '.join(missing)}")
            out.append({b: d[b] for b in needed})
        return out
    choices = []
    for b in needed:
        v = spec.get(b, DEFAULT_SIZES)
        choices.append([v] if isinstance(v, int) else sorted(v))
    return [dict(zip(needed, combo)) for combo in itertools.product(*choices)]


def _free_list(t):
    return sorted({(v.name, v.ty) for v in free_vars(t)}, key=lambda p: (p[0], format_type(p[1])))


class _Problem:
    """Goal and axioms compiled for one size assignment."""

    def __init__(self, goal, axioms, sizes, env, cap, alg=None, q=None):
        self.sem = Semantics(Frame(sizes), cap, alg, q)
        self.layout = Layout()
        comp = Compiler(self.sem, self.layout, _iota_map(env))
        self.comp = comp
        self.axioms = []
        for name, ax in axioms:
            code = comp.compile(ax)
            self.axioms.append((name, code, [comp.layout.slot(("var", n, ty))
                                             for n, ty in _free_list(ax)]))
        self.goal = comp.compile(goal)
        self.goal_vars = [(n, ty, self.layout.slot(("var", n, ty))) for n, ty in _free_list(goal)]
        keys = list(enumerate(self.layout.keys))
        self.consts = sorted(((k[1], k[2], Layout.slot_of(i)) for i, k in keys if k[0] == "const"),
                             key=lambda c: (c[0], format_type(c[1])))
        self.iotas = sorted((k[1], Layout.slot_of(i)) for i, k in keys if k[0] == "iota")
        self.env = comp.new_env()

    def var_type(self, slot):
        return self.layout.keys[-slot - 1][2]


def _product_size(sem, types, what):
    total = 1
    for ty in types:
        total *= sem.domain(ty)
        if total > sem.cap:
            raise CapExceeded(what, total, sem.cap)
    return total


def _holds_everywhere(code, slots, types, sem, envl):
    if not slots:
        return code.run(envl) == sem.top
    ranges = [range(sem.domain(t)) for t in types]
    _product_size(sem, types, "valuations")
    for combo in itertools.product(*ranges):
        for s, v in zip(slots, combo):
            envl[s] = v
        if code.run(envl) != sem.top:
            return False
    return True


def check_valid(goal, env=None, sizes=None, cap: int = DEFAULT_CAP, use_axioms: bool = True,
                axioms=None, alg=None, q=None) -> Verdict:
    """Is ``goal`` true in every model (of the axioms) for every size assignment?

    Uninterpreted constants range over all interpretations and free
    variables of the goal over all valuations; free variables of an axiom
    are read universally.  Returns the first countermodel in enumeration
    order (size assignment, constant tables, description defaults,
    valuation), or a valid verdict.
    """
    goal = _prepare(goal, env)
    if term_type_vars(goal):
        raise TheoryError("goal has schematic type variables; instantiate them first")
    if axioms is None:
        axioms = [(a.name, a.term) for a in env.axioms] if (env is not None and use_axioms) else []
    prepared = []
    for name, ax in axioms:
        ax = _prepare(ax, env)
        if term_type_vars(ax):
            raise TheoryError(f"axiom {name} is schematic; instantiate it first")
        prepared.append((name, ax))
    needed = set()
    for t in [goal] + [a for _, a in prepared]:
        _collect_bases(t, needed)
    assignments = size_assignments(sizes, needed)
    models = 0
    for sz in assignments:
        prob = _Problem(goal, prepared, sz, env, cap, alg, q)
        prob.needed_sizes = sz
        cm, n = _search(prob)
        models += n
        if cm is not None:
            return Verdict(False, cm, models, tuple(assignments))
    return Verdict(True, None, models, tuple(assignments))


def _collect_bases(t, acc):
    if isinstance(t, (Var, Const)):
        if t.ty is not None:
            acc |= type_consts(t.ty) - {"o"}
    elif isinstance(t, Lam):
        acc |= type_consts(t.ty) - {"o"}
        _collect_bases(t.body, acc)
    elif isinstance(t, App):
        _collect_bases(t.fun, acc)
        _collect_bases(t.arg, acc)
    return acc


def _search(prob: _Problem):
    sem = prob.sem
    envl = prob.env
    const_types = [ty for _, ty, _ in prob.consts]
    _product_size(sem, const_types + [TyConst(b) for b, _ in prob.iotas], "interpretations")
    const_ranges = [range(sem.domain(ty)) for ty in const_types]
    iota_ranges = [range(sem.frame.size_of(b)) for b, _ in prob.iotas]
    goal_slots = [s for _, _, s in prob.goal_vars]
    goal_types = [ty for _, ty, _ in prob.goal_vars]
    goal_ranges = [range(sem.domain(t)) for t in goal_types]
    _product_size(sem, goal_types, "valuations")
    models = 0
    for interp in itertools.product(*const_ranges):
        for (_, _, s), v in zip(prob.consts, interp):
            envl[s] = v
        for defaults in itertools.product(*iota_ranges):
            for (_, s), v in zip(prob.iotas, defaults):
                envl[s] = v
            if not all(_holds_everywhere(code, slots, [prob.var_type(s) for s in slots], sem, envl)
                       for _, code, slots in prob.axioms):
                continue
            models += 1
            run = prob.goal.run
            top = sem.top
            for combo in itertools.product(*goal_ranges):
                for s, v in zip(goal_slots, combo):
                    envl[s] = v
                if run(envl) != top:
                    cm = Countermodel(
                        dict(prob.needed_sizes),
                        [(n, ty, v) for (n, ty, _), v in zip(prob.consts, interp)],
                        {b: v for (b, _), v in zip(prob.iotas, defaults)},
                        [(n, ty, v) for (n, ty, _), v in zip(prob.goal_vars, combo)],
                        sem)
                    return cm, models
    return None, models


def find_countermodel(goal, env=None, sizes=None, cap=DEFAULT_CAP) -> Optional[Countermodel]:
    return check_valid(goal, env, sizes, cap).countermodel


def instances(t: Term, types) -> list:
    """All instantiations of the schematic type variables of ``t`` by ``types``."""
    from .kernel import map_types, subst_type

    vs = term_type_vars(t)
    if not vs:
        return [t]
    out = []
    for combo in itertools.product(types, repeat=len(vs)):
        s = dict(zip(vs, combo))
        out.append(map_types(t, lambda ty: subst_type(ty, s)))
    return out


def semantically_equal(t, u, env, sizes=None, type_instances=None, cap=DEFAULT_CAP) -> Verdict:
    """``t = u`` valid in all finite standard models (schematic types instantiated)."""
    from .typecheck import elaborate_many

    if isinstance(t, str):
        t = env.parse(t)
    if isinstance(u, str):
        u = env.parse(u)
    (t, u), (ty, _), _ = elaborate_many([t, u], env, same_type=True)
    if type_instances is None:
        type_instances = [BOOL] + [TyConst(b) for b in env.base_types]
    goal = App(App(Const(EQ, Arrow(ty, Arrow(ty, BOOL))), t), u)
    last = None
    for g in instances(goal, type_instances):
        last = check_valid(g, env, sizes, cap, use_axioms=False)
        if not last.valid:
            return last
    return last


# ---------------------------------------------------------------------------
# Frame correspondence


def _bit(r, n, x, y):
    return (r >> (x * n + y)) & 1


def _reflexive(r, n):
    return all(_bit(r, n, x, x) for x in range(n))


def _symmetric(r, n):
    return all(_bit(r, n, x, y) == _bit(r, n, y, x) for x in range(n) for y in range(n))


def _transitive(r, n):
    return all(not (_bit(r, n, x, y) and _bit(r, n, y, z)) or _bit(r, n, x, z)
               for x in range(n) for y in range(n) for z in range(n))


def _euclidean(r, n):
    return all(not (_bit(r, n, x, y) and _bit(r, n, x, z)) or _bit(r, n, y, z)
               for x in range(n) for y in range(n) for z in range(n))


def _serial(r, n):
    return all(any(_bit(r, n, x, y) for y in range(n)) for x in range(n))


FRAME_PROPERTIES = {
    "reflexive": _reflexive,
    "symmetric": _symmetric,
    "transitive": _transitive,
    "euclidean": _euclidean,
    "serial": _serial,
    "none": lambda r, n: True,
}


@dataclass
class CorrespondenceReport:
    axiom: str
    prop: str
    max_worlds: int
    relations: int
    mismatches: list          # (worlds, relation bits, axiom valid, property holds)
    per_size: dict

    @property
    def holds(self) -> bool:
        return not self.mismatches

    def format(self) -> str:
        lines = [f"{self.axiom}  <=>  {self.prop}: {self.relations} relations on <= "
                 f"{self.max_worlds} worlds, {len(self.mismatches)} mismatches"]
        for n, (count, valid) in sorted(self.per_size.items()):
            lines.append(f"  {n} worlds: {count} relations, axiom valid on {valid}")
        for n, r, a, p in self.mismatches[:10]:
            lines.append(f"  mismatch: {n} worlds, R bits {r:b}, axiom {a}, property {p}")
        return "\n".join(lines)


def modal_env():
    from .theory import env_with

    return env_with("modal", types=("w",)).declare_const("R", "w -> w -> o")


def frame_correspondence(axiom, prop: str, max_worlds: int = 3, env=None, relation: str = "R",
                         cap: int = DEFAULT_CAP) -> CorrespondenceReport:
    """Brute-force check that ``axiom`` is valid on exactly the frames with ``prop``.

    ``axiom`` is a world-predicate (type ``w -> o``, valid means true at all
    worlds) or a formula of type ``o``; its free variables range over
    all valuations.  ``relation`` names the accessibility constant.
    """
    env = env or modal_env()
    if prop not in FRAME_PROPERTIES:
        raise TheoryError(f"unknown frame property {prop!r}")
    text = axiom if isinstance(axiom, str) else print_term(axiom, env.notations)
    t, ty = env.elaborate(axiom) if not isinstance(axiom, str) else env.elaborate(env.parse(axiom))
    w = TyConst("w")
    if ty == Arrow(w, BOOL):
        t = App(t, Var("\0world", w))
    elif ty != BOOL:
        raise TheoryError(f"axiom must have type w -> o or o, not {format_type(ty)}")
    t = _prepare(t, env)
    check = FRAME_PROPERTIES[prop]
    mismatches = []
    per_size = {}
    total = 0
    rel_ty = Arrow(w, Arrow(w, BOOL))
    for n in range(1, max_worlds + 1):
        sem = Semantics(Frame({"w": n}), cap)
        layout = Layout()
        comp = Compiler(sem, layout)
        code = comp.compile(t)
        rslot = layout.slot(("const", relation, rel_ty))
        others = [k for k in layout.keys if k[0] == "const" and k[1] != relation]
        if others:
            raise TheoryError(f"axiom mentions constants other than {relation}: "
                              f"{', '.join(k[1] for k in others)}")
        vars_ = [(Layout.slot_of(i), k[2]) for i, k in enumerate(layout.keys) if k[0] == "var"]
        slots = [i for i, _ in vars_]
        types = [ty for _, ty in vars_]
        envl = comp.new_env()
        count = sem.domain(rel_ty)
        valid_count = 0
        for r in range(count):
            envl[rslot] = r
            valid = _holds_everywhere(code, slots, types, sem, envl)
            valid_count += valid
            expected = check(r, n)
            if valid != expected:
                mismatches.append((n, r, valid, expected))
        per_size[n] = (count, valid_count)
        total += count
    return CorrespondenceReport(text, prop, max_worlds, total, mismatches, per_size)
