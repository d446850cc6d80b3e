"""Theory environments: declarations, definitions, axioms and notation.

Everything logical bottoms out in the single kernel constant ``Q``; the
connectives, quantifiers, ``D`` and the embedding operators are ordinary
definitions loaded from pack files (see ``eqhol/packs``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional

from .errors import KernelError, ParseError, TheoryError, TypeCheckError
from .kernel import (BOOL, EQ, NEQ, App, Arrow, Const, Lam, Notations, Signature, Term, TyConst,
                     TypeScheme, TyVar, Var, arrows, constants, format_type, free_var_names,
                     map_types, parse_term, parse_type, split_arrows, subst_type, term_type_vars,
                     type_consts, type_vars)
from .typecheck import default_type_vars, elaborate, normalize_type_vars, _letters


@dataclass(frozen=True)
class Definition:
    name: str
    scheme: TypeScheme
    body: Term


@dataclass(frozen=True)
class Axiom:
    name: str
    term: Term


@dataclass(frozen=True)
class Check:
    """A ``check`` directive as written in a theory file (elaborated later)."""

    kind: str
    name: Optional[str]
    options: Mapping
    payload: str
    line: int
    source: Optional[str] = None
    base_dir: Optional[str] = None


@dataclass(frozen=True, eq=False)
class TheoryEnv:
    signature: Signature = field(default_factory=Signature.default)
    defs: Mapping = field(default_factory=dict)      # name -> Definition, in order
    axioms: tuple = ()
    notations: Notations = field(default_factory=Notations.default)
    included: tuple = ()
    iota: Mapping = field(default_factory=dict)      # primitive description constant -> base type
    strict: bool = False

    # -- queries --------------------------------------------------------
    @property
    def base_types(self):
        return sorted(self.signature.type_consts - {"o"})

    def uninterpreted(self) -> dict:
        """Declared constants without a definition (model parameters)."""
        return {n: s for n, s in self.signature.term_consts.items()
                if n != EQ and n not in self.defs and n not in self.iota}

    def definition(self, name) -> Definition:
        try:
            return self.defs[name]
        except KeyError:
            raise TheoryError(f"no definition named {name}") from None

    def _replace(self, **kw) -> "TheoryEnv":
        fields = dict(signature=self.signature, defs=self.defs, axioms=self.axioms,
                      notations=self.notations, included=self.included, iota=self.iota,
                      strict=self.strict)
        fields.update(kw)
        return TheoryEnv(**fields)

    # -- syntax ----------------------------------------------------------
    def parse(self, text: str, line: int = 1, source=None) -> Term:
        return parse_term(text, self.signature, self.notations, self.strict, source, line)

    def parse_type(self, text: str, source=None):
        return parse_type(text, self.signature.type_consts, source)

    def elaborate(self, t, expected=None, rigid=()):
        if isinstance(t, str):
            t = self.parse(t)
        if isinstance(expected, str):
            expected = self.parse_type(expected)
        return elaborate(t, self.signature, expected, rigid)

    def term(self, t, expected=None) -> Term:
        """Parse (if needed) and elaborate; returns the annotated term."""
        return self.elaborate(t, expected)[0]

    def printer_notations(self) -> Notations:
        return self.notations

    # -- extension -------------------------------------------------------
    def declare_type(self, name: str) -> "TheoryEnv":
        if name in self.signature.type_consts:
            raise TheoryError(f"type {name} already declared")
        return self._replace(signature=self.signature.with_type(name))

    def declare_const(self, name: str, ty) -> "TheoryEnv":
        if isinstance(ty, str):
            ty = self.parse_type(ty)
        self._check_fresh(name)
        self._check_types_declared(ty, name)
        return self._replace(signature=self.signature.with_const(name, TypeScheme.generalize(ty)))

    def define(self, name: str, body, ty=None) -> "TheoryEnv":
        """Add ``name := body``.  The body may only mention earlier names."""
        self._check_fresh(name)
        if isinstance(body, str):
            body = self.parse(body)
        if isinstance(ty, str):
            ty = self.parse_type(ty)
        rigid = type_vars(ty) if ty is not None else ()
        term, inferred = elaborate(body, self.signature, ty, rigid)
        free = free_var_names(term)
        if free:
            raise TheoryError(f"definition of {name} has free variables: {', '.join(sorted(free))}")
        # type variables that do not reach the type (e.g. in ``Q = Q``) are fixed to o
        term = default_type_vars(term, type_vars(inferred))
        if ty is None:
            ren = {v: TyVar(n) for v, n in zip(type_vars(inferred), _letters())}
            inferred = subst_type(inferred, ren)
            term = map_types(term, lambda t: subst_type(t, ren))
        else:
            inferred = ty
        self._check_types_declared(inferred, name)
        scheme = TypeScheme.generalize(inferred)
        defs = dict(self.defs)
        defs[name] = Definition(name, scheme, term)
        return self._replace(signature=self.signature.with_const(name, scheme), defs=defs)

    def add_axiom(self, name: str, t) -> "TheoryEnv":
        term, _ = self.elaborate(t, BOOL)
        if any(a.name == name for a in self.axioms):
            raise TheoryError(f"axiom {name} already present")
        return self._replace(axioms=self.axioms + (Axiom(name, term),))

    def with_notation(self, notations: Notations) -> "TheoryEnv":
        return self._replace(notations=self.notations.merge(notations))

    def infix(self, symbol, prec, assoc, const) -> "TheoryEnv":
        return self._replace(notations=self.notations.with_infix(symbol, prec, assoc, const))

    def prefix(self, symbol, prec, const) -> "TheoryEnv":
        return self._replace(notations=self.notations.with_prefix(symbol, prec, const))

    def binder(self, const) -> "TheoryEnv":
        return self._replace(notations=self.notations.with_binder(const))

    def declare_iota(self, name: str, base: str) -> "TheoryEnv":
        """Primitive description operator for base type ``base`` (interpreted per model)."""
        self._check_fresh(name)
        b = TyConst(base)
        env = self._replace(signature=self.signature.with_const(
            name, TypeScheme((), Arrow(Arrow(b, BOOL), b))))
        iota = dict(self.iota)
        iota[name] = base
        return env._replace(iota=iota)

    def include(self, pack: str) -> "TheoryEnv":
        if pack in self.included:
            return self
        if pack == "connectives":
            return self if "true" in self.defs else self.include("q0")
        text = load_pack_text(pack)
        env, checks = read_theory(text, self, source=f"<pack {pack}>")
        if checks:
            raise TheoryError(f"pack {pack} contains check directives")
        return env._replace(included=env.included + (pack,))

    def _check_fresh(self, name):
        if name in self.signature.term_consts:
            raise TheoryError(f"constant {name} already declared")

    def _check_types_declared(self, ty, name):
        missing = type_consts(ty) - self.signature.type_consts
        if missing:
            raise TheoryError(f"{name}: undeclared base type(s) {', '.join(sorted(missing))}")


# ---------------------------------------------------------------------------
# Pack files


PACK_ALIASES = {
    "via-positiva": "positiva",
    "negativa": "via-negativa",
    "sets": "modal",
}


def pack_names():
    root = resources.files("eqhol") / "packs"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".thy"))


def load_pack_text(name: str) -> str:
    name = PACK_ALIASES.get(name, name)
    path = resources.files("eqhol") / "packs" / f"{name}.thy"
    if not path.is_file():
        raise TheoryError(f"unknown pack {name!r} (available: {', '.join(pack_names())})")
    return path.read_text()


# ---------------------------------------------------------------------------
# Theory-file reader

_KEYWORDS = {"type", "const", "def", "axiom", "include", "needs", "infix", "prefix", "binder",
             "check"}
_HEADER_SEP = re.compile(r":(?=\s|$)")
CHECK_KINDS = ("valid", "countermodel", "normal-eq", "eval", "dualize")


def _directives(text):
    """Yield (line_no, text) for each directive; continuation lines are indented."""
    cur = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            if cur is not None:
                cur[1].append("")
            continue
        if not line[0].isspace():
            if cur is not None:
                yield cur[0], "\n".join(cur[1]).rstrip()
            cur = (no, [line])
        else:
            if cur is None:
                raise ParseError("indented line outside a directive", no, 1)
            cur[1].append(line)
    if cur is not None:
        yield cur[0], "\n".join(cur[1]).rstrip()


def _split_header(body, line, source, what):
    m = _HEADER_SEP.search(body)
    if not m:
        raise ParseError(f"{what}: expected ' : ' separating header from body", line, 1, source)
    return body[:m.start()].strip(), m.end()


def _payload(full, offset):
    """Text from ``offset`` on, padded so that columns stay aligned for error messages."""
    col = offset - (full.rfind("\n", 0, offset) + 1)
    return " " * col + full[offset:]


def read_theory(text: str, env: Optional[TheoryEnv] = None, source=None, base_dir=None):
    """Process theory-file ``text`` on top of ``env``.

    Returns the extended environment and the list of ``Check`` directives
    (in file order, not yet executed).
    """
    env = env or TheoryEnv()
    checks = []
    for line, full in _directives(text):
        kw, _, rest = full.partition(" ")
        kw = kw.strip()
        start = len(kw) + 1
        try:
            if kw not in _KEYWORDS:
                raise ParseError(f"unknown directive {kw!r}", line, 1, source)
            if kw == "type":
                for name in rest.split():
                    env = env.declare_type(name)
            elif kw == "needs":
                for name in rest.split():
                    if name not in env.signature.type_consts:
                        raise TheoryError(f"{source or 'theory'} needs base type {name}; "
                                          f"declare it first with `type {name}`")
            elif kw == "include":
                for name in rest.split():
                    if name.endswith(".thy"):
                        path = Path(base_dir or ".") / name
                        sub, sub_checks = read_theory(path.read_text(), env, str(path),
                                                      str(path.parent))
                        env = sub
                        checks.extend(sub_checks)
                    else:
                        env = env.include(name)
            elif kw == "const":
                head, off = _split_header(rest, line, source, "const")
                ty = env.parse_type(rest[off:].strip(), source)
                for name in head.split():
                    env = env.declare_const(name, ty)
            elif kw == "def":
                if ":=" not in rest:
                    raise ParseError("def: expected ':='", line, 1, source)
                head, body = rest.split(":=", 1)
                offset = start + len(head) + 2
                parts = head.split(":", 1)
                name = parts[0].strip()
                ty = env.parse_type(parts[1].strip(), source) if len(parts) == 2 else None
                term = env.parse(_payload(full, offset), line, source)
                env = env.define(name, term, ty)
            elif kw == "axiom":
                head, off = _split_header(rest, line, source, "axiom")
                env = env.add_axiom(head, env.parse(_payload(full, start + off), line, source))
            elif kw == "infix":
                parts = rest.split()
                if len(parts) != 4:
                    raise ParseError("infix: expected PREC ASSOC SYMBOL CONST", line, 1, source)
                env = env.infix(parts[2], int(parts[0]), parts[1], parts[3])
            elif kw == "prefix":
                parts = rest.split()
                if len(parts) != 3:
                    raise ParseError("prefix: expected PREC SYMBOL CONST", line, 1, source)
                env = env.prefix(parts[1], int(parts[0]), parts[2])
            elif kw == "binder":
                for name in rest.split():
                    env = env.binder(name)
            elif kw == "check":
                head, off = _split_header(rest, line, source, "check")
                words = head.split()
                if not words or words[0] not in CHECK_KINDS:
                    raise ParseError(f"check: kind must be one of {', '.join(CHECK_KINDS)}",
                                     line, 1, source)
                name, options = None, {}
                for w in words[1:]:
                    if "=" in w:
                        k, v = w.split("=", 1)
                        options[k] = v
                    elif name is None:
                        name = w
                    else:
                        raise ParseError(f"check: unexpected word {w!r}", line, 1, source)
                checks.append(Check(words[0], name, options, _payload(full, start + off), line,
                                    source, base_dir))
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(str(exc), line, 1, source) from None
        except KernelError as exc:
            if isinstance(exc, (TheoryError, TypeCheckError)) and source is not None:
                raise type(exc)(f"{source}:{line}: {exc}") from None
            raise
    return env, checks


def load_theory_file(path, env: Optional[TheoryEnv] = None):
    path = Path(path)
    return read_theory(path.read_text(), env, str(path), str(path.parent))


# ---------------------------------------------------------------------------
# Stock environments


def base_env(*types: str) -> TheoryEnv:
    env = TheoryEnv()
    for t in types:
        env = env.declare_type(t)
    return env


def q0_env(*types: str) -> TheoryEnv:
    """Connectives defined from equality (Andrews-style abbreviations)."""
    return base_env(*types).include("q0")


def via_positiva_env(*types: str) -> TheoryEnv:
    return base_env(*types).include("positiva")


def via_negativa_env(*types: str) -> TheoryEnv:
    return base_env(*types).include("via-negativa")


def church_env(*types: str) -> TheoryEnv:
    return base_env(*types).include("church")


def env_with(*packs: str, types=("i",), base: str = "q0") -> TheoryEnv:
    env = base_env(*types).include(base)
    for p in packs:
        env = env.include(p)
    return env


# ---------------------------------------------------------------------------
# Duality


def swap_discernment(t: Term) -> Term:
    """Exchange every occurrence of Q and D (types untouched)."""
    if isinstance(t, Const):
        if t.name == EQ:
            return Const(NEQ, t.ty)
        if t.name == NEQ:
            return Const(EQ, t.ty)
        return t
    if isinstance(t, Lam):
        return Lam(t.bound, t.ty, swap_discernment(t.body))
    if isinstance(t, App):
        return App(swap_discernment(t.fun), swap_discernment(t.arg))
    return t


def dualize(t, env: Optional[TheoryEnv] = None) -> Term:
    """Unfold everything except D, then switch Q and D.

    Without an environment ``t`` must already be a term over Q, D and
    λ-syntax.  Constants that are model parameters (declared without a
    definition) are left alone.
    """
    from .reduction import unfold

    if env is not None:
        if isinstance(t, str):
            t = env.term(t)
        t = unfold(t, env, keep=(NEQ,))
        allowed = set(env.uninterpreted()) | set(env.iota)
    else:
        allowed = set()
    residual = sorted({c.name for c in constants(t)} - {EQ, NEQ} - allowed)
    if residual:
        raise TheoryError(f"cannot dualize: residual constants {', '.join(residual)}")
    return swap_discernment(t)


DUAL_PAIRS = (("true", "false"), ("false", "true"), ("not", "not"), ("and", "or"),
              ("forall", "exists"))


# ---------------------------------------------------------------------------
# Leibniz equality and descriptions


def leibniz_eq(alpha, env: Optional[TheoryEnv] = None) -> Term:
    """``\\x y. forall f. f x -> f y`` at type ``alpha`` (over the ``q0`` connectives)."""
    if isinstance(alpha, str):
        alpha = parse_type(alpha)
    env = env or q0_env(*sorted(type_consts(alpha) - {"o"}))
    a = alpha
    f_ty = Arrow(a, BOOL)
    x, y, f = Var("x", a), Var("y", a), Var("f", f_ty)
    body = App(Const("forall"), Lam("f", f_ty, App(App(Const("imp"), App(f, x)), App(f, y))))
    t = Lam("x", a, Lam("y", a, body))
    return env.term(t, arrows(a, a, BOOL))


def _mangle(ty) -> str:
    if isinstance(ty, TyConst):
        return ty.name
    if isinstance(ty, Arrow):
        dom = _mangle(ty.dom)
        if isinstance(ty.dom, Arrow):
            dom = f"L{dom}R"
        return f"{dom}_{_mangle(ty.cod)}"
    raise TheoryError(f"description operator needs a concrete type, got {format_type(ty)}")


def iota_name(ty) -> str:
    """Constant name of the description operator at ``ty`` (e.g. ``iota_i_o``)."""
    return "iota_" + _mangle(ty)


def iota_env_extension(env: TheoryEnv, types=()) -> TheoryEnv:
    """Add description operators.

    ``iota_o := Q (\\x:o. x)``; each declared base type ``b`` gets a primitive
    ``iota_b`` interpreted by the model; for every requested functional type
    the inductive definition ``\\h x. iota_c (\\y. exists f. h f & y = f x)`` is
    added (recursively building what it needs).
    """
    if "exists" not in env.defs or "and" not in env.defs:
        raise TheoryError("description operators need the connectives (include q0 first)")
    if "iota_o" not in env.signature:
        env = env.define("iota_o", "Q (\\x:o. x)")
    for b in env.base_types:
        name = iota_name(TyConst(b))
        if name not in env.signature:
            env = env.declare_iota(name, b)
    for ty in types:
        if isinstance(ty, str):
            ty = env.parse_type(ty)
        env = _ensure_iota(env, ty)
    return env


def _ensure_iota(env, ty):
    name = iota_name(ty)
    if name in env.signature:
        return env
    if isinstance(ty, TyConst):
        raise TheoryError(f"no description operator for undeclared base type {ty.name}")
    env = _ensure_iota(env, ty.cod)
    beta, gamma = format_type(ty.dom), format_type(ty.cod)
    fty = format_type(ty)
    body = (f"\\h:({fty}) -> o. \\x:{beta}. {iota_name(ty.cod)} "
            f"(\\y:{gamma}. exists (\\f:{fty}. and (h f) (Q y (f x))))")
    return env.define(name, body)
