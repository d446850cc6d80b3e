"""Types, terms and their concrete syntax.

Types are built from constants (``o``, ``i``, ...), schematic variables
(``'a``) and right-associative arrows.  Terms are constants, variables,
typed abstractions and applications.  The only logical constant known to the
kernel is ``Q : 'a -> 'a -> o``; everything else is a definition layered on
top (see :mod:`eqhol.theory`).

Grammar (ASCII)::

    term   ::= '\\' ident [':' type] '.' term
             | BINDER ident [':' type] '.' term
             | PREFIX term | term INFIX term | appterm
    appterm::= appterm atom | atom
    atom   ::= ident | '(' term ')' | '(' term ':' type ')'
    type   ::= btype '->' type | btype
    btype  ::= ident | "'" ident | '(' type ')'

``#`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from .errors import ParseError, TypeCheckError

# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class TyConst:
    name: str

    def __str__(self):
        return format_type(self)


@dataclass(frozen=True)
class TyVar:
    name: str

    def __str__(self):
        return format_type(self)


@dataclass(frozen=True)
class Arrow:
    dom: "Type"
    cod: "Type"

    def __str__(self):
        return format_type(self)


Type = Union[TyConst, TyVar, Arrow]

BOOL = TyConst("o")


def arrows(*tys: Type) -> Type:
    """``arrows(a, b, c)`` is ``a -> b -> c``."""
    result = tys[-1]
    for ty in reversed(tys[:-1]):
        result = Arrow(ty, result)
    return result


def split_arrows(ty: Type):
    doms = []
    while isinstance(ty, Arrow):
        doms.append(ty.dom)
        ty = ty.cod
    return doms, ty


def format_type(ty: Type) -> str:
    if isinstance(ty, TyConst):
        return ty.name
    if isinstance(ty, TyVar):
        return "'" + ty.name
    dom = format_type(ty.dom)
    if isinstance(ty.dom, Arrow):
        dom = f"({dom})"
    return f"{dom} -> {format_type(ty.cod)}"


def type_vars(ty: Type, acc: Optional[list] = None) -> list:
    """Schematic variables of ``ty`` in order of first occurrence."""
    if acc is None:
        acc = []
    if isinstance(ty, TyVar):
        if ty.name not in acc:
            acc.append(ty.name)
    elif isinstance(ty, Arrow):
        type_vars(ty.dom, acc)
        type_vars(ty.cod, acc)
    return acc


def type_consts(ty: Type, acc: Optional[set] = None) -> set:
    if acc is None:
        acc = set()
    if isinstance(ty, TyConst):
        acc.add(ty.name)
    elif isinstance(ty, Arrow):
        type_consts(ty.dom, acc)
        type_consts(ty.cod, acc)
    return acc


def subst_type(ty: Type, s: Mapping[str, Type]) -> Type:
    if not s:
        return ty
    if isinstance(ty, TyVar):
        return s.get(ty.name, ty)
    if isinstance(ty, Arrow):
        return Arrow(subst_type(ty.dom, s), subst_type(ty.cod, s))
    return ty


def is_concrete(ty: Type) -> bool:
    return not type_vars(ty)


@dataclass(frozen=True)
class TypeScheme:
    """A closed type scheme ``forall vars. body``."""

    vars: tuple
    body: Type

    def __post_init__(self):
        missing = set(type_vars(self.body)) - set(self.vars)
        if missing:
            raise TypeCheckError(f"scheme is not closed: {sorted(missing)}")

    @classmethod
    def generalize(cls, ty: Type) -> "TypeScheme":
        return cls(tuple(type_vars(ty)), ty)

    def __str__(self):
        return format_type(self.body)


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Const:
    name: str
    ty: Optional[Type] = None


@dataclass(frozen=True)
class Var:
    name: str
    ty: Optional[Type] = None


@dataclass(frozen=True)
class Lam:
    bound: str
    ty: Optional[Type]
    body: "Term"


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"


Term = Union[Const, Var, Lam, App]

EQ = "Q"
NEQ = "D"


def apply(fun: Term, *args: Term) -> Term:
    for a in args:
        fun = App(fun, a)
    return fun


def spine(t: Term):
    """Split ``f a1 ... an`` into ``(f, [a1, ..., an])``."""
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def eq(a: Term, b: Term, ty: Optional[Type] = None) -> Term:
    q = Const(EQ, None if ty is None else arrows(ty, ty, BOOL))
    return App(App(q, a), b)


def term_size(t: Term) -> int:
    if isinstance(t, App):
        return 1 + term_size(t.fun) + term_size(t.arg)
    if isinstance(t, Lam):
        return 1 + term_size(t.body)
    return 1


def map_types(t: Term, f) -> Term:
    """Apply ``f`` to every type annotation in ``t``."""
    if isinstance(t, Const):
        return t if t.ty is None else Const(t.name, f(t.ty))
    if isinstance(t, Var):
        return t if t.ty is None else Var(t.name, f(t.ty))
    if isinstance(t, Lam):
        return Lam(t.bound, None if t.ty is None else f(t.ty), map_types(t.body, f))
    return App(map_types(t.fun, f), map_types(t.arg, f))


def term_type_vars(t: Term, acc: Optional[list] = None) -> list:
    if acc is None:
        acc = []
    if isinstance(t, (Const, Var)):
        if t.ty is not None:
            type_vars(t.ty, acc)
    elif isinstance(t, Lam):
        if t.ty is not None:
            type_vars(t.ty, acc)
        term_type_vars(t.body, acc)
    else:
        term_type_vars(t.fun, acc)
        term_type_vars(t.arg, acc)
    return acc


def constants(t: Term, acc: Optional[set] = None) -> set:
    """Set of ``Const`` nodes (name and instance type) occurring in ``t``."""
    if acc is None:
        acc = set()
    if isinstance(t, Const):
        acc.add(t)
    elif isinstance(t, Lam):
        constants(t.body, acc)
    elif isinstance(t, App):
        constants(t.fun, acc)
        constants(t.arg, acc)
    return acc


def type_of(t: Term) -> Optional[Type]:
    """Type of a fully annotated term, or None if an annotation is missing."""
    if isinstance(t, (Const, Var)):
        return t.ty
    if isinstance(t, Lam):
        body = type_of(t.body)
        if t.ty is None or body is None:
            return None
        return Arrow(t.ty, body)
    fun = type_of(t.fun)
    arg = type_of(t.arg)
    if fun is None or arg is None:
        return None
    if not isinstance(fun, Arrow) or fun.dom != arg:
        raise TypeCheckError(
            f"ill-typed application: function of type {fun} applied to {arg}")
    return fun.cod


# ---------------------------------------------------------------------------
# Free variables, alpha-equivalence, substitution


def free_vars(t: Term) -> set:
    """Free variables of ``t`` as a set of ``Var`` nodes."""
    out = set()
    _free_vars(t, frozenset(), out)
    return out


def _free_vars(t, bound, out):
    if isinstance(t, Var):
        if t.name not in bound:
            out.add(t)
    elif isinstance(t, Lam):
        _free_vars(t.body, bound | {t.bound}, out)
    elif isinstance(t, App):
        _free_vars(t.fun, bound, out)
        _free_vars(t.arg, bound, out)


def free_var_names(t: Term) -> set:
    return {v.name for v in free_vars(t)}


def _all_names(t: Term, acc: set) -> set:
    if isinstance(t, Var):
        acc.add(t.name)
    elif isinstance(t, Lam):
        acc.add(t.bound)
        _all_names(t.body, acc)
    elif isinstance(t, App):
        _all_names(t.fun, acc)
        _all_names(t.arg, acc)
    return acc


def alpha_equal(t: Term, u: Term) -> bool:
    """True iff ``t`` and ``u`` differ only in the names of bound variables."""
    return _alpha(t, u, {}, {}, 0)


def _alpha(t, u, lt, lu, depth):
    if type(t) is not type(u):
        return False
    if isinstance(t, Var):
        if t.ty != u.ty:
            return False
        bt = lt.get(t.name)
        bu = lu.get(u.name)
        if bt is None and bu is None:
            return t.name == u.name
        return bt == bu
    if isinstance(t, Const):
        return t == u
    if isinstance(t, Lam):
        if t.ty != u.ty:
            return False
        lt2 = dict(lt)
        lu2 = dict(lu)
        lt2[t.bound] = depth
        lu2[u.bound] = depth
        return _alpha(t.body, u.body, lt2, lu2, depth + 1)
    return _alpha(t.fun, u.fun, lt, lu, depth) and _alpha(t.arg, u.arg, lt, lu, depth)


def fresh_name(base: str, avoid) -> str:
    name = base + "'"
    while name in avoid:
        name += "'"
    return name


def substitute(t: Term, x: Union[Var, str], u: Term) -> Term:
    """Capture-avoiding substitution of ``u`` for the free variable ``x`` in ``t``."""
    if isinstance(x, Var):
        name = x.name
        xty = x.ty
    else:
        name = x
        xty = None
    if xty is not None:
        uty = type_of(u)
        if uty is not None and uty != xty:
            raise TypeCheckError(f"cannot substitute a term of type {uty} for {name} : {xty}")
    return _subst(t, name, u, free_var_names(u))


def _subst(t, name, u, fvu):
    if isinstance(t, Var):
        return u if t.name == name else t
    if isinstance(t, Const):
        return t
    if isinstance(t, App):
        f = _subst(t.fun, name, u, fvu)
        a = _subst(t.arg, name, u, fvu)
        if f is t.fun and a is t.arg:
            return t
        return App(f, a)
    if t.bound == name:
        return t
    body_fv = free_var_names(t.body)
    if name not in body_fv:
        return t
    if t.bound in fvu:
        new = fresh_name(t.bound, fvu | body_fv | _all_names(t.body, set()) | {name})
        body = _rename(t.body, t.bound, new)
        return Lam(new, t.ty, _subst(body, name, u, fvu))
    return Lam(t.bound, t.ty, _subst(t.body, name, u, fvu))


def _rename(t, old, new):
    """Rename free occurrences of ``old`` (``new`` must not be bound inside ``t``)."""
    if isinstance(t, Var):
        return Var(new, t.ty) if t.name == old else t
    if isinstance(t, Const):
        return t
    if isinstance(t, App):
        return App(_rename(t.fun, old, new), _rename(t.arg, old, new))
    if t.bound == old:
        return t
    return Lam(t.bound, t.ty, _rename(t.body, old, new))


# ---------------------------------------------------------------------------
# Signatures and notation


@dataclass(frozen=True)
class Signature:
    type_consts: frozenset = frozenset({"o"})
    term_consts: Mapping = field(default_factory=dict)

    @classmethod
    def default(cls) -> "Signature":
        a = TyVar("a")
        return cls(frozenset({"o"}), {EQ: TypeScheme(("a",), arrows(a, a, BOOL))})

    def scheme(self, name: str) -> Optional[TypeScheme]:
        return self.term_consts.get(name)

    def with_type(self, name: str) -> "Signature":
        return Signature(self.type_consts | {name}, self.term_consts)

    def with_const(self, name: str, scheme: TypeScheme) -> "Signature":
        if name in self.term_consts:
            raise TypeCheckError(f"constant {name} already declared")
        consts = dict(self.term_consts)
        consts[name] = scheme
        return Signature(self.type_consts, consts)

    def __contains__(self, name):
        return name in self.term_consts


@dataclass(frozen=True)
class Infix:
    symbol: str
    prec: int
    assoc: str  # "left" | "right" | "none"
    const: str


@dataclass(frozen=True)
class Notations:
    """Infix, prefix and binder sugar over named constants."""

    infix: Mapping = field(default_factory=dict)   # symbol -> Infix
    prefix: Mapping = field(default_factory=dict)  # symbol -> (prec, const)
    binders: frozenset = frozenset()

    @classmethod
    def default(cls) -> "Notations":
        return cls({"=": Infix("=", 50, "left", EQ), "!=": Infix("!=", 50, "left", NEQ)})

    def with_infix(self, symbol, prec, assoc, const) -> "Notations":
        if assoc not in ("left", "right", "none"):
            raise ValueError(f"bad associativity {assoc!r}")
        infix = dict(self.infix)
        infix[symbol] = Infix(symbol, prec, assoc, const)
        return Notations(infix, self.prefix, self.binders)

    def with_prefix(self, symbol, prec, const) -> "Notations":
        prefix = dict(self.prefix)
        prefix[symbol] = (prec, const)
        return Notations(self.infix, prefix, self.binders)

    def with_binder(self, const) -> "Notations":
        return Notations(self.infix, self.prefix, self.binders | {const})

    def merge(self, other: "Notations") -> "Notations":
        infix = dict(self.infix)
        infix.update(other.infix)
        prefix = dict(self.prefix)
        prefix.update(other.prefix)
        return Notations(infix, prefix, self.binders | other.binders)

    def symbols(self) -> set:
        return set(self.infix) | set(self.prefix) | {"->", "==", "!=="}

    def infix_for(self, const):
        for inf in self.infix.values():
            if inf.const == const:
                return inf
        return None

    def prefix_for(self, const):
        for sym, (prec, c) in self.prefix.items():
            if c == const:
                return sym, prec
        return None


# ---------------------------------------------------------------------------
# Lexer

OP_CHARS = set("!$%&*+-/<=>?@^|~;")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_TYVAR = re.compile(r"'[A-Za-z_][A-Za-z0-9_]*")
_SINGLE = {"(": "lparen", ")": "rparen", "\\": "lam", ":": "colon", ".": "dot", ",": "comma"}


@dataclass(frozen=True)
class Token:
    kind: str  # ident tyvar op lparen rparen lam colon dot comma eof
    text: str
    line: int
    col: int


def tokenize(text: str, symbols: Iterable[str] = (), line: int = 1, source=None):
    syms = sorted(set(symbols) | {"->", "==", "!==", "=", "!="}, key=len, reverse=True)
    tokens = []
    i = 0
    col0 = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            i += 1
            col0 = i
            continue
        if c.isspace():
            i += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        col = i - col0 + 1
        if c in _SINGLE:
            tokens.append(Token(_SINGLE[c], c, line, col))
            i += 1
            continue
        if c == "'":
            m = _TYVAR.match(text, i)
            if not m:
                raise ParseError("malformed type variable", line, col, source)
            tokens.append(Token("tyvar", m.group()[1:], line, col))
            i = m.end()
            continue
        m = _IDENT.match(text, i)
        if m:
            tokens.append(Token("ident", m.group(), line, col))
            i = m.end()
            continue
        if c in OP_CHARS:
            j = i
            while j < n and text[j] in OP_CHARS:
                j += 1
            run = text[i:j]
            for s in syms:
                if run.startswith(s):
                    tokens.append(Token("op", s, line, col))
                    i += len(s)
                    break
            else:
                tokens.append(Token("op", run, line, col))
                i = j
            continue
        raise ParseError(f"unexpected character {c!r}", line, col, source)
    tokens.append(Token("eof", "", line, n - col0 + 1))
    return tokens


# ---------------------------------------------------------------------------
# Parser

_APP_PREC = 1000


class _Parser:
    def __init__(self, tokens, sig=None, notations=None, strict=False, source=None,
                 type_names=None):
        self.toks = tokens
        self.pos = 0
        self.sig = sig
        self.nt = notations or Notations.default()
        self.strict = strict
        self.source = source
        self.type_names = type_names

    # helpers
    def peek(self, k=0):
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self):
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col, self.source)

    def expect(self, kind, text=None):
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            self.error(f"expected {want!r}, found {tok.text or tok.kind!r}")
        return self.next()

    def at_end(self):
        return self.peek().kind == "eof"

    # types
    def type(self):
        dom = self.btype()
        if self.peek().kind == "op" and self.peek().text == "->":
            self.next()
            return Arrow(dom, self.type())
        return dom

    def btype(self):
        tok = self.peek()
        if tok.kind == "ident":
            self.next()
            if self.type_names is not None and tok.text not in self.type_names:
                self.error(f"unknown type constant {tok.text!r}", tok)
            return TyConst(tok.text)
        if tok.kind == "tyvar":
            self.next()
            return TyVar(tok.text)
        if tok.kind == "lparen":
            self.next()
            ty = self.type()
            self.expect("rparen")
            return ty
        self.error(f"expected a type, found {tok.text or tok.kind!r}")

    # terms
    def is_const(self, name, bound):
        return name not in bound and self.sig is not None and name in self.sig

    def binder_ahead(self, bound):
        tok = self.peek()
        if tok.kind == "lam":
            return True
        if tok.kind == "ident" and tok.text in self.nt.binders and self.is_const(tok.text, bound):
            k = 1
            while self.peek(k).kind == "ident":
                k += 1
            return k > 1 and self.peek(k).kind in ("colon", "dot")
        return False

    def binder(self, bound):
        # ``\x y:T. t`` abbreviates ``\x:T. \y:T. t``; likewise for binder constants
        tok = self.next()
        names = [self.expect("ident").text]
        while self.peek().kind == "ident":
            names.append(self.next().text)
        ty = None
        if self.peek().kind == "colon":
            self.next()
            ty = self.type()
        self.expect("dot")
        body = self.term(0, bound | set(names))
        for name in reversed(names):
            body = Lam(name, ty, body)
            if tok.kind != "lam":
                body = App(Const(tok.text), body)
        return body

    def term(self, min_prec, bound):
        if self.binder_ahead(bound):
            return self.binder(bound)
        tok = self.peek()
        if tok.kind == "op" and tok.text in self.nt.prefix:
            prec, const = self.nt.prefix[tok.text]
            self.next()
            operand = self.term(prec, bound)
            lhs = App(Const(const), operand)
        else:
            lhs = self.application(bound)
        last_none = None
        while True:
            tok = self.peek()
            if tok.kind != "op" or tok.text not in self.nt.infix:
                return lhs
            inf = self.nt.infix[tok.text]
            if inf.prec < min_prec:
                return lhs
            if last_none == inf.prec and inf.assoc == "none":
                raise self.error(f"operator {tok.text!r} is not associative; add parentheses", tok)
            self.next()
            rhs = self.term(inf.prec if inf.assoc == "right" else inf.prec + 1, bound)
            lhs = App(App(Const(inf.const), lhs), rhs)
            last_none = inf.prec if inf.assoc == "none" else None

    def starts_atom(self, bound):
        tok = self.peek()
        return tok.kind in ("ident", "lparen") or self.binder_ahead(bound)

    def application(self, bound):
        if not self.starts_atom(bound):
            tok = self.peek()
            self.error(f"expected a term, found {tok.text or tok.kind!r}")
        t = self.atom(bound)
        while self.starts_atom(bound):
            if self.binder_ahead(bound):
                return App(t, self.binder(bound))
            t = App(t, self.atom(bound))
        return t

    def atom(self, bound):
        tok = self.next()
        if tok.kind == "ident":
            name = tok.text
            if self.is_const(name, bound):
                return Const(name)
            if name not in bound and self.strict:
                self.pos -= 1
                self.error(f"unknown identifier {name!r}")
            return Var(name)
        if tok.kind == "lparen":
            t = self.term(0, bound)
            if self.peek().kind == "colon":
                self.next()
                ty = self.type()
                if isinstance(t, Var):
                    t = Var(t.name, ty)
                elif isinstance(t, Const):
                    t = Const(t.name, ty)
                else:
                    self.error("only identifiers take an occurrence annotation")
            self.expect("rparen")
            return t
        self.pos -= 1
        self.error(f"expected a term, found {tok.text or tok.kind!r}")


def parse_type(text: str, type_names=None, source=None) -> Type:
    p = _Parser(tokenize(text, source=source), source=source, type_names=type_names)
    ty = p.type()
    if not p.at_end():
        p.error(f"unexpected {p.peek().text!r} after type")
    return ty


def parse_term(text: str, sig: Optional[Signature] = None, notations: Optional[Notations] = None,
               strict: bool = False, source=None, line: int = 1) -> Term:
    """Parse a term.  Identifiers that name constants of ``sig`` become ``Const``."""
    nt = notations or Notations.default()
    toks = tokenize(text, nt.symbols(), line=line, source=source)
    p = _Parser(toks, sig, nt, strict, source)
    t = p.term(0, frozenset())
    if not p.at_end():
        p.error(f"unexpected {p.peek().text!r}")
    return t


def parse_terms_sep(text: str, sep: str, sig=None, notations=None, strict=False, source=None,
                    line: int = 1):
    """Parse ``t1 SEP t2`` where SEP is an operator not used by the notation table."""
    nt = notations or Notations.default()
    toks = tokenize(text, nt.symbols() | {sep}, line=line, source=source)
    p = _Parser(toks, sig, nt, strict, source)
    left = p.term(0, frozenset())
    p.expect("op", sep)
    right = p.term(0, frozenset())
    if not p.at_end():
        p.error(f"unexpected {p.peek().text!r}")
    return left, right


# ---------------------------------------------------------------------------
# Printer


def print_term(t: Term, notations: Optional[Notations] = None) -> str:
    """Render ``t`` in concrete syntax with minimal parentheses."""
    return _Printer(notations or Notations.default()).show(t, 0)


class _Printer:
    def __init__(self, nt: Notations):
        self.nt = nt

    def show(self, t, ctx):
        s, prec = self.render(t)
        if prec < ctx:
            return f"({s})"
        return s

    def binder_text(self, head, lam):
        ann = "" if lam.ty is None else ":" + format_type(lam.ty)
        return f"{head}{lam.bound}{ann}. {self.show(lam.body, 0)}"

    def render(self, t):
        if isinstance(t, (Var, Const)):
            return t.name, _APP_PREC + 1
        if isinstance(t, Lam):
            return self.binder_text("\\", t), 0
        head, args = spine(t)
        if isinstance(head, Const):
            if len(args) == 1 and head.name in self.nt.binders and isinstance(args[0], Lam):
                return self.binder_text(head.name + " ", args[0]), 0
            inf = self.nt.infix_for(head.name)
            if inf is not None and len(args) == 2:
                lp = inf.prec if inf.assoc == "left" else inf.prec + 1
                rp = inf.prec if inf.assoc == "right" else inf.prec + 1
                return f"{self.show(args[0], lp)} {inf.symbol} {self.show(args[1], rp)}", inf.prec
            pre = self.nt.prefix_for(head.name)
            if pre is not None and len(args) == 1:
                sym, prec = pre
                return f"{sym}{self.show(args[0], prec)}", prec
        parts = [self.show(head, _APP_PREC + 1)]
        parts += [self.show(a, _APP_PREC + 1) for a in args]
        return " ".join(parts), _APP_PREC
