"""Boolean-algebra-valued models.

The truth domain is the power set of ``k`` atoms, an element being a
bitmask.  Equality at ``o`` is the biconditional, equality at the
individual type is a degree-of-equality table ``q``, and equality at a
function type is the meet, over all arguments, of equality of the values.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import reduce
from typing import Mapping, Optional, Sequence

from .errors import CapExceeded, TheoryError
from .kernel import BOOL, Arrow
from .semantics import DEFAULT_CAP, Frame, Model, Semantics, denote


class QFunctionError(TheoryError):
    pass


@dataclass(frozen=True)
class BoolAlg:
    atoms: int

    def __post_init__(self):
        if self.atoms < 1:
            raise ValueError("a Boolean algebra needs at least one atom")

    @property
    def size(self):
        return 1 << self.atoms

    @property
    def top(self):
        return self.size - 1

    bottom = 0

    def elements(self):
        return range(self.size)

    def meet(self, a, b):
        return a & b

    def join(self, a, b):
        return a | b

    def compl(self, a):
        return self.top ^ a

    def imp(self, a, b):
        return (self.top ^ a) | b

    def iff(self, a, b):
        return self.top ^ (a ^ b)

    def leq(self, a, b):
        return a & ~b == 0

    def big_meet(self, xs):
        return reduce(lambda a, b: a & b, xs, self.top)

    def big_join(self, xs):
        return reduce(lambda a, b: a | b, xs, 0)

    def show(self, a):
        if a == self.top:
            return "1"
        if a == 0:
            return "0"
        return "{" + ",".join(f"a{j}" for j in range(self.atoms) if a >> j & 1) + "}"


@dataclass(frozen=True)
class QFunction:
    table: tuple          # table[x][y] is the degree to which x equals y

    @classmethod
    def of(cls, rows: Sequence[Sequence[int]]):
        return cls(tuple(tuple(r) for r in rows))

    @classmethod
    def crisp(cls, alg: BoolAlg, n: int):
        return cls.of([[alg.top if x == y else 0 for y in range(n)] for x in range(n)])

    @classmethod
    def constant(cls, value: int, n: int):
        return cls.of([[value] * n for _ in range(n)])

    @property
    def size(self):
        return len(self.table)

    def __call__(self, x, y):
        return self.table[x][y]


@dataclass(frozen=True)
class QValidation:
    ok: bool
    condition: Optional[str] = None
    witness: tuple = ()

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "valid"
        return f"violates {self.condition} at {self.witness}"


def validate_q(q: QFunction, alg: BoolAlg) -> QValidation:
    """Check ``q`` is commutative, reflexive (degree 1) and satisfies q(x,y)q(x,z) <= q(y,z)."""
    n = q.size
    if any(len(row) != n for row in q.table):
        return QValidation(False, "square", ())
    for x in range(n):
        for y in range(n):
            if not 0 <= q(x, y) < alg.size:
                return QValidation(False, "range", (x, y))
    for x in range(n):
        for y in range(x + 1, n):
            if q(x, y) != q(y, x):
                return QValidation(False, "commutative", (x, y))
    for a in range(n):
        if q(a, a) != alg.top:
            return QValidation(False, "reflexive", (a,))
    for x in range(n):
        for y in range(n):
            for z in range(n):
                if not alg.leq(q(x, y) & q(x, z), q(y, z)):
                    return QValidation(False, "euclidean", (x, y, z))
    return QValidation(True)


def random_valid_q(alg: BoolAlg, n: int, rng: Optional[random.Random] = None) -> QFunction:
    """A valid q built from one random partition of the individuals per atom."""
    rng = rng or random.Random(0)
    blocks = [[rng.randrange(n) for _ in range(n)] for _ in range(alg.atoms)]
    rows = [[sum(1 << j for j in range(alg.atoms) if blocks[j][x] == blocks[j][y])
             for y in range(n)] for x in range(n)]
    return QFunction.of(rows)


def bvalued_semantics(alg: BoolAlg, sizes: Mapping, q: Mapping, cap: int = DEFAULT_CAP) -> Semantics:
    tables = {}
    for base, qf in q.items():
        v = validate_q(qf, alg)
        if not v:
            raise QFunctionError(f"invalid q for {base}: {v}")
        if qf.size != sizes.get(base):
            raise QFunctionError(f"q for {base} has {qf.size} rows but the domain has "
                                 f"{sizes.get(base)} elements")
        tables[base] = qf.table
    return Semantics(Frame(dict(sizes)), cap, alg, tables)


def eval_bvalued(t, alg: BoolAlg, base_size: int, q: Optional[QFunction] = None, env=None,
                 valuation=None, base: str = "i", sizes: Optional[Mapping] = None,
                 consts: Optional[Mapping] = None, cap: int = DEFAULT_CAP):
    """Algebra element denoted by ``t`` (q defaults to the crisp identity)."""
    sizes = dict(sizes or {})
    sizes[base] = base_size
    q = q if q is not None else QFunction.crisp(alg, base_size)
    sem = bvalued_semantics(alg, sizes, {base: q}, cap)
    model = Model(sem.frame, dict(consts or {}))
    return denote(t, model, valuation, env=env, cap=cap, sem=sem)


# ---------------------------------------------------------------------------
# Measured behaviour of the defined connectives


@dataclass
class ConnectiveMeasurement:
    name: str
    type: str
    table: Optional[dict]      # argument tuple -> value (None if not computable)
    crisp: Optional[bool]      # values on {0, top} inputs lie in {0, top}
    note: str = ""
    algebraic: Optional[bool] = None   # agrees with the algebra's own operation


def _intended(alg, name):
    ops = {"true": lambda: alg.top, "false": lambda: 0, "not": alg.compl, "and": alg.meet,
           "and_henkin": alg.meet, "or": alg.join, "imp": alg.imp, "iff": alg.iff}
    return ops.get(name)


def measure_connectives(env, alg: BoolAlg, names=("true", "false", "not", "and", "and_henkin",
                                                   "or", "imp", "iff"),
                        cap: int = DEFAULT_CAP) -> list:
    """Denotations of defined connectives over ``alg`` (recorded, not asserted)."""
    out = []
    sem = Semantics(Frame({b: 1 for b in env.base_types}), cap, alg, {})
    for name in names:
        if name not in env.defs:
            continue
        t, ty = env.elaborate(env.parse(name))
        arity = 0
        cur = ty
        while isinstance(cur, Arrow):
            arity += 1
            cur = cur.cod
        shown = _fmt(ty)
        try:
            v = denote(t, Model(sem.frame), env=env, cap=cap, sem=sem)
        except CapExceeded as exc:
            out.append(ConnectiveMeasurement(name, shown, None, None, f"cap exceeded: {exc}"))
            continue
        table = {}
        args_list = _tuples(alg.size, arity)
        for args in args_list:
            r, cty = v, ty
            for a in args:
                r = sem.apply(r, a, cty)
                cty = cty.cod
            table[args] = r
        crispset = {0, alg.top}
        crisp = all(r in crispset for args, r in table.items() if set(args) <= crispset)
        op = _intended(alg, name)
        algebraic = None if op is None else all(op(*args) == r for args, r in table.items())
        out.append(ConnectiveMeasurement(name, shown, table, crisp, algebraic=algebraic))
    return out


def _tuples(n, k):
    if k == 0:
        return [()]
    return [t + (x,) for t in _tuples(n, k - 1) for x in range(n)]


def _fmt(ty):
    from .kernel import format_type

    return format_type(ty)


def format_measurements(ms, alg: BoolAlg) -> str:
    lines = [f"defined connectives over the {alg.size}-element algebra"]
    for m in ms:
        if m.table is None:
            lines.append(f"{m.name} : {m.type}  ({m.note})")
            continue
        lines.append(f"{m.name} : {m.type}  crisp on crisp inputs: {m.crisp}, "
                     f"agrees with the algebra operation: {m.algebraic}")
        for args, r in m.table.items():
            lhs = " ".join(alg.show(a) for a in args) or "(value)"
            lines.append(f"  {lhs} -> {alg.show(r)}")
    return "\n".join(lines)
