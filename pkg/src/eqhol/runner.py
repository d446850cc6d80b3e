"""Executing the ``check`` directives of a theory file."""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import CapExceeded, KernelError, ParseError, TheoryError
from .kernel import BOOL, constants, format_type, print_term
from .reduction import betaeta_equal, canonical_type_vars, normalize, unfold
from .semantics import (DEFAULT_CAP, Frame, Model, Semantics, check_valid, denote, render,
                        semantically_equal, size_assignments)
from .theory import Check, TheoryEnv, dualize, read_theory

PASS, FAIL, ERROR = "pass", "fail", "error"


@dataclass
class RunOptions:
    sizes: Optional[dict] = None      # base -> list of sizes; per-check options override
    cap: int = DEFAULT_CAP
    atoms: Optional[int] = None
    q: Optional[dict] = None          # base -> rows
    strict: bool = False


@dataclass
class CheckResult:
    index: int
    kind: str
    name: str
    line: int
    verdict: str
    detail: str = ""
    witness: Optional[dict] = None
    elapsed: float = 0.0
    cap_exceeded: bool = False

    def to_dict(self, timings=True):
        d = {"check": self.name, "kind": self.kind, "line": self.line, "verdict": self.verdict,
             "witness": self.witness, "detail": self.detail}
        if timings:
            d["elapsed"] = round(self.elapsed, 6)
        return d


@dataclass
class Report:
    source: str
    results: list = field(default_factory=list)

    @property
    def passed(self):
        return sum(r.verdict == PASS for r in self.results)

    @property
    def exit_status(self):
        if any(r.cap_exceeded for r in self.results):
            return 3
        if any(r.verdict != PASS for r in self.results):
            return 1
        return 0

    def format(self, timings=True) -> str:
        lines = [f"theory {self.source}"]
        for r in self.results:
            head = f"[{r.index}] {r.kind} {r.name} (line {r.line}): {r.verdict.upper()}"
            if timings:
                head += f"  {r.elapsed:.3f}s"
            lines.append(head)
            for d in r.detail.splitlines():
                lines.append("    " + d)
        n = len(self.results)
        lines.append(f"{n} checks, {self.passed} passed, {n - self.passed} failed")
        return "\n".join(lines)

    def to_json(self, timings=True) -> str:
        return json.dumps({"source": self.source,
                           "checks": [r.to_dict(timings) for r in self.results],
                           "passed": self.passed, "total": len(self.results),
                           "status": self.exit_status}, indent=2)


# ---------------------------------------------------------------------------
# Option parsing

_SIZE_ITEM = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*[:=]\s*(\d+)(?:\s*\.\.\s*(\d+))?\s*$")


def parse_sizes(text: str) -> dict:
    """``i:1..3,w:2`` (or ``i=1..3``) to ``{"i": [1, 2, 3], "w": [2]}``."""
    out = {}
    for item in text.split(","):
        if not item.strip():
            continue
        m = _SIZE_ITEM.match(item)
        if not m:
            raise ValueError(f"bad size item {item!r} (expected NAME:N or NAME:LO..HI)")
        lo = int(m.group(2))
        hi = int(m.group(3)) if m.group(3) else lo
        if lo < 1 or hi < lo:
            raise ValueError(f"bad size range in {item!r}")
        out[m.group(1)] = list(range(lo, hi + 1))
    return out


def parse_algebra(text: str) -> int:
    m = re.fullmatch(r"\s*atoms\s*=\s*(\d+)\s*", text)
    if not m or int(m.group(1)) < 1:
        raise ValueError(f"bad algebra {text!r} (expected atoms=K)")
    return int(m.group(1))


def load_q(spec, base="i") -> dict:
    """A q table from a JSON file path or JSON text: a matrix or ``{base: matrix}``."""
    if isinstance(spec, dict):
        return spec
    text = spec
    if not text.lstrip().startswith(("[", "{")):
        text = Path(spec).read_text()
    data = json.loads(text)
    if isinstance(data, list):
        data = {base: data}
    return data


def _merged(check: Check, opts: RunOptions):
    o = check.options
    known = {"sizes", "cap", "atoms", "q", "expect", "level", "mode"}
    unknown = set(o) - known
    if unknown:
        raise ParseError(f"unknown check option(s) {', '.join(sorted(unknown))}", check.line, 1,
                         check.source)
    sizes = dict(opts.sizes or {})
    if "sizes" in o:
        sizes.update(parse_sizes(o["sizes"]))
    cap = int(o["cap"]) if "cap" in o else opts.cap
    atoms = int(o["atoms"]) if "atoms" in o else opts.atoms
    q = opts.q
    if "q" in o:
        path = o["q"]
        if check.base_dir and not path.lstrip().startswith(("[", "{")):
            path = str(Path(check.base_dir) / path)
        q = load_q(path)
    return sizes, cap, atoms, q


def _algebra(atoms, q, sizes, cap):
    if atoms is None:
        if q:
            raise TheoryError("a q table needs an algebra (atoms=K)")
        return None, None
    from .bvalued import BoolAlg, QFunction, validate_q, QFunctionError

    alg = BoolAlg(atoms)
    tables = {}
    for base, rows in (q or {}).items():
        qf = QFunction.of(rows)
        v = validate_q(qf, alg)
        if not v:
            raise QFunctionError(f"invalid q for {base}: {v}")
        tables[base] = qf.table
        sizes[base] = [qf.size]
    return alg, tables


# ---------------------------------------------------------------------------
# Check execution


def _statement(env, check):
    return env.parse(check.payload, check.line, check.source)


def _pair(env, check, seps=("!==", "==")):
    for sep in seps:
        parts = _split_top(check.payload, sep)
        if parts is not None:
            a, b = parts
            return sep, env.parse(a, check.line, check.source), env.parse(b, check.line,
                                                                        check.source)
    return None, env.parse(check.payload, check.line, check.source), None


def _split_top(text, sep):
    """Split at the single top-level occurrence of ``sep`` (not inside parentheses)."""
    depth, hits = 0, []
    i = 0
    while i < len(text):
        c = text[i]
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
        elif depth == 0 and text.startswith(sep, i):
            # do not split "!==" when looking for "=="
            if not (sep == "==" and i > 0 and text[i - 1] == "!"):
                hits.append(i)
                i += len(sep)
                continue
        i += 1
    if len(hits) != 1:
        return None
    k = hits[0]
    return text[:k], " " * (k + len(sep)) + text[k + len(sep):]


def run_check(env: TheoryEnv, check: Check, opts: RunOptions, index: int = 1) -> CheckResult:
    name = check.name or f"{check.kind}_{check.line}"
    res = CheckResult(index, check.kind, name, check.line, FAIL)
    start = time.perf_counter()
    try:
        sizes, cap, atoms, q = _merged(check, opts)
        alg, tables = _algebra(atoms, q, sizes, cap)
        _RUNNERS[check.kind](env, check, res, sizes, cap, alg, tables)
    except CapExceeded as exc:
        res.verdict = ERROR
        res.detail = f"cap exceeded: {exc}"
        res.cap_exceeded = True
    res.elapsed = time.perf_counter() - start
    return res


def _run_valid(env, check, res, sizes, cap, alg, tables, want_valid=True):
    goal = env.term(_statement(env, check), BOOL)
    v = check_valid(goal, env, sizes, cap, alg=alg, q=tables)
    ok = v.valid == want_valid
    res.verdict = PASS if ok else FAIL
    if v.countermodel is not None:
        res.detail = "countermodel:\n" + v.countermodel.format()
        res.witness = v.countermodel.to_dict()
    else:
        res.detail = f"valid in all {v.models} models examined"
        if not want_valid:
            res.detail = "no countermodel: " + res.detail


def _run_countermodel(env, check, res, sizes, cap, alg, tables):
    _run_valid(env, check, res, sizes, cap, alg, tables, want_valid=False)


def _run_normal_eq(env, check, res, sizes, cap, alg, tables):
    sep, a, b = _pair(env, check)
    if b is None:
        raise ParseError("normal-eq: expected `A == B` or `A !== B`", check.line, 1, check.source)
    mode = check.options.get("mode", "beta-eta")
    same = betaeta_equal(a, b, env, mode)
    res.verdict = PASS if same == (sep == "==") else FAIL
    na = canonical_type_vars(normalize(env.term(a), env, mode))
    nb = canonical_type_vars(normalize(env.term(b), env, mode))
    res.detail = (f"normal forms {'agree' if same else 'differ'}\n"
                  f"  lhs: {print_term(na, env.notations)}\n  rhs: {print_term(nb, env.notations)}")
    res.witness = {"equal": same, "lhs": print_term(na, env.notations),
                   "rhs": print_term(nb, env.notations)}


def _run_eval(env, check, res, sizes, cap, alg, tables):
    t, ty = env.elaborate(_statement(env, check))
    t = unfold(t, env)
    from .kernel import free_var_names, term_type_vars

    if free_var_names(t):
        raise TheoryError("eval needs a closed term")
    if term_type_vars(t):
        raise TheoryError("eval needs a term of concrete type")
    from .semantics import _collect_bases

    needed = _collect_bases(t, set())
    assignment = size_assignments({b: (v[0] if isinstance(v, list) else v)
                                   for b, v in sizes.items()}, needed)[0]
    sem = Semantics(Frame(assignment), cap, alg, tables)
    if any(c in env.uninterpreted() for c in {k.name for k in constants(t)}):
        raise TheoryError("eval needs a term without uninterpreted constants")
    value = denote(t, Model(sem.frame), env=env, cap=cap, sem=sem)
    shown = render(value, ty, sem)
    expect = check.options.get("expect")
    res.witness = {"value": shown, "type": format_type(ty), "sizes": assignment}
    res.detail = f"value: {shown}"
    if expect is None:
        res.verdict = PASS
    else:
        norm = {"true": "T", "false": "F", "top": "1", "bot": "0"}.get(expect.lower(), expect)
        res.verdict = PASS if shown.replace(" ", "") == norm.replace(" ", "") else FAIL
        if res.verdict == FAIL:
            res.detail += f" (expected {expect})"


def _run_dualize(env, check, res, sizes, cap, alg, tables):
    sep, a, b = _pair(env, check, ("==",))
    d = dualize(env.term(a), env)
    shown = print_term(canonical_type_vars(normalize(d)), env.notations)
    res.witness = {"dual": shown}
    if b is None:
        res.verdict = PASS
        res.detail = f"dual: {shown}"
        return
    level = check.options.get("level", "any")
    if level not in ("any", "beta-eta", "semantic"):
        raise ParseError(f"dualize: unknown level {level!r}", check.line, 1, check.source)
    found = None
    if level in ("any", "beta-eta") and _dual_betaeta(env, d, b):
        found = "beta-eta"
    elif level in ("any", "semantic"):
        if semantically_equal(d, b, env, sizes or None, cap=cap).valid:
            found = "semantic"
    res.verdict = PASS if found else FAIL
    res.witness["level"] = found
    res.detail = f"dual: {shown}\nequal at level: {found or 'none'}"


def _dual_betaeta(env, d, b):
    from .typecheck import elaborate_many

    try:
        (dd, bb), _, _ = elaborate_many([d, b], env, same_type=True)
    except KernelError:
        return False
    return betaeta_equal(unfold(dd, env), unfold(bb, env))


_RUNNERS = {
    "valid": _run_valid,
    "countermodel": _run_countermodel,
    "normal-eq": _run_normal_eq,
    "eval": _run_eval,
    "dualize": _run_dualize,
}


def run_theory(text: str, opts: Optional[RunOptions] = None, source="<input>", base_dir=None,
               env: Optional[TheoryEnv] = None) -> Report:
    """Load ``text`` and run its checks in file order.  Input errors propagate."""
    opts = opts or RunOptions()
    env = env or TheoryEnv(strict=opts.strict)
    env, checks = read_theory(text, env, source, base_dir)
    report = Report(source)
    for k, c in enumerate(checks, 1):
        report.results.append(run_check(env, c, opts, k))
    return report


def run_file(path, opts: Optional[RunOptions] = None) -> Report:
    path = Path(path)
    return run_theory(path.read_text(), opts, str(path), str(path.parent))
