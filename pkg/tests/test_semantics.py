import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from eqhol.errors import CapExceeded, TheoryError
from eqhol.kernel import NEQ, BOOL, App, Arrow, Const, Lam, TyConst, Var, parse_type
from eqhol.semantics import (Frame, Model, Semantics, check_valid, decode, denote,
                             enumerate_domain, find_countermodel, frame_correspondence,
                             function_table, modal_env, semantically_equal, size_assignments)
from eqhol.theory import (DUAL_PAIRS, dualize, env_with, iota_env_extension, q0_env,
                          via_negativa_env)
from eqhol.reduction import unfold

import gen

I = TyConst("i")


# -- a naive evaluator used as an oracle ----------------------------------
# Functions are tuples of values indexed by the position of the argument in
# its (independently enumerated) domain list.

def _dom(ty, n, cache={}):
    key = (ty, n)
    if key not in cache:
        if ty == BOOL:
            cache[key] = [0, 1]
        elif isinstance(ty, TyConst):
            cache[key] = list(range(n))
        else:
            a, b = _dom(ty.dom, n), _dom(ty.cod, n)
            cache[key] = [tuple(p) for p in itertools.product(b, repeat=len(a))]
    return cache[key]


def _type_of(t, ctx):
    if isinstance(t, Var):
        return t.ty
    if isinstance(t, Const):
        return t.ty
    if isinstance(t, Lam):
        return Arrow(t.ty, _type_of(t.body, {**ctx, t.bound: t.ty}))
    return _type_of(t.fun, ctx).cod


def oracle(t, rho, n):
    if isinstance(t, Var):
        return rho[t.name]
    if isinstance(t, Const):
        assert t.name == "Q"
        a = t.ty.dom
        d = _dom(a, n)
        return tuple(tuple(int(x == y) for y in d) for x in d)
    if isinstance(t, Lam):
        return tuple(oracle(t.body, {**rho, t.bound: v}, n) for v in _dom(t.ty, n))
    f = oracle(t.fun, rho, n)
    a = _type_of(t.arg, {})
    return f[_dom(a, n).index(oracle(t.arg, rho, n))]


def rand_formula(rng, depth=3):
    """Closed-ish formula (free c_o, c_i) built from Q at random types."""
    ty = gen.rand_type(rng, 2)
    q = Const("Q", Arrow(ty, Arrow(ty, BOOL)))
    a = gen.rand_typed_term(rng, ty, depth=depth)
    b = gen.rand_typed_term(rng, ty, depth=depth)
    return App(App(q, a), b)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([1, 2]), st.integers(0, 1), st.integers(0, 1))
def test_denote_agrees_with_naive_oracle(seed, n, co, ci):
    rng = gen.rng(seed)
    t = rand_formula(rng)
    ci = ci % n
    val = {"c_o": co, "c_i": ci}
    try:
        got = denote(t, Model(Frame({"i": n})), val)
    except CapExceeded:
        return
    assert got == oracle(t, val, n)


# -- domains ----------------------------------------------------------------

def test_domain_sizes():
    f = Frame({"i": 3})
    assert len(enumerate_domain(BOOL, f)) == 2
    assert len(enumerate_domain(Arrow(I, BOOL), f)) == 8
    oo = parse_type("o -> o -> o")
    assert len(enumerate_domain(oo, f)) == 16
    assert len(_dom(oo, 3)) == 16


def test_domain_cap():
    with pytest.raises(CapExceeded):
        enumerate_domain(parse_type("(i -> o) -> o", {"i", "o"}), Frame({"i": 5}), cap=10**6)
    with pytest.raises(CapExceeded):
        enumerate_domain(Arrow(I, BOOL), Frame({"i": 4}), cap=15)
    # astronomically large types are refused without computing their size
    big = parse_type("((i -> o) -> o) -> o", {"i", "o"})
    with pytest.raises(CapExceeded):
        Semantics(Frame({"i": 8})).domain(big)


def test_frame_validation():
    with pytest.raises(TheoryError):
        Frame({"i": 0})
    with pytest.raises(TheoryError):
        Frame({"o": 2})
    with pytest.raises(TheoryError, match="no size"):
        Frame({}).size_of("i")


def test_size_assignments():
    assert size_assignments(None, ["i"]) == [{"i": 1}, {"i": 2}]
    assert size_assignments({"i": 3, "w": [1, 2]}, ["w", "i"]) == [{"i": 3, "w": 1},
                                                                  {"i": 3, "w": 2}]
    with pytest.raises(TheoryError):
        size_assignments([{"i": 1}], ["i", "w"])


# -- denotation -------------------------------------------------------------

def test_denote_basics():
    env = q0_env("i")
    for n in (1, 2, 3):
        m = Model(Frame({"i": n}))
        assert denote("not true", m, env=env) == 0
        assert denote("true", m, env=env) == 1
        for p, q in itertools.product((0, 1), repeat=2):
            assert denote("and p q", m, {"p": p, "q": q}, env) == (p & q)
            assert denote("p | q", m, {"p": p, "q": q}, env) == (p | q)
            assert denote("p -> q", m, {"p": p, "q": q}, env) == ((1 - p) | q)
            assert denote("p <-> q", m, {"p": p, "q": q}, env) == int(p == q)
        sem = Semantics(Frame({"i": n}))
        ident = denote("\\x:i. x", m, env=env, sem=sem)
        assert function_table(ident, Arrow(I, I), sem) == {x: x for x in range(n)}


def test_decode_structures():
    sem = Semantics(Frame({"i": 2}))
    m = Model(sem.frame)
    env = q0_env("i")
    v = denote("\\x:i. \\y:i. x = y", m, env=env, sem=sem)
    assert decode(v, parse_type("i -> i -> o", {"i", "o"}), sem) == {
        0: {0: True, 1: False}, 1: {0: False, 1: True}}


def test_denote_errors():
    env = q0_env("i")
    m = Model(Frame({"i": 2}))
    with pytest.raises(TheoryError, match="free variable"):
        denote("p & p", m, env=env)
    with pytest.raises(TheoryError, match="schematic"):
        denote("Q", m, env=env)
    env2 = env.declare_const("c", "i")
    with pytest.raises(TheoryError, match="interpretation"):
        denote("c = c", m, env=env2)
    assert denote("c = c", Model(m.frame, {"c": 1}), env=env2) == 1


def test_forall_is_equality_with_the_true_set():
    env = q0_env("i")
    for n in (1, 2, 3):
        sem = Semantics(Frame({"i": n}))
        m = Model(sem.frame)
        top = (1 << n) - 1
        for p in range(1 << n):
            assert denote("forall x:i. P x", m, {"P": p}, env, sem=sem) == int(p == top)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.data())
def test_forall_property(n, data):
    env = q0_env("i")
    p = data.draw(st.integers(0, (1 << n) - 1))
    m = Model(Frame({"i": n}))
    allv = denote("forall x:i. P x", m, {"P": p}, env)
    assert allv == all(p >> x & 1 for x in range(n))


# -- validity ----------------------------------------------------------------

def test_de_morgan_valid():
    env = q0_env("i")
    v = check_valid("forall p q:o. forall x:i. not (p & x = x) <-> (not p | not (x = x))", env, {"i": (1, 2, 3)})
    assert v.valid and len(v.assignments) == 3


def test_countermodel_output():
    env = q0_env("i")
    v = check_valid("p | q -> p", env)
    assert not v.valid
    text = v.countermodel.format()
    assert "var p = F" in text and "var q = T" in text
    d = json.loads(v.countermodel.to_json())
    assert d["valuation"] == {"p : o": False, "q : o": True}


def test_countermodel_renders_functions_and_bases():
    env = q0_env("i").declare_const("c", "i")
    cm = find_countermodel("forall f:i -> o. f c", env, {"i": 2})
    text = cm.format()
    assert "base i = {e0,e1}" in text and "const c = e0" in text
    assert "iota" not in text
    cm2 = find_countermodel("P = (\\x:i. true)", env, {"i": 2})
    assert "var P = { e0->F, e1->F }" in cm2.format()


def test_countermodels_are_deterministic():
    env = q0_env("i")
    a = find_countermodel("forall x y:i. x = y", env, {"i": (1, 2, 3)})
    b = find_countermodel("forall x y:i. x = y", env, {"i": (1, 2, 3)})
    assert a.to_dict() == b.to_dict() and a.sizes == {"i": 2}


def test_schematic_goal_rejected():
    with pytest.raises(TheoryError, match="schematic"):
        check_valid("forall x. x = x", q0_env("i"))


def test_uninterpreted_constants_are_universal():
    env = q0_env("i").declare_const("p0", "o")
    assert not check_valid("p0", env).valid
    assert check_valid("p0 | not p0", env).valid


def test_axioms_filter_models():
    env = q0_env("i").declare_const("R", "i -> i -> o")
    goal = "forall x:i. R x x"
    assert not check_valid(goal, env, {"i": 2}).valid
    env2 = env.add_axiom("refl", "R x x")
    v = check_valid(goal, env2, {"i": 2})
    assert v.valid and v.models == 4
    assert not check_valid(goal, env2, {"i": 2}, use_axioms=False).valid


def test_choice_on_sets_needs_a_choice_operator():
    # the inductive description operator at i -> o picks the unique member of
    # a singleton family only, so it is no choice function for arbitrary ones
    env = iota_env_extension(q0_env("i"), ["i -> o"])
    goal = "forall F:(i -> o) -> o. forall x. F x -> F (iota_i_o F)"
    assert check_valid(goal, env, {"i": 1}).valid
    v = check_valid(goal, env, {"i": (1, 2)})
    assert not v.valid and v.countermodel.sizes == {"i": 2}


def test_cap_is_reported():
    env = q0_env("i")
    with pytest.raises(CapExceeded):
        check_valid("forall F:(i -> o) -> o. F = F", env, {"i": 5})
    with pytest.raises(CapExceeded):
        check_valid("forall x:i. x = x", env, {"i": 4}, cap=3)


def test_leibniz_agreement_at_function_type():
    env = q0_env("i")
    goal = "forall a b:i -> o. (forall f:(i -> o) -> o. f a -> f b) = (a = b)"
    assert check_valid(goal, env, {"i": (1, 2)}).valid


def test_semantically_equal_instantiates_type_variables():
    env = q0_env("i")
    assert semantically_equal("\\x y. D x y", "\\x y. not (x = y)", env).valid
    v = semantically_equal("\\p:o. p", "\\p:o. not p", env)
    assert not v.valid and v.countermodel is not None


# -- frames ---------------------------------------------------------------

def test_k_schema_on_all_frames():
    env = modal_env()
    k = "\\v. forall p q:w -> o. box R (\\u. p u -> q u) v -> box R p v -> box R q v"
    rep = frame_correspondence(k, "none", 3, env)
    assert rep.holds and rep.relations == 2 + 16 + 512


@pytest.mark.parametrize("axiom,prop", [
    ("\\v. forall p:w -> o. box R p v -> p v", "reflexive"),
    ("\\v. forall p:w -> o. box R p v -> dia R p v", "serial"),
    ("\\v. forall p:w -> o. dia R p v -> box R (dia R p) v", "euclidean"),
])
def test_correspondence(axiom, prop):
    assert frame_correspondence(axiom, prop, 3).holds


def test_correspondence_mismatch_is_reported():
    rep = frame_correspondence("\\v. forall p:w -> o. box R p v -> p v", "transitive", 2)
    assert not rep.holds
    assert "mismatch" in rep.format()
    with pytest.raises(TheoryError):
        frame_correspondence("\\v:w. true", "dense", 2)
    with pytest.raises(TheoryError, match="type"):
        frame_correspondence("\\v:w. \\u:w. true", "none", 2)


# -- duality at the level of denotations -----------------------------------

@pytest.mark.parametrize("pos,neg", DUAL_PAIRS)
def test_dual_denotations(pos, neg):
    pe, ne = q0_env("i"), via_negativa_env("i")
    d = dualize(pe.term(pos), pe)
    b = unfold(ne.term(neg), ne, keep=(NEQ,))
    assert semantically_equal(d, b, ne, {"i": (1, 2, 3)}).valid


def test_modal_env_parameters():
    env = modal_env()
    assert "R" in env.uninterpreted()
    assert env_with("modal", types=("w",)).uninterpreted() == {}


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 5000))
def test_size_at_most_matches_exact_size(seed, n, limit):
    # depth 2 keeps the exact size computable (at most 27^27)
    ty = gen.rand_type(gen.rng(seed), 2)
    sem = Semantics(Frame({"i": n}))
    assert sem.size_at_most(ty, limit) == min(sem.size(ty), limit + 1)
