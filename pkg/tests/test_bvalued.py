import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from eqhol.bvalued import (BoolAlg, QFunction, QFunctionError, bvalued_semantics, eval_bvalued,
                           format_measurements, measure_connectives, random_valid_q, validate_q)
from eqhol.errors import TheoryError
from eqhol.semantics import Frame, Model, denote
from eqhol.theory import iota_env_extension, q0_env

from corpus import CORPUS

algs = st.integers(1, 3).map(BoolAlg)


@settings(max_examples=40, deadline=None)
@given(algs, st.data())
def test_algebra_laws(alg, data):
    el = st.integers(0, alg.top)
    a, b, c = data.draw(el), data.draw(el), data.draw(el)
    assert alg.meet(a, alg.join(b, c)) == alg.join(alg.meet(a, b), alg.meet(a, c))
    assert alg.compl(alg.meet(a, b)) == alg.join(alg.compl(a), alg.compl(b))
    assert alg.join(a, alg.compl(a)) == alg.top and alg.meet(a, alg.compl(a)) == 0
    assert alg.imp(a, b) == alg.top if alg.leq(a, b) else alg.imp(a, b) != alg.top
    assert alg.meet(alg.imp(a, b), alg.imp(b, a)) == alg.iff(a, b)


def test_algebra_basics():
    alg = BoolAlg(2)
    assert (alg.size, alg.top, alg.bottom) == (4, 3, 0)
    assert [alg.show(x) for x in alg.elements()] == ["0", "{a0}", "{a1}", "1"]
    assert alg.big_meet([]) == alg.top and alg.big_join([]) == 0
    with pytest.raises(ValueError):
        BoolAlg(0)


def test_validate_q():
    alg = BoolAlg(2)
    assert validate_q(QFunction.crisp(alg, 3), alg)
    assert validate_q(QFunction.constant(alg.top, 3), alg)
    v = validate_q(QFunction.of([[3, 0], [0, 1]]), alg)
    assert not v and v.condition == "reflexive" and v.witness == (1,)
    v = validate_q(QFunction.of([[3, 1], [2, 3]]), alg)
    assert v.condition == "commutative" and v.witness == (0, 1)
    v = validate_q(QFunction.of([[3, 1, 1], [1, 3, 0], [1, 0, 3]]), alg)
    assert v.condition == "euclidean" and v.witness == (0, 1, 2) and "euclidean" in str(v)
    assert validate_q(QFunction.of([[3, 7], [7, 3]]), alg).condition == "range"
    assert validate_q(QFunction.of([[3, 0], [0]]), alg).condition == "square"


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(1, 4), st.integers(0, 10**6))
def test_random_q_is_valid(atoms, n, seed):
    alg = BoolAlg(atoms)
    q = random_valid_q(alg, n, random.Random(seed))
    assert validate_q(q, alg)
    # condition checked directly, independently of validate_q
    for x, y, z in itertools.product(range(n), repeat=3):
        assert q(x, y) & q(x, z) & ~q(y, z) == 0
        assert q(x, y) == q(y, x)


@pytest.mark.parametrize("text,val", CORPUS)
def test_one_atom_is_standard(text, val):
    env = q0_env("i")
    alg = BoolAlg(1)
    for n in (1, 2):
        if any(k in ("y", "z") and v >= n for k, v in val.items()):
            continue
        std = denote(text, Model(Frame({"i": n})), val, env)
        assert eval_bvalued(text, alg, n, env=env, valuation=val) == std


def test_true_is_top():
    env = q0_env("i")
    for k in (1, 2, 3):
        alg = BoolAlg(k)
        assert eval_bvalued("true", alg, 2, env=env) == alg.top
        assert eval_bvalued("false", alg, 2, env=env) == 0


def test_equality_degrees():
    alg = BoolAlg(2)
    q = QFunction.of([[3, 1], [1, 3]])
    env = q0_env("i")
    assert eval_bvalued("(x:i) = y", alg, 2, q, env, {"x": 0, "y": 1}) == 1
    assert eval_bvalued("(p:o) = r", alg, 2, q, env, {"p": 1, "r": 2}) == alg.iff(1, 2) == 0
    # at a function type, the meet over arguments
    got = eval_bvalued("(\\x:i. x = a) = (\\x:i. x = b)", alg, 2, q, env, {"a": 0, "b": 1})
    want = alg.meet(alg.iff(q(0, 0), q(0, 1)), alg.iff(q(1, 0), q(1, 1)))
    assert got == want


def test_invalid_q_is_rejected():
    alg = BoolAlg(1)
    with pytest.raises(QFunctionError, match="reflexive"):
        eval_bvalued("true", alg, 2, QFunction.of([[1, 0], [0, 0]]), q0_env("i"))
    with pytest.raises(QFunctionError, match="rows"):
        bvalued_semantics(alg, {"i": 3}, {"i": QFunction.crisp(alg, 2)})


def test_descriptions_are_not_interpreted():
    env = iota_env_extension(q0_env("i"))
    with pytest.raises(TheoryError, match="algebra"):
        eval_bvalued("iota_i (\\x. true) = iota_i (\\x. true)", BoolAlg(1), 2, env=env)


def test_measured_connectives():
    env = q0_env("i")
    alg = BoolAlg(2)
    ms = {m.name: m for m in measure_connectives(env, alg)}
    for name in ("true", "false", "not", "iff"):
        assert ms[name].algebraic, name
    assert ms["and_henkin"].algebraic is False
    assert ms["and_henkin"].table[(1, 2)] == 0
    assert ms["and_henkin"].table[(3, 2)] == 2
    for name in ("and", "or", "imp"):
        assert ms[name].table is None and "cap" in ms[name].note
    text = format_measurements(list(ms.values()), alg)
    assert text.startswith("defined connectives over the 4-element algebra")
    # at one atom every connective is its classical table
    one = measure_connectives(env, BoolAlg(1))
    assert all(m.algebraic for m in one if m.algebraic is not None)
