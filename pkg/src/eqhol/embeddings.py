"""Definition packs embedding object logics into the equality-based HOL.

A pack is data: the definitions and notations of a pack file, plus the
parameters (relations, operators) the user is expected to supply or
constrain.  The pack objects here are read from the shipped ``.thy``
files so that the files remain the single source of truth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import TheoryError
from .kernel import EQ, Notations, constants
from .reduction import unfold
from .theory import Definition, TheoryEnv, env_with


@dataclass(frozen=True)
class EmbeddingPack:
    name: str
    required_consts: tuple      # (name, scheme) pairs the pack is parametric in
    defs: tuple                 # Definition objects, in file order
    notations: Notations
    prerequisites: tuple = ()
    base_types: tuple = ()

    def def_names(self):
        return [d.name for d in self.defs]

    def load(self, env: Optional[TheoryEnv] = None) -> TheoryEnv:
        """``env`` extended by this pack (a fresh environment with its base types by default)."""
        if env is None:
            env = env_with(types=self.base_types)
        for t in self.base_types:
            if t not in env.base_types:
                env = env.declare_type(t)
        return env.include(self.name)

    def parameters(self):
        return {name for name, _ in self.required_consts}


_PLAN = {
    # name: (prerequisite packs, base types, parameters the pack declares or expects)
    "modal": ((), ("w",), ()),
    "quant": (("modal",), ("w", "i"), ()),
    "lfi": (("modal",), ("w",), ("B",)),
    "rm": (("modal",), ("w",), ("R3",)),
    "relational": ((), ("i",), ()),
    "ll": (("relational",), ("i",), ()),
}


def _build(name: str) -> EmbeddingPack:
    prereq, types, params = _PLAN[name]
    env = env_with(*prereq, types=types)
    before_defs = set(env.defs)
    before_sig = set(env.signature.term_consts)
    before_not = env.notations
    after = env.include(name)
    defs = tuple(d for n, d in after.defs.items() if n not in before_defs)
    required = tuple((n, after.signature.term_consts[n]) for n in after.signature.term_consts
                     if n not in before_sig and n not in after.defs and n in params)
    infix = {s: i for s, i in after.notations.infix.items() if before_not.infix.get(s) != i}
    prefix = {s: p for s, p in after.notations.prefix.items() if before_not.prefix.get(s) != p}
    notations = Notations(infix, prefix, after.notations.binders - before_not.binders)
    return EmbeddingPack(name, required, defs, notations, prereq, types)


_CACHE = {}


def _pack(name):
    if name not in _CACHE:
        _CACHE[name] = _build(name)
    return _CACHE[name]


def modal_pack() -> EmbeddingPack:
    """Propositions as sets of worlds: set operations, box and diamond over a relation argument."""
    return _pack("modal")


def quantifier_pack() -> EmbeddingPack:
    """Lifted quantifiers, with constant- and varying-domain variants."""
    return _pack("quant")


def lfi_pack() -> EmbeddingPack:
    """Paraconsistent negation and consistency over a border operation B : (w -> o) -> w -> o."""
    return _pack("lfi")


def routley_meyer_pack() -> EmbeddingPack:
    """Fusion and its residuals over a ternary relation R3."""
    return _pack("rm")


def relational_pack() -> EmbeddingPack:
    """Boolean and Peircean operations on binary relations."""
    return _pack("relational")


def cyclic_ll_pack() -> EmbeddingPack:
    """Cyclic linear logic connectives read as relational operations."""
    return _pack("ll")


ALL_PACKS = {
    "modal": modal_pack,
    "quant": quantifier_pack,
    "lfi": lfi_pack,
    "rm": routley_meyer_pack,
    "relational": relational_pack,
    "ll": cyclic_ll_pack,
}

LFI_PRESETS = ("lfi-empty", "lfi-topological", "lfi-unconstrained")


def lfi_env(preset: str = "lfi-unconstrained", worlds: str = "w") -> TheoryEnv:
    if preset not in LFI_PRESETS:
        raise TheoryError(f"unknown border preset {preset!r}")
    return env_with(preset, types=(worlds,))


def residual_constants(defn: Definition, env: TheoryEnv) -> set:
    """Constants left in a fully unfolded definition body, other than Q."""
    body = unfold(defn.body, env)
    return {c.name for c in constants(body)} - {EQ}


def unfolds_to_identity(pack: EmbeddingPack, env: Optional[TheoryEnv] = None) -> dict:
    """Per definition: the constants other than Q left after unfolding that are not parameters."""
    env = env or pack.load()
    params = pack.parameters()
    out = {}
    for d in pack.defs:
        out[d.name] = residual_constants(env.definition(d.name), env) - params
    return out
